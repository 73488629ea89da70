//! Sliding 3×3 filter: denoise an image of any size with 9-qubit solves.
//!
//! Every source pixel gets its own 3×3 patch (wrapping around the image
//! borders), its own couplings trained on the clean patch, and its own
//! annealing run on the noisy patch. Only the patch centre is kept.

use crate::autoencoder::{
    self, evaluate_with, BinaryImage, NeighborGraph, RestorationStats, SolveConfig, TrainConfig,
    WeightSet,
};
use crate::{seeds, Error, Result};

/// Side length of the filter window.
pub const FILTER_SIZE: usize = 3;
/// Index of the window centre in a row-major 3×3 patch.
pub const CENTER_INDEX: usize = 4;
/// Edges in the 3×3 torus graph every patch uses.
pub const PATCH_EDGES: usize = 18;

/// A 3×3 window and the source pixel it is centred on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    pub image: BinaryImage,
    pub center: (usize, usize),
}

/// 3×3 window centred at `(x, y)` with periodic wrap of the full image.
pub fn extract_patch(image: &BinaryImage, x: usize, y: usize) -> Result<Patch> {
    let (w, h) = (image.width(), image.height());
    if x >= w || y >= h {
        return Err(Error::Index(format!(
            "patch centre ({x}, {y}) outside {w}x{h} image"
        )));
    }
    let mut pixels = Vec::with_capacity(FILTER_SIZE * FILTER_SIZE);
    for dy in 0..FILTER_SIZE {
        // (y + dy - 1) mod h without going negative.
        let sy = (y + h + dy - 1) % h;
        for dx in 0..FILTER_SIZE {
            let sx = (x + w + dx - 1) % w;
            pixels.push(image.get(sx, sy));
        }
    }
    Ok(Patch {
        image: BinaryImage::new(FILTER_SIZE, FILTER_SIZE, pixels)?,
        center: (x, y),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchWeights {
    pub weights: WeightSet,
    pub converged: bool,
}

/// Per-pixel filter couplings for one source image size.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchWeightStore {
    width: usize,
    height: usize,
    entries: Vec<PatchWeights>,
}

impl PatchWeightStore {
    /// `entries` are row-major over centre coordinates.
    pub fn new(width: usize, height: usize, entries: Vec<PatchWeights>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Size(format!(
                "store must be non-empty, got {width}x{height}"
            )));
        }
        if entries.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} patch entries for a {width}x{height} image",
                entries.len()
            )));
        }
        let patch_graph = patch_graph();
        if let Some(bad) = entries
            .iter()
            .position(|e| e.weights.graph() != &patch_graph)
        {
            return Err(Error::Dimension(format!(
                "patch entry {bad} is not on the 3x3 torus"
            )));
        }
        Ok(PatchWeightStore {
            width,
            height,
            entries,
        })
    }

    /// Build a store by evaluating `f` on every patch of `image`.
    pub fn from_patches<F>(image: &BinaryImage, f: F) -> Result<Self>
    where
        F: Fn(&Patch) -> Result<PatchWeights> + Sync,
    {
        let entries = map_centers(image.width(), image.height(), |x, y| {
            f(&extract_patch(image, x, y)?)
        })?;
        Self::new(image.width(), image.height(), entries)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> &PatchWeights {
        &self.entries[y * self.width + x]
    }

    /// Entries in row-major centre order.
    pub fn entries(&self) -> &[PatchWeights] {
        &self.entries
    }

    pub fn converged_count(&self) -> usize {
        self.entries.iter().filter(|e| e.converged).count()
    }
}

fn patch_graph() -> NeighborGraph {
    NeighborGraph::torus(FILTER_SIZE, FILTER_SIZE).expect("3x3 torus is valid")
}

/// Seed for the patch centred at `(x, y)`.
pub fn patch_seed(base_seed: u64, x: usize, y: usize) -> u64 {
    seeds::derive(base_seed, &[x as u64, y as u64])
}

/// Evaluate `f` at every centre, row-major. Runs on the rayon pool when the
/// `parallel` feature is on; the result does not depend on scheduling.
fn map_centers<T, F>(width: usize, height: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize) -> Result<T> + Sync,
{
    let at = |k: usize| f(k % width, k / width);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..width * height).into_par_iter().map(at).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..width * height).map(at).collect()
    }
}

/// Train one 3×3 coupling set per source pixel.
pub fn train_patch_weights(
    original: &BinaryImage,
    config: &TrainConfig,
) -> Result<PatchWeightStore> {
    config.validate()?;
    PatchWeightStore::from_patches(original, |patch| {
        let (x, y) = patch.center;
        let patch_config = TrainConfig {
            seed: patch_seed(config.seed, x, y),
            ..config.clone()
        };
        let trained = autoencoder::train_weights(&patch.image, &patch_config)?;
        Ok(PatchWeights {
            weights: trained.weights,
            converged: trained.converged,
        })
    })
}

/// Denoise each patch independently and keep its centre pixel.
pub fn conv_denoise(
    noisy: &BinaryImage,
    store: &PatchWeightStore,
    solve: &SolveConfig,
) -> Result<BinaryImage> {
    if (noisy.width(), noisy.height()) != (store.width, store.height) {
        return Err(Error::Dimension(format!(
            "{}x{} image for a {}x{} patch store",
            noisy.width(),
            noisy.height(),
            store.width,
            store.height
        )));
    }
    let centers = map_centers(noisy.width(), noisy.height(), |x, y| {
        let patch = extract_patch(noisy, x, y)?;
        let solve = solve.with_seed(patch_seed(solve.seed, x, y));
        let restored = autoencoder::denoise(&patch.image, &store.get(x, y).weights, &solve)?;
        Ok(restored.pixels()[CENTER_INDEX])
    })?;
    BinaryImage::new(noisy.width(), noisy.height(), centers)
}

/// [`autoencoder::evaluate_restoration`] with [`conv_denoise`] as the
/// denoiser.
pub fn evaluate_conv_restoration(
    original: &BinaryImage,
    store: &PatchWeightStore,
    noise_rate: f64,
    trials: usize,
    residual_tolerance: usize,
    solve: &SolveConfig,
) -> Result<RestorationStats> {
    evaluate_with(
        original,
        noise_rate,
        trials,
        residual_tolerance,
        solve.seed,
        |noisy, seed| conv_denoise(noisy, store, &solve.with_seed(seed)),
    )
}
