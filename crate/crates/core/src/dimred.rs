//! Two-dimensional features from couplings, plus a PCA baseline.
//!
//! An image's couplings are taken straight from its pixels,
//! `W_ij = 0.1 · s_i · s_j` on the 4-neighbour torus, and summed separately
//! over right-hand and downward neighbours. The two sums measure how often
//! horizontally and vertically adjacent pixels agree, so they are unchanged
//! by inverting every pixel and do not measure the amount of ink.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::autoencoder::{BinaryImage, NeighborGraph, Pixel, WeightSet};
use crate::{Error, Result};

/// Scale of directly derived couplings.
pub const COUPLING_SCALE: f64 = 0.1;
/// Default binarization threshold on `[0, 1]` intensities.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Grayscale image with intensities in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Size(format!(
                "image must be non-empty, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} intensities for a {width}x{height} image",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Argument(format!("intensity {v} outside [0, 1]")));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl From<&BinaryImage> for GrayImage {
    /// Black (ink) becomes 1.0 and White 0.0, inverse of [`binarize`].
    fn from(image: &BinaryImage) -> Self {
        GrayImage {
            width: image.width(),
            height: image.height(),
            data: image
                .pixels()
                .iter()
                .map(|p| if *p == Pixel::Black { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

/// Intensity strictly above `threshold` is ink (Black); everything else is
/// White.
pub fn binarize(image: &GrayImage, threshold: f64) -> Result<BinaryImage> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Argument(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    let pixels = image
        .data
        .iter()
        .map(|&v| {
            if v > threshold {
                Pixel::Black
            } else {
                Pixel::White
            }
        })
        .collect();
    BinaryImage::new(image.width, image.height, pixels)
}

/// Couplings set directly from the image: `0.1 · s_i · s_j` per torus edge.
pub fn weights_from_image(image: &BinaryImage) -> Result<WeightSet> {
    let graph = NeighborGraph::torus(image.width(), image.height())?;
    let spins = image.spins();
    let values = graph
        .edges()
        .iter()
        .map(|&(i, j)| COUPLING_SCALE * f64::from(spins[i] * spins[j]))
        .collect();
    WeightSet::new(graph, values)
}

/// An image reduced to the sums of its right and down couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeaturePoint {
    pub f_right: f64,
    pub f_down: f64,
    pub label: Option<u8>,
}

impl FeaturePoint {
    pub fn coords(&self) -> [f64; 2] {
        [self.f_right, self.f_down]
    }
}

/// Sum every cell's coupling to its right neighbour and to its lower
/// neighbour, with wrap-around. Each sum has `width · height` terms.
pub fn reduce_to_2d(image: &BinaryImage) -> Result<FeaturePoint> {
    let weights = weights_from_image(image)?;
    let (w, h) = (image.width(), image.height());
    let mut f_right = 0.0;
    let mut f_down = 0.0;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let right = y * w + (x + 1) % w;
            let down = ((y + 1) % h) * w + x;
            f_right += weights
                .get(i, right)
                .expect("right neighbour is a torus edge");
            f_down += weights
                .get(i, down)
                .expect("down neighbour is a torus edge");
        }
    }
    Ok(FeaturePoint {
        f_right,
        f_down,
        label: None,
    })
}

/// Principal-component projection of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    /// One `k`-dimensional point per input image.
    pub points: Vec<Vec<f64>>,
    /// Unit principal directions, one per row (`k × d`).
    pub components: Vec<Vec<f64>>,
    /// Sample covariance eigenvalue of each component.
    pub explained_variance: Vec<f64>,
    pub mean: Vec<f64>,
}

/// Project onto the top `k` principal components of the mean-centred data.
///
/// The eigenproblem is solved on the `n × n` Gram matrix, which is far
/// smaller than the `d × d` covariance for image data. Each direction's sign
/// makes its largest-magnitude entry positive.
pub fn pca_project(dataset: &[GrayImage], k: usize) -> Result<PcaProjection> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Argument(format!(
            "PCA needs at least 2 images, got {n}"
        )));
    }
    if k == 0 {
        return Err(Error::Argument("PCA needs k >= 1".into()));
    }
    let d = dataset[0].data.len();
    if let Some(bad) = dataset
        .iter()
        .find(|im| (im.width, im.height) != (dataset[0].width, dataset[0].height))
    {
        return Err(Error::Dimension(format!(
            "{}x{} image in a {}x{} dataset",
            bad.width, bad.height, dataset[0].width, dataset[0].height
        )));
    }

    let mut mean = vec![0.0; d];
    for im in dataset {
        for (m, v) in mean.iter_mut().zip(&im.data) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| dataset[i].data[j] - mean[j]);

    let gram = &centered * centered.transpose();
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let top = eig.eigenvalues[order[0]];
    let tol = top.abs().max(1.0) * 1e-12 * n as f64;
    if top <= tol {
        return Err(Error::Rank("dataset has zero variance".into()));
    }

    let mut points = vec![Vec::with_capacity(k); n];
    let mut components = Vec::with_capacity(k);
    let mut explained_variance = Vec::with_capacity(k);
    for &c in order.iter().take(k) {
        let mu = eig.eigenvalues[c];
        let u = eig.eigenvectors.column(c);
        if mu <= tol {
            // Null direction: every sample projects to zero.
            components.push(vec![0.0; d]);
            explained_variance.push(0.0);
            points.iter_mut().for_each(|p| p.push(0.0));
            continue;
        }
        let root = mu.sqrt();
        let mut v: Vec<f64> = (centered.transpose() * u)
            .iter()
            .map(|x| x / root)
            .collect();
        let mut scores: Vec<f64> = u.iter().map(|x| x * root).collect();
        let pivot = v.iter().copied().fold(
            0.0f64,
            |best, x| if x.abs() > best.abs() { x } else { best },
        );
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
            scores.iter_mut().for_each(|x| *x = -*x);
        }
        for (p, s) in points.iter_mut().zip(scores) {
            p.push(s);
        }
        components.push(v);
        explained_variance.push(mu / (n - 1) as f64);
    }
    // Fewer samples than requested components: pad with null directions.
    for _ in n..k {
        components.push(vec![0.0; d]);
        explained_variance.push(0.0);
        points.iter_mut().for_each(|p| p.push(0.0));
    }
    Ok(PcaProjection {
        points,
        components,
        explained_variance,
        mean,
    })
}

/// Leave-one-out nearest-centroid accuracy.
///
/// Each point is classified by the closest class centroid computed without
/// that point (Euclidean distance, ties to the lower label). A class whose
/// only member is the held-out point has no centroid for that round.
pub fn centroid_classify(points: &[Vec<f64>], labels: &[u8]) -> Result<f64> {
    if points.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} points but {} labels",
            points.len(),
            labels.len()
        )));
    }
    let dim = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Dimension("points have differing dimensions".into()));
    }
    let mut classes: Vec<u8> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Argument("need at least two classes".into()));
    }

    let mut sums = vec![vec![0.0; dim]; classes.len()];
    let mut counts = vec![0usize; classes.len()];
    let class_of = |label: u8| classes.binary_search(&label).expect("label listed");
    for (p, &l) in points.iter().zip(labels) {
        let c = class_of(l);
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }

    let mut correct = 0;
    for (p, &l) in points.iter().zip(labels) {
        let own = class_of(l);
        let mut best: Option<(f64, usize)> = None;
        for c in 0..classes.len() {
            let count = counts[c] - usize::from(c == own);
            if count == 0 {
                continue;
            }
            let dist: f64 = (0..dim)
                .map(|j| {
                    let held = if c == own { p[j] } else { 0.0 };
                    let centroid = (sums[c][j] - held) / count as f64;
                    (p[j] - centroid).powi(2)
                })
                .sum();
            // Strict comparison keeps the lower label on ties.
            if best.is_none_or(|(d, _)| dist < d) {
                best = Some((dist, c));
            }
        }
        if best.map(|(_, c)| c) == Some(own) {
            correct += 1;
        }
    }
    Ok(correct as f64 / points.len() as f64)
}
