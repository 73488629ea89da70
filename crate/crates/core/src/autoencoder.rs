//! Whole-image quantum autoencoder.
//!
//! Every pixel is one spin: White ↔ +1, Black ↔ −1. The clean image sets the
//! longitudinal fields (−0.1 for White, +0.1 for Black) and the couplings on
//! the 4-neighbour torus are learned until annealing reproduces the clean
//! image. Denoising keeps the learned couplings and takes its fields from
//! the noisy image instead.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adiabatic::{self, IsingProblem, Schedule, SpinConfig, DEFAULT_FIELD_X, DEFAULT_SHOTS};
use crate::{seeds, Error, Result};

/// Magnitude of the longitudinal field assigned to each pixel.
pub const FIELD_MAGNITUDE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pixel {
    White,
    Black,
}

impl Pixel {
    pub fn spin(self) -> i8 {
        match self {
            Pixel::White => 1,
            Pixel::Black => -1,
        }
    }

    pub fn from_spin(spin: i8) -> Self {
        if spin > 0 {
            Pixel::White
        } else {
            Pixel::Black
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Pixel::White => Pixel::Black,
            Pixel::Black => Pixel::White,
        }
    }
}

/// Row-major black-and-white image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<Pixel>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Pixel>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Size(format!(
                "image must be non-empty, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Dimension(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(BinaryImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, pixel: Pixel) -> Result<Self> {
        Self::new(width, height, vec![pixel; width * height])
    }

    /// Parse rows of `.` (White) and `#` (Black). Handy for fixtures.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut pixels = Vec::with_capacity(width * height);
        for row in rows {
            if row.chars().count() != width {
                return Err(Error::Dimension("ragged ascii image".into()));
            }
            for ch in row.chars() {
                pixels.push(match ch {
                    '.' => Pixel::White,
                    '#' => Pixel::Black,
                    other => {
                        return Err(Error::Argument(format!("unexpected pixel char {other:?}")))
                    }
                });
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn from_spins(width: usize, height: usize, spins: &[i8]) -> Result<Self> {
        Self::new(
            width,
            height,
            spins.iter().map(|&s| Pixel::from_spin(s)).collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Pixel {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, pixel: Pixel) {
        self.pixels[y * self.width + x] = pixel;
    }

    pub fn spins(&self) -> Vec<i8> {
        self.pixels.iter().map(|p| p.spin()).collect()
    }

    pub fn inverted(&self) -> Self {
        BinaryImage {
            pixels: self.pixels.iter().map(|p| p.flipped()).collect(),
            ..self.clone()
        }
    }

    /// Number of pixels that differ from `other`.
    pub fn hamming(&self, other: &BinaryImage) -> Result<usize> {
        self.check_same_shape(other)?;
        Ok(self
            .pixels
            .iter()
            .zip(&other.pixels)
            .filter(|(a, b)| a != b)
            .count())
    }

    pub(crate) fn check_same_shape(&self, other: &BinaryImage) -> Result<()> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::Dimension(format!(
                "{}x{} image vs {}x{} image",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

impl fmt::Display for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.pixels.chunks(self.width) {
            for p in row {
                f.write_str(if *p == Pixel::White { "." } else { "#" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Nearest-neighbour graph of a `width × height` torus. Edges are sorted
/// `(i, j)` pairs with `i < j` over row-major pixel indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NeighborGraph {
    width: usize,
    height: usize,
    edges: Vec<(usize, usize)>,
}

impl NeighborGraph {
    /// Up/down/left/right neighbours with periodic wrap. Both sides must be
    /// at least 3 so that no pair of cells is joined twice.
    pub fn torus(width: usize, height: usize) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::Size(format!(
                "4-neighbour torus needs both sides >= 3, got {width}x{height}"
            )));
        }
        let mut edges = BTreeSet::new();
        for y in 0..height {
            for x in 0..width {
                let i = y * width + x;
                let right = y * width + (x + 1) % width;
                let down = ((y + 1) % height) * width + x;
                edges.insert((i.min(right), i.max(right)));
                edges.insert((i.min(down), i.max(down)));
            }
        }
        Ok(NeighborGraph {
            width,
            height,
            edges: edges.into_iter().collect(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_vertices(&self) -> usize {
        self.width * self.height
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i.min(j), i.max(j))).ok()
    }
}

/// One coupling per edge of a [`NeighborGraph`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    graph: NeighborGraph,
    values: Vec<f64>,
}

impl WeightSet {
    pub fn new(graph: NeighborGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.edges.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} edges",
                values.len(),
                graph.edges.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("weights must be finite".into()));
        }
        Ok(WeightSet { graph, values })
    }

    pub fn zeros(graph: NeighborGraph) -> Self {
        let values = vec![0.0; graph.edges.len()];
        WeightSet { graph, values }
    }

    pub fn graph(&self) -> &NeighborGraph {
        &self.graph
    }

    /// Weights in the order of [`NeighborGraph::edges`].
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.graph.edge_index(i, j).map(|k| self.values[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.graph
            .edges
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    /// Ising problem with these couplings and the given fields.
    pub fn to_problem(&self, fields_z: Vec<f64>, field_x: f64) -> Result<IsingProblem> {
        if fields_z.len() != self.graph.num_vertices() {
            return Err(Error::Dimension(format!(
                "{} fields for a {}-vertex graph",
                fields_z.len(),
                self.graph.num_vertices()
            )));
        }
        IsingProblem::new(fields_z, field_x)?.with_couplings(self.iter())
    }
}

/// Default half-width of the initial coupling distribution. Wider starts
/// leave denser learned couplings, which restore noisy inputs more often
/// than a near-zero start.
pub const DEFAULT_INIT_RANGE: f64 = 0.5;

/// Parameters of [`train_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Initial couplings are uniform in `[-init_range, init_range]`.
    pub init_range: f64,
    pub max_epochs: usize,
    pub schedule: Schedule,
    pub field_x: f64,
    pub shots: u64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.4,
            init_range: DEFAULT_INIT_RANGE,
            max_epochs: 100,
            schedule: Schedule::default(),
            field_x: DEFAULT_FIELD_X,
            shots: DEFAULT_SHOTS,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Argument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.init_range >= 0.0 && self.init_range.is_finite()) {
            return Err(Error::Argument(format!(
                "init range must be non-negative, got {}",
                self.init_range
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Argument("max_epochs must be at least 1".into()));
        }
        if self.shots == 0 {
            return Err(Error::Argument("shots must be at least 1".into()));
        }
        Ok(())
    }
}

/// Learned couplings plus how training ended.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedWeights {
    pub weights: WeightSet,
    /// Whether some epoch reproduced every pair product of the original.
    pub converged: bool,
    /// Epochs actually run, including the converging one.
    pub epochs: usize,
}

/// `h_i = −0.1` for White and `+0.1` for Black, row-major.
pub fn fields_from_image(image: &BinaryImage) -> Vec<f64> {
    image
        .pixels
        .iter()
        .map(|p| -FIELD_MAGNITUDE * f64::from(p.spin()))
        .collect()
}

/// Mismatch `(s_i s_j)_original − (s_i s_j)_output` for every edge.
pub fn pair_errors(graph: &NeighborGraph, original: &[i8], output: &[i8]) -> Vec<f64> {
    graph
        .edges
        .iter()
        .map(|&(i, j)| f64::from(original[i] * original[j] - output[i] * output[j]))
        .collect()
}

/// One coupling update `W ← W − ε E`.
pub fn apply_update(weights: &mut WeightSet, errors: &[f64], learning_rate: f64) {
    for (w, e) in weights.values.iter_mut().zip(errors) {
        *w -= learning_rate * e;
    }
}

/// Learn couplings that make `original` the annealer's output.
///
/// Each epoch anneals the problem with the current couplings and the clean
/// image's fields, compares every neighbour pair product with the original
/// and moves the couplings against the mismatch. Training stops at the
/// first epoch with no mismatch or after `max_epochs`.
pub fn train_weights(original: &BinaryImage, config: &TrainConfig) -> Result<TrainedWeights> {
    config.validate()?;
    let graph = NeighborGraph::torus(original.width, original.height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(config.seed, &[0]));
    let r = config.init_range;
    let init = graph
        .edges
        .iter()
        .map(|_| if r > 0.0 { rng.gen_range(-r..=r) } else { 0.0 })
        .collect();
    let mut weights = WeightSet::new(graph, init)?;
    let fields = fields_from_image(original);
    let target = original.spins();

    for epoch in 1..=config.max_epochs {
        let problem = weights.to_problem(fields.clone(), config.field_x)?;
        let seed = seeds::derive(config.seed, &[1, epoch as u64]);
        let solution = adiabatic::solve(&problem, &config.schedule, config.shots, seed)?;
        let errors = pair_errors(&weights.graph, &target, solution.config.spins());
        if errors.iter().all(|&e| e == 0.0) {
            return Ok(TrainedWeights {
                weights,
                converged: true,
                epochs: epoch,
            });
        }
        apply_update(&mut weights, &errors, config.learning_rate);
    }
    Ok(TrainedWeights {
        weights,
        converged: false,
        epochs: config.max_epochs,
    })
}

/// Annealing parameters shared by denoising and evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub schedule: Schedule,
    pub field_x: f64,
    pub shots: u64,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            schedule: Schedule::default(),
            field_x: DEFAULT_FIELD_X,
            shots: DEFAULT_SHOTS,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        SolveConfig { seed, ..self }
    }
}

/// Anneal with the learned couplings and the noisy image's fields.
pub fn denoise(
    noisy: &BinaryImage,
    weights: &WeightSet,
    solve: &SolveConfig,
) -> Result<BinaryImage> {
    let g = &weights.graph;
    if (noisy.width, noisy.height) != (g.width, g.height) {
        return Err(Error::Dimension(format!(
            "{}x{} image for {}x{} weights",
            noisy.width, noisy.height, g.width, g.height
        )));
    }
    let problem = weights.to_problem(fields_from_image(noisy), solve.field_x)?;
    let solution = adiabatic::solve(&problem, &solve.schedule, solve.shots, solve.seed)?;
    config_to_image(noisy.width, noisy.height, &solution.config)
}

fn config_to_image(width: usize, height: usize, config: &SpinConfig) -> Result<BinaryImage> {
    BinaryImage::from_spins(width, height, config.spins())
}

/// Flip exactly `round(rate · N)` distinct pixels chosen uniformly.
/// Rounding is half away from zero.
pub fn inject_noise(image: &BinaryImage, rate: f64, seed: u64) -> Result<BinaryImage> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Argument(format!(
            "noise rate must be in [0, 1], got {rate}"
        )));
    }
    let n = image.len();
    let flips = (rate * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = image.clone();
    for i in index::sample(&mut rng, n, flips) {
        out.pixels[i] = out.pixels[i].flipped();
    }
    Ok(out)
}

/// Outcome of a batch of noise-and-denoise trials.
#[derive(Debug, Clone, PartialEq)]
pub struct RestorationStats {
    /// Wrong pixels per trial, in trial order.
    pub wrong_pixels: Vec<usize>,
    pub residual_tolerance: usize,
}

impl RestorationStats {
    pub fn trials(&self) -> usize {
        self.wrong_pixels.len()
    }

    /// Fraction of trials restored on every pixel.
    pub fn complete_fraction(&self) -> f64 {
        self.fraction_within(0)
    }

    /// Fraction of trials with at most `residual_tolerance` wrong pixels.
    pub fn tolerant_fraction(&self) -> f64 {
        self.fraction_within(self.residual_tolerance)
    }

    pub fn fraction_within(&self, k: usize) -> f64 {
        let ok = self.wrong_pixels.iter().filter(|&&w| w <= k).count();
        ok as f64 / self.wrong_pixels.len() as f64
    }

    /// Mean fraction of correctly restored pixels per trial.
    pub fn mean_pixel_accuracy(&self, pixels: usize) -> f64 {
        let wrong: usize = self.wrong_pixels.iter().sum();
        1.0 - wrong as f64 / (pixels * self.wrong_pixels.len()) as f64
    }
}

/// Seeds used by trial `t` of an evaluation: (noise seed, solver seed).
pub fn trial_seeds(base_seed: u64, trial: usize) -> (u64, u64) {
    let s = base_seed.wrapping_add(trial as u64);
    (seeds::derive(s, &[2]), seeds::derive(s, &[3]))
}

/// Run `trials` independent rounds of noise injection and denoising with
/// fresh noise each round.
pub fn evaluate_restoration(
    original: &BinaryImage,
    weights: &WeightSet,
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
        |noisy, seed| denoise(noisy, weights, &solve.with_seed(seed)),
    )
}

/// Shared trial loop; `denoiser` gets the noisy image and a solver seed.
pub(crate) fn evaluate_with<F>(
    original: &BinaryImage,
    noise_rate: f64,
    trials: usize,
    residual_tolerance: usize,
    base_seed: u64,
    denoiser: F,
) -> Result<RestorationStats>
where
    F: Fn(&BinaryImage, u64) -> Result<BinaryImage> + Sync,
{
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    let run = |t: usize| -> Result<usize> {
        let (noise_seed, solve_seed) = trial_seeds(base_seed, t);
        let noisy = inject_noise(original, noise_rate, noise_seed)?;
        let restored = denoiser(&noisy, solve_seed)?;
        restored.hamming(original)
    };
    #[cfg(feature = "parallel")]
    let wrong_pixels = {
        use rayon::prelude::*;
        (0..trials)
            .into_par_iter()
            .map(run)
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let wrong_pixels = (0..trials).map(run).collect::<Result<Vec<_>>>()?;
    Ok(RestorationStats {
        wrong_pixels,
        residual_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cross() -> BinaryImage {
        BinaryImage::from_ascii(&[".#.", "###", ".#."]).unwrap()
    }

    #[test]
    fn fields_follow_pixel_colour() {
        let white = BinaryImage::filled(3, 3, Pixel::White).unwrap();
        assert_eq!(fields_from_image(&white), vec![-0.1; 9]);
        let black = BinaryImage::filled(3, 3, Pixel::Black).unwrap();
        assert_eq!(fields_from_image(&black), vec![0.1; 9]);
        let mut one = white.clone();
        one.set(1, 1, Pixel::Black);
        let mut expect = vec![-0.1; 9];
        expect[4] = 0.1;
        assert_eq!(fields_from_image(&one), expect);
    }

    #[test]
    fn image_constructors_validate() {
        assert!(BinaryImage::new(0, 3, vec![]).is_err());
        assert!(BinaryImage::new(2, 2, vec![Pixel::White; 3]).is_err());
        assert!(BinaryImage::from_ascii(&["..", "."]).is_err());
        assert_eq!(cross().to_string(), ".#.\n###\n.#.\n");
    }

    #[test]
    fn torus_has_two_edges_per_cell() {
        let g = NeighborGraph::torus(3, 3).unwrap();
        assert_eq!(g.edges().len(), 18);
        let g = NeighborGraph::torus(5, 4).unwrap();
        assert_eq!(g.edges().len(), 40);
        let mut degree = [0; 20];
        for &(i, j) in g.edges() {
            assert!(i < j);
            degree[i] += 1;
            degree[j] += 1;
        }
        assert!(degree.iter().all(|&d| d == 4));
        assert!(NeighborGraph::torus(2, 5).is_err());
    }

    #[test]
    fn single_update_moves_by_learning_rate_times_error() {
        let g = NeighborGraph::torus(3, 3).unwrap();
        let mut w = WeightSet::zeros(g.clone());
        let original = vec![1i8; 9];
        let mut output = vec![1i8; 9];
        output[0] = -1;
        let errors = pair_errors(&g, &original, &output);
        apply_update(&mut w, &errors, 0.4);
        for (k, &(i, j)) in g.edges().iter().enumerate() {
            if i == 0 || j == 0 {
                assert_eq!(errors[k], 2.0);
                assert!((w.values()[k] + 0.8).abs() < 1e-15);
            } else {
                assert_eq!(errors[k], 0.0);
                assert_eq!(w.values()[k], 0.0);
            }
        }
    }

    #[test]
    fn train_config_validation() {
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            max_epochs: 0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            init_range: -1.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn noise_flip_counts() {
        let img = cross();
        assert_eq!(inject_noise(&img, 0.0, 1).unwrap(), img);
        assert_eq!(inject_noise(&img, 1.0, 1).unwrap(), img.inverted());
        for seed in 0..20 {
            assert_eq!(
                inject_noise(&img, 0.3, seed)
                    .unwrap()
                    .hamming(&img)
                    .unwrap(),
                3
            );
        }
        assert!(inject_noise(&img, 1.5, 0).is_err());
        // 0.25 * 10 = 2.5 rounds away from zero.
        let strip = BinaryImage::filled(10, 1, Pixel::White).unwrap();
        assert_eq!(
            inject_noise(&strip, 0.25, 4)
                .unwrap()
                .hamming(&strip)
                .unwrap(),
            3
        );
    }

    #[test]
    fn denoise_rejects_wrong_shape() {
        let w = WeightSet::zeros(NeighborGraph::torus(3, 3).unwrap());
        let img = BinaryImage::filled(4, 3, Pixel::White).unwrap();
        assert!(matches!(
            denoise(&img, &w, &SolveConfig::default()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn evaluation_rejects_zero_trials() {
        let w = WeightSet::zeros(NeighborGraph::torus(3, 3).unwrap());
        assert!(evaluate_restoration(&cross(), &w, 0.3, 0, 0, &SolveConfig::default()).is_err());
    }
}
