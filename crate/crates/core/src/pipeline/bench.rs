//! Wall-clock scaling of whole-image ("normal") versus sliding-filter
//! ("conv") denoising.
//!
//! Normal mode solves one n-qubit Ising problem on a degree-4 circulant
//! graph (offsets 1 and 3), so every n in 9..=13 has the same connectivity
//! as the torus. Conv mode runs [`conv_denoise`] over a square image, one
//! 9-qubit solve per pixel, on a single worker thread so that time tracks
//! work rather than core count.

use std::fmt::{self, Write as _};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adiabatic::{self, IsingProblem};
use crate::autoencoder::NeighborGraph;
use crate::autoencoder::{BinaryImage, Pixel, SolveConfig, WeightSet};
use crate::convfilter::{conv_denoise, PatchWeightStore, PatchWeights, FILTER_SIZE};
use crate::{seeds, Error, Result};

pub const NORMAL_SIZES: [usize; 5] = [9, 10, 11, 12, 13];
pub const CONV_SIZES: [usize; 6] = [9, 16, 25, 64, 144, 784];
/// Pixel count at which conv mode is compared to extrapolated normal mode.
pub const COMPARE_AT: usize = 16;
pub const MIN_REPEATS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Normal,
    Conv,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Normal => "normal",
            Mode::Conv => "conv",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub mode: Mode,
    pub pixels: usize,
    /// Median wall time in seconds.
    pub seconds: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub normal_sizes: Vec<usize>,
    pub conv_sizes: Vec<usize>,
    pub repeats: usize,
    pub solve: SolveConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            normal_sizes: NORMAL_SIZES.to_vec(),
            conv_sizes: CONV_SIZES.to_vec(),
            repeats: MIN_REPEATS,
            solve: SolveConfig::default(),
        }
    }
}

/// Ordinary least squares `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Argument(format!(
                "linear fit needs ≥ 2 paired points, got {} x and {} y",
                xs.len(),
                ys.len()
            )));
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::Argument("linear fit needs distinct x values".into()));
        }
        let slope = sxy / sxx;
        let r_squared = if syy == 0.0 {
            1.0
        } else {
            sxy * sxy / (sxx * syy)
        };
        Ok(LinearFit {
            slope,
            intercept: my - slope * mx,
            r_squared,
        })
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

#[derive(Debug, Clone)]
pub struct BenchSummary {
    pub records: Vec<BenchRecord>,
    /// `log2(seconds)` against n for normal mode.
    pub normal_fit: LinearFit,
    /// `t(n+1)/t(n)` for consecutive normal-mode sizes.
    pub normal_ratios: Vec<f64>,
    /// `seconds` against n for conv mode.
    pub conv_fit: LinearFit,
    pub normal_extrapolated: f64,
    pub conv_at_compare: f64,
}

impl BenchSummary {
    pub fn speedup(&self) -> f64 {
        self.normal_extrapolated / self.conv_at_compare
    }

    /// `mode,n,seconds`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,n,seconds\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{:.9}", r.mode, r.pixels, r.seconds);
        }
        out
    }

    pub fn report(&self) -> String {
        let ratios: Vec<String> = self
            .normal_ratios
            .iter()
            .map(|r| format!("{r:.2}"))
            .collect();
        format!(
            "normal: log2(t) = {:.3} + {:.3}·n (R² {:.4}); ratios [{}]\n\
             conv: t = {:.3e} + {:.3e}·n (R² {:.4})\n\
             n = {COMPARE_AT}: normal (extrapolated) {:.3e} s, conv {:.3e} s, speedup {:.1}×\n",
            self.normal_fit.intercept,
            self.normal_fit.slope,
            self.normal_fit.r_squared,
            ratios.join(", "),
            self.conv_fit.intercept,
            self.conv_fit.slope,
            self.conv_fit.r_squared,
            self.normal_extrapolated,
            self.conv_at_compare,
            self.speedup()
        )
    }
}

/// Random couplings in `[-1, 1]` on the circulant graph `i ~ i±1, i±3 (mod n)`
/// with ±0.1 fields.
pub fn circulant_problem(n: usize, field_x: f64, seed: u64) -> Result<IsingProblem> {
    if n < 7 {
        return Err(Error::Size(format!(
            "circulant benchmark graph needs n ≥ 7, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields = (0..n)
        .map(|_| if rng.gen::<bool>() { 0.1 } else { -0.1 })
        .collect();
    let mut problem = IsingProblem::new(fields, field_x)?;
    for i in 0..n {
        for offset in [1, 3] {
            problem.set_coupling(i, (i + offset) % n, rng.gen_range(-1.0..=1.0))?;
        }
    }
    Ok(problem)
}

/// Side length of a square image with `pixels` pixels.
fn square_side(pixels: usize) -> Result<usize> {
    let side = (pixels as f64).sqrt().round() as usize;
    if side * side != pixels {
        return Err(Error::Size(format!(
            "conv benchmark sizes must be square, got {pixels}"
        )));
    }
    Ok(side)
}

fn random_store(side: usize, seed: u64) -> Result<PatchWeightStore> {
    let graph = NeighborGraph::torus(FILTER_SIZE, FILTER_SIZE)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..side * side)
        .map(|_| {
            let values = (0..graph.edges().len())
                .map(|_| rng.gen_range(-1.0..=1.0))
                .collect();
            Ok(PatchWeights {
                weights: WeightSet::new(graph.clone(), values)?,
                converged: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PatchWeightStore::new(side, side, entries)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn time_median(repeats: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let times = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            f()?;
            // Guard against a zero reading on coarse clocks.
            Ok(start.elapsed().as_secs_f64().max(1e-9))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(median(times))
}

pub fn time_normal(n: usize, config: &BenchConfig) -> Result<f64> {
    let problem = circulant_problem(
        n,
        config.solve.field_x,
        seeds::derive(config.solve.seed, &[n as u64]),
    )?;
    time_median(config.repeats, || {
        adiabatic::solve(
            &problem,
            &config.solve.schedule,
            config.solve.shots,
            config.solve.seed,
        )
        .map(|_| ())
    })
}

pub fn time_conv(pixels: usize, config: &BenchConfig) -> Result<f64> {
    let side = square_side(pixels)?;
    let store = random_store(side, seeds::derive(config.solve.seed, &[pixels as u64, 1]))?;
    let noisy = BinaryImage::filled(side, side, Pixel::White)?;
    time_median(config.repeats, || {
        single_threaded(|| conv_denoise(&noisy, &store, &config.solve)).map(|_| ())
    })
}

#[cfg(feature = "parallel")]
fn single_threaded<T: Send>(f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Argument(format!("cannot build benchmark thread pool: {e}")))?
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn single_threaded<T>(f: impl FnOnce() -> Result<T>) -> Result<T> {
    f()
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchSummary> {
    if config.repeats < MIN_REPEATS {
        return Err(Error::Argument(format!(
            "benchmark needs ≥ {MIN_REPEATS} repeats, got {}",
            config.repeats
        )));
    }
    if let Some(&n) = config.normal_sizes.iter().find(|&&n| n > COMPARE_AT) {
        return Err(Error::Argument(format!(
            "normal mode is limited to n ≤ {COMPARE_AT}, got {n}"
        )));
    }
    if !config.conv_sizes.contains(&COMPARE_AT) {
        return Err(Error::Argument(format!(
            "conv sizes must include {COMPARE_AT}"
        )));
    }
    let mut records = Vec::new();
    for &n in &config.normal_sizes {
        records.push(BenchRecord {
            mode: Mode::Normal,
            pixels: n,
            seconds: time_normal(n, config)?,
            repeats: config.repeats,
        });
    }
    for &n in &config.conv_sizes {
        records.push(BenchRecord {
            mode: Mode::Conv,
            pixels: n,
            seconds: time_conv(n, config)?,
            repeats: config.repeats,
        });
    }
    summarize(records)
}

pub fn summarize(records: Vec<BenchRecord>) -> Result<BenchSummary> {
    let series = |mode| -> (Vec<f64>, Vec<f64>) {
        records
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| (r.pixels as f64, r.seconds))
            .unzip()
    };
    let (nx, nt) = series(Mode::Normal);
    let (cx, ct) = series(Mode::Conv);
    let log_t: Vec<f64> = nt.iter().map(|t| t.log2()).collect();
    let normal_fit = LinearFit::new(&nx, &log_t)?;
    let conv_fit = LinearFit::new(&cx, &ct)?;
    let normal_ratios = nt.windows(2).map(|w| w[1] / w[0]).collect();
    let conv_at_compare = records
        .iter()
        .find(|r| r.mode == Mode::Conv && r.pixels == COMPARE_AT)
        .map(|r| r.seconds)
        .ok_or_else(|| Error::Argument(format!("no conv record at n = {COMPARE_AT}")))?;
    Ok(BenchSummary {
        normal_extrapolated: normal_fit.predict(COMPARE_AT as f64).exp2(),
        records,
        normal_fit,
        normal_ratios,
        conv_fit,
        conv_at_compare,
    })
}
