//! Experiment drivers behind the CLI subcommands.
//!
//! Each driver reads its inputs, runs one experiment, writes every output
//! plus a run manifest (all parameters and seeds as `key = value`), and
//! returns the list of files written.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adiabatic::{Schedule, DEFAULT_FIELD_X, DEFAULT_SHOTS};
use crate::autoencoder::{
    self, BinaryImage, RestorationStats, SolveConfig, TrainConfig, DEFAULT_INIT_RANGE,
};
use crate::convfilter;
use crate::dimred::{self, FeaturePoint, GrayImage, DEFAULT_THRESHOLD};
use crate::pipeline::bench::{self, BenchConfig, BenchSummary};
use crate::pipeline::formats;
use crate::{seeds, Error, Result};

/// Environment variable naming the default dataset directory.
pub const DATA_DIR_ENV: &str = "CONVQAE_DATA_DIR";
pub const MNIST_IMAGES: &str = "mnist-subset-images.idx3-ubyte";
pub const MNIST_LABELS: &str = "mnist-subset-labels.idx1-ubyte";

/// `$CONVQAE_DATA_DIR`, or `data` in the working directory.
pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV).map_or_else(|| PathBuf::from("data"), PathBuf::from)
}

/// Every tunable parameter shared by the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub steps: usize,
    pub total_time: f64,
    pub field_x: f64,
    pub shots: u64,
    pub learning_rate: f64,
    pub init_range: f64,
    pub max_epochs: usize,
    pub noise_rate: f64,
    pub trials: usize,
    pub residual_tolerance: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for RunParams {
    fn default() -> Self {
        let schedule = Schedule::default();
        RunParams {
            steps: schedule.num_steps(),
            total_time: schedule.total_time(),
            field_x: DEFAULT_FIELD_X,
            shots: DEFAULT_SHOTS,
            learning_rate: 0.4,
            init_range: DEFAULT_INIT_RANGE,
            max_epochs: 100,
            noise_rate: 0.3,
            trials: 100,
            residual_tolerance: 1,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
        }
    }
}

fn set<T: FromStr>(slot: &mut T, key: &str, value: &str) -> Result<()> {
    *slot = value
        .parse()
        .map_err(|_| Error::Argument(format!("invalid value {value:?} for {key}")))?;
    Ok(())
}

impl RunParams {
    /// Keys accepted by [`RunParams::apply`].
    pub const KEYS: [&'static str; 12] = [
        "steps",
        "total_time",
        "field_x",
        "shots",
        "learning_rate",
        "init_range",
        "max_epochs",
        "noise_rate",
        "trials",
        "residual_tolerance",
        "threshold",
        "seed",
    ];

    /// Parameters from a config file or a run manifest. A manifest (it has a
    /// `command` key) also carries inputs and results, which are dropped.
    pub fn config_values(mut values: BTreeMap<String, String>) -> BTreeMap<String, String> {
        if values.contains_key("command") {
            values.retain(|k, _| Self::KEYS.contains(&k.as_str()));
        }
        values
    }

    /// Overwrite fields from `key = value` pairs; unknown keys are errors.
    pub fn apply(&mut self, values: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in values {
            match k.as_str() {
                "steps" => set(&mut self.steps, k, v)?,
                "total_time" => set(&mut self.total_time, k, v)?,
                "field_x" => set(&mut self.field_x, k, v)?,
                "shots" => set(&mut self.shots, k, v)?,
                "learning_rate" => set(&mut self.learning_rate, k, v)?,
                "init_range" => set(&mut self.init_range, k, v)?,
                "max_epochs" => set(&mut self.max_epochs, k, v)?,
                "noise_rate" => set(&mut self.noise_rate, k, v)?,
                "trials" => set(&mut self.trials, k, v)?,
                "residual_tolerance" => set(&mut self.residual_tolerance, k, v)?,
                "threshold" => set(&mut self.threshold, k, v)?,
                "seed" => set(&mut self.seed, k, v)?,
                _ => return Err(Error::Argument(format!("unknown parameter {k:?}"))),
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        Schedule::new(self.steps, self.total_time)?;
        self.train_config()?.validate()?;
        if !(self.field_x > 0.0 && self.field_x.is_finite()) {
            return Err(Error::Argument(format!(
                "field_x must be positive, got {}",
                self.field_x
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::Argument(format!(
                "noise_rate {} outside [0, 1]",
                self.noise_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Argument(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if self.trials == 0 {
            return Err(Error::Argument("trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<Schedule> {
        Schedule::new(self.steps, self.total_time)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            learning_rate: self.learning_rate,
            init_range: self.init_range,
            max_epochs: self.max_epochs,
            schedule: self.schedule()?,
            field_x: self.field_x,
            shots: self.shots,
            seed: self.seed,
        })
    }

    /// Solver settings; the seed is derived so it differs from training's.
    pub fn solve_config(&self) -> Result<SolveConfig> {
        Ok(SolveConfig {
            schedule: self.schedule()?,
            field_x: self.field_x,
            shots: self.shots,
            seed: seeds::derive(self.seed, &[0x5e]),
        })
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        [
            ("steps", self.steps.to_string()),
            ("total_time", self.total_time.to_string()),
            ("field_x", self.field_x.to_string()),
            ("shots", self.shots.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("init_range", self.init_range.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
            ("noise_rate", self.noise_rate.to_string()),
            ("trials", self.trials.to_string()),
            ("residual_tolerance", self.residual_tolerance.to_string()),
            ("threshold", self.threshold.to_string()),
            ("seed", self.seed.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Collects written files and the manifest entries that describe them.
#[derive(Debug)]
pub struct Outputs {
    manifest: BTreeMap<String, String>,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(command: &str, params: &RunParams) -> Self {
        let mut manifest = params.to_map();
        manifest.insert("command".into(), command.into());
        manifest.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        Outputs {
            manifest,
            written: Vec::new(),
        }
    }

    pub fn record(&mut self, key: &str, value: impl ToString) {
        self.manifest.insert(key.into(), value.to_string());
    }

    pub fn input(&mut self, key: &str, path: &Path) {
        self.record(key, path.display());
    }

    fn write(&mut self, key: &str, path: &Path, contents: &str) -> Result<()> {
        fs::write(path, contents).map_err(|e| Error::io(path, e))?;
        self.record(key, path.display());
        self.written.push(path.to_path_buf());
        Ok(())
    }

    /// Write the manifest and return every file produced.
    pub fn finish(mut self, manifest_path: &Path) -> Result<Vec<PathBuf>> {
        formats::write_key_values(manifest_path, &self.manifest)?;
        self.written.push(manifest_path.to_path_buf());
        Ok(self.written)
    }
}

/// `<path>.manifest`
pub fn default_manifest(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// Read a text grid, or a PGM binarized at `threshold`.
pub fn load_binary(path: &Path, threshold: f64) -> Result<BinaryImage> {
    if is_pgm(path) {
        dimred::binarize(&formats::read_pgm(path)?, threshold)
    } else {
        formats::read_grid(path)
    }
}

fn image_text(path: &Path, image: &BinaryImage) -> String {
    if is_pgm(path) {
        formats::format_pgm(&GrayImage::from(image))
    } else {
        formats::format_grid(image)
    }
}

/// Source image for a driver: a file, or sample `index` of the MNIST subset.
#[derive(Debug, Clone, PartialEq)]
pub enum ImageSource {
    File(PathBuf),
    Mnist { dir: PathBuf, index: usize },
}

impl ImageSource {
    pub fn load(&self, threshold: f64) -> Result<BinaryImage> {
        match self {
            ImageSource::File(path) => load_binary(path, threshold),
            ImageSource::Mnist { dir, index } => {
                let (img, _) = load_mnist(dir, 1, *index)?.remove(0);
                dimred::binarize(&img, threshold)
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            ImageSource::File(p) => p.display().to_string(),
            ImageSource::Mnist { dir, index } => format!("mnist:{}#{index}", dir.display()),
        }
    }
}

pub fn load_mnist(dir: &Path, count: usize, offset: usize) -> Result<Vec<(GrayImage, u8)>> {
    formats::read_mnist_idx(
        &dir.join(MNIST_IMAGES),
        &dir.join(MNIST_LABELS),
        count,
        offset,
    )
}

/// Train whole-image couplings on a clean image.
pub fn run_train(
    params: &RunParams,
    input: &ImageSource,
    weights_out: &Path,
    manifest: &Path,
) -> Result<Vec<PathBuf>> {
    let image = input.load(params.threshold)?;
    let trained = autoencoder::train_weights(&image, &params.train_config()?)?;
    let mut out = Outputs::new("train", params);
    out.record("input", input.describe());
    out.record("converged", trained.converged);
    out.record("epochs", trained.epochs);
    out.write(
        "weights",
        weights_out,
        &formats::format_weights(&trained.weights, trained.converged),
    )?;
    out.finish(manifest)
}

/// Paths written by the denoising drivers.
#[derive(Debug, Clone)]
pub struct DenoiseOutputs {
    /// Denoised version of one noisy sample (grid, or PGM by extension).
    pub output: PathBuf,
    /// The noisy sample itself, if wanted.
    pub noisy: Option<PathBuf>,
    /// Per-trial statistics CSV.
    pub stats: Option<PathBuf>,
    pub manifest: PathBuf,
}

fn finish_denoise(
    mut out: Outputs,
    paths: &DenoiseOutputs,
    noisy: &BinaryImage,
    restored: &BinaryImage,
    original: &BinaryImage,
    stats: Option<RestorationStats>,
) -> Result<Vec<PathBuf>> {
    out.record("sample_wrong_pixels", restored.hamming(original)?);
    if let Some(path) = &paths.noisy {
        out.write("noisy_output", path, &image_text(path, noisy))?;
    }
    out.write(
        "output",
        &paths.output,
        &image_text(&paths.output, restored),
    )?;
    if let (Some(path), Some(stats)) = (&paths.stats, stats) {
        out.record("complete_fraction", stats.complete_fraction());
        out.record("tolerant_fraction", stats.tolerant_fraction());
        out.write("stats", path, &formats::format_stats_csv(&stats))?;
    }
    out.finish(&paths.manifest)
}

/// One noisy sample is denoised and written; with a stats path, `trials`
/// fresh-noise rounds are also evaluated.
pub fn run_denoise(
    params: &RunParams,
    original: &ImageSource,
    weights: &Path,
    paths: &DenoiseOutputs,
) -> Result<Vec<PathBuf>> {
    let clean = original.load(params.threshold)?;
    let (weights_set, converged) = formats::read_weights(weights)?;
    let solve = params.solve_config()?;
    let noisy = autoencoder::inject_noise(
        &clean,
        params.noise_rate,
        seeds::derive(params.seed, &[0x40]),
    )?;
    let restored = autoencoder::denoise(&noisy, &weights_set, &solve)?;
    let stats = paths
        .stats
        .as_ref()
        .map(|_| {
            autoencoder::evaluate_restoration(
                &clean,
                &weights_set,
                params.noise_rate,
                params.trials,
                params.residual_tolerance,
                &solve,
            )
        })
        .transpose()?;
    let mut out = Outputs::new("denoise", params);
    out.record("input", original.describe());
    out.input("weights", weights);
    out.record("weights_converged", converged);
    finish_denoise(out, paths, &noisy, &restored, &clean, stats)
}

/// Train one 3×3 filter per pixel.
pub fn run_conv_train(
    params: &RunParams,
    input: &ImageSource,
    store_out: &Path,
    manifest: &Path,
) -> Result<Vec<PathBuf>> {
    let image = input.load(params.threshold)?;
    let store = convfilter::train_patch_weights(&image, &params.train_config()?)?;
    let mut out = Outputs::new("conv-train", params);
    out.record("input", input.describe());
    out.record("patches", store.entries().len());
    out.record("converged_patches", store.converged_count());
    out.write("store", store_out, &formats::format_store(&store))?;
    out.finish(manifest)
}

pub fn run_conv_denoise(
    params: &RunParams,
    original: &ImageSource,
    store: &Path,
    paths: &DenoiseOutputs,
) -> Result<Vec<PathBuf>> {
    let clean = original.load(params.threshold)?;
    let store_data = formats::read_store(store)?;
    let solve = params.solve_config()?;
    let noisy = autoencoder::inject_noise(
        &clean,
        params.noise_rate,
        seeds::derive(params.seed, &[0x40]),
    )?;
    let restored = convfilter::conv_denoise(&noisy, &store_data, &solve)?;
    let stats = paths
        .stats
        .as_ref()
        .map(|_| {
            convfilter::evaluate_conv_restoration(
                &clean,
                &store_data,
                params.noise_rate,
                params.trials,
                params.residual_tolerance,
                &solve,
            )
        })
        .transpose()?;
    let mut out = Outputs::new("conv-denoise", params);
    out.record("input", original.describe());
    out.input("store", store);
    finish_denoise(out, paths, &noisy, &restored, &clean, stats)
}

/// Flip `noise_rate` of the pixels.
pub fn run_noise(
    params: &RunParams,
    input: &ImageSource,
    output: &Path,
    manifest: &Path,
) -> Result<Vec<PathBuf>> {
    let image = input.load(params.threshold)?;
    let noisy = autoencoder::inject_noise(&image, params.noise_rate, params.seed)?;
    let mut out = Outputs::new("noise", params);
    out.record("input", input.describe());
    out.record("flipped", noisy.hamming(&image)?);
    out.write("output", output, &image_text(output, &noisy))?;
    out.finish(manifest)
}

/// Quantum features and a PCA baseline for selected MNIST classes.
#[derive(Debug, Clone)]
pub struct DimredResult {
    pub features: Vec<FeaturePoint>,
    pub pca_points: Vec<Vec<f64>>,
    pub quantum_accuracy: f64,
    pub pca_accuracy: f64,
}

/// The first `per_class` samples of each digit in `digits`, in file order.
pub fn select_digits(
    samples: Vec<(GrayImage, u8)>,
    digits: &[u8],
    per_class: usize,
) -> Vec<(GrayImage, u8)> {
    let mut taken: BTreeMap<u8, usize> = BTreeMap::new();
    samples
        .into_iter()
        .filter(|(_, label)| {
            let n = taken.entry(*label).or_default();
            let keep = digits.contains(label) && *n < per_class;
            if keep {
                *n += 1;
            }
            keep
        })
        .collect()
}

pub fn dimred_experiment(samples: &[(GrayImage, u8)], threshold: f64) -> Result<DimredResult> {
    let labels: Vec<u8> = samples.iter().map(|(_, l)| *l).collect();
    let features = samples
        .iter()
        .map(|(img, label)| {
            let mut p = dimred::reduce_to_2d(&dimred::binarize(img, threshold)?)?;
            p.label = Some(*label);
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let coords: Vec<Vec<f64>> = features.iter().map(|p| p.coords().to_vec()).collect();
    let images: Vec<GrayImage> = samples.iter().map(|(img, _)| img.clone()).collect();
    let pca = dimred::pca_project(&images, 2)?;
    Ok(DimredResult {
        quantum_accuracy: dimred::centroid_classify(&coords, &labels)?,
        pca_accuracy: dimred::centroid_classify(&pca.points, &labels)?,
        features,
        pca_points: pca.points,
    })
}

pub fn run_dimred(
    params: &RunParams,
    dir: &Path,
    digits: &[u8],
    per_class: usize,
    features_out: &Path,
    manifest: &Path,
) -> Result<Vec<PathBuf>> {
    let images = dir.join(MNIST_IMAGES);
    let labels = dir.join(MNIST_LABELS);
    let count = idx_count(&images)?;
    let samples = select_digits(
        formats::read_mnist_idx(&images, &labels, count, 0)?,
        digits,
        per_class,
    );
    for d in digits {
        let n = samples.iter().filter(|(_, l)| l == d).count();
        if n < per_class {
            return Err(Error::Argument(format!(
                "only {n} samples of digit {d}, wanted {per_class}"
            )));
        }
    }
    let result = dimred_experiment(&samples, params.threshold)?;
    let mut out = Outputs::new("dimred", params);
    out.input("images", &images);
    out.input("labels", &labels);
    out.record(
        "digits",
        digits
            .iter()
            .map(u8::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    out.record("per_class", per_class);
    out.record("quantum_accuracy", result.quantum_accuracy);
    out.record("pca_accuracy", result.pca_accuracy);
    out.write(
        "features",
        features_out,
        &formats::format_features_csv(&result.features),
    )?;
    out.finish(manifest)
}

/// Number of images declared in an IDX image file header.
fn idx_count(path: &Path) -> Result<usize> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    bytes
        .get(4..8)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]) as usize)
        .ok_or_else(|| Error::parse(path, 0, "truncated IDX header"))
}

pub fn run_bench(
    params: &RunParams,
    repeats: usize,
    csv_out: &Path,
    report_out: Option<&Path>,
    manifest: &Path,
) -> Result<(BenchSummary, Vec<PathBuf>)> {
    let config = BenchConfig {
        repeats,
        solve: params.solve_config()?,
        ..BenchConfig::default()
    };
    let summary = bench::run_bench(&config)?;
    let mut out = Outputs::new("bench", params);
    out.record("repeats", repeats);
    out.record("speedup_at_16", summary.speedup());
    out.record("conv_r_squared", summary.conv_fit.r_squared);
    out.write("csv", csv_out, &summary.to_csv())?;
    if let Some(path) = report_out {
        out.write("report", path, &summary.report())?;
    }
    let files = out.finish(manifest)?;
    Ok((summary, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_round_trip_through_map() {
        let p = RunParams {
            seed: 17,
            noise_rate: 0.1,
            ..RunParams::default()
        };
        let mut q = RunParams::default();
        q.apply(&p.to_map()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn manifests_replay_as_configs() {
        let p = RunParams {
            seed: 5,
            ..RunParams::default()
        };
        let mut manifest = Outputs::new("noise", &p).manifest;
        manifest.insert("output".into(), "x.grid".into());
        let mut q = RunParams::default();
        q.apply(&RunParams::config_values(manifest)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn params_reject_bad_values() {
        let mut p = RunParams::default();
        let bad = |k: &str, v: &str| BTreeMap::from([(k.to_string(), v.to_string())]);
        assert!(p.clone().apply(&bad("noise_rate", "1.5")).is_err());
        assert!(p.clone().apply(&bad("steps", "0")).is_err());
        assert!(p.clone().apply(&bad("bogus", "1")).is_err());
        assert!(p.apply(&bad("shots", "x")).is_err());
    }

    #[test]
    fn select_digits_keeps_file_order() {
        let img = GrayImage::new(1, 1, vec![0.0]).unwrap();
        let samples: Vec<_> = [0u8, 1, 2, 0, 1, 0]
            .iter()
            .map(|&l| (img.clone(), l))
            .collect();
        let got: Vec<u8> = select_digits(samples, &[0, 1], 2)
            .iter()
            .map(|s| s.1)
            .collect();
        assert_eq!(got, vec![0, 1, 0, 1]);
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(
            default_manifest(Path::new("out/x.grid")),
            PathBuf::from("out/x.grid.manifest")
        );
    }
}
