use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use convqae::pipeline::experiments::{self, DenoiseOutputs, ImageSource, RunParams};
use convqae::pipeline::formats;

/// Convolution-filter quantum autoencoder experiments.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Flat `key = value` parameter file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for trials and patches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    params: ParamFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ParamFlags {
    /// Trotter steps M.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Total annealing time t_f.
    #[arg(long, global = true)]
    total_time: Option<f64>,
    /// Transverse field strength h_x.
    #[arg(long, global = true)]
    field_x: Option<f64>,
    /// Measurement shots per anneal.
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Learning rate ε.
    #[arg(long, global = true)]
    learning_rate: Option<f64>,
    /// Initial couplings are uniform in [-r, r].
    #[arg(long, global = true)]
    init_range: Option<f64>,
    /// Training epoch limit.
    #[arg(long, global = true)]
    max_epochs: Option<usize>,
    /// Fraction of pixels flipped.
    #[arg(long, global = true)]
    noise_rate: Option<f64>,
    /// Noise-and-denoise rounds for `--stats`.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Wrong pixels still counted as restored in the tolerant fraction.
    #[arg(long, global = true)]
    residual_tolerance: Option<usize>,
    /// Binarization threshold for grayscale inputs.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl ParamFlags {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        put("steps", self.steps.map(|v| v.to_string()));
        put("total_time", self.total_time.map(|v| v.to_string()));
        put("field_x", self.field_x.map(|v| v.to_string()));
        put("shots", self.shots.map(|v| v.to_string()));
        put("learning_rate", self.learning_rate.map(|v| v.to_string()));
        put("init_range", self.init_range.map(|v| v.to_string()));
        put("max_epochs", self.max_epochs.map(|v| v.to_string()));
        put("noise_rate", self.noise_rate.map(|v| v.to_string()));
        put("trials", self.trials.map(|v| v.to_string()));
        put(
            "residual_tolerance",
            self.residual_tolerance.map(|v| v.to_string()),
        );
        put("threshold", self.threshold.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        map
    }
}

#[derive(Args, Debug)]
struct Input {
    /// Text grid (`W H` + rows of 0/1) or plain PGM.
    #[arg(long, conflicts_with = "mnist", required_unless_present = "mnist")]
    input: Option<PathBuf>,
    /// Use sample INDEX of the bundled MNIST subset instead of a file.
    #[arg(long, value_name = "INDEX")]
    mnist: Option<usize>,
    /// Dataset directory (default: $CONVQAE_DATA_DIR, else ./data).
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

impl Input {
    fn source(&self) -> ImageSource {
        match (&self.input, self.mnist) {
            (Some(path), _) => ImageSource::File(path.clone()),
            (None, Some(index)) => ImageSource::Mnist {
                dir: self.data_dir.clone().unwrap_or_else(experiments::data_dir),
                index,
            },
            (None, None) => unreachable!("clap requires --input or --mnist"),
        }
    }
}

#[derive(Args, Debug)]
struct DenoiseArgs {
    #[command(flatten)]
    input: Input,
    /// Denoised sample output (`.pgm` for PGM, otherwise text grid).
    #[arg(long)]
    output: PathBuf,
    /// Also write the noisy sample here.
    #[arg(long)]
    noisy: Option<PathBuf>,
    /// Run `trials` noise-and-denoise rounds and write per-trial CSV here.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Run manifest (default: the main output path plus `.manifest`).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl DenoiseArgs {
    fn outputs(&self) -> DenoiseOutputs {
        DenoiseOutputs {
            output: self.output.clone(),
            noisy: self.noisy.clone(),
            stats: self.stats.clone(),
            manifest: manifest_or_default(&self.manifest, &self.output),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn whole-image couplings from a clean image.
    Train {
        #[command(flatten)]
        input: Input,
        /// Couplings file to write.
        #[arg(long)]
        weights: PathBuf,
        /// Run manifest (default: the main output path plus `.manifest`).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Denoise with whole-image couplings.
    Denoise {
        #[command(flatten)]
        args: DenoiseArgs,
        /// Couplings file from `train`.
        #[arg(long)]
        weights: PathBuf,
    },
    /// Learn one 3×3 filter per pixel.
    ConvTrain {
        #[command(flatten)]
        input: Input,
        /// Patch store to write.
        #[arg(long)]
        store: PathBuf,
        /// Run manifest (default: the main output path plus `.manifest`).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Denoise with the sliding 3×3 filter.
    ConvDenoise {
        #[command(flatten)]
        args: DenoiseArgs,
        /// Patch store from `conv-train`.
        #[arg(long)]
        store: PathBuf,
    },
    /// 2-D coupling features and a PCA baseline for MNIST digits.
    Dimred {
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Comma-separated digit classes.
        #[arg(long, value_delimiter = ',', default_values_t = [0u8, 1])]
        digits: Vec<u8>,
        /// Images per class, taken in file order.
        #[arg(long, default_value_t = 30)]
        per_class: usize,
        /// Feature CSV (`label,f_right,f_down`).
        #[arg(long)]
        output: PathBuf,
        /// Run manifest (default: the main output path plus `.manifest`).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Flip a fraction of pixels.
    Noise {
        #[command(flatten)]
        input: Input,
        /// Noisy image output.
        #[arg(long)]
        output: PathBuf,
        /// Run manifest (default: the main output path plus `.manifest`).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Time normal versus conv denoising.
    Bench {
        /// Timed runs per size (at least 3).
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Timing CSV (`mode,n,seconds`).
        #[arg(long)]
        output: PathBuf,
        /// Fitted scaling summary.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Run manifest (default: the main output path plus `.manifest`).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

fn manifest_or_default(manifest: &Option<PathBuf>, primary: &Path) -> PathBuf {
    manifest
        .clone()
        .unwrap_or_else(|| experiments::default_manifest(primary))
}

fn params(cli: &Cli) -> anyhow::Result<RunParams> {
    let mut values = match &cli.config {
        Some(path) => RunParams::config_values(formats::read_key_values(path)?),
        None => BTreeMap::new(),
    };
    values.extend(cli.params.overrides());
    let mut params = RunParams::default();
    params.apply(&values).context("invalid parameters")?;
    Ok(params)
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        bail!("--threads must be at least 1");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("cannot configure the worker pool")?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    configure_threads(cli.threads)?;
    let params = params(&cli)?;
    let written = match &cli.command {
        Command::Train {
            input,
            weights,
            manifest,
        } => experiments::run_train(
            &params,
            &input.source(),
            weights,
            &manifest_or_default(manifest, weights),
        )?,
        Command::Denoise { args, weights } => {
            experiments::run_denoise(&params, &args.input.source(), weights, &args.outputs())?
        }
        Command::ConvTrain {
            input,
            store,
            manifest,
        } => experiments::run_conv_train(
            &params,
            &input.source(),
            store,
            &manifest_or_default(manifest, store),
        )?,
        Command::ConvDenoise { args, store } => {
            experiments::run_conv_denoise(&params, &args.input.source(), store, &args.outputs())?
        }
        Command::Dimred {
            data_dir,
            digits,
            per_class,
            output,
            manifest,
        } => {
            let dir = data_dir.clone().unwrap_or_else(experiments::data_dir);
            experiments::run_dimred(
                &params,
                &dir,
                digits,
                *per_class,
                output,
                &manifest_or_default(manifest, output),
            )?
        }
        Command::Noise {
            input,
            output,
            manifest,
        } => experiments::run_noise(
            &params,
            &input.source(),
            output,
            &manifest_or_default(manifest, output),
        )?,
        Command::Bench {
            repeats,
            output,
            report,
            manifest,
        } => {
            let (summary, written) = experiments::run_bench(
                &params,
                *repeats,
                output,
                report.as_deref(),
                &manifest_or_default(manifest, output),
            )?;
            print!("{}", summary.report());
            written
        }
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
