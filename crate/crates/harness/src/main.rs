use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coconet::dataio::{load_model, save_model};
use coconet::model::{reconstruct, train, TrainConfig};
use coconet_harness::memorize::{load_input, DEFAULT_SNAPSHOTS};
use coconet_harness::{
    run_completion_demo, run_denoise_benchmark, run_memorize_demo, run_upsample_benchmark,
    BenchmarkRun, Experiment, HarnessError, Method, OutputDir, Result, TrainOverrides,
};

#[derive(Parser)]
#[command(name = "coconet", version, about = "Coordinate-to-color network benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoising benchmark on CIFAR-10 test images.
    Denoise {
        /// CIFAR-10 binary batch (test_batch.bin).
        #[arg(long)]
        cifar: PathBuf,
        #[command(flatten)]
        bench: BenchArgs,
        /// Noise standard deviations on the 8-bit scale.
        #[arg(long, value_delimiter = ',', default_values_t = BenchmarkRun::DEFAULT_SIGMAS)]
        sigmas: Vec<f64>,
        /// Use all 10000 test images (several hours per noise level on one core).
        #[arg(long, conflicts_with = "subset")]
        all: bool,
    },
    /// 4x upsampling benchmark on Set5.
    Upsample {
        /// Directory with the Set5 images (.ppm or .png).
        #[arg(long)]
        set5: PathBuf,
        #[command(flatten)]
        bench: BenchArgs,
    },
    /// Patch completion demo on Set5.
    Complete {
        #[arg(long)]
        set5: PathBuf,
        #[command(flatten)]
        bench: BenchArgs,
    },
    /// Memorization snapshots of a single image.
    Memorize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SNAPSHOTS)]
        snapshots: Vec<usize>,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train on an image and store the network as an encoded-image file.
    Encode {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Reconstruct an image from an encoded-image file.
    Decode {
        #[arg(long)]
        model: PathBuf,
        /// Output image (.ppm, or .png).
        #[arg(long)]
        out: PathBuf,
        /// Output height; defaults to the source height times `scale`.
        #[arg(long, requires = "width")]
        height: Option<usize>,
        #[arg(long, requires = "height")]
        width: Option<usize>,
        #[arg(long, default_value_t = 1, conflicts_with = "height")]
        scale: usize,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Image file, or a CIFAR-10 batch together with --cifar-index.
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    cifar_index: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    /// Hidden layer count.
    #[arg(long)]
    depth: Option<usize>,
    /// Units per hidden layer.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size; 0 trains full-batch.
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TrainArgs {
    fn overrides(&self) -> TrainOverrides {
        TrainOverrides {
            depth: self.depth,
            width: self.width,
            lr: self.lr,
            epochs: self.epochs,
            batch_size: self.batch,
        }
    }

    /// Single-image config: the 15x200 defaults adapted to the image size.
    fn config(&self, height: usize, width: usize) -> Result<TrainConfig> {
        let config = self
            .overrides()
            .apply(TrainConfig::denoising().sized_for(height, width).with_seed(self.seed));
        config
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Number of images, taken from the start of the dataset.
    #[arg(long)]
    subset: Option<usize>,
    /// Comma-separated method ids (noisy, mean3, gaussian5, bilateral3, bicubic, coconet, ...).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Images processed in parallel.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Spatial sigma of the Gaussian filters, in pixels.
    #[arg(long)]
    gaussian_sigma: Option<f64>,
    /// Spatial sigma of the bilateral filters, in pixels.
    #[arg(long)]
    bilateral_sigma_spatial: Option<f64>,
    /// Intensity sigma of the bilateral filters, on the [0, 1] scale.
    #[arg(long)]
    bilateral_sigma_range: Option<f64>,
    #[command(flatten)]
    train: TrainArgs,
}

impl BenchArgs {
    fn run(&self, experiment: Experiment, dataset: PathBuf) -> Result<BenchmarkRun> {
        let mut run = BenchmarkRun::new(experiment, dataset);
        if let Some(n) = self.subset {
            run.subset_size = n;
        }
        if let Some(ids) = &self.methods {
            run.methods = ids.iter().map(|id| Method::parse(id)).collect::<Result<_>>()?;
        }
        run.set_filter_sigmas(
            self.gaussian_sigma,
            self.bilateral_sigma_spatial,
            self.bilateral_sigma_range,
        );
        run.workers = self.workers;
        run.output_dir = self.out.clone();
        run.master_seed = self.train.seed;
        run.overrides = self.train.overrides();
        Ok(run)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Denoise {
            cifar,
            bench,
            sigmas,
            all,
        } => {
            let mut run = bench.run(Experiment::Denoise, cifar)?;
            run.sigmas = sigmas;
            if all {
                run.subset_size = 10_000;
            }
            let report = run_denoise_benchmark(&run)?;
            print!("{}", report.table);
            if !report.excluded.is_empty() {
                println!("{} image(s) excluded after divergence", report.excluded.len());
            }
        }
        Command::Upsample { set5, bench } => {
            let run = bench.run(Experiment::Upsample, set5)?;
            print!("{}", run_upsample_benchmark(&run)?.table);
        }
        Command::Complete { set5, bench } => {
            let run = bench.run(Experiment::Complete, set5)?;
            print!("{}", run_completion_demo(&run)?.table);
        }
        Command::Memorize {
            input,
            snapshots,
            train,
            out,
        } => {
            let image = load_input(&input.image, input.cifar_index)?;
            let mut config = train.config(image.height(), image.width())?;
            config.early_stop = None;
            config.snapshot_epochs = snapshots;
            let out = OutputDir::create(out)?;
            print!("{}", run_memorize_demo(&image, &config, Some(&out))?.table);
        }
        Command::Encode {
            input,
            model,
            train: args,
        } => {
            let image = load_input(&input.image, input.cifar_index)?;
            let config = args.config(image.height(), image.width())?;
            let outcome = train(&image, None, &config)?;
            save_model(&model, &outcome.model)?;
            println!(
                "{}: {} parameters, final loss {:.3e}",
                model.display(),
                config.arch.param_count(),
                outcome.model.final_loss
            );
        }
        Command::Decode {
            model,
            out,
            height,
            width,
            scale,
        } => {
            let m = load_model(&model)?;
            if scale == 0 {
                return Err(HarnessError::Config("scale must be at least 1".into()));
            }
            let (h, w) = match (height, width) {
                (Some(h), Some(w)) => (h, w),
                _ => (m.source_height * scale, m.source_width * scale),
            };
            coconet::dataio::write_image(&out, &reconstruct(&m, h, w)?)?;
            println!("{}: {h}x{w}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
