use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use saliency_eval::io::{write_report, NegativePolicy, ReportDocument, ReportFormat};
use saliency_eval::mask::AnnotationFilter;
use saliency_eval::pipeline::{
    parse_id_list, parse_pair_list, run_accuracy, run_make_crops, run_stability_crop,
    run_stability_frames, run_synth, with_workers, AccuracyRun, CropRun, FramesRun, MakeCropsRun,
    MaskSource, RunError, SynthRun,
};
use saliency_eval::stability::CropScale;
use saliency_eval::{AccuracyConfig, Error, KernelSpec};

#[derive(Parser)]
#[command(name = "saliency-eval", version, about = "Accuracy and stability metrics for saliency maps")]
struct Cli {
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weighting Game (plus pointing and baseline columns) over every pair.
    WeightingGame(AccuracyArgs),
    /// Same run as weighting-game; kept for symmetry with the literature.
    PointingGame(AccuracyArgs),
    /// Crop-protocol stability over a crop manifest.
    StabilityCrop(CropArgs),
    /// Consecutive-frame stability over one or more frame manifests.
    StabilityFrames(FramesArgs),
    /// Sample crops for a directory of PNG images.
    MakeCrops(MakeCropsArgs),
    /// Write a synthetic dataset with an ideal explainer.
    Synth(SynthArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: String,
    /// Negative value policy: error, clamp or abs.
    #[arg(long, default_value = "error")]
    negatives: String,
}

#[derive(Args)]
struct AccuracyArgs {
    #[arg(long, conflicts_with = "masks_dir", required_unless_present = "masks_dir")]
    annotations: Option<PathBuf>,
    /// Directory of `{image_id}_{class_id}.png` masks.
    #[arg(long)]
    masks_dir: Option<PathBuf>,
    #[arg(long)]
    saliency_dir: PathBuf,
    /// Side of the square dilation kernel (odd).
    #[arg(long, default_value_t = KernelSpec::DEFAULT_SIZE)]
    dilate: usize,
    #[arg(long, default_value_t = 0.10)]
    small_threshold: f64,
    #[arg(long, default_value_t = 0)]
    pointing_tolerance: usize,
    /// Comma-separated category ids to keep.
    #[arg(long)]
    categories: Option<String>,
    #[arg(long)]
    exclude_crowd: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScaleArgs {
    #[arg(long, default_value_t = 0.75)]
    scale_min: f64,
    #[arg(long, default_value_t = 0.9)]
    scale_max: f64,
}

#[derive(Args)]
struct CropArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    scale: ScaleArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FramesArgs {
    #[arg(long, required = true, num_args = 1..)]
    manifest: Vec<PathBuf>,
    /// Comma-separated pair start frames, overriding the manifests.
    #[arg(long)]
    pairs: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MakeCropsArgs {
    #[arg(long)]
    images_dir: PathBuf,
    #[arg(long)]
    saliency_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    scale: ScaleArgs,
    #[arg(long, default_value = "error")]
    negatives: String,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    images: usize,
    #[arg(long, default_value_t = 96)]
    size: usize,
    #[arg(long, default_value_t = 3)]
    shapes: usize,
    #[arg(long, default_value_t = 6.0)]
    sigma: f64,
    #[arg(long, default_value_t = 2)]
    sequences: usize,
    #[arg(long, default_value_t = 150)]
    frames: usize,
    #[arg(long, default_value_t = 1.5)]
    max_zoom: f64,
    #[command(flatten)]
    scale: ScaleArgs,
}

fn config<T>(r: saliency_eval::Result<T>) -> Result<T, RunError> {
    r.map_err(RunError::Config)
}

fn emit(doc: &ReportDocument, output: &OutputArgs) -> Result<(), RunError> {
    let format: ReportFormat = config(output.format.parse())?;
    match &output.out {
        Some(path) => write_report(doc, path, format)?,
        None => {
            let text = match format {
                ReportFormat::Json => doc.to_json()?,
                ReportFormat::Csv => doc.to_csv()?,
            };
            print!("{text}");
        }
    }
    Ok(())
}

/// Writes whatever report exists, then passes the outcome through.
fn report(result: Result<ReportDocument, RunError>, output: &OutputArgs) -> Result<(), RunError> {
    match result {
        Ok(doc) => emit(&doc, output),
        Err(RunError::Empty(Some(doc))) => {
            emit(&doc, output)?;
            Err(RunError::Empty(None))
        }
        Err(e) => Err(e),
    }
}

fn accuracy(args: &AccuracyArgs, command: &str) -> Result<(), RunError> {
    let negatives: NegativePolicy = config(args.output.negatives.parse())?;
    let masks = match (&args.annotations, &args.masks_dir) {
        (Some(path), _) => MaskSource::Annotations {
            path: path.clone(),
            filter: AnnotationFilter {
                categories: config(args.categories.as_deref().map(parse_id_list).transpose())?,
                include_crowd: !args.exclude_crowd,
            },
        },
        (None, Some(dir)) => MaskSource::PngDir(dir.clone()),
        (None, None) => unreachable!("clap requires one mask source"),
    };
    let run = AccuracyRun {
        masks,
        saliency_dir: args.saliency_dir.clone(),
        config: AccuracyConfig {
            kernel: config(KernelSpec::new(args.dilate))?,
            pointing_tolerance: args.pointing_tolerance,
        },
        small_threshold: args.small_threshold,
        negatives,
    };
    report(run_accuracy(&run, command), &args.output)
}

fn scale(args: &ScaleArgs) -> CropScale {
    CropScale {
        min: args.scale_min,
        max: args.scale_max,
    }
}

fn dispatch(command: &Command) -> Result<(), RunError> {
    match command {
        Command::WeightingGame(a) => accuracy(a, "weighting-game"),
        Command::PointingGame(a) => accuracy(a, "pointing-game"),
        Command::StabilityCrop(a) => {
            let run = CropRun {
                manifest: a.manifest.clone(),
                seed: a.seed,
                scale: scale(&a.scale),
                negatives: config(a.output.negatives.parse())?,
            };
            report(run_stability_crop(&run), &a.output)
        }
        Command::StabilityFrames(a) => {
            let run = FramesRun {
                manifests: a.manifest.clone(),
                pairs: config(a.pairs.as_deref().map(parse_pair_list).transpose())?,
                negatives: config(a.output.negatives.parse())?,
            };
            report(run_stability_frames(&run), &a.output)
        }
        Command::MakeCrops(a) => {
            let run = MakeCropsRun {
                images_dir: a.images_dir.clone(),
                saliency_dir: a.saliency_dir.clone(),
                out_dir: a.out.clone(),
                seed: a.seed,
                scale: scale(&a.scale),
                negatives: config(a.negatives.parse())?,
            };
            let out = run_make_crops(&run)?;
            eprintln!(
                "wrote {} crops ({} aligned maps); manifest {}",
                out.entries,
                out.aligned_maps,
                out.manifest_path.display()
            );
            Ok(())
        }
        Command::Synth(a) => {
            let run = SynthRun {
                out_dir: a.out.clone(),
                seed: a.seed,
                images: a.images,
                size: a.size,
                shapes: a.shapes,
                sigma: a.sigma,
                scale: scale(&a.scale),
                sequences: a.sequences,
                frames: a.frames,
                max_zoom: a.max_zoom,
            };
            let out = run_synth(&run)?;
            eprintln!("wrote synthetic dataset; annotations {}", out.annotations.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = with_workers(cli.workers, || dispatch(&cli.command))
        .map_err(|e: Error| RunError::Config(e))
        .and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("saliency-eval: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
