//! Batch front door for the transdepth toolkit.
//!
//! Five subcommands cover the full workflow: `synthesize` turns a dataset
//! into training-pair directories, `evaluate` scores completed depth
//! against ground truth, `error-map` renders a relative-error image,
//! `loss-report` prints the training-loss breakdown for one pair, and
//! `baseline-complete` runs the reference diffusion completer.
//!
//! Exit codes: 0 success, 1 bad input (flags, configuration, file
//! contents, dataset layout), 2 filesystem I/O, 3 internal.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use transdepth::io::{load_depth, load_mask, read_pair, save_rgb, DEFAULT_DEPTH_SCALE};
use transdepth::losses::LossOptions;
use transdepth::metrics::DEFAULT_MAX_REL;
use transdepth::pipeline::{
    complete_pair_dir, evaluate_dirs, synthesize_dataset, SynthesizeOptions,
};
use transdepth::raster::MaskingConfig;
use transdepth::{error_map, supervised_loss, CompletionOptions, Error, ErrorClass, Result};

/// Environment variable supplying the default worker count when neither
/// `--jobs` nor a config file sets one.
const JOBS_ENV_VAR: &str = "TRANSDEPTH_JOBS";

#[derive(Parser)]
#[command(name = "transdepth", version, about = "Synthesize, evaluate, and complete transparent-object depth data")]
struct Cli {
    /// Config file of key = value lines overriding built-in defaults.
    /// Command-line flags beat config values. Keys: erosion_size,
    /// erosion_iters, no_erosion, erode_union, seed, augment, noise_sigma,
    /// jobs, depth_scale, alpha, beta, max_rel.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a dataset of frames into training-pair directories.
    Synthesize(SynthesizeArgs),
    /// Score completed depth maps against ground truth over mask regions.
    Evaluate(EvaluateArgs),
    /// Render the relative error of one depth map as a white-to-red image.
    ErrorMap(ErrorMapArgs),
    /// Print the training-loss breakdown of a prediction against one pair.
    LossReport(LossReportArgs),
    /// Fill a pair's depth holes with the reference diffusion completer.
    BaselineComplete(BaselineCompleteArgs),
}

#[derive(Args)]
struct SynthesizeArgs {
    /// Dataset root (scene_*/frame_* directories plus camera.cfg).
    #[arg(long, value_name = "DIR")]
    root: PathBuf,
    /// Output root; one pair directory per frame is created under it.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Erosion passes applied to each non-transparent instance mask.
    #[arg(long, value_name = "N")]
    erosion_iters: Option<usize>,
    /// Side of the square erosion element, odd.
    #[arg(long, value_name = "PX")]
    erosion_size: Option<usize>,
    /// Mask the raw instance masks without eroding them first.
    #[arg(long)]
    no_erosion: bool,
    /// Seed for the per-frame augmentation draws.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Draw a random flip, rotation, and depth noise per frame.
    #[arg(long)]
    augment: bool,
    /// Worker threads; 0 means one per core. Defaults to $TRANSDEPTH_JOBS.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory of predicted depth PNGs.
    #[arg(long, value_name = "DIR")]
    pred_dir: PathBuf,
    /// Directory of ground-truth depth PNGs with matching file names.
    #[arg(long, value_name = "DIR")]
    gt_dir: PathBuf,
    /// Directory of evaluation-region mask PNGs with matching file names.
    #[arg(long, value_name = "DIR")]
    mask_dir: PathBuf,
    /// Also write a machine-readable report (aggregate plus one line per
    /// frame) to this file.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ErrorMapArgs {
    /// Predicted depth PNG.
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    /// Ground-truth depth PNG.
    #[arg(long, value_name = "FILE")]
    gt: PathBuf,
    /// Mask PNG selecting the pixels to colorize.
    #[arg(long, value_name = "FILE")]
    mask: PathBuf,
    /// Relative error mapped to full red; smaller errors interpolate.
    #[arg(long, value_name = "REL")]
    max_rel: Option<f64>,
    /// Output image path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct LossReportArgs {
    /// Predicted depth PNG; decoded with the pair's depth scale.
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    /// Training-pair directory supplying ground truth, masks, and camera.
    #[arg(long, value_name = "DIR")]
    gt_pair_dir: PathBuf,
    /// Weight of the normal-consistency term.
    #[arg(long, value_name = "A")]
    alpha: Option<f64>,
    /// Weight of the masked-region loss in the combined value.
    #[arg(long, value_name = "B")]
    beta: Option<f64>,
}

#[derive(Args)]
struct BaselineCompleteArgs {
    /// Training-pair directory whose masked depth is completed.
    #[arg(long, value_name = "DIR")]
    pair_dir: PathBuf,
    /// Output depth PNG; defaults to depth_completed.png beside the pair.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors are bad input (exit 1); --help and --version
            // print to stdout and succeed.
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Validation => 1,
        ErrorClass::Io => 2,
        ErrorClass::Internal => 3,
    }
}

fn class_name(class: ErrorClass) -> &'static str {
    match class {
        ErrorClass::Validation => "validation",
        ErrorClass::Io => "io",
        ErrorClass::Internal => "internal",
    }
}

fn run(cli: Cli) -> Result<u8> {
    let overrides = Overrides::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synthesize(args) => run_synthesize(args, &overrides),
        Command::Evaluate(args) => run_evaluate(args, &overrides),
        Command::ErrorMap(args) => run_error_map(args, &overrides),
        Command::LossReport(args) => run_loss_report(args, &overrides),
        Command::BaselineComplete(args) => run_baseline_complete(args),
    }
}

fn run_synthesize(args: SynthesizeArgs, overrides: &Overrides) -> Result<u8> {
    let erosion_size = args
        .erosion_size
        .or(overrides.parsed("erosion_size")?)
        .unwrap_or(MaskingConfig::default().erosion_element.0);
    let masking = MaskingConfig {
        erosion_element: (erosion_size, erosion_size),
        erosion_iterations: args
            .erosion_iters
            .or(overrides.parsed("erosion_iters")?)
            .unwrap_or(MaskingConfig::default().erosion_iterations),
        erosion_enabled: !(args.no_erosion
            || overrides.parsed("no_erosion")?.unwrap_or(false)),
        erode_union: overrides.parsed("erode_union")?.unwrap_or(false),
    };
    let opts = SynthesizeOptions {
        masking,
        augment: args.augment || overrides.parsed("augment")?.unwrap_or(false),
        noise_sigma: overrides
            .parsed("noise_sigma")?
            .unwrap_or(SynthesizeOptions::default().noise_sigma),
        seed: args.seed.or(overrides.parsed("seed")?).unwrap_or(0),
        jobs: resolve_jobs(args.jobs, overrides)?,
    };

    let scan = transdepth::io::scan_dataset(&args.root)?;
    for warning in &scan.warnings {
        eprintln!("warning: {warning}");
    }
    let total = scan.frames.len();
    let summary = synthesize_dataset(&scan, &args.out, &opts)?;
    println!("wrote {} of {} pairs under {}", summary.pairs_written, total, args.out.display());
    println!("manifest {}", summary.manifest_path.display());

    if summary.failures.is_empty() {
        return Ok(0);
    }
    eprintln!("{} frame(s) failed:", summary.failures.len());
    eprintln!("  {:<28} {:<12} message", "frame", "class");
    let mut worst = 1;
    for failure in &summary.failures {
        eprintln!(
            "  {:<28} {:<12} {}",
            failure.label,
            class_name(failure.class),
            failure.message
        );
        worst = worst.max(exit_code(failure.class));
    }
    Ok(worst)
}

fn run_evaluate(args: EvaluateArgs, overrides: &Overrides) -> Result<u8> {
    let depth_scale = resolve_depth_scale(overrides)?;
    let eval = evaluate_dirs(&args.pred_dir, &args.gt_dir, &args.mask_dir, depth_scale)?;
    println!("{}", eval.aggregate);
    if let Some(report_path) = args.report {
        let mut text = format!("aggregate {}\n", eval.aggregate.to_line());
        for (stem, report) in &eval.per_frame {
            match report {
                Some(r) => text.push_str(&format!("frame {stem} {}\n", r.to_line())),
                None => text.push_str(&format!("frame {stem} empty\n")),
            }
        }
        std::fs::write(&report_path, text).map_err(|e| Error::io(&report_path, e))?;
        println!("report {}", report_path.display());
    }
    Ok(0)
}

fn run_error_map(args: ErrorMapArgs, overrides: &Overrides) -> Result<u8> {
    let depth_scale = resolve_depth_scale(overrides)?;
    let max_rel = args
        .max_rel
        .or(overrides.parsed("max_rel")?)
        .unwrap_or(DEFAULT_MAX_REL);
    let pred = load_depth(&args.pred, depth_scale)?;
    let gt = load_depth(&args.gt, depth_scale)?;
    let mask = load_mask(&args.mask)?;
    let image = error_map(&pred, &gt, &mask, max_rel)?;
    save_rgb(&args.out, &image)?;
    println!("wrote {}", args.out.display());
    Ok(0)
}

fn run_loss_report(args: LossReportArgs, overrides: &Overrides) -> Result<u8> {
    let defaults = LossOptions::default();
    let opts = LossOptions {
        alpha: args.alpha.or(overrides.parsed("alpha")?).unwrap_or(defaults.alpha),
        beta: args.beta.or(overrides.parsed("beta")?).unwrap_or(defaults.beta),
        ..defaults
    };
    let (pair, meta) = read_pair(&args.gt_pair_dir)?;
    let pred = load_depth(&args.pred, meta.depth_scale)?;
    // The synthetically removed region (keep-mask complement) plays the
    // transparent role; real transparent pixels have no ground truth and
    // drop out of both means on their own.
    let breakdown = supervised_loss(
        &pred,
        &pair.target_depth,
        &pair.final_mask.complement(),
        &meta.intrinsics,
        &opts,
    )?;
    println!("l1 = {} (n1 = {})", breakdown.l1, breakdown.n1);
    println!("l2 = {} (n2 = {})", breakdown.l2, breakdown.n2);
    println!(
        "combined = {} (alpha = {}, beta = {})",
        breakdown.combined, opts.alpha, opts.beta
    );
    Ok(0)
}

fn run_baseline_complete(args: BaselineCompleteArgs) -> Result<u8> {
    let (path, result) = complete_pair_dir(
        &args.pair_dir,
        args.out.as_deref(),
        &CompletionOptions::default(),
    )?;
    println!("wrote {}", path.display());
    println!(
        "iterations {}  max_update {:e}  converged {}  unfilled {}",
        result.iterations_run, result.max_update, result.converged, result.unfilled
    );
    Ok(0)
}

fn resolve_depth_scale(overrides: &Overrides) -> Result<f64> {
    let scale: f64 = overrides.parsed("depth_scale")?.unwrap_or(DEFAULT_DEPTH_SCALE);
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::Config(format!(
            "depth_scale must be finite and > 0, got {scale}"
        )));
    }
    Ok(scale)
}

/// Worker-count precedence: flag, then config key, then $TRANSDEPTH_JOBS,
/// then 0 (one worker per core).
fn resolve_jobs(flag: Option<usize>, overrides: &Overrides) -> Result<usize> {
    if let Some(jobs) = flag {
        return Ok(jobs);
    }
    if let Some(jobs) = overrides.parsed("jobs")? {
        return Ok(jobs);
    }
    match std::env::var(JOBS_ENV_VAR) {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            Error::Config(format!("bad {JOBS_ENV_VAR} value: {raw:?}"))
        }),
        Err(_) => Ok(0),
    }
}

const CONFIG_KEYS: [&str; 12] = [
    "alpha",
    "augment",
    "beta",
    "depth_scale",
    "erode_union",
    "erosion_iters",
    "erosion_size",
    "jobs",
    "max_rel",
    "no_erosion",
    "noise_sigma",
    "seed",
];

/// Defaults loaded from the `--config` file; empty when no file is given.
struct Overrides {
    values: BTreeMap<String, String>,
}

impl Overrides {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self { values: BTreeMap::new() });
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = BTreeMap::new();
        for (number, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::format(path, format!("line {}: expected key = value", number + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !CONFIG_KEYS.contains(&key) {
                return Err(Error::format(
                    path,
                    format!("unknown config key {key:?} (known: {})", CONFIG_KEYS.join(", ")),
                ));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::format(path, format!("duplicate config key {key:?}")));
            }
        }
        Ok(Self { values })
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::Config(format!("bad config value for {key}: {raw:?}"))
            }),
        }
    }
}
