//! Command-line front end. CSV goes to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 2 usage or input parse failure, 3 numerical
//! precondition failure reported by the core library.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use steadystream_core::losses::{loss_conf, loss_rgb, pose_loss_terms, LossWeights};
use steadystream_core::metrics::{metric_ate, metric_depth, metric_recon, metric_rpe, DepthEvalMode};
use steadystream_core::refine::{
    bilateral_depth, refine_cloud, BilateralConfig, Intrinsics, RangeSigma, RangeWeighting, SpatialMetric,
};
use steadystream_core::scoring::{score_frame, ScoreConfig};
use steadystream_core::stabilize::{stabilize_trajectory, OneEuroConfig};
use steadystream_core::Trajectory;

use crate::config::{parse_config, to_flags, ConfigError};
use crate::formats::pfm::{read_pfm, write_pfm};
use crate::formats::pgm::read_pgm;
use crate::formats::ply::{read_ply, write_ply};
use crate::formats::tum::{read_trajectory_tum, write_trajectory_tum};
use crate::formats::{fmt_real, FormatError};
use crate::sim::{simulate, Policy};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Config { path: PathBuf, source: ConfigError },
    #[error("{frames} frames but {poses} poses")]
    CountMismatch { frames: usize, poses: usize },
    #[error(transparent)]
    Numeric(#[from] steadystream_core::Error),
    #[error("writing output: {0}")]
    Output(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "steadystream",
    version,
    about = "Pose-adaptive streaming weights, trajectory stabilization, depth refinement and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-frame motion, spectral quality and update weight as CSV
    Score(ScoreArgs),
    /// Causal One Euro / slerp smoothing of a TUM trajectory
    Stabilize(StabilizeArgs),
    /// Bilateral depth refinement; writes PFM, or PLY when --out ends in .ply
    Refine(RefineArgs),
    /// ATE and RPE of a predicted TUM trajectory against ground truth
    EvalTraj(EvalTrajArgs),
    /// Abs Rel and delta < 1.25 of a predicted PFM depth map
    EvalDepth(EvalDepthArgs),
    /// Accuracy, completeness and normal consistency of two PLY clouds
    EvalRecon(EvalReconArgs),
    /// Training-loss components of a predicted trajectory (and optional cloud / image pairs)
    EvalLoss(EvalLossArgs),
    /// Synthetic fast-weight memory stream
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// key=value file of defaults for this subcommand's flags; flags given on the command line win
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// TUM trajectory, one pose per frame
    #[arg(long, value_name = "FILE")]
    traj: PathBuf,
    /// Directory of .pgm frames (taken in file-name order) or a text file listing one frame path per line
    #[arg(long, value_name = "PATH")]
    frames: PathBuf,
    /// Weight on translation magnitude
    #[arg(long, default_value_t = 1.0)]
    w1: f64,
    /// Weight on rotation angle in radians
    #[arg(long, default_value_t = 1.0)]
    w2: f64,
    /// High-pass radius in frequency bins [default: max(1, floor(min(W, H) / 8))]
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 20.0)]
    sigmoid_gain: f64,
    #[arg(long, default_value_t = 0.1)]
    sigmoid_midpoint: f64,
    /// Added to the spectral magnitude sum
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    /// Upper clip of the update weight
    #[arg(long, default_value_t = 1.0)]
    clip_max: f64,
    /// Weight reported for the first frame
    #[arg(long, default_value_t = 1.0)]
    initial_weight: f64,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Args)]
struct StabilizeArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Minimum cutoff frequency in Hz
    #[arg(long, default_value_t = 1.0)]
    fmin: f64,
    /// Cutoff increase per unit of translation speed
    #[arg(long, default_value_t = 0.007)]
    beta_gain: f64,
    /// Time step in seconds used when timestamps do not advance
    #[arg(long, default_value_t = 1.0 / 30.0)]
    default_dt: f64,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Spatial {
    Pixel,
    Metric,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Weighting {
    Neighbor,
    Center,
}

#[derive(Debug, Args)]
struct RefineArgs {
    /// Input PFM depth map
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Output .pfm depth map or .ply point cloud
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Half-width of the square window
    #[arg(long, default_value_t = 2)]
    window: usize,
    /// Spatial sigma (pixels, or scene units with --spatial metric)
    #[arg(long, default_value_t = 1.0)]
    sigma_s: f64,
    /// Fixed range sigma in depth units; overrides --sigma-r-adaptive
    #[arg(long)]
    sigma_r: Option<f64>,
    /// Range sigma as a fraction of the median valid depth
    #[arg(long, default_value_t = 0.05)]
    sigma_r_adaptive: f64,
    /// Spatial distance between pixels: image plane or back-projected 3D
    #[arg(long, value_enum, default_value_t = Spatial::Pixel)]
    spatial: Spatial,
    /// Depth averaged by the weights
    #[arg(long, value_enum, default_value_t = Weighting::Neighbor)]
    weighting: Weighting,
    #[arg(long)]
    fx: Option<f64>,
    #[arg(long)]
    fy: Option<f64>,
    #[arg(long)]
    cx: Option<f64>,
    #[arg(long)]
    cy: Option<f64>,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Align {
    Se3,
    Sim3,
}

#[derive(Debug, Args)]
struct EvalTrajArgs {
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    #[arg(long, value_name = "FILE")]
    gt: PathBuf,
    /// Comma-separated prefix lengths, one CSV row each [default: full length]
    #[arg(long, value_name = "K,...", value_delimiter = ',', action = clap::ArgAction::Set)]
    prefix_frames: Vec<usize>,
    /// Alignment used for ATE
    #[arg(long, value_enum, default_value_t = Align::Se3)]
    align: Align,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum DepthMode {
    All,
    Original,
    Scale,
    ScaleAndShift,
}

#[derive(Debug, Args)]
struct EvalDepthArgs {
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    #[arg(long, value_name = "FILE")]
    gt: PathBuf,
    #[arg(long, value_enum, default_value_t = DepthMode::All)]
    mode: DepthMode,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Args)]
struct EvalReconArgs {
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    #[arg(long, value_name = "FILE")]
    gt: PathBuf,
    /// Neighbors used for PCA normals
    #[arg(long, default_value_t = 16)]
    k_normals: usize,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Args)]
struct EvalLossArgs {
    /// Predicted TUM trajectory
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    /// Ground-truth TUM trajectory
    #[arg(long, value_name = "FILE")]
    gt: PathBuf,
    /// Predicted PLY cloud with a confidence property
    #[arg(long, value_name = "FILE", requires = "gt_cloud")]
    pred_cloud: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "pred_cloud")]
    gt_cloud: Option<PathBuf>,
    /// Predicted PGM frame for the photometric term
    #[arg(long, value_name = "FILE", requires = "gt_image")]
    pred_image: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "pred_image")]
    gt_image: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    w_a: f64,
    #[arg(long, default_value_t = 1.0)]
    w_r: f64,
    #[arg(long, default_value_t = 1.0)]
    w_s: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda2: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda3: f64,
    /// Confidence regularizer weight
    #[arg(long, default_value_t = 0.2)]
    alpha_conf: f64,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 100)]
    frames: usize,
    /// Key, value and state dimension
    #[arg(long, default_value_t = 64)]
    state_dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 'adaptive' or 'constant:<beta>'
    #[arg(long, default_value = "adaptive")]
    policy: Policy,
    #[command(flatten)]
    config: ConfigArg,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut command = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    let args = match merge_config(&command, args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    let matches = match command.try_get_matches_from_mut(args) {
        Ok(m) => m,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Score(a) => cmd_score(a, out),
        Command::Stabilize(a) => cmd_stabilize(a),
        Command::Refine(a) => cmd_refine(a),
        Command::EvalTraj(a) => cmd_eval_traj(a, out, err),
        Command::EvalDepth(a) => cmd_eval_depth(a, out),
        Command::EvalRecon(a) => cmd_eval_recon(a, out),
        Command::EvalLoss(a) => cmd_eval_loss(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
    };
    match result.and_then(|()| out.flush().map_err(CliError::Output)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Splices `--key value` pairs from a `--config` file in front of the
/// user's flags so that the user's occurrences override them.
fn merge_config(command: &clap::Command, args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(sub_name) = args.get(1).and_then(|a| a.to_str()).map(str::to_owned) else {
        return Ok(args);
    };
    let Some(sub) = command.find_subcommand(&sub_name) else {
        return Ok(args);
    };
    let mut path: Option<PathBuf> = None;
    let mut i = 2;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--" {
            break;
        }
        if a == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
            i += 1;
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
        i += 1;
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let entries = parse_config(&text).map_err(|source| CliError::Config { path: path.clone(), source })?;
    let known: Vec<String> = sub
        .get_arguments()
        .filter_map(|a| a.get_long())
        .filter(|l| *l != "config" && *l != "help")
        .map(str::to_owned)
        .collect();
    let flags = to_flags(&entries, &known).map_err(|source| CliError::Config { path, source })?;
    let mut merged = Vec::with_capacity(args.len() + flags.len());
    merged.extend(args[..2].iter().cloned());
    merged.extend(flags.into_iter().map(OsString::from));
    merged.extend(args[2..].iter().cloned());
    Ok(merged)
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn format_err(path: &Path) -> impl FnOnce(FormatError) -> CliError + '_ {
    move |source| CliError::Format { path: path.to_owned(), source }
}

fn load_trajectory(path: &Path) -> CliResult<Trajectory> {
    read_trajectory_tum(&read_text(path)?).map_err(format_err(path))
}

fn csv_row(out: &mut dyn Write, fields: &[String]) -> CliResult<()> {
    writeln!(out, "{}", fields.join(",")).map_err(CliError::Output)
}

fn frame_paths(input: &Path) -> CliResult<Vec<PathBuf>> {
    let io = |source| CliError::Io { path: input.to_owned(), source };
    if input.is_dir() {
        let mut paths: Vec<PathBuf> = fs::read_dir(input)
            .map_err(io)?
            .map(|e| e.map(|e| e.path()).map_err(io))
            .collect::<CliResult<Vec<_>>>()?
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
            .collect();
        paths.sort();
        return Ok(paths);
    }
    let base = input.parent().unwrap_or(Path::new("."));
    Ok(read_text(input)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| base.join(l))
        .collect())
}

fn cmd_score(a: ScoreArgs, out: &mut dyn Write) -> CliResult<()> {
    let traj = load_trajectory(&a.traj)?;
    let frames = frame_paths(&a.frames)?;
    if frames.len() != traj.len() {
        return Err(CliError::CountMismatch { frames: frames.len(), poses: traj.len() });
    }
    let cfg = ScoreConfig {
        w1: a.w1,
        w2: a.w2,
        radius: a.radius,
        sigmoid_gain: a.sigmoid_gain,
        sigmoid_midpoint: a.sigmoid_midpoint,
        epsilon: a.epsilon,
        clip_max: a.clip_max,
        initial_weight: a.initial_weight,
    };
    cfg.validate()?;
    csv_row(out, &["index", "delta_x", "delta_q", "s1", "R", "s2", "weight"].map(String::from))?;
    let poses = traj.poses();
    for (i, path) in frames.iter().enumerate() {
        let img = read_pgm(&read_bytes(path)?).map_err(format_err(path))?;
        let prev = i.checked_sub(1).map(|j| &poses[j]);
        let s = score_frame(prev, &poses[i], &img, &cfg)?;
        let vals = [s.delta_x, s.delta_q, s.s1, s.ratio, s.s2, s.weight];
        let mut row = vec![i.to_string()];
        row.extend(vals.iter().map(|v| fmt_real(*v)));
        csv_row(out, &row)?;
    }
    Ok(())
}

fn cmd_stabilize(a: StabilizeArgs) -> CliResult<()> {
    let cfg = OneEuroConfig { f_min: a.fmin, beta_gain: a.beta_gain, default_dt: a.default_dt };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let raw = load_trajectory(&a.input)?;
    let smooth = stabilize_trajectory(&raw, &cfg)?;
    write_file(&a.out, write_trajectory_tum(&smooth).as_bytes())
}

fn cmd_refine(a: RefineArgs) -> CliResult<()> {
    let intrinsics = match (a.fx, a.fy, a.cx, a.cy) {
        (Some(fx), Some(fy), Some(cx), Some(cy)) => {
            Some(Intrinsics::new(fx, fy, cx, cy).map_err(|e| CliError::Usage(e.to_string()))?)
        }
        (None, None, None, None) => None,
        _ => return Err(CliError::Usage("--fx, --fy, --cx and --cy must be given together".into())),
    };
    let to_ply = a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply"));
    if to_ply && intrinsics.is_none() {
        return Err(CliError::Usage("PLY output needs --fx, --fy, --cx and --cy".into()));
    }
    let spatial = match a.spatial {
        Spatial::Pixel => SpatialMetric::Pixel,
        Spatial::Metric => SpatialMetric::Metric(
            intrinsics.ok_or_else(|| CliError::Usage("--spatial metric needs --fx, --fy, --cx and --cy".into()))?,
        ),
    };
    let cfg = BilateralConfig {
        window: a.window,
        sigma_s: a.sigma_s,
        sigma_r: match a.sigma_r {
            Some(s) => RangeSigma::Fixed(s),
            None => RangeSigma::Adaptive { factor: a.sigma_r_adaptive },
        },
        spatial,
        weighting: match a.weighting {
            Weighting::Neighbor => RangeWeighting::Neighbor,
            Weighting::Center => RangeWeighting::Center,
        },
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let map = read_pfm(&read_bytes(&a.input)?).map_err(format_err(&a.input))?;
    match intrinsics.filter(|_| to_ply) {
        Some(k) => write_file(&a.out, write_ply(&refine_cloud(&map, &k, &cfg)?).as_bytes()),
        None => write_file(&a.out, &write_pfm(&bilateral_depth(&map, &cfg)?)),
    }
}

fn cmd_eval_traj(a: EvalTrajArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let pred = load_trajectory(&a.pred)?;
    let gt = load_trajectory(&a.gt)?;
    if pred.len() != gt.len() {
        return Err(CliError::Usage(format!("pred has {} poses but gt has {}", pred.len(), gt.len())));
    }
    let prefixes = if a.prefix_frames.is_empty() { vec![pred.len()] } else { a.prefix_frames.clone() };
    csv_row(out, &["frames", "ate", "rpe_trans", "rpe_rot"].map(String::from))?;
    for k in prefixes {
        let used = if k > pred.len() {
            let _ = writeln!(
                err,
                "warning: --prefix-frames {k} exceeds trajectory length {}; using {}",
                pred.len(),
                pred.len()
            );
            pred.len()
        } else {
            k
        };
        let (p, g) = (pred.prefix(used), gt.prefix(used));
        let ate = metric_ate(&p, &g, a.align == Align::Sim3)?;
        let rpe = metric_rpe(&p, &g)?;
        csv_row(out, &[used.to_string(), fmt_real(ate), fmt_real(rpe.trans), fmt_real(rpe.rot)])?;
    }
    Ok(())
}

fn cmd_eval_depth(a: EvalDepthArgs, out: &mut dyn Write) -> CliResult<()> {
    let pred = read_pfm(&read_bytes(&a.pred)?).map_err(format_err(&a.pred))?;
    let gt = read_pfm(&read_bytes(&a.gt)?).map_err(format_err(&a.gt))?;
    let modes: &[(DepthEvalMode, &str)] = &[
        (DepthEvalMode::Original, "original"),
        (DepthEvalMode::Scale, "scale"),
        (DepthEvalMode::ScaleAndShift, "scale-and-shift"),
    ];
    csv_row(out, &["mode", "abs_rel", "delta_125"].map(String::from))?;
    for (mode, name) in modes {
        let wanted = match a.mode {
            DepthMode::All => true,
            DepthMode::Original => *mode == DepthEvalMode::Original,
            DepthMode::Scale => *mode == DepthEvalMode::Scale,
            DepthMode::ScaleAndShift => *mode == DepthEvalMode::ScaleAndShift,
        };
        if wanted {
            let m = metric_depth(&pred, &gt, *mode)?;
            csv_row(out, &[name.to_string(), fmt_real(m.abs_rel), fmt_real(m.delta_125)])?;
        }
    }
    Ok(())
}

fn cmd_eval_recon(a: EvalReconArgs, out: &mut dyn Write) -> CliResult<()> {
    let pred = read_ply(&read_bytes(&a.pred)?).map_err(format_err(&a.pred))?;
    let gt = read_ply(&read_bytes(&a.gt)?).map_err(format_err(&a.gt))?;
    let m = metric_recon(&pred, &gt, a.k_normals)?;
    csv_row(out, &["acc", "comp", "nc"].map(String::from))?;
    csv_row(out, &[fmt_real(m.acc), fmt_real(m.comp), fmt_real(m.nc)])
}

fn cmd_eval_loss(a: EvalLossArgs, out: &mut dyn Write) -> CliResult<()> {
    let w = LossWeights {
        w_a: a.w_a,
        w_r: a.w_r,
        w_s: a.w_s,
        lambda1: a.lambda1,
        lambda2: a.lambda2,
        lambda3: a.lambda3,
        alpha_conf: a.alpha_conf,
    };
    w.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let pred = load_trajectory(&a.pred)?;
    let gt = load_trajectory(&a.gt)?;
    let pose = pose_loss_terms(&pred, &gt, &w)?;
    let conf = match (&a.pred_cloud, &a.gt_cloud) {
        (Some(p), Some(g)) => {
            let pc = read_ply(&read_bytes(p)?).map_err(format_err(p))?;
            let gc = read_ply(&read_bytes(g)?).map_err(format_err(g))?;
            Some(loss_conf(&pc, &gc, w.alpha_conf)?)
        }
        _ => None,
    };
    let rgb = match (&a.pred_image, &a.gt_image) {
        (Some(p), Some(g)) => {
            let pi = read_pgm(&read_bytes(p)?).map_err(format_err(p))?;
            let gi = read_pgm(&read_bytes(g)?).map_err(format_err(g))?;
            Some(loss_rgb(&pi.to_raster(), &gi.to_raster())?)
        }
        _ => None,
    };
    let total = w.lambda1 * conf.unwrap_or(0.0) + w.lambda2 * rgb.unwrap_or(0.0) + w.lambda3 * pose.total;
    let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
    csv_row(out, &["ate", "rpe", "acc", "pose", "conf", "rgb", "total"].map(String::from))?;
    csv_row(
        out,
        &[
            fmt_real(pose.ate),
            fmt_real(pose.rpe),
            fmt_real(pose.acc),
            fmt_real(pose.total),
            opt(conf),
            opt(rgb),
            fmt_real(total),
        ],
    )
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.state_dim == 0 {
        return Err(CliError::Usage("--state-dim must be at least 1".into()));
    }
    let rows = simulate(a.frames, a.state_dim, a.seed, a.policy)?;
    csv_row(out, &["step", "beta", "recall_first", "recall_latest"].map(String::from))?;
    for r in rows {
        csv_row(out, &[r.step.to_string(), fmt_real(r.beta), fmt_real(r.recall_first), fmt_real(r.recall_latest)])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let argv = std::iter::once("steadystream").chain(args.iter().copied()).map(OsString::from).collect();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_lists_defaults() {
        let (code, help, _) = run_str(&["stabilize", "--help"]);
        assert_eq!(code, 0);
        for d in ["[default: 1]", "[default: 0.007]", "[default: 0.03333333333333333]"] {
            assert!(help.contains(d), "{help}");
        }
        let (_, help, _) = run_str(&["refine", "--help"]);
        for d in ["[default: 2]", "[default: 0.05]", "[default: pixel]", "[default: neighbor]"] {
            assert!(help.contains(d), "{help}");
        }
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["stabilize", "--in", "a", "--out", "b", "--fmin", "abc"]).0, 2);
        assert_eq!(run_str(&["nope"]).0, 2);
        assert_eq!(run_str(&["simulate", "--policy", "sometimes"]).0, 2);
    }

    #[test]
    fn prefix_list_parses_and_overrides() {
        let m = Cli::command()
            .mut_subcommands(|s| s.args_override_self(true))
            .try_get_matches_from([
                "x",
                "eval-traj",
                "--pred",
                "a",
                "--gt",
                "b",
                "--prefix-frames",
                "5,6",
                "--prefix-frames",
                "7,8,9",
            ])
            .unwrap();
        let Command::EvalTraj(a) = Cli::from_arg_matches(&m).unwrap().command else { panic!() };
        assert_eq!(a.prefix_frames, vec![7, 8, 9]);
    }

    #[test]
    fn simulate_is_deterministic() {
        let a = run_str(&["simulate", "--frames", "12", "--state-dim", "8", "--seed", "3"]);
        assert_eq!(a.0, 0);
        assert_eq!(a, run_str(&["simulate", "--frames", "12", "--state-dim", "8", "--seed", "3"]));
        assert_eq!(a.1.lines().count(), 13);
    }
}
