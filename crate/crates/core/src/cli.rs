//! Command-line front end.
//!
//! Exit codes: 0 success, 1 unreadable/malformed image or failed write,
//! 2 unstable coefficients, 3 invalid flags or missing input.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::{kmeans_grayscale, split_components};
use crate::imageio::{
    export_heightmap_csv, export_labels_csv, export_mesh_obj, read_pgm, render_labels,
    render_sign_map, write_convergence_csv, write_merge_plan_csv, write_pgm,
};
use crate::merging::merge_to_count;
use crate::segmentation::{cluster_regions, region_stats, sign_map, DEFAULT_ZERO_TOLERANCE};
use crate::testgen::{TestPattern, Variant};
use crate::{simulate, Error, Grid, SimParams};

/// Caps the worker count of the relaxation stepper. Results do not depend on it.
pub const THREADS_ENV: &str = "ELASTICMESH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "elasticmesh", version, about = "Elastic mesh image segmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relax the mesh over a PGM image, cluster by height sign and optionally merge.
    Segment(SegmentArgs),
    /// Write one of the synthetic test images as PGM.
    GenTest(GenTestArgs),
    /// Cluster pixel intensities with k-means.
    Kmeans(KmeansArgs),
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Input PGM (P2 or P5, maxval 255); `-` reads stdin.
    pub input: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub k1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub k2: f64,
    #[arg(long, default_value_t = 0.1)]
    pub k3: f64,
    /// Stop once the mean |dz| of an iteration drops below this.
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    #[arg(long = "max-iter", default_value_t = 10_000)]
    pub max_iter: usize,
    /// Iterations at which to save sign maps.
    #[arg(long, value_delimiter = ',', default_values_t = vec![5, 10, 20, 40, 80])]
    pub snapshots: Vec<usize>,
    /// Merge regions down to this many.
    #[arg(long = "merge-to")]
    pub merge_to: Option<usize>,
    #[arg(long = "zero-tol", default_value_t = DEFAULT_ZERO_TOLERANCE)]
    pub zero_tol: f64,
    /// Run even when k3*k2 is outside the stable range.
    #[arg(long = "allow-unstable")]
    pub allow_unstable: bool,
    /// Vertical exaggeration applied to mesh.obj.
    #[arg(long = "z-scale", default_value_t = 1.0)]
    pub z_scale: f64,
}

#[derive(Debug, Args)]
pub struct GenTestArgs {
    /// halves, rect or shapes.
    pub variant: String,
    /// Image size as WxH.
    #[arg(long, default_value = "64x64", value_parser = parse_size)]
    pub size: (usize, usize),
    /// Comma-separated grey levels: halves `left,right`; rect `rect,background`;
    /// shapes `background,circle,triangle,rectangle`.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write plain P2 instead of raw P5.
    #[arg(long)]
    pub ascii: bool,
}

#[derive(Debug, Args)]
pub struct KmeansArgs {
    /// Input PGM; `-` reads stdin.
    pub input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long = "max-iter", default_value_t = 100)]
    pub max_iter: usize,
    /// Random initialization seed; quantile initialization when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(w)?, parse(h)?))
}

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Unstable(String),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 1,
            CliError::Unstable(_) => 2,
            CliError::Usage(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Unstable(m) | CliError::Usage(m) | CliError::Io(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Parse { .. } => CliError::Parse(msg),
            Error::StabilityBound { .. } | Error::Unstable { .. } | Error::NumericOverflow { .. } => {
                CliError::Unstable(msg)
            }
            Error::Encode(_) | Error::DimensionMismatch { .. } | Error::OutOfBounds { .. } => CliError::Io(msg),
            Error::InvalidGrid(_)
            | Error::InvalidParams(_)
            | Error::InvalidTarget { .. }
            | Error::InvalidPattern(_)
            | Error::InvalidClusterCount { .. } => CliError::Usage(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read_input(path: &Path) -> CliResult<Grid> {
    let bytes = if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        buf
    } else {
        fs::read(path).map_err(|e| CliError::Usage(format!("cannot read input {}: {e}", path.display())))?
    };
    Ok(read_pgm(&bytes)?)
}

fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| io_err(&path, e))
}

fn thread_pool(threads: Option<&str>) -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(raw) = threads {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker threads: {e}")))
}

fn segment(args: &SegmentArgs, threads: Option<&str>) -> CliResult<String> {
    let params = if args.allow_unstable {
        SimParams::new_unguarded(args.k1, args.k2, args.k3, args.eps, args.max_iter)?
    } else {
        SimParams::new(args.k1, args.k2, args.k3, args.eps, args.max_iter)?
    };
    if args.zero_tol.is_nan() || args.zero_tol < 0.0 {
        return Err(CliError::Usage(format!("--zero-tol must be >= 0, got {}", args.zero_tol)));
    }
    if args.merge_to == Some(0) {
        return Err(CliError::Usage("--merge-to must be at least 1".into()));
    }
    if args.snapshots.contains(&0) {
        return Err(CliError::Usage("snapshot iterations start at 1".into()));
    }
    if !(args.z_scale.is_finite() && args.z_scale > 0.0) {
        return Err(CliError::Usage(format!("--z-scale must be positive, got {}", args.z_scale)));
    }
    let pool = thread_pool(threads)?;
    let grid = read_input(&args.input)?;

    let sim = pool.install(|| simulate(&grid, &params, &args.snapshots))?;
    let signs = sign_map(&sim.heights, args.zero_tol)?;
    let labels = cluster_regions(&signs);
    let table = region_stats(&labels, &grid, &signs)?;
    let merged = args
        .merge_to
        .map(|target| merge_to_count(&labels, &grid, target))
        .transpose()?;

    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut config = String::new();
    let _ = writeln!(config, "command=segment");
    let _ = writeln!(config, "input={}", args.input.display());
    let _ = writeln!(config, "k1={:?}\nk2={:?}\nk3={:?}", params.k1(), params.k2(), params.k3());
    let _ = writeln!(config, "eps={:?}\nmax_iter={}", params.epsilon(), params.max_iterations());
    let snaps: Vec<String> = args.snapshots.iter().map(usize::to_string).collect();
    let _ = writeln!(config, "snapshots={}", snaps.join(","));
    let _ = writeln!(
        config,
        "merge_to={}",
        args.merge_to.map_or_else(|| "none".to_string(), |m| m.to_string())
    );
    let _ = writeln!(config, "zero_tol={:?}\nallow_unstable={}\nz_scale={:?}", args.zero_tol, args.allow_unstable, args.z_scale);
    write_artifact(out, "config.txt", config.as_bytes())?;

    write_artifact(out, "sign.pgm", &write_pgm(&render_sign_map(&signs), true)?)?;
    write_artifact(out, "labels.csv", &export_labels_csv(&labels))?;
    write_artifact(out, "labels_render.pgm", &write_pgm(&render_labels(&labels), true)?)?;
    write_artifact(out, "heights.csv", &export_heightmap_csv(&sim.heights))?;
    if grid.width() >= 2 && grid.height() >= 2 {
        write_artifact(out, "mesh.obj", &export_mesh_obj(&sim.heights, args.z_scale)?)?;
    }
    write_artifact(out, "convergence.csv", &write_convergence_csv(&sim.trace))?;
    for (iteration, heights) in &sim.snapshots {
        let snap = sign_map(heights, args.zero_tol)?;
        write_artifact(
            out,
            &format!("sign_iter{iteration}.pgm"),
            &write_pgm(&render_sign_map(&snap), true)?,
        )?;
    }
    if let Some((merged_labels, plan)) = &merged {
        write_artifact(out, "merged_render.pgm", &write_pgm(&render_labels(merged_labels), true)?)?;
        write_artifact(out, "merge_plan.csv", &write_merge_plan_csv(plan))?;
    }

    let count_sign = |s: i8| table.regions.iter().filter(|r| r.sign == s).count();
    let mut summary = String::new();
    let _ = writeln!(summary, "width={}\nheight={}", grid.width(), grid.height());
    let _ = writeln!(summary, "iterations={}\nconverged={}", sim.iterations_run, sim.converged);
    let _ = writeln!(summary, "final_avg_abs_dz={:?}", sim.trace.last().unwrap_or(0.0));
    let _ = writeln!(summary, "regions={}", labels.region_count());
    let _ = writeln!(
        summary,
        "regions_positive={}\nregions_negative={}\nregions_zero={}",
        count_sign(1),
        count_sign(-1),
        count_sign(0)
    );
    if let Some((merged_labels, _)) = &merged {
        let _ = writeln!(summary, "merged_regions={}", merged_labels.region_count());
    }
    write_artifact(out, "summary.txt", summary.as_bytes())?;
    Ok(summary)
}

fn gen_test(args: &GenTestArgs, stdout: &mut dyn Write) -> CliResult<String> {
    let mut variant = Variant::by_name(&args.variant)?;
    if let Some(levels) = &args.levels {
        variant = variant.with_levels(levels)?;
    }
    let (w, h) = args.size;
    let grid = TestPattern::new(variant, w, h)?.render()?;
    let bytes = write_pgm(&grid, !args.ascii)?;
    match &args.out {
        Some(path) => {
            fs::write(path, &bytes).map_err(|e| io_err(path, e))?;
            Ok(format!("variant={}\nwidth={w}\nheight={h}\npath={}\n", variant.name(), path.display()))
        }
        None => {
            stdout
                .write_all(&bytes)
                .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
            Ok(String::new())
        }
    }
}

fn kmeans(args: &KmeansArgs) -> CliResult<String> {
    let grid = read_input(&args.input)?;
    let r = kmeans_grayscale(&grid, args.k as usize, args.max_iter, args.seed)?;
    let components = split_components(&r.assignment);

    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    write_artifact(out, "kmeans_labels.csv", &export_labels_csv(&r.assignment))?;
    write_artifact(out, "kmeans_render.pgm", &write_pgm(&render_labels(&r.assignment), true)?)?;
    write_artifact(
        out,
        "kmeans_components_render.pgm",
        &write_pgm(&render_labels(&components), true)?,
    )?;

    let centroids: Vec<String> = r.centroids.iter().map(|c| format!("{c:?}")).collect();
    let mut summary = String::new();
    let _ = writeln!(summary, "k={}\nclasses={}", r.k, r.centroids.len());
    let _ = writeln!(summary, "centroids={}", centroids.join(";"));
    let _ = writeln!(summary, "iterations={}\nconverged={}", r.iterations, r.converged);
    let _ = writeln!(summary, "inertia={:?}", r.inertia());
    let _ = writeln!(summary, "components={}", components.region_count());
    write_artifact(out, "summary.txt", summary.as_bytes())?;
    Ok(summary)
}

/// Runs one command. `threads` is the raw value of [`THREADS_ENV`].
pub fn execute(cli: &Cli, threads: Option<&str>, stdout: &mut dyn Write) -> CliResult<()> {
    let summary = match &cli.command {
        Command::Segment(a) => segment(a, threads)?,
        Command::GenTest(a) => gen_test(a, stdout)?,
        Command::Kmeans(a) => kmeans(a)?,
    };
    stdout
        .write_all(summary.as_bytes())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I, threads: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
            } else {
                let _ = stderr.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(&cli, threads, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(stderr, "\nFor more information, try '--help'.");
            }
            e.exit_code()
        }
    }
}
