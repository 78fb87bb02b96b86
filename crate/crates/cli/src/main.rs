//! `frontier`: simulate, estimate, experiment and diagnose subcommands over
//! the estimation library, with file-based inputs and outputs.
//!
//! Exit codes: 0 success, 1 runtime or statistical failure, 2 usage error.

use clap::{Parser, Subcommand, ValueEnum};
use frontier_core::diagnostics::diagnostics_report;
use frontier_core::error::Error;
use frontier_core::experiment::{run_experiment, ExperimentConfig, Schedule};
use frontier_core::kernel::KernelSpec;
use frontier_core::model::{FrontierFunction, ProcessModel};
use frontier_core::partition::build_partition;
use frontier_core::quad;
use frontier_core::simulate::{read_sample, sample_star_support, write_sample, SampleKind};
use frontier_core::{estimate_pipeline, Direction, EstimateSettings};
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "frontier", version, about = "Support frontier estimation for star-shaped sets")]
struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: $FRONTIER_OUT_DIR, else the working directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Stdout summary format; file artifacts are always written in both formats.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// n=100, k_n=20, m=7, gamma=0.95, 100 replications, frontier `paper`.
    #[value(name = "paper-2007")]
    Paper2007,
    /// Derive k_n and m from n (overrides --k-n and --m).
    #[value(name = "corollary5")]
    Corollary5,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a point-process sample; writes sample.csv and sample.json.
    Simulate {
        /// Frontier tag: `paper`, `constant:<v>` or `fourier:<a0,a1,...>`.
        #[arg(long, default_value = "paper")]
        frontier: String,
        /// Intensity index of the mean measure.
        #[arg(long, default_value_t = 100)]
        n: u64,
        /// P draws a Poisson count, E uses exactly n points.
        #[arg(long, default_value = "P")]
        kind: String,
        /// Ambient dimension (2 or 3).
        #[arg(long, default_value_t = 2)]
        d: u32,
        /// Intensity scale; default is 1 over the frontier's angular integral.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Estimate the frontier from a sample; writes estimate.csv and estimate.json.
    Estimate {
        /// Sample CSV path.
        #[arg(long)]
        sample: PathBuf,
        /// Sidecar path; defaults to the sample path with a .json extension.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// Number of equal-measure partition cells.
        #[arg(long, default_value_t = 20)]
        k_n: usize,
        /// Kernel order (2m harmonics).
        #[arg(long, default_value_t = 7)]
        m: u32,
        /// Confidence level of the pointwise intervals.
        #[arg(long, default_value_t = 0.95)]
        gamma: f64,
        /// Number of uniform query angles.
        #[arg(long, default_value_t = 1024)]
        grid: usize,
    },
    /// Replication study; writes report.csv/json and best/worst exports.
    Experiment {
        /// Key-value file (`key = value` lines); explicit flags win.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of replications.
        #[arg(long)]
        reps: Option<usize>,
        /// Intensity index of the mean measure.
        #[arg(long)]
        n: Option<u64>,
        /// Number of equal-measure partition cells.
        #[arg(long)]
        k_n: Option<usize>,
        /// Kernel order (2m harmonics).
        #[arg(long)]
        m: Option<u32>,
        /// Confidence level of the pointwise intervals.
        #[arg(long)]
        gamma: Option<f64>,
        /// Number of uniform query angles.
        #[arg(long)]
        grid: Option<usize>,
        /// Frontier tag: `paper`, `constant:<v>` or `fourier:<a0,a1,...>`.
        #[arg(long)]
        frontier: Option<String>,
        /// P draws a Poisson count, E uses exactly n points.
        #[arg(long)]
        kind: Option<String>,
        /// Intensity scale; default is 1 over the frontier's angular integral.
        #[arg(long)]
        c: Option<f64>,
        /// Worker threads for the replication loop.
        #[arg(long)]
        jobs: Option<usize>,
        /// Named configuration preset.
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Scale constant u of the corollary5 schedule.
        #[arg(long)]
        u: Option<f64>,
    },
    /// Finite-n hypothesis diagnostics; writes diagnostics.json.
    Diagnose {
        /// Frontier tag: `paper`, `constant:<v>` or `fourier:<a0,a1,...>`.
        #[arg(long, default_value = "paper")]
        frontier: String,
        /// Intensity index the conditions are evaluated at.
        #[arg(long, default_value_t = 100)]
        n: u64,
        /// Number of equal-measure partition cells.
        #[arg(long, default_value_t = 20)]
        k_n: usize,
        /// Kernel order (2m harmonics).
        #[arg(long, default_value_t = 7)]
        m: u32,
        /// Comma-separated query angles in [0, 2π).
        #[arg(long, default_value = "0,1.5707963267948966")]
        x: String,
        /// Grid intervals per cell for oscillation suprema.
        #[arg(long, default_value_t = 64)]
        points_per_cell: usize,
        /// Intensity scale; default is 1 over the frontier's angular integral.
        #[arg(long)]
        c: Option<f64>,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }
}

fn classify(e: &Error) -> u8 {
    match e {
        Error::InvalidDimension(_)
        | Error::UnsupportedDimension(_)
        | Error::UnknownFrontier(_)
        | Error::InvalidPartition(_)
        | Error::InvalidGamma(_)
        | Error::InvalidIntensity(_)
        | Error::InvalidConfig(_) => 2,
        _ => 1,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: classify(&e), msg: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("FRONTIER_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure { code: 1, msg: format!("cannot create output directory: {e}") })?;
    let format = cli.format.unwrap_or(Format::Csv);
    match cli.command {
        Command::Simulate { frontier, n, kind, d, c } => {
            cmd_simulate(&out_dir, format, cli.seed.unwrap_or(0), &frontier, n, &kind, d, c)
        }
        Command::Estimate { sample, sidecar, k_n, m, gamma, grid } => {
            cmd_estimate(&out_dir, format, sample, sidecar, k_n, m, gamma, grid)
        }
        Command::Experiment {
            config,
            reps,
            n,
            k_n,
            m,
            gamma,
            grid,
            frontier,
            kind,
            c,
            jobs,
            preset,
            u,
        } => {
            let flags = ExperimentFlags {
                seed: cli.seed,
                config,
                reps,
                n,
                k_n,
                m,
                gamma,
                grid,
                frontier,
                kind,
                c,
                jobs,
                preset,
                u,
            };
            cmd_experiment(&out_dir, format, flags)
        }
        Command::Diagnose { frontier, n, k_n, m, x, points_per_cell, c } => {
            cmd_diagnose(&out_dir, format, &frontier, n, k_n, m, &x, points_per_cell, c)
        }
    }
}

/// 1/∫ f over the angle domain with the flat measure; the d = 2 case is the
/// usual 1/∫₀^{2π} f(x) dx convention.
fn default_scale(f: &FrontierFunction, d: u32) -> Result<f64, Failure> {
    let total = match d {
        2 => quad::integrate(
            |a| f.eval(&Direction::angle(a)),
            0.0,
            TAU,
            1e-10,
            quad::DEFAULT_BUDGET,
        )?,
        3 => quad::integrate(
            |x1| {
                let x1c = x1.clamp(0.0, PI - 1e-12);
                quad::integrate(
                    |az| f.eval(&Direction::new(vec![x1c, az.min(TAU - 1e-12)]).unwrap()),
                    0.0,
                    TAU,
                    1e-9,
                    quad::DEFAULT_BUDGET,
                )
                .unwrap_or(f64::NAN)
            },
            0.0,
            PI,
            1e-9,
            64 * quad::DEFAULT_BUDGET,
        )?,
        other => return Err(Error::UnsupportedDimension(other).into()),
    };
    if !(total.is_finite() && total > 0.0) {
        return Err(Failure { code: 1, msg: "frontier integral is not positive".into() });
    }
    Ok(1.0 / total)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    out: &Path,
    format: Format,
    seed: u64,
    frontier: &str,
    n: u64,
    kind: &str,
    d: u32,
    c: Option<f64>,
) -> Result<(), Failure> {
    let f = FrontierFunction::from_tag(frontier)?;
    let kind: SampleKind = kind.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
    if !(d == 2 || d == 3) {
        return Err(Error::UnsupportedDimension(d).into());
    }
    let c = match c {
        Some(v) if v.is_finite() && v > 0.0 => v,
        Some(v) => return Err(Error::InvalidIntensity(v).into()),
        None => default_scale(&f, d)?,
    };
    println!(
        "config: command=simulate frontier={frontier} n={n} kind={kind:?} d={d} c={c} seed={seed} \
         out_dir={} format={}",
        out.display(),
        format.name()
    );
    let sample = sample_star_support(&f, n, c, d, kind, seed)?;
    let csv = out.join("sample.csv");
    let json = out.join("sample.json");
    write_sample(&sample, &csv, &json)?;
    match format {
        Format::Csv => println!(
            "points={} csv={} sidecar={}",
            sample.points.len(),
            csv.display(),
            json.display()
        ),
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "points": sample.points.len(),
                "csv": csv,
                "sidecar": json,
            })
        ),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    out: &Path,
    format: Format,
    sample_path: PathBuf,
    sidecar: Option<PathBuf>,
    k_n: usize,
    m: u32,
    gamma: f64,
    grid: usize,
) -> Result<(), Failure> {
    let sidecar = sidecar.unwrap_or_else(|| sample_path.with_extension("json"));
    let sample = read_sample(&sample_path, &sidecar)
        .map_err(|e| Failure::usage(format!("cannot read sample: {e}")))?;
    let d = sample.points.first().map(|(x, _)| x.dimension()).unwrap_or(2);
    let model = ProcessModel::polar(d, sample.c)?;
    let settings = EstimateSettings { k_n, m, grid_size: grid, gamma };
    println!(
        "config: command=estimate sample={} sidecar={} n={} kind={:?} k_n={k_n} m={m} \
         gamma={gamma} grid={grid} out_dir={} format={}",
        sample_path.display(),
        sidecar.display(),
        sample.n,
        sample.kind,
        out.display(),
        format.name()
    );
    let est = estimate_pipeline(&sample, &model, &settings)?;
    let csv = out.join("estimate.csv");
    let json = out.join("estimate.json");
    est.write_csv(&csv)?;
    est.write_json(&json)?;
    match format {
        Format::Csv => println!(
            "c_hat={} mean_ci_width={} clamped={} csv={} json={}",
            est.c_hat,
            est.mean_ci_width(),
            est.clamped.iter().filter(|&&b| b).count(),
            csv.display(),
            json.display()
        ),
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "c_hat": est.c_hat,
                "mean_ci_width": est.mean_ci_width(),
                "clamped": est.clamped.iter().filter(|&&b| b).count(),
                "csv": csv,
                "json": json,
            })
        ),
    }
    Ok(())
}

struct ExperimentFlags {
    seed: Option<u64>,
    config: Option<PathBuf>,
    reps: Option<usize>,
    n: Option<u64>,
    k_n: Option<usize>,
    m: Option<u32>,
    gamma: Option<f64>,
    grid: Option<usize>,
    frontier: Option<String>,
    kind: Option<String>,
    c: Option<f64>,
    jobs: Option<usize>,
    preset: Option<Preset>,
    u: Option<f64>,
}

fn parse_config_file(path: &Path) -> Result<HashMap<String, String>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config file: {e}")))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("config line {}: expected key=value", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn cfg_get<T: std::str::FromStr>(
    map: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(s) => s
            .parse::<T>()
            .map(Some)
            .map_err(|e| Failure::usage(format!("config key `{key}`: {e}"))),
    }
}

fn parse_preset(s: &str) -> Result<Preset, Failure> {
    match s {
        "paper-2007" => Ok(Preset::Paper2007),
        "corollary5" => Ok(Preset::Corollary5),
        _ => Err(Failure::usage(format!("unknown preset `{s}`"))),
    }
}

fn cmd_experiment(out: &Path, format: Format, flags: ExperimentFlags) -> Result<(), Failure> {
    let file = match &flags.config {
        Some(p) => parse_config_file(p)?,
        None => HashMap::new(),
    };
    let known = [
        "reps", "n", "k_n", "m", "gamma", "grid", "seed", "frontier", "kind", "c", "jobs",
        "preset", "u",
    ];
    for key in file.keys() {
        if !known.contains(&key.as_str()) {
            return Err(Failure::usage(format!("unknown config key `{key}`")));
        }
    }
    let preset = match flags.preset {
        Some(p) => Some(p),
        None => match file.get("preset") {
            Some(s) => Some(parse_preset(s)?),
            None => None,
        },
    };
    let u = flags.u.or(cfg_get::<f64>(&file, "u")?).unwrap_or(1.0);
    let mut cfg = ExperimentConfig::default();
    cfg.replications = flags.reps.or(cfg_get(&file, "reps")?).unwrap_or(cfg.replications);
    cfg.n = flags.n.or(cfg_get(&file, "n")?).unwrap_or(cfg.n);
    cfg.k_n = flags.k_n.or(cfg_get(&file, "k_n")?).unwrap_or(cfg.k_n);
    cfg.m = flags.m.or(cfg_get(&file, "m")?).unwrap_or(cfg.m);
    cfg.gamma = flags.gamma.or(cfg_get(&file, "gamma")?).unwrap_or(cfg.gamma);
    cfg.grid_size = flags.grid.or(cfg_get(&file, "grid")?).unwrap_or(cfg.grid_size);
    cfg.seed = flags.seed.or(cfg_get(&file, "seed")?).unwrap_or(0);
    cfg.frontier = flags.frontier.or_else(|| file.get("frontier").cloned()).unwrap_or(cfg.frontier);
    cfg.jobs = flags.jobs.or(cfg_get(&file, "jobs")?).unwrap_or(cfg.jobs);
    cfg.c = match flags.c {
        Some(v) => Some(v),
        None => cfg_get::<f64>(&file, "c")?,
    };
    let kind_str = flags.kind.or_else(|| file.get("kind").cloned());
    if let Some(s) = kind_str {
        cfg.kind = s.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
    }
    cfg.schedule = match preset {
        Some(Preset::Corollary5) => Schedule::Corollary5 { u },
        _ => Schedule::Manual,
    };
    let eff = cfg.resolved();
    println!(
        "config: command=experiment reps={} n={} k_n={} m={} gamma={} grid={} seed={} \
         frontier={} kind={:?} schedule={:?} jobs={} c={} out_dir={} format={}",
        eff.replications,
        eff.n,
        eff.k_n,
        eff.m,
        eff.gamma,
        eff.grid_size,
        eff.seed,
        eff.frontier,
        eff.kind,
        eff.schedule,
        eff.jobs,
        eff.c.map(|v| v.to_string()).unwrap_or_else(|| "auto".into()),
        out.display(),
        format.name()
    );
    let output = run_experiment(&cfg)?;
    let report_csv = out.join("report.csv");
    let report_json = out.join("report.json");
    output.report.write_csv(&report_csv)?;
    output.report.write_json(&report_json)?;
    let best_csv = out.join("best.csv");
    let worst_csv = out.join("worst.csv");
    output.best.write_grid_csv(&best_csv)?;
    output.worst.write_grid_csv(&worst_csv)?;
    write_sample(
        &output.best.sample,
        &out.join("best_sample.csv"),
        &out.join("best_sample.json"),
    )?;
    write_sample(
        &output.worst.sample,
        &out.join("worst_sample.csv"),
        &out.join("worst_sample.json"),
    )?;
    let r = &output.report;
    match format {
        Format::Csv => println!(
            "xi_n min={} mean={} max={} best_rep={} worst_rep={} retries={} report={}",
            r.min_xi,
            r.mean_xi,
            r.max_xi,
            r.best_rep,
            r.worst_rep,
            r.total_retries,
            report_csv.display()
        ),
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "min_xi": r.min_xi,
                "mean_xi": r.mean_xi,
                "max_xi": r.max_xi,
                "best_rep": r.best_rep,
                "worst_rep": r.worst_rep,
                "total_retries": r.total_retries,
                "report": report_json,
            })
        ),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_diagnose(
    out: &Path,
    format: Format,
    frontier: &str,
    n: u64,
    k_n: usize,
    m: u32,
    x: &str,
    points_per_cell: usize,
    c: Option<f64>,
) -> Result<(), Failure> {
    let f = FrontierFunction::from_tag(frontier)?;
    let c = match c {
        Some(v) if v.is_finite() && v > 0.0 => v,
        Some(v) => return Err(Error::InvalidIntensity(v).into()),
        None => default_scale(&f, 2)?,
    };
    let model = ProcessModel::polar(2, c)?;
    let partition = build_partition(k_n, 2)?;
    let spec = KernelSpec::new(m);
    let xs = x
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| Failure::usage(format!("bad query angle: {e}")))?;
    println!(
        "config: command=diagnose frontier={frontier} n={n} k_n={k_n} m={m} x={x} \
         points_per_cell={points_per_cell} c={c} out_dir={} format={}",
        out.display(),
        format.name()
    );
    let report = diagnostics_report(&spec, &partition, &f, &model, n, &xs, points_per_cell)?;
    let path = out.join("diagnostics.json");
    std::fs::write(&path, report.to_json()?).map_err(Error::from)?;
    match format {
        Format::Csv => {
            println!("{:<6} {:>14} {:>10} flag", "cond", "value", "threshold");
            for c in &report.conditions {
                let flag = match c.flag {
                    Some(true) => "ok",
                    Some(false) => "high",
                    None => "-",
                };
                let thr =
                    c.threshold.map(|t| format!("{t}")).unwrap_or_else(|| "-".into());
                println!("{:<6} {:>14.6e} {:>10} {}", c.name, c.value, thr, flag);
            }
            println!(
                "delta_n={} omega_n={} file={}",
                report.delta_n,
                report.omega_n,
                path.display()
            );
        }
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "conditions": report.conditions,
                "delta_n": report.delta_n,
                "omega_n": report.omega_n,
                "file": path,
            })
        ),
    }
    Ok(())
}
