//! Monte Carlo harness: replicated simulate/estimate runs, the relative L1
//! error ξ_n, best and worst replication exports, and CI coverage studies.

use crate::error::{Error, Result};
use crate::estimator::{
    c_hat_global, cell_maxima, confidence_interval, estimate_pipeline, f_hat, EstimateResult,
    EstimateSettings,
};
use crate::geometry::Direction;
use crate::kernel::{weight_table, KernelSpec};
use crate::model::{FrontierFunction, ProcessModel};
use crate::partition::build_partition;
use crate::quad;
use crate::rng::derive_seed;
use crate::simulate::{sample_star_support, PointSample, SampleKind};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Redraws allowed per replication when a partition cell comes up empty.
pub const RETRY_BUDGET: u32 = 10;

/// Resolution schedule: either take k_n and m as configured, or derive both
/// from n via the `corollary5` preset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase")]
pub enum Schedule {
    Manual,
    Corollary5 { u: f64 },
}

/// Full configuration of a replication study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub replications: usize,
    pub n: u64,
    pub k_n: usize,
    /// Kernel order; the smoothing uses ℓ_n = 2m harmonics.
    pub m: u32,
    pub gamma: f64,
    pub grid_size: usize,
    pub seed: u64,
    pub frontier: String,
    pub kind: SampleKind,
    pub schedule: Schedule,
    /// Worker threads for the replication loop; 1 runs sequentially.
    pub jobs: usize,
    /// Intensity scale; `None` uses c = 1/∫₀^{2π} f.
    pub c: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            replications: 100,
            n: 100,
            k_n: 20,
            m: 7,
            gamma: 0.95,
            grid_size: 1024,
            seed: 0,
            frontier: "paper".into(),
            kind: SampleKind::P,
            schedule: Schedule::Manual,
            jobs: 1,
            c: None,
        }
    }
}

impl ExperimentConfig {
    /// Applies the schedule preset and returns the effective configuration.
    pub fn resolved(&self) -> ExperimentConfig {
        let mut cfg = self.clone();
        if let Schedule::Corollary5 { u } = self.schedule {
            cfg.m = corollary5_harmonics(self.n) / 2;
            cfg.k_n = corollary5_cells(self.n, u);
        }
        cfg
    }

    /// The intensity scale: the configured c, or 1/∫₀^{2π} f when absent.
    pub fn scale(&self, f: &FrontierFunction) -> Result<f64> {
        match self.c {
            Some(c) if c.is_finite() && c > 0.0 => Ok(c),
            Some(c) => Err(Error::InvalidIntensity(c)),
            None => {
                let total = quad::integrate(
                    |a| f.eval(&Direction::angle(a)),
                    0.0,
                    TAU,
                    1e-10,
                    quad::DEFAULT_BUDGET,
                )?;
                Ok(1.0 / total)
            }
        }
    }
}

/// `corollary5` schedule: ℓ_n is n^{10/27} rounded to the nearest even
/// integer (ties to the even half).
pub fn corollary5_harmonics(n: u64) -> u32 {
    let x = (n as f64).powf(10.0 / 27.0);
    2 * (x / 2.0).round_ties_even() as u32
}

/// `corollary5` schedule: k_n = round(n^{14/27} (ln n)^{2/7} u²), at least 1.
pub fn corollary5_cells(n: u64, u: f64) -> usize {
    let nf = n as f64;
    let k = (nf.powf(14.0 / 27.0) * nf.ln().max(0.0).powf(2.0 / 7.0) * u * u).round();
    k.max(1.0) as usize
}

/// v_n = n(ℓ_n k_n)^{−1/2}, the error normalization attached to the schedule.
pub fn schedule_v_n(n: u64, l_n: u32, k_n: usize) -> f64 {
    n as f64 / ((l_n.max(1) as f64) * k_n as f64).sqrt()
}

/// ξ_n: periodic-trapezoid approximation of ∫|f̂ − f| / ∫ f on a uniform grid.
///
/// With equal spacing and the periodic wrap every node has the same weight,
/// so the ratio reduces to a ratio of sums and the spacing cancels.
pub fn l1_relative_error(f_hat: &[f64], f: &FrontierFunction, grid: &[f64]) -> f64 {
    assert!(
        grid.len() >= 2 && f_hat.len() == grid.len(),
        "estimate and grid must align with at least 2 points"
    );
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, a) in f_hat.iter().zip(grid) {
        let t = f.eval(&Direction::angle(*a));
        num += (v - t).abs();
        den += t;
    }
    num / den
}

/// Outcome of one replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub xi_n: f64,
    pub retries: u32,
    /// Seed of the accepted draw, derivable from the master seed, the
    /// replication index and the retry count.
    pub seed: u64,
}

/// Aggregated study results with the resolved configuration echoed back.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<ReplicationRecord>,
    pub min_xi: f64,
    pub mean_xi: f64,
    pub max_xi: f64,
    pub best_rep: usize,
    pub worst_rep: usize,
    pub total_retries: u32,
    pub coverage: Option<f64>,
}

impl ExperimentReport {
    /// CSV summary with header `rep,xi_n,retries`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["rep", "xi_n", "retries"])?;
        for r in &self.records {
            w.write_record([r.rep.to_string(), r.xi_n.to_string(), r.retries.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// One fully materialized replication: sample, estimate and truth grid.
#[derive(Debug, Clone)]
pub struct ReplicationExport {
    pub rep: usize,
    pub xi_n: f64,
    pub retries: u32,
    pub sample: PointSample,
    pub estimate: EstimateResult,
    pub truth: Vec<f64>,
}

impl ReplicationExport {
    /// CSV export with header `x,f,f_hat,ci_lo,ci_hi`.
    pub fn write_grid_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "f", "f_hat", "ci_lo", "ci_hi"])?;
        let est = &self.estimate;
        for i in 0..est.grid.len() {
            let lo = (est.f_hat[i] - est.ci_half_width[i]).max(0.0);
            let hi = est.f_hat[i] + est.ci_half_width[i];
            w.write_record([
                est.grid[i].to_string(),
                self.truth[i].to_string(),
                est.f_hat[i].to_string(),
                lo.to_string(),
                hi.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Study report plus the best and worst replications by ξ_n.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub best: ReplicationExport,
    pub worst: ReplicationExport,
}

fn run_replication(
    rep: usize,
    cfg: &ExperimentConfig,
    f: &FrontierFunction,
    model: &ProcessModel,
    settings: &EstimateSettings,
) -> Result<(PointSample, EstimateResult, u32)> {
    for attempt in 0..=RETRY_BUDGET {
        let seed = derive_seed(cfg.seed, ((rep as u64) << 8) | attempt as u64);
        let sample = sample_star_support(f, cfg.n, model.c(), 2, cfg.kind, seed)?;
        match estimate_pipeline(&sample, model, settings) {
            Ok(est) => return Ok((sample, est, attempt)),
            Err(Error::EmptyCells { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetryBudget { rep, attempts: RETRY_BUDGET + 1 })
}

/// Runs `count` independent tasks on up to `jobs` threads, returning results
/// in index order. Errors surface deterministically: the lowest failing index
/// wins regardless of scheduling.
fn parallel_map<T, F>(count: usize, jobs: usize, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let jobs = jobs.max(1).min(count.max(1));
    if jobs == 1 {
        return (0..count).map(&task).collect();
    }
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<T>>> = Vec::with_capacity(count);
    slots.resize_with(count, || None);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|_| {
                scope.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= count {
                            break;
                        }
                        local.push((i, task(i)));
                    }
                    local
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("replication worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every index visited")).collect()
}

/// Runs the replication study: simulate, estimate, score ξ_n per replication,
/// aggregate, and materialize the best and worst replications.
///
/// Replications hitting empty cells are redrawn with a derived seed up to
/// [`RETRY_BUDGET`] times; the retry count is recorded per replication.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let cfg = config.resolved();
    if cfg.replications == 0 {
        return Err(Error::InvalidConfig("replications must be at least 1".into()));
    }
    let f = FrontierFunction::from_tag(&cfg.frontier)?;
    let c = cfg.scale(&f)?;
    let model = ProcessModel::polar(2, c)?;
    let settings = EstimateSettings {
        k_n: cfg.k_n,
        m: cfg.m,
        grid_size: cfg.grid_size,
        gamma: cfg.gamma,
    };
    let records = parallel_map(cfg.replications, cfg.jobs, |rep| {
        let (_, est, retries) = run_replication(rep, &cfg, &f, &model, &settings)?;
        let xi_n = l1_relative_error(&est.f_hat, &f, &est.grid);
        let seed = derive_seed(cfg.seed, ((rep as u64) << 8) | retries as u64);
        Ok(ReplicationRecord { rep, xi_n, retries, seed })
    })?;
    let mut best = 0usize;
    let mut worst = 0usize;
    let mut sum = 0.0;
    for r in &records {
        sum += r.xi_n;
        if r.xi_n < records[best].xi_n {
            best = r.rep;
        }
        if r.xi_n > records[worst].xi_n {
            worst = r.rep;
        }
    }
    let min_xi = records[best].xi_n;
    let max_xi = records[worst].xi_n;
    let mean_xi = sum / records.len() as f64;
    let total_retries = records.iter().map(|r| r.retries).sum();
    let report = ExperimentReport {
        config: cfg.clone(),
        records,
        min_xi,
        mean_xi,
        max_xi,
        best_rep: best,
        worst_rep: worst,
        total_retries,
        coverage: None,
    };
    // Extremes are recomputed rather than kept in memory: a replication is a
    // pure function of (config, rep), so this trades a little time for not
    // holding every sample of the study alive.
    let export = |rep: usize| -> Result<ReplicationExport> {
        let (sample, estimate, retries) = run_replication(rep, &cfg, &f, &model, &settings)?;
        let truth: Vec<f64> =
            estimate.grid.iter().map(|a| f.eval(&Direction::angle(*a))).collect();
        let xi_n = l1_relative_error(&estimate.f_hat, &f, &estimate.grid);
        Ok(ReplicationExport { rep, xi_n, retries, sample, estimate, truth })
    };
    let best_export = export(best)?;
    let worst_export = export(worst)?;
    Ok(ExperimentOutput { report, best: best_export, worst: worst_export })
}

/// Coverage at one query angle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveragePoint {
    pub x: f64,
    pub hits: usize,
    pub coverage: f64,
    /// Binomial standard error √(p(1−p)/m).
    pub std_error: f64,
}

/// Per-point CI coverage over a replication study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageStudy {
    pub gamma: f64,
    pub replications: usize,
    pub points: Vec<CoveragePoint>,
}

impl CoverageStudy {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Estimates the fraction of replications whose γ-level interval at each
/// query angle contains the true frontier value.
///
/// A replication whose estimate is clamped to 0 at a query angle has a
/// degenerate interval there and counts as a miss.
pub fn coverage_study(config: &ExperimentConfig, x_points: &[f64]) -> Result<CoverageStudy> {
    let cfg = config.resolved();
    if cfg.replications == 0 {
        return Err(Error::InvalidConfig("replications must be at least 1".into()));
    }
    if x_points.is_empty() {
        return Err(Error::InvalidConfig("coverage study needs at least one query angle".into()));
    }
    if !(cfg.gamma > 0.0 && cfg.gamma < 1.0) {
        return Err(Error::InvalidGamma(cfg.gamma));
    }
    let f = FrontierFunction::from_tag(&cfg.frontier)?;
    let c = cfg.scale(&f)?;
    let model = ProcessModel::polar(2, c)?;
    let partition = build_partition(cfg.k_n, 2)?;
    let spec = KernelSpec::new(cfg.m);
    let xs: Vec<Direction> = x_points.iter().map(|a| Direction::angle(*a)).collect();
    let tables = xs
        .iter()
        .map(|x| weight_table(&spec, &partition, x))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<f64> = xs.iter().map(|x| f.eval(x)).collect();
    let nu = partition.nu().to_vec();
    let hit_rows = parallel_map(cfg.replications, cfg.jobs, |rep| {
        for attempt in 0..=RETRY_BUDGET {
            let seed = derive_seed(cfg.seed, ((rep as u64) << 8) | attempt as u64);
            let sample = sample_star_support(&f, cfg.n, c, 2, cfg.kind, seed)?;
            let summary = cell_maxima(&sample, &partition, &model)?;
            if summary.empty_cells() > 0 {
                continue;
            }
            let c_hat = c_hat_global(&summary, cfg.n)?;
            let mut row = vec![false; xs.len()];
            for (j, x) in xs.iter().enumerate() {
                let est = f_hat(&summary, &tables[j], &nu, c_hat, cfg.n, &model, x)?;
                if est.value <= 0.0 {
                    continue;
                }
                let (lo, hi) = confidence_interval(
                    est.value,
                    x,
                    c_hat,
                    cfg.n,
                    &tables[j],
                    &model,
                    cfg.gamma,
                )?;
                row[j] = truth[j] >= lo && truth[j] <= hi;
            }
            return Ok(row);
        }
        Err(Error::RetryBudget { rep, attempts: RETRY_BUDGET + 1 })
    })?;
    let m = cfg.replications as f64;
    let points = x_points
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let hits = hit_rows.iter().filter(|row| row[j]).count();
            let p = hits as f64 / m;
            CoveragePoint { x, hits, coverage: p, std_error: (p * (1.0 - p) / m).sqrt() }
        })
        .collect();
    Ok(CoverageStudy { gamma: cfg.gamma, replications: cfg.replications, points })
}
