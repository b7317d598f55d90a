//! Timing of residual plus Jacobian evaluation in sparse (dependency map)
//! and dense (full gradient) modes, with CSV output and a least-squares
//! line fit.

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::time::Instant;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ad::DenseADScalar;
use crate::models::{evaluate, residual_and_jacobian, Microgrid, ResidualModel};
use crate::solvers::ImplicitEulerStep;
use crate::structure::{assemble_csr_dense, CsrMatrix, SparsityPattern, StructureError};

/// Largest system dimension benchmarked in dense mode.
pub const DENSE_DIM_CAP: usize = 20_000;

/// Step size whose `alpha = 1 / h` enters the benchmarked Jacobians.
pub const BENCH_STEP: f64 = 1e-5;

pub const CSV_HEADER: &str = "model,N,dim,mode,calls,total_eval_s,per_call_us";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no load counts given")]
    EmptySizes,
    #[error("dense mode is limited to dimension {cap}, N = {n} gives {dim}")]
    DenseCap { n: usize, dim: usize, cap: usize },
    #[error("calls and repetitions must be at least 1")]
    ZeroCount,
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sparse,
    Dense,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sparse => "sparse",
            Mode::Dense => "dense",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub model: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub dim: usize,
    pub mode: Mode,
    /// Evaluations per timed batch.
    pub calls: usize,
    /// Median batch time over the repetitions.
    pub total_eval_s: f64,
    pub per_call_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub reps: usize,
    pub calls: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            reps: 30,
            calls: 5,
            seed: 42,
        }
    }
}

impl BenchConfig {
    fn check(&self) -> Result<(), BenchError> {
        if self.reps == 0 || self.calls == 0 {
            return Err(BenchError::ZeroCount);
        }
        if self.reps == 1 {
            warn!("a single repetition gives noisy timings");
        }
        Ok(())
    }
}

/// State with entries uniform in `[-0.5, 0.5]`, reproducible from `seed`.
pub fn random_state(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.gen_range(-0.5..=0.5)).collect()
}

/// Implicit Euler step system of the microgrid at `t = 0.01` around a
/// seeded random state, plus that state.
pub struct MicrogridBench {
    grid: Microgrid,
    v_prev: Vec<f64>,
    x: Vec<f64>,
}

impl MicrogridBench {
    pub fn new(n_loads: usize, seed: u64) -> Self {
        let grid = Microgrid::new(n_loads);
        let dim = grid.layout.dim();
        Self {
            grid,
            v_prev: random_state(dim, seed),
            x: random_state(dim, seed.wrapping_add(1)),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn system(&self) -> ImplicitEulerStep<'_, Microgrid> {
        ImplicitEulerStep {
            model: &self.grid,
            v_prev: &self.v_prev,
            t: 0.01,
            alpha: 1.0 / BENCH_STEP,
        }
    }

    /// Residual and Jacobian by sparse AD.
    pub fn sparse_jacobian(&self) -> Result<CsrMatrix, StructureError> {
        residual_and_jacobian(&self.system(), &self.x)
    }

    /// Residual and Jacobian by dense-gradient AD, gathered into the
    /// sparse pattern.
    pub fn dense_jacobian(&self) -> Result<CsrMatrix, BenchError> {
        let sparse = self.sparse_jacobian()?;
        Ok(dense_eval(&self.system(), &self.x, &sparse.pattern()))
    }
}

fn dense_eval<M: ResidualModel>(model: &M, x: &[f64], pattern: &SparsityPattern) -> CsrMatrix {
    let n = x.len();
    let vars: Vec<DenseADScalar> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| DenseADScalar::variable(v, i, n))
        .collect();
    let f = evaluate(model, &vars);
    assemble_csr_dense(&f, pattern)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// One size and mode to be timed.
struct Job {
    n_loads: usize,
    mode: Mode,
    bench: MicrogridBench,
    /// Pattern the dense mode gathers its Jacobian into.
    pattern: Option<SparsityPattern>,
}

impl Job {
    fn new(n_loads: usize, mode: Mode, seed: u64) -> Result<Self, BenchError> {
        let dim = Microgrid::new(n_loads).layout.dim();
        if mode == Mode::Dense && dim > DENSE_DIM_CAP {
            return Err(BenchError::DenseCap {
                n: n_loads,
                dim,
                cap: DENSE_DIM_CAP,
            });
        }
        let bench = MicrogridBench::new(n_loads, seed);
        let pattern = match mode {
            Mode::Sparse => None,
            Mode::Dense => Some(bench.sparse_jacobian()?.pattern()),
        };
        Ok(Self {
            n_loads,
            mode,
            bench,
            pattern,
        })
    }

    fn batch(&self, calls: usize) -> f64 {
        let sys = self.bench.system();
        let x = &self.bench.x;
        let start = Instant::now();
        for _ in 0..calls {
            match &self.pattern {
                None => {
                    black_box(residual_and_jacobian(&sys, black_box(x)).expect("in-range pattern"));
                }
                Some(p) => {
                    black_box(dense_eval(&sys, black_box(x), p));
                }
            }
        }
        start.elapsed().as_secs_f64()
    }
}

/// Times all jobs: one warm-up batch each, then `reps` rounds in which
/// every job runs one batch, so slow phases of the machine hit all sizes
/// alike. Each record carries the median batch time.
fn run_jobs(jobs: &[Job], cfg: &BenchConfig) -> Vec<BenchRecord> {
    for job in jobs {
        job.batch(cfg.calls);
    }
    let mut times = vec![Vec::with_capacity(cfg.reps); jobs.len()];
    for _ in 0..cfg.reps {
        for (job, t) in jobs.iter().zip(&mut times) {
            t.push(job.batch(cfg.calls));
        }
    }
    jobs.iter()
        .zip(times)
        .map(|(job, t)| {
            let total = median(t);
            BenchRecord {
                model: "microgrid".into(),
                n: job.n_loads,
                dim: job.bench.dim(),
                mode: job.mode,
                calls: cfg.calls,
                total_eval_s: total,
                per_call_us: total * 1e6 / cfg.calls as f64,
            }
        })
        .collect()
}

/// Times one microgrid size in one mode.
pub fn bench_microgrid(n_loads: usize, mode: Mode, cfg: &BenchConfig) -> Result<BenchRecord, BenchError> {
    cfg.check()?;
    let job = Job::new(n_loads, mode, cfg.seed)?;
    Ok(run_jobs(&[job], cfg).remove(0))
}

/// Sparse-mode records for each load count, in the given order.
pub fn bench_scaling(sizes: &[usize], cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    if sizes.is_empty() {
        return Err(BenchError::EmptySizes);
    }
    cfg.check()?;
    let jobs = sizes
        .iter()
        .map(|&n| Job::new(n, Mode::Sparse, cfg.seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(run_jobs(&jobs, cfg))
}

/// Sparse then dense record for each load count. The dense cap is checked
/// for all sizes before any timing starts.
pub fn bench_dense(sizes: &[usize], cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    if sizes.is_empty() {
        return Err(BenchError::EmptySizes);
    }
    cfg.check()?;
    let mut jobs = Vec::with_capacity(2 * sizes.len());
    for &n in sizes {
        jobs.push(Job::new(n, Mode::Sparse, cfg.seed)?);
        jobs.push(Job::new(n, Mode::Dense, cfg.seed)?);
    }
    Ok(run_jobs(&jobs, cfg))
}

/// Dense over sparse per-call time for each `N` with both modes present.
pub fn dense_sparse_ratios(records: &[BenchRecord]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for d in records.iter().filter(|r| r.mode == Mode::Dense) {
        if let Some(s) = records.iter().find(|r| r.mode == Mode::Sparse && r.n == d.n) {
            out.push((d.n, d.per_call_us / s.per_call_us));
        }
    }
    out
}

pub fn write_csv<W: Write>(w: W, records: &[BenchRecord]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope x + intercept`. `None` with fewer
/// than two points or constant `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit { slope, intercept, r2 })
}

/// Fit of per-call time against dimension.
pub fn fit_records(records: &[BenchRecord]) -> Option<LinearFit> {
    let x: Vec<f64> = records.iter().map(|r| r.dim as f64).collect();
    let y: Vec<f64> = records.iter().map(|r| r.per_call_us).collect();
    linear_fit(&x, &y)
}

/// Gnuplot commands plotting `per_call_us` against `dim` from a CSV file
/// written by [`write_csv`], one series per mode.
pub fn gnuplot_script(csv_path: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead left top\n\
         set xlabel 'system dimension'\n\
         set ylabel 'time per call (us)'\n\
         plot '{csv_path}' using 3:(stringcolumn(4) eq 'sparse' ? $7 : 1/0) with linespoints title 'sparse', \\\n\
         \x20    '' using 3:(stringcolumn(4) eq 'dense' ? $7 : 1/0) with linespoints title 'dense'\n"
    )
}
