use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use log::info;
use thiserror::Error;

use sad_core::bench::{self, BenchConfig, BenchError, BenchRecord};
use sad_core::models::{
    lorenz_ad, parse_overrides, Decay, LorenzParams, LorenzRoles, LorenzSteadyState, Microgrid, MicrogridParams,
    ModelError, ModelKind, Phase, GOLDEN_PARAMS, GOLDEN_STATE,
};
use sad_core::solvers::{
    consistent_init, dae_integrate, newton_solve, DaeConfig, DaeError, ImplicitEulerStep, NewtonConfig,
    SolverError, Trajectory,
};
use sad_core::structure::{
    assemble_csr, CsrMatrix, MatlabPrint, MatrixMarketWrite, NumberFormat, StructureError,
};

use crate::{BenchArgs, CommonArgs, JacobianArgs, SimulateArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<StructureError> for CliError {
    fn from(e: StructureError) -> Self {
        match e {
            StructureError::Io(e) => CliError::Io(e),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Numerical(chain(&e))
    }
}

impl From<DaeError> for CliError {
    fn from(e: DaeError) -> Self {
        match e {
            DaeError::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::Numerical(chain(&other)),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::EmptySizes | BenchError::DenseCap { .. } | BenchError::ZeroCount => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

/// Error message with its source chain.
fn chain(e: &dyn std::error::Error) -> String {
    let mut s = e.to_string();
    let mut cur = e.source();
    while let Some(c) = cur {
        s.push_str(": ");
        s.push_str(&c.to_string());
        cur = c.source();
    }
    s
}

type Result<T> = std::result::Result<T, CliError>;

const DEFAULT_MICROGRID_H: f64 = 1e-5;
const DEFAULT_DECAY_H: f64 = 0.01;

enum Target {
    Stdout,
    Text(PathBuf),
    MatrixMarket(PathBuf),
}

fn target(out: &Option<String>) -> Target {
    match out.as_deref() {
        None => Target::Stdout,
        Some(s) => match s.strip_prefix("mm:") {
            Some(p) => Target::MatrixMarket(p.into()),
            None => Target::Text(s.into()),
        },
    }
}

fn overrides(path: &Option<PathBuf>) -> Result<Vec<(String, f64)>> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            parse_overrides(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
        }
    }
}

fn microgrid(args: &CommonArgs) -> Result<Microgrid> {
    let mut params = MicrogridParams::default();
    params
        .apply_overrides(&overrides(&args.config)?)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Microgrid::with_params(args.n, params))
}

fn lorenz_params(args: &CommonArgs, base: LorenzParams) -> Result<LorenzParams> {
    let mut p = base;
    p.apply_overrides(&overrides(&args.config)?)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(p)
}

fn step_size(args: &CommonArgs, default: f64) -> Result<f64> {
    let h = args.h.unwrap_or(default);
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(CliError::Usage(format!("step size must be positive, got {h}")))
    }
}

/// Residual and Jacobian of the selected model at its demonstration point.
fn evaluated_jacobian(args: &CommonArgs) -> Result<CsrMatrix> {
    let kind: ModelKind = args.model.parse()?;
    if args.swap_roles && kind != ModelKind::Lorenz {
        return Err(CliError::Usage("--swap-roles applies to the lorenz model only".into()));
    }
    match kind {
        ModelKind::Lorenz => {
            // the worked example point, with p ordered as (sigma, rho, beta)
            let base = LorenzParams {
                sigma: GOLDEN_PARAMS[0],
                rho: GOLDEN_PARAMS[1],
                beta: GOLDEN_PARAMS[2],
            };
            let p = lorenz_params(args, base)?;
            let roles = if args.swap_roles {
                LorenzRoles::Parameters
            } else {
                LorenzRoles::State
            };
            let f = lorenz_ad(roles, GOLDEN_STATE, p.as_array());
            Ok(assemble_csr(&f, 3)?)
        }
        ModelKind::Microgrid => {
            let grid = microgrid(args)?;
            dae_step_jacobian(&grid, args, DEFAULT_MICROGRID_H)
        }
        ModelKind::Decay => dae_step_jacobian(&Decay::default(), args, DEFAULT_DECAY_H),
    }
}

/// Jacobian of one implicit Euler step around seeded random states.
fn dae_step_jacobian<M: sad_core::models::DaeModel>(model: &M, args: &CommonArgs, default_h: f64) -> Result<CsrMatrix> {
    let h = step_size(args, default_h)?;
    let n = model.dim();
    let v_prev = bench::random_state(n, args.seed);
    let x = bench::random_state(n, args.seed.wrapping_add(1));
    let step = ImplicitEulerStep {
        model,
        v_prev: &v_prev,
        t: 0.01,
        alpha: 1.0 / h,
    };
    Ok(sad_core::models::residual_and_jacobian(&step, &x)?)
}

fn emit<T: MatlabPrint + MatrixMarketWrite>(m: &T, fmt: NumberFormat, out: &Option<String>) -> Result<()> {
    match target(out) {
        Target::Stdout => println!("{}", m.to_matlab_with(fmt)),
        Target::Text(p) => fs::write(&p, m.to_matlab_with(fmt) + "\n")?,
        Target::MatrixMarket(p) => {
            let mut w = BufWriter::new(File::create(&p)?);
            m.write_matrix_market(&mut w)?;
            w.flush()?;
            info!("wrote {}", p.display());
        }
    }
    Ok(())
}

pub fn pattern(args: &CommonArgs) -> Result<()> {
    let jac = evaluated_jacobian(args)?;
    let p = jac.pattern();
    info!("{}x{} pattern, {} structural nonzeros ({:.3}%)", p.n_rows(), p.n_cols(), p.nnz(), 100.0 * p.density());
    emit(&p, NumberFormat::Shortest, &args.out)
}

pub fn jacobian(args: &JacobianArgs) -> Result<()> {
    let jac = evaluated_jacobian(&args.common)?;
    let fmt = match args.digits {
        Some(0) => return Err(CliError::Usage("--digits must be at least 1".into())),
        Some(d) => NumberFormat::Significant(d),
        None => NumberFormat::Shortest,
    };
    emit(&jac, fmt, &args.common.out)
}

fn format_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

pub fn solve(args: &CommonArgs) -> Result<()> {
    let kind: ModelKind = args.model.parse()?;
    match kind {
        ModelKind::Lorenz => {
            let model = LorenzSteadyState {
                params: lorenz_params(args, LorenzParams::default())?,
            };
            let x0 = [5.0, 5.0, 20.0];
            let (x, stats) = newton_solve(&model, &x0, &NewtonConfig::default())?;
            println!("x = {}", format_vec(&x));
            println!("iterations {}, residual norm {:e}", stats.iterations, stats.residual_norm);
        }
        ModelKind::Microgrid => {
            let grid = microgrid(args)?;
            let v = consistent_init(&grid, &vec![0.0; grid.layout.dim()])?;
            println!("dimension {}", v.len());
            println!("bus voltage {:.6} V", grid.bus_voltage(&v));
            write_state(&args.out, &v)?;
        }
        ModelKind::Decay => {
            let v = consistent_init(&Decay::default(), &[1.0])?;
            println!("v = {}", format_vec(&v));
        }
    }
    Ok(())
}

fn write_state(out: &Option<String>, v: &[f64]) -> Result<()> {
    if let Some(path) = out {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "index,value")?;
        for (i, x) in v.iter().enumerate() {
            writeln!(w, "{i},{x}")?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let c = &args.common;
    let kind: ModelKind = c.model.parse()?;
    if !(args.t_end > 0.0 && args.t_end.is_finite()) {
        return Err(CliError::Usage(format!("t-end must be positive, got {}", args.t_end)));
    }
    let default_h = match kind {
        ModelKind::Lorenz => return Err(CliError::Usage("lorenz is not a DAE model; use `solve`".into())),
        ModelKind::Microgrid => DEFAULT_MICROGRID_H,
        ModelKind::Decay => DEFAULT_DECAY_H,
    };
    let cfg = DaeConfig {
        record_every: args.record_every,
        ..DaeConfig::new(step_size(c, default_h)?, args.t_end)
    };
    cfg.validate()?;

    let mut newton_total = 0usize;
    let count = |s: &sad_core::solvers::StepInfo<'_>| {
        newton_total += s.newton_iterations;
        Ok(())
    };
    let (header, rows, summary): (&str, Vec<String>, String) = match kind {
        ModelKind::Microgrid => {
            let grid = microgrid(c)?;
            if grid.layout.n_loads() == 0 {
                return Err(CliError::Usage("microgrid simulation needs at least one load".into()));
            }
            let v0 = consistent_init(&grid, &vec![0.0; grid.layout.dim()])?;
            let traj = dae_integrate(&grid, &v0, &cfg, count)?;
            let rows = signal_rows(&traj, |v| {
                vec![
                    grid.load_voltage(v, 0, Phase::A),
                    grid.load_voltage(v, 0, Phase::B),
                    grid.load_voltage(v, 0, Phase::C),
                    grid.bus_voltage(v),
                ]
            });
            let wave = traj.waveform(args.t_end / 2.0, |v| grid.load_voltage(v, 0, Phase::A));
            let summary = match wave {
                Some(w) => format!(
                    "load voltage amplitude {:.3} V, frequency {:.4} Hz; {} steps, {} Newton iterations",
                    w.amplitude,
                    w.frequency,
                    cfg.n_steps(),
                    newton_total
                ),
                None => format!(
                    "too few zero crossings to measure the load voltage; {} steps, {} Newton iterations",
                    cfg.n_steps(),
                    newton_total
                ),
            };
            ("t,v_la,v_lb,v_lc,v_bus", rows, summary)
        }
        ModelKind::Decay => {
            let traj = dae_integrate(&Decay::default(), &[1.0], &cfg, count)?;
            let rows = signal_rows(&traj, |v| v.to_vec());
            let (t, v) = traj.last().expect("initial state recorded");
            ("t,v", rows, format!("final t = {t}, v = {}", v[0]))
        }
        ModelKind::Lorenz => unreachable!(),
    };

    match &c.out {
        Some(path) => {
            write_rows(File::create(path)?, header, &rows)?;
            println!("{summary}");
        }
        None => {
            write_rows(io::stdout().lock(), header, &rows)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn signal_rows(traj: &Trajectory, signals: impl Fn(&[f64]) -> Vec<f64>) -> Vec<String> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, v)| {
            let mut row = t.to_string();
            for s in signals(v) {
                row.push(',');
                row.push_str(&s.to_string());
            }
            row
        })
        .collect()
}

fn write_rows<W: Write>(w: W, header: &str, rows: &[String]) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(())
}

fn bench_config(args: &BenchArgs) -> BenchConfig {
    BenchConfig {
        reps: args.reps,
        calls: args.calls,
        seed: args.seed,
    }
}

/// Writes the CSV and returns whether the report goes to stdout (CSV in a
/// file) or stderr (CSV on stdout).
fn write_records(args: &BenchArgs, records: &[BenchRecord]) -> Result<bool> {
    let to_file = match &args.out {
        Some(p) => {
            bench::write_csv(BufWriter::new(File::create(p)?), records)?;
            if let Some(g) = &args.gnuplot {
                fs::write(g, bench::gnuplot_script(&p.display().to_string()))?;
            }
            true
        }
        None => {
            bench::write_csv(io::stdout().lock(), records)?;
            if let Some(g) = &args.gnuplot {
                fs::write(g, bench::gnuplot_script("bench.csv"))?;
            }
            false
        }
    };
    Ok(to_file)
}

fn report(to_stdout: bool, line: &str) {
    if to_stdout {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub fn bench_scaling(args: &BenchArgs) -> Result<()> {
    let records = bench::bench_scaling(&args.sizes, &bench_config(args))?;
    let to_stdout = write_records(args, &records)?;
    if records.len() < 2 {
        report(to_stdout, "fit skipped: need at least two load counts");
    } else if let Some(fit) = bench::fit_records(&records) {
        report(
            to_stdout,
            &format!(
                "fit: per_call_us = {:.6} * dim + {:.3}, R^2 = {:.4}",
                fit.slope, fit.intercept, fit.r2
            ),
        );
    } else {
        report(to_stdout, "fit skipped: load counts must differ");
    }
    Ok(())
}

pub fn bench_dense(args: &BenchArgs) -> Result<()> {
    let records = bench::bench_dense(&args.sizes, &bench_config(args))?;
    let to_stdout = write_records(args, &records)?;
    for (n, ratio) in bench::dense_sparse_ratios(&records) {
        report(to_stdout, &format!("N = {n}: dense/sparse = {ratio:.2}"));
    }
    Ok(())
}
