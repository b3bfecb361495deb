//! Run orchestration and CSV emission.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use entanglement_core::dynamics::Stepper;
use entanglement_core::exec::map_ordered;
use entanglement_core::oracle::{
    build_liouvillian, choi_min_eigenvalue, evolve_exact, wootters_concurrence, DensityMatrix4,
};
use entanglement_core::{
    compute_raw_coefficients, concurrence, sweep, Execution, GeometryParams, Scenario,
    SurvivalTime, SweepError, SweepOptions, SweepResult, XState,
};

use crate::config::{ConfigError, Mode, RunConfig};

pub const TRAJECTORY_HEADER: &str =
    "tau,concurrence,p_gg,p_ee,p_aa,p_ss,re_rho_as,im_rho_as,re_rho_ge,im_rho_ge";
pub const SWEEP_HEADER: &str =
    "omega_y,omega_L,scenario,max_concurrence,tau_of_max,survival_time,generated";
pub const COEFFICIENTS_HEADER: &str = "b1,b2,b3,d,delta";

/// Largest ODE/oracle deviation accepted by the oracle-check mode.
pub const ORACLE_TOLERANCE: f64 = 1e-8;
/// Spacing of oracle checkpoints along the trajectory.
pub const ORACLE_CHECK_INTERVAL: f64 = 0.1;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("computation failed ({context}): {source}")]
    Compute {
        context: String,
        source: entanglement_core::Error,
    },
    #[error("{} sweep point(s) failed; first: {}", .0.len(), .0[0])]
    Sweep(Vec<SweepError>),
    #[error("oracle deviation {deviation:e} exceeds {ORACLE_TOLERANCE:e}")]
    OracleMismatch { deviation: f64 },
    #[error("I/O error at {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 1,
            RunError::Compute { .. } | RunError::Sweep(_) | RunError::OracleMismatch { .. } => 2,
            RunError::Io { .. } => 3,
        }
    }
}

/// Render `v` in scientific notation with `precision` significant digits.
pub fn format_number(v: f64, precision: usize) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{:.*e}", precision.saturating_sub(1), v)
    }
}

/// What a run produced.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub report: Option<String>,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    fs::create_dir_all(&cfg.out).map_err(|source| RunError::Io {
        path: cfg.out.clone(),
        source,
    })?;
    match cfg.mode {
        Mode::Trajectory => run_trajectory(cfg),
        Mode::Sweep => run_sweep(cfg),
        Mode::Coefficients => run_coefficients(cfg),
        Mode::OracleCheck => run_oracle_check(cfg),
    }
}

fn single_point(cfg: &RunConfig) -> (f64, f64) {
    (
        cfg.omega_y.single().expect("validated as a single value"),
        cfg.omega_l.single().expect("validated as a single value"),
    )
}

fn compute_err(context: impl Into<String>) -> impl FnOnce(entanglement_core::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Compute { context, source }
}

struct CsvFile {
    path: PathBuf,
    w: BufWriter<File>,
}

impl CsvFile {
    fn create(path: PathBuf, header: &str) -> Result<Self, RunError> {
        let file = File::create(&path).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        let mut csv = Self {
            path,
            w: BufWriter::new(file),
        };
        csv.line(header)?;
        Ok(csv)
    }

    fn line(&mut self, text: &str) -> Result<(), RunError> {
        writeln!(self.w, "{text}").map_err(|source| self.io(source))
    }

    fn io(&self, source: io::Error) -> RunError {
        RunError::Io {
            path: self.path.clone(),
            source,
        }
    }

    fn finish(mut self) -> Result<PathBuf, RunError> {
        self.w.flush().map_err(|source| self.io(source))?;
        Ok(self.path)
    }
}

fn join_numbers(values: &[f64], precision: usize) -> String {
    values
        .iter()
        .map(|&v| format_number(v, precision))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn trajectory_path(out: &Path, scenario: Scenario) -> PathBuf {
    out.join(format!("trajectory_{}.csv", scenario.name()))
}

fn write_trajectory(
    cfg: &RunConfig,
    scenario: Scenario,
    s0: XState,
    wy: f64,
    wl: f64,
) -> Result<PathBuf, RunError> {
    let context = format!("omega_y = {wy}, omega_L = {wl}, scenario {scenario}");
    let coeffs = scenario.apply(compute_raw_coefficients(wy, wl).map_err(compute_err(&context))?);
    let stepper = Stepper::new(s0, coeffs, cfg.t_max, cfg.dt).map_err(compute_err(&context))?;
    let mut csv = CsvFile::create(trajectory_path(&cfg.out, scenario), TRAJECTORY_HEADER)?;
    for sample in stepper {
        let sample = sample.map_err(compute_err(&context))?;
        let c = concurrence(&sample.state).map_err(compute_err(&context))?;
        let s = &sample.state;
        let row = [
            sample.tau,
            c.concurrence,
            s.p_gg,
            s.p_ee,
            s.p_aa,
            s.p_ss,
            s.c_as_re,
            s.c_as_im,
            s.c_ge_re,
            s.c_ge_im,
        ];
        csv.line(&join_numbers(&row, cfg.precision))?;
    }
    csv.finish()
}

fn run_trajectory(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let (wy, wl) = single_point(cfg);
    GeometryParams::new(wy, wl).map_err(compute_err("geometry"))?;
    let s0 = cfg.initial_xstate();
    let files = map_ordered(&cfg.scenarios, Execution::default(), |&scenario| {
        write_trajectory(cfg, scenario, s0, wy, wl)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok(RunOutput {
        files,
        report: None,
    })
}

pub fn sweep_row(r: &SweepResult, precision: usize) -> String {
    let survival = match r.survival_time {
        SurvivalTime::Finite(t) => format_number(t, precision),
        SurvivalTime::Infinite => "inf".into(),
    };
    format!(
        "{},{},{},{},{},{},{}",
        format_number(r.omega_y, precision),
        format_number(r.omega_l, precision),
        r.scenario.name(),
        format_number(r.max_concurrence, precision),
        format_number(r.tau_of_max, precision),
        survival,
        r.generated,
    )
}

/// Cartesian product of the two axes, `omega_y` outermost.
pub fn sweep_grid(cfg: &RunConfig) -> Vec<GeometryParams> {
    let ls = cfg.omega_l.points();
    cfg.omega_y
        .points()
        .into_iter()
        .flat_map(|wy| {
            ls.iter().map(move |&wl| GeometryParams {
                omega_y: wy,
                omega_l: wl,
                include_atom_atom: true,
                include_atom_plate: true,
            })
        })
        .collect()
}

fn run_sweep(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let opts = SweepOptions {
        t_max: cfg.t_max,
        dt: cfg.dt,
        threshold: cfg.threshold,
        scenarios: cfg.scenarios.clone(),
        execution: Execution::default(),
    };
    let results = sweep(&sweep_grid(cfg), cfg.initial_xstate(), &opts);
    let mut csv = CsvFile::create(cfg.out.join("sweep.csv"), SWEEP_HEADER)?;
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(r) => csv.line(&sweep_row(&r, cfg.precision))?,
            Err(e) => failures.push(e),
        }
    }
    let path = csv.finish()?;
    if failures.is_empty() {
        Ok(RunOutput {
            files: vec![path],
            report: None,
        })
    } else {
        Err(RunError::Sweep(failures))
    }
}

fn run_coefficients(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let (wy, wl) = single_point(cfg);
    let c = compute_raw_coefficients(wy, wl).map_err(compute_err("geometry"))?;
    let mut csv = CsvFile::create(cfg.out.join("coefficients.csv"), COEFFICIENTS_HEADER)?;
    csv.line(&join_numbers(
        &[c.b1, c.b2, c.b3, c.d, c.delta],
        cfg.precision,
    ))?;
    Ok(RunOutput {
        files: vec![csv.finish()?],
        report: None,
    })
}

/// Per-scenario comparison of the integrated X block against the full oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub scenario: Scenario,
    pub max_deviation: f64,
    pub tau_of_max: f64,
    pub max_non_x: f64,
    pub max_concurrence_gap: f64,
    pub min_choi_eigenvalue: f64,
}

pub fn compare_with_oracle(
    s0: XState,
    wy: f64,
    wl: f64,
    scenario: Scenario,
    t_max: f64,
    dt: f64,
) -> Result<OracleComparison, RunError> {
    let context = format!("omega_y = {wy}, omega_L = {wl}, scenario {scenario}");
    let coeffs = scenario.apply(compute_raw_coefficients(wy, wl).map_err(compute_err(&context))?);
    let liou = build_liouvillian(&coeffs);
    let rho0 = DensityMatrix4::from_x_state(&s0);
    let stride = ((ORACLE_CHECK_INTERVAL / dt).round() as usize).max(1);
    let mut cmp = OracleComparison {
        scenario,
        max_deviation: 0.0,
        tau_of_max: 0.0,
        max_non_x: 0.0,
        max_concurrence_gap: 0.0,
        min_choi_eigenvalue: choi_min_eigenvalue(&liou, t_max),
    };
    let stepper = Stepper::new(s0, coeffs, t_max, dt).map_err(compute_err(&context))?;
    let last = stepper.len() - 1;
    for (k, sample) in stepper.enumerate() {
        let sample = sample.map_err(compute_err(&context))?;
        if k % stride != 0 && k != last {
            continue;
        }
        let exact = evolve_exact(&rho0, &liou, sample.tau).map_err(compute_err(&context))?;
        let dev = exact
            .to_x_state()
            .to_array()
            .iter()
            .zip(sample.state.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dev > cmp.max_deviation {
            cmp.max_deviation = dev;
            cmp.tau_of_max = sample.tau;
        }
        cmp.max_non_x = cmp.max_non_x.max(exact.non_x_max());
        let k_ode = concurrence(&sample.state)
            .map_err(compute_err(&context))?
            .concurrence;
        cmp.max_concurrence_gap = cmp
            .max_concurrence_gap
            .max((k_ode - wootters_concurrence(&exact)).abs());
    }
    Ok(cmp)
}

fn run_oracle_check(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let (wy, wl) = single_point(cfg);
    GeometryParams::new(wy, wl).map_err(compute_err("geometry"))?;
    let s0 = cfg.initial_xstate();
    let rows = map_ordered(&cfg.scenarios, Execution::default(), |&scenario| {
        compare_with_oracle(s0, wy, wl, scenario, cfg.t_max, cfg.dt)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let p = cfg.precision.min(4);
    let mut report = format!(
        "oracle check: omega_y = {wy}, omega_L = {wl}, initial_state = {}, t_max = {}, dt = {}\n",
        cfg.initial_state.name(),
        cfg.t_max,
        cfg.dt
    );
    report.push_str(
        "scenario,max_deviation,tau_of_max,max_non_x,max_concurrence_gap,min_choi_eigenvalue\n",
    );
    for r in &rows {
        report.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.scenario.name(),
            format_number(r.max_deviation, p),
            format_number(r.tau_of_max, p),
            format_number(r.max_non_x, p),
            format_number(r.max_concurrence_gap, p),
            format_number(r.min_choi_eigenvalue, p),
        ));
    }
    let worst = rows.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    let verdict = if worst < ORACLE_TOLERANCE {
        "PASS"
    } else {
        "FAIL"
    };
    report.push_str(&format!(
        "max deviation {} (tolerance {}): {verdict}\n",
        format_number(worst, p),
        format_number(ORACLE_TOLERANCE, 1)
    ));

    let path = cfg.out.join("oracle_check.txt");
    fs::write(&path, &report).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    if worst < ORACLE_TOLERANCE {
        Ok(RunOutput {
            files: vec![path],
            report: Some(report),
        })
    } else {
        print!("{report}");
        Err(RunError::OracleMismatch { deviation: worst })
    }
}
