//! Trajectory observables (peak concurrence, survival time) and geometry
//! sweeps over the four interaction scenarios.

use std::fmt;

use crate::coefficients::{compute_raw_coefficients, Coefficients, GeometryParams};
use crate::dynamics::{propagate, Sample, Stepper, Trajectory, XState};
use crate::entanglement::concurrence;
use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};

/// Default concurrence threshold separating "entangled" from "dead".
pub const DEFAULT_THRESHOLD: f64 = 1e-9;

/// Default window for survival analysis, in units of 1/Γ₀.
pub const DEFAULT_SURVIVAL_T_MAX: f64 = 50.0;

/// Two peak candidates closer than this are tied; the earlier one wins.
pub const MAX_TIE_TOLERANCE: f64 = 1e-9;

/// Time resolution of the bisection that locates the death time.
pub const SURVIVAL_RESOLUTION: f64 = 1e-6;

const GOLDEN_TOLERANCE: f64 = 1e-10;

/// Which coherent environment-induced terms enter the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Atom-atom coupling and atom-plate shift both on.
    Full,
    /// Both off: dissipation only.
    None,
    AtomAtomOnly,
    AtomPlateOnly,
}

/// The four scenarios in canonical output order.
pub const SCENARIOS: [Scenario; 4] = [
    Scenario::Full,
    Scenario::None,
    Scenario::AtomAtomOnly,
    Scenario::AtomPlateOnly,
];

impl Scenario {
    /// `(include_atom_atom, include_atom_plate)`.
    pub fn toggles(self) -> (bool, bool) {
        match self {
            Scenario::Full => (true, true),
            Scenario::None => (false, false),
            Scenario::AtomAtomOnly => (true, false),
            Scenario::AtomPlateOnly => (false, true),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Full => "full",
            Scenario::None => "none",
            Scenario::AtomAtomOnly => "atom_atom_only",
            Scenario::AtomPlateOnly => "atom_plate_only",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        SCENARIOS.into_iter().find(|s| s.name() == name)
    }

    /// Apply this scenario's toggles to raw coefficients.
    pub fn apply(self, raw: Coefficients) -> Coefficients {
        let (aa, ap) = self.toggles();
        raw.toggled(aa, ap)
    }

    pub fn geometry(self, omega_y: f64, omega_l: f64) -> Result<GeometryParams> {
        let (aa, ap) = self.toggles();
        GeometryParams::with_toggles(omega_y, omega_l, aa, ap)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Peak concurrence over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxConcurrence {
    pub value: f64,
    pub tau: f64,
}

/// Time at which entanglement finally dies, or `Infinite` if it outlives the window.
///
/// `Infinite` compares greater than every finite time.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum SurvivalTime {
    Finite(f64),
    Infinite,
}

impl SurvivalTime {
    pub fn as_f64(self) -> f64 {
        match self {
            SurvivalTime::Finite(t) => t,
            SurvivalTime::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, SurvivalTime::Finite(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalReport {
    pub time: SurvivalTime,
    /// `(fell_below, rose_above)` sample times of every dark period followed by a revival.
    pub dark_intervals: Vec<(f64, f64)>,
}

/// Everything the sweep needs from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySummary {
    pub max: MaxConcurrence,
    pub survival: SurvivalReport,
    /// Concurrence exceeded the threshold at some sample.
    pub generated: bool,
}

/// Single-pass accumulator over samples; refinement happens in [`Scan::finish`].
struct Scan {
    threshold: f64,
    prev: Option<(Sample, f64)>,
    /// `(tau, concurrence)` of the sample before `prev`.
    prev2: Option<(f64, f64)>,
    // peak
    best: f64,
    best_tau: f64,
    /// Sample preceding the peak sample (or the peak itself at τ = 0).
    best_bracket_start: Option<Sample>,
    best_bracket_end: Option<f64>,
    awaiting_bracket_end: bool,
    // survival
    ever_above: bool,
    above: bool,
    last_fall: Option<(Sample, f64)>,
    fall_tau: f64,
    dark: Vec<(f64, f64)>,
}

impl Scan {
    fn new(threshold: f64) -> Self {
        Self {
            threshold,
            prev: None,
            prev2: None,
            best: f64::NEG_INFINITY,
            best_tau: 0.0,
            best_bracket_start: None,
            best_bracket_end: None,
            awaiting_bracket_end: false,
            ever_above: false,
            above: false,
            last_fall: None,
            fall_tau: 0.0,
            dark: Vec::new(),
        }
    }

    fn push(&mut self, sample: Sample) -> Result<()> {
        let c = concurrence(&sample.state)?.concurrence;

        if self.awaiting_bracket_end {
            self.best_bracket_end = Some(sample.tau);
            self.awaiting_bracket_end = false;
        }
        if c > self.best + MAX_TIE_TOLERANCE || self.prev.is_none() {
            self.best = c;
            self.best_tau = sample.tau;
            self.best_bracket_start = Some(self.prev.map_or(sample, |(s, _)| s));
            self.best_bracket_end = None;
            self.awaiting_bracket_end = true;
        }

        let above = c > self.threshold;
        if self.prev.is_some() {
            if self.above && !above {
                self.last_fall = self.prev.map(|(s, _)| (s, sample.tau));
                self.fall_tau = sample.tau;
            } else if !self.above && above && self.ever_above {
                self.dark.push((self.fall_tau, sample.tau));
                self.last_fall = None;
            }
        }
        self.ever_above |= above;
        self.above = above;
        self.prev2 = self.prev.map(|(s, c)| (s.tau, c));
        self.prev = Some((sample, c));
        Ok(())
    }

    fn peak(&self, coeffs: &Coefficients, dt: f64) -> Result<MaxConcurrence> {
        if self.prev.is_none() {
            return Err(Error::InvalidState("empty trajectory".into()));
        }
        // Golden-section on the re-integrated concurrence inside the bracket.
        let mut max = MaxConcurrence {
            value: self.best,
            tau: self.best_tau,
        };
        if let Some(start) = self.best_bracket_start {
            let end = self.best_bracket_end.unwrap_or(self.best_tau);
            let width = end - start.tau;
            if width > 0.0 {
                let (h, v) = golden_max(
                    |h| Ok(concurrence(&propagate(&start.state, coeffs, h, dt))?.concurrence),
                    width,
                )?;
                if v > max.value {
                    max = MaxConcurrence {
                        value: v,
                        tau: start.tau + h,
                    };
                }
            }
        }
        Ok(max)
    }

    fn survival(self, coeffs: &Coefficients, dt: f64) -> Result<SurvivalReport> {
        let (last, last_c) = self
            .prev
            .ok_or_else(|| Error::InvalidState("empty trajectory".into()))?;
        let time = if !self.ever_above {
            SurvivalTime::Finite(0.0)
        } else if self.above {
            let (prev_tau, prev_c) = self.prev2.unwrap_or((last.tau, last_c));
            let slope = if last.tau > prev_tau {
                (last_c - prev_c) / (last.tau - prev_tau)
            } else {
                0.0
            };
            if slope >= 0.0 {
                return Err(Error::WindowTooShort {
                    t_max: last.tau,
                    concurrence: last_c,
                });
            }
            SurvivalTime::Infinite
        } else {
            let (before, after_tau) = self
                .last_fall
                .expect("a fall is recorded whenever the run ends below after being above");
            let mut lo = 0.0;
            let mut hi = after_tau - before.tau;
            while hi - lo > SURVIVAL_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                let c = concurrence(&propagate(&before.state, coeffs, mid, dt))?.concurrence;
                if c > self.threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            SurvivalTime::Finite(before.tau + 0.5 * (lo + hi))
        };
        Ok(SurvivalReport {
            time,
            dark_intervals: self.dark,
        })
    }

    fn finish(self, coeffs: &Coefficients, dt: f64) -> Result<TrajectorySummary> {
        let max = self.peak(coeffs, dt)?;
        let generated = self.ever_above;
        let survival = self.survival(coeffs, dt)?;
        Ok(TrajectorySummary {
            max,
            survival,
            generated,
        })
    }
}

/// Maximize `f` on `[0, width]`; returns `(argmax, max)`.
fn golden_max<F>(mut f: F, width: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, width);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > GOLDEN_TOLERANCE {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_finite() && threshold > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(threshold))
    }
}

fn scan_trajectory(traj: &Trajectory, threshold: f64) -> Result<Scan> {
    check_threshold(threshold)?;
    let mut scan = Scan::new(threshold);
    for s in &traj.samples {
        scan.push(*s)?;
    }
    Ok(scan)
}

/// Peak concurrence of a recorded trajectory, refined between samples.
pub fn max_concurrence(traj: &Trajectory) -> Result<MaxConcurrence> {
    scan_trajectory(traj, DEFAULT_THRESHOLD)?.peak(&traj.coefficients, traj.dt)
}

/// Last time concurrence drops below `threshold` and stays there.
pub fn survival_time(traj: &Trajectory, threshold: f64) -> Result<SurvivalReport> {
    scan_trajectory(traj, threshold)?.survival(&traj.coefficients, traj.dt)
}

/// Integrate and summarize in one pass without storing the trajectory.
pub fn summarize(
    s0: XState,
    coeffs: Coefficients,
    t_max: f64,
    dt: f64,
    threshold: f64,
) -> Result<TrajectorySummary> {
    check_threshold(threshold)?;
    let mut scan = Scan::new(threshold);
    for sample in Stepper::new(s0, coeffs, t_max, dt)? {
        scan.push(sample?)?;
    }
    scan.finish(&coeffs, dt)
}

/// Peak concurrence over `[0, t_max]` without storing the trajectory or
/// classifying survival, so long-lived states never raise `WindowTooShort`.
pub fn peak_concurrence(
    s0: XState,
    coeffs: Coefficients,
    t_max: f64,
    dt: f64,
) -> Result<MaxConcurrence> {
    let mut scan = Scan::new(DEFAULT_THRESHOLD);
    for sample in Stepper::new(s0, coeffs, t_max, dt)? {
        scan.push(sample?)?;
    }
    scan.peak(&coeffs, dt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub t_max: f64,
    pub dt: f64,
    pub threshold: f64,
    pub scenarios: Vec<Scenario>,
    pub execution: Execution,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            t_max: DEFAULT_SURVIVAL_T_MAX,
            dt: crate::dynamics::DEFAULT_DT,
            threshold: DEFAULT_THRESHOLD,
            scenarios: SCENARIOS.to_vec(),
            execution: Execution::default(),
        }
    }
}

/// One (geometry point, scenario) entry of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub omega_y: f64,
    pub omega_l: f64,
    pub scenario: Scenario,
    pub max_concurrence: f64,
    pub tau_of_max: f64,
    pub survival_time: SurvivalTime,
    pub generated: bool,
}

/// A sweep entry that failed, tagged with where it failed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("omega_y = {omega_y}, omega_L = {omega_l}, scenario {scenario}: {source}")]
pub struct SweepError {
    pub omega_y: f64,
    pub omega_l: f64,
    pub scenario: Scenario,
    pub source: Error,
}

fn sweep_point(
    point: &GeometryParams,
    scenario: Scenario,
    s0: XState,
    opts: &SweepOptions,
) -> std::result::Result<SweepResult, SweepError> {
    let tag = |source| SweepError {
        omega_y: point.omega_y,
        omega_l: point.omega_l,
        scenario,
        source,
    };
    point.validate().map_err(tag)?;
    let raw = compute_raw_coefficients(point.omega_y, point.omega_l).map_err(tag)?;
    let summary =
        summarize(s0, scenario.apply(raw), opts.t_max, opts.dt, opts.threshold).map_err(tag)?;
    Ok(SweepResult {
        omega_y: point.omega_y,
        omega_l: point.omega_l,
        scenario,
        max_concurrence: summary.max.value,
        tau_of_max: summary.max.tau,
        survival_time: summary.survival.time,
        generated: summary.generated,
    })
}

/// Run every grid point under every requested scenario.
///
/// Output is ordered grid-major, then by `opts.scenarios`, independent of
/// execution order. The toggles carried by the grid points are ignored.
pub fn sweep(
    grid: &[GeometryParams],
    s0: XState,
    opts: &SweepOptions,
) -> Vec<std::result::Result<SweepResult, SweepError>> {
    let jobs: Vec<(GeometryParams, Scenario)> = grid
        .iter()
        .flat_map(|g| opts.scenarios.iter().map(move |&s| (*g, s)))
        .collect();
    map_ordered(&jobs, opts.execution, |(g, s)| sweep_point(g, *s, s0, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::compute_coefficients;
    use crate::dynamics::{initial_state, integrate, InitialState};

    fn run(state: InitialState, wy: f64, wl: f64, scenario: Scenario, t_max: f64) -> Trajectory {
        let c = scenario.apply(compute_raw_coefficients(wy, wl).unwrap());
        integrate(initial_state(state).unwrap(), c, t_max, 1e-3).unwrap()
    }

    #[test]
    fn scenario_set_is_complete() {
        let mut toggles: Vec<_> = SCENARIOS.iter().map(|s| s.toggles()).collect();
        toggles.sort();
        toggles.dedup();
        assert_eq!(toggles.len(), 4);
        for s in SCENARIOS {
            assert_eq!(Scenario::from_name(s.name()), Some(s));
            let g = s.geometry(0.5, 0.5).unwrap();
            assert_eq!((g.include_atom_atom, g.include_atom_plate), s.toggles());
        }
    }

    #[test]
    fn survival_ordering() {
        assert!(SurvivalTime::Finite(1e300) < SurvivalTime::Infinite);
        assert!(SurvivalTime::Finite(1.0) < SurvivalTime::Finite(2.0));
        assert_eq!(SurvivalTime::Infinite.as_f64(), f64::INFINITY);
    }

    #[test]
    fn zero_concurrence_trajectory() {
        let traj = run(InitialState::Ground, 1.0, 1.0, Scenario::Full, 5.0);
        assert_eq!(
            max_concurrence(&traj).unwrap(),
            MaxConcurrence {
                value: 0.0,
                tau: 0.0
            }
        );
        let report = survival_time(&traj, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(report.time, SurvivalTime::Finite(0.0));
        assert!(report.dark_intervals.is_empty());
    }

    #[test]
    fn antisymmetric_peak_is_initial() {
        let traj = run(InitialState::Antisymmetric, 0.3, 2.0, Scenario::Full, 5.0);
        let m = max_concurrence(&traj).unwrap();
        assert_eq!(
            m,
            MaxConcurrence {
                value: 1.0,
                tau: 0.0
            }
        );
    }

    #[test]
    fn excited_state_without_cross_decay_never_entangles() {
        let c = Coefficients {
            b1: 0.2,
            b2: 0.1,
            b3: 0.0,
            d: 0.0,
            delta: 0.0,
        };
        let traj = integrate(initial_state(InitialState::Excited).unwrap(), c, 20.0, 1e-3).unwrap();
        for s in &traj.samples {
            assert!(concurrence(&s.state).unwrap().k1 <= 1e-12, "at {}", s.tau);
        }
        let report = survival_time(&traj, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(report.time, SurvivalTime::Finite(0.0));
    }

    #[test]
    fn excited_state_shows_delayed_birth_with_cross_decay() {
        let traj = run(InitialState::Excited, 0.1, 10.0, Scenario::Full, 20.0);
        let first = traj
            .samples
            .iter()
            .find(|s| concurrence(&s.state).unwrap().concurrence > 0.0)
            .expect("entanglement appears");
        assert!(first.tau > 1.0);
    }

    #[test]
    fn golden_section_refines_peak() {
        let traj = run(InitialState::Product10, 1.0, 10.0, Scenario::Full, 5.0);
        let m = max_concurrence(&traj).unwrap();
        let sampled = traj
            .samples
            .iter()
            .map(|s| concurrence(&s.state).unwrap().concurrence)
            .fold(0.0, f64::max);
        assert!(m.value >= sampled);
        assert!(m.value - sampled < 1e-8);
        // a fine local scan around the refined peak finds nothing higher
        let c = traj.coefficients;
        let start = traj
            .samples
            .iter()
            .rev()
            .find(|s| s.tau <= m.tau - 2e-3)
            .unwrap();
        for k in 0..400 {
            let h = (m.tau - start.tau) - 2e-3 + k as f64 * 1e-5;
            let v = concurrence(&propagate(&start.state, &c, h, 1e-3))
                .unwrap()
                .concurrence;
            assert!(v <= m.value + 1e-11, "{v} > {}", m.value);
        }
    }

    #[test]
    fn finite_survival_is_bracketed_and_stable_under_refinement() {
        let g = GeometryParams::new(1.0, 10.0).unwrap();
        let c = compute_coefficients(&g).unwrap();
        let s0 = initial_state(InitialState::Product10).unwrap();
        let coarse = summarize(s0, c, 50.0, 1e-3, DEFAULT_THRESHOLD).unwrap();
        let fine = summarize(s0, c, 50.0, 5e-4, DEFAULT_THRESHOLD).unwrap();
        let (a, b) = (coarse.survival.time.as_f64(), fine.survival.time.as_f64());
        assert!(a.is_finite() && a > 30.0 && a < 40.0, "{a}");
        assert!((a - b).abs() < 2e-6, "{a} vs {b}");
        // just before the death time entangled, just after not
        let before = propagate(&s0, &c, a - 1e-5, 1e-3);
        let after = propagate(&s0, &c, a + 1e-5, 1e-3);
        assert!(concurrence(&before).unwrap().concurrence > DEFAULT_THRESHOLD);
        assert!(concurrence(&after).unwrap().concurrence <= DEFAULT_THRESHOLD);
    }

    #[test]
    fn trajectory_and_streaming_agree() {
        let traj = run(InitialState::Product10, 1.0, 10.0, Scenario::None, 50.0);
        let streamed = summarize(
            traj.samples[0].state,
            traj.coefficients,
            50.0,
            1e-3,
            DEFAULT_THRESHOLD,
        )
        .unwrap();
        assert_eq!(max_concurrence(&traj).unwrap(), streamed.max);
        let peak = peak_concurrence(traj.samples[0].state, traj.coefficients, 50.0, 1e-3).unwrap();
        assert_eq!(peak, streamed.max);
        assert_eq!(
            survival_time(&traj, DEFAULT_THRESHOLD).unwrap(),
            streamed.survival
        );
    }

    #[test]
    fn infinite_and_window_too_short() {
        // still decaying at the end of the window
        let traj = run(InitialState::Antisymmetric, 1.0, 1.0, Scenario::None, 5.0);
        assert_eq!(
            survival_time(&traj, DEFAULT_THRESHOLD).unwrap().time,
            SurvivalTime::Infinite
        );
        // still growing at the end of the window
        let traj = run(InitialState::Product10, 0.1, 0.5, Scenario::None, 1.0);
        assert!(matches!(
            survival_time(&traj, DEFAULT_THRESHOLD),
            Err(Error::WindowTooShort { .. })
        ));
        assert!(matches!(
            survival_time(&traj, 0.0),
            Err(Error::InvalidThreshold(_))
        ));
    }

    #[test]
    fn revivals_are_reported_as_dark_intervals() {
        // no coherent terms: K1 = |p_aa − p_ss| passes through zero
        let traj = run(InitialState::Product10, 1.0, 1.0, Scenario::None, 30.0);
        let report = survival_time(&traj, 1e-3).unwrap();
        let c: Vec<f64> = traj
            .samples
            .iter()
            .map(|s| concurrence(&s.state).unwrap().concurrence)
            .collect();
        let dips = c.windows(2).filter(|w| w[0] > 1e-3 && w[1] <= 1e-3).count();
        let rises = c.windows(2).filter(|w| w[0] <= 1e-3 && w[1] > 1e-3).count();
        assert_eq!(report.dark_intervals.len(), rises - 1, "{dips} {rises}");
        for (a, b) in &report.dark_intervals {
            assert!(b > a);
        }
    }

    #[test]
    fn sweep_ground_state_and_ordering() {
        let grid = [
            GeometryParams::new(1.0, 0.5).unwrap(),
            GeometryParams::new(0.2, 3.0).unwrap(),
        ];
        let opts = SweepOptions {
            t_max: 2.0,
            ..SweepOptions::default()
        };
        let out = sweep(&grid, initial_state(InitialState::Ground).unwrap(), &opts);
        assert_eq!(out.len(), 8);
        for (i, r) in out.iter().enumerate() {
            let r = r.as_ref().unwrap();
            assert_eq!(r.max_concurrence, 0.0);
            assert!(!r.generated);
            assert_eq!(r.scenario, SCENARIOS[i % 4]);
            assert_eq!(r.omega_l, grid[i / 4].omega_l);
        }
    }

    #[test]
    fn sweep_isolates_failures() {
        let bad = GeometryParams {
            omega_y: 1e-9,
            omega_l: 1.0,
            include_atom_atom: true,
            include_atom_plate: true,
        };
        let grid = [GeometryParams::new(1.0, 1.0).unwrap(), bad];
        let opts = SweepOptions {
            t_max: 1.0,
            scenarios: vec![Scenario::Full],
            ..SweepOptions::default()
        };
        let out = sweep(
            &grid,
            initial_state(InitialState::Antisymmetric).unwrap(),
            &opts,
        );
        assert!(out[0].is_ok());
        let err = out[1].as_ref().unwrap_err();
        assert_eq!(err.omega_y, 1e-9);
        assert!(matches!(err.source, Error::DegenerateGeometry { .. }));
    }
}
