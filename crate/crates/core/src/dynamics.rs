//! X-block master equation in the coupled basis {|G⟩, |A⟩, |S⟩, |E⟩} and its
//! fixed-step RK4 integration.

use crate::coefficients::{Coefficients, GeometryParams};
use crate::error::{Error, Result};

/// Default integrator step, in units of 1/Γ₀.
pub const DEFAULT_DT: f64 = 1e-3;

/// Tolerance used by [`XState::validate`] and the per-sample trace check.
pub const STATE_TOLERANCE: f64 = 1e-9;

/// Largest phase advance per step accepted by [`accurate_dt`].
pub const MAX_PHASE_PER_STEP: f64 = 3e-3;

/// Any coordinate larger than this in magnitude means the integration blew up.
pub const DIVERGENCE_BOUND: f64 = 10.0;

const FIELD_NAMES: [&str; 8] = [
    "p_gg", "p_ee", "p_aa", "p_ss", "c_as_re", "c_as_im", "c_ge_re", "c_ge_im",
];

/// Real coordinates of an X-structured two-atom density matrix.
///
/// `ρ_SA` and `ρ_EG` are the conjugates of the stored coherences.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct XState {
    pub p_gg: f64,
    pub p_ee: f64,
    pub p_aa: f64,
    pub p_ss: f64,
    pub c_as_re: f64,
    pub c_as_im: f64,
    pub c_ge_re: f64,
    pub c_ge_im: f64,
}

impl XState {
    pub fn from_array(a: [f64; 8]) -> Self {
        Self {
            p_gg: a[0],
            p_ee: a[1],
            p_aa: a[2],
            p_ss: a[3],
            c_as_re: a[4],
            c_as_im: a[5],
            c_ge_re: a[6],
            c_ge_im: a[7],
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.p_gg,
            self.p_ee,
            self.p_aa,
            self.p_ss,
            self.c_as_re,
            self.c_as_im,
            self.c_ge_re,
            self.c_ge_im,
        ]
    }

    pub fn trace(&self) -> f64 {
        self.p_gg + self.p_ee + self.p_aa + self.p_ss
    }

    /// Largest deviation from the physical-state invariants (0 when all hold exactly).
    pub fn invariant_violation(&self) -> f64 {
        let trace = (self.trace() - 1.0).abs();
        let negativity = [self.p_gg, self.p_ee, self.p_aa, self.p_ss]
            .iter()
            .fold(0.0_f64, |acc, &p| acc.max(-p));
        let as_minor = self.c_as_re.powi(2) + self.c_as_im.powi(2) - self.p_aa * self.p_ss;
        let ge_minor = self.c_ge_re.powi(2) + self.c_ge_im.powi(2) - self.p_gg * self.p_ee;
        trace.max(negativity).max(as_minor).max(ge_minor)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if !self.to_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidState("non-finite coordinate".into()));
        }
        let violation = self.invariant_violation();
        if violation > tol {
            return Err(Error::InvalidState(format!(
                "invariants violated by {violation:e} (tolerance {tol:e})"
            )));
        }
        Ok(())
    }
}

/// Named initial states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// |10⟩: nearer atom excited, farther atom in the ground state.
    Product10,
    Antisymmetric,
    Symmetric,
    Excited,
    Ground,
    CustomX(XState),
}

impl InitialState {
    /// The five built-in states, in a fixed order.
    pub const NAMED: [InitialState; 5] = [
        InitialState::Product10,
        InitialState::Antisymmetric,
        InitialState::Symmetric,
        InitialState::Excited,
        InitialState::Ground,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InitialState::Product10 => "product10",
            InitialState::Antisymmetric => "antisymmetric",
            InitialState::Symmetric => "symmetric",
            InitialState::Excited => "excited",
            InitialState::Ground => "ground",
            InitialState::CustomX(_) => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::NAMED.into_iter().find(|s| s.name() == name)
    }
}

/// Coordinates of a named initial state.
pub fn initial_state(which: InitialState) -> Result<XState> {
    let s = match which {
        // |10⟩ = (|S⟩ + |A⟩)/√2
        InitialState::Product10 => XState {
            p_aa: 0.5,
            p_ss: 0.5,
            c_as_re: 0.5,
            ..XState::default()
        },
        InitialState::Antisymmetric => XState {
            p_aa: 1.0,
            ..XState::default()
        },
        InitialState::Symmetric => XState {
            p_ss: 1.0,
            ..XState::default()
        },
        InitialState::Excited => XState {
            p_ee: 1.0,
            ..XState::default()
        },
        InitialState::Ground => XState {
            p_gg: 1.0,
            ..XState::default()
        },
        InitialState::CustomX(s) => {
            s.validate(STATE_TOLERANCE)?;
            s
        }
    };
    Ok(s)
}

/// Upper bound on the fastest rate or rotation frequency of the generator.
pub fn spectral_bound(c: &Coefficients) -> f64 {
    4.0 * (c.b1 + c.b2) + 4.0 * c.d.abs() + 2.0 * c.delta.abs()
}

/// Step that keeps RK4 error near roundoff over windows of O(10²).
///
/// Equals [`DEFAULT_DT`] unless the coherent terms are large, which happens
/// at small separations where `d` and `delta` grow like `1/ω`.
pub fn accurate_dt(c: &Coefficients) -> f64 {
    DEFAULT_DT.min(MAX_PHASE_PER_STEP / spectral_bound(c))
}

/// Time derivative of the X block.
pub fn rhs(s: &XState, c: &Coefficients) -> XState {
    XState::from_array(rhs_array(&s.to_array(), c))
}

#[inline]
fn rhs_array(s: &[f64; 8], c: &Coefficients) -> [f64; 8] {
    let [_gg, ee, aa, ss, x, y, ge_re, ge_im] = *s;
    let sum = c.b1 + c.b2;
    let sub = 2.0 * (sum - 2.0 * c.b3);
    let sup = 2.0 * (sum + 2.0 * c.b3);
    let asym = c.b2 - c.b1;
    // ρ_AS + ρ_SA = 2x, i(ρ_AS − ρ_SA) = −2y
    let mix = 2.0 * asym * x;
    let shift = 2.0 * c.delta * y;
    [
        sub * aa + sup * ss - 2.0 * mix,
        -4.0 * sum * ee,
        -sub * aa + sub * ee + mix + shift,
        -sup * ss + sup * ee + mix - shift,
        -2.0 * sum * x + 4.0 * c.d * y + 2.0 * asym * ee + asym * (ss + aa),
        -2.0 * sum * y - 4.0 * c.d * x + c.delta * (ss - aa),
        -2.0 * sum * ge_re,
        -2.0 * sum * ge_im,
    ]
}

#[inline]
fn axpy(a: &[f64; 8], h: f64, k: &[f64; 8]) -> [f64; 8] {
    std::array::from_fn(|i| a[i] + h * k[i])
}

/// One classical RK4 step of size `h`.
pub fn rk4_step(s: &XState, c: &Coefficients, h: f64) -> XState {
    XState::from_array(rk4_step_array(&s.to_array(), c, h))
}

#[inline]
fn rk4_step_array(s: &[f64; 8], c: &Coefficients, h: f64) -> [f64; 8] {
    let k1 = rhs_array(s, c);
    let k2 = rhs_array(&axpy(s, 0.5 * h, &k1), c);
    let k3 = rhs_array(&axpy(s, 0.5 * h, &k2), c);
    let k4 = rhs_array(&axpy(s, h, &k3), c);
    std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
}

/// Advance `s` by `duration` using RK4 sub-steps no longer than `max_step`.
pub fn propagate(s: &XState, c: &Coefficients, duration: f64, max_step: f64) -> XState {
    if duration <= 0.0 {
        return *s;
    }
    let n = (duration / max_step).ceil().max(1.0) as usize;
    let h = duration / n as f64;
    let mut a = s.to_array();
    for _ in 0..n {
        a = rk4_step_array(&a, c, h);
    }
    XState::from_array(a)
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub tau: f64,
    pub state: XState,
}

fn check_window(t_max: f64, dt: f64) -> Result<()> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidWindow(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidWindow(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if dt > t_max {
        return Err(Error::InvalidWindow(format!(
            "dt = {dt} exceeds t_max = {t_max}"
        )));
    }
    Ok(())
}

/// Number of steps needed to cover `[0, t_max]`; the final step may be short.
fn step_count(t_max: f64, dt: f64) -> usize {
    let ratio = t_max / dt;
    let n = ratio.round();
    // absorb representation noise such as 30 / 1e-3 = 29999.999999999996
    if (ratio - n).abs() <= 1e-9 * ratio.max(1.0) {
        n as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Streaming RK4 integrator yielding every sample from `τ = 0` to `τ = t_max`.
///
/// Sample times are `k·dt` (not accumulated), with the last one pinned to `t_max`.
#[derive(Debug, Clone)]
pub struct Stepper {
    coefficients: Coefficients,
    state: [f64; 8],
    dt: f64,
    t_max: f64,
    steps: usize,
    next: usize,
    tau: f64,
    failed: bool,
}

impl Stepper {
    pub fn new(s0: XState, coefficients: Coefficients, t_max: f64, dt: f64) -> Result<Self> {
        check_window(t_max, dt)?;
        if !coefficients.is_finite() {
            return Err(Error::InvalidState("non-finite coefficients".into()));
        }
        Ok(Self {
            coefficients,
            state: s0.to_array(),
            dt,
            t_max,
            steps: step_count(t_max, dt),
            next: 0,
            tau: 0.0,
            failed: false,
        })
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Total number of samples, including the initial one.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self, tau: f64) -> Result<()> {
        for (i, v) in self.state.iter().enumerate() {
            if v.is_nan() || v.abs() > DIVERGENCE_BOUND {
                return Err(Error::IntegrationDiverged {
                    tau,
                    field: FIELD_NAMES[i],
                    value: *v,
                });
            }
        }
        let trace = self.state[0] + self.state[1] + self.state[2] + self.state[3];
        if (trace - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::TraceDrift { tau, trace });
        }
        Ok(())
    }
}

impl Iterator for Stepper {
    type Item = Result<Sample>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next > self.steps {
            return None;
        }
        if self.next > 0 {
            let t_next = if self.next == self.steps {
                self.t_max
            } else {
                self.next as f64 * self.dt
            };
            self.state = rk4_step_array(&self.state, &self.coefficients, t_next - self.tau);
            self.tau = t_next;
        }
        self.next += 1;
        if let Err(e) = self.check(self.tau) {
            self.failed = true;
            return Some(Err(e));
        }
        Some(Ok(Sample {
            tau: self.tau,
            state: XState::from_array(self.state),
        }))
    }
}

/// A fully recorded integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub coefficients: Coefficients,
    pub geometry: Option<GeometryParams>,
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.tau)
    }

    pub fn with_geometry(mut self, geometry: GeometryParams) -> Self {
        self.geometry = Some(geometry);
        self
    }
}

/// Integrate from `s0` over `[0, t_max]`, recording every step.
pub fn integrate(s0: XState, c: Coefficients, t_max: f64, dt: f64) -> Result<Trajectory> {
    let stepper = Stepper::new(s0, c, t_max, dt)?;
    let mut samples = Vec::with_capacity(stepper.len());
    for sample in stepper {
        samples.push(sample?);
    }
    Ok(Trajectory {
        samples,
        coefficients: c,
        geometry: None,
        dt,
    })
}
