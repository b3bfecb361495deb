//! Environment-induced rates and shifts for two atoms on a line normal to a
//! perfectly reflecting plane.
//!
//! The scalar-field correlator is built by the method of images, so every
//! coefficient is a difference between a direct-path and a mirror-path
//! contribution. All outputs are in units of the free-space spontaneous
//! emission rate Γ₀, and geometry enters only through the dimensionless
//! products `ω·y` and `ω·L`.

use crate::error::{Error, Result};

/// Below this `|2x|` the sinc is evaluated by its Taylor series.
pub const F1_SERIES_THRESHOLD: f64 = 1e-4;

/// Default guard on `|x|` for [`f2`].
pub const F2_X_MIN: f64 = 1e-8;

/// `sin(2x) / (2x)`, total on the reals.
pub fn f1(x: f64) -> f64 {
    let u = 2.0 * x;
    if u.abs() < F1_SERIES_THRESHOLD {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// `cos(2x) / (2x)` with the default divergence guard.
pub fn f2(x: f64) -> Result<f64> {
    f2_guarded(x, F2_X_MIN)
}

/// `cos(2x) / (2x)`, rejecting `|x| < x_min`.
pub fn f2_guarded(x: f64, x_min: f64) -> Result<f64> {
    if x.is_nan() || x.abs() < x_min {
        return Err(Error::DegenerateGeometry { argument: x, x_min });
    }
    let u = 2.0 * x;
    Ok(u.cos() / u)
}

/// Placement of the atom pair relative to the mirror, plus which coherent
/// environment-induced terms are allowed into the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    /// ω times the distance from the mirror to the nearer atom.
    pub omega_y: f64,
    /// ω times the interatomic separation.
    pub omega_l: f64,
    /// Keep the field-mediated atom-atom coupling `d`.
    pub include_atom_atom: bool,
    /// Keep the mirror-induced shift difference `delta`.
    pub include_atom_plate: bool,
}

impl GeometryParams {
    /// Geometry with both coherent terms switched on.
    pub fn new(omega_y: f64, omega_l: f64) -> Result<Self> {
        Self::with_toggles(omega_y, omega_l, true, true)
    }

    pub fn with_toggles(
        omega_y: f64,
        omega_l: f64,
        include_atom_atom: bool,
        include_atom_plate: bool,
    ) -> Result<Self> {
        let g = Self {
            omega_y,
            omega_l,
            include_atom_atom,
            include_atom_plate,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_y.is_finite() && self.omega_y > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "omega_y must be positive and finite, got {}",
                self.omega_y
            )));
        }
        if !(self.omega_l.is_finite() && self.omega_l > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "omega_L must be positive and finite, got {}",
                self.omega_l
            )));
        }
        Ok(())
    }
}

/// The five rates/shifts that parameterize the X-block master equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    /// Self-dissipation of the atom nearer the mirror.
    pub b1: f64,
    /// Self-dissipation of the farther atom.
    pub b2: f64,
    /// Cross-dissipation.
    pub b3: f64,
    /// Field-mediated interatomic coupling.
    pub d: f64,
    /// Difference of the two position-dependent level shifts.
    pub delta: f64,
}

impl Coefficients {
    /// Zero `d` and/or `delta` according to the toggles; dissipative terms are untouched.
    pub fn toggled(self, include_atom_atom: bool, include_atom_plate: bool) -> Self {
        Self {
            d: if include_atom_atom { self.d } else { 0.0 },
            delta: if include_atom_plate { self.delta } else { 0.0 },
            ..self
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.b1, self.b2, self.b3, self.d, self.delta]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Determinant of the 2×2 dissipator block `[[b1, b3], [b3, b2]]`.
    pub fn dissipator_determinant(&self) -> f64 {
        self.b1 * self.b2 - self.b3 * self.b3
    }
}

/// Coefficients for the geometry with no toggles applied.
pub fn compute_raw_coefficients(omega_y: f64, omega_l: f64) -> Result<Coefficients> {
    let half_l = 0.5 * omega_l;
    let image_cross = omega_y + half_l;
    let far = omega_y + omega_l;
    Ok(Coefficients {
        b1: 0.25 * (1.0 - f1(omega_y)),
        b2: 0.25 * (1.0 - f1(far)),
        b3: 0.25 * (f1(half_l) - f1(image_cross)),
        d: 0.25 * (f2(half_l)? - f2(image_cross)?),
        delta: 0.25 * (f2(far)? - f2(omega_y)?),
    })
}

/// Coefficients for `g`, with `d`/`delta` zeroed after evaluation when toggled off.
pub fn compute_coefficients(g: &GeometryParams) -> Result<Coefficients> {
    g.validate()?;
    Ok(compute_raw_coefficients(g.omega_y, g.omega_l)?
        .toggled(g.include_atom_atom, g.include_atom_plate))
}
