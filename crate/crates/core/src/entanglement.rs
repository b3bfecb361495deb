//! Concurrence of X states and the early-time series of `K₁` for the two
//! initial states of interest.

use crate::coefficients::Coefficients;
use crate::dynamics::XState;
use crate::error::{Error, Result};

/// Radicands below `-RADICAND_TRIPWIRE` are treated as a non-physical state.
pub const RADICAND_TRIPWIRE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceSample {
    pub k1: f64,
    pub k2: f64,
    pub concurrence: f64,
}

/// Concurrence `max(0, K₁, K₂)` of an X state in the coupled basis.
pub fn concurrence(s: &XState) -> Result<ConcurrenceSample> {
    // −(ρ_AS − ρ_SA)² = 4·Im(ρ_AS)²
    let r1 = (s.p_aa - s.p_ss).powi(2) + 4.0 * s.c_as_im * s.c_as_im;
    // (ρ_AS + ρ_SA)² = 4·Re(ρ_AS)²
    let r2 = (s.p_aa + s.p_ss).powi(2) - 4.0 * s.c_as_re * s.c_as_re;
    if r1 < -RADICAND_TRIPWIRE {
        return Err(Error::NonPhysicalState {
            which: "K1",
            radicand: r1,
        });
    }
    if r2 < -RADICAND_TRIPWIRE {
        return Err(Error::NonPhysicalState {
            which: "K2",
            radicand: r2,
        });
    }
    let k1 = r1.max(0.0).sqrt() - 2.0 * (s.p_gg * s.p_ee).max(0.0).sqrt();
    let k2 = 2.0 * s.c_ge_re.hypot(s.c_ge_im) - r2.max(0.0).sqrt();
    Ok(ConcurrenceSample {
        k1,
        k2,
        concurrence: k1.max(k2).max(0.0),
    })
}

/// Initial growth rate of `K₁` from |10⟩: `4·√(b3² + d²)`. Independent of `delta`.
pub fn early_slope_generation(c: &Coefficients) -> f64 {
    4.0 * c.b3.hypot(c.d)
}

/// Third-order expansion of `K₁(τ)` for the |10⟩ initial state.
pub fn series_k1_product10(c: &Coefficients, tau: f64) -> f64 {
    let r = c.b3.hypot(c.d);
    let (b1, b2, b3, d, delta) = (c.b1, c.b2, c.b3, c.d, c.delta);
    let cubic = 28.0 * b1 * b1 + 16.0 * b1 * b2 + 4.0 * b2 * b2 + 16.0 * b3 * b3
        - 16.0 * d * d
        - delta * delta;
    4.0 * r * tau - 4.0 * (3.0 * b1 + b2) * r * tau * tau + 2.0 / 3.0 * r * tau.powi(3) * cubic
}

/// Third-order expansion of `K₁(τ)` for the antisymmetric initial state.
pub fn series_k1_antisymmetric(c: &Coefficients, tau: f64) -> f64 {
    1.0 + series_k1_antisymmetric_change(c, tau)
}

/// `series_k1_antisymmetric(c, tau) − 1`, without the cancellation.
pub fn series_k1_antisymmetric_change(c: &Coefficients, tau: f64) -> f64 {
    let (b1, b2, b3, d, delta) = (c.b1, c.b2, c.b3, c.d, c.delta);
    let rate = b1 + b2 - 2.0 * b3;
    let cubic = b1.powi(3) + b2.powi(3) + b1 * b1 * (3.0 * b2 - 8.0 * b3) - 8.0 * b2 * b2 * b3
        + 12.0 * b2 * b3 * b3
        - 8.0 * b3.powi(3)
        + b1 * (3.0 * b2 * b2 - 8.0 * b2 * b3 + 12.0 * b3 * b3)
        - 4.0 * b2 * d * delta
        + 4.0 * b1 * d * delta
        + 2.0 * b3 * delta * delta;
    -2.0 * tau * rate + 2.0 * tau * tau * rate * rate - 4.0 / 3.0 * tau.powi(3) * cubic
}
