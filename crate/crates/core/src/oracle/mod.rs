//! Full 4×4 (16-dimensional Liouville space) reference evolution.
//!
//! The generator is assembled term by term from Pauli operators and the
//! Kossakowski blocks, with no use of the reduced X-block equations, and
//! propagated with a dense matrix exponential. It exists to cross-check
//! [`crate::dynamics`] and [`crate::entanglement`].
//!
//! Conventions: product basis `{|00⟩, |01⟩, |10⟩, |11⟩}` with atom 1 as the
//! most significant bit and `|1⟩` the excited level, so `σ₃ = diag(−1, 1)`
//! and `σ₁ − iσ₂` lowers. Density matrices are vectorized column-major,
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

mod expm;

pub use expm::expm;

use nalgebra::{Complex, ComplexField, Matrix2, Matrix4, SMatrix, SVector};

use crate::coefficients::Coefficients;
use crate::dynamics::XState;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type Matrix16 = SMatrix<C64, 16, 16>;

/// Trace tolerance for [`evolve_exact`].
pub const ORACLE_TRACE_TOLERANCE: f64 = 1e-8;

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Pauli matrix `σ_i`, `i ∈ {0, 1, 2, 3}` (0 is the identity).
pub fn pauli(i: usize) -> Matrix2<C64> {
    let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
    match i {
        0 => Matrix2::new(l, o, o, l),
        1 => Matrix2::new(o, l, l, o),
        2 => Matrix2::new(o, c(0.0, 1.0), c(0.0, -1.0), o),
        3 => Matrix2::new(c(-1.0, 0.0), o, o, l),
        _ => panic!("no Pauli matrix with index {i}"),
    }
}

/// `σ_i` acting on atom `atom` (1 or 2) of the pair.
pub fn pauli_on(atom: usize, i: usize) -> Matrix4<C64> {
    match atom {
        1 => pauli(i).kronecker(&pauli(0)),
        2 => pauli(0).kronecker(&pauli(i)),
        _ => panic!("atom index must be 1 or 2, got {atom}"),
    }
}

/// Columns are |G⟩, |A⟩, |S⟩, |E⟩ written in the product basis.
fn coupled_basis() -> Matrix4<C64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = Matrix4::zeros();
    u[(0, 0)] = c(1.0, 0.0);
    // |A⟩ = (|10⟩ − |01⟩)/√2
    u[(2, 1)] = c(h, 0.0);
    u[(1, 1)] = c(-h, 0.0);
    // |S⟩ = (|10⟩ + |01⟩)/√2
    u[(2, 2)] = c(h, 0.0);
    u[(1, 2)] = c(h, 0.0);
    u[(3, 3)] = c(1.0, 0.0);
    u
}

/// Product-basis positions outside the X pattern.
const NON_X: [(usize, usize); 8] = [
    (0, 1),
    (0, 2),
    (1, 0),
    (2, 0),
    (1, 3),
    (2, 3),
    (3, 1),
    (3, 2),
];

/// Two-atom density matrix in the product basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix4(pub Matrix4<C64>);

impl DensityMatrix4 {
    /// Projector onto a (not necessarily normalized) pure state.
    pub fn pure(amplitudes: [C64; 4]) -> Self {
        let v = nalgebra::Vector4::from(amplitudes);
        let v = v.unscale(v.norm());
        Self(v * v.adjoint())
    }

    /// Reconstruct the full matrix of an X state given in the coupled basis.
    pub fn from_x_state(s: &XState) -> Self {
        let as_ = c(s.c_as_re, s.c_as_im);
        let ge = c(s.c_ge_re, s.c_ge_im);
        let mut coupled = Matrix4::zeros();
        // order G, A, S, E
        coupled[(0, 0)] = c(s.p_gg, 0.0);
        coupled[(1, 1)] = c(s.p_aa, 0.0);
        coupled[(2, 2)] = c(s.p_ss, 0.0);
        coupled[(3, 3)] = c(s.p_ee, 0.0);
        coupled[(1, 2)] = as_;
        coupled[(2, 1)] = as_.conj();
        coupled[(0, 3)] = ge;
        coupled[(3, 0)] = ge.conj();
        let u = coupled_basis();
        Self(u * coupled * u.adjoint())
    }

    /// Project onto the X block in the coupled basis.
    pub fn to_x_state(&self) -> XState {
        let u = coupled_basis();
        let m = u.adjoint() * self.0 * u;
        XState {
            p_gg: m[(0, 0)].re,
            p_ee: m[(3, 3)].re,
            p_aa: m[(1, 1)].re,
            p_ss: m[(2, 2)].re,
            c_as_re: m[(1, 2)].re,
            c_as_im: m[(1, 2)].im,
            c_ge_re: m[(0, 3)].re,
            c_ge_im: m[(0, 3)].im,
        }
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest modulus among the product-basis entries outside the X pattern.
    pub fn non_x_max(&self) -> f64 {
        NON_X
            .iter()
            .map(|&(i, j)| self.0[(i, j)].norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).camax()
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let herm = (self.0 + self.0.adjoint()).unscale(2.0);
        let ev = herm.symmetric_eigen().eigenvalues;
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        let trace = (self.trace() - c(1.0, 0.0)).norm();
        let min = self.min_eigenvalue();
        if herm > 1e-12 || trace > 1e-12 || min < -1e-9 {
            return Err(Error::InvalidState(format!(
                "hermiticity {herm:e}, trace error {trace:e}, min eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    fn vectorize(&self) -> SVector<C64, 16> {
        // nalgebra storage is column-major, matching vec(ρ)
        SVector::<C64, 16>::from_column_slice(self.0.as_slice())
    }

    fn from_vector(v: &SVector<C64, 16>) -> Self {
        Self(Matrix4::from_column_slice(v.as_slice()))
    }
}

/// Superoperator of the two-atom master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian(pub Matrix16);

/// `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.
fn sandwich(a: &Matrix4<C64>, b: &Matrix4<C64>) -> Matrix16 {
    b.transpose().kronecker(a)
}

/// Kossakowski block `C_ij = B (δ_ij − i ε_ij3 − δ_i3 δ_j3)` for `i, j ∈ {1, 2, 3}`.
fn kossakowski_block(strength: f64) -> [[C64; 3]; 3] {
    let mut m = [[c(0.0, 0.0); 3]; 3];
    m[0][0] = c(strength, 0.0);
    m[1][1] = c(strength, 0.0);
    // ε_123 = 1, ε_213 = −1
    m[0][1] = c(0.0, -strength);
    m[1][0] = c(0.0, strength);
    m
}

/// The effective Hamiltonian: `(Δ/2)(σ₃⁽²⁾ − σ₃⁽¹⁾) − D(σ₁⊗σ₁ + σ₂⊗σ₂)`.
///
/// The common Lamb shift is left out so the X-block equations match the
/// reduced dynamics exactly.
pub fn effective_hamiltonian(c_: &Coefficients) -> Matrix4<C64> {
    let split = (pauli_on(2, 3) - pauli_on(1, 3)) * c(0.5 * c_.delta, 0.0);
    let mut exchange = Matrix4::zeros();
    for i in 1..=2 {
        exchange += pauli(i).kronecker(&pauli(i));
    }
    split - exchange * c(c_.d, 0.0)
}

/// Assemble the 16×16 generator for the given coefficients.
pub fn build_liouvillian(coeffs: &Coefficients) -> Liouvillian {
    let id = Matrix4::<C64>::identity();
    let h = effective_hamiltonian(coeffs);
    let mut l = (sandwich(&h, &id) - sandwich(&id, &h)) * c(0.0, -1.0);

    let strengths = [[coeffs.b1, coeffs.b3], [coeffs.b3, coeffs.b2]];
    for (alpha, row) in strengths.iter().enumerate() {
        for (beta, &gamma) in row.iter().enumerate() {
            let block = kossakowski_block(gamma);
            for (i, block_row) in block.iter().enumerate() {
                for (j, &k) in block_row.iter().enumerate() {
                    if k == c(0.0, 0.0) {
                        continue;
                    }
                    let si = pauli_on(alpha + 1, i + 1);
                    let sj = pauli_on(beta + 1, j + 1);
                    let sisj = si * sj;
                    // ½ C [2 σ_j ρ σ_i − σ_i σ_j ρ − ρ σ_i σ_j]
                    let term = sandwich(&sj, &si) * c(2.0, 0.0)
                        - sandwich(&sisj, &id)
                        - sandwich(&id, &sisj);
                    l += term * (k * c(0.5, 0.0));
                }
            }
        }
    }
    Liouvillian(l)
}

impl Liouvillian {
    /// `max |vec(I)ᵀ L|`: zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for col in 0..16 {
            let mut s = c(0.0, 0.0);
            for k in 0..4 {
                s += self.0[(k * 4 + k, col)];
            }
            worst = worst.max(s.norm());
        }
        worst
    }

    /// `exp(L·tau)`.
    pub fn propagator(&self, tau: f64) -> Matrix16 {
        expm(&(self.0 * c(tau, 0.0)))
    }
}

/// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` of a superoperator.
pub fn choi_matrix(superop: &Matrix16) -> Matrix16 {
    let mut choi = Matrix16::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let mut e = Matrix4::<C64>::zeros();
            e[(i, j)] = c(1.0, 0.0);
            let image = superop * DensityMatrix4(e).vectorize();
            let image = Matrix4::from_column_slice(image.as_slice());
            for a in 0..4 {
                for b in 0..4 {
                    choi[(i * 4 + a, j * 4 + b)] = image[(a, b)];
                }
            }
        }
    }
    choi
}

/// Smallest eigenvalue of the Choi matrix of `exp(L·tau)`.
pub fn choi_min_eigenvalue(liou: &Liouvillian, tau: f64) -> f64 {
    let choi = choi_matrix(&liou.propagator(tau));
    let herm = (choi + choi.adjoint()).unscale(2.0);
    herm.symmetric_eigen().eigenvalues.min()
}

/// Apply `exp(L·tau)` to `rho0`.
pub fn evolve_exact(rho0: &DensityMatrix4, liou: &Liouvillian, tau: f64) -> Result<DensityMatrix4> {
    if tau == 0.0 {
        return Ok(*rho0);
    }
    apply(&liou.propagator(tau), rho0)
}

/// Apply a precomputed propagator, re-Hermitizing and checking the trace.
pub fn apply(propagator: &Matrix16, rho0: &DensityMatrix4) -> Result<DensityMatrix4> {
    let out = DensityMatrix4::from_vector(&(propagator * rho0.vectorize())).0;
    let out = DensityMatrix4((out + out.adjoint()).unscale(2.0));
    let drift = (out.trace() - rho0.trace()).norm();
    if drift > ORACLE_TRACE_TOLERANCE {
        return Err(Error::OracleDivergence { drift });
    }
    Ok(out)
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)` of an arbitrary two-qubit state.
///
/// The `λ` are the singular values of `√ρ·√ρ̃` with `ρ̃ = (σ₂⊗σ₂) ρ* (σ₂⊗σ₂)`,
/// which avoids square roots of tiny eigenvalues of `ρ ρ̃`.
pub fn wootters_concurrence(rho: &DensityMatrix4) -> f64 {
    let herm = (rho.0 + rho.0.adjoint()).unscale(2.0);
    let eig = herm.symmetric_eigen();
    let roots = eig
        .eigenvalues
        .map(|e| Complex::from_real(e.max(0.0).sqrt()));
    let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.adjoint();
    let yy = pauli(2).kronecker(&pauli(2));
    let sqrt_tilde = yy * sqrt_rho.conjugate() * yy;
    let mut sv: Vec<f64> = (sqrt_rho * sqrt_tilde)
        .singular_values()
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    (sv[0] - sv[1] - sv[2] - sv[3]).max(0.0)
}
