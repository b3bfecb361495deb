//! Matrix exponential by scaling and squaring with a fixed degree-13 Padé
//! approximant (Higham 2005 coefficients).

use nalgebra::{Complex, ComplexField, Const, DimMin, SMatrix, ToTypenum};

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled degree-13 approximant is accurate to unit roundoff.
const THETA13: f64 = 5.371_920_351_148_152;

fn norm1<const N: usize>(a: &SMatrix<Complex<f64>, N, N>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn expm<const N: usize>(a: &SMatrix<Complex<f64>, N, N>) -> SMatrix<Complex<f64>, N, N>
where
    Const<N>: ToTypenum + DimMin<Const<N>, Output = Const<N>>,
{
    let norm = norm1(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.unscale(2f64.powi(squarings));

    let id = SMatrix::<Complex<f64>, N, N>::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let b = |k: usize| Complex::from_real(PADE13[k]);

    let u_inner = a6 * (a6 * b(13) + a4 * b(11) + a2 * b(9));
    let u = a * (u_inner + a6 * b(7) + a4 * b(5) + a2 * b(3) + id * b(1));
    let v =
        a6 * (a6 * b(12) + a4 * b(10) + a2 * b(8)) + a6 * b(6) + a4 * b(4) + a2 * b(2) + id * b(0);

    let p = v + u;
    let q = v - u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        r = r * r;
    }
    r
}
