//! Shared test support: an independent dense matrix exponential and random
//! matrix generators. The exponential is a plain scaling-and-squaring Taylor
//! series, deliberately separate from the closed-form `cos + sin·h` path it
//! is used to check.

use nalgebra::{Complex, DMatrix};
use rand::rngs::StdRng;
use rand::Rng;

/// Dense matrix exponential by scaling and squaring with a Taylor series.
pub fn expm_oracle(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.iter().map(|v| v.abs()).fold(0.0f64, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / 2.0f64.powi(squarings as i32);
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Random skew-symmetric matrix with entries in `(-scale, scale)`.
pub fn random_skew(n: usize, scale: f64, rng: &mut StdRng) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(-scale..scale);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// Random skew matrix rescaled to the given spectral norm bound.
pub fn random_skew_bounded(n: usize, bound: f64, rng: &mut StdRng) -> DMatrix<f64> {
    let m = random_skew(n, 1.0, rng);
    let spectral = m.clone().svd(false, false).singular_values[0];
    m * (bound / spectral.max(1e-12)) * rng.random_range(0.1..1.0)
}

/// Haar-ish random unitary via QR of a complex Gaussian-ish matrix.
pub fn random_unitary(n: usize, rng: &mut StdRng) -> DMatrix<Complex<f64>> {
    let g = DMatrix::<Complex<f64>>::from_fn(n, n, |_, _| {
        Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the phase so the diagonal of R is positive, making Q unique.
    for i in 0..n {
        let d = r[(i, i)];
        if d.norm() > 1e-12 {
            let phase = d / d.norm();
            for row in 0..n {
                q[(row, i)] *= phase;
            }
        }
    }
    q
}

/// Max absolute entry of the difference.
pub fn dist(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}
