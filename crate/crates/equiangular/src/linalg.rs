//! Small dense-matrix helpers shared across the crate.
//!
//! The project-wide residual norm is the maximum absolute entry; every
//! tolerance in the crate is an absolute bound in that norm.

use nalgebra::{ComplexField, DMatrix, RealField};
use num_traits::Zero;

/// Maximum entry modulus.
pub fn max_abs<T: ComplexField>(m: &DMatrix<T>) -> T::RealField {
    m.iter()
        .map(|z| z.clone().modulus())
        .fold(T::RealField::zero(), |acc, v| acc.max(v))
}

/// Maximum entry modulus of `a - b`.
pub fn max_abs_diff<T: ComplexField>(a: &DMatrix<T>, b: &DMatrix<T>) -> T::RealField {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in residual");
    max_abs(&(a - b))
}

/// Deviation from Hermitian symmetry, `max |M - M†|`.
pub fn hermitian_residual<T: ComplexField>(m: &DMatrix<T>) -> T::RealField {
    max_abs(&(m - m.adjoint()))
}

/// Least-squares scale `s ≥ 0` and residual of the fit `M M† ≈ s² I`.
///
/// `s²` is estimated as `tr(M M†)/d`, the trace fit; the returned residual is
/// `max |M M† − s² I|`. A matrix is unitary up to scale `s` when the residual
/// is within tolerance.
pub fn scaled_unitary_fit<T: ComplexField>(m: &DMatrix<T>) -> (T::RealField, T::RealField) {
    let d = m.nrows();
    let gram = m * m.adjoint();
    let s2 = gram.trace().real() / nalgebra::convert::<f64, T::RealField>(d as f64);
    let target = DMatrix::<T>::identity(d, d) * T::from_real(s2.clone());
    let residual = max_abs_diff(&gram, &target);
    (s2.max(T::RealField::zero()).sqrt(), residual)
}

/// `max |M M† − I|`.
pub fn unitary_residual<T: ComplexField>(m: &DMatrix<T>) -> T::RealField {
    let d = m.nrows();
    max_abs_diff(&(m * m.adjoint()), &DMatrix::<T>::identity(d, d))
}

/// Assembles a 2×2 block matrix `[a b; c d]` of equally sized square blocks.
pub fn block2x2<T: ComplexField>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    d: &DMatrix<T>,
) -> DMatrix<T> {
    let n = a.nrows();
    let mut out = DMatrix::<T>::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(c);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}
