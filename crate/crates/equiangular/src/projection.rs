//! Validated orthogonal projections and the graph-of-line constructions.
//!
//! A [`Projection`] wraps a square Hermitian idempotent matrix together with
//! its rank (the rounded trace). The graph projection `P_a` projects onto the
//! linear space `{(x, Ax)}`:
//!
//! ```text
//! P_a = [ T⁻¹      T⁻¹A†     ]          T = I + A†A
//!       [ A T⁻¹    A T⁻¹ A†  ]
//! ```
//!
//! When `A A† = ‖A‖² I` (a unitary up to scale) the blocks collapse to
//! multiples of `I`, `A`, `A†` and `P_a = U_a P₀ U_a†` for the explicit
//! unitary built by [`graph_diagonalizer`]. Two such lines form a strongly
//! equiangular pair exactly when `I + A†B` is again a unitary up to scale
//! ([`line_pair_check`]), and the diagonal blocks of `U_a†U_b` returned by
//! [`transition_blocks`] are the gates a projection chain implements.

use nalgebra::{try_convert, ComplexField, DMatrix, RealField};
use num_traits::One;
use thiserror::Error;

use crate::linalg::{block2x2, hermitian_residual, max_abs, max_abs_diff, scaled_unitary_fit};
use crate::octonion::{Octonion, OctonionError};

/// Default absolute tolerance for certification-grade checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds tol {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("matrix is not idempotent: residual {residual:.3e} exceeds tol {tol:.3e}")]
    NotIdempotent { residual: f64, tol: f64 },
    #[error("trace {trace} is not within tol of an integer")]
    NonIntegerTrace { trace: f64 },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not a unitary up to scale: residual {residual:.3e}")]
    NotScaledUnitary { residual: f64 },
    #[error(transparent)]
    Octonion(#[from] OctonionError),
}

/// A square Hermitian idempotent matrix with its rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection<T: ComplexField> {
    matrix: DMatrix<T>,
    rank: usize,
    tol: T::RealField,
}

impl<T: ComplexField> Projection<T> {
    /// Validates `matrix` as a projection within absolute tolerance `tol`.
    pub fn new(matrix: DMatrix<T>, tol: T::RealField) -> Result<Self, ProjectionError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(ProjectionError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let tol_f = cvt_to_f64(tol.clone());
        let herm = hermitian_residual(&matrix);
        if herm > tol {
            return Err(ProjectionError::NotHermitian {
                residual: cvt_to_f64(herm),
                tol: tol_f,
            });
        }
        let idem = max_abs_diff(&(&matrix * &matrix), &matrix);
        if idem > tol {
            return Err(ProjectionError::NotIdempotent {
                residual: cvt_to_f64(idem),
                tol: tol_f,
            });
        }
        let trace = cvt_to_f64(matrix.trace().real());
        let rank = trace.round();
        if (trace - rank).abs() > tol_f || rank < 0.0 {
            return Err(ProjectionError::NonIntegerTrace { trace });
        }
        Ok(Self {
            matrix,
            rank: rank as usize,
            tol,
        })
    }

    /// Validates with [`DEFAULT_TOL`].
    pub fn with_default_tol(matrix: DMatrix<T>) -> Result<Self, ProjectionError> {
        Self::new(matrix, nalgebra::convert(DEFAULT_TOL))
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tol(&self) -> T::RealField {
        self.tol.clone()
    }

    /// The complementary projection `I − P`.
    pub fn complement(&self) -> Self {
        let n = self.dim();
        let matrix = DMatrix::<T>::identity(n, n) - &self.matrix;
        Self {
            matrix,
            rank: n - self.rank,
            tol: self.tol.clone(),
        }
    }

    /// `P₀ = diag(I_d, 0)` on a `2d`-dimensional space.
    pub fn base(d: usize) -> Self {
        let mut matrix = DMatrix::<T>::zeros(2 * d, 2 * d);
        for i in 0..d {
            matrix[(i, i)] = T::one();
        }
        Self {
            matrix,
            rank: d,
            tol: nalgebra::convert(DEFAULT_TOL),
        }
    }
}

fn cvt_to_f64<R: RealField>(x: R) -> f64 {
    try_convert(x).unwrap_or(f64::NAN)
}

/// Orthogonal projection onto the graph `{(x, Ax)}` of an arbitrary square `A`.
///
/// Always well defined: `T = I + A†A` is positive definite.
pub fn graph_projection<T: ComplexField>(a: &DMatrix<T>) -> Projection<T> {
    assert_eq!(a.nrows(), a.ncols(), "graph projection needs a square matrix");
    let d = a.nrows();
    let t = DMatrix::<T>::identity(d, d) + a.adjoint() * a;
    let t_inv = nalgebra::linalg::Cholesky::new(t)
        .expect("I + A†A is positive definite")
        .inverse();
    let top_left = t_inv.clone();
    let top_right = &t_inv * a.adjoint();
    let bottom_left = a * &t_inv;
    let bottom_right = a * &t_inv * a.adjoint();
    let p = block2x2(&top_left, &top_right, &bottom_left, &bottom_right);
    Projection::with_default_tol(p).expect("graph projection is a projection")
}

/// Graph projection of the octonion left-multiplication matrix.
pub fn octonion_graph_projection<T: RealField + Copy>(a: &Octonion<T>) -> Projection<T> {
    graph_projection(&a.matrep())
}

/// Returns the scale `s` with `A A† = s² I`, or `NotScaledUnitary`.
pub fn scaled_unitary_scale<T: ComplexField>(
    a: &DMatrix<T>,
    tol: T::RealField,
) -> Result<T::RealField, ProjectionError> {
    let (s, residual) = scaled_unitary_fit(a);
    if residual > tol {
        return Err(ProjectionError::NotScaledUnitary {
            residual: cvt_to_f64(residual),
        });
    }
    Ok(s)
}

/// The unitary `U_a` with `P_a = U_a P₀ U_a†`, for `A` a unitary up to scale:
///
/// ```text
/// U_a = (1+‖A‖²)^(-1/2) [ I  -A† ]
///                       [ A   I  ]
/// ```
pub fn graph_diagonalizer<T: ComplexField>(a: &DMatrix<T>) -> Result<DMatrix<T>, ProjectionError> {
    let tol: T::RealField = nalgebra::convert(DEFAULT_TOL);
    let s = scaled_unitary_scale(a, tol)?;
    let d = a.nrows();
    let denom = (T::RealField::one() + s.clone() * s).sqrt();
    let f = T::from_real(denom.recip());
    let i = DMatrix::<T>::identity(d, d);
    let u = block2x2(&i, &(-a.adjoint()), a, &i);
    Ok(u.map(|x| x * f.clone()))
}

/// Diagonal blocks `V₁₁`, `V₂₂` of `U_a† U_b`:
///
/// ```text
/// V₁₁ = (I + A†B) / ((1+‖A‖²)(1+‖B‖²))^(1/2)
/// V₂₂ = (I + AB†) / ((1+‖A‖²)(1+‖B‖²))^(1/2)
/// ```
pub fn transition_blocks<T: ComplexField>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
) -> Result<(DMatrix<T>, DMatrix<T>), ProjectionError> {
    let tol: T::RealField = nalgebra::convert(DEFAULT_TOL);
    let sa = scaled_unitary_scale(a, tol.clone())?;
    let sb = scaled_unitary_scale(b, tol)?;
    if a.nrows() != b.nrows() {
        return Err(ProjectionError::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    let d = a.nrows();
    let denom = ((T::RealField::one() + sa.clone() * sa) * (T::RealField::one() + sb.clone() * sb))
        .sqrt();
    let f = T::from_real(denom.recip());
    let i = DMatrix::<T>::identity(d, d);
    let v11 = (&i + a.adjoint() * b).map(|x| x * f.clone());
    let v22 = (&i + a * b.adjoint()).map(|x| x * f.clone());
    Ok((v11, v22))
}

/// Outcome of the `I + A†B` criterion for a pair of graph lines.
#[derive(Debug, Clone)]
pub struct LinePairCheck<R: RealField> {
    /// Whether `(I + A†B)(I + B†A) ∝ I` within tolerance.
    pub holds: bool,
    /// The dihedral cosine `α` of the pair, valid when `holds`.
    pub alpha: R,
    /// Residual of the proportionality fit.
    pub residual: R,
}

/// Lemma criterion: the graphs of scaled-unitary `A`, `B` form a strongly
/// equiangular pair iff `I + A†B` is a unitary up to some scale.
pub fn line_pair_check<T: ComplexField>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    tol: T::RealField,
) -> Result<LinePairCheck<T::RealField>, ProjectionError> {
    let sa = scaled_unitary_scale(a, tol.clone())?;
    let sb = scaled_unitary_scale(b, tol.clone())?;
    let d = a.nrows();
    let m = DMatrix::<T>::identity(d, d) + a.adjoint() * b;
    let (s, residual) = scaled_unitary_fit(&m);
    let denom = ((T::RealField::one() + sa.clone() * sa) * (T::RealField::one() + sb.clone() * sb))
        .sqrt();
    Ok(LinePairCheck {
        holds: residual <= tol,
        alpha: s / denom,
        residual,
    })
}

/// Checks the complement identity `I − P_a = P_{−a/‖a‖²}` for a nonzero
/// octonion, returning the max-abs residual.
///
/// The complement label is `−a/‖a‖² = −1/a*`: the graph of `B` is orthogonal
/// to the graph of `A` exactly when `A†B = −I`, and for a scaled unitary
/// `A = matrep(a)` that solves to `B = −A/‖a‖²`.
pub fn complement_identity_residual<T: RealField + Copy>(
    a: &Octonion<T>,
) -> Result<T, OctonionError> {
    let n2 = a.norm2();
    if n2 == T::zero() {
        return Err(OctonionError::ZeroOctonion);
    }
    let p = octonion_graph_projection(a);
    let comp_label = (-*a).scale(n2.recip());
    let q = octonion_graph_projection(&comp_label);
    Ok(max_abs_diff(p.complement().matrix(), q.matrix()))
}

/// True when the identity holds to the default tolerance.
pub fn complement_identity_check<T: RealField + Copy>(a: &Octonion<T>) -> Result<bool, OctonionError> {
    Ok(complement_identity_residual(a)? <= nalgebra::convert(DEFAULT_TOL))
}

/// Max-abs distance of `p` from the exact base projection `P₀`; mostly a test aid.
pub fn base_residual<T: ComplexField>(p: &Projection<T>) -> T::RealField {
    let d = p.dim() / 2;
    max_abs(&(p.matrix() - Projection::<T>::base(d).matrix()))
}
