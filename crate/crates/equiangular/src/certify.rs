//! Equiangularity certification and canonical pair forms.
//!
//! Three equivalent tests back one verdict: all principal cosines between the
//! ranges coincide, `PQP = α²P` and `QPQ = α²Q` hold within tolerance, and
//! the pair admits the canonical block form
//!
//! ```text
//! Q' = [ I_d 0 ]      P' = [ α²I  B ]       BB† = (α²−α⁴)I
//!      [ 0   0 ]           [ B†   D ]       B†B = α²D,  D² = (1−α²)D
//! ```
//!
//! The residual route is what [`certify_pair`] decides on; principal cosines
//! are reported alongside. A pair is *strongly* equiangular when it and its
//! complements are equiangular with `0 < α < 1`, which forces both ranks to
//! be half of the ambient dimension and `D = (1−α²)I`.

use nalgebra::{try_convert, ComplexField, DMatrix, RealField};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::max_abs_diff;
use crate::projection::Projection;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("pair is not equiangular: residual {residual:.3e} exceeds tol {tol:.3e}")]
    NotEquiangular { residual: f64, tol: f64 },
}

/// Certification outcome for a pair of projections.
#[derive(Debug, Clone)]
pub struct EquiangularReport<R: RealField> {
    pub is_equiangular: bool,
    pub is_strong: bool,
    /// Cosine of the common dihedral angle (meaningful when equiangular).
    pub alpha: R,
    /// `arccos(alpha)`, in radians.
    pub theta: R,
    /// Singular values of the overlap of orthonormal range bases, descending.
    pub principal_cosines: Vec<R>,
    pub rank_p: usize,
    pub rank_q: usize,
    /// Max residual of the `PQP`/`QPQ` scalar-action test.
    pub residual: R,
}

fn check_dims<T: ComplexField>(
    p: &Projection<T>,
    q: &Projection<T>,
) -> Result<(), CertifyError> {
    if p.dim() != q.dim() {
        return Err(CertifyError::DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    Ok(())
}

/// Orthonormal basis of the range: eigenvectors of `P` with eigenvalue > 1/2.
///
/// The spectrum of a (numerically) idempotent Hermitian matrix clusters at
/// {0, 1}, so 1/2 is the natural cut.
fn range_basis<T: ComplexField>(p: &Projection<T>) -> DMatrix<T> {
    let eig = p.matrix().clone().symmetric_eigen();
    let half = nalgebra::convert::<f64, T::RealField>(0.5);
    let keep: Vec<usize> = (0..p.dim())
        .filter(|&i| eig.eigenvalues[i] > half)
        .collect();
    let mut basis = DMatrix::<T>::zeros(p.dim(), keep.len());
    for (col, &i) in keep.iter().enumerate() {
        basis.set_column(col, &eig.eigenvectors.column(i));
    }
    basis
}

/// Principal cosines between the ranges of `p` and `q`: the singular values
/// of `X†Y` for orthonormal bases `X`, `Y`, sorted descending in `[0, 1]`.
pub fn principal_cosines<T: ComplexField>(
    p: &Projection<T>,
    q: &Projection<T>,
) -> Result<Vec<T::RealField>, CertifyError> {
    check_dims(p, q)?;
    let x = range_basis(p);
    let y = range_basis(q);
    if x.ncols() == 0 || y.ncols() == 0 {
        return Ok(Vec::new());
    }
    let overlap = x.adjoint() * y;
    let svd = overlap.svd(false, false);
    let mut cosines: Vec<T::RealField> = svd
        .singular_values
        .iter()
        .map(|s| s.clone().min(T::RealField::one()).max(T::RealField::zero()))
        .collect();
    cosines.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    Ok(cosines)
}

/// Full certification: equiangularity of `(P, Q)` and of the complements.
///
/// `α²` is estimated as `tr(PQP)/rank(P)` (the least-squares scalar fit) and
/// the verdict is the residual test `‖PQP − α²P‖ ≤ tol ∧ ‖QPQ − α²Q‖ ≤ tol`
/// in the max-abs norm. `α = 0` (orthogonal ranges) counts as equiangular but
/// never strong; strength additionally requires the complement pair to pass
/// and both ranks to equal half the ambient dimension.
pub fn certify_pair<T: ComplexField>(
    p: &Projection<T>,
    q: &Projection<T>,
    tol: T::RealField,
) -> Result<EquiangularReport<T::RealField>, CertifyError> {
    check_dims(p, q)?;
    let (alpha2, residual) = scalar_action_residual(p, q);
    let is_equiangular = residual <= tol;

    let (comp_alpha2, comp_residual) = scalar_action_residual(&p.complement(), &q.complement());
    let _ = comp_alpha2;
    let n = p.dim();
    let alpha = alpha2.clone().max(T::RealField::zero()).sqrt();
    let is_strong = is_equiangular
        && comp_residual <= tol
        && alpha > tol.clone()
        && alpha < T::RealField::one() - tol.clone()
        && p.rank() == q.rank()
        && 2 * p.rank() == n;

    let principal = principal_cosines(p, q)?;
    let one = T::RealField::one();
    Ok(EquiangularReport {
        is_equiangular,
        is_strong,
        alpha: alpha.clone().min(one),
        theta: alpha.min(T::RealField::one()).acos(),
        principal_cosines: principal,
        rank_p: p.rank(),
        rank_q: q.rank(),
        residual: residual.max(comp_residual),
    })
}

/// Residual of the scalar-action test for one orientation pair.
fn scalar_action_residual<T: ComplexField>(
    p: &Projection<T>,
    q: &Projection<T>,
) -> (T::RealField, T::RealField) {
    let pm = p.matrix();
    let qm = q.matrix();
    let pqp = pm * qm * pm;
    let alpha2 = if p.rank() == 0 {
        T::RealField::zero()
    } else {
        pqp.trace().real() / nalgebra::convert::<f64, T::RealField>(p.rank() as f64)
    };
    let scaled_p = pm.map(|x| x * T::from_real(alpha2.clone()));
    let r1 = max_abs_diff(&pqp, &scaled_p);
    let qpq = qm * pm * qm;
    let scaled_q = qm.map(|x| x * T::from_real(alpha2.clone()));
    let r2 = max_abs_diff(&qpq, &scaled_q);
    (alpha2, r1.max(r2))
}

/// Equiangularity certificate; see [`certify_pair`] for the criteria.
pub fn is_equiangular<T: ComplexField>(
    p: &Projection<T>,
    q: &Projection<T>,
    tol: T::RealField,
) -> Result<EquiangularReport<T::RealField>, CertifyError> {
    certify_pair(p, q, tol)
}

/// Strong-equiangularity certificate; see [`certify_pair`] for the criteria.
pub fn is_strongly_equiangular<T: ComplexField>(
    p: &Projection<T>,
    q: &Projection<T>,
    tol: T::RealField,
) -> Result<EquiangularReport<T::RealField>, CertifyError> {
    certify_pair(p, q, tol)
}

/// Canonical form of an equiangular pair in the eigenbasis of `Q`.
#[derive(Debug, Clone)]
pub struct CanonicalPair<T: ComplexField> {
    /// Unitary with `W†QW = diag(I_d, 0)`, range eigenvectors first.
    pub w: DMatrix<T>,
    pub p_canonical: DMatrix<T>,
    pub q_canonical: DMatrix<T>,
    pub alpha: T::RealField,
    /// Max residual over the three block equations (plus `D = (1−α²)I` when strong).
    pub block_residual: T::RealField,
}

/// Transforms an equiangular pair to the canonical block form and verifies
/// the block equations. `W` is built from an eigenbasis of `Q`, range first,
/// kernel second, ties broken by ascending original index.
pub fn canonical_pair_form<T: ComplexField>(
    p: &Projection<T>,
    q: &Projection<T>,
) -> Result<CanonicalPair<T>, CertifyError> {
    let tol = p.tol();
    let report = certify_pair(p, q, tol.clone())?;
    if !report.is_equiangular {
        return Err(CertifyError::NotEquiangular {
            residual: try_convert(report.residual.clone()).unwrap_or(f64::NAN),
            tol: try_convert(tol).unwrap_or(f64::NAN),
        });
    }
    let n = q.dim();
    let d = q.rank();
    let eig = q.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    // Descending eigenvalue, original index breaks ties; sort is stable.
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("finite eigenvalues")
    });
    let mut w = DMatrix::<T>::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        w.set_column(col, &eig.eigenvectors.column(i));
    }
    let p_c = w.adjoint() * p.matrix() * &w;
    let q_c = w.adjoint() * q.matrix() * &w;

    let alpha = report.alpha.clone();
    let alpha2 = alpha.clone() * alpha.clone();
    let k = n - d;
    let b = p_c.view((0, d), (d, k)).into_owned();
    let dm = p_c.view((d, d), (k, k)).into_owned();

    let mut residual = T::RealField::zero();
    // Top-left block is α²I.
    let top = p_c.view((0, 0), (d, d)).into_owned();
    residual = residual.max(max_abs_diff(
        &top,
        &DMatrix::<T>::identity(d, d).map(|x| x * T::from_real(alpha2.clone())),
    ));
    // BB† = (α²−α⁴)I.
    let bbt = &b * b.adjoint();
    let scale = alpha2.clone() - alpha2.clone() * alpha2.clone();
    residual = residual.max(max_abs_diff(
        &bbt,
        &DMatrix::<T>::identity(d, d).map(|x| x * T::from_real(scale.clone())),
    ));
    // B†B = α²D.
    let btb = b.adjoint() * &b;
    residual = residual.max(max_abs_diff(
        &btb,
        &dm.map(|x| x * T::from_real(alpha2.clone())),
    ));
    // D² = (1−α²)D.
    let d2 = &dm * &dm;
    let one_m = T::RealField::one() - alpha2.clone();
    residual = residual.max(max_abs_diff(&d2, &dm.map(|x| x * T::from_real(one_m.clone()))));
    if report.is_strong {
        residual = residual.max(max_abs_diff(
            &dm,
            &DMatrix::<T>::identity(k, k).map(|x| x * T::from_real(one_m.clone())),
        ));
    }
    // Q lands on diag(I_d, 0) exactly up to eigensolver precision.
    residual = residual.max(max_abs_diff(&q_c, Projection::<T>::base_rect(n, d).matrix()));

    Ok(CanonicalPair {
        w,
        p_canonical: p_c,
        q_canonical: q_c,
        alpha,
        block_residual: residual,
    })
}

impl<T: ComplexField> Projection<T> {
    /// `diag(I_d, 0)` on an `n`-dimensional space (any rank, not just n/2).
    pub fn base_rect(n: usize, d: usize) -> Self {
        let mut m = DMatrix::<T>::zeros(n, n);
        for i in 0..d {
            m[(i, i)] = T::one();
        }
        Self::with_default_tol(m).expect("diagonal 0/1 matrix is a projection")
    }
}

/// Direct sum of two pairs; equiangular iff the two `α` agree, strong when
/// both inputs are strong with equal `α`.
pub fn pair_direct_sum<T: ComplexField>(
    pair1: (&Projection<T>, &Projection<T>),
    pair2: (&Projection<T>, &Projection<T>),
    tol: T::RealField,
) -> ((Projection<T>, Projection<T>), EquiangularReport<T::RealField>) {
    let p = direct_sum_matrix(pair1.0.matrix(), pair2.0.matrix());
    let q = direct_sum_matrix(pair1.1.matrix(), pair2.1.matrix());
    let p = Projection::new(p, tol.clone()).expect("direct sum of projections");
    let q = Projection::new(q, tol.clone()).expect("direct sum of projections");
    let report = certify_pair(&p, &q, tol).expect("same ambient dimension");
    ((p, q), report)
}

/// Tensor product of two pairs; always equiangular with `α = α₁α₂`, never
/// strong (the rank is a quarter of the ambient dimension).
pub fn pair_tensor<T: ComplexField>(
    pair1: (&Projection<T>, &Projection<T>),
    pair2: (&Projection<T>, &Projection<T>),
    tol: T::RealField,
) -> ((Projection<T>, Projection<T>), EquiangularReport<T::RealField>) {
    let p = pair1.0.matrix().kronecker(pair2.0.matrix());
    let q = pair1.1.matrix().kronecker(pair2.1.matrix());
    let p = Projection::new(p, tol.clone()).expect("tensor of projections");
    let q = Projection::new(q, tol.clone()).expect("tensor of projections");
    let report = certify_pair(&p, &q, tol).expect("same ambient dimension");
    ((p, q), report)
}

fn direct_sum_matrix<T: ComplexField>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = DMatrix::<T>::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// Distance of `max |cos_i - alpha|` over the principal cosines; a second,
/// independent route to the equiangularity verdict.
pub fn cosine_spread<R: RealField>(report: &EquiangularReport<R>) -> R {
    report
        .principal_cosines
        .iter()
        .map(|c| (c.clone() - report.alpha.clone()).abs())
        .fold(R::zero(), |acc, v| acc.max(v))
}
