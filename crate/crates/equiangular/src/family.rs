//! Audits of projection families: mutual equiangularity, gate-group closure,
//! SIC-POVM checks, continuous-family samplers, and the spin-binding demo.

use nalgebra::{Complex, ComplexField, DMatrix, RealField};
use thiserror::Error;

use crate::certify::{certify_pair, CertifyError, EquiangularReport};
use crate::linalg::{max_abs, max_abs_diff, scaled_unitary_fit};
use crate::octonion::Octonion;
use crate::projection::{graph_projection, Projection, ProjectionError};
use crate::synthesis::normalize_gate;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("invalid plane basis: {detail}")]
    InvalidBasis { detail: String },
    #[error("expected {expected} operators, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("cannot parse ring element: {detail}")]
    ParseError { detail: String },
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

/// Pairwise certification table for a family of projections.
#[derive(Debug, Clone)]
pub struct FamilyReport<R: RealField> {
    pub size: usize,
    /// `pairwise[i][j]` certifies `(P_i, P_j)`; symmetric in verdicts.
    pub pairwise: Vec<Vec<EquiangularReport<R>>>,
    pub mutually_equiangular: bool,
    pub mutually_strong: bool,
    /// Off-diagonal α values, deduplicated within tolerance.
    pub distinct_alphas: Vec<R>,
}

/// Certifies every pair of the family.
pub fn family_audit<T: ComplexField>(
    projections: &[Projection<T>],
    tol: T::RealField,
) -> Result<FamilyReport<T::RealField>, FamilyError> {
    let n = projections.len();
    let mut pairwise: Vec<Vec<EquiangularReport<T::RealField>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(certify_pair(&projections[i], &projections[j], tol.clone())?);
        }
        pairwise.push(row);
    }
    let mut mutually_equiangular = true;
    let mut mutually_strong = n > 1;
    let mut distinct_alphas: Vec<T::RealField> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let r = &pairwise[i][j];
            mutually_equiangular &= r.is_equiangular;
            mutually_strong &= r.is_strong;
            if r.is_equiangular
                && !distinct_alphas
                    .iter()
                    .any(|a| (a.clone() - r.alpha.clone()).abs() <= tol.clone())
            {
                distinct_alphas.push(r.alpha.clone());
            }
        }
    }
    distinct_alphas.sort_by(|a, b| a.partial_cmp(b).expect("finite alphas"));
    Ok(FamilyReport {
        size: n,
        pairwise,
        mutually_equiangular,
        mutually_strong,
        distinct_alphas,
    })
}

/// S-membership audit for a diagonalizing family `{U_i}` with
/// `P_i = U_i P₀ U_i†`: every `U_i†U_j` must have both diagonal blocks
/// unitary up to scale.
#[derive(Debug, Clone)]
pub struct SMembershipReport {
    pub all_in_s: bool,
    /// Pairs `(i, j)` whose transition unitary falls outside S.
    pub violations: Vec<(usize, usize)>,
}

pub fn family_s_membership<T: ComplexField>(
    unitaries: &[DMatrix<T>],
    tol: T::RealField,
) -> SMembershipReport {
    let mut violations = Vec::new();
    for (i, u) in unitaries.iter().enumerate() {
        for (j, v) in unitaries.iter().enumerate() {
            if i == j {
                continue;
            }
            let w = u.adjoint() * v;
            let d = w.nrows() / 2;
            let b11 = w.view((0, 0), (d, d)).into_owned();
            let b22 = w.view((d, d), (d, d)).into_owned();
            let (_, r11) = scaled_unitary_fit(&b11);
            let (_, r22) = scaled_unitary_fit(&b22);
            if r11 > tol.clone() || r22 > tol.clone() {
                violations.push((i, j));
            }
        }
    }
    SMembershipReport {
        all_in_s: violations.is_empty(),
        violations,
    }
}

/// Result of a gate-group closure enumeration.
#[derive(Debug, Clone)]
pub struct ClosureResult {
    pub elements_found: usize,
    pub is_finite: bool,
    pub budget: usize,
    pub representative_matrices: Option<Vec<DMatrix<f64>>>,
}

fn validate_plane(m: &DMatrix<f64>, tol: f64) -> Result<f64, FamilyError> {
    let d = m.nrows();
    if d == 0 || m.ncols() < d {
        return Err(FamilyError::InvalidBasis {
            detail: format!("basis must be d x n with d <= n, got {}x{}", d, m.ncols()),
        });
    }
    let gram = m * m.transpose();
    let norm2 = gram[(0, 0)];
    if norm2 <= tol {
        return Err(FamilyError::InvalidBasis {
            detail: "zero row norm".into(),
        });
    }
    let expected = DMatrix::<f64>::identity(d, d) * norm2;
    let residual = max_abs_diff(&gram, &expected);
    if residual > tol * norm2.max(1.0) {
        return Err(FamilyError::InvalidBasis {
            detail: format!("rows not orthogonal with equal norms (residual {residual:.3e})"),
        });
    }
    Ok(norm2.sqrt())
}

/// Canonical sign: first entry of magnitude above `tol` made positive.
fn canonical_sign(mut m: DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    for v in m.iter() {
        if v.abs() > tol {
            if *v < 0.0 {
                m.neg_mut();
            }
            break;
        }
    }
    m
}

/// Breadth-first closure of the normalized transition gates
/// `(1/(α_i α_j)) M_i M_j†` of a plane family under multiplication.
///
/// Pairs whose product is not a unitary up to scale (intersecting or
/// orthogonal planes) contribute no generator. Elements are deduplicated up
/// to global sign; enumeration halts as finite once no new elements appear,
/// or gives up when `budget` is exceeded.
pub fn gate_group_closure(
    planes: &[DMatrix<f64>],
    base_index: usize,
    budget: usize,
    tol: f64,
) -> Result<ClosureResult, FamilyError> {
    if planes.is_empty() || base_index >= planes.len() {
        return Err(FamilyError::InvalidBasis {
            detail: format!(
                "base index {base_index} out of range for {} planes",
                planes.len()
            ),
        });
    }
    let d = planes[0].nrows();
    let mut norms = Vec::with_capacity(planes.len());
    for m in planes {
        if m.nrows() != d || m.ncols() != planes[0].ncols() {
            return Err(FamilyError::InvalidBasis {
                detail: "planes differ in shape".into(),
            });
        }
        norms.push(validate_plane(m, tol)?);
    }

    let mut generators: Vec<DMatrix<f64>> = Vec::new();
    for (i, mi) in planes.iter().enumerate() {
        for (j, mj) in planes.iter().enumerate() {
            if i == j {
                continue;
            }
            let product = mi * mj.transpose() / (norms[i] * norms[j]);
            let (scale, residual) = scaled_unitary_fit(&product);
            if residual <= tol && scale > tol {
                let g = canonical_sign(product / scale, tol);
                if !generators.iter().any(|e| max_abs_diff(e, &g) <= tol) {
                    generators.push(g);
                }
            }
        }
    }

    let mut elements: Vec<DMatrix<f64>> = vec![DMatrix::<f64>::identity(d, d)];
    let mut frontier = Vec::new();
    for g in &generators {
        if !elements.iter().any(|e| max_abs_diff(e, g) <= tol) {
            elements.push(g.clone());
            frontier.push(g.clone());
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for g in &generators {
                let h = canonical_sign(f * g, tol);
                if !elements.iter().any(|e| max_abs_diff(e, &h) <= tol) {
                    if elements.len() >= budget {
                        return Ok(ClosureResult {
                            elements_found: budget,
                            is_finite: false,
                            budget,
                            representative_matrices: None,
                        });
                    }
                    elements.push(h.clone());
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    Ok(ClosureResult {
        elements_found: elements.len(),
        is_finite: true,
        budget,
        representative_matrices: Some(elements),
    })
}

/// SIC-POVM verification report.
#[derive(Debug, Clone)]
pub struct SicReport {
    pub n: usize,
    pub operator_count: usize,
    /// Common scaling λ with `M_i = λ P_i`.
    pub lambda: f64,
    pub alpha2_measured: f64,
    pub alpha2_formula: f64,
    /// Residual of `Σ M_i = I`.
    pub sum_residual: f64,
    /// Worst residual of `M_i M_j M_i = s·M_i` over pairs.
    pub scalar_residual: f64,
    /// Spread of the pairwise α² estimates.
    pub alpha2_spread: f64,
    pub passes: bool,
}

/// Closed-form α² of a strongly equiangular IC-POVM on an n-dimensional
/// space: `(n² − 2) / (2(n² − 1))`.
pub fn sic_formula_alpha2(n: usize) -> f64 {
    let n2 = (n * n) as f64;
    (n2 - 2.0) / (2.0 * (n2 - 1.0))
}

/// Checks a family of `n²` scaled projections: resolution of the identity,
/// the scalar action `M_i M_j M_i ∝ M_i`, uniform pairwise α², and agreement
/// of the measured α² (after unscaling by λ²) with the closed form.
pub fn sic_check(
    operators: &[DMatrix<Complex<f64>>],
    n: usize,
    tol: f64,
) -> Result<SicReport, FamilyError> {
    if operators.len() != n * n {
        return Err(FamilyError::CountMismatch {
            expected: n * n,
            got: operators.len(),
        });
    }
    for m in operators {
        if m.nrows() != n || m.ncols() != n {
            return Err(FamilyError::CountMismatch {
                expected: n,
                got: m.nrows(),
            });
        }
    }

    // Scale λ: the nonzero eigenvalue of each scaled projection, estimated
    // from tr(M²)/tr(M) and checked via the scaled idempotence residual.
    let mut lambda = 0.0;
    let mut scaled_idem = 0.0f64;
    for m in operators {
        let tr = m.trace().re;
        let tr2 = (m * m).trace().re;
        let l = if tr.abs() > 1e-300 { tr2 / tr } else { 0.0 };
        lambda += l / operators.len() as f64;
        let residual = max_abs(&((m * m) - m.map(|x| x * Complex::new(l, 0.0))));
        scaled_idem = scaled_idem.max(residual);
    }

    let mut sum = DMatrix::<Complex<f64>>::zeros(n, n);
    for m in operators {
        sum += m;
    }
    let sum_residual = max_abs_diff(&sum, &DMatrix::<Complex<f64>>::identity(n, n));

    let mut alpha2_min = f64::INFINITY;
    let mut alpha2_max = f64::NEG_INFINITY;
    let mut scalar_residual = scaled_idem;
    for (i, mi) in operators.iter().enumerate() {
        for (j, mj) in operators.iter().enumerate() {
            if i == j {
                continue;
            }
            let mimjmi = mi * mj * mi;
            let s = mimjmi.trace().re / mi.trace().re;
            let residual = max_abs(&(&mimjmi - mi.map(|x| x * Complex::new(s, 0.0))));
            scalar_residual = scalar_residual.max(residual);
            let alpha2 = s / (lambda * lambda);
            alpha2_min = alpha2_min.min(alpha2);
            alpha2_max = alpha2_max.max(alpha2);
        }
    }
    let alpha2_measured = 0.5 * (alpha2_min + alpha2_max);
    let alpha2_formula = sic_formula_alpha2(n);
    let alpha2_spread = alpha2_max - alpha2_min;
    let passes = sum_residual <= tol
        && scalar_residual <= tol
        && alpha2_spread <= tol
        && (alpha2_measured - alpha2_formula).abs() <= tol;
    Ok(SicReport {
        n,
        operator_count: operators.len(),
        lambda,
        alpha2_measured,
        alpha2_formula,
        sum_residual,
        scalar_residual,
        alpha2_spread,
        passes,
    })
}

/// Ring selector for the continuous line families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingKind {
    Complex,
    Quaternion,
    Octonion,
}

impl RingKind {
    pub fn coefficient_count(self) -> usize {
        match self {
            RingKind::Complex => 2,
            RingKind::Quaternion => 4,
            RingKind::Octonion => 8,
        }
    }
}

/// Graph projection of a ring element given by its coefficients.
///
/// Complex and quaternion elements embed via their real 2×2 / 4×4
/// representations (projections on ℝ⁴ / ℝ⁸); octonions via the 8×8 matrix
/// (projections on ℝ¹⁶). Any two samples of the same kind form a strongly
/// equiangular (or equal) pair.
pub fn continuous_family_sample<T: RealField + Copy>(
    kind: RingKind,
    params: &[T],
) -> Result<Projection<T>, FamilyError> {
    if params.len() != kind.coefficient_count() {
        return Err(FamilyError::ParseError {
            detail: format!(
                "{:?} element needs {} coefficients, got {}",
                kind,
                kind.coefficient_count(),
                params.len()
            ),
        });
    }
    let mut coeffs = [T::zero(); 8];
    coeffs[..params.len()].copy_from_slice(params);
    let oct = Octonion::new(coeffs);
    let rep = match kind {
        RingKind::Complex => oct.complex_matrep().expect("complex coefficients"),
        RingKind::Quaternion => oct.quat_matrep().expect("quaternion coefficients"),
        RingKind::Octonion => oct.matrep(),
    };
    Ok(graph_projection(&rep))
}

/// Outcome of the closed-gate-algebra checks for the ℂ and ℍ families.
#[derive(Debug, Clone)]
pub struct GateAlgebraReport {
    pub kind: RingKind,
    /// Worst deviation of sampled products from the expected gate structure.
    pub structure_residual: f64,
    /// Worst deviation of `det` from +1 over sampled normalized gates.
    pub det_residual: f64,
    /// Worst residual of the constructive reachability check.
    pub reachability_residual: f64,
    pub passes: bool,
}

/// Verifies the gate algebra of the complex / quaternion line families:
/// products of normalized transition blocks stay inside the ring's unit
/// group (SO(2) / unit quaternions acting as SU(2)), and `normalize(1 + b)`
/// reaches any prescribed unit target, so a neighborhood of the identity is
/// covered.
pub fn gate_algebra_closure_check(kind: RingKind, samples: usize, seed: u64) -> GateAlgebraReport {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let dim = kind.coefficient_count();
    assert!(
        matches!(kind, RingKind::Complex | RingKind::Quaternion),
        "closed gate algebras exist for the complex and quaternion families"
    );

    let rep = |coeffs: &[f64]| -> DMatrix<f64> {
        let mut c = [0.0; 8];
        c[..coeffs.len()].copy_from_slice(coeffs);
        let oct = Octonion::new(c);
        match kind {
            RingKind::Complex => oct.complex_matrep().unwrap(),
            RingKind::Quaternion => oct.quat_matrep().unwrap(),
            RingKind::Octonion => unreachable!(),
        }
    };

    let mut structure_residual = 0.0f64;
    let mut det_residual = 0.0f64;
    for _ in 0..samples {
        // Product of two random transition factors (1 + A†B)(1 + C†D), normalized.
        let draw = |rng: &mut rand::rngs::StdRng| {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            rep(&v)
        };
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let (c, d_m) = (draw(&mut rng), draw(&mut rng));
        let ident = DMatrix::<f64>::identity(dim, dim);
        let product = (&ident + a.transpose() * b) * (&ident + c.transpose() * d_m);
        let (scale, fit) = scaled_unitary_fit(&product);
        if scale <= 1e-9 {
            continue;
        }
        structure_residual = structure_residual.max(fit / (scale * scale));
        let g = product / scale;
        det_residual = det_residual.max((g.determinant() - 1.0).abs());
        // The normalized gate is itself the representation of a unit ring
        // element: its first column reproduces the whole matrix.
        let col: Vec<f64> = g.column(0).iter().copied().collect();
        structure_residual = structure_residual.max(max_abs_diff(&rep(&col), &g));
    }

    // Constructive reachability: for a target unit element u, b = u − 1
    // gives normalize(1 + 1†·b) = u exactly (A = 1 is the unit line).
    let mut reachability_residual = 0.0f64;
    for _ in 0..samples {
        let mut u: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        for x in u.iter_mut() {
            *x /= norm;
        }
        let target = rep(&u);
        let mut b = u.clone();
        b[0] -= 1.0;
        let gate = DMatrix::<f64>::identity(dim, dim) + rep(&b);
        let (g, scale) = normalize_gate(&gate);
        if scale <= 1e-9 {
            continue;
        }
        reachability_residual = reachability_residual.max(max_abs_diff(&g, &target));
    }

    let passes =
        structure_residual <= 1e-10 && det_residual <= 1e-10 && reachability_residual <= 1e-10;
    GateAlgebraReport {
        kind,
        structure_residual,
        det_residual,
        reachability_residual,
        passes,
    }
}

/// The spin-binding construction on four spin-1/2 particles.
#[derive(Debug, Clone)]
pub struct SpinBindingReport {
    /// Binding projections for the pairings 12|34, 13|24, 14|23.
    pub pairings: Vec<Projection<f64>>,
    pub rank: usize,
    pub complement_rank: usize,
    /// Pairwise certification of the three binding projections.
    pub audits: Vec<(usize, usize, EquiangularReport<f64>)>,
    /// True when at least one pair fails equiangularity.
    pub non_equiangular_found: bool,
}

/// SWAP on qubits `(a, b)` of a 4-qubit register; qubit 0 is the most
/// significant bit of the basis index.
fn swap_matrix(a: usize, b: usize) -> DMatrix<f64> {
    let dim = 16;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let bit = |x: usize, q: usize| (x >> (3 - q)) & 1;
    for col in 0..dim {
        let (ba, bb) = (bit(col, a), bit(col, b));
        let mut row = col & !(1 << (3 - a)) & !(1 << (3 - b));
        row |= bb << (3 - a);
        row |= ba << (3 - b);
        m[(row, col)] = 1.0;
    }
    m
}

fn swap_2q() -> DMatrix<f64> {
    DMatrix::<f64>::from_row_slice(
        4,
        4,
        &[
            1., 0., 0., 0., //
            0., 0., 1., 0., //
            0., 1., 0., 0., //
            0., 0., 0., 1.,
        ],
    )
}

/// Singlet projector `(I − SWAP)/2` on two qubits (rank 1).
pub fn singlet_projector() -> DMatrix<f64> {
    (DMatrix::<f64>::identity(4, 4) - swap_2q()) / 2.0
}

/// Triplet projector `(I + SWAP)/2` on two qubits (rank 3).
pub fn triplet_projector() -> DMatrix<f64> {
    (DMatrix::<f64>::identity(4, 4) + swap_2q()) / 2.0
}

/// Binding projection `S⊗S + T⊗T = (I + SWAP_{ab}·SWAP_{cd})/2` for the
/// molecule pairing `(a,b)|(c,d)`; rank 10, complement rank 6.
pub fn binding_projection(a: usize, b: usize, c: usize, d: usize) -> Projection<f64> {
    let m = (DMatrix::<f64>::identity(16, 16) + swap_matrix(a, b) * swap_matrix(c, d)) / 2.0;
    Projection::with_default_tol(m).expect("binding operator is a projection")
}

/// Builds the three pairings of four spins into two molecules and audits
/// their pairwise equiangularity. The expected verdict is negative; the
/// principal cosine spectra are recorded in the reports. The three-pairing
/// construction is one minimal reading of the multi-molecule picture and is
/// labelled as an interpretation by downstream output.
pub fn spin_binding_projection() -> Result<SpinBindingReport, FamilyError> {
    let pairings = vec![
        binding_projection(0, 1, 2, 3),
        binding_projection(0, 2, 1, 3),
        binding_projection(0, 3, 1, 2),
    ];
    let rank = pairings[0].rank();
    let complement_rank = pairings[0].complement().rank();

    let tol = 1e-9;
    let mut audits = Vec::new();
    let mut non_equiangular_found = false;
    for i in 0..pairings.len() {
        for j in (i + 1)..pairings.len() {
            let report = certify_pair(&pairings[i], &pairings[j], tol)?;
            non_equiangular_found |= !report.is_equiangular;
            audits.push((i, j, report));
        }
    }
    Ok(SpinBindingReport {
        pairings,
        rank,
        complement_rank,
        audits,
        non_equiangular_found,
    })
}

/// Tensor-product route to the binding projection, cross-checking the
/// swap-operator closed form: `S⊗S + T⊗T` on the pairing 12|34.
pub fn binding_projection_tensor_route() -> DMatrix<f64> {
    let s = singlet_projector();
    let t = triplet_projector();
    s.kronecker(&s) + t.kronecker(&t)
}

/// The reference n = 2 family: tetrahedron states on the Bloch sphere,
/// scaled by λ = 1/2. Pairwise overlaps are 1/3, matching the closed form.
pub fn tetrahedron_sic() -> Vec<DMatrix<Complex<f64>>> {
    let s3 = 3.0f64.sqrt();
    let amp = 2.0f64.sqrt() / s3;
    let phase = 2.0 * std::f64::consts::PI / 3.0;
    let states: Vec<[Complex<f64>; 2]> = vec![
        [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        [Complex::new(1.0 / s3, 0.0), Complex::new(amp, 0.0)],
        [Complex::new(1.0 / s3, 0.0), Complex::from_polar(amp, phase)],
        [Complex::new(1.0 / s3, 0.0), Complex::from_polar(amp, -phase)],
    ];
    states
        .into_iter()
        .map(|s| {
            let v = nalgebra::DVector::from_row_slice(&s);
            let proj = &v * v.adjoint();
            proj * Complex::new(0.5, 0.0)
        })
        .collect()
}
