//! Gate synthesis: 𝔰𝔬(8) generators, compilation to projection sequences,
//! and evaluation of sequences back to gates.
//!
//! The 28 products `h = E_i E_j` (`i < j`, `E_i = matrep(e_i)`, `E_0 = I`)
//! are skew-symmetric, square to `−I`, and span 𝔰𝔬(8). Because `h² = −I`,
//!
//! ```text
//! exp(t·h) = cos(t)·I + sin(t)·h = cos(t)·(I + tan(t)·h)
//! ```
//!
//! so each factor of a gate program `∏ exp(t_l·E_{k_l}E_{j_l})` is, up to a
//! positive scalar, exactly the transition factor `I + c·E_k E_j` produced by
//! a pair of projections onto octonion lines. [`compile`] maps each term to
//! the label pair `(tan(t)·e_k, e_j)`; the physical chain interleaves the
//! base projection `P₀` between pairs:
//!
//! ```text
//! P₀ P_{a₂ₖ} P_{a₂ₖ₋₁} P₀ ··· P₀ P_{a₂} P_{a₁} P₀
//! ```
//!
//! [`evaluate`] recovers the implemented gate two independent ways (dense
//! 16×16 projector products and the closed-form transition blocks) and
//! insists they agree.
//!
//! Sign conventions: a term with generator index `0` is stored with the zero
//! in the second slot (`E_0` commutes with everything), which makes the `+`
//! sign in `I + c·E_k E_j` uniform across all label pairs. Angles are first
//! reduced mod π into `(−π/2, π/2]`; each reduction by an odd multiple of π
//! flips the overall sign of the gate, and an odd total flip count is
//! emitted physically as four `(e₁, e₂)` label pairs, whose product is
//! exactly `−I` after normalization.

pub mod decompose;

use nalgebra::{try_convert, Complex, ComplexField, DMatrix, RealField};
use thiserror::Error;

use crate::certify::{certify_pair, CertifyError};
use crate::linalg::{max_abs, max_abs_diff, scaled_unitary_fit, unitary_residual};
use crate::octonion::Octonion;
use crate::projection::{graph_projection, Projection, ProjectionError, DEFAULT_TOL};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("generator indices must differ and lie in 0..8, got ({k}, {j})")]
    InvalidTerm { k: usize, j: usize },
    #[error("target is not special orthogonal: {detail}")]
    NotSpecialOrthogonal { detail: String },
    #[error("factor budget exhausted: residual {residual:.3e} after {terms} terms")]
    BudgetExceeded { residual: f64, terms: usize },
    #[error("projector chain annihilated: scale {scale:.3e} is not positive")]
    ScaleNotPositive { scale: f64 },
    #[error("dense and block evaluations disagree: residual {residual:.3e}")]
    MethodMismatch { residual: f64 },
    #[error("input is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },
    #[error("step angle disagrees with the dihedral lemma: dense {dense:.12}, closed form {expected:.12}")]
    AngleMismatch { dense: f64, expected: f64 },
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

/// One factor `exp(t · E_k E_j)` of a gate program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorTerm<T: RealField + Copy> {
    pub k: usize,
    pub j: usize,
    pub t: T,
}

impl<T: RealField + Copy> GeneratorTerm<T> {
    pub fn new(k: usize, j: usize, t: T) -> Result<Self, SynthesisError> {
        if k == j || k > 7 || j > 7 {
            return Err(SynthesisError::InvalidTerm { k, j });
        }
        Ok(Self { k, j, t })
    }
}

/// An ordered product of generator exponentials; the first term acts first
/// (rightmost in the matrix product).
#[derive(Debug, Clone, PartialEq)]
pub struct GateProgram<T: RealField + Copy> {
    pub terms: Vec<GeneratorTerm<T>>,
}

impl<T: RealField + Copy> Default for GateProgram<T> {
    fn default() -> Self {
        Self { terms: Vec::new() }
    }
}

impl<T: RealField + Copy> GateProgram<T> {
    pub fn new(terms: Vec<GeneratorTerm<T>>) -> Self {
        Self { terms }
    }
}

/// A projection-sequence label `c·e_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceLabel<T: RealField + Copy> {
    pub axis: usize,
    pub c: T,
}

impl<T: RealField + Copy> SequenceLabel<T> {
    pub fn octonion(&self) -> Octonion<T> {
        Octonion::scaled_basis(self.axis, self.c)
    }
}

/// Ordered labels `a₁..a_m`; `P₀` separators at both ends and between
/// compiled pairs are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSequence<T: RealField + Copy> {
    pub labels: Vec<SequenceLabel<T>>,
}

impl<T: RealField + Copy> Default for ProjectionSequence<T> {
    fn default() -> Self {
        Self { labels: Vec::new() }
    }
}

/// Compilation and decomposition knobs.
#[derive(Debug, Clone, Copy)]
pub struct SynthesisOptions<T: RealField + Copy> {
    /// Largest `|tan t|` compiled directly; larger angles are halved.
    pub split_threshold: T,
    /// Adiabatic slicing factor: emit `s` copies of `exp((t/s)h)`.
    pub slice_count: usize,
    /// Residual target for round trips and decomposition.
    pub tolerance: T,
    /// Budget on emitted generator terms in decomposition.
    pub max_factors: usize,
}

impl<T: RealField + Copy> Default for SynthesisOptions<T> {
    fn default() -> Self {
        Self {
            split_threshold: T::one(),
            slice_count: 1,
            tolerance: nalgebra::convert(1e-8),
            max_factors: 28 * 64,
        }
    }
}

/// Index pairs `(i, j)`, `i < j`, of the 28 generators, in lexicographic order.
pub fn generator_pairs() -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(28);
    for i in 0..8 {
        for j in (i + 1)..8 {
            pairs.push((i, j));
        }
    }
    pairs
}

/// The generator `E_k E_j` (indices need not be ordered; `E_0 = I`).
pub fn generator<T: RealField + Copy>(k: usize, j: usize) -> DMatrix<T> {
    Octonion::<T>::basis(k).matrep() * Octonion::<T>::basis(j).matrep()
}

/// The 28 matrices `E_i E_j`, `i < j`: a basis of 𝔰𝔬(8).
pub fn lie_basis<T: RealField + Copy>() -> Vec<DMatrix<T>> {
    generator_pairs()
        .into_iter()
        .map(|(i, j)| generator(i, j))
        .collect()
}

/// `exp(t · E_k E_j) = cos(t)·I + sin(t)·E_k E_j`.
pub fn exp_generator<T: RealField + Copy>(term: &GeneratorTerm<T>) -> DMatrix<T> {
    let h = generator::<T>(term.k, term.j);
    let i = DMatrix::<T>::identity(8, 8);
    i * term.t.cos() + h * term.t.sin()
}

/// Exact product `exp(t_m h_m)···exp(t_1 h_1)` of a program.
pub fn gate_product<T: RealField + Copy>(program: &GateProgram<T>) -> DMatrix<T> {
    let mut g = DMatrix::<T>::identity(8, 8);
    for term in &program.terms {
        g = exp_generator(term) * g;
    }
    g
}

/// Compiles a gate program into a projection sequence.
///
/// Per term: move a zero index to the second slot, reduce `t` mod π into
/// `(−π/2, π/2]`, emit `slice_count` copies of the `t/s` term, halve each
/// copy until `|tan t| ≤ split_threshold` (angles at exactly ±π/2 always
/// halve once), then emit the label pair `(tan(t)·e_k, e_j)`. An odd number
/// of mod-π reductions appends four `(e₁, e₂)` pairs realizing the global
/// `−1`.
pub fn compile<T: RealField + Copy>(
    program: &GateProgram<T>,
    options: &SynthesisOptions<T>,
) -> Result<ProjectionSequence<T>, SynthesisError> {
    let mut labels = Vec::new();
    let mut parity_flips = 0usize;
    let pi = T::pi();
    let half_pi = pi / nalgebra::convert(2.0);
    for term in &program.terms {
        if term.k == term.j || term.k > 7 || term.j > 7 {
            return Err(SynthesisError::InvalidTerm { k: term.k, j: term.j });
        }
        // E_0 commutes: put the zero index in the second slot.
        let (k, j) = if term.k == 0 { (term.j, 0) } else { (term.k, term.j) };

        // Reduce into (−π/2, π/2]; each π step flips the gate sign.
        let n = (term.t / pi - nalgebra::convert(0.5)).ceil();
        let t = term.t - n * pi;
        let n_f: f64 = try_convert(n).unwrap_or(0.0);
        parity_flips += n_f.abs() as usize;

        if t == T::zero() {
            continue;
        }
        let slices = options.slice_count.max(1);
        let t_slice = t / nalgebra::convert(slices as f64);
        for _ in 0..slices {
            let mut t_part = t_slice;
            let mut copies = 1usize;
            // Halve until the coefficient is within threshold; ±π/2 has an
            // infinite tangent and always takes this path.
            while !(t_part.abs() < half_pi && t_part.tan().abs() <= options.split_threshold) {
                t_part /= nalgebra::convert(2.0);
                copies *= 2;
                if copies > 1 << 20 {
                    break;
                }
            }
            let c = t_part.tan();
            for _ in 0..copies {
                labels.push(SequenceLabel { axis: k, c });
                labels.push(SequenceLabel { axis: j, c: T::one() });
            }
        }
    }
    if parity_flips % 2 == 1 {
        // (1 + E₁E₂)⁴ ∝ (E₁E₂)² = −I.
        for _ in 0..4 {
            labels.push(SequenceLabel { axis: 1, c: T::one() });
            labels.push(SequenceLabel { axis: 2, c: T::one() });
        }
    }
    Ok(ProjectionSequence { labels })
}

/// Result of evaluating a projection chain.
#[derive(Debug, Clone)]
pub struct Evaluation<T: RealField + Copy> {
    /// Orthogonal part of the chain gate.
    pub orthogonal: DMatrix<T>,
    /// Base-2 logarithm of the positive scale; the chain shrinks the state
    /// by roughly a factor 2 per compiled pair, so long chains underflow a
    /// plain float scale.
    pub log2_scale: f64,
}

impl<T: RealField + Copy> Evaluation<T> {
    /// The normalized gate `G/scale`.
    pub fn normalized(&self) -> DMatrix<T> {
        self.orthogonal.clone()
    }

    /// The positive scale (zero when it underflows `f64`).
    pub fn scale(&self) -> T {
        nalgebra::convert(self.log2_scale.exp2())
    }

    /// The raw chain block `scale · orthogonal` (underflows for long chains).
    pub fn gate(&self) -> DMatrix<T> {
        self.orthogonal.clone() * self.scale()
    }
}

/// Evaluates the chain operator of a sequence two independent ways and
/// checks agreement: (a) dense multiplication of the 16×16 projector chain,
/// reading the top-left 8×8 block; (b) the closed-form transition-block
/// product `∏(I + A†_{2l}A_{2l−1}) / ∏(1+‖A_r‖²)`. Both routes renormalize
/// after every compiled pair and accumulate the scale in log space.
pub fn evaluate<T: RealField + Copy>(
    seq: &ProjectionSequence<T>,
) -> Result<Evaluation<T>, SynthesisError> {
    let p0 = Projection::<T>::base(8);
    let p0m = p0.matrix().clone();
    let floor: T = nalgebra::convert(1e-280);

    // Dense route: full 16×16 projector products, renormalized per group by
    // the max-abs entry.
    let mut dense = p0m.clone();
    let mut dense_log2 = 0.0f64;
    let group_end = |m: &mut DMatrix<T>, log2: &mut f64| -> Result<(), SynthesisError> {
        let a = max_abs(m);
        if a <= floor {
            return Err(SynthesisError::ScaleNotPositive {
                scale: try_convert(a).unwrap_or(0.0),
            });
        }
        *log2 += try_convert(a).unwrap_or(f64::NAN).log2();
        *m /= T::from_real(a);
        Ok(())
    };
    for (idx, label) in seq.labels.iter().enumerate() {
        let p = graph_projection(&label.octonion().matrep());
        dense = p.matrix() * dense;
        if idx % 2 == 1 {
            dense = &p0m * dense;
            group_end(&mut dense, &mut dense_log2)?;
        }
    }
    if seq.labels.len() % 2 == 1 {
        dense = &p0m * dense;
        group_end(&mut dense, &mut dense_log2)?;
    }
    let dense_block = dense.view((0, 0), (8, 8)).into_owned();
    let (dense_scale, _) = scaled_unitary_fit(&dense_block);
    if dense_scale <= floor {
        return Err(SynthesisError::ScaleNotPositive {
            scale: try_convert(dense_scale).unwrap_or(0.0),
        });
    }
    let dense_ortho = dense_block / T::from_real(dense_scale);
    let dense_total_log2 = dense_log2 + try_convert(dense_scale).unwrap_or(f64::NAN).log2();

    // Block route: closed-form per-group factors, each split into an
    // orthogonal part and a scale.
    let ident = DMatrix::<T>::identity(8, 8);
    let mut block_ortho = ident.clone();
    let mut block_log2 = 0.0f64;
    for group in seq.labels.chunks(2) {
        let factor = match group {
            [a, b] => {
                let am = a.octonion().matrep();
                let bm = b.octonion().matrep();
                let denom = (T::one() + a.c * a.c) * (T::one() + b.c * b.c);
                (&ident + bm.transpose() * am) / denom
            }
            [a] => {
                let denom = T::one() + a.c * a.c;
                ident.clone() / denom
            }
            _ => unreachable!(),
        };
        let (s, _) = scaled_unitary_fit(&factor);
        if s <= floor {
            return Err(SynthesisError::ScaleNotPositive {
                scale: try_convert(s).unwrap_or(0.0),
            });
        }
        block_log2 += try_convert(s).unwrap_or(f64::NAN).log2();
        block_ortho = (factor / T::from_real(s)) * block_ortho;
    }

    let mismatch = max_abs_diff(&dense_ortho, &block_ortho);
    let log2_mismatch = (dense_total_log2 - block_log2).abs();
    let agree_tol: T = nalgebra::convert(1e-10);
    if mismatch > agree_tol || log2_mismatch > 1e-6 * (1.0 + block_log2.abs()) {
        return Err(SynthesisError::MethodMismatch {
            residual: try_convert(mismatch).unwrap_or(f64::NAN),
        });
    }

    Ok(Evaluation {
        orthogonal: block_ortho,
        log2_scale: block_log2,
    })
}

/// One node of the measured chain: the base projection or a labelled line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainNode<T: RealField + Copy> {
    Base,
    Label(SequenceLabel<T>),
}

/// The full measured chain of a sequence: labels with a `P₀` after every
/// compiled pair (the leading `P₀` is the prepared state, not a step).
pub fn chain_nodes<T: RealField + Copy>(seq: &ProjectionSequence<T>) -> Vec<ChainNode<T>> {
    let mut nodes = Vec::new();
    for (idx, label) in seq.labels.iter().enumerate() {
        nodes.push(ChainNode::Label(*label));
        if idx % 2 == 1 {
            nodes.push(ChainNode::Base);
        }
    }
    if seq.labels.len() % 2 == 1 {
        nodes.push(ChainNode::Base);
    }
    nodes
}

/// Dihedral data for one consecutive pair in the chain.
#[derive(Debug, Clone)]
pub struct StepAngle<T: RealField + Copy> {
    pub from: ChainNode<T>,
    pub to: ChainNode<T>,
    /// Dense certification value of `α`.
    pub alpha: T,
    /// Closed-form value from the dihedral-angle lemma.
    pub expected_alpha: T,
    pub theta: T,
}

fn node_matrix<T: RealField + Copy>(node: &ChainNode<T>) -> Projection<T> {
    match node {
        ChainNode::Base => Projection::<T>::base(8),
        ChainNode::Label(l) => graph_projection(&l.octonion().matrep()),
    }
}

fn lemma_alpha2<T: RealField + Copy>(a: &ChainNode<T>, b: &ChainNode<T>) -> T {
    let half: T = nalgebra::convert(0.5);
    match (a, b) {
        (ChainNode::Base, ChainNode::Base) => T::one(),
        // P₀ against c·e_j: α² = 1/(1+c²)  (θ = arctan|c|).
        (ChainNode::Base, ChainNode::Label(l)) | (ChainNode::Label(l), ChainNode::Base) => {
            T::one() / (T::one() + l.c * l.c)
        }
        (ChainNode::Label(x), ChainNode::Label(y)) => {
            if x.axis == y.axis {
                // Same line direction: transition (1 + c_x c_y E†E) stays scalar.
                let cross = T::one() + x.c * y.c;
                cross * cross / ((T::one() + x.c * x.c) * (T::one() + y.c * y.c))
            } else {
                // Distinct axes: always π/4.
                half
            }
        }
    }
}

/// Per-step dihedral angles of the full chain (including `P₀` separators),
/// each certified densely and cross-checked against the lemma's closed form.
pub fn sequence_angles<T: RealField + Copy>(
    seq: &ProjectionSequence<T>,
) -> Result<Vec<StepAngle<T>>, SynthesisError> {
    let nodes = chain_nodes(seq);
    let mut out = Vec::with_capacity(nodes.len());
    let mut prev = ChainNode::Base;
    let tol: T = nalgebra::convert(DEFAULT_TOL);
    for node in nodes {
        let p = node_matrix(&prev);
        let q = node_matrix(&node);
        let report = certify_pair(&p, &q, tol)?;
        let expected = lemma_alpha2::<T>(&prev, &node).max(T::zero()).sqrt();
        let agree: T = nalgebra::convert(1e-8);
        if (report.alpha - expected).abs() > agree {
            return Err(SynthesisError::AngleMismatch {
                dense: try_convert(report.alpha).unwrap_or(f64::NAN),
                expected: try_convert(expected).unwrap_or(f64::NAN),
            });
        }
        out.push(StepAngle {
            from: prev,
            to: node,
            alpha: report.alpha,
            expected_alpha: expected,
            theta: report.theta,
        });
        prev = node;
    }
    Ok(out)
}

/// Embeds a unitary `A = A₁ + iA₂ ∈ U(4)` into SO(8) as `[A₁ −A₂; A₂ A₁]`.
///
/// Basis order: real parts `(e₀, e₂, e₄, e₆)` then imaginary parts
/// `(e₁, e₃, e₅, e₇)` of the two-qubit encoding `|00⟩→e₀, |01⟩→e₂,
/// |10⟩→e₄, |11⟩→e₆`. The map is an injective group homomorphism with
/// `det = +1` (the real determinant is `|det A|²`).
pub fn embed_su4<T: RealField + Copy>(
    a: &DMatrix<Complex<T>>,
) -> Result<DMatrix<T>, SynthesisError> {
    if a.nrows() != 4 || a.ncols() != 4 {
        return Err(SynthesisError::NotUnitary { residual: f64::INFINITY });
    }
    let residual = unitary_residual(a);
    let tol: T = nalgebra::convert(DEFAULT_TOL);
    if residual > tol {
        return Err(SynthesisError::NotUnitary {
            residual: try_convert(residual).unwrap_or(f64::NAN),
        });
    }
    let mut out = DMatrix::<T>::zeros(8, 8);
    for r in 0..4 {
        for c in 0..4 {
            let z = a[(r, c)];
            out[(r, c)] = z.re;
            out[(r, c + 4)] = -z.im;
            out[(r + 4, c)] = z.im;
            out[(r + 4, c + 4)] = z.re;
        }
    }
    Ok(out)
}

/// Splits `g` into a positive scale and the orthogonal part `g/scale`.
pub fn normalize_gate<T: ComplexField>(g: &DMatrix<T>) -> (DMatrix<T>, T::RealField) {
    let (scale, _) = scaled_unitary_fit(g);
    (g.map(|x| x * T::from_real(scale.clone().recip())), scale)
}

pub use decompose::decompose_so8;
