//! Measurement-only computation with equiangular subspace projections.
//!
//! Two orthogonal projections `P`, `Q` are *equiangular* when all principal
//! angles between their ranges coincide; algebraically `PQP = α²P` and
//! `QPQ = α²Q` for the common cosine `α`. A projective measurement whose
//! outcomes hop between equiangular subspaces leaks no information about the
//! state, so a chain of such measurements acts as a unitary up to scale.
//!
//! This crate implements that pipeline end to end:
//!
//! * [`octonion`]: the octonion algebra and the real matrix representations
//!   of ℂ, ℍ, 𝕆 used to build graph-of-line projections.
//! * [`projection`]: validated projections, graph projections `P_a` onto
//!   `{(x, Ax)}`, their diagonalizing unitaries and transition blocks.
//! * [`certify`]: principal angles, equiangularity and strong-equiangularity
//!   certification, canonical pair forms.
//! * [`synthesis`]: the 28-generator basis of 𝔰𝔬(8) from octonion matrices,
//!   compilation of gate programs into projection sequences, evaluation back
//!   to gates, SO(8) decomposition, and the SU(4) ↪ SO(8) embedding.
//! * [`simulate`]: Born-rule sampling and the forced-measurement retry
//!   protocol with reproducible seeded trials.
//! * [`family`]: audits of projection families: pairwise certification,
//!   gate-group closure, SIC-POVM checks, and the spin-binding demo.
//! * [`io`]: JSON schemas for every serializable object.
//!
//! The numeric core is generic over the scalar: real modules take any
//! [`nalgebra::RealField`] (`f32`, `f64`), field-agnostic modules any
//! [`nalgebra::ComplexField`], so the same certification code runs on real
//! symmetric and complex Hermitian inputs. Concrete aliases for the default
//! double-precision instantiation live at the crate root.

pub mod certify;
pub mod family;
pub mod io;
pub mod linalg;
pub mod octonion;
pub mod projection;
pub mod simulate;
pub mod synthesis;

/// Default real scalar.
pub type Real = f64;
/// Default complex scalar.
pub type Complex64 = nalgebra::Complex<f64>;

/// Octonion over the default scalar.
pub type Oct = octonion::Octonion<Real>;
/// Real projection over the default scalar.
pub type Proj = projection::Projection<Real>;
/// Complex projection over the default scalar.
pub type ProjC = projection::Projection<Complex64>;

pub use certify::{is_equiangular, is_strongly_equiangular, principal_cosines, EquiangularReport};
pub use octonion::Octonion;
pub use projection::Projection;
pub use synthesis::{GateProgram, GeneratorTerm, ProjectionSequence, SynthesisOptions};
