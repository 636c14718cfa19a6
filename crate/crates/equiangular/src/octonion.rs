//! The octonion division algebra 𝕆 and its matrix representations.
//!
//! An octonion is `o = Σ oᵢeᵢ` over the basis `e₀..e₇` with `e₀` the
//! identity. Products of imaginary units follow the completely antisymmetric
//! tensor ε with value +1 on the triples 123, 145, 176, 246, 257, 347, 365
//! (and cyclic permutations):
//!
//! ```text
//! eᵢeⱼ = -δᵢⱼ e₀ + ε_{ijk} e_k        (i, j ≥ 1)
//! ```
//!
//! The multiplication table is generated from the ε cycle list and checked
//! against an independently hard-coded copy, so a transcription slip in
//! either encoding is caught the first time the table is used.
//!
//! [`Octonion::matrep`] gives the 8×8 real matrix of left multiplication,
//! `A·vec(x) = vec(a·x)`. It is not an algebra homomorphism (octonions are
//! non-associative) but satisfies `A Aᵀ = ‖a‖² I` and `matrep(a*) = Aᵀ`,
//! which is all the projection constructions need. Restricted to the complex
//! (`e₀,e₁`) or quaternion (`e₀..e₃`) subalgebras the analogous 2×2 / 4×4
//! representations *are* homomorphisms.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::{try_convert, DMatrix, DVector, RealField};
use thiserror::Error;

/// ε = +1 triples; all other values follow by antisymmetry.
const EPSILON_CYCLES: [[usize; 3]; 7] = [
    [1, 2, 3],
    [1, 4, 5],
    [1, 7, 6],
    [2, 4, 6],
    [2, 5, 7],
    [3, 4, 7],
    [3, 6, 5],
];

/// Hard-coded copy of the multiplication table, row `eᵢ`, column `eⱼ`.
/// Entry `(s, k)` means `eᵢeⱼ = s·e_k`. Kept independent of the ε generator.
const TABLE_REFERENCE: [[(i8, usize); 8]; 8] = [
    [(1, 0), (1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (1, 7)],
    [(1, 1), (-1, 0), (1, 3), (-1, 2), (1, 5), (-1, 4), (-1, 7), (1, 6)],
    [(1, 2), (-1, 3), (-1, 0), (1, 1), (1, 6), (1, 7), (-1, 4), (-1, 5)],
    [(1, 3), (1, 2), (-1, 1), (-1, 0), (1, 7), (-1, 6), (1, 5), (-1, 4)],
    [(1, 4), (-1, 5), (-1, 6), (-1, 7), (-1, 0), (1, 1), (1, 2), (1, 3)],
    [(1, 5), (1, 4), (-1, 7), (1, 6), (-1, 1), (-1, 0), (-1, 3), (1, 2)],
    [(1, 6), (1, 7), (1, 4), (-1, 5), (-1, 2), (1, 3), (-1, 0), (-1, 1)],
    [(1, 7), (-1, 6), (1, 5), (1, 4), (-1, 3), (-1, 2), (1, 1), (-1, 0)],
];

/// Signed-index multiplication table: `eᵢeⱼ = sign[i][j] · e_{index[i][j]}`.
#[derive(Debug, Clone)]
pub struct MulTable {
    pub sign: [[i8; 8]; 8],
    pub index: [[usize; 8]; 8],
}

#[derive(Debug, Error, PartialEq)]
pub enum OctonionError {
    #[error("generated table disagrees with reference at e_{i}·e_{j}: generated {gen_sign}·e_{gen_index}, reference {ref_sign}·e_{ref_index}")]
    TableMismatch {
        i: usize,
        j: usize,
        gen_sign: i8,
        gen_index: usize,
        ref_sign: i8,
        ref_index: usize,
    },
    #[error("coefficient {index} = {value} lies outside the {subalgebra} subalgebra")]
    SubalgebraViolation {
        subalgebra: &'static str,
        index: usize,
        value: f64,
    },
    #[error("operation requires a nonzero octonion")]
    ZeroOctonion,
}

/// Builds the table from the ε cycle list alone.
fn generate_table() -> MulTable {
    let mut sign = [[0i8; 8]; 8];
    let mut index = [[0usize; 8]; 8];
    for j in 0..8 {
        sign[0][j] = 1;
        index[0][j] = j;
        sign[j][0] = 1;
        index[j][0] = j;
    }
    for i in 1..8 {
        sign[i][i] = -1;
        index[i][i] = 0;
    }
    for cycle in EPSILON_CYCLES {
        let [a, b, c] = cycle;
        // All six orderings of the triple, with the permutation parity.
        for (i, j, k, s) in [
            (a, b, c, 1i8),
            (b, c, a, 1),
            (c, a, b, 1),
            (b, a, c, -1),
            (a, c, b, -1),
            (c, b, a, -1),
        ] {
            sign[i][j] = s;
            index[i][j] = k;
        }
    }
    MulTable { sign, index }
}

/// Checks the ε-generated table entry-by-entry against the hard-coded copy.
///
/// `inject_fault` flips the sign of one generated entry first; it exists so
/// the verification path itself can be exercised.
pub fn verify_table(inject_fault: Option<(usize, usize)>) -> Result<(), OctonionError> {
    let mut gen = generate_table();
    if let Some((i, j)) = inject_fault {
        gen.sign[i][j] = -gen.sign[i][j];
    }
    for i in 0..8 {
        for j in 0..8 {
            let (rs, ri) = TABLE_REFERENCE[i][j];
            if gen.sign[i][j] != rs || gen.index[i][j] != ri {
                return Err(OctonionError::TableMismatch {
                    i,
                    j,
                    gen_sign: gen.sign[i][j],
                    gen_index: gen.index[i][j],
                    ref_sign: rs,
                    ref_index: ri,
                });
            }
        }
    }
    Ok(())
}

/// The verified table. First use cross-checks the two encodings.
pub fn mul_table() -> &'static MulTable {
    static TABLE: OnceLock<MulTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        verify_table(None).expect("octonion multiplication table self-check");
        generate_table()
    })
}

/// An octonion `Σ oᵢeᵢ` with real coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Octonion<T: RealField + Copy> {
    pub coeffs: [T; 8],
}

impl<T: RealField + Copy> Octonion<T> {
    pub fn new(coeffs: [T; 8]) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::new([T::zero(); 8])
    }

    /// The basis unit `eᵢ`.
    pub fn basis(i: usize) -> Self {
        assert!(i < 8, "basis index {i} out of range");
        let mut coeffs = [T::zero(); 8];
        coeffs[i] = T::one();
        Self::new(coeffs)
    }

    /// `c·eᵢ`.
    pub fn scaled_basis(i: usize, c: T) -> Self {
        let mut coeffs = [T::zero(); 8];
        assert!(i < 8, "basis index {i} out of range");
        coeffs[i] = c;
        Self::new(coeffs)
    }

    pub fn one() -> Self {
        Self::basis(0)
    }

    /// Conjugate: flips the sign of every `eᵢ`, `i ≥ 1`.
    pub fn conj(&self) -> Self {
        let mut coeffs = self.coeffs;
        for c in coeffs.iter_mut().skip(1) {
            *c = -*c;
        }
        Self::new(coeffs)
    }

    /// Squared norm `Σ oᵢ²`; satisfies `a·a* = norm2(a)·e₀`.
    pub fn norm2(&self) -> T {
        self.coeffs.iter().map(|c| *c * *c).fold(T::zero(), |s, v| s + v)
    }

    /// Inner product of the two coefficient 8-vectors.
    pub fn dot(&self, other: &Self) -> T {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| *a * *b)
            .fold(T::zero(), |s, v| s + v)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut coeffs = self.coeffs;
        for c in coeffs.iter_mut() {
            *c *= s;
        }
        Self::new(coeffs)
    }

    pub fn is_zero(&self, tol: T) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= tol)
    }

    pub fn as_vector(&self) -> DVector<T> {
        DVector::from_row_slice(&self.coeffs)
    }

    /// Octonion product via the verified table.
    pub fn mul_oct(&self, other: &Self) -> Self {
        let table = mul_table();
        let mut out = [T::zero(); 8];
        for i in 0..8 {
            if self.coeffs[i] == T::zero() {
                continue;
            }
            for j in 0..8 {
                let s = match table.sign[i][j] {
                    1 => T::one(),
                    -1 => -T::one(),
                    _ => unreachable!(),
                };
                out[table.index[i][j]] += s * self.coeffs[i] * other.coeffs[j];
            }
        }
        Self::new(out)
    }

    /// 8×8 left-multiplication matrix: `matrep(a)·vec(x) = vec(a·x)`.
    ///
    /// Column 0 is the coefficient vector of `a`; `A Aᵀ = ‖a‖² I` and
    /// `matrep(a*) = Aᵀ`, but the map is not multiplicative on all of 𝕆.
    pub fn matrep(&self) -> DMatrix<T> {
        self.left_mul_matrix(8)
    }

    /// 4×4 representation of the quaternion subalgebra `e₀..e₃`.
    ///
    /// A genuine algebra homomorphism: `quat_matrep(ab) = quat_matrep(a)·quat_matrep(b)`.
    pub fn quat_matrep(&self) -> Result<DMatrix<T>, OctonionError> {
        self.subalgebra_rep(4, "quaternion")
    }

    /// 2×2 representation of the complex subalgebra `e₀,e₁`:
    /// `(a₀, -a₁; a₁, a₀)`.
    pub fn complex_matrep(&self) -> Result<DMatrix<T>, OctonionError> {
        self.subalgebra_rep(2, "complex")
    }

    fn subalgebra_rep(&self, dim: usize, name: &'static str) -> Result<DMatrix<T>, OctonionError> {
        for (index, c) in self.coeffs.iter().enumerate().skip(dim) {
            if *c != T::zero() {
                return Err(OctonionError::SubalgebraViolation {
                    subalgebra: name,
                    index,
                    value: try_convert(*c).unwrap_or(f64::NAN),
                });
            }
        }
        Ok(self.left_mul_matrix(dim))
    }

    fn left_mul_matrix(&self, dim: usize) -> DMatrix<T> {
        let table = mul_table();
        let mut m = DMatrix::<T>::zeros(dim, dim);
        for i in 0..dim {
            if self.coeffs[i] == T::zero() {
                continue;
            }
            for j in 0..dim {
                let s = match table.sign[i][j] {
                    1 => T::one(),
                    -1 => -T::one(),
                    _ => unreachable!(),
                };
                // e_i e_j = s e_k contributes a_i·s to entry (k, j).
                m[(table.index[i][j], j)] += s * self.coeffs[i];
            }
        }
        m
    }
}

impl<T: RealField + Copy> Add for Octonion<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut coeffs = self.coeffs;
        for (c, r) in coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *c += *r;
        }
        Self::new(coeffs)
    }
}

impl<T: RealField + Copy> Sub for Octonion<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut coeffs = self.coeffs;
        for (c, r) in coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *c -= *r;
        }
        Self::new(coeffs)
    }
}

impl<T: RealField + Copy> Neg for Octonion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: RealField + Copy> Mul for Octonion<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_oct(&rhs)
    }
}
