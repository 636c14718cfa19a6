//! Oracle-driven synthesis tests: the closed-form exponential against a
//! dense series exponential, compile/evaluate round trips, splitting and
//! slicing invariance, decomposition residuals, and the SU(4) embedding.

mod common;

use common::{dist, expm_oracle, random_skew_bounded, random_unitary};
use equiangular::linalg::{max_abs, max_abs_diff, unitary_residual};
use equiangular::synthesis::{
    compile, decompose_so8, embed_su4, evaluate, exp_generator, gate_product, generator,
    sequence_angles, GateProgram, GeneratorTerm, SynthesisOptions,
};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_program(rng: &mut StdRng, max_terms: usize) -> GateProgram<f64> {
    let n = rng.random_range(1..=max_terms);
    let mut terms = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.random_range(0..8usize);
        let mut j = rng.random_range(0..8usize);
        while j == k {
            j = rng.random_range(0..8usize);
        }
        let bound = std::f64::consts::FRAC_PI_2 - 1e-9;
        let t = rng.random_range(-bound..bound);
        terms.push(GeneratorTerm::new(k, j, t).unwrap());
    }
    GateProgram::new(terms)
}

#[test]
fn exp_generator_matches_series_oracle() {
    let mut rng = StdRng::seed_from_u64(101);
    for _ in 0..100 {
        let k = rng.random_range(0..8usize);
        let mut j = rng.random_range(0..8usize);
        while j == k {
            j = rng.random_range(0..8usize);
        }
        let t = rng.random_range(-3.0..3.0);
        let term = GeneratorTerm::new(k, j, t).unwrap();
        let closed = exp_generator(&term);
        let series = expm_oracle(&(generator::<f64>(k, j) * t));
        assert!(dist(&closed, &series) <= 1e-10, "k={k} j={j} t={t}");
    }
}

#[test]
fn compile_evaluate_roundtrip_on_random_programs() {
    let mut rng = StdRng::seed_from_u64(102);
    let opts = SynthesisOptions::default();
    for _ in 0..100 {
        let program = random_program(&mut rng, 8);
        let seq = compile(&program, &opts).unwrap();
        let evaluated = evaluate(&seq).unwrap().normalized();
        let target = gate_product(&program);
        assert!(dist(&evaluated, &target) <= 1e-8);
    }
}

#[test]
fn splitting_and_slicing_agree() {
    let mut rng = StdRng::seed_from_u64(103);
    for _ in 0..25 {
        let program = random_program(&mut rng, 5);
        let no_split = SynthesisOptions {
            split_threshold: f64::INFINITY,
            ..SynthesisOptions::default()
        };
        let split = SynthesisOptions::default();
        let sliced = SynthesisOptions {
            slice_count: 3,
            ..SynthesisOptions::default()
        };
        let g_nosplit = evaluate(&compile(&program, &no_split).unwrap()).unwrap().normalized();
        let g_split = evaluate(&compile(&program, &split).unwrap()).unwrap().normalized();
        let g_sliced = evaluate(&compile(&program, &sliced).unwrap()).unwrap().normalized();
        assert!(dist(&g_nosplit, &g_split) <= 1e-9);
        assert!(dist(&g_split, &g_sliced) <= 1e-9);
    }
}

#[test]
fn compiled_pairs_keep_alpha_bounded_below() {
    let mut rng = StdRng::seed_from_u64(104);
    for _ in 0..10 {
        let program = random_program(&mut rng, 4);
        let seq = compile(&program, &SynthesisOptions::default()).unwrap();
        for step in sequence_angles(&seq).unwrap() {
            let alpha2 = step.alpha * step.alpha;
            // Label pairs sit at 1/2; base transitions at 1/(1+c²) ≥ 1/2
            // because compilation keeps |c| ≤ 1.
            assert!(alpha2 >= 0.5 - 1e-9, "alpha² = {alpha2}");
        }
    }
}

#[test]
fn decompose_random_targets_to_tolerance() {
    let mut rng = StdRng::seed_from_u64(105);
    let opts = SynthesisOptions {
        tolerance: 1e-6,
        ..SynthesisOptions::default()
    };
    for case in 0..50 {
        let skew = random_skew_bounded(8, 2.0, &mut rng);
        let target = expm_oracle(&skew);
        assert!(unitary_residual(&target) <= 1e-10);
        let program = decompose_so8(&target, &opts).unwrap();
        let residual = dist(&gate_product(&program), &target);
        assert!(
            residual <= 1e-6,
            "case {case}: residual {residual:.3e} with {} terms",
            program.terms.len()
        );
        assert!(program.terms.len() <= opts.max_factors);
    }
}

#[test]
fn decompose_then_compile_then_evaluate() {
    let mut rng = StdRng::seed_from_u64(106);
    let opts = SynthesisOptions {
        tolerance: 1e-8,
        ..SynthesisOptions::default()
    };
    for _ in 0..5 {
        let skew = random_skew_bounded(8, 1.5, &mut rng);
        let target = expm_oracle(&skew);
        let program = decompose_so8(&target, &opts).unwrap();
        let seq = compile(&program, &SynthesisOptions::default()).unwrap();
        let gate = evaluate(&seq).unwrap().normalized();
        assert!(dist(&gate, &target) <= 1e-6);
    }
}

#[test]
fn embedding_is_a_homomorphism_into_so8() {
    let mut rng = StdRng::seed_from_u64(107);
    for _ in 0..100 {
        let a = random_unitary(4, &mut rng);
        let b = random_unitary(4, &mut rng);
        let ea = embed_su4(&a).unwrap();
        let eb = embed_su4(&b).unwrap();
        let eab = embed_su4(&(&a * &b)).unwrap();
        assert!(dist(&(&ea * &eb), &eab) <= 1e-12);
        assert!(unitary_residual(&ea) <= 1e-12);
        assert!((ea.determinant() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn embedded_unitaries_decompose_and_roundtrip() {
    let mut rng = StdRng::seed_from_u64(108);
    let opts = SynthesisOptions {
        tolerance: 1e-7,
        ..SynthesisOptions::default()
    };
    let a = random_unitary(4, &mut rng);
    let target = embed_su4(&a).unwrap();
    let program = decompose_so8(&target, &opts).unwrap();
    let gate = evaluate(&compile(&program, &SynthesisOptions::default()).unwrap())
        .unwrap()
        .normalized();
    assert!(dist(&gate, &target) <= 1e-6);
}

#[test]
fn embedding_acts_on_even_odd_pairs_like_the_imaginary_unit() {
    // The diagonal phase gate i·I embeds as +90° rotations on the pairs
    // (e₀,e₁), (e₂,e₄)... in the reordered basis; left multiplication by e₁
    // rotates the first three pairs the same way and the (e₆,e₇) pair with
    // the opposite orientation. Compare at basis-vector level.
    let i_unit = DMatrix::<nalgebra::Complex<f64>>::identity(4, 4)
        .map(|z| z * nalgebra::Complex::new(0.0, 1.0));
    let embedded = embed_su4(&i_unit).unwrap();
    let e1 = equiangular::Oct::basis(1).matrep();

    // Reorder the embedding from (reals | imags) to the natural e₀..e₇ order.
    let order = [0usize, 4, 1, 5, 2, 6, 3, 7]; // position of e_k in the embedded basis
    let mut embedded_nat = DMatrix::<f64>::zeros(8, 8);
    for r in 0..8 {
        for c in 0..8 {
            embedded_nat[(r, c)] = embedded[(order[r], order[c])];
        }
    }
    for pair in 0..4 {
        let k = 2 * pair;
        let emb_block = embedded_nat.view((k, k), (2, 2)).into_owned();
        let e1_block = e1.view((k, k), (2, 2)).into_owned();
        if pair < 3 {
            assert!(max_abs_diff(&emb_block, &e1_block) <= 1e-14, "pair {pair}");
        } else {
            // Orientation flip on (e₆,e₇): equal after conjugating by diag(1,−1).
            let flip = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
            let conj = &flip * &e1_block * &flip;
            assert!(max_abs_diff(&emb_block, &conj) <= 1e-14);
        }
        // Both act as quarter turns on the pair.
        assert!(max_abs(&(emb_block.clone() * emb_block.clone() + DMatrix::identity(2, 2))) <= 1e-14);
    }
}

#[test]
fn evaluate_agrees_between_routes_on_long_chains() {
    // The dense 16×16 route and the block route are asserted equal inside
    // evaluate; a long random chain exercises that check.
    let mut rng = StdRng::seed_from_u64(109);
    let program = random_program(&mut rng, 8);
    let opts = SynthesisOptions {
        slice_count: 4,
        ..SynthesisOptions::default()
    };
    let seq = compile(&program, &opts).unwrap();
    assert!(seq.labels.len() >= 8);
    let ev = evaluate(&seq).unwrap();
    assert!(ev.log2_scale < 0.0);
    assert!(unitary_residual(&ev.normalized()) <= 1e-9);
}
