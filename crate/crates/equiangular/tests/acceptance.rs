//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS/FAIL line with its runtime (visible with `-- --nocapture`).

mod common;

use std::time::{Duration, Instant};

use common::{dist, expm_oracle, random_skew_bounded, random_unitary};
use equiangular::certify::{certify_pair, cosine_spread};
use equiangular::family::{
    continuous_family_sample, gate_group_closure, sic_check, sic_formula_alpha2,
    spin_binding_projection, tetrahedron_sic, RingKind,
};
use equiangular::io::PlanesFileJson;
use equiangular::linalg::{max_abs, max_abs_diff, unitary_residual};
use equiangular::octonion::{verify_table, Octonion};
use equiangular::projection::{line_pair_check, octonion_graph_projection, Projection};
use equiangular::simulate::{run_trials, QuantumState};
use equiangular::synthesis::{
    compile, decompose_so8, embed_su4, evaluate, gate_product, generator_pairs, lie_basis,
    ChainNode, GateProgram, GeneratorTerm, SynthesisOptions,
};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn finish(name: &str, limit: Duration, start: Instant, pass: bool, detail: String) {
    let elapsed = start.elapsed();
    let verdict = if pass && elapsed <= limit { "PASS" } else { "FAIL" };
    println!(
        "criterion {name}: {verdict} ({:.2}s, limit {:.0}s) {detail}",
        elapsed.as_secs_f64(),
        limit.as_secs_f64(),
    );
    assert!(pass, "criterion {name}: {detail}");
    assert!(
        elapsed <= limit,
        "criterion {name}: runtime {:.2}s exceeds {:.0}s",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
}

type Oct = Octonion<f64>;

#[test]
fn criterion_01_octonion_algebra_exactness() {
    let start = Instant::now();
    let mut worst_equivariance = 0.0f64;
    let mut worst_gram = 0.0f64;

    let table_ok = verify_table(None).is_ok();

    let mut rng = StdRng::seed_from_u64(2001);
    for _ in 0..1000 {
        let mut ca = [0.0; 8];
        let mut cx = [0.0; 8];
        for v in ca.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        for v in cx.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let a = Oct::new(ca);
        let x = Oct::new(cx);
        let m = a.matrep();
        worst_equivariance =
            worst_equivariance.max((&m * x.as_vector() - (a * x).as_vector()).amax());
        let gram = &m * m.transpose() - DMatrix::<f64>::identity(8, 8) * a.norm2();
        worst_gram = worst_gram.max(gram.amax());
    }

    let pass = table_ok && worst_equivariance <= 1e-12 && worst_gram <= 1e-12;
    finish(
        "1 octonion algebra",
        Duration::from_secs(1),
        start,
        pass,
        format!("table={table_ok} equivariance={worst_equivariance:.2e} gram={worst_gram:.2e}"),
    );
}

#[test]
fn criterion_02_lie_basis() {
    let start = Instant::now();
    let basis = lie_basis::<f64>();
    let id = DMatrix::<f64>::identity(8, 8);
    let mut worst_skew = 0.0f64;
    let mut worst_square = 0.0f64;
    for h in &basis {
        worst_skew = worst_skew.max(max_abs(&(h + h.transpose())));
        worst_square = worst_square.max(max_abs_diff(&(h * h), &(-&id)));
    }
    let mut vectorized = DMatrix::<f64>::zeros(28, 64);
    for (r, h) in basis.iter().enumerate() {
        for (c, v) in h.iter().enumerate() {
            vectorized[(r, c)] = *v;
        }
    }
    let rank = vectorized
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > 1e-6)
        .count();

    let pass = basis.len() == 28 && worst_skew <= 1e-12 && worst_square <= 1e-12 && rank == 28;
    finish(
        "2 lie basis",
        Duration::from_secs(1),
        start,
        pass,
        format!(
            "count={} skew={worst_skew:.2e} square={worst_square:.2e} rank={rank}",
            basis.len()
        ),
    );
}

#[test]
fn criterion_03_dihedral_angle_lemma() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2003);
    let mut worst_half = 0.0f64;
    let mut all_strong = true;
    let mut worst_theta = 0.0f64;
    let p0 = Projection::<f64>::base(8);
    let tol = 1e-9;

    for i in 1..8 {
        for j in 1..8 {
            if i == j {
                continue;
            }
            for _ in 0..20 {
                let c: f64 = rng.random_range(-4.0..4.0);
                if c.abs() < 1e-3 {
                    continue;
                }
                let p = octonion_graph_projection(&Oct::basis(i));
                let q = octonion_graph_projection(&Oct::scaled_basis(j, c));
                let report = certify_pair(&p, &q, tol).unwrap();
                all_strong &= report.is_strong;
                worst_half = worst_half.max((report.alpha * report.alpha - 0.5).abs());
            }
        }
    }
    for j in 1..8 {
        for _ in 0..20 {
            let c: f64 = rng.random_range(-4.0..4.0);
            if c.abs() < 1e-3 {
                continue;
            }
            let q = octonion_graph_projection(&Oct::scaled_basis(j, c));
            let report = certify_pair(&p0, &q, tol).unwrap();
            worst_theta = worst_theta.max((report.theta - c.abs().atan()).abs());
        }
    }

    let pass = all_strong && worst_half <= 1e-10 && worst_theta <= 1e-10;
    finish(
        "3 dihedral angle lemma",
        Duration::from_secs(5),
        start,
        pass,
        format!("strong={all_strong} |alpha^2-1/2|={worst_half:.2e} |theta-atan|={worst_theta:.2e}"),
    );
}

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
        terms.push(GeneratorTerm::new(k, j, rng.random_range(-bound..bound)).unwrap());
    }
    GateProgram::new(terms)
}

#[test]
fn criterion_04_synthesis_roundtrip() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2004);
    let mut worst_roundtrip = 0.0f64;
    let mut worst_variant = 0.0f64;
    for _ in 0..100 {
        let program = random_program(&mut rng, 8);
        let target = gate_product(&program);

        let default = evaluate(&compile(&program, &SynthesisOptions::default()).unwrap())
            .unwrap()
            .normalized();
        worst_roundtrip = worst_roundtrip.max(dist(&default, &target));

        let no_split = SynthesisOptions {
            split_threshold: f64::INFINITY,
            ..SynthesisOptions::default()
        };
        let sliced = SynthesisOptions {
            slice_count: 3,
            ..SynthesisOptions::default()
        };
        let g_nosplit = evaluate(&compile(&program, &no_split).unwrap()).unwrap().normalized();
        let g_sliced = evaluate(&compile(&program, &sliced).unwrap()).unwrap().normalized();
        worst_variant = worst_variant
            .max(dist(&g_nosplit, &default))
            .max(dist(&g_sliced, &default));
    }
    let pass = worst_roundtrip <= 1e-8 && worst_variant <= 1e-9;
    finish(
        "4 synthesis roundtrip",
        Duration::from_secs(10),
        start,
        pass,
        format!("roundtrip={worst_roundtrip:.2e} variants={worst_variant:.2e}"),
    );
}

#[test]
fn criterion_05_so8_decomposition() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2005);
    let opts = SynthesisOptions {
        tolerance: 1e-6,
        ..SynthesisOptions::default()
    };
    let mut worst_residual = 0.0f64;
    let mut worst_end_to_end = 0.0f64;
    let mut max_terms = 0usize;
    for _ in 0..50 {
        let target = expm_oracle(&random_skew_bounded(8, 2.0, &mut rng));
        let program = decompose_so8(&target, &opts).unwrap();
        max_terms = max_terms.max(program.terms.len());
        worst_residual = worst_residual.max(dist(&gate_product(&program), &target));
        let gate = evaluate(&compile(&program, &SynthesisOptions::default()).unwrap())
            .unwrap()
            .normalized();
        worst_end_to_end = worst_end_to_end.max(dist(&gate, &target));
    }
    let pass =
        worst_residual <= 1e-6 && worst_end_to_end <= 1e-6 && max_terms <= opts.max_factors;
    finish(
        "5 so8 decomposition",
        Duration::from_secs(60),
        start,
        pass,
        format!(
            "residual={worst_residual:.2e} end_to_end={worst_end_to_end:.2e} max_terms={max_terms}"
        ),
    );
}

#[test]
fn criterion_06_forced_measurement_statistics() {
    let start = Instant::now();
    // Six terms at t = ±π/4: every chain step (label pairs and the base
    // separators, where |c| = 1) sits at alpha² = 1/2 exactly.
    let program = GateProgram::new(vec![
        GeneratorTerm::new(1, 2, std::f64::consts::FRAC_PI_4).unwrap(),
        GeneratorTerm::new(3, 4, -std::f64::consts::FRAC_PI_4).unwrap(),
        GeneratorTerm::new(5, 6, std::f64::consts::FRAC_PI_4).unwrap(),
        GeneratorTerm::new(0, 7, std::f64::consts::FRAC_PI_4).unwrap(),
        GeneratorTerm::new(2, 5, -std::f64::consts::FRAC_PI_4).unwrap(),
        GeneratorTerm::new(1, 6, std::f64::consts::FRAC_PI_4).unwrap(),
    ]);
    let seq = compile(&program, &SynthesisOptions::default()).unwrap();
    let nodes = equiangular::synthesis::chain_nodes(&seq);
    let psi = QuantumState::<f64>::basis(16, 3);
    let run = run_trials(&psi, &seq, 100_000, 20_240, 64).unwrap();

    // Label-label steps: both endpoints are lines.
    let mut label_steps = Vec::new();
    let mut prev: ChainNode<f64> = ChainNode::Base;
    for (idx, node) in nodes.iter().enumerate() {
        if matches!(prev, ChainNode::Label(_)) && matches!(node, ChainNode::Label(_)) {
            label_steps.push(idx);
        }
        prev = *node;
    }
    assert_eq!(label_steps.len(), 6);
    let mut worst_freq = 0.0f64;
    for idx in label_steps {
        let freq = run.stats.empirical_step_success[&idx];
        worst_freq = worst_freq.max((freq - 0.5).abs());
    }

    let fidelity_ok = run.stats.successes == run.stats.trials
        && run.stats.final_fidelity_min >= 1.0 - 1e-9;

    let mut worst_tail_ratio = 0.0f64;
    for r in 0..=10usize {
        let tail = run.retry_tail(r);
        let bound = 1.1 * 2.0f64.powi(-(r as i32));
        worst_tail_ratio = worst_tail_ratio.max(tail / bound);
    }

    let pass = worst_freq <= 0.005 && fidelity_ok && worst_tail_ratio <= 1.0;
    finish(
        "6 forced measurement statistics",
        Duration::from_secs(120),
        start,
        pass,
        format!(
            "|freq-1/2|={worst_freq:.4} fidelity_min={:.3e} tail_ratio={worst_tail_ratio:.3}",
            1.0 - run.stats.final_fidelity_min
        ),
    );
}

#[test]
fn criterion_07_su4_embedding() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2007);
    let mut worst_hom = 0.0f64;
    let mut worst_orth = 0.0f64;
    let mut worst_det = 0.0f64;
    for _ in 0..100 {
        let a = random_unitary(4, &mut rng);
        let b = random_unitary(4, &mut rng);
        let (ea, eb) = (embed_su4(&a).unwrap(), embed_su4(&b).unwrap());
        let eab = embed_su4(&(&a * &b)).unwrap();
        worst_hom = worst_hom.max(dist(&(&ea * &eb), &eab));
        worst_orth = worst_orth.max(unitary_residual(&ea));
        worst_det = worst_det.max((ea.determinant() - 1.0).abs());
    }
    let pass = worst_hom <= 1e-12 && worst_orth <= 1e-12 && worst_det <= 1e-12;
    finish(
        "7 su4 embedding",
        Duration::from_secs(10),
        start,
        pass,
        format!("hom={worst_hom:.2e} orth={worst_orth:.2e} det={worst_det:.2e}"),
    );
}

#[test]
fn criterion_08_family_properties() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2008);
    let tol = 1e-9;
    let mut all_strong = true;
    for kind in [RingKind::Complex, RingKind::Quaternion] {
        for _ in 0..100 {
            let n = kind.coefficient_count();
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            if a.iter().map(|x| x * x).sum::<f64>() < 1e-2
                || b.iter().map(|x| x * x).sum::<f64>() < 1e-2
            {
                continue;
            }
            let p = continuous_family_sample(kind, &a).unwrap();
            let q = continuous_family_sample(kind, &b).unwrap();
            all_strong &= certify_pair(&p, &q, tol).unwrap().is_strong;
        }
    }

    // Octonion pairs: the inner-product criterion and the dense verdict agree.
    let mut octonion_ok = true;
    for _ in 0..100 {
        let mut ca = [0.0; 8];
        let mut cb = [0.0; 8];
        for v in ca.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        for v in cb.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let (a, b) = (Oct::new(ca), Oct::new(cb));
        if a.norm2() < 1e-2 || b.norm2() < 1e-2 {
            continue;
        }
        let check = line_pair_check(&a.matrep(), &b.matrep(), tol).unwrap();
        let dense = certify_pair(
            &octonion_graph_projection(&a),
            &octonion_graph_projection(&b),
            tol,
        )
        .unwrap();
        octonion_ok &= check.holds && dense.is_strong && (check.alpha - dense.alpha).abs() <= 1e-9;
        // The scale of A†B + B†A is twice the 8-vector inner product.
        let cross = a.matrep().transpose() * b.matrep() + b.matrep().transpose() * a.matrep();
        let expected = DMatrix::<f64>::identity(8, 8) * (2.0 * a.dot(&b));
        octonion_ok &= max_abs_diff(&cross, &expected) <= 1e-12;
    }

    let pass = all_strong && octonion_ok;
    finish(
        "8 family properties",
        Duration::from_secs(30),
        start,
        pass,
        format!("complex/quaternion strong={all_strong} octonion criterion={octonion_ok}"),
    );
}

#[test]
fn criterion_09_sic_formula() {
    let start = Instant::now();
    let report = sic_check(&tetrahedron_sic(), 2, 1e-9).unwrap();
    let exact = report.passes && (report.alpha2_measured - sic_formula_alpha2(2)).abs() <= 1e-12;

    let third = (sic_formula_alpha2(2) - 1.0 / 3.0).abs() <= 1e-15;
    let mut trend = true;
    let mut prev = 0.0;
    for n in 2..=64 {
        let v = sic_formula_alpha2(n);
        trend &= v > prev && v < 0.5;
        prev = v;
    }
    trend &= (sic_formula_alpha2(64) - 0.5).abs() < 2e-4;

    let pass = exact && third && trend;
    finish(
        "9 sic formula",
        Duration::from_secs(5),
        start,
        pass,
        format!(
            "measured={:.15} formula={:.15} trend_to_half={trend}",
            report.alpha2_measured, report.alpha2_formula
        ),
    );
}

#[test]
fn criterion_10_spin_binding_demo() {
    let start = Instant::now();
    let report = spin_binding_projection().unwrap();
    let ranks_ok = report.rank == 10 && report.complement_rank == 6;
    let mut spectra_logged = true;
    for (i, j, audit) in &report.audits {
        spectra_logged &= audit.principal_cosines.len() == 10;
        println!(
            "  spin pairing {i}-{j}: equiangular={} cosines={:?}",
            audit.is_equiangular,
            audit
                .principal_cosines
                .iter()
                .map(|c| (c * 1e6).round() / 1e6)
                .collect::<Vec<_>>()
        );
        // A genuinely non-flat spectrum backs the verdict.
        if !audit.is_equiangular {
            spectra_logged &= cosine_spread(audit) > 1e-3;
        }
    }
    let pass = ranks_ok && report.non_equiangular_found && spectra_logged;
    finish(
        "10 spin binding demo",
        Duration::from_secs(5),
        start,
        pass,
        format!(
            "rank={} complement={} non_equiangular={}",
            report.rank, report.complement_rank, report.non_equiangular_found
        ),
    );
}

#[test]
fn criterion_11_closure_audit() {
    let start = Instant::now();
    let data = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/data/packing_m4.json"
    ))
    .unwrap();
    let file: PlanesFileJson = serde_json::from_str(&data).unwrap();
    let planes = file.to_matrices().unwrap();
    let result = gate_group_closure(&planes, 0, 10_000, 1e-9).unwrap();

    let mut signed_zero_one = true;
    if let Some(elements) = &result.representative_matrices {
        for e in elements {
            // A scalar multiple of a ±1/0 matrix: s·E integer-valued for
            // s = 1 or s = √2.
            let ok = [1.0, 2.0f64.sqrt()].iter().any(|s| {
                e.iter()
                    .all(|v| ((v * s) - (v * s).round()).abs() <= 1e-9 && (v * s).abs() <= 1.0 + 1e-9)
            });
            signed_zero_one &= ok;
        }
    }

    // Generic complex-line pair: dense subgroup, budget exceeded.
    let line = |re: f64, im: f64| {
        let z = Oct::new([re, im, 0., 0., 0., 0., 0., 0.]).complex_matrep().unwrap();
        let mut m = DMatrix::<f64>::zeros(2, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&DMatrix::<f64>::identity(2, 2));
        m.view_mut((0, 2), (2, 2)).copy_from(&z.transpose());
        m
    };
    let dense = gate_group_closure(&[line(0.0, 0.0), line(1.0, 0.0), line(0.3, 0.7)], 0, 2000, 1e-9)
        .unwrap();

    let pass = result.is_finite && signed_zero_one && !dense.is_finite;
    finish(
        "11 closure audit",
        Duration::from_secs(60),
        start,
        pass,
        format!(
            "packing: finite={} elements={} signed01={signed_zero_one}; generic: exceeded={}",
            result.is_finite, result.elements_found, !dense.is_finite
        ),
    );
}

// Shared helper so criterion 6 can pull a basis state living in P0.
#[allow(dead_code)]
fn base_state(index: usize) -> QuantumState<f64> {
    let mut v = DVector::<f64>::zeros(16);
    v[index] = 1.0;
    QuantumState::normalized(v)
}
