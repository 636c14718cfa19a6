//! Command-line surface for the equiangular projection toolkit.
//!
//! Subcommands: verify-octonions, check-pair, synth, eval-seq, decompose,
//! simulate, family-audit, sic-check, spin-demo. Output is JSON on stdout
//! (`--pretty` for indented form); traces are NDJSON. Exit codes: 0 pass,
//! 1 verified failure, 2 usage or I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use equiangular::certify::certify_pair;
use equiangular::family::{
    family_audit, gate_group_closure, sic_check, sic_formula_alpha2, spin_binding_projection,
    tetrahedron_sic,
};
use equiangular::io::{
    trace_to_ndjson, ClosureJson, FamilyReportJson, MatrixJson, PlanesFileJson, ProgramJson,
    ProjectionJson, ReportJson, SequenceJson, SicFileJson, SicReportJson, SpinDemoJson, StatsJson,
    StepAngleJson, VectorJson,
};
use equiangular::linalg::max_abs;
use equiangular::octonion::{verify_table, Octonion};
use equiangular::projection::{octonion_graph_projection, Projection};
use equiangular::simulate::{run_forced, run_trials, trial_rng, QuantumState, SimError};
use equiangular::synthesis::{
    compile, decompose_so8, evaluate, gate_product, lie_basis, sequence_angles, SynthesisError,
    SynthesisOptions,
};

#[derive(Parser)]
#[command(
    name = "equiangular",
    version,
    about = "Equiangular projections: gate synthesis, certification, forced-measurement simulation"
)]
struct Cli {
    /// Absolute tolerance for certification checks (default 1e-9).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Pretty-print JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the octonion and Lie-basis invariant suite.
    VerifyOctonions {
        /// Corrupt one generated table entry (test hook).
        #[arg(long, hide = true)]
        inject_table_fault: bool,
    },
    /// Certify (strong) equiangularity of two projections.
    CheckPair { p: PathBuf, q: PathBuf },
    /// Compile a gate program into a projection sequence.
    Synth {
        program: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Largest |tan t| compiled without halving.
        #[arg(long, default_value_t = 1.0)]
        split_threshold: f64,
        /// Adiabatic slicing factor.
        #[arg(long, default_value_t = 1)]
        slice: usize,
    },
    /// Evaluate a projection sequence to its gate, scale, and step angles.
    EvalSeq { seq: PathBuf },
    /// Decompose a special orthogonal 8x8 target into a gate program.
    Decompose {
        target: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Residual target (defaults to 1e-8).
        #[arg(long)]
        tolerance: Option<f64>,
        /// Budget on emitted generator terms.
        #[arg(long)]
        max_factors: Option<usize>,
    },
    /// Run seeded forced-measurement trials of a sequence.
    Simulate {
        /// Projection sequence file.
        #[arg(long, conflicts_with = "program")]
        seq: Option<PathBuf>,
        /// Gate program file, compiled before simulation.
        #[arg(long)]
        program: Option<PathBuf>,
        /// Adiabatic slicing factor used when compiling --program.
        #[arg(long, default_value_t = 1)]
        slice: usize,
        #[arg(long, default_value_t = 1.0)]
        split_threshold: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Base seed (falls back to EQUIANGULAR_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 64)]
        max_retries: usize,
        /// Initial state vector file (defaults to the first basis vector).
        #[arg(long)]
        state: Option<PathBuf>,
        /// NDJSON trace output (single-trial runs only).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Largest tolerated fraction of retry-budget-exhausted trials.
        #[arg(long, default_value_t = 0.0)]
        fail_threshold: f64,
    },
    /// Pairwise equiangularity audit of a projection family.
    FamilyAudit {
        /// JSON array of projection objects.
        #[arg(long)]
        projections: Option<PathBuf>,
        /// Plane-basis family file (integer bases with declared row norm).
        #[arg(long)]
        planes: Option<PathBuf>,
        /// Built-in family: "octonion-basis".
        #[arg(long)]
        builtin: Option<String>,
        /// Also enumerate the gate-group closure (plane input only).
        #[arg(long)]
        closure: bool,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        base_index: usize,
    },
    /// Verify a strongly equiangular IC-POVM or evaluate the closed form.
    SicCheck {
        /// Operator family file.
        #[arg(long)]
        operators: Option<PathBuf>,
        /// Evaluate the closed-form alpha^2 only.
        #[arg(long)]
        formula_only: bool,
        #[arg(long)]
        n: Option<usize>,
        /// Check the built-in n = 2 tetrahedron family.
        #[arg(long)]
        demo: bool,
    },
    /// Spin-binding projection demo: ranks and the three-pairing audit.
    SpinDemo,
}

enum CliError {
    /// Malformed input, I/O trouble, bad flags: exit 2.
    Usage(String),
    /// A verified failure with a machine-readable report: exit 1.
    Failure(serde_json::Value),
}

impl CliError {
    fn usage(e: impl ToString) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T, pretty: bool) -> Result<(), CliError> {
    let text = render(value, pretty)?;
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn render<T: Serialize>(value: &T, pretty: bool) -> Result<String, CliError> {
    let mut s = if pretty {
        serde_json::to_string_pretty(value).map_err(CliError::usage)?
    } else {
        serde_json::to_string(value).map_err(CliError::usage)?
    };
    s.push('\n');
    Ok(s)
}

fn emit<T: Serialize>(value: &T, pretty: bool) -> Result<(), CliError> {
    print!("{}", render(value, pretty)?);
    Ok(())
}

fn default_seed(cli_seed: Option<u64>) -> u64 {
    cli_seed.unwrap_or_else(|| {
        std::env::var("EQUIANGULAR_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = cli.tol.unwrap_or(1e-9);
    let pretty = cli.pretty;
    match run(cli.command, tol, pretty) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failure(report)) => {
            let text = serde_json::to_string_pretty(&report).unwrap_or_default();
            println!("{text}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, tol: f64, pretty: bool) -> Result<(), CliError> {
    match command {
        Command::VerifyOctonions { inject_table_fault } => {
            cmd_verify_octonions(inject_table_fault, pretty)
        }
        Command::CheckPair { p, q } => cmd_check_pair(&p, &q, tol, pretty),
        Command::Synth {
            program,
            out,
            split_threshold,
            slice,
        } => cmd_synth(&program, &out, split_threshold, slice, pretty),
        Command::EvalSeq { seq } => cmd_eval_seq(&seq, pretty),
        Command::Decompose {
            target,
            out,
            tolerance,
            max_factors,
        } => cmd_decompose(&target, &out, tolerance, max_factors, pretty),
        Command::Simulate {
            seq,
            program,
            slice,
            split_threshold,
            trials,
            seed,
            max_retries,
            state,
            trace,
            fail_threshold,
        } => cmd_simulate(
            seq.as_deref(),
            program.as_deref(),
            slice,
            split_threshold,
            trials,
            default_seed(seed),
            max_retries,
            state.as_deref(),
            trace.as_deref(),
            fail_threshold,
            pretty,
        ),
        Command::FamilyAudit {
            projections,
            planes,
            builtin,
            closure,
            budget,
            base_index,
        } => cmd_family_audit(
            projections.as_deref(),
            planes.as_deref(),
            builtin.as_deref(),
            closure,
            budget,
            base_index,
            tol,
            pretty,
        ),
        Command::SicCheck {
            operators,
            formula_only,
            n,
            demo,
        } => cmd_sic_check(operators.as_deref(), formula_only, n, demo, tol, pretty),
        Command::SpinDemo => cmd_spin_demo(pretty),
    }
}

fn cmd_verify_octonions(inject_fault: bool, pretty: bool) -> Result<(), CliError> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    let mut checks: Vec<serde_json::Value> = Vec::new();
    let mut record = |name: &str, pass: bool, detail: String| {
        checks.push(json!({"name": name, "pass": pass, "detail": detail}));
        pass
    };

    let fault = if inject_fault { Some((1, 2)) } else { None };
    let table = verify_table(fault);
    let mut all = record(
        "multiplication-table-cross-check",
        table.is_ok(),
        table.err().map(|e| e.to_string()).unwrap_or_default(),
    );

    let mut rng = StdRng::seed_from_u64(0xE0);
    let mut worst_equiv = 0.0f64;
    let mut worst_gram = 0.0f64;
    let mut worst_conj = 0.0f64;
    for _ in 0..200 {
        let mut ca = [0.0; 8];
        let mut cx = [0.0; 8];
        for v in ca.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        for v in cx.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let (a, x) = (Octonion::new(ca), Octonion::new(cx));
        let m = a.matrep();
        worst_equiv = worst_equiv.max((&m * x.as_vector() - (a * x).as_vector()).amax());
        worst_gram = worst_gram
            .max((&m * m.transpose() - nalgebra::DMatrix::<f64>::identity(8, 8) * a.norm2()).amax());
        worst_conj = worst_conj.max((a.conj().matrep() - m.transpose()).amax());
    }
    all &= record(
        "matrep-left-multiplication",
        worst_equiv <= 1e-12,
        format!("max residual {worst_equiv:.3e}"),
    );
    all &= record(
        "matrep-scaled-orthogonality",
        worst_gram <= 1e-12,
        format!("max residual {worst_gram:.3e}"),
    );
    all &= record(
        "conjugate-is-transpose",
        worst_conj <= 1e-12,
        format!("max residual {worst_conj:.3e}"),
    );

    let basis = lie_basis::<f64>();
    let id = nalgebra::DMatrix::<f64>::identity(8, 8);
    let mut worst_skew = 0.0f64;
    let mut worst_square = 0.0f64;
    for h in &basis {
        worst_skew = worst_skew.max(max_abs(&(h + h.transpose())));
        worst_square = worst_square.max(max_abs(&(h * h + &id)));
    }
    let mut vectorized = nalgebra::DMatrix::<f64>::zeros(28, 64);
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
    all &= record(
        "lie-basis",
        basis.len() == 28 && worst_skew <= 1e-12 && worst_square <= 1e-12 && rank == 28,
        format!(
            "count {} skew {worst_skew:.3e} square {worst_square:.3e} rank {rank}",
            basis.len()
        ),
    );

    let report = json!({"pass": all, "checks": checks});
    if all {
        emit(&report, pretty)
    } else {
        Err(CliError::Failure(report))
    }
}

fn cmd_check_pair(p_path: &Path, q_path: &Path, tol: f64, pretty: bool) -> Result<(), CliError> {
    let pj: ProjectionJson = read_json(p_path)?;
    let qj: ProjectionJson = read_json(q_path)?;
    let real = matches!(pj.matrix.field, equiangular::io::FieldTag::R)
        && matches!(qj.matrix.field, equiangular::io::FieldTag::R);
    let report = if real {
        let p = pj.to_projection_real().map_err(CliError::usage)?;
        let q = qj.to_projection_real().map_err(CliError::usage)?;
        certify_pair(&p, &q, tol).map_err(CliError::usage)?
    } else {
        let p = pj.to_projection_complex().map_err(CliError::usage)?;
        let q = qj.to_projection_complex().map_err(CliError::usage)?;
        certify_pair(&p, &q, tol).map_err(CliError::usage)?
    };
    emit(&ReportJson::from_report(&report), pretty)
}

fn cmd_synth(
    program_path: &Path,
    out: &Path,
    split_threshold: f64,
    slice: usize,
    pretty: bool,
) -> Result<(), CliError> {
    let program_json: ProgramJson = read_json(program_path)?;
    let program = program_json.to_program().map_err(CliError::usage)?;
    let opts = SynthesisOptions {
        split_threshold,
        slice_count: slice.max(1),
        ..SynthesisOptions::default()
    };
    let seq = compile(&program, &opts).map_err(CliError::usage)?;
    write_json(out, &SequenceJson::from_sequence(&seq), pretty)?;
    emit(
        &json!({"labels": seq.labels.len(), "written": out.display().to_string()}),
        pretty,
    )
}

fn cmd_eval_seq(seq_path: &Path, pretty: bool) -> Result<(), CliError> {
    let seq_json: SequenceJson = read_json(seq_path)?;
    let seq = seq_json.to_sequence().map_err(CliError::usage)?;
    let evaluation = evaluate(&seq).map_err(CliError::usage)?;
    let angles = sequence_angles(&seq).map_err(CliError::usage)?;
    emit(
        &json!({
            "gate": MatrixJson::from_real(&evaluation.normalized()),
            "scale": evaluation.scale(),
            "log2_scale": evaluation.log2_scale,
            "angles": angles.iter().map(StepAngleJson::from_step).collect::<Vec<_>>(),
        }),
        pretty,
    )
}

fn cmd_decompose(
    target_path: &Path,
    out: &Path,
    tolerance: Option<f64>,
    max_factors: Option<usize>,
    pretty: bool,
) -> Result<(), CliError> {
    let target_json: MatrixJson = read_json(target_path)?;
    let target = target_json.to_real().map_err(CliError::usage)?;
    let mut opts = SynthesisOptions::<f64>::default();
    if let Some(t) = tolerance {
        opts.tolerance = t;
    }
    if let Some(m) = max_factors {
        opts.max_factors = m;
    }
    match decompose_so8(&target, &opts) {
        Ok(program) => {
            write_json(out, &ProgramJson::from_program(&program), pretty)?;
            let residual = max_abs(&(gate_product(&program) - &target));
            emit(
                &json!({
                    "terms": program.terms.len(),
                    "residual": residual,
                    "written": out.display().to_string(),
                }),
                pretty,
            )
        }
        Err(SynthesisError::BudgetExceeded { residual, terms }) => Err(CliError::Failure(json!({
            "error": "budget-exceeded",
            "residual": residual,
            "terms": terms,
        }))),
        Err(other) => Err(CliError::usage(other)),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    seq: Option<&Path>,
    program: Option<&Path>,
    slice: usize,
    split_threshold: f64,
    trials: usize,
    seed: u64,
    max_retries: usize,
    state: Option<&Path>,
    trace: Option<&Path>,
    fail_threshold: f64,
    pretty: bool,
) -> Result<(), CliError> {
    let sequence = match (seq, program) {
        (Some(path), None) => {
            let seq_json: SequenceJson = read_json(path)?;
            seq_json.to_sequence().map_err(CliError::usage)?
        }
        (None, Some(path)) => {
            let program_json: ProgramJson = read_json(path)?;
            let program = program_json.to_program().map_err(CliError::usage)?;
            let opts = SynthesisOptions {
                split_threshold,
                slice_count: slice.max(1),
                ..SynthesisOptions::default()
            };
            compile(&program, &opts).map_err(CliError::usage)?
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --seq or --program is required".into(),
            ))
        }
    };
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }

    let initial = match state {
        Some(path) => {
            let v: VectorJson = read_json(path)?;
            if v.entries.len() != 16 {
                return Err(CliError::Usage(format!(
                    "state must have 16 amplitudes, got {}",
                    v.entries.len()
                )));
            }
            QuantumState::new(nalgebra::DVector::from_row_slice(&v.entries))
                .map_err(CliError::usage)?
        }
        None => QuantumState::<f64>::basis(16, 0),
    };

    if let Some(trace_path) = trace {
        if trials != 1 {
            return Err(CliError::Usage(
                "--trace emits one NDJSON event stream and requires --trials 1".into(),
            ));
        }
        let mut rng = trial_rng(seed, 0);
        let events = match run_forced(&initial, &sequence, &mut rng, max_retries) {
            Ok(run) => run.trace,
            Err(SimError::RetryBudgetExceeded { trace, .. }) => trace,
            Err(other) => return Err(CliError::usage(other)),
        };
        let nd = trace_to_ndjson(&events).map_err(CliError::usage)?;
        std::fs::write(trace_path, nd)
            .map_err(|e| CliError::Usage(format!("{}: {e}", trace_path.display())))?;
    }

    let run = run_trials(&initial, &sequence, trials, seed, max_retries)
        .map_err(CliError::usage)?;
    let stats = StatsJson::from_stats(&run.stats);
    let exhausted_rate = (run.stats.trials - run.stats.successes) as f64 / run.stats.trials as f64;
    if exhausted_rate > fail_threshold {
        return Err(CliError::Failure(json!({
            "error": "retry-budget-exceeded-rate",
            "rate": exhausted_rate,
            "threshold": fail_threshold,
            "stats": serde_json::to_value(&stats).map_err(CliError::usage)?,
        })));
    }
    emit(&stats, pretty)
}

#[allow(clippy::too_many_arguments)]
fn cmd_family_audit(
    projections: Option<&Path>,
    planes: Option<&Path>,
    builtin: Option<&str>,
    closure: bool,
    budget: usize,
    base_index: usize,
    tol: f64,
    pretty: bool,
) -> Result<(), CliError> {
    let mut closure_json: Option<ClosureJson> = None;
    let family = match (projections, planes, builtin) {
        (Some(path), None, None) => {
            let list: Vec<ProjectionJson> = read_json(path)?;
            let all_real = list
                .iter()
                .all(|p| matches!(p.matrix.field, equiangular::io::FieldTag::R));
            if all_real {
                let projs: Result<Vec<_>, _> =
                    list.iter().map(|p| p.to_projection_real()).collect();
                family_audit(&projs.map_err(CliError::usage)?, tol).map_err(CliError::usage)?
            } else {
                let projs: Result<Vec<_>, _> =
                    list.iter().map(|p| p.to_projection_complex()).collect();
                family_audit(&projs.map_err(CliError::usage)?, tol).map_err(CliError::usage)?
            }
        }
        (None, Some(path), None) => {
            let file: PlanesFileJson = read_json(path)?;
            let matrices = file.to_matrices().map_err(CliError::usage)?;
            if closure {
                let result = gate_group_closure(&matrices, base_index, budget, tol)
                    .map_err(CliError::usage)?;
                closure_json = Some(ClosureJson::from_result(&result));
            }
            let projs: Vec<Projection<f64>> = matrices
                .iter()
                .map(|m| {
                    let norm2 = (m * m.transpose())[(0, 0)];
                    Projection::with_default_tol(m.transpose() * m / norm2)
                        .map_err(CliError::usage)
                })
                .collect::<Result<_, _>>()?;
            family_audit(&projs, tol).map_err(CliError::usage)?
        }
        (None, None, Some("octonion-basis")) => {
            let mut projs = vec![Projection::<f64>::base(8)];
            for i in 1..8 {
                projs.push(octonion_graph_projection(&Octonion::<f64>::basis(i)));
            }
            family_audit(&projs, tol).map_err(CliError::usage)?
        }
        (None, None, Some(other)) => {
            return Err(CliError::Usage(format!("unknown builtin family {other:?}")))
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --projections, --planes, --builtin is required".into(),
            ))
        }
    };
    emit(
        &json!({
            "family": FamilyReportJson::from_report(&family),
            "closure": closure_json,
        }),
        pretty,
    )
}

fn cmd_sic_check(
    operators: Option<&Path>,
    formula_only: bool,
    n: Option<usize>,
    demo: bool,
    tol: f64,
    pretty: bool,
) -> Result<(), CliError> {
    if formula_only {
        let n = n.ok_or_else(|| CliError::Usage("--formula-only requires --n".into()))?;
        if n < 2 {
            return Err(CliError::Usage("--n must be at least 2".into()));
        }
        return emit(
            &json!({"n": n, "alpha2_formula": sic_formula_alpha2(n)}),
            pretty,
        );
    }
    let (ops, dim) = if demo {
        (tetrahedron_sic(), 2)
    } else {
        let path = operators.ok_or_else(|| {
            CliError::Usage("one of --operators, --formula-only, --demo is required".into())
        })?;
        let file: SicFileJson = read_json(path)?;
        let ops: Result<Vec<_>, _> = file.operators.iter().map(|m| m.to_complex()).collect();
        (ops.map_err(CliError::usage)?, file.n)
    };
    let report = sic_check(&ops, dim, tol.max(1e-12)).map_err(CliError::usage)?;
    let report_json = SicReportJson::from_report(&report);
    if report.passes {
        emit(&report_json, pretty)
    } else {
        Err(CliError::Failure(
            serde_json::to_value(&report_json).map_err(CliError::usage)?,
        ))
    }
}

fn cmd_spin_demo(pretty: bool) -> Result<(), CliError> {
    let report = spin_binding_projection().map_err(CliError::usage)?;
    eprintln!(
        "binding projection rank {} / complement rank {}",
        report.rank, report.complement_rank
    );
    for (i, j, audit) in &report.audits {
        eprintln!(
            "pairing {} vs {}: equiangular = {}, principal cosines = {:?}",
            ["12|34", "13|24", "14|23"][*i],
            ["12|34", "13|24", "14|23"][*j],
            audit.is_equiangular,
            audit.principal_cosines
        );
    }
    emit(&SpinDemoJson::from_report(&report), pretty)
}
