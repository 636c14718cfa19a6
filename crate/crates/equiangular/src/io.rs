//! JSON schemas for every serializable object.
//!
//! Matrices serialize as `{"field": "R"|"C", "rows", "cols", "entries"}`
//! with a row-major entry array; complex entries are `[re, im]` pairs.
//! Octonions are flat arrays of 8 numbers. Projections add `rank` and `tol`
//! to the matrix schema. Traces are NDJSON, one measurement event per line.
//! All maps are ordered, so serialization is byte-deterministic for equal
//! inputs.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::EquiangularReport;
use crate::family::{ClosureResult, FamilyReport, SicReport, SpinBindingReport};
use crate::octonion::Octonion;
use crate::projection::Projection;
use crate::simulate::{Branch, EventLabel, MeasurementEvent, TrialStats};
use crate::synthesis::{
    GateProgram, GeneratorTerm, ProjectionSequence, SequenceLabel, StepAngle,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("schema violation: {detail}")]
    Schema { detail: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn schema(detail: impl Into<String>) -> IoError {
    IoError::Schema {
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldTag {
    R,
    C,
}

/// One matrix entry: a bare number over ℝ, an `[re, im]` pair over ℂ.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryJson {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub field: FieldTag,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<EntryJson>,
}

impl MatrixJson {
    pub fn from_real(m: &DMatrix<f64>) -> Self {
        Self {
            field: FieldTag::R,
            rows: m.nrows(),
            cols: m.ncols(),
            entries: m
                .row_iter()
                .flat_map(|r| r.iter().map(|v| EntryJson::Real(*v)).collect::<Vec<_>>())
                .collect(),
        }
    }

    pub fn from_complex(m: &DMatrix<Complex<f64>>) -> Self {
        Self {
            field: FieldTag::C,
            rows: m.nrows(),
            cols: m.ncols(),
            entries: m
                .row_iter()
                .flat_map(|r| {
                    r.iter()
                        .map(|v| EntryJson::Complex([v.re, v.im]))
                        .collect::<Vec<_>>()
                })
                .collect(),
        }
    }

    fn check_len(&self) -> Result<(), IoError> {
        if self.entries.len() != self.rows * self.cols {
            return Err(schema(format!(
                "{}x{} matrix needs {} entries, got {}",
                self.rows,
                self.cols,
                self.rows * self.cols,
                self.entries.len()
            )));
        }
        Ok(())
    }

    pub fn to_real(&self) -> Result<DMatrix<f64>, IoError> {
        self.check_len()?;
        if self.field != FieldTag::R {
            return Err(schema("expected a real matrix (field \"R\")"));
        }
        let mut values = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            match e {
                EntryJson::Real(v) => values.push(*v),
                EntryJson::Complex(_) => {
                    return Err(schema("complex entry in a matrix tagged \"R\""))
                }
            }
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &values))
    }

    /// Reads either field; real input is lifted to complex.
    pub fn to_complex(&self) -> Result<DMatrix<Complex<f64>>, IoError> {
        self.check_len()?;
        let mut values = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            match (self.field, e) {
                (FieldTag::R, EntryJson::Real(v)) => values.push(Complex::new(*v, 0.0)),
                (FieldTag::C, EntryJson::Complex([re, im])) => values.push(Complex::new(*re, *im)),
                (FieldTag::C, EntryJson::Real(v)) => values.push(Complex::new(*v, 0.0)),
                (FieldTag::R, EntryJson::Complex(_)) => {
                    return Err(schema("complex entry in a matrix tagged \"R\""))
                }
            }
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &values))
    }
}

/// Projection schema: the matrix plus its rank and validation tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionJson {
    #[serde(flatten)]
    pub matrix: MatrixJson,
    pub rank: usize,
    pub tol: f64,
}

impl ProjectionJson {
    pub fn from_projection_real(p: &Projection<f64>) -> Self {
        Self {
            matrix: MatrixJson::from_real(p.matrix()),
            rank: p.rank(),
            tol: p.tol(),
        }
    }

    pub fn from_projection_complex(p: &Projection<Complex<f64>>) -> Self {
        Self {
            matrix: MatrixJson::from_complex(p.matrix()),
            rank: p.rank(),
            tol: p.tol(),
        }
    }

    /// Revalidates on load; the declared rank must match the recomputed one.
    pub fn to_projection_real(&self) -> Result<Projection<f64>, IoError> {
        let m = self.matrix.to_real()?;
        let p = Projection::new(m, self.tol).map_err(|e| schema(e.to_string()))?;
        if p.rank() != self.rank {
            return Err(schema(format!(
                "declared rank {} but trace gives {}",
                self.rank,
                p.rank()
            )));
        }
        Ok(p)
    }

    pub fn to_projection_complex(&self) -> Result<Projection<Complex<f64>>, IoError> {
        let m = self.matrix.to_complex()?;
        let p = Projection::new(m, self.tol).map_err(|e| schema(e.to_string()))?;
        if p.rank() != self.rank {
            return Err(schema(format!(
                "declared rank {} but trace gives {}",
                self.rank,
                p.rank()
            )));
        }
        Ok(p)
    }
}

/// Octonions are arrays of 8 coefficients.
pub fn octonion_to_json(o: &Octonion<f64>) -> [f64; 8] {
    o.coeffs
}

pub fn octonion_from_json(coeffs: [f64; 8]) -> Octonion<f64> {
    Octonion::new(coeffs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub k: usize,
    pub j: usize,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramJson {
    pub terms: Vec<TermJson>,
}

impl ProgramJson {
    pub fn from_program(p: &GateProgram<f64>) -> Self {
        Self {
            terms: p
                .terms
                .iter()
                .map(|t| TermJson {
                    k: t.k,
                    j: t.j,
                    t: t.t,
                })
                .collect(),
        }
    }

    pub fn to_program(&self) -> Result<GateProgram<f64>, IoError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            terms.push(
                GeneratorTerm::new(t.k, t.j, t.t).map_err(|e| schema(e.to_string()))?,
            );
        }
        Ok(GateProgram::new(terms))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelJson {
    pub axis: usize,
    pub c: f64,
}

/// `P₀` separators are implicit: labels pair up into compiled groups.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceJson {
    pub labels: Vec<LabelJson>,
}

impl SequenceJson {
    pub fn from_sequence(s: &ProjectionSequence<f64>) -> Self {
        Self {
            labels: s
                .labels
                .iter()
                .map(|l| LabelJson {
                    axis: l.axis,
                    c: l.c,
                })
                .collect(),
        }
    }

    pub fn to_sequence(&self) -> Result<ProjectionSequence<f64>, IoError> {
        let mut labels = Vec::with_capacity(self.labels.len());
        for l in &self.labels {
            if l.axis > 7 {
                return Err(schema(format!("label axis {} out of range 0..8", l.axis)));
            }
            labels.push(SequenceLabel {
                axis: l.axis,
                c: l.c,
            });
        }
        Ok(ProjectionSequence { labels })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportJson {
    pub is_equiangular: bool,
    pub is_strong: bool,
    pub alpha: f64,
    pub theta: f64,
    pub principal_cosines: Vec<f64>,
    pub rank_p: usize,
    pub rank_q: usize,
    pub residual: f64,
}

impl ReportJson {
    pub fn from_report(r: &EquiangularReport<f64>) -> Self {
        Self {
            is_equiangular: r.is_equiangular,
            is_strong: r.is_strong,
            alpha: r.alpha,
            theta: r.theta,
            principal_cosines: r.principal_cosines.clone(),
            rank_p: r.rank_p,
            rank_q: r.rank_q,
            residual: r.residual,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepAngleJson {
    pub from: String,
    pub to: String,
    pub alpha: f64,
    pub theta: f64,
}

fn node_name(node: &crate::synthesis::ChainNode<f64>) -> String {
    match node {
        crate::synthesis::ChainNode::Base => "P0".to_string(),
        crate::synthesis::ChainNode::Label(l) => format!("{}*e{}", l.c, l.axis),
    }
}

impl StepAngleJson {
    pub fn from_step(s: &StepAngle<f64>) -> Self {
        Self {
            from: node_name(&s.from),
            to: node_name(&s.to),
            alpha: s.alpha,
            theta: s.theta,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EventLabelJson {
    Base(String),
    Line { axis: usize, c: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventJson {
    pub step_index: usize,
    pub projector_label: EventLabelJson,
    pub branch: String,
    pub branch_probability: f64,
    pub retry_depth: usize,
}

impl EventJson {
    pub fn from_event(e: &MeasurementEvent) -> Self {
        Self {
            step_index: e.step_index,
            projector_label: match e.projector_label {
                EventLabel::Base => EventLabelJson::Base("P0".to_string()),
                EventLabel::Line { axis, c } => EventLabelJson::Line { axis, c },
            },
            branch: match e.branch {
                Branch::Success => "success".to_string(),
                Branch::Failure => "failure".to_string(),
            },
            branch_probability: e.branch_probability,
            retry_depth: e.retry_depth,
        }
    }
}

/// NDJSON encoding of a trace: one event per line.
pub fn trace_to_ndjson(trace: &[MeasurementEvent]) -> Result<String, IoError> {
    let mut out = String::new();
    for event in trace {
        out.push_str(&serde_json::to_string(&EventJson::from_event(event))?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsJson {
    pub trials: usize,
    pub successes: usize,
    pub mean_measurements: f64,
    pub empirical_step_success: BTreeMap<String, f64>,
    pub final_fidelity_min: f64,
}

impl StatsJson {
    pub fn from_stats(s: &TrialStats) -> Self {
        Self {
            trials: s.trials,
            successes: s.successes,
            mean_measurements: s.mean_measurements,
            empirical_step_success: s
                .empirical_step_success
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            final_fidelity_min: s.final_fidelity_min,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyReportJson {
    pub size: usize,
    pub pairwise: Vec<Vec<ReportJson>>,
    pub mutually_equiangular: bool,
    pub mutually_strong: bool,
    pub distinct_alphas: Vec<f64>,
}

impl FamilyReportJson {
    pub fn from_report(r: &FamilyReport<f64>) -> Self {
        Self {
            size: r.size,
            pairwise: r
                .pairwise
                .iter()
                .map(|row| row.iter().map(ReportJson::from_report).collect())
                .collect(),
            mutually_equiangular: r.mutually_equiangular,
            mutually_strong: r.mutually_strong,
            distinct_alphas: r.distinct_alphas.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClosureJson {
    pub elements_found: usize,
    pub is_finite: bool,
    pub budget: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representative_matrices: Option<Vec<MatrixJson>>,
}

impl ClosureJson {
    pub fn from_result(r: &ClosureResult) -> Self {
        Self {
            elements_found: r.elements_found,
            is_finite: r.is_finite,
            budget: r.budget,
            representative_matrices: r
                .representative_matrices
                .as_ref()
                .map(|ms| ms.iter().map(MatrixJson::from_real).collect()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SicReportJson {
    pub n: usize,
    pub operator_count: usize,
    pub lambda: f64,
    pub alpha2_measured: f64,
    pub alpha2_formula: f64,
    pub sum_residual: f64,
    pub scalar_residual: f64,
    pub alpha2_spread: f64,
    pub passes: bool,
}

impl SicReportJson {
    pub fn from_report(r: &SicReport) -> Self {
        Self {
            n: r.n,
            operator_count: r.operator_count,
            lambda: r.lambda,
            alpha2_measured: r.alpha2_measured,
            alpha2_formula: r.alpha2_formula,
            sum_residual: r.sum_residual,
            scalar_residual: r.scalar_residual,
            alpha2_spread: r.alpha2_spread,
            passes: r.passes,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinDemoJson {
    pub rank: usize,
    pub complement_rank: usize,
    /// The three-pairing audit is an interpretation of the multi-molecule
    /// picture, not a construction fixed by the source model.
    pub interpretation: String,
    pub audits: Vec<SpinAuditJson>,
    pub non_equiangular_found: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinAuditJson {
    pub pairing_a: String,
    pub pairing_b: String,
    pub report: ReportJson,
}

const PAIRING_NAMES: [&str; 3] = ["12|34", "13|24", "14|23"];

impl SpinDemoJson {
    pub fn from_report(r: &SpinBindingReport) -> Self {
        Self {
            rank: r.rank,
            complement_rank: r.complement_rank,
            interpretation: "three pairings of four spins into two molecules".to_string(),
            audits: r
                .audits
                .iter()
                .map(|(i, j, rep)| SpinAuditJson {
                    pairing_a: PAIRING_NAMES[*i].to_string(),
                    pairing_b: PAIRING_NAMES[*j].to_string(),
                    report: ReportJson::from_report(rep),
                })
                .collect(),
            non_equiangular_found: r.non_equiangular_found,
        }
    }
}

/// External plane-family file: integer bases with a declared squared row
/// norm, validated rather than trusted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaneJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<i64>,
    pub row_norm2: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanesFileJson {
    pub planes: Vec<PlaneJson>,
}

impl PlanesFileJson {
    /// Validates integer entries, row orthogonality, and the declared norm.
    pub fn to_matrices(&self) -> Result<Vec<DMatrix<f64>>, IoError> {
        let mut out = Vec::with_capacity(self.planes.len());
        for (idx, plane) in self.planes.iter().enumerate() {
            if plane.entries.len() != plane.rows * plane.cols {
                return Err(schema(format!("plane {idx}: entry count mismatch")));
            }
            let m = DMatrix::<f64>::from_row_slice(
                plane.rows,
                plane.cols,
                &plane.entries.iter().map(|v| *v as f64).collect::<Vec<_>>(),
            );
            for r in 0..plane.rows {
                let norm2: i64 = (0..plane.cols)
                    .map(|c| plane.entries[r * plane.cols + c].pow(2))
                    .sum();
                if norm2 != plane.row_norm2 {
                    return Err(schema(format!(
                        "plane {idx} row {r}: norm² {} differs from declared {}",
                        norm2, plane.row_norm2
                    )));
                }
                for r2 in (r + 1)..plane.rows {
                    let dot: i64 = (0..plane.cols)
                        .map(|c| {
                            plane.entries[r * plane.cols + c] * plane.entries[r2 * plane.cols + c]
                        })
                        .sum();
                    if dot != 0 {
                        return Err(schema(format!(
                            "plane {idx}: rows {r} and {r2} are not orthogonal"
                        )));
                    }
                }
            }
            out.push(m);
        }
        Ok(out)
    }
}

/// SIC operator input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SicFileJson {
    pub n: usize,
    pub operators: Vec<MatrixJson>,
}

/// State vector input: matrix schema with a single column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorJson {
    pub field: FieldTag,
    pub entries: Vec<f64>,
}
