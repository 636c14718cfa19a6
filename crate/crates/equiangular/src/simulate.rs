//! Born-rule sampling and the forced-measurement retry protocol.
//!
//! A compiled sequence is executed as a chain of binary measurements
//! `{P, I−P}` over the 16-dimensional real space, starting from a state in
//! the range of `P₀`. When a step's projection lands in the undesired
//! branch, the protocol retries: measure the predecessor projection (`P₀` at
//! the chain boundary), then the step again, in alternation. All four
//! outcome combinations of one recovery round leave the state proportional
//! to a clean chain prefix, so on overall success the final state equals the
//! deterministic chain gate applied to the input, up to sign, regardless of
//! the random path taken.
//!
//! Randomness is counter-based for reproducibility: every trial draws from a
//! ChaCha8 stream whose 256-bit key is a SplitMix64 expansion of the base
//! seed and whose 64-bit stream id is the trial index. State size is the
//! 256-bit key plus the 64-bit stream and 64-bit block counter; trials can
//! run in any order or in parallel with identical results.

use std::collections::BTreeMap;

use nalgebra::{try_convert, DVector, RealField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::projection::Projection;
use crate::synthesis::{
    chain_nodes, evaluate, sequence_angles, ChainNode, ProjectionSequence, SynthesisError,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("state dimension {state} does not match projector dimension {proj}")]
    DimensionMismatch { state: usize, proj: usize },
    #[error("state is not in the range of the base projection (residual {residual:.3e})")]
    StateOutsideBase { residual: f64 },
    #[error("retry budget exhausted at step {step_index} after {retries} retries")]
    RetryBudgetExceeded {
        step_index: usize,
        retries: usize,
        trace: Vec<MeasurementEvent>,
    },
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}

/// A unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState<T: RealField + Copy> {
    amplitudes: DVector<T>,
}

impl<T: RealField + Copy> QuantumState<T> {
    /// Validates unit norm within 1e−12.
    pub fn new(amplitudes: DVector<T>) -> Result<Self, SimError> {
        let norm = amplitudes.norm();
        let dev: f64 = try_convert((norm - T::one()).abs()).unwrap_or(f64::NAN);
        if !(dev <= 1e-12) {
            return Err(SimError::StateOutsideBase { residual: dev });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: DVector<T>) -> Self {
        let norm = v.norm();
        Self {
            amplitudes: v / norm,
        }
    }

    /// Computational basis state `e_index` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::<T>::zeros(dim);
        v[index] = T::one();
        Self { amplitudes: v }
    }

    pub fn amplitudes(&self) -> &DVector<T> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Squared overlap `|⟨self, other⟩|²`; insensitive to a global sign.
    pub fn squared_overlap(&self, other: &Self) -> T {
        let ip = self.amplitudes.dot(&other.amplitudes);
        ip * ip
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Success,
    Failure,
}

/// Label of the projector a measurement event acted with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventLabel {
    Base,
    Line { axis: usize, c: f64 },
}

/// One projective measurement record.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEvent {
    pub step_index: usize,
    pub projector_label: EventLabel,
    pub branch: Branch,
    pub branch_probability: f64,
    pub retry_depth: usize,
}

/// Outcome of a single Born measurement.
#[derive(Debug, Clone)]
pub struct BornOutcome<T: RealField + Copy> {
    pub branch: Branch,
    /// Probability of the success branch (`‖Pψ‖²`), after clamping.
    pub probability: f64,
    pub post: QuantumState<T>,
}

/// Projective measurement `{P, I−P}` by the Born rule; draws exactly one
/// uniform variate from `rng`. Probabilities within 1e−12 of 0 or 1 are
/// clamped before sampling.
pub fn born_measure<T: RealField + Copy, R: Rng + ?Sized>(
    state: &QuantumState<T>,
    p: &Projection<T>,
    rng: &mut R,
) -> Result<BornOutcome<T>, SimError> {
    if state.dim() != p.dim() {
        return Err(SimError::DimensionMismatch {
            state: state.dim(),
            proj: p.dim(),
        });
    }
    let projected = p.matrix() * state.amplitudes();
    let mut prob: f64 = try_convert(projected.norm_squared()).unwrap_or(0.0);
    if prob < 1e-12 {
        prob = 0.0;
    } else if prob > 1.0 - 1e-12 {
        prob = 1.0;
    }
    let u: f64 = rng.random();
    let success = u < prob;
    let post_vec = if success {
        projected
    } else {
        state.amplitudes() - projected
    };
    Ok(BornOutcome {
        branch: if success { Branch::Success } else { Branch::Failure },
        probability: prob,
        post: QuantumState::normalized(post_vec),
    })
}

/// Result of one forced run.
#[derive(Debug, Clone)]
pub struct ForcedRun<T: RealField + Copy> {
    pub final_state: QuantumState<T>,
    pub trace: Vec<MeasurementEvent>,
    pub success: bool,
    /// Recovery rounds needed per chain step.
    pub retries_per_step: Vec<usize>,
}

fn node_label<T: RealField + Copy>(node: &ChainNode<T>) -> EventLabel {
    match node {
        ChainNode::Base => EventLabel::Base,
        ChainNode::Label(l) => EventLabel::Line {
            axis: l.axis,
            c: try_convert(l.c).unwrap_or(f64::NAN),
        },
    }
}

/// Executes the forced-measurement protocol for a compiled sequence.
///
/// On a failed measurement of step `i`, the recovery round measures the
/// predecessor projection (`P₀` for the first step) and re-measures step
/// `i`; the round repeats until the step succeeds or `max_retries` rounds
/// are spent. On success the final state equals the normalized deterministic
/// chain gate applied to the input, up to an overall sign.
pub fn run_forced<T: RealField + Copy, R: Rng + ?Sized>(
    state: &QuantumState<T>,
    seq: &ProjectionSequence<T>,
    rng: &mut R,
    max_retries: usize,
) -> Result<ForcedRun<T>, SimError> {
    let base = Projection::<T>::base(8);
    if state.dim() != base.dim() {
        return Err(SimError::DimensionMismatch {
            state: state.dim(),
            proj: base.dim(),
        });
    }
    let in_base = base.matrix() * state.amplitudes() - state.amplitudes();
    let residual: f64 = try_convert(in_base.norm()).unwrap_or(f64::NAN);
    if residual > 1e-9 {
        return Err(SimError::StateOutsideBase { residual });
    }

    let nodes = chain_nodes(seq);
    let projectors: Vec<Projection<T>> = nodes
        .iter()
        .map(|n| match n {
            ChainNode::Base => base.clone(),
            ChainNode::Label(l) => crate::projection::graph_projection(&l.octonion().matrep()),
        })
        .collect();

    let mut trace = Vec::new();
    let mut retries_per_step = Vec::with_capacity(nodes.len());
    let mut current = state.clone();

    for (step_index, node) in nodes.iter().enumerate() {
        let target = &projectors[step_index];
        let predecessor = if step_index == 0 {
            &base
        } else {
            &projectors[step_index - 1]
        };
        let pred_label = if step_index == 0 {
            EventLabel::Base
        } else {
            node_label(&nodes[step_index - 1])
        };

        let outcome = born_measure(&current, target, rng)?;
        trace.push(MeasurementEvent {
            step_index,
            projector_label: node_label(node),
            branch: outcome.branch,
            branch_probability: outcome.probability,
            retry_depth: 0,
        });
        current = outcome.post;
        if outcome.branch == Branch::Success {
            retries_per_step.push(0);
            continue;
        }

        let mut settled = false;
        for retry in 1..=max_retries {
            let fallback = born_measure(&current, predecessor, rng)?;
            trace.push(MeasurementEvent {
                step_index,
                projector_label: pred_label,
                branch: fallback.branch,
                branch_probability: fallback.probability,
                retry_depth: retry,
            });
            current = fallback.post;

            let again = born_measure(&current, target, rng)?;
            trace.push(MeasurementEvent {
                step_index,
                projector_label: node_label(node),
                branch: again.branch,
                branch_probability: again.probability,
                retry_depth: retry,
            });
            current = again.post;
            if again.branch == Branch::Success {
                retries_per_step.push(retry);
                settled = true;
                break;
            }
        }
        if !settled {
            return Err(SimError::RetryBudgetExceeded {
                step_index,
                retries: max_retries,
                trace,
            });
        }
    }

    Ok(ForcedRun {
        final_state: current,
        trace,
        success: true,
        retries_per_step,
    })
}

/// Aggregate statistics over seeded trials.
#[derive(Debug, Clone)]
pub struct TrialStats {
    pub trials: usize,
    pub successes: usize,
    /// Mean number of measurements per trial (failed trials included).
    pub mean_measurements: f64,
    /// First-attempt success frequency per chain step.
    pub empirical_step_success: BTreeMap<usize, f64>,
    /// Minimum squared overlap of successful final states with the
    /// deterministic target (sign quotiented).
    pub final_fidelity_min: f64,
}

/// Trial statistics plus the retry histogram used for tail diagnostics.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub stats: TrialStats,
    /// `retry_histogram[r]` counts completed steps that needed exactly `r`
    /// recovery rounds.
    pub retry_histogram: Vec<u64>,
    /// Completed steps observed (denominator for tail frequencies).
    pub steps_observed: u64,
}

impl TrialRun {
    /// Empirical frequency of a step needing more than `r` retries.
    pub fn retry_tail(&self, r: usize) -> f64 {
        if self.steps_observed == 0 {
            return 0.0;
        }
        let above: u64 = self
            .retry_histogram
            .iter()
            .enumerate()
            .filter(|(d, _)| *d > r)
            .map(|(_, c)| *c)
            .sum();
        above as f64 / self.steps_observed as f64
    }
}

/// Per-trial RNG: ChaCha8 keyed by a SplitMix64 expansion of `base_seed`,
/// stream id = trial index.
pub fn trial_rng(base_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = base_seed;
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial_index);
    rng
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `n_trials` independent forced runs, trial `i` seeded from
/// `(base_seed, i)`. Aggregates are order-independent.
pub fn run_trials<T: RealField + Copy>(
    initial: &QuantumState<T>,
    seq: &ProjectionSequence<T>,
    n_trials: usize,
    base_seed: u64,
    max_retries: usize,
) -> Result<TrialRun, SimError> {
    let target = deterministic_target(initial, seq)?;
    let n_steps = chain_nodes(seq).len();

    let mut successes = 0usize;
    let mut total_measurements = 0u64;
    let mut step_success = vec![0u64; n_steps];
    let mut step_attempted = vec![0u64; n_steps];
    let mut fidelity_min = f64::INFINITY;
    let mut retry_histogram: Vec<u64> = Vec::new();
    let mut steps_observed = 0u64;

    for trial in 0..n_trials {
        let mut rng = trial_rng(base_seed, trial as u64);
        match run_forced(initial, seq, &mut rng, max_retries) {
            Ok(run) => {
                successes += 1;
                total_measurements += run.trace.len() as u64;
                tally_first_attempts(&run.trace, &mut step_success, &mut step_attempted);
                for &r in &run.retries_per_step {
                    if retry_histogram.len() <= r {
                        retry_histogram.resize(r + 1, 0);
                    }
                    retry_histogram[r] += 1;
                    steps_observed += 1;
                }
                let overlap: f64 =
                    try_convert(run.final_state.squared_overlap(&target)).unwrap_or(0.0);
                fidelity_min = fidelity_min.min(overlap);
            }
            Err(SimError::RetryBudgetExceeded { trace, .. }) => {
                total_measurements += trace.len() as u64;
                tally_first_attempts(&trace, &mut step_success, &mut step_attempted);
            }
            Err(other) => return Err(other),
        }
    }

    let empirical_step_success = step_attempted
        .iter()
        .enumerate()
        .filter(|(_, n)| **n > 0)
        .map(|(i, n)| (i, step_success[i] as f64 / *n as f64))
        .collect();

    Ok(TrialRun {
        stats: TrialStats {
            trials: n_trials,
            successes,
            mean_measurements: if n_trials == 0 {
                0.0
            } else {
                total_measurements as f64 / n_trials as f64
            },
            empirical_step_success,
            final_fidelity_min: if successes == 0 { 0.0 } else { fidelity_min },
        },
        retry_histogram,
        steps_observed,
    })
}

fn tally_first_attempts(
    trace: &[MeasurementEvent],
    success: &mut [u64],
    attempted: &mut [u64],
) {
    for event in trace {
        if event.retry_depth == 0 {
            attempted[event.step_index] += 1;
            if event.branch == Branch::Success {
                success[event.step_index] += 1;
            }
        }
    }
}

/// Final state of a perfectly forced chain: the full chain operator applied
/// to the input and normalized.
pub fn deterministic_target<T: RealField + Copy>(
    initial: &QuantumState<T>,
    seq: &ProjectionSequence<T>,
) -> Result<QuantumState<T>, SimError> {
    let evaluation = evaluate(seq)?;
    let gate = evaluation.normalized();
    let mut out = DVector::<T>::zeros(16);
    let top = initial.amplitudes().rows(0, 8).into_owned();
    out.rows_mut(0, 8).copy_from(&(&gate * top));
    Ok(QuantumState::normalized(out))
}

/// Analytic expected number of measurements to force the whole chain.
///
/// Each step is a two-state Markov chain: the first attempt succeeds with
/// `p = α²` (squared dihedral cosine against the predecessor); a failed step
/// enters recovery rounds of two measurements each, which succeed with
/// probability `2p(1−p)`, giving `1 + (1−p)·2/(2p(1−p)) = 1 + 1/p` expected
/// measurements. A step with `p = 1` deterministically costs one.
pub fn expected_cost<T: RealField + Copy>(seq: &ProjectionSequence<T>) -> Result<f64, SimError> {
    let angles = sequence_angles(seq)?;
    let mut total = 0.0;
    for step in angles {
        let alpha: f64 = try_convert(step.alpha).unwrap_or(f64::NAN);
        let p = (alpha * alpha).clamp(0.0, 1.0);
        if p >= 1.0 - 1e-12 {
            total += 1.0;
        } else if p <= 1e-12 {
            return Ok(f64::INFINITY);
        } else {
            total += 1.0 + 1.0 / p;
        }
    }
    Ok(total)
}
