//! Run histories: per-evaluation and per-iteration traces with CSV output.

use std::fmt;
use std::io;

use serde::Serialize;

use crate::estimator::EstimateRecord;
use crate::mesh::OutcomeKind;
use crate::solver::SolverConfig;

/// One blackbox evaluation, in the order it happened.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    /// 1-based position in the run's evaluation sequence.
    pub eval_index: u64,
    /// Iteration the evaluation belongs to.
    pub k: u64,
    /// The queried point.
    pub point: Vec<f64>,
    /// The noisy observation returned by the blackbox.
    pub noisy_value: f64,
    /// Exact objective at the point, when ground truth is available.
    pub true_value: Option<f64>,
    /// Mesh size δ_m in force during the evaluation.
    pub delta_m: f64,
    /// Frame size δ_p in force during the evaluation.
    pub delta_p: f64,
    /// Outcome of the iteration this evaluation contributed to; `None` when
    /// the budget ran out before the iteration could be classified.
    pub outcome: Option<OutcomeKind>,
}

/// The trial accepted by a successful iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptedTrial {
    /// Mesh direction of the accepted step.
    pub direction: Vec<i64>,
    /// The new incumbent.
    pub point: Vec<f64>,
    /// Estimated objective at the new incumbent.
    pub estimate_mean: f64,
    /// Sample count behind that estimate.
    pub estimate_count: u64,
    /// Exact objective at the new incumbent, when available.
    pub true_value: Option<f64>,
    /// Estimated decrease: trial mean minus incumbent mean (negative).
    pub estimated_decrease: f64,
    /// Exact decrease, when ground truth is available.
    pub true_decrease: Option<f64>,
    /// Whether the step came from the search phase rather than the poll.
    pub via_search: bool,
}

/// Summary of one solver iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRow {
    /// Iteration counter, starting at 0.
    pub k: u64,
    /// Frame size δ_p at the top of the iteration.
    pub delta_p: f64,
    /// Mesh size δ_m at the top of the iteration.
    pub delta_m: f64,
    /// Samples requested per estimate this iteration.
    pub n_samples: u64,
    /// Incumbent at the top of the iteration.
    pub incumbent: Vec<f64>,
    /// Incumbent estimate mean after this iteration's refresh.
    pub f0_mean: f64,
    /// Pooled sample count behind the incumbent estimate.
    pub f0_count: u64,
    /// Exact objective at the incumbent, when available.
    pub true_f_incumbent: Option<f64>,
    /// How the iteration was classified; `None` if the budget ran out first.
    pub outcome: Option<OutcomeKind>,
    /// Estimated decrease of the deciding comparison.
    pub decrease: Option<f64>,
    /// The accepted trial, on success.
    pub accepted: Option<AcceptedTrial>,
    /// Whether both decision estimates were within ε_f·δ_p² of the truth
    /// (successful stochastic iterations with ground truth only).
    pub estimates_accurate: Option<bool>,
    /// Progress diagnostic ν·(f − f_min) + (1 − ν)·δ_p² at the incumbent.
    pub phi: Option<f64>,
    /// Scaled true decreases (f(x) − f(trial))/δ_p for each trial evaluated
    /// this iteration, in evaluation order.
    pub psi: Vec<f64>,
}

/// Why the run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The evaluation budget was exhausted.
    BudgetExhausted,
    /// The frame size fell below the stopping tolerance.
    FrameSizeTolerance,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::BudgetExhausted => write!(f, "budget_exhausted"),
            StopReason::FrameSizeTolerance => write!(f, "frame_size_tolerance"),
        }
    }
}

/// Per-outcome iteration counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    /// Iterations classified as successes.
    pub success: u64,
    /// Iterations classified as certain failures.
    pub certain_failure: u64,
    /// Iterations classified as uncertain failures.
    pub uncertain_failure: u64,
}

/// The complete, replayable history of one solver run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    /// Objective name.
    pub problem: String,
    /// Problem dimension.
    pub dimension: usize,
    /// The configuration the run used.
    pub config: SolverConfig,
    /// Every blackbox evaluation, in order.
    pub evals: Vec<EvalRow>,
    /// Every iteration, in order.
    pub iterations: Vec<IterationRow>,
    /// Final incumbent point.
    pub final_incumbent: Vec<f64>,
    /// Final pooled estimate at the incumbent, if any estimate was ever made.
    pub final_estimate: Option<EstimateRecord>,
    /// Exact objective at the final incumbent, when available.
    pub final_true_f: Option<f64>,
    /// Frame size after the last mesh update.
    pub final_frame_size: f64,
    /// The ν weight used for the progress diagnostic.
    pub nu: f64,
    /// The reference value f_min used by the progress diagnostic.
    pub f_min_reference: Option<f64>,
    /// Why the run stopped.
    pub stop: StopReason,
}

/// Compact per-run summary for reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    /// Objective name.
    pub problem: String,
    /// Problem dimension.
    pub dimension: usize,
    /// Why the run stopped.
    pub stop: StopReason,
    /// Total evaluations consumed.
    pub evals_used: u64,
    /// Total iterations completed or attempted.
    pub iterations: u64,
    /// Per-outcome iteration counts.
    pub outcomes: OutcomeCounts,
    /// Final incumbent point.
    pub final_incumbent: Vec<f64>,
    /// Final estimate mean at the incumbent, if any.
    pub final_estimate_mean: Option<f64>,
    /// Samples pooled into the final estimate, if any.
    pub final_estimate_count: Option<u64>,
    /// Exact objective at the final incumbent, when available.
    pub final_true_f: Option<f64>,
    /// Best exact objective seen anywhere during the run, when available.
    pub best_true_f: Option<f64>,
    /// Smallest mesh size reached.
    pub min_mesh_size: Option<f64>,
    /// Frame size after the last mesh update.
    pub final_frame_size: f64,
    /// The run's configuration.
    pub config: SolverConfig,
}

fn push_float(out: &mut String, v: f64) {
    use fmt::Write;
    write!(out, "{v}").expect("writing to String cannot fail");
}

impl RunRecord {
    /// Number of blackbox evaluations consumed.
    pub fn evals_used(&self) -> u64 {
        self.evals.len() as u64
    }

    /// Best exact objective value observed at any evaluated point, or `None`
    /// when the objective provides no ground truth.
    pub fn best_true_f(&self) -> Option<f64> {
        self.evals
            .iter()
            .filter_map(|row| row.true_value)
            .fold(None, |best, v| {
                Some(match best {
                    Some(b) if b <= v => b,
                    _ => v,
                })
            })
    }

    /// The exact values in evaluation order, or `None` if any are missing.
    pub fn true_value_trace(&self) -> Option<Vec<f64>> {
        self.evals.iter().map(|row| row.true_value).collect()
    }

    /// Smallest mesh size δ_m that any iteration worked at.
    pub fn min_mesh_size(&self) -> Option<f64> {
        self.iterations
            .iter()
            .map(|it| it.delta_m)
            .fold(None, |best, v| {
                Some(match best {
                    Some(b) if b <= v => b,
                    _ => v,
                })
            })
    }

    /// Counts iterations by outcome (unclassified iterations are skipped).
    pub fn outcome_counts(&self) -> OutcomeCounts {
        let mut counts = OutcomeCounts::default();
        for it in &self.iterations {
            match it.outcome {
                Some(OutcomeKind::Success) => counts.success += 1,
                Some(OutcomeKind::CertainFailure) => counts.certain_failure += 1,
                Some(OutcomeKind::UncertainFailure) => counts.uncertain_failure += 1,
                None => {}
            }
        }
        counts
    }

    /// Builds the compact summary.
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            problem: self.problem.clone(),
            dimension: self.dimension,
            stop: self.stop,
            evals_used: self.evals_used(),
            iterations: self.iterations.len() as u64,
            outcomes: self.outcome_counts(),
            final_incumbent: self.final_incumbent.clone(),
            final_estimate_mean: self.final_estimate.as_ref().map(EstimateRecord::mean),
            final_estimate_count: self.final_estimate.as_ref().map(EstimateRecord::count),
            final_true_f: self.final_true_f,
            best_true_f: self.best_true_f(),
            min_mesh_size: self.min_mesh_size(),
            final_frame_size: self.final_frame_size,
            config: self.config.clone(),
        }
    }

    /// Renders the evaluation trace as CSV.
    ///
    /// Columns: `eval_index,k,x1,...,xn,noisy_f,true_f,delta_m,delta_p,outcome`.
    /// Floats use plain shortest-round-trip decimal formatting; missing values
    /// render as empty cells. The output is deterministic byte-for-byte for a
    /// given record.
    pub fn csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str("eval_index,k");
        for i in 1..=self.dimension {
            use fmt::Write;
            write!(out, ",x{i}").expect("writing to String cannot fail");
        }
        out.push_str(",noisy_f,true_f,delta_m,delta_p,outcome\n");
        for row in &self.evals {
            use fmt::Write;
            write!(out, "{},{}", row.eval_index, row.k).expect("writing to String cannot fail");
            for &c in &row.point {
                out.push(',');
                push_float(&mut out, c);
            }
            out.push(',');
            push_float(&mut out, row.noisy_value);
            out.push(',');
            if let Some(t) = row.true_value {
                push_float(&mut out, t);
            }
            out.push(',');
            push_float(&mut out, row.delta_m);
            out.push(',');
            push_float(&mut out, row.delta_p);
            out.push(',');
            if let Some(o) = row.outcome {
                out.push_str(o.label());
            }
            out.push('\n');
        }
        out
    }

    /// Writes the CSV evaluation trace to `w`.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.csv_string().as_bytes())
    }
}
