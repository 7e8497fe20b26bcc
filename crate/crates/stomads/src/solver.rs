//! The StoMADS solve loop.
//!
//! Each iteration k works on the current mesh ([`crate::mesh::MeshState`]):
//! the incumbent's value estimate is refreshed with fresh samples and pooled
//! with everything already observed there, an optional search phase tries
//! caller-proposed mesh points, and the poll phase walks a randomized
//! positive-spanning frame ([`crate::poll`]) opportunistically. Comparisons of
//! estimated means against the incumbent classify the iteration
//! ([`classify_iteration`]) as a success (move and coarsen), a certain failure
//! (all trials clearly worse; refine twice), or an uncertain failure (evidence
//! inconclusive; refine once). The run stops when the frame size drops below
//! `eps_stop` or the evaluation budget runs out, and returns a complete
//! [`RunRecord`].
//!
//! A deterministic variant ([`Mode::DeterministicMads`]) runs the same frame
//! machinery with single exact evaluations and plain decrease acceptance,
//! which is useful both as a baseline and for testing the mesh logic in
//! isolation.

use serde::Serialize;
use thiserror::Error;

use crate::estimator::{
    fresh_estimate, merge_on_failure, merge_on_success, required_sample_size, AccuracyParams,
    EstimateRecord, EstimatorError,
};
use crate::mesh::{MeshError, MeshState, OutcomeKind, Ratio};
use crate::poll::{build_poll_set, next_seed_vector, order_opportunistic, PollError, PollSet};
use crate::problems::{EvalError, Objective};
use crate::record::{AcceptedTrial, EvalRow, IterationRow, RunRecord, StopReason};

/// How many observations to average per estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// A fixed number of samples per estimate, between 1 and 32.
    Constant(u64),
    /// The variance-driven schedule n(δ_p) = ⌈V/(ε_f²·δ_p⁴·(1−√β))⌉.
    Theoretical(AccuracyParams),
}

/// Which acceptance semantics the solver runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Noisy objective: estimates, the γ·ε_f·δ_p² success threshold, and the
    /// three-way outcome classification.
    Stochastic,
    /// Exact objective: one evaluation per point, plain decrease acceptance,
    /// and no certain-failure refinements.
    DeterministicMads,
}

/// Solver configuration.
///
/// The defaults run the stochastic solver with τ = 1/2, cap ẑ = 10, γ = 3.4,
/// ε_f = 0.05, two samples per estimate, and a budget of 1000·(n+1)
/// evaluations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Mesh adjustment base τ ∈ (0, 1).
    pub tau: Ratio,
    /// Cap ẑ on how far the frame may coarsen (δ_p ≤ τ^(−ẑ)).
    pub z_hat: u32,
    /// Success threshold multiplier γ > 2.
    pub gamma: f64,
    /// Accuracy proportionality constant ε_f > 0.
    pub eps_f: f64,
    /// Stop when δ_p drops below this tolerance (0 disables).
    pub eps_stop: f64,
    /// Samples per estimate.
    pub sampling: Sampling,
    /// Evaluation budget; `None` means 1000·(n+1).
    pub budget: Option<u64>,
    /// Seed for all solver-side randomness (poll directions).
    pub seed: u64,
    /// Stochastic or deterministic acceptance semantics.
    pub mode: Mode,
    /// Whether the search phase consults the caller's [`SearchStep`].
    pub search_enabled: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau: Ratio::ONE_HALF,
            z_hat: 10,
            gamma: 3.4,
            eps_f: 0.05,
            eps_stop: 0.0,
            sampling: Sampling::Constant(2),
            budget: None,
            seed: 0,
            mode: Mode::Stochastic,
            search_enabled: false,
        }
    }
}

/// The default evaluation budget, 1000·(n+1) for dimension n.
pub fn default_budget(dimension: usize) -> u64 {
    1000 * (dimension as u64 + 1)
}

impl SolverConfig {
    /// Checks every field against its documented range.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.gamma.is_finite() && self.gamma > 2.0) {
            return Err(ConfigError::Gamma(self.gamma));
        }
        if !(self.eps_f.is_finite() && self.eps_f > 0.0) {
            return Err(ConfigError::EpsF(self.eps_f));
        }
        if !(self.eps_stop.is_finite() && self.eps_stop >= 0.0) {
            return Err(ConfigError::EpsStop(self.eps_stop));
        }
        if self.z_hat == 0 {
            return Err(ConfigError::ZHat);
        }
        if let Sampling::Constant(c) = self.sampling {
            if !(1..=32).contains(&c) {
                return Err(ConfigError::SampleCount(c));
            }
        }
        if self.budget == Some(0) {
            return Err(ConfigError::ZeroBudget);
        }
        Ok(())
    }

    /// The budget this configuration grants a problem of dimension `n`.
    pub fn effective_budget(&self, dimension: usize) -> u64 {
        self.budget.unwrap_or_else(|| default_budget(dimension))
    }

    /// Samples per estimate at frame size `delta_p` under this configuration.
    ///
    /// Deterministic mode always answers 1; the theoretical schedule may
    /// reject a non-positive frame size.
    pub fn samples_per_estimate(&self, delta_p: f64) -> Result<u64, EstimatorError> {
        match (self.mode, &self.sampling) {
            (Mode::DeterministicMads, _) => Ok(1),
            (Mode::Stochastic, Sampling::Constant(c)) => Ok(*c),
            (Mode::Stochastic, Sampling::Theoretical(params)) => {
                required_sample_size(params, delta_p)
            }
        }
    }
}

/// Configuration validation failures.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ConfigError {
    /// γ out of range.
    #[error("gamma must be finite and greater than 2, got {0}")]
    Gamma(f64),
    /// ε_f out of range.
    #[error("eps_f must be finite and positive, got {0}")]
    EpsF(f64),
    /// ε_stop out of range.
    #[error("eps_stop must be finite and non-negative, got {0}")]
    EpsStop(f64),
    /// ẑ must be positive.
    #[error("z_hat must be at least 1")]
    ZHat,
    /// Constant sample count out of range.
    #[error("constant sample count must be between 1 and 32, got {0}")]
    SampleCount(u64),
    /// A zero budget cannot even estimate the start point.
    #[error("budget must be at least 1 evaluation")]
    ZeroBudget,
    /// κ_f out of range.
    #[error("kappa_f must be finite and non-negative, got {0}")]
    KappaF(f64),
}

/// Errors the solver can hit mid-run.
#[derive(Debug, Error)]
pub enum SolverError {
    /// The configuration failed validation.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A blackbox evaluation failed.
    #[error("blackbox evaluation failed: {0}")]
    Eval(#[from] EvalError),
    /// Estimate construction or the sampling schedule failed.
    #[error("estimation failed: {0}")]
    Estimator(#[from] EstimatorError),
    /// Mesh construction failed.
    #[error("mesh setup failed: {0}")]
    Mesh(#[from] MeshError),
    /// Poll frame construction failed.
    #[error("poll construction failed: {0}")]
    Poll(#[from] PollError),
    /// An iteration produced nothing to classify.
    #[error("iteration produced no comparisons to classify")]
    EmptyComparisons,
    /// A search proposal was off the current mesh (or mis-sized).
    #[error("search proposal {point:?} is not on the current mesh")]
    SearchProposalOffMesh {
        /// The offending proposal.
        point: Vec<f64>,
    },
    /// The objective's start point disagrees with its dimension.
    #[error("start point has {got} coordinates, objective expects {expected}")]
    StartDimensionMismatch {
        /// Dimension the objective declares.
        expected: usize,
        /// Length of the start point it returned.
        got: usize,
    },
}

/// A failed solve, carrying whatever history accumulated before the failure.
#[derive(Debug)]
pub struct SolveError {
    /// What went wrong.
    pub error: SolverError,
    /// The partial run record, when the failure happened mid-run.
    pub partial: Option<Box<RunRecord>>,
}

impl std::fmt::Display for SolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)?;
        if let Some(partial) = &self.partial {
            write!(f, " (after {} evaluations)", partial.evals_used())?;
        }
        Ok(())
    }
}

impl std::error::Error for SolveError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// One trial point's comparison against the incumbent estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialComparison {
    /// Mesh direction of the trial.
    pub direction: Vec<i64>,
    /// Estimated trial mean minus estimated incumbent mean.
    pub diff: f64,
}

/// The classification of one iteration's evidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationOutcome {
    /// The three-way outcome.
    pub kind: OutcomeKind,
    /// The accepted direction, on success.
    pub accepted_direction: Option<Vec<i64>>,
    /// The deciding estimated decrease: the accepting difference on success,
    /// the smallest difference on certain failure, and the first inconclusive
    /// difference otherwise.
    pub decrease: f64,
}

/// Classifies an iteration's comparisons under the stochastic rules.
///
/// With threshold t = γ·ε_f·δ_p²: the first comparison with diff ≤ −t makes
/// the iteration a success; failing that, all diffs ≥ +t make it a certain
/// failure; anything in between is an uncertain failure.
///
/// # Errors
///
/// An empty comparison list cannot be classified.
pub fn classify_iteration(
    comparisons: &[TrialComparison],
    gamma: f64,
    eps_f: f64,
    delta_p: f64,
) -> Result<IterationOutcome, SolverError> {
    if comparisons.is_empty() {
        return Err(SolverError::EmptyComparisons);
    }
    let threshold = gamma * eps_f * delta_p * delta_p;
    if let Some(c) = comparisons.iter().find(|c| c.diff <= -threshold) {
        return Ok(IterationOutcome {
            kind: OutcomeKind::Success,
            accepted_direction: Some(c.direction.clone()),
            decrease: c.diff,
        });
    }
    if comparisons.iter().all(|c| c.diff >= threshold) {
        let deciding = comparisons
            .iter()
            .min_by(|a, b| a.diff.total_cmp(&b.diff))
            .expect("comparisons are non-empty");
        return Ok(IterationOutcome {
            kind: OutcomeKind::CertainFailure,
            accepted_direction: None,
            decrease: deciding.diff,
        });
    }
    // Non-finite differences fall through both tests above; treat them as
    // inconclusive evidence like any strictly-inside difference.
    let deciding = comparisons
        .iter()
        .find(|c| c.diff > -threshold && c.diff < threshold)
        .unwrap_or(&comparisons[0]);
    Ok(IterationOutcome {
        kind: OutcomeKind::UncertainFailure,
        accepted_direction: None,
        decrease: deciding.diff,
    })
}

/// Classifies comparisons under deterministic (exact-evaluation) rules: the
/// first strict decrease is a success, anything else is an uncertain failure,
/// and certain failures never occur so the frame can always recover.
///
/// # Errors
///
/// An empty comparison list cannot be classified.
pub fn classify_deterministic(
    comparisons: &[TrialComparison],
) -> Result<IterationOutcome, SolverError> {
    if comparisons.is_empty() {
        return Err(SolverError::EmptyComparisons);
    }
    if let Some(c) = comparisons.iter().find(|c| c.diff < 0.0) {
        return Ok(IterationOutcome {
            kind: OutcomeKind::Success,
            accepted_direction: Some(c.direction.clone()),
            decrease: c.diff,
        });
    }
    let deciding = comparisons
        .iter()
        .min_by(|a, b| a.diff.total_cmp(&b.diff))
        .expect("comparisons are non-empty");
    Ok(IterationOutcome {
        kind: OutcomeKind::UncertainFailure,
        accepted_direction: None,
        decrease: deciding.diff,
    })
}

fn classify_for_mode(
    comparisons: &[TrialComparison],
    config: &SolverConfig,
    delta_p: f64,
) -> Result<IterationOutcome, SolverError> {
    match config.mode {
        Mode::Stochastic => classify_iteration(comparisons, config.gamma, config.eps_f, delta_p),
        Mode::DeterministicMads => classify_deterministic(comparisons),
    }
}

/// One evaluated trial point.
#[derive(Debug, Clone, PartialEq)]
pub struct PollTrial {
    /// Mesh direction from the incumbent.
    pub direction: Vec<i64>,
    /// The trial point itself.
    pub point: Vec<f64>,
    /// The fresh estimate at the trial point.
    pub estimate: EstimateRecord,
    /// Exact objective at the trial point, when available.
    pub true_value: Option<f64>,
}

/// What one poll phase did.
#[derive(Debug, Clone, PartialEq)]
pub struct PollStepResult {
    /// Trials evaluated, in order.
    pub trials: Vec<PollTrial>,
    /// The corresponding comparisons, in the same order.
    pub comparisons: Vec<TrialComparison>,
    /// The classification, or `None` when the budget ran out mid-poll.
    pub outcome: Option<IterationOutcome>,
    /// Evaluations consumed by this poll.
    pub evals_used: u64,
}

/// Runs one opportunistic poll around the incumbent.
///
/// Directions are visited in the order `poll` lists them; each trial point
/// x + δ_m·d gets a fresh estimate, and polling stops early at the first
/// accepting comparison (diff ≤ −γ·ε_f·δ_p² in stochastic mode, any strict
/// decrease in deterministic mode). A direction whose estimate would not fit
/// in `budget_remaining` is not started; the phase then reports
/// `outcome: None` so the caller can wind the run down without touching the
/// mesh.
///
/// # Errors
///
/// Propagates evaluation and estimation failures; inherits
/// [`SolverError::EmptyComparisons`] if `poll` is empty yet affordable.
pub fn poll_step<O: Objective + ?Sized>(
    objective: &mut O,
    incumbent: &EstimateRecord,
    poll: &PollSet,
    state: &MeshState,
    config: &SolverConfig,
    budget_remaining: u64,
) -> Result<PollStepResult, SolverError> {
    let delta_p = state.frame_size();
    let delta_m = state.mesh_size();
    let n_samples = config.samples_per_estimate(delta_p)?;
    let threshold = config.gamma * config.eps_f * delta_p * delta_p;
    let f0 = incumbent.mean();
    let x = incumbent.point();
    let mut trials = Vec::new();
    let mut comparisons = Vec::new();
    let mut evals_used = 0u64;
    let mut exhausted = false;
    for direction in poll.directions() {
        if evals_used + n_samples > budget_remaining {
            exhausted = true;
            break;
        }
        let point: Vec<f64> = x
            .iter()
            .zip(direction)
            .map(|(xi, &di)| xi + delta_m * di as f64)
            .collect();
        let estimate = fresh_estimate(|p| objective.eval_noisy(p), &point, n_samples)?;
        evals_used += n_samples;
        let diff = estimate.mean() - f0;
        let accept = match config.mode {
            Mode::Stochastic => diff <= -threshold,
            Mode::DeterministicMads => diff < 0.0,
        };
        let true_value = objective.true_value(&point);
        comparisons.push(TrialComparison {
            direction: direction.clone(),
            diff,
        });
        trials.push(PollTrial {
            direction: direction.clone(),
            point,
            estimate,
            true_value,
        });
        if accept {
            break;
        }
    }
    let outcome = if exhausted {
        None
    } else {
        Some(classify_for_mode(&comparisons, config, delta_p)?)
    };
    Ok(PollStepResult {
        trials,
        comparisons,
        outcome,
        evals_used,
    })
}

/// A caller-supplied search phase.
///
/// Before each poll the solver asks for candidate points; each must lie on
/// the current mesh centered at the incumbent, and they are evaluated in the
/// returned order under the same acceptance rule as poll trials. Returning an
/// empty list skips the phase.
pub trait SearchStep {
    /// Proposes trial points for iteration `k`.
    fn propose(&mut self, incumbent: &[f64], state: &MeshState, k: u64) -> Vec<Vec<f64>>;
}

/// The search phase that never proposes anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoSearch;

impl SearchStep for NoSearch {
    fn propose(&mut self, _incumbent: &[f64], _state: &MeshState, _k: u64) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

/// An [`Objective`] wrapper that logs every evaluation as an [`EvalRow`].
struct Recording<'a, O: ?Sized> {
    inner: &'a mut O,
    rows: Vec<EvalRow>,
    k: u64,
    delta_m: f64,
    delta_p: f64,
}

impl<'a, O: Objective + ?Sized> Recording<'a, O> {
    fn new(inner: &'a mut O) -> Self {
        Recording {
            inner,
            rows: Vec::new(),
            k: 0,
            delta_m: 1.0,
            delta_p: 1.0,
        }
    }

    fn set_context(&mut self, k: u64, state: &MeshState) {
        self.k = k;
        self.delta_m = state.mesh_size();
        self.delta_p = state.frame_size();
    }

    fn used(&self) -> u64 {
        self.rows.len() as u64
    }
}

impl<O: Objective + ?Sized> Objective for Recording<'_, O> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn start_point(&self) -> Vec<f64> {
        self.inner.start_point()
    }

    fn eval_noisy(&mut self, x: &[f64]) -> Result<f64, EvalError> {
        let value = self.inner.eval_noisy(x)?;
        let eval_index = self.rows.len() as u64 + 1;
        self.rows.push(EvalRow {
            eval_index,
            k: self.k,
            point: x.to_vec(),
            noisy_value: value,
            true_value: self.inner.true_value(x),
            delta_m: self.delta_m,
            delta_p: self.delta_p,
            outcome: None,
        });
        Ok(value)
    }

    fn true_value(&self, x: &[f64]) -> Option<f64> {
        self.inner.true_value(x)
    }

    fn f_star_hint(&self) -> Option<f64> {
        self.inner.f_star_hint()
    }
}

struct Driver<'c> {
    config: &'c SolverConfig,
    mesh: MeshState,
    budget: u64,
    incumbent: Vec<f64>,
    estimate: Option<EstimateRecord>,
    last_success_dir: Option<Vec<i64>>,
    last_outcome: Option<OutcomeKind>,
    iterations: Vec<IterationRow>,
    k: u64,
    pending_from: usize,
    stop: StopReason,
}

impl Driver<'_> {
    fn run<O, S>(&mut self, rec: &mut Recording<'_, O>, search: &mut S) -> Result<(), SolverError>
    where
        O: Objective + ?Sized,
        S: SearchStep + ?Sized,
    {
        // Iteration 0 opens by estimating the start point.
        rec.set_context(0, &self.mesh);
        let n0 = self.config.samples_per_estimate(self.mesh.frame_size())?;
        if n0 > self.budget {
            return Ok(()); // Cannot afford a single estimate: empty run.
        }
        let start = self.incumbent.clone();
        self.estimate = Some(fresh_estimate(|p| rec.eval_noisy(p), &start, n0)?);

        loop {
            let k = self.k;
            rec.set_context(k, &self.mesh);
            let delta_p = self.mesh.frame_size();
            let delta_m = self.mesh.mesh_size();
            let n_k = self.config.samples_per_estimate(delta_p)?;
            let threshold = self.config.gamma * self.config.eps_f * delta_p * delta_p;

            // Refresh the incumbent estimate with n_k fresh samples, pooling
            // them with everything already observed at that point. Iteration
            // 0 just estimated the start point; deterministic mode keeps the
            // exact value it already has.
            if k > 0 && self.config.mode == Mode::Stochastic {
                if rec.used() + n_k > self.budget {
                    return Ok(());
                }
                let incumbent = self.incumbent.clone();
                let fresh = fresh_estimate(|p| rec.eval_noisy(p), &incumbent, n_k)?;
                let current = self
                    .estimate
                    .as_ref()
                    .expect("the incumbent estimate exists after iteration 0");
                let merged = match self.last_outcome {
                    Some(OutcomeKind::Success) => merge_on_success(current, &fresh)?,
                    _ => merge_on_failure(current, &fresh)?,
                };
                self.estimate = Some(merged);
            }
            let estimate = self
                .estimate
                .clone()
                .expect("the incumbent estimate exists after iteration 0");
            let f0 = estimate.mean();

            // Search phase: caller-proposed mesh points, same acceptance rule.
            let mut trials: Vec<PollTrial> = Vec::new();
            let mut comparisons: Vec<TrialComparison> = Vec::new();
            let mut search_accepted = false;
            let mut exhausted = false;
            if self.config.search_enabled {
                for point in search.propose(&self.incumbent, &self.mesh, k) {
                    if point.len() != self.mesh.dimension()
                        || !self.mesh.is_mesh_point(&point, &self.incumbent)
                    {
                        return Err(SolverError::SearchProposalOffMesh { point });
                    }
                    if rec.used() + n_k > self.budget {
                        exhausted = true;
                        break;
                    }
                    let trial_estimate = fresh_estimate(|p| rec.eval_noisy(p), &point, n_k)?;
                    let diff = trial_estimate.mean() - f0;
                    let direction: Vec<i64> = point
                        .iter()
                        .zip(&self.incumbent)
                        .map(|(p, c)| ((p - c) / delta_m).round() as i64)
                        .collect();
                    let accept = match self.config.mode {
                        Mode::Stochastic => diff <= -threshold,
                        Mode::DeterministicMads => diff < 0.0,
                    };
                    let true_value = rec.true_value(&point);
                    comparisons.push(TrialComparison {
                        direction: direction.clone(),
                        diff,
                    });
                    trials.push(PollTrial {
                        direction,
                        point,
                        estimate: trial_estimate,
                        true_value,
                    });
                    if accept {
                        search_accepted = true;
                        break;
                    }
                }
            }
            let search_len = trials.len();

            // Poll phase, unless the search already settled the iteration.
            if !search_accepted && !exhausted {
                let v = next_seed_vector(self.config.seed, k, self.mesh.dimension());
                let set = build_poll_set(&v, &self.mesh)?;
                let set = order_opportunistic(set, self.last_success_dir.as_deref());
                let remaining = self.budget - rec.used();
                let result = poll_step(rec, &estimate, &set, &self.mesh, self.config, remaining)?;
                exhausted = result.outcome.is_none();
                trials.extend(result.trials);
                comparisons.extend(result.comparisons);
            }

            let outcome = if exhausted {
                None
            } else {
                Some(classify_for_mode(&comparisons, self.config, delta_p)?)
            };

            let mut row = IterationRow {
                k,
                delta_p,
                delta_m,
                n_samples: n_k,
                incumbent: self.incumbent.clone(),
                f0_mean: f0,
                f0_count: estimate.count(),
                true_f_incumbent: rec.true_value(&self.incumbent),
                outcome: None,
                decrease: None,
                accepted: None,
                estimates_accurate: None,
                phi: None,
                psi: Vec::new(),
            };
            if let Some(t_inc) = row.true_f_incumbent {
                for trial in &trials {
                    if let Some(t) = trial.true_value {
                        row.psi.push(psi_diagnostic(t_inc, t, delta_p));
                    }
                }
            }

            let Some(out) = outcome else {
                // Budget died mid-iteration: record what happened, leave the
                // mesh untouched, and stop.
                self.iterations.push(row);
                return Ok(());
            };

            row.outcome = Some(out.kind);
            row.decrease = Some(out.decrease);
            if out.kind == OutcomeKind::Success {
                let dir = out
                    .accepted_direction
                    .clone()
                    .expect("a success always carries its accepted direction");
                let index = comparisons
                    .iter()
                    .position(|c| c.direction == dir && c.diff == out.decrease)
                    .expect("the accepted comparison comes from an evaluated trial");
                let trial = &trials[index];
                let true_decrease = match (row.true_f_incumbent, trial.true_value) {
                    (Some(a), Some(b)) => Some(b - a),
                    _ => None,
                };
                row.accepted = Some(AcceptedTrial {
                    direction: dir.clone(),
                    point: trial.point.clone(),
                    estimate_mean: trial.estimate.mean(),
                    estimate_count: trial.estimate.count(),
                    true_value: trial.true_value,
                    estimated_decrease: out.decrease,
                    true_decrease,
                    via_search: index < search_len,
                });
                if self.config.mode == Mode::Stochastic {
                    if let (Some(t0), Some(t1)) = (row.true_f_incumbent, trial.true_value) {
                        let tol = self.config.eps_f * delta_p * delta_p;
                        row.estimates_accurate = Some(
                            (f0 - t0).abs() <= tol && (trial.estimate.mean() - t1).abs() <= tol,
                        );
                    }
                }
                self.incumbent = trial.point.clone();
                self.estimate = Some(trial.estimate.clone());
                self.last_success_dir = Some(dir);
            }

            for logged in rec.rows[self.pending_from..].iter_mut() {
                logged.outcome = Some(out.kind);
            }
            self.mesh.apply_outcome(out.kind);
            self.last_outcome = Some(out.kind);
            self.iterations.push(row);

            if self.mesh.frame_size() < self.config.eps_stop {
                self.stop = StopReason::FrameSizeTolerance;
                return Ok(());
            }
            self.k += 1;
            self.pending_from = rec.rows.len();
        }
    }

    fn finalize<O: Objective + ?Sized>(mut self, rec: Recording<'_, O>) -> RunRecord {
        let nu = nu_lower_bound(self.config.tau, self.config.gamma, self.config.eps_f);
        let f_min = rec.inner.f_star_hint().or_else(|| {
            rec.rows
                .iter()
                .filter_map(|r| r.true_value)
                .fold(None, |best, v| {
                    Some(match best {
                        Some(b) if b <= v => b,
                        _ => v,
                    })
                })
        });
        for row in &mut self.iterations {
            if let (Some(fm), Some(tf)) = (f_min, row.true_f_incumbent) {
                row.phi = Some(phi_diagnostic(tf, fm, row.delta_p, nu));
            }
        }
        let final_true_f = rec.inner.true_value(&self.incumbent);
        RunRecord {
            problem: rec.inner.name().to_string(),
            dimension: self.mesh.dimension(),
            config: self.config.clone(),
            evals: rec.rows,
            iterations: self.iterations,
            final_incumbent: self.incumbent,
            final_estimate: self.estimate,
            final_true_f,
            final_frame_size: self.mesh.frame_size(),
            nu,
            f_min_reference: f_min,
            stop: self.stop,
        }
    }
}

/// Minimizes `objective` and returns the full run history.
///
/// # Errors
///
/// Configuration and setup problems fail before any evaluation
/// (`partial: None`); a mid-run failure (evaluation error, off-mesh search
/// proposal) is returned together with the history accumulated so far.
pub fn solve<O: Objective + ?Sized>(
    objective: &mut O,
    config: &SolverConfig,
) -> Result<RunRecord, SolveError> {
    solve_with_search(objective, config, &mut NoSearch)
}

/// Like [`solve`], with a caller-supplied search phase consulted before each
/// poll whenever `config.search_enabled` is set.
pub fn solve_with_search<O, S>(
    objective: &mut O,
    config: &SolverConfig,
    search: &mut S,
) -> Result<RunRecord, SolveError>
where
    O: Objective + ?Sized,
    S: SearchStep + ?Sized,
{
    let fail = |error: SolverError| SolveError {
        error,
        partial: None,
    };
    if let Err(e) = config.validate() {
        return Err(fail(e.into()));
    }
    let dimension = objective.dimension();
    let start = objective.start_point();
    if start.len() != dimension {
        return Err(fail(SolverError::StartDimensionMismatch {
            expected: dimension,
            got: start.len(),
        }));
    }
    let mesh = match MeshState::new(dimension, config.tau, config.z_hat) {
        Ok(m) => m,
        Err(e) => return Err(fail(e.into())),
    };
    let budget = config.effective_budget(dimension);
    let mut rec = Recording::new(objective);
    let mut driver = Driver {
        config,
        mesh,
        budget,
        incumbent: start,
        estimate: None,
        last_success_dir: None,
        last_outcome: None,
        iterations: Vec::new(),
        k: 0,
        pending_from: 0,
        stop: StopReason::BudgetExhausted,
    };
    let outcome = driver.run(&mut rec, search);
    let record = driver.finalize(rec);
    match outcome {
        Ok(()) => Ok(record),
        Err(error) => Err(SolveError {
            error,
            partial: Some(Box::new(record)),
        }),
    }
}

/// The progress diagnostic ν·(f(x) − f_min) + (1 − ν)·δ_p².
///
/// Along a run this quantity decreases in expectation for suitable ν, which
/// makes its trajectory a useful health check: persistent growth signals
/// estimates too noisy for the current frame size.
pub fn phi_diagnostic(f_true: f64, f_min: f64, delta_p: f64, nu: f64) -> f64 {
    nu * (f_true - f_min) + (1.0 - nu) * delta_p * delta_p
}

/// The frame-scaled decrease (f(x) − f(trial)) / δ_p.
///
/// Positive values mean the trial genuinely improves on the incumbent;
/// comparing its size against δ_p separates real progress from mesh noise.
pub fn psi_diagnostic(f_incumbent: f64, f_trial: f64, delta_p: f64) -> f64 {
    (f_incumbent - f_trial) / delta_p
}

fn nu_lower_bound(tau: Ratio, gamma: f64, eps_f: f64) -> f64 {
    let r = 2.0 * (tau.powi(-4) - 1.0) / (eps_f * (gamma - 2.0));
    if r.is_finite() {
        r / (1.0 + r)
    } else {
        1.0
    }
}

/// The ν weight and per-estimate reliability β that together certify expected
/// progress of the [`phi_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuBeta {
    /// Smallest admissible ν for the given (τ, γ, ε_f).
    pub nu: f64,
    /// Smallest admissible β in (1/2, 1), or `None` when no β below 1
    /// suffices at working precision.
    pub beta: Option<f64>,
}

/// Selects the diagnostic weight ν and reliability target β.
///
/// ν is fixed at r/(1+r) with r = 2·(τ⁻⁴ − 1)/(ε_f·(γ − 2)). β must satisfy
/// β/√(1−β) ≥ 4·ν·κ_f·(1+r)/(1−τ²); the smallest such β is found by bisection
/// to within 1e-9, snapping to just above 1/2 when even that satisfies the
/// bound (e.g. κ_f = 0) and reporting `None` when no β < 1 does.
///
/// # Errors
///
/// Rejects γ ≤ 2, ε_f ≤ 0, a negative κ_f, and non-finite inputs.
pub fn choose_nu_beta(
    tau: Ratio,
    gamma: f64,
    eps_f: f64,
    kappa_f: f64,
) -> Result<NuBeta, ConfigError> {
    if !(gamma.is_finite() && gamma > 2.0) {
        return Err(ConfigError::Gamma(gamma));
    }
    if !(eps_f.is_finite() && eps_f > 0.0) {
        return Err(ConfigError::EpsF(eps_f));
    }
    if !(kappa_f.is_finite() && kappa_f >= 0.0) {
        return Err(ConfigError::KappaF(kappa_f));
    }
    let t = tau.value();
    let r = 2.0 * (tau.powi(-4) - 1.0) / (eps_f * (gamma - 2.0));
    let nu = if r.is_finite() { r / (1.0 + r) } else { 1.0 };
    // 1 − ν equals 1/(1+r) exactly, so the bound is computed with (1+r) to
    // dodge the catastrophic cancellation of literally evaluating 1 − ν.
    let rhs = 4.0 * nu * kappa_f * (1.0 + r) / (1.0 - t * t);
    const BETA_FLOOR: f64 = 0.5 + 1e-9;
    let g = |b: f64| b / (1.0 - b).sqrt();
    let beta = if !rhs.is_finite() {
        None
    } else if g(BETA_FLOOR) >= rhs {
        Some(BETA_FLOOR)
    } else {
        let mut lo = BETA_FLOOR;
        let mut hi = 1.0;
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if g(mid) >= rhs {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if hi < 1.0 {
            Some(hi)
        } else {
            None
        }
    };
    Ok(NuBeta { nu, beta })
}
