//! The objective abstraction consumed by the solver.

use thiserror::Error;

use crate::rng::{keyed_rng, Domain};

use super::noise::{evaluate_noisy, NoiseSpec};
use super::suite::ProblemSpec;

/// Errors raised by blackbox evaluation.
#[derive(Debug, Error)]
pub enum EvalError {
    /// The query point has the wrong number of coordinates.
    #[error("point has {got} coordinates, objective expects {expected}")]
    DimensionMismatch {
        /// Dimension the objective expects.
        expected: usize,
        /// Dimension of the offending point.
        got: usize,
    },
    /// The evaluation produced a non-finite number.
    #[error("evaluation produced non-finite value {value}")]
    NonFinite {
        /// The offending value (NaN or ±∞).
        value: f64,
    },
    /// An I/O failure while talking to an external evaluator.
    #[error("blackbox I/O failed: {0}")]
    Io(#[from] std::io::Error),
    /// The external evaluator process is no longer running.
    #[error("blackbox process exited{}", match .code { Some(c) => format!(" with status {c}"), None => String::new() })]
    ChildExited {
        /// Exit status code if the process terminated normally.
        code: Option<i32>,
    },
    /// No reply arrived within the configured deadline.
    #[error("blackbox reply timed out after {seconds}s")]
    Timeout {
        /// The deadline that elapsed, in seconds.
        seconds: f64,
    },
    /// The reply line could not be parsed as a finite number.
    #[error("blackbox reply {reply:?} is not a finite number")]
    MalformedReply {
        /// The offending reply line, trimmed.
        reply: String,
    },
}

/// A minimization target as the solver sees it: a start point, a noisy value
/// oracle, and optional exact information used only for reporting.
///
/// `eval_noisy` takes `&mut self` because observing a stochastic objective
/// advances its noise stream (or talks to an external process). The two
/// `Option` accessors let instrumented runs record true objective values and
/// a best-known-value reference without constraining opaque blackboxes, which
/// simply return `None`.
pub trait Objective {
    /// A short human-readable identifier for reports.
    fn name(&self) -> &str;

    /// Number of decision variables.
    fn dimension(&self) -> usize;

    /// The initial incumbent x⁰.
    fn start_point(&self) -> Vec<f64>;

    /// Draws one noisy observation of the objective at `x`.
    fn eval_noisy(&mut self, x: &[f64]) -> Result<f64, EvalError>;

    /// The exact objective at `x`, when the ground truth is available.
    fn true_value(&self, x: &[f64]) -> Option<f64> {
        let _ = x;
        None
    }

    /// Best known objective value, when one is documented.
    fn f_star_hint(&self) -> Option<f64> {
        None
    }
}

/// A suite instance wrapped with seeded noise: the standard test objective.
///
/// Each evaluation draws from an independently keyed stream indexed by the
/// running call count, so the i-th evaluation of a run sees the same
/// perturbation regardless of which points were queried before it.
#[derive(Debug, Clone)]
pub struct NoisyBlackbox {
    spec: ProblemSpec,
    noise: NoiseSpec,
    seed: u64,
    calls: u64,
}

impl NoisyBlackbox {
    /// Wraps `spec` with `noise`, deriving all randomness from `seed`.
    pub fn new(spec: ProblemSpec, noise: NoiseSpec, seed: u64) -> Self {
        NoisyBlackbox {
            spec,
            noise,
            seed,
            calls: 0,
        }
    }

    /// The wrapped instance.
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    /// The noise configuration.
    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    /// Number of noisy evaluations performed so far.
    pub fn calls(&self) -> u64 {
        self.calls
    }
}

impl Objective for NoisyBlackbox {
    fn name(&self) -> &str {
        self.spec.name()
    }

    fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    fn start_point(&self) -> Vec<f64> {
        self.spec.start().to_vec()
    }

    fn eval_noisy(&mut self, x: &[f64]) -> Result<f64, EvalError> {
        let mut rng = keyed_rng(self.seed, Domain::Noise, self.calls);
        let value = evaluate_noisy(&self.spec, &self.noise, x, &mut rng)?;
        self.calls += 1;
        Ok(value)
    }

    fn true_value(&self, x: &[f64]) -> Option<f64> {
        Some(self.spec.value(x))
    }

    fn f_star_hint(&self) -> Option<f64> {
        Some(self.spec.f_star())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::suite::instance;

    #[test]
    fn same_seed_gives_identical_observation_sequences() {
        let spec = instance("beale-x1").unwrap();
        let noise = NoiseSpec::for_instance(&spec, 0.03);
        let mut a = NoisyBlackbox::new(spec.clone(), noise, 7);
        let mut b = NoisyBlackbox::new(spec.clone(), noise, 7);
        let x = spec.start().to_vec();
        for _ in 0..5 {
            assert_eq!(a.eval_noisy(&x).unwrap(), b.eval_noisy(&x).unwrap());
        }
        assert_eq!(a.calls(), 5);
    }

    #[test]
    fn different_seeds_decorrelate() {
        let spec = instance("beale-x1").unwrap();
        let noise = NoiseSpec::for_instance(&spec, 0.03);
        let mut a = NoisyBlackbox::new(spec.clone(), noise, 1);
        let mut b = NoisyBlackbox::new(spec.clone(), noise, 2);
        let x = spec.start().to_vec();
        assert_ne!(a.eval_noisy(&x).unwrap(), b.eval_noisy(&x).unwrap());
    }

    #[test]
    fn true_value_ignores_noise() {
        let spec = instance("beale-x1").unwrap();
        let noise = NoiseSpec::for_instance(&spec, 0.05);
        let bb = NoisyBlackbox::new(spec.clone(), noise, 3);
        assert_eq!(bb.true_value(spec.start()), Some(spec.start_value()));
    }
}
