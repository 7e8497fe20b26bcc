//! Function-value estimation from repeated noisy observations.
//!
//! Progress decisions compare sample means whose accuracy must scale with the
//! square of the frame size: an estimate is considered reliable when its error
//! is at most ε_f·δ_p². [`required_sample_size`] converts a variance bound and
//! a reliability target β into the number of fresh observations that achieves
//! this, and [`EstimateRecord`] accumulates observations so that samples drawn
//! at an earlier, coarser frame can be pooled with later ones
//! ([`merge_on_success`], [`merge_on_failure`]) instead of being thrown away.

use serde::Serialize;
use thiserror::Error;

use crate::problems::EvalError;

/// Errors from estimate construction and accuracy parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    /// A parameter failed validation.
    #[error("invalid {name}: must satisfy {requirement}, got {value}")]
    InvalidParameter {
        /// Which parameter was rejected.
        name: &'static str,
        /// The constraint it violates.
        requirement: &'static str,
        /// The offending value.
        value: f64,
    },
    /// An estimate was requested from an empty sample set.
    #[error("cannot build an estimate from zero samples")]
    EmptySamples,
    /// Two estimates at different points cannot be pooled.
    #[error("cannot merge estimates taken at different points")]
    PointMismatch,
}

/// Reliability and noise parameters governing sample-size selection.
///
/// The fields are validated on construction: ε_f > 0, γ > 2, β ∈ (1/2, 1),
/// κ_f > 0 and the variance bound V > 0, all finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyParams {
    eps_f: f64,
    gamma: f64,
    beta: f64,
    kappa_f: f64,
    variance_bound: f64,
}

impl AccuracyParams {
    /// Validates and packs the accuracy parameters.
    pub fn new(
        eps_f: f64,
        gamma: f64,
        beta: f64,
        kappa_f: f64,
        variance_bound: f64,
    ) -> Result<Self, EstimatorError> {
        let check = |name: &'static str,
                     requirement: &'static str,
                     value: f64,
                     ok: bool|
         -> Result<(), EstimatorError> {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(EstimatorError::InvalidParameter {
                    name,
                    requirement,
                    value,
                })
            }
        };
        check("eps_f", "eps_f > 0", eps_f, eps_f > 0.0)?;
        check("gamma", "gamma > 2", gamma, gamma > 2.0)?;
        check("beta", "1/2 < beta < 1", beta, beta > 0.5 && beta < 1.0)?;
        check("kappa_f", "kappa_f > 0", kappa_f, kappa_f > 0.0)?;
        check(
            "variance_bound",
            "variance_bound > 0",
            variance_bound,
            variance_bound > 0.0,
        )?;
        Ok(AccuracyParams {
            eps_f,
            gamma,
            beta,
            kappa_f,
            variance_bound,
        })
    }

    /// Accuracy proportionality constant ε_f.
    pub fn eps_f(&self) -> f64 {
        self.eps_f
    }

    /// Decrease threshold multiplier γ.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Per-estimate reliability target β.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Noise scale bound κ_f.
    pub fn kappa_f(&self) -> f64 {
        self.kappa_f
    }

    /// Upper bound V on the observation variance.
    pub fn variance_bound(&self) -> f64 {
        self.variance_bound
    }
}

/// A running estimate of the objective at one point: sample count, mean, and
/// centered sum of squares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    point: Vec<f64>,
    count: u64,
    mean: f64,
    sum_sq: f64,
}

impl EstimateRecord {
    /// Builds an estimate from raw observations at `point`.
    ///
    /// # Errors
    ///
    /// Rejects an empty slice and any non-finite observation.
    pub fn from_samples(point: Vec<f64>, samples: &[f64]) -> Result<Self, EstimatorError> {
        if samples.is_empty() {
            return Err(EstimatorError::EmptySamples);
        }
        for &s in samples {
            if !s.is_finite() {
                return Err(EstimatorError::InvalidParameter {
                    name: "sample",
                    requirement: "finite",
                    value: s,
                });
            }
        }
        let count = samples.len() as u64;
        let mean = samples.iter().sum::<f64>() / count as f64;
        let sum_sq = samples.iter().map(|s| (s - mean) * (s - mean)).sum();
        Ok(EstimateRecord {
            point,
            count,
            mean,
            sum_sq,
        })
    }

    /// The point the samples were drawn at.
    pub fn point(&self) -> &[f64] {
        &self.point
    }

    /// Number of pooled observations.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sample mean.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Centered sum of squares Σ (y_i − mean)².
    pub fn sum_sq(&self) -> f64 {
        self.sum_sq
    }

    /// Unbiased sample variance, or `None` with fewer than two observations.
    pub fn sample_variance(&self) -> Option<f64> {
        if self.count < 2 {
            None
        } else {
            Some(self.sum_sq / (self.count - 1) as f64)
        }
    }

    /// Pools two estimates at the same point into one, as if all underlying
    /// observations had been seen together (Chan's pairwise update).
    fn pooled(a: &EstimateRecord, b: &EstimateRecord) -> Result<EstimateRecord, EstimatorError> {
        if a.point != b.point {
            return Err(EstimatorError::PointMismatch);
        }
        let na = a.count as f64;
        let nb = b.count as f64;
        let n = na + nb;
        let delta = b.mean - a.mean;
        let mean = (na * a.mean + nb * b.mean) / n;
        let sum_sq = a.sum_sq + b.sum_sq + delta * delta * na * nb / n;
        Ok(EstimateRecord {
            point: a.point.clone(),
            count: a.count + b.count,
            mean,
            sum_sq,
        })
    }
}

/// Pools the accepted trial's estimate with the fresh incumbent samples of
/// the following iteration.
///
/// After a successful iteration the trial point becomes the incumbent; the
/// samples already spent deciding the move keep informing its value estimate.
///
/// # Errors
///
/// Fails if the two records were taken at different points.
pub fn merge_on_success(
    accepted_trial: &EstimateRecord,
    fresh: &EstimateRecord,
) -> Result<EstimateRecord, EstimatorError> {
    EstimateRecord::pooled(accepted_trial, fresh)
}

/// Pools the retained incumbent's estimate with its fresh samples.
///
/// After a failed iteration the incumbent stays put, so every observation
/// ever taken there remains valid and the estimate keeps sharpening.
///
/// # Errors
///
/// Fails if the two records were taken at different points.
pub fn merge_on_failure(
    incumbent: &EstimateRecord,
    fresh: &EstimateRecord,
) -> Result<EstimateRecord, EstimatorError> {
    EstimateRecord::pooled(incumbent, fresh)
}

/// Draws `n_samples` fresh observations at `x` and summarizes them.
///
/// # Panics
///
/// Panics if `n_samples` is zero.
///
/// # Errors
///
/// Propagates the first evaluation failure; a non-finite observation is
/// reported as [`EvalError::NonFinite`].
pub fn fresh_estimate<F>(mut eval: F, x: &[f64], n_samples: u64) -> Result<EstimateRecord, EvalError>
where
    F: FnMut(&[f64]) -> Result<f64, EvalError>,
{
    assert!(n_samples >= 1, "an estimate needs at least one sample");
    let mut samples = Vec::with_capacity(n_samples as usize);
    for _ in 0..n_samples {
        let y = eval(x)?;
        if !y.is_finite() {
            return Err(EvalError::NonFinite { value: y });
        }
        samples.push(y);
    }
    Ok(EstimateRecord::from_samples(x.to_vec(), &samples)
        .expect("samples are non-empty and finite by construction"))
}

/// The number of fresh observations needed for a β-reliable, ε_f·δ_p²
/// accurate mean under variance bound V:
///
/// n = max(1, ⌈ V / (ε_f²·δ_p⁴·(1 − √β)) ⌉),
///
/// saturating at `u64::MAX` when the ceiling overflows the integer range.
///
/// # Errors
///
/// Rejects a frame size that is not finite and positive.
pub fn required_sample_size(params: &AccuracyParams, delta_p: f64) -> Result<u64, EstimatorError> {
    if !(delta_p.is_finite() && delta_p > 0.0) {
        return Err(EstimatorError::InvalidParameter {
            name: "delta_p",
            requirement: "finite and positive",
            value: delta_p,
        });
    }
    let eps = params.eps_f();
    let denom = eps * eps * delta_p.powi(4) * (1.0 - params.beta().sqrt());
    let raw = (params.variance_bound() / denom).ceil();
    let n = if raw.is_finite() && raw < u64::MAX as f64 {
        raw as u64
    } else {
        u64::MAX
    };
    Ok(n.max(1))
}

/// Whether an estimate meets the ε_f-accuracy target against the true value:
/// |mean − true| ≤ ε_f·δ_p².
pub fn check_accuracy(
    record: &EstimateRecord,
    true_value: f64,
    params: &AccuracyParams,
    delta_p: f64,
) -> bool {
    (record.mean() - true_value).abs() <= params.eps_f() * delta_p * delta_p
}
