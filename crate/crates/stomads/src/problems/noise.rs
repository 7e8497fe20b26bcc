//! Additive component-wise noise.

use rand::Rng;
use serde::Serialize;

use super::blackbox::EvalError;
use super::suite::ProblemSpec;

/// Uniform component noise Θ_i ~ U[−a, a] applied inside the squares of a
/// sum-of-squares objective.
///
/// The half-width `a` is tied to the instance: a = σ·|f(x⁰) − f*|, so a given
/// relative level σ produces comparable corruption across problems whose
/// objective ranges differ by orders of magnitude. The noisy value
/// Σ (f_i(x) + Θ_i)² has expectation f(x) + m·a²/3; the bias term is constant
/// in x and therefore harmless to comparisons between points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSpec {
    sigma: f64,
    half_width: f64,
}

impl NoiseSpec {
    /// Noise scaled to an instance: half-width a = σ·|f(x⁰) − f*|.
    ///
    /// # Panics
    ///
    /// Panics if `sigma` is negative or not finite.
    pub fn for_instance(spec: &ProblemSpec, sigma: f64) -> Self {
        assert!(
            sigma.is_finite() && sigma >= 0.0,
            "noise level must be finite and non-negative, got {sigma}"
        );
        NoiseSpec {
            sigma,
            half_width: sigma * (spec.start_value() - spec.f_star()).abs(),
        }
    }

    /// No noise at all: evaluations are exact.
    pub fn noiseless() -> Self {
        NoiseSpec {
            sigma: 0.0,
            half_width: 0.0,
        }
    }

    /// The relative noise level σ.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The absolute half-width a of the uniform perturbation.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Variance a²/3 of a single component perturbation.
    pub fn component_variance(&self) -> f64 {
        self.half_width * self.half_width / 3.0
    }

    /// Expected inflation m·a²/3 of the objective for `component_count` = m.
    pub fn bias(&self, component_count: usize) -> f64 {
        self.component_variance() * component_count as f64
    }
}

/// One noisy observation of the objective at `x`.
///
/// Draws one uniform perturbation per residual component and returns
/// Σ (f_i(x) + Θ_i)². With a zero half-width no random draws are consumed and
/// the exact value is returned, so noiseless runs stay bit-reproducible
/// regardless of evaluation order.
///
/// # Errors
///
/// Returns [`EvalError::DimensionMismatch`] for a wrong-sized point and
/// [`EvalError::NonFinite`] when any component or the final sum overflows to
/// a non-finite value.
pub fn evaluate_noisy<R: Rng + ?Sized>(
    spec: &ProblemSpec,
    noise: &NoiseSpec,
    x: &[f64],
    rng: &mut R,
) -> Result<f64, EvalError> {
    if x.len() != spec.dimension() {
        return Err(EvalError::DimensionMismatch {
            expected: spec.dimension(),
            got: x.len(),
        });
    }
    let mut components = Vec::with_capacity(spec.component_count());
    spec.components_into(x, &mut components);
    let a = noise.half_width();
    let mut total = 0.0;
    for &c in &components {
        if !c.is_finite() {
            return Err(EvalError::NonFinite { value: c });
        }
        let perturbed = if a > 0.0 { c + rng.gen_range(-a..a) } else { c };
        total += perturbed * perturbed;
    }
    if !total.is_finite() {
        return Err(EvalError::NonFinite { value: total });
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::suite::instance;
    use rand::rngs::mock::StepRng;

    #[test]
    fn noiseless_evaluation_is_exact_and_consumes_no_randomness() {
        let spec = instance("rosenbrock-x1").unwrap();
        let mut rng = StepRng::new(0, 1);
        let v = evaluate_noisy(&spec, &NoiseSpec::noiseless(), spec.start(), &mut rng).unwrap();
        assert_eq!(v, spec.start_value());
    }

    #[test]
    fn half_width_scales_with_start_gap() {
        let spec = instance("rosenbrock-x1").unwrap();
        let noise = NoiseSpec::for_instance(&spec, 0.05);
        assert!((noise.half_width() - 0.05 * spec.start_value()).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let spec = instance("rosenbrock-x1").unwrap();
        let mut rng = StepRng::new(0, 1);
        let err = evaluate_noisy(&spec, &NoiseSpec::noiseless(), &[1.0], &mut rng).unwrap_err();
        assert!(matches!(
            err,
            EvalError::DimensionMismatch {
                expected: 2,
                got: 1
            }
        ));
    }
}
