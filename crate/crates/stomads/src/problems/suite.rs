//! Problem instances: a family stretched to a scale, with its start point frozen.

use serde::Serialize;
use thiserror::Error;

use super::families::{FStarProvenance, Family};

/// Errors from suite lookup.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteError {
    /// A filter term matched no instance name.
    #[error("filter term {term:?} matches no instance")]
    UnknownFilter {
        /// The offending term as given.
        term: String,
    },
    /// An exact instance lookup failed.
    #[error("unknown instance {name:?}")]
    UnknownInstance {
        /// The requested name.
        name: String,
    },
}

/// A concrete benchmark instance: one [`Family`] at one start-point scale.
///
/// Instances are constructed by [`suite`] or [`instance`]; the stored fields
/// are mutually consistent by construction (for example `start_value` is the
/// objective evaluated at `start`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec {
    name: String,
    family: Family,
    scale: u32,
    dimension: usize,
    component_count: usize,
    start: Vec<f64>,
    start_value: f64,
    f_star: f64,
    f_star_provenance: FStarProvenance,
}

impl ProblemSpec {
    fn build(family: Family, scale: u32) -> Self {
        let start: Vec<f64> = family
            .standard_start()
            .iter()
            .map(|s| s * f64::from(scale))
            .collect();
        let start_value = family.value(&start);
        let (f_star, f_star_provenance) = family.f_star();
        ProblemSpec {
            name: format!("{}-x{}", family.name(), scale),
            family,
            scale,
            dimension: family.dimension(),
            component_count: family.component_count(),
            start,
            start_value,
            f_star,
            f_star_provenance,
        }
    }

    /// Instance name, e.g. `"rosenbrock-x10"`.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// The underlying function family.
    pub fn family(&self) -> Family {
        self.family
    }

    /// Start-point multiplier (1, 10, 100 for most families).
    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Number of decision variables.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of residual components m in f(x) = Σ_{i<m} f_i(x)².
    pub fn component_count(&self) -> usize {
        self.component_count
    }

    /// The scaled starting point x⁰.
    pub fn start(&self) -> &[f64] {
        &self.start
    }

    /// Objective value at the starting point.
    pub fn start_value(&self) -> f64 {
        self.start_value
    }

    /// Best known objective value.
    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    /// Whether `f_star` is exact or numerically determined.
    pub fn f_star_provenance(&self) -> FStarProvenance {
        self.f_star_provenance
    }

    /// Writes the residual components at `x` into `out` (cleared first).
    ///
    /// # Panics
    ///
    /// Panics if `x.len()` differs from [`Self::dimension`].
    pub fn components_into(&self, x: &[f64], out: &mut Vec<f64>) {
        self.family.components_into(x, out);
    }

    /// The exact (noise-free) objective value Σ f_i(x)².
    ///
    /// # Panics
    ///
    /// Panics if `x.len()` differs from [`Self::dimension`].
    pub fn value(&self, x: &[f64]) -> f64 {
        self.family.value(x)
    }
}

/// A serializable listing of every instance, for reproducibility manifests.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteManifest {
    /// Manifest schema version.
    pub format_version: u32,
    /// Every instance in suite order.
    pub instances: Vec<ProblemSpec>,
}

fn all_instances() -> Vec<ProblemSpec> {
    let mut out = Vec::new();
    for family in Family::ALL {
        for scale in family.scales() {
            out.push(ProblemSpec::build(family, scale));
        }
    }
    out
}

/// Returns the benchmark suite, optionally filtered.
///
/// `filter` is a comma-separated list of terms; an instance is kept when any
/// term is a substring of its name, so `"rosenbrock"` selects every scale of
/// both `rosenbrock` and `extended_rosenbrock`, while a full name such as
/// `"beale-x10"` selects exactly one instance. A term matching nothing is
/// reported as [`SuiteError::UnknownFilter`] rather than silently dropped.
pub fn suite(filter: Option<&str>) -> Result<Vec<ProblemSpec>, SuiteError> {
    let instances = all_instances();
    let Some(filter) = filter else {
        return Ok(instances);
    };
    let terms: Vec<&str> = filter
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect();
    for term in &terms {
        if !instances.iter().any(|p| p.name.contains(term)) {
            return Err(SuiteError::UnknownFilter {
                term: (*term).to_string(),
            });
        }
    }
    Ok(instances
        .into_iter()
        .filter(|p| terms.iter().any(|t| p.name.contains(t)))
        .collect())
}

/// Looks up a single instance by exact name.
pub fn instance(name: &str) -> Result<ProblemSpec, SuiteError> {
    all_instances()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| SuiteError::UnknownInstance {
            name: name.to_string(),
        })
}

/// Builds the manifest describing the full suite.
pub fn manifest() -> SuiteManifest {
    SuiteManifest {
        format_version: 1,
        instances: all_instances(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_selects_by_substring() {
        let picked = suite(Some("beale")).unwrap();
        assert_eq!(picked.len(), 3);
        assert!(picked.iter().all(|p| p.name.starts_with("beale-x")));
    }

    #[test]
    fn filter_with_unknown_term_errors() {
        let err = suite(Some("beale,nosuchproblem")).unwrap_err();
        assert_eq!(
            err,
            SuiteError::UnknownFilter {
                term: "nosuchproblem".to_string()
            }
        );
    }

    #[test]
    fn instance_lookup_is_exact() {
        let spec = instance("rosenbrock-x1").unwrap();
        assert_eq!(spec.dimension(), 2);
        assert_eq!(spec.start(), &[-1.2, 1.0]);
        assert!(instance("rosenbrock").is_err());
    }

    #[test]
    fn manifest_lists_every_instance() {
        let m = manifest();
        assert_eq!(m.format_version, 1);
        assert_eq!(m.instances.len(), suite(None).unwrap().len());
    }
}
