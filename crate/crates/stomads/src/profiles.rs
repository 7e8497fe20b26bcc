//! Convergence accounting and benchmarking profiles.
//!
//! A run "solves" a problem once the best true objective seen so far crosses
//! the threshold f* + τ_conv·(f(x⁰) − f*) ([`ConvergenceTest`]). Collecting
//! the evaluation counts at which that happens over a problem set × solver
//! grid ([`CostMatrix`]) yields two standard comparison curves: data profiles
//! (fraction solved within α groups of n+1 evaluations) and performance
//! profiles (fraction of problems solved within a factor α of the best
//! solver on each problem).

use serde::Serialize;
use thiserror::Error;

use crate::record::RunRecord;

/// Errors from profile construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    /// τ_conv must lie in [0, 1].
    #[error("convergence tolerance must lie in [0, 1], got {0}")]
    InvalidTolerance(f64),
    /// The start value must not already beat the target.
    #[error("start value {f_start} must be finite and at least f_star {f_star}")]
    InvalidRange {
        /// Best known value.
        f_star: f64,
        /// Objective at the start point.
        f_start: f64,
    },
    /// Convergence accounting needs ground-truth values for every evaluation.
    #[error("run record lacks true objective values; convergence is undefined")]
    MissingTrueValues,
    /// Profiles need at least one problem.
    #[error("profiles need at least one problem")]
    EmptyProblemSet,
    /// Performance profiles compare at least two solvers.
    #[error("performance profiles need at least two solvers, got {0}")]
    SingleSolver(usize),
    /// Every problem row must list one cost per solver.
    #[error("problem {problem:?} lists {got} costs for {expected} solvers")]
    RaggedRow {
        /// The offending problem.
        problem: String,
        /// Number of solvers in the matrix.
        expected: usize,
        /// Number of costs provided.
        got: usize,
    },
}

/// The convergence criterion for one problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceTest {
    tau_conv: f64,
    f_star: f64,
    f_start: f64,
}

impl ConvergenceTest {
    /// Builds the test for accuracy τ_conv against best value `f_star` from
    /// start value `f_start`.
    pub fn new(tau_conv: f64, f_star: f64, f_start: f64) -> Result<Self, ProfileError> {
        if !(tau_conv.is_finite() && (0.0..=1.0).contains(&tau_conv)) {
            return Err(ProfileError::InvalidTolerance(tau_conv));
        }
        if !(f_star.is_finite() && f_start.is_finite() && f_start >= f_star) {
            return Err(ProfileError::InvalidRange { f_star, f_start });
        }
        Ok(ConvergenceTest {
            tau_conv,
            f_star,
            f_start,
        })
    }

    /// Accuracy demand τ_conv.
    pub fn tau_conv(&self) -> f64 {
        self.tau_conv
    }

    /// Best known value f*.
    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    /// Objective at the start point.
    pub fn f_start(&self) -> f64 {
        self.f_start
    }

    /// The value a run must reach: f* + τ_conv·(f(x⁰) − f*).
    pub fn threshold(&self) -> f64 {
        self.f_star + self.tau_conv * (self.f_start - self.f_star)
    }
}

/// First 1-based evaluation index at which the running best of `trace`
/// reaches the threshold, or `None` if it never does.
pub fn evals_to_convergence_from_trace<I>(trace: I, test: &ConvergenceTest) -> Option<u64>
where
    I: IntoIterator<Item = f64>,
{
    let threshold = test.threshold();
    let mut best = f64::INFINITY;
    for (i, value) in trace.into_iter().enumerate() {
        if value < best {
            best = value;
        }
        if best <= threshold {
            return Some(i as u64 + 1);
        }
    }
    None
}

/// Number of evaluations `record` needed to satisfy `test`, judged on true
/// objective values in evaluation order.
///
/// # Errors
///
/// Fails with [`ProfileError::MissingTrueValues`] when any evaluation lacks a
/// ground-truth value (opaque blackboxes cannot be scored this way).
pub fn evals_to_convergence(
    record: &RunRecord,
    test: &ConvergenceTest,
) -> Result<Option<u64>, ProfileError> {
    let trace = record
        .true_value_trace()
        .ok_or(ProfileError::MissingTrueValues)?;
    Ok(evals_to_convergence_from_trace(trace, test))
}

/// One problem's convergence costs across all solvers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemCosts {
    /// Problem identifier (for error messages and reports).
    pub name: String,
    /// Problem dimension n, used by the n+1 normalization.
    pub dimension: usize,
    /// Evaluations to convergence per solver, `None` for unsolved.
    pub evals: Vec<Option<u64>>,
}

/// Convergence costs for a solver set × problem set grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostMatrix {
    solvers: Vec<String>,
    problems: Vec<ProblemCosts>,
}

impl CostMatrix {
    /// Validates that every problem row lists one cost per solver.
    pub fn new(solvers: Vec<String>, problems: Vec<ProblemCosts>) -> Result<Self, ProfileError> {
        for p in &problems {
            if p.evals.len() != solvers.len() {
                return Err(ProfileError::RaggedRow {
                    problem: p.name.clone(),
                    expected: solvers.len(),
                    got: p.evals.len(),
                });
            }
        }
        Ok(CostMatrix { solvers, problems })
    }

    /// Solver names, in column order.
    pub fn solvers(&self) -> &[String] {
        &self.solvers
    }

    /// Problem rows.
    pub fn problems(&self) -> &[ProblemCosts] {
        &self.problems
    }

    /// Data profile: for α = 0, 1, …, 1000, the fraction of problems each
    /// solver gets to convergence within α·(n+1) evaluations.
    ///
    /// # Errors
    ///
    /// Needs at least one problem.
    pub fn data_profile(&self) -> Result<ProfileTable, ProfileError> {
        if self.problems.is_empty() {
            return Err(ProfileError::EmptyProblemSet);
        }
        let alphas: Vec<f64> = (0..=1000).map(f64::from).collect();
        let total = self.problems.len() as f64;
        let mut fractions = Vec::with_capacity(self.solvers.len());
        for s in 0..self.solvers.len() {
            let budgets: Vec<Option<f64>> = self
                .problems
                .iter()
                .map(|p| p.evals[s].map(|t| t as f64 / (p.dimension as f64 + 1.0)))
                .collect();
            let row: Vec<f64> = alphas
                .iter()
                .map(|&alpha| {
                    budgets
                        .iter()
                        .filter(|b| matches!(b, Some(groups) if *groups <= alpha))
                        .count() as f64
                        / total
                })
                .collect();
            fractions.push(row);
        }
        Ok(ProfileTable {
            alphas,
            solvers: self.solvers.clone(),
            fractions,
        })
    }

    /// Performance profile: the fraction of problems each solver solves
    /// within a factor α of the best solver on that problem, tabulated on a
    /// 512-point logarithmic grid from 1 to the largest finite ratio (at
    /// least 2).
    ///
    /// Problems no solver converges on stay in the denominator but contribute
    /// to no solver's numerator.
    ///
    /// # Errors
    ///
    /// Needs at least one problem and at least two solvers.
    pub fn performance_profile(&self) -> Result<ProfileTable, ProfileError> {
        if self.problems.is_empty() {
            return Err(ProfileError::EmptyProblemSet);
        }
        if self.solvers.len() < 2 {
            return Err(ProfileError::SingleSolver(self.solvers.len()));
        }
        let total = self.problems.len() as f64;
        // Ratio of each cell to the best cost on its problem row.
        let ratios: Vec<Vec<Option<f64>>> = self
            .problems
            .iter()
            .map(|p| {
                let best = p.evals.iter().flatten().min().copied();
                p.evals
                    .iter()
                    .map(|t| match (t, best) {
                        (Some(t), Some(best)) => Some(*t as f64 / best as f64),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        let max_ratio = ratios
            .iter()
            .flatten()
            .flatten()
            .fold(1.0_f64, |acc, &r| acc.max(r));
        let hi = max_ratio.max(2.0);
        const POINTS: usize = 512;
        let log_hi = hi.ln();
        let mut alphas: Vec<f64> = (0..POINTS)
            .map(|i| (log_hi * i as f64 / (POINTS - 1) as f64).exp())
            .collect();
        alphas[0] = 1.0;
        alphas[POINTS - 1] = hi;
        let mut fractions = Vec::with_capacity(self.solvers.len());
        for s in 0..self.solvers.len() {
            let row: Vec<f64> = alphas
                .iter()
                .map(|&alpha| {
                    ratios
                        .iter()
                        .filter(|p| matches!(p[s], Some(r) if r <= alpha))
                        .count() as f64
                        / total
                })
                .collect();
            fractions.push(row);
        }
        Ok(ProfileTable {
            alphas,
            solvers: self.solvers.clone(),
            fractions,
        })
    }
}

/// A tabulated profile curve per solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileTable {
    alphas: Vec<f64>,
    solvers: Vec<String>,
    fractions: Vec<Vec<f64>>,
}

impl ProfileTable {
    /// The α grid.
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Solver names, in column order.
    pub fn solvers(&self) -> &[String] {
        &self.solvers
    }

    /// `fractions()[s][i]` is solver s's fraction at `alphas()[i]`.
    pub fn fractions(&self) -> &[Vec<f64>] {
        &self.fractions
    }

    /// Renders the table as CSV with header `alpha,<solver>,...`, one row per
    /// grid point, floats in plain shortest round-trip notation.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("alpha");
        for s in &self.solvers {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (i, alpha) in self.alphas.iter().enumerate() {
            write!(out, "{alpha}").expect("writing to String cannot fail");
            for row in &self.fractions {
                write!(out, ",{}", row[i]).expect("writing to String cannot fail");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_interpolates_between_best_and_start() {
        let test = ConvergenceTest::new(0.1, 0.0, 24.2).unwrap();
        assert!((test.threshold() - 2.42).abs() < 1e-15);
        assert_eq!(ConvergenceTest::new(0.0, 1.0, 5.0).unwrap().threshold(), 1.0);
    }

    #[test]
    fn invalid_tests_are_rejected() {
        assert!(ConvergenceTest::new(-0.1, 0.0, 1.0).is_err());
        assert!(ConvergenceTest::new(1.5, 0.0, 1.0).is_err());
        assert!(ConvergenceTest::new(0.1, 2.0, 1.0).is_err());
        assert!(ConvergenceTest::new(0.1, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn convergence_uses_the_running_minimum() {
        let test = ConvergenceTest::new(0.5, 0.0, 10.0).unwrap();
        // Threshold 5: first reached at the third value.
        let trace = [9.0, 7.0, 4.0, 8.0];
        assert_eq!(evals_to_convergence_from_trace(trace, &test), Some(3));
        assert_eq!(
            evals_to_convergence_from_trace([9.0, 7.0], &test),
            None
        );
    }

    #[test]
    fn ragged_matrices_are_rejected() {
        let err = CostMatrix::new(
            vec!["a".into(), "b".into()],
            vec![ProblemCosts {
                name: "p".into(),
                dimension: 2,
                evals: vec![Some(3)],
            }],
        )
        .unwrap_err();
        assert!(matches!(err, ProfileError::RaggedRow { .. }));
    }
}
