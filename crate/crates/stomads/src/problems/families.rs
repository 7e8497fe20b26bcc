//! The built-in sum-of-squares objective families.
//!
//! Every objective has the form f(x) = Σ_{i=1..m} f_i(x)² for smooth component
//! functions f_i, a classic unconstrained least-squares test set spanning
//! dimensions 2 through 12. Each family carries its standard starting point,
//! its best known minimum value (analytic where a closed form exists,
//! otherwise a high-precision numerically refined value), and the starting
//! point multipliers used to build benchmark instances.

use serde::Serialize;

use std::f64::consts::PI;

/// How a family's best known minimum value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FStarProvenance {
    /// Exact closed form (most families attain zero residuals).
    Analytic,
    /// Best value found by high-precision numerical refinement.
    Empirical,
}

/// The objective families in the built-in suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Rosenbrock,
    FreudensteinRoth,
    PowellBadlyScaled,
    BrownBadlyScaled,
    Beale,
    JennrichSampson,
    HelicalValley,
    Bard,
    Gaussian,
    Box3d,
    PowellSingular,
    Wood,
    PenaltyI,
    ExtendedRosenbrock,
    Chebyquad,
    LinearRank1,
    VariablyDimensioned,
    DiscreteBoundaryValue,
    BroydenTridiagonal,
    BroydenBanded,
    LinearFullRank,
    BrownAlmostLinear,
    Trigonometric,
}

/// Measurement table for the Bard family.
const BARD_Y: [f64; 15] = [
    0.14, 0.18, 0.22, 0.25, 0.29, 0.32, 0.35, 0.39, 0.37, 0.58, 0.73, 0.96, 1.34, 2.10, 4.39,
];

/// Measurement table for the Gaussian family.
const GAUSSIAN_Y: [f64; 15] = [
    0.0009, 0.0044, 0.0175, 0.0540, 0.1295, 0.2420, 0.3521, 0.3989, 0.3521, 0.2420, 0.1295,
    0.0540, 0.0175, 0.0044, 0.0009,
];

/// Measurement table for the Beale family.
const BEALE_Y: [f64; 3] = [1.5, 2.25, 2.625];

impl Family {
    /// All families, in suite order.
    pub const ALL: [Family; 23] = [
        Family::Rosenbrock,
        Family::FreudensteinRoth,
        Family::PowellBadlyScaled,
        Family::BrownBadlyScaled,
        Family::Beale,
        Family::JennrichSampson,
        Family::HelicalValley,
        Family::Bard,
        Family::Gaussian,
        Family::Box3d,
        Family::PowellSingular,
        Family::Wood,
        Family::PenaltyI,
        Family::ExtendedRosenbrock,
        Family::Chebyquad,
        Family::LinearRank1,
        Family::VariablyDimensioned,
        Family::DiscreteBoundaryValue,
        Family::BroydenTridiagonal,
        Family::BroydenBanded,
        Family::LinearFullRank,
        Family::BrownAlmostLinear,
        Family::Trigonometric,
    ];

    /// Stable snake_case name used in instance identifiers and manifests.
    pub fn name(self) -> &'static str {
        match self {
            Family::Rosenbrock => "rosenbrock",
            Family::FreudensteinRoth => "freudenstein_roth",
            Family::PowellBadlyScaled => "powell_badly_scaled",
            Family::BrownBadlyScaled => "brown_badly_scaled",
            Family::Beale => "beale",
            Family::JennrichSampson => "jennrich_sampson",
            Family::HelicalValley => "helical_valley",
            Family::Bard => "bard",
            Family::Gaussian => "gaussian",
            Family::Box3d => "box_3d",
            Family::PowellSingular => "powell_singular",
            Family::Wood => "wood",
            Family::PenaltyI => "penalty_i",
            Family::ExtendedRosenbrock => "extended_rosenbrock",
            Family::Chebyquad => "chebyquad",
            Family::LinearRank1 => "linear_rank1",
            Family::VariablyDimensioned => "variably_dimensioned",
            Family::DiscreteBoundaryValue => "discrete_boundary_value",
            Family::BroydenTridiagonal => "broyden_tridiagonal",
            Family::BroydenBanded => "broyden_banded",
            Family::LinearFullRank => "linear_full_rank",
            Family::BrownAlmostLinear => "brown_almost_linear",
            Family::Trigonometric => "trigonometric",
        }
    }

    /// Number of variables n.
    pub fn dimension(self) -> usize {
        match self {
            Family::Rosenbrock
            | Family::FreudensteinRoth
            | Family::PowellBadlyScaled
            | Family::BrownBadlyScaled
            | Family::Beale
            | Family::JennrichSampson => 2,
            Family::HelicalValley | Family::Bard | Family::Gaussian | Family::Box3d => 3,
            Family::PowellSingular | Family::Wood | Family::PenaltyI => 4,
            Family::ExtendedRosenbrock => 6,
            Family::Chebyquad | Family::LinearRank1 => 7,
            Family::VariablyDimensioned
            | Family::DiscreteBoundaryValue
            | Family::BroydenTridiagonal
            | Family::BroydenBanded => 8,
            Family::LinearFullRank => 9,
            Family::BrownAlmostLinear => 10,
            Family::Trigonometric => 12,
        }
    }

    /// Number of component functions m.
    pub fn component_count(self) -> usize {
        match self {
            Family::Rosenbrock
            | Family::FreudensteinRoth
            | Family::PowellBadlyScaled => 2,
            Family::BrownBadlyScaled | Family::Beale | Family::HelicalValley => 3,
            Family::JennrichSampson | Family::Box3d => 10,
            Family::Bard | Family::Gaussian => 15,
            Family::PowellSingular => 4,
            Family::Wood => 6,
            Family::PenaltyI => 5,
            Family::ExtendedRosenbrock => 6,
            Family::Chebyquad => 7,
            Family::LinearRank1 => 35,
            Family::VariablyDimensioned => 10,
            Family::DiscreteBoundaryValue
            | Family::BroydenTridiagonal
            | Family::BroydenBanded => 8,
            Family::LinearFullRank => 45,
            Family::BrownAlmostLinear => 10,
            Family::Trigonometric => 12,
        }
    }

    /// The family's standard starting point.
    pub fn standard_start(self) -> Vec<f64> {
        let n = self.dimension();
        match self {
            Family::Rosenbrock => vec![-1.2, 1.0],
            Family::FreudensteinRoth => vec![0.5, -2.0],
            Family::PowellBadlyScaled => vec![0.0, 1.0],
            Family::BrownBadlyScaled => vec![1.0, 1.0],
            Family::Beale => vec![1.0, 1.0],
            Family::JennrichSampson => vec![0.3, 0.4],
            Family::HelicalValley => vec![-1.0, 0.0, 0.0],
            Family::Bard => vec![1.0, 1.0, 1.0],
            Family::Gaussian => vec![0.4, 1.0, 0.0],
            Family::Box3d => vec![0.0, 10.0, 20.0],
            Family::PowellSingular => vec![3.0, -1.0, 0.0, 1.0],
            Family::Wood => vec![-3.0, -1.0, -3.0, -1.0],
            Family::PenaltyI => (1..=n).map(|j| j as f64).collect(),
            Family::ExtendedRosenbrock => vec![-1.2, 1.0, -1.2, 1.0, -1.2, 1.0],
            Family::Chebyquad => (1..=n).map(|j| j as f64 / (n as f64 + 1.0)).collect(),
            Family::LinearRank1 | Family::LinearFullRank => vec![1.0; n],
            Family::VariablyDimensioned => {
                (1..=n).map(|j| 1.0 - j as f64 / n as f64).collect()
            }
            Family::DiscreteBoundaryValue => (1..=n)
                .map(|j| {
                    let t = j as f64 / (n as f64 + 1.0);
                    t * (t - 1.0)
                })
                .collect(),
            Family::BroydenTridiagonal | Family::BroydenBanded => vec![-1.0; n],
            Family::BrownAlmostLinear => vec![0.5; n],
            Family::Trigonometric => vec![1.0 / n as f64; n],
        }
    }

    /// Starting point multipliers for the benchmark instances.
    ///
    /// The exponential families overflow double precision at large scaled
    /// starts, so Jennrich–Sampson uses tighter multipliers.
    pub fn scales(self) -> [u32; 3] {
        match self {
            Family::JennrichSampson => [1, 5, 10],
            _ => [1, 10, 100],
        }
    }

    /// Best known minimum value of f and how it was obtained.
    pub fn f_star(self) -> (f64, FStarProvenance) {
        match self {
            Family::JennrichSampson => (124.36218235561479, FStarProvenance::Empirical),
            Family::Bard => (8.2148773065789729e-3, FStarProvenance::Empirical),
            Family::Gaussian => (1.1279327696186969e-8, FStarProvenance::Empirical),
            Family::PenaltyI => (2.2499775008999369e-5, FStarProvenance::Empirical),
            Family::LinearFullRank => {
                let (m, n) = (
                    self.component_count() as f64,
                    self.dimension() as f64,
                );
                (m - n, FStarProvenance::Analytic)
            }
            Family::LinearRank1 => {
                let m = self.component_count() as f64;
                (m * (m - 1.0) / (2.0 * (2.0 * m + 1.0)), FStarProvenance::Analytic)
            }
            _ => (0.0, FStarProvenance::Analytic),
        }
    }

    /// Writes the m component values f_i(x) into `out` (cleared first).
    ///
    /// # Panics
    ///
    /// Panics when `x.len()` differs from [`Family::dimension`].
    pub fn components_into(self, x: &[f64], out: &mut Vec<f64>) {
        assert_eq!(
            x.len(),
            self.dimension(),
            "{} expects {} coordinates, got {}",
            self.name(),
            self.dimension(),
            x.len()
        );
        out.clear();
        let n = self.dimension();
        match self {
            Family::Rosenbrock => {
                out.push(10.0 * (x[1] - x[0] * x[0]));
                out.push(1.0 - x[0]);
            }
            Family::FreudensteinRoth => {
                out.push(-13.0 + x[0] + ((5.0 - x[1]) * x[1] - 2.0) * x[1]);
                out.push(-29.0 + x[0] + ((x[1] + 1.0) * x[1] - 14.0) * x[1]);
            }
            Family::PowellBadlyScaled => {
                out.push(1e4 * x[0] * x[1] - 1.0);
                out.push((-x[0]).exp() + (-x[1]).exp() - 1.0001);
            }
            Family::BrownBadlyScaled => {
                out.push(x[0] - 1e6);
                out.push(x[1] - 2e-6);
                out.push(x[0] * x[1] - 2.0);
            }
            Family::Beale => {
                for (i, &y) in BEALE_Y.iter().enumerate() {
                    out.push(y - x[0] * (1.0 - x[1].powi(i as i32 + 1)));
                }
            }
            Family::JennrichSampson => {
                for i in 1..=10 {
                    let fi = i as f64;
                    out.push(2.0 + 2.0 * fi - ((fi * x[0]).exp() + (fi * x[1]).exp()));
                }
            }
            Family::HelicalValley => {
                let theta = if x[0] > 0.0 {
                    (x[1] / x[0]).atan() / (2.0 * PI)
                } else if x[0] < 0.0 {
                    (x[1] / x[0]).atan() / (2.0 * PI) + 0.5
                } else if x[1] >= 0.0 {
                    0.25
                } else {
                    -0.25
                };
                out.push(10.0 * (x[2] - 10.0 * theta));
                out.push(10.0 * ((x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0));
                out.push(x[2]);
            }
            Family::Bard => {
                for (i, &y) in BARD_Y.iter().enumerate() {
                    let u = (i + 1) as f64;
                    let v = 15.0 - i as f64;
                    let w = u.min(v);
                    out.push(y - (x[0] + u / (v * x[1] + w * x[2])));
                }
            }
            Family::Gaussian => {
                for (i, &y) in GAUSSIAN_Y.iter().enumerate() {
                    let t = (7.0 - i as f64) / 2.0;
                    let d = t - x[2];
                    out.push(x[0] * (-x[1] * d * d / 2.0).exp() - y);
                }
            }
            Family::Box3d => {
                for i in 1..=10 {
                    let t = 0.1 * i as f64;
                    out.push(
                        (-t * x[0]).exp()
                            - (-t * x[1]).exp()
                            - x[2] * ((-t).exp() - (-10.0 * t).exp()),
                    );
                }
            }
            Family::PowellSingular => {
                out.push(x[0] + 10.0 * x[1]);
                out.push(5.0f64.sqrt() * (x[2] - x[3]));
                let a = x[1] - 2.0 * x[2];
                out.push(a * a);
                let b = x[0] - x[3];
                out.push(10.0f64.sqrt() * b * b);
            }
            Family::Wood => {
                out.push(10.0 * (x[1] - x[0] * x[0]));
                out.push(1.0 - x[0]);
                out.push(90.0f64.sqrt() * (x[3] - x[2] * x[2]));
                out.push(1.0 - x[2]);
                out.push(10.0f64.sqrt() * (x[1] + x[3] - 2.0));
                out.push((x[1] - x[3]) / 10.0f64.sqrt());
            }
            Family::PenaltyI => {
                let a = 1e-5f64.sqrt();
                for &xi in x {
                    out.push(a * (xi - 1.0));
                }
                let sum_sq: f64 = x.iter().map(|&xi| xi * xi).sum();
                out.push(sum_sq - 0.25);
            }
            Family::ExtendedRosenbrock => {
                for pair in 0..n / 2 {
                    let (a, b) = (x[2 * pair], x[2 * pair + 1]);
                    out.push(10.0 * (b - a * a));
                    out.push(1.0 - a);
                }
            }
            Family::Chebyquad => {
                // Sums of shifted Chebyshev polynomials over the coordinates,
                // compared with their exact integrals over [0, 1].
                let mut sums = vec![0.0; n];
                for &xj in x {
                    let arg = 2.0 * xj - 1.0;
                    let mut t_prev = 1.0;
                    let mut t_curr = arg;
                    for sum in sums.iter_mut() {
                        *sum += t_curr;
                        let t_next = 2.0 * arg * t_curr - t_prev;
                        t_prev = t_curr;
                        t_curr = t_next;
                    }
                }
                for (idx, sum) in sums.iter().enumerate() {
                    let i = idx + 1;
                    let integral = if i % 2 == 0 {
                        -1.0 / ((i * i) as f64 - 1.0)
                    } else {
                        0.0
                    };
                    out.push(sum / n as f64 - integral);
                }
            }
            Family::LinearRank1 => {
                let weighted: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(j, &xj)| (j + 1) as f64 * xj)
                    .sum();
                for i in 1..=self.component_count() {
                    out.push(i as f64 * weighted - 1.0);
                }
            }
            Family::VariablyDimensioned => {
                let mut weighted = 0.0;
                for (j, &xj) in x.iter().enumerate() {
                    out.push(xj - 1.0);
                    weighted += (j + 1) as f64 * (xj - 1.0);
                }
                out.push(weighted);
                out.push(weighted * weighted);
            }
            Family::DiscreteBoundaryValue => {
                let h = 1.0 / (n as f64 + 1.0);
                for j in 0..n {
                    let t = (j + 1) as f64 * h;
                    let left = if j == 0 { 0.0 } else { x[j - 1] };
                    let right = if j == n - 1 { 0.0 } else { x[j + 1] };
                    let cube = {
                        let c = x[j] + t + 1.0;
                        c * c * c
                    };
                    out.push(2.0 * x[j] - left - right + h * h * cube / 2.0);
                }
            }
            Family::BroydenTridiagonal => {
                for j in 0..n {
                    let left = if j == 0 { 0.0 } else { x[j - 1] };
                    let right = if j == n - 1 { 0.0 } else { x[j + 1] };
                    out.push((3.0 - 2.0 * x[j]) * x[j] - left - 2.0 * right + 1.0);
                }
            }
            Family::BroydenBanded => {
                for i in 0..n {
                    let lo = i.saturating_sub(5);
                    let hi = (i + 1).min(n - 1);
                    let mut band = 0.0;
                    for (j, &xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                        if j != i {
                            band += xj * (1.0 + xj);
                        }
                    }
                    out.push(x[i] * (2.0 + 5.0 * x[i] * x[i]) + 1.0 - band);
                }
            }
            Family::LinearFullRank => {
                let m = self.component_count();
                let sum: f64 = x.iter().sum();
                let shift = 2.0 * sum / m as f64 + 1.0;
                for &xi in x {
                    out.push(xi - shift);
                }
                for _ in n..m {
                    out.push(-shift);
                }
            }
            Family::BrownAlmostLinear => {
                let sum: f64 = x.iter().sum();
                for &xi in x.iter().take(n - 1) {
                    out.push(xi + sum - (n as f64 + 1.0));
                }
                let product: f64 = x.iter().product();
                out.push(product - 1.0);
            }
            Family::Trigonometric => {
                let cos_sum: f64 = x.iter().map(|&xi| xi.cos()).sum();
                for (j, &xj) in x.iter().enumerate() {
                    out.push(
                        n as f64 - cos_sum + (j + 1) as f64 * (1.0 - xj.cos()) - xj.sin(),
                    );
                }
            }
        }
        debug_assert_eq!(out.len(), self.component_count());
    }

    /// The objective value f(x) = Σ f_i(x)².
    pub fn value(self, x: &[f64]) -> f64 {
        let mut components = Vec::with_capacity(self.component_count());
        self.components_into(x, &mut components);
        components.iter().map(|&c| c * c).sum()
    }
}
