//! Benchmark problems and blackbox access.
//!
//! The built-in suite consists of classic smooth sum-of-squares objectives
//! f(x) = Σ f_i(x)² with documented starting points and best known minima
//! ([`Family`], [`ProblemSpec`], [`suite`]). Noisy evaluation perturbs each
//! component independently — f_Θ(x) = Σ (f_i(x) + Θ_i)² with Θ_i uniform on
//! [−a, a] and a proportional to |f(x⁰) − f*| ([`NoiseSpec`],
//! [`evaluate_noisy`]) — which inflates the expected value by the constant
//! bias m·a²/3 while leaving the minimizer's neighborhood intact.
//!
//! Solvers consume problems through the [`Objective`] trait; implementations
//! are provided for the suite ([`NoisyBlackbox`]) and for external programs
//! speaking a line-oriented stdin/stdout protocol ([`SubprocessBlackbox`]).

mod blackbox;
mod families;
mod noise;
mod subprocess;
mod suite;

pub use blackbox::{EvalError, NoisyBlackbox, Objective};
pub use families::{FStarProvenance, Family};
pub use noise::{evaluate_noisy, NoiseSpec};
pub use subprocess::SubprocessBlackbox;
pub use suite::{instance, manifest, suite, ProblemSpec, SuiteError, SuiteManifest};
