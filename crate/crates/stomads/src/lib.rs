//! StoMADS: stochastic mesh adaptive direct search for noisy blackbox
//! minimization.
//!
//! This crate implements the StoMADS algorithm — a mesh adaptive direct search
//! that tolerates noisy objective evaluations by working with sample-average
//! estimates and a three-way iteration classification (success, certain
//! failure, uncertain failure) — together with the benchmark plumbing needed
//! to study it: a classic sum-of-squares test-problem suite with additive
//! uniform noise, convergence testing, and data/performance profiles.
//!
//! # Crate layout
//!
//! - [`mesh`]: frame/mesh size parameters (δ_p, δ_m) stored as exact integer
//!   exponents of a rational base τ, outcome-driven updates, and mesh
//!   membership tests.
//! - [`poll`]: positive spanning poll directions from Householder reflections
//!   of seeded random unit vectors, scaled to mesh coordinates, with
//!   opportunistic ordering.
//! - [`estimator`]: sample-average estimates of the noisy objective, the
//!   pooled merge rule that reuses samples across iterations, and accuracy
//!   bookkeeping.
//! - [`solver`]: the main iteration loop (parameter update → optional search →
//!   poll → termination), iteration classification, a deterministic MADS
//!   baseline mode, and the Φ/Ψ convergence diagnostics.
//! - [`problems`]: benchmark objectives, the noise wrapper, and an external
//!   subprocess blackbox client.
//! - [`record`]: per-evaluation and per-iteration run records with CSV and
//!   JSON emission.
//! - [`profiles`]: convergence tests, data profiles, and performance profiles
//!   over solver×problem cost matrices.
//!
//! # Determinism
//!
//! Every random quantity is derived from a global `u64` seed through
//! counter-keyed generators: noise draws are keyed by (seed, call index) and
//! poll seed vectors by (seed, iteration index). Two runs with the same seed,
//! configuration, and problem produce bit-identical records.
//!
//! # Example
//!
//! ```
//! use stomads::problems::{instance, NoiseSpec, NoisyBlackbox};
//! use stomads::solver::{solve, SolverConfig};
//!
//! let spec = instance("rosenbrock-x1").unwrap();
//! let noise = NoiseSpec::for_instance(&spec, 0.01);
//! let mut blackbox = NoisyBlackbox::new(spec, noise, 42);
//! let config = SolverConfig {
//!     budget: Some(600),
//!     seed: 42,
//!     ..SolverConfig::default()
//! };
//! let record = solve(&mut blackbox, &config).unwrap();
//! assert!(record.evals_used() <= 600);
//! ```

pub mod estimator;
pub mod mesh;
pub mod poll;
pub mod problems;
pub mod profiles;
pub mod record;
pub mod solver;

mod rng;

pub use mesh::{MeshState, OutcomeKind, Ratio};
pub use problems::{NoiseSpec, NoisyBlackbox, Objective, ProblemSpec};
pub use record::RunRecord;
pub use solver::{solve, solve_with_search, SolverConfig};
