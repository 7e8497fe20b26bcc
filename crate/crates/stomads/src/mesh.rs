//! Frame and mesh size parameters.
//!
//! StoMADS confines every trial point to a lattice (the *mesh*) of spacing
//! δ_m centred at the incumbent, and draws poll points from a *frame* of
//! radius proportional to δ_p. The two resolutions are coupled by
//! δ_m = min(δ_p, δ_p²), so the mesh refines quadratically faster than the
//! frame shrinks, while both parameters move on the exact power scale of a
//! rational base τ ∈ (0, 1):
//!
//! - a successful iteration coarsens the frame, δ_p ← min(τ⁻² δ_p, τ^{-ẑ})
//!   (growth capped at τ^{-ẑ}),
//! - a certain failure refines it, δ_p ← τ² δ_p,
//! - an uncertain failure refines it more cautiously, δ_p ← τ δ_p.
//!
//! [`MeshState`] stores only the integer exponent of δ_p = τ^e, so the update
//! rules are exact integer arithmetic and the floating-point sizes are derived
//! on demand. For the default τ = 1/2 the derived sizes are themselves exact
//! binary floats over the entire usable exponent range.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Absolute tolerance for mesh membership, measured in units of δ_m: a
/// coordinate offset passes when it is within this distance of an integer
/// multiple of δ_m after division by δ_m.
pub const MESH_MEMBERSHIP_TOLERANCE: f64 = 1e-9;

/// Finest frame exponent a state will refine to.
///
/// Poll directions carry integer entries as large as the frame-to-mesh
/// ratio, which doubles with every exponent step. Stopping at 52 keeps every
/// entry exactly representable in both `i64` and `f64`, so direction norms
/// and trial coordinates stay exact. The frame size at the limit (τ^52,
/// about 2.2e-16 for τ = 1/2) sits at the resolution of `f64` itself; any
/// practical stopping tolerance fires long before.
pub const MAX_FRAME_EXPONENT: i64 = 52;

/// Errors from constructing mesh parameters.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeshError {
    /// The base must be a rational strictly between 0 and 1.
    #[error("mesh base must satisfy 0 < numerator < denominator, got {num}/{den}")]
    InvalidRatio {
        /// Offending numerator.
        num: u32,
        /// Offending denominator.
        den: u32,
    },
    /// Points live in at least one dimension.
    #[error("mesh dimension must be at least 1")]
    ZeroDimension,
    /// Frame exponents below -ẑ would exceed the frame growth cap.
    #[error("frame exponent {exponent} lies below the growth cap -{z_hat}")]
    ExponentBelowCap {
        /// Requested exponent.
        exponent: i64,
        /// Configured cap ẑ.
        z_hat: u32,
    },
    /// Frame exponents above [`MAX_FRAME_EXPONENT`] would break the exact
    /// integer arithmetic behind poll directions.
    #[error("frame exponent {exponent} exceeds the refinement limit {MAX_FRAME_EXPONENT}")]
    ExponentAboveLimit {
        /// Requested exponent.
        exponent: i64,
    },
}

/// Exact rational in (0, 1) used as the frame-size base τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    num: u32,
    den: u32,
}

impl Ratio {
    /// The default base τ = 1/2.
    pub const ONE_HALF: Ratio = Ratio { num: 1, den: 2 };

    /// Builds `num/den`, requiring `0 < num < den`.
    pub fn new(num: u32, den: u32) -> Result<Self, MeshError> {
        if num == 0 || num >= den {
            return Err(MeshError::InvalidRatio { num, den });
        }
        Ok(Ratio { num, den })
    }

    /// Numerator.
    pub fn numerator(self) -> u32 {
        self.num
    }

    /// Denominator.
    pub fn denominator(self) -> u32 {
        self.den
    }

    /// The ratio as a floating-point number.
    pub fn value(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    /// τ^e for any integer exponent, negative exponents allowed.
    ///
    /// Exponents far outside the floating-point range saturate to 0 or +∞,
    /// which downstream code treats as a degenerate (terminally refined or
    /// maximally coarse) mesh rather than an error.
    pub fn powi(self, exponent: i64) -> f64 {
        const CLAMP: i64 = i32::MAX as i64;
        let e = exponent.clamp(-CLAMP, CLAMP) as i32;
        self.value().powi(e)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// How an iteration ended; drives the frame-size update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    /// Some trial estimate improved on the incumbent estimate by at least
    /// γ ε_f δ_p².
    Success,
    /// Every trial estimate exceeded the incumbent estimate by at least
    /// γ ε_f δ_p².
    CertainFailure,
    /// Neither: at least one comparison fell inside the open uncertainty
    /// interval (−γ ε_f δ_p², +γ ε_f δ_p²).
    UncertainFailure,
}

impl OutcomeKind {
    /// Stable lowercase label used in CSV output and summaries.
    pub fn label(self) -> &'static str {
        match self {
            OutcomeKind::Success => "success",
            OutcomeKind::CertainFailure => "certain_failure",
            OutcomeKind::UncertainFailure => "uncertain_failure",
        }
    }
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Frame/mesh resolution state: dimension, base τ, growth cap ẑ, and the
/// current frame exponent e with δ_p = τ^e.
///
/// The mesh exponent is always derived as max(e, 2e), which realises
/// δ_m = min(δ_p, δ_p²) exactly in exponent space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeshState {
    dimension: usize,
    tau: Ratio,
    z_hat: u32,
    frame_exponent: i64,
}

impl MeshState {
    /// Initial state with δ_p = 1 (frame exponent 0).
    pub fn new(dimension: usize, tau: Ratio, z_hat: u32) -> Result<Self, MeshError> {
        Self::with_frame_exponent(dimension, tau, z_hat, 0)
    }

    /// State at an arbitrary frame exponent; exponents below -ẑ are rejected
    /// because no update sequence can reach them.
    pub fn with_frame_exponent(
        dimension: usize,
        tau: Ratio,
        z_hat: u32,
        frame_exponent: i64,
    ) -> Result<Self, MeshError> {
        if dimension == 0 {
            return Err(MeshError::ZeroDimension);
        }
        if frame_exponent < -i64::from(z_hat) {
            return Err(MeshError::ExponentBelowCap {
                exponent: frame_exponent,
                z_hat,
            });
        }
        if frame_exponent > MAX_FRAME_EXPONENT {
            return Err(MeshError::ExponentAboveLimit {
                exponent: frame_exponent,
            });
        }
        Ok(MeshState {
            dimension,
            tau,
            z_hat,
            frame_exponent,
        })
    }

    /// Number of coordinates.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Base τ.
    pub fn tau(&self) -> Ratio {
        self.tau
    }

    /// Frame growth cap ẑ (δ_p never exceeds τ^{-ẑ}).
    pub fn z_hat(&self) -> u32 {
        self.z_hat
    }

    /// Current frame exponent e, with δ_p = τ^e.
    pub fn frame_exponent(&self) -> i64 {
        self.frame_exponent
    }

    /// Current mesh exponent max(e, 2e), with δ_m = τ^{max(e,2e)}.
    pub fn mesh_exponent(&self) -> i64 {
        self.frame_exponent.max(self.frame_exponent.saturating_mul(2))
    }

    /// Frame size δ_p.
    pub fn frame_size(&self) -> f64 {
        self.tau.powi(self.frame_exponent)
    }

    /// Mesh size δ_m = min(δ_p, δ_p²).
    pub fn mesh_size(&self) -> f64 {
        self.tau.powi(self.mesh_exponent())
    }

    /// Re-derives δ_m from the current δ_p and returns it.
    ///
    /// The mesh size is stored nowhere — it is always the exact function
    /// min(δ_p, δ_p²) of the frame size — so this recomputation is idempotent
    /// by construction; it exists to make update sites explicit.
    pub fn sync_mesh_size(&self) -> f64 {
        self.mesh_size()
    }

    /// Ratio δ_p/δ_m = τ^{e − max(e,2e)} by which poll directions are scaled.
    ///
    /// Always ≥ 1, and exact whenever τ^{-e} is representable.
    pub fn frame_to_mesh_ratio(&self) -> f64 {
        self.tau.powi(self.frame_exponent - self.mesh_exponent())
    }

    /// Applies the frame-size update for `outcome`:
    /// success → e − 2 (not below -ẑ); certain failure → e + 2; uncertain
    /// failure → e + 1.
    pub fn apply_outcome(&mut self, outcome: OutcomeKind) {
        let e = self.frame_exponent;
        self.frame_exponent = match outcome {
            OutcomeKind::Success => (e - 2).max(-i64::from(self.z_hat)),
            OutcomeKind::CertainFailure => (e + 2).min(MAX_FRAME_EXPONENT),
            OutcomeKind::UncertainFailure => (e + 1).min(MAX_FRAME_EXPONENT),
        };
    }

    /// Whether `x` lies on the mesh centred at `center`: every coordinate of
    /// `x − center` must be an integer multiple of δ_m within
    /// [`MESH_MEMBERSHIP_TOLERANCE`] (measured after dividing by δ_m).
    ///
    /// The lattice basis is fixed to the ±coordinate directions, so
    /// membership reduces to coordinate-wise integrality.
    ///
    /// # Panics
    ///
    /// Panics when `x` and `center` do not both have the mesh dimension.
    pub fn is_mesh_point(&self, x: &[f64], center: &[f64]) -> bool {
        assert_eq!(
            x.len(),
            self.dimension,
            "point dimension {} does not match mesh dimension {}",
            x.len(),
            self.dimension
        );
        assert_eq!(
            center.len(),
            self.dimension,
            "center dimension {} does not match mesh dimension {}",
            center.len(),
            self.dimension
        );
        let delta_m = self.mesh_size();
        x.iter().zip(center).all(|(&xi, &ci)| {
            let offset = xi - ci;
            if offset == 0.0 {
                return true;
            }
            let multiples = offset / delta_m;
            (multiples - multiples.round()).abs() <= MESH_MEMBERSHIP_TOLERANCE
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_rejects_improper_fractions() {
        assert!(Ratio::new(0, 2).is_err());
        assert!(Ratio::new(2, 2).is_err());
        assert!(Ratio::new(3, 2).is_err());
        assert!(Ratio::new(1, 2).is_ok());
        assert!(Ratio::new(2, 3).is_ok());
    }

    #[test]
    fn powi_handles_extreme_exponents() {
        let half = Ratio::ONE_HALF;
        assert_eq!(half.powi(0), 1.0);
        assert_eq!(half.powi(2), 0.25);
        assert_eq!(half.powi(-3), 8.0);
        assert_eq!(half.powi(5_000), 0.0);
        assert_eq!(half.powi(-5_000), f64::INFINITY);
    }

    #[test]
    fn display_labels_are_stable() {
        assert_eq!(OutcomeKind::Success.to_string(), "success");
        assert_eq!(OutcomeKind::CertainFailure.to_string(), "certain_failure");
        assert_eq!(
            OutcomeKind::UncertainFailure.to_string(),
            "uncertain_failure"
        );
        assert_eq!(Ratio::ONE_HALF.to_string(), "1/2");
    }
}
