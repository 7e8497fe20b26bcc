//! Poll direction generation.
//!
//! Each iteration derives a dense set of 2n poll directions from a random unit
//! seed vector v: the columns h_j of the Householder reflection
//! H = I − 2vvᵀ/‖v‖² form an orthogonal basis, each column is scaled to the
//! current frame by b_j = round((δ_p/δ_m)·h_j/‖h_j‖_∞) with rounding half away
//! from zero, and the poll set is completed to {±b_1, …, ±b_n} — a positive
//! spanning set in integer mesh coordinates. Trial points are then
//! x + δ_m·b_j, which keeps every candidate on the mesh while its distance
//! from the incumbent tracks the frame size δ_p.
//!
//! Seed vectors come from the counter-keyed generator, so iteration k of a
//! run draws the same directions no matter what happened earlier in the run.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::mesh::MeshState;
use crate::rng::{keyed_rng, Domain};

/// Errors from direction generation.
#[derive(Debug, Error, PartialEq)]
pub enum PollError {
    /// The seed vector must have a nonzero, finite norm.
    #[error("seed vector must be nonzero and finite")]
    DegenerateSeedVector,
    /// The seed vector must match the mesh dimension.
    #[error("seed vector dimension {got} does not match mesh dimension {expected}")]
    DimensionMismatch {
        /// Mesh dimension.
        expected: usize,
        /// Seed vector length.
        got: usize,
    },
}

/// A positive spanning set of 2n integer poll directions, remembering the
/// seed vector that generated it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PollSet {
    seed_vector: Vec<f64>,
    directions: Vec<Vec<i64>>,
}

impl PollSet {
    /// The unit seed vector the directions were derived from.
    pub fn seed_vector(&self) -> &[f64] {
        &self.seed_vector
    }

    /// Directions in polling order (construction order until reordered by
    /// [`order_opportunistic`]).
    pub fn directions(&self) -> &[Vec<i64>] {
        &self.directions
    }

    /// Number of directions (2n).
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    /// Whether the set is empty (never the case for a valid build).
    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Householder reflection H = I − 2·vvᵀ/‖v‖², returned as n column vectors.
///
/// The columns are mutually orthogonal and each has unit Euclidean norm when
/// `v` does; they seed the maximally spread poll basis.
pub fn householder(v: &[f64]) -> Result<Vec<Vec<f64>>, PollError> {
    let n = v.len();
    let norm_sq: f64 = v.iter().map(|c| c * c).sum();
    if norm_sq == 0.0 || !norm_sq.is_finite() {
        return Err(PollError::DegenerateSeedVector);
    }
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        let mut col = Vec::with_capacity(n);
        for (i, &vi) in v.iter().enumerate() {
            let identity = if i == j { 1.0 } else { 0.0 };
            col.push(identity - 2.0 * vi * v[j] / norm_sq);
        }
        columns.push(col);
    }
    Ok(columns)
}

/// Builds the poll set for the current mesh state from seed vector `v`.
///
/// Each Householder column h_j is normalized by its infinity norm, scaled by
/// δ_p/δ_m, and rounded half away from zero to integer mesh coordinates; the
/// returned set is {b_1, …, b_n, −b_1, …, −b_n} in that order.
pub fn build_poll_set(v: &[f64], state: &MeshState) -> Result<PollSet, PollError> {
    if v.len() != state.dimension() {
        return Err(PollError::DimensionMismatch {
            expected: state.dimension(),
            got: v.len(),
        });
    }
    let columns = householder(v)?;
    let ratio = state.frame_to_mesh_ratio();
    let n = v.len();
    let mut directions = Vec::with_capacity(2 * n);
    for col in &columns {
        let inf_norm = col.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
        // A Householder column always has infinity norm ≥ 1/√n > 0.
        let b: Vec<i64> = col
            .iter()
            .map(|&c| (ratio * c / inf_norm).round() as i64)
            .collect();
        directions.push(b);
    }
    for j in 0..n {
        let negated = directions[j].iter().map(|&c| -c).collect();
        directions.push(negated);
    }
    Ok(PollSet {
        seed_vector: v.to_vec(),
        directions,
    })
}

/// Unit seed vector for iteration `k`: `dimension` standard normal draws from
/// the (seed, poll-domain, k)-keyed generator, normalized to unit length.
pub fn next_seed_vector(seed: u64, k: u64, dimension: usize) -> Vec<f64> {
    assert!(dimension >= 1, "seed vectors need at least one coordinate");
    let mut rng = keyed_rng(seed, Domain::Poll, k);
    loop {
        let v: Vec<f64> = (0..dimension)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|c| c / norm).collect();
        }
    }
}

/// Reorders the poll set for opportunistic evaluation: descending cosine
/// similarity to the direction of the last incumbent improvement, ties (and
/// the `None` case) keeping construction order.
pub fn order_opportunistic(poll: PollSet, last_success_dir: Option<&[i64]>) -> PollSet {
    let Some(last) = last_success_dir else {
        return poll;
    };
    let last_norm = norm(last);
    if last_norm == 0.0 {
        return poll;
    }
    let PollSet {
        seed_vector,
        mut directions,
    } = poll;
    directions.sort_by(|a, b| {
        let cos_a = cosine(a, last, last_norm);
        let cos_b = cosine(b, last, last_norm);
        cos_b.total_cmp(&cos_a)
    });
    PollSet {
        seed_vector,
        directions,
    }
}

fn norm(d: &[i64]) -> f64 {
    d.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt()
}

fn cosine(d: &[i64], last: &[i64], last_norm: f64) -> f64 {
    let d_norm = norm(d);
    if d_norm == 0.0 {
        return 0.0;
    }
    let dot: f64 = d
        .iter()
        .zip(last)
        .map(|(&a, &b)| (a as f64) * (b as f64))
        .sum();
    dot / (d_norm * last_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn householder_rejects_zero_and_nonfinite_seeds() {
        assert_eq!(
            householder(&[0.0, 0.0]),
            Err(PollError::DegenerateSeedVector)
        );
        assert_eq!(
            householder(&[f64::NAN, 1.0]),
            Err(PollError::DegenerateSeedVector)
        );
    }

    #[test]
    fn seed_vectors_are_unit_and_reproducible() {
        let a = next_seed_vector(11, 4, 5);
        let b = next_seed_vector(11, 4, 5);
        assert_eq!(a, b);
        let norm: f64 = a.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_ne!(a, next_seed_vector(11, 5, 5));
    }
}
