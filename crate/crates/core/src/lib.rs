//! Cluster validity by compactness and separability.
//!
//! Each cluster gets an epsilon-compactness score in `[0, 1]` from the
//! empty annuli and angular coverage of its center-distance ladder, and
//! each partition a separability score from the margins between
//! neighboring clusters. Sweeping `k` places every partition in a
//! compactness/separability plane; the selected `k` is the non-dominated
//! point with the largest sum of the two coordinates.

pub mod baselines;
pub mod clustering;
pub mod compactness;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod pipeline;
pub mod plot;
pub mod run;
pub mod selection;
pub mod separability;

pub use error::{Error, Result};
