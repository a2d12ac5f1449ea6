//! Tracking-by-detection with learned pairwise association costs.
//!
//! The pipeline mirrors a classic linear-programming tracker:
//!
//! 1. [`features`] turns a pair of detections into contextual features and
//!    builds labeled training pairs from ground truth.
//! 2. [`gbm`] trains a gradient boosted tree classifier that maps those
//!    features (optionally concatenated with externally supplied appearance
//!    scores) to a match probability.
//! 3. [`flow`] converts detector confidences and match probabilities into
//!    signed edge costs, solves the resulting min-cost-flow problem exactly
//!    and extracts trajectories.
//! 4. [`clearmot`] scores the trajectories against ground truth.
//!
//! [`mot_io`] reads and writes the MOTChallenge text formats used throughout,
//! and [`cli`] wires everything into the `flowtrack` binary.

pub mod clearmot;
pub mod cli;
pub mod error;
pub mod features;
pub mod flow;
pub mod gbm;
pub mod model;
pub mod mot_io;

pub use error::{Error, Result};
pub use model::{center, iou, BoundingBox, Detection, Sequence, Trajectory};
