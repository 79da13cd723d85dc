//! Inhomogeneous long-range (scale-free) percolation on finite boxes of Z^d.
//!
//! Vertices carry i.i.d. Pareto weights `W_x` with `P[W_x > w] = w^-beta`, and
//! given the weights each pair `{x, y}` is occupied independently with
//! probability `1 - exp(-lambda W_x W_y / |x - y|^alpha)` (Euclidean norm).
//!
//! The crate samples such graphs reproducibly, couples all intensities
//! through per-pair exponential variables, labels clusters, estimates
//! percolation, degree and distance statistics, checks the good-box
//! hierarchy of the renormalization scheme and computes exact answers on
//! tiny instances by enumeration.

pub mod bounds;
pub mod cli;
pub mod cluster;
pub mod edges;
pub mod error;
pub mod graph;
pub mod lattice;
pub mod metrics;
pub mod oracle;
pub mod params;
pub mod renorm;
pub mod rng;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use lattice::BoxSpec;
pub use params::{classify_phase, ModelParams, PhaseClass};
