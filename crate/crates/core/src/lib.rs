//! Chromatic correlation clustering at desk scale.
//!
//! The crate bundles an exact enumeration solver, the standard and
//! strengthened LP relaxations together with the exact chromatic cluster LP
//! (solved by a self-contained simplex), the cluster-based, pivot-based and
//! mixed rounding algorithms, the preclustering/atom pipeline, and numerical
//! verifiers for the triangle-charging analysis behind the 18/11 factor.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod generate;
pub mod io;
pub mod lp;
pub mod model;
pub mod precluster;
pub mod relax;
pub mod rng;
pub mod rounding;

pub use error::{CccError, Result};
pub use model::{ChromaticClustering, ColorLabel, EdgeColoring, VertexRow};

/// The target approximation factor 18/11.
pub const ALPHA_18_11: f64 = 18.0 / 11.0;
