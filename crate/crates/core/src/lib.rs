//! Balanced stochastic block model (BSBM) for signed networks.
//!
//! Communities are detected by maximizing a profile pseudo-likelihood in which
//! each community is also assigned to one of two meta-groups: edges inside a
//! meta-group lean positive and edges across lean negative. The crate covers
//! sampling, fitting, the comparison methods used in simulation studies, and a
//! scenario runner that writes CSV result tables.

pub mod baselines;
pub mod bsbm_em;
pub mod error;
pub mod eval_harness;
pub mod fitter;
pub mod linalg;
pub mod maxcut;
pub mod signed_graph;
pub mod spectral_init;

pub use error::{Error, Result};
/// Matrix types in the public API (`BsbmParams`, `SuffStats`) come from this crate.
pub use nalgebra;
pub use signed_graph::{BinarizeMode, BsbmParams, Labels, SignedGraph};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate-wide RNG: every stochastic routine takes a `u64` seed and builds one of these.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
