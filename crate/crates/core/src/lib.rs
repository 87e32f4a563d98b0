//! Lattice FK-Ising toolkit.
//!
//! Three graphical layers of the nearest-neighbor Ising model on boxes of
//! `Z^d` — spins, FK (random-cluster, q = 2) bond configurations, and
//! integer-valued currents — together with the machinery to move between
//! them and to cross-check them against each other:
//!
//! * [`geometry`]: boxes, block grids, ghost-augmented and collapsed graphs;
//! * [`exact`]: exact enumeration of spins, bonds and current traces on
//!   small graphs, plus a battery of identity/inequality checks;
//! * [`sampler`]: heat-bath and cluster Monte Carlo with monotone pair
//!   updates;
//! * [`renorm`]: good-block classification and coarse-graining estimates;
//! * [`coupling`]: the block-by-block boundary coupling and the annulus
//!   coupling against a collapsed core;
//! * [`surgery`]: sourced currents, certified connecting paths and the
//!   three-step current surgery with machine-checked certificates;
//! * [`measure`]: batch estimators (correlation decay, mixing gaps,
//!   boundary influence) with CSV/SVG output.

pub mod boundary;
pub mod coupling;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod measure;
pub mod renorm;
pub mod rng;
pub mod sampler;
pub mod surgery;
pub mod unionfind;

pub use error::Error;
