//! Differentially private online submodular minimization.
//!
//! Costs are submodular set functions over a small ground set. Learners play
//! in the continuous relaxation given by the Lovasz extension, update with a
//! follow-the-approximate-leader step, and read gradient sums from a
//! tree-based aggregation mechanism that adds Gamma-radius spherical noise.
//! Both the full-information and the single-query bandit settings are
//! covered. The [`harness`] module runs oblivious adversaries against them
//! and measures regret against the exact best fixed set in hindsight.
//!
//! Trials run on rayon by default; disable the `parallel` feature for a
//! purely sequential build.

pub mod aggregation;
pub mod error;
pub mod harness;
pub mod learners;
pub mod lovasz;
pub mod par;
pub mod rng;
pub mod submodular;
pub mod subset;

pub use aggregation::{Epsilon, NoisyPrefixSumTree};
pub use error::{Error, Result};
pub use lovasz::{chain_decompose, extension_subgradient, extension_value, HypercubePoint};
pub use par::Execution;
pub use submodular::{FunctionSpec, SetFunction, SetOracle};
pub use subset::Subset;
