//! Online learners: the follow-the-approximate-leader core shared by both
//! settings, the full-information learner, and the bandit learner.

mod bandit;
mod ftal;
mod full_info;

pub use bandit::{
    bandit_gradient_estimate, bandit_probabilities, bandit_sample_set, BanditConfig, BanditDraw,
    BanditLearner, Direction,
};
pub use ftal::{ftal_argmin, FtalState};
pub use full_info::{FullInfoConfig, FullInfoLearner};

use crate::lovasz::HypercubePoint;
use crate::subset::Subset;

/// What the learner did in one round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundOutcome {
    pub chosen_set: Subset,
    /// `f_t` at the chosen set.
    pub cost: f64,
    /// The iterate `x_t` the set was drawn from.
    pub iterate: HypercubePoint,
    /// Exact or estimated subgradient of the Lovasz extension at `x_t`,
    /// before the regularization term is added.
    pub gradient: Vec<f64>,
    /// L2 norm of the vector handed to the aggregation tree.
    pub streamed_norm: f64,
}
