use rand_chacha::ChaCha8Rng;

use super::{FtalState, RoundOutcome};
use crate::aggregation::{Epsilon, NoisyPrefixSumTree};
use crate::error::{invalid, Error, Result};
use crate::lovasz::{
    extension_value_and_subgradient, hypercube_diameter, sample_level_set, HypercubePoint,
};
use crate::submodular::SetFunction;
use crate::subset::Subset;

/// Parameters of the full-information learner.
#[derive(Clone, Debug, PartialEq)]
pub struct FullInfoConfig {
    pub n: usize,
    /// Range bound `M` of every cost function.
    pub bound: f64,
    pub horizon: usize,
    pub epsilon: Epsilon,
    /// Strong-convexity weight `H`.
    pub h: f64,
    /// Sensitivity bound `L` of the streamed vectors.
    pub lipschitz: f64,
    /// First played set; the first iterate is its characteristic vector.
    pub initial_set: Subset,
}

impl FullInfoConfig {
    /// `H = c·M/√T`, `L = 4M + H√n`, first set `∅`.
    pub fn with_defaults(
        n: usize,
        bound: f64,
        horizon: usize,
        epsilon: Epsilon,
        h_scale: f64,
    ) -> Result<Self> {
        let h = default_regularization(bound, horizon, h_scale)?;
        Ok(Self {
            n,
            bound,
            horizon,
            epsilon,
            h,
            lipschitz: lipschitz_bound(n, bound, h),
            initial_set: Subset::EMPTY,
        })
    }

    /// Recomputes `L` after `H` or `M` changed.
    #[must_use]
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self.lipschitz = lipschitz_bound(self.n, self.bound, h);
        self
    }
}

/// Regularization weight balancing the follow-the-leader term against the
/// `T·H·n/2` bias of the quadratic regularizer.
pub fn default_regularization(bound: f64, horizon: usize, scale: f64) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid("h_scale", format!("must be positive, got {scale}")));
    }
    Ok(scale * bound / (horizon.max(1) as f64).sqrt())
}

/// `4M + H√n`, a bound on `‖∇f̂(x) + Hx‖₂` over the hypercube.
pub fn lipschitz_bound(n: usize, bound: f64, h: f64) -> f64 {
    4.0 * bound + h * hypercube_diameter(n)
}

/// Full-information private learner.
pub struct FullInfoLearner {
    config: FullInfoConfig,
    state: FtalState,
    sampling: ChaCha8Rng,
    noise: ChaCha8Rng,
}

impl FullInfoLearner {
    pub fn new(config: FullInfoConfig, sampling: ChaCha8Rng, noise: ChaCha8Rng) -> Result<Self> {
        if !(config.bound > 0.0 && config.bound.is_finite()) {
            return Err(invalid(
                "M",
                format!("must be positive, got {}", config.bound),
            ));
        }
        let x1 = HypercubePoint::vertex(config.n, config.initial_set)?;
        let tree =
            NoisyPrefixSumTree::new(config.horizon, config.n, config.lipschitz, config.epsilon)?;
        let state = FtalState::new(x1, config.h, tree)?;
        Ok(Self {
            config,
            state,
            sampling,
            noise,
        })
    }

    pub fn config(&self) -> &FullInfoConfig {
        &self.config
    }

    pub fn state(&self) -> &FtalState {
        &self.state
    }

    /// Plays one round against `f`, which is revealed in full after the set is chosen.
    pub fn round(&mut self, f: &SetFunction) -> Result<RoundOutcome> {
        if f.n() != self.config.n {
            return Err(Error::FunctionMismatch(format!(
                "ground set {} differs from the learner's {}",
                f.n(),
                self.config.n
            )));
        }
        if f.bound() > self.config.bound * (1.0 + 1e-12) {
            return Err(Error::FunctionMismatch(format!(
                "range bound {} exceeds the learner's {}",
                f.bound(),
                self.config.bound
            )));
        }
        if self.state.is_exhausted() {
            return Err(Error::StreamExhausted {
                capacity: self.config.horizon,
            });
        }
        let iterate = self.state.iterate().clone();
        let chosen_set = sample_level_set(&iterate, &mut self.sampling);
        let cost = f.value(chosen_set);
        let (_, gradient) = extension_value_and_subgradient(f, &iterate)?;
        let streamed_norm = self.state.advance(&gradient, &mut self.noise)?;
        Ok(RoundOutcome {
            chosen_set,
            cost,
            iterate,
            gradient,
            streamed_norm,
        })
    }
}
