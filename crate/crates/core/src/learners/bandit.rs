use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{FtalState, RoundOutcome};
use crate::aggregation::{Epsilon, NoisyPrefixSumTree};
use crate::error::{invalid, Error, Result};
use crate::lovasz::{chain_decompose, hypercube_diameter, ChainDecomposition, HypercubePoint};
use crate::submodular::SetOracle;
use crate::subset::Subset;

/// Parameters of the bandit learner.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditConfig {
    pub n: usize,
    pub bound: f64,
    pub horizon: usize,
    pub epsilon: Epsilon,
    pub h: f64,
    /// Exploration rate in `(0, 1]`.
    pub gamma: f64,
    /// Exploration rate before clamping to `(0, 1]`, kept for provenance.
    pub gamma_requested: f64,
    pub initial_point: HypercubePoint,
}

impl BanditConfig {
    /// `H = c_H·M/(√n T^{1/4})`, `γ = min(c_γ·n/T^{1/4}, 1)`, first iterate all ½.
    pub fn with_defaults(
        n: usize,
        bound: f64,
        horizon: usize,
        epsilon: Epsilon,
        h_scale: f64,
        gamma_scale: f64,
    ) -> Result<Self> {
        for (name, v) in [("h_scale", h_scale), ("gamma_scale", gamma_scale)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        let quarter = (horizon.max(1) as f64).powf(0.25);
        let h = h_scale * bound / ((n as f64).sqrt() * quarter);
        let gamma_requested = gamma_scale * n as f64 / quarter;
        Ok(Self {
            n,
            bound,
            horizon,
            epsilon,
            h,
            gamma: gamma_requested.min(1.0),
            gamma_requested,
            initial_point: HypercubePoint::constant(n, 0.5)?,
        })
    }

    /// Sets γ, clamping into `(0, 1]` and remembering the requested value.
    #[must_use]
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma_requested = gamma;
        self.gamma = gamma.min(1.0);
        self
    }

    pub fn gamma_clamped(&self) -> bool {
        self.gamma != self.gamma_requested
    }

    /// Sensitivity bound actually used by the tree: `2M(n+1)/γ + H√n`,
    /// the largest possible norm of `ĝ + Hx`.
    pub fn tree_bound(&self) -> f64 {
        2.0 * self.bound * (self.n as f64 + 1.0) / self.gamma + self.h * hypercube_diameter(self.n)
    }

    /// `4M + 2H√n`, the Lipschitz constant of the regret analysis. Not used
    /// for noise calibration because `ĝ` can exceed it.
    pub fn analysis_lipschitz(&self) -> f64 {
        4.0 * self.bound + 2.0 * self.h * hypercube_diameter(self.n)
    }
}

/// `ρ_i = (1-γ)μ_i + γ/(n+1)` over the chain sets.
pub fn bandit_probabilities(chain: &ChainDecomposition, gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid("gamma", format!("must lie in (0, 1], got {gamma}")));
    }
    let uniform = gamma / (chain.n() as f64 + 1.0);
    Ok(chain
        .weights()
        .iter()
        .map(|mu| (1.0 - gamma) * mu + uniform)
        .collect())
}

/// A chain set drawn for exploration.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditDraw {
    pub index: usize,
    pub set: Subset,
    pub probabilities: Vec<f64>,
}

/// Draws `B_i` with probability `ρ_i`.
pub fn bandit_sample_set<R: Rng + ?Sized>(
    chain: &ChainDecomposition,
    gamma: f64,
    rng: &mut R,
) -> Result<BanditDraw> {
    let probabilities = bandit_probabilities(chain, gamma)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut index = probabilities.len() - 1;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            index = i;
            break;
        }
    }
    Ok(BanditDraw {
        index,
        set: chain.chain()[index],
        probabilities,
    })
}

/// The random sign `ξ` used for interior chain sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `ξ = +1`: credit the element entering at step `i`.
    Up,
    /// `ξ = -1`: debit the element entering at step `i + 1`.
    Down,
}

impl Direction {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random::<bool>() {
            Direction::Up
        } else {
            Direction::Down
        }
    }
}

/// One-point estimate of the Lovasz subgradient from `value = f(B_index)`.
///
/// At most one coordinate is nonzero. `direction` is ignored for the end
/// sets `B_0` and `B_n`.
pub fn bandit_gradient_estimate(
    chain: &ChainDecomposition,
    probabilities: &[f64],
    index: usize,
    value: f64,
    direction: Direction,
) -> Result<Vec<f64>> {
    let n = chain.n();
    if index > n {
        return Err(invalid("index", format!("{index} outside 0..={n}")));
    }
    if probabilities.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            actual: probabilities.len(),
        });
    }
    let rho = probabilities[index];
    let mut g = vec![0.0; n];
    if index == 0 {
        g[chain.element_at_step(1)] = -value / rho;
    } else if index == n {
        g[chain.element_at_step(n)] = value / rho;
    } else {
        match direction {
            Direction::Up => g[chain.element_at_step(index)] = 2.0 * value / rho,
            Direction::Down => g[chain.element_at_step(index + 1)] = -2.0 * value / rho,
        }
    }
    Ok(g)
}

/// Bandit-feedback private learner. Each round queries the cost function at
/// exactly one set.
pub struct BanditLearner {
    config: BanditConfig,
    state: FtalState,
    sampling: ChaCha8Rng,
    noise: ChaCha8Rng,
}

impl BanditLearner {
    pub fn new(config: BanditConfig, sampling: ChaCha8Rng, noise: ChaCha8Rng) -> Result<Self> {
        if !(config.bound > 0.0 && config.bound.is_finite()) {
            return Err(invalid(
                "M",
                format!("must be positive, got {}", config.bound),
            ));
        }
        if !(config.gamma > 0.0 && config.gamma <= 1.0) {
            return Err(invalid(
                "gamma",
                format!("must lie in (0, 1], got {}", config.gamma),
            ));
        }
        if config.initial_point.dim() != config.n {
            return Err(Error::DimensionMismatch {
                expected: config.n,
                actual: config.initial_point.dim(),
            });
        }
        let tree = NoisyPrefixSumTree::new(
            config.horizon,
            config.n,
            config.tree_bound(),
            config.epsilon,
        )?;
        let state = FtalState::new(config.initial_point.clone(), config.h, tree)?;
        Ok(Self {
            config,
            state,
            sampling,
            noise,
        })
    }

    pub fn config(&self) -> &BanditConfig {
        &self.config
    }

    pub fn state(&self) -> &FtalState {
        &self.state
    }

    pub fn round<O: SetOracle + ?Sized>(&mut self, oracle: &O) -> Result<RoundOutcome> {
        if oracle.ground_set_size() != self.config.n {
            return Err(Error::FunctionMismatch(format!(
                "ground set {} differs from the learner's {}",
                oracle.ground_set_size(),
                self.config.n
            )));
        }
        if oracle.range_bound() > self.config.bound * (1.0 + 1e-12) {
            return Err(Error::FunctionMismatch(format!(
                "range bound {} exceeds the learner's {}",
                oracle.range_bound(),
                self.config.bound
            )));
        }
        if self.state.is_exhausted() {
            return Err(Error::StreamExhausted {
                capacity: self.config.horizon,
            });
        }
        let iterate = self.state.iterate().clone();
        let chain = chain_decompose(&iterate);
        let draw = bandit_sample_set(&chain, self.config.gamma, &mut self.sampling)?;
        let cost = oracle.query(draw.set);
        let direction = if draw.index == 0 || draw.index == self.config.n {
            Direction::Up
        } else {
            Direction::sample(&mut self.sampling)
        };
        let gradient =
            bandit_gradient_estimate(&chain, &draw.probabilities, draw.index, cost, direction)?;
        let streamed_norm = self.state.advance(&gradient, &mut self.noise)?;
        Ok(RoundOutcome {
            chosen_set: draw.set,
            cost,
            iterate,
            gradient,
            streamed_norm,
        })
    }
}
