use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Adversary, HindsightAccumulator, RegretTrace, RoundRecord, TraceMetadata};
use crate::aggregation::Epsilon;
use crate::error::{invalid, Error, Result};
use crate::learners::{BanditConfig, BanditLearner, FullInfoConfig, FullInfoLearner};
use crate::lovasz::HypercubePoint;
use crate::par::{map_indexed, Execution};
use crate::rng::{stream, StreamPurpose};
use crate::submodular::CountingOracle;
use crate::subset::Subset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    FullInfo,
    Bandit,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::FullInfo => "full-info",
            Algorithm::Bandit => "bandit",
        })
    }
}

/// Optional departures from the default parameter rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub h: Option<f64>,
    /// Constant in front of the default `H` rule.
    pub h_scale: f64,
    /// Full information only: tree sensitivity bound `L`.
    pub lipschitz: Option<f64>,
    pub gamma: Option<f64>,
    /// Constant in front of the default `γ` rule.
    pub gamma_scale: f64,
    /// Full information only: mask of the first played set.
    pub initial_set: Option<u64>,
    /// Bandit only: first iterate.
    pub initial_point: Option<Vec<f64>>,
}

impl Default for Overrides {
    fn default() -> Self {
        Self {
            h: None,
            h_scale: 1.0,
            lipschitz: None,
            gamma: None,
            gamma_scale: 1.0,
            initial_set: None,
            initial_point: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentParams {
    pub n: usize,
    pub bound: f64,
    pub horizon: usize,
    pub epsilon: Epsilon,
    pub overrides: Overrides,
}

/// Fully resolved learner configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum Resolved {
    FullInfo(FullInfoConfig),
    Bandit(BanditConfig),
}

impl Resolved {
    pub fn h(&self) -> f64 {
        match self {
            Resolved::FullInfo(c) => c.h,
            Resolved::Bandit(c) => c.h,
        }
    }

    pub fn tree_bound(&self) -> f64 {
        match self {
            Resolved::FullInfo(c) => c.lipschitz,
            Resolved::Bandit(c) => c.tree_bound(),
        }
    }

    pub fn analysis_lipschitz(&self) -> f64 {
        match self {
            Resolved::FullInfo(c) => c.lipschitz,
            Resolved::Bandit(c) => c.analysis_lipschitz(),
        }
    }

    pub fn gamma(&self) -> Option<(f64, f64)> {
        match self {
            Resolved::FullInfo(_) => None,
            Resolved::Bandit(c) => Some((c.gamma, c.gamma_requested)),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Resolved::FullInfo(_) => Algorithm::FullInfo,
            Resolved::Bandit(_) => Algorithm::Bandit,
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            Resolved::FullInfo(c) => c.horizon,
            Resolved::Bandit(c) => c.horizon,
        }
    }
}

/// Applies the default rules, then the overrides.
pub fn resolve(algorithm: Algorithm, params: &ExperimentParams) -> Result<Resolved> {
    let o = &params.overrides;
    if params.horizon == 0 {
        return Err(invalid("T", "horizon must be at least 1"));
    }
    if let Some(h) = o.h {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid("H", format!("must be positive, got {h}")));
        }
    }
    match algorithm {
        Algorithm::FullInfo => {
            if o.gamma.is_some() || o.initial_point.is_some() {
                return Err(invalid(
                    "overrides",
                    "gamma and initial_point apply to the bandit learner only",
                ));
            }
            let mut cfg = FullInfoConfig::with_defaults(
                params.n,
                params.bound,
                params.horizon,
                params.epsilon,
                o.h_scale,
            )?;
            if let Some(h) = o.h {
                cfg = cfg.with_h(h);
            }
            if let Some(l) = o.lipschitz {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(invalid("L", format!("must be positive, got {l}")));
                }
                cfg.lipschitz = l;
            }
            if let Some(mask) = o.initial_set {
                cfg.initial_set = Subset::from_mask(mask).check_within(params.n)?;
            }
            Ok(Resolved::FullInfo(cfg))
        }
        Algorithm::Bandit => {
            if o.lipschitz.is_some() || o.initial_set.is_some() {
                return Err(invalid(
                    "overrides",
                    "lipschitz and initial_set apply to the full-information learner only",
                ));
            }
            let mut cfg = BanditConfig::with_defaults(
                params.n,
                params.bound,
                params.horizon,
                params.epsilon,
                o.h_scale,
                o.gamma_scale,
            )?;
            if let Some(h) = o.h {
                cfg.h = h;
            }
            if let Some(g) = o.gamma {
                if !(g > 0.0 && g.is_finite()) {
                    return Err(invalid("gamma", format!("must be positive, got {g}")));
                }
                cfg = cfg.with_gamma(g);
            }
            if let Some(x) = &o.initial_point {
                if x.len() != params.n {
                    return Err(Error::DimensionMismatch {
                        expected: params.n,
                        actual: x.len(),
                    });
                }
                cfg.initial_point = HypercubePoint::new(x.clone())?;
            }
            Ok(Resolved::Bandit(cfg))
        }
    }
}

/// Plays one trial. The adversary's sequence is generated twice from the
/// same stream: once for the hindsight optimum, once for play.
pub fn run_trial(
    adversary: &Adversary,
    resolved: &Resolved,
    seed: u64,
    trial: u64,
) -> Result<RegretTrace> {
    let horizon = resolved.horizon();
    let n = adversary.n();
    let adv_rng = stream(seed, trial, StreamPurpose::Adversary);

    let mut acc = HindsightAccumulator::new(n)?;
    for f in adversary.stream(adv_rng.clone()).take(horizon) {
        acc.observe(&f)?;
    }
    let (hindsight_set, hindsight_cost) = acc.best();

    let sampling = stream(seed, trial, StreamPurpose::Sampling);
    let noise = stream(seed, trial, StreamPurpose::Noise);
    let mut rounds = Vec::with_capacity(horizon);
    let mut cum_cost = 0.0;
    let mut regret = 0.0;
    let mut record = |set: Subset, cost: f64, opt_cost: f64| {
        cum_cost += cost;
        regret += cost - opt_cost;
        rounds.push(RoundRecord {
            set,
            cost,
            cum_cost,
            regret,
        });
    };

    let (epsilon, oracle_queries) = match resolved {
        Resolved::FullInfo(cfg) => {
            let mut learner = FullInfoLearner::new(cfg.clone(), sampling, noise)?;
            for f in adversary.stream(adv_rng).take(horizon) {
                let out = learner.round(&f)?;
                record(out.chosen_set, out.cost, f.value(hindsight_set));
            }
            (cfg.epsilon, None)
        }
        Resolved::Bandit(cfg) => {
            let mut learner = BanditLearner::new(cfg.clone(), sampling, noise)?;
            let mut queries = 0;
            for f in adversary.stream(adv_rng).take(horizon) {
                let oracle = CountingOracle::new(&f);
                let out = learner.round(&oracle)?;
                queries += oracle.calls();
                record(out.chosen_set, out.cost, f.value(hindsight_set));
            }
            (cfg.epsilon, Some(queries))
        }
    };

    let gamma = resolved.gamma();
    Ok(RegretTrace {
        metadata: TraceMetadata {
            algorithm: resolved.algorithm().to_string(),
            n,
            bound: adversary.bound(),
            horizon,
            epsilon,
            h: resolved.h(),
            tree_bound: resolved.tree_bound(),
            analysis_lipschitz: resolved.analysis_lipschitz(),
            gamma: gamma.map(|g| g.0),
            gamma_requested: gamma.map(|g| g.1),
            seed,
            trial,
            adversary: format!("{:?}", adversary.kind()),
            oracle_queries,
        },
        rounds,
        hindsight_set,
        hindsight_cost,
    })
}

/// Runs `trials` independent replays; trace `k` depends only on `(seed, k)`.
pub fn run_experiment(
    adversary: &Adversary,
    algorithm: Algorithm,
    params: &ExperimentParams,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<RegretTrace>> {
    if params.n != adversary.n() {
        return Err(Error::DimensionMismatch {
            expected: adversary.n(),
            actual: params.n,
        });
    }
    if params.bound < adversary.bound() {
        return Err(invalid(
            "M",
            "learner bound is below the adversary's range bound",
        ));
    }
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let resolved = resolve(algorithm, params)?;
    map_indexed(trials, exec, |k| {
        run_trial(adversary, &resolved, seed, k as u64)
    })
    .into_iter()
    .collect()
}

/// Mean of final regrets, reduced in trial order.
pub fn mean_final_regret(traces: &[RegretTrace]) -> f64 {
    traces.iter().map(RegretTrace::final_regret).sum::<f64>() / traces.len().max(1) as f64
}
