//! Checks of the one-point estimator's properties.
//!
//! Unbiasedness, the second-moment bound, and the rounding gap are exact
//! arithmetic: the estimator has at most `2n` outcomes given the iterate,
//! so expectations are finite sums. Orthogonality of the estimation errors
//! across rounds is a Monte Carlo check over two-round runs.

use std::fmt;

use rand::Rng;

use super::fixtures::{random_point, random_submodular};
use crate::aggregation::Epsilon;
use crate::error::Result;
use crate::learners::{
    bandit_gradient_estimate, bandit_probabilities, BanditConfig, BanditLearner, Direction,
};
use crate::lovasz::{chain_decompose, extension_subgradient, value_on_chain, HypercubePoint};
use crate::par::{map_indexed, Execution};
use crate::rng::{stream, StreamPurpose};
use crate::submodular::SetFunction;

/// Signature of a one-point subgradient estimator.
pub type Estimator = dyn Fn(&crate::lovasz::ChainDecomposition, &[f64], usize, f64, Direction) -> Result<Vec<f64>>
    + Sync;

/// Exact moments of an estimator at a fixed iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorMoments {
    /// `E[ĝ]`.
    pub mean: Vec<f64>,
    /// `E‖ĝ‖²`.
    pub second_moment: f64,
    /// `E[f(S)] = Σ ρ_i f(B_i)` under the exploration distribution.
    pub expected_cost: f64,
    /// `f̂(x)`.
    pub extension_value: f64,
}

/// Sums over every `(index, direction)` outcome with its probability.
pub fn exact_estimator_moments(
    f: &SetFunction,
    x: &HypercubePoint,
    gamma: f64,
    estimator: &Estimator,
) -> Result<EstimatorMoments> {
    let n = x.dim();
    let chain = chain_decompose(x);
    let values = chain.chain_values(f);
    let rho = bandit_probabilities(&chain, gamma)?;
    let mut mean = vec![0.0; n];
    let mut second_moment = 0.0;
    for (i, (&p, &value)) in rho.iter().zip(&values).enumerate() {
        let outcomes: &[(Direction, f64)] = if i == 0 || i == n {
            &[(Direction::Up, 1.0)]
        } else {
            &[(Direction::Up, 0.5), (Direction::Down, 0.5)]
        };
        for &(dir, q) in outcomes {
            let g = estimator(&chain, &rho, i, value, dir)?;
            let w = p * q;
            for (m, gi) in mean.iter_mut().zip(&g) {
                *m += w * gi;
            }
            second_moment += w * g.iter().map(|v| v * v).sum::<f64>();
        }
    }
    let expected_cost = rho.iter().zip(&values).map(|(p, v)| p * v).sum();
    Ok(EstimatorMoments {
        mean,
        second_moment,
        expected_cost,
        extension_value: value_on_chain(&chain, &values),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaSuiteConfig {
    pub instances: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub orthogonality_runs: usize,
    pub unbiased_tolerance: f64,
    pub execution: Execution,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        Self {
            instances: 1000,
            n_min: 2,
            n_max: 8,
            orthogonality_runs: 100_000,
            unbiased_tolerance: 1e-12,
            execution: Execution::Parallel,
        }
    }
}

/// Outcome of one check. `margin` is threshold minus observed, so a
/// negative margin is a failure.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub seed: u64,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lemma suite (seed {})", self.seed)?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<16} margin={:+.6e} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.margin,
                c.detail
            )?;
        }
        Ok(())
    }
}

struct Instance {
    f: SetFunction,
    x: HypercubePoint,
    gamma: f64,
}

fn instance(seed: u64, k: usize, cfg: &LemmaSuiteConfig) -> Instance {
    let mut rng = stream(seed, k as u64, StreamPurpose::Auxiliary);
    let n = rng.random_range(cfg.n_min..=cfg.n_max);
    let f = random_submodular(n, &mut rng);
    let x = HypercubePoint::new(random_point(n, &mut rng)).expect("coordinates in [0, 1]");
    // (0, 1]
    let gamma = 1.0 - rng.random::<f64>();
    Instance { f, x, gamma }
}

/// Runs the suite with the library's estimator.
pub fn verify_lemma_suite(seed: u64) -> Result<LemmaReport> {
    verify_lemma_suite_with(
        seed,
        &LemmaSuiteConfig::default(),
        &bandit_gradient_estimate,
    )
}

/// Runs the suite with a caller-supplied estimator for the exact checks.
pub fn verify_lemma_suite_with(
    seed: u64,
    cfg: &LemmaSuiteConfig,
    estimator: &Estimator,
) -> Result<LemmaReport> {
    let per_instance = map_indexed(
        cfg.instances,
        cfg.execution,
        |k| -> Result<(f64, f64, f64)> {
            let inst = instance(seed, k, cfg);
            let m = exact_estimator_moments(&inst.f, &inst.x, inst.gamma, estimator)?;
            let g = extension_subgradient(&inst.f, &inst.x)?;
            let bias = m
                .mean
                .iter()
                .zip(&g)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let n = inst.x.dim() as f64;
            let big_m = inst.f.bound();
            let moment_bound = 16.0 * big_m * big_m * n * n / inst.gamma;
            let moment_margin = (moment_bound - m.second_moment) / moment_bound;
            let rounding_margin = m.extension_value + 2.0 * inst.gamma * big_m - m.expected_cost;
            Ok((bias, moment_margin, rounding_margin / big_m))
        },
    );
    let mut worst_bias: f64 = 0.0;
    let mut worst_moment = f64::INFINITY;
    let mut worst_rounding = f64::INFINITY;
    for r in per_instance {
        let (b, m, g) = r?;
        worst_bias = worst_bias.max(b);
        worst_moment = worst_moment.min(m);
        worst_rounding = worst_rounding.min(g);
    }

    let mut checks = vec![
        LemmaCheck {
            name: "unbiasedness",
            passed: worst_bias <= cfg.unbiased_tolerance,
            margin: cfg.unbiased_tolerance - worst_bias,
            detail: format!(
                "max |E[g_hat] - grad| = {worst_bias:.3e} over {} instances (tol {:.0e})",
                cfg.instances, cfg.unbiased_tolerance
            ),
        },
        LemmaCheck {
            name: "second-moment",
            passed: worst_moment >= 0.0,
            margin: worst_moment,
            detail: "min relative slack of E|g_hat|^2 <= 16 M^2 n^2 / gamma".to_string(),
        },
        LemmaCheck {
            name: "rounding-gap",
            passed: worst_rounding >= -1e-12,
            margin: worst_rounding,
            detail: "min slack of E f(S) <= f_hat(x) + 2 gamma M, in units of M".to_string(),
        },
    ];
    if cfg.orthogonality_runs > 0 {
        checks.push(orthogonality(seed, cfg)?);
    }
    Ok(LemmaReport { seed, checks })
}

/// Mean and standard error of `α₁·α₂` over independent two-round bandit
/// runs, where `α_t = ∇f̂_t(x_t) - ĝ_t`.
pub fn orthogonality_statistic(seed: u64, runs: usize, exec: Execution) -> Result<(f64, f64)> {
    let mut setup = stream(seed, u64::MAX >> 3, StreamPurpose::Auxiliary);
    let n = 3;
    let fs = [
        random_submodular(n, &mut setup),
        random_submodular(n, &mut setup),
    ];
    let bound = fs.iter().map(SetFunction::bound).fold(0.0, f64::max);
    let x1 = HypercubePoint::new(random_point(n, &mut setup)).expect("coordinates in [0, 1]");
    let mut cfg =
        BanditConfig::with_defaults(n, bound, 2, Epsilon::Finite(1.0), 1.0, 1.0)?.with_gamma(0.5);
    cfg.h = 0.5 * bound;
    cfg.initial_point = x1;

    const CHUNK: usize = 1000;
    let chunks = runs.div_ceil(CHUNK);
    let partials = map_indexed(chunks, exec, |c| -> Result<(f64, f64)> {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for r in c * CHUNK..((c + 1) * CHUNK).min(runs) {
            let mut learner = BanditLearner::new(
                cfg.clone(),
                stream(seed, r as u64, StreamPurpose::Sampling),
                stream(seed, r as u64, StreamPurpose::Noise),
            )?;
            let mut alphas = Vec::with_capacity(2);
            for f in &fs {
                let out = learner.round(f)?;
                let exact = extension_subgradient(f, &out.iterate)?;
                alphas.push(
                    exact
                        .iter()
                        .zip(&out.gradient)
                        .map(|(a, b)| a - b)
                        .collect::<Vec<f64>>(),
                );
            }
            let dot: f64 = alphas[0].iter().zip(&alphas[1]).map(|(a, b)| a * b).sum();
            sum += dot;
            sum_sq += dot * dot;
        }
        Ok((sum, sum_sq))
    });
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for p in partials {
        let (s, q) = p?;
        sum += s;
        sum_sq += q;
    }
    let k = runs as f64;
    let mean = sum / k;
    let var = (sum_sq / k - mean * mean).max(0.0) * k / (k - 1.0).max(1.0);
    Ok((mean, (var / k).sqrt()))
}

fn orthogonality(seed: u64, cfg: &LemmaSuiteConfig) -> Result<LemmaCheck> {
    let (mean, se) = orthogonality_statistic(seed, cfg.orthogonality_runs, cfg.execution)?;
    let margin = 4.0 * se - mean.abs();
    Ok(LemmaCheck {
        name: "orthogonality",
        passed: margin >= 0.0,
        margin,
        detail: format!(
            "mean alpha1.alpha2 = {mean:.4e}, SE = {se:.4e} over {} runs",
            cfg.orthogonality_runs
        ),
    })
}
