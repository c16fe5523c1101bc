use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::submodular::{
    make_cut_function, make_modular_function, FunctionSpec, SetFunction, MAX_EXHAUSTIVE,
};
use crate::subset::Subset;

/// Families of oblivious cost sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdversaryKind {
    /// Each round is a modular term pointing at a planted set `S*` plus a
    /// random cut. Modular weights are `±1` (negative inside `S*`) perturbed
    /// by `Uniform(-noise, noise)`; every pair carries an edge with weight
    /// `Uniform(0, cut_weight)`. With `cut_weight·(n-1)/2 < 1` the expected
    /// cost is uniquely minimized at `S*`.
    StochasticFixedOptimum {
        /// Mask of `S*`; drawn uniformly from the adversary stream when absent.
        #[serde(default)]
        planted: Option<u64>,
        #[serde(default = "default_noise")]
        noise: f64,
        /// Per-edge weight ceiling; `1/(n-1)` when absent.
        #[serde(default)]
        cut_weight: Option<f64>,
    },
    /// A fresh cut every round: each pair is an edge with probability
    /// `density` and weight `Uniform(0, 1)`.
    RandomCutStream {
        #[serde(default = "default_density")]
        density: f64,
    },
    /// Two planted-optimum functions drawn once, alternating every `period` rounds.
    Switching { period: usize },
    /// Plays the listed functions in order, repeating from the start.
    ExplicitSequence { functions: Vec<FunctionSpec> },
}

fn default_noise() -> f64 {
    0.5
}

fn default_density() -> f64 {
    0.5
}

impl Default for AdversaryKind {
    fn default() -> Self {
        AdversaryKind::StochasticFixedOptimum {
            planted: None,
            noise: default_noise(),
            cut_weight: None,
        }
    }
}

/// An oblivious adversary over a fixed ground set and range bound. The
/// whole sequence is a function of the random stream handed to
/// [`Adversary::stream`]; it never sees the learner.
#[derive(Clone, Debug, PartialEq)]
pub struct Adversary {
    kind: AdversaryKind,
    n: usize,
    bound: f64,
    explicit: Vec<SetFunction>,
}

impl Adversary {
    pub fn new(kind: AdversaryKind, n: usize, bound: f64) -> Result<Self> {
        if n == 0 || n > MAX_EXHAUSTIVE {
            return Err(Error::GroundSetSize {
                n,
                max: MAX_EXHAUSTIVE,
            });
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(invalid("M", format!("must be positive, got {bound}")));
        }
        let mut explicit = Vec::new();
        match &kind {
            AdversaryKind::StochasticFixedOptimum {
                planted,
                noise,
                cut_weight,
            } => {
                if let Some(mask) = planted {
                    Subset::from_mask(*mask).check_within(n)?;
                }
                if !(*noise >= 0.0 && noise.is_finite()) {
                    return Err(invalid(
                        "noise",
                        format!("must be nonnegative, got {noise}"),
                    ));
                }
                if let Some(c) = cut_weight {
                    if !(*c >= 0.0 && c.is_finite()) {
                        return Err(invalid(
                            "cut_weight",
                            format!("must be nonnegative, got {c}"),
                        ));
                    }
                }
            }
            AdversaryKind::RandomCutStream { density } => {
                if !(0.0..=1.0).contains(density) {
                    return Err(invalid(
                        "density",
                        format!("must lie in [0, 1], got {density}"),
                    ));
                }
                if n < 2 {
                    return Err(invalid("n", "cut streams need at least two elements"));
                }
            }
            AdversaryKind::Switching { period } => {
                if *period == 0 {
                    return Err(invalid("period", "must be positive"));
                }
            }
            AdversaryKind::ExplicitSequence { functions } => {
                if functions.is_empty() {
                    return Err(invalid("functions", "explicit sequence is empty"));
                }
                for spec in functions {
                    let f = spec.build()?;
                    if f.n() != n {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            actual: f.n(),
                        });
                    }
                    if f.bound() > bound {
                        return Err(Error::FunctionMismatch(format!(
                            "explicit function bound {} exceeds M = {bound}",
                            f.bound()
                        )));
                    }
                    explicit.push(f);
                }
            }
        }
        Ok(Self {
            kind,
            n,
            bound,
            explicit,
        })
    }

    pub fn kind(&self) -> &AdversaryKind {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// The infinite cost sequence determined by `rng`.
    pub fn stream(&self, mut rng: ChaCha8Rng) -> AdversaryStream<'_> {
        let banks = match &self.kind {
            AdversaryKind::StochasticFixedOptimum { planted, .. } => {
                let s = planted.map_or_else(|| random_subset(self.n, &mut rng), Subset::from_mask);
                vec![s]
            }
            AdversaryKind::Switching { .. } => {
                let a = random_subset(self.n, &mut rng);
                let b = random_subset(self.n, &mut rng);
                vec![a, b]
            }
            _ => Vec::new(),
        };
        let fixed = match &self.kind {
            AdversaryKind::Switching { .. } => banks
                .iter()
                .map(|&s| planted_function(self.n, self.bound, s, 0.0, None, &mut rng))
                .collect(),
            _ => Vec::new(),
        };
        AdversaryStream {
            adversary: self,
            rng,
            planted: banks,
            fixed,
            t: 0,
        }
    }

    /// First `horizon` functions of the stream.
    pub fn sequence(&self, rng: ChaCha8Rng, horizon: usize) -> Vec<SetFunction> {
        self.stream(rng).take(horizon).collect()
    }
}

fn random_subset(n: usize, rng: &mut ChaCha8Rng) -> Subset {
    Subset::from_mask(rng.random::<u64>() & Subset::full(n).mask())
}

/// Planted modular-plus-cut function scaled so that its declared bound is at most `bound`.
fn planted_function(
    n: usize,
    bound: f64,
    planted: Subset,
    noise: f64,
    cut_weight: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> SetFunction {
    let cut_ceiling = cut_weight.unwrap_or(if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 });
    let pairs = n * (n - 1) / 2;
    let worst = n as f64 * (1.0 + noise) + cut_ceiling * pairs as f64;
    let scale = bound / worst;
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let sign = if planted.contains(i) { -1.0 } else { 1.0 };
            let jitter = if noise > 0.0 {
                rng.random_range(-noise..noise)
            } else {
                0.0
            };
            scale * (sign + jitter)
        })
        .collect();
    let mut edges = Vec::with_capacity(pairs);
    for a in 0..n {
        for b in a + 1..n {
            let w = if cut_ceiling > 0.0 {
                rng.random_range(0.0..cut_ceiling)
            } else {
                0.0
            };
            edges.push((a, b, scale * w));
        }
    }
    let modular = make_modular_function(&weights).expect("finite weights");
    if n == 1 {
        return modular;
    }
    let cut = make_cut_function(n, &edges).expect("valid edges");
    SetFunction::sum(vec![modular, cut]).expect("same ground set")
}

/// Iterator over an adversary's cost functions.
pub struct AdversaryStream<'a> {
    adversary: &'a Adversary,
    rng: ChaCha8Rng,
    planted: Vec<Subset>,
    fixed: Vec<SetFunction>,
    t: usize,
}

impl AdversaryStream<'_> {
    /// Planted optimum for [`AdversaryKind::StochasticFixedOptimum`], the
    /// two bank optima for [`AdversaryKind::Switching`], empty otherwise.
    pub fn planted(&self) -> &[Subset] {
        &self.planted
    }
}

impl Iterator for AdversaryStream<'_> {
    type Item = SetFunction;

    fn next(&mut self) -> Option<SetFunction> {
        let adv = self.adversary;
        let t = self.t;
        self.t += 1;
        let f = match &adv.kind {
            AdversaryKind::StochasticFixedOptimum {
                noise, cut_weight, ..
            } => planted_function(
                adv.n,
                adv.bound,
                self.planted[0],
                *noise,
                *cut_weight,
                &mut self.rng,
            ),
            AdversaryKind::RandomCutStream { density } => {
                let pairs = adv.n * (adv.n - 1) / 2;
                let scale = adv.bound / pairs as f64;
                let mut edges = Vec::new();
                for a in 0..adv.n {
                    for b in a + 1..adv.n {
                        let present = self.rng.random_bool(*density);
                        let w: f64 = self.rng.random();
                        if present {
                            edges.push((a, b, scale * w));
                        }
                    }
                }
                make_cut_function(adv.n, &edges).expect("valid edges")
            }
            AdversaryKind::Switching { period } => self.fixed[(t / period) % 2].clone(),
            AdversaryKind::ExplicitSequence { .. } => adv.explicit[t % adv.explicit.len()].clone(),
        };
        Some(f)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::harness::best_fixed_set;
    use crate::submodular::{check_submodular, max_abs_value};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn generated_functions_are_bounded_and_submodular() {
        let kinds = [
            AdversaryKind::default(),
            AdversaryKind::RandomCutStream { density: 0.5 },
            AdversaryKind::Switching { period: 3 },
        ];
        for kind in kinds {
            let adv = Adversary::new(kind, 5, 1.0).unwrap();
            for f in adv.sequence(rng(4), 20) {
                assert!(f.bound() <= 1.0 + 1e-12);
                assert!(max_abs_value(&f).unwrap() <= 1.0 + 1e-12);
                assert_eq!(check_submodular(&f).unwrap(), None);
            }
        }
    }

    #[test]
    fn regenerating_gives_identical_sequences() {
        let adv = Adversary::new(AdversaryKind::default(), 4, 1.0).unwrap();
        assert_eq!(adv.sequence(rng(8), 50), adv.sequence(rng(8), 50));
        assert_ne!(adv.sequence(rng(8), 50), adv.sequence(rng(9), 50));
    }

    #[test]
    fn planted_set_wins_in_hindsight() {
        let kind = AdversaryKind::StochasticFixedOptimum {
            planted: Some(0b0110),
            noise: 0.5,
            cut_weight: None,
        };
        let adv = Adversary::new(kind, 4, 1.0).unwrap();
        let stream = adv.stream(rng(1));
        assert_eq!(stream.planted(), &[Subset::from_mask(0b0110)]);
        let seq: Vec<_> = stream.take(2000).collect();
        assert_eq!(best_fixed_set(&seq).unwrap().0, Subset::from_mask(0b0110));
    }

    #[test]
    fn switching_alternates() {
        let adv = Adversary::new(AdversaryKind::Switching { period: 2 }, 3, 1.0).unwrap();
        let seq = adv.sequence(rng(2), 6);
        assert_eq!(seq[0], seq[1]);
        assert_eq!(seq[2], seq[3]);
        assert_eq!(seq[0], seq[4]);
    }

    #[test]
    fn explicit_sequence_cycles() {
        let specs = vec![
            FunctionSpec::Modular {
                weights: vec![1.0, 0.0],
            },
            FunctionSpec::Modular {
                weights: vec![0.0, -1.0],
            },
        ];
        let adv =
            Adversary::new(AdversaryKind::ExplicitSequence { functions: specs }, 2, 1.0).unwrap();
        let seq = adv.sequence(rng(0), 3);
        assert_eq!(seq[0], seq[2]);
        assert_ne!(seq[0], seq[1]);
    }

    #[test]
    fn validation() {
        assert!(Adversary::new(AdversaryKind::default(), 0, 1.0).is_err());
        assert!(Adversary::new(AdversaryKind::default(), 17, 1.0).is_err());
        assert!(Adversary::new(AdversaryKind::default(), 3, 0.0).is_err());
        assert!(Adversary::new(AdversaryKind::Switching { period: 0 }, 3, 1.0).is_err());
        assert!(Adversary::new(AdversaryKind::RandomCutStream { density: 2.0 }, 3, 1.0).is_err());
        let planted = AdversaryKind::StochasticFixedOptimum {
            planted: Some(0b1000),
            noise: 0.5,
            cut_weight: None,
        };
        assert!(Adversary::new(planted, 3, 1.0).is_err());
        let too_big = AdversaryKind::ExplicitSequence {
            functions: vec![FunctionSpec::Modular {
                weights: vec![2.0, 0.0],
            }],
        };
        assert!(Adversary::new(too_big, 2, 1.0).is_err());
    }
}
