//! Tree-based aggregation: differentially private running sums of a stream
//! of bounded-norm vectors.
//!
//! The stream is laid over the leaves of a complete binary tree with
//! `P = 2^⌈log₂T⌉` leaves and `ℓ = ⌈log₂T⌉ + 1` levels. Every arrival is
//! added to each node on its leaf-to-root path. A node receives exactly one
//! noise vector in its lifetime, at the arrival that completes its subtree:
//! those are the nodes from the leaf up to and including the first left
//! child on the path (the root counts when the path has no left child).
//! Prefix `1..t` is answered from the at most `ℓ` complete nodes matching
//! the binary expansion of `t`, so only noised nodes are ever released.
//!
//! Noise has density proportional to `exp(-‖γ‖₂ / b)` with `b = μℓ/ε`. Its
//! norm is `Gamma(shape = d, scale = b)` and its direction is uniform.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative slack when checking input norms against the sensitivity bound.
pub const NORM_SLACK: f64 = 1e-9;

/// Privacy parameter. `Infinite` disables noise and is not private.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EpsilonRepr", into = "String")]
pub enum Epsilon {
    Finite(f64),
    Infinite,
}

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if value == f64::INFINITY {
            return Ok(Epsilon::Infinite);
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(invalid(
                "epsilon",
                format!("must be positive (or inf), got {value}"),
            ));
        }
        Ok(Epsilon::Finite(value))
    }

    pub fn is_private(self) -> bool {
        matches!(self, Epsilon::Finite(_))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Epsilon::Finite(e) => e,
            Epsilon::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Finite(e) => write!(f, "{e}"),
            Epsilon::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" => Ok(Epsilon::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| invalid("epsilon", format!("cannot parse {other:?}")))?;
                Epsilon::new(v)
            }
        }
    }
}

/// Accepts `1.5` as well as `"1.5"` or `"inf"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum EpsilonRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<EpsilonRepr> for Epsilon {
    type Error = Error;

    fn try_from(r: EpsilonRepr) -> Result<Self> {
        match r {
            EpsilonRepr::Number(v) => Epsilon::new(v),
            EpsilonRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Epsilon> for String {
    fn from(e: Epsilon) -> String {
        e.to_string()
    }
}

/// Draws a `d`-vector with density proportional to `exp(-‖v‖₂ / scale)`.
pub fn sample_tree_noise<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(invalid("d", "noise dimension must be positive"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid(
            "scale",
            format!("must be positive and finite, got {scale}"),
        ));
    }
    let radius_dist = Gamma::new(d as f64, scale).map_err(|e| invalid("scale", e.to_string()))?;
    Ok(draw_noise(d, &radius_dist, rng))
}

fn draw_noise<R: Rng + ?Sized>(d: usize, radius_dist: &Gamma<f64>, rng: &mut R) -> Vec<f64> {
    let mut dir: Vec<f64> = Vec::with_capacity(d);
    let norm = loop {
        dir.clear();
        dir.extend((0..d).map(|_| Distribution::<f64>::sample(&StandardNormal, rng)));
        let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            break norm;
        }
    };
    let r = radius_dist.sample(rng);
    dir.iter_mut().for_each(|v| *v *= r / norm);
    dir
}

/// Instrumentation for the most recent arrival.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AppendStats {
    /// Nodes whose value changed by the arriving vector.
    pub touched: usize,
    /// Noise draws made during the arrival.
    pub noised: usize,
    /// Nodes summed to answer the prefix query.
    pub read: usize,
}

/// Streaming private prefix sums over a fixed horizon.
#[derive(Clone, Debug)]
pub struct NoisyPrefixSumTree {
    horizon: usize,
    capacity: usize,
    dim: usize,
    norm_bound: f64,
    epsilon: Epsilon,
    depth: usize,
    radius_dist: Option<Gamma<f64>>,
    /// Heap layout: node `k` at `k*dim..(k+1)*dim`, root at 1, leaves at `capacity..2*capacity`.
    nodes: Vec<f64>,
    noise_draws: Vec<u32>,
    rounds: usize,
    last: AppendStats,
}

impl NoisyPrefixSumTree {
    pub fn new(horizon: usize, dim: usize, norm_bound: f64, epsilon: Epsilon) -> Result<Self> {
        if horizon == 0 {
            return Err(invalid("rounds", "horizon must be at least 1"));
        }
        if dim == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        if !(norm_bound > 0.0 && norm_bound.is_finite()) {
            return Err(invalid(
                "norm_bound",
                format!("must be positive and finite, got {norm_bound}"),
            ));
        }
        let capacity = horizon.next_power_of_two();
        let depth = capacity.trailing_zeros() as usize + 1;
        let radius_dist = match epsilon {
            Epsilon::Finite(eps) => {
                let scale = norm_bound * depth as f64 / eps;
                Some(Gamma::new(dim as f64, scale).map_err(|e| invalid("epsilon", e.to_string()))?)
            }
            Epsilon::Infinite => None,
        };
        Ok(Self {
            horizon,
            capacity,
            dim,
            norm_bound,
            epsilon,
            depth,
            radius_dist,
            nodes: vec![0.0; 2 * capacity * dim],
            noise_draws: vec![0; 2 * capacity],
            rounds: 0,
            last: AppendStats::default(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of leaves, `horizon` rounded up to a power of two.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    /// `ℓ = ⌈log₂T⌉ + 1`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Per-node noise scale `μℓ/ε`, or `None` with noise disabled.
    pub fn noise_scale(&self) -> Option<f64> {
        self.radius_dist
            .map(|_| self.norm_bound * self.depth as f64 / self.epsilon.as_f64())
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn last_stats(&self) -> AppendStats {
        self.last
    }

    /// Noise draws received so far by each heap node (index 0 unused).
    pub fn noise_draws(&self) -> &[u32] {
        &self.noise_draws
    }

    /// Number of tree nodes, `2P - 1`.
    pub fn node_count(&self) -> usize {
        2 * self.capacity - 1
    }

    fn node_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.nodes[k * self.dim..(k + 1) * self.dim]
    }

    /// Adds `z` to the stream and returns the noisy prefix sum through it.
    pub fn append<R: Rng + ?Sized>(&mut self, z: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: z.len(),
            });
        }
        if self.rounds >= self.horizon {
            return Err(Error::StreamExhausted {
                capacity: self.horizon,
            });
        }
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > self.norm_bound * (1.0 + NORM_SLACK) {
            return Err(Error::SensitivityViolation {
                norm,
                bound: self.norm_bound,
            });
        }

        self.rounds += 1;
        let t = self.rounds;
        let mut stats = AppendStats::default();

        // Leaf-to-root walk. `complete` stays true while every node below the
        // current one is a right child, i.e. this arrival fills its subtree.
        let mut k = self.capacity + t - 1;
        let mut complete = true;
        while k >= 1 {
            for (a, b) in self.node_mut(k).iter_mut().zip(z) {
                *a += b;
            }
            stats.touched += 1;
            if complete {
                if let Some(dist) = &self.radius_dist {
                    let noise = draw_noise(self.dim, dist, rng);
                    for (a, b) in self.node_mut(k).iter_mut().zip(&noise) {
                        *a += b;
                    }
                    stats.noised += 1;
                    self.noise_draws[k] += 1;
                }
                complete = k % 2 == 1;
            }
            k /= 2;
        }

        let (sum, read) = self.prefix(t);
        stats.read = read;
        self.last = stats;
        Ok(sum)
    }

    /// Sum of the complete nodes tiling `1..t`, heaviest block first.
    fn prefix(&self, t: usize) -> (Vec<f64>, usize) {
        let mut v = vec![0.0; self.dim];
        let mut start = 0usize;
        let mut read = 0;
        for level in (0..self.depth).rev() {
            let block = 1usize << level;
            if t & block != 0 {
                let k = (self.capacity + start) >> level;
                for (a, b) in v
                    .iter_mut()
                    .zip(&self.nodes[k * self.dim..(k + 1) * self.dim])
                {
                    *a += b;
                }
                start += block;
                read += 1;
            }
        }
        (v, read)
    }
}
