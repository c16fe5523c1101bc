//! Chain decomposition of points in the hypercube `[0,1]^n` and the Lovasz
//! extension built on it.
//!
//! A point `x` is written as a convex combination of the characteristic
//! vectors of a maximal chain `∅ = B_0 ⊂ B_1 ⊂ .. ⊂ B_n = [n]`. Coordinates
//! are sorted in nonincreasing order with ties broken by ascending element
//! index, so every point has one canonical chain. Chains that would be
//! non-maximal are padded with zero-weight sets.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::submodular::SetOracle;
use crate::subset::{Subset, MAX_GROUND_SET};

/// A point of the hypercube `K = [0,1]^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HypercubePoint(Vec<f64>);

impl HypercubePoint {
    pub fn new(mut coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_GROUND_SET {
            return Err(Error::GroundSetSize {
                n: coords.len(),
                max: MAX_GROUND_SET,
            });
        }
        for (index, &value) in coords.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfHypercube { index, value });
            }
        }
        // -0.0 would order below 0.0 under total_cmp
        for v in &mut coords {
            *v += 0.0;
        }
        Ok(Self(coords))
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// Characteristic vector of `s`.
    pub fn vertex(n: usize, s: Subset) -> Result<Self> {
        s.check_within(n)?;
        Self::new(
            (0..n)
                .map(|i| if s.contains(i) { 1.0 } else { 0.0 })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}

/// Euclidean diameter of `[0,1]^n`.
pub fn hypercube_diameter(n: usize) -> f64 {
    (n as f64).sqrt()
}

/// Canonical maximal chain and convex weights of a hypercube point.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainDecomposition {
    /// `order[k]` is the element added at step `k + 1` of the chain.
    order: Vec<usize>,
    /// `position[i]` is the 1-based step at which element `i` enters.
    position: Vec<usize>,
    /// `B_0 .. B_n`.
    chain: Vec<Subset>,
    /// `μ_0 .. μ_n`.
    weights: Vec<f64>,
}

impl ChainDecomposition {
    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn position(&self) -> &[usize] {
        &self.position
    }

    pub fn chain(&self) -> &[Subset] {
        &self.chain
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Element entering the chain at 1-based step `k`.
    pub fn element_at_step(&self, k: usize) -> usize {
        self.order[k - 1]
    }

    /// `Σ μ_k χ_{B_k}`, which reproduces the decomposed point.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n()];
        for (b, &mu) in self.chain.iter().zip(&self.weights) {
            for i in b.elements() {
                x[i] += mu;
            }
        }
        x
    }

    /// `f(B_0) .. f(B_n)`.
    pub fn chain_values<F: SetOracle + ?Sized>(&self, f: &F) -> Vec<f64> {
        self.chain.iter().map(|&b| f.query(b)).collect()
    }
}

/// Decomposes `x` along its canonical maximal chain in `O(n log n)`.
pub fn chain_decompose(x: &HypercubePoint) -> ChainDecomposition {
    let c = x.coords();
    let n = c.len();
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps ascending index order among equal coordinates
    order.sort_by(|&a, &b| c[b].total_cmp(&c[a]));

    let mut position = vec![0; n];
    let mut chain = Vec::with_capacity(n + 1);
    let mut current = Subset::EMPTY;
    chain.push(current);
    for (k, &i) in order.iter().enumerate() {
        position[i] = k + 1;
        current = current.with(i);
        chain.push(current);
    }

    let mut weights = Vec::with_capacity(n + 1);
    weights.push(1.0 - c[order[0]]);
    for k in 1..n {
        weights.push(c[order[k - 1]] - c[order[k]]);
    }
    weights.push(c[order[n - 1]]);

    ChainDecomposition {
        order,
        position,
        chain,
        weights,
    }
}

fn check_dims<F: SetOracle + ?Sized>(f: &F, x: &HypercubePoint) -> Result<()> {
    if f.ground_set_size() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.ground_set_size(),
            actual: x.dim(),
        });
    }
    Ok(())
}

/// `Σ μ_k f(B_k)` given precomputed chain values.
pub fn value_on_chain(chain: &ChainDecomposition, values: &[f64]) -> f64 {
    chain.weights.iter().zip(values).map(|(mu, v)| mu * v).sum()
}

/// `g(i) = f(B_π(i)) - f(B_π(i)-1)` given precomputed chain values.
pub fn subgradient_on_chain(chain: &ChainDecomposition, values: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; chain.n()];
    for (k, &i) in chain.order.iter().enumerate() {
        g[i] = values[k + 1] - values[k];
    }
    g
}

/// Value and subgradient of the Lovasz extension, sharing one pass of `n + 1` queries.
pub fn extension_value_and_subgradient<F: SetOracle + ?Sized>(
    f: &F,
    x: &HypercubePoint,
) -> Result<(f64, Vec<f64>)> {
    check_dims(f, x)?;
    let chain = chain_decompose(x);
    let values = chain.chain_values(f);
    Ok((
        value_on_chain(&chain, &values),
        subgradient_on_chain(&chain, &values),
    ))
}

pub fn extension_value<F: SetOracle + ?Sized>(f: &F, x: &HypercubePoint) -> Result<f64> {
    extension_value_and_subgradient(f, x).map(|(v, _)| v)
}

pub fn extension_subgradient<F: SetOracle + ?Sized>(f: &F, x: &HypercubePoint) -> Result<Vec<f64>> {
    extension_value_and_subgradient(f, x).map(|(_, g)| g)
}

/// Level set `{i : x(i) > τ}` for a threshold drawn uniformly from `[0, 1)`.
pub fn sample_level_set<R: Rng + ?Sized>(x: &HypercubePoint, rng: &mut R) -> Subset {
    let tau: f64 = rng.random();
    level_set(x, tau)
}

/// Level set `{i : x(i) > τ}` for a given threshold.
pub fn level_set(x: &HypercubePoint, tau: f64) -> Subset {
    Subset::from_elements(
        x.coords()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > tau)
            .map(|(i, _)| i),
    )
}

fn check_h(h: f64) -> Result<()> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(invalid(
            "H",
            format!("regularization must be finite and nonnegative, got {h}"),
        ));
    }
    Ok(())
}

/// `f̂(x) + (H/2)‖x‖²`.
pub fn regularized_value<F: SetOracle + ?Sized>(f: &F, x: &HypercubePoint, h: f64) -> Result<f64> {
    check_h(h)?;
    Ok(extension_value(f, x)? + 0.5 * h * x.norm_squared())
}

/// `∇f̂(x) + H x`.
pub fn regularized_subgradient<F: SetOracle + ?Sized>(
    f: &F,
    x: &HypercubePoint,
    h: f64,
) -> Result<Vec<f64>> {
    check_h(h)?;
    let mut g = extension_subgradient(f, x)?;
    for (gi, xi) in g.iter_mut().zip(x.coords()) {
        *gi += h * xi;
    }
    Ok(g)
}
