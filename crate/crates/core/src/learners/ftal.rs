use rand::Rng;

use crate::aggregation::NoisyPrefixSumTree;
use crate::error::{invalid, Error, Result};
use crate::lovasz::HypercubePoint;

/// Minimizer over `[0,1]^n` of `v·x + (H/2) Σ_{j≤t} ‖x - x_j‖²`.
///
/// The objective separates per coordinate into a strictly convex parabola
/// with vertex `(sum_x_i - v_i/H) / t`, so clamping the vertex is exact.
pub fn ftal_argmin(v: &[f64], sum_x: &[f64], t: usize, h: f64) -> Result<HypercubePoint> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(
            "H",
            format!("must be positive and finite, got {h}"),
        ));
    }
    if t == 0 {
        return Err(invalid("t", "at least one past iterate is required"));
    }
    if v.len() != sum_x.len() {
        return Err(Error::DimensionMismatch {
            expected: sum_x.len(),
            actual: v.len(),
        });
    }
    let t = t as f64;
    let coords = v
        .iter()
        .zip(sum_x)
        .map(|(vi, si)| ((si - vi / h) / t).clamp(0.0, 1.0))
        .collect();
    HypercubePoint::new(coords)
}

/// Iterate, running sum of past iterates, and the private gradient stream.
#[derive(Clone, Debug)]
pub struct FtalState {
    h: f64,
    x: HypercubePoint,
    sum_x: Vec<f64>,
    tree: NoisyPrefixSumTree,
    t: usize,
}

impl FtalState {
    pub fn new(x1: HypercubePoint, h: f64, tree: NoisyPrefixSumTree) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(
                "H",
                format!("must be positive and finite, got {h}"),
            ));
        }
        if tree.dim() != x1.dim() {
            return Err(Error::DimensionMismatch {
                expected: x1.dim(),
                actual: tree.dim(),
            });
        }
        let n = x1.dim();
        Ok(Self {
            h,
            x: x1,
            sum_x: vec![0.0; n],
            tree,
            t: 0,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Current iterate `x_{t+1}`.
    pub fn iterate(&self) -> &HypercubePoint {
        &self.x
    }

    /// `Σ_{j≤t} x_j` over iterates already played.
    pub fn sum_x(&self) -> &[f64] {
        &self.sum_x
    }

    /// Rounds completed.
    pub fn rounds(&self) -> usize {
        self.t
    }

    pub fn tree(&self) -> &NoisyPrefixSumTree {
        &self.tree
    }

    pub fn is_exhausted(&self) -> bool {
        self.t >= self.tree.horizon()
    }

    /// Streams `gradient + H x_t`, then moves to the next iterate.
    /// Returns the norm of the streamed vector.
    pub fn advance<R: Rng + ?Sized>(&mut self, gradient: &[f64], noise_rng: &mut R) -> Result<f64> {
        let streamed: Vec<f64> = gradient
            .iter()
            .zip(self.x.coords())
            .map(|(g, x)| g + self.h * x)
            .collect();
        let norm = streamed.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = self.tree.append(&streamed, noise_rng)?;
        for (s, x) in self.sum_x.iter_mut().zip(self.x.coords()) {
            *s += x;
        }
        self.t += 1;
        self.x = ftal_argmin(&v, &self.sum_x, self.t, self.h)?;
        Ok(norm)
    }
}
