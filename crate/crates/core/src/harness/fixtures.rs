//! Random submodular fixtures with small integer data, so that values are
//! exactly representable and vertex checks can use exact equality.

use rand::Rng;

use crate::submodular::{
    make_coverage_function, make_cut_function, make_modular_function, make_table_function,
    CoverageSign, SetFunction,
};
use crate::subset::Subset;

fn random_cut<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetFunction {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.6) {
                edges.push((a, b, rng.random_range(1..=3) as f64));
            }
        }
    }
    make_cut_function(n, &edges).expect("valid edges")
}

fn random_modular<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetFunction {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(-3..=3) as f64).collect();
    make_modular_function(&w).expect("finite weights")
}

fn random_coverage<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetFunction {
    let universe = 2 * n;
    let sets: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..universe).filter(|_| rng.random_bool(0.3)).collect())
        .collect();
    let sign = if rng.random_bool(0.5) {
        CoverageSign::Positive
    } else {
        CoverageSign::Negative
    };
    make_coverage_function(&sets, sign).expect("valid sets")
}

/// `g(|S|)` for a concave integer sequence `g`.
fn random_concave_cardinality<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetFunction {
    let mut steps: Vec<i32> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
    steps.sort_unstable_by(|a, b| b.cmp(a));
    let mut g = vec![0.0; n + 1];
    for k in 1..=n {
        g[k] = g[k - 1] + steps[k - 1] as f64;
    }
    let values: Vec<f64> = Subset::all(n).map(|s| g[s.len()]).collect();
    make_table_function(n, &values).expect("table size matches")
}

/// A random submodular function on `n ≤ 12` elements with a positive range bound.
pub fn random_submodular<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetFunction {
    let f = match rng.random_range(0..5) {
        0 => random_cut(n, rng),
        1 => random_coverage(n, rng),
        2 => random_modular(n, rng),
        3 => SetFunction::sum(vec![random_cut(n, rng), random_modular(n, rng)]).expect("same n"),
        _ => random_concave_cardinality(n, rng),
    };
    if f.bound() > 0.0 {
        f
    } else {
        let mut w = vec![0.0; n];
        w[rng.random_range(0..n)] = 1.0;
        make_modular_function(&w).expect("finite weights")
    }
}

/// A random hypercube point; about a quarter of draws land on the grid
/// `{0, ½, 1}ⁿ` to exercise ties and vertices.
pub fn random_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    if rng.random_bool(0.25) {
        let grid = [0.0, 0.5, 1.0];
        (0..n)
            .map(|_| grid[rng.random_range(0..grid.len())])
            .collect()
    } else {
        (0..n).map(|_| rng.random::<f64>()).collect()
    }
}
