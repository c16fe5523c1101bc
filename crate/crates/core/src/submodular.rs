//! Bounded set functions over a ground set `{0, .., n-1}`: representation,
//! standard submodular families, and exhaustive verifiers.
//!
//! Every function carries its ground-set size `n` and a range bound `M` with
//! `|f(S)| <= M` for all `S`. Functions are immutable once built and can be
//! shared freely across threads.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::subset::{Subset, MAX_GROUND_SET};

/// Largest ground set accepted by the exhaustive verifiers.
pub const MAX_EXHAUSTIVE: usize = 16;

/// Largest ground set for which an explicit value table may be given.
pub const MAX_TABLE: usize = 20;

/// Slack allowed in exhaustive comparisons, relative to the range bound.
const REL_TOL: f64 = 1e-12;

/// Weighted undirected edge between two distinct elements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Sign of a coverage function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverageSign {
    /// `f(S) = |U(S)|`, monotone increasing.
    Positive,
    /// `f(S) = |U(V \ S)| - |U(V)|`, monotone decreasing and nonpositive.
    Negative,
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Cut(Vec<Edge>),
    Coverage {
        /// One bitset over the universe per element.
        sets: Vec<Vec<u64>>,
        universe_covered: usize,
        sign: CoverageSign,
    },
    Modular(Vec<f64>),
    Table(Vec<f64>),
    Sum(Vec<SetFunction>),
}

/// A deterministic set-function oracle with declared `n` and `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetFunction {
    n: usize,
    bound: f64,
    kind: Kind,
}

/// Value access used by the learners. A bandit learner sees only this surface.
pub trait SetOracle {
    fn ground_set_size(&self) -> usize;
    fn range_bound(&self) -> f64;
    /// Value at `s`; `s` must lie in the ground set.
    fn query(&self, s: Subset) -> f64;
}

impl SetOracle for SetFunction {
    fn ground_set_size(&self) -> usize {
        self.n
    }

    fn range_bound(&self) -> f64 {
        self.bound
    }

    fn query(&self, s: Subset) -> f64 {
        self.value(s)
    }
}

/// Wraps an oracle and counts every query made through it.
pub struct CountingOracle<'a, O: SetOracle + ?Sized> {
    inner: &'a O,
    calls: Cell<usize>,
}

impl<'a, O: SetOracle + ?Sized> CountingOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        Self {
            inner,
            calls: Cell::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.get()
    }
}

impl<O: SetOracle + ?Sized> SetOracle for CountingOracle<'_, O> {
    fn ground_set_size(&self) -> usize {
        self.inner.ground_set_size()
    }

    fn range_bound(&self) -> f64 {
        self.inner.range_bound()
    }

    fn query(&self, s: Subset) -> f64 {
        self.calls.set(self.calls.get() + 1);
        self.inner.query(s)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_GROUND_SET {
        return Err(Error::GroundSetSize {
            n,
            max: MAX_GROUND_SET,
        });
    }
    Ok(())
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(invalid(name, format!("{v} is not finite")));
    }
    Ok(())
}

impl SetFunction {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Declared range bound `M`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Checked evaluation: rejects masks with elements outside the ground set.
    pub fn evaluate(&self, s: Subset) -> Result<f64> {
        s.check_within(self.n)?;
        Ok(self.value(s))
    }

    /// Unchecked evaluation for inner loops.
    pub fn value(&self, s: Subset) -> f64 {
        debug_assert!(s.check_within(self.n).is_ok());
        match &self.kind {
            Kind::Cut(edges) => edges
                .iter()
                .filter(|e| s.contains(e.a) != s.contains(e.b))
                .map(|e| e.weight)
                .sum(),
            Kind::Coverage {
                sets,
                universe_covered,
                sign,
            } => match sign {
                CoverageSign::Positive => union_size(sets, s.elements()) as f64,
                CoverageSign::Negative => {
                    let outside = Subset::full(self.n).mask() & !s.mask();
                    let covered = union_size(sets, Subset::from_mask(outside).elements());
                    covered as f64 - *universe_covered as f64
                }
            },
            Kind::Modular(w) => s.elements().map(|i| w[i]).sum(),
            Kind::Table(values) => values[s.mask() as usize],
            Kind::Sum(parts) => parts.iter().map(|p| p.value(s)).sum(),
        }
    }

    /// Sum of functions over the same ground set; the bound is the sum of bounds.
    pub fn sum(parts: Vec<SetFunction>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| invalid("parts", "sum of zero functions"))?;
        let n = first.n;
        if let Some(p) = parts.iter().find(|p| p.n != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: p.n,
            });
        }
        let bound = parts.iter().map(|p| p.bound).sum();
        Ok(Self {
            n,
            bound,
            kind: Kind::Sum(parts),
        })
    }
}

fn union_size(sets: &[Vec<u64>], members: impl Iterator<Item = usize>) -> usize {
    let words = sets.first().map_or(0, Vec::len);
    let mut acc = vec![0u64; words];
    for i in members {
        for (a, w) in acc.iter_mut().zip(&sets[i]) {
            *a |= w;
        }
    }
    acc.iter().map(|w| w.count_ones() as usize).sum()
}

/// Graph cut: `f(S)` is the total weight of edges with exactly one endpoint in `S`.
/// Edges use zero-based endpoints; `M` is the total edge weight.
pub fn make_cut_function(n: usize, edges: &[(usize, usize, f64)]) -> Result<SetFunction> {
    check_n(n)?;
    let mut out = Vec::with_capacity(edges.len());
    for &(a, b, weight) in edges {
        if a >= n || b >= n {
            return Err(invalid(
                "edges",
                format!("endpoint of ({a}, {b}) outside 0..{n}"),
            ));
        }
        if a == b {
            return Err(invalid("edges", format!("self-loop at {a}")));
        }
        check_finite("edges", weight)?;
        if weight < 0.0 {
            return Err(invalid(
                "edges",
                format!("negative weight {weight} on ({a}, {b})"),
            ));
        }
        out.push(Edge {
            a: a.min(b),
            b: a.max(b),
            weight,
        });
    }
    let bound = out.iter().map(|e| e.weight).sum();
    Ok(SetFunction {
        n,
        bound,
        kind: Kind::Cut(out),
    })
}

/// Coverage function. `sets[i]` lists the universe items covered by element `i`.
///
/// With [`CoverageSign::Positive`] the value is the number of items covered
/// by `S`. With [`CoverageSign::Negative`] it is minus the number of items
/// covered by `S` and by no element outside `S`, i.e. `|U(V \ S)| - |U(V)|`;
/// both are submodular.
pub fn make_coverage_function(sets: &[Vec<usize>], sign: CoverageSign) -> Result<SetFunction> {
    let n = sets.len();
    check_n(n)?;
    let universe = sets.iter().flatten().map(|&u| u + 1).max().unwrap_or(0);
    let words = universe.div_ceil(64).max(1);
    let bitsets: Vec<Vec<u64>> = sets
        .iter()
        .map(|items| {
            let mut bits = vec![0u64; words];
            for &u in items {
                bits[u / 64] |= 1 << (u % 64);
            }
            bits
        })
        .collect();
    let universe_covered = union_size(&bitsets, 0..n);
    Ok(SetFunction {
        n,
        bound: universe_covered as f64,
        kind: Kind::Coverage {
            sets: bitsets,
            universe_covered,
            sign,
        },
    })
}

/// Modular function `f(S) = sum of w_i over i in S`.
pub fn make_modular_function(weights: &[f64]) -> Result<SetFunction> {
    check_n(weights.len())?;
    for &w in weights {
        check_finite("weights", w)?;
    }
    let pos: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    let neg: f64 = weights.iter().filter(|w| **w < 0.0).map(|w| -w).sum();
    Ok(SetFunction {
        n: weights.len(),
        bound: pos.max(neg),
        kind: Kind::Modular(weights.to_vec()),
    })
}

/// Function given by its full value table, indexed by subset mask.
pub fn make_table_function(n: usize, values: &[f64]) -> Result<SetFunction> {
    if n == 0 || n > MAX_TABLE {
        return Err(Error::GroundSetSize { n, max: MAX_TABLE });
    }
    if values.len() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            actual: values.len(),
        });
    }
    for &v in values {
        check_finite("values", v)?;
    }
    let bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(SetFunction {
        n,
        bound,
        kind: Kind::Table(values.to_vec()),
    })
}

/// A pairwise violation `f(S+i) + f(S+j) < f(S+i+j) + f(S)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub set: Subset,
    pub i: usize,
    pub j: usize,
    /// `f(S+i) + f(S+j) - f(S+i+j) - f(S)`, negative.
    pub gap: f64,
}

/// Exhaustive submodularity test through the second-difference condition.
///
/// Returns `Ok(None)` when the function is submodular and the first
/// violating triple (in mask order) otherwise.
pub fn check_submodular(f: &SetFunction) -> Result<Option<Violation>> {
    let n = f.n();
    if n > MAX_EXHAUSTIVE {
        return Err(Error::TooLargeForExhaustive {
            n,
            max: MAX_EXHAUSTIVE,
        });
    }
    let values: Vec<f64> = Subset::all(n).map(|s| f.value(s)).collect();
    let tol = REL_TOL * f.bound().max(1.0) * 4.0;
    for mask in 0..values.len() {
        let s = Subset::from_mask(mask as u64);
        for i in (0..n).filter(|&i| !s.contains(i)) {
            for j in (i + 1..n).filter(|&j| !s.contains(j)) {
                let si = s.with(i).mask() as usize;
                let sj = s.with(j).mask() as usize;
                let sij = s.with(i).with(j).mask() as usize;
                let gap = values[si] + values[sj] - values[sij] - values[mask];
                if gap < -tol {
                    return Ok(Some(Violation { set: s, i, j, gap }));
                }
            }
        }
    }
    Ok(None)
}

/// Largest `|f(S)|` over all subsets.
pub fn max_abs_value(f: &SetFunction) -> Result<f64> {
    if f.n() > MAX_EXHAUSTIVE {
        return Err(Error::TooLargeForExhaustive {
            n: f.n(),
            max: MAX_EXHAUSTIVE,
        });
    }
    Ok(Subset::all(f.n()).fold(0.0f64, |m, s| m.max(f.value(s).abs())))
}

/// Text fixture describing a set function (TOML, keyed by `kind`).
///
/// ```toml
/// kind = "cut"
/// n = 3
/// edges = [[0, 1, 1.0], [1, 2, 1.0]]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Cut {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
    Coverage {
        sets: Vec<Vec<usize>>,
        #[serde(default = "positive_sign")]
        sign: i8,
    },
    Modular {
        weights: Vec<f64>,
    },
    ExplicitTable {
        n: usize,
        values: Vec<f64>,
    },
}

fn positive_sign() -> i8 {
    1
}

impl FunctionSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Fixture(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("fixture specs always serialize")
    }

    pub fn build(&self) -> Result<SetFunction> {
        match self {
            FunctionSpec::Cut { n, edges } => make_cut_function(*n, edges),
            FunctionSpec::Coverage { sets, sign } => {
                let sign = match sign {
                    1 => CoverageSign::Positive,
                    -1 => CoverageSign::Negative,
                    other => {
                        return Err(Error::Fixture(format!(
                            "coverage sign {other} is not +1 or -1"
                        )))
                    }
                };
                make_coverage_function(sets, sign)
            }
            FunctionSpec::Modular { weights } => make_modular_function(weights),
            FunctionSpec::ExplicitTable { n, values } => {
                if *n > 12 {
                    return Err(Error::Fixture(format!(
                        "explicit tables are limited to n <= 12, got {n}"
                    )));
                }
                make_table_function(*n, values)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(elems: &[usize]) -> Subset {
        Subset::from_elements(elems.iter().copied())
    }

    fn cut2() -> SetFunction {
        make_cut_function(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn cut2_values() {
        let f = cut2();
        assert_eq!(f.evaluate(Subset::EMPTY).unwrap(), 0.0);
        assert_eq!(f.evaluate(set(&[0])).unwrap(), 1.0);
        assert_eq!(f.evaluate(set(&[1])).unwrap(), 1.0);
        assert_eq!(f.evaluate(set(&[0, 1])).unwrap(), 0.0);
        assert_eq!(f.bound(), 1.0);
    }

    #[test]
    fn evaluate_rejects_foreign_elements() {
        assert!(matches!(
            cut2().evaluate(set(&[2])),
            Err(Error::SubsetOutOfRange { .. })
        ));
    }

    #[test]
    fn path_cut() {
        let f = make_cut_function(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(f.value(set(&[1])), 2.0);
        assert_eq!(f.value(Subset::EMPTY), 0.0);
    }

    #[test]
    fn cut_rejects_bad_edges() {
        assert!(make_cut_function(2, &[(0, 1, -1.0)]).is_err());
        assert!(make_cut_function(2, &[(0, 2, 1.0)]).is_err());
        assert!(make_cut_function(2, &[(1, 1, 1.0)]).is_err());
        assert!(make_cut_function(0, &[]).is_err());
    }

    #[test]
    fn coverage_values() {
        let same = make_coverage_function(&[vec![0], vec![0]], CoverageSign::Positive).unwrap();
        assert_eq!(same.value(set(&[0, 1])), 1.0);
        let disjoint = make_coverage_function(&[vec![0], vec![1]], CoverageSign::Positive).unwrap();
        assert_eq!(disjoint.value(set(&[0, 1])), 2.0);
        assert_eq!(disjoint.value(Subset::EMPTY), 0.0);

        let neg =
            make_coverage_function(&[vec![0, 1], vec![1, 2], vec![70]], CoverageSign::Negative)
                .unwrap();
        assert_eq!(neg.value(Subset::EMPTY), 0.0);
        assert_eq!(neg.value(Subset::full(3)), -4.0);
        // item 0 is covered only by element 0
        assert_eq!(neg.value(set(&[0])), -1.0);
        assert_eq!(neg.bound(), 4.0);
        assert_eq!(check_submodular(&neg).unwrap(), None);
    }

    #[test]
    fn squared_cardinality_is_not_submodular() {
        let values: Vec<f64> = Subset::all(3).map(|s| (s.len() * s.len()) as f64).collect();
        let f = make_table_function(3, &values).unwrap();
        let v = check_submodular(&f).unwrap().expect("violation");
        assert_eq!(v.set, Subset::EMPTY);
        assert_eq!((v.i, v.j), (0, 1));
        assert_eq!(v.gap, -2.0);
    }

    #[test]
    fn modular_is_submodular() {
        let f = make_modular_function(&[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(check_submodular(&f).unwrap(), None);
        assert_eq!(f.bound(), 2.0);
        assert_eq!(f.value(set(&[0, 2])), 1.5);
        assert_eq!(check_submodular(&cut2()).unwrap(), None);
    }

    #[test]
    fn exhaustive_limit() {
        let f = make_modular_function(&[1.0; 17]).unwrap();
        assert!(matches!(
            check_submodular(&f),
            Err(Error::TooLargeForExhaustive { n: 17, .. })
        ));
    }

    #[test]
    fn fixture_parse() {
        let spec =
            FunctionSpec::from_toml("kind = \"cut\"\nn = 3\nedges = [[0, 1, 1.0], [1, 2, 2.5]]\n")
                .unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.value(set(&[1])), 3.5);

        let table =
            FunctionSpec::from_toml("kind = \"explicit-table\"\nn = 1\nvalues = [0.0, -1.0]\n")
                .unwrap()
                .build()
                .unwrap();
        assert_eq!(table.value(set(&[0])), -1.0);

        let cov = FunctionSpec::from_toml("kind = \"coverage\"\nsets = [[0], [0, 1]]\nsign = -1\n")
            .unwrap();
        assert_eq!(cov.build().unwrap().value(Subset::full(2)), -2.0);

        assert!(
            FunctionSpec::from_toml("kind = \"coverage\"\nsets = [[0]]\nsign = 2\n")
                .unwrap()
                .build()
                .is_err()
        );
        assert!(FunctionSpec::from_toml("kind = \"nope\"\n").is_err());
        let big = FunctionSpec::ExplicitTable {
            n: 13,
            values: vec![0.0; 1 << 13],
        };
        assert!(big.build().is_err());
        assert_eq!(FunctionSpec::from_toml(&spec.to_toml()).unwrap(), spec);
    }

    #[test]
    fn counting_oracle_counts() {
        let f = cut2();
        let oracle = CountingOracle::new(&f);
        oracle.query(Subset::EMPTY);
        oracle.query(set(&[0]));
        assert_eq!(oracle.calls(), 2);
        assert_eq!(oracle.ground_set_size(), 2);
    }

    #[test]
    fn sum_adds_bounds() {
        let f =
            SetFunction::sum(vec![cut2(), make_modular_function(&[1.0, -1.0]).unwrap()]).unwrap();
        assert_eq!(f.bound(), 2.0);
        assert_eq!(f.value(set(&[1])), 0.0);
        assert!(SetFunction::sum(vec![cut2(), make_modular_function(&[1.0]).unwrap()]).is_err());
    }
}
