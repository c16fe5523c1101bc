use crate::error::{Error, Result};
use crate::submodular::{SetFunction, MAX_EXHAUSTIVE};
use crate::subset::Subset;

/// Running totals `Σ_t f_t(S)` for every subset, updated once per round.
#[derive(Clone, Debug)]
pub struct HindsightAccumulator {
    n: usize,
    totals: Vec<f64>,
    rounds: usize,
}

impl HindsightAccumulator {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_EXHAUSTIVE {
            return Err(Error::TooLargeForExhaustive {
                n,
                max: MAX_EXHAUSTIVE,
            });
        }
        Ok(Self {
            n,
            totals: vec![0.0; 1 << n],
            rounds: 0,
        })
    }

    pub fn observe(&mut self, f: &SetFunction) -> Result<()> {
        if f.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: f.n(),
            });
        }
        for (mask, total) in self.totals.iter_mut().enumerate() {
            *total += f.value(Subset::from_mask(mask as u64));
        }
        self.rounds += 1;
        Ok(())
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn total(&self, s: Subset) -> f64 {
        self.totals[s.mask() as usize]
    }

    /// Best fixed set so far; ties go to the smallest mask.
    pub fn best(&self) -> (Subset, f64) {
        let mut best = (Subset::EMPTY, self.totals[0]);
        for (mask, &v) in self.totals.iter().enumerate().skip(1) {
            if v < best.1 {
                best = (Subset::from_mask(mask as u64), v);
            }
        }
        best
    }
}

/// Exact `argmin_S Σ_t f_t(S)` over a sequence sharing one ground set.
/// An empty sequence yields `(∅, 0)`; with no function the ground set is unknown.
pub fn best_fixed_set<'a, I>(functions: I) -> Result<(Subset, f64)>
where
    I: IntoIterator<Item = &'a SetFunction>,
{
    let mut iter = functions.into_iter().peekable();
    let Some(first) = iter.peek() else {
        return Ok((Subset::EMPTY, 0.0));
    };
    let mut acc = HindsightAccumulator::new(first.n())?;
    for f in iter {
        acc.observe(f)?;
    }
    Ok(acc.best())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submodular::{make_cut_function, make_modular_function};

    #[test]
    fn constant_cut_ties_to_empty() {
        let f = make_cut_function(2, &[(0, 1, 1.0)]).unwrap();
        let seq = vec![f; 5];
        assert_eq!(best_fixed_set(&seq).unwrap(), (Subset::EMPTY, 0.0));
    }

    #[test]
    fn modular_pair() {
        let f = make_modular_function(&[1.0, -1.0]).unwrap();
        let seq = vec![f.clone(), f];
        assert_eq!(
            best_fixed_set(&seq).unwrap(),
            (Subset::from_elements([1]), -2.0)
        );
    }

    #[test]
    fn empty_horizon() {
        let seq: Vec<SetFunction> = vec![];
        assert_eq!(best_fixed_set(&seq).unwrap(), (Subset::EMPTY, 0.0));
    }

    #[test]
    fn refuses_large_ground_sets() {
        assert!(HindsightAccumulator::new(17).is_err());
    }
}
