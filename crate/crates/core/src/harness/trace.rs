use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::aggregation::Epsilon;
use crate::subset::Subset;

/// Version tag of the trace CSV layout.
pub const TRACE_SCHEMA: &str = "trace-v1";

/// One played round. `t` is implicit (1-based position in the trace).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundRecord {
    pub set: Subset,
    pub cost: f64,
    pub cum_cost: f64,
    /// `Σ_{j≤t} (f_j(S_j) - f_j(S*))` against the final hindsight optimum `S*`.
    pub regret: f64,
}

/// Provenance carried by every trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub algorithm: String,
    pub n: usize,
    pub bound: f64,
    pub horizon: usize,
    pub epsilon: Epsilon,
    pub h: f64,
    /// Sensitivity bound handed to the aggregation tree.
    pub tree_bound: f64,
    /// Lipschitz constant of the regret analysis (differs from `tree_bound` for bandits).
    pub analysis_lipschitz: f64,
    pub gamma: Option<f64>,
    pub gamma_requested: Option<f64>,
    pub seed: u64,
    pub trial: u64,
    pub adversary: String,
    /// Total cost-oracle queries made by a bandit learner.
    pub oracle_queries: Option<usize>,
}

impl TraceMetadata {
    pub fn non_private(&self) -> bool {
        !self.epsilon.is_private()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegretTrace {
    pub metadata: TraceMetadata,
    pub rounds: Vec<RoundRecord>,
    pub hindsight_set: Subset,
    pub hindsight_cost: f64,
}

impl RegretTrace {
    pub fn total_cost(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.cum_cost)
    }

    /// `Σ_t f_t(S_t) - min_S Σ_t f_t(S)`.
    pub fn final_regret(&self) -> f64 {
        self.total_cost() - self.hindsight_cost
    }

    /// Writes `t,set_mask,cost,cum_cost,regret` rows under a `#` provenance line.
    /// The adversary description is the last header field and may contain spaces.
    /// Floats use shortest round-trip formatting, so rewriting is bit-identical.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = &self.metadata;
        writeln!(
            w,
            "# schema={TRACE_SCHEMA} algorithm={} n={} M={} T={} epsilon={}{} H={} tree_bound={} gamma={} seed={} trial={} hindsight_set={} hindsight_cost={} adversary={}",
            m.algorithm,
            m.n,
            m.bound,
            m.horizon,
            m.epsilon,
            if m.non_private() { " NON-PRIVATE" } else { "" },
            m.h,
            m.tree_bound,
            m.gamma.map_or_else(|| "-".to_string(), |g| g.to_string()),
            m.seed,
            m.trial,
            self.hindsight_set.mask(),
            self.hindsight_cost,
            m.adversary,
        )?;
        writeln!(w, "t,set_mask,cost,cum_cost,regret")?;
        for (k, r) in self.rounds.iter().enumerate() {
            // `+ 0.0` prints negative zero as 0.
            writeln!(
                w,
                "{},{},{},{},{}",
                k + 1,
                r.set.mask(),
                r.cost + 0.0,
                r.cum_cost + 0.0,
                r.regret + 0.0
            )?;
        }
        Ok(())
    }
}
