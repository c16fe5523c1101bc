use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use dpsubmod::harness::{AdversaryKind, Overrides};
use dpsubmod::{Epsilon, Execution};
use serde::{Deserialize, Serialize};

/// Top-level tables written by the summary that are not configuration.
pub const OUTPUT_SECTIONS: [&str; 5] = ["provenance", "resolved", "results", "lemmas", "tree"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    FullInfo,
    Bandit,
    TbapStandalone,
    VerifyLemmas,
}

/// Everything a run depends on. Written back at the root of the summary,
/// so a summary is itself a valid `--config` file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Option<Mode>,
    pub n: Option<usize>,
    pub horizons: Option<Vec<usize>>,
    #[serde(rename = "M")]
    pub bound: Option<f64>,
    pub epsilon: Option<Epsilon>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub execution: Option<Execution>,
    pub traces: Option<bool>,
    pub out_dir: Option<PathBuf>,
    pub overrides: Option<Overrides>,
    pub adversary: Option<AdversaryKind>,
    /// Lemma suite: number of random instances.
    pub instances: Option<usize>,
    /// Lemma suite: number of two-round runs for the orthogonality check.
    pub orthogonality_runs: Option<usize>,
    /// Aggregation tree: newline-delimited input vectors.
    pub input: Option<PathBuf>,
    pub dim: Option<usize>,
    pub rounds: Option<usize>,
    pub norm_bound: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct Flags {
    /// What to run.
    #[arg(long, value_enum)]
    pub algorithm: Option<Mode>,
    /// Ground set size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated list of horizons.
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    /// Single horizon (shorthand for a one-element --horizons).
    #[arg(long = "T")]
    pub horizon: Option<usize>,
    /// Range bound on |f_t|.
    #[arg(long = "M")]
    pub bound: Option<f64>,
    /// Privacy parameter, a positive number or `inf` to disable noise.
    #[arg(long)]
    pub epsilon: Option<Epsilon>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run trials sequentially instead of on the thread pool.
    #[arg(long)]
    pub sequential: bool,
    /// Regularization strength, replacing the default rule.
    #[arg(long)]
    pub h: Option<f64>,
    /// Multiplier on the default regularization rule.
    #[arg(long)]
    pub h_scale: Option<f64>,
    /// Full information: sensitivity bound handed to the aggregation tree.
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Bandit: exploration rate, clamped to (0, 1].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Bandit: multiplier on the default exploration rule.
    #[arg(long)]
    pub gamma_scale: Option<f64>,
    /// Full information: bitmask of the first played set.
    #[arg(long)]
    pub initial_set: Option<u64>,
    /// Bandit: comma-separated first iterate.
    #[arg(long, value_delimiter = ',')]
    pub initial_point: Option<Vec<f64>>,
    /// Adversary as an inline TOML table, e.g. `kind = "switching"\nperiod = 50`
    /// or `{ kind = "random-cut-stream", density = 0.3 }`.
    #[arg(long)]
    pub adversary: Option<String>,
    /// Directory for the summary and traces.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Write one CSV per trial and horizon.
    #[arg(long)]
    pub traces: bool,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub orthogonality_runs: Option<usize>,
    /// Input file of vectors, one per line (`-` for stdin).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub norm_bound: Option<f64>,
}

pub fn parse_adversary(text: &str) -> Result<AdversaryKind> {
    let trimmed = text.trim();
    let body = if trimmed.starts_with('{') {
        format!("adversary = {trimmed}")
    } else {
        format!("[adversary]\n{trimmed}")
    };
    #[derive(Deserialize)]
    struct Wrapper {
        adversary: AdversaryKind,
    }
    let w: Wrapper = toml::from_str(&body).context("invalid --adversary table")?;
    Ok(w.adversary)
}

pub fn load_file(path: &Path) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut table: toml::Table =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    for key in OUTPUT_SECTIONS {
        table.remove(key);
    }
    ExperimentConfig::deserialize(toml::Value::Table(table))
        .with_context(|| format!("invalid config {}", path.display()))
}

impl ExperimentConfig {
    /// Flags win over the file, field by field; override fields merge individually.
    pub fn apply(mut self, f: Flags) -> Result<Self> {
        if f.horizon.is_some() && f.horizons.is_some() {
            bail!("give either --T or --horizons, not both");
        }
        macro_rules! set {
            ($($field:ident),*) => { $( if f.$field.is_some() { self.$field = f.$field; } )* };
        }
        set!(
            algorithm,
            n,
            horizons,
            bound,
            epsilon,
            trials,
            seed,
            out_dir,
            instances,
            orthogonality_runs,
            input,
            dim,
            rounds,
            norm_bound
        );
        if let Some(t) = f.horizon {
            self.horizons = Some(vec![t]);
        }
        if f.sequential {
            self.execution = Some(Execution::Sequential);
        }
        if f.traces {
            self.traces = Some(true);
        }
        if let Some(a) = &f.adversary {
            self.adversary = Some(parse_adversary(a)?);
        }
        let mut o = self.overrides.take().unwrap_or_default();
        if f.h.is_some() {
            o.h = f.h;
        }
        if let Some(s) = f.h_scale {
            o.h_scale = s;
        }
        if f.lipschitz.is_some() {
            o.lipschitz = f.lipschitz;
        }
        if f.gamma.is_some() {
            o.gamma = f.gamma;
        }
        if let Some(s) = f.gamma_scale {
            o.gamma_scale = s;
        }
        if f.initial_set.is_some() {
            o.initial_set = f.initial_set;
        }
        if f.initial_point.is_some() {
            o.initial_point = f.initial_point;
        }
        if o != Overrides::default() {
            self.overrides = Some(o);
        }
        Ok(self)
    }

    /// Fills defaults so the echoed config is complete.
    pub fn with_defaults(mut self) -> Result<Self> {
        let Some(mode) = self.algorithm else {
            bail!("--algorithm is required (full-info, bandit, tbap-standalone, verify-lemmas)");
        };
        self.seed.get_or_insert(0);
        self.execution.get_or_insert(Execution::Parallel);
        self.traces.get_or_insert(false);
        match mode {
            Mode::FullInfo | Mode::Bandit => {
                let n = *self.n.get_or_insert(4);
                if n == 0 {
                    bail!("n must be at least 1");
                }
                self.bound.get_or_insert(1.0);
                self.epsilon.get_or_insert(Epsilon::Finite(1.0));
                if self.trials.get_or_insert(20) == &0 {
                    bail!("trials must be at least 1");
                }
                let horizons = self.horizons.get_or_insert_with(|| vec![1024]);
                if horizons.is_empty() || horizons.contains(&0) {
                    bail!("horizons must be a nonempty list of positive integers");
                }
                self.adversary.get_or_insert_with(AdversaryKind::default);
            }
            Mode::VerifyLemmas => {
                self.instances.get_or_insert(1000);
                self.orthogonality_runs.get_or_insert(100_000);
            }
            Mode::TbapStandalone => {
                self.epsilon.get_or_insert(Epsilon::Finite(1.0));
                if self.norm_bound.is_none() {
                    bail!("--norm-bound is required for tbap-standalone");
                }
            }
        }
        Ok(self)
    }
}
