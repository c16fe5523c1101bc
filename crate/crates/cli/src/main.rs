//! Command-line runner for the private online submodular minimization library.

mod config;

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::Parser;
use dpsubmod::harness::{
    fit_regret_slope, mean_final_regret, resolve, run_experiment, verify_lemma_suite_with,
    Adversary, Algorithm, ExperimentParams, LemmaSuiteConfig, TRACE_SCHEMA,
};
use dpsubmod::learners::bandit_gradient_estimate;
use dpsubmod::rng::{stream, StreamPurpose};
use dpsubmod::{Epsilon, NoisyPrefixSumTree};
use serde::Serialize;

use config::{load_file, ExperimentConfig, Flags, Mode};

#[derive(Parser, Debug)]
#[command(
    name = "dpsubmod",
    version,
    about = "Private online submodular minimization experiments"
)]
struct Cli {
    /// TOML config file; a previously written summary.toml also works. Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Serialize)]
struct Provenance {
    version: &'static str,
    trace_schema: &'static str,
    non_private: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    banner: Option<String>,
}

#[derive(Serialize)]
struct ResolvedRecord {
    #[serde(rename = "T")]
    horizon: usize,
    #[serde(rename = "H")]
    h: f64,
    tree_bound: f64,
    analysis_lipschitz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_requested: Option<f64>,
}

#[derive(Serialize, Default)]
struct Results {
    horizons: Vec<usize>,
    mean_regret: Vec<f64>,
    mean_regret_per_round: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_undefined: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_queries_per_trial: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct LemmaRecord {
    name: String,
    passed: bool,
    margin: f64,
    detail: String,
}

#[derive(Serialize)]
struct TreeRecord {
    capacity: usize,
    depth: usize,
    rounds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_scale: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    #[serde(flatten)]
    config: ExperimentConfig,
    provenance: Provenance,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    resolved: Vec<ResolvedRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    results: Option<Results>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    lemmas: Vec<LemmaRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tree: Option<TreeRecord>,
}

/// Files written so far; removed again unless the run completes.
struct Outputs {
    dir: Option<PathBuf>,
    created_dirs: Vec<PathBuf>,
    files: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn new(dir: Option<PathBuf>) -> Self {
        Self {
            dir,
            created_dirs: Vec::new(),
            files: Vec::new(),
            committed: false,
        }
    }

    fn create(&mut self, relative: &str) -> Result<Option<BufWriter<File>>> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        let path = dir.join(relative);
        let parent = path
            .parent()
            .expect("joined path has a parent")
            .to_path_buf();
        let mut missing = Vec::new();
        let mut p = parent.as_path();
        while !p.exists() {
            missing.push(p.to_path_buf());
            match p.parent() {
                Some(q) => p = q,
                None => break,
            }
        }
        fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
        self.created_dirs.extend(missing);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.files.push(path);
        Ok(Some(BufWriter::new(file)))
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        // Deepest first.
        for d in &self.created_dirs {
            let _ = fs::remove_dir(d);
        }
    }
}

fn provenance(epsilon: Option<Epsilon>) -> Provenance {
    let non_private = epsilon.is_some_and(|e| !e.is_private());
    Provenance {
        version: env!("CARGO_PKG_VERSION"),
        trace_schema: TRACE_SCHEMA,
        non_private,
        banner: non_private.then(|| "NON-PRIVATE: epsilon = inf, no noise was added".to_string()),
    }
}

fn run_regret(cfg: &ExperimentConfig, algorithm: Algorithm, out: &mut Outputs) -> Result<Summary> {
    let n = cfg.n.expect("defaulted");
    let bound = cfg.bound.expect("defaulted");
    let epsilon = cfg.epsilon.expect("defaulted");
    let trials = cfg.trials.expect("defaulted");
    let seed = cfg.seed.expect("defaulted");
    let exec = cfg.execution.expect("defaulted");
    let adversary = Adversary::new(cfg.adversary.clone().expect("defaulted"), n, bound)?;
    let overrides = cfg.overrides.clone().unwrap_or_default();

    let mut resolved = Vec::new();
    let mut results = Results::default();
    let mut queries = Vec::new();
    for &horizon in cfg.horizons.as_deref().expect("defaulted") {
        let params = ExperimentParams {
            n,
            bound,
            horizon,
            epsilon,
            overrides: overrides.clone(),
        };
        let r = resolve(algorithm, &params)?;
        resolved.push(ResolvedRecord {
            horizon,
            h: r.h(),
            tree_bound: r.tree_bound(),
            analysis_lipschitz: r.analysis_lipschitz(),
            gamma: r.gamma().map(|g| g.0),
            gamma_requested: r.gamma().map(|g| g.1),
        });
        let traces = run_experiment(&adversary, algorithm, &params, trials, seed, exec)?;
        if cfg.traces == Some(true) {
            for t in &traces {
                let name = format!(
                    "traces/{algorithm}-T{horizon}-trial{:03}.csv",
                    t.metadata.trial
                );
                if let Some(w) = out.create(&name)? {
                    t.write_csv(w)?;
                }
            }
        }
        queries.extend(traces.iter().filter_map(|t| t.metadata.oracle_queries));
        let mean = mean_final_regret(&traces);
        results.horizons.push(horizon);
        results.mean_regret.push(mean);
        results.mean_regret_per_round.push(mean / horizon as f64);
    }
    if results.horizons.len() >= 2 {
        let points: Vec<(usize, f64)> = results
            .horizons
            .iter()
            .copied()
            .zip(results.mean_regret.iter().copied())
            .collect();
        match fit_regret_slope(&points) {
            Ok(s) => results.slope = Some(s),
            Err(e) => results.slope_undefined = Some(e.to_string()),
        }
    }
    if algorithm == Algorithm::Bandit {
        results.oracle_queries_per_trial = Some(queries);
    }
    Ok(Summary {
        config: cfg.clone(),
        provenance: provenance(Some(epsilon)),
        resolved,
        results: Some(results),
        lemmas: Vec::new(),
        tree: None,
    })
}

fn run_lemmas(cfg: &ExperimentConfig) -> Result<(Summary, bool)> {
    let suite = LemmaSuiteConfig {
        instances: cfg.instances.expect("defaulted"),
        orthogonality_runs: cfg.orthogonality_runs.expect("defaulted"),
        execution: cfg.execution.expect("defaulted"),
        ..LemmaSuiteConfig::default()
    };
    let report = verify_lemma_suite_with(
        cfg.seed.expect("defaulted"),
        &suite,
        &bandit_gradient_estimate,
    )?;
    eprint!("{report}");
    let lemmas = report
        .checks
        .iter()
        .map(|c| LemmaRecord {
            name: c.name.to_string(),
            passed: c.passed,
            margin: c.margin,
            detail: c.detail.clone(),
        })
        .collect();
    let summary = Summary {
        config: cfg.clone(),
        provenance: provenance(None),
        resolved: Vec::new(),
        results: None,
        lemmas,
        tree: None,
    };
    Ok((summary, report.all_passed()))
}

fn read_vectors(input: Option<&Path>) -> Result<Vec<Vec<f64>>> {
    let reader: Box<dyn BufRead> = match input {
        None => Box::new(BufReader::new(io::stdin())),
        Some(p) if p == Path::new("-") => Box::new(BufReader::new(io::stdin())),
        Some(p) => Box::new(BufReader::new(
            File::open(p).with_context(|| format!("opening {}", p.display()))?,
        )),
    };
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("line {}: not a list of numbers", k + 1))?;
        out.push(v);
    }
    Ok(out)
}

fn run_tree(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Summary> {
    let vectors = read_vectors(cfg.input.as_deref())?;
    ensure!(!vectors.is_empty(), "no input vectors");
    let dim = cfg.dim.unwrap_or(vectors[0].len());
    let rounds = cfg.rounds.unwrap_or(vectors.len());
    ensure!(
        vectors.len() <= rounds,
        "{} input vectors exceed --rounds {rounds}",
        vectors.len()
    );
    let epsilon = cfg.epsilon.expect("defaulted");
    let mut tree = NoisyPrefixSumTree::new(rounds, dim, cfg.norm_bound.expect("checked"), epsilon)?;
    let mut rng = stream(cfg.seed.expect("defaulted"), 0, StreamPurpose::Noise);

    let mut rows = Vec::with_capacity(vectors.len());
    for (t, z) in vectors.iter().enumerate() {
        let v = tree
            .append(z, &mut rng)
            .with_context(|| format!("input vector {}", t + 1))?;
        rows.push(v);
    }
    let mut writer: Box<dyn Write> = match out.create("tree.csv")? {
        Some(w) => Box::new(w),
        None => Box::new(io::stdout().lock()),
    };
    let header: Vec<String> = (1..=dim).map(|i| format!("v{i}")).collect();
    writeln!(writer, "t,{}", header.join(","))?;
    for (t, v) in rows.iter().enumerate() {
        let cells: Vec<String> = v.iter().map(f64::to_string).collect();
        writeln!(writer, "{},{}", t + 1, cells.join(","))?;
    }
    writer.flush()?;
    Ok(Summary {
        config: cfg.clone(),
        provenance: provenance(Some(epsilon)),
        resolved: Vec::new(),
        results: None,
        lemmas: Vec::new(),
        tree: Some(TreeRecord {
            capacity: tree.capacity(),
            depth: tree.depth(),
            rounds: tree.rounds(),
            noise_scale: tree.noise_scale(),
        }),
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let base = match &cli.config {
        Some(path) => load_file(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = base.apply(cli.flags)?.with_defaults()?;
    let mode = cfg.algorithm.expect("checked");
    let mut out = Outputs::new(cfg.out_dir.clone());
    if let Some(dir) = &cfg.out_dir {
        if dir.exists() && !dir.is_dir() {
            bail!("--out-dir {} is not a directory", dir.display());
        }
    }

    let (summary, ok) = match mode {
        Mode::FullInfo => (run_regret(&cfg, Algorithm::FullInfo, &mut out)?, true),
        Mode::Bandit => (run_regret(&cfg, Algorithm::Bandit, &mut out)?, true),
        Mode::VerifyLemmas => run_lemmas(&cfg)?,
        Mode::TbapStandalone => (run_tree(&cfg, &mut out)?, true),
    };
    if let Some(b) = &summary.provenance.banner {
        eprintln!("*** {b} ***");
    }
    let text = toml::to_string(&summary).context("serializing summary")?;
    match out.create("summary.toml")? {
        Some(mut w) => {
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None if mode != Mode::TbapStandalone => print!("{text}"),
        None => eprint!("{text}"),
    }
    out.committed = true;
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncommitted_outputs_are_removed() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("a/b");
        {
            let mut out = Outputs::new(Some(dir.clone()));
            writeln!(out.create("traces/x.csv").unwrap().unwrap(), "1").unwrap();
            writeln!(out.create("summary.toml").unwrap().unwrap(), "1").unwrap();
            assert!(dir.join("traces/x.csv").exists());
        }
        assert!(!tmp.path().join("a").exists());

        {
            let mut out = Outputs::new(Some(dir.clone()));
            out.create("summary.toml").unwrap();
            out.committed = true;
        }
        assert!(dir.join("summary.toml").exists());
    }

    #[test]
    fn preexisting_directories_survive_cleanup() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("keep.txt"), "x").unwrap();
        {
            let mut out = Outputs::new(Some(tmp.path().to_path_buf()));
            out.create("summary.toml").unwrap();
        }
        assert!(tmp.path().join("keep.txt").exists());
        assert!(!tmp.path().join("summary.toml").exists());
    }
}
