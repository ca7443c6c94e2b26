//! Declarative benchmark runs: one graph, several attacks, one report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{average_curves, cfe, execute_plan, improvement, DEFAULT_THRESHOLD};
use crate::generators::GenSpec;
use crate::graph::Graph;
use crate::io::{create, load_edge_list, save_plan, LoadReport};
use crate::plan::RemovalPlan;
use crate::seeds::derive_seed;
use crate::spectral::{hpi_ncut, SpectralConfig};
use crate::strategies::{
    bond_percolation_plan, ci_plan, corehd_plan, edge_betweenness_plan, hd_plan, hda_plan,
    site_percolation_plan, CoreDegree,
};

pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_CI_RADIUS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    File { path: PathBuf },
    Generated(GenSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    Site {
        #[serde(default = "default_runs")]
        runs: usize,
    },
    Bond {
        #[serde(default = "default_runs")]
        runs: usize,
    },
    Hd,
    Hda,
    Ci {
        #[serde(default = "default_radius")]
        radius: usize,
    },
    Corehd {
        #[serde(default)]
        rank_by: CoreDegree,
    },
    Betweenness {
        /// Re-rank after this many removals; static ranking when absent.
        #[serde(default)]
        recompute_interval: Option<usize>,
    },
    /// `gcc_threshold`, `budget` and `seed` are taken from the run.
    HpiNcut(SpectralConfig),
}

fn default_runs() -> usize {
    DEFAULT_RUNS
}

fn default_radius() -> usize {
    DEFAULT_CI_RADIUS
}

impl StrategySpec {
    pub fn label(&self) -> &'static str {
        match self {
            StrategySpec::Site { .. } => "site",
            StrategySpec::Bond { .. } => "bond",
            StrategySpec::Hd => "HD",
            StrategySpec::Hda => "HDA",
            StrategySpec::Ci { .. } => "CI",
            StrategySpec::Corehd { .. } => "CoreHD",
            StrategySpec::Betweenness { .. } => "EB",
            StrategySpec::HpiNcut(_) => "HPI-Ncut",
        }
    }

    /// Randomized plans are averaged over this many runs.
    pub fn runs(&self) -> usize {
        match self {
            StrategySpec::Site { runs } | StrategySpec::Bond { runs } => *runs,
            _ => 1,
        }
    }

    pub fn hpi_default() -> Self {
        StrategySpec::HpiNcut(SpectralConfig::default())
    }
}

/// What one strategy produced on one graph.
#[derive(Debug, Clone)]
pub struct Attack {
    pub plan: RemovalPlan,
    /// Bisections that fell back to a median split (spectral attacks only).
    pub fallbacks: Option<usize>,
}

/// Builds the removal plan of `spec` on `g`. `seed` drives the random
/// choices; `threshold` and `budget` only matter for the spectral attack,
/// which stops on its own.
pub fn build_attack(g: &Graph, spec: &StrategySpec, seed: u64, threshold: f64, budget: Option<f64>) -> Result<Attack> {
    let plan = match spec {
        StrategySpec::Site { .. } => site_percolation_plan(g, seed),
        StrategySpec::Bond { .. } => bond_percolation_plan(g, seed),
        StrategySpec::Hd => hd_plan(g),
        StrategySpec::Hda => hda_plan(g),
        StrategySpec::Ci { radius } => ci_plan(g, *radius)?,
        StrategySpec::Corehd { rank_by } => corehd_plan(g, *rank_by),
        StrategySpec::Betweenness { recompute_interval } => edge_betweenness_plan(g, *recompute_interval),
        StrategySpec::HpiNcut(cfg) => {
            let cfg = SpectralConfig {
                gcc_threshold: threshold,
                budget,
                seed,
                ..cfg.clone()
            };
            let (tree, plan) = hpi_ncut(g, &cfg)?;
            return Ok(Attack {
                plan,
                fallbacks: Some(tree.fallbacks()),
            });
        }
    };
    Ok(Attack { plan, fallbacks: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: GraphSource,
    pub strategies: Vec<StrategySpec>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Largest cost fraction any plan may spend; plans are cut after the
    /// last whole batch that fits.
    #[serde(default = "default_budget")]
    pub budget: f64,
    /// Run on the largest connected component only.
    #[serde(default = "default_true")]
    pub gcc_only: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_budget() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn new(input: GraphSource, strategies: Vec<StrategySpec>, seed: u64) -> Self {
        RunConfig {
            input,
            strategies,
            threshold: DEFAULT_THRESHOLD,
            budget: 1.0,
            gcc_only: true,
            output_dir: None,
            seed,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML file. A relative input path is taken relative to the
    /// file's directory; `output_dir` stays relative to the working directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(e.to_string()).context(path.display().to_string()))?;
        if let (GraphSource::File { path: input }, Some(base)) = (&mut cfg.input, path.parent()) {
            if input.is_relative() {
                *input = base.join(&*input);
            }
        }
        cfg.validate().map_err(|e| e.context(path.display().to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(Error::Config("at least one strategy is required".into()));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Config(format!("threshold must lie in (0, 1], got {}", self.threshold)));
        }
        if !(0.0..=1.0).contains(&self.budget) {
            return Err(Error::Config(format!("budget must lie in [0, 1], got {}", self.budget)));
        }
        for s in &self.strategies {
            if s.runs() == 0 {
                return Err(Error::Config(format!("{} needs at least one run", s.label())));
            }
            if let StrategySpec::HpiNcut(cfg) = s {
                cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        if let GraphSource::File { path } = &self.input {
            if !path.is_file() {
                return Err(Error::Config(format!("input file {} does not exist", path.display())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphInfo {
    pub source: String,
    /// Explicit generator parameters, with tuned block probabilities solved.
    pub generator: Option<GenSpec>,
    pub load: Option<LoadReport>,
    pub original_nodes: usize,
    pub original_edges: usize,
    pub nodes: usize,
    pub edges: usize,
    pub mean_degree: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyResult {
    pub name: String,
    pub spec: StrategySpec,
    pub runs: usize,
    pub seeds: Vec<u64>,
    /// Area under the (ensemble-mean) curve.
    pub cfe: f64,
    /// Spread of the per-run areas; zero for single runs.
    pub cfe_run_std: f64,
    /// `(F_site - F) / F_site`.
    pub improvement: Option<f64>,
    /// `F_site - F`.
    pub gap: Option<f64>,
    /// Cost spent by the (mean) plan before execution stopped.
    pub final_cost: f64,
    pub final_gcc: f64,
    pub fallbacks: Option<usize>,
    pub curve_file: Option<String>,
    pub plan_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfeReport {
    pub graph: GraphInfo,
    pub seed: u64,
    pub threshold: f64,
    pub budget: f64,
    pub baseline: Option<String>,
    pub baseline_cfe: Option<f64>,
    pub baseline_convention: &'static str,
    pub strategies: Vec<StrategyResult>,
}

impl CfeReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn get(&self, name: &str) -> Option<&StrategyResult> {
        self.strategies.iter().find(|s| s.name == name)
    }

    /// Aligned text table: strategy, F, improvement over the baseline.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "graph: {} (n = {}, m = {}, <k> = {:.2})",
            self.graph.source, self.graph.nodes, self.graph.edges, self.graph.mean_degree
        );
        let _ = writeln!(out, "{:<12} {:>8} {:>12} {:>8} {:>6}", "strategy", "F", "improvement", "gap", "runs");
        for s in &self.strategies {
            let imp = s.improvement.map_or("-".to_string(), |v| format!("{:.0}%", 100.0 * v));
            let gap = s.gap.map_or("-".to_string(), |v| format!("{v:.3}"));
            let _ = writeln!(out, "{:<12} {:>8.3} {:>12} {:>8} {:>6}", s.name, s.cfe, imp, gap, s.runs);
        }
        out
    }
}

/// Loads or generates the configured graph, reduced to its largest
/// component when `gcc_only` is set.
pub fn prepare_graph(config: &RunConfig) -> Result<(Graph, GraphInfo)> {
    let (g, source, generator, load) = match &config.input {
        GraphSource::File { path } => {
            let (g, report) = load_edge_list(path)?;
            (g, path.display().to_string(), None, Some(report))
        }
        GraphSource::Generated(spec) => {
            let resolved = spec.resolve()?;
            let g = resolved.generate()?;
            (g, format!("{} generator", kind_name(spec)), Some(resolved), None)
        }
    };
    let (original_nodes, original_edges) = (g.n(), g.m());
    let g = if config.gcc_only { g.extract_gcc() } else { g };
    let info = GraphInfo {
        source,
        generator,
        load,
        original_nodes,
        original_edges,
        nodes: g.n(),
        edges: g.m(),
        mean_degree: g.mean_degree(),
    };
    Ok((g, info))
}

fn kind_name(spec: &GenSpec) -> &'static str {
    match spec {
        GenSpec::Er { .. } => "ER",
        GenSpec::Sf { .. } => "SF",
        GenSpec::Sbm { .. } | GenSpec::SbmTuned { .. } => "SBM",
    }
}

/// Unique report names: the second HPI-Ncut entry becomes `HPI-Ncut#2`.
fn strategy_names(strategies: &[StrategySpec]) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    strategies
        .iter()
        .map(|s| {
            let c = counts.entry(s.label()).or_default();
            *c += 1;
            if *c == 1 {
                s.label().to_string()
            } else {
                format!("{}#{}", s.label(), c)
            }
        })
        .collect()
}

/// Runs every configured strategy and, when `output_dir` is set, writes
/// `report.json`, `report.txt`, one curve CSV per strategy and the plans of
/// deterministic strategies. The report depends only on the config.
pub fn run_benchmark(config: &RunConfig) -> Result<CfeReport> {
    config.validate()?;
    let (g, info) = prepare_graph(config)?;
    run_on_graph(config, &g, info)
}

/// As [`run_benchmark`] on an already prepared graph.
pub fn run_on_graph(config: &RunConfig, g: &Graph, info: GraphInfo) -> Result<CfeReport> {
    let names = strategy_names(&config.strategies);
    let tasks: Vec<(usize, usize)> = config
        .strategies
        .iter()
        .enumerate()
        .flat_map(|(s, spec)| (0..spec.runs()).map(move |r| (s, r)))
        .collect();
    let budget = (config.budget < 1.0).then_some(config.budget);
    let outcomes: Vec<(Attack, crate::evaluation::GccCurve)> = tasks
        .par_iter()
        .map(|&(s, r)| {
            let spec = &config.strategies[s];
            let seed = derive_seed(config.seed, &names[s], r as u64);
            let attack = build_attack(g, spec, seed, config.threshold, budget)
                .map_err(|e| e.context(format!("strategy {}", names[s])))?;
            let plan = attack.plan.truncated(config.budget);
            let curve = execute_plan(g, &plan, config.threshold).map_err(|e| e.context(format!("strategy {}", names[s])))?;
            Ok((Attack { plan, ..attack }, curve))
        })
        .collect::<Result<_>>()?;

    let out_dir = config.output_dir.as_deref();
    let mut results = Vec::with_capacity(config.strategies.len());
    let mut offset = 0;
    for (s, spec) in config.strategies.iter().enumerate() {
        let runs = spec.runs();
        let chunk = &outcomes[offset..offset + runs];
        offset += runs;
        let curves: Vec<_> = chunk.iter().map(|(_, c)| c.clone()).collect();
        let averaged = average_curves(&curves)?;
        let mean = averaged.mean_curve();
        let per_run: Vec<f64> = curves.iter().map(cfe).collect();
        let run_mean = per_run.iter().sum::<f64>() / runs as f64;
        let run_std = (per_run.iter().map(|f| (f - run_mean).powi(2)).sum::<f64>() / runs as f64).sqrt();
        let fallbacks = chunk.iter().map(|(a, _)| a.fallbacks).try_fold(0, |acc, f| f.map(|f| acc + f));
        let file_stem = names[s].replace('#', "_").to_lowercase();
        let mut curve_file = None;
        let mut plan_file = None;
        if let Some(dir) = out_dir {
            let name = format!("curves/{file_stem}.csv");
            averaged.write_csv(create(&dir.join(&name))?)?;
            curve_file = Some(name);
            if runs == 1 {
                let name = format!("plans/{file_stem}.csv");
                save_plan(&chunk[0].0.plan, dir.join(&name))?;
                plan_file = Some(name);
            }
        }
        let last = *mean.breakpoints.last().unwrap();
        results.push(StrategyResult {
            name: names[s].clone(),
            spec: spec.clone(),
            runs,
            seeds: (0..runs).map(|r| derive_seed(config.seed, &names[s], r as u64)).collect(),
            cfe: cfe(&mean),
            cfe_run_std: run_std,
            improvement: None,
            gap: None,
            final_cost: last.0,
            final_gcc: last.1,
            fallbacks,
            curve_file,
            plan_file,
        });
    }

    let baseline = results.iter().find(|r| matches!(r.spec, StrategySpec::Site { .. }));
    let baseline_cfe = baseline.map(|b| b.cfe);
    let baseline_name = baseline.map(|b| b.name.clone());
    if let Some(f_star) = baseline_cfe {
        for r in &mut results {
            r.improvement = improvement(f_star, r.cfe).ok();
            r.gap = Some(f_star - r.cfe);
        }
    }
    let report = CfeReport {
        graph: info,
        seed: config.seed,
        threshold: config.threshold,
        budget: config.budget,
        baseline: baseline_name,
        baseline_cfe,
        baseline_convention: "area under the ensemble-mean site-percolation curve",
        strategies: results,
    };
    if let Some(dir) = out_dir {
        create(&dir.join("report.json"))?.write_all(report.to_json()?.as_bytes())?;
        create(&dir.join("report.txt"))?.write_all(report.table().as_bytes())?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn er_config(strategies: Vec<StrategySpec>) -> RunConfig {
        RunConfig::new(
            GraphSource::Generated(GenSpec::Er {
                n: 200,
                mean_degree: 4.0,
                seed: 1,
            }),
            strategies,
            7,
        )
    }

    fn all_strategies() -> Vec<StrategySpec> {
        vec![
            StrategySpec::Site { runs: 5 },
            StrategySpec::Bond { runs: 5 },
            StrategySpec::Hd,
            StrategySpec::Hda,
            StrategySpec::Ci { radius: 2 },
            StrategySpec::Corehd {
                rank_by: CoreDegree::Residual,
            },
            StrategySpec::Betweenness {
                recompute_interval: None,
            },
            StrategySpec::hpi_default(),
        ]
    }

    #[test]
    fn toml_config() {
        let cfg = RunConfig::from_toml(
            r#"
            seed = 3
            budget = 0.5
            [input]
            kind = "sbm_tuned"
            n = 100
            blocks = 4
            mean_degree = 3.0
            seed = 1
            [[strategies]]
            kind = "site"
            runs = 10
            [[strategies]]
            kind = "ci"
            [[strategies]]
            kind = "hpi_ncut"
            balanced = true
            "#,
        )
        .unwrap();
        assert_eq!(cfg.strategies[0], StrategySpec::Site { runs: 10 });
        assert_eq!(cfg.strategies[1], StrategySpec::Ci { radius: 2 });
        match &cfg.strategies[2] {
            StrategySpec::HpiNcut(c) => assert!(c.balanced),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(cfg.input, GraphSource::Generated(GenSpec::SbmTuned { .. })));
        assert_eq!(cfg.threshold, DEFAULT_THRESHOLD);
    }

    #[test]
    fn file_input_and_bad_configs() {
        let cfg = RunConfig::from_toml("[input]\npath = \"/nonexistent/g.txt\"\n[[strategies]]\nkind = \"hd\"\n");
        assert!(matches!(cfg, Err(Error::Config(_))));
        assert!(matches!(
            RunConfig::from_toml("strategies = []\n[input]\npath = \"x\"\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_toml("bogus = 1\nstrategies = [{kind = \"hd\"}]\n[input]\npath = \"x\"\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn zero_budget_leaves_everything_intact() {
        let mut cfg = er_config(all_strategies());
        cfg.budget = 0.0;
        let report = run_benchmark(&cfg).unwrap();
        for s in &report.strategies {
            assert_eq!(s.cfe, 1.0, "{}", s.name);
        }
    }

    #[test]
    fn report_is_reproducible_and_complete() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = er_config(all_strategies());
        cfg.output_dir = Some(dir.path().to_path_buf());
        let a = run_benchmark(&cfg).unwrap();
        let bytes = std::fs::read(dir.path().join("report.json")).unwrap();
        let b = run_benchmark(&cfg).unwrap();
        assert_eq!(bytes, std::fs::read(dir.path().join("report.json")).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.baseline.as_deref(), Some("site"));
        assert_eq!(a.get("site").unwrap().improvement, Some(0.0));
        assert!(a.get("HPI-Ncut").unwrap().fallbacks.is_some());
        for s in &a.strategies {
            assert!((0.0..=1.0).contains(&s.cfe));
            assert!(dir.path().join(s.curve_file.as_ref().unwrap()).is_file());
        }
        assert!(dir.path().join("plans/hpi-ncut.csv").is_file());
        assert!(dir.path().join("report.txt").is_file());
    }

    #[test]
    fn duplicate_strategies_get_distinct_names() {
        let names = strategy_names(&[StrategySpec::Hd, StrategySpec::hpi_default(), StrategySpec::hpi_default()]);
        assert_eq!(names, ["HD", "HPI-Ncut", "HPI-Ncut#2"]);
    }

    #[test]
    fn adding_a_strategy_keeps_other_seeds() {
        let a = run_benchmark(&er_config(vec![StrategySpec::Site { runs: 3 }])).unwrap();
        let b = run_benchmark(&er_config(vec![StrategySpec::Hd, StrategySpec::Site { runs: 3 }])).unwrap();
        assert_eq!(a.get("site").unwrap().cfe, b.get("site").unwrap().cfe);
    }
}
