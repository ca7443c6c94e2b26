use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dismantle::bench::{build_attack, run_benchmark, RunConfig, StrategySpec, DEFAULT_CI_RADIUS};
use dismantle::epidemics::{sir_ensemble, InitialInfected, SirParams};
use dismantle::evaluation::{cfe, execute_plan, improvement, DEFAULT_THRESHOLD};
use dismantle::generators::{GenSpec, DEFAULT_SBM_RATIO};
use dismantle::io::{load_curve, load_edge_list, load_plan, save_edge_list, save_plan};
use dismantle::spectral::{hpi_ncut, Deflation, SpectralConfig};
use dismantle::strategies::CoreDegree;
use dismantle::{Error, Graph};

/// Network dismantling experiments: attack plans, GCC-vs-cost curves,
/// cost-fragmentation scores and SIR spreading.
#[derive(Parser)]
#[command(name = "dismantle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Build a removal plan for a graph.
    Attack(AttackArgs),
    /// Execute a plan and write the GCC-vs-cost curve.
    Curve(CurveArgs),
    /// Area under a curve, optionally against a baseline.
    Cfe(CfeArgs),
    /// Mean SIR trace, optionally after removing part of a plan.
    Sir(SirArgs),
    /// Run a full benchmark from a TOML config.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Er,
    Sf,
    Sbm,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, conflicts_with = "spec")]
    kind: Option<Kind>,
    /// TOML file holding a generator spec (`kind = "er"`, ...).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 4.0)]
    mean_degree: f64,
    /// Degree exponent of the scale-free model.
    #[arg(long, default_value_t = 2.5)]
    gamma: f64,
    /// Number of equal blocks of the block model.
    #[arg(long, default_value_t = 10)]
    blocks: usize,
    /// p_in / p_out of the block model.
    #[arg(long, default_value_t = DEFAULT_SBM_RATIO)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep only the largest connected component.
    #[arg(long)]
    gcc: bool,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyName {
    Site,
    Bond,
    Hd,
    Hda,
    Ci,
    Corehd,
    Betweenness,
    HpiNcut,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankBy {
    Residual,
    CoreInternal,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeflationArg {
    DegreeWeighted,
    Uniform,
}

#[derive(Args)]
struct AttackArgs {
    /// Edge-list file.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, value_enum)]
    strategy: StrategyName,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Collective-influence ball radius.
    #[arg(long, default_value_t = DEFAULT_CI_RADIUS)]
    radius: usize,
    #[arg(long, value_enum, default_value = "residual")]
    rank_by: RankBy,
    /// Re-rank edge betweenness after this many removals.
    #[arg(long)]
    recompute_interval: Option<usize>,
    /// Spectral attack: stop once the GCC is below this fraction.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Spectral attack: stop once this fraction of edges is removed.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    eta: Option<usize>,
    #[arg(long, default_value_t = 2)]
    k_per_level: usize,
    #[arg(long)]
    balanced: bool,
    #[arg(long, value_enum, default_value = "degree-weighted")]
    deflation: DeflationArg,
    /// Run on the largest connected component only.
    #[arg(long)]
    gcc: bool,
    #[arg(long, short)]
    out: PathBuf,
    /// Also write the spectral partition tree, one record per line.
    #[arg(long)]
    tree: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Must match the flag used for `attack`.
    #[arg(long)]
    gcc: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CfeArgs {
    /// Curve CSV (`x,f` or `x,f_mean,f_std`).
    curve: PathBuf,
    /// Baseline curve; prints the improvement over it.
    #[arg(long)]
    baseline: Option<PathBuf>,
}

#[derive(Args)]
struct SirArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.10)]
    beta: f64,
    #[arg(long, default_value_t = 0.02)]
    gamma: f64,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Randomly chosen initially infected nodes per run.
    #[arg(long, default_value_t = 1, conflicts_with = "seed_nodes")]
    infected: usize,
    /// Fixed initially infected nodes (dense indices).
    #[arg(long, value_delimiter = ',')]
    seed_nodes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1000)]
    max_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Plan whose leading edges are removed before spreading.
    #[arg(long, requires = "remove_fraction")]
    plan: Option<PathBuf>,
    /// Fraction of all edges to remove, taken in plan order.
    #[arg(long)]
    remove_fraction: Option<f64>,
    #[arg(long)]
    gcc: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run configuration (TOML).
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Attack(a) => attack(a),
        Command::Curve(a) => curve(a),
        Command::Cfe(a) => cfe_cmd(a),
        Command::Sir(a) => sir(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for configuration mistakes, 3 for bad input data, 4 for numerical
/// trouble.
fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::InvalidParam(_) | Error::Config(_) => 2,
        Error::NumericalFailure(_) | Error::GenerationFailure(_) | Error::ZeroBaseline => 4,
        _ => 3,
    }
}

fn config_err(message: impl Into<String>) -> Error {
    Error::Config(message.into())
}

fn print_json(value: &serde_json::Value) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{}", serde_json::to_string_pretty(value)?) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load(path: &Path, gcc: bool) -> Result<Graph, Error> {
    let (g, _) = load_edge_list(path)?;
    Ok(if gcc { g.extract_gcc() } else { g })
}

fn generate(a: GenerateArgs) -> Result<(), Error> {
    let spec = match (a.kind, &a.spec) {
        (_, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
            toml::from_str::<GenSpec>(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
        }
        (Some(Kind::Er), None) => GenSpec::Er {
            n: a.n,
            mean_degree: a.mean_degree,
            seed: a.seed,
        },
        (Some(Kind::Sf), None) => GenSpec::Sf {
            n: a.n,
            gamma: a.gamma,
            mean_degree: a.mean_degree,
            seed: a.seed,
        },
        (Some(Kind::Sbm), None) => GenSpec::SbmTuned {
            n: a.n,
            blocks: a.blocks,
            mean_degree: a.mean_degree,
            ratio: a.ratio,
            seed: a.seed,
        },
        (None, None) => return Err(config_err("either --kind or --spec is required")),
    };
    let resolved = spec.resolve()?;
    let mut g = resolved.generate()?;
    if a.gcc {
        g = g.extract_gcc();
    }
    save_edge_list(&g, &a.out)?;
    let summary = serde_json::json!({
        "generator": resolved,
        "nodes": g.n(),
        "edges": g.m(),
        "mean_degree": g.mean_degree(),
        "gcc_fraction": g.gcc_fraction(),
        "output": a.out,
    });
    print_json(&summary)?;
    Ok(())
}

fn strategy_spec(a: &AttackArgs) -> StrategySpec {
    match a.strategy {
        StrategyName::Site => StrategySpec::Site { runs: 1 },
        StrategyName::Bond => StrategySpec::Bond { runs: 1 },
        StrategyName::Hd => StrategySpec::Hd,
        StrategyName::Hda => StrategySpec::Hda,
        StrategyName::Ci => StrategySpec::Ci { radius: a.radius },
        StrategyName::Corehd => StrategySpec::Corehd {
            rank_by: match a.rank_by {
                RankBy::Residual => CoreDegree::Residual,
                RankBy::CoreInternal => CoreDegree::CoreInternal,
            },
        },
        StrategyName::Betweenness => StrategySpec::Betweenness {
            recompute_interval: a.recompute_interval,
        },
        StrategyName::HpiNcut => StrategySpec::HpiNcut(spectral_config(a)),
    }
}

fn spectral_config(a: &AttackArgs) -> SpectralConfig {
    SpectralConfig {
        eta_override: a.eta,
        gcc_threshold: a.threshold,
        budget: a.budget,
        k_per_level: a.k_per_level,
        balanced: a.balanced,
        deflation: match a.deflation {
            DeflationArg::DegreeWeighted => Deflation::DegreeWeighted,
            DeflationArg::Uniform => Deflation::Uniform,
        },
        seed: a.seed,
        ..Default::default()
    }
}

fn attack(a: AttackArgs) -> Result<(), Error> {
    let g = load(&a.input, a.gcc)?;
    let (plan, fallbacks) = if matches!(a.strategy, StrategyName::HpiNcut) {
        let cfg = spectral_config(&a);
        cfg.validate()?;
        let (tree, plan) = hpi_ncut(&g, &cfg)?;
        if let Some(path) = &a.tree {
            let mut buf = Vec::new();
            tree.write_records(&mut buf)?;
            fs::write(path, buf).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        }
        (plan, Some(tree.fallbacks()))
    } else {
        if a.tree.is_some() {
            return Err(config_err("--tree only applies to hpi-ncut"));
        }
        let attack = build_attack(&g, &strategy_spec(&a), a.seed, a.threshold, a.budget)?;
        (attack.plan, None)
    };
    save_plan(&plan, &a.out)?;
    let summary = serde_json::json!({
        "strategy": strategy_spec(&a),
        "batches": plan.len(),
        "removed_edges": plan.removed_edges(),
        "total_edges": plan.total_edges,
        "fallbacks": fallbacks,
        "output": a.out,
    });
    print_json(&summary)?;
    Ok(())
}

fn curve(a: CurveArgs) -> Result<(), Error> {
    let g = load(&a.input, a.gcc)?;
    let plan = load_plan(&a.plan, g.m())?;
    if plan.total_edges != g.m() {
        return Err(Error::Parse {
            path: a.plan.clone(),
            line: 1,
            message: format!("plan was built for {} edges, graph has {}", plan.total_edges, g.m()),
        });
    }
    let curve = execute_plan(&g, &plan, a.threshold)?;
    match &a.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
            curve.write_csv(io::BufWriter::new(file))?;
            println!("{}", cfe(&curve));
        }
        None => curve.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn cfe_cmd(a: CfeArgs) -> Result<(), Error> {
    let f = cfe(&load_curve(&a.curve)?);
    match &a.baseline {
        None => println!("{f}"),
        Some(path) => {
            let f_star = cfe(&load_curve(path)?);
            let summary = serde_json::json!({
                "cfe": f,
                "baseline_cfe": f_star,
                "improvement": improvement(f_star, f)?,
                "gap": f_star - f,
            });
            print_json(&summary)?;
        }
    }
    Ok(())
}

fn sir(a: SirArgs) -> Result<(), Error> {
    let mut g = load(&a.input, a.gcc)?;
    if let (Some(path), Some(fraction)) = (&a.plan, a.remove_fraction) {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(config_err(format!("--remove-fraction must lie in [0, 1], got {fraction}")));
        }
        let plan = load_plan(path, g.m())?;
        g.remove_edges(&plan.edge_prefix(fraction))?;
    } else if a.remove_fraction.is_some() {
        return Err(config_err("--remove-fraction needs --plan"));
    }
    let params = SirParams {
        beta: a.beta,
        gamma: a.gamma,
        initial_infected: match a.seed_nodes {
            Some(nodes) => InitialInfected::Nodes(nodes),
            None => InitialInfected::Random(a.infected),
        },
        max_steps: a.max_steps,
        seed: a.seed,
    };
    let mean = sir_ensemble(&g, &params, a.runs)?;
    match &a.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
            mean.write_csv(io::BufWriter::new(file))?;
            let summary = serde_json::json!({
                "runs": a.runs,
                "reproduction_number": params.reproduction_number(),
                "initial_infected": params.initial_infected,
                "final_attack_size": mean.final_attack_size(),
                "peak_time": mean.peak_time(),
                "gcc_fraction": g.gcc_fraction(),
            });
            print_json(&summary)?;
        }
        None => mean.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<(), Error> {
    let mut config = RunConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(dir) = a.output_dir {
        config.output_dir = Some(dir);
    }
    let report = run_benchmark(&config)?;
    io::stdout().lock().write_all(report.table().as_bytes())?;
    Ok(())
}
