//! `toprank-lab`: experiments and verification checks for TopRank.
//!
//! Exit codes: 0 on success (or a passing check), 1 on a runtime failure or a
//! failing check, 2 on invalid flags.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use toprank_lab::analysis::{
    bias_lower_bound, concentration_mc, make_lowerbound_instance, pairwise_bias_estimate,
    pairwise_bias_exact, random_lowerbound_instance, theorem1_bound, theorem1_minimax_bound,
    theorem2_lower_bound, verify_wrong_edges, BoundInputs, ConcentrationTrialSpec, Increment,
    IncrementLaw, VerificationReport,
};
use toprank_lab::baselines::AgentKind;
use toprank_lab::env::{check_assumptions, ClickModel, DEFAULT_TOLERANCE};
use toprank_lab::harness::{run_batch, ExperimentConfig};
use toprank_lab::rng::trial_stream;
use toprank_lab::toprank::{compute_partition, RelationGraph, Snapshot, TopRank};
use toprank_lab::Error;

#[derive(Parser, Debug)]
#[command(
    name = "toprank-lab",
    version,
    about = "TopRank online learning to rank laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run replicated episodes of one agent and write regret CSVs.
    Run(RunArgs),
    /// Run every combination of models and agents.
    Sweep(SweepArgs),
    /// Exhaustively check the four click-model assumptions (L <= 7).
    CheckAssumptions(CheckArgs),
    /// Monte-Carlo check of the self-normalized concentration boundary.
    VerifyConcentration(ConcentrationArgs),
    /// Estimate the conditional pairwise click bias inside a frozen block.
    VerifyLemma1(Lemma1Args),
    /// Frequency of wrong edges entering G across seeded TopRank runs.
    VerifyWrongEdges(WrongEdgeArgs),
    /// Build a lower-bound instance and optionally run TopRank on it.
    Lowerbound(LowerboundArgs),
    /// Print the blocks induced by a relation G.
    PartitionDemo(PartitionArgs),
    /// Evaluate the regret upper and lower bounds.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelName {
    Dbm,
    Pbm,
    Cascade,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AgentName {
    Toprank,
    Oracle,
    Random,
    Klucb,
}

impl From<AgentName> for AgentKind {
    fn from(a: AgentName) -> Self {
        match a {
            AgentName::Toprank => AgentKind::TopRank,
            AgentName::Oracle => AgentKind::Oracle,
            AgentName::Random => AgentKind::Random,
            AgentName::Klucb => AgentKind::KlUcb,
        }
    }
}

#[derive(Clone, Debug)]
struct Linspace(Vec<f64>);

/// Attractiveness and layout shared by every model-taking subcommand.
#[derive(Args, Debug, Clone)]
struct SpecArgs {
    /// Attractiveness per item, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    /// Linearly spaced attractiveness `hi:lo:L`.
    #[arg(long = "alpha-linspace", value_parser = parse_linspace, conflicts_with = "alpha")]
    alpha_linspace: Option<Linspace>,
    /// Number of shown slots (taken from --chi for pbm).
    #[arg(long = "K", value_parser = parse_usize)]
    k: Option<usize>,
    /// Examination probability per slot (pbm only), comma separated.
    #[arg(long, value_delimiter = ',')]
    chi: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Click model family.
    #[arg(long, value_enum, required_unless_present = "model_file")]
    model: Option<ModelName>,
    /// JSON model description `{"family", "alpha", "K", "chi"}`.
    #[arg(long = "model-file", conflicts_with_all = ["model", "alpha", "alpha_linspace", "k", "chi"])]
    model_file: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Learning agent.
    #[arg(long, value_enum)]
    agent: AgentName,
    /// Horizon.
    #[arg(long, value_parser = parse_u64)]
    n: u64,
    /// Replicates, seeded `seed + r`.
    #[arg(long, default_value = "1", value_parser = parse_usize)]
    runs: usize,
    #[arg(long, default_value = "0", value_parser = parse_u64)]
    seed: u64,
    /// TopRank confidence (default 1/n).
    #[arg(long)]
    delta: Option<f64>,
    /// Output directory for episode and aggregate CSVs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Logging stride (default n/100).
    #[arg(long, value_parser = parse_u64)]
    stride: Option<u64>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Model families, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    models: Vec<ModelName>,
    /// Agents, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    agents: Vec<AgentName>,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_parser = parse_u64)]
    n: u64,
    #[arg(long, default_value = "1", value_parser = parse_usize)]
    runs: usize,
    #[arg(long, default_value = "0", value_parser = parse_u64)]
    seed: u64,
    #[arg(long)]
    delta: Option<f64>,
    /// Each combination writes to `<out>/<model>_<agent>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_u64)]
    stride: Option<u64>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Slack allowed in every inequality.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ConcentrationArgs {
    #[arg(long, value_parser = parse_u64)]
    n: u64,
    #[arg(long, value_parser = parse_u64)]
    trials: u64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value = "0", value_parser = parse_u64)]
    seed: u64,
    /// P(X = 1).
    #[arg(long = "p-up", default_value_t = 0.5)]
    p_up: f64,
    /// P(X = -1).
    #[arg(long = "p-down", default_value_t = 0.5)]
    p_down: f64,
    /// Swap the two probabilities whenever the running sum is negative.
    #[arg(long)]
    adapted: bool,
}

#[derive(Args, Debug)]
struct Lemma1Args {
    #[command(flatten)]
    model: ModelArgs,
    /// First item (1-based).
    #[arg(long, default_value = "1", value_parser = parse_usize)]
    i: usize,
    /// Second item (1-based).
    #[arg(long, default_value = "2", value_parser = parse_usize)]
    j: usize,
    /// Relation freezing the partition, `j>i` pairs (default: one block).
    #[arg(long, default_value = "")]
    edges: String,
    #[arg(long, default_value = "100000", value_parser = parse_u64)]
    samples: u64,
    #[arg(long, default_value = "0", value_parser = parse_u64)]
    seed: u64,
}

#[derive(Args, Debug)]
struct WrongEdgeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_parser = parse_u64)]
    n: u64,
    /// TopRank confidence (default 1/n).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value = "100", value_parser = parse_u64)]
    runs: u64,
    #[arg(long, default_value = "0", value_parser = parse_u64)]
    seed: u64,
}

#[derive(Args, Debug)]
struct LowerboundArgs {
    /// Items per block.
    #[arg(long = "N", value_parser = parse_usize)]
    per_block: usize,
    /// Number of blocks and shown slots.
    #[arg(long = "K", value_parser = parse_usize)]
    k: usize,
    #[arg(long, value_parser = parse_u64)]
    n: u64,
    /// Good item per block (1-based); drawn uniformly when absent.
    #[arg(long, value_delimiter = ',', value_parser = parse_usize)]
    m: Option<Vec<usize>>,
    #[arg(long, default_value = "0", value_parser = parse_u64)]
    seed: u64,
    /// TopRank replicates on the instance (0 skips the runs).
    #[arg(long, default_value = "0", value_parser = parse_usize)]
    runs: usize,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    /// Number of items.
    #[arg(long = "L", value_parser = parse_usize, required_unless_present = "snapshot")]
    l: Option<usize>,
    /// Relation as `j>i` pairs ("j is worse than i"), comma separated.
    #[arg(long, default_value = "", conflicts_with = "snapshot")]
    edges: String,
    /// Learner snapshot (JSON) to partition instead of --L/--edges.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Print one JSON object instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_parser = parse_u64)]
    n: u64,
    /// Confidence (default 1/n).
    #[arg(long)]
    delta: Option<f64>,
}

/// Invalid flag combinations detected after parsing; exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn usage_from(e: Error) -> anyhow::Error {
    usage(e.to_string())
}

fn parse_u64(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("`{s}` is not a nonnegative integer"))
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    parse_u64(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

fn parse_linspace(s: &str) -> Result<Linspace, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [hi, lo, l] = parts[..] else {
        return Err(format!("expected hi:lo:L, got `{s}`"));
    };
    let hi: f64 = hi.parse().map_err(|_| format!("bad hi `{hi}`"))?;
    let lo: f64 = lo.parse().map_err(|_| format!("bad lo `{lo}`"))?;
    let l = parse_usize(l)?;
    if l == 0 {
        return Err("L must be positive".into());
    }
    if l == 1 {
        return Ok(Linspace(vec![hi]));
    }
    let step = (lo - hi) / (l - 1) as f64;
    Ok(Linspace((0..l).map(|i| hi + step * i as f64).collect()))
}

/// `"3>1,5>2"` into 0-based `(worse, better)` pairs.
fn parse_edges(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (worse, better) = pair
                .split_once('>')
                .ok_or_else(|| usage(format!("edge `{pair}` is not of the form j>i")))?;
            let id = |x: &str| -> Result<usize> {
                match x.trim().parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(usage(format!("bad item `{x}` in edge `{pair}`"))),
                }
            };
            Ok((id(worse)?, id(better)?))
        })
        .collect()
}

impl SpecArgs {
    fn alpha(&self) -> Result<Vec<f64>> {
        match (&self.alpha, &self.alpha_linspace) {
            (Some(a), None) => Ok(a.clone()),
            (None, Some(Linspace(a))) => Ok(a.clone()),
            _ => Err(usage("one of --alpha or --alpha-linspace is required")),
        }
    }

    fn build(&self, name: ModelName) -> Result<ClickModel> {
        let alpha = self.alpha()?;
        let model = match name {
            ModelName::Pbm => {
                let chi = self
                    .chi
                    .clone()
                    .ok_or_else(|| usage("--model pbm requires --chi"))?;
                if let Some(k) = self.k.filter(|&k| k != chi.len()) {
                    return Err(usage(format!(
                        "--K {k} disagrees with {} chi entries",
                        chi.len()
                    )));
                }
                ClickModel::position_based(alpha, chi)
            }
            other => {
                if self.chi.is_some() {
                    return Err(usage("--chi is only valid with --model pbm"));
                }
                let k = self.k.ok_or_else(|| usage("--K is required"))?;
                if other == ModelName::Dbm {
                    ClickModel::document_based(alpha, k)
                } else {
                    ClickModel::cascade(alpha, k)
                }
            }
        };
        model.map_err(usage_from)
    }

    fn slots(&self) -> Result<usize> {
        self.k
            .or(self.chi.as_ref().map(Vec::len))
            .ok_or_else(|| usage("--K is required"))
    }
}

impl ModelArgs {
    fn build(&self) -> Result<ClickModel> {
        match (&self.model_file, self.model) {
            (Some(path), _) => ClickModel::load(path).map_err(|e| match e {
                Error::Io { .. } => anyhow::Error::from(e),
                other => usage_from(other),
            }),
            (None, Some(name)) => self.spec.build(name),
            (None, None) => Err(usage("one of --model or --model-file is required")),
        }
    }
}

fn model_name(m: ModelName) -> &'static str {
    match m {
        ModelName::Dbm => "dbm",
        ModelName::Pbm => "pbm",
        ModelName::Cascade => "cascade",
    }
}

fn check_delta(delta: f64) -> Result<f64> {
    if delta > 0.0 && delta < 1.0 {
        Ok(delta)
    } else {
        Err(usage(format!("--delta {delta} must lie in (0, 1)")))
    }
}

fn check_horizon(n: u64) -> Result<u64> {
    if n == 0 {
        Err(usage("--n must be at least 1"))
    } else {
        Ok(n)
    }
}

fn print_line(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn report_exit(report: &VerificationReport) -> Result<ExitCode> {
    println!("{}", report.to_json_line());
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[allow(clippy::too_many_arguments)]
fn batch(
    model: ClickModel,
    agent: AgentKind,
    n: u64,
    runs: usize,
    seed: u64,
    delta: Option<f64>,
    out: Option<PathBuf>,
    stride: Option<u64>,
) -> Result<serde_json::Value> {
    let config = ExperimentConfig {
        runs,
        base_seed: seed,
        delta: delta.map(check_delta).transpose()?,
        out_dir: out.clone(),
        stride,
        ..ExperimentConfig::new(model, agent, check_horizon(n)?)
    };
    config.validate().map_err(usage_from)?;
    let (_, agg) = run_batch(&config)?;
    let last = agg.last().context("no logged rounds")?;
    Ok(json!({
        "agent": agent.as_str(),
        "model": config.model.family().as_str(),
        "L": config.model.num_items(),
        "K": config.model.num_slots(),
        "n": n,
        "runs": runs,
        "seed": seed,
        "delta": config.delta(),
        "final_mean_cum_regret": last.mean_cum_regret,
        "final_stderr_cum_regret": last.stderr_cum_regret,
        "out": out,
    }))
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let model = args.model.build()?;
    let summary = batch(
        model,
        args.agent.into(),
        args.n,
        args.runs,
        args.seed,
        args.delta,
        args.out,
        args.stride,
    )?;
    print_line(&summary)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    // validate every model before running anything
    let models = args
        .models
        .iter()
        .map(|&m| args.spec.build(m).map(|model| (m, model)))
        .collect::<Result<Vec<_>>>()?;
    for (name, model) in models {
        for &agent in &args.agents {
            let agent: AgentKind = agent.into();
            let out = args
                .out
                .as_ref()
                .map(|dir| dir.join(format!("{}_{}", model_name(name), agent.as_str())));
            let summary = batch(
                model.clone(),
                agent,
                args.n,
                args.runs,
                args.seed,
                args.delta,
                out,
                args.stride,
            )?;
            print_line(&summary)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check_assumptions(args: CheckArgs) -> Result<ExitCode> {
    let model = args.model.build()?;
    if args.tol.is_nan() || args.tol < 0.0 {
        return Err(usage("--tol must be nonnegative"));
    }
    let report = check_assumptions(&model, args.tol).map_err(|e| match e {
        Error::Capacity { .. } => usage_from(e),
        other => other.into(),
    })?;
    let violations: usize = report.violations.iter().sum();
    let pass = report.all_passed();
    report_exit(&VerificationReport::new(
        "assumptions",
        json!({
            "model": model.family().as_str(),
            "L": model.num_items(),
            "K": model.num_slots(),
            "report": report,
        }),
        violations as f64,
        0.0,
        pass,
    ))
}

fn cmd_verify_concentration(args: ConcentrationArgs) -> Result<ExitCode> {
    let delta = check_delta(args.delta)?;
    let inc = Increment::new(args.p_up, args.p_down).map_err(usage_from)?;
    let law = if args.adapted {
        let swapped = Increment::new(args.p_down, args.p_up).map_err(usage_from)?;
        IncrementLaw::SignSwitching {
            nonnegative: inc,
            negative: swapped,
        }
    } else {
        IncrementLaw::Iid(inc)
    };
    let spec = ConcentrationTrialSpec {
        horizon: check_horizon(args.n)?,
        law,
        trials: args.trials,
        delta,
    };
    let out = concentration_mc(&spec, args.seed).map_err(usage_from)?;
    report_exit(&VerificationReport::new(
        "concentration",
        json!({
            "n": args.n,
            "trials": out.trials,
            "delta": delta,
            "p_up": args.p_up,
            "p_down": args.p_down,
            "adapted": args.adapted,
            "seed": args.seed,
            "crossings": out.crossings,
            "ci_upper_99": out.ci_upper,
        }),
        out.frequency,
        delta,
        out.frequency <= delta,
    ))
}

fn cmd_verify_lemma1(args: Lemma1Args) -> Result<ExitCode> {
    let model = args.model.build()?;
    let l = model.num_items();
    if args.i == 0 || args.j == 0 || args.i > l || args.j > l || args.i == args.j {
        return Err(usage(format!(
            "--i and --j must be distinct items in 1..={l}"
        )));
    }
    let (i, j) = (args.i - 1, args.j - 1);
    let graph = RelationGraph::from_edges(l, parse_edges(&args.edges)?).map_err(usage_from)?;
    let partition = compute_partition(&graph);
    let mut rng = trial_stream(args.seed, 0);
    let est =
        pairwise_bias_estimate(&model, &partition, i, j, args.samples, &mut rng).map_err(|e| {
            match e {
                Error::Precondition(_) => usage_from(e),
                other => other.into(),
            }
        })?;
    let exact = pairwise_bias_exact(&model, &partition, i, j).ok();
    let alpha = model.alpha();
    // Lemma 1: >= gap / (alpha_i + alpha_j) for the better item, <= 0 for the worse one
    let (bound, pass) = if alpha[i] > alpha[j] {
        let b = bias_lower_bound(alpha, i, j);
        (b, est.mean >= b - 3.0 * est.stderr)
    } else if alpha[i] < alpha[j] {
        (0.0, est.mean <= 3.0 * est.stderr)
    } else {
        (0.0, est.mean.abs() <= 3.0 * est.stderr)
    };
    report_exit(&VerificationReport::new(
        "pairwise_bias",
        json!({
            "model": model.family().as_str(),
            "i": args.i,
            "j": args.j,
            "samples": est.samples,
            "nonzero": est.nonzero,
            "stderr": est.stderr,
            "exact": exact,
            "seed": args.seed,
            "partition": partition.to_string(),
        }),
        est.mean,
        bound,
        pass,
    ))
}

fn cmd_verify_wrong_edges(args: WrongEdgeArgs) -> Result<ExitCode> {
    let model = args.model.build()?;
    let n = check_horizon(args.n)?;
    let delta = check_delta(args.delta.unwrap_or_else(|| TopRank::default_delta(n)))?;
    if args.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let (summary, _) = verify_wrong_edges(&model, n, delta, args.runs, args.seed)?;
    report_exit(&VerificationReport::new(
        "wrong_edges",
        json!({
            "model": model.family().as_str(),
            "L": model.num_items(),
            "K": model.num_slots(),
            "n": n,
            "delta": delta,
            "seed": args.seed,
            "summary": summary,
        }),
        summary.frequency,
        summary.bound,
        summary.pass(),
    ))
}

fn cmd_lowerbound(args: LowerboundArgs) -> Result<ExitCode> {
    let inst = match args.m {
        Some(m) => make_lowerbound_instance(args.per_block, args.k, args.n, m),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            random_lowerbound_instance(args.per_block, args.k, args.n, &mut rng)
        }
    }
    .map_err(usage_from)?;
    let l = inst.num_items();
    let good: Vec<usize> = inst
        .model
        .alpha()
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.5)
        .map(|(i, _)| i + 1)
        .collect();
    let scale = ((args.k * l) as f64 * args.n as f64).sqrt();
    let mut out = json!({
        "N": args.per_block,
        "K": args.k,
        "L": l,
        "n": args.n,
        "m": inst.m,
        "gap": inst.gap,
        "good_items": good,
        "theorem2_lower_bound": theorem2_lower_bound(args.k, l, args.n),
        "sqrt_KLn": scale,
    });
    if args.runs > 0 {
        let summary = batch(
            inst.model.clone(),
            AgentKind::TopRank,
            args.n,
            args.runs,
            args.seed,
            args.delta,
            None,
            None,
        )?;
        let mean = summary["final_mean_cum_regret"]
            .as_f64()
            .unwrap_or(f64::NAN);
        out["toprank_mean_regret"] = summary["final_mean_cum_regret"].clone();
        out["toprank_stderr"] = summary["final_stderr_cum_regret"].clone();
        out["ratio_to_sqrt_KLn"] = json!(mean / scale);
    }
    print_line(&out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_partition_demo(args: PartitionArgs) -> Result<ExitCode> {
    let graph = match &args.snapshot {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let snap: Snapshot = serde_json::from_str(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            TopRank::from_snapshot(&snap)
                .map_err(usage_from)?
                .graph()
                .clone()
        }
        None => {
            let l = args.l.ok_or_else(|| usage("--L is required"))?;
            if l == 0 {
                return Err(usage("--L must be positive"));
            }
            RelationGraph::from_edges(l, parse_edges(&args.edges)?).map_err(usage_from)?
        }
    };
    let partition = compute_partition(&graph);
    if partition.cycle_fallback() {
        eprintln!("warning: G contains a cycle; the remaining items form one fallback block");
    }
    if args.json {
        let one_based = |xs: &mut dyn Iterator<Item = usize>| xs.map(|x| x + 1).collect::<Vec<_>>();
        let blocks: Vec<_> = partition
            .blocks()
            .iter()
            .map(|b| one_based(&mut b.iter().copied()))
            .collect();
        let slots: Vec<_> = (0..partition.num_blocks())
            .map(|d| one_based(&mut partition.slot_range(d)))
            .collect();
        let edges: Vec<[usize; 2]> = graph.edges().iter().map(|&(w, b)| [w + 1, b + 1]).collect();
        print_line(&json!({
            "L": partition.num_items(),
            "edges": edges,
            "blocks": blocks,
            "slots": slots,
            "cycle_fallback": partition.cycle_fallback(),
        }))?;
    } else {
        println!("{partition}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bounds(args: BoundsArgs) -> Result<ExitCode> {
    let alpha = args.spec.alpha()?;
    let k = args.spec.slots()?;
    let n = check_horizon(args.n)?;
    let delta = check_delta(args.delta.unwrap_or_else(|| TopRank::default_delta(n)))?;
    let l = alpha.len();
    let gap_bound = theorem1_bound(&BoundInputs {
        alpha,
        slots: k,
        horizon: n,
        delta,
    });
    let minimax = theorem1_minimax_bound(k, l, n, delta).map_err(usage_from)?;
    let (upper, note) = match gap_bound {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    print_line(&json!({
        "K": k,
        "L": l,
        "n": n,
        "delta": delta,
        "gap_dependent_upper": upper,
        "gap_dependent_note": note,
        "gap_free_upper": minimax,
        "minimax_lower": theorem2_lower_bound(k, l, n),
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::CheckAssumptions(a) => cmd_check_assumptions(a),
        Command::VerifyConcentration(a) => cmd_verify_concentration(a),
        Command::VerifyLemma1(a) => cmd_verify_lemma1(a),
        Command::VerifyWrongEdges(a) => cmd_verify_wrong_edges(a),
        Command::Lowerbound(a) => cmd_lowerbound(a),
        Command::PartitionDemo(a) => cmd_partition_demo(a),
        Command::Bounds(a) => cmd_bounds(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            eprintln!("run with --help for usage");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
