//! Seeded episodes, replicate batches and CSV output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{Agent, AgentKind};
use crate::env::ClickModel;
use crate::error::{Error, Result};
use crate::rng::{episode_streams, with_pool};
use crate::toprank::TopRank;

pub const EPISODE_HEADER: [&str; 3] = ["round", "regret_instant", "regret_cum"];
pub const AGGREGATE_HEADER: [&str; 4] = ["round", "mean_cum_regret", "stderr_cum_regret", "runs"];

/// Number of evenly spaced checkpoints written when no stride is given.
pub const DEFAULT_CHECKPOINTS: u64 = 100;

pub fn default_stride(horizon: u64) -> u64 {
    (horizon / DEFAULT_CHECKPOINTS).max(1)
}

/// Expected regret of one episode, kept for every round.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretTrace {
    pub agent: String,
    pub model: String,
    pub seed: u64,
    pub stride: u64,
    pub instant: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// Realized clicks over the episode, for diagnostics only.
    pub clicks: u64,
}

impl RegretTrace {
    pub fn from_instant(instant: Vec<f64>, stride: u64) -> Self {
        let cumulative = instant
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect();
        Self {
            agent: String::new(),
            model: String::new(),
            seed: 0,
            stride,
            instant,
            cumulative,
            clicks: 0,
        }
    }

    pub fn horizon(&self) -> u64 {
        self.instant.len() as u64
    }

    /// Cumulative regret after round `t` (1-based); zero before the first round.
    pub fn cumulative_at(&self, t: u64) -> f64 {
        match t {
            0 => 0.0,
            t => self.cumulative[t as usize - 1],
        }
    }

    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Logged rounds: multiples of the stride, plus the last round.
    pub fn checkpoints(&self) -> Vec<u64> {
        checkpoints(self.horizon(), self.stride)
    }

    pub fn rows(&self) -> Vec<EpisodeRow> {
        self.checkpoints()
            .into_iter()
            .map(|t| EpisodeRow {
                round: t,
                regret_instant: self.instant[t as usize - 1],
                regret_cum: self.cumulative[t as usize - 1],
            })
            .collect()
    }
}

pub fn checkpoints(horizon: u64, stride: u64) -> Vec<u64> {
    let stride = stride.max(1);
    let mut out: Vec<u64> = (1..=horizon / stride).map(|i| i * stride).collect();
    if horizon > 0 && out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub round: u64,
    pub regret_instant: f64,
    pub regret_cum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub round: u64,
    pub mean_cum_regret: f64,
    pub stderr_cum_regret: f64,
    pub runs: usize,
}

/// Mean and standard error of cumulative regret across replicates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AggregateTrace {
    pub rows: Vec<AggregateRow>,
}

impl AggregateTrace {
    pub fn last(&self) -> Option<&AggregateRow> {
        self.rows.last()
    }
}

/// Runs `agent` against `model` for `horizon` rounds.
///
/// The regret logged each round is the expected one, computed from the exact
/// click probabilities of the chosen list, not from the sampled clicks.
pub fn run_episode(
    model: &ClickModel,
    agent: &mut dyn Agent,
    horizon: u64,
    seed: u64,
    stride: u64,
) -> Result<RegretTrace> {
    let (mut agent_rng, mut env_rng) = episode_streams(seed);
    let optimum = model.optimal_value();
    let mut instant = Vec::with_capacity(horizon as usize);
    let mut clicks_total = 0u64;
    for _ in 0..horizon {
        let action = agent.act(&mut agent_rng);
        model.check_action(&action)?;
        let clicks = model.sample_clicks(&action, &mut env_rng);
        clicks_total += clicks.count() as u64;
        agent.observe(&action, &clicks)?;
        instant.push(optimum - model.list_value(&action));
    }
    let mut trace = RegretTrace::from_instant(instant, stride);
    trace.agent = agent.name().to_string();
    trace.model = model.family().to_string();
    trace.seed = seed;
    trace.clicks = clicks_total;
    Ok(trace)
}

/// Aggregates replicates logged on the same rounds. The standard error is the
/// sample standard deviation over `sqrt(runs)`, and zero for a single run.
pub fn aggregate(traces: &[RegretTrace]) -> Result<AggregateTrace> {
    let Some(first) = traces.first() else {
        return Ok(AggregateTrace::default());
    };
    let rounds = first.checkpoints();
    if traces.iter().any(|t| t.checkpoints() != rounds) {
        return Err(Error::DimensionMismatch(
            "replicates logged on different rounds".into(),
        ));
    }
    let runs = traces.len();
    let rows = rounds
        .into_iter()
        .map(|t| {
            let values: Vec<f64> = traces.iter().map(|tr| tr.cumulative_at(t)).collect();
            let (mean, stderr) = mean_and_stderr(&values);
            AggregateRow {
                round: t,
                mean_cum_regret: mean,
                stderr_cum_regret: stderr,
                runs,
            }
        })
        .collect();
    Ok(AggregateTrace { rows })
}

pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub model: ClickModel,
    pub agent: AgentKind,
    pub horizon: u64,
    pub runs: usize,
    pub base_seed: u64,
    /// TopRank confidence; `1/n` when absent.
    pub delta: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub stride: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(model: ClickModel, agent: AgentKind, horizon: u64) -> Self {
        Self {
            model,
            agent,
            horizon,
            runs: 1,
            base_seed: 0,
            delta: None,
            out_dir: None,
            stride: None,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
            .unwrap_or_else(|| TopRank::default_delta(self.horizon))
    }

    pub fn stride(&self) -> u64 {
        self.stride.unwrap_or_else(|| default_stride(self.horizon))
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.horizon == 0 {
            return Err(Error::Precondition("runs and n must be at least 1".into()));
        }
        if self.stride == Some(0) {
            return Err(Error::Precondition("stride must be positive".into()));
        }
        Ok(())
    }

    /// JSON echo written next to the outputs.
    pub fn echo(&self) -> Result<serde_json::Value> {
        Ok(serde_json::json!({
            "model": self.model.to_file().ok(),
            "model_family": self.model.family().as_str(),
            "agent": self.agent.as_str(),
            "n": self.horizon,
            "runs": self.runs,
            "base_seed": self.base_seed,
            "delta": self.delta(),
            "stride": self.stride(),
        }))
    }
}

/// Runs the replicates `base_seed + r` for `r in 0..runs`, possibly in
/// parallel, and aggregates them in run order. When an output directory is
/// set, writes `episode_<r>.csv`, `aggregate.csv` and `config.json` there.
pub fn run_batch(config: &ExperimentConfig) -> Result<(Vec<RegretTrace>, AggregateTrace)> {
    config.validate()?;
    let delta = config.delta();
    let stride = config.stride();
    let traces: Vec<RegretTrace> = with_pool(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|r| {
                let mut agent = config.agent.build(&config.model, delta)?;
                run_episode(
                    &config.model,
                    agent.as_mut(),
                    config.horizon,
                    config.base_seed.wrapping_add(r as u64),
                    stride,
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let agg = aggregate(&traces)?;
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (r, trace) in traces.iter().enumerate() {
            write_trace(trace, dir.join(format!("episode_{r:03}.csv")))?;
        }
        write_aggregate(&agg, dir.join("aggregate.csv"))?;
        let path = dir.join("config.json");
        let mut text = serde_json::to_string_pretty(&config.echo()?)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok((traces, agg))
}

pub fn write_trace(trace: &RegretTrace, path: impl AsRef<Path>) -> Result<()> {
    write_rows(path.as_ref(), &EPISODE_HEADER, &trace.rows())
}

pub fn write_aggregate(agg: &AggregateTrace, path: impl AsRef<Path>) -> Result<()> {
    write_rows(path.as_ref(), &AGGREGATE_HEADER, &agg.rows)
}

pub fn read_trace_rows(path: impl AsRef<Path>) -> Result<Vec<EpisodeRow>> {
    read_rows(path.as_ref(), &EPISODE_HEADER)
}

pub fn read_aggregate(path: impl AsRef<Path>) -> Result<AggregateTrace> {
    Ok(AggregateTrace {
        rows: read_rows(path.as_ref(), &AGGREGATE_HEADER)?,
    })
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(std::io::BufWriter::new(file));
    writer
        .write_record(header)
        .map_err(|e| Error::csv(path, e))?;
    for row in rows {
        writer.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    let mut inner = writer
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let found = reader.headers().map_err(|e| Error::csv(path, e))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Precondition(format!(
            "{}: unexpected header {:?}",
            path.display(),
            found
        )));
    }
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::csv(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{FixedAgent, OracleAgent};
    use crate::env::Action;

    fn dbm() -> ClickModel {
        ClickModel::document_based(vec![0.9, 0.5], 1).unwrap()
    }

    #[test]
    fn oracle_has_no_regret() {
        let m = ClickModel::cascade(vec![0.3, 0.8, 0.5], 2).unwrap();
        let trace = run_episode(&m, &mut OracleAgent::new(&m), 500, 1, 10).unwrap();
        assert_eq!(trace.final_regret(), 0.0);
    }

    #[test]
    fn always_worst_agent() {
        let mut agent = FixedAgent::new(Action::new(vec![1, 0]).unwrap());
        let trace = run_episode(&dbm(), &mut agent, 100, 3, 1).unwrap();
        assert!((trace.final_regret() - 40.0).abs() < 1e-9);
    }

    #[test]
    fn episodes_are_reproducible() {
        let m = ClickModel::cascade(vec![0.9, 0.6, 0.3, 0.1], 2).unwrap();
        let run = |seed| {
            let mut agent = AgentKind::TopRank.build(&m, 0.01).unwrap();
            run_episode(&m, agent.as_mut(), 2000, seed, 100).unwrap()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7).instant, run(8).instant);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let mut agent = FixedAgent::new(Action::identity(3));
        assert!(matches!(
            run_episode(&dbm(), &mut agent, 1, 0, 1),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn checkpoint_layout() {
        assert_eq!(checkpoints(10, 3), vec![3, 6, 9, 10]);
        assert_eq!(checkpoints(10, 5), vec![5, 10]);
        assert_eq!(checkpoints(0, 5), Vec::<u64>::new());
        assert_eq!(default_stride(100_000), 1000);
        assert_eq!(checkpoints(100_000, default_stride(100_000)).len(), 100);
        assert_eq!(default_stride(50), 1);
    }

    #[test]
    fn aggregate_of_two_runs() {
        let a = RegretTrace::from_instant(vec![1.0, 1.0], 1);
        let b = RegretTrace::from_instant(vec![3.0, 1.0], 1);
        let agg = aggregate(&[a, b]).unwrap();
        let means: Vec<f64> = agg.rows.iter().map(|r| r.mean_cum_regret).collect();
        let errs: Vec<f64> = agg.rows.iter().map(|r| r.stderr_cum_regret).collect();
        assert_eq!(means, vec![2.0, 3.0]);
        // sample sd of {1, 3} is sqrt(2); over sqrt(2) runs gives 1
        assert!(errs.iter().all(|e| (e - 1.0).abs() < 1e-12));
    }

    #[test]
    fn single_run_has_zero_stderr() {
        let mut cfg = ExperimentConfig::new(dbm(), AgentKind::Random, 200);
        cfg.base_seed = 4;
        let (_, agg) = run_batch(&cfg).unwrap();
        assert!(agg
            .rows
            .iter()
            .all(|r| r.stderr_cum_regret == 0.0 && r.runs == 1));
    }

    #[test]
    fn oracle_batch_is_all_zero() {
        let mut cfg = ExperimentConfig::new(dbm(), AgentKind::Oracle, 300);
        cfg.runs = 4;
        let (_, agg) = run_batch(&cfg).unwrap();
        assert!(agg
            .rows
            .iter()
            .all(|r| r.mean_cum_regret == 0.0 && r.stderr_cum_regret == 0.0));
    }

    #[test]
    fn invalid_config() {
        let mut cfg = ExperimentConfig::new(dbm(), AgentKind::Random, 10);
        cfg.runs = 0;
        assert!(run_batch(&cfg).is_err());
    }

    #[test]
    fn empty_trace_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace(&RegretTrace::from_instant(vec![], 1), &path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "round,regret_instant,regret_cum\n"
        );
        assert!(read_trace_rows(&path).unwrap().is_empty());
        let agg_path = dir.path().join("a.csv");
        write_aggregate(&AggregateTrace::default(), &agg_path).unwrap();
        assert_eq!(
            fs::read_to_string(&agg_path).unwrap(),
            "round,mean_cum_regret,stderr_cum_regret,runs\n"
        );
    }

    #[test]
    fn trace_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let trace = RegretTrace::from_instant(vec![0.1, 0.2, 1.0 / 3.0, 0.0, 1e-17], 2);
        write_trace(&trace, &path).unwrap();
        assert_eq!(read_trace_rows(&path).unwrap(), trace.rows());
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = write_trace(
            &RegretTrace::from_instant(vec![1.0], 1),
            "/nonexistent-dir/x/trace.csv",
        )
        .unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x/trace.csv"));
    }
}
