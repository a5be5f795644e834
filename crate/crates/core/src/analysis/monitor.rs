//! Simulator-side monitors for a TopRank run: wrong edges entering `G` and the
//! position of the best item of each block.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::binomial_ci;
use crate::env::ClickModel;
use crate::error::{Error, Result};
use crate::rng::{episode_streams, with_pool};
use crate::toprank::{Edge, Partition, TopRank};

/// An edge is wrong when its `worse` item is strictly more attractive than
/// its `better` item. Ties are never wrong.
pub fn is_wrong(alpha: &[f64], edge: Edge) -> bool {
    alpha[edge.worse] > alpha[edge.better]
}

/// Tracks the first round in which a wrong edge was admitted.
#[derive(Clone, Debug)]
pub struct WrongEdgeMonitor {
    alpha: Vec<f64>,
    first: Option<(u64, Edge)>,
}

impl WrongEdgeMonitor {
    pub fn new(alpha: &[f64]) -> Self {
        Self {
            alpha: alpha.to_vec(),
            first: None,
        }
    }

    /// Feeds the edges admitted in (1-based) round `round`.
    pub fn observe(&mut self, round: u64, admitted: &[Edge]) {
        if self.first.is_none() {
            if let Some(&e) = admitted.iter().find(|&&e| is_wrong(&self.alpha, e)) {
                self.first = Some((round, e));
            }
        }
    }

    pub fn fired(&self) -> bool {
        self.first.is_some()
    }

    pub fn first(&self) -> Option<(u64, Edge)> {
        self.first
    }
}

/// First (1-based) round whose admitted edges contain a wrong one.
pub fn first_wrong_edge(alpha: &[f64], history: &[Vec<Edge>]) -> Option<u64> {
    let mut monitor = WrongEdgeMonitor::new(alpha);
    for (t, admitted) in history.iter().enumerate() {
        monitor.observe(t as u64 + 1, admitted);
    }
    monitor.first().map(|(t, _)| t)
}

/// Blocks `d` whose best item sits too low: with items ranked
/// `1 + #{j : alpha(j) > alpha(i)}`, the best rank in block `d` must not
/// exceed `1 + sum_{c<d} |P_c|`. Only meaningful while `G` has no wrong edge.
pub fn leader_violations(alpha: &[f64], partition: &Partition) -> Vec<usize> {
    let rank = |i: usize| 1 + alpha.iter().filter(|&&a| a > alpha[i]).count();
    let mut above = 0;
    let mut bad = Vec::new();
    for (d, block) in partition.blocks().iter().enumerate() {
        let best = block.iter().map(|&i| rank(i)).min().unwrap_or(usize::MAX);
        if best > 1 + above {
            bad.push(d);
        }
        above += block.len();
    }
    bad
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitoredRun {
    pub seed: u64,
    /// 1-based round of the first wrong edge.
    pub wrong_edge_round: Option<u64>,
    /// Rounds without a wrong edge in which some block leader sat too low.
    pub leader_violations: u64,
    pub cycle_events: u64,
    pub edges: usize,
    pub regret: f64,
}

/// Runs TopRank for `horizon` rounds with the same random streams as the
/// harness, checking both monitors every round.
pub fn monitor_toprank(
    model: &ClickModel,
    horizon: u64,
    delta: f64,
    seed: u64,
) -> Result<MonitoredRun> {
    let mut state = TopRank::new(model.num_items(), model.num_slots(), delta)?;
    let (mut agent_rng, mut env_rng) = episode_streams(seed);
    let alpha = model.alpha();
    let optimum = model.optimal_value();
    let mut monitor = WrongEdgeMonitor::new(alpha);
    let mut leader = 0;
    let mut regret = 0.0;
    for t in 1..=horizon {
        let partition = state.partition();
        if !monitor.fired() && !leader_violations(alpha, &partition).is_empty() {
            leader += 1;
        }
        let action = state.choose_action(&partition, &mut agent_rng);
        let clicks = model.sample_clicks(&action, &mut env_rng);
        let admitted = state.update(&partition, &action, &clicks)?;
        monitor.observe(t, &admitted);
        regret += optimum - model.list_value(&action);
    }
    Ok(MonitoredRun {
        seed,
        wrong_edge_round: monitor.first().map(|(t, _)| t),
        leader_violations: leader,
        cycle_events: state.cycle_events(),
        edges: state.graph().len(),
        regret,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WrongEdgeSummary {
    pub runs: u64,
    pub fired: u64,
    pub frequency: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// `delta L^2`.
    pub bound: f64,
    pub leader_violations: u64,
    pub cycle_events: u64,
    pub mean_regret: f64,
}

impl WrongEdgeSummary {
    /// The observed frequency is consistent with the bound once the 99%
    /// interval slack is allowed.
    pub fn pass(&self) -> bool {
        self.ci_lower <= self.bound && self.leader_violations == 0
    }
}

/// Monitors seeds `base_seed .. base_seed + runs` in parallel.
pub fn verify_wrong_edges(
    model: &ClickModel,
    horizon: u64,
    delta: f64,
    runs: u64,
    base_seed: u64,
) -> Result<(WrongEdgeSummary, Vec<MonitoredRun>)> {
    if runs == 0 {
        return Err(Error::Precondition("at least one run is required".into()));
    }
    let results = with_pool(|| {
        (0..runs)
            .into_par_iter()
            .map(|r| monitor_toprank(model, horizon, delta, base_seed.wrapping_add(r)))
            .collect::<Result<Vec<_>>>()
    })?;
    let fired = results
        .iter()
        .filter(|r| r.wrong_edge_round.is_some())
        .count() as u64;
    let (ci_lower, ci_upper) = binomial_ci(fired, runs);
    let l = model.num_items() as f64;
    let summary = WrongEdgeSummary {
        runs,
        fired,
        frequency: fired as f64 / runs as f64,
        ci_lower,
        ci_upper,
        bound: delta * l * l,
        leader_violations: results.iter().map(|r| r.leader_violations).sum(),
        cycle_events: results.iter().map(|r| r.cycle_events).sum(),
        mean_regret: results.iter().map(|r| r.regret).sum::<f64>() / runs as f64,
    };
    Ok((summary, results))
}
