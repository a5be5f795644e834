//! The TopRank learner.
//!
//! Each round the items are partitioned by topological sort of the relation
//! `G`, a ranking is drawn uniformly among those that keep every block on its
//! slot range, and for every pair of items sharing a block the click
//! difference `C_i - C_j` is accumulated. Once `S_ij` reaches the
//! self-normalized boundary `sqrt(2 N_ij ln(c sqrt(N_ij) / delta))` the edge
//! `(j, i)` ("j is less attractive than i") enters `G` for good.

mod partition;
mod stats;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Action, ClickModel, ClickVector};
use crate::error::{Error, Result};

pub use partition::{compute_partition, Partition, RelationGraph};
pub use stats::PairStats;

/// `c = 4 sqrt(2/pi) / erf(sqrt(2))`, roughly 3.3437.
pub fn confidence_constant() -> f64 {
    4.0 * (2.0 / std::f64::consts::PI).sqrt() / libm::erf(std::f64::consts::SQRT_2)
}

/// Edge-admission boundary `sqrt(2 N ln((c / delta) sqrt(N)))`; undefined for `N = 0`.
pub fn edge_threshold(count: u64, delta: f64, c: f64) -> Option<f64> {
    if count == 0 {
        return None;
    }
    let n = count as f64;
    Some((2.0 * n * ((c / delta) * n.sqrt()).ln()).sqrt())
}

/// A pair admitted to `G`: `worse` is believed less attractive than `better`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub worse: usize,
    pub better: usize,
}

/// Outcome of one round of [`TopRank::step`].
#[derive(Clone, Debug)]
pub struct Step {
    pub action: Action,
    pub clicks: ClickVector,
    /// Expected regret of the chosen action, `optimal_value - list_value`.
    pub regret: f64,
    pub admitted: Vec<Edge>,
}

#[derive(Clone, Debug)]
pub struct TopRank {
    graph: RelationGraph,
    stats: PairStats,
    delta: f64,
    c: f64,
    slots: usize,
    round: u64,
    cycle_events: u64,
    thresholds: Vec<f64>,
}

impl TopRank {
    pub fn new(items: usize, slots: usize, delta: f64) -> Result<Self> {
        if items == 0 || slots == 0 || slots > items {
            return Err(Error::Precondition(format!(
                "need 1 <= K <= L, got K = {slots}, L = {items}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Precondition(format!(
                "delta = {delta} must lie in (0, 1)"
            )));
        }
        Ok(Self {
            graph: RelationGraph::new(items),
            stats: PairStats::new(items),
            delta,
            c: confidence_constant(),
            slots,
            round: 0,
            cycle_events: 0,
            thresholds: vec![f64::NAN],
        })
    }

    /// The default confidence parameter `delta = 1/n` for a known horizon.
    pub fn default_delta(horizon: u64) -> f64 {
        1.0 / horizon.max(2) as f64
    }

    pub fn num_items(&self) -> usize {
        self.graph.num_items()
    }

    pub fn num_slots(&self) -> usize {
        self.slots
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn graph(&self) -> &RelationGraph {
        &self.graph
    }

    pub fn stats(&self) -> &PairStats {
        &self.stats
    }

    /// Rounds completed so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Rounds whose partition needed the cycle fallback.
    pub fn cycle_events(&self) -> u64 {
        self.cycle_events
    }

    pub fn partition(&self) -> Partition {
        compute_partition(&self.graph)
    }

    pub fn choose_action<R: Rng + ?Sized>(&self, partition: &Partition, rng: &mut R) -> Action {
        partition.sample_action(self.slots, rng)
    }

    /// Folds the clicks of one round into the pair statistics and admits every
    /// pair that crossed the boundary. Returns the newly admitted edges.
    pub fn update(
        &mut self,
        partition: &Partition,
        action: &Action,
        clicks: &ClickVector,
    ) -> Result<Vec<Edge>> {
        let l = self.num_items();
        if partition.num_items() != l || action.len() != l || clicks.len() != l {
            return Err(Error::DimensionMismatch(format!(
                "learner over {l} items, got partition {}, action {}, clicks {}",
                partition.num_items(),
                action.len(),
                clicks.len()
            )));
        }
        if let Some(k) = (self.slots..l).find(|&k| clicks.get(action.item_at(k))) {
            return Err(Error::Precondition(format!(
                "click on item {} at hidden slot {}",
                action.item_at(k) + 1,
                k + 1
            )));
        }

        let mut touched = Vec::new();
        for (d, block) in partition.blocks().iter().enumerate() {
            if partition.slot_range(d).start >= self.slots {
                // nothing below is shown, so every U is zero
                break;
            }
            for (x, &i) in block.iter().enumerate() {
                for &j in &block[x + 1..] {
                    let u = clicks.indicator(i) - clicks.indicator(j);
                    if u != 0 {
                        self.stats.record(i, j, u);
                        touched.push((i, j));
                    }
                }
            }
        }

        // Untouched pairs keep their statistics, so only touched pairs can
        // newly cross the boundary.
        let mut admitted = Vec::new();
        for (i, j) in touched {
            let threshold = self.threshold(self.stats.count(i, j));
            let s = self.stats.sum(i, j) as f64;
            let edge = if s >= threshold {
                Edge {
                    worse: j,
                    better: i,
                }
            } else if -s >= threshold {
                Edge {
                    worse: i,
                    better: j,
                }
            } else {
                continue;
            };
            if self.graph.insert(edge.worse, edge.better) {
                admitted.push(edge);
            }
        }

        if partition.cycle_fallback() {
            self.cycle_events += 1;
        }
        self.round += 1;
        Ok(admitted)
    }

    /// One full round against `model`: partition, act, observe, learn.
    pub fn step<R: Rng + ?Sized>(&mut self, model: &ClickModel, rng: &mut R) -> Result<Step> {
        if model.num_items() != self.num_items() || model.num_slots() != self.slots {
            return Err(Error::DimensionMismatch(format!(
                "learner has L = {}, K = {}; model has L = {}, K = {}",
                self.num_items(),
                self.slots,
                model.num_items(),
                model.num_slots()
            )));
        }
        let partition = self.partition();
        let action = self.choose_action(&partition, rng);
        let clicks = model.sample_clicks(&action, rng);
        let admitted = self.update(&partition, &action, &clicks)?;
        let regret = model.optimal_value() - model.list_value(&action);
        Ok(Step {
            action,
            clicks,
            regret,
            admitted,
        })
    }

    fn threshold(&mut self, count: u64) -> f64 {
        let n = count as usize;
        while self.thresholds.len() <= n {
            let next = self.thresholds.len() as u64;
            self.thresholds
                .push(edge_threshold(next, self.delta, self.c).expect("count is positive"));
        }
        self.thresholds[n]
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            items: self.num_items(),
            slots: self.slots,
            delta: self.delta,
            round: self.round,
            cycle_events: self.cycle_events,
            edges: self
                .graph
                .edges()
                .iter()
                .map(|&(w, b)| [w + 1, b + 1])
                .collect(),
            pairs: self
                .stats
                .nonzero_pairs()
                .map(|(i, j, sum, count)| PairEntry {
                    i: i + 1,
                    j: j + 1,
                    sum,
                    count,
                })
                .collect(),
        }
    }

    pub fn from_snapshot(snapshot: &Snapshot) -> Result<Self> {
        let mut state = Self::new(snapshot.items, snapshot.slots, snapshot.delta)?;
        let one_based = |x: usize| {
            x.checked_sub(1)
                .filter(|&v| v < snapshot.items)
                .ok_or_else(|| Error::Precondition(format!("item id {x} out of range")))
        };
        for &[w, b] in &snapshot.edges {
            state.graph.try_insert(one_based(w)?, one_based(b)?)?;
        }
        for p in &snapshot.pairs {
            let (i, j) = (one_based(p.i)?, one_based(p.j)?);
            if i >= j || p.sum.unsigned_abs() > p.count {
                return Err(Error::Precondition(format!(
                    "invalid pair entry ({}, {}): S = {}, N = {}",
                    p.i, p.j, p.sum, p.count
                )));
            }
            state.stats.set(i, j, p.sum, p.count);
        }
        state.round = snapshot.round;
        state.cycle_events = snapshot.cycle_events;
        Ok(state)
    }
}

/// JSON export of a learner: edges as 1-based `[worse, better]`, and the upper
/// triangle of the pair statistics restricted to pairs with `N > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub items: usize,
    pub slots: usize,
    pub delta: f64,
    pub round: u64,
    pub cycle_events: u64,
    pub edges: Vec<[usize; 2]>,
    pub pairs: Vec<PairEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEntry {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "S")]
    pub sum: i64,
    #[serde(rename = "N")]
    pub count: u64,
}
