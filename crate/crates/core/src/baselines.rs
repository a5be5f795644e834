//! Agents that can be run against a click model: TopRank itself behind the
//! common interface, plus the reference baselines.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::env::{sort_by_attractiveness, Action, ClickModel, ClickVector};
use crate::error::{Error, Result};
use crate::toprank::{Partition, TopRank};

/// A ranking policy that sees only its own past actions and clicks.
pub trait Agent {
    fn name(&self) -> &'static str;

    /// The ranking for the next round.
    fn act(&mut self, rng: &mut dyn RngCore) -> Action;

    /// Feedback for the action returned by the preceding [`act`](Agent::act).
    fn observe(&mut self, action: &Action, clicks: &ClickVector) -> Result<()>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    TopRank,
    Oracle,
    Random,
    KlUcb,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [Self::TopRank, Self::Oracle, Self::Random, Self::KlUcb];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::TopRank => "toprank",
            AgentKind::Oracle => "oracle",
            AgentKind::Random => "random",
            AgentKind::KlUcb => "klucb",
        }
    }

    /// Instantiates the agent for `model`. Only the oracle reads the model's
    /// attractiveness; the others only learn its dimensions.
    pub fn build(self, model: &ClickModel, delta: f64) -> Result<Box<dyn Agent + Send>> {
        let (l, k) = (model.num_items(), model.num_slots());
        Ok(match self {
            AgentKind::TopRank => Box::new(TopRankAgent::new(TopRank::new(l, k, delta)?)),
            AgentKind::Oracle => Box::new(OracleAgent::new(model)),
            AgentKind::Random => Box::new(RandomAgent::new(l)),
            AgentKind::KlUcb => Box::new(CascadeKlUcb::new(l, k)?),
        })
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown agent `{s}`")))
    }
}

/// TopRank behind the [`Agent`] interface; remembers the round's partition
/// between `act` and `observe`.
#[derive(Clone, Debug)]
pub struct TopRankAgent {
    state: TopRank,
    pending: Option<Partition>,
}

impl TopRankAgent {
    pub fn new(state: TopRank) -> Self {
        Self {
            state,
            pending: None,
        }
    }

    pub fn state(&self) -> &TopRank {
        &self.state
    }

    /// Partition used by the last `act`, until it is observed.
    pub fn pending_partition(&self) -> Option<&Partition> {
        self.pending.as_ref()
    }

    pub fn into_state(self) -> TopRank {
        self.state
    }
}

impl Agent for TopRankAgent {
    fn name(&self) -> &'static str {
        "toprank"
    }

    fn act(&mut self, rng: &mut dyn RngCore) -> Action {
        let partition = self.state.partition();
        let action = self.state.choose_action(&partition, rng);
        self.pending = Some(partition);
        action
    }

    fn observe(&mut self, action: &Action, clicks: &ClickVector) -> Result<()> {
        let partition = self
            .pending
            .take()
            .ok_or_else(|| Error::Precondition("observe without a preceding act".into()))?;
        self.state.update(&partition, action, clicks).map(drop)
    }
}

/// Always plays the attractiveness-sorted list.
#[derive(Clone, Debug)]
pub struct OracleAgent {
    action: Action,
}

impl OracleAgent {
    pub fn new(model: &ClickModel) -> Self {
        Self {
            action: sort_by_attractiveness(model.alpha()),
        }
    }
}

impl Agent for OracleAgent {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn act(&mut self, _rng: &mut dyn RngCore) -> Action {
        self.action.clone()
    }

    fn observe(&mut self, _action: &Action, _clicks: &ClickVector) -> Result<()> {
        Ok(())
    }
}

/// A uniformly random permutation every round.
#[derive(Clone, Debug)]
pub struct RandomAgent {
    items: usize,
}

impl RandomAgent {
    pub fn new(items: usize) -> Self {
        Self { items }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &'static str {
        "random"
    }

    fn act(&mut self, rng: &mut dyn RngCore) -> Action {
        let mut slots: Vec<usize> = (0..self.items).collect();
        slots.shuffle(rng);
        Action::new(slots).expect("shuffled identity")
    }

    fn observe(&mut self, _action: &Action, _clicks: &ClickVector) -> Result<()> {
        Ok(())
    }
}

/// Plays one fixed action forever.
#[derive(Clone, Debug)]
pub struct FixedAgent {
    action: Action,
}

impl FixedAgent {
    pub fn new(action: Action) -> Self {
        Self { action }
    }
}

impl Agent for FixedAgent {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn act(&mut self, _rng: &mut dyn RngCore) -> Action {
        self.action.clone()
    }

    fn observe(&mut self, _action: &Action, _clicks: &ClickVector) -> Result<()> {
        Ok(())
    }
}

const KL_UCB_PRECISION: f64 = 1e-9;
const KL_UCB_MAX_ITERS: usize = 100;

/// Cascade KL-UCB: ranks items by the KL upper confidence bound on their
/// attraction probability, learning from the cascade view of each round
/// (every slot up to and including the first click was examined).
#[derive(Clone, Debug)]
pub struct CascadeKlUcb {
    slots: usize,
    clicks: Vec<u64>,
    displays: Vec<u64>,
    round: u64,
}

impl CascadeKlUcb {
    pub fn new(items: usize, slots: usize) -> Result<Self> {
        if slots == 0 || slots > items {
            return Err(Error::Precondition(format!(
                "need 1 <= K <= L, got K = {slots}, L = {items}"
            )));
        }
        Ok(Self {
            slots,
            clicks: vec![0; items],
            displays: vec![0; items],
            round: 0,
        })
    }

    pub fn clicks(&self) -> &[u64] {
        &self.clicks
    }

    pub fn displays(&self) -> &[u64] {
        &self.displays
    }

    /// Upper confidence index of `item` in round `t` (1-based).
    pub fn index(&self, item: usize, t: u64) -> f64 {
        let shown = self.displays[item];
        if shown == 0 {
            return 1.0;
        }
        let mean = self.clicks[item] as f64 / shown as f64;
        kl_ucb_index(mean, shown, exploration_budget(t))
    }

    /// Items ranked by decreasing index at round `t`, ties by ascending id.
    pub fn ranking(&self, t: u64) -> Action {
        let scores: Vec<f64> = (0..self.clicks.len()).map(|i| self.index(i, t)).collect();
        sort_by_attractiveness(&scores)
    }
}

impl Agent for CascadeKlUcb {
    fn name(&self) -> &'static str {
        "klucb"
    }

    fn act(&mut self, _rng: &mut dyn RngCore) -> Action {
        self.ranking(self.round + 1)
    }

    fn observe(&mut self, action: &Action, clicks: &ClickVector) -> Result<()> {
        if action.len() != self.clicks.len() || clicks.len() != self.clicks.len() {
            return Err(Error::DimensionMismatch(format!(
                "KL-UCB over {} items",
                self.clicks.len()
            )));
        }
        let first_click = (0..self.slots).find(|&k| clicks.get(action.item_at(k)));
        let examined = first_click.map_or(self.slots, |k| k + 1);
        for k in 0..examined {
            self.displays[action.item_at(k)] += 1;
        }
        if let Some(k) = first_click {
            self.clicks[action.item_at(k)] += 1;
        }
        self.round += 1;
        Ok(())
    }
}

/// `ln t + 3 ln ln t`, with `ln ln t` floored at zero.
pub fn exploration_budget(t: u64) -> f64 {
    let log_t = (t.max(1) as f64).ln();
    let log_log_t = if log_t > 1.0 { log_t.ln() } else { 0.0 };
    log_t + 3.0 * log_log_t
}

/// Bernoulli relative entropy `KL(p || q)`.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let term = |x: f64, y: f64| {
        if x == 0.0 {
            0.0
        } else if y == 0.0 {
            f64::INFINITY
        } else {
            x * (x / y).ln()
        }
    };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Largest `q in [mean, 1]` with `count * KL(mean, q) <= budget`, by bisection.
pub fn kl_ucb_index(mean: f64, count: u64, budget: f64) -> f64 {
    let level = budget / count as f64;
    if bernoulli_kl(mean, 1.0) <= level {
        return 1.0;
    }
    let (mut lo, mut hi) = (mean, 1.0);
    for _ in 0..KL_UCB_MAX_ITERS {
        if hi - lo < KL_UCB_PRECISION {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if bernoulli_kl(mean, mid) > level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}
