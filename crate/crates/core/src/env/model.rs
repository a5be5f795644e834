use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::action::{for_each_permutation, Action, ClickVector};
use crate::error::{Error, Result};

/// Largest item count for which a factored examination table is materialized.
pub const MAX_FACTORED_ITEMS: usize = 16;

/// Largest item count for exhaustive enumeration over all `L!` actions.
pub const MAX_ENUMERATION_ITEMS: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[serde(rename = "dbm")]
    DocumentBased,
    #[serde(rename = "pbm")]
    PositionBased,
    Cascade,
    Factored,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::DocumentBased => "dbm",
            Family::PositionBased => "pbm",
            Family::Cascade => "cascade",
            Family::Factored => "factored",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Examination {
    /// Every shown slot is examined.
    Shown,
    /// `chi[k]` for slot `k < K`.
    Position(Vec<f64>),
    /// Examined iff every item above was not clicked.
    Cascade,
    /// Indexed by the bitmask of the items placed above the slot.
    PrefixTable(Vec<f64>),
}

/// A stochastic click model `v(a, k)` over `L` items with `K` shown slots.
///
/// All families factor as attractiveness times examination. The stored
/// `alpha` is the attractiveness used by the learner-independent checks; the
/// checks only depend on ratios and ties of `alpha`, so it need not be
/// normalized by the examination of the top slot.
#[derive(Clone, Debug, PartialEq)]
pub struct ClickModel {
    alpha: Vec<f64>,
    k: usize,
    examination: Examination,
}

impl ClickModel {
    /// Clicks at shown slots are independent Bernoulli(`alpha`) draws.
    pub fn document_based(alpha: Vec<f64>, k: usize) -> Result<Self> {
        Self::build(alpha, k, Examination::Shown)
    }

    /// Slot `k` is examined with probability `chi[k]`; `K = chi.len()`.
    pub fn position_based(alpha: Vec<f64>, chi: Vec<f64>) -> Result<Self> {
        check_unit_interval("chi", &chi)?;
        let k = chi.len();
        Self::build(alpha, k, Examination::Position(chi))
    }

    /// The user scans top-down and clicks the first attractive item.
    pub fn cascade(alpha: Vec<f64>, k: usize) -> Result<Self> {
        Self::build(alpha, k, Examination::Cascade)
    }

    /// Generic factored model `v(a, k) = alpha(a(k)) chi(S, k)` where `S` is the
    /// unordered set of items above slot `k`, given as a bitmask. The slot is
    /// implied by `S` (it equals `S.count_ones()`) and is passed for convenience.
    pub fn factored(
        alpha: Vec<f64>,
        k: usize,
        mut chi: impl FnMut(u32, usize) -> f64,
    ) -> Result<Self> {
        let l = alpha.len();
        if l > MAX_FACTORED_ITEMS {
            return Err(Error::Capacity {
                what: "factored examination table",
                limit: MAX_FACTORED_ITEMS,
                got: l,
            });
        }
        let table: Vec<f64> = (0..1u32 << l)
            .map(|mask| chi(mask, mask.count_ones() as usize))
            .collect();
        check_unit_interval("chi", &table)?;
        Self::build(alpha, k, Examination::PrefixTable(table))
    }

    fn build(alpha: Vec<f64>, k: usize, examination: Examination) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidModel("no items".into()));
        }
        check_unit_interval("alpha", &alpha)?;
        if k == 0 || k > alpha.len() {
            return Err(Error::InvalidModel(format!(
                "K = {k} must satisfy 1 <= K <= L = {}",
                alpha.len()
            )));
        }
        Ok(Self {
            alpha,
            k,
            examination,
        })
    }

    pub fn family(&self) -> Family {
        match self.examination {
            Examination::Shown => Family::DocumentBased,
            Examination::Position(_) => Family::PositionBased,
            Examination::Cascade => Family::Cascade,
            Examination::PrefixTable(_) => Family::Factored,
        }
    }

    pub fn num_items(&self) -> usize {
        self.alpha.len()
    }

    pub fn num_slots(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Examination probabilities of a position-based model.
    pub fn chi(&self) -> Option<&[f64]> {
        match &self.examination {
            Examination::Position(chi) => Some(chi),
            _ => None,
        }
    }

    /// Exact click probability `v(a, k)` at 0-based slot `k`.
    pub fn click_prob(&self, a: &Action, k: usize) -> Result<f64> {
        self.check_action(a)?;
        if k >= a.len() {
            return Err(Error::PositionOutOfRange {
                position: k + 1,
                len: a.len(),
            });
        }
        Ok(self.prob_at(a, k))
    }

    pub(crate) fn prob_at(&self, a: &Action, k: usize) -> f64 {
        if k >= self.k {
            return 0.0;
        }
        let attraction = self.alpha[a.item_at(k)];
        match &self.examination {
            Examination::Shown => attraction,
            Examination::Position(chi) => attraction * chi[k],
            Examination::Cascade => {
                attraction
                    * a.slots()[..k]
                        .iter()
                        .map(|&i| 1.0 - self.alpha[i])
                        .product::<f64>()
            }
            Examination::PrefixTable(table) => {
                let mask = a.slots()[..k].iter().fold(0usize, |m, &i| m | 1 << i);
                attraction * table[mask]
            }
        }
    }

    /// Expected number of clicks on `a`, `sum_{k <= K} v(a, k)`.
    pub fn list_value(&self, a: &Action) -> f64 {
        match &self.examination {
            Examination::Cascade => {
                let mut unclicked = 1.0;
                let mut value = 0.0;
                for &i in &a.slots()[..self.k] {
                    value += unclicked * self.alpha[i];
                    unclicked *= 1.0 - self.alpha[i];
                }
                value
            }
            _ => (0..self.k).map(|k| self.prob_at(a, k)).sum(),
        }
    }

    /// Items sorted by decreasing attractiveness, ties by ascending id.
    pub fn optimal_action(&self) -> Action {
        sort_by_attractiveness(&self.alpha)
    }

    /// `max_a sum_{k <= K} v(a, k)`, evaluated at the attractiveness-sorted list.
    pub fn optimal_value(&self) -> f64 {
        self.list_value(&self.optimal_action())
    }

    /// The maximum list value over all `L!` actions and one action attaining it.
    pub fn brute_force_optimum(&self) -> Result<(f64, Action)> {
        let l = self.num_items();
        check_enumerable(l)?;
        let mut best = (f64::NEG_INFINITY, Action::identity(l));
        for_each_permutation(l, |p| {
            let a = Action::new(p.to_vec()).expect("enumerated permutation");
            let v = self.list_value(&a);
            if v > best.0 {
                best = (v, a);
            }
        });
        Ok(best)
    }

    /// Draws one click vector for action `a`.
    ///
    /// Document-based, position-based and factored models click each shown
    /// slot independently; the cascade model scans top-down and stops at the
    /// first click. Slots beyond `K` are never clicked.
    pub fn sample_clicks<R: Rng + ?Sized>(&self, a: &Action, rng: &mut R) -> ClickVector {
        let mut clicks = ClickVector::none(a.len());
        match &self.examination {
            Examination::Cascade => {
                for &i in &a.slots()[..self.k] {
                    if rng.random::<f64>() < self.alpha[i] {
                        clicks.set(i);
                        break;
                    }
                }
            }
            _ => {
                for k in 0..self.k {
                    if rng.random::<f64>() < self.prob_at(a, k) {
                        clicks.set(a.item_at(k));
                    }
                }
            }
        }
        clicks
    }

    pub(crate) fn check_action(&self, a: &Action) -> Result<()> {
        if a.len() != self.num_items() {
            return Err(Error::DimensionMismatch(format!(
                "action over {} items, model over {}",
                a.len(),
                self.num_items()
            )));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        file.try_into()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// The on-disk description; factored models have no file representation.
    pub fn to_file(&self) -> Result<ModelFile> {
        let family = match self.family() {
            Family::Factored => {
                return Err(Error::InvalidModel(
                    "factored models cannot be serialized".into(),
                ))
            }
            f => f,
        };
        Ok(ModelFile {
            family,
            alpha: self.alpha.clone(),
            k: self.k,
            chi: self.chi().map(<[f64]>::to_vec),
        })
    }
}

/// JSON model description: `{"family": "cascade"|"pbm"|"dbm", "alpha": [..], "K": int, "chi": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub family: Family,
    pub alpha: Vec<f64>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<Vec<f64>>,
}

impl TryFrom<ModelFile> for ClickModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        match (file.family, file.chi) {
            (Family::PositionBased, Some(chi)) => {
                if chi.len() != file.k {
                    return Err(Error::InvalidModel(format!(
                        "chi has {} entries, K = {}",
                        chi.len(),
                        file.k
                    )));
                }
                ClickModel::position_based(file.alpha, chi)
            }
            (Family::PositionBased, None) => Err(Error::InvalidModel("pbm requires chi".into())),
            (_, Some(_)) => Err(Error::InvalidModel("chi is only valid for pbm".into())),
            (Family::DocumentBased, None) => ClickModel::document_based(file.alpha, file.k),
            (Family::Cascade, None) => ClickModel::cascade(file.alpha, file.k),
            (Family::Factored, None) => Err(Error::InvalidModel(
                "factored models cannot be read from a file".into(),
            )),
        }
    }
}

pub(crate) fn sort_by_attractiveness(alpha: &[f64]) -> Action {
    let mut items: Vec<usize> = (0..alpha.len()).collect();
    items.sort_by(|&i, &j| alpha[j].total_cmp(&alpha[i]).then(i.cmp(&j)));
    Action::new(items).expect("sorted ids form a permutation")
}

pub(crate) fn check_enumerable(l: usize) -> Result<()> {
    if l > MAX_ENUMERATION_ITEMS {
        return Err(Error::Capacity {
            what: "exhaustive enumeration over actions",
            limit: MAX_ENUMERATION_ITEMS,
            got: l,
        });
    }
    Ok(())
}

fn check_unit_interval(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(i) => Err(Error::InvalidModel(format!(
            "{name}[{}] = {} is outside [0, 1]",
            i + 1,
            values[i]
        ))),
        None => Ok(()),
    }
}
