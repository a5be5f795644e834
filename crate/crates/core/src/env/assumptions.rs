//! Exhaustive verification of the four modelling assumptions on small instances.
//!
//! * A1: `v(a, k) = 0` for every slot `k > K`.
//! * A2: the attractiveness-sorted list attains the maximum expected clicks.
//! * A3: for `alpha(i) >= alpha(j)` and `sigma` exchanging `i` and `j`,
//!   `v(a, a^-1(i)) >= alpha(i)/alpha(j) * v(sigma a, a^-1(i))`. Checked in the
//!   multiplied-out form `alpha(j) v(a, p) >= alpha(i) v(sigma a, p)`, which
//!   stays defined when `alpha(j) = 0`.
//! * A4: for every action `a`, every optimal action `a*` and every slot `k` with
//!   `alpha(a(k)) = alpha(a*(k))`, `v(a, k) >= v(a*, k)`. An action is optimal
//!   when each of its first `K` slots holds the most attractive remaining item.

use serde::Serialize;

use super::action::{for_each_permutation, Action};
use super::model::{check_enumerable, ClickModel};
use crate::error::Result;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Counterexamples stored per assumption; further violations are only counted.
const STORED_PER_ASSUMPTION: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Assumption {
    A1,
    A2,
    A3,
    A4,
}

impl Assumption {
    pub const ALL: [Assumption; 4] = [Self::A1, Self::A2, Self::A3, Self::A4];

    fn index(self) -> usize {
        self as usize
    }
}

/// One violated inequality `lhs >= rhs - tol`. Items, slots and actions are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub assumption: Assumption,
    pub action: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub items: Option<(usize, usize)>,
    /// The comparison action: the sorted list for A2, the optimal action for A4.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<usize>>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub family: String,
    pub tolerance: f64,
    pub actions_checked: usize,
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
    /// Violation counts per assumption, including those not stored.
    pub violations: [usize; 4],
    pub counterexamples: Vec<Counterexample>,
}

impl AssumptionReport {
    pub fn passed(&self, which: Assumption) -> bool {
        self.violations[which.index()] == 0
    }

    pub fn all_passed(&self) -> bool {
        Assumption::ALL.iter().all(|&a| self.passed(a))
    }

    pub fn counterexamples_for(&self, which: Assumption) -> impl Iterator<Item = &Counterexample> {
        self.counterexamples
            .iter()
            .filter(move |c| c.assumption == which)
    }

    fn record(&mut self, c: Counterexample) {
        let idx = c.assumption.index();
        if self.violations[idx] < STORED_PER_ASSUMPTION {
            self.counterexamples.push(c);
        }
        self.violations[idx] += 1;
    }
}

/// Checks all four assumptions by enumerating the `L!` actions (`L <= 7`).
pub fn check_assumptions(model: &ClickModel, tol: f64) -> Result<AssumptionReport> {
    let l = model.num_items();
    check_enumerable(l)?;
    let k_max = model.num_slots();
    let alpha = model.alpha();

    let mut actions = Vec::new();
    for_each_permutation(l, |p| {
        actions.push(Action::new(p.to_vec()).expect("enumerated permutation"))
    });
    let probs: Vec<Vec<f64>> = actions
        .iter()
        .map(|a| (0..l).map(|k| model.prob_at(a, k)).collect())
        .collect();
    let index_of = |a: &Action| -> usize {
        // lexicographic rank, matching the enumeration order
        let mut rank = 0;
        let mut used = 0u32;
        for (k, &item) in a.slots().iter().enumerate() {
            let smaller_unused = (0..item).filter(|&x| used & (1 << x) == 0).count();
            rank += smaller_unused * factorial(l - 1 - k);
            used |= 1 << item;
        }
        rank
    };

    let mut report = AssumptionReport {
        family: model.family().to_string(),
        tolerance: tol,
        actions_checked: actions.len(),
        a1: true,
        a2: true,
        a3: true,
        a4: true,
        violations: [0; 4],
        counterexamples: Vec::new(),
    };

    // A1
    for (a, v) in actions.iter().zip(&probs) {
        for (k, &p) in v.iter().enumerate().skip(k_max) {
            if p.abs() > tol {
                report.record(Counterexample {
                    assumption: Assumption::A1,
                    action: a.to_one_based(),
                    position: Some(k + 1),
                    items: None,
                    reference: None,
                    lhs: 0.0,
                    rhs: p,
                });
            }
        }
    }

    // A2
    let sorted = model.optimal_action();
    let sorted_value: f64 = probs[index_of(&sorted)][..k_max].iter().sum();
    let (best_idx, best_value) = probs
        .iter()
        .map(|v| v[..k_max].iter().sum::<f64>())
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    if sorted_value < best_value - tol {
        report.record(Counterexample {
            assumption: Assumption::A2,
            action: actions[best_idx].to_one_based(),
            position: None,
            items: None,
            reference: Some(sorted.to_one_based()),
            lhs: sorted_value,
            rhs: best_value,
        });
    }

    // A3
    for (a, v) in actions.iter().zip(&probs) {
        for i in 0..l {
            for j in 0..l {
                if i == j || alpha[i] < alpha[j] {
                    continue;
                }
                let p = a.position_of(i);
                let swapped = &probs[index_of(&a.swap_items(i, j))];
                let lhs = alpha[j] * v[p];
                let rhs = alpha[i] * swapped[p];
                if lhs < rhs - tol {
                    report.record(Counterexample {
                        assumption: Assumption::A3,
                        action: a.to_one_based(),
                        position: Some(p + 1),
                        items: Some((i + 1, j + 1)),
                        reference: None,
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }

    // A4: per slot and per item at that slot, the largest click probability
    // over optimal actions; every action showing an equally attractive item
    // there must reach it.
    let optimal: Vec<usize> = (0..actions.len())
        .filter(|&idx| is_optimal(&actions[idx], alpha, k_max, tol))
        .collect();
    let mut ceiling: Vec<Vec<Option<(f64, usize)>>> = vec![vec![None; l]; k_max];
    for &idx in &optimal {
        for (k, slot) in ceiling.iter_mut().enumerate() {
            let entry = &mut slot[actions[idx].item_at(k)];
            let v = probs[idx][k];
            if entry.is_none_or(|(best, _)| v > best) {
                *entry = Some((v, idx));
            }
        }
    }
    for (a, v) in actions.iter().zip(&probs) {
        for (k, slot) in ceiling.iter().enumerate() {
            let shown = alpha[a.item_at(k)];
            for (item, entry) in slot.iter().enumerate() {
                let Some((target, opt_idx)) = *entry else {
                    continue;
                };
                if (alpha[item] - shown).abs() <= tol && v[k] < target - tol {
                    report.record(Counterexample {
                        assumption: Assumption::A4,
                        action: a.to_one_based(),
                        position: Some(k + 1),
                        items: None,
                        reference: Some(actions[opt_idx].to_one_based()),
                        lhs: v[k],
                        rhs: target,
                    });
                }
            }
        }
    }

    report.a1 = report.passed(Assumption::A1);
    report.a2 = report.passed(Assumption::A2);
    report.a3 = report.passed(Assumption::A3);
    report.a4 = report.passed(Assumption::A4);
    Ok(report)
}

fn is_optimal(a: &Action, alpha: &[f64], k_max: usize, tol: f64) -> bool {
    (0..k_max).all(|k| {
        let here = alpha[a.item_at(k)];
        a.slots()[k..].iter().all(|&i| alpha[i] <= here + tol)
    })
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn cascade_passes() {
        let m = ClickModel::cascade(vec![0.9, 0.5, 0.1], 2).unwrap();
        let r = check_assumptions(&m, DEFAULT_TOLERANCE).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(r.actions_checked, 6);
    }

    #[test]
    fn document_based_passes_with_ties() {
        let m = ClickModel::document_based(vec![0.4, 0.7, 0.4, 0.0, 1.0], 3).unwrap();
        assert!(check_assumptions(&m, DEFAULT_TOLERANCE)
            .unwrap()
            .all_passed());
    }

    #[test]
    fn decreasing_chi_position_based_passes() {
        let m = ClickModel::position_based(vec![0.3, 0.8, 0.5, 0.6], vec![1.0, 0.7, 0.4]).unwrap();
        assert!(check_assumptions(&m, DEFAULT_TOLERANCE)
            .unwrap()
            .all_passed());
    }

    #[test]
    fn increasing_chi_breaks_the_sorted_optimum() {
        // v(a, k) = alpha(a(k)) chi(k) depends on the action only through the
        // item in slot k, so the slot-wise comparisons of A3 and A4 hold with
        // equality; what fails is that the sorted list is not the best one.
        let m = ClickModel::position_based(vec![0.9, 0.5], vec![0.2, 0.9]).unwrap();
        let r = check_assumptions(&m, DEFAULT_TOLERANCE).unwrap();
        assert!(!r.all_passed());
        assert!(!r.a2);
        let c = r.counterexamples_for(Assumption::A2).next().unwrap();
        assert_eq!(c.action, vec![2, 1]);
        assert!((c.lhs - 0.63).abs() < 1e-12 && (c.rhs - 0.91).abs() < 1e-12);
        assert!(r.a1 && r.a3 && r.a4);
    }

    #[test]
    fn detects_examination_that_rewards_bad_prefixes() {
        // Factored model whose second slot is examined more when the top item
        // is attractive: the optimal list maximizes examination below it,
        // which violates A4 (and A3).
        let alpha = vec![0.9, 0.6, 0.3];
        let m = ClickModel::factored(alpha, 2, |mask, pos| match pos {
            0 => 1.0,
            _ if mask & 1 != 0 => 1.0,
            _ => 0.5,
        })
        .unwrap();
        let r = check_assumptions(&m, DEFAULT_TOLERANCE).unwrap();
        assert!(!r.a4);
        let c = r.counterexamples_for(Assumption::A4).next().unwrap();
        assert!(c.lhs < c.rhs);
    }

    #[test]
    fn factored_cascade_passes() {
        let alpha = vec![0.7, 0.2, 0.5, 0.9];
        let a2 = alpha.clone();
        let m = ClickModel::factored(alpha, 3, move |mask, _| {
            (0..4)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| 1.0 - a2[i])
                .product()
        })
        .unwrap();
        assert!(check_assumptions(&m, DEFAULT_TOLERANCE)
            .unwrap()
            .all_passed());
    }

    #[test]
    fn too_many_items() {
        let m = ClickModel::document_based(vec![0.5; 8], 2).unwrap();
        assert!(matches!(
            check_assumptions(&m, DEFAULT_TOLERANCE),
            Err(Error::Capacity {
                limit: 7,
                got: 8,
                ..
            })
        ));
    }
}
