use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::toprank::confidence_constant;

/// Inputs of the gap-dependent regret bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub alpha: Vec<f64>,
    pub slots: usize,
    pub horizon: u64,
    pub delta: f64,
}

fn check_common(slots: usize, items: usize, horizon: u64, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!(
            "delta = {delta} must lie in (0, 1)"
        )));
    }
    if horizon == 0 || items == 0 || slots == 0 || slots > items {
        return Err(Error::Precondition(format!(
            "need n >= 1 and 1 <= K <= L, got n = {horizon}, K = {slots}, L = {items}"
        )));
    }
    Ok(())
}

/// Gap-dependent upper bound on the n-step regret of TopRank:
///
/// `delta n K L^2 + sum_j sum_{i <= min(K, j-1)} (1 + 6 (a_i + a_j) ln(c sqrt(n) / delta) / (a_i - a_j))`
///
/// with items labelled by decreasing attractiveness. `alpha` may be given in
/// any order; it is sorted first. A zero gap between two pairs entering the
/// sum is a precondition error.
pub fn theorem1_bound(inputs: &BoundInputs) -> Result<f64> {
    let l = inputs.alpha.len();
    let k = inputs.slots;
    check_common(k, l, inputs.horizon, inputs.delta)?;
    let mut alpha = inputs.alpha.clone();
    alpha.sort_by(|a, b| b.total_cmp(a));

    let n = inputs.horizon as f64;
    let log_term = (confidence_constant() * n.sqrt() / inputs.delta).ln();
    let mut total = inputs.delta * n * (k * l * l) as f64;
    for j in 0..l {
        for i in 0..k.min(j) {
            let gap = alpha[i] - alpha[j];
            if gap <= 0.0 {
                return Err(Error::Precondition(format!(
                    "items {} and {} have equal attractiveness {}",
                    i + 1,
                    j + 1,
                    alpha[i]
                )));
            }
            total += 1.0 + 6.0 * (alpha[i] + alpha[j]) * log_term / gap;
        }
    }
    Ok(total)
}

/// Gap-free upper bound `delta n K L^2 + K L + sqrt(4 K^3 L n ln(c sqrt(n) / delta))`.
pub fn theorem1_minimax_bound(slots: usize, items: usize, horizon: u64, delta: f64) -> Result<f64> {
    check_common(slots, items, horizon, delta)?;
    let (k, l, n) = (slots as f64, items as f64, horizon as f64);
    let log_term = (confidence_constant() * n.sqrt() / delta).ln();
    Ok(delta * n * k * l * l + k * l + (4.0 * k.powi(3) * l * n * log_term).sqrt())
}

/// Minimax lower bound `sqrt(K L n) / (16 sqrt 2)`.
pub fn theorem2_lower_bound(slots: usize, items: usize, horizon: u64) -> f64 {
    ((slots * items) as f64 * horizon as f64).sqrt() / (16.0 * std::f64::consts::SQRT_2)
}
