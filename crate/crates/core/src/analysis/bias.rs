//! Conditional bias `E[U_ij | U_ij != 0]` of the pairwise click difference for
//! two items sharing a block of a frozen partition.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{for_each_permutation, Action, ClickModel, Family};
use crate::error::{Error, Result};
use crate::toprank::Partition;

/// Upper limit on the number of actions enumerated by [`pairwise_bias_exact`].
pub const MAX_EXACT_ACTIONS: usize = 1_000_000;

/// Lower bound `(alpha_i - alpha_j) / (alpha_i + alpha_j)` on the bias when
/// `alpha_i >= alpha_j`.
pub fn bias_lower_bound(alpha: &[f64], i: usize, j: usize) -> f64 {
    let total = alpha[i] + alpha[j];
    if total == 0.0 {
        0.0
    } else {
        (alpha[i] - alpha[j]) / total
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Samples with `C_i != C_j`.
    pub nonzero: u64,
    pub samples: u64,
}

fn check_pair(model: &ClickModel, partition: &Partition, i: usize, j: usize) -> Result<()> {
    let l = model.num_items();
    if partition.num_items() != l {
        return Err(Error::DimensionMismatch(format!(
            "partition over {} items, model over {l}",
            partition.num_items()
        )));
    }
    if i >= l || j >= l || i == j {
        return Err(Error::Precondition(format!(
            "need two distinct items in 1..={l}, got {} and {}",
            i + 1,
            j + 1
        )));
    }
    if partition.block_of(i) != partition.block_of(j) {
        return Err(Error::Precondition(format!(
            "items {} and {} are in different blocks",
            i + 1,
            j + 1
        )));
    }
    Ok(())
}

/// Monte-Carlo estimate: each sample draws a fresh uniformly randomized action
/// from the frozen partition and fresh clicks, and keeps `C_i - C_j` when nonzero.
pub fn pairwise_bias_estimate<R: Rng + ?Sized>(
    model: &ClickModel,
    partition: &Partition,
    i: usize,
    j: usize,
    samples: u64,
    rng: &mut R,
) -> Result<BiasEstimate> {
    check_pair(model, partition, i, j)?;
    if samples == 0 {
        return Err(Error::Precondition(
            "at least one sample is required".into(),
        ));
    }
    let mut sum = 0i64;
    let mut nonzero = 0u64;
    for _ in 0..samples {
        let a = partition.sample_action(model.num_slots(), rng);
        let clicks = model.sample_clicks(&a, rng);
        let u = clicks.indicator(i) - clicks.indicator(j);
        if u != 0 {
            sum += u;
            nonzero += 1;
        }
    }
    if nonzero == 0 {
        return Err(Error::UndefinedEstimate);
    }
    let m = nonzero as f64;
    let mean = sum as f64 / m;
    // U is ±1, so the sample variance is (1 - mean^2) m / (m - 1)
    let stderr = if nonzero > 1 {
        ((1.0 - mean * mean).max(0.0) / (m - 1.0)).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(BiasEstimate {
        mean,
        stderr,
        nonzero,
        samples,
    })
}

/// Exact bias by enumerating every action the partition can produce, each
/// equally likely, together with the joint click law of the two items.
pub fn pairwise_bias_exact(
    model: &ClickModel,
    partition: &Partition,
    i: usize,
    j: usize,
) -> Result<f64> {
    check_pair(model, partition, i, j)?;
    let shown = model.num_slots();
    let randomized: Vec<usize> = (0..partition.num_blocks())
        .filter(|&d| partition.slot_range(d).start < shown)
        .collect();
    let total = randomized.iter().try_fold(1usize, |acc, &d| {
        (1..=partition.blocks()[d].len()).try_fold(acc, |a, f| a.checked_mul(f))
    });
    match total {
        Some(t) if t <= MAX_EXACT_ACTIONS => {}
        _ => {
            return Err(Error::Capacity {
                what: "actions enumerated for the exact pairwise bias",
                limit: MAX_EXACT_ACTIONS,
                got: total.unwrap_or(usize::MAX),
            })
        }
    }

    let mut numerator = 0.0;
    let mut denominator = 0.0;
    let mut slots: Vec<usize> = partition.blocks().concat();
    enumerate_blocks(partition, &randomized, 0, &mut slots, &mut |slots| {
        let a = Action::new(slots.to_vec()).expect("block layout is a permutation");
        let pi = model.prob_at(&a, a.position_of(i));
        let pj = model.prob_at(&a, a.position_of(j));
        numerator += pi - pj;
        denominator += match model.family() {
            // at most one click per list
            Family::Cascade => pi + pj,
            _ => pi * (1.0 - pj) + pj * (1.0 - pi),
        };
    });
    if denominator == 0.0 {
        return Err(Error::UndefinedEstimate);
    }
    Ok(numerator / denominator)
}

fn enumerate_blocks(
    partition: &Partition,
    randomized: &[usize],
    depth: usize,
    slots: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    let Some(&d) = randomized.get(depth) else {
        visit(slots);
        return;
    };
    let range = partition.slot_range(d);
    let block = &partition.blocks()[d];
    for_each_permutation(block.len(), |perm| {
        for (offset, &p) in perm.iter().enumerate() {
            slots[range.start + offset] = block[p];
        }
        enumerate_blocks(partition, randomized, depth + 1, slots, visit);
    });
}
