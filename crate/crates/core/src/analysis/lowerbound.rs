//! Hard instances for the minimax lower bound: `K` blocks of `N` items, all
//! with attractiveness 1/2 except one slightly better item per block.

use crate::env::{ClickModel, MAX_ENUMERATION_ITEMS};
use crate::error::{Error, Result};
use rand::Rng;

#[derive(Clone, Debug)]
pub struct LowerBoundInstance {
    /// Items per block.
    pub per_block: usize,
    pub slots: usize,
    pub horizon: u64,
    /// 1-based index of the good item within each block.
    pub m: Vec<usize>,
    pub gap: f64,
    pub model: ClickModel,
}

/// `sqrt(N / (16 (n + K)))`.
pub fn lowerbound_gap(per_block: usize, slots: usize, horizon: u64) -> f64 {
    (per_block as f64 / (16.0 * (horizon as f64 + slots as f64))).sqrt()
}

fn check_sizes(per_block: usize, slots: usize, horizon: u64) -> Result<()> {
    if per_block < 8 {
        return Err(Error::Precondition(format!("need N >= 8, got {per_block}")));
    }
    if slots == 0 {
        return Err(Error::Precondition("need K >= 1".into()));
    }
    if horizon < slots as u64 || horizon < per_block as u64 {
        return Err(Error::Precondition(format!(
            "need n >= K and n >= N, got n = {horizon}, K = {slots}, N = {per_block}"
        )));
    }
    Ok(())
}

/// Builds the document-based instance. Item `i` of block `k` (both 1-based)
/// gets id `(k - 1) N + i`, and its attractiveness is `1/2 + gap` exactly when
/// `m[k] = i`.
pub fn make_lowerbound_instance(
    per_block: usize,
    slots: usize,
    horizon: u64,
    m: Vec<usize>,
) -> Result<LowerBoundInstance> {
    check_sizes(per_block, slots, horizon)?;
    if m.len() != slots {
        return Err(Error::DimensionMismatch(format!(
            "m has {} entries, expected K = {slots}",
            m.len()
        )));
    }
    if let Some(&bad) = m.iter().find(|&&i| i == 0 || i > per_block) {
        return Err(Error::Precondition(format!(
            "m entry {bad} outside 1..={per_block}"
        )));
    }
    let gap = lowerbound_gap(per_block, slots, horizon);
    let mut alpha = vec![0.5; per_block * slots];
    for (k, &i) in m.iter().enumerate() {
        alpha[k * per_block + i - 1] = 0.5 + gap;
    }
    let model = ClickModel::document_based(alpha, slots)?;
    Ok(LowerBoundInstance {
        per_block,
        slots,
        horizon,
        m,
        gap,
        model,
    })
}

/// Same as [`make_lowerbound_instance`] with `m` drawn uniformly from `[N]^K`.
pub fn random_lowerbound_instance<R: Rng + ?Sized>(
    per_block: usize,
    slots: usize,
    horizon: u64,
    rng: &mut R,
) -> Result<LowerBoundInstance> {
    check_sizes(per_block, slots, horizon)?;
    let m = (0..slots)
        .map(|_| rng.random_range(1..=per_block))
        .collect();
    make_lowerbound_instance(per_block, slots, horizon, m)
}

impl LowerBoundInstance {
    pub fn num_items(&self) -> usize {
        self.per_block * self.slots
    }

    /// A document-based model small enough for exhaustive checks: the good
    /// item of block `block` (0-based) and the next `items - 1` items of that
    /// block, shown on `min(K, items)` slots.
    pub fn block_submodel(&self, block: usize, items: usize) -> Result<ClickModel> {
        if block >= self.slots {
            return Err(Error::Precondition(format!(
                "block {} outside 1..={}",
                block + 1,
                self.slots
            )));
        }
        if items == 0 || items > self.per_block.min(MAX_ENUMERATION_ITEMS) {
            return Err(Error::Capacity {
                what: "items in a block submodel",
                limit: self.per_block.min(MAX_ENUMERATION_ITEMS),
                got: items,
            });
        }
        let start = block * self.per_block;
        let good = start + self.m[block] - 1;
        let mut ids = vec![good];
        ids.extend(
            (start..start + self.per_block)
                .filter(|&i| i != good)
                .take(items - 1),
        );
        let alpha = ids.iter().map(|&i| self.model.alpha()[i]).collect();
        ClickModel::document_based(alpha, self.slots.min(items))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gap_and_layout() {
        let inst = make_lowerbound_instance(8, 5, 1000, vec![1, 8, 3, 3, 5]).unwrap();
        assert!((inst.gap - 0.022304986837273527).abs() < 1e-15);
        let alpha = inst.model.alpha();
        assert_eq!(alpha.len(), 40);
        let good: Vec<usize> = (0..40).filter(|&i| alpha[i] > 0.5).collect();
        assert_eq!(good, vec![0, 15, 18, 26, 36]);
        assert!(alpha.iter().all(|&a| a == 0.5 || a == 0.5 + inst.gap));
    }

    #[test]
    fn preconditions() {
        assert!(make_lowerbound_instance(7, 2, 100, vec![1, 1]).is_err());
        assert!(make_lowerbound_instance(8, 2, 7, vec![1, 1]).is_err());
        assert!(make_lowerbound_instance(8, 2, 100, vec![1]).is_err());
        assert!(make_lowerbound_instance(8, 2, 100, vec![0, 1]).is_err());
        assert!(make_lowerbound_instance(8, 2, 100, vec![9, 1]).is_err());
    }

    #[test]
    fn random_instance_has_one_good_item_per_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let inst = random_lowerbound_instance(10, 4, 500, &mut rng).unwrap();
        for k in 0..4 {
            let block = &inst.model.alpha()[k * 10..(k + 1) * 10];
            assert_eq!(block.iter().filter(|&&a| a > 0.5).count(), 1);
        }
    }

    #[test]
    fn submodel_keeps_the_good_item() {
        let inst = make_lowerbound_instance(8, 5, 1000, vec![4, 1, 1, 1, 1]).unwrap();
        let sub = inst.block_submodel(0, 7).unwrap();
        assert_eq!(sub.num_items(), 7);
        assert_eq!(sub.num_slots(), 5);
        assert_eq!(sub.alpha()[0], 0.5 + inst.gap);
        assert!(sub.alpha()[1..].iter().all(|&a| a == 0.5));
        assert!(inst.block_submodel(0, 8).is_err());
    }
}
