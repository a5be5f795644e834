use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A ranking of all `L` items: slot `k` holds item `item_at(k)`.
///
/// Only the first `K` slots are shown to the user; the rest exist so that every
/// action is a full permutation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Action {
    slots: Vec<usize>,
    positions: Vec<usize>,
}

impl Action {
    /// Builds an action from the item placed in each slot (0-based ids).
    pub fn new(slots: Vec<usize>) -> Result<Self> {
        let len = slots.len();
        let mut positions = vec![usize::MAX; len];
        for (k, &item) in slots.iter().enumerate() {
            if item >= len || positions[item] != usize::MAX {
                return Err(Error::Precondition(format!(
                    "slots {slots:?} are not a permutation of 0..{len}"
                )));
            }
            positions[item] = k;
        }
        Ok(Self { slots, positions })
    }

    /// Builds an action from 1-based item ids, as typed by a user.
    pub fn from_one_based(items: &[usize]) -> Result<Self> {
        let slots = items
            .iter()
            .map(|&i| {
                i.checked_sub(1)
                    .ok_or_else(|| Error::Precondition("item ids are 1-based".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(slots)
    }

    pub fn identity(len: usize) -> Self {
        let slots: Vec<usize> = (0..len).collect();
        Self {
            positions: slots.clone(),
            slots,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Item shown in slot `k`.
    pub fn item_at(&self, k: usize) -> usize {
        self.slots[k]
    }

    /// Slot holding `item` (the inverse permutation).
    pub fn position_of(&self, item: usize) -> usize {
        self.positions[item]
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    /// The action with items `i` and `j` exchanged and everything else in place.
    pub fn swap_items(&self, i: usize, j: usize) -> Self {
        let mut out = self.clone();
        let (pi, pj) = (self.positions[i], self.positions[j]);
        out.slots.swap(pi, pj);
        out.positions[i] = pj;
        out.positions[j] = pi;
        out
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.slots.iter().map(|&i| i + 1).collect()
    }
}

impl TryFrom<Vec<usize>> for Action {
    type Error = Error;

    fn try_from(slots: Vec<usize>) -> Result<Self> {
        Self::new(slots)
    }
}

impl From<Action> for Vec<usize> {
    fn from(a: Action) -> Self {
        a.slots
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, item) in self.slots.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", item + 1)?;
        }
        write!(f, ")")
    }
}

/// Binary click indicators indexed by item identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickVector {
    clicks: Vec<bool>,
}

impl ClickVector {
    pub fn none(len: usize) -> Self {
        Self {
            clicks: vec![false; len],
        }
    }

    pub fn from_items(len: usize, clicked: &[usize]) -> Self {
        let mut out = Self::none(len);
        for &i in clicked {
            out.clicks[i] = true;
        }
        out
    }

    pub fn len(&self) -> usize {
        self.clicks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clicks.is_empty()
    }

    pub fn get(&self, item: usize) -> bool {
        self.clicks[item]
    }

    /// Click indicator as an integer, `C_i ∈ {0, 1}`.
    pub fn indicator(&self, item: usize) -> i64 {
        i64::from(self.clicks[item])
    }

    pub fn set(&mut self, item: usize) {
        self.clicks[item] = true;
    }

    pub fn count(&self) -> usize {
        self.clicks.iter().filter(|&&c| c).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.clicks
    }
}

/// Calls `f` on every permutation of `0..len` in lexicographic order.
pub(crate) fn for_each_permutation(len: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..len).collect();
    loop {
        f(&perm);
        // next lexicographic permutation
        let Some(pivot) = (1..len).rev().find(|&p| perm[p - 1] < perm[p]) else {
            return;
        };
        let pivot = pivot - 1;
        let succ = (pivot + 1..len)
            .rev()
            .find(|&s| perm[s] > perm[pivot])
            .unwrap();
        perm.swap(pivot, succ);
        perm[pivot + 1..].reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_permutations() {
        assert!(Action::new(vec![0, 0, 1]).is_err());
        assert!(Action::new(vec![0, 3, 1]).is_err());
        assert!(Action::from_one_based(&[0, 1]).is_err());
    }

    #[test]
    fn inverse_is_consistent() {
        let a = Action::from_one_based(&[3, 1, 2]).unwrap();
        for i in 0..3 {
            assert_eq!(a.item_at(a.position_of(i)), i);
        }
        assert_eq!(a.to_string(), "(3,1,2)");
    }

    #[test]
    fn swap_exchanges_only_the_two_items() {
        let a = Action::new(vec![2, 0, 1, 3]).unwrap();
        let b = a.swap_items(2, 3);
        assert_eq!(b.slots(), &[3, 0, 1, 2]);
        assert_eq!(b.position_of(3), 0);
        assert_eq!(b.position_of(2), 3);
        assert_eq!(b.swap_items(2, 3), a);
    }

    #[test]
    fn enumerates_all_permutations_once() {
        let mut seen = std::collections::HashSet::new();
        for_each_permutation(4, |p| {
            assert!(seen.insert(p.to_vec()));
        });
        assert_eq!(seen.len(), 24);
        let mut count = 0;
        for_each_permutation(0, |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn serde_validates() {
        let a: Action = serde_json::from_str("[1,0,2]").unwrap();
        assert_eq!(a.position_of(0), 1);
        assert!(serde_json::from_str::<Action>("[1,1]").is_err());
    }
}
