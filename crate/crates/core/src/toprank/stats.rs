/// Running pairwise statistics `S_ij = sum_s U_sij` and `N_ij = sum_s |U_sij|`.
///
/// Only pairs `i < j` are stored; `S_ji = -S_ij` and `N_ji = N_ij`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairStats {
    items: usize,
    sums: Vec<i64>,
    counts: Vec<u64>,
}

impl PairStats {
    pub fn new(items: usize) -> Self {
        Self {
            items,
            sums: vec![0; items * items],
            counts: vec![0; items * items],
        }
    }

    pub fn num_items(&self) -> usize {
        self.items
    }

    pub fn sum(&self, i: usize, j: usize) -> i64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.sums[i * self.items + j],
            std::cmp::Ordering::Greater => -self.sums[j * self.items + i],
            std::cmp::Ordering::Equal => 0,
        }
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        if i == j {
            return 0;
        }
        let (lo, hi) = (i.min(j), i.max(j));
        self.counts[lo * self.items + hi]
    }

    /// Adds one nonzero outcome `u = C_i - C_j` for `i < j`.
    pub(crate) fn record(&mut self, i: usize, j: usize, u: i64) {
        debug_assert!(i < j && u != 0);
        let idx = i * self.items + j;
        self.sums[idx] += u;
        self.counts[idx] += u.unsigned_abs();
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, sum: i64, count: u64) {
        debug_assert!(i < j);
        let idx = i * self.items + j;
        self.sums[idx] = sum;
        self.counts[idx] = count;
    }

    /// Pairs `i < j` with at least one nonzero outcome, as `(i, j, S_ij, N_ij)`.
    pub fn nonzero_pairs(&self) -> impl Iterator<Item = (usize, usize, i64, u64)> + '_ {
        let l = self.items;
        (0..l).flat_map(move |i| {
            (i + 1..l).filter_map(move |j| {
                let idx = i * l + j;
                (self.counts[idx] > 0).then(|| (i, j, self.sums[idx], self.counts[idx]))
            })
        })
    }
}
