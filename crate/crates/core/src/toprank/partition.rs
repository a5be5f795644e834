use std::fmt;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::env::Action;
use crate::error::{Error, Result};

/// The relation `G`: a pair `(worse, better)` records evidence that
/// `alpha(worse) < alpha(better)`. Edges are only ever added.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationGraph {
    items: usize,
    adjacency: Vec<bool>,
    edges: Vec<(usize, usize)>,
}

impl RelationGraph {
    pub fn new(items: usize) -> Self {
        Self {
            items,
            adjacency: vec![false; items * items],
            edges: Vec::new(),
        }
    }

    /// Builds a relation from `(worse, better)` pairs of 0-based ids.
    pub fn from_edges(
        items: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut g = Self::new(items);
        for (worse, better) in edges {
            g.try_insert(worse, better)?;
        }
        Ok(g)
    }

    pub fn num_items(&self) -> usize {
        self.items
    }

    pub fn contains(&self, worse: usize, better: usize) -> bool {
        self.adjacency[worse * self.items + better]
    }

    /// Adds `(worse, better)`; returns `false` if it was already present.
    pub fn try_insert(&mut self, worse: usize, better: usize) -> Result<bool> {
        if worse >= self.items || better >= self.items {
            return Err(Error::Precondition(format!(
                "edge ({}, {}) outside items 1..={}",
                worse + 1,
                better + 1,
                self.items
            )));
        }
        if worse == better {
            return Err(Error::Precondition(format!(
                "self-loop on item {}",
                worse + 1
            )));
        }
        Ok(self.insert(worse, better))
    }

    pub(crate) fn insert(&mut self, worse: usize, better: usize) -> bool {
        debug_assert_ne!(worse, better);
        let cell = &mut self.adjacency[worse * self.items + better];
        if *cell {
            return false;
        }
        *cell = true;
        self.edges.push((worse, better));
        true
    }

    /// Edges in admission order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Ordered blocks `P_1, ..., P_d` and their consecutive slot ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    starts: Vec<usize>,
    block_of: Vec<usize>,
    cycle_fallback: bool,
}

impl Partition {
    /// A partition from explicit blocks, each listed in any order.
    pub fn from_blocks(items: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut block_of = vec![usize::MAX; items];
        for (d, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Precondition(format!("block {} is empty", d + 1)));
            }
            for &i in block {
                if i >= items || block_of[i] != usize::MAX {
                    return Err(Error::Precondition(format!(
                        "blocks are not a partition of items 1..={items}"
                    )));
                }
                block_of[i] = d;
            }
        }
        if block_of.contains(&usize::MAX) {
            return Err(Error::Precondition(format!(
                "blocks do not cover items 1..={items}"
            )));
        }
        Ok(Self::assemble(items, blocks, false))
    }

    fn assemble(items: usize, mut blocks: Vec<Vec<usize>>, cycle_fallback: bool) -> Self {
        let mut starts = Vec::with_capacity(blocks.len());
        let mut block_of = vec![0; items];
        let mut offset = 0;
        for (d, block) in blocks.iter_mut().enumerate() {
            block.sort_unstable();
            starts.push(offset);
            offset += block.len();
            for &i in block.iter() {
                block_of[i] = d;
            }
        }
        Self {
            blocks,
            starts,
            block_of,
            cycle_fallback,
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_items(&self) -> usize {
        self.block_of.len()
    }

    /// Slots `I_d` occupied by block `d` (0-based, half-open).
    pub fn slot_range(&self, d: usize) -> Range<usize> {
        self.starts[d]..self.starts[d] + self.blocks[d].len()
    }

    pub fn block_of(&self, item: usize) -> usize {
        self.block_of[item]
    }

    /// True when a cycle in `G` forced the remaining items into one final block.
    pub fn cycle_fallback(&self) -> bool {
        self.cycle_fallback
    }

    /// Draws a ranking uniformly from the actions that respect the blocks.
    ///
    /// Blocks whose slots all lie beyond `shown` are never displayed and are
    /// laid out in ascending item order instead of being shuffled.
    pub fn sample_action<R: Rng + ?Sized>(&self, shown: usize, rng: &mut R) -> Action {
        let mut slots = Vec::with_capacity(self.num_items());
        for (d, block) in self.blocks.iter().enumerate() {
            let start = slots.len();
            slots.extend_from_slice(block);
            if self.starts[d] < shown {
                slots[start..].shuffle(rng);
            }
        }
        Action::new(slots).expect("blocks partition the items")
    }

    /// Whether `a` places every block on its slot range.
    pub fn admits(&self, a: &Action) -> bool {
        a.len() == self.num_items()
            && (0..a.len()).all(|i| {
                self.slot_range(self.block_of[i])
                    .contains(&a.position_of(i))
            })
    }
}

impl fmt::Display for Partition {
    /// `P1={1,2,4} I1={1,2,3}` per block, 1-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |xs: &mut dyn Iterator<Item = usize>| {
            let parts: Vec<String> = xs.map(|x| (x + 1).to_string()).collect();
            format!("{{{}}}", parts.join(","))
        };
        for d in 0..self.num_blocks() {
            if d > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "P{n}={} I{n}={}",
                set(&mut self.blocks[d].iter().copied()),
                set(&mut self.slot_range(d)),
                n = d + 1
            )?;
        }
        Ok(())
    }
}

/// Partitions the items by repeatedly peeling off `min_G` of the remaining
/// items: those with no edge `(i, j) ∈ G` to another remaining item `j`.
///
/// If `G` has a cycle the minimum eventually becomes empty; the remaining items
/// then form one final block and the partition is flagged.
pub fn compute_partition(graph: &RelationGraph) -> Partition {
    let l = graph.num_items();
    let mut remaining = vec![true; l];
    let mut left = l;
    // out_degree[i] = #{ j remaining : (i, j) ∈ G }
    let mut out_degree: Vec<usize> = (0..l)
        .map(|i| (0..l).filter(|&j| graph.contains(i, j)).count())
        .collect();
    let mut blocks = Vec::new();
    let mut cycle_fallback = false;

    while left > 0 {
        let mut block: Vec<usize> = (0..l)
            .filter(|&i| remaining[i] && out_degree[i] == 0)
            .collect();
        if block.is_empty() {
            cycle_fallback = true;
            block = (0..l).filter(|&i| remaining[i]).collect();
        }
        for &j in &block {
            remaining[j] = false;
        }
        left -= block.len();
        for &j in &block {
            for i in 0..l {
                if remaining[i] && graph.contains(i, j) {
                    out_degree[i] -= 1;
                }
            }
        }
        blocks.push(block);
    }
    Partition::assemble(l, blocks, cycle_fallback)
}
