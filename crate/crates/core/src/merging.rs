//! Greedy region merging on mean greyscale.
//!
//! The pair of adjacent regions whose mean greyscale differ the least is
//! fused, the survivor's mean is recomputed from the pooled pixels and the
//! search repeats until the requested number of regions remains. Ties go to
//! the lexicographically smallest `(i, j)` pair and the smaller id survives.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use crate::{Error, Grid, LabelMap, Result};

/// Symmetric region adjacency flags `a_ij`, stored row-sparse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    rows: Vec<BTreeSet<usize>>,
}

impl AdjacencyMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            rows: vec![BTreeSet::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(&j)
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].iter().copied()
    }

    /// Sets `a_ij = a_ji = true`. Diagonal entries are ignored.
    pub fn connect(&mut self, i: usize, j: usize) {
        if i != j {
            self.rows[i].insert(j);
            self.rows[j].insert(i);
        }
    }

    /// Number of `(i, j)` pairs with `i < j` flagged adjacent.
    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(BTreeSet::len).sum::<usize>() / 2
    }
}

/// One raster pass over horizontal and vertical pixel pairs.
pub fn build_adjacency(labels: &LabelMap) -> AdjacencyMatrix {
    let (w, h) = labels.dims();
    let l = labels.values();
    let mut adj = AdjacencyMatrix::new(labels.region_count());
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                adj.connect(l[i] as usize, l[i + 1] as usize);
            }
            if y + 1 < h {
                adj.connect(l[i] as usize, l[i + w] as usize);
            }
        }
    }
    adj
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeEvent {
    pub survivor: u32,
    pub absorbed: u32,
    pub mean_diff: f64,
}

/// Merge events in execution order, ids referring to the input labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MergePlan {
    pub events: Vec<MergeEvent>,
}

impl MergePlan {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    diff: f64,
    i: usize,
    j: usize,
    version_i: u64,
    version_j: u64,
}

impl Candidate {
    fn key(&self) -> (f64, usize, usize) {
        (self.diff, self.i, self.j)
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    }
}

struct Regions {
    sums: Vec<f64>,
    counts: Vec<usize>,
    version: Vec<u64>,
}

impl Regions {
    fn mean(&self, i: usize) -> f64 {
        self.sums[i] / self.counts[i] as f64
    }

    fn candidate(&self, a: usize, b: usize) -> Candidate {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        Candidate {
            diff: (self.mean(i) - self.mean(j)).abs(),
            i,
            j,
            version_i: self.version[i],
            version_j: self.version[j],
        }
    }
}

/// Merges regions of `labels` until `target` remain. The returned map is
/// compacted to `0..target`, preserving the relative order of survivors.
pub fn merge_to_count(labels: &LabelMap, grid: &Grid, target: usize) -> Result<(LabelMap, MergePlan)> {
    if grid.dims() != labels.dims() {
        return Err(Error::DimensionMismatch {
            expected: labels.dims(),
            found: grid.dims(),
        });
    }
    let n = labels.region_count();
    if target < 1 || target > n {
        return Err(Error::InvalidTarget {
            target,
            region_count: n,
        });
    }

    let mut regions = Regions {
        sums: vec![0.0; n],
        counts: vec![0; n],
        version: vec![0; n],
    };
    for (&l, &g) in labels.values().iter().zip(grid.values()) {
        regions.sums[l as usize] += g;
        regions.counts[l as usize] += 1;
    }

    let mut adj = build_adjacency(labels);
    let mut alive = vec![true; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let mut heap = BinaryHeap::new();
    for i in 0..n {
        for j in adj.neighbors(i).filter(|&j| j > i) {
            heap.push(Reverse(regions.candidate(i, j)));
        }
    }

    let mut plan = MergePlan::default();
    let mut remaining = n;
    while remaining > target {
        let Some(Reverse(c)) = heap.pop() else {
            // Only reachable when the adjacency graph is disconnected.
            break;
        };
        let (i, j) = (c.i, c.j);
        if !alive[i]
            || !alive[j]
            || regions.version[i] != c.version_i
            || regions.version[j] != c.version_j
        {
            continue;
        }

        regions.sums[i] += regions.sums[j];
        regions.counts[i] += regions.counts[j];
        regions.version[i] += 1;
        alive[j] = false;
        parent[j] = i;
        remaining -= 1;

        let absorbed: Vec<usize> = adj.rows[j].iter().copied().collect();
        adj.rows[j].clear();
        for k in absorbed {
            adj.rows[k].remove(&j);
            adj.connect(i, k);
        }
        for k in adj.rows[i].iter().copied() {
            heap.push(Reverse(regions.candidate(i, k)));
        }

        plan.events.push(MergeEvent {
            survivor: i as u32,
            absorbed: j as u32,
            mean_diff: c.diff,
        });
    }

    let mut compact = vec![u32::MAX; n];
    let mut next = 0u32;
    for (r, slot) in compact.iter_mut().enumerate() {
        if alive[r] {
            *slot = next;
            next += 1;
        }
    }
    let root = |mut r: usize| {
        while parent[r] != r {
            r = parent[r];
        }
        r
    };
    let resolved: Vec<u32> = (0..n).map(|r| compact[root(r)]).collect();
    let merged = labels.values().iter().map(|&l| resolved[l as usize]).collect();

    Ok((
        LabelMap::from_raw(labels.width(), labels.height(), merged, next as usize),
        plan,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> (LabelMap, Grid) {
        // Four 2-pixel columns in a chain with means 10, 12, 100, 105.
        let labels = LabelMap::new(4, 2, vec![0, 1, 2, 3, 0, 1, 2, 3]).unwrap();
        let grid = Grid::new(
            4,
            2,
            vec![9.0, 12.0, 100.0, 104.0, 11.0, 12.0, 100.0, 106.0],
        )
        .unwrap();
        (labels, grid)
    }

    #[test]
    fn adjacency_of_halves() {
        let labels = LabelMap::new(4, 2, vec![0, 0, 1, 1, 0, 0, 1, 1]).unwrap();
        let adj = build_adjacency(&labels);
        assert!(adj.is_adjacent(0, 1) && adj.is_adjacent(1, 0));
        assert!(!adj.is_adjacent(0, 0));
        assert_eq!(adj.edge_count(), 1);
    }

    #[test]
    fn adjacency_of_nested_rectangle() {
        let mut l = vec![0u32; 25];
        for y in 1..4 {
            for x in 1..4 {
                l[y * 5 + x] = 1;
            }
        }
        let adj = build_adjacency(&LabelMap::new(5, 5, l).unwrap());
        assert_eq!(adj.len(), 2);
        assert!(adj.is_adjacent(0, 1));
    }

    #[test]
    fn chain_merges_closest_pairs() {
        let (labels, grid) = chain();
        let (merged, plan) = merge_to_count(&labels, &grid, 2).unwrap();
        assert_eq!(merged.region_count(), 2);
        assert_eq!(merged.values(), &[0, 0, 1, 1, 0, 0, 1, 1]);
        let pairs: Vec<_> = plan.events.iter().map(|e| (e.survivor, e.absorbed)).collect();
        assert_eq!(pairs, vec![(0, 1), (2, 3)]);
        assert_eq!(plan.events[0].mean_diff, 2.0);
        assert_eq!(plan.events[1].mean_diff, 5.0);
    }

    #[test]
    fn target_equal_to_count_is_identity() {
        let (labels, grid) = chain();
        let (merged, plan) = merge_to_count(&labels, &grid, 4).unwrap();
        assert_eq!(merged, labels);
        assert!(plan.is_empty());
    }

    #[test]
    fn bad_targets() {
        let (labels, grid) = chain();
        assert!(matches!(
            merge_to_count(&labels, &grid, 0),
            Err(Error::InvalidTarget { .. })
        ));
        assert!(matches!(
            merge_to_count(&labels, &grid, 5),
            Err(Error::InvalidTarget { target: 5, region_count: 4 })
        ));
    }

    #[test]
    fn ties_prefer_smallest_pair() {
        // Means 10, 20, 30: (0,1) and (1,2) tie at 10.
        let labels = LabelMap::new(3, 1, vec![0, 1, 2]).unwrap();
        let grid = Grid::new(3, 1, vec![10.0, 20.0, 30.0]).unwrap();
        let (merged, plan) = merge_to_count(&labels, &grid, 2).unwrap();
        assert_eq!((plan.events[0].survivor, plan.events[0].absorbed), (0, 1));
        assert_eq!(merged.values(), &[0, 0, 1]);
    }

    #[test]
    fn merge_to_one() {
        let (labels, grid) = chain();
        let (merged, plan) = merge_to_count(&labels, &grid, 1).unwrap();
        assert_eq!(plan.len(), 3);
        assert!(merged.values().iter().all(|&l| l == 0));
    }
}
