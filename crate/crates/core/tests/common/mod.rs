//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use elasticmesh::{Grid, HeightField, LabelMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer grey levels drawn uniformly from `0..=255`.
pub fn random_grid(rng: &mut impl Rng, w: usize, h: usize) -> Grid {
    Grid::from_fn(w, h, |_, _| f64::from(rng.gen_range(0u8..=255))).unwrap()
}

/// Closed-form balance state `(k1/k2) * (g - mean(g))`.
pub fn balance_state(grid: &Grid, k1: f64, k2: f64) -> Vec<f64> {
    let mean = grid.mean();
    grid.values().iter().map(|g| k1 / k2 * (g - mean)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn field(w: usize, h: usize, z: Vec<f64>) -> HeightField {
    HeightField::new(w, h, z).unwrap()
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Union-find 4-connected labeling, renumbered by first raster encounter.
pub fn union_find_labels<T: PartialEq>(w: usize, h: usize, v: &[T]) -> Vec<u32> {
    let mut ds = DisjointSet::new(v.len());
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w && v[i] == v[i + 1] {
                ds.union(i, i + 1);
            }
            if y + 1 < h && v[i] == v[i + w] {
                ds.union(i, i + w);
            }
        }
    }
    let mut renumber = std::collections::HashMap::new();
    (0..v.len())
        .map(|i| {
            let root = ds.find(i);
            let next = renumber.len() as u32;
            *renumber.entry(root).or_insert(next)
        })
        .collect()
}

/// Adjacency by comparing every pixel pair for 4-adjacency.
pub fn brute_adjacency(labels: &LabelMap) -> Vec<Vec<bool>> {
    let n = labels.region_count();
    let (w, h) = labels.dims();
    let mut a = vec![vec![false; n]; n];
    let pixels: Vec<(usize, usize)> = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).collect();
    for &(x0, y0) in &pixels {
        for &(x1, y1) in &pixels {
            if x0.abs_diff(x1) + y0.abs_diff(y1) == 1 {
                let (i, j) = (labels.get(x0, y0) as usize, labels.get(x1, y1) as usize);
                if i != j {
                    a[i][j] = true;
                }
            }
        }
    }
    a
}

/// Greedy merging that rescans all region pairs after every merge,
/// recomputing means and adjacency from the raw pixels each time.
/// Returns the compacted labels and the (survivor, absorbed) sequence.
pub fn rescan_merge(labels: &LabelMap, grid: &Grid, target: usize) -> (Vec<u32>, Vec<(u32, u32)>) {
    let (w, h) = labels.dims();
    let mut current: Vec<u32> = labels.values().to_vec();
    let mut events = Vec::new();
    loop {
        let mut ids: Vec<u32> = current.clone();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() <= target {
            break;
        }
        let mean = |id: u32| {
            let (mut s, mut c) = (0.0, 0usize);
            for (l, g) in current.iter().zip(grid.values()) {
                if *l == id {
                    s += g;
                    c += 1;
                }
            }
            s / c as f64
        };
        let adjacent = |a: u32, b: u32| {
            (0..h).any(|y| {
                (0..w).any(|x| {
                    let i = y * w + x;
                    let here = current[i];
                    let right = (x + 1 < w).then(|| current[i + 1]);
                    let down = (y + 1 < h).then(|| current[i + w]);
                    [right, down].into_iter().flatten().any(|o| {
                        (here == a && o == b) || (here == b && o == a)
                    })
                })
            })
        };
        let mut best: Option<(f64, u32, u32)> = None;
        for (ai, &a) in ids.iter().enumerate() {
            for &b in &ids[ai + 1..] {
                if !adjacent(a, b) {
                    continue;
                }
                let d = (mean(a) - mean(b)).abs();
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("connected grid always has an adjacent pair");
        for l in current.iter_mut() {
            if *l == b {
                *l = a;
            }
        }
        events.push((a, b));
    }
    let mut ids: Vec<u32> = current.clone();
    ids.sort_unstable();
    ids.dedup();
    let compact = current
        .iter()
        .map(|l| ids.binary_search(l).unwrap() as u32)
        .collect();
    (compact, events)
}

/// Minimum within-cluster sum of squares for `k` contiguous groups of the
/// sorted values, by enumerating every split of the distinct levels.
pub fn optimal_1d_sse(values: &[f64], k: usize) -> f64 {
    let mut levels: Vec<(f64, usize)> = Vec::new();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    for v in sorted {
        match levels.last_mut() {
            Some((l, c)) if *l == v => *c += 1,
            _ => levels.push((v, 1)),
        }
    }
    let sse = |range: &[(f64, usize)]| {
        let n: usize = range.iter().map(|r| r.1).sum();
        let mean = range.iter().map(|(v, c)| v * *c as f64).sum::<f64>() / n as f64;
        range.iter().map(|(v, c)| (v - mean).powi(2) * *c as f64).sum::<f64>()
    };
    fn search(levels: &[(f64, usize)], k: usize, sse: &dyn Fn(&[(f64, usize)]) -> f64) -> f64 {
        if k == 1 {
            return sse(levels);
        }
        (1..=levels.len() - (k - 1))
            .map(|cut| sse(&levels[..cut]) + search(&levels[cut..], k - 1, sse))
            .fold(f64::INFINITY, f64::min)
    }
    search(&levels, k, &sse)
}
