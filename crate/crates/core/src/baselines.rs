//! k-means on pixel intensities, the comparison baseline.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::segmentation::label_components;
use crate::{Error, Grid, LabelMap, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub k: usize,
    /// Ascending.
    pub centroids: Vec<f64>,
    /// Index of the nearest centroid for every pixel. A class can end up
    /// empty, so labels are not guaranteed to cover `0..k`.
    pub assignment: LabelMap,
    pub iterations: usize,
    pub converged: bool,
    /// Within-cluster sum of squares after initialization and after every
    /// iteration.
    pub inertia_history: Vec<f64>,
}

impl KMeansResult {
    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().expect("history is never empty")
    }
}

fn nearest(centroids: &[f64], v: f64) -> u32 {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &c) in centroids.iter().enumerate() {
        let d = (v - c).abs();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best as u32
}

fn assign(values: &[f64], centroids: &[f64]) -> Vec<u32> {
    values.iter().map(|&v| nearest(centroids, v)).collect()
}

fn inertia(values: &[f64], labels: &[u32], centroids: &[f64]) -> f64 {
    values
        .iter()
        .zip(labels)
        .map(|(&v, &l)| (v - centroids[l as usize]).powi(2))
        .sum()
}

fn distinct_levels(values: &[f64]) -> Vec<f64> {
    let mut levels = values.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
}

/// `k` evenly spaced quantiles; falls back to evenly spaced distinct levels
/// when the quantiles collide.
fn quantile_init(values: &[f64], levels: &[f64], k: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pick = |src: &[f64], i: usize| src[((2 * i + 1) * src.len() / (2 * k)).min(src.len() - 1)];
    let centroids: Vec<f64> = (0..k).map(|i| pick(&sorted, i)).collect();
    if centroids.windows(2).all(|p| p[0] < p[1]) {
        centroids
    } else {
        (0..k).map(|i| pick(levels, i)).collect()
    }
}

/// Lloyd's iteration over greyscale values.
///
/// Without a seed the centroids start at evenly spaced quantiles of the
/// intensity distribution. With a seed they start at `k` distinct grey
/// levels drawn at random.
pub fn kmeans_grayscale(grid: &Grid, k: usize, max_iter: usize, seed: Option<u64>) -> Result<KMeansResult> {
    let values = grid.values();
    let levels = distinct_levels(values);
    if k == 0 || k > levels.len() {
        return Err(Error::InvalidClusterCount {
            k,
            distinct: levels.len(),
        });
    }

    let mut centroids = match seed {
        None => quantile_init(values, &levels, k),
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c: Vec<f64> = sample(&mut rng, levels.len(), k).iter().map(|i| levels[i]).collect();
            c.sort_by(f64::total_cmp);
            c
        }
    };
    let mut labels = assign(values, &centroids);
    let mut history = vec![inertia(values, &labels, &centroids)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&v, &l) in values.iter().zip(&labels) {
            sums[l as usize] += v;
            counts[l as usize] += 1;
        }
        let mut next: Vec<f64> = (0..k)
            .map(|i| if counts[i] > 0 { sums[i] / counts[i] as f64 } else { centroids[i] })
            .collect();
        next.sort_by(f64::total_cmp);
        let next_labels = assign(values, &next);
        history.push(inertia(values, &next_labels, &next));
        centroids = next;
        if next_labels == labels {
            converged = true;
            break;
        }
        labels = next_labels;
    }

    Ok(KMeansResult {
        k,
        centroids,
        assignment: LabelMap::from_raw(grid.width(), grid.height(), labels, k),
        iterations,
        converged,
        inertia_history: history,
    })
}

/// Splits intensity classes into spatially connected regions.
pub fn split_components(assignment: &LabelMap) -> LabelMap {
    label_components(assignment.width(), assignment.height(), assignment.values())
}
