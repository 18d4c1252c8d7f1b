//! Elastic mesh relaxation.
//!
//! Each pixel is a node of a 4-connected lattice with a height `z`. A
//! neighbour `a` exerts a repulsive force `k1 * (g - g_a)` and an elastic
//! force `k2 * (z_a - z)`; the summed force moves the node by
//! `k3 * f_net` per iteration. All nodes are updated synchronously from the
//! previous iteration's heights, so the result does not depend on visiting
//! order or on how rows are spread across worker threads.
//!
//! Border pixels only see their in-bounds neighbours. Both force terms are
//! antisymmetric per neighbour pair, so the total height `sum(z)` stays at
//! zero and the balance state is `z = (k1 / k2) * (g - mean(g))`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::{Error, Grid, HeightField, Pixel, Result};

/// Upper limit (exclusive) on `k3 * k2`.
///
/// The update map has eigenvalues `1 - k3 * k2 * lambda` where `lambda`
/// ranges over the 4-connected grid Laplacian spectrum `[0, 8]`.
pub const STABILITY_BOUND: f64 = 0.25;

/// Average `|dz|` above which a run is declared divergent.
pub const DEFAULT_BLOWUP_BOUND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    k1: f64,
    k2: f64,
    k3: f64,
    epsilon: f64,
    max_iterations: usize,
    blowup_bound: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            k1: 1.0,
            k2: 1.0,
            k3: 0.1,
            epsilon: 1e-4,
            max_iterations: 10_000,
            blowup_bound: DEFAULT_BLOWUP_BOUND,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "{name} must be a positive finite number, got {v}"
        )))
    }
}

impl SimParams {
    /// Validated parameters. Rejects coefficient pairs outside the
    /// stability bound.
    pub fn new(k1: f64, k2: f64, k3: f64, epsilon: f64, max_iterations: usize) -> Result<Self> {
        let params = Self::new_unguarded(k1, k2, k3, epsilon, max_iterations)?;
        match params.stability() {
            Stability::Stable => Ok(params),
            Stability::Rejected { product, bound } => Err(Error::StabilityBound { product, bound }),
        }
    }

    /// Like [`SimParams::new`] but skips the stability guard. Divergence is
    /// still caught at run time by [`simulate`].
    pub fn new_unguarded(
        k1: f64,
        k2: f64,
        k3: f64,
        epsilon: f64,
        max_iterations: usize,
    ) -> Result<Self> {
        positive("k1", k1)?;
        positive("k2", k2)?;
        positive("k3", k3)?;
        positive("epsilon", epsilon)?;
        if max_iterations == 0 {
            return Err(Error::InvalidParams(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(Self {
            k1,
            k2,
            k3,
            epsilon,
            max_iterations,
            blowup_bound: DEFAULT_BLOWUP_BOUND,
        })
    }

    pub fn with_blowup_bound(mut self, bound: f64) -> Result<Self> {
        positive("blow-up bound", bound)?;
        self.blowup_bound = bound;
        Ok(self)
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::InvalidParams(
                "max_iterations must be at least 1".into(),
            ));
        }
        self.max_iterations = max_iterations;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        positive("epsilon", epsilon)?;
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn k3(&self) -> f64 {
        self.k3
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn blowup_bound(&self) -> f64 {
        self.blowup_bound
    }

    /// `k3 * k2`, the quantity the stability guard looks at.
    pub fn gain_product(&self) -> f64 {
        self.k3 * self.k2
    }

    pub fn stability(&self) -> Stability {
        check_stability(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stability {
    Stable,
    Rejected { product: f64, bound: f64 },
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stability::Stable => f.write_str("ok"),
            Stability::Rejected { product, bound } => write!(
                f,
                "rejected: k3*k2 = {product} must be < {bound} \
                 (update eigenvalues are 1 - k3*k2*lambda with lambda in [0, 8])"
            ),
        }
    }
}

pub fn check_stability(params: &SimParams) -> Stability {
    let product = params.gain_product();
    if product < STABILITY_BOUND {
        Stability::Stable
    } else {
        Stability::Rejected {
            product,
            bound: STABILITY_BOUND,
        }
    }
}

/// Force on a pixel of level `g` from a neighbour of level `g_a`. Positive
/// pushes the pixel up.
#[inline]
pub fn repulsive_force(g: f64, g_a: f64, k1: f64) -> f64 {
    k1 * (g - g_a)
}

/// Restoring force on a pixel at height `z` from a neighbour at `z_a`.
#[inline]
pub fn elastic_force(z: f64, z_a: f64, k2: f64) -> f64 {
    k2 * (z_a - z)
}

/// Forces acting on one pixel, summed over its in-bounds 4-neighbours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSample {
    pub f_r: f64,
    pub f_s: f64,
    pub f_net: f64,
    pub delta_z: f64,
}

/// Summed (repulsive, elastic) force at `i = y * w + x`.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn forces_at(
    g: &[f64],
    z: &[f64],
    w: usize,
    h: usize,
    x: usize,
    y: usize,
    k1: f64,
    k2: f64,
) -> (f64, f64) {
    let i = y * w + x;
    let (gp, zp) = (g[i], z[i]);
    let mut f_r = 0.0;
    let mut f_s = 0.0;
    let mut visit = |j: usize| {
        f_r += repulsive_force(gp, g[j], k1);
        f_s += elastic_force(zp, z[j], k2);
    };
    if y > 0 {
        visit(i - w);
    }
    if x > 0 {
        visit(i - 1);
    }
    if x + 1 < w {
        visit(i + 1);
    }
    if y + 1 < h {
        visit(i + w);
    }
    (f_r, f_s)
}

pub fn net_force(
    grid: &Grid,
    heights: &HeightField,
    p: Pixel,
    params: &SimParams,
) -> Result<ForceSample> {
    heights.ensure_matches(grid.dims())?;
    if !grid.contains(p) {
        return Err(Error::OutOfBounds {
            x: p.x,
            y: p.y,
            width: grid.width(),
            height: grid.height(),
        });
    }
    let (f_r, f_s) = forces_at(
        grid.values(),
        heights.values(),
        grid.width(),
        grid.height(),
        p.x,
        p.y,
        params.k1,
        params.k2,
    );
    let f_net = f_r + f_s;
    Ok(ForceSample {
        f_r,
        f_s,
        f_net,
        delta_z: params.k3 * f_net,
    })
}

/// One synchronous update from `src` into `dst`. Returns the mean `|dz|`.
///
/// Rows may be processed in parallel; per-row sums are reduced in row order
/// so the result is the same for any worker count.
fn step_into(grid: &Grid, src: &[f64], dst: &mut [f64], params: &SimParams) -> Result<f64> {
    let (w, h) = grid.dims();
    let g = grid.values();
    let (k1, k2, k3) = (params.k1, params.k2, params.k3);

    let row_sums: Vec<Result<f64>> = dst
        .par_chunks_mut(w)
        .enumerate()
        .map(|(y, row)| {
            let mut sum = 0.0;
            for (x, out) in row.iter_mut().enumerate() {
                let (f_r, f_s) = forces_at(g, src, w, h, x, y, k1, k2);
                let dz = k3 * (f_r + f_s);
                let z = src[y * w + x] + dz;
                if !z.is_finite() || !dz.is_finite() {
                    return Err(Error::NumericOverflow { x, y });
                }
                *out = z;
                sum += dz.abs();
            }
            Ok(sum)
        })
        .collect();

    let mut total = 0.0;
    for s in row_sums {
        total += s?;
    }
    Ok(total / (w * h) as f64)
}

/// Applies one synchronous update and returns the new heights together
/// with the mean absolute height change.
pub fn step(grid: &Grid, heights: &HeightField, params: &SimParams) -> Result<(HeightField, f64)> {
    heights.ensure_matches(grid.dims())?;
    let mut next = vec![0.0; grid.len()];
    let avg = step_into(grid, heights.values(), &mut next, params)?;
    Ok((HeightField::from_raw(grid.width(), grid.height(), next), avg))
}

/// Largest `|f_net|` over all pixels. Zero exactly at the balance state.
pub fn fixed_point_residual(grid: &Grid, heights: &HeightField, params: &SimParams) -> Result<f64> {
    heights.ensure_matches(grid.dims())?;
    let (w, h) = grid.dims();
    let mut worst: f64 = 0.0;
    for y in 0..h {
        for x in 0..w {
            let (f_r, f_s) = forces_at(grid.values(), heights.values(), w, h, x, y, params.k1, params.k2);
            worst = worst.max((f_r + f_s).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub avg_abs_dz: f64,
}

/// Mean `|dz|` per iteration, starting at iteration 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    points: Vec<TracePoint>,
}

impl ConvergenceTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the next iteration's value.
    pub fn push(&mut self, avg_abs_dz: f64) {
        let iteration = self.points.len() + 1;
        self.points.push(TracePoint {
            iteration,
            avg_abs_dz,
        });
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Value recorded at `iteration` (1-based).
    pub fn at(&self, iteration: usize) -> Option<f64> {
        iteration
            .checked_sub(1)
            .and_then(|i| self.points.get(i))
            .map(|p| p.avg_abs_dz)
    }

    pub fn last(&self) -> Option<f64> {
        self.points.last().map(|p| p.avg_abs_dz)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub heights: HeightField,
    pub trace: ConvergenceTrace,
    pub iterations_run: usize,
    pub converged: bool,
    /// Height copies taken right after each requested iteration.
    pub snapshots: BTreeMap<usize, HeightField>,
}

/// Relaxes a flat mesh over `grid` until the mean `|dz|` drops below
/// `params.epsilon()` or the iteration cap is hit.
pub fn simulate(grid: &Grid, params: &SimParams, snapshot_iterations: &[usize]) -> Result<SimulationResult> {
    let (w, h) = grid.dims();
    let wanted: BTreeSet<usize> = snapshot_iterations.iter().copied().collect();
    let mut cur = vec![0.0; grid.len()];
    let mut next = vec![0.0; grid.len()];
    let mut trace = ConvergenceTrace::new();
    let mut snapshots = BTreeMap::new();
    let mut converged = false;
    let mut iterations_run = 0;

    for iteration in 1..=params.max_iterations {
        let avg = match step_into(grid, &cur, &mut next, params) {
            Ok(avg) => avg,
            Err(Error::NumericOverflow { .. }) => {
                return Err(Error::Unstable {
                    iteration,
                    avg_abs_dz: f64::INFINITY,
                    product: params.gain_product(),
                })
            }
            Err(e) => return Err(e),
        };
        std::mem::swap(&mut cur, &mut next);
        iterations_run = iteration;
        trace.push(avg);

        if !avg.is_finite() || avg > params.blowup_bound {
            return Err(Error::Unstable {
                iteration,
                avg_abs_dz: avg,
                product: params.gain_product(),
            });
        }
        if wanted.contains(&iteration) {
            snapshots.insert(iteration, HeightField::from_raw(w, h, cur.clone()));
        }
        if avg < params.epsilon {
            converged = true;
            break;
        }
    }

    Ok(SimulationResult {
        heights: HeightField::from_raw(w, h, cur),
        trace,
        iterations_run,
        converged,
        snapshots,
    })
}
