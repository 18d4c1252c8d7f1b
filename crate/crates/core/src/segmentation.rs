//! Sign map extraction and 4-connected region clustering.

use std::collections::VecDeque;

use crate::{Error, Grid, HeightField, Result};

/// Heights within this distance of zero count as unsigned.
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-9;

/// Ternary sign of every height: `-1`, `0` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMap {
    width: usize,
    height: usize,
    sign: Vec<i8>,
}

impl SignMap {
    pub fn new(width: usize, height: usize, sign: Vec<i8>) -> Result<Self> {
        if width == 0 || height == 0 || sign.len() != width * height {
            return Err(Error::InvalidGrid(format!(
                "{width}x{height} sign map with {} entries",
                sign.len()
            )));
        }
        if sign.iter().any(|s| !(-1..=1).contains(s)) {
            return Err(Error::InvalidGrid("signs must be -1, 0 or +1".into()));
        }
        Ok(Self {
            width,
            height,
            sign,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> i8 {
        self.sign[y * self.width + x]
    }

    pub fn values(&self) -> &[i8] {
        &self.sign
    }
}

pub fn sign_map(heights: &HeightField, zero_tolerance: f64) -> Result<SignMap> {
    if zero_tolerance.is_nan() || zero_tolerance < 0.0 {
        return Err(Error::InvalidParams(format!(
            "zero tolerance must be non-negative, got {zero_tolerance}"
        )));
    }
    let sign = heights
        .values()
        .iter()
        .map(|&z| {
            if z > zero_tolerance {
                1
            } else if z < -zero_tolerance {
                -1
            } else {
                0
            }
        })
        .collect();
    Ok(SignMap {
        width: heights.width(),
        height: heights.height(),
        sign,
    })
}

/// Region label per pixel, labels contiguous in `0..region_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    label: Vec<u32>,
    region_count: usize,
}

impl LabelMap {
    /// Builds a label map, checking that labels cover `0..max+1` with no gaps.
    pub fn new(width: usize, height: usize, label: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 || label.len() != width * height {
            return Err(Error::InvalidGrid(format!(
                "{width}x{height} label map with {} entries",
                label.len()
            )));
        }
        let region_count = label.iter().max().map_or(0, |&m| m as usize + 1);
        let mut seen = vec![false; region_count];
        for &l in &label {
            seen[l as usize] = true;
        }
        if let Some(gap) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGrid(format!("label {gap} is unused")));
        }
        Ok(Self {
            width,
            height,
            label,
            region_count,
        })
    }

    pub(crate) fn from_raw(width: usize, height: usize, label: Vec<u32>, region_count: usize) -> Self {
        Self {
            width,
            height,
            label,
            region_count,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.label[y * self.width + x]
    }

    pub fn values(&self) -> &[u32] {
        &self.label
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }
}

/// Labels maximal 4-connected sets of equal values. Labels are handed out
/// in raster order of each component's first pixel.
pub fn label_components<T: PartialEq>(width: usize, height: usize, values: &[T]) -> LabelMap {
    assert_eq!(values.len(), width * height, "value count must match dimensions");
    const UNSET: u32 = u32::MAX;
    let mut label = vec![UNSET; values.len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();

    for start in 0..values.len() {
        if label[start] != UNSET {
            continue;
        }
        label[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % width, i / width);
            let mut visit = |j: usize| {
                if label[j] == UNSET && values[j] == values[i] {
                    label[j] = next;
                    queue.push_back(j);
                }
            };
            if y > 0 {
                visit(i - width);
            }
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < width {
                visit(i + 1);
            }
            if y + 1 < height {
                visit(i + width);
            }
        }
        next += 1;
    }

    LabelMap::from_raw(width, height, label, next as usize)
}

/// Groups 4-adjacent pixels of equal sign (zero included) into regions.
pub fn cluster_regions(signs: &SignMap) -> LabelMap {
    label_components(signs.width, signs.height, &signs.sign)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    pub id: u32,
    pub pixel_count: usize,
    pub mean_grey: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionTable {
    pub regions: Vec<RegionStats>,
}

impl RegionTable {
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&RegionStats> {
        self.regions.get(id as usize)
    }

    pub fn total_pixels(&self) -> usize {
        self.regions.iter().map(|r| r.pixel_count).sum()
    }
}

pub fn region_stats(labels: &LabelMap, grid: &Grid, signs: &SignMap) -> Result<RegionTable> {
    for found in [grid.dims(), signs.dims()] {
        if found != labels.dims() {
            return Err(Error::DimensionMismatch {
                expected: labels.dims(),
                found,
            });
        }
    }
    let n = labels.region_count();
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    let mut region_sign = vec![0i8; n];
    for ((&l, &g), &s) in labels.values().iter().zip(grid.values()).zip(signs.values()) {
        let l = l as usize;
        sums[l] += g;
        if counts[l] == 0 {
            region_sign[l] = s;
        }
        counts[l] += 1;
    }
    let regions = (0..n)
        .map(|i| RegionStats {
            id: i as u32,
            pixel_count: counts[i],
            mean_grey: sums[i] / counts[i] as f64,
            sign: region_sign[i],
        })
        .collect();
    Ok(RegionTable { regions })
}
