//! Raster types shared by every stage of the pipeline.

use crate::{Error, Result};

/// A pixel coordinate, `x` along a row and `y` down the columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub x: usize,
    pub y: usize,
}

impl Pixel {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidGrid(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::InvalidGrid("dimensions overflow".into()))?;
    if len != expected {
        return Err(Error::InvalidGrid(format!(
            "{width}x{height} needs {expected} samples, got {len}"
        )));
    }
    Ok(())
}

/// Row-major greyscale raster with levels in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: usize,
    height: usize,
    g: Vec<f64>,
}

impl Grid {
    pub fn new(width: usize, height: usize, g: Vec<f64>) -> Result<Self> {
        check_dims(width, height, g.len())?;
        if let Some((i, v)) = g
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 255.0)
        {
            return Err(Error::InvalidGrid(format!(
                "sample {i} = {v} is outside [0, 255]"
            )));
        }
        Ok(Self { width, height, g })
    }

    pub fn filled(width: usize, height: usize, level: f64) -> Result<Self> {
        Self::new(width, height, vec![level; width.saturating_mul(height)])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut g = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                g.push(f(x, y));
            }
        }
        Self::new(width, height, g)
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

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.g[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.g
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.g[y * self.width..(y + 1) * self.width]
    }

    pub fn mean(&self) -> f64 {
        self.g.iter().sum::<f64>() / self.g.len() as f64
    }

    pub fn contains(&self, p: Pixel) -> bool {
        p.x < self.width && p.y < self.height
    }
}

/// Per-pixel height of the mesh. Unbounded but always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    width: usize,
    height: usize,
    z: Vec<f64>,
}

impl HeightField {
    pub fn new(width: usize, height: usize, z: Vec<f64>) -> Result<Self> {
        check_dims(width, height, z.len())?;
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("height {i} is not finite")));
        }
        Ok(Self { width, height, z })
    }

    /// The flat initial state.
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            z: vec![0.0; width * height],
        }
    }

    /// Skips the finiteness scan; callers guarantee the invariant.
    pub(crate) fn from_raw(width: usize, height: usize, z: Vec<f64>) -> Self {
        debug_assert_eq!(z.len(), width * height);
        Self { width, height, z }
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

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.z[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn sum(&self) -> f64 {
        self.z.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.z.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn ensure_matches(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: self.dims(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(0, 3, vec![]).is_err());
        assert!(Grid::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Grid::new(1, 1, vec![255.5]).is_err());
        assert!(Grid::new(1, 1, vec![-1.0]).is_err());
        assert!(Grid::new(1, 1, vec![f64::NAN]).is_err());
        assert!(HeightField::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn from_fn_is_row_major() {
        let g = Grid::from_fn(3, 2, |x, y| (10 * y + x) as f64).unwrap();
        assert_eq!(g.values(), &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        assert_eq!(g.get(2, 1), 12.0);
        assert_eq!(g.row(1), &[10.0, 11.0, 12.0]);
    }
}
