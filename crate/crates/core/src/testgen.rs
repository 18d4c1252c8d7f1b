//! Synthetic test images with flat regions.
//!
//! Three layouts: two vertical halves, a rectangle inside a background ring,
//! and three dark shapes (circle, triangle, rectangle) on a light
//! background. Shapes are rasterized by pixel centre with no anti-aliasing.

use crate::{Error, Grid, Result};

/// Smallest side accepted for any pattern.
pub const MIN_SIDE: usize = 8;
/// Smallest side for the three-shape layout.
pub const MIN_SHAPES_SIDE: usize = 16;

fn check_level(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=255.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidPattern(format!("{name} level {v} is outside [0, 255]")))
    }
}

fn check_size(w: usize, h: usize, min: usize) -> Result<()> {
    if w < min || h < min {
        return Err(Error::InvalidPattern(format!(
            "size {w}x{h} is below the {min}x{min} minimum"
        )));
    }
    Ok(())
}

/// Left columns `[0, w/2)` at `g_left`, the rest at `g_right`.
pub fn gen_halves(w: usize, h: usize, g_left: f64, g_right: f64) -> Result<Grid> {
    if !w.is_multiple_of(2) {
        return Err(Error::InvalidPattern(format!("halves width must be even, got {w}")));
    }
    if w == 0 || h == 0 {
        return Err(Error::InvalidPattern("empty image".into()));
    }
    check_level("left", g_left)?;
    check_level("right", g_right)?;
    Grid::from_fn(w, h, |x, _| if x < w / 2 { g_left } else { g_right })
}

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn area(&self) -> usize {
        self.x1.saturating_sub(self.x0) * self.y1.saturating_sub(self.y0)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x0..self.x1).contains(&x) && (self.y0..self.y1).contains(&y)
    }
}

/// A rectangle at `g_rect` over a `g_bg` background. The rectangle must
/// leave at least one background pixel on every side.
pub fn gen_rect(w: usize, h: usize, rect: Rect, g_rect: f64, g_bg: f64) -> Result<Grid> {
    check_level("rectangle", g_rect)?;
    check_level("background", g_bg)?;
    if rect.area() == 0 {
        return Err(Error::InvalidPattern(format!("rectangle {rect:?} is empty")));
    }
    if rect.x0 == 0 || rect.y0 == 0 || rect.x1 >= w || rect.y1 >= h {
        return Err(Error::InvalidPattern(format!(
            "rectangle {rect:?} must lie strictly inside {w}x{h}"
        )));
    }
    Grid::from_fn(w, h, |x, y| if rect.contains(x, y) { g_rect } else { g_bg })
}

/// Geometry of the three-shape layout in pixel units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapesLayout {
    pub circle_center: (f64, f64),
    pub circle_radius: f64,
    pub triangle: [(f64, f64); 3],
    pub rect: Rect,
}

impl ShapesLayout {
    /// Circle upper-left, triangle upper-right, rectangle lower-centre;
    /// each covers roughly 6-10% of the image.
    pub fn for_size(w: usize, h: usize) -> Self {
        let (wf, hf) = (w as f64, h as f64);
        let side = wf.min(hf);
        let frac = |v: f64, f: f64| (v * f).round() as usize;
        Self {
            circle_center: (0.27 * wf, 0.30 * hf),
            circle_radius: 0.14 * side,
            triangle: [(0.75 * wf, 0.08 * hf), (0.95 * wf, 0.48 * hf), (0.55 * wf, 0.48 * hf)],
            rect: Rect::new(frac(wf, 0.30), frac(hf, 0.62), frac(wf, 0.70), frac(hf, 0.88)),
        }
    }

    pub fn in_circle(&self, x: usize, y: usize) -> bool {
        let (cx, cy) = self.circle_center;
        let dx = x as f64 + 0.5 - cx;
        let dy = y as f64 + 0.5 - cy;
        dx * dx + dy * dy <= self.circle_radius * self.circle_radius
    }

    pub fn in_triangle(&self, x: usize, y: usize) -> bool {
        let p = (x as f64 + 0.5, y as f64 + 0.5);
        let [a, b, c] = self.triangle;
        let edge = |u: (f64, f64), v: (f64, f64)| (v.0 - u.0) * (p.1 - u.1) - (v.1 - u.1) * (p.0 - u.0);
        let (e0, e1, e2) = (edge(a, b), edge(b, c), edge(c, a));
        (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) || (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0)
    }

    pub fn in_rect(&self, x: usize, y: usize) -> bool {
        self.rect.contains(x, y)
    }
}

/// Three darker shapes on a background. Levels are given in the order
/// background, circle, triangle, rectangle.
pub fn gen_shapes(w: usize, h: usize, g_bg: f64, g_circle: f64, g_triangle: f64, g_rect: f64) -> Result<Grid> {
    check_size(w, h, MIN_SHAPES_SIDE)?;
    check_level("background", g_bg)?;
    check_level("circle", g_circle)?;
    check_level("triangle", g_triangle)?;
    check_level("rectangle", g_rect)?;
    let layout = ShapesLayout::for_size(w, h);
    Grid::from_fn(w, h, |x, y| {
        if layout.in_circle(x, y) {
            g_circle
        } else if layout.in_triangle(x, y) {
            g_triangle
        } else if layout.in_rect(x, y) {
            g_rect
        } else {
            g_bg
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    Halves { left: f64, right: f64 },
    Rect { rect: f64, background: f64 },
    Shapes { background: f64, circle: f64, triangle: f64, rect: f64 },
}

impl Variant {
    pub fn halves() -> Self {
        Variant::Halves { left: 180.0, right: 60.0 }
    }

    pub fn rect() -> Self {
        Variant::Rect { rect: 60.0, background: 180.0 }
    }

    pub fn shapes() -> Self {
        Variant::Shapes {
            background: 200.0,
            circle: 60.0,
            triangle: 100.0,
            rect: 140.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Halves { .. } => "halves",
            Variant::Rect { .. } => "rect",
            Variant::Shapes { .. } => "shapes",
        }
    }

    /// Default levels for a variant name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "halves" => Ok(Self::halves()),
            "rect" => Ok(Self::rect()),
            "shapes" => Ok(Self::shapes()),
            other => Err(Error::InvalidPattern(format!(
                "unknown variant {other:?} (expected halves, rect or shapes)"
            ))),
        }
    }

    /// Replaces the levels in declaration order.
    pub fn with_levels(self, levels: &[f64]) -> Result<Self> {
        let expect = |n: usize| {
            if levels.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidPattern(format!(
                    "{} takes {n} levels, got {}",
                    self.name(),
                    levels.len()
                )))
            }
        };
        Ok(match self {
            Variant::Halves { .. } => {
                expect(2)?;
                Variant::Halves { left: levels[0], right: levels[1] }
            }
            Variant::Rect { .. } => {
                expect(2)?;
                Variant::Rect { rect: levels[0], background: levels[1] }
            }
            Variant::Shapes { .. } => {
                expect(4)?;
                Variant::Shapes {
                    background: levels[0],
                    circle: levels[1],
                    triangle: levels[2],
                    rect: levels[3],
                }
            }
        })
    }
}

/// A fully specified synthetic image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestPattern {
    pub variant: Variant,
    pub width: usize,
    pub height: usize,
}

impl TestPattern {
    pub fn new(variant: Variant, width: usize, height: usize) -> Result<Self> {
        let min = match variant {
            Variant::Shapes { .. } => MIN_SHAPES_SIDE,
            _ => MIN_SIDE,
        };
        check_size(width, height, min)?;
        Ok(Self { variant, width, height })
    }

    /// The rectangle used by the `rect` variant: the middle half of each axis.
    pub fn centered_rect(width: usize, height: usize) -> Rect {
        Rect::new(width / 4, height / 4, width - width / 4, height - height / 4)
    }

    pub fn render(&self) -> Result<Grid> {
        let (w, h) = (self.width, self.height);
        match self.variant {
            Variant::Halves { left, right } => gen_halves(w, h, left, right),
            Variant::Rect { rect, background } => gen_rect(w, h, Self::centered_rect(w, h), rect, background),
            Variant::Shapes { background, circle, triangle, rect } => {
                gen_shapes(w, h, background, circle, triangle, rect)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_halves() {
        let g = gen_halves(4, 2, 180.0, 60.0).unwrap();
        assert_eq!(g.values(), &[180.0, 180.0, 60.0, 60.0, 180.0, 180.0, 60.0, 60.0]);
        assert_eq!(g.mean(), 120.0);
        let flat = gen_halves(6, 3, 90.0, 90.0).unwrap();
        assert!(flat.values().iter().all(|&v| v == 90.0));
        assert!(gen_halves(5, 2, 1.0, 2.0).is_err());
        assert!(gen_halves(4, 2, 300.0, 2.0).is_err());
    }

    #[test]
    fn rect_area() {
        let g = gen_rect(8, 8, Rect::new(2, 2, 6, 6), 60.0, 180.0).unwrap();
        assert_eq!(g.values().iter().filter(|&&v| v == 60.0).count(), 16);
        assert!(gen_rect(8, 8, Rect::new(3, 3, 3, 6), 60.0, 180.0).is_err());
        assert!(gen_rect(8, 8, Rect::new(0, 2, 6, 6), 60.0, 180.0).is_err());
        assert!(gen_rect(8, 8, Rect::new(2, 2, 8, 6), 60.0, 180.0).is_err());
    }

    #[test]
    fn shapes_have_four_levels() {
        let g = gen_shapes(64, 64, 200.0, 60.0, 100.0, 140.0).unwrap();
        for level in [200.0, 60.0, 100.0, 140.0] {
            assert!(g.values().contains(&level), "missing level {level}");
        }
        assert!(g.values().iter().all(|v| [200.0, 60.0, 100.0, 140.0].contains(v)));
        assert!(gen_shapes(12, 64, 200.0, 60.0, 100.0, 140.0).is_err());
    }

    #[test]
    fn shape_coverage_is_moderate() {
        for (w, h) in [(64, 64), (128, 96), (256, 256)] {
            let layout = ShapesLayout::for_size(w, h);
            let n = (w * h) as f64;
            let mut counts = [0usize; 3];
            for y in 0..h {
                for x in 0..w {
                    counts[0] += layout.in_circle(x, y) as usize;
                    counts[1] += layout.in_triangle(x, y) as usize;
                    counts[2] += layout.in_rect(x, y) as usize;
                    let hits = layout.in_circle(x, y) as u8 + layout.in_triangle(x, y) as u8 + layout.in_rect(x, y) as u8;
                    assert!(hits <= 1, "shapes overlap at ({x}, {y})");
                }
            }
            for c in counts {
                let frac = c as f64 / n;
                assert!((0.04..=0.15).contains(&frac), "{w}x{h}: coverage {frac}");
            }
        }
    }

    #[test]
    fn variants_by_name() {
        assert_eq!(Variant::by_name("halves").unwrap(), Variant::halves());
        assert!(Variant::by_name("stripes").is_err());
        assert!(Variant::shapes().with_levels(&[1.0, 2.0]).is_err());
        let v = Variant::rect().with_levels(&[10.0, 20.0]).unwrap();
        assert_eq!(v, Variant::Rect { rect: 10.0, background: 20.0 });
        assert!(TestPattern::new(Variant::halves(), 4, 64).is_err());
        let p = TestPattern::new(Variant::rect(), 8, 8).unwrap();
        let g = p.render().unwrap();
        assert_eq!(g.values().iter().filter(|&&v| v == 60.0).count(), 16);
    }
}
