//! PGM codec and export of simulation artifacts.
//!
//! Only 8-bit greyscale PGM is handled: `P2` (plain) and `P5` (raw) with a
//! maxval of 255. Text exports use UTF-8 with LF line endings.

use std::fmt::Write as _;

use crate::merging::MergePlan;
use crate::mesh::ConvergenceTrace;
use crate::{Error, Grid, HeightField, LabelMap, Result, SignMap};

/// Decoded PGM samples before conversion to a [`Grid`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u8>,
}

impl PgmImage {
    pub fn to_grid(&self) -> Result<Grid> {
        Grid::new(
            self.width,
            self.height,
            self.samples.iter().map(|&s| f64::from(s)).collect(),
        )
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    /// Skips whitespace and `#` comments running to end of line.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(self.pos) {
                None => self.err(format!("unexpected end of data, expected {what}")),
                Some(_) => self.err(format!("expected {what}")),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse {
                offset: start,
                message: format!("{what} is too large"),
            })
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<PgmImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(cur.err("expected magic number P2 or P5")),
    };
    cur.pos = 2;
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(cur.err("expected whitespace after magic number"));
    }

    let width = cur.number("width")?;
    let height = cur.number("height")?;
    if width == 0 || height == 0 {
        return Err(cur.err(format!("image dimensions must be positive, got {width}x{height}")));
    }
    cur.skip_separators();
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Parse {
            offset: maxval_at,
            message: format!("unsupported maxval {maxval}, only 255 is accepted"),
        });
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| cur.err("image dimensions overflow"))?;

    let samples = if binary {
        if !cur.bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(cur.err("expected a single whitespace byte before raster data"));
        }
        cur.pos += 1;
        let end = cur.pos + count;
        if end > bytes.len() {
            cur.pos = bytes.len();
            return Err(cur.err(format!(
                "truncated raster: expected {count} bytes, found {}",
                bytes.len() - (end - count)
            )));
        }
        bytes[cur.pos..end].to_vec()
    } else {
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let at = cur.pos;
            let v = cur.number("sample")?;
            if v > 255 {
                return Err(Error::Parse {
                    offset: at,
                    message: format!("sample {v} exceeds maxval 255"),
                });
            }
            samples.push(v as u8);
        }
        samples
    };

    Ok(PgmImage {
        width,
        height,
        maxval: 255,
        samples,
    })
}

pub fn read_pgm(bytes: &[u8]) -> Result<Grid> {
    decode_pgm(bytes)?.to_grid()
}

/// Canonical PGM encoding. Samples are rounded to the nearest level.
pub fn write_pgm(grid: &Grid, binary: bool) -> Result<Vec<u8>> {
    let samples = grid
        .values()
        .iter()
        .map(|&g| {
            let r = g.round();
            if (0.0..=255.0).contains(&r) {
                Ok(r as u8)
            } else {
                Err(Error::Encode(format!("sample {g} does not round into [0, 255]")))
            }
        })
        .collect::<Result<Vec<u8>>>()?;

    let (w, h) = grid.dims();
    let magic = if binary { "P5" } else { "P2" };
    let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
    if binary {
        out.extend_from_slice(&samples);
    } else {
        let mut text = String::with_capacity(samples.len() * 4);
        for row in samples.chunks(w) {
            for (i, s) in row.iter().enumerate() {
                if i > 0 {
                    text.push(' ');
                }
                let _ = write!(text, "{s}");
            }
            text.push('\n');
        }
        out.extend_from_slice(text.as_bytes());
    }
    Ok(out)
}

/// White for positive, black for negative, mid-grey for zero.
pub fn render_sign_map(signs: &SignMap) -> Grid {
    let g = signs
        .values()
        .iter()
        .map(|&s| match s {
            1 => 255.0,
            -1 => 0.0,
            _ => 128.0,
        })
        .collect();
    Grid::new(signs.width(), signs.height(), g).expect("sign map dimensions are valid")
}

/// Spreads labels evenly over `0..=255`. Beyond 256 regions the levels
/// wrap around, so distinct regions may share a shade.
pub fn render_labels(labels: &LabelMap) -> Grid {
    let n = labels.region_count().min(256);
    let denom = n.saturating_sub(1).max(1) as f64;
    let g = labels
        .values()
        .iter()
        .map(|&l| ((l as usize % 256) as f64 * 255.0 / denom).round())
        .collect();
    Grid::new(labels.width(), labels.height(), g).expect("label map dimensions are valid")
}

/// `%g`-style formatting with `digits` significant digits and trailing
/// zeros removed.
pub(crate) fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        format!("{m}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x,y,z` rows in raster order, heights to 9 significant digits.
pub fn export_heightmap_csv(heights: &HeightField) -> Vec<u8> {
    let mut out = String::from("x,y,z\n");
    let w = heights.width();
    for (i, &z) in heights.values().iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", i % w, i / w, format_significant(z, 9));
    }
    out.into_bytes()
}

/// Triangulated lattice with one vertex per pixel and two faces per cell.
pub fn export_mesh_obj(heights: &HeightField, z_scale: f64) -> Result<Vec<u8>> {
    let (w, h) = heights.dims();
    if w < 2 || h < 2 {
        return Err(Error::InvalidParams(format!(
            "mesh export needs at least 2x2 pixels, got {w}x{h}"
        )));
    }
    if !(z_scale.is_finite() && z_scale > 0.0) {
        return Err(Error::InvalidParams(format!(
            "z scale must be positive, got {z_scale}"
        )));
    }
    let mut out = String::new();
    for (i, &z) in heights.values().iter().enumerate() {
        let _ = writeln!(
            out,
            "v {} {} {}",
            i % w,
            i / w,
            format_significant(z * z_scale, 9)
        );
    }
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            // OBJ indices are 1-based.
            let a = y * w + x + 1;
            let b = a + 1;
            let c = a + w;
            let d = c + 1;
            let _ = writeln!(out, "f {a} {c} {b}");
            let _ = writeln!(out, "f {b} {c} {d}");
        }
    }
    Ok(out.into_bytes())
}

/// Values are written in shortest round-trip form so they parse back to
/// the exact recorded doubles.
pub fn write_convergence_csv(trace: &ConvergenceTrace) -> Vec<u8> {
    let mut out = String::from("iteration,avg_abs_dz\n");
    for p in trace.points() {
        let _ = writeln!(out, "{},{:?}", p.iteration, p.avg_abs_dz);
    }
    out.into_bytes()
}

/// Per-pixel labels as `x,y,label`.
pub fn export_labels_csv(labels: &LabelMap) -> Vec<u8> {
    let mut out = String::from("x,y,label\n");
    let w = labels.width();
    for (i, &l) in labels.values().iter().enumerate() {
        let _ = writeln!(out, "{},{},{l}", i % w, i / w);
    }
    out.into_bytes()
}

pub fn write_merge_plan_csv(plan: &MergePlan) -> Vec<u8> {
    let mut out = String::from("survivor,absorbed,mean_diff\n");
    for e in &plan.events {
        let _ = writeln!(out, "{},{},{:?}", e.survivor, e.absorbed, e.mean_diff);
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_plain_pgm() {
        let g = read_pgm(b"P2\n2 1\n255\n100 200\n").unwrap();
        assert_eq!(g.dims(), (2, 1));
        assert_eq!(g.values(), &[100.0, 200.0]);
    }

    #[test]
    fn raw_and_plain_agree() {
        let plain = read_pgm(b"P2\n2 1\n255\n100 200\n").unwrap();
        let raw = read_pgm(b"P5\n2 1\n255\n\x64\xc8").unwrap();
        assert_eq!(plain, raw);
    }

    #[test]
    fn header_comments() {
        let g = read_pgm(b"P2\n# made by hand\n2 # width\n1\n255\n1 2\n").unwrap();
        assert_eq!(g.values(), &[1.0, 2.0]);
        let g = read_pgm(b"P5 2 1 # c\n255\n\x01\x02").unwrap();
        assert_eq!(g.values(), &[1.0, 2.0]);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let cases: [(&[u8], usize); 5] = [
            (b"P3\n1 1\n255\n0\n", 0),
            (b"P2\n1 1\n65535\n0\n", 7),
            (b"P5\n2 2\n255\n\x00\x01", 13),
            (b"P2\n2 1\n255\n7\n", 13),
            (b"P2\nx 1\n255\n", 3),
        ];
        for (bytes, offset) in cases {
            match read_pgm(bytes) {
                Err(Error::Parse { offset: o, .. }) => assert_eq!(o, offset, "{:?}", String::from_utf8_lossy(bytes)),
                other => panic!("expected parse error, got {other:?}"),
            }
        }
        assert!(read_pgm(b"P2\n1 1\n255\n256\n").is_err());
        assert!(read_pgm(b"P2\n0 1\n255\n").is_err());
        assert!(read_pgm(b"").is_err());
    }

    #[test]
    fn canonical_encoding() {
        let one = Grid::new(1, 1, vec![0.0]).unwrap();
        assert_eq!(write_pgm(&one, false).unwrap(), b"P2\n1 1\n255\n0\n");
        let pair = Grid::new(2, 1, vec![100.0, 200.0]).unwrap();
        let raw = write_pgm(&pair, true).unwrap();
        assert_eq!(&raw[..11], b"P5\n2 1\n255\n");
        assert_eq!(raw.len(), 13);
        assert_eq!(&raw[11..], &[100, 200]);
        assert_eq!(write_pgm(&pair, false).unwrap(), b"P2\n2 1\n255\n100 200\n");
    }

    #[test]
    fn sign_rendering() {
        let s = SignMap::new(3, 1, vec![-1, 0, 1]).unwrap();
        assert_eq!(render_sign_map(&s).values(), &[0.0, 128.0, 255.0]);
    }

    #[test]
    fn label_rendering_levels() {
        let two = LabelMap::new(2, 1, vec![0, 1]).unwrap();
        assert_eq!(render_labels(&two).values(), &[0.0, 255.0]);
        let four = LabelMap::new(4, 1, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(render_labels(&four).values(), &[0.0, 85.0, 170.0, 255.0]);
        let one = LabelMap::new(3, 1, vec![0, 0, 0]).unwrap();
        assert!(render_labels(&one).values().iter().all(|&v| v == 0.0));
        let many = LabelMap::new(300, 1, (0..300).collect()).unwrap();
        let r = render_labels(&many);
        assert_eq!(r.get(255, 0), 255.0);
        assert_eq!(r.get(256, 0), 0.0);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.0, 9), "0");
        assert_eq!(format_significant(-0.0, 9), "0");
        assert_eq!(format_significant(-5.0, 9), "-5");
        assert_eq!(format_significant(1.0 / 3.0, 9), "0.333333333");
        assert_eq!(format_significant(123456789.4, 9), "123456789");
        assert_eq!(format_significant(1234567890.0, 9), "1.23456789e9");
        assert_eq!(format_significant(1.5e-7, 9), "1.5e-7");
        assert_eq!(format_significant(60.000000004, 9), "60");
    }

    #[test]
    fn heightmap_csv() {
        let one = HeightField::zeros(1, 1);
        assert_eq!(export_heightmap_csv(&one), b"x,y,z\n0,0,0\n");
        let pair = HeightField::new(2, 1, vec![-5.0, 5.0]).unwrap();
        assert_eq!(export_heightmap_csv(&pair), b"x,y,z\n0,0,-5\n1,0,5\n");
    }

    #[test]
    fn obj_lattice() {
        let obj = String::from_utf8(export_mesh_obj(&HeightField::zeros(2, 2), 1.0).unwrap()).unwrap();
        assert_eq!(obj, "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 3 2\nf 2 3 4\n");
        let obj = String::from_utf8(export_mesh_obj(&HeightField::zeros(3, 3), 2.0).unwrap()).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 9);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 8);
        assert!(export_mesh_obj(&HeightField::zeros(1, 5), 1.0).is_err());
        assert!(export_mesh_obj(&HeightField::zeros(2, 2), 0.0).is_err());
    }

    #[test]
    fn convergence_csv() {
        let mut t = ConvergenceTrace::new();
        assert_eq!(write_convergence_csv(&t), b"iteration,avg_abs_dz\n");
        t.push(0.5);
        t.push(0.25);
        t.push(0.1);
        let text = String::from_utf8(write_convergence_csv(&t)).unwrap();
        assert_eq!(text, "iteration,avg_abs_dz\n1,0.5\n2,0.25\n3,0.1\n");
    }
}
