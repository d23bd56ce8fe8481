//! Separable 2D transform in the square (Mallat) layout, greedy selection on
//! images and PGM input/output.
//!
//! Each level filters the rows of the current low-pass block, then its
//! columns. The block then holds
//!
//! ```text
//! LL | HL
//! ---+---
//! LH | HH
//! ```
//!
//! where the first letter is the row (horizontal) filter and the second the
//! column filter. The next level recurses on `LL`.

mod pgm;

pub use pgm::{Pgm, PgmFormat};

use rayon::prelude::*;

use crate::error::{check_finite, checked_log2, Error, Result};
use crate::norm::LpNorm;
use crate::wavelet::{analysis_step, synthesis_step, FilterBank, LevelNorms};

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major intensities.
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Image> {
        checked_log2(width)?;
        checked_log2(height)?;
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        check_finite(&pixels)?;
        Ok(Image { width, height, pixels })
    }

    /// Converts a greymap, replicating the last row and column up to powers
    /// of two when `pad` is set.
    pub fn from_pgm(p: &Pgm, pad: bool) -> Result<Image> {
        let (w, h) = if pad {
            (p.width.next_power_of_two(), p.height.next_power_of_two())
        } else {
            (p.width, p.height)
        };
        let mut pixels = Vec::with_capacity(w * h);
        for r in 0..h {
            let sr = r.min(p.height - 1);
            for c in 0..w {
                pixels.push(f64::from(p.pixels[sr * p.width + c.min(p.width - 1)]));
            }
        }
        Image::new(w, h, pixels)
    }

    /// Clamps to `[0, maxval]` and rounds.
    pub fn to_pgm(&self, maxval: u16) -> Pgm {
        Pgm {
            width: self.width,
            height: self.height,
            maxval,
            pixels: self
                .pixels
                .iter()
                .map(|&v| v.clamp(0.0, f64::from(maxval)).round() as u16)
                .collect(),
        }
    }

    /// Deterministic greyscale card: gradient, checkerboard, disc and bars.
    pub fn test_card(width: usize, height: usize) -> Result<Image> {
        let mut px = Vec::with_capacity(width * height);
        let (cx, cy) = (width as f64 * 0.62, height as f64 * 0.38);
        let rad = width.min(height) as f64 * 0.22;
        for r in 0..height {
            for c in 0..width {
                let (x, y) = (c as f64, r as f64);
                let mut v = 40.0 + 120.0 * x / width as f64;
                if r < height / 4 && ((c * 8 / width) + (r * 8 / height)) % 2 == 0 {
                    v += 60.0;
                }
                if (x - cx).powi(2) + (y - cy).powi(2) <= rad * rad {
                    v = 230.0;
                }
                if r >= 3 * height / 4 {
                    v = [10.0, 90.0, 170.0, 250.0][c * 4 / width];
                }
                px.push(v);
            }
        }
        Image::new(width, height, px)
    }
}

/// Number of decomposition levels: limited by the shorter side.
pub fn levels2d(width: usize, height: usize) -> u32 {
    width.trailing_zeros().min(height.trailing_zeros())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subband {
    /// Coarsest low-pass block.
    Scaling,
    /// Row high-pass, column low-pass.
    HL,
    /// Row low-pass, column high-pass.
    LH,
    HH,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient2D {
    pub level: u32,
    pub subband: Subband,
    /// Row shift within the subband.
    pub s1: usize,
    /// Column shift within the subband.
    pub s2: usize,
    pub value: f64,
}

/// Coefficients in the Mallat layout of an image of the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform2D {
    pub width: usize,
    pub height: usize,
    pub levels: u32,
    pub values: Vec<f64>,
}

impl Transform2D {
    /// Level and subband of the layout cell `(row, col)`.
    pub fn locate(&self, row: usize, col: usize) -> (u32, Subband, usize, usize) {
        for j in 1..=self.levels {
            let (h, w) = (self.height >> j, self.width >> j);
            let (top, left) = (row < h, col < w);
            if row < 2 * h && col < 2 * w && !(top && left) {
                let band = match (top, left) {
                    (true, false) => Subband::HL,
                    (false, true) => Subband::LH,
                    _ => Subband::HH,
                };
                return (j, band, row % h, col % w);
            }
        }
        (self.levels, Subband::Scaling, row, col)
    }

    pub fn coefficients(&self) -> Vec<Coefficient2D> {
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| (r, c)))
            .map(|(r, c)| {
                let (level, subband, s1, s2) = self.locate(r, c);
                Coefficient2D {
                    level,
                    subband,
                    s1,
                    s2,
                    value: self.values[r * self.width + c],
                }
            })
            .collect()
    }
}

fn rows_forward(buf: &mut [f64], stride: usize, w: usize, h: usize, fb: &FilterBank) {
    buf.par_chunks_mut(stride).take(h).for_each(|row| {
        let (lo, hi) = analysis_step(&row[..w], fb, 1.0);
        row[..w / 2].copy_from_slice(&lo);
        row[w / 2..w].copy_from_slice(&hi);
    });
}

fn rows_inverse(buf: &mut [f64], stride: usize, w: usize, h: usize, fb: &FilterBank) {
    buf.par_chunks_mut(stride).take(h).for_each(|row| {
        let mut out = vec![0.0; w];
        synthesis_step(&row[..w / 2], &row[w / 2..w], fb, 1.0, &mut out);
        row[..w].copy_from_slice(&out);
    });
}

fn columns(buf: &mut [f64], stride: usize, w: usize, h: usize, fb: &FilterBank, forward: bool) {
    let cols: Vec<Vec<f64>> = (0..w)
        .into_par_iter()
        .map(|c| {
            let col: Vec<f64> = (0..h).map(|r| buf[r * stride + c]).collect();
            if forward {
                let (lo, hi) = analysis_step(&col, fb, 1.0);
                lo.into_iter().chain(hi).collect()
            } else {
                let mut out = vec![0.0; h];
                synthesis_step(&col[..h / 2], &col[h / 2..], fb, 1.0, &mut out);
                out
            }
        })
        .collect();
    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            buf[r * stride + c] = v;
        }
    }
}

pub fn transform2d(img: &Image, fb: &FilterBank) -> Result<Transform2D> {
    let (w, h) = (img.width, img.height);
    checked_log2(w)?;
    checked_log2(h)?;
    check_finite(&img.pixels)?;
    let levels = levels2d(w, h);
    let mut buf = img.pixels.clone();
    for j in 0..levels {
        let (cw, ch) = (w >> j, h >> j);
        rows_forward(&mut buf, w, cw, ch, fb);
        columns(&mut buf, w, cw, ch, fb, true);
    }
    Ok(Transform2D {
        width: w,
        height: h,
        levels,
        values: buf,
    })
}

pub fn inverse2d(t: &Transform2D, fb: &FilterBank) -> Result<Image> {
    let (w, h) = (t.width, t.height);
    check_finite(&t.values)?;
    let mut buf = t.values.clone();
    for j in (0..t.levels).rev() {
        let (cw, ch) = (w >> j, h >> j);
        columns(&mut buf, w, cw, ch, fb, false);
        rows_inverse(&mut buf, w, cw, ch, fb);
    }
    Image::new(w, h, buf)
}

/// `||psi||_p` of every layout cell: the product of the row and column factors.
pub fn basis_norms2d(width: usize, height: usize, fb: &FilterBank, p: LpNorm) -> Result<Vec<f64>> {
    let nw = LevelNorms::get(fb, width, p)?;
    let nh = LevelNorms::get(fb, height, p)?;
    let shape = Transform2D {
        width,
        height,
        levels: levels2d(width, height),
        values: Vec::new(),
    };
    let mut out = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let (j, band, _, _) = shape.locate(r, c);
            let ju = j as usize;
            let (row_f, col_f) = match band {
                Subband::Scaling => (nw.scaling[ju], nh.scaling[ju]),
                Subband::HL => (nw.detail[ju], nh.scaling[ju]),
                Subband::LH => (nw.scaling[ju], nh.detail[ju]),
                Subband::HH => (nw.detail[ju], nh.detail[ju]),
            };
            out.push(row_f * col_f);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Greedy2D {
    pub p: LpNorm,
    pub budget: usize,
    /// Kept `(layout position, value)` pairs in position order.
    pub kept: Vec<(usize, f64)>,
    pub reconstruction: Image,
}

/// Keeps the `budget` largest `|w| / ||psi||_{p'}`; ties go to the earlier layout position.
pub fn greedy2d(img: &Image, budget: usize, p: LpNorm, fb: &FilterBank) -> Result<Greedy2D> {
    let n = img.width * img.height;
    if budget > n {
        return Err(Error::BudgetTooLarge { budget, n });
    }
    let t = transform2d(img, fb)?;
    let dual = basis_norms2d(img.width, img.height, fb, p.conjugate())?;
    let mut order: Vec<(f64, usize)> = t.values.iter().zip(&dual).map(|(v, d)| v.abs() / d).zip(0..).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut kept: Vec<(usize, f64)> = order[..budget].iter().map(|&(_, i)| (i, t.values[i])).collect();
    kept.sort_by_key(|k| k.0);
    let mut sparse = Transform2D {
        values: vec![0.0; n],
        ..t
    };
    for &(i, v) in &kept {
        sparse.values[i] = v;
    }
    Ok(Greedy2D {
        p,
        budget,
        kept,
        reconstruction: inverse2d(&sparse, fb)?,
    })
}

/// `(p, error)` rows for the requested norms.
pub fn image_errors(a: &Image, b: &Image, norms: &[LpNorm]) -> Result<Vec<(LpNorm, f64)>> {
    norms
        .iter()
        .map(|&p| crate::norm::lp_error(&a.pixels, &b.pixels, p, None).map(|e| (p, e)))
        .collect()
}
