use std::fmt;
use std::str::FromStr;

use super::filter::FilterBank;
use super::index::{level_of_pos, Kind, WaveletIndex};
use crate::error::{check_finite, checked_log2, Error, Result};

/// Normalization of the analysis basis.
///
/// `AScaled` coefficients at level `j` are `2^{-j/2}` times the orthonormal
/// ones and pair with the `BScaled` synthesis vectors `2^{j/2} ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Scaling {
    #[default]
    Orthonormal,
    AScaled,
    BScaled,
}

impl Scaling {
    /// Per-level gain applied to the analysis filters.
    pub(crate) fn gain(self) -> f64 {
        match self {
            Scaling::Orthonormal => 1.0,
            Scaling::AScaled => std::f64::consts::FRAC_1_SQRT_2,
            Scaling::BScaled => std::f64::consts::SQRT_2,
        }
    }

    /// Factor converting an orthonormal coefficient at `level` into this scaling.
    pub fn factor(self, level: u32) -> f64 {
        match self {
            Scaling::Orthonormal => 1.0,
            Scaling::AScaled => 2f64.powf(-(level as f64) / 2.0),
            Scaling::BScaled => 2f64.powf(level as f64 / 2.0),
        }
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scaling::Orthonormal => "orthonormal",
            Scaling::AScaled => "a-scaled",
            Scaling::BScaled => "b-scaled",
        })
    }
}

impl FromStr for Scaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orthonormal" => Ok(Scaling::Orthonormal),
            "a-scaled" => Ok(Scaling::AScaled),
            "b-scaled" => Ok(Scaling::BScaled),
            _ => Err(Error::InvalidArgument(format!("unknown scaling '{s}'"))),
        }
    }
}

/// All expansion coefficients of a signal, stored by flat index minus one.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub scaling: Scaling,
    pub values: Vec<f64>,
}

impl CoefficientVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coefficient by 1-based flat index.
    pub fn get(&self, flat: usize) -> f64 {
        self.values[flat - 1]
    }

    pub fn levels(&self) -> u32 {
        self.values.len().trailing_zeros()
    }

    /// `(index, value)` pairs in flat order.
    pub fn iter(&self) -> impl Iterator<Item = (WaveletIndex, f64)> + '_ {
        let n = self.values.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(pos, &v)| (WaveletIndex::from_flat(pos + 1, n).expect("valid"), v))
    }

    /// Re-expresses the coefficients in another scaling.
    pub fn rescaled(&self, to: Scaling) -> CoefficientVector {
        let levels = self.levels();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(pos, &v)| {
                let j = level_of_pos(pos, levels);
                v / self.scaling.factor(j) * to.factor(j)
            })
            .collect();
        CoefficientVector { scaling: to, values }
    }
}

/// One analysis step on a periodic sequence: returns `(approx, detail)`.
pub(crate) fn analysis_step(a: &[f64], fb: &FilterBank, gain: f64) -> (Vec<f64>, Vec<f64>) {
    let m = a.len();
    let half = m / 2;
    let mut lo = vec![0.0; half];
    let mut hi = vec![0.0; half];
    let (h, g) = (fb.h(), fb.g());
    for t in 0..half {
        let mut sa = 0.0;
        let mut sd = 0.0;
        for k in 0..h.len() {
            let x = a[(2 * t + k) % m];
            sa += h[k] * x;
            sd += g[k] * x;
        }
        lo[t] = gain * sa;
        hi[t] = gain * sd;
    }
    (lo, hi)
}

/// Transpose of [`analysis_step`] scaled by `1/gain`; `out` has twice the input length.
pub(crate) fn synthesis_step(lo: &[f64], hi: &[f64], fb: &FilterBank, gain: f64, out: &mut [f64]) {
    let m = out.len();
    out.iter_mut().for_each(|x| *x = 0.0);
    let (h, g) = (fb.h(), fb.g());
    let inv = 1.0 / gain;
    for t in 0..lo.len() {
        let (a, d) = (lo[t] * inv, hi[t] * inv);
        for k in 0..h.len() {
            out[(2 * t + k) % m] += h[k] * a + g[k] * d;
        }
    }
}

/// Full periodic cascade.
pub fn cascade_forward(f: &[f64], fb: &FilterBank, scaling: Scaling) -> Result<CoefficientVector> {
    let n = f.len();
    checked_log2(n)?;
    check_finite(f)?;
    let gain = scaling.gain();
    let mut values = vec![0.0; n];
    let mut a = f.to_vec();
    while a.len() > 1 {
        let (lo, hi) = analysis_step(&a, fb, gain);
        values[hi.len()..2 * hi.len()].copy_from_slice(&hi);
        a = lo;
    }
    values[0] = a[0];
    Ok(CoefficientVector { scaling, values })
}

/// Inverse cascade; a-scaled input is synthesized with the b-scaled filters and vice versa.
pub fn cascade_inverse(c: &CoefficientVector, fb: &FilterBank) -> Result<Vec<f64>> {
    let n = c.values.len();
    checked_log2(n)?;
    check_finite(&c.values)?;
    let gain = c.scaling.gain();
    let mut a = vec![c.values[0]];
    let mut buf = Vec::with_capacity(n);
    let mut half = 1;
    while half < n {
        buf.resize(2 * half, 0.0);
        synthesis_step(&a, &c.values[half..2 * half], fb, gain, &mut buf);
        std::mem::swap(&mut a, &mut buf);
        half *= 2;
    }
    Ok(a)
}

/// Materializes a basis vector (detail or scaling at any level) under `scaling`.
pub fn basis_vector(idx: WaveletIndex, n: usize, fb: &FilterBank, scaling: Scaling) -> Result<Vec<f64>> {
    idx.validate(n)?;
    let j = idx.level;
    let width = n >> j;
    let mut a = vec![0.0; width];
    let mut d = vec![0.0; width];
    match idx.kind {
        Kind::Scaling => a[idx.shift] = 1.0,
        Kind::Detail => d[idx.shift] = 1.0,
    }
    // level j detail is created by one step from (a_j, d_j) into a_{j-1}
    let mut cur = if idx.kind == Kind::Detail {
        let mut out = vec![0.0; 2 * width];
        synthesis_step(&vec![0.0; width], &d, fb, 1.0, &mut out);
        out
    } else {
        a
    };
    let mut w = cur.len();
    while w < n {
        let mut out = vec![0.0; 2 * w];
        synthesis_step(&cur, &vec![0.0; w], fb, 1.0, &mut out);
        cur = out;
        w *= 2;
    }
    let factor = scaling.factor(j);
    if factor != 1.0 {
        cur.iter_mut().for_each(|x| *x *= factor);
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const F: [f64; 4] = [1.0, 4.0, 5.0, 6.0];

    #[test]
    fn haar_examples() {
        let fb = FilterBank::haar();
        let s = std::f64::consts::SQRT_2;
        let c = cascade_forward(&F, &fb, Scaling::Orthonormal).unwrap();
        let want = [8.0, -3.0, -3.0 / s, -1.0 / s];
        for (a, b) in c.values.iter().zip(want) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let ca = cascade_forward(&F, &fb, Scaling::AScaled).unwrap();
        for (a, b) in ca.values.iter().zip([4.0, -1.5, -1.5, -0.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        for c in [c, ca] {
            let back = cascade_inverse(&c, &fb).unwrap();
            for (a, b) in back.iter().zip(F) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn constant_has_no_detail() {
        for fb in FilterBank::all() {
            let c = cascade_forward(&[2.5; 16], &fb, Scaling::Orthonormal).unwrap();
            assert!(c.values[1..].iter().all(|v| v.abs() < 1e-12), "{fb}");
            assert_abs_diff_eq!(c.values[0], 2.5 * 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_and_errors() {
        let fb = FilterBank::db2();
        let z = CoefficientVector {
            scaling: Scaling::BScaled,
            values: vec![0.0; 8],
        };
        assert_eq!(cascade_inverse(&z, &fb).unwrap(), vec![0.0; 8]);
        assert!(matches!(
            cascade_forward(&[1.0, 2.0, 3.0], &fb, Scaling::Orthonormal),
            Err(Error::NotPowerOfTwo { len: 3 })
        ));
        assert!(matches!(
            cascade_forward(&[1.0, f64::NAN], &fb, Scaling::Orthonormal),
            Err(Error::NonFinite { index: 1 })
        ));
        assert_eq!(cascade_forward(&[3.0], &fb, Scaling::Orthonormal).unwrap().values, vec![3.0]);
    }

    #[test]
    fn scalings_relate_by_level_factor() {
        let f: Vec<f64> = (0..32).map(|i| ((i * 7) % 11) as f64 - 3.0).collect();
        for fb in FilterBank::all() {
            let o = cascade_forward(&f, &fb, Scaling::Orthonormal).unwrap();
            for s in [Scaling::AScaled, Scaling::BScaled] {
                let c = cascade_forward(&f, &fb, s).unwrap();
                let r = o.rescaled(s);
                for (a, b) in c.values.iter().zip(&r.values) {
                    assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn basis_vectors_match_examples() {
        let fb = FilterBank::haar();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = basis_vector(WaveletIndex::detail(1, 0), 4, &fb, Scaling::Orthonormal).unwrap();
        for (a, b) in v.iter().zip([s, -s, 0.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let r = basis_vector(WaveletIndex::root(4).unwrap(), 4, &fb, Scaling::Orthonormal).unwrap();
        assert!(r.iter().all(|x| (x - 0.5).abs() < 1e-15));
        let b = basis_vector(WaveletIndex::detail(2, 0), 4, &fb, Scaling::BScaled).unwrap();
        for (a, e) in b.iter().zip([1.0, 1.0, -1.0, -1.0]) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn basis_vectors_are_transform_rows() {
        // <f, psi_i> computed directly agrees with the cascade output
        let n = 16;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        for fb in FilterBank::all() {
            let c = cascade_forward(&f, &fb, Scaling::Orthonormal).unwrap();
            for flat in 1..=n {
                let idx = WaveletIndex::from_flat(flat, n).unwrap();
                let v = basis_vector(idx, n, &fb, Scaling::Orthonormal).unwrap();
                let dot: f64 = v.iter().zip(&f).map(|(a, b)| a * b).sum();
                assert_abs_diff_eq!(dot, c.get(flat), epsilon = 1e-12);
                let e: f64 = v.iter().map(|x| x * x).sum();
                assert_abs_diff_eq!(e, 1.0, epsilon = 1e-12);
            }
        }
    }
}
