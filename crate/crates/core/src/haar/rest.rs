//! Exact restricted optimum over the Haar coefficient tree.
//!
//! A node's table is indexed by every value its retained ancestors can
//! contribute, so row counts double per level and the whole solve is
//! quadratic in `n`. Only the current root-to-leaf path is held in memory.

use super::table::convolve;
use crate::error::{check_finite, checked_log2, Error, Result};
use crate::norm::{LpNorm, Weights};
use crate::repr::{Representation, Term};
use crate::wavelet::FilterBank;

pub const REST_CAP: usize = 16384;

struct Rest<'a> {
    f: &'a [f64],
    w: Vec<f64>,
    prefix: Vec<f64>,
    p: LpNorm,
    budget: usize,
}

impl Rest<'_> {
    fn lift(&self, x: f64) -> f64 {
        let a = x.abs();
        match self.p.p() {
            _ if self.p.is_inf() => a,
            1.0 => a,
            2.0 => a * a,
            p => a.powf(p),
        }
    }

    fn unlift(&self, x: f64) -> f64 {
        match self.p.p() {
            _ if self.p.is_inf() => x,
            1.0 => x,
            p => x.powf(1.0 / p),
        }
    }

    fn nb(&self, h: u32) -> usize {
        if h == 0 {
            1
        } else {
            self.budget.min((1usize << h) - 1) + 1
        }
    }

    fn mean(&self, start: usize, len: usize) -> f64 {
        (self.prefix[start + len] - self.prefix[start]) / len as f64
    }

    /// Half-difference of the two child averages: the b-scaled coefficient.
    fn detail(&self, h: u32, start: usize) -> f64 {
        let half = 1usize << (h - 1);
        (self.mean(start, half) - self.mean(start + half, half)) / 2.0
    }

    /// Row-major `vlist.len() x nb(h)` table of lifted errors.
    fn solve(&self, h: u32, start: usize, vlist: &[f64]) -> Vec<f64> {
        if h == 0 {
            let (x, w) = (self.f[start], self.w[start]);
            return vlist.iter().map(|&v| self.lift(w * (v - x))).collect();
        }
        let o = self.detail(h, start);
        let half = 1usize << (h - 1);
        let mut lv = Vec::with_capacity(2 * vlist.len());
        let mut rv = Vec::with_capacity(2 * vlist.len());
        for &v in vlist {
            lv.extend([v, v + o]);
            rv.extend([v, v - o]);
        }
        let left = self.solve(h - 1, start, &lv);
        let right = self.solve(h - 1, start + half, &rv);
        drop((lv, rv));
        let (nbc, nb) = (self.nb(h - 1), self.nb(h));
        let inf = self.p.is_inf();
        let mut out = vec![f64::INFINITY; vlist.len() * nb];
        let mut tmp = vec![0.0; nb];
        let mut split = vec![(0u32, 0u32); nb];
        for (s, row) in out.chunks_mut(nb).enumerate() {
            let a = 2 * s;
            convolve(inf, &left[a * nbc..(a + 1) * nbc], &right[a * nbc..(a + 1) * nbc], row, &mut split);
            let a = a + 1;
            convolve(
                inf,
                &left[a * nbc..(a + 1) * nbc],
                &right[a * nbc..(a + 1) * nbc],
                &mut tmp[..nb - 1],
                &mut split[..nb - 1],
            );
            for b in 1..nb {
                row[b] = row[b].min(tmp[b - 1]);
            }
        }
        out
    }

    /// Re-derives the choices below a node entered with value `v` and budget `b`.
    fn replay(&self, h: u32, start: usize, v: f64, b: usize, levels: u32, terms: &mut Vec<Term>) {
        if h == 0 || b == 0 {
            return;
        }
        let b = b.min(self.nb(h) - 1);
        let o = self.detail(h, start);
        let half = 1usize << (h - 1);
        let left = self.solve(h - 1, start, &[v, v + o]);
        let right = self.solve(h - 1, start + half, &[v, v - o]);
        let nbc = self.nb(h - 1);
        let inf = self.p.is_inf();
        let mut skip = vec![0.0; b + 1];
        let mut skip_split = vec![(0u32, 0u32); b + 1];
        convolve(inf, &left[..nbc], &right[..nbc], &mut skip, &mut skip_split);
        let mut keep = vec![0.0; b];
        let mut keep_split = vec![(0u32, 0u32); b];
        convolve(inf, &left[nbc..], &right[nbc..], &mut keep, &mut keep_split);
        let (i, j, vl, vr) = if skip[b] <= keep[b - 1] {
            let (i, j) = skip_split[b];
            (i, j, v, v)
        } else {
            let pos = (self.f.len() >> h) + (start >> h);
            terms.push(Term {
                flat: pos + 1,
                value: 2f64.powf(f64::from(h) / 2.0) * o,
            });
            let (i, j) = keep_split[b - 1];
            (i, j, v + o, v - o)
        };
        debug_assert!(levels >= h);
        self.replay(h - 1, start, vl, i as usize, levels, terms);
        self.replay(h - 1, start + half, vr, j as usize, levels, terms);
    }
}

/// Exact best representation using at most `budget` retained Haar coefficients.
///
/// Quadratic time; inputs longer than [`REST_CAP`] are rejected.
pub fn rest_optimal(f: &[f64], budget: usize, p: LpNorm, weights: Option<&Weights>) -> Result<Representation> {
    let n = f.len();
    let levels = checked_log2(n)?;
    check_finite(f)?;
    if budget > n {
        return Err(Error::BudgetTooLarge { budget, n });
    }
    if n > REST_CAP {
        return Err(Error::SizeCap {
            n,
            cap: REST_CAP,
            hint: "the exact restricted solver is quadratic; use the hybrid algorithm instead",
        });
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: w.len(),
            });
        }
    }
    let haar = FilterBank::haar();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &x in f {
        prefix.push(prefix.last().unwrap() + x);
    }
    let rest = Rest {
        f,
        w: weights.map_or_else(|| vec![1.0; n], |w| w.as_slice().to_vec()),
        prefix,
        p,
        budget,
    };
    let mean = rest.mean(0, n);
    let root = 2f64.powf(f64::from(levels) / 2.0) * mean;
    let mut terms = Vec::new();
    if budget == 0 {
        return Representation::verified(f, &haar, Some(p), budget, terms, weights);
    }
    if levels == 0 {
        terms.push(Term { flat: 1, value: root });
        return Representation::verified(f, &haar, Some(p), budget, terms, weights);
    }
    let top = rest.solve(levels, 0, &[0.0, mean]);
    let nb = rest.nb(levels);
    let without = top[budget.min(nb - 1)];
    let with = top[nb + (budget - 1).min(nb - 1)];
    if with < without {
        terms.push(Term { flat: 1, value: root });
        rest.replay(levels, 0, mean, budget - 1, levels, &mut terms);
    } else {
        rest.replay(levels, 0, 0.0, budget, levels, &mut terms);
    }
    let r = Representation::verified(f, &haar, Some(p), budget, terms, weights)?;
    let dp = rest.unlift(with.min(without));
    debug_assert!(
        (r.reported_error - dp).abs() <= 1e-9 * (1.0 + dp),
        "dp {dp} vs verified {}",
        r.reported_error
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::greedy_select;
    use crate::oracle::brute_force_restricted;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_examples() {
        let f = [1.0, 4.0, 5.0, 6.0];
        let r = rest_optimal(&f, 1, LpNorm::INF, None).unwrap();
        assert_abs_diff_eq!(r.reported_error, 3.0, epsilon = 1e-12);
        assert_eq!(r.terms.len(), 1);
        assert_eq!(r.terms[0].flat, 1);
        assert!(rest_optimal(&f, 4, LpNorm::ONE, None).unwrap().reported_error < 1e-12);
        assert_abs_diff_eq!(
            rest_optimal(&f, 0, LpNorm::TWO, None).unwrap().reported_error,
            LpNorm::TWO.norm(f),
            epsilon = 1e-12
        );
        let one = rest_optimal(&[2.5], 1, LpNorm::INF, None).unwrap();
        assert_eq!(one.reported_error, 0.0);
    }

    #[test]
    fn matches_brute_force() {
        let fb = FilterBank::haar();
        let f = [0.5, -2.0, 3.5, 1.0, 0.0, 4.0, -1.5, 2.5];
        for p in [LpNorm::ONE, LpNorm::TWO, LpNorm::INF, LpNorm::new(3.0).unwrap()] {
            for b in 0..=4 {
                let exact = brute_force_restricted(&f, b, p, &fb).unwrap().error;
                let r = rest_optimal(&f, b, p, None).unwrap();
                assert_abs_diff_eq!(r.reported_error, exact, epsilon = 1e-9);
                assert!(r.terms.len() <= b);
            }
        }
    }

    #[test]
    fn l2_agrees_with_greedy() {
        let f: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64 - 3.0).collect();
        for b in [1, 5, 17] {
            let r = rest_optimal(&f, b, LpNorm::TWO, None).unwrap();
            let g = greedy_select(&f, b, LpNorm::TWO, &FilterBank::haar()).unwrap();
            assert_abs_diff_eq!(r.reported_error, g.reported_error, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_over_cap() {
        let f = vec![0.0; REST_CAP * 2];
        assert!(matches!(rest_optimal(&f, 1, LpNorm::INF, None), Err(Error::SizeCap { .. })));
    }
}
