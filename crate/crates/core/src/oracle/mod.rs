//! Exhaustive reference solvers for small instances.

mod lp;

use rayon::prelude::*;

use crate::error::{checked_log2, check_finite, Error, Result};
use crate::norm::{lp_error, LpNorm, Weights};
use crate::wavelet::{basis_vector, cascade_forward, FilterBank, Scaling, WaveletIndex};

pub const MAX_N: usize = 16;
pub const MAX_B: usize = 4;
pub const MAX_CUT_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ConvexMin,
    Retention,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub error: f64,
    /// Flat indices.
    pub support: Vec<usize>,
    pub values: Vec<f64>,
    pub method: Method,
}

struct Instance<'a> {
    f: &'a [f64],
    p: LpNorm,
    w: Vec<f64>,
    weights: Option<&'a Weights>,
    /// Orthonormal basis vectors by flat index minus one.
    psi: Vec<Vec<f64>>,
    coef: Vec<f64>,
}

impl<'a> Instance<'a> {
    fn new(f: &'a [f64], p: LpNorm, fb: &FilterBank, weights: Option<&'a Weights>) -> Result<Self> {
        let n = f.len();
        checked_log2(n)?;
        check_finite(f)?;
        if n > MAX_N {
            return Err(Error::SizeCap {
                n,
                cap: MAX_N,
                hint: "the oracle enumerates every support",
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
        let psi = (1..=n)
            .map(|flat| basis_vector(WaveletIndex::from_flat(flat, n)?, n, fb, Scaling::Orthonormal))
            .collect::<Result<Vec<_>>>()?;
        let coef = cascade_forward(f, fb, Scaling::Orthonormal)?.values;
        Ok(Instance {
            f,
            p,
            w: weights.map_or_else(|| vec![1.0; n], |w| w.as_slice().to_vec()),
            weights,
            psi,
            coef,
        })
    }

    fn residual(&self, support: &[usize], z: &[f64]) -> Vec<f64> {
        let mut r = self.f.to_vec();
        for (&i, &zi) in support.iter().zip(z) {
            r.iter_mut().zip(&self.psi[i]).for_each(|(x, v)| *x -= zi * v);
        }
        r
    }

    fn error(&self, support: &[usize], z: &[f64]) -> f64 {
        let approx: Vec<f64> = self
            .f
            .iter()
            .zip(self.residual(support, z))
            .map(|(a, r)| a - r)
            .collect();
        lp_error(self.f, &approx, self.p, self.weights).expect("lengths agree")
    }

    fn weighted_norm(&self, v: &[f64]) -> f64 {
        self.p.norm(v.iter().zip(&self.w).map(|(a, b)| a * b))
    }

    /// Best values on a fixed support (0-based positions).
    fn solve_support(&self, support: &[usize]) -> Vec<f64> {
        if support.is_empty() {
            return Vec::new();
        }
        if self.p == LpNorm::TWO {
            if self.weights.is_none() {
                return support.iter().map(|&i| self.coef[i]).collect();
            }
            return self.weighted_least_squares(support);
        }
        if self.p == LpNorm::ONE || self.p.is_inf() {
            if let Some(z) = self.solve_lp(support) {
                return z;
            }
        }
        self.coordinate_descent(support)
    }

    fn weighted_least_squares(&self, s: &[usize]) -> Vec<f64> {
        let k = s.len();
        let mut m = vec![vec![0.0; k + 1]; k];
        for a in 0..k {
            for b in 0..k {
                m[a][b] = (0..self.f.len())
                    .map(|t| self.w[t] * self.w[t] * self.psi[s[a]][t] * self.psi[s[b]][t])
                    .sum();
            }
            m[a][k] = (0..self.f.len())
                .map(|t| self.w[t] * self.w[t] * self.psi[s[a]][t] * self.f[t])
                .sum();
        }
        gauss_solve(m)
    }

    /// l1 / l-infinity fit as a linear program over `z = z+ - z-`.
    fn solve_lp(&self, s: &[usize]) -> Option<Vec<f64>> {
        let n = self.f.len();
        let k = s.len();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let mut c;
        if self.p.is_inf() {
            // columns: z+ (k), z- (k), t, sigma (n), tau (n)
            let cols = 2 * k + 1 + 2 * n;
            c = vec![0.0; cols];
            c[2 * k] = 1.0;
            for i in 0..n {
                for sign in [1.0, -1.0] {
                    let mut row = vec![0.0; cols];
                    for (m, &si) in s.iter().enumerate() {
                        let v = sign * self.w[i] * self.psi[si][i];
                        row[m] = v;
                        row[k + m] = -v;
                    }
                    row[2 * k] = 1.0;
                    let slack = if sign > 0.0 { 2 * k + 1 + i } else { 2 * k + 1 + n + i };
                    row[slack] = -1.0;
                    a.push(row);
                    b.push(sign * self.w[i] * self.f[i]);
                }
            }
        } else {
            // columns: z+ (k), z- (k), u+ (n), u- (n)
            let cols = 2 * k + 2 * n;
            c = vec![0.0; cols];
            c[2 * k..].iter_mut().for_each(|x| *x = 1.0);
            for i in 0..n {
                let mut row = vec![0.0; cols];
                for (m, &si) in s.iter().enumerate() {
                    let v = self.w[i] * self.psi[si][i];
                    row[m] = v;
                    row[k + m] = -v;
                }
                row[2 * k + i] = 1.0;
                row[2 * k + n + i] = -1.0;
                a.push(row);
                b.push(self.w[i] * self.f[i]);
            }
        }
        match lp::minimize(&c, &a, &b) {
            lp::LpOutcome::Optimal(x) => Some((0..k).map(|m| x[m] - x[k + m]).collect()),
            _ => None,
        }
    }

    /// Cyclic coordinate minimization with golden-section line search.
    fn coordinate_descent(&self, s: &[usize]) -> Vec<f64> {
        let mut z: Vec<f64> = s.iter().map(|&i| self.coef[i]).collect();
        let mut r = self.residual(s, &z);
        let mut cur = self.weighted_norm(&r);
        for _ in 0..10_000 {
            let before = cur;
            for (m, &i) in s.iter().enumerate() {
                let psi = &self.psi[i];
                let pn = self.weighted_norm(psi);
                if pn == 0.0 {
                    continue;
                }
                let radius = 2.0 * cur / pn + 1e-12;
                let eval = |alpha: f64| {
                    self.p
                        .norm(r.iter().zip(psi).zip(&self.w).map(|((x, v), w)| w * (x - alpha * v)))
                };
                let alpha = golden_section(eval, -radius, radius, 1e-12 * (1.0 + radius));
                let val = eval(alpha);
                if val < cur {
                    z[m] += alpha;
                    r.iter_mut().zip(psi).for_each(|(x, v)| *x -= alpha * v);
                    cur = val;
                }
            }
            if before - cur < 1e-10 {
                break;
            }
        }
        z
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = (a + b) / 2.0;
    // the bracket may have collapsed away from 0 on a plateau; keep the best probe
    [mid, 0.0]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .expect("non-empty")
}

fn gauss_solve(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let k = m.len();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("non-empty");
        m.swap(col, piv);
        let d = m[col][col];
        if d.abs() < 1e-300 {
            continue;
        }
        for r in 0..k {
            if r != col {
                let f = m[r][col] / d;
                for c in col..=k {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    (0..k)
        .map(|i| if m[i][i].abs() < 1e-300 { 0.0 } else { m[i][k] / m[i][i] })
        .collect()
}

/// Every `size`-subset of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=n - left {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if size <= n {
        rec(0, n, size, &mut Vec::new(), &mut out);
    }
    out
}

fn check_budget(budget: usize, n: usize) -> Result<()> {
    if budget > MAX_B && budget < n {
        return Err(Error::SizeCap {
            n: budget,
            cap: MAX_B,
            hint: "the oracle budget is capped",
        });
    }
    Ok(())
}

fn best(inst: &Instance<'_>, supports: Vec<Vec<usize>>, method: Method) -> OracleResult {
    let solved: Vec<(f64, Vec<usize>, Vec<f64>)> = supports
        .into_par_iter()
        .map(|s| {
            let z = match method {
                Method::ConvexMin => inst.solve_support(&s),
                Method::Retention => s.iter().map(|&i| inst.coef[i]).collect(),
            };
            (inst.error(&s, &z), s, z)
        })
        .collect();
    let (error, s, z) = solved
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least the empty support");
    OracleResult {
        error,
        support: s.iter().map(|i| i + 1).collect(),
        values: z,
        method,
    }
}

/// Minimum of `||f - sum_{i in S} z_i psi_i||_p` over supports `|S| <= B` and real `z`.
pub fn brute_force_unrestricted(f: &[f64], budget: usize, p: LpNorm, fb: &FilterBank) -> Result<OracleResult> {
    brute_force_unrestricted_weighted(f, budget, p, fb, None)
}

pub fn brute_force_unrestricted_weighted(
    f: &[f64],
    budget: usize,
    p: LpNorm,
    fb: &FilterBank,
    weights: Option<&Weights>,
) -> Result<OracleResult> {
    let inst = Instance::new(f, p, fb, weights)?;
    let n = f.len();
    check_budget(budget, n)?;
    // values may be zero, so supports of exactly min(B, n) cover all smaller ones
    Ok(best(&inst, subsets(n, budget.min(n)), Method::ConvexMin))
}

/// Unrestricted optimum over an explicit family of supports (0-based flat positions).
pub fn unrestricted_over(
    f: &[f64],
    p: LpNorm,
    fb: &FilterBank,
    supports: Vec<Vec<usize>>,
) -> Result<OracleResult> {
    let inst = Instance::new(f, p, fb, None)?;
    let mut supports = supports;
    if supports.is_empty() {
        supports.push(Vec::new());
    }
    Ok(best(&inst, supports, Method::ConvexMin))
}

/// Minimum over supports `|S| <= B` with `z_i` fixed to `<f, psi_i>`.
pub fn brute_force_restricted(f: &[f64], budget: usize, p: LpNorm, fb: &FilterBank) -> Result<OracleResult> {
    brute_force_restricted_weighted(f, budget, p, fb, None)
}

pub fn brute_force_restricted_weighted(
    f: &[f64],
    budget: usize,
    p: LpNorm,
    fb: &FilterBank,
    weights: Option<&Weights>,
) -> Result<OracleResult> {
    let inst = Instance::new(f, p, fb, weights)?;
    let n = f.len();
    check_budget(budget, n)?;
    let supports = (0..=budget.min(n)).flat_map(|k| subsets(n, k)).collect();
    Ok(best(&inst, supports, Method::Retention))
}

/// Result of [`brute_force_cut`]: the best cut, its budget split and the total error.
#[derive(Debug, Clone, PartialEq)]
pub struct CutOracleResult {
    pub error: f64,
    /// Dictionary nodes `(j, p)` in left-to-right order.
    pub cut: Vec<(u32, usize)>,
    pub budgets: Vec<usize>,
    pub cuts_examined: usize,
}

/// Enumerates every dictionary cut and every budget split with sum at most `budget`.
///
/// `block_error(block, b)` returns the inner error of a block with budget `b`.
/// Totals combine per dictionary node (max for l-infinity, sum of p-th powers
/// otherwise), the same association the best-basis recursion uses.
pub fn brute_force_cut(
    f: &[f64],
    budget: usize,
    p: LpNorm,
    min_block: usize,
    block_error: impl Fn(&[f64], usize) -> Result<f64>,
) -> Result<CutOracleResult> {
    let n = f.len();
    checked_log2(n)?;
    if n > MAX_CUT_N {
        return Err(Error::SizeCap {
            n,
            cap: MAX_CUT_N,
            hint: "cut enumeration is exponential",
        });
    }
    let cuts = crate::best_basis::enumerate_cuts(n, min_block)?;
    let mut cache = std::collections::HashMap::new();
    let mut err_of = |j: u32, pos: usize, b: usize| -> Result<f64> {
        if let Some(&e) = cache.get(&(j, pos, b)) {
            return Ok(e);
        }
        let len = 1usize << j;
        let e = block_error(&f[pos * len..(pos + 1) * len], b)?;
        cache.insert((j, pos, b), e);
        Ok(e)
    };
    let top = n.trailing_zeros();
    let mut best: Option<CutOracleResult> = None;
    for cut in &cuts {
        let caps: Vec<usize> = cut.iter().map(|&(j, _)| budget.min(1 << j)).collect();
        let mut alloc = vec![0usize; cut.len()];
        loop {
            if alloc.iter().sum::<usize>() <= budget {
                let mut errs = Vec::with_capacity(cut.len());
                for (k, &(j, pos)) in cut.iter().enumerate() {
                    errs.push(err_of(j, pos, alloc[k])?);
                }
                let total = finish_total(combine_tree(top, 0, cut, &errs, p), p);
                if best.as_ref().is_none_or(|b| total < b.error) {
                    best = Some(CutOracleResult {
                        error: total,
                        cut: cut.clone(),
                        budgets: alloc.clone(),
                        cuts_examined: cuts.len(),
                    });
                }
            }
            // odometer over allocations
            let mut k = 0;
            while k < alloc.len() {
                if alloc[k] < caps[k] {
                    alloc[k] += 1;
                    break;
                }
                alloc[k] = 0;
                k += 1;
            }
            if k == alloc.len() {
                break;
            }
        }
    }
    best.ok_or_else(|| Error::Internal("no cut enumerated".into()))
}

/// Folds block errors up the dictionary tree in node order.
fn combine_tree(j: u32, pos: usize, cut: &[(u32, usize)], errs: &[f64], p: LpNorm) -> f64 {
    if let Some(k) = cut.iter().position(|&c| c == (j, pos)) {
        return crate::best_basis::lift(errs[k], p);
    }
    let l = combine_tree(j - 1, 2 * pos, cut, errs, p);
    let r = combine_tree(j - 1, 2 * pos + 1, cut, errs, p);
    crate::best_basis::combine(l, r, p)
}

fn finish_total(v: f64, p: LpNorm) -> f64 {
    crate::best_basis::unlift(v, p)
}
