//! Haar-basis dynamic programs: the streaming approximation scheme for
//! unrestricted values, its nearest-value restricted variant, and the exact
//! restricted optimum.

mod fptas;
mod rest;
mod table;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use rest::{rest_optimal, REST_CAP};
pub use table::{ErrorTable, GridSpec, Search};

use crate::error::{check_finite, checked_log2, Error, Result};
use crate::greedy::{greedy_select, scores};
use crate::norm::{LpNorm, Weights};
use crate::repr::{Representation, Term};
use crate::wavelet::{cascade_forward, FilterBank, Scaling};

/// Value-rounding scheme for the unrestricted search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Pick whichever of the two schemes has the smaller predicted work.
    #[default]
    Auto,
    /// One grid step for every node.
    Uniform,
    /// Coarser search steps near the leaves, re-rounded onto the root grid (finite p only).
    PerLevel,
}

/// Order in which guess rungs are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Binary search for the lowest rung that certifies its guess.
    #[default]
    Bisect,
    /// Every rung of the bracket, concurrently.
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FptasConfig {
    pub eps: f64,
    pub rounding: Rounding,
    pub schedule: Schedule,
    /// Extra refinement of the uniform grid step; 1 is the smallest safe grid.
    pub grid_constant: f64,
}

impl FptasConfig {
    pub fn new(eps: f64) -> Self {
        FptasConfig {
            eps,
            rounding: Rounding::Auto,
            schedule: Schedule::Bisect,
            grid_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RungStats {
    pub k: i64,
    pub guess: f64,
    pub rho: f64,
    pub ok: bool,
    pub error: f64,
    pub peak_live_tables: usize,
    pub max_grid: usize,
    pub cells: u64,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FptasStats {
    /// Resolved rounding scheme (`None` for the nearest-value variant or a shortcut).
    pub rounding: Option<Rounding>,
    pub zero_shortcut: bool,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub eps_prime: f64,
    pub rungs: Vec<RungStats>,
}

impl FptasStats {
    pub fn peak_live_tables(&self) -> usize {
        self.rungs.iter().map(|r| r.peak_live_tables).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Variant {
    Unrestricted(Rounding),
    Nearest,
}

/// `eps'` with `eps' (1 + eps') = eps`, so two `(1 + eps')` losses compose to `1 + eps`.
pub fn eps_prime(eps: f64) -> f64 {
    ((1.0 + 4.0 * eps).sqrt() - 1.0) / 2.0
}

/// `(1 + eps)`-approximate best B-term Haar representation with arbitrary values.
pub fn fptas(f: &[f64], budget: usize, p: LpNorm, eps: f64, weights: Option<&Weights>) -> Result<Representation> {
    fptas_with(f, budget, p, weights, &FptasConfig::new(eps)).map(|(r, _)| r)
}

pub fn fptas_with(
    f: &[f64],
    budget: usize,
    p: LpNorm,
    weights: Option<&Weights>,
    cfg: &FptasConfig,
) -> Result<(Representation, FptasStats)> {
    solve(f, budget, p, weights, cfg, Variant::Unrestricted(cfg.rounding))
}

/// [`fptas`] with the per-level rounding scheme forced.
pub fn fptas_finegrain(
    f: &[f64],
    budget: usize,
    p: LpNorm,
    eps: f64,
    weights: Option<&Weights>,
) -> Result<Representation> {
    let cfg = FptasConfig {
        rounding: Rounding::PerLevel,
        ..FptasConfig::new(eps)
    };
    fptas_with(f, budget, p, weights, &cfg).map(|(r, _)| r)
}

/// Searches only the two grid values nearest each coefficient (the root ranges
/// freely); within `(1 + eps)` of the best retained-coefficient representation.
pub fn hybrid(f: &[f64], budget: usize, p: LpNorm, eps: f64, weights: Option<&Weights>) -> Result<Representation> {
    hybrid_with(f, budget, p, weights, &FptasConfig::new(eps)).map(|(r, _)| r)
}

pub fn hybrid_with(
    f: &[f64],
    budget: usize,
    p: LpNorm,
    weights: Option<&Weights>,
    cfg: &FptasConfig,
) -> Result<(Representation, FptasStats)> {
    solve(f, budget, p, weights, cfg, Variant::Nearest)
}

/// Per-level search steps `eps' G / (2 B 2^{t/p} W)` at unit guess, for heights `0..=L`.
pub fn per_level_steps(n: usize, budget: usize, p: LpNorm, eps: f64, wmax: f64) -> Result<Vec<f64>> {
    let l = checked_log2(n)?;
    let ep = eps_prime(eps);
    Ok((0..=l)
        .map(|t| ep / (2.0 * budget.max(1) as f64 * p.root_of(2f64.powi(t as i32)) * wmax))
        .collect())
}

#[derive(Clone, Copy)]
struct Plan {
    n: usize,
    budget: usize,
    p: LpNorm,
    ep: f64,
    wmin: f64,
    wmax: f64,
    kappa: f64,
    variant: Variant,
}

impl Plan {
    fn uniform_rho(&self, g: f64) -> f64 {
        let levels = self.n.trailing_zeros() as usize;
        let m = self.budget.min(levels + 1) as f64;
        2.0 * self.ep * g / (self.kappa * self.wmax * self.p.root_of(self.n as f64) * m)
    }

    fn half_width(&self, g: f64) -> f64 {
        (1.0 + self.ep) * g / self.wmin
    }

    fn spec(&self, g: f64) -> GridSpec {
        let half_width = self.half_width(g);
        let (rho, search) = match self.variant {
            Variant::Nearest => (self.uniform_rho(g), Search::Nearest),
            Variant::Unrestricted(Rounding::PerLevel) => {
                let b = self.budget as f64;
                let root = self.ep * g / (2.0 * b * self.p.root_of(self.n as f64) * self.wmax);
                let levels = self.n.trailing_zeros() as i32;
                let steps = (0..=levels)
                    .map(|t| self.ep * g / (2.0 * b * self.p.root_of(2f64.powi(t)) * self.wmax))
                    .collect();
                (root, Search::PerHeight(steps))
            }
            Variant::Unrestricted(_) => (self.uniform_rho(g), Search::Band),
        };
        GridSpec {
            p: self.p,
            budget: self.budget,
            rho,
            half_width,
            search,
        }
    }

    /// Table cells times search candidates times merge cost, summed over nodes.
    fn predicted_work(&self, rounding: Rounding) -> f64 {
        let probe = Plan {
            variant: Variant::Unrestricted(rounding),
            ..*self
        };
        let spec = probe.spec(1.0);
        let levels = self.n.trailing_zeros();
        let grid = 2.0 * spec.half_width / spec.rho + 1.0;
        (1..=levels)
            .map(|t| {
                let nodes = (self.n >> t) as f64;
                let nb = (self.budget.min((1usize << t) - 1) + 1) as f64;
                let nbc = (self.budget.min((1usize << (t - 1)) - 1) + 1) as f64;
                let cands = match &spec.search {
                    Search::PerHeight(steps) => 2.0 * spec.half_width / steps[t as usize] + 1.0,
                    _ => grid,
                };
                let merge = if self.p.is_inf() { nb } else { nbc * nbc };
                nodes * grid * cands * merge
            })
            .sum()
    }
}

fn solve(
    f: &[f64],
    budget: usize,
    p: LpNorm,
    weights: Option<&Weights>,
    cfg: &FptasConfig,
    variant: Variant,
) -> Result<(Representation, FptasStats)> {
    let n = f.len();
    checked_log2(n)?;
    check_finite(f)?;
    if budget > n {
        return Err(Error::BudgetTooLarge { budget, n });
    }
    if !(cfg.eps > 0.0 && cfg.eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {}", cfg.eps)));
    }
    if !(cfg.grid_constant >= 1.0 && cfg.grid_constant.is_finite()) {
        return Err(Error::InvalidArgument("grid constant must be at least 1".into()));
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: w.len(),
            });
        }
    }
    if variant == Variant::Unrestricted(Rounding::PerLevel) && p.is_inf() {
        return Err(Error::InvalidArgument(
            "per-level rounding needs a finite p; use uniform rounding for l-infinity".into(),
        ));
    }
    let haar = FilterBank::haar();
    let w: Vec<f64> = weights.map_or_else(|| vec![1.0; n], |w| w.as_slice().to_vec());
    let wmin = w.iter().copied().fold(f64::INFINITY, f64::min);
    let wmax = w.iter().copied().fold(0.0, f64::max);
    let mut stats = FptasStats::default();
    let finish = |terms: Vec<Term>, stats: FptasStats| -> Result<(Representation, FptasStats)> {
        Ok((Representation::verified(f, &haar, Some(p), budget, terms, weights)?, stats))
    };

    let coef = cascade_forward(f, &haar, Scaling::Orthonormal)?;
    let maxc = coef.values.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let tol = 1e-12 * maxc;
    let nonzero: Vec<Term> = coef
        .values
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > tol)
        .map(|(pos, &value)| Term { flat: pos + 1, value })
        .collect();
    if nonzero.len() <= budget {
        stats.zero_shortcut = true;
        return finish(nonzero, stats);
    }
    // budget < #non-zero <= n, so n >= 2 and budget < n from here on

    let mut sc = scores(&coef, p, &haar)?;
    sc.sort_by(|a, b| a.rank_cmp(b));
    let tau = sc[budget].score;
    let greedy = greedy_select(f, budget, p, &haar)?;
    let upper = greedy.error(f, p, weights)?;
    let lower = (wmin * tau).min(upper);
    let ep = eps_prime(cfg.eps);
    stats.lower_bound = lower;
    stats.upper_bound = upper;
    stats.eps_prime = ep;
    if budget == 0 {
        return finish(Vec::new(), stats);
    }

    let mut plan = Plan {
        n,
        budget,
        p,
        ep,
        wmin,
        wmax,
        kappa: cfg.grid_constant,
        variant,
    };
    if let Variant::Unrestricted(Rounding::Auto) = variant {
        let pick = if p.is_inf() || plan.predicted_work(Rounding::Uniform) <= plan.predicted_work(Rounding::PerLevel) {
            Rounding::Uniform
        } else {
            Rounding::PerLevel
        };
        plan.variant = Variant::Unrestricted(pick);
    }
    stats.rounding = match plan.variant {
        Variant::Unrestricted(r) => Some(r),
        Variant::Nearest => None,
    };

    let base = (1.0 + ep).ln();
    let k_lo = (lower.ln() / base).floor() as i64;
    let k_hi = ((upper.ln() / base).ceil() as i64).max(k_lo);
    let run = |k: i64| -> (RungStats, Vec<Term>) {
        let g = (1.0 + ep).powi(k as i32);
        let spec = plan.spec(g);
        let r = fptas::run_rung(f, &w, &spec);
        let ok = r.error <= (1.0 + ep) * g;
        (
            RungStats {
                k,
                guess: g,
                rho: spec.rho,
                ok,
                error: r.error,
                peak_live_tables: r.peak_live_tables,
                max_grid: r.max_grid,
                cells: r.cells,
                millis: r.millis,
            },
            r.terms,
        )
    };

    let mut done: BTreeMap<i64, (RungStats, Vec<Term>)> = BTreeMap::new();
    match cfg.schedule {
        Schedule::Sweep => {
            let all: Vec<_> = (k_lo..=k_hi).into_par_iter().map(|k| (k, run(k))).collect();
            done.extend(all);
        }
        Schedule::Bisect => {
            let eval = |k: i64, done: &mut BTreeMap<i64, (RungStats, Vec<Term>)>| -> bool {
                done.entry(k).or_insert_with(|| run(k)).0.ok
            };
            if !eval(k_lo, &mut done) {
                let (mut lo, mut hi) = (k_lo, k_hi);
                let mut bumps = 0;
                while !eval(hi, &mut done) {
                    // the greedy error bounds the optimum; only round-off lands here
                    hi += 1;
                    bumps += 1;
                    if bumps > 64 {
                        return Err(Error::Internal("no guess rung certified its bound".into()));
                    }
                }
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if eval(mid, &mut done) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
        }
    }

    let mut best: Option<(f64, i64)> = None;
    for (&k, (rs, terms)) in &done {
        if !rs.error.is_finite() {
            continue;
        }
        let rep = Representation::verified(f, &haar, Some(p), budget, terms.clone(), weights)?;
        if best.is_none_or(|(e, _)| rep.reported_error < e) {
            best = Some((rep.reported_error, k));
        }
    }
    stats.rungs = done.values().map(|(s, _)| s.clone()).collect();
    let Some((_, k)) = best else {
        return Err(Error::Internal("every guess rung was infeasible".into()));
    };
    let terms = done.remove(&k).expect("present").1;
    finish(terms, stats)
}
