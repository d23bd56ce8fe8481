//! Representations under a bit budget instead of a term budget.
//!
//! All accounting is in integer bits.

use rayon::prelude::*;

use crate::error::{check_finite, checked_log2, Error, Result};
use crate::greedy::{scores, ScoredCoefficient};
use crate::norm::LpNorm;
use crate::repr::{Representation, Term};
use crate::wavelet::{cascade_forward, FilterBank, Scaling, WaveletIndex};

/// How the position of a stored coefficient is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexCoding {
    /// `ceil(log2 n)` bits for every index.
    #[default]
    Flat,
    /// Level tag plus the shift within the level:
    /// `ceil(log2 log2 n) + ceil(log2(n / 2^j)) + 2`.
    ScaleAware,
}

fn ceil_log2(x: usize) -> u64 {
    if x <= 1 {
        0
    } else {
        u64::from(usize::BITS - (x - 1).leading_zeros())
    }
}

impl IndexCoding {
    pub fn bits(self, flat: usize, n: usize) -> u64 {
        match self {
            IndexCoding::Flat => ceil_log2(n),
            IndexCoding::ScaleAware => {
                let levels = n.trailing_zeros() as usize;
                let j = WaveletIndex::from_flat(flat, n).map_or(levels as u32, |i| i.level);
                ceil_log2(levels) + ceil_log2(n >> j) + 2
            }
        }
    }

    /// Per-flat-index costs, `costs[flat - 1]`.
    pub fn costs(self, n: usize) -> Vec<u64> {
        (1..=n).map(|flat| self.bits(flat, n)).collect()
    }
}

/// Signed fixed-point values: one sign bit, `int_bits` integer bits and a
/// caller-chosen number of fraction bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPoint {
    pub int_bits: u32,
    pub max_frac_bits: u32,
}

impl FixedPoint {
    /// Enough integer bits for every magnitude in `values`.
    pub fn for_values(values: &[f64], max_frac_bits: u32) -> Self {
        let m = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut int_bits = 0;
        while 2f64.powi(int_bits as i32) <= m && int_bits < 1024 {
            int_bits += 1;
        }
        FixedPoint { int_bits, max_frac_bits }
    }

    pub fn cost(&self, frac_bits: u32) -> u64 {
        1 + u64::from(self.int_bits) + u64::from(frac_bits)
    }

    pub fn quantize(&self, x: f64, frac_bits: u32) -> f64 {
        let s = 2f64.powi(frac_bits as i32);
        (x * s).round() / s
    }

    /// Cheapest stored value within `tol` of `x`: `Some((0.0, 0))` when zero is
    /// close enough, `None` when no width reaches the tolerance.
    pub fn cheapest(&self, x: f64, tol: f64) -> Option<(f64, u64)> {
        if x.abs() <= tol {
            return Some((0.0, 0));
        }
        (0..=self.max_frac_bits).find_map(|w| {
            let z = self.quantize(x, w);
            ((x - z).abs() <= tol).then(|| (z, self.cost(w)))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub repr: Representation,
    pub cost_bits: u64,
    /// First excluded score; no representation within the bit budget beats it.
    pub lower_bound: f64,
}

fn checked_coefficients(f: &[f64], p: LpNorm, fb: &FilterBank) -> Result<Vec<ScoredCoefficient>> {
    checked_log2(f.len())?;
    check_finite(f)?;
    let c = cascade_forward(f, fb, Scaling::Orthonormal)?;
    let mut s = scores(&c, p, fb)?;
    s.sort_by(|a, b| a.rank_cmp(b));
    Ok(s)
}

/// Keeps coefficients in score order while their fixed costs fit in `budget_bits`.
///
/// `costs[flat - 1]` is the price of coefficient `flat`.
pub fn spectrum_select(
    f: &[f64],
    costs: &[u64],
    budget_bits: u64,
    p: LpNorm,
    fb: &FilterBank,
) -> Result<SpectrumResult> {
    let n = f.len();
    if costs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: costs.len(),
        });
    }
    if costs.contains(&0) {
        return Err(Error::InvalidArgument("index costs must be at least one bit".into()));
    }
    let ranked = checked_coefficients(f, p, fb)?;
    let mut spent = 0u64;
    let mut terms = Vec::new();
    let mut lower_bound = 0.0;
    for c in &ranked {
        let price = costs[c.flat - 1];
        if spent + price > budget_bits {
            lower_bound = c.score;
            break;
        }
        spent += price;
        terms.push(Term {
            flat: c.flat,
            value: c.coefficient,
        });
    }
    let count = terms.len();
    Ok(SpectrumResult {
        repr: Representation::verified(f, fb, Some(p), count, terms, None)?,
        cost_bits: spent,
        lower_bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuessRun {
    pub guess: f64,
    /// Bits spent before finishing or overflowing.
    pub cost_bits: u64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BitComplexityResult {
    pub repr: Representation,
    pub cost_bits: u64,
    pub guess: f64,
    pub runs: Vec<GuessRun>,
}

/// Geometric guesses `t, 2t, 4t, ...` of the error; under guess `t` each
/// coefficient is stored at the cheapest precision within `t ||psi||_{p'}` of
/// its value. The smallest guess whose total cost fits the budget wins.
pub fn bitcomplexity_select(
    f: &[f64],
    index_costs: &[u64],
    coder: &FixedPoint,
    budget_bits: u64,
    p: LpNorm,
    fb: &FilterBank,
) -> Result<BitComplexityResult> {
    let n = f.len();
    if index_costs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: index_costs.len(),
        });
    }
    let ranked = checked_coefficients(f, p, fb)?;
    let positive: Vec<f64> = ranked.iter().map(|c| c.score).filter(|&s| s > 0.0).collect();
    let mut guesses = Vec::new();
    if let (Some(&top), Some(&low)) = (positive.first(), positive.last()) {
        let mut t = low;
        while t < top {
            guesses.push(t);
            t *= 2.0;
        }
        guesses.push(t);
    } else {
        guesses.push(0.0);
    }

    let run = |t: f64| -> (GuessRun, Vec<Term>) {
        let mut spent = 0u64;
        let mut terms = Vec::new();
        for c in &ranked {
            // dropped outright when the score is within the guess
            if c.score <= t {
                continue;
            }
            // tolerance t * ||psi||_{p'} in coefficient units
            let tol = t * c.coefficient.abs() / c.score;
            let price = match coder.cheapest(c.coefficient, tol) {
                Some((_, 0)) => continue,
                Some((z, bits)) => {
                    terms.push(Term { flat: c.flat, value: z });
                    bits + index_costs[c.flat - 1]
                }
                None => u64::MAX,
            };
            spent = spent.saturating_add(price);
            if spent > budget_bits {
                return (
                    GuessRun {
                        guess: t,
                        cost_bits: spent,
                        feasible: false,
                    },
                    Vec::new(),
                );
            }
        }
        (
            GuessRun {
                guess: t,
                cost_bits: spent,
                feasible: true,
            },
            terms,
        )
    };
    let results: Vec<(GuessRun, Vec<Term>)> = guesses.par_iter().map(|&t| run(t)).collect();
    let runs: Vec<GuessRun> = results.iter().map(|(r, _)| r.clone()).collect();
    let Some((win, terms)) = results.into_iter().find(|(r, _)| r.feasible) else {
        let last = runs.last().expect("at least one guess");
        return Err(Error::Infeasible(format!(
            "no guess fits {budget_bits} bits; the largest guess {} needs {} bits",
            last.guess, last.cost_bits
        )));
    };
    let count = terms.len();
    Ok(BitComplexityResult {
        repr: Representation::verified(f, fb, Some(p), count, terms, None)?,
        cost_bits: win.cost_bits,
        guess: win.guess,
        runs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplaneResult {
    pub planes: Vec<Representation>,
    pub cost_bits: u64,
    /// Largest l-infinity error over the planes.
    pub error: f64,
    pub lower_bound: f64,
}

/// Greedy l-infinity selection over several equally long signals that share
/// index records: the first coefficient kept at an index pays for the index
/// and (with more than one plane) a presence bit per plane.
pub fn multiplane_select(
    planes: &[Vec<f64>],
    budget_bits: u64,
    coding: IndexCoding,
    value_bits: u64,
    fb: &FilterBank,
) -> Result<MultiplaneResult> {
    let Some(first) = planes.first() else {
        return Err(Error::InvalidArgument("no planes given".into()));
    };
    let n = first.len();
    for pl in planes {
        if pl.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: pl.len(),
            });
        }
    }
    let t = planes.len() as u64;
    let mut merged: Vec<(ScoredCoefficient, usize)> = Vec::with_capacity(n * planes.len());
    for (k, pl) in planes.iter().enumerate() {
        merged.extend(checked_coefficients(pl, LpNorm::INF, fb)?.into_iter().map(|c| (c, k)));
    }
    merged.sort_by(|a, b| a.0.rank_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut used = vec![false; n + 1];
    let mut spent = 0u64;
    let mut kept: Vec<Vec<Term>> = vec![Vec::new(); planes.len()];
    let mut lower_bound = 0.0;
    for (c, k) in &merged {
        let mut price = value_bits;
        if !used[c.flat] {
            price += coding.bits(c.flat, n) + if t > 1 { t } else { 0 };
        }
        if spent + price > budget_bits {
            lower_bound = c.score;
            break;
        }
        spent += price;
        used[c.flat] = true;
        kept[*k].push(Term {
            flat: c.flat,
            value: c.coefficient,
        });
    }
    let reps = planes
        .iter()
        .zip(kept)
        .map(|(pl, terms)| {
            let count = terms.len();
            Representation::verified(pl, fb, Some(LpNorm::INF), count, terms, None)
        })
        .collect::<Result<Vec<_>>>()?;
    let error = reps.iter().map(|r| r.reported_error).fold(0.0, f64::max);
    Ok(MultiplaneResult {
        planes: reps,
        cost_bits: spent,
        error,
        lower_bound,
    })
}
