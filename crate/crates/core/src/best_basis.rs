//! Best basis from the dyadic block dictionary.
//!
//! Each dictionary node `(j, p)` is the window `[2^j p, 2^j (p + 1))` with the
//! Haar basis of that window. A cut is a set of nodes whose windows partition
//! `[0, n)`; the selector picks a cut and a budget per block.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{check_finite, checked_log2, Error, Result};
use crate::greedy::greedy_select;
use crate::haar::{fptas, hybrid};
use crate::norm::LpNorm;
use crate::repr::{parse_term, Representation, Term};
use crate::wavelet::FilterBank;

/// Largest block count for which [`enumerate_cuts`] will list every cut.
pub const MAX_ENUM_BLOCKS: usize = 32;

/// Inner B-term algorithm run on each block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inner {
    Greedy,
    Hybrid { eps: f64 },
    Fptas { eps: f64 },
}

impl Inner {
    pub fn run(&self, block: &[f64], budget: usize, p: LpNorm) -> Result<Representation> {
        match *self {
            Inner::Greedy => greedy_select(block, budget, p, &FilterBank::haar()),
            Inner::Hybrid { eps } => hybrid(block, budget, p, eps, None),
            Inner::Fptas { eps } => fptas(block, budget, p, eps, None),
        }
    }
}

/// Error contribution of one block: `e^p`, or `e` itself for l-infinity.
pub fn lift(e: f64, p: LpNorm) -> f64 {
    if p.is_inf() {
        e
    } else {
        e.powf(p.p())
    }
}

/// Merges the contributions of two disjoint parts.
pub fn combine(a: f64, b: f64, p: LpNorm) -> f64 {
    if p.is_inf() {
        a.max(b)
    } else {
        a + b
    }
}

pub fn unlift(v: f64, p: LpNorm) -> f64 {
    if p.is_inf() {
        v
    } else {
        v.powf(1.0 / p.p())
    }
}

/// Number of cuts of a tree with `blocks` minimal blocks (`None` on overflow).
pub fn cut_count(blocks: usize) -> Option<u128> {
    if blocks <= 1 {
        return Some(1);
    }
    let half = cut_count(blocks / 2)?;
    half.checked_mul(half)?.checked_add(1)
}

/// Every cut, as `(j, p)` nodes in left-to-right order.
pub fn enumerate_cuts(n: usize, min_block: usize) -> Result<Vec<Vec<(u32, usize)>>> {
    let top = checked_log2(n)?;
    let jmin = checked_log2(min_block)?;
    if min_block > n {
        return Err(Error::InvalidArgument(format!("minimum block {min_block} exceeds n = {n}")));
    }
    if n / min_block > MAX_ENUM_BLOCKS {
        return Err(Error::SizeCap {
            n,
            cap: MAX_ENUM_BLOCKS * min_block,
            hint: "the number of cuts grows doubly exponentially",
        });
    }
    fn rec(j: u32, p: usize, jmin: u32) -> Vec<Vec<(u32, usize)>> {
        let mut out = vec![vec![(j, p)]];
        if j > jmin {
            let left = rec(j - 1, 2 * p, jmin);
            let right = rec(j - 1, 2 * p + 1, jmin);
            for l in &left {
                for r in &right {
                    out.push(l.iter().chain(r).copied().collect());
                }
            }
        }
        out
    }
    Ok(rec(top, 0, jmin))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub j: u32,
    pub p: usize,
    pub budget: usize,
    pub error: f64,
    /// Representation of the block in its local Haar basis.
    pub repr: Representation,
}

impl Block {
    pub fn start(&self) -> usize {
        self.p << self.j
    }

    pub fn len(&self) -> usize {
        1 << self.j
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutSolution {
    pub n: usize,
    pub norm: LpNorm,
    pub budget: usize,
    pub blocks: Vec<Block>,
    pub error: f64,
}

#[derive(Clone, Copy)]
enum Pick {
    Whole(usize),
    Split(usize, usize),
}

/// Bottom-up DP over the dictionary: every node compares running the inner
/// algorithm on its whole window against the best split between its children.
pub fn best_basis_select(f: &[f64], budget: usize, p: LpNorm, inner: Inner, min_block: usize) -> Result<CutSolution> {
    let n = f.len();
    let top = checked_log2(n)?;
    let jmin = checked_log2(min_block)?;
    check_finite(f)?;
    if min_block > n {
        return Err(Error::InvalidArgument(format!("minimum block {min_block} exceeds n = {n}")));
    }
    if budget > n {
        return Err(Error::BudgetTooLarge { budget, n });
    }
    let run = |j: u32, q: usize, b: usize| -> Result<Representation> {
        let len = 1usize << j;
        inner
            .run(&f[q * len..(q + 1) * len], b, p)
            .map_err(|e| Error::Block {
                j,
                p: q,
                source: Box::new(e),
            })
    };

    // tables[j - jmin][q] = (lifted error at most b, pick) for b in 0..=min(B, 2^j)
    let mut tables: Vec<Vec<Vec<(f64, Pick)>>> = Vec::new();
    for j in jmin..=top {
        let count = n >> j;
        let nb = budget.min(1 << j) + 1;
        let whole: Vec<Vec<f64>> = (0..count)
            .into_par_iter()
            .map(|q| {
                (0..nb)
                    .map(|b| run(j, q, b).map(|r| lift(r.reported_error, p)))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let level: Vec<Vec<(f64, Pick)>> = whole
            .into_iter()
            .enumerate()
            .map(|(q, w)| {
                let mut row: Vec<(f64, Pick)> = Vec::with_capacity(nb);
                for b in 0..nb {
                    match row.last() {
                        Some(&prev) if prev.0 <= w[b] => row.push(prev),
                        _ => row.push((w[b], Pick::Whole(b))),
                    }
                }
                if j > jmin {
                    let below = &tables[(j - 1 - jmin) as usize];
                    let (l, r) = (&below[2 * q], &below[2 * q + 1]);
                    let mut split = vec![(f64::INFINITY, Pick::Whole(0)); nb];
                    for (bl, el) in l.iter().enumerate() {
                        for (br, er) in r.iter().enumerate().take(nb.saturating_sub(bl)) {
                            let v = combine(el.0, er.0, p);
                            if v < split[bl + br].0 {
                                split[bl + br] = (v, Pick::Split(bl, br));
                            }
                        }
                    }
                    for b in 1..nb {
                        if split[b - 1].0 <= split[b].0 {
                            split[b] = split[b - 1];
                        }
                    }
                    for b in 0..nb {
                        // ties keep the whole block
                        if split[b].0 < row[b].0 {
                            row[b] = split[b];
                        }
                    }
                }
                row
            })
            .collect();
        tables.push(level);
    }

    let root = &tables[(top - jmin) as usize][0];
    let total = root[budget.min(root.len() - 1)].0;
    let mut blocks = Vec::new();
    let mut stack = vec![(top, 0usize, budget)];
    // left-to-right order: pop right after left
    while let Some((j, q, b)) = stack.pop() {
        let row = &tables[(j - jmin) as usize][q];
        match row[b.min(row.len() - 1)].1 {
            Pick::Whole(bw) => {
                let repr = run(j, q, bw)?;
                blocks.push(Block {
                    j,
                    p: q,
                    budget: bw,
                    error: repr.reported_error,
                    repr,
                });
            }
            Pick::Split(bl, br) => {
                stack.push((j - 1, 2 * q + 1, br));
                stack.push((j - 1, 2 * q, bl));
            }
        }
    }
    Ok(CutSolution {
        n,
        norm: p,
        budget,
        blocks,
        error: unlift(total, p),
    })
}

impl CutSolution {
    pub fn terms_used(&self) -> usize {
        self.blocks.iter().map(|b| b.repr.terms.len()).sum()
    }

    pub fn reconstruct(&self) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        for b in &self.blocks {
            let part = b.repr.reconstruct()?;
            out[b.start()..b.start() + b.len()].copy_from_slice(&part);
        }
        Ok(out)
    }

    /// Header `cut n p B`, the total error, then one `block j p b error`
    /// line per block followed by that block's `flat value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "cut {} {} {}", self.n, self.norm, self.budget).unwrap();
        writeln!(s, "# error {}", self.error).unwrap();
        for b in &self.blocks {
            writeln!(s, "block {} {} {} {}", b.j, b.p, b.budget, b.error).unwrap();
            for t in &b.repr.terms {
                writeln!(s, "{} {}", t.flat, t.value).unwrap();
            }
        }
        s
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (_, head) = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
        let fields: Vec<&str> = head.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "cut" {
            return Err(perr(1, "expected header `cut n p B`".into()));
        }
        let n: usize = fields[1].parse().map_err(|_| perr(1, "bad n".into()))?;
        checked_log2(n).map_err(|e| perr(1, e.to_string()))?;
        let norm: LpNorm = fields[2].parse().map_err(|e: Error| perr(1, e.to_string()))?;
        let budget: usize = fields[3].parse().map_err(|_| perr(1, "bad budget".into()))?;
        let mut error = f64::NAN;
        let mut blocks: Vec<Block> = Vec::new();
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("error") {
                    error = v.trim().parse().map_err(|_| perr(no, "bad error value".into()))?;
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("block") {
                let v: Vec<&str> = rest.split_whitespace().collect();
                if v.len() != 4 {
                    return Err(perr(no, "expected `block j p b error`".into()));
                }
                let j: u32 = v[0].parse().map_err(|_| perr(no, "bad j".into()))?;
                let q: usize = v[1].parse().map_err(|_| perr(no, "bad p".into()))?;
                let b: usize = v[2].parse().map_err(|_| perr(no, "bad b".into()))?;
                let e: f64 = v[3].parse().map_err(|_| perr(no, "bad error".into()))?;
                if j > 62 || (q + 1) << j > n {
                    return Err(perr(no, "block outside the signal".into()));
                }
                let expected = blocks.last().map_or(0, |l| l.start() + l.len());
                if q << j != expected {
                    return Err(perr(no, "blocks must tile the signal left to right".into()));
                }
                blocks.push(Block {
                    j,
                    p: q,
                    budget: b,
                    error: e,
                    repr: Representation {
                        n: 1 << j,
                        basis: "haar".into(),
                        scaling: Default::default(),
                        p: Some(norm),
                        budget: b,
                        terms: Vec::new(),
                        reported_error: e,
                    },
                });
                continue;
            }
            let block = blocks.last_mut().ok_or_else(|| perr(no, "term before any block".into()))?;
            let t: Term = parse_term(line).map_err(|m| perr(no, m))?;
            if t.flat == 0 || t.flat > block.len() {
                return Err(perr(no, format!("flat index {} outside block", t.flat)));
            }
            if block.repr.terms.last().is_some_and(|l| l.flat >= t.flat) {
                return Err(perr(no, "flat indices must increase".into()));
            }
            block.repr.terms.push(t);
        }
        if blocks.last().map_or(0, |l| l.start() + l.len()) != n {
            return Err(perr(0, "blocks do not cover the signal".into()));
        }
        Ok(CutSolution {
            n,
            norm,
            budget,
            blocks,
            error,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?, path)
    }
}
