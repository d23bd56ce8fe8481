//! One-pass greedy B-term selection and the multi-norm universal set.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use crate::error::{checked_log2, check_finite, Error, Result};
use crate::norm::LpNorm;
use crate::repr::{Representation, Term};
use crate::wavelet::{
    cascade_forward, cascade_inverse, CoefficientVector, FilterBank, LevelNorms, Scaling,
    StreamingCascade, WaveletIndex,
};

/// A coefficient with its selection score `|<f, psi>| / ||psi||_{p'}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCoefficient {
    pub flat: usize,
    pub coefficient: f64,
    pub score: f64,
}

impl ScoredCoefficient {
    pub fn index(&self, n: usize) -> WaveletIndex {
        WaveletIndex::from_flat(self.flat, n).expect("flat index in range")
    }

    /// Selection order: higher score first, then smaller flat index.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(self.flat.cmp(&other.flat))
    }
}

/// Max-heap entry whose top is the worst kept candidate.
#[derive(Debug, Clone, Copy)]
struct Worst(ScoredCoefficient);

impl PartialEq for Worst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Worst {}
impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0)
    }
}

/// Bounded top-B buffer under [`ScoredCoefficient::rank_cmp`].
#[derive(Debug, Clone)]
pub(crate) struct TopB {
    budget: usize,
    heap: BinaryHeap<Worst>,
}

impl TopB {
    pub(crate) fn new(budget: usize) -> Self {
        TopB {
            budget,
            heap: BinaryHeap::with_capacity(budget),
        }
    }

    pub(crate) fn offer(&mut self, c: ScoredCoefficient) {
        if self.budget == 0 {
            return;
        }
        if self.heap.len() < self.budget {
            self.heap.push(Worst(c));
        } else if let Some(mut top) = self.heap.peek_mut() {
            if c.rank_cmp(&top.0) == Ordering::Less {
                *top = Worst(c);
            }
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.heap.len()
    }

    pub(crate) fn into_sorted_by_flat(self) -> Vec<ScoredCoefficient> {
        let mut v: Vec<_> = self.heap.into_iter().map(|w| w.0).collect();
        v.sort_by_key(|c| c.flat);
        v
    }
}

/// Streaming state machine: feed samples in index order, then [`finish`](Self::finish).
#[derive(Debug, Clone)]
pub struct GreedySelector {
    n: usize,
    cascade: StreamingCascade,
    dual: Arc<LevelNorms>,
    top: TopB,
    peak_live: usize,
}

impl GreedySelector {
    pub fn new(n: usize, budget: usize, p: LpNorm, fb: &FilterBank) -> Result<Self> {
        checked_log2(n)?;
        if budget > n {
            return Err(Error::BudgetTooLarge { budget, n });
        }
        Ok(GreedySelector {
            n,
            cascade: StreamingCascade::new(n, fb, Scaling::Orthonormal)?,
            dual: LevelNorms::get(fb, n, p.conjugate())?,
            top: TopB::new(budget),
            peak_live: 0,
        })
    }

    pub fn push(&mut self, x: f64) -> Result<()> {
        let (dual, top) = (&self.dual, &mut self.top);
        self.cascade.push(x, |pos, c| {
            top.offer(ScoredCoefficient {
                flat: pos + 1,
                coefficient: c,
                score: c.abs() / dual.at_pos(pos),
            })
        })?;
        self.peak_live = self.peak_live.max(self.live());
        Ok(())
    }

    /// Scored coefficients currently held: the kept set plus open cascade outputs.
    pub fn live(&self) -> usize {
        self.top.len() + self.cascade.open()
    }

    pub fn peak_live(&self) -> usize {
        self.peak_live
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// The kept coefficients, sorted by flat index.
    pub fn finish(self) -> Result<Vec<ScoredCoefficient>> {
        self.cascade.finish()?;
        Ok(self.top.into_sorted_by_flat())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GreedyStats {
    pub peak_live: usize,
}

/// Keeps the `budget` coefficients with the largest `|<f, psi_i>| / ||psi_i||_{p'}`.
pub fn greedy_select(f: &[f64], budget: usize, p: LpNorm, fb: &FilterBank) -> Result<Representation> {
    greedy_select_with_stats(f, budget, p, fb).map(|(r, _)| r)
}

pub fn greedy_select_with_stats(
    f: &[f64],
    budget: usize,
    p: LpNorm,
    fb: &FilterBank,
) -> Result<(Representation, GreedyStats)> {
    let mut sel = GreedySelector::new(f.len(), budget, p, fb)?;
    for &x in f {
        sel.push(x)?;
    }
    let stats = GreedyStats {
        peak_live: sel.peak_live(),
    };
    let terms = sel
        .finish()?
        .into_iter()
        .map(|c| Term {
            flat: c.flat,
            value: c.coefficient,
        })
        .collect();
    Ok((Representation::verified(f, fb, Some(p), budget, terms, None)?, stats))
}

/// Scores of a full coefficient vector for the norm `p` (orthonormal input).
pub fn scores(c: &CoefficientVector, p: LpNorm, fb: &FilterBank) -> Result<Vec<ScoredCoefficient>> {
    let dual = LevelNorms::get(fb, c.len(), p.conjugate())?;
    Ok(c.values
        .iter()
        .enumerate()
        .map(|(pos, &v)| ScoredCoefficient {
            flat: pos + 1,
            coefficient: v,
            score: v.abs() / dual.at_pos(pos),
        })
        .collect())
}

/// The norms `p_t = 1 + t / log2 n` for `t = 0 ..= log2 n (log2 n - 1)`.
pub fn universal_norms(n: usize) -> Result<Vec<LpNorm>> {
    let l = checked_log2(n)? as usize;
    if l <= 1 {
        return Ok(vec![LpNorm::ONE]);
    }
    (0..=l * (l - 1))
        .map(|t| LpNorm::new(1.0 + t as f64 / l as f64))
        .collect()
}

/// Union of the greedy top-`budget` sets over every norm in [`universal_norms`].
///
/// A single pass feeds each finished coefficient to one bounded heap per
/// norm. The reported error is the l2 error.
pub fn universal_select(f: &[f64], budget: usize, fb: &FilterBank) -> Result<Representation> {
    let n = f.len();
    checked_log2(n)?;
    if budget > n {
        return Err(Error::BudgetTooLarge { budget, n });
    }
    let norms = universal_norms(n)?;
    let duals: Vec<Arc<LevelNorms>> = norms
        .iter()
        .map(|p| LevelNorms::get(fb, n, p.conjugate()))
        .collect::<Result<_>>()?;
    let mut tops: Vec<TopB> = norms.iter().map(|_| TopB::new(budget)).collect();
    let mut cascade = StreamingCascade::new(n, fb, Scaling::Orthonormal)?;
    for &x in f {
        cascade.push(x, |pos, c| {
            for (top, dual) in tops.iter_mut().zip(&duals) {
                top.offer(ScoredCoefficient {
                    flat: pos + 1,
                    coefficient: c,
                    score: c.abs() / dual.at_pos(pos),
                });
            }
        })?;
    }
    cascade.finish()?;
    let mut terms: Vec<Term> = tops
        .into_iter()
        .flat_map(|t| t.into_sorted_by_flat())
        .map(|c| Term {
            flat: c.flat,
            value: c.coefficient,
        })
        .collect();
    terms.sort_by_key(|t| t.flat);
    terms.dedup_by_key(|t| t.flat);
    Representation::verified(f, fb, None, budget, terms, None)
}

/// Budget used with [`tight_example`]: `n / c - 1`.
pub fn tight_budget(n: usize, c: usize) -> usize {
    n / c - 1
}

/// A Haar signal on which greedy l-infinity selection is a `log n / log c` factor off.
///
/// The root coefficient is zero, every coarse detail has
/// `<f, psi> / ||psi||_1 = 1 - eps` and every finest detail has ratio 1.
/// With budget [`tight_budget`] the greedy keeps only finest-level
/// coefficients while keeping the top levels leaves error about `log2 c`.
pub fn tight_example(n: usize, c: usize, eps: f64) -> Result<Vec<f64>> {
    let l = checked_log2(n)?;
    checked_log2(c)?;
    if c < 2 || c > n {
        return Err(Error::InvalidArgument(format!("c = {c} must be a power of two in [2, n]")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must lie in (0, 1)")));
    }
    let mut values = vec![0.0; n];
    for (pos, v) in values.iter_mut().enumerate().skip(1) {
        let j = crate::wavelet::level_of_pos(pos, l);
        let ratio = if j == 1 { 1.0 } else { 1.0 - eps };
        *v = ratio * 2f64.powf(j as f64 / 2.0);
    }
    cascade_inverse(
        &CoefficientVector {
            scaling: Scaling::Orthonormal,
            values,
        },
        &FilterBank::haar(),
    )
}

/// Offline reference: full transform, full sort, first `budget`.
pub fn greedy_offline(f: &[f64], budget: usize, p: LpNorm, fb: &FilterBank) -> Result<Vec<usize>> {
    check_finite(f)?;
    let c = cascade_forward(f, fb, Scaling::Orthonormal)?;
    let mut s = scores(&c, p, fb)?;
    s.sort_by(|a, b| a.rank_cmp(b));
    let mut kept: Vec<usize> = s.into_iter().take(budget).map(|c| c.flat).collect();
    kept.sort_unstable();
    Ok(kept)
}
