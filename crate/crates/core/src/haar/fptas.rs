use std::time::Instant;

use super::table::{ErrorTable, GridSpec, Sol, Tracker};
use crate::repr::Term;

/// Outcome of one guess rung.
#[derive(Debug, Clone)]
pub(crate) struct RungRun {
    /// Unlifted DP error of the returned solution.
    pub error: f64,
    pub terms: Vec<Term>,
    pub peak_live_tables: usize,
    pub max_grid: usize,
    pub cells: u64,
    pub millis: f64,
}

/// Streams `f` once, merging tables bottom-up with a binary-counter queue:
/// slot `h` holds the finished table of height `h`, if any.
pub(crate) fn run_rung(f: &[f64], w: &[f64], spec: &GridSpec) -> RungRun {
    let started = Instant::now();
    let n = f.len();
    let levels = n.trailing_zeros() as usize;
    let tracker = Tracker::default();
    let mut slots: Vec<Option<ErrorTable>> = (0..=levels).map(|_| None).collect();
    let mut max_grid = 0usize;
    let mut cells = 0u64;
    for (i, (&x, &wi)) in f.iter().zip(w).enumerate() {
        let mut cur = ErrorTable::leaf_tracked(spec, i, x, wi, Some(&tracker));
        let mut h = 0;
        while let Some(left) = slots[h].take() {
            let parent = ErrorTable::combine_tracked(spec, n, &left, &cur, Some(&tracker));
            let (g0, g1) = parent.grid();
            max_grid = max_grid.max((g1 - g0 + 1).max(0) as usize);
            cells += parent.cells() as u64;
            drop(left);
            cur = parent;
            h += 1;
        }
        slots[h] = Some(cur);
    }
    let top = slots[levels].take().expect("power-of-two stream fills the top slot");
    debug_assert!(slots.iter().all(Option::is_none));
    let (error, terms) = finish(spec, levels as u32, &top);
    let peak = tracker.peak();
    drop(top);
    debug_assert_eq!(tracker.live(), 0);
    RungRun {
        error,
        terms,
        peak_live_tables: peak,
        max_grid,
        cells,
        millis: started.elapsed().as_secs_f64() * 1e3,
    }
}

/// Picks the root scaling value and replays the stored choices.
pub(crate) fn finish(spec: &GridSpec, levels: u32, top: &ErrorTable) -> (f64, Vec<Term>) {
    let budget = spec.budget;
    let mut best = (f64::INFINITY, None::<i64>);
    if top.height() == 0 {
        // single sample: the root is the sample itself
        let e0 = top.get(0, 0);
        best = (e0, None);
        if budget >= 1 {
            let (g0, g1) = top.grid();
            for k in g0..=g1 {
                let e = top.get(k, 0);
                if e < best.0 {
                    best = (e, Some(k));
                }
            }
        }
    } else {
        best.0 = top.get(0, budget);
        if budget >= 1 {
            let (g0, g1) = top.grid();
            for k in g0..=g1 {
                let e = top.get(k, budget - 1);
                if e < best.0 {
                    best = (e, Some(k));
                }
            }
        }
    }
    let (err, root) = best;
    if !err.is_finite() {
        return (f64::INFINITY, Vec::new());
    }
    let picks = match (root, top.height()) {
        (_, 0) => Vec::new(),
        (None, _) => Sol::collect(top.sol(0, budget)),
        (Some(k), _) => Sol::collect(top.sol(k, budget - 1)),
    };
    let mut terms: Vec<Term> = picks
        .into_iter()
        .map(|(pos, k)| {
            let j = crate::wavelet::level_of_pos(pos as usize, levels);
            Term {
                flat: pos as usize + 1,
                value: 2f64.powf(j as f64 / 2.0) * k as f64 * spec.rho,
            }
        })
        .collect();
    if let Some(k) = root {
        terms.push(Term {
            flat: 1,
            value: 2f64.powf(levels as f64 / 2.0) * k as f64 * spec.rho,
        });
    }
    terms.sort_by_key(|t| t.flat);
    (spec.unlift(err), terms)
}
