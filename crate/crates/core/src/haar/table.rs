use std::cell::Cell;
use std::rc::Rc;
use std::sync::Arc;

use crate::norm::LpNorm;

/// Persistent record of the coefficients chosen below a table entry.
#[derive(Debug)]
pub(crate) struct Sol {
    /// `(0-based flat position, value in grid units)`.
    term: Option<(u32, i64)>,
    a: Option<Arc<Sol>>,
    b: Option<Arc<Sol>>,
}

impl Sol {
    fn join(term: Option<(u32, i64)>, a: Option<&Arc<Sol>>, b: Option<&Arc<Sol>>) -> Option<Arc<Sol>> {
        match (term, a, b) {
            (None, None, None) => None,
            (None, Some(x), None) | (None, None, Some(x)) => Some(x.clone()),
            _ => Some(Arc::new(Sol {
                term,
                a: a.cloned(),
                b: b.cloned(),
            })),
        }
    }

    pub(crate) fn collect(root: &Option<Arc<Sol>>) -> Vec<(u32, i64)> {
        let mut out = Vec::new();
        let mut stack: Vec<&Arc<Sol>> = root.iter().collect();
        while let Some(s) = stack.pop() {
            out.extend(s.term);
            stack.extend(s.a.iter());
            stack.extend(s.b.iter());
        }
        out
    }
}

/// Live-table accounting shared by the tables of one run.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tracker(Rc<Cell<(usize, usize)>>);

impl Tracker {
    fn inc(&self) {
        let (live, peak) = self.0.get();
        self.0.set((live + 1, peak.max(live + 1)));
    }

    fn dec(&self) {
        let (live, peak) = self.0.get();
        self.0.set((live - 1, peak));
    }

    pub(crate) fn peak(&self) -> usize {
        self.0.get().1
    }

    pub(crate) fn live(&self) -> usize {
        self.0.get().0
    }
}

/// How chosen values are searched at an internal node.
#[derive(Debug, Clone)]
pub enum Search {
    /// Every grid multiple within the band around the coefficient.
    Band,
    /// Multiples of a per-height step, re-rounded onto the grid; indexed by height.
    PerHeight(Vec<f64>),
    /// Only the grid points just below and above the coefficient.
    Nearest,
}

/// Shared parameters of every table in one run.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub p: LpNorm,
    pub budget: usize,
    /// Grid step; table index `k` stands for the value `k * rho`.
    pub rho: f64,
    /// Half-width of the value band around each node's running average.
    pub half_width: f64,
    pub search: Search,
}

impl GridSpec {
    #[inline]
    pub(crate) fn lift(&self, x: f64) -> f64 {
        let a = x.abs();
        let p = self.p.p();
        if self.p.is_inf() || p == 1.0 {
            a
        } else if p == 2.0 {
            a * a
        } else {
            a.powf(p)
        }
    }

    #[inline]
    pub(crate) fn unlift(&self, x: f64) -> f64 {
        let p = self.p.p();
        if self.p.is_inf() || p == 1.0 {
            x
        } else if p == 2.0 {
            x.sqrt()
        } else {
            x.powf(1.0 / p)
        }
    }

    fn grid(&self, center: f64) -> (i64, i64) {
        let lo = ((center - self.half_width) / self.rho).ceil() as i64;
        let hi = ((center + self.half_width) / self.rho).floor() as i64;
        (lo, hi)
    }
}

/// `E[v, b]`: least (lifted) error inside a dyadic subtree when ancestors
/// contribute the constant `v` and at most `b` subtree coefficients are kept.
#[derive(Debug)]
pub struct ErrorTable {
    height: u32,
    start: usize,
    center: f64,
    k0: i64,
    nv: usize,
    nb: usize,
    e: Vec<f64>,
    sol: Vec<Option<Arc<Sol>>>,
    tracker: Option<Tracker>,
}

impl Drop for ErrorTable {
    fn drop(&mut self) {
        if let Some(t) = &self.tracker {
            t.dec();
        }
    }
}

#[derive(Clone, Copy)]
struct Choice {
    r: i64,
    i: u32,
    j: u32,
}

const NOT_CHOSEN: i64 = i64::MIN;

impl ErrorTable {
    /// Table of a single sample `x` at position `start` with workload weight `w`.
    pub fn leaf(spec: &GridSpec, start: usize, x: f64, w: f64) -> ErrorTable {
        Self::leaf_tracked(spec, start, x, w, None)
    }

    pub(crate) fn leaf_tracked(spec: &GridSpec, start: usize, x: f64, w: f64, tracker: Option<&Tracker>) -> ErrorTable {
        let (k0, k1) = spec.grid(x);
        let nv = (k1 - k0 + 1).max(0) as usize;
        let e = (0..nv)
            .map(|i| spec.lift(w * ((k0 + i as i64) as f64 * spec.rho - x)))
            .collect();
        if let Some(t) = tracker {
            t.inc();
        }
        ErrorTable {
            height: 0,
            start,
            center: x,
            k0,
            nv,
            nb: 1,
            e,
            sol: vec![None; nv],
            tracker: tracker.cloned(),
        }
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Running average of the samples under this node.
    pub fn center(&self) -> f64 {
        self.center
    }

    /// Inclusive range of grid indices.
    pub fn grid(&self) -> (i64, i64) {
        (self.k0, self.k0 + self.nv as i64 - 1)
    }

    pub fn budget_len(&self) -> usize {
        self.nb
    }

    pub fn cells(&self) -> usize {
        self.nv * self.nb
    }

    #[inline]
    fn has(&self, k: i64) -> bool {
        k >= self.k0 && k < self.k0 + self.nv as i64
    }

    #[inline]
    fn row(&self, k: i64) -> &[f64] {
        let i = (k - self.k0) as usize;
        &self.e[i * self.nb..(i + 1) * self.nb]
    }

    /// Lifted error at grid index `k` with at most `b` coefficients; `+inf` off the grid.
    pub fn get(&self, k: i64, b: usize) -> f64 {
        if !self.has(k) {
            return f64::INFINITY;
        }
        self.row(k)[b.min(self.nb - 1)]
    }

    pub(crate) fn sol(&self, k: i64, b: usize) -> &Option<Arc<Sol>> {
        let i = (k - self.k0) as usize;
        &self.sol[i * self.nb + b.min(self.nb - 1)]
    }

    /// Merges two sibling tables into their parent.
    ///
    /// The parent either skips its coefficient (both children see `v`) or
    /// keeps value `r` (children see `v + r` and `v - r`); children lookups
    /// outside their grids count as infeasible.
    pub fn combine(spec: &GridSpec, n: usize, left: &ErrorTable, right: &ErrorTable) -> ErrorTable {
        Self::combine_tracked(spec, n, left, right, None)
    }

    pub(crate) fn combine_tracked(
        spec: &GridSpec,
        n: usize,
        left: &ErrorTable,
        right: &ErrorTable,
        tracker: Option<&Tracker>,
    ) -> ErrorTable {
        debug_assert_eq!(left.height, right.height);
        let height = left.height + 1;
        let start = left.start;
        let pos = ((n >> height) + (start >> height)) as u32;
        let center = (left.center + right.center) / 2.0;
        let coef = (left.center - right.center) / 2.0;
        let (k0, k1) = spec.grid(center);
        let nv = (k1 - k0 + 1).max(0) as usize;
        let full = (1usize << height.min(62)) - 1;
        let nb = spec.budget.min(full) + 1;
        let cands = candidates(spec, height, coef);
        let inf_p = spec.p.is_inf();

        let mut e = vec![f64::INFINITY; nv * nb];
        let mut sol = vec![None; nv * nb];
        let mut choice = vec![
            Choice {
                r: NOT_CHOSEN,
                i: 0,
                j: 0
            };
            nb
        ];
        let mut conv = vec![0.0; nb];
        let mut split = vec![(0u32, 0u32); nb];
        let (lk0, lk1) = left.grid();
        let (rk0, rk1) = right.grid();

        for vi in 0..nv {
            let k = k0 + vi as i64;
            let row = &mut e[vi * nb..(vi + 1) * nb];
            if left.has(k) && right.has(k) {
                convolve(inf_p, left.row(k), right.row(k), &mut conv, &mut split);
                for b in 0..nb {
                    if conv[b] < row[b] {
                        row[b] = conv[b];
                        choice[b] = Choice {
                            r: NOT_CHOSEN,
                            i: split[b].0,
                            j: split[b].1,
                        };
                    }
                }
            }
            if nb > 1 {
                let rlo = (lk0 - k).max(k - rk1);
                let rhi = (lk1 - k).min(k - rk0);
                let from = cands.partition_point(|&r| r < rlo);
                let to = cands.partition_point(|&r| r <= rhi);
                for &r in &cands[from..to.max(from)] {
                    convolve(inf_p, left.row(k + r), right.row(k - r), &mut conv[..nb - 1], &mut split[..nb - 1]);
                    for b in 1..nb {
                        if conv[b - 1] < row[b] {
                            row[b] = conv[b - 1];
                            choice[b] = Choice {
                                r,
                                i: split[b - 1].0,
                                j: split[b - 1].1,
                            };
                        }
                    }
                }
            }
            for b in 0..nb {
                if row[b].is_finite() {
                    let c = choice[b];
                    let (kl, kr, term) = if c.r == NOT_CHOSEN {
                        (k, k, None)
                    } else {
                        (k + c.r, k - c.r, Some((pos, c.r)))
                    };
                    sol[vi * nb + b] = Sol::join(
                        term,
                        left.sol(kl, c.i as usize).as_ref(),
                        right.sol(kr, c.j as usize).as_ref(),
                    );
                }
                choice[b] = Choice {
                    r: NOT_CHOSEN,
                    i: 0,
                    j: 0,
                };
            }
        }
        if let Some(t) = tracker {
            t.inc();
        }
        ErrorTable {
            height,
            start,
            center,
            k0,
            nv,
            nb,
            e,
            sol,
            tracker: tracker.cloned(),
        }
    }
}

/// Sorted non-zero candidate values (grid units) for a node's coefficient.
fn candidates(spec: &GridSpec, height: u32, coef: f64) -> Vec<i64> {
    let rho = spec.rho;
    let w = spec.half_width;
    let mut out: Vec<i64> = match &spec.search {
        Search::Band => {
            let lo = ((coef - w) / rho).ceil() as i64;
            let hi = ((coef + w) / rho).floor() as i64;
            (lo..=hi).collect()
        }
        Search::Nearest => {
            let d = (coef / rho).floor() as i64;
            vec![d, d + 1]
        }
        Search::PerHeight(steps) => {
            let step = steps[height as usize];
            let lo = ((coef - w) / step).ceil() as i64;
            let hi = ((coef + w) / step).floor() as i64;
            (lo..=hi).map(|m| (m as f64 * step / rho).round() as i64).collect()
        }
    };
    out.retain(|&r| r != 0);
    out.sort_unstable();
    out.dedup();
    out
}

/// `out[s] = min over i + j <= s` of `max(a[i], b[j])` (l-infinity) or `a[i] + b[j]`,
/// recording the minimizing `(i, j)`.
pub(crate) fn convolve(inf: bool, a: &[f64], b: &[f64], out: &mut [f64], split: &mut [(u32, u32)]) {
    if inf {
        minmax(a, b, out, split)
    } else {
        minplus(a, b, out, split)
    }
}

/// Two-pointer merge for non-increasing inputs: advancing the index of the
/// larger term is never worse, so one pass visits every optimal pair.
fn minmax(a: &[f64], b: &[f64], out: &mut [f64], split: &mut [(u32, u32)]) {
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = a[0].max(b[0]);
    let mut at = (0u32, 0u32);
    for s in 0..out.len() {
        if s > 0 {
            if i + 1 < a.len() && (j + 1 >= b.len() || a[i] >= b[j]) {
                i += 1;
            } else if j + 1 < b.len() {
                j += 1;
            }
            let v = a[i].max(b[j]);
            if v < best {
                best = v;
                at = (i as u32, j as u32);
            }
        }
        out[s] = best;
        split[s] = at;
    }
}

fn minplus(a: &[f64], b: &[f64], out: &mut [f64], split: &mut [(u32, u32)]) {
    out.iter_mut().for_each(|x| *x = f64::INFINITY);
    for (i, &x) in a.iter().enumerate().take(out.len()) {
        for (j, &y) in b.iter().enumerate().take(out.len() - i) {
            let v = x + y;
            if v < out[i + j] {
                out[i + j] = v;
                split[i + j] = (i as u32, j as u32);
            }
        }
    }
    for s in 1..out.len() {
        if out[s - 1] <= out[s] {
            out[s] = out[s - 1];
            split[s] = split[s - 1];
        }
    }
}
