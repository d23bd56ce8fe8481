use std::collections::BTreeMap;

use super::cascade::Scaling;
use super::filter::FilterBank;
use crate::error::{checked_log2, Error, Result};

#[derive(Debug, Clone, Copy)]
struct Partial {
    a: f64,
    d: f64,
    remaining: u32,
}

/// Open outputs of one cascade level, keyed by output shift.
#[derive(Debug, Clone)]
struct Level {
    m: usize,
    received: usize,
    next_emit: usize,
    open: BTreeMap<usize, Partial>,
}

impl Level {
    fn push(&mut self, x: f64, h: &[f64], g: &[f64], out: &mut Vec<(usize, f64, f64)>) {
        let s = self.received;
        let m = self.m as isize;
        let taps = h.len() as u32;
        for k in 0..h.len() {
            let idx = (s as isize - k as isize).rem_euclid(m) as usize;
            if idx % 2 != 0 {
                continue;
            }
            let p = self.open.entry(idx / 2).or_insert(Partial {
                a: 0.0,
                d: 0.0,
                remaining: taps,
            });
            p.a += h[k] * x;
            p.d += g[k] * x;
            p.remaining -= 1;
        }
        self.received += 1;
        while let Some(p) = self.open.get(&self.next_emit) {
            if p.remaining != 0 {
                break;
            }
            let p = self.open.remove(&self.next_emit).expect("present");
            out.push((self.next_emit, p.a, p.d));
            self.next_emit += 1;
        }
    }
}

/// One-pass forward cascade over a stream delivered in index order.
///
/// Each detail coefficient is emitted as soon as its last input arrives.
/// State per level is the set of partially accumulated outputs, which is
/// at most `2q - 1` entries plus the ones waiting on wrap-around inputs.
#[derive(Debug, Clone)]
pub struct StreamingCascade {
    n: usize,
    h: Vec<f64>,
    g: Vec<f64>,
    gain: f64,
    levels: Vec<Level>,
    pushed: usize,
    peak_open: usize,
    buf: Vec<(usize, f64, f64)>,
}

impl StreamingCascade {
    pub fn new(n: usize, fb: &FilterBank, scaling: Scaling) -> Result<Self> {
        let l = checked_log2(n)?;
        let levels = (0..l)
            .map(|j| Level {
                m: n >> j,
                received: 0,
                next_emit: 0,
                open: BTreeMap::new(),
            })
            .collect();
        Ok(StreamingCascade {
            n,
            h: fb.h().to_vec(),
            g: fb.g().to_vec(),
            gain: scaling.gain(),
            levels,
            pushed: 0,
            peak_open: 0,
            buf: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn pushed(&self) -> usize {
        self.pushed
    }

    /// Partially accumulated outputs currently held.
    pub fn open(&self) -> usize {
        self.levels.iter().map(|l| l.open.len()).sum()
    }

    pub fn peak_open(&self) -> usize {
        self.peak_open
    }

    /// Feeds the next sample; `emit(pos, value)` receives finished coefficients
    /// by 0-based flat position.
    pub fn push(&mut self, x: f64, mut emit: impl FnMut(usize, f64)) -> Result<()> {
        if self.pushed == self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: self.n + 1,
            });
        }
        if !x.is_finite() {
            return Err(Error::NonFinite { index: self.pushed });
        }
        self.pushed += 1;
        if self.levels.is_empty() {
            emit(0, x);
            return Ok(());
        }
        let mut carry = vec![x];
        for j in 0..self.levels.len() {
            let mut next = Vec::new();
            for &v in &carry {
                self.buf.clear();
                self.levels[j].push(v, &self.h, &self.g, &mut self.buf);
                let half = self.levels[j].m / 2;
                for &(t, a, d) in &self.buf {
                    emit(half + t, self.gain * d);
                    next.push(self.gain * a);
                }
            }
            self.peak_open = self.peak_open.max(self.open());
            if next.is_empty() {
                return Ok(());
            }
            carry = next;
        }
        debug_assert_eq!(carry.len(), 1);
        emit(0, carry[0]);
        Ok(())
    }

    /// Checks that the whole signal was delivered.
    pub fn finish(&self) -> Result<()> {
        if self.pushed != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: self.pushed,
            });
        }
        debug_assert_eq!(self.open(), 0);
        Ok(())
    }
}
