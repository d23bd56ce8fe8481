//! The `p` of an lp error measure, per-point workload weights, and the
//! (weighted) lp distance between a signal and its approximation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An lp norm parameter, `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LpNorm(f64);

impl LpNorm {
    pub const ONE: LpNorm = LpNorm(1.0);
    pub const TWO: LpNorm = LpNorm(2.0);
    pub const INF: LpNorm = LpNorm(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidNorm(format!("p must lie in [1, inf], got {p}")));
        }
        Ok(LpNorm(p))
    }

    pub fn p(self) -> f64 {
        self.0
    }

    pub fn is_inf(self) -> bool {
        self.0.is_infinite()
    }

    /// The Hölder conjugate: `1/p + 1/p' = 1`, with `1 <-> inf`.
    pub fn conjugate(self) -> LpNorm {
        if self.0 == 1.0 {
            LpNorm::INF
        } else if self.is_inf() {
            LpNorm::ONE
        } else {
            LpNorm(self.0 / (self.0 - 1.0))
        }
    }

    /// `n^(1/p)`, which is 1 for the max norm.
    pub fn root_of(self, n: f64) -> f64 {
        if self.is_inf() {
            1.0
        } else {
            n.powf(1.0 / self.0)
        }
    }

    /// Norm of a vector given by its entries.
    pub fn norm<I: IntoIterator<Item = f64>>(self, values: I) -> f64 {
        let mut acc = Accumulator::new(self);
        for v in values {
            acc.add(v);
        }
        acc.finish()
    }
}

impl fmt::Display for LpNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for LpNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" | "∞" => Ok(LpNorm::INF),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidNorm(format!("cannot parse '{s}'")))?;
                LpNorm::new(p)
            }
        }
    }
}

/// Running lp accumulator: max for `inf`, sum of p-th powers otherwise.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Accumulator {
    norm: LpNorm,
    acc: f64,
}

impl Accumulator {
    pub(crate) fn new(norm: LpNorm) -> Self {
        Accumulator { norm, acc: 0.0 }
    }

    pub(crate) fn add(&mut self, v: f64) {
        let a = v.abs();
        if self.norm.is_inf() {
            if a > self.acc {
                self.acc = a;
            }
        } else if self.norm.0 == 1.0 {
            self.acc += a;
        } else if self.norm.0 == 2.0 {
            self.acc += a * a;
        } else {
            self.acc += a.powf(self.norm.0);
        }
    }

    pub(crate) fn finish(self) -> f64 {
        if self.norm.is_inf() || self.norm.0 == 1.0 {
            self.acc
        } else if self.norm.0 == 2.0 {
            self.acc.sqrt()
        } else {
            self.acc.powf(1.0 / self.norm.0)
        }
    }
}

/// Per-point workload weights: `0 < w_i <= 1`, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    w: Vec<f64>,
    max: f64,
    min: f64,
}

impl Weights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(i) = w.iter().position(|&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Error::InvalidWeights(format!(
                "weight {i} = {} is outside (0, 1]",
                w[i]
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        let max = w.iter().copied().fold(f64::MIN, f64::max);
        let min = w.iter().copied().fold(f64::MAX, f64::min);
        Ok(Weights { w, max, min })
    }

    /// Uniform weights `1/n`.
    pub fn uniform(n: usize) -> Self {
        let v = 1.0 / n as f64;
        Weights {
            w: vec![v; n],
            max: v,
            min: v,
        }
    }

    /// Normalizes arbitrary positive values into weights.
    pub fn from_unnormalized(raw: &[f64]) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if !(sum > 0.0) || raw.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidWeights("raw weights must be positive and finite".into()));
        }
        Weights::new(raw.iter().map(|x| x / sum).collect())
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn get(&self, i: usize) -> f64 {
        self.w[i]
    }

    /// `W = max_i w_i`.
    pub fn max(&self) -> f64 {
        self.max
    }

    /// `w = min_i w_i`.
    pub fn min(&self) -> f64 {
        self.min
    }
}

/// The (optionally weighted) lp distance `||f - fhat||_{p,w}`.
pub fn lp_error(f: &[f64], fhat: &[f64], norm: LpNorm, weights: Option<&Weights>) -> Result<f64> {
    if f.len() != fhat.len() {
        return Err(Error::LengthMismatch {
            expected: f.len(),
            actual: fhat.len(),
        });
    }
    if let Some(w) = weights {
        if w.len() != f.len() {
            return Err(Error::LengthMismatch {
                expected: f.len(),
                actual: w.len(),
            });
        }
    }
    let mut acc = Accumulator::new(norm);
    match weights {
        None => f.iter().zip(fhat).for_each(|(a, b)| acc.add(a - b)),
        Some(w) => f
            .iter()
            .zip(fhat)
            .zip(w.as_slice())
            .for_each(|((a, b), wi)| acc.add(wi * (a - b))),
    }
    Ok(acc.finish())
}
