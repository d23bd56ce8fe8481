//! Sparse representations and their text file format.
//!
//! ```text
//! 4 haar orthonormal inf 1
//! # error 2.5
//! 1 7
//! ```
//!
//! The header is `n basis scaling p B`, followed by `flat value` lines in
//! increasing flat order. Values use shortest round-trip formatting so a
//! write/read/write cycle is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{checked_log2, Error, Result};
use crate::norm::{lp_error, LpNorm, Weights};
use crate::wavelet::{cascade_inverse, CoefficientVector, FilterBank, Scaling};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    /// 1-based flat index.
    pub flat: usize,
    pub value: f64,
}

/// A B-term approximation `sum_i z_i psi_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub n: usize,
    pub basis: String,
    pub scaling: Scaling,
    /// Norm the selection targeted; `None` for the multi-norm universal set.
    pub p: Option<LpNorm>,
    pub budget: usize,
    /// Sorted by flat index, no duplicates.
    pub terms: Vec<Term>,
    pub reported_error: f64,
}

impl Representation {
    /// Builds a representation from unsorted terms and verifies it against `f`.
    pub(crate) fn verified(
        f: &[f64],
        fb: &FilterBank,
        p: Option<LpNorm>,
        budget: usize,
        mut terms: Vec<Term>,
        weights: Option<&Weights>,
    ) -> Result<Self> {
        terms.sort_by_key(|t| t.flat);
        let mut r = Representation {
            n: f.len(),
            basis: fb.name().to_string(),
            scaling: Scaling::Orthonormal,
            p,
            budget,
            terms,
            reported_error: 0.0,
        };
        r.reported_error = r.error(f, p.unwrap_or(LpNorm::TWO), weights)?;
        Ok(r)
    }

    pub fn filter(&self) -> Result<FilterBank> {
        FilterBank::by_name(&self.basis)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficients(&self) -> Result<CoefficientVector> {
        checked_log2(self.n)?;
        let mut values = vec![0.0; self.n];
        for t in &self.terms {
            if t.flat == 0 || t.flat > self.n {
                return Err(Error::InvalidIndex(format!("flat index {} outside [1, {}]", t.flat, self.n)));
            }
            values[t.flat - 1] = t.value;
        }
        Ok(CoefficientVector {
            scaling: self.scaling,
            values,
        })
    }

    pub fn reconstruct(&self) -> Result<Vec<f64>> {
        cascade_inverse(&self.coefficients()?, &self.filter()?)
    }

    pub fn error(&self, f: &[f64], p: LpNorm, weights: Option<&Weights>) -> Result<f64> {
        lp_error(f, &self.reconstruct()?, p, weights)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = self.p.map_or_else(|| "universal".to_string(), |p| p.to_string());
        let _ = writeln!(s, "{} {} {} {} {}", self.n, self.basis, self.scaling, p, self.budget);
        let _ = writeln!(s, "# error {}", self.reported_error);
        for t in &self.terms {
            let _ = writeln!(s, "{} {}", t.flat, t.value);
        }
        s
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty representation file".into()))?;
        let mut rep = parse_header(header).map_err(|m| perr(hl + 1, m))?;
        for (i, line) in lines {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("error") {
                    rep.reported_error = v.trim().parse().map_err(|_| perr(i + 1, "bad error value".into()))?;
                }
                continue;
            }
            let t = parse_term(line).map_err(|m| perr(i + 1, m))?;
            if t.flat == 0 || t.flat > rep.n {
                return Err(perr(i + 1, format!("flat index {} outside [1, {}]", t.flat, rep.n)));
            }
            if rep.terms.last().is_some_and(|l| l.flat >= t.flat) {
                return Err(perr(i + 1, "terms must be strictly increasing by flat index".into()));
            }
            rep.terms.push(t);
        }
        Ok(rep)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?, path)
    }
}

pub(crate) fn parse_header(line: &str) -> std::result::Result<Representation, String> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 5 {
        return Err("header must be 'n basis scaling p B'".into());
    }
    let n: usize = parts[0].parse().map_err(|_| format!("bad length '{}'", parts[0]))?;
    checked_log2(n).map_err(|e| e.to_string())?;
    FilterBank::by_name(parts[1]).map_err(|e| e.to_string())?;
    let scaling: Scaling = parts[2].parse().map_err(|e: Error| e.to_string())?;
    let p = match parts[3] {
        "universal" => None,
        s => Some(s.parse::<LpNorm>().map_err(|e| e.to_string())?),
    };
    let budget: usize = parts[4].parse().map_err(|_| format!("bad budget '{}'", parts[4]))?;
    Ok(Representation {
        n,
        basis: parts[1].to_string(),
        scaling,
        p,
        budget,
        terms: Vec::new(),
        reported_error: f64::NAN,
    })
}

pub(crate) fn parse_term(line: &str) -> std::result::Result<Term, String> {
    let mut it = line.split_whitespace();
    let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
        return Err(format!("expected 'flat value', got '{line}'"));
    };
    let flat = a.parse().map_err(|_| format!("bad flat index '{a}'"))?;
    let value: f64 = b.parse().map_err(|_| format!("bad value '{b}'"))?;
    if !value.is_finite() {
        return Err(format!("non-finite value '{b}'"));
    }
    Ok(Term { flat, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Representation {
        Representation {
            n: 8,
            basis: "db2".into(),
            scaling: Scaling::Orthonormal,
            p: Some(LpNorm::new(1.5).unwrap()),
            budget: 3,
            terms: vec![
                Term { flat: 1, value: 0.1 + 0.2 },
                Term { flat: 5, value: -1e-300 },
                Term { flat: 8, value: 12345.678 },
            ],
            reported_error: 1.0 / 3.0,
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let r = sample();
        let text = r.to_text();
        let back = Representation::from_text(&text, Path::new("x")).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn universal_header() {
        let mut r = sample();
        r.p = None;
        let back = Representation::from_text(&r.to_text(), Path::new("x")).unwrap();
        assert_eq!(back.p, None);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let bad = "8 haar orthonormal 2 1\n1 0.5\n9 1.0\n";
        match Representation::from_text(bad, Path::new("r.txt")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(Representation::from_text("8 haar orthonormal 2 1\n3 1\n2 1\n", Path::new("r")).is_err());
        assert!(Representation::from_text("6 haar orthonormal 2 1\n", Path::new("r")).is_err());
    }
}
