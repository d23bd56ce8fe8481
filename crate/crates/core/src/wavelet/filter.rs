#![allow(clippy::excessive_precision)]

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const DB2: [f64; 4] = [
    0.48296291314453414,
    0.83651630373780791,
    0.22414386804201338,
    -0.12940952255126038,
];

const DB3: [f64; 6] = [
    0.33267055295008262,
    0.80689150931109258,
    0.45987750211849157,
    -0.13501102001025459,
    -0.085441273882026662,
    0.035226291885709537,
];

const DB4: [f64; 8] = [
    0.23037781330889650,
    0.71484657055291565,
    0.63088076792985891,
    -0.027983769416859854,
    -0.18703481171909308,
    0.030841381835560764,
    0.032883011666885200,
    -0.010597401785069032,
];

/// A conjugate mirror filter pair `(h, g)` with `2q` taps.
///
/// The high-pass filter is the alternating flip `g[k] = (-1)^k h[2q-1-k]`,
/// so for Haar `g = (1/√2, -1/√2)` and detail coefficients are scaled
/// left-minus-right differences.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    name: &'static str,
    h: Vec<f64>,
    g: Vec<f64>,
}

impl FilterBank {
    pub fn haar() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_lowpass("haar", &[s, s])
    }

    pub fn db2() -> Self {
        Self::from_lowpass("db2", &DB2)
    }

    pub fn db3() -> Self {
        Self::from_lowpass("db3", &DB3)
    }

    pub fn db4() -> Self {
        Self::from_lowpass("db4", &DB4)
    }

    /// Every built-in bank, coarsest support first.
    pub fn all() -> Vec<FilterBank> {
        vec![Self::haar(), Self::db2(), Self::db3(), Self::db4()]
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(Self::haar()),
            "db2" => Ok(Self::db2()),
            "db3" => Ok(Self::db3()),
            "db4" => Ok(Self::db4()),
            _ => Err(Error::UnknownFilter(name.to_string())),
        }
    }

    fn from_lowpass(name: &'static str, h: &[f64]) -> Self {
        let len = h.len();
        let g = (0..len)
            .map(|k| {
                let v = h[len - 1 - k];
                if k % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        FilterBank {
            name,
            h: h.to_vec(),
            g,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Half the filter length.
    pub fn q(&self) -> usize {
        self.h.len() / 2
    }

    pub fn taps(&self) -> usize {
        self.h.len()
    }

    pub fn is_haar(&self) -> bool {
        self.h.len() == 2
    }
}

impl fmt::Display for FilterBank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

impl FromStr for FilterBank {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::by_name(s)
    }
}
