use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::cascade::{basis_vector, Scaling};
use super::filter::FilterBank;
use super::index::{level_of_pos, Kind, WaveletIndex};
use crate::error::{checked_log2, Result};
use crate::norm::LpNorm;

type Key = (&'static str, usize, u64);

fn cache() -> &'static RwLock<HashMap<Key, Arc<LevelNorms>>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<LevelNorms>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Orthonormal basis-vector lp norms for one `(filter, n, p)`, by level.
///
/// Periodic boundaries make every vector at a level a circular shift of
/// shift 0, so a level's norm covers all of its vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelNorms {
    pub n: usize,
    pub p: LpNorm,
    /// `detail[j]` for `j` in `1..=L`; entry 0 is unused.
    pub detail: Vec<f64>,
    /// `scaling[j]` for `j` in `0..=L`.
    pub scaling: Vec<f64>,
}

impl LevelNorms {
    pub fn get(fb: &FilterBank, n: usize, p: LpNorm) -> Result<Arc<LevelNorms>> {
        checked_log2(n)?;
        let key = (fb.name(), n, p.p().to_bits());
        if let Some(hit) = cache().read().expect("norm cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(Self::compute(fb, n, p)?);
        let mut w = cache().write().expect("norm cache poisoned");
        Ok(w.entry(key).or_insert(fresh).clone())
    }

    fn compute(fb: &FilterBank, n: usize, p: LpNorm) -> Result<LevelNorms> {
        let levels = checked_log2(n)?;
        let mut detail = vec![f64::NAN; levels as usize + 1];
        let mut scaling = vec![f64::NAN; levels as usize + 1];
        for j in 0..=levels {
            let phi = basis_vector(
                WaveletIndex {
                    kind: Kind::Scaling,
                    level: j,
                    shift: 0,
                },
                n,
                fb,
                Scaling::Orthonormal,
            )?;
            scaling[j as usize] = p.norm(phi);
            if j > 0 {
                let psi = basis_vector(WaveletIndex::detail(j, 0), n, fb, Scaling::Orthonormal)?;
                detail[j as usize] = p.norm(psi);
            }
        }
        Ok(LevelNorms { n, p, detail, scaling })
    }

    pub fn levels(&self) -> u32 {
        self.scaling.len() as u32 - 1
    }

    /// Norm of the vector at 0-based storage position `pos`.
    #[inline]
    pub fn at_pos(&self, pos: usize) -> f64 {
        let levels = self.levels();
        if pos == 0 {
            self.scaling[levels as usize]
        } else {
            self.detail[level_of_pos(pos, levels) as usize]
        }
    }

    pub fn of(&self, idx: WaveletIndex) -> f64 {
        match idx.kind {
            Kind::Scaling => self.scaling[idx.level as usize],
            Kind::Detail => self.detail[idx.level as usize],
        }
    }
}

/// Exact lp norm of the orthonormal basis vector `idx`.
pub fn basis_norm(idx: WaveletIndex, n: usize, fb: &FilterBank, p: LpNorm) -> Result<f64> {
    idx.validate(n)?;
    Ok(LevelNorms::get(fb, n, p)?.of(idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn haar_closed_forms() {
        let fb = FilterBank::haar();
        let n = 64;
        for j in 1..=6u32 {
            let idx = WaveletIndex::detail(j, 0);
            let l1 = basis_norm(idx, n, &fb, LpNorm::ONE).unwrap();
            let linf = basis_norm(idx, n, &fb, LpNorm::INF).unwrap();
            let l2 = basis_norm(idx, n, &fb, LpNorm::TWO).unwrap();
            assert_relative_eq!(l1, 2f64.powf(j as f64 / 2.0), max_relative = 1e-12);
            assert_relative_eq!(linf, 2f64.powf(-(j as f64) / 2.0), max_relative = 1e-12);
            assert_relative_eq!(l2, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn norms_match_materialized_vectors() {
        let n = 32;
        let p = LpNorm::new(1.7).unwrap();
        for fb in FilterBank::all() {
            let norms = LevelNorms::get(&fb, n, p).unwrap();
            for flat in 1..=n {
                let idx = WaveletIndex::from_flat(flat, n).unwrap();
                let v = basis_vector(idx, n, &fb, Scaling::Orthonormal).unwrap();
                assert_relative_eq!(norms.at_pos(flat - 1), p.norm(v), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn cache_returns_shared_entry() {
        let fb = FilterBank::db2();
        let a = LevelNorms::get(&fb, 16, LpNorm::INF).unwrap();
        let b = LevelNorms::get(&fb, 16, LpNorm::INF).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
