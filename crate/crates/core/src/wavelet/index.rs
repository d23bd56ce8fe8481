use crate::error::{checked_log2, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Scaling,
    Detail,
}

/// Position of a basis vector in a length-`n` decomposition.
///
/// Flat indices are 1-based. Index 1 is the root scaling vector at level
/// `log2 n`; details follow coarse to fine, shifts left to right, so the
/// detail at `(j, s)` sits at `n / 2^j + s + 1`. In 0-based storage
/// position the parent of detail `i >= 2` is `i / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveletIndex {
    pub kind: Kind,
    pub level: u32,
    pub shift: usize,
}

impl WaveletIndex {
    pub fn root(n: usize) -> Result<Self> {
        Ok(WaveletIndex {
            kind: Kind::Scaling,
            level: checked_log2(n)?,
            shift: 0,
        })
    }

    pub fn detail(level: u32, shift: usize) -> Self {
        WaveletIndex {
            kind: Kind::Detail,
            level,
            shift,
        }
    }

    pub fn from_flat(flat: usize, n: usize) -> Result<Self> {
        let levels = checked_log2(n)?;
        if flat == 0 || flat > n {
            return Err(Error::InvalidIndex(format!("flat index {flat} outside [1, {n}]")));
        }
        if flat == 1 {
            return Self::root(n);
        }
        let pos = flat - 1;
        let block = 1usize << (usize::BITS - 1 - pos.leading_zeros());
        let level = levels - block.trailing_zeros();
        Ok(WaveletIndex::detail(level, pos - block))
    }

    /// Validates the index against `n` and returns its flat position.
    pub fn flat(&self, n: usize) -> Result<usize> {
        let levels = checked_log2(n)?;
        match self.kind {
            Kind::Scaling => {
                if self.level != levels || self.shift != 0 {
                    return Err(Error::InvalidIndex(format!(
                        "only the root scaling vector (level {levels}, shift 0) has a flat index"
                    )));
                }
                Ok(1)
            }
            Kind::Detail => {
                if self.level == 0 || self.level > levels {
                    return Err(Error::InvalidIndex(format!(
                        "detail level {} outside [1, {levels}]",
                        self.level
                    )));
                }
                let count = n >> self.level;
                if self.shift >= count {
                    return Err(Error::InvalidIndex(format!(
                        "shift {} outside [0, {count}) at level {}",
                        self.shift, self.level
                    )));
                }
                Ok(count + self.shift + 1)
            }
        }
    }

    /// Checks the index against `n`, also accepting non-root scaling vectors.
    pub fn validate(&self, n: usize) -> Result<()> {
        let levels = checked_log2(n)?;
        match self.kind {
            Kind::Detail => self.flat(n).map(|_| ()),
            Kind::Scaling => {
                if self.level > levels || self.shift >= n >> self.level {
                    Err(Error::InvalidIndex(format!(
                        "scaling index (level {}, shift {}) invalid for n = {n}",
                        self.level, self.shift
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Level of the basis vector stored at 0-based position `pos` of a length-`n` vector.
#[inline]
pub(crate) fn level_of_pos(pos: usize, levels: u32) -> u32 {
    if pos == 0 {
        levels
    } else {
        levels - (usize::BITS - 1 - pos.leading_zeros())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_layout_n4() {
        let n = 4;
        assert_eq!(WaveletIndex::from_flat(1, n).unwrap(), WaveletIndex::root(n).unwrap());
        assert_eq!(WaveletIndex::from_flat(2, n).unwrap(), WaveletIndex::detail(2, 0));
        assert_eq!(WaveletIndex::from_flat(3, n).unwrap(), WaveletIndex::detail(1, 0));
        assert_eq!(WaveletIndex::from_flat(4, n).unwrap(), WaveletIndex::detail(1, 1));
        assert!(WaveletIndex::from_flat(5, n).is_err());
        assert!(WaveletIndex::from_flat(0, n).is_err());
    }

    #[test]
    fn bijection_and_heap_parent() {
        for levels in 0..=10u32 {
            let n = 1usize << levels;
            for flat in 1..=n {
                let idx = WaveletIndex::from_flat(flat, n).unwrap();
                assert_eq!(idx.flat(n).unwrap(), flat);
                assert_eq!(level_of_pos(flat - 1, levels), idx.level);
                if flat >= 3 {
                    let parent = WaveletIndex::from_flat((flat - 1) / 2 + 1, n).unwrap();
                    assert_eq!(parent.level, idx.level + 1);
                    assert_eq!(parent.shift, idx.shift / 2);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(WaveletIndex::detail(0, 0).flat(8).is_err());
        assert!(WaveletIndex::detail(2, 2).flat(8).is_err());
        assert!(WaveletIndex::detail(1, 0).flat(6).is_err());
        let s = WaveletIndex {
            kind: Kind::Scaling,
            level: 1,
            shift: 3,
        };
        assert!(s.validate(8).is_ok());
        assert!(s.flat(8).is_err());
    }
}
