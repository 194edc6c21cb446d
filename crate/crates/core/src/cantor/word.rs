use std::fmt;

use super::CantorError;

/// Largest supported dimension; one level of a word packs into a `u64`.
pub const MAX_DIMENSION: usize = 64;

/// Address of a cube in the hierarchy: one vertex of `{-1, +1}^n` per level.
///
/// Each level is a bitmask whose bit `i` is set when coordinate `i` is `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexWord {
    n: usize,
    levels: Vec<u64>,
}

impl VertexWord {
    pub fn empty(n: usize) -> Self {
        assert!((1..=MAX_DIMENSION).contains(&n), "dimension {n} out of range");
        VertexWord {
            n,
            levels: Vec::new(),
        }
    }

    pub fn from_levels(n: usize, levels: Vec<u64>) -> Self {
        let mut w = VertexWord::empty(n);
        for l in levels {
            w.push(l);
        }
        w
    }

    /// Builds a word from explicit sign vectors.
    pub fn from_signs(n: usize, vertices: &[Vec<i8>]) -> Result<Self, CantorError> {
        let mut w = VertexWord::empty(n);
        for v in vertices {
            if v.len() != n {
                return Err(CantorError::Word(format!("vertex {v:?} has wrong dimension")));
            }
            let mut mask = 0u64;
            for (i, &s) in v.iter().enumerate() {
                match s {
                    1 => mask |= 1 << i,
                    -1 => {}
                    _ => return Err(CantorError::Word(format!("sign {s} is not +-1"))),
                }
            }
            w.push(mask);
        }
        Ok(w)
    }

    pub fn push(&mut self, mask: u64) {
        let full = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        self.levels.push(mask & full);
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[u64] {
        &self.levels
    }

    /// Sign `±1` of coordinate `i` at level `level` (1-based).
    pub fn sign(&self, level: usize, i: usize) -> f64 {
        if self.levels[level - 1] >> i & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Vertex at level `level` (1-based) as a vector of `±1`.
    pub fn vertex(&self, level: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.sign(level, i)).collect()
    }

    pub fn prefix(&self, j: usize) -> VertexWord {
        VertexWord {
            n: self.n,
            levels: self.levels[..j.min(self.levels.len())].to_vec(),
        }
    }

    pub fn has_prefix(&self, other: &VertexWord) -> bool {
        self.n == other.n && self.levels.starts_with(&other.levels)
    }

    pub fn child(&self, mask: u64) -> VertexWord {
        let mut w = self.clone();
        w.push(mask);
        w
    }

    /// All `2^{nk}` words of depth `k`, in lexicographic order of masks.
    pub fn all(n: usize, k: usize) -> impl Iterator<Item = VertexWord> {
        let per_level = 1u64 << n;
        let total = (per_level as u128).pow(k as u32);
        (0..total).map(move |mut idx| {
            let mut levels = vec![0u64; k];
            for slot in levels.iter_mut().rev() {
                *slot = (idx % per_level as u128) as u64;
                idx /= per_level as u128;
            }
            VertexWord { n, levels }
        })
    }

    /// Parses the `"++|-+"` form: per-level sign strings separated by `|`.
    pub fn parse(text: &str, n: usize) -> Result<Self, CantorError> {
        if !(1..=MAX_DIMENSION).contains(&n) {
            return Err(CantorError::Word(format!("dimension {n} out of range")));
        }
        let mut w = VertexWord::empty(n);
        if text.is_empty() {
            return Ok(w);
        }
        for level in text.split('|') {
            if level.len() != n {
                return Err(CantorError::Word(format!(
                    "level {level:?} has {} signs, expected {n}",
                    level.len()
                )));
            }
            let mut mask = 0u64;
            for (i, c) in level.bytes().enumerate() {
                match c {
                    b'+' => mask |= 1 << i,
                    b'-' => {}
                    _ => return Err(CantorError::Word(format!("bad sign character {:?}", c as char))),
                }
            }
            w.push(mask);
        }
        Ok(w)
    }
}

impl fmt::Display for VertexWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, &mask) in self.levels.iter().enumerate() {
            if j > 0 {
                f.write_str("|")?;
            }
            for i in 0..self.n {
                f.write_str(if mask >> i & 1 == 1 { "+" } else { "-" })?;
            }
        }
        Ok(())
    }
}
