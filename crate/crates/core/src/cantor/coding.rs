use super::{CantorError, VertexWord};

/// Level-`k` dyadic cube `Π [c_i/2^k, (c_i+1)/2^k]` in `[0, 1]^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    pub level: usize,
    /// Integer corner numerators `c_i < 2^level`.
    pub numerators: Vec<u64>,
}

impl DyadicCube {
    pub fn corner(&self) -> Vec<f64> {
        let scale = 2f64.powi(-(self.level as i32));
        self.numerators.iter().map(|&c| c as f64 * scale).collect()
    }

    pub fn size(&self) -> f64 {
        2f64.powi(-(self.level as i32))
    }
}

/// Binary coding of a word: coordinate `i` reads the bits
/// `(1 + π_i(v_j))/2`, `j = 1..k`, as `0.b_1 b_2 … b_k`.
pub fn code_z(word: &VertexWord) -> DyadicCube {
    assert!(word.depth() < 64, "dyadic level must stay below 64");
    let n = word.dimension();
    let mut numerators = vec![0u64; n];
    for &mask in word.levels() {
        for (i, c) in numerators.iter_mut().enumerate() {
            *c = (*c << 1) | (mask >> i & 1);
        }
    }
    DyadicCube {
        level: word.depth(),
        numerators,
    }
}

/// Inverse of [`code_z`] on integer corners.
pub fn dyadic_preimage_exact(numerators: &[u64], level: usize) -> Result<VertexWord, CantorError> {
    let n = numerators.len();
    if !(1..=super::MAX_DIMENSION).contains(&n) || level >= 64 {
        return Err(CantorError::Word(format!("unsupported shape n={n}, level={level}")));
    }
    if numerators.iter().any(|&c| c >> level != 0) {
        return Err(CantorError::Word(format!("corner numerators exceed 2^{level}")));
    }
    let mut w = VertexWord::empty(n);
    for j in (0..level).rev() {
        let mut mask = 0u64;
        for (i, &c) in numerators.iter().enumerate() {
            mask |= (c >> j & 1) << i;
        }
        w.push(mask);
    }
    Ok(w)
}

/// Word whose level-`level` dyadic cube has the given corner in `[0, 1)^n`.
pub fn dyadic_preimage(corner: &[f64], level: usize) -> Result<VertexWord, CantorError> {
    let precision = || CantorError::Precision {
        corner: corner.to_vec(),
        level,
    };
    if level >= 53 || corner.is_empty() {
        return Err(precision());
    }
    let scale = 2f64.powi(level as i32);
    let mut numerators = Vec::with_capacity(corner.len());
    for &c in corner {
        if !(c.is_finite() && (0.0..1.0).contains(&c)) {
            return Err(precision());
        }
        let s = c * scale;
        if s.fract() != 0.0 {
            return Err(precision());
        }
        numerators.push(s as u64);
    }
    dyadic_preimage_exact(&numerators, level)
}

/// Finite-depth proxy for the exceptional set on which the binary coding
/// fails to be injective: some coordinate's last `tail` bits are constant,
/// so its code sits within `2^{-(k-tail)}` of a dyadic boundary point.
pub fn on_dyadic_boundary(word: &VertexWord, tail: usize) -> bool {
    let k = word.depth();
    if tail == 0 || tail > k {
        return false;
    }
    let levels = &word.levels()[k - tail..];
    (0..word.dimension()).any(|i| {
        let first = levels[0] >> i & 1;
        levels.iter().all(|&m| m >> i & 1 == first)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_word_codes_unit_cube() {
        let c = code_z(&VertexWord::empty(3));
        assert_eq!(c.corner(), vec![0.0; 3]);
        assert_eq!(c.size(), 1.0);
    }

    #[test]
    fn single_level_example() {
        let c = code_z(&VertexWord::parse("-+", 2).unwrap());
        assert_eq!(c.corner(), vec![0.0, 0.5]);
        assert_eq!(c.size(), 0.5);
    }

    #[test]
    fn all_plus_approaches_the_far_corner() {
        for k in 1..=10 {
            let w = VertexWord::from_levels(2, vec![0b11; k]);
            let c = code_z(&w);
            let want = 1.0 - 2f64.powi(-(k as i32));
            assert_eq!(c.corner(), vec![want, want]);
        }
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(dyadic_preimage(&[0.5, 0.0], 1).unwrap().to_string(), "+-");
        assert_eq!(dyadic_preimage(&[0.75, 0.25], 2).unwrap().to_string(), "+-|++");
    }

    #[test]
    fn preimage_rejects_off_grid_corners() {
        assert!(dyadic_preimage(&[0.3, 0.0], 4).is_err());
        assert!(dyadic_preimage(&[1.0, 0.0], 2).is_err());
        assert!(dyadic_preimage(&[0.125, 0.0], 2).is_err());
        assert!(dyadic_preimage(&[f64::NAN], 2).is_err());
    }

    #[test]
    fn exhaustive_roundtrip_small_levels() {
        for k in 0..=5 {
            let mut seen = std::collections::HashSet::new();
            for w in VertexWord::all(2, k) {
                let c = code_z(&w);
                assert!(seen.insert(c.numerators.clone()));
                assert_eq!(dyadic_preimage(&c.corner(), k).unwrap(), w);
            }
            assert_eq!(seen.len(), 1 << (2 * k));
        }
    }

    #[test]
    fn boundary_predicate() {
        let w = VertexWord::parse("+-|--|+-", 2).unwrap();
        // second coordinate is constant '-' over the last 3 levels
        assert!(on_dyadic_boundary(&w, 3));
        let w = VertexWord::parse("+-|-+|+-", 2).unwrap();
        assert!(!on_dyadic_boundary(&w, 3));
        assert!(!on_dyadic_boundary(&w, 0));
    }
}
