use serde::{Deserialize, Serialize};

use super::{CantorError, Side};

/// Maximum residual, in units in the last place, accepted for the two
/// gluing equations of each level.
pub const GLUING_ULPS: f64 = 4.0;

/// Distance between `x` and the next representable value above `|x|`.
pub fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        f64::from_bits(1)
    } else if x.is_finite() {
        f64::from_bits(x.to_bits() + 1) - x
    } else {
        f64::NAN
    }
}

/// `|lhs - rhs|` measured in ulps of the larger magnitude.
pub fn ulps_apart(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    (lhs - rhs).abs() / ulp(lhs.abs().max(rhs.abs()))
}

/// Parameters of one construction to depth `K`.
///
/// `a`, `b` hold `a_0..a_K`, `b_0..b_K`; the half-edges are
/// `r_k = 2^{-k} a_k` and `rt_k = 2^{-k} b_k`. Radial coefficients
/// `alpha`, `beta` are indexed `1..=K` (index 0 is unused and zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequencePack {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    r: Vec<f64>,
    rt: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    standard: bool,
}

/// Gluing residuals of one level, in ulps: inner face then outer face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GluingResidual {
    pub k: usize,
    pub inner: f64,
    pub outer: f64,
}

impl GluingResidual {
    pub fn max(&self) -> f64 {
        self.inner.max(self.outer)
    }
}

fn half_edges(seq: &[f64]) -> Vec<f64> {
    seq.iter()
        .enumerate()
        .map(|(k, &v)| v * 2f64.powi(-(k as i32)))
        .collect()
}

impl SequencePack {
    /// Standard pack `b_k = (1 + a_k)/2`, with `alpha_k = 1/2` and
    /// `beta_k = 2^{-k-1}`.
    pub fn standard(n: usize, a: Vec<f64>) -> Result<Self, CantorError> {
        let b: Vec<f64> = a.iter().map(|&v| 0.5 * (1.0 + v)).collect();
        let depth = a.len().saturating_sub(1);
        let mut alpha = vec![0.0; depth + 1];
        let mut beta = vec![0.0; depth + 1];
        for k in 1..=depth {
            alpha[k] = 0.5;
            beta[k] = 2f64.powi(-(k as i32) - 1);
        }
        let mut pack = Self::from_parts(n, a, b, alpha, beta)?;
        pack.standard = true;
        Ok(pack)
    }

    /// General pack: solves the two gluing equations of each level for
    /// `alpha_k`, `beta_k`.
    pub fn with_targets(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self, CantorError> {
        let depth = a.len().saturating_sub(1);
        let r = half_edges(&a);
        let rt = half_edges(&b);
        let mut alpha = vec![0.0; depth + 1];
        let mut beta = vec![0.0; depth + 1];
        for k in 1..=depth.min(rt.len().saturating_sub(1)) {
            let dr = r[k] - 0.5 * r[k - 1];
            let drt = rt[k] - 0.5 * rt[k - 1];
            if dr == 0.0 {
                // empty annulus: any line through both points works
                alpha[k] = rt[k] / r[k];
                beta[k] = 0.0;
            } else {
                alpha[k] = drt / dr;
                beta[k] = (-alpha[k]).mul_add(r[k], rt[k]);
            }
        }
        Self::from_parts(n, a, b, alpha, beta)
    }

    /// Pack from explicit coefficients. Checks every structural invariant
    /// except gluing; see [`SequencePack::gluing_residuals`].
    pub fn from_parts(
        n: usize,
        a: Vec<f64>,
        b: Vec<f64>,
        alpha: Vec<f64>,
        beta: Vec<f64>,
    ) -> Result<Self, CantorError> {
        let bad = |msg: String| Err(CantorError::Pack(msg));
        if !(1..=super::MAX_DIMENSION).contains(&n) {
            return bad(format!("dimension {n} out of range"));
        }
        if a.len() < 2 {
            return bad("need a_0..a_K with K >= 1".into());
        }
        if b.len() != a.len() || alpha.len() != a.len() || beta.len() != a.len() {
            return bad("sequence lengths differ".into());
        }
        if a[0] != 1.0 || b[0] != 1.0 {
            return bad(format!("a_0 = {}, b_0 = {}; both must be 1", a[0], b[0]));
        }
        for (name, seq) in [("a", &a), ("b", &b)] {
            for (k, &v) in seq.iter().enumerate() {
                if !(v.is_finite() && v > 0.0 && v <= 1.0) {
                    return bad(format!("{name}_{k} = {v} is outside (0, 1]"));
                }
                if k > 0 && v > seq[k - 1] {
                    return bad(format!("{name} increases at k = {k}"));
                }
            }
        }
        for k in 1..a.len() {
            if !(alpha[k].is_finite() && alpha[k] > 0.0 && beta[k].is_finite() && beta[k] >= 0.0) {
                return bad(format!("radial coefficients at k = {k} must be positive"));
            }
        }
        let r = half_edges(&a);
        let rt = half_edges(&b);
        for k in 1..a.len() {
            // an empty domain annulus cannot cover a non-empty target one; the
            // converse happens once b_k rounds to its limit
            if a[k] == a[k - 1] && b[k] != b[k - 1] {
                return bad(format!("annulus at k = {k} is empty in the domain only"));
            }
            if r[k] == 0.0 || rt[k] == 0.0 {
                return bad(format!("half-edge underflows at k = {k}"));
            }
        }
        Ok(SequencePack {
            n,
            a,
            b,
            r,
            rt,
            alpha,
            beta,
            standard: false,
        })
    }

    /// Pack with `b = a`, whose map is the identity.
    pub fn identity(n: usize, a: Vec<f64>) -> Result<Self, CantorError> {
        Self::with_targets(n, a.clone(), a)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Maximum depth `K`.
    pub fn depth(&self) -> usize {
        self.a.len() - 1
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn rt(&self) -> &[f64] {
        &self.rt
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Half-edges on the requested side.
    pub fn radii(&self, side: Side) -> &[f64] {
        match side {
            Side::Domain => &self.r,
            Side::Target => &self.rt,
        }
    }

    /// Prefix pack to depth `depth`.
    pub fn truncated(&self, depth: usize) -> Result<Self, CantorError> {
        if depth < 1 || depth > self.depth() {
            return Err(CantorError::Depth {
                depth,
                max: self.depth(),
            });
        }
        let cut = |v: &Vec<f64>| v[..=depth].to_vec();
        let mut p = Self::from_parts(
            self.n,
            cut(&self.a),
            cut(&self.b),
            cut(&self.alpha),
            cut(&self.beta),
        )?;
        p.standard = self.standard;
        Ok(p)
    }

    /// Residuals of `alpha_k r_k + beta_k = rt_k` and
    /// `alpha_k r_{k-1}/2 + beta_k = rt_{k-1}/2`.
    pub fn gluing_residuals(&self) -> Vec<GluingResidual> {
        (1..=self.depth())
            .map(|k| {
                let inner = self.alpha[k].mul_add(self.r[k], self.beta[k]);
                let outer = self.alpha[k].mul_add(0.5 * self.r[k - 1], self.beta[k]);
                GluingResidual {
                    k,
                    inner: ulps_apart(inner, self.rt[k]),
                    outer: ulps_apart(outer, 0.5 * self.rt[k - 1]),
                }
            })
            .collect()
    }

    pub fn max_gluing_residual(&self) -> f64 {
        self.gluing_residuals()
            .iter()
            .map(GluingResidual::max)
            .fold(0.0, f64::max)
    }

    /// Whether every annulus is nonempty: `r_k < r_{k-1}/2`.
    pub fn strictly_nested(&self) -> bool {
        (1..=self.depth()).all(|k| self.r[k] < 0.5 * self.r[k - 1] && self.rt[k] < 0.5 * self.rt[k - 1])
    }
}

/// `a_k = 1/(k+1)`, `k = 0..=depth`.
pub fn harmonic_sequence(depth: usize) -> Vec<f64> {
    (0..=depth).map(|k| 1.0 / (k as f64 + 1.0)).collect()
}

/// `a_k = ratio^k`, `k = 0..=depth`.
pub fn geometric_sequence(depth: usize, ratio: f64) -> Vec<f64> {
    (0..=depth).map(|k| ratio.powi(k as i32)).collect()
}
