//! Classical and grand Sobolev norms of `f_K` from exact shell integrals.
//!
//! Norms use the max-of-partials convention: on an annulus with `β ≥ 0`
//! the largest partial derivative is `α + β/s` at sup radius `s`, so
//! `|Df|^p` is radial there and each depth contributes `2^{nk}` copies of
//! one shell integral.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::shell::{shell_integral, Radial};
use super::AnalysisError;
use crate::cantor::SequencePack;
use crate::mapping::PonomarevMap;

pub const DEFAULT_EPS_COUNT: usize = 64;
pub const DEFAULT_EPS_LO: f64 = 1e-4;

/// Log-spaced grid `lo = ε_0 < … < ε_{count-1} = hi`, written `lo:hi:count`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsGrid {
    lo: f64,
    hi: f64,
    count: usize,
}

impl EpsGrid {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self, AnalysisError> {
        if !(lo > 0.0 && lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(AnalysisError::Argument(format!("need 0 < lo <= hi, got {lo}:{hi}")));
        }
        if count == 0 || (count == 1 && lo != hi) {
            return Err(AnalysisError::Argument(format!(
                "grid {lo}:{hi} needs count >= 2, got {count}"
            )));
        }
        if count > 1 << 20 {
            return Err(AnalysisError::Argument(format!("grid count {count} is too large")));
        }
        Ok(EpsGrid { lo, hi, count })
    }

    /// `1e-4 : n-1 : 64`.
    pub fn default_for(n: usize) -> Self {
        EpsGrid {
            lo: DEFAULT_EPS_LO,
            hi: n as f64 - 1.0,
            count: DEFAULT_EPS_COUNT,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let (l, h) = (self.lo.ln(), self.hi.ln());
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| match i {
                0 => self.lo,
                i if i == self.count - 1 => self.hi,
                i => (l + (h - l) * i as f64 / last).exp(),
            })
            .collect()
    }
}

impl FromStr for EpsGrid {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || AnalysisError::Argument(format!("expected lo:hi:count, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let count: usize = parts[2].parse().map_err(|_| bad())?;
        EpsGrid::new(lo, hi, count)
    }
}

impl fmt::Display for EpsGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

/// `‖Df_K‖_p^p` split by depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevReport {
    pub p: f64,
    /// `‖Df_K‖_p^p`, annuli plus the depth-`K` cores.
    pub value: f64,
    /// `annulus_terms[k-1] = 2^{nk} ∫_{annulus} |Df|^p` for `k = 1..=K`.
    pub annulus_terms: Vec<f64>,
    /// Cumulative annulus sums, `partial_sums[k-1] = Σ_{i ≤ k}`.
    pub partial_sums: Vec<f64>,
    /// `‖Df_k‖_p^p` for every truncation depth `k = 1..=K`.
    pub truncated_values: Vec<f64>,
    /// `truncated_values[k] - truncated_values[k-1]`, length `K - 1`.
    pub increments: Vec<f64>,
    pub core_term: f64,
}

/// Integral of `|Df|^p` over the depth-`k` cores when `f` is cut at `k`.
fn core_term(pack: &SequencePack, k: usize, p: f64) -> f64 {
    let n = pack.dimension() as i32;
    (2.0 * pack.a()[k]).powi(n) * (pack.rt()[k] / pack.r()[k]).powf(p)
}

fn annulus_term(pack: &SequencePack, k: usize, p: f64) -> Result<f64, AnalysisError> {
    let n = pack.dimension();
    let (alpha, beta) = (pack.alpha()[k], pack.beta()[k]);
    if beta < 0.0 {
        return Err(AnalysisError::Argument(format!(
            "β_{k} = {beta} < 0: |Df| is not radial on that annulus"
        )));
    }
    let phi = Radial::Affine { alpha, beta, power: p };
    let shell = shell_integral(&phi, pack.r()[k], 0.5 * pack.r()[k - 1], n)?;
    Ok(2f64.powi((n * k) as i32) * shell)
}

fn sobolev_pack(pack: &SequencePack, p: f64) -> Result<SobolevReport, AnalysisError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(AnalysisError::Argument(format!("exponent p = {p} must be positive")));
    }
    let depth = pack.depth();
    let annulus_terms = (1..=depth)
        .map(|k| annulus_term(pack, k, p))
        .collect::<Result<Vec<_>, _>>()?;
    let partial_sums: Vec<f64> = annulus_terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let truncated_values: Vec<f64> = partial_sums
        .iter()
        .enumerate()
        .map(|(i, s)| s + core_term(pack, i + 1, p))
        .collect();
    let increments = truncated_values.windows(2).map(|w| w[1] - w[0]).collect();
    let core = core_term(pack, depth, p);
    Ok(SobolevReport {
        p,
        value: partial_sums.last().copied().unwrap_or(0.0) + core,
        annulus_terms,
        partial_sums,
        truncated_values,
        increments,
        core_term: core,
    })
}

/// `∫_{(-1,1)^n} |Df_K|^p` with the per-depth breakdown.
///
/// For a depth-0 map the value is the volume `2^n`. Annuli with `β_k < 0`
/// are rejected.
pub fn sobolev_norm(map: &PonomarevMap, p: f64) -> Result<SobolevReport, AnalysisError> {
    sobolev_pack(map.pack(), p)
}

/// Constants `(A, B)` of the telescoping estimate
/// `ε ∫ |Df_K|^{n-ε} ≤ A (a_0^ε - a_K^ε) + B ε a_K^ε` for standard packs.
///
/// On each annulus `α = 1/2 ≤ β/s`, so `|Df| ≤ 2β/s`, and the shells then
/// integrate to `A ε^{-1} (a_{k-1}^ε - a_k^ε)` with `A = n 2^n`. The core
/// contributes `ε 2^n a_K^ε b_K^{n-ε} ≤ B ε a_K^ε` with `B = 2^n`.
pub fn telescoping_constants(n: usize) -> (f64, f64) {
    let two_n = 2f64.powi(n as i32);
    (n as f64 * two_n, two_n)
}

pub fn telescoping_bound(pack: &SequencePack, eps: f64) -> f64 {
    let (a_const, b_const) = telescoping_constants(pack.dimension());
    let tail = pack.a()[pack.depth()].powf(eps);
    a_const * (pack.a()[0].powf(eps) - tail) + b_const * eps * tail
}

/// Grand-norm sweep `ε ↦ ε ∫ |Df_K|^{n-ε}` over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub bounds: Vec<f64>,
    pub sup: f64,
    pub convention: String,
    pub depth: usize,
    /// `partial_sums[i][k-1]`: `ε_i` times the annulus sum through depth `k`.
    #[serde(skip)]
    pub partial_sums: Vec<Vec<f64>>,
    #[serde(skip)]
    pub bound_constants: (f64, f64),
}

impl NormReport {
    /// Index of the grid point attaining the sup.
    pub fn argmax(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }
}

pub fn grand_norm_report(map: &PonomarevMap, grid: &EpsGrid) -> Result<NormReport, AnalysisError> {
    let pack = map.pack();
    let n = pack.dimension();
    if !pack.is_standard() {
        return Err(AnalysisError::Argument("grand norm needs a standard pack".into()));
    }
    if grid.hi() > n as f64 - 1.0 {
        return Err(AnalysisError::Argument(format!(
            "ε grid must lie in (0, {}], got hi = {}",
            n - 1,
            grid.hi()
        )));
    }
    let eps = grid.points();
    let rows = eps
        .par_iter()
        .map(|&e| sobolev_pack(pack, n as f64 - e).map(|r| (e, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let values: Vec<f64> = rows.iter().map(|(e, r)| e * r.value).collect();
    let bounds: Vec<f64> = eps.iter().map(|&e| telescoping_bound(pack, e)).collect();
    let partial_sums = rows
        .iter()
        .map(|(e, r)| r.partial_sums.iter().map(|s| e * s).collect())
        .collect();
    let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(NormReport {
        eps,
        values,
        bounds,
        sup,
        convention: "max_partials".into(),
        depth: pack.depth(),
        partial_sums,
        bound_constants: telescoping_constants(n),
    })
}
