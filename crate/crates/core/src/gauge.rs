//! Gauge functions `h` and their slowly varying factors `τ`.
//!
//! A [`GaugeSpec`] either carries a factor [`TauSpec`], in which case
//! `h(t) = t^n τ(t)`, or a [`RawGauge`] formula used for the "small set"
//! construction where any continuous non-decreasing `h` with `h(0) = 0`
//! is admissible. The sequence generators [`thm1_sequence`] and
//! [`thm2_sequence`] turn a gauge into the contraction sequence `a_k`.

use serde::{Deserialize, Serialize};
use std::f64::consts::E;
use thiserror::Error;

/// Points per decade of the coarse log-grid used by [`tau_root`].
pub const ROOT_SCAN_PER_DECADE: usize = 256;
/// Number of decades scanned below `t = 1` by [`tau_root`].
pub const ROOT_SCAN_DECADES: usize = 12;
/// Default safety factor for [`thm2_sequence`].
pub const DEFAULT_SAFETY: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaugeError {
    #[error("gauge argument must be finite and nonnegative, got {0}")]
    Argument(f64),
    #[error("gauge value overflowed at t = {0}")]
    Range(f64),
    #[error("no root of t^n tau(p t) = 1 in (0, 1] for p = {p}")]
    NoRoot { p: f64 },
    #[error("t^n tau(p t) >= 1 already at the smallest probe t = {t_min:e} (p = {p})")]
    HypothesisViolated { p: f64, t_min: f64 },
    #[error("root for k = {k} failed: {source}")]
    Sequence {
        k: usize,
        #[source]
        source: Box<GaugeError>,
    },
    #[error("bisection did not reach tolerance (residual {residual:e})")]
    Tolerance { residual: f64 },
    #[error("no admissible a_{k} above the binary64 range")]
    Infeasible { k: usize },
    #[error("invalid gauge specification: {0}")]
    Spec(String),
    #[error("gauge JSON: {0}")]
    Json(String),
}

/// Slowly varying factor `τ: (0, ∞) → [1, ∞)`.
///
/// All families are non-increasing. Values below one are clamped to one;
/// [`TauSpec::eval_unclamped`] exposes whether the clamp was active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TauSpec {
    /// `τ ≡ value`.
    Constant { value: f64 },
    /// `τ(t) = log(shift + 1/t)`.
    Log {
        #[serde(default = "default_log_shift")]
        shift: f64,
    },
    /// `τ(t) = log(shift + 1/t)^exponent`.
    LogPower {
        exponent: f64,
        #[serde(default = "default_log_shift")]
        shift: f64,
    },
    /// `τ(t) = (log∘…∘log)(shift + 1/t)^exponent` with `iterations` logs.
    IteratedLog {
        iterations: u32,
        #[serde(default = "one")]
        exponent: f64,
        #[serde(default)]
        shift: Option<f64>,
    },
    /// Pointwise product of other factors.
    Composed { factors: Vec<TauSpec> },
}

fn default_log_shift() -> f64 {
    E
}

fn one() -> f64 {
    1.0
}

/// Smallest shift for which `iterations` nested logs of `shift + 1/t` stay
/// at or above one: the tower `exp∘…∘exp(1)`.
pub fn minimal_iterated_shift(iterations: u32) -> f64 {
    (1..iterations).fold(E, |acc, _| acc.exp())
}

/// `log(shift + 1/t)` without forming `1/t`.
fn log_shifted_inverse(t: f64, shift: f64) -> f64 {
    (shift * t).ln_1p() - t.ln()
}

impl TauSpec {
    pub fn validate(&self) -> Result<(), GaugeError> {
        let bad = |msg: String| Err(GaugeError::Spec(msg));
        match *self {
            TauSpec::Constant { value } => {
                if !(value.is_finite() && value >= 1.0) {
                    return bad(format!("constant tau must be finite and >= 1, got {value}"));
                }
            }
            TauSpec::Log { shift } => {
                if !(shift.is_finite() && shift >= E) {
                    return bad(format!("shift must be >= e, got {shift}"));
                }
            }
            TauSpec::LogPower { exponent, shift } => {
                if !(exponent.is_finite() && exponent >= 0.0) {
                    return bad(format!("exponent must be >= 0, got {exponent}"));
                }
                if !(shift.is_finite() && shift >= E) {
                    return bad(format!("shift must be >= e, got {shift}"));
                }
            }
            TauSpec::IteratedLog {
                iterations,
                exponent,
                shift,
            } => {
                if !(1..=4).contains(&iterations) {
                    return bad(format!("iterations must be in 1..=4, got {iterations}"));
                }
                if !(exponent.is_finite() && exponent >= 0.0) {
                    return bad(format!("exponent must be >= 0, got {exponent}"));
                }
                if let Some(s) = shift {
                    if !(s.is_finite() && s >= E) {
                        return bad(format!("shift must be >= e, got {s}"));
                    }
                }
            }
            TauSpec::Composed { ref factors } => {
                if factors.is_empty() {
                    return bad("composed tau needs at least one factor".into());
                }
                for f in factors {
                    f.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Whether `τ(t) → ∞` as `t → 0+`.
    pub fn diverges_at_zero(&self) -> bool {
        match self {
            TauSpec::Constant { .. } => false,
            TauSpec::Log { .. } => true,
            TauSpec::LogPower { exponent, .. } | TauSpec::IteratedLog { exponent, .. } => {
                *exponent > 0.0
            }
            TauSpec::Composed { factors } => factors.iter().any(TauSpec::diverges_at_zero),
        }
    }

    /// Formula value before clamping, and whether the clamp at one applies.
    pub fn eval_unclamped(&self, t: f64) -> (f64, bool) {
        let raw = match *self {
            TauSpec::Constant { value } => value,
            TauSpec::Log { shift } => log_shifted_inverse(t, shift),
            TauSpec::LogPower { exponent, shift } => log_shifted_inverse(t, shift).powf(exponent),
            TauSpec::IteratedLog {
                iterations,
                exponent,
                shift,
            } => {
                let shift = shift.unwrap_or_else(|| minimal_iterated_shift(iterations));
                let mut v = log_shifted_inverse(t, shift);
                for _ in 1..iterations {
                    v = v.ln();
                }
                // nested logs can go negative for small shifts; the clamp handles it
                if v <= 0.0 {
                    0.0
                } else {
                    v.powf(exponent)
                }
            }
            TauSpec::Composed { ref factors } => factors.iter().map(|f| f.eval(t)).product(),
        };
        (raw, raw < 1.0)
    }

    /// `τ(t)` for `t > 0`, clamped below at one.
    pub fn eval(&self, t: f64) -> f64 {
        let (raw, clamped) = self.eval_unclamped(t);
        if clamped {
            1.0
        } else {
            raw
        }
    }
}

/// Direct gauge formulas for the small-set construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawGauge {
    /// `h(t) = t^alpha`.
    Power { alpha: f64 },
    /// `h(t) = t^alpha · log(e + 1/t)^exponent`.
    PowerLog { alpha: f64, exponent: f64 },
    /// `h(t) = exp(-1/t)`.
    ExpInv,
}

impl RawGauge {
    fn validate(&self) -> Result<(), GaugeError> {
        match *self {
            RawGauge::Power { alpha } | RawGauge::PowerLog { alpha, .. }
                if !(alpha.is_finite() && alpha > 0.0) =>
            {
                Err(GaugeError::Spec(format!("alpha must be > 0, got {alpha}")))
            }
            RawGauge::PowerLog { exponent, alpha } if !exponent.is_finite() || exponent > alpha => {
                Err(GaugeError::Spec(format!(
                    "power_log exponent must be finite and <= alpha for monotonicity, got {exponent}"
                )))
            }
            _ => Ok(()),
        }
    }

    fn eval_positive(&self, t: f64) -> f64 {
        match *self {
            RawGauge::Power { alpha } => t.powf(alpha),
            RawGauge::PowerLog { alpha, exponent } => {
                t.powf(alpha) * log_shifted_inverse(t, E).powf(exponent)
            }
            RawGauge::ExpInv => (-1.0 / t).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaugeRepr {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<TauSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raw: Option<RawGauge>,
}

/// A gauge function `h` on `[0, ∞)` in dimension `n`.
///
/// With a `tau` factor, `h(t) = t^n τ(t)`; with a `raw` formula, `h` is
/// that formula; with neither, `h(t) = t^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaugeRepr", into = "GaugeRepr")]
pub struct GaugeSpec {
    n: usize,
    tau: Option<TauSpec>,
    raw: Option<RawGauge>,
}

impl TryFrom<GaugeRepr> for GaugeSpec {
    type Error = GaugeError;

    fn try_from(r: GaugeRepr) -> Result<Self, GaugeError> {
        if !(2..=16).contains(&r.n) {
            return Err(GaugeError::Spec(format!("dimension must be in 2..=16, got {}", r.n)));
        }
        if r.tau.is_some() && r.raw.is_some() {
            return Err(GaugeError::Spec("give either tau or raw, not both".into()));
        }
        if let Some(tau) = &r.tau {
            tau.validate()?;
        }
        if let Some(raw) = &r.raw {
            raw.validate()?;
        }
        Ok(GaugeSpec {
            n: r.n,
            tau: r.tau,
            raw: r.raw,
        })
    }
}

impl From<GaugeSpec> for GaugeRepr {
    fn from(g: GaugeSpec) -> Self {
        GaugeRepr {
            n: g.n,
            tau: g.tau,
            raw: g.raw,
        }
    }
}

impl GaugeSpec {
    pub fn with_tau(n: usize, tau: TauSpec) -> Result<Self, GaugeError> {
        GaugeRepr {
            n,
            tau: Some(tau),
            raw: None,
        }
        .try_into()
    }

    pub fn with_raw(n: usize, raw: RawGauge) -> Result<Self, GaugeError> {
        GaugeRepr {
            n,
            tau: None,
            raw: Some(raw),
        }
        .try_into()
    }

    pub fn from_json(text: &str) -> Result<Self, GaugeError> {
        serde_json::from_str(text).map_err(|e| GaugeError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("gauge serializes")
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn tau(&self) -> Option<&TauSpec> {
        self.tau.as_ref()
    }

    pub fn raw(&self) -> Option<&RawGauge> {
        self.raw.as_ref()
    }

    /// `h(t)`; exactly zero at `t = 0`.
    pub fn eval(&self, t: f64) -> Result<f64, GaugeError> {
        eval_h(self, t)
    }
}

/// Evaluates the gauge at `t ≥ 0`.
pub fn eval_h(spec: &GaugeSpec, t: f64) -> Result<f64, GaugeError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(GaugeError::Argument(t));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let value = match (&spec.tau, &spec.raw) {
        (_, Some(raw)) => raw.eval_positive(t),
        (Some(tau), None) => t.powi(spec.n as i32) * tau.eval(t),
        (None, None) => t.powi(spec.n as i32),
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(GaugeError::Range(t))
    }
}

/// First crossing `t_p ∈ (0, 1]` of `g(t) = t^n τ(p t) − 1` from negative
/// to nonnegative.
///
/// A log-spaced scan over twelve decades locates the first grid cell where
/// `g` changes sign; bisection then refines that cell to full precision.
pub fn tau_root(tau: &TauSpec, p: f64, n: usize, tol: f64) -> Result<f64, GaugeError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(GaugeError::Spec(format!("p must lie in (0, 1], got {p}")));
    }
    if !(tol > 0.0) {
        return Err(GaugeError::Spec(format!("tolerance must be positive, got {tol}")));
    }
    let g = |t: f64| t.powi(n as i32) * tau.eval(p * t) - 1.0;

    let steps = ROOT_SCAN_PER_DECADE * ROOT_SCAN_DECADES;
    let t_at = |i: usize| 10f64.powf(-(ROOT_SCAN_DECADES as f64) * (1.0 - i as f64 / steps as f64));
    let t_min = t_at(0);
    if g(t_min) >= 0.0 {
        return Err(GaugeError::HypothesisViolated { p, t_min });
    }
    let mut lo = t_min;
    let mut hi = None;
    for i in 1..=steps {
        let t = if i == steps { 1.0 } else { t_at(i) };
        if g(t) >= 0.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi.ok_or(GaugeError::NoRoot { p })?;

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let residual = g(hi).abs();
    if residual > tol {
        return Err(GaugeError::Tolerance { residual });
    }
    Ok(hi)
}

/// Contraction sequence for a gauge with a factor: `a_0 = 1`,
/// `a_k = t_{2^{-k}}`.
pub fn thm1_sequence(tau: &TauSpec, n: usize, depth: usize) -> Result<Vec<f64>, GaugeError> {
    if depth < 1 {
        return Err(GaugeError::Spec("depth must be >= 1".into()));
    }
    let mut a = Vec::with_capacity(depth + 1);
    a.push(1.0);
    for k in 1..=depth {
        let p = 2f64.powi(-(k as i32));
        let t = tau_root(tau, p, n, 1e-12).map_err(|e| GaugeError::Sequence {
            k,
            source: Box::new(e),
        })?;
        a.push(t);
    }
    Ok(a)
}

/// `c_n = 2√n`, the Euclidean diameter of a cube of unit half-edge.
pub fn diameter_constant(n: usize) -> f64 {
    2.0 * (n as f64).sqrt()
}

/// Contraction sequence making the depth-`k` cover sums vanish:
/// `a_k ≤ a_{k-1}/2` and `h(c_n 2^{-k} a_k) ≤ safety · 2^{-2nk}`.
pub fn thm2_sequence(
    h: &GaugeSpec,
    depth: usize,
    safety: f64,
) -> Result<Vec<f64>, GaugeError> {
    if depth < 1 {
        return Err(GaugeError::Spec("depth must be >= 1".into()));
    }
    if !(safety > 0.0 && safety < 1.0) {
        return Err(GaugeError::Spec(format!("safety must be in (0, 1), got {safety}")));
    }
    let n = h.dimension();
    let cn = diameter_constant(n);
    let mut a = Vec::with_capacity(depth + 1);
    a.push(1.0);
    for k in 1..=depth {
        let target = safety * 2f64.powi(-2 * (n * k) as i32);
        if target == 0.0 {
            return Err(GaugeError::Infeasible { k });
        }
        let scale = cn * 2f64.powi(-(k as i32));
        let f = |a: f64| eval_h(h, scale * a);
        let cap = a[k - 1] * 0.5;
        if f(cap)? <= target {
            a.push(cap);
            continue;
        }
        // walk down by powers of two to a feasible point, then bisect in log scale
        let mut hi = cap;
        let mut lo = cap * 0.5;
        while f(lo)? > target {
            hi = lo;
            lo *= 0.5;
            if lo == 0.0 {
                return Err(GaugeError::Infeasible { k });
            }
        }
        let (mut llo, mut lhi) = (lo.log2(), hi.log2());
        for _ in 0..100 {
            let mid = 0.5 * (llo + lhi);
            if mid <= llo || mid >= lhi {
                break;
            }
            if f(mid.exp2())? <= target {
                llo = mid;
            } else {
                lhi = mid;
            }
        }
        let value = llo.exp2();
        if f(value)? > target {
            // exp2 of the bracket end rounded the wrong way
            let fallback = lo;
            if f(fallback)? > target {
                return Err(GaugeError::Tolerance {
                    residual: f(value)? - target,
                });
            }
            a.push(fallback);
        } else {
            a.push(value);
        }
    }
    Ok(a)
}
