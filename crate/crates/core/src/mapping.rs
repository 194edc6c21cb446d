//! The homeomorphism `f` at finite depth.
//!
//! On the depth-`k` annulus of word `v` the map is the sup-norm radial map
//! `x ↦ z̃_v + (α_k s + β_k) (x - z_v)/s` with `s = ‖x - z_v‖_∞`; on a core
//! at the truncation depth `K` it is the homothety with ratio
//! `rt_K / r_K`. Outside the cores `f_K` agrees with the limit map, and on
//! the cores it is within `2√n · rt_K` of it.
//!
//! Evaluation descends the hierarchy once and writes the image as
//! `x + (z̃_v - z_v) + (scale - 1)(x - z_v)`, which keeps the boundary and
//! identity packs exact.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::{self, CantorError, Descent, Region, SequencePack, Side, VertexWord, GLUING_ULPS};
use crate::gauge::GaugeSpec;

/// Relative tolerance under which two coordinates tie for the sup norm.
pub const RIDGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error(transparent)]
    Cantor(#[from] CantorError),
    #[error("gluing residual {residual} ulps at k = {k} exceeds {GLUING_ULPS}")]
    Gluing { k: usize, residual: f64 },
    #[error("point {0:?} lies on the sup-norm ridge set")]
    RidgeSet(Vec<f64>),
}

/// Which construction produced a map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Root sequence of a gauge with a slowly varying factor.
    PositiveMeasure { gauge: GaugeSpec },
    /// Sequence making the cover sums vanish.
    NullMeasure { gauge: GaugeSpec, safety: f64 },
    Custom { label: String },
}

/// Finite-depth Ponomarev map. Immutable after [`PonomarevMap::build`].
#[derive(Debug, Clone)]
pub struct PonomarevMap {
    pack: SequencePack,
    provenance: Provenance,
    truncation_error: f64,
}

/// Evaluation with its location metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: Vec<f64>,
    pub word: VertexWord,
    pub region: Region,
}

impl Evaluation {
    pub fn depth(&self) -> usize {
        self.word.depth()
    }
}

/// Pointwise derivative with its location metadata.
#[derive(Debug, Clone)]
pub struct Derivative {
    pub matrix: DMatrix<f64>,
    pub depth: usize,
    pub region: Region,
    /// Coordinate attaining the sup norm (annuli only).
    pub active: Option<usize>,
}

impl Derivative {
    /// Largest absolute partial derivative `max_{i,l} |∂_l f_i|`.
    pub fn max_partial(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Certified sup distance between `f_K` and the limit map.
pub fn truncation_bound(pack: &SequencePack) -> f64 {
    let n = pack.dimension() as f64;
    2.0 * n.sqrt() * pack.rt()[pack.depth()]
}

impl PonomarevMap {
    pub fn build(pack: SequencePack) -> Result<Self, MapError> {
        Self::build_with(pack, Provenance::Custom { label: "custom".into() })
    }

    pub fn build_with(pack: SequencePack, provenance: Provenance) -> Result<Self, MapError> {
        for res in pack.gluing_residuals() {
            if res.max() > GLUING_ULPS {
                return Err(MapError::Gluing {
                    k: res.k,
                    residual: res.max(),
                });
            }
        }
        let truncation_error = truncation_bound(&pack);
        Ok(PonomarevMap {
            pack,
            provenance,
            truncation_error,
        })
    }

    pub fn pack(&self) -> &SequencePack {
        &self.pack
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dimension(&self) -> usize {
        self.pack.dimension()
    }

    pub fn depth(&self) -> usize {
        self.pack.depth()
    }

    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    /// Radial scale `(α_k s + β_k)/s` of the depth-`k` annulus.
    fn annulus_scale(&self, k: usize, s: f64) -> f64 {
        self.pack.alpha()[k].mul_add(s, self.pack.beta()[k]) / s
    }

    /// Scale of the inverse radial map on the target annulus at sup radius `s`.
    fn inverse_annulus_scale(&self, k: usize, s: f64) -> f64 {
        ((s - self.pack.beta()[k]) / self.pack.alpha()[k]) / s
    }

    fn core_scale(&self) -> f64 {
        let k = self.depth();
        self.pack.rt()[k] / self.pack.r()[k]
    }

    /// Centre displacement `Σ (to_{i-1} - from_{i-1})/2 · v_i`.
    fn center_shift(&self, word: &VertexWord, from: Side) -> Vec<f64> {
        let (src, dst) = match from {
            Side::Domain => (self.pack.r(), self.pack.rt()),
            Side::Target => (self.pack.rt(), self.pack.r()),
        };
        let mut d = vec![0.0; word.dimension()];
        for level in 1..=word.depth() {
            let step = 0.5 * (dst[level - 1] - src[level - 1]);
            if step != 0.0 {
                for (i, di) in d.iter_mut().enumerate() {
                    *di += step * word.sign(level, i);
                }
            }
        }
        d
    }

    fn assemble(x: &[f64], shift: &[f64], local: &[f64], scale: f64) -> Vec<f64> {
        let extra = scale - 1.0;
        x.iter()
            .zip(shift)
            .zip(local)
            .map(|((&xi, &di), &yi)| xi + di + extra * yi)
            .collect()
    }

    fn descend(&self, x: &[f64], side: Side) -> Result<Descent, MapError> {
        cantor::check_point(x, self.dimension())?;
        Ok(cantor::descend(x, self.pack.radii(side), self.depth()))
    }

    /// `f_K(x)` with its location.
    pub fn eval_traced(&self, x: &[f64]) -> Result<Evaluation, MapError> {
        let d = self.descend(x, Side::Domain)?;
        let scale = match d.region {
            Region::Annulus => self.annulus_scale(d.word.depth(), d.radius),
            Region::Core => self.core_scale(),
        };
        let shift = self.center_shift(&d.word, Side::Domain);
        Ok(Evaluation {
            value: Self::assemble(x, &shift, &d.local, scale),
            word: d.word,
            region: d.region,
        })
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, MapError> {
        Ok(self.eval_traced(x)?.value)
    }

    /// `f_K^{-1}(y)` with its location in the target hierarchy.
    pub fn eval_inverse_traced(&self, y: &[f64]) -> Result<Evaluation, MapError> {
        let d = self.descend(y, Side::Target)?;
        let scale = match d.region {
            Region::Annulus => self.inverse_annulus_scale(d.word.depth(), d.radius),
            Region::Core => 1.0 / self.core_scale(),
        };
        let shift = self.center_shift(&d.word, Side::Target);
        Ok(Evaluation {
            value: Self::assemble(y, &shift, &d.local, scale),
            word: d.word,
            region: d.region,
        })
    }

    pub fn eval_inverse(&self, y: &[f64]) -> Result<Vec<f64>, MapError> {
        Ok(self.eval_inverse_traced(y)?.value)
    }

    /// Applies the annulus formula of `word` to `x` regardless of where `x`
    /// lies. Used to compare the two sides of a face.
    pub fn eval_with_annulus_of(&self, word: &VertexWord, x: &[f64]) -> Result<Vec<f64>, MapError> {
        let k = word.depth();
        if k == 0 || k > self.depth() {
            return Err(CantorError::Depth {
                depth: k,
                max: self.depth(),
            }
            .into());
        }
        let z = cantor::center(word, &self.pack, Side::Domain)?;
        let local: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a - b).collect();
        let s = cantor::sup_norm(&local);
        let shift = self.center_shift(word, Side::Domain);
        Ok(Self::assemble(x, &shift, &local, self.annulus_scale(k, s)))
    }

    /// Derivative matrix `Df_K(x)`; row `i`, column `l` holds `∂_l f_i`.
    pub fn derivative(&self, x: &[f64]) -> Result<Derivative, MapError> {
        let d = self.descend(x, Side::Domain)?;
        let n = self.dimension();
        let depth = d.word.depth();
        match d.region {
            Region::Core => Ok(Derivative {
                matrix: DMatrix::identity(n, n) * self.core_scale(),
                depth,
                region: Region::Core,
                active: None,
            }),
            Region::Annulus => {
                let m = d.radius;
                let j = active_coordinate(&d.local, m).ok_or_else(|| MapError::RidgeSet(x.to_vec()))?;
                let alpha = self.pack.alpha()[depth];
                let beta = self.pack.beta()[depth];
                let sign_j = d.local[j].signum();
                let matrix = DMatrix::from_fn(n, n, |i, l| {
                    let delta = if i == l { 1.0 } else { 0.0 };
                    let mut v = alpha * delta + beta * delta / m;
                    if l == j {
                        v -= beta * d.local[i] * sign_j / (m * m);
                    }
                    v
                });
                Ok(Derivative {
                    matrix,
                    depth,
                    region: Region::Annulus,
                    active: Some(j),
                })
            }
        }
    }

    /// `J f_K(x)`: `α_k (α_k + β_k/s)^{n-1}` on annuli, `(b_K/a_K)^n` on cores.
    pub fn jacobian_det(&self, x: &[f64]) -> Result<f64, MapError> {
        let d = self.descend(x, Side::Domain)?;
        if d.region == Region::Annulus && active_coordinate(&d.local, d.radius).is_none() {
            return Err(MapError::RidgeSet(x.to_vec()));
        }
        Ok(self.det_of(&d))
    }

    /// [`PonomarevMap::jacobian_det`] without the ridge check; the closed
    /// form extends continuously across the ridge.
    pub fn jacobian_det_unchecked(&self, x: &[f64]) -> Result<f64, MapError> {
        let d = self.descend(x, Side::Domain)?;
        Ok(self.det_of(&d))
    }

    fn det_of(&self, d: &Descent) -> f64 {
        let n = self.dimension() as i32;
        match d.region {
            Region::Core => self.core_scale().powi(n),
            Region::Annulus => {
                let k = d.word.depth();
                let alpha = self.pack.alpha()[k];
                alpha * (alpha + self.pack.beta()[k] / d.radius).powi(n - 1)
            }
        }
    }
}

/// Index of the unique coordinate attaining the sup norm, or `None` on the
/// ridge.
fn active_coordinate(local: &[f64], m: f64) -> Option<usize> {
    let j = local
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(j, _)| j)?;
    let threshold = m * (1.0 - RIDGE_TOLERANCE);
    let ties = local.iter().filter(|v| v.abs() >= threshold).count();
    (ties == 1).then_some(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{center, cubes, harmonic_sequence, locate, Location};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 8.0 * f64::EPSILON;

    fn harmonic(n: usize, depth: usize) -> PonomarevMap {
        PonomarevMap::build(SequencePack::standard(n, harmonic_sequence(depth)).unwrap()).unwrap()
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn boundary_and_origin_are_fixed() {
        let f = harmonic(2, 20);
        assert_eq!(f.eval(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        for x in [[1.0, 0.123], [-0.77, 1.0], [-1.0, -1.0], [1e-20, -1.0]] {
            assert_eq!(f.eval(&x).unwrap(), x.to_vec());
            assert_eq!(f.eval_inverse(&x).unwrap(), x.to_vec());
        }
    }

    #[test]
    fn centers_map_to_target_centers() {
        let f = harmonic(2, 12);
        for j in 1..=8 {
            for w in VertexWord::all(2, j).step_by(37) {
                let z = center(&w, f.pack(), Side::Domain).unwrap();
                let zt = center(&w, f.pack(), Side::Target).unwrap();
                assert!(dist(&f.eval(&z).unwrap(), &zt) <= TOL);
                assert!(dist(&f.eval_inverse(&zt).unwrap(), &z) <= TOL);
            }
        }
    }

    #[test]
    fn inner_faces_land_on_target_faces() {
        let f = harmonic(2, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..=10 {
            for _ in 0..50 {
                let w = VertexWord::from_levels(2, (0..k).map(|_| rng.gen_range(0..4)).collect());
                let c = cubes(&w, f.pack(), Side::Domain).unwrap();
                let ct = cubes(&w, f.pack(), Side::Target).unwrap();
                let t = rng.gen_range(-1.0..1.0);
                let x = [c.center[0] + c.inner_half_edge, c.center[1] + t * c.inner_half_edge];
                let y = f.eval_with_annulus_of(&w, &x).unwrap();
                let s = dist(&y, &ct.center);
                assert!((s - ct.inner_half_edge).abs() <= TOL, "k={k}");
            }
        }
    }

    #[test]
    fn identity_pack_is_identity() {
        let f = PonomarevMap::build(SequencePack::identity(2, harmonic_sequence(10)).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            assert!(dist(&f.eval(&x).unwrap(), &x) <= TOL);
            if let Ok(det) = f.jacobian_det(&x) {
                assert!((det - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn derivative_hand_example() {
        // α = 1/2, β = 1/4, s = 1/2, x - z = (1/2, 1/8) on the first annulus
        let f = harmonic(2, 5);
        let x = [1.0, 0.625];
        let d = f.derivative(&x).unwrap();
        assert_eq!(d.depth, 1);
        assert_eq!(d.active, Some(0));
        let want = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, -0.125, 1.0]);
        assert!((d.matrix.clone() - want).abs().max() < 1e-15);
        assert!((d.matrix.determinant() - 0.5).abs() < 1e-15);
        assert!((f.jacobian_det(&x).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn core_derivative_is_scaled_identity() {
        for k in 1..=6 {
            let f = harmonic(3, k);
            let z = center(&VertexWord::from_levels(3, vec![5; k]), f.pack(), Side::Domain).unwrap();
            let d = f.derivative(&z).unwrap();
            assert_eq!(d.region, Region::Core);
            let ratio = f.pack().b()[k] / f.pack().a()[k];
            assert!((d.max_partial() - ratio).abs() < 1e-12 * ratio);
            assert!((f.jacobian_det(&z).unwrap() - ratio.powi(3)).abs() < 1e-12 * ratio.powi(3));
        }
    }

    #[test]
    fn ridge_points_are_rejected() {
        let f = harmonic(2, 5);
        // x - z = (0.4, 0.4) on the first annulus diagonal
        assert!(matches!(f.derivative(&[0.9, 0.9]), Err(MapError::RidgeSet(_))));
        assert!(matches!(f.jacobian_det(&[0.9, 0.9]), Err(MapError::RidgeSet(_))));
        assert!(f.jacobian_det_unchecked(&[0.9, 0.9]).unwrap() > 0.0);
    }

    #[test]
    fn finite_difference_jacobian() {
        let f = harmonic(2, 20);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 200 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let Ok(d) = f.derivative(&x) else { continue };
            if d.region != Region::Annulus {
                continue;
            }
            let loc = locate(&x, f.pack(), 20).unwrap();
            let c = cubes(loc.word(), f.pack(), Side::Domain).unwrap();
            let off: Vec<f64> = x.iter().zip(&c.center).map(|(a, b)| a - b).collect();
            let m = cantor::sup_norm(&off);
            let h = 1e-3 * m;
            // stay clear of faces and ridge so the stencil sees one formula
            let gap = (m - c.inner_half_edge).min(c.outer_half_edge - m);
            let ridge = m - off.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
            if gap < 3.0 * h || ridge < 3.0 * h {
                continue;
            }
            // five-point stencil: truncation O((h/m)^4), rounding O(ulp/(h β/m))
            let mut fd = DMatrix::zeros(2, 2);
            for l in 0..2 {
                let at = |t: f64| {
                    let mut y = x;
                    y[l] += t;
                    f.eval(&y).unwrap()
                };
                let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
                for i in 0..2 {
                    fd[(i, l)] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h);
                }
            }
            let rel = (fd.clone() - &d.matrix).abs().max() / d.max_partial();
            assert!(rel < 1e-6, "x={x:?} rel={rel}");
            checked += 1;
        }
    }

    #[test]
    fn build_rejects_broken_gluing() {
        let p = SequencePack::standard(2, harmonic_sequence(5)).unwrap();
        let mut beta = p.beta().to_vec();
        beta[1] += 1e-3;
        let t = SequencePack::from_parts(2, p.a().to_vec(), p.b().to_vec(), p.alpha().to_vec(), beta).unwrap();
        assert!(matches!(PonomarevMap::build(t), Err(MapError::Gluing { k: 1, .. })));
    }

    #[test]
    fn truncation_error_is_recomputed() {
        let f = harmonic(2, 20);
        let want = 2.0 * 2f64.sqrt() * 2f64.powi(-20) * f.pack().b()[20];
        assert!((f.truncation_error() - want).abs() <= 2.0 * f64::EPSILON * want);
    }

    #[test]
    fn locations_agree_between_hierarchies() {
        let f = harmonic(2, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let e = f.eval_traced(&x).unwrap();
            let back = cantor::locate_on(&e.value, f.pack(), 10, Side::Target).unwrap();
            match (&back, e.region) {
                (Location::Annulus { word, .. }, Region::Annulus) | (Location::Core { word }, Region::Core) => {
                    assert_eq!(word, &e.word)
                }
                _ => panic!("region changed for {x:?}"),
            }
        }
    }
}
