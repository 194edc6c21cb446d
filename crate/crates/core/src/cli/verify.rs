//! The verification suite behind `ponomarev verify`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::commands::{sequence_table, SequenceRow};
use super::config::{Resolved, RunConfig, Theorem};
use crate::analysis::{grand_norm_report, hausdorff_upper_sum, lebesgue_level, pushforward_check};
use crate::cantor::{self, cubes, ulp, Region, SequencePack, Side, VertexWord, GLUING_ULPS};
use crate::mapping::PonomarevMap;

/// Ulp budget for boundary, centre and face comparisons.
pub const MAP_ULPS: f64 = 8.0;
/// Relative tolerance of the finite-difference Jacobian check.
pub const FD_TOLERANCE: f64 = 1e-6;
/// Ratio bound for root-sequence cover sums.
pub const THM1_RATIO_BOUND: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, observed: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            observed,
            bound,
            passed: observed <= bound,
        }
    }

    fn at_least(name: &str, observed: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            observed,
            bound,
            passed: observed >= bound,
        }
    }

    fn flag(name: &str, ok: bool) -> Self {
        Check {
            name: name.into(),
            observed: if ok { 1.0 } else { 0.0 },
            bound: 1.0,
            passed: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Difference of two vectors in ulps of their common scale `max(‖a‖_∞, 1)`.
pub fn scaled_ulps(a: &[f64], b: &[f64]) -> f64 {
    let scale = cantor::sup_norm(a).max(1.0);
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / ulp(scale)
}

/// Uniform point on the surface of the cube `Q(center, r)`.
fn face_point(rng: &mut ChaCha8Rng, center: &[f64], r: f64) -> Vec<f64> {
    let n = center.len();
    let j = rng.gen_range(0..n);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    center
        .iter()
        .enumerate()
        .map(|(i, &c)| if i == j { c + sign * r } else { c + r * rng.gen_range(-1.0..1.0) })
        .collect()
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

fn random_word(rng: &mut ChaCha8Rng, n: usize, k: usize) -> VertexWord {
    let mut w = VertexWord::empty(n);
    for _ in 0..k {
        w.push(rng.gen_range(0..1u64 << n));
    }
    w
}

fn max_of(values: impl ParallelIterator<Item = f64>) -> f64 {
    values.reduce(|| 0.0, f64::max)
}

/// Largest deviation of `f` from the identity on `count` boundary points,
/// in ulps.
pub fn boundary_identity(map: &PonomarevMap, count: usize, rng: &mut ChaCha8Rng) -> f64 {
    let n = map.dimension();
    let pts: Vec<Vec<f64>> = (0..count).map(|_| face_point(rng, &vec![0.0; n], 1.0)).collect();
    max_of(pts.par_iter().map(|x| match map.eval(x) {
        Ok(y) => scaled_ulps(&y, x),
        Err(_) => f64::INFINITY,
    }))
}

/// Local Lipschitz scale `max(1, rt_k / r_k)` of the depth-`k` annulus. An
/// input rounding of one ulp moves the image by up to this many ulps.
pub fn condition(pack: &SequencePack, k: usize) -> f64 {
    (pack.rt()[k] / pack.r()[k]).max(1.0)
}

/// Largest distance between `f(z_v)` and `z̃_v` over depths
/// `1..=max_depth`, in ulps divided by the depth-`k` [`condition`].
pub fn center_invariance(map: &PonomarevMap, max_depth: usize, per_depth: usize, rng: &mut ChaCha8Rng) -> f64 {
    let n = map.dimension();
    let mut worst = 0.0f64;
    for k in 1..=max_depth.min(map.depth()) {
        for _ in 0..per_depth {
            let w = random_word(rng, n, k);
            let z = cantor::center(&w, map.pack(), Side::Domain).expect("depth checked");
            let zt = cantor::center(&w, map.pack(), Side::Target).expect("depth checked");
            let cond = condition(map.pack(), k.min(map.depth()));
            worst = worst.max(map.eval(&z).map_or(f64::INFINITY, |y| scaled_ulps(&y, &zt) / cond));
        }
    }
    worst
}

/// Largest mismatch (ulps) between the annulus formulas of a depth-`k`
/// word and of its child on the inner face `∂Q_v`, `k = 1..=max_depth`.
/// With `conditioned`, each mismatch is divided by the depth-`k`
/// [`condition`].
pub fn face_continuity(
    map: &PonomarevMap,
    max_depth: usize,
    per_depth: usize,
    conditioned: bool,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let n = map.dimension();
    let mut worst = 0.0f64;
    for k in 1..=max_depth.min(map.depth() - 1) {
        for _ in 0..per_depth {
            let w = random_word(rng, n, k);
            let c = cubes(&w, map.pack(), Side::Domain).expect("depth checked");
            let x = face_point(rng, &c.center, c.inner_half_edge);
            let mask = x
                .iter()
                .zip(&c.center)
                .enumerate()
                .fold(0u64, |m, (i, (xi, zi))| if xi > zi { m | 1 << i } else { m });
            let outer = map.eval_with_annulus_of(&w, &x);
            let inner = map.eval_with_annulus_of(&w.child(mask), &x);
            let cond = if conditioned { condition(map.pack(), k) } else { 1.0 };
            worst = worst.max(match (outer, inner) {
                (Ok(a), Ok(b)) => scaled_ulps(&a, &b) / cond,
                _ => f64::INFINITY,
            });
        }
    }
    worst
}

/// Largest `‖f^{-1}(f(x)) - x‖_∞` over `count` uniform points.
pub fn roundtrip_error(map: &PonomarevMap, count: usize, rng: &mut ChaCha8Rng) -> f64 {
    let pts = random_points(rng, map.dimension(), count);
    max_of(pts.par_iter().map(|x| {
        match map.eval(x).and_then(|y| map.eval_inverse(&y)) {
            Ok(back) => back.iter().zip(x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
            Err(_) => f64::INFINITY,
        }
    }))
}

/// Smallest `J f` over `count` uniform points.
pub fn min_jacobian(map: &PonomarevMap, count: usize, rng: &mut ChaCha8Rng) -> f64 {
    let pts = random_points(rng, map.dimension(), count);
    pts.par_iter()
        .map(|x| map.jacobian_det_unchecked(x).unwrap_or(f64::NEG_INFINITY))
        .reduce(|| f64::INFINITY, f64::min)
}

/// Largest `|J f - 1|` over `count` uniform points.
pub fn unit_jacobian_error(map: &PonomarevMap, count: usize, rng: &mut ChaCha8Rng) -> f64 {
    let pts = random_points(rng, map.dimension(), count);
    max_of(pts.par_iter().map(|x| {
        map.jacobian_det_unchecked(x).map_or(f64::INFINITY, |d| (d - 1.0).abs())
    }))
}

/// Five-point central-difference derivative of `f` at `x` with step `h`.
pub fn fd_derivative(map: &PonomarevMap, x: &[f64], h: f64) -> Option<DMatrix<f64>> {
    let n = x.len();
    let mut m = DMatrix::zeros(n, n);
    for l in 0..n {
        let at = |t: f64| {
            let mut y = x.to_vec();
            y[l] += t;
            map.eval(&y).ok()
        };
        let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
        for i in 0..n {
            m[(i, l)] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h);
        }
    }
    Some(m)
}

/// Relative error of the closed-form determinant against a finite-difference
/// determinant at `x`, or `None` when `x` is too close to a face, the ridge
/// or a core for a clean stencil.
pub fn fd_det_error(map: &PonomarevMap, x: &[f64]) -> Option<f64> {
    let e = map.eval_traced(x).ok()?;
    if e.region != Region::Annulus {
        return None;
    }
    let c = cubes(&e.word, map.pack(), Side::Domain).ok()?;
    let off: Vec<f64> = x.iter().zip(&c.center).map(|(a, b)| a - b).collect();
    let m = cantor::sup_norm(&off);
    let h = 1e-3 * m;
    let gap = (m - c.inner_half_edge).min(c.outer_half_edge - m);
    let mut abs: Vec<f64> = off.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let ridge = if abs.len() > 1 { m - abs[abs.len() - 2] } else { m };
    if gap < 3.0 * h || ridge < 3.0 * h {
        return None;
    }
    let fd = fd_derivative(map, x, h)?;
    let det = map.jacobian_det(x).ok()?;
    Some((fd.determinant() - det).abs() / det.abs())
}

/// Largest finite-difference determinant error over the first `count`
/// admissible uniform points, with the number checked.
pub fn fd_jacobian(map: &PonomarevMap, count: usize, rng: &mut ChaCha8Rng) -> (f64, usize) {
    let n = map.dimension();
    let mut errs = Vec::with_capacity(count);
    let mut tries = 0;
    while errs.len() < count && tries < 50 * count.max(1) {
        let batch = random_points(rng, n, count);
        tries += count;
        let got: Vec<Option<f64>> = batch.par_iter().map(|x| fd_det_error(map, x)).collect();
        errs.extend(got.into_iter().flatten().take(count - errs.len()));
    }
    (errs.iter().copied().fold(0.0, f64::max), errs.len())
}

/// Whether the depth-`k` inner cubes are pairwise disjoint (sup-norm centre
/// distance at least twice the half-edge).
pub fn inner_cubes_disjoint(pack: &SequencePack, k: usize, side: Side) -> bool {
    let n = pack.dimension();
    let half = pack.radii(side)[k];
    let centers: Vec<Vec<f64>> = VertexWord::all(n, k)
        .map(|w| cantor::center(&w, pack, side).expect("depth checked"))
        .collect();
    centers.par_iter().enumerate().all(|(i, a)| {
        centers[i + 1..].iter().all(|b| {
            let d = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            d >= 2.0 * half
        })
    })
}

fn sequence_checks(rows: &[SequenceRow], theorem: Theorem) -> Vec<Check> {
    let name = match theorem {
        Theorem::Thm1 => "root_identity",
        Theorem::Thm2 => "null_sequence_inequality",
        Theorem::Custom => "sequence_monotone",
    };
    let failures = rows.iter().filter(|r| !r.check).count();
    vec![Check::at_most(name, failures as f64, 0.0)]
}

fn upper_sum_checks(cfg: &RunConfig, res: &Resolved) -> Vec<Check> {
    let pack = &res.pack;
    let n = pack.dimension() as i32;
    let sums: Vec<f64> = (0..=pack.depth())
        .map(|k| hausdorff_upper_sum(&res.gauge, pack, k).map_or(f64::NAN, |r| r.total))
        .collect();
    match cfg.theorem {
        Theorem::Thm2 => {
            let worst = (1..sums.len())
                .map(|k| sums[k] / (cfg.safety * 2f64.powi(-n * k as i32)))
                .fold(0.0, f64::max);
            let decreasing = sums[1..].windows(2).all(|w| w[1] < w[0]);
            vec![
                Check::at_most("upper_sum_vs_safety_bound", worst, 1.0),
                Check::flag("upper_sum_decreasing", decreasing),
            ]
        }
        Theorem::Thm1 => {
            let top = pack.depth().min(30);
            let spread = sums[1..=top]
                .iter()
                .map(|s| s.max(1.0 / s))
                .fold(0.0, f64::max);
            vec![Check::at_most("upper_sum_ratio_to_one", spread, THM1_RATIO_BOUND)]
        }
        Theorem::Custom => Vec::new(),
    }
}

/// Runs every check at the configured scale.
pub fn run_suite(cfg: &RunConfig, res: &Resolved) -> VerifyReport {
    let pack = &res.pack;
    let n = pack.dimension();
    let mut rng: ChaCha8Rng = rand::SeedableRng::seed_from_u64(cfg.seed);
    let mut checks = vec![Check::at_most("gluing_ulps", pack.max_gluing_residual(), GLUING_ULPS)];

    match sequence_table(cfg, res) {
        Ok(rows) => checks.extend(sequence_checks(&rows, cfg.theorem)),
        Err(_) => checks.push(Check::flag("sequence_table", false)),
    }

    let map = PonomarevMap::build_with(pack.clone(), res.provenance.clone());
    let Ok(map) = map else {
        checks.push(Check::flag("map_build", false));
        return VerifyReport {
            passed: false,
            checks,
        };
    };
    let samples = cfg.samples.max(1);
    let depth = map.depth();

    checks.push(Check::at_most(
        "boundary_identity_ulps",
        boundary_identity(&map, samples.min(1000), &mut rng),
        MAP_ULPS,
    ));
    checks.push(Check::at_most(
        "center_invariance_cond_ulps",
        center_invariance(&map, depth.min(12), 16, &mut rng),
        MAP_ULPS,
    ));
    if depth > 1 {
        checks.push(Check::at_most(
            "face_continuity_cond_ulps",
            face_continuity(&map, (depth - 1).min(12), 64, true, &mut rng),
            MAP_ULPS,
        ));
    }
    checks.push(Check::at_most(
        "inverse_roundtrip",
        roundtrip_error(&map, samples, &mut rng),
        2.0 * map.truncation_error(),
    ));
    checks.push(Check::at_least("jacobian_min", min_jacobian(&map, samples, &mut rng), f64::MIN_POSITIVE));
    let (fd, checked) = fd_jacobian(&map, (samples / 10).clamp(1, 1000), &mut rng);
    checks.push(Check {
        name: "jacobian_finite_difference".into(),
        observed: fd,
        bound: FD_TOLERANCE,
        passed: fd <= FD_TOLERANCE && checked > 0,
    });
    if pack.a() == pack.b() {
        checks.push(Check::at_most(
            "identity_jacobian",
            unit_jacobian_error(&map, samples.min(1000), &mut rng),
            1e-12,
        ));
    }

    let disjoint_depth = depth.min(10 / n).max(1);
    checks.push(Check::flag(
        "inner_cubes_disjoint",
        [Side::Domain, Side::Target]
            .iter()
            .all(|&s| (1..=disjoint_depth).all(|k| inner_cubes_disjoint(pack, k, s))),
    ));

    let levels: Vec<f64> = (0..=depth)
        .map(|k| lebesgue_level(pack, k, Side::Domain).unwrap_or(f64::NAN))
        .collect();
    checks.push(Check::flag("lebesgue_domain_nonincreasing", levels.windows(2).all(|w| w[1] <= w[0])));
    if pack.is_standard() {
        // b_k = (1 + a_k)/2 keeps every level above 2^n (1/2)^n = 1
        checks.push(Check::at_least(
            "lebesgue_target_level",
            lebesgue_level(pack, depth, Side::Target).unwrap_or(f64::NAN),
            1.0,
        ));
    }

    checks.extend(upper_sum_checks(cfg, res));

    let top = depth.min(12 / n);
    let exact = (0..=top).all(|k| {
        (0..=k.min(3)).all(|j| pushforward_check(pack, &res.gauge, k, j).is_ok_and(|r| r.all_exact))
    });
    checks.push(Check::flag("pushforward_exact", exact));

    if pack.is_standard() {
        let worst = cfg
            .grid()
            .ok()
            .and_then(|g| grand_norm_report(&map, &g).ok())
            .map(|r| r.values.iter().zip(&r.bounds).map(|(v, b)| v / b).fold(0.0, f64::max));
        checks.push(Check::at_most("grand_norm_vs_bound", worst.unwrap_or(f64::INFINITY), 1.0));
    }

    VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
