use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ponomarev::analysis::{
    hausdorff_upper_sum, shell_integral, shell_integral_quadrature, sobolev_norm, Radial,
};
use ponomarev::cantor::{
    code_z, cubes, dyadic_preimage, dyadic_preimage_exact, harmonic_sequence, locate, Location, SequencePack, Side,
    VertexWord,
};
use ponomarev::cli::verify::scaled_ulps;
use ponomarev::gauge::{eval_h, tau_root, thm1_sequence, thm2_sequence, GaugeSpec, RawGauge, TauSpec};
use ponomarev::mapping::{truncation_bound, PonomarevMap};

fn tau_family() -> impl Strategy<Value = TauSpec> {
    prop_oneof![
        (1.0f64..4.0).prop_map(|value| TauSpec::Constant { value }),
        (std::f64::consts::E..10.0).prop_map(|shift| TauSpec::Log { shift }),
        (0.25f64..3.0).prop_map(|exponent| TauSpec::LogPower {
            exponent,
            shift: std::f64::consts::E
        }),
        (1u32..=3, 0.25f64..3.0).prop_map(|(iterations, exponent)| TauSpec::IteratedLog {
            iterations,
            exponent,
            shift: None
        }),
    ]
}

/// Non-increasing contraction sequence with `a_0 = 1` built from ratios.
fn contraction(depth: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.3f64..=1.0, depth).prop_map(|ratios| {
        let mut a = vec![1.0];
        for r in ratios {
            let last = *a.last().unwrap();
            a.push(last * r);
        }
        a
    })
}

fn random_word(n: usize, depth: usize, rng: &mut ChaCha8Rng) -> VertexWord {
    let mut w = VertexWord::empty(n);
    for _ in 0..depth {
        w.push(rng.gen_range(0..1u64 << n));
    }
    w
}

fn sup_dist(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tau_is_at_least_one_and_non_increasing(tau in tau_family()) {
        let mut prev = f64::INFINITY;
        for j in 0..=120 {
            let t = 10f64.powf(-12.0 + 0.1 * j as f64);
            let v = tau.eval(t);
            prop_assert!(v >= 1.0);
            prop_assert!(v <= prev);
            prev = v;
        }
        if tau.diverges_at_zero() {
            for j in 1..12 {
                prop_assert!(tau.eval(10f64.powi(-(j + 1))) > tau.eval(10f64.powi(-j)));
            }
        }
    }

    #[test]
    fn gauge_is_the_product(tau in tau_family(), n in 2usize..=4, t in 1e-9f64..1.0) {
        let h = GaugeSpec::with_tau(n, tau.clone()).unwrap();
        prop_assert_eq!(eval_h(&h, 0.0).unwrap(), 0.0);
        prop_assert_eq!(eval_h(&h, t).unwrap(), t.powi(n as i32) * tau.eval(t));
        prop_assert!(eval_h(&h, t).unwrap() <= eval_h(&h, t * 1.5).unwrap());
    }

    #[test]
    fn raw_gauges_are_monotone(alpha in 0.25f64..4.0, exponent in -2.0f64..0.25, t in 1e-6f64..2.0) {
        for raw in [RawGauge::Power { alpha }, RawGauge::PowerLog { alpha, exponent }, RawGauge::ExpInv] {
            let h = GaugeSpec::with_raw(2, raw).unwrap();
            prop_assert_eq!(eval_h(&h, 0.0).unwrap(), 0.0);
            prop_assert!(eval_h(&h, t).unwrap() <= eval_h(&h, t * 1.01).unwrap());
        }
    }

    #[test]
    fn tau_root_is_the_first_crossing(tau in tau_family(), j in 0i32..=20, n in 1usize..=3) {
        let p = 2f64.powi(-j);
        let t = tau_root(&tau, p, n, 1e-10).unwrap();
        let g = |s: f64| s.powi(n as i32) * tau.eval(p * s);
        prop_assert!((g(t) - 1.0).abs() <= 1e-10);
        let (lo, hi) = ((1e-12 * t).ln(), (t * (1.0 - 1e-6)).ln());
        for i in 0..64 {
            let s = (lo + (hi - lo) * i as f64 / 63.0).exp();
            prop_assert!(g(s) < 1.0, "g({s}) = {}", g(s));
        }
    }

    #[test]
    fn thm2_inequality_holds_entrywise(alpha in 0.5f64..3.0, safety in 0.1f64..0.9) {
        let h = GaugeSpec::with_raw(2, RawGauge::Power { alpha }).unwrap();
        let a = thm2_sequence(&h, 12, safety).unwrap();
        for k in 1..=12 {
            let arg = 2.0 * 2f64.sqrt() * 2f64.powi(-(k as i32)) * a[k];
            prop_assert!(eval_h(&h, arg).unwrap() <= safety * 2f64.powi(-4 * k as i32));
            prop_assert!(a[k] <= 0.5 * a[k - 1]);
        }
    }

    #[test]
    fn word_signs_and_prefixes(n in 1usize..=4, seed in any::<u64>(), depth in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_word(n, depth, &mut rng);
        for level in 1..=depth {
            prop_assert!(w.vertex(level).iter().all(|&s| s == 1.0 || s == -1.0));
        }
        for j in 0..=depth {
            let p = w.prefix(j);
            prop_assert_eq!(p.depth(), j);
            prop_assert!(w.has_prefix(&p));
        }
        prop_assert_eq!(VertexWord::parse(&w.to_string(), n).unwrap(), w);
    }

    #[test]
    fn dyadic_coding_round_trips(n in 1usize..=4, seed in any::<u64>(), depth in 0usize..=20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_word(n, depth, &mut rng);
        let d = code_z(&w);
        prop_assert!(d.numerators.iter().all(|&c| c < 1u64 << depth));
        prop_assert_eq!(&dyadic_preimage_exact(&d.numerators, depth).unwrap(), &w);
        prop_assert_eq!(&dyadic_preimage(&d.corner(), depth).unwrap(), &w);
    }

    #[test]
    fn standard_packs_glue(n in 1usize..=4, a in contraction(1..=30)) {
        let pack = SequencePack::standard(n, a.clone()).unwrap();
        prop_assert_eq!((pack.a()[0], pack.b()[0]), (1.0, 1.0));
        for k in 1..=pack.depth() {
            prop_assert!(pack.a()[k] > 0.0 && pack.a()[k] <= pack.a()[k - 1]);
            prop_assert_eq!(pack.b()[k], 0.5 * (1.0 + a[k]));
            prop_assert!(pack.r()[k] <= 0.5 * pack.r()[k - 1]);
            prop_assert!(pack.rt()[k] < 0.5 * pack.rt()[k - 1] || pack.a()[k] == pack.a()[k - 1]);
        }
        prop_assert!(pack.max_gluing_residual() <= 4.0);
    }

    #[test]
    fn cubes_nest(seed in any::<u64>(), depth in 1usize..=8) {
        let pack = SequencePack::standard(2, harmonic_sequence(10)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_word(2, depth, &mut rng);
        for side in [Side::Domain, Side::Target] {
            let c = cubes(&w, &pack, side).unwrap();
            prop_assert!(0.0 < c.inner_half_edge && c.inner_half_edge < c.outer_half_edge);
            if depth > 1 {
                let parent = cubes(&w.prefix(depth - 1), &pack, side).unwrap();
                // the outer cube touches the parent's inner cube, so allow rounding
                let reach = sup_dist(&c.center, &parent.center) + c.outer_half_edge;
                prop_assert!(reach <= parent.inner_half_edge + 4.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn located_points_sit_in_their_annulus(x in prop::array::uniform2(-1.0f64..1.0)) {
        let pack = SequencePack::standard(2, harmonic_sequence(12)).unwrap();
        match locate(&x, &pack, 12).unwrap() {
            Location::Annulus { word, depth } => {
                let z = ponomarev::cantor::center(&word, &pack, Side::Domain).unwrap();
                let s = sup_dist(&x, &z);
                prop_assert!(pack.r()[depth] <= s && s <= 0.5 * pack.r()[depth - 1]);
            }
            Location::Core { word } => {
                let z = ponomarev::cantor::center(&word, &pack, Side::Domain).unwrap();
                prop_assert!(sup_dist(&x, &z) <= pack.r()[12]);
            }
        }
    }
}

fn harmonic_map(n: usize, depth: usize) -> PonomarevMap {
    PonomarevMap::build(SequencePack::standard(n, harmonic_sequence(depth)).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn radial_profile_increases(seed in any::<u64>(), depth in 1usize..=10, s0 in 0.0f64..1.0, s1 in 0.0f64..1.0) {
        prop_assume!(s0 < s1);
        let map = harmonic_map(2, 12);
        let pack = map.pack();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_word(2, depth, &mut rng);
        let z = ponomarev::cantor::center(&w, pack, Side::Domain).unwrap();
        let zt = ponomarev::cantor::center(&w, pack, Side::Target).unwrap();
        let dir = [rng.gen_range(-1.0..1.0), 1.0f64];
        let (lo, hi) = (pack.r()[depth], 0.5 * pack.r()[depth - 1]);
        let image_radius = |s: f64| {
            let radius = lo + (hi - lo) * s;
            let x: Vec<f64> = z.iter().zip(&dir).map(|(c, d)| c + radius * d).collect();
            let y = map.eval_with_annulus_of(&w, &x).unwrap();
            sup_dist(&y, &zt)
        };
        prop_assert!(image_radius(s0) < image_radius(s1));
    }

    #[test]
    fn inner_cubes_map_onto_inner_cubes(seed in any::<u64>(), depth in 1usize..=10, n in 2usize..=3) {
        let map = harmonic_map(n, 12);
        let pack = map.pack();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_word(n, depth, &mut rng);
        let c = cubes(&w, pack, Side::Domain).unwrap();
        let zt = ponomarev::cantor::center(&w, pack, Side::Target).unwrap();
        let face = rng.gen_range(0..n);
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let u = if i == face { if rng.gen_bool(0.5) { 1.0 } else { -1.0 } } else { rng.gen_range(-1.0..1.0) };
                c.center[i] + c.inner_half_edge * u
            })
            .collect();
        let y = map.eval(&x).unwrap();
        let rt = pack.rt()[depth];
        let d = sup_dist(&y, &zt);
        prop_assert!(scaled_ulps(&[d], &[rt]) <= 8.0 || (d - rt).abs() <= 8.0 * f64::EPSILON);
    }

    #[test]
    fn distinct_points_have_distinct_images(
        x in prop::array::uniform2(-1.0f64..1.0),
        y in prop::array::uniform2(-1.0f64..1.0),
    ) {
        prop_assume!(x != y);
        let map = harmonic_map(2, 16);
        let (fx, fy) = (map.eval(&x).unwrap(), map.eval(&y).unwrap());
        prop_assert!(fx != fy);
        let back = map.eval_inverse(&fx).unwrap();
        prop_assert!(sup_dist(&back, &x) <= 2.0 * map.truncation_error());
    }

    #[test]
    fn truncations_form_a_cauchy_sequence(x in prop::collection::vec(-1.0f64..1.0, 2), k in 1usize..12) {
        let pack = SequencePack::standard(2, harmonic_sequence(16)).unwrap();
        let fine = PonomarevMap::build(pack.clone()).unwrap();
        let coarse_pack = pack.truncated(k).unwrap();
        let bound = truncation_bound(&coarse_pack);
        let coarse = PonomarevMap::build(coarse_pack).unwrap();
        let gap = sup_dist(&fine.eval(&x).unwrap(), &coarse.eval(&x).unwrap());
        prop_assert!(gap <= bound * (1.0 + 1e-12), "gap {gap} > {bound}");
    }

    #[test]
    fn upper_sum_is_count_times_cube(k in 0usize..=12, tau in tau_family()) {
        let h = GaugeSpec::with_tau(2, tau.clone()).unwrap();
        let pack = SequencePack::standard(2, harmonic_sequence(12)).unwrap();
        let r = hausdorff_upper_sum(&h, &pack, k).unwrap();
        prop_assert_eq!(r.count, 2f64.powi(2 * k as i32));
        prop_assert_eq!(r.total, r.count * r.per_cube);
    }

    #[test]
    fn sobolev_partial_sums_grow(a in contraction(2..=20), p in 1.0f64..2.0) {
        let map = PonomarevMap::build(SequencePack::standard(2, a).unwrap()).unwrap();
        let rep = sobolev_norm(&map, p).unwrap();
        prop_assert!(rep.value >= 0.0);
        prop_assert!(rep.partial_sums.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn shell_closed_forms_match_quadrature(
        k in 1usize..=30,
        eps in 1e-4f64..1.0,
        n in 2usize..=3,
    ) {
        let pack = SequencePack::standard(n, harmonic_sequence(30)).unwrap();
        let phi = Radial::Affine { alpha: pack.alpha()[k], beta: pack.beta()[k], power: n as f64 - eps };
        let (r, big_r) = (pack.r()[k], 0.5 * pack.r()[k - 1]);
        let exact = shell_integral(&phi, r, big_r, n).unwrap();
        let quad = shell_integral_quadrature(&phi, r, big_r, n).unwrap();
        prop_assert!((exact - quad).abs() <= 1e-8 * exact.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Monte Carlo over the shell itself, sampling φ(‖x‖_∞) directly.
    #[test]
    fn shell_integral_matches_monte_carlo(k in 1usize..=20, eps in 1e-4f64..1.0, seed in any::<u64>()) {
        let n = 2;
        let pack = SequencePack::standard(n, harmonic_sequence(20)).unwrap();
        let phi = Radial::Affine { alpha: pack.alpha()[k], beta: pack.beta()[k], power: n as f64 - eps };
        let (r, big_r) = (pack.r()[k], 0.5 * pack.r()[k - 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = 200_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..samples {
            let s = (0..n).fold(0.0f64, |m, _| m.max(rng.gen_range(-big_r..big_r).abs()));
            let v = if s > r { phi.eval(s) } else { 0.0 };
            sum += v;
            sum2 += v * v;
        }
        let vol = (2.0 * big_r).powi(n as i32);
        let mean = sum / samples as f64;
        let se = vol * ((sum2 / samples as f64 - mean * mean).max(0.0) / samples as f64).sqrt();
        let exact = shell_integral(&phi, r, big_r, n).unwrap();
        // 4σ keeps the family-wise false alarm rate small over the cases
        prop_assert!((vol * mean - exact).abs() <= 4.0 * se, "mc {} exact {exact} se {se}", vol * mean);
    }
}

#[test]
fn thm1_sequences_hold_their_identity() {
    for tau in [
        TauSpec::Log { shift: std::f64::consts::E },
        TauSpec::IteratedLog { iterations: 2, exponent: 1.5, shift: None },
        TauSpec::LogPower { exponent: 4.0, shift: std::f64::consts::E },
    ] {
        let a = thm1_sequence(&tau, 2, 30).unwrap();
        for k in 1..=30 {
            assert!(a[k] <= a[k - 1]);
            let v = a[k].powi(2) * tau.eval(2f64.powi(-(k as i32)) * a[k]);
            assert!((v - 1.0).abs() <= 1e-10);
        }
    }
}
