use freekummer::cli::run;
use freekummer::distributions::{
    endpoint_residual, kummer_cauchy, kummer_delta, kummer_endpoints, kummer_measure, quadratic_laurent_moments, FreeKummerParams,
};
use freekummer::hv::{characterize_instance, negative_grid, regression_residual, HvInstance, MixedCumulantTable, RegressionConstants};
use freekummer::partitions::{
    boolean_cumulants_to_moments, enumerate_interval_partitions, free_mixed_moment, moments_to_boolean_cumulants, seeded_oracle, DiscreteLaw,
    Letter, MomentOracle, Tag,
};
use freekummer::series::{rational, Series1};
use freekummer::subordination::{eta_h_identity_residual, eta_h_series, eta_series_of_law};
use freekummer::transforms::{cauchy_transform, moment_transform};
use num_complex::Complex64 as C;
use proptest::prelude::*;

const ORDER: usize = 8;

fn series(c: Vec<f64>) -> Series1<f64> {
    Series1::new(c, ORDER)
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, ORDER + 1)
}

fn tag() -> impl Strategy<Value = Tag> {
    prop_oneof![Just(Tag::Unit), Just(Tag::Pow(1)), Just(Tag::Pow(2)), Just(Tag::OneMinus), Just(Tag::RATIO)]
}

fn word(max: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((any::<bool>(), tag()), 1..=max)
        .prop_map(|v| v.into_iter().map(|(r, t)| if r { Letter::r(t) } else { Letter::y(t) }).collect())
}

fn supported() -> impl Strategy<Value = (f64, f64, f64)> {
    (1.2..3.0f64, 0.0..2.0f64, 0.5..2.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_mul_commutes_and_associates(a in coeffs(), b in coeffs(), c in coeffs()) {
        let (a, b, c) = (series(a), series(b), series(c));
        prop_assert!(a.mul(&b).unwrap().max_abs_diff(&b.mul(&a).unwrap()) < 1e-12);
        let l = a.mul(&b).unwrap().mul(&c).unwrap();
        let r = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(l.max_abs_diff(&r) < 1e-9);
    }

    #[test]
    fn revert_is_an_involution(mut c in prop::collection::vec(-0.5..0.5f64, ORDER + 1), lead in 0.5..2.0f64) {
        c[0] = 0.0;
        c[1] = lead;
        let f = series(c);
        let back = f.revert().unwrap().revert().unwrap();
        prop_assert!(back.max_abs_diff(&f) < 1e-8);
        let id = f.compose(&f.revert().unwrap()).unwrap();
        prop_assert!(id.max_abs_diff(&Series1::var(ORDER)) < 1e-8);
    }

    #[test]
    fn compose_distributes_over_add(a in coeffs(), b in coeffs(), mut h in coeffs()) {
        h[0] = 0.0;
        let (a, b, h) = (series(a), series(b), series(h));
        let l = a.add(&b).unwrap().compose(&h).unwrap();
        let r = a.compose(&h).unwrap().add(&b.compose(&h).unwrap()).unwrap();
        prop_assert!(l.max_abs_diff(&r) < 1e-8 * (1.0 + l.coeffs().iter().fold(0.0f64, |m, x| m.max(x.abs()))));
    }

    #[test]
    fn boolean_roundtrip(mut m in prop::collection::vec(-3.0..3.0f64, 1..12)) {
        m[0] = 1.0;
        let b = moments_to_boolean_cumulants(&m).unwrap();
        let back = boolean_cumulants_to_moments(&b).unwrap();
        let scale = m.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        for (x, y) in m.iter().zip(&back) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn mixed_moment_is_cyclic(w in word(6), seed in 0u64..1000, shift in 0usize..6) {
        let o = seeded_oracle(seed, 0, 3);
        let mut rotated = w.clone();
        rotated.rotate_left(shift % w.len());
        let a = free_mixed_moment(&w, &o).unwrap();
        let b = free_mixed_moment(&rotated, &o).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn alternating_moments_factor_as_free(a1 in tag(), a2 in tag(), b1 in tag(), b2 in tag(), seed in 0u64..1000) {
        let o = seeded_oracle(seed, 1, 3);
        let phi = |w: &[Letter]| free_mixed_moment(w, &o).unwrap();
        let (x1, x2, y1, y2) = (Letter::r(a1), Letter::r(a2), Letter::y(b1), Letter::y(b2));
        prop_assert!((phi(&[x1, y1]) - phi(&[x1]) * phi(&[y1])).abs() < 1e-12);
        // centering each letter and using φ(x1 y1 x2 y2) = 0 for centered alternating words
        let (p1, p2, q1, q2) = (phi(&[x1]), phi(&[x2]), phi(&[y1]), phi(&[y2]));
        let expected = phi(&[x1, x2]) * q1 * q2 + p1 * p2 * phi(&[y1, y2]) - p1 * p2 * q1 * q2;
        let got = phi(&[x1, y1, x2, y2]);
        prop_assert!((got - expected).abs() < 1e-11 * (1.0 + got.abs()), "{got} vs {expected}");
    }

    #[test]
    fn cauchy_maps_upper_half_plane_down((al, be, ga) in supported(), x in -3.0..8.0f64, y in 1e-3..5.0f64) {
        let g = kummer_cauchy(al, be, ga, C::new(x, y)).unwrap();
        prop_assert!(g.im < 0.0, "G = {g}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn moment_transform_matches_cauchy((al, be, ga) in supported(), t in -3.0..-0.05f64) {
        let mu = kummer_measure(al, be, ga).unwrap();
        let z = C::new(t, 0.0);
        let m = moment_transform(&mu, z).unwrap();
        let g = cauchy_transform(&mu, z.inv()).unwrap();
        prop_assert!((m - (g / z - 1.0)).norm() < 1e-10);
    }

    #[test]
    fn kummer_law_is_a_probability((al, be, ga) in supported()) {
        let mu = kummer_measure(al, be, ga).unwrap();
        prop_assert!((mu.mass() - 1.0).abs() < 1e-8);
        prop_assert!(mu.min_density_at_nodes() >= 0.0);
    }

    #[test]
    fn laurent_moments_match_measure((al, be, ga) in supported()) {
        let mu = kummer_measure(al, be, ga).unwrap();
        let quad = mu.moments(6);
        let laurent = quadratic_laurent_moments(al, be, ga, kummer_delta(al, be, ga).unwrap(), 6);
        for (k, (a, b)) in quad.iter().zip(&laurent).enumerate() {
            prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "moment {k}: {a} vs {b}");
        }
    }

    #[test]
    fn cli_output_is_deterministic(seed in 0u64..10_000) {
        let args = |s: &str| vec!["freekummer".to_string(), "verify".into(), "subordination".into(), "--seed".into(), s.into(), "--format".into(), "json".into()];
        let s = seed.to_string();
        let a = run(args(&s));
        let b = run(args(&s));
        prop_assert_eq!(&a.stdout, &b.stdout);
        prop_assert_eq!(a.code, 0);
    }
}

#[test]
fn interval_partitions_count() {
    for n in 1..=12 {
        assert_eq!(enumerate_interval_partitions(n).unwrap().len(), 1 << (n - 1));
    }
}

#[test]
fn endpoints_vary_continuously() {
    for (al, be) in [(1.5, 2.0), (2.0, 1.0), (0.5, 1.0), (3.0, -1.0)] {
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=300 {
            let ga = 0.3 + 2.7 * k as f64 / 300.0;
            let (a, b) = kummer_endpoints(al, be, ga).unwrap_or_else(|e| panic!("({al},{be},{ga}): {e}"));
            assert!(endpoint_residual(al, be, ga, a, b) < 1e-10);
            if let Some((pa, pb)) = prev {
                assert!((a - pa).abs() < 0.05 * pa.max(0.1) && (b - pb).abs() < 0.05 * pb, "jump at ({al},{be},{ga})");
            }
            prev = Some((a, b));
        }
    }
}

#[test]
fn alpha_one_is_a_continuous_limit() {
    for (be, ga) in [(0.5, 1.0), (-5.0, 1.0), (1.0, 2.0)] {
        let mid = FreeKummerParams::new(1.0, be, ga).unwrap();
        let interior: Vec<f64> = (1..100).map(|k| mid.a + (mid.b - mid.a) * (0.02 + 0.96 * k as f64 / 100.0)).collect();
        for (eps, tol) in [(1e-6, 1e-4), (1e-3, 1e-2)] {
            for al in [1.0 - eps, 1.0 + eps] {
                let p = FreeKummerParams::new(al, be, ga).unwrap();
                assert!((p.b - mid.b).abs() < 10.0 * tol, "upper endpoint at α={al}, β={be}");
                let sup = interior.iter().map(|&x| (p.density(x) - mid.density(x)).abs()).fold(0.0, f64::max);
                assert!(sup < tol, "density at α={al}, β={be}: {sup:e}");
            }
        }
    }
}

#[test]
fn eta_h_duality_for_standard_weights() {
    for i in 0..8 {
        let o = seeded_oracle(31, i, 4);
        let eta = eta_series_of_law(&o.r, 7).unwrap();
        for h in [Tag::Unit, Tag::Pow(1), Tag::Pow(2), Tag::RATIO] {
            let e = eta_h_series(&o.r, h, 7).unwrap();
            assert!(eta_h_identity_residual(&e, &eta).unwrap() < 1e-10);
        }
    }
}

#[test]
fn regression_equations_hold_on_negative_axis() {
    let grid = negative_grid(-5.0, -0.1, 30).unwrap();
    for (al, be, ga) in [(2.0, 0.5, 1.0), (3.0, 1.0, 0.5)] {
        let inst = HvInstance::theorem(al, be, ga).unwrap();
        let k = RegressionConstants::compute(&inst).unwrap();
        for case in 1..=4 {
            let r = regression_residual(case, &inst, &k, &grid).unwrap();
            assert!(r < 1e-8, "case {case} at ({al},{be},{ga}): {r:e}");
        }
    }
}

#[test]
fn parameters_recovered_across_sweep() {
    let grid = negative_grid(-5.0, -0.1, 20).unwrap();
    for al in [1.5, 2.0, 3.0] {
        for be in [0.25, 0.5, 1.0] {
            for ga in [0.5, 1.0, 2.0] {
                for case in 1..=3 {
                    let r = characterize_instance(case, al, be, ga, &grid).unwrap_or_else(|e| panic!("case {case} ({al},{be},{ga}): {e}"));
                    assert!(r.inequality_holds, "case {case} ({al},{be},{ga})");
                    assert!(r.parameter_error < 1e-5, "case {case} ({al},{be},{ga}): {:e}", r.parameter_error);
                }
            }
        }
    }
}

#[test]
fn exact_cumulant_table_is_symmetric() {
    let law = |n: &[(i64, i64)], w: &[(i64, i64)]| {
        DiscreteLaw::new(n.iter().map(|&(p, q)| rational(p, q)).collect(), w.iter().map(|&(p, q)| rational(p, q)).collect()).unwrap()
    };
    let o = MomentOracle::new(law(&[(1, 4), (2, 3)], &[(1, 3), (2, 3)]), law(&[(1, 2), (2, 1), (3, 1)], &[(1, 4), (1, 4), (1, 2)]));
    for h in [Tag::Pow(1), Tag::RATIO] {
        assert_eq!(MixedCumulantTable::new(&o, h, 5).symmetry_defect(), 0.0);
    }
}
