use morrey_lab::grid::{
    enumerate_cubes, make_grid, read_dump, write_dump, CubeFamily, GridSpec, SampledFunction,
};
use morrey_lab::lorentz::{
    decreasing_rearrangement, distribution_function, embedding_check, lorentz_norm,
    lorentz_quasinorm, lorentz_quasinorm_via_distribution, LorentzParams, NormKind,
};
use morrey_lab::maximal::{fractional_maximal, hardy_littlewood};
use morrey_lab::morrey::{morrey_lorentz_norm, MorreyParams};
use proptest::prelude::*;

const SIDE: usize = 8;

fn grid() -> GridSpec {
    make_grid(2, 1.0, SIDE, false).unwrap()
}

fn field() -> impl Strategy<Value = SampledFunction> {
    prop::collection::vec(prop_oneof![Just(0.0), -5.0..5.0f64], SIDE * SIDE)
        .prop_map(|v| SampledFunction::new(grid(), v).unwrap())
}

fn exponents() -> impl Strategy<Value = (f64, f64)> {
    (1.05..6.0f64, prop_oneof![1.0..8.0f64, Just(f64::INFINITY)])
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn rearrangement_is_equimeasurable(f in field(), t in 0.0..5.0f64) {
        let star = decreasing_rearrangement(&f);
        let abs_integral: f64 = f.values().iter().map(|v| v.abs()).sum::<f64>() * f.weight();
        prop_assert!(close(star.integral(), abs_integral, 1e-12));
        let above = f.values().iter().filter(|v| v.abs() > t).count() as f64 * f.weight();
        prop_assert!(close(distribution_function(&f).eval(t), above, 1e-12));
    }

    #[test]
    fn norms_ignore_node_order(f in field(), (p, d) in exponents(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut values = f.values().to_vec();
        values.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let g = SampledFunction::new(grid(), values).unwrap();
        let params = LorentzParams::new(p, d).unwrap();
        prop_assert!(close(lorentz_quasinorm(&f, params), lorentz_quasinorm(&g, params), 1e-12));
    }

    #[test]
    fn two_routes_agree(f in field(), (p, d) in exponents()) {
        let params = LorentzParams::new(p, d).unwrap();
        prop_assert!(close(lorentz_quasinorm(&f, params), lorentz_quasinorm_via_distribution(&f, params), 1e-9));
    }

    #[test]
    fn natural_norm_is_sandwiched(f in field(), (p, d) in exponents()) {
        let params = LorentzParams::new(p, d).unwrap();
        let star = lorentz_norm(&f, params, NormKind::Rearrangement).unwrap();
        let natural = lorentz_norm(&f, params, NormKind::Natural).unwrap();
        prop_assert!(star <= natural * (1.0 + 1e-9) + 1e-300);
        prop_assert!(natural <= p / (p - 1.0) * star * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn quasinorm_is_homogeneous(f in field(), (p, d) in exponents(), c in -1e3..1e3f64) {
        let params = LorentzParams::new(p, d).unwrap();
        let scaled = lorentz_quasinorm(&f.scaled(c), params);
        prop_assert!(close(scaled, c.abs() * lorentz_quasinorm(&f, params), 1e-10));
    }

    #[test]
    fn embedding_holds_on_random_sets(values in prop::collection::vec(0.0..10.0f64, 1..64), p in 1.05..6.0f64, k in 1.0..8.0f64) {
        prop_assert!(embedding_check(&values, 0.25, p, k).unwrap().pass);
    }

    #[test]
    fn morrey_norm_grows_with_the_family(f in field(), p in 1.05..3.0f64, extra in 0.0..3.0f64) {
        let params = MorreyParams::new(p, 2.0, p + extra).unwrap();
        let coarse = enumerate_cubes(f.grid(), 3, 1).unwrap();
        let fine = enumerate_cubes(f.grid(), 4, 2).unwrap();
        let a = morrey_lorentz_norm(&f, params, &coarse).unwrap().value;
        let b = morrey_lorentz_norm(&f, params, &fine).unwrap().value;
        prop_assert!(a <= b * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn maximal_dominates_the_function(f in field()) {
        let family = CubeFamily::point_scale(f.grid(), 1).unwrap();
        let m = hardy_littlewood(&f, &family).unwrap();
        for (mf, v) in m.values.values().iter().zip(f.values()) {
            prop_assert!(*mf >= v.abs() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn fractional_maximal_scales_linearly(f in field(), alpha in 0.0..1.9f64, c in 0.01..100.0f64) {
        let family = CubeFamily::point_scale(f.grid(), 1).unwrap();
        let a = fractional_maximal(&f, alpha, &family).unwrap();
        let b = fractional_maximal(&f.scaled(c), alpha, &family).unwrap();
        for (x, y) in a.values.values().iter().zip(b.values.values()) {
            prop_assert!(close(*y, c * x, 1e-12));
        }
    }

    #[test]
    fn dump_round_trips(f in field()) {
        let mut bytes = Vec::new();
        write_dump(&mut bytes, &f).unwrap();
        let back = read_dump(bytes.as_slice()).unwrap();
        prop_assert_eq!(back.values(), f.values());
        prop_assert!(back.grid().same_layout(f.grid()));
    }
}
