use perpetuity_core::kernel::{
    breakpoints, cdf_f, cdf_g, density_phi, dominating_r, inverse_g, upper_endpoint, Regime,
};
use perpetuity_core::oracle::inverse_g_bisection;
use proptest::prelude::*;

fn grid(steps: usize) -> impl Iterator<Item = f64> {
    (0..=steps).map(move |i| i as f64 / steps as f64)
}

#[test]
fn remainder_is_nonnegative_on_grid() {
    for x in grid(512) {
        for t in grid(512) {
            let g = density_phi(x, t).unwrap() - dominating_r(t).unwrap();
            assert!(g >= -1e-12, "x={x} t={t} g={g}");
        }
    }
}

#[test]
fn density_at_least_half_before_quarter() {
    for x in grid(512) {
        for t in grid(2048)
            .filter(|&t| t <= 0.25 - 1e-9)
            .chain([0.25 - 1e-9])
        {
            assert!(density_phi(x, t).unwrap() >= 0.5, "x={x} t={t}");
        }
    }
}

#[test]
fn cdf_slope_matches_density() {
    let (h, delta) = (1e-6, 1e-3);
    for x in grid(50) {
        let top = upper_endpoint(x).unwrap() - delta;
        for k in 1..300 {
            let y = top * k as f64 / 300.0;
            if y <= h || (y - x).abs() <= 2.0 * h {
                continue;
            }
            let slope = (cdf_f(x, y + h).unwrap() - cdf_f(x, y - h).unwrap()) / (2.0 * h);
            let phi = density_phi(x, y).unwrap();
            assert!((slope - phi).abs() <= 1e-4 * (1.0 + phi), "x={x} y={y}");
        }
    }
}

#[test]
fn breakpoints_are_values_of_g() {
    for x in grid(512) {
        let cuts = breakpoints(x).unwrap();
        assert!(cuts.cut1 <= cuts.cut2 + 1e-15, "x={x}");
        let (first, second) = (x.min(0.25), x.max(0.25));
        assert!(
            (cdf_g(x, first).unwrap() - cuts.cut1).abs() <= 1e-12,
            "x={x}"
        );
        assert!(
            (cdf_g(x, second).unwrap() - cuts.cut2).abs() <= 1e-12,
            "x={x}"
        );
        let expected = if x <= 0.25 { Regime::Low } else { Regime::High };
        assert_eq!(cuts.regime, expected);
    }
}

#[test]
fn quantile_continuous_across_regimes() {
    for z in grid(1024) {
        let a = inverse_g(0.25 - 1e-9, z).unwrap();
        let b = inverse_g(0.25 + 1e-9, z).unwrap();
        assert!((a - b).abs() <= 1e-6, "z={z}");
    }
}

#[test]
fn quantile_continuous_at_cuts() {
    for x in grid(256) {
        let cuts = breakpoints(x).unwrap();
        for cut in [cuts.cut1, cuts.cut2] {
            if !(1e-9..=1.0 - 1e-9).contains(&cut) {
                continue;
            }
            let left = inverse_g(x, cut - 1e-10).unwrap();
            let right = inverse_g(x, cut + 1e-10).unwrap();
            assert!((left - right).abs() <= 1e-7, "x={x} cut={cut}");
        }
    }
}

#[test]
fn cdf_g_strictly_increasing_on_support() {
    for x in grid(64) {
        let b = upper_endpoint(x).unwrap();
        let mut prev = cdf_g(x, 0.0).unwrap();
        assert_eq!(prev, 0.0);
        for k in 1..=2000 {
            let y = b * k as f64 / 2000.0;
            let g = cdf_g(x, y).unwrap();
            assert!(g > prev, "x={x} y={y}");
            prev = g;
        }
        assert_eq!(prev, 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn round_trip_quantile_then_cdf(x in 0.0f64..=1.0, z in 0.0f64..=1.0) {
        let y = inverse_g(x, z).unwrap();
        prop_assert!((0.0..=upper_endpoint(x).unwrap()).contains(&y));
        prop_assert!((cdf_g(x, y).unwrap() - z).abs() <= 1e-9);
    }

    #[test]
    fn round_trip_cdf_then_quantile(x in 0.0f64..=1.0, frac in 0.0f64..1.0) {
        let y = frac * upper_endpoint(x).unwrap();
        prop_assert!((inverse_g(x, cdf_g(x, y).unwrap()).unwrap() - y).abs() <= 1e-9);
    }

    #[test]
    fn closed_form_matches_bisection(x in 0.0f64..=1.0, z in 0.0f64..=1.0) {
        let closed = inverse_g(x, z).unwrap();
        let numeric = inverse_g_bisection(x, z, 1e-12).unwrap();
        prop_assert!((closed - numeric).abs() <= 1e-9);
    }

    #[test]
    fn quantile_monotone(x in 0.0f64..=1.0, z1 in 0.0f64..=1.0, z2 in 0.0f64..=1.0) {
        let (lo, hi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
        prop_assert!(inverse_g(x, lo).unwrap() <= inverse_g(x, hi).unwrap() + 1e-12);
    }

    #[test]
    fn cdf_f_bounds(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let f = cdf_f(x, y).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        if y >= upper_endpoint(x).unwrap() {
            prop_assert_eq!(f, 1.0);
        }
    }

    #[test]
    fn out_of_domain_is_rejected(x in 1.0f64..10.0, v in 0.0f64..=1.0) {
        let x = x + 1e-9;
        prop_assert!(inverse_g(x, v).is_err());
        prop_assert!(inverse_g(v, x).is_err());
        prop_assert!(cdf_g(-x, v).is_err());
        prop_assert!(density_phi(v, -x).is_err());
    }
}
