use bfamily_core::diagnostics::{
    conserved_h0, conserved_h1, conserved_h2, m_l1, origin_slope_identity_residual, sign_predicate, H2Variant,
};
use bfamily_core::solver::resolved_velocity_tendency;
use bfamily_core::spectral::{make_grid, GridSpec, RealField};
use proptest::prelude::*;

fn bumps(grid: &GridSpec, terms: &[(f64, f64, f64)]) -> RealField {
    RealField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|&(a, c, w)| {
                let z = (x - c) / w;
                a * (-z * z).exp()
            })
            .sum()
    })
}

fn terms() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -5.0..5.0f64, 0.5..2.0f64), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn l1_dominates_h0(t in terms()) {
        let g = make_grid(20.0, 512).unwrap();
        let m = bumps(&g, &t);
        prop_assert!(m_l1(&m) >= conserved_h0(&m).abs() * (1.0 - 1e-14));
        let pos = RealField::new(&g, m.samples().iter().map(|v| v.abs()).collect()).unwrap();
        prop_assert!((m_l1(&pos) - conserved_h0(&pos)).abs() <= 1e-14 * m_l1(&pos));
    }

    #[test]
    fn h1_is_homogeneous(mean in 0.5..2.0f64, amp in 0.0..0.4f64, c in 0.1..10.0f64, b in prop_oneof![-3.0..-0.5f64, 0.5..4.0f64]) {
        let g = make_grid(std::f64::consts::PI, 128).unwrap();
        let m = RealField::from_fn(&g, |x| mean + amp * (2.0 * x).cos());
        let h = conserved_h1(&m, b).unwrap().unwrap();
        let hc = conserved_h1(&m.scaled(c), b).unwrap().unwrap();
        prop_assert!((hc - c.powf(1.0 / b) * h).abs() <= 1e-12 * hc.abs());
        let h2 = conserved_h2(&m, b, H2Variant::Squared).unwrap().unwrap();
        prop_assert!(h2.is_finite() && h2 > 0.0);
    }

    #[test]
    fn sign_pattern_flips_with_orientation(s in 0.5..3.0f64, a in 0.1..2.0f64, bb in 0.1..2.0f64, b in 1.5..4.0f64) {
        let g = make_grid(20.0, 1024).unwrap();
        // Negative lobe on the left, positive on the right, split at the single zero x0.
        let m = RealField::from_fn(&g, |x| -a * (-(x + s) * (x + s)).exp() + bb * (-(x - s) * (x - s)).exp());
        let x0 = (bb / a).ln() / (-4.0 * s);
        prop_assert!(sign_predicate(&m, x0, b));
        prop_assert!(!sign_predicate(&m, x0, 2.0 - b));
        prop_assert!(sign_predicate(&m.scaled(-1.0), x0, 2.0 - b));
        prop_assert!(sign_predicate(&m.scaled(3.0), x0, b));
    }

    #[test]
    fn identity_holds_for_the_exact_tendency(amps in prop::collection::vec(-0.3..0.3f64, 1..12), b in -3.0..4.0f64) {
        let g = make_grid(std::f64::consts::PI * 4.0, 256).unwrap();
        let u = RealField::from_fn(&g, |x| {
            amps.iter().enumerate().map(|(n, a)| a * ((n as f64 + 1.0) * x / 4.0).sin()).sum()
        });
        let (fine, dudt) = resolved_velocity_tendency(&u, b).unwrap();
        prop_assert!(origin_slope_identity_residual(&fine, b, &dudt).unwrap() <= 1e-11);
    }
}

#[test]
fn identity_refuses_even_fields() {
    let g = make_grid(10.0, 128).unwrap();
    let u = RealField::from_fn(&g, |x| (-x * x).exp());
    assert!(origin_slope_identity_residual(&u, 2.0, &u).is_err());
}
