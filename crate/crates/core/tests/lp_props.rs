use bfamily_core::lp::{build_lp_basis, sobolev_norm, BesovSpec};
use bfamily_core::spectral::{make_grid, GridSpec, RealField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn wave_packets(grid: &GridSpec, terms: &[(f64, f64, f64, f64)]) -> RealField {
    RealField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|&(a, c, w, k)| {
                let z = (x - c) / w;
                a * (-z * z).exp() * (k * x).cos()
            })
            .sum()
    })
}

fn packets() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -4.0..4.0f64, 0.8..3.0f64, 0.0..60.0f64), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn blocks_resum_to_the_field(terms in packets()) {
        let g = make_grid(20.0, 1024).unwrap();
        let basis = build_lp_basis(&g).unwrap();
        let f = wave_packets(&g, &terms);
        let mut acc = vec![0.0; g.num_points()];
        for j in -1..=basis.j_max() {
            let d = basis.dyadic_block(&f, j).unwrap();
            acc.iter_mut().zip(d.samples()).for_each(|(a, v)| *a += v);
            let s = basis.low_freq_cutoff(&f, j).unwrap();
            let gap = s.samples().iter().zip(&acc).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prop_assert!(gap <= 1e-11, "S_{} telescoping gap {}", j, gap);
        }
    }

    #[test]
    fn besov_norm_decreases_in_r(terms in packets()) {
        let g = make_grid(20.0, 1024).unwrap();
        let basis = build_lp_basis(&g).unwrap();
        let f = wave_packets(&g, &terms);
        let mut last = f64::INFINITY;
        for r in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let n = basis.besov_norm(&f, &BesovSpec::l2(1.5, r)).unwrap();
            prop_assert!(n <= last * (1.0 + 1e-13));
            last = n;
        }
    }

    #[test]
    fn besov_scales_linearly(terms in packets(), c in -5.0..5.0f64) {
        let g = make_grid(20.0, 512).unwrap();
        let basis = build_lp_basis(&g).unwrap();
        let f = wave_packets(&g, &terms);
        let spec = BesovSpec::l2(1.5, 2.0);
        let a = basis.besov_norm(&f.scaled(c), &spec).unwrap();
        let b = c.abs() * basis.besov_norm(&f, &spec).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }
}

#[test]
fn partition_of_unity_on_resolved_band() {
    for (l, m) in [(20.0, 1024), (40.0, 4096), (7.0, 256)] {
        let basis = build_lp_basis(&make_grid(l, m).unwrap()).unwrap();
        assert!(basis.partition_residual() <= 1e-12);
    }
}

#[test]
fn single_high_block_has_no_low_part() {
    let g = make_grid(20.0, 2048).unwrap();
    let basis = build_lp_basis(&g).unwrap();
    let f = basis
        .dyadic_block(&RealField::from_fn(&g, |x| (-x * x / 4.0).exp() * (24.0 * x).sin()), 4)
        .unwrap();
    for j in -1..=2 {
        assert!(basis.low_freq_cutoff(&f, j).unwrap().max_abs() <= 1e-14);
    }
    let c = RealField::from_fn(&g, |_| 1.0);
    for j in -1..=basis.j_max() {
        assert!(basis.low_freq_cutoff(&c, j).unwrap().max_diff(&c) <= 1e-14);
    }
}

#[test]
fn besov_to_sobolev_ratio_is_confined() {
    let g = make_grid(20.0, 2048).unwrap();
    let basis = build_lp_basis(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = BesovSpec::l2(1.5, 2.0);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let terms: Vec<_> = (0..rng.gen_range(1..6))
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(0.5..3.0),
                    rng.gen_range(0.0..100.0),
                )
            })
            .collect();
        let f = wave_packets(&g, &terms);
        let ratio = basis.besov_norm(&f, &spec).unwrap() / sobolev_norm(&f, 1.5);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    assert!(hi / lo <= 4.0, "ratio range [{lo}, {hi}]");
}
