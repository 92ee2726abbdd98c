use bfamily_core::solver::Verdict;
use bfamily_web::ops::{packet_block_norms, riccati_blowup, riccati_curve, Breaking};

#[test]
fn packet_energy_sits_in_its_octave() {
    let norms = packet_block_norms(1.0, 3.0, 24.0).unwrap();
    let (peak, _) = norms.iter().copied().fold((0, 0.0), |a, (j, v)| if v > a.1 { (j, v) } else { a });
    // Block j covers |k| in [3/4, 8/3] * 2^j; 24 lies in the plateau of j = 4.
    assert_eq!(peak, 4);
    let total: f64 = norms.iter().map(|(_, v)| v * v).sum::<f64>();
    let l2 = (3.0 * (std::f64::consts::PI / 2.0).sqrt() / 2.0).sqrt();
    assert!((total.sqrt() / l2 - 1.0).abs() < 0.05);
}

#[test]
fn curve_stops_at_the_blowup_time() {
    let t_star = riccati_blowup(-2.0, 10f64.ln(), 20.0).unwrap().unwrap();
    let curve = riccati_curve(-2.0, 10f64.ln(), 20.0, 2.0 * t_star, 101).unwrap();
    assert!((curve[0].1.unwrap() - 20.0).abs() < 1e-12);
    for (t, v) in curve {
        assert_eq!(v.is_none(), t >= t_star, "t = {t}");
    }
    assert_eq!(riccati_blowup(-2.0, 1.0, 0.5).unwrap(), None);
    assert!(riccati_curve(1.0, 1.0, 1.0, 1.0, 10).is_err());
}

#[test]
fn breaking_demo_reaches_a_verdict() {
    let mut demo = Breaking::new(3.0, 2.0, -2.0, 2048).unwrap();
    assert_eq!(demo.points().len(), 2048);
    assert_eq!(demo.advance_to(0.1).unwrap(), None);
    assert!(demo.time() >= 0.1);
    let start = demo.max_slope();
    let verdict = demo.advance_to(20.0).unwrap();
    assert!(matches!(verdict, Some(Verdict::BlowupDetected | Verdict::ResolutionLost)));
    assert!(demo.max_slope() > 2.0 * start);
    assert!(demo.velocity().iter().all(|v| v.is_finite()));
}
