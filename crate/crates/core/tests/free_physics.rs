//! Free-fermion quench at the full chain length.

use pagecurve_core::analysis::{detect_kinks, detect_page_time, first_kink, min_entropy_kinks};
use pagecurve_core::free::FreeEngine;
use pagecurve_core::{build_params, RenyiOrder};

const ORDERS: [RenyiOrder; 3] = [RenyiOrder::VonNeumann, RenyiOrder::Finite(2.0), RenyiOrder::Min];

#[test]
fn particles_only_leave_before_reflection() {
    let (p, grid) = build_params(5, 45, 0.0, 1.0, 1.0, 0.5, 0.02, 20.0).unwrap();
    let recs = FreeEngine::new(&p).unwrap().run(&grid, &ORDERS, 4).unwrap();
    let t_reflect = p.reflection_time();
    assert!((t_reflect - 22.5).abs() < 1e-12);
    for w in recs.windows(2) {
        assert!(w[1].m - w[0].m < 1e-6, "m grows at t = {}", w[1].time);
    }
    assert!(recs.last().unwrap().m < 5.0 - 1.0);
}

#[test]
fn first_crossing_and_min_entropy_kink_coincide() {
    let (p, grid) = build_params(5, 45, 0.0, 1.0, 1.0, 0.5, 0.02, 12.0).unwrap();
    let recs = FreeEngine::new(&p).unwrap().run(&grid, &ORDERS, 4).unwrap();
    let k = first_kink(&recs).unwrap().expect("a level crossing");
    assert!((k.t_c - 2.27).abs() < 0.05, "t_c = {}", k.t_c);
    // decayed fraction at the kink close to 0.5975 / M
    assert!((k.decayed_fraction - 0.5975 / 5.0).abs() < 0.01);
    let times: Vec<f64> = recs.iter().map(|r| r.time).collect();
    let s_min: Vec<f64> = recs.iter().map(|r| r.s_min).collect();
    let kinks = min_entropy_kinks(&times, &s_min, 10.0);
    assert!((kinks[0] - k.t_c).abs() <= grid.dt);
    // every crossing of the top pair has a matching slope discontinuity
    for ev in detect_kinks(&recs, 1).unwrap() {
        assert!(kinks.iter().any(|&t| (t - ev.t_c).abs() <= grid.dt), "unmatched crossing at {}", ev.t_c);
    }
}

#[test]
fn page_curve_peaks_below_ln2_per_site() {
    let (p, grid) = build_params(5, 45, 0.0, 1.0, 1.0, 0.5, 0.02, 14.0).unwrap();
    let recs = FreeEngine::new(&p).unwrap().run(&grid, &ORDERS, 4).unwrap();
    let page = detect_page_time(&recs, 5).unwrap();
    assert!(!page.at_boundary);
    assert!(page.peak_density < std::f64::consts::LN_2);
    let k = first_kink(&recs).unwrap().unwrap();
    assert!(k.t_c <= page.t_page);
}

#[test]
fn decoupled_system_keeps_its_particles() {
    let (p, grid) = build_params(4, 10, 0.0, 1.0, 1.0, 0.0, 0.1, 5.0).unwrap();
    let recs = FreeEngine::new(&p).unwrap().run(&grid, &ORDERS, 4).unwrap();
    for r in &recs {
        assert!((r.m - 4.0).abs() < 1e-12);
        assert!(r.s_vn.abs() < 1e-10);
    }
}
