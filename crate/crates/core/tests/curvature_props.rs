use std::f64::consts::PI;

use floatlab_core::curvature::{floating_curvature, limit_ratio, q_matrix, section_centroid};
use floatlab_core::threshold::{threshold, ThresholdInputs};
use floatlab_core::{cut_level, BodySpec};

#[test]
fn disk_identity() {
    let disk = BodySpec::disk();
    for k in 1..20 {
        let c = k as f64 / 20.0;
        let q = q_matrix(&disk, &[0.0, c], &[0.0, 1.0], 0).unwrap();
        assert!((q.entries[(0, 0)] - c).abs() <= 1e-10);
    }
}

#[test]
fn radius_curvature_reciprocity() {
    let disk = BodySpec::disk();
    for k in 1..=20 {
        let delta = 1.5 * k as f64 / 21.0;
        let th = 0.3 * k as f64;
        let u = [th.cos(), th.sin()];
        let kappa = floating_curvature(&disk, delta, &u).unwrap();
        let t = cut_level(&disk, &u, delta).unwrap().level;
        assert!((kappa * t - 1.0).abs() <= 1e-6, "δ={delta}: {}", kappa * t);
    }
}

/// δ_0 from the rolling-ball radii alone (the other inputs do not enter it).
fn delta_0(rho_0: f64, r: f64) -> f64 {
    let inp = ThresholdInputs { n: 2, tau: 1.5, t_max: 1.0, r_m: 1.0, r_cap_m: 1.0, d: 1.0, rho_0, r };
    threshold(&inp).unwrap().delta_0
}

#[test]
fn q_positive_below_delta_0() {
    // rolling radii: the extreme radii of curvature, b²/a and a²/b
    let cases = [(BodySpec::disk(), delta_0(1.0, 1.0)), (BodySpec::ellipse(2.0, 1.0).unwrap(), delta_0(0.5, 4.0))];
    for (body, d0) in &cases {
        for k in 0..100 {
            let th = 2.0 * PI * k as f64 / 100.0;
            let u = [th.cos(), th.sin()];
            let t = cut_level(body, &u, *d0).unwrap().level;
            let x = section_centroid(body, &u, t, 0).unwrap();
            let q = q_matrix(body, &x, &u, 0).unwrap();
            assert!(q.eigenvalues().iter().all(|&e| e > 0.0));
        }
    }
}

#[test]
fn limit_ratio_converges() {
    let cases = [
        (BodySpec::disk(), vec![0.0, 1.0], 1.0f64),
        (BodySpec::ellipse(2.0, 1.0).unwrap(), vec![2.0, 0.0], 2f64.cbrt()),
    ];
    for (body, x, target) in &cases {
        let errs: Vec<f64> =
            (2..=6).map(|k| (limit_ratio(body, x, 10f64.powi(-k)).unwrap() - target).abs()).collect();
        for i in 0..errs.len() - 1 {
            let slack = if i + 1 == errs.len() - 1 { 1.1 } else { 1.0 };
            assert!(errs[i + 1] < slack * errs[i], "{errs:?}");
        }
    }
}

#[test]
fn spatial_q_quadrature_converges() {
    let ball = BodySpec::lp_ball(3, 4.0).unwrap();
    let x = [0.0, 0.0, 0.5];
    let a = q_matrix(&ball, &x, &[0.0, 0.0, 1.0], 128).unwrap();
    let b = q_matrix(&ball, &x, &[0.0, 0.0, 1.0], 256).unwrap();
    assert!((&a.entries - &b.entries).abs().max() < 1e-6);
    let sphere = BodySpec::ellipsoid_axes(&[1.0, 1.0, 1.0]).unwrap();
    let q = q_matrix(&sphere, &x, &[0.0, 0.0, 1.0], 64).unwrap();
    assert!((q.det() - 0.25).abs() < 1e-10);
}

#[test]
fn ellipse_floating_curvature_is_affine_image() {
    // (TB)_δ = T(B_{δ/|det T|}): the floating ellipse has semi-axes 2t and t,
    // t the disk cut level for δ/2
    let e = BodySpec::ellipse(2.0, 1.0).unwrap();
    let delta = 0.4;
    let t = cut_level(&BodySpec::disk(), &[0.0, 1.0], delta / 2.0).unwrap().level;
    // curvature b/a² at the co-vertex
    let expected = t / (2.0 * t).powi(2);
    let k = floating_curvature(&e, delta, &[0.0, 1.0]).unwrap();
    assert!((k - expected).abs() < 1e-7 * expected, "{k} {expected}");
}
