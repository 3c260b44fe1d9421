use std::f64::consts::PI;

use floatlab_core::floating::{floating_body_with, FloatingOptions};
use floatlab_core::polygon::{PolygonChain, Vec2};
use floatlab_core::BodySpec;
use proptest::prelude::*;

fn quick() -> FloatingOptions {
    FloatingOptions { estimate_error: false, ..Default::default() }
}

fn random_body(kind: u8, a: f64, b: f64, pts: &[(f64, f64)]) -> BodySpec {
    match kind % 4 {
        0 => BodySpec::ellipse(a, b).unwrap(),
        1 => BodySpec::lp_ball(2, 1.2 + 4.0 * a / 3.0).unwrap(),
        2 => BodySpec::square(),
        _ => {
            let v: Vec<Vec2> = pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
            BodySpec::from_polygon(PolygonChain::hull_of(&v).unwrap()).unwrap()
        }
    }
}

fn point_cloud() -> impl Strategy<Value = Vec<(f64, f64)>> {
    // points around a circle keep the hull well away from degenerate
    prop::collection::vec((0.0..2.0 * PI, 0.8f64..1.5), 6..12).prop_map(|v| {
        v.into_iter().map(|(t, r)| (r * t.cos(), r * t.sin())).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn nesting_and_containment(
        kind in 0u8..4,
        a in 0.3f64..3.0,
        b in 0.3f64..3.0,
        pts in point_cloud(),
        f1 in 0.01f64..0.45,
        f2 in 0.01f64..0.45,
    ) {
        let body = random_body(kind, a, b, &pts);
        let vol = body.volume();
        let (lo, hi) = if f1 < f2 { (f1, f2) } else { (f2, f1) };
        prop_assume!(hi - lo > 1e-3);
        let small = floating_body_with(&body, lo * vol, 96, &quick()).unwrap();
        let large = floating_body_with(&body, hi * vol, 96, &quick()).unwrap();
        prop_assert!(small.contained_in_source && large.contained_in_source);
        let outer = small.hull.polygon().unwrap();
        let scale = outer.scale();
        for v in large.hull.polygon().unwrap().vertices() {
            prop_assert!(outer.contains(v, 1e-9 * scale));
        }
        for (u, t) in small.directions.iter().zip(&small.support_levels) {
            prop_assert!(outer.support(&Vec2::new(u[0], u[1])) <= t + 1e-9 * scale);
        }
    }
}

#[test]
fn lp_hulls_have_dihedral_symmetry() {
    for p in [1.5, 3.0, 4.0] {
        let body = BodySpec::lp_ball(2, p).unwrap();
        let r = floating_body_with(&body, 0.1, 360, &quick()).unwrap();
        let poly = r.hull.polygon().unwrap();
        let images: [fn(&Vec2) -> Vec2; 3] = [
            |v| Vec2::new(-v.y, v.x),
            |v| Vec2::new(v.x, -v.y),
            |v| Vec2::new(v.y, v.x),
        ];
        for g in images {
            for v in poly.vertices() {
                let w = g(v);
                let hit = poly.vertices().iter().any(|x| (x - w).norm() < 1e-8);
                assert!(hit, "p={p}: image of {v:?} missing");
            }
        }
    }
}

#[test]
fn smooth_hulls_turn_strictly() {
    for body in [BodySpec::disk(), BodySpec::ellipse(2.0, 1.0).unwrap(), BodySpec::lp_ball(2, 4.0).unwrap()] {
        let r = floating_body_with(&body, 0.05, 720, &quick()).unwrap();
        let poly = r.hull.polygon().unwrap();
        let n = poly.len();
        let mut total = 0.0;
        for i in 0..n {
            let a = poly.edge_normal(i);
            let b = poly.edge_normal((i + 1) % n);
            let turn = (a.x * b.y - a.y * b.x).atan2(a.dot(&b));
            assert!(turn > 0.0);
            total += turn;
        }
        assert!((total - 2.0 * PI).abs() < 1e-9);
    }
}

#[test]
fn ellipsoid_floating_body_in_space() {
    let body = BodySpec::ellipsoid_axes(&[2.0, 1.0, 1.0]).unwrap();
    let r = floating_body_with(&body, 0.05 * body.volume(), 400, &quick()).unwrap();
    assert!(r.contained_in_source);
    // the floating body of an ellipsoid is the homothetic ellipsoid; the
    // cut level is c·h_K(u) with one c for all directions
    let ratios: Vec<f64> =
        r.directions.iter().zip(&r.support_levels).map(|(u, t)| t / body.support(u).unwrap()).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi - lo < 1e-8, "{lo} {hi}");
}
