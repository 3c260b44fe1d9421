//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when
//! any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::{Duration, Instant};

use floatlab_core::curvature::{floating_curvature, limit_ratio, q_matrix};
use floatlab_core::floating::{apply_affine, floating_body_with, FloatingOptions};
use floatlab_core::genbody::{
    boundary_distance, convolution_body, disk_polygon, illumination_body, polar_area, polygon_intersection_area,
    santalo_region, GenBodyResult, GenShape,
};
use floatlab_core::homothety::{homothety_defect, petty_scan};
use floatlab_core::polygon::{hausdorff, PolygonChain, Vec2};
use floatlab_core::threshold::{threshold, ThresholdInputs};
use floatlab_core::{lp_curvature, BodySpec};
use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Plain bisection for a root of a monotone scalar function.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Level t with |B²₂ ∩ {y >= t}| = δ.
fn disk_cut(delta: f64) -> f64 {
    bisect(|t| t.acos() - t * (1.0 - t * t).sqrt() - delta, -1.0, 1.0)
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn criterion_1() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for delta in [0.05, 0.2, 1.0] {
        let start = Instant::now();
        let r = match homothety_defect(&BodySpec::disk(), delta, 720) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("δ={delta}: {e}")),
        };
        let took = start.elapsed();
        let root = disk_cut(delta);
        let good = r.defect <= 1e-3 && (r.c - root).abs() <= 1e-5 && took < Duration::from_secs(5);
        ok &= good;
        parts.push(format!("δ={delta}: defect={:.2e} |c−t*|={:.2e} {}", r.defect, (r.c - root).abs(), secs(took)));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.5, 3.0, 4.0] {
        let body = BodySpec::lp_ball(2, p).unwrap();
        let (a, b) = match (homothety_defect(&body, 0.05, 1440), homothety_defect(&body, 0.05, 2880)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return outcome(false, format!("p={p}: {e}")),
        };
        // "does not shrink": the finer defect stays within the coarse
        // run's discretization uncertainty of it or above
        let slack = 5.0 * a.discretization_error;
        let good = a.defect >= 5e-3 && b.defect >= a.defect - slack;
        ok &= good;
        parts.push(format!("p={p}: defect(1440)={:.4e} defect(2880)={:.4e}", a.defect, b.defect));
    }
    let took = start.elapsed();
    ok &= took < Duration::from_secs(30);
    parts.push(secs(took));
    outcome(ok, parts.join("; "))
}

fn transform(poly: &PolygonChain, t: &DMatrix<f64>) -> PolygonChain {
    poly.transform(&Matrix2::new(t[(0, 0)], t[(0, 1)], t[(1, 0)], t[(1, 1)]), &Vec2::zeros())
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = FloatingOptions { estimate_error: false, ..Default::default() };
    let m = 720;
    let delta = 0.2;
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut count = 0;
    let bodies = [("square", BodySpec::square()), ("B4", BodySpec::lp_ball(2, 4.0).unwrap())];
    for (name, body) in &bodies {
        let base_m = floating_body_with(body, delta, m, &opts).unwrap();
        let base_2m = floating_body_with(body, delta, 2 * m, &opts).unwrap();
        let mut k = 0;
        while k < 20 {
            let t = DMatrix::<f64>::from_fn(2, 2, |_, _| rng.random_range(-1.5..1.5));
            let det = t.determinant().abs();
            let sv = t.clone().svd(false, false).singular_values;
            if det < 0.3 || sv[0] / sv[1] > 8.0 {
                continue;
            }
            k += 1;
            count += 1;
            let tk = apply_affine(body, &t, &DVector::zeros(2)).unwrap();
            let lhs_m = floating_body_with(&tk, delta * det, m, &opts).unwrap();
            let lhs_2m = floating_body_with(&tk, delta * det, 2 * m, &opts).unwrap();
            let lhs = lhs_m.hull.polygon().unwrap();
            let rhs = transform(base_m.hull.polygon().unwrap(), &t);
            let rhs_fine = transform(base_2m.hull.polygon().unwrap(), &t);
            let err_l = 4.0 / 3.0 * hausdorff(lhs, lhs_2m.hull.polygon().unwrap()).unwrap();
            let err_r = 4.0 / 3.0 * hausdorff(&rhs, &rhs_fine).unwrap();
            let d = hausdorff(lhs, &rhs).unwrap();
            let ratio = d / (err_l + err_r);
            worst = worst.max(ratio);
            if d > 5.0 * (err_l + err_r) {
                failures += 1;
                eprintln!("  {name}: T={t:?} hausdorff={d:.3e} errors=({err_l:.3e}, {err_r:.3e})");
            }
        }
    }
    outcome(failures == 0, format!("{count} maps, worst hausdorff/error ratio {worst:.3} (limit 5)"))
}

fn criterion_4() -> Outcome {
    let disk = BodySpec::disk();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for c in [0.2, 0.5, 0.9] {
        match q_matrix(&disk, &[0.0, c], &[0.0, 1.0], 0) {
            Ok(q) => worst = worst.max((q.entries[(0, 0)] - c).abs()),
            Err(e) => return outcome(false, format!("c={c}: {e}")),
        }
    }
    ok &= worst <= 1e-10;
    let root = disk_cut(0.2);
    let k = floating_curvature(&disk, 0.2, &[0.0, 1.0]).unwrap();
    let gap = (k - 1.0 / root).abs();
    ok &= gap <= 1e-4;
    outcome(
        ok,
        format!("max |Q−c|={worst:.2e}; κ(δ=0.2)={k:.8} vs 1/t*={:.8} (t*={root:.8}), gap {gap:.2e}", 1.0 / root),
    )
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for delta in [0.02, 0.005] {
        let k = floating_curvature(&BodySpec::square(), delta, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        let v = k * delta.sqrt();
        ok &= (v - 1.0).abs() <= 0.02;
        parts.push(format!("δ={delta}: κ√δ={v:.6}"));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    let cases = [
        ("disk", BodySpec::disk(), vec![0.0, 1.0], 1.0f64),
        ("ellipse(2,1)", BodySpec::ellipse(2.0, 1.0).unwrap(), vec![2.0, 0.0], 2f64.cbrt()),
    ];
    for (name, body, x, target) in &cases {
        let mut errs = Vec::new();
        for k in 2..=5 {
            let delta = 10f64.powi(-k);
            match limit_ratio(body, x, delta) {
                Ok(r) => errs.push((r - target).abs()),
                Err(e) => return outcome(false, format!("{name} δ=1e-{k}: {e}")),
            }
        }
        let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
        let last = errs[errs.len() - 1] / target;
        ok &= decreasing && last <= 0.01;
        let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
        parts.push(format!("{name}: errors [{}] final rel {last:.2e}", shown.join(", ")));
    }
    let took = start.elapsed();
    ok &= took < Duration::from_secs(60);
    parts.push(secs(took));
    outcome(ok, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (a, b) = (rng.random_range(0.3..3.0), rng.random_range(0.3..3.0));
        let th: f64 = rng.random_range(0.0..PI);
        let rot = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0 / (a * a), 1.0 / (b * b)]));
        let shape = &rot * diag * rot.transpose();
        let center = DVector::from_vec(vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        let body = BodySpec::ellipsoid(shape, center).unwrap();
        let scan = petty_scan(&body, 256).unwrap();
        let hi = scan.samples.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
        let lo = scan.samples.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
        worst = worst.max(hi / lo - 1.0);
    }
    let b4 = petty_scan(&BodySpec::lp_ball(2, 4.0).unwrap(), 256).unwrap();
    let zero_at_axis = b4.samples.iter().any(|s| s.curvature == 0.0 && s.point[1].abs() < 1e-15);
    let ok = worst <= 1e-6 && b4.degenerate && b4.tau.is_infinite() && zero_at_axis;
    outcome(ok, format!("ellipse max/min − 1 = {worst:.2e}; B4 degenerate={} τ={}", b4.degenerate, b4.tau))
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn criterion_8() -> Outcome {
    let base = ThresholdInputs { n: 2, tau: 2.0, t_max: 1.0, r_m: 1.0, r_cap_m: 1.0, d: 1.0, rho_0: 0.5, r: 2.0 };
    let mut ok = true;
    let mut parts = Vec::new();

    let one = threshold(&ThresholdInputs { tau: 1.0, ..base }).unwrap();
    let zeros = one.a == 0.0 && one.delta_1 == 0.0 && one.delta_2 == 0.0 && one.delta_k == 0.0;
    ok &= zeros;
    parts.push(format!("τ=1 zeros {zeros}"));

    let r = threshold(&base).unwrap();
    let a_ref = (1.0 - (2.0f64 / 3.0).powi(3)).min((6.0f64 / 5.0).powi(3) - 1.0);
    let dip = 1.0 - (1.0 - (0.5f64 / 8.0).powi(2)).sqrt();
    let d0_ref = 0.5 * 2.0 * 2.0 / (2.0 * 2.0) * dip * dip;
    let ea = rel(r.a, a_ref);
    let ed = rel(r.delta_0, d0_ref);
    ok &= ea <= 1e-9 && ed <= 1e-9;
    ok &= (r.a - 0.70370).abs() < 5e-6 && (r.delta_0 - 1.911e-6).abs() < 5e-10;
    parts.push(format!("a={:.10} (rel {ea:.1e}); δ0={:.6e} (rel {ed:.1e})", r.a, r.delta_0));

    let seq: Vec<_> = [1.1, 1.01, 1.001].iter().map(|&tau| threshold(&ThresholdInputs { tau, ..base }).unwrap()).collect();
    let d1: Vec<f64> = seq.iter().map(|s| s.delta_1).collect();
    let d2: Vec<f64> = seq.iter().map(|s| s.delta_2).collect();
    // decreasing toward zero: each step at least halves the value, or the
    // value is already exactly zero
    let mono = |v: &[f64]| v.windows(2).all(|w| w[1] <= 0.5 * w[0] || (w[0] == 0.0 && w[1] == 0.0));
    ok &= mono(&d1) && mono(&d2);
    parts.push(format!("τ∈{{1.1,1.01,1.001}}: δ1=[{}] δ2=[{}]", list(&d1), list(&d2)));
    outcome(ok, parts.join("; "))
}

/// Curvature of {|x|^p + |y|^p = 1} from finite differences of
/// F(x, y) = |x|^p + |y|^p: central differences with one Richardson
/// extrapolation, step 1% of the distance to the nearer axis.
fn fd_curvature(p: f64, x: f64, y: f64) -> f64 {
    let f = |a: f64, b: f64| a.abs().powf(p) + b.abs().powf(p);
    let diffs = |h: f64| {
        let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let fy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        [fx, fy, fxx, fyy, fxy]
    };
    let h = 1e-2 * x.abs().min(y.abs());
    let (coarse, fine) = (diffs(h), diffs(0.5 * h));
    let d: Vec<f64> = (0..5).map(|i| (4.0 * fine[i] - coarse[i]) / 3.0).collect();
    let (fx, fy, fxx, fyy, fxy) = (d[0], d[1], d[2], d[3], d[4]);
    (fxx * fy * fy - 2.0 * fxy * fx * fy + fyy * fx * fx).abs() / (fx * fx + fy * fy).powf(1.5)
}

fn criterion_9() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in [1.5, 2.0, 3.0, 4.0] {
        for k in 0..100 {
            // stay off the coordinate axes, where p ≠ 2 is singular
            let th = 0.05 + (PI / 2.0 - 0.1) * (k as f64 + 0.5) / 100.0 + (k % 4) as f64 * PI / 2.0;
            let (c, s) = (th.cos(), th.sin());
            let nrm = (c.abs().powf(p) + s.abs().powf(p)).powf(1.0 / p);
            let (x, y) = (c / nrm, s / nrm);
            let exact = lp_curvature(2, p, &[x, y]).unwrap();
            worst = worst.max(rel(exact, fd_curvature(p, x, y)));
            count += 1;
        }
    }
    outcome(worst <= 1e-6, format!("{count} points, max relative gap {worst:.2e}"))
}

/// Grid cells whose definition-based membership disagrees with the hull
/// and lie more than one cell diagonal from its boundary.
fn grid_mismatches(res: &GenBodyResult, half: f64, inside: impl Fn(&Vec2) -> bool) -> usize {
    let poly = res.polygon().expect("polygon result");
    let step = 2.0 * half / 100.0;
    let diag = step * 2f64.sqrt();
    let mut bad = 0;
    for i in 0..=100 {
        for j in 0..=100 {
            let x = Vec2::new(-half + step * i as f64, -half + step * j as f64);
            if inside(&x) != poly.contains(&x, 0.0) && boundary_distance(poly, &x) > diag {
                bad += 1;
            }
        }
    }
    bad
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let disk = disk_polygon(4096);
    let rays = 720;
    let mut ok = true;
    let mut parts = Vec::new();
    let spread = |r: &GenBodyResult, target: f64| r.radii.iter().map(|v| (v - target).abs()).fold(0.0, f64::max);

    let d = bisect(|d| (d * d - 1.0).sqrt() - (1.0 / d).acos() - 0.1, 1.0, 3.0);
    let ill = illumination_body(&disk, 0.1, rays).unwrap();
    let e = spread(&ill, d);
    ok &= e <= 1e-3;
    parts.push(format!("illumination d*={d:.6} err {e:.1e}"));

    let w = disk_cut(0.2);
    let conv = convolution_body(&disk, 0.2, rays).unwrap();
    let e = spread(&conv, w);
    ok &= e <= 1e-3;
    parts.push(format!("convolution w*={w:.6} err {e:.1e}"));

    let conv0 = convolution_body(&disk, PI / 2.0, rays).unwrap();
    ok &= conv0.max_radius() <= 1e-3;
    parts.push(format!("C(π/2) radius {:.1e}", conv0.max_radius()));

    let r = (1.0 - 0.5f64.powf(2.0 / 3.0)).sqrt();
    let s = santalo_region(&disk, 0.5 / PI, rays).unwrap();
    let e = spread(&s, r) + s.center.norm();
    ok &= e <= 1e-3;
    parts.push(format!("santalo r*={r:.6} err {e:.1e}"));

    let s0 = santalo_region(&disk, 1.0 / PI, rays).unwrap();
    let r0 = match s0.shape {
        GenShape::Empty => f64::NAN,
        _ => s0.max_radius() + s0.center.norm(),
    };
    ok &= r0 <= 1e-3;
    parts.push(format!("S(1/π) radius {r0:.1e}"));

    let pa = polar_area(&disk, &Vec2::new(0.6, 0.0)).unwrap();
    let pa_ref = PI / (1.0 - 0.36f64).powf(1.5);
    ok &= (pa - pa_ref).abs() <= 1e-3;
    parts.push(format!("polar {pa:.6} vs {pa_ref:.6}"));

    let sq = PolygonChain::rectangle(1.0, 1.0);
    let ill = illumination_body(&sq, 0.5, rays).unwrap();
    let bad_i = grid_mismatches(&ill, 1.8, |x| sq.hull_excess(x) <= 0.5);
    let conv = convolution_body(&sq, 1.0, rays).unwrap();
    let bad_c = grid_mismatches(&conv, 1.0, |x| {
        polygon_intersection_area(&sq, &sq.translated(&(x * 2.0))) >= 2.0
    });
    let sant = santalo_region(&sq, 0.4, rays).unwrap();
    let bad_s = grid_mismatches(&sant, 1.0, |x| {
        sq.contains(x, 0.0) && polar_area(&sq, x).map(|a| a <= 2.5).unwrap_or(false)
    });
    ok &= bad_i + bad_c + bad_s == 0;
    parts.push(format!("square grid mismatches beyond one cell: {bad_i}/{bad_c}/{bad_s}"));
    parts.push(secs(start.elapsed()));
    outcome(ok, parts.join("; "))
}

fn main() {
    if let Ok(n) = std::env::var("FLOATLAB_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("disk homothety", criterion_1),
        ("non-homothety of B_p, p ≠ 2", criterion_2),
        ("affine equivariance", criterion_3),
        ("Q matrix on the disk", criterion_4),
        ("square corner hyperbola", criterion_5),
        ("small-δ limit ratio", criterion_6),
        ("Petty functional scans", criterion_7),
        ("threshold formulas", criterion_8),
        ("l_p curvature vs finite differences", criterion_9),
        ("generalized bodies", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
