//! The curvature matrix Q of a hyperplane section, the Gauss curvature of
//! the floating body derived from it, and the small-δ limit ratio.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::body::{unit_ball_volume, BodySpec, Point};
use crate::cap::{CapConfig, CapSolver};
use crate::directions;
use crate::error::{Error, Result};
use crate::floating::{floating_body_from, FloatingHull};
use crate::roots::golden_section_min;

/// Default number of S¹ nodes for three-dimensional Q matrices.
pub const DEFAULT_NODES: usize = 256;

/// The (n−1)×(n−1) section matrix at (x, ξ).
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    pub entries: DMatrix<f64>,
    pub base_point: Point,
    pub slice_normal: Point,
    /// (n−1)-volume of K ∩ H(x, ξ).
    pub slice_volume: f64,
    pub quadrature_nodes: usize,
}

impl QMatrix {
    pub fn det(&self) -> f64 {
        self.entries.determinant()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// cot β at a boundary hit point y with outer normal N, for the in-plane
/// direction η and slice normal ξ: ⟨N, ξ⟩ / ⟨N, η⟩.
pub fn cot_beta(normal: &[f64], xi: &[f64], eta: &[f64]) -> Result<f64> {
    let across = dot(normal, eta);
    if !(across > 0.0) {
        return Err(Error::Numeric {
            message: format!("boundary normal does not point along the section ray (⟨N,η⟩ = {across})"),
            lo: across,
            hi: across,
        });
    }
    Ok(dot(normal, xi) / across)
}

/// Orthonormal basis of ξ^⊥.
fn frame(xi: &[f64]) -> Vec<Point> {
    if xi.len() == 2 {
        return vec![vec![-xi[1], xi[0]]];
    }
    let k = (0..3).min_by(|&a, &b| xi[a].abs().total_cmp(&xi[b].abs())).unwrap_or(0);
    let mut a = vec![0.0; 3];
    a[k] = 1.0;
    let s = dot(&a, xi);
    let mut e1: Vec<f64> = (0..3).map(|i| a[i] - s * xi[i]).collect();
    let l = norm(&e1);
    e1.iter_mut().for_each(|v| *v /= l);
    let e2 = vec![xi[1] * e1[2] - xi[2] * e1[1], xi[2] * e1[0] - xi[0] * e1[2], xi[0] * e1[1] - xi[1] * e1[0]];
    vec![e1, e2]
}

struct Hit {
    r: f64,
    cot: f64,
}

fn hit(body: &BodySpec, x: &[f64], xi: &[f64], eta: &[f64]) -> Result<Hit> {
    let r = body.ray_exit(x, eta)?;
    let y: Vec<f64> = x.iter().zip(eta).map(|(a, b)| a + r * b).collect();
    let normal = body.normal_at(&y)?;
    Ok(Hit { r, cot: cot_beta(&normal, xi, eta)? })
}

fn check_section(body: &BodySpec, x: &[f64], xi: &[f64]) -> Result<()> {
    let n = body.dim();
    if n != 2 && n != 3 {
        return Err(Error::unsupported(format!("Q matrices are implemented for n = 2, 3 (got {n})")));
    }
    if x.len() != n || xi.len() != n {
        return Err(Error::input("dimension mismatch"));
    }
    if (norm(xi) - 1.0).abs() > 1e-12 {
        return Err(Error::input("slice normal is not a unit vector"));
    }
    if !(body.gauge(x) < 1.0 - 1e-12) {
        return Err(Error::input("base point is not strictly inside the body"));
    }
    Ok(())
}

/// Q(i,j) = |K ∩ H|⁻¹ ∫_{S^{n−2}} η_i η_j r(η)ⁿ cot β(η) dσ(η).
///
/// In the plane S⁰ is the pair ±e and the integral is a sum; in space the
/// periodic trapezoid rule with `nodes` points is used on S¹.
pub fn q_matrix(body: &BodySpec, x: &[f64], xi: &[f64], nodes: usize) -> Result<QMatrix> {
    check_section(body, x, xi)?;
    let n = body.dim();
    let basis = frame(xi);
    let (entries, slice_volume, used) = if n == 2 {
        let e = &basis[0];
        let minus: Vec<f64> = e.iter().map(|v| -v).collect();
        let a = hit(body, x, xi, e)?;
        let b = hit(body, x, xi, &minus)?;
        let chord = a.r + b.r;
        let q = (a.r * a.r * a.cot + b.r * b.r * b.cot) / chord;
        (DMatrix::from_element(1, 1, q), chord, 2)
    } else {
        if nodes < 8 {
            return Err(Error::input("at least 8 quadrature nodes are required"));
        }
        let hits: Vec<(f64, Hit)> = (0..nodes)
            .into_par_iter()
            .map(|k| {
                let th = 2.0 * PI * k as f64 / nodes as f64;
                let (c, s) = (th.cos(), th.sin());
                let eta: Vec<f64> = (0..3).map(|i| c * basis[0][i] + s * basis[1][i]).collect();
                hit(body, x, xi, &eta).map(|h| (th, h))
            })
            .collect::<Result<_>>()?;
        let w = 2.0 * PI / nodes as f64;
        let mut m = [[0.0; 2]; 2];
        let mut area = 0.0;
        for (th, h) in &hits {
            let eta = [th.cos(), th.sin()];
            let f = h.r.powi(3) * h.cot;
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += w * eta[i] * eta[j] * f;
                }
            }
            area += w * 0.5 * h.r * h.r;
        }
        let entries = DMatrix::from_fn(2, 2, |i, j| m[i][j] / area);
        (entries, area, nodes)
    };
    Ok(QMatrix {
        entries,
        base_point: x.to_vec(),
        slice_normal: xi.to_vec(),
        slice_volume,
        quadrature_nodes: used,
    })
}

/// Centroid of the section K ∩ {⟨y,u⟩ = t}, for t strictly between the
/// extreme levels in direction u.
pub fn section_centroid(body: &BodySpec, u: &[f64], t: f64, nodes: usize) -> Result<Point> {
    let top = body.boundary_point(u)?;
    let minus: Vec<f64> = u.iter().map(|v| -v).collect();
    let bottom = body.boundary_point(&minus)?;
    let (ht, hb) = (dot(&top, u), dot(&bottom, u));
    if !(t < ht && t > hb) {
        return Err(Error::domain(format!("section level {t} is outside ({hb}, {ht})")));
    }
    let s = (t - hb) / (ht - hb);
    let x0: Vec<f64> = bottom.iter().zip(&top).map(|(b, a)| b + s * (a - b)).collect();
    let basis = frame(u);
    if u.len() == 2 {
        let e = &basis[0];
        let minus_e: Vec<f64> = e.iter().map(|v| -v).collect();
        let a = body.ray_exit(&x0, e)?;
        let b = body.ray_exit(&x0, &minus_e)?;
        let shift = 0.5 * (a - b);
        return Ok(x0.iter().zip(e).map(|(p, q)| p + shift * q).collect());
    }
    let mut area = 0.0;
    let mut first = [0.0; 2];
    let mut failure = None;
    let w = 2.0 * PI / nodes as f64;
    for k in 0..nodes {
        let th = 2.0 * PI * k as f64 / nodes as f64;
        let (c, sn) = (th.cos(), th.sin());
        let eta: Vec<f64> = (0..3).map(|i| c * basis[0][i] + sn * basis[1][i]).collect();
        match body.ray_exit(&x0, &eta) {
            Ok(r) => {
                area += w * 0.5 * r * r;
                first[0] += w * r.powi(3) / 3.0 * c;
                first[1] += w * r.powi(3) / 3.0 * sn;
            }
            Err(e) => failure = Some(e),
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let (a, b) = (first[0] / area, first[1] / area);
    Ok((0..3).map(|i| x0[i] + a * basis[0][i] + b * basis[1][i]).collect())
}

/// The value returned in place of an unbounded curvature.
pub const INFINITE_CURVATURE: f64 = f64::INFINITY;

/// 1/det Q with the +∞ sentinel below `tol_det`; a determinant below
/// −`tol_det` is an error.
pub fn curvature_from_det(det: f64, tol_det: f64) -> Result<f64> {
    if det < -tol_det {
        return Err(Error::NotPositiveDefinite { det });
    }
    if det <= tol_det {
        return Ok(INFINITE_CURVATURE);
    }
    Ok(1.0 / det)
}

/// Gauss curvature of ∂K_δ at the point x_δ with outer normal u.
///
/// x_δ is the centroid of the cutting section at level t(u, δ); the
/// curvature is 1/det Q(x_δ, u).
pub fn floating_curvature(body: &BodySpec, delta: f64, u: &[f64]) -> Result<f64> {
    floating_curvature_with(body, delta, u, &CapConfig::default(), DEFAULT_NODES)
}

pub fn floating_curvature_with(body: &BodySpec, delta: f64, u: &[f64], cfg: &CapConfig, nodes: usize) -> Result<f64> {
    let solver = CapSolver::new(body, *cfg);
    let vol = solver.volume();
    if !(delta > 0.0 && delta < 0.5 * vol) {
        return Err(Error::domain(format!("delta must lie in (0, |K|/2) = (0, {}) (got {delta})", 0.5 * vol)));
    }
    let n = body.dim();
    let cut = solver.cut_level(u, delta)?;
    let x = section_centroid(body, u, cut.level, nodes)?;
    let q = q_matrix(body, &x, u, nodes)?;
    let tol_det = 1e-12 * body.diameter_bound().powi(n as i32 - 1);
    curvature_from_det(q.det(), tol_det)
}

/// c_n = 2 (|B^{n−1}₂| / (n+1))^{2/(n+1)}.
pub fn c_constant(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("c_n needs n >= 2 (got {n})")));
    }
    let e = 2.0 / (n as f64 + 1.0);
    Ok(2.0 * (unit_ball_volume(n - 1) / (n as f64 + 1.0)).powf(e))
}

/// Direction count used by [`limit_ratio`] at cap volume δ.
pub fn limit_directions(delta: f64) -> usize {
    720usize.max((50.0 * delta.powf(-1.0 / 3.0)).ceil() as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitRatio {
    pub ratio: f64,
    /// x_δ = ∂K_δ ∩ [0, x] in the re-centered frame.
    pub x_delta: Point,
    pub directions: usize,
}

/// c_n ⟨x,N(x)⟩ / (n δ^{2/(n+1)}) · [1 − (‖x_δ‖/‖x‖)ⁿ], which tends to
/// κ(x)^{1/(n+1)} as δ → 0.
pub fn limit_ratio(body: &BodySpec, x: &[f64], delta: f64) -> Result<f64> {
    limit_ratio_detail(body, x, delta).map(|r| r.ratio)
}

pub fn limit_ratio_detail(body: &BodySpec, x: &[f64], delta: f64) -> Result<LimitRatio> {
    let n = body.dim();
    if n != 2 && n != 3 {
        return Err(Error::unsupported(format!("limit ratio is implemented for n = 2, 3 (got {n})")));
    }
    if x.len() != n {
        return Err(Error::input("dimension mismatch"));
    }
    if !body.is_on_boundary(x) {
        return Err(Error::input("limit ratio needs a boundary point"));
    }
    let normal = body.normal_at(x)?;
    let c = body.centroid();
    let centered = body.recentered();
    let x: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
    let vol = centered.volume();
    if !(delta > 0.0 && delta < 0.5 * vol) {
        return Err(Error::domain(format!("delta must lie in (0, |K|/2) = (0, {}) (got {delta})", 0.5 * vol)));
    }
    let cfg = CapConfig { tol_vol_rel: (1e-10f64).min(1e-9 * delta / vol), ..Default::default() };
    let solver = CapSolver::new(&centered, cfg);
    let m = limit_directions(delta);
    let fb = floating_body_from(&solver, delta, m)?;
    let len = norm(&x);
    let xhat: Vec<f64> = x.iter().map(|v| v / len).collect();
    let origin = vec![0.0; n];
    let mut s = match &fb.hull {
        FloatingHull::Polygon(_) => {
            let table = crate::floating::HalfspaceTable {
                directions: fb.directions.clone(),
                levels: fb.support_levels.clone(),
            };
            table.ray_exit(&origin, &xhat)
        }
        FloatingHull::Table(t) => t.ray_exit(&origin, &xhat),
    };
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::Numeric { message: "ray search did not bracket the floating boundary".into(), lo: 0.0, hi: len });
    }
    if n == 2 {
        // The radial function of K_δ is inf_u t(u)/⟨x̂,u⟩; refine the
        // discrete minimum over the neighbouring angular cell.
        let best = fb
            .directions
            .iter()
            .zip(&fb.support_levels)
            .enumerate()
            .filter(|(_, (u, _))| dot(u, &xhat) > 0.0)
            .min_by(|a, b| (a.1 .1 / dot(a.1 .0, &xhat)).total_cmp(&(b.1 .1 / dot(b.1 .0, &xhat))))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let step = 2.0 * PI / m as f64;
        let th0 = 2.0 * PI * best as f64 / m as f64;
        let mut failure = None;
        let (_, refined) = golden_section_min(
            |th| {
                let u = [th.cos(), th.sin()];
                match solver.cut_level(&u, delta) {
                    Ok(cut) => cut.level / dot(&u, &xhat),
                    Err(e) => {
                        failure = Some(e);
                        f64::INFINITY
                    }
                }
            },
            th0 - step,
            th0 + step,
            1e-9,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        s = s.min(refined);
    }
    let cn = c_constant(n)?;
    let nf = n as f64;
    let ratio = cn * dot(&x, &normal) / (nf * delta.powf(2.0 / (nf + 1.0))) * (1.0 - (s / len).powi(n as i32));
    Ok(LimitRatio { ratio, x_delta: xhat.iter().map(|v| v * s).collect(), directions: m })
}

/// Boundary points at the standard direction family, by radial exit from
/// the centroid.
pub fn boundary_samples(body: &BodySpec, m: usize) -> Result<Vec<Point>> {
    let c = body.centroid();
    directions::family(body.dim(), m)
        .iter()
        .map(|w| {
            let lam = body.ray_exit(&c, w)?;
            Ok(c.iter().zip(w).map(|(a, b)| a + lam * b).collect())
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn disk_q() {
        let d = BodySpec::disk();
        for c in [0.6, 0.8] {
            let q = q_matrix(&d, &[0.0, c], &[0.0, 1.0], 0).unwrap();
            assert_relative_eq!(q.entries[(0, 0)], c, epsilon = 1e-12);
        }
        let q = q_matrix(&d, &[0.0, 0.0], &[0.0, 1.0], 0).unwrap();
        assert!(q.entries[(0, 0)].abs() < 1e-15);
        assert!(q_matrix(&d, &[0.0, 1.0], &[0.0, 1.0], 0).is_err());
    }

    #[test]
    fn ball_q_is_scalar() {
        let b = BodySpec::lp_ball(3, 2.0).unwrap();
        let q = q_matrix(&b, &[0.0, 0.0, 0.5], &[0.0, 0.0, 1.0], 64).unwrap();
        assert_relative_eq!(q.entries[(0, 0)], 0.5, epsilon = 1e-10);
        assert_relative_eq!(q.entries[(1, 1)], 0.5, epsilon = 1e-10);
        assert!(q.entries[(0, 1)].abs() < 1e-10);
        assert_relative_eq!(q.slice_volume, PI * 0.75, epsilon = 1e-10);
    }

    #[test]
    fn floating_disk_curvature() {
        let k = floating_curvature(&BodySpec::disk(), 0.2, &[0.0, 1.0]).unwrap();
        assert_relative_eq!(k, 1.0 / 0.770_518_544_160_34, epsilon = 1e-8);
    }

    #[test]
    fn corner_hyperbola() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let k = floating_curvature(&BodySpec::square(), 0.02, &[s, s]).unwrap();
        assert_relative_eq!(k * 0.02f64.sqrt(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn sentinel_and_sign() {
        assert_eq!(curvature_from_det(1e-13, 1e-12).unwrap(), f64::INFINITY);
        assert!(matches!(curvature_from_det(-1e-3, 1e-12), Err(Error::NotPositiveDefinite { .. })));
        let near_half = floating_curvature(&BodySpec::disk(), PI / 2.0 - 1e-6, &[1.0, 0.0]).unwrap();
        assert!(near_half > 1e5);
    }

    #[test]
    fn constants() {
        assert_relative_eq!(c_constant(2).unwrap(), 2.0 * (2.0f64 / 3.0).powf(2.0 / 3.0), epsilon = 1e-14);
        assert_relative_eq!(c_constant(3).unwrap(), PI.sqrt(), epsilon = 1e-14);
        assert!(c_constant(1).is_err());
    }

    #[test]
    fn disk_limit() {
        let r = limit_ratio(&BodySpec::disk(), &[0.0, 1.0], 1e-3).unwrap();
        // (c₂/2)(1 − t²)/δ^{2/3} with t the exact cut level
        assert_relative_eq!(r, 0.997_376_308_443_577_6, epsilon = 1e-6);
    }

    #[test]
    fn section_centroid_ball() {
        let b = BodySpec::ellipsoid_axes(&[1.0, 1.0, 1.0]).unwrap();
        let s = 0.6f64.sqrt();
        let u = [s, 0.0, (1.0 - s * s).sqrt()];
        let c = section_centroid(&b, &u, 0.3, 64).unwrap();
        for i in 0..3 {
            assert_relative_eq!(c[i], 0.3 * u[i], epsilon = 1e-12);
        }
    }
}
