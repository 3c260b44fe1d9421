//! Planar illumination bodies, convolution bodies and Santaló regions.
//!
//! Each body is traced along `rays` directions from a center: the
//! centroid for illumination and convolution bodies, the minimizer of the
//! polar area for Santaló regions. The boundary radius on each ray is the
//! root of a monotone one-dimensional function and the hull is assembled
//! from the boundary points.

use std::f64::consts::PI;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::polygon::{halfplane_intersection, signed_area, unit, HalfPlane, PolygonChain, Vec2};
use crate::roots::{bracketed_root, golden_section_min, RootOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Illumination,
    Convolution,
    Santalo,
}

impl GenKind {
    pub fn name(self) -> &'static str {
        match self {
            GenKind::Illumination => "illumination",
            GenKind::Convolution => "convolution",
            GenKind::Santalo => "santalo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenShape {
    Polygon(PolygonChain),
    /// The body collapsed to a single point (all ray radii vanish).
    Point(Vec2),
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenBodyResult {
    pub kind: GenKind,
    pub parameter: f64,
    pub shape: GenShape,
    pub ray_count: usize,
    pub center: Vec2,
    /// Boundary radius along each ray from `center`.
    pub radii: Vec<f64>,
}

impl GenBodyResult {
    pub fn polygon(&self) -> Option<&PolygonChain> {
        match &self.shape {
            GenShape::Polygon(p) => Some(p),
            _ => None,
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }

    /// Membership with an absolute slack.
    pub fn contains(&self, x: &Vec2, tol: f64) -> bool {
        match &self.shape {
            GenShape::Polygon(p) => p.contains(x, tol),
            GenShape::Point(c) => (x - c).norm() <= tol,
            GenShape::Empty => false,
        }
    }
}

/// Exact area of P ∩ Q.
pub fn polygon_intersection_area(p: &PolygonChain, q: &PolygonChain) -> f64 {
    p.intersection_area(q)
}

/// |P ∩ (P + v)|, by intersecting the paired edge half-planes.
pub fn translate_overlap(p: &PolygonChain, v: &Vec2) -> f64 {
    let verts = p.vertices();
    let planes: Vec<HalfPlane> = (0..verts.len())
        .map(|i| {
            let n = p.edge_normal(i);
            let h = verts[i].dot(&n);
            HalfPlane::new(n, h + v.dot(&n).min(0.0))
        })
        .collect();
    match halfplane_intersection(&planes) {
        Ok(q) => q.area(),
        Err(_) => 0.0,
    }
}

fn check_rays(rays: usize) -> Result<()> {
    if rays < 3 {
        return Err(Error::input(format!("at least 3 rays are required (got {rays})")));
    }
    Ok(())
}

/// Root options for a ray radius on a body of size `scale`.
fn radius_opts(scale: f64) -> RootOptions {
    RootOptions { f_tol: 0.0, x_tol: 1e-13 * scale, max_iter: 300 }
}

fn assemble(kind: GenKind, parameter: f64, center: Vec2, radii: Vec<f64>, scale: f64) -> Result<GenBodyResult> {
    let rays = radii.len();
    let max = radii.iter().copied().fold(0.0, f64::max);
    let shape = if max <= 1e-12 * scale {
        GenShape::Point(center)
    } else {
        let pts: Vec<Vec2> = radii
            .iter()
            .enumerate()
            .map(|(k, r)| center + unit(2.0 * PI * k as f64 / rays as f64) * *r)
            .collect();
        GenShape::Polygon(PolygonChain::hull_of(&pts)?)
    };
    Ok(GenBodyResult { kind, parameter, shape, ray_count: rays, center, radii })
}

/// K^δ = {x : |conv(x, P)| − |P| <= δ}.
pub fn illumination_body(p: &PolygonChain, delta: f64, rays: usize) -> Result<GenBodyResult> {
    check_rays(rays)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("delta must be nonnegative (got {delta})")));
    }
    let c = p.centroid();
    if delta == 0.0 {
        let radii = (0..rays).map(|k| p.ray_exit(&c, &unit(2.0 * PI * k as f64 / rays as f64))).collect();
        return Ok(GenBodyResult {
            kind: GenKind::Illumination,
            parameter: delta,
            shape: GenShape::Polygon(p.clone()),
            ray_count: rays,
            center: c,
            radii,
        });
    }
    let scale = p.scale();
    let radii: Vec<f64> = (0..rays)
        .into_par_iter()
        .map(|k| {
            let u = unit(2.0 * PI * k as f64 / rays as f64);
            // the excess is increasing only beyond the boundary
            let lo = p.ray_exit(&c, &u);
            let g = |s: f64| p.hull_excess(&(c + u * s)) - delta;
            let mut hi = lo + scale.max(1e-300);
            while g(hi) <= 0.0 {
                hi = lo + 2.0 * (hi - lo);
            }
            bracketed_root(g, lo, hi, radius_opts(scale)).map(|r| r.x)
        })
        .collect::<Result<_>>()?;
    assemble(GenKind::Illumination, delta, c, radii, scale)
}

/// C(P, t) = {x/2 : |P ∩ (P + x)| >= 2t} for origin-symmetric P.
pub fn convolution_body(p: &PolygonChain, t: f64, rays: usize) -> Result<GenBodyResult> {
    check_rays(rays)?;
    let scale = p.scale();
    if !p.is_origin_symmetric(1e-9 * scale) {
        return Err(Error::domain("convolution bodies need an origin-symmetric polygon"));
    }
    let area = p.area();
    let tol = 1e-12 * area;
    if !(t > 0.0 && t <= 0.5 * area + tol) {
        return Err(Error::domain(format!("t must lie in (0, |P|/2] = (0, {}] (got {t})", 0.5 * area)));
    }
    let c = Vec2::zeros();
    let radii: Vec<f64> = (0..rays)
        .into_par_iter()
        .map(|k| {
            let u = unit(2.0 * PI * k as f64 / rays as f64);
            let trace = Mutex::new(Vec::new());
            let f = |s: f64| {
                let v = translate_overlap(p, &(u * (2.0 * s))) - 2.0 * t;
                trace.lock().expect("trace lock").push((s, v));
                v
            };
            if f(0.0) <= tol {
                return Ok(0.0);
            }
            let hi = 0.5 * (p.support(&u) + p.support(&-u));
            let s = bracketed_root(f, 0.0, hi, radius_opts(scale))?.x;
            check_nonincreasing(trace.into_inner().expect("trace lock"), tol)?;
            Ok(s)
        })
        .collect::<Result<_>>()?;
    assemble(GenKind::Convolution, t, c, radii, scale)
}

fn check_nonincreasing(mut trace: Vec<(f64, f64)>, tol: f64) -> Result<()> {
    trace.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in trace.windows(2) {
        if w[1].1 > w[0].1 + tol {
            return Err(Error::Consistency(format!(
                "self-overlap increased along a ray ({} at s = {}, {} at s = {})",
                w[0].1, w[0].0, w[1].1, w[1].0
            )));
        }
    }
    Ok(())
}

/// Area of the polar body (P − x)°.
pub fn polar_area(p: &PolygonChain, x: &Vec2) -> Result<f64> {
    let verts = p.vertices();
    let tol = 1e-14 * p.scale();
    let mut polar = Vec::with_capacity(verts.len());
    for (i, v) in verts.iter().enumerate() {
        let n = p.edge_normal(i);
        let h = (v - x).dot(&n);
        if !(h > tol) {
            return Err(Error::domain("polar area needs a point strictly inside the polygon"));
        }
        polar.push(n / h);
    }
    Ok(signed_area(&polar))
}

/// Polar area that is +∞ outside the interior; convenient inside searches.
fn polar_or_inf(p: &PolygonChain, x: &Vec2) -> f64 {
    polar_area(p, x).unwrap_or(f64::INFINITY)
}

/// Minimizer of x ↦ |(P − x)°| by coordinate descent with golden-section
/// line searches, started from the centroid.
pub fn polar_minimizer(p: &PolygonChain) -> (Vec2, f64) {
    let mut x = p.centroid();
    let mut fx = polar_or_inf(p, &x);
    let scale = p.scale();
    let axes = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
    for _ in 0..200 {
        let before = x;
        for e in &axes {
            let hi = p.ray_exit(&x, e) * (1.0 - 1e-9);
            let lo = -p.ray_exit(&x, &-e) * (1.0 - 1e-9);
            let (s, fs) = golden_section_min(|s| polar_or_inf(p, &(x + e * s)), lo, hi, 1e-12 * scale);
            if fs < fx {
                x += e * s;
                fx = fs;
            }
        }
        if (x - before).norm() <= 1e-10 * scale {
            break;
        }
    }
    (x, fx)
}

/// S(P, t) = {x ∈ P : |(P − x)°| <= 1/t}.
pub fn santalo_region(p: &PolygonChain, t: f64, rays: usize) -> Result<GenBodyResult> {
    check_rays(rays)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("t must be positive (got {t})")));
    }
    let scale = p.scale();
    let bound = 1.0 / t;
    let (c, fmin) = polar_minimizer(p);
    if fmin > bound * (1.0 + 1e-12) {
        return Ok(GenBodyResult {
            kind: GenKind::Santalo,
            parameter: t,
            shape: GenShape::Empty,
            ray_count: rays,
            center: c,
            radii: Vec::new(),
        });
    }
    let radii: Vec<f64> = (0..rays)
        .into_par_iter()
        .map(|k| {
            let u = unit(2.0 * PI * k as f64 / rays as f64);
            let g = |s: f64| polar_or_inf(p, &(c + u * s)) - bound;
            if g(0.0) >= 0.0 {
                return Ok(0.0);
            }
            let hi = p.ray_exit(&c, &u) * (1.0 - 1e-12);
            bracketed_root(g, 0.0, hi, radius_opts(scale)).map(|r| r.x)
        })
        .collect::<Result<_>>()?;
    assemble(GenKind::Santalo, t, c, radii, scale)
}

/// Regular N-gon centered at the origin with area exactly π; the planar
/// stand-in for the unit disk.
pub fn disk_polygon(n: usize) -> PolygonChain {
    let r = (2.0 * PI / (n as f64 * (2.0 * PI / n as f64).sin())).sqrt();
    PolygonChain::regular(n, r)
}

/// Euclidean distance from x to the boundary of a convex polygon.
pub fn boundary_distance(p: &PolygonChain, x: &Vec2) -> f64 {
    let v = p.vertices();
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            let d = b - a;
            let s = ((x - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            (a + d * s - x).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> PolygonChain {
        PolygonChain::rectangle(1.0, 1.0)
    }

    #[test]
    fn intersection_examples() {
        let s = square();
        assert_relative_eq!(polygon_intersection_area(&s, &s), 4.0, epsilon = 1e-14);
        assert_relative_eq!(translate_overlap(&s, &Vec2::new(1.0, 0.0)), 2.0, epsilon = 1e-14);
        let r2 = 2f64.sqrt();
        let rot = PolygonChain::new(vec![
            Vec2::new(r2, 0.0),
            Vec2::new(0.0, r2),
            Vec2::new(-r2, 0.0),
            Vec2::new(0.0, -r2),
        ])
        .unwrap();
        assert_relative_eq!(polygon_intersection_area(&s, &rot), 8.0 * (r2 - 1.0), epsilon = 1e-13);
        assert_eq!(translate_overlap(&s, &Vec2::new(3.0, 0.0)), 0.0);
    }

    #[test]
    fn square_rays() {
        let s = square();
        let ill = illumination_body(&s, 0.1, 8).unwrap();
        assert_relative_eq!(ill.radii[0], 1.1, epsilon = 1e-12);
        let conv = convolution_body(&s, 1.0, 8).unwrap();
        assert_relative_eq!(conv.radii[0], 0.5, epsilon = 1e-12);
        assert_eq!(illumination_body(&s, 0.0, 8).unwrap().polygon(), Some(&s));
        assert!(illumination_body(&s, -1.0, 8).is_err());
    }

    #[test]
    fn polar_examples() {
        assert_relative_eq!(polar_area(&square(), &Vec2::zeros()).unwrap(), 2.0, epsilon = 1e-14);
        let d = disk_polygon(4096);
        assert_relative_eq!(d.area(), PI, epsilon = 1e-12);
        assert_relative_eq!(polar_area(&d, &Vec2::zeros()).unwrap(), PI, epsilon = 1e-5);
        assert_relative_eq!(polar_area(&d, &Vec2::new(0.6, 0.0)).unwrap(), PI / 0.64f64.powf(1.5), epsilon = 1e-3);
        assert!(polar_area(&square(), &Vec2::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn asymmetric_and_empty() {
        let tri = PolygonChain::new(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap();
        assert!(matches!(convolution_body(&tri, 0.1, 16), Err(Error::Domain(_))));
        let s = santalo_region(&square(), 1.0, 16).unwrap();
        assert_eq!(s.shape, GenShape::Empty);
    }
}
