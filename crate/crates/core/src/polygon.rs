//! Convex polygons in the plane: the concrete output form of every 2D
//! construction in the crate.

use nalgebra::{Matrix2, Vector2};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Number of directions sampled by [`hausdorff`].
pub const HAUSDORFF_DIRECTIONS: usize = 2048;

/// Lines closer to parallel than this (|cross| of unit normals) are treated as parallel.
const PARALLEL_EPS: f64 = 1e-14;

#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Unit vector at angle `theta`.
#[inline]
pub fn unit(theta: f64) -> Vec2 {
    Vec2::new(theta.cos(), theta.sin())
}

/// A convex polygon stored as a counterclockwise vertex chain, closed
/// implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonChain {
    vertices: Vec<Vec2>,
}

impl PolygonChain {
    /// Validates a convex vertex chain. Clockwise input is reversed;
    /// a reflex vertex is reported with its index.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::input(format!("polygon needs at least 3 vertices, got {}", vertices.len())));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::input("polygon vertex is not finite"));
        }
        let n = vertices.len();
        let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        for i in 0..n {
            let j = (i + 1) % n;
            if (vertices[i] - vertices[j]).norm() <= 1e-14 * scale {
                return Err(Error::input(format!("duplicate polygon vertices at indices {i} and {j}")));
            }
        }
        let mut verts = vertices;
        if signed_area(&verts) < 0.0 {
            verts.reverse();
            // report indices in the caller's order
            if let Some(k) = reflex_vertex(&verts, scale) {
                let orig = n - 1 - k;
                return Err(convexity_error(orig, n));
            }
        } else if let Some(k) = reflex_vertex(&verts, scale) {
            return Err(convexity_error(k, n));
        }
        if signed_area(&verts).abs() <= 1e-14 * scale * scale {
            return Err(Error::input("degenerate polygon (zero area)"));
        }
        if winding_turns(&verts) > 1 {
            return Err(Error::input("polygon chain winds more than once"));
        }
        Ok(PolygonChain { vertices: verts })
    }

    /// Convex hull of a point cloud (Andrew's monotone chain). Fails when
    /// the hull has no interior.
    pub fn hull_of(points: &[Vec2]) -> Result<Self> {
        let hull = convex_hull(points);
        if hull.len() < 3 || signed_area(&hull) <= 0.0 {
            return Err(Error::Degenerate("convex hull has empty interior".into()));
        }
        Ok(PolygonChain { vertices: hull })
    }

    /// Regular polygon with `n` vertices on the circle of radius `circumradius`,
    /// first vertex on the positive x axis.
    pub fn regular(n: usize, circumradius: f64) -> Self {
        assert!(n >= 3);
        let vertices = (0..n)
            .map(|k| unit(2.0 * PI * k as f64 / n as f64) * circumradius)
            .collect();
        PolygonChain { vertices }
    }

    /// Axis-aligned box [-a, a] x [-b, b].
    pub fn rectangle(a: f64, b: f64) -> Self {
        PolygonChain {
            vertices: vec![Vec2::new(a, -b), Vec2::new(a, b), Vec2::new(-a, b), Vec2::new(-a, -b)],
        }
    }

    pub(crate) fn from_ccw_unchecked(vertices: Vec<Vec2>) -> Self {
        PolygonChain { vertices }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len();
        let mut c = Vec2::zeros();
        let mut a2 = 0.0;
        // shift for conditioning
        let o = self.vertices[0];
        for i in 0..n {
            let p = self.vertices[i] - o;
            let q = self.vertices[(i + 1) % n] - o;
            let w = cross(&p, &q);
            a2 += w;
            c += (p + q) * w;
        }
        o + c / (3.0 * a2)
    }

    /// Support function evaluated for any (not necessarily unit) direction.
    pub fn support(&self, u: &Vec2) -> f64 {
        self.vertices.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Maximizer of ⟨·,u⟩; on an edge facing `u` the edge midpoint.
    pub fn support_point(&self, u: &Vec2) -> Vec2 {
        let h = self.support(u);
        let scale = self.scale() * u.norm();
        let tol = 1e-12 * scale.max(1e-300);
        let (sum, count) = self
            .vertices
            .iter()
            .filter(|v| v.dot(u) >= h - tol)
            .fold((Vec2::zeros(), 0usize), |(s, c), v| (s + v, c + 1));
        sum / count as f64
    }

    /// Largest vertex norm.
    pub fn scale(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Outward unit normal of edge i (from vertex i to i+1).
    pub fn edge_normal(&self, i: usize) -> Vec2 {
        let n = self.vertices.len();
        let d = self.vertices[(i + 1) % n] - self.vertices[i];
        Vec2::new(d.y, -d.x).normalize()
    }

    /// Membership with an absolute tolerance on the edge-line distance.
    pub fn contains(&self, p: &Vec2, tol: f64) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| (p - self.vertices[i]).dot(&self.edge_normal(i)) <= tol)
    }

    /// Minkowski gauge about `center`, which must be interior.
    pub fn gauge_about(&self, center: &Vec2, x: &Vec2) -> f64 {
        let n = self.vertices.len();
        let d = x - center;
        (0..n)
            .map(|i| {
                let nrm = self.edge_normal(i);
                d.dot(&nrm) / (self.vertices[i] - center).dot(&nrm)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimal width; attained at an edge normal.
    pub fn min_width(&self) -> f64 {
        (0..self.vertices.len())
            .map(|i| {
                let u = self.edge_normal(i);
                self.support(&u) + self.support(&-u)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn transform(&self, map: &Matrix2<f64>, shift: &Vec2) -> Self {
        let mut vertices: Vec<Vec2> = self.vertices.iter().map(|v| map * v + shift).collect();
        if map.determinant() < 0.0 {
            vertices.reverse();
        }
        PolygonChain { vertices }
    }

    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0);
        PolygonChain { vertices: self.vertices.iter().map(|v| v * c).collect() }
    }

    pub fn translated(&self, shift: &Vec2) -> Self {
        PolygonChain { vertices: self.vertices.iter().map(|v| v + shift).collect() }
    }

    /// Keeps the part {⟨x,n⟩ <= c}. Returns the clipped vertex list, which
    /// may have fewer than three points.
    pub fn clip_halfplane(&self, n: &Vec2, c: f64) -> Vec<Vec2> {
        clip_halfplane(&self.vertices, n, c)
    }

    /// Exact area of the intersection with another convex polygon.
    pub fn intersection_area(&self, other: &PolygonChain) -> f64 {
        let mut poly = self.vertices.clone();
        let m = other.vertices.len();
        for i in 0..m {
            if poly.len() < 3 {
                return 0.0;
            }
            let nrm = other.edge_normal(i);
            poly = clip_halfplane(&poly, &nrm, other.vertices[i].dot(&nrm));
        }
        if poly.len() < 3 {
            0.0
        } else {
            signed_area(&poly).max(0.0)
        }
    }

    /// Area of {x ∈ P : ⟨x,u⟩ >= t}.
    pub fn cap_area(&self, u: &Vec2, t: f64) -> f64 {
        let clipped = clip_halfplane(&self.vertices, &-u, -t);
        if clipped.len() < 3 {
            0.0
        } else {
            signed_area(&clipped).max(0.0)
        }
    }

    /// Excess area |conv(x, P)| − |P|; zero for x ∈ P.
    pub fn hull_excess(&self, x: &Vec2) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                // x strictly beyond edge (a, b) sees it; the triangle is then clockwise.
                let w = cross(&(b - a), &(x - a));
                if w < 0.0 {
                    -0.5 * w
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Point where the ray from `origin` (interior) along `dir` leaves P.
    pub fn ray_exit(&self, origin: &Vec2, dir: &Vec2) -> f64 {
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let nrm = self.edge_normal(i);
            let den = dir.dot(&nrm);
            if den > 0.0 {
                let s = (self.vertices[i] - origin).dot(&nrm) / den;
                best = best.min(s);
            }
        }
        best
    }

    /// Symmetric about the origin within `tol` (vertex matching).
    pub fn is_origin_symmetric(&self, tol: f64) -> bool {
        self.vertices
            .iter()
            .all(|v| self.vertices.iter().any(|w| (v + w).norm() <= tol))
    }
}

/// Signed area by the shoelace formula (positive for counterclockwise).
pub fn signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let o = vertices[0];
    let mut s = 0.0;
    for i in 1..n - 1 {
        s += cross(&(vertices[i] - o), &(vertices[i + 1] - o));
    }
    0.5 * s
}

fn reflex_vertex(vertices: &[Vec2], scale: f64) -> Option<usize> {
    let n = vertices.len();
    let tol = 1e-12 * scale * scale;
    (0..n).find(|&i| {
        let prev = vertices[(i + n - 1) % n];
        let next = vertices[(i + 1) % n];
        cross(&(vertices[i] - prev), &(next - vertices[i])) < -tol
    })
}

fn winding_turns(vertices: &[Vec2]) -> usize {
    let n = vertices.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = vertices[(i + 1) % n] - vertices[i];
        let b = vertices[(i + 2) % n] - vertices[(i + 1) % n];
        total += cross(&a, &b).atan2(a.dot(&b));
    }
    (total / (2.0 * PI)).round().abs() as usize
}

fn convexity_error(index: usize, n: usize) -> Error {
    Error::input(format!(
        "polygon is not convex at vertex index {index} (triple {}, {index}, {})",
        (index + n - 1) % n,
        (index + 1) % n
    ))
}

pub(crate) fn clip_halfplane(poly: &[Vec2], n: &Vec2, c: f64) -> Vec<Vec2> {
    let m = poly.len();
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..m {
        let p = poly[i];
        let q = poly[(i + 1) % m];
        let dp = p.dot(n) - c;
        let dq = q.dot(n) - c;
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let s = dp / (dp - dq);
            out.push(p + (q - p) * s);
        }
    }
    out
}

/// Andrew's monotone chain; returns the counterclockwise hull without
/// collinear points.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a == b);
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vec2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if cross(&(b - a), &(p - b)) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

/// A closed half-plane {x : ⟨x, normal⟩ <= level}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Vec2,
    pub level: f64,
}

impl HalfPlane {
    pub fn new(normal: Vec2, level: f64) -> Self {
        HalfPlane { normal, level }
    }

    fn direction(&self) -> Vec2 {
        Vec2::new(-self.normal.y, self.normal.x)
    }

    fn point(&self) -> Vec2 {
        self.normal * (self.level / self.normal.norm_squared())
    }

    fn violates(&self, p: &Vec2) -> bool {
        p.dot(&self.normal) > self.level + 1e-13 * (1.0 + self.level.abs())
    }
}

fn line_intersection(a: &HalfPlane, b: &HalfPlane) -> Option<Vec2> {
    let da = a.direction();
    let db = b.direction();
    let den = cross(&da, &db);
    if den.abs() < PARALLEL_EPS * da.norm() * db.norm() {
        return None;
    }
    let pa = a.point();
    let pb = b.point();
    let s = cross(&(pb - pa), &db) / den;
    Some(pa + da * s)
}

/// Intersection of half-planes by the angle-sorted deque sweep.
///
/// The input must be bounded (normals spanning the circle with gaps below
/// π); redundant half-planes are dropped. Equal-angle half-planes keep the
/// tighter level.
pub fn halfplane_intersection(planes: &[HalfPlane]) -> Result<PolygonChain> {
    if planes.len() < 3 {
        return Err(Error::Degenerate("need at least three half-planes".into()));
    }
    let mut sorted: Vec<(f64, HalfPlane)> = planes
        .iter()
        .map(|h| {
            let d = h.direction();
            (d.y.atan2(d.x), HalfPlane::new(h.normal / h.normal.norm(), h.level / h.normal.norm()))
        })
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut lines: Vec<HalfPlane> = Vec::with_capacity(sorted.len());
    for (_, h) in sorted {
        if let Some(last) = lines.last_mut() {
            if cross(&last.direction(), &h.direction()).abs() < PARALLEL_EPS && last.normal.dot(&h.normal) > 0.0 {
                if h.level < last.level {
                    *last = h;
                }
                continue;
            }
        }
        lines.push(h);
    }
    if lines.len() >= 2 {
        let first = lines[0];
        let last = lines[lines.len() - 1];
        if cross(&last.direction(), &first.direction()).abs() < PARALLEL_EPS && last.normal.dot(&first.normal) > 0.0 {
            if last.level < first.level {
                lines[0] = last;
            }
            lines.pop();
        }
    }

    let mut dq: std::collections::VecDeque<HalfPlane> = std::collections::VecDeque::with_capacity(lines.len());
    let degenerate = || Error::Degenerate("half-plane intersection is empty or unbounded".into());
    for h in lines {
        while dq.len() >= 2 {
            let p = line_intersection(&dq[dq.len() - 2], &dq[dq.len() - 1]).ok_or_else(degenerate)?;
            if h.violates(&p) {
                dq.pop_back();
            } else {
                break;
            }
        }
        while dq.len() >= 2 {
            let p = line_intersection(&dq[0], &dq[1]).ok_or_else(degenerate)?;
            if h.violates(&p) {
                dq.pop_front();
            } else {
                break;
            }
        }
        if let Some(back) = dq.back() {
            // consecutive antiparallel lines cannot both bound a finite region
            if cross(&back.direction(), &h.direction()).abs() < PARALLEL_EPS && back.normal.dot(&h.normal) < 0.0 {
                return Err(degenerate());
            }
        }
        dq.push_back(h);
    }
    while dq.len() >= 3 {
        let p = line_intersection(&dq[dq.len() - 2], &dq[dq.len() - 1]).ok_or_else(degenerate)?;
        if dq[0].violates(&p) {
            dq.pop_back();
        } else {
            break;
        }
    }
    while dq.len() >= 3 {
        let p = line_intersection(&dq[0], &dq[1]).ok_or_else(degenerate)?;
        if dq[dq.len() - 1].violates(&p) {
            dq.pop_front();
        } else {
            break;
        }
    }
    if dq.len() < 3 {
        return Err(degenerate());
    }
    let k = dq.len();
    let mut vertices = Vec::with_capacity(k);
    for i in 0..k {
        let p = line_intersection(&dq[i], &dq[(i + 1) % k]).ok_or_else(degenerate)?;
        vertices.push(p);
    }
    // The retained lines must turn left by less than π at each step and
    // wind exactly once; otherwise the sweep closed around an unbounded or
    // empty region.
    let mut winding = 0.0;
    for i in 0..k {
        let (a, b) = (dq[i].direction(), dq[(i + 1) % k].direction());
        let turn = cross(&a, &b).atan2(a.dot(&b));
        if !(turn > 0.0) {
            return Err(degenerate());
        }
        winding += turn;
    }
    if (winding - 2.0 * PI).abs() > 1e-9 || signed_area(&vertices) <= 0.0 {
        return Err(degenerate());
    }
    // merge coincident vertices produced by lines meeting at one point
    let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut merged: Vec<Vec2> = Vec::with_capacity(vertices.len());
    for v in vertices {
        if merged.last().is_none_or(|l: &Vec2| (l - v).norm() > 1e-13 * (1.0 + scale)) {
            merged.push(v);
        }
    }
    while merged.len() > 1 && (merged[0] - merged[merged.len() - 1]).norm() <= 1e-13 * (1.0 + scale) {
        merged.pop();
    }
    if merged.len() < 3 {
        return Err(degenerate());
    }
    Ok(PolygonChain::from_ccw_unchecked(merged))
}

/// Maximum of |f(u) − g(u)| over `count` equispaced unit directions.
pub fn support_gap<F, G>(f: F, g: G, count: usize) -> f64
where
    F: Fn(&Vec2) -> f64,
    G: Fn(&Vec2) -> f64,
{
    (0..count)
        .map(|k| {
            let u = unit(2.0 * PI * k as f64 / count as f64);
            (f(&u) - g(&u)).abs()
        })
        .fold(0.0, f64::max)
}

/// Hausdorff distance of two convex polygons via their support functions.
pub fn hausdorff(p: &PolygonChain, q: &PolygonChain) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::input("hausdorff of an empty polygon"));
    }
    Ok(support_gap(|u| p.support(u), |u| q.support(u), HAUSDORFF_DIRECTIONS))
}
