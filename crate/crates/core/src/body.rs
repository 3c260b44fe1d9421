//! Convex bodies as evaluable oracles.
//!
//! A [`BodySpec`] is one of a polygon, an l_p unit ball, an ellipsoid, or an
//! invertible affine image of another body. Every query is answered in
//! closed form or by composing through the affine chain; no query mutates
//! the body.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{Error, Result};
use crate::polygon::{PolygonChain, Vec2};
use crate::roots::{bracketed_root, RootOptions};

/// A point or direction; length is the ambient dimension.
pub type Point = Vec<f64>;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

/// Tolerance on ‖u‖ − 1 for direction arguments.
pub const UNIT_TOL: f64 = 1e-12;

/// Relative gauge slack for `contains`.
const CONTAINS_TOL: f64 = 1e-12;

/// Distance tolerance factor for boundary-membership checks: a point is on
/// the boundary when it is within `BOUNDARY_TOL * (1 + ‖x‖)` of it.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Declarative description of a convex body.
#[derive(Debug, Clone, PartialEq)]
pub enum BodyKind {
    Polygon(PolygonChain),
    /// Unit ball of l_p in dimension n; `p` may be `f64::INFINITY`.
    LpBall { n: usize, p: f64 },
    /// {x : (x − center)ᵀ shape (x − center) <= 1} with `shape` positive definite.
    Ellipsoid { shape: DMatrix<f64>, center: DVector<f64> },
    /// {map · y + translation : y ∈ inner}.
    Affine { inner: Box<BodySpec>, map: DMatrix<f64>, translation: DVector<f64> },
}

#[derive(Debug, Clone, PartialEq)]
enum Cache {
    Polygon { centroid: Vec2 },
    Lp,
    Ellipsoid { inverse: DMatrix<f64>, det: f64 },
    Affine { inverse: DMatrix<f64>, abs_det: f64, center: Point },
}

/// A validated convex body.
#[derive(Debug, Clone, PartialEq)]
pub struct BodySpec {
    kind: BodyKind,
    cache: Cache,
}

type Buf = [f64; MAX_DIM];

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn matvec(m: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate().take(m.nrows()) {
        *o = (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum();
    }
}

fn matvec_t(m: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate().take(m.ncols()) {
        *o = (0..m.nrows()).map(|i| m[(i, j)] * x[i]).sum();
    }
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        norm(x)
    } else {
        let m = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Volume of the Euclidean unit ball in dimension k: π^{k/2}/Γ(k/2 + 1).
pub fn unit_ball_volume(k: usize) -> f64 {
    let k = k as f64;
    std::f64::consts::PI.powf(k / 2.0) / libm::tgamma(k / 2.0 + 1.0)
}

/// Volume of the unit l_p ball in dimension n: 2ⁿ Γ(1+1/p)ⁿ / Γ(1+n/p).
pub fn lp_ball_volume(n: usize, p: f64) -> f64 {
    if p.is_infinite() {
        return 2f64.powi(n as i32);
    }
    let nf = n as f64;
    (nf * (2.0 * libm::tgamma(1.0 + 1.0 / p)).ln() - libm::lgamma(1.0 + nf / p)).exp()
}

/// Gauss curvature of ∂B^n_p at x:
/// (p−1)^{n−1} ∏|x_i|^{p−2} / (Σ|x_i|^{2(p−1)})^{(n+1)/2}.
///
/// Returns 0 where a coordinate vanishes for p > 2 and `f64::INFINITY` where
/// a coordinate vanishes for p < 2.
pub fn lp_curvature(n: usize, p: f64, x: &[f64]) -> Result<f64> {
    if x.len() != n {
        return Err(Error::input(format!("point has dimension {}, expected {n}", x.len())));
    }
    if n < 2 {
        return Err(Error::input("dimension must be at least 2"));
    }
    if !(p > 1.0) || p.is_infinite() {
        return Err(Error::unsupported(format!("l_p curvature needs 1 < p < ∞, got p = {p}")));
    }
    let r = lp_norm(x, p);
    if (r - 1.0).abs() > BOUNDARY_TOL * (1.0 + norm(x)) {
        return Err(Error::input(format!("point is not on the unit l_{p} sphere (‖x‖_p = {r})")));
    }
    if p == 2.0 {
        return Ok(1.0);
    }
    let zero = x.contains(&0.0);
    if zero {
        return Ok(if p > 2.0 { 0.0 } else { f64::INFINITY });
    }
    let nf = n as f64;
    let log_num = (nf - 1.0) * (p - 1.0).ln() + (p - 2.0) * x.iter().map(|v| v.abs().ln()).sum::<f64>();
    let s: f64 = x.iter().map(|v| v.abs().powf(2.0 * (p - 1.0))).sum();
    Ok((log_num - 0.5 * (nf + 1.0) * s.ln()).exp())
}

impl BodySpec {
    /// Validates and wraps a body description.
    pub fn new(kind: BodyKind) -> Result<Self> {
        let cache = match &kind {
            BodyKind::Polygon(poly) => Cache::Polygon { centroid: poly.centroid() },
            BodyKind::LpBall { n, p } => {
                if *n < 2 || *n > MAX_DIM {
                    return Err(Error::input(format!("l_p ball dimension must be in 2..={MAX_DIM}, got {n}")));
                }
                if p.is_nan() || *p < 1.0 {
                    return Err(Error::input(format!("l_p ball needs p >= 1, got {p}")));
                }
                Cache::Lp
            }
            BodyKind::Ellipsoid { shape, center } => {
                let n = center.len();
                if !(2..=MAX_DIM).contains(&n) || shape.nrows() != n || shape.ncols() != n {
                    return Err(Error::input("ellipsoid shape must be n x n with matching center, 2 <= n <= 8"));
                }
                if shape.iter().chain(center.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::input("ellipsoid has non-finite entries"));
                }
                let asym = (shape - shape.transpose()).abs().max();
                if asym > 1e-12 * shape.abs().max() {
                    return Err(Error::input("ellipsoid shape matrix is not symmetric"));
                }
                let chol = shape
                    .clone()
                    .cholesky()
                    .ok_or_else(|| Error::input("ellipsoid shape matrix is not positive definite"))?;
                let inverse = chol.inverse();
                let det = shape.determinant();
                Cache::Ellipsoid { inverse, det }
            }
            BodyKind::Affine { inner, map, translation } => {
                let n = inner.dim();
                if map.nrows() != n || map.ncols() != n || translation.len() != n {
                    return Err(Error::input(format!("affine map must be {n} x {n} with a length-{n} translation")));
                }
                if map.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::input("affine map has non-finite entries"));
                }
                let det = map.determinant();
                let scale = map.abs().max().powi(n as i32);
                if !(det.abs() > 1e-14 * scale) {
                    return Err(Error::input("affine map is singular"));
                }
                let inverse = map.clone().try_inverse().ok_or_else(|| Error::input("affine map is singular"))?;
                let c = inner.centroid();
                let mut center = vec![0.0; n];
                matvec(map, &c, &mut center);
                for (ci, vi) in center.iter_mut().zip(translation.iter()) {
                    *ci += vi;
                }
                Cache::Affine { inverse, abs_det: det.abs(), center }
            }
        };
        Ok(BodySpec { kind, cache })
    }

    pub fn polygon(vertices: &[[f64; 2]]) -> Result<Self> {
        let verts = vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect();
        Self::from_polygon(PolygonChain::new(verts)?)
    }

    pub fn from_polygon(poly: PolygonChain) -> Result<Self> {
        Self::new(BodyKind::Polygon(poly))
    }

    pub fn lp_ball(n: usize, p: f64) -> Result<Self> {
        Self::new(BodyKind::LpBall { n, p })
    }

    /// The Euclidean unit disk B²₂.
    pub fn disk() -> Self {
        Self::lp_ball(2, 2.0).expect("valid")
    }

    /// The square [−1, 1]².
    pub fn square() -> Self {
        Self::from_polygon(PolygonChain::rectangle(1.0, 1.0)).expect("valid")
    }

    pub fn ellipsoid(shape: DMatrix<f64>, center: DVector<f64>) -> Result<Self> {
        Self::new(BodyKind::Ellipsoid { shape, center })
    }

    /// Axis-parallel ellipsoid centered at the origin with the given semi-axes.
    pub fn ellipsoid_axes(semi_axes: &[f64]) -> Result<Self> {
        if semi_axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::input("semi-axes must be positive"));
        }
        let n = semi_axes.len();
        let shape = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / (semi_axes[i] * semi_axes[i]) } else { 0.0 });
        Self::ellipsoid(shape, DVector::zeros(n))
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::ellipsoid_axes(&[a, b])
    }

    pub fn affine(inner: BodySpec, map: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        Self::new(BodyKind::Affine { inner: Box::new(inner), map, translation })
    }

    /// The homothetic copy c·K (about the origin).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let n = self.dim();
        Self::affine(self.clone(), DMatrix::identity(n, n) * c, DVector::zeros(n))
    }

    pub fn translated(&self, v: &[f64]) -> Result<Self> {
        let n = self.dim();
        Self::affine(self.clone(), DMatrix::identity(n, n), DVector::from_column_slice(v))
    }

    /// The body translated so that its centroid is the origin; returned
    /// unchanged when the centroid is already at the origin.
    pub fn recentered(&self) -> Self {
        let c = self.centroid();
        if norm(&c) <= 1e-14 * (1.0 + self.diameter_bound()) {
            return self.clone();
        }
        let neg: Vec<f64> = c.iter().map(|v| -v).collect();
        self.translated(&neg).expect("translation is invertible")
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            BodyKind::Polygon(_) => 2,
            BodyKind::LpBall { n, .. } => *n,
            BodyKind::Ellipsoid { center, .. } => center.len(),
            BodyKind::Affine { inner, .. } => inner.dim(),
        }
    }

    /// True when the body has a C² boundary with curvature queries available.
    pub fn is_smooth(&self) -> bool {
        match &self.kind {
            BodyKind::Polygon(_) => false,
            BodyKind::LpBall { p, .. } => *p > 1.0 && p.is_finite(),
            BodyKind::Ellipsoid { .. } => true,
            BodyKind::Affine { inner, .. } => inner.is_smooth(),
        }
    }

    /// Exact polygon form of a planar polyhedral body (polygons, B²₁, B²_∞
    /// and their affine images).
    pub fn as_polygon(&self) -> Option<PolygonChain> {
        match &self.kind {
            BodyKind::Polygon(p) => Some(p.clone()),
            BodyKind::LpBall { n: 2, p } if *p == 1.0 => Some(PolygonChain::from_ccw_unchecked(vec![
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(-1.0, 0.0),
                Vec2::new(0.0, -1.0),
            ])),
            BodyKind::LpBall { n: 2, p } if p.is_infinite() => Some(PolygonChain::rectangle(1.0, 1.0)),
            BodyKind::Affine { inner, map, translation } if map.nrows() == 2 => {
                let poly = inner.as_polygon()?;
                let m = Matrix2::new(map[(0, 0)], map[(0, 1)], map[(1, 0)], map[(1, 1)]);
                Some(poly.transform(&m, &Vec2::new(translation[0], translation[1])))
            }
            _ => None,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::input(format!("dimension mismatch: got {}, body has {}", x.len(), self.dim())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite coordinate"));
        }
        Ok(())
    }

    fn check_unit(&self, u: &[f64]) -> Result<()> {
        self.check_dim(u)?;
        let nu = norm(u);
        if (nu - 1.0).abs() > UNIT_TOL {
            return Err(Error::input(format!("direction is not a unit vector (‖u‖ = {nu})")));
        }
        Ok(())
    }

    /// h_K(u) = max_{x∈K} ⟨x,u⟩ for a unit direction.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        self.check_unit(u)?;
        Ok(self.support_raw(u))
    }

    /// Support function for any direction (positively homogeneous).
    pub fn support_raw(&self, w: &[f64]) -> f64 {
        match (&self.kind, &self.cache) {
            (BodyKind::Polygon(poly), _) => poly.support(&Vec2::new(w[0], w[1])),
            (BodyKind::LpBall { p, .. }, _) => lp_norm(w, conjugate(*p)),
            (BodyKind::Ellipsoid { center, .. }, Cache::Ellipsoid { inverse, .. }) => {
                let mut buf: Buf = [0.0; MAX_DIM];
                let n = w.len();
                matvec(inverse, w, &mut buf[..n]);
                dot(center.as_slice(), w) + dot(&buf[..n], w).max(0.0).sqrt()
            }
            (BodyKind::Affine { inner, map, translation }, _) => {
                let mut buf: Buf = [0.0; MAX_DIM];
                let n = w.len();
                matvec_t(map, w, &mut buf[..n]);
                inner.support_raw(&buf[..n]) + dot(translation.as_slice(), w)
            }
            _ => unreachable!("cache matches kind"),
        }
    }

    /// A point of ∂K where ⟨·,u⟩ attains h_K(u); on flat faces, the face centroid.
    pub fn boundary_point(&self, u: &[f64]) -> Result<Point> {
        self.check_unit(u)?;
        Ok(self.boundary_point_raw(u))
    }

    pub fn boundary_point_raw(&self, w: &[f64]) -> Point {
        let n = w.len();
        match (&self.kind, &self.cache) {
            (BodyKind::Polygon(poly), _) => {
                let x = poly.support_point(&Vec2::new(w[0], w[1]));
                vec![x.x, x.y]
            }
            (BodyKind::LpBall { p, .. }, _) => lp_argmax(w, *p),
            (BodyKind::Ellipsoid { center, .. }, Cache::Ellipsoid { inverse, .. }) => {
                let mut buf: Buf = [0.0; MAX_DIM];
                matvec(inverse, w, &mut buf[..n]);
                let s = dot(&buf[..n], w).sqrt();
                (0..n).map(|i| center[i] + buf[i] / s).collect()
            }
            (BodyKind::Affine { inner, map, translation }, _) => {
                let mut buf: Buf = [0.0; MAX_DIM];
                matvec_t(map, w, &mut buf[..n]);
                let y = inner.boundary_point_raw(&buf[..n]);
                let mut x = vec![0.0; n];
                matvec(map, &y, &mut x);
                for (xi, ti) in x.iter_mut().zip(translation.iter()) {
                    *xi += ti;
                }
                x
            }
            _ => unreachable!("cache matches kind"),
        }
    }

    /// Interior reference point used for gauges and radial functions; the
    /// centroid.
    pub fn center(&self) -> Point {
        self.centroid()
    }

    /// Minkowski gauge of x about [`Self::center`]: K = {gauge <= 1}.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        match (&self.kind, &self.cache) {
            (BodyKind::Polygon(poly), Cache::Polygon { centroid }) => poly.gauge_about(centroid, &Vec2::new(x[0], x[1])),
            (BodyKind::LpBall { p, .. }, _) => lp_norm(x, *p),
            (BodyKind::Ellipsoid { shape, center }, _) => {
                let n = x.len();
                let mut d: Buf = [0.0; MAX_DIM];
                for i in 0..n {
                    d[i] = x[i] - center[i];
                }
                let mut buf: Buf = [0.0; MAX_DIM];
                matvec(shape, &d[..n], &mut buf[..n]);
                dot(&buf[..n], &d[..n]).max(0.0).sqrt()
            }
            (BodyKind::Affine { inner, translation, .. }, Cache::Affine { inverse, .. }) => {
                let n = x.len();
                let mut d: Buf = [0.0; MAX_DIM];
                for i in 0..n {
                    d[i] = x[i] - translation[i];
                }
                let mut y: Buf = [0.0; MAX_DIM];
                matvec(inverse, &d[..n], &mut y[..n]);
                inner.gauge(&y[..n])
            }
            _ => unreachable!("cache matches kind"),
        }
    }

    /// x ∈ K (closed), with a relative slack of 1e-12 on the gauge.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.gauge(x) <= 1.0 + CONTAINS_TOL)
    }

    /// Distance-like boundary test: |1 − 1/γ(x)|·‖x − c‖ <= 1e-9 (1 + ‖x‖).
    pub fn is_on_boundary(&self, x: &[f64]) -> bool {
        let g = self.gauge(x);
        if !(g > 0.0) {
            return false;
        }
        let c = self.center();
        let d: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        (1.0 - 1.0 / g).abs() * d <= BOUNDARY_TOL * (1.0 + norm(x))
    }

    fn check_boundary(&self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        if !self.is_on_boundary(x) {
            return Err(Error::input(format!("point is not on the boundary (gauge = {})", self.gauge(x))));
        }
        Ok(())
    }

    /// Radial function about the center: the distance from c to ∂K along
    /// the unit direction w.
    pub fn radial(&self, w: &[f64]) -> f64 {
        let c = self.center();
        let x: Vec<f64> = c.iter().zip(w).map(|(a, b)| a + b).collect();
        1.0 / self.gauge(&x)
    }

    /// λ > 0 with origin + λ·dir ∈ ∂K, for an interior origin and any nonzero dir.
    pub fn ray_exit(&self, origin: &[f64], dir: &[f64]) -> Result<f64> {
        self.check_dim(origin)?;
        self.check_dim(dir)?;
        if self.gauge(origin) >= 1.0 {
            return Err(Error::input("ray origin is not interior"));
        }
        if norm(dir) == 0.0 {
            return Err(Error::input("zero ray direction"));
        }
        self.ray_exit_raw(origin, dir)
    }

    pub(crate) fn ray_exit_raw(&self, origin: &[f64], dir: &[f64]) -> Result<f64> {
        let n = origin.len();
        match (&self.kind, &self.cache) {
            (BodyKind::Polygon(poly), _) => Ok(poly.ray_exit(&Vec2::new(origin[0], origin[1]), &Vec2::new(dir[0], dir[1]))),
            (BodyKind::Ellipsoid { shape, center }, _) => {
                // (d + λw)ᵀA(d + λw) = 1
                let mut d: Buf = [0.0; MAX_DIM];
                for i in 0..n {
                    d[i] = origin[i] - center[i];
                }
                let mut ad: Buf = [0.0; MAX_DIM];
                let mut aw: Buf = [0.0; MAX_DIM];
                matvec(shape, &d[..n], &mut ad[..n]);
                matvec(shape, dir, &mut aw[..n]);
                let a = dot(&aw[..n], dir);
                let b = dot(&ad[..n], dir);
                let c = dot(&ad[..n], &d[..n]) - 1.0;
                let disc = (b * b - a * c).max(0.0).sqrt();
                // stable root of the larger solution
                let lam = if b >= 0.0 { -c / (b + disc) } else { (disc - b) / a };
                Ok(lam)
            }
            (BodyKind::Affine { inner, translation, .. }, Cache::Affine { inverse, .. }) => {
                let mut d: Buf = [0.0; MAX_DIM];
                for i in 0..n {
                    d[i] = origin[i] - translation[i];
                }
                let mut o: Buf = [0.0; MAX_DIM];
                let mut w: Buf = [0.0; MAX_DIM];
                matvec(inverse, &d[..n], &mut o[..n]);
                matvec(inverse, dir, &mut w[..n]);
                inner.ray_exit_raw(&o[..n], &w[..n])
            }
            (BodyKind::LpBall { p, .. }, _) => {
                let p = *p;
                let lo_norm = lp_norm(origin, p);
                // the padding keeps rounding from putting the upper end just inside
                let hi = (1.0 + lo_norm) / lp_norm(dir, p) * (1.0 + 1e-12);
                let f = |lam: f64| {
                    let mut x: Buf = [0.0; MAX_DIM];
                    for i in 0..n {
                        x[i] = origin[i] + lam * dir[i];
                    }
                    lp_norm(&x[..n], p) - 1.0
                };
                let r = bracketed_root(f, 0.0, hi, RootOptions { f_tol: 1e-16, x_tol: 4.0 * f64::EPSILON * hi, max_iter: 300 })?;
                Ok(r.x)
            }
            _ => unreachable!("cache matches kind"),
        }
    }

    /// Outer unit normal at a boundary point.
    pub fn normal_at(&self, x: &[f64]) -> Result<Point> {
        self.check_boundary(x)?;
        self.normal_raw(x)
    }

    fn normal_raw(&self, x: &[f64]) -> Result<Point> {
        let n = x.len();
        match (&self.kind, &self.cache) {
            (BodyKind::Polygon(poly), _) => polygon_normal(poly, x),
            (BodyKind::LpBall { p, .. }, _) => {
                let p = *p;
                if let Some(poly) = self.as_polygon() {
                    return polygon_normal(&poly, x);
                }
                if p == 1.0 {
                    if x.iter().any(|v| v.abs() <= BOUNDARY_TOL) {
                        return Err(Error::Ambiguous("l_1 sphere point lies on a lower-dimensional face".into()));
                    }
                    let s = 1.0 / (n as f64).sqrt();
                    return Ok(x.iter().map(|v| v.signum() * s).collect());
                }
                if p.is_infinite() {
                    let active: Vec<usize> = (0..n).filter(|&i| (x[i].abs() - 1.0).abs() <= BOUNDARY_TOL).collect();
                    if active.len() != 1 {
                        return Err(Error::Ambiguous("cube point lies on an edge or vertex".into()));
                    }
                    let mut nrm = vec![0.0; n];
                    nrm[active[0]] = x[active[0]].signum();
                    return Ok(nrm);
                }
                let g: Vec<f64> = x.iter().map(|v| v.signum() * v.abs().powf(p - 1.0)).collect();
                let s = norm(&g);
                Ok(g.iter().map(|v| v / s).collect())
            }
            (BodyKind::Ellipsoid { shape, center }, _) => {
                let d: Vec<f64> = (0..n).map(|i| x[i] - center[i]).collect();
                let mut g = vec![0.0; n];
                matvec(shape, &d, &mut g);
                let s = norm(&g);
                Ok(g.iter().map(|v| v / s).collect())
            }
            (BodyKind::Affine { inner, translation, .. }, Cache::Affine { inverse, .. }) => {
                let y = self.pull_back(x, translation, inverse);
                let ni = inner.normal_raw(&y)?;
                let mut m = vec![0.0; n];
                matvec_t(inverse, &ni, &mut m);
                let s = norm(&m);
                Ok(m.iter().map(|v| v / s).collect())
            }
            _ => unreachable!("cache matches kind"),
        }
    }

    fn pull_back(&self, x: &[f64], translation: &DVector<f64>, inverse: &DMatrix<f64>) -> Point {
        let n = x.len();
        let d: Vec<f64> = (0..n).map(|i| x[i] - translation[i]).collect();
        let mut y = vec![0.0; n];
        matvec(inverse, &d, &mut y);
        y
    }

    /// Gauss curvature at a boundary point (closed forms throughout).
    pub fn gauss_curvature(&self, x: &[f64]) -> Result<f64> {
        self.check_boundary(x)?;
        self.curvature_raw(x)
    }

    fn curvature_raw(&self, x: &[f64]) -> Result<f64> {
        let n = x.len();
        match (&self.kind, &self.cache) {
            (BodyKind::Polygon(_), _) => Err(Error::unsupported("polygons have no Gauss curvature")),
            (BodyKind::LpBall { n: dim, p }, _) => {
                if !(*p > 1.0) || p.is_infinite() {
                    return Err(Error::unsupported(format!("l_{p} sphere is not C²")));
                }
                lp_curvature(*dim, *p, x)
            }
            (BodyKind::Ellipsoid { shape, center }, Cache::Ellipsoid { det, .. }) => {
                let d: Vec<f64> = (0..n).map(|i| x[i] - center[i]).collect();
                let mut g = vec![0.0; n];
                matvec(shape, &d, &mut g);
                Ok(det / norm(&g).powi(n as i32 + 1))
            }
            (BodyKind::Affine { inner, translation, .. }, Cache::Affine { inverse, abs_det, .. }) => {
                let y = self.pull_back(x, translation, inverse);
                let k = inner.curvature_raw(&y)?;
                let ni = inner.normal_raw(&y)?;
                let mut m = vec![0.0; n];
                matvec_t(inverse, &ni, &mut m);
                Ok(k / (abs_det * abs_det * norm(&m).powi(n as i32 + 1)))
            }
            _ => unreachable!("cache matches kind"),
        }
    }

    pub fn volume(&self) -> f64 {
        match (&self.kind, &self.cache) {
            (BodyKind::Polygon(poly), _) => poly.area(),
            (BodyKind::LpBall { n, p }, _) => lp_ball_volume(*n, *p),
            (BodyKind::Ellipsoid { center, .. }, Cache::Ellipsoid { det, .. }) => unit_ball_volume(center.len()) / det.sqrt(),
            (BodyKind::Affine { inner, .. }, Cache::Affine { abs_det, .. }) => abs_det * inner.volume(),
            _ => unreachable!("cache matches kind"),
        }
    }

    pub fn centroid(&self) -> Point {
        match (&self.kind, &self.cache) {
            (BodyKind::Polygon(_), Cache::Polygon { centroid }) => vec![centroid.x, centroid.y],
            (BodyKind::LpBall { n, .. }, _) => vec![0.0; *n],
            (BodyKind::Ellipsoid { center, .. }, _) => center.as_slice().to_vec(),
            (BodyKind::Affine { .. }, Cache::Affine { center, .. }) => center.clone(),
            _ => unreachable!("cache matches kind"),
        }
    }

    /// An upper bound on the diameter from the coordinate-direction widths.
    pub fn diameter_bound(&self) -> f64 {
        let n = self.dim();
        let mut e = vec![0.0; n];
        let mut s = 0.0;
        for i in 0..n {
            e[i] = 1.0;
            let plus = self.support_raw(&e);
            e[i] = -1.0;
            let minus = self.support_raw(&e);
            e[i] = 0.0;
            s += (plus + minus).powi(2);
        }
        s.sqrt()
    }

    /// Minimal width min_u (h(u) + h(−u)); exact for polygons, sampled on
    /// 4096 directions otherwise (planar only).
    pub fn min_width(&self) -> Result<f64> {
        if let Some(poly) = self.as_polygon() {
            return Ok(poly.min_width());
        }
        if self.dim() != 2 {
            return Err(Error::unsupported("minimal width is implemented for planar bodies"));
        }
        let count = 4096;
        Ok((0..count)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / count as f64;
                let u = [t.cos(), t.sin()];
                self.support_raw(&u) + self.support_raw(&[-u[0], -u[1]])
            })
            .fold(f64::INFINITY, f64::min))
    }

    /// Innermost non-affine body together with the composed affine map
    /// x = map·y + translation.
    pub(crate) fn flatten(&self) -> (&BodySpec, DMatrix<f64>, DVector<f64>) {
        match &self.kind {
            BodyKind::Affine { inner, map, translation } => {
                let (base, m, t) = inner.flatten();
                (base, map * m, map * t + translation)
            }
            _ => {
                let n = self.dim();
                (self, DMatrix::identity(n, n), DVector::zeros(n))
            }
        }
    }
}

fn lp_argmax(w: &[f64], p: f64) -> Point {
    let n = w.len();
    let wmax = w.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if wmax == 0.0 {
        return vec![0.0; n];
    }
    let tol = 1e-12 * wmax;
    if p == 1.0 {
        let active: Vec<usize> = (0..n).filter(|&i| w[i].abs() >= wmax - tol).collect();
        let k = active.len() as f64;
        let mut x = vec![0.0; n];
        for i in active {
            x[i] = w[i].signum() / k;
        }
        return x;
    }
    if p.is_infinite() {
        return w.iter().map(|v| if v.abs() > tol { v.signum() } else { 0.0 }).collect();
    }
    let q = conjugate(p);
    // x_i = sign(w_i) |w_i|^{q-1} / ‖w‖_q^{q-1}, evaluated on w / max|w_i|.
    let scaled: Vec<f64> = w.iter().map(|v| v / wmax).collect();
    let nq = lp_norm(&scaled, q);
    scaled.iter().map(|v| v.signum() * (v.abs() / nq).powf(q - 1.0)).collect()
}

fn polygon_normal(poly: &PolygonChain, x: &[f64]) -> Result<Point> {
    let p = Vec2::new(x[0], x[1]);
    let verts = poly.vertices();
    let tol = BOUNDARY_TOL * (1.0 + p.norm());
    if verts.iter().any(|v| (v - p).norm() <= tol) {
        return Err(Error::Ambiguous("point is a polygon vertex; the normal is not unique".into()));
    }
    let n = verts.len();
    for i in 0..n {
        let nrm = poly.edge_normal(i);
        if ((p - verts[i]).dot(&nrm)).abs() <= tol {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let s = (p - a).dot(&(b - a)) / (b - a).norm_squared();
            if s > 0.0 && s < 1.0 {
                return Ok(vec![nrm.x, nrm.y]);
            }
        }
    }
    Err(Error::input("point is not on a polygon edge"))
}
