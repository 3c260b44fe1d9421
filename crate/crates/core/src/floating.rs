//! Discretized convex floating bodies.
//!
//! K_δ is approximated by intersecting the halfspaces {⟨x,u⟩ <= t(u,δ)}
//! over a fixed direction family. In the plane this yields a polygon that
//! contains the true K_δ; in three dimensions the (direction, level) table
//! itself is the result, queried through a membership oracle.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::body::{BodySpec, Point};
use crate::cap::{CapConfig, CapSolver, CutResult};
use crate::directions;
use crate::error::{Error, Result};
use crate::polygon::{halfplane_intersection, hausdorff, HalfPlane, PolygonChain, Vec2};

/// Smallest accepted direction count.
pub const MIN_DIRECTIONS: usize = 8;

/// Gauge slack for the containment flag.
const CONTAINMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatingOptions {
    pub cap: CapConfig,
    /// Also solve with 2m directions and attach a Richardson error estimate
    /// (planar bodies only).
    pub estimate_error: bool,
}

impl Default for FloatingOptions {
    fn default() -> Self {
        FloatingOptions { cap: CapConfig::default(), estimate_error: true }
    }
}

/// Intersection of finitely many halfspaces {⟨x,u_i⟩ <= t_i}.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceTable {
    pub directions: Vec<Point>,
    pub levels: Vec<f64>,
}

impl HalfspaceTable {
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.directions.iter().zip(&self.levels).all(|(u, t)| dot(u, x) <= t + tol)
    }

    /// Largest λ >= 0 with origin + λ·dir inside every halfspace.
    pub fn ray_exit(&self, origin: &[f64], dir: &[f64]) -> f64 {
        self.directions
            .iter()
            .zip(&self.levels)
            .filter_map(|(u, t)| {
                let s = dot(u, dir);
                (s > 0.0).then(|| (t - dot(u, origin)) / s)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FloatingHull {
    Polygon(PolygonChain),
    Table(HalfspaceTable),
}

impl FloatingHull {
    pub fn polygon(&self) -> Option<&PolygonChain> {
        match self {
            FloatingHull::Polygon(p) => Some(p),
            FloatingHull::Table(_) => None,
        }
    }

    /// Membership with an absolute slack.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            FloatingHull::Polygon(p) => p.contains(&Vec2::new(x[0], x[1]), tol),
            FloatingHull::Table(t) => t.contains(x, tol),
        }
    }

    /// Distance from an interior origin to the hull boundary along dir.
    pub fn ray_exit(&self, origin: &[f64], dir: &[f64]) -> f64 {
        match self {
            FloatingHull::Polygon(p) => p.ray_exit(&Vec2::new(origin[0], origin[1]), &Vec2::new(dir[0], dir[1])),
            FloatingHull::Table(t) => t.ray_exit(origin, dir),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatingBodyResult {
    pub delta: f64,
    pub directions: Vec<Point>,
    /// t(u_i, δ) for each direction.
    pub support_levels: Vec<f64>,
    pub hull: FloatingHull,
    /// Every hull vertex (planar) or every table ray exit (3D) lies in K.
    pub contained_in_source: bool,
    /// Estimated Hausdorff error of the planar hull against the true K_δ.
    pub discretization_error: Option<f64>,
}

/// K_δ with default options.
pub fn floating_body(body: &BodySpec, delta: f64, m: usize) -> Result<FloatingBodyResult> {
    floating_body_with(body, delta, m, &FloatingOptions::default())
}

pub fn floating_body_with(body: &BodySpec, delta: f64, m: usize, opts: &FloatingOptions) -> Result<FloatingBodyResult> {
    let solver = CapSolver::new(body, opts.cap);
    let mut result = build(&solver, delta, m)?;
    if opts.estimate_error && body.dim() == 2 {
        let fine = build(&solver, delta, 2 * m)?;
        if let (Some(a), Some(b)) = (result.hull.polygon(), fine.hull.polygon()) {
            // hull error decays like m⁻², so err(m) ≈ d(m, 2m) / (1 − 1/4)
            result.discretization_error = Some(4.0 / 3.0 * hausdorff(a, b)?);
        }
    }
    Ok(result)
}

/// Solves the m cuts of `solver`'s body; the result has no error estimate.
pub fn floating_body_from(solver: &CapSolver, delta: f64, m: usize) -> Result<FloatingBodyResult> {
    build(solver, delta, m)
}

fn build(solver: &CapSolver, delta: f64, m: usize) -> Result<FloatingBodyResult> {
    let body = solver.body();
    let n = body.dim();
    if n != 2 && n != 3 {
        return Err(Error::unsupported(format!("floating bodies are implemented for n = 2, 3 (got {n})")));
    }
    if m < MIN_DIRECTIONS {
        return Err(Error::input(format!("direction count must be at least {MIN_DIRECTIONS} (got {m})")));
    }
    let vol = solver.volume();
    if !(delta >= 0.0 && delta < 0.5 * vol) {
        return Err(Error::domain(format!("delta must lie in [0, |K|/2) = [0, {}) (got {delta})", 0.5 * vol)));
    }
    let dirs = directions::family(n, m);

    if delta == 0.0 {
        let levels: Vec<f64> = dirs.iter().map(|u| body.support_raw(u)).collect();
        let hull = if n == 2 {
            let poly = match body.as_polygon() {
                Some(p) => p,
                None => {
                    let pts: Vec<Vec2> = dirs
                        .iter()
                        .map(|u| {
                            let x = body.boundary_point_raw(u);
                            Vec2::new(x[0], x[1])
                        })
                        .collect();
                    PolygonChain::hull_of(&pts)?
                }
            };
            FloatingHull::Polygon(poly)
        } else {
            FloatingHull::Table(HalfspaceTable { directions: dirs.clone(), levels: levels.clone() })
        };
        return Ok(FloatingBodyResult {
            delta,
            directions: dirs,
            support_levels: levels,
            hull,
            contained_in_source: true,
            discretization_error: None,
        });
    }

    let cuts: Vec<CutResult> = dirs.par_iter().map(|u| solver.cut_level(u, delta)).collect::<Result<_>>()?;
    let levels: Vec<f64> = cuts.iter().map(|c| c.level).collect();

    let (hull, contained) = if n == 2 {
        let planes: Vec<HalfPlane> =
            dirs.iter().zip(&levels).map(|(u, t)| HalfPlane::new(Vec2::new(u[0], u[1]), *t)).collect();
        let poly = halfplane_intersection(&planes).map_err(|e| match e {
            Error::Degenerate(msg) => Error::Degenerate(format!("floating body is empty at this resolution: {msg}")),
            other => other,
        })?;
        let contained = poly.vertices().iter().all(|v| body.gauge(&[v.x, v.y]) <= 1.0 + CONTAINMENT_TOL);
        (FloatingHull::Polygon(poly), contained)
    } else {
        let table = HalfspaceTable { directions: dirs.clone(), levels: levels.clone() };
        let c = body.centroid();
        if !table.contains(&c, 0.0) {
            return Err(Error::Degenerate(
                "the centroid violates a cut halfspace; the discretized floating body may be empty".into(),
            ));
        }
        let contained = dirs.iter().all(|u| {
            let lam = table.ray_exit(&c, u);
            let x: Vec<f64> = c.iter().zip(u).map(|(a, b)| a + lam * b).collect();
            body.gauge(&x) <= 1.0 + CONTAINMENT_TOL
        });
        (FloatingHull::Table(table), contained)
    };

    Ok(FloatingBodyResult {
        delta,
        directions: dirs,
        support_levels: levels,
        hull,
        contained_in_source: contained,
        discretization_error: None,
    })
}

/// The affine image {T·y + v : y ∈ K}.
pub fn apply_affine(body: &BodySpec, map: &DMatrix<f64>, shift: &DVector<f64>) -> Result<BodySpec> {
    BodySpec::affine(body.clone(), map.clone(), shift.clone())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
