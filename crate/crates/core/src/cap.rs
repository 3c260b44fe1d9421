//! Cap volumes |K ∩ {⟨x,u⟩ >= t}| and their inversion to cut levels.
//!
//! Affine images are reduced to their base body: the cap of TK + v at
//! (u, t) is |det T| times the cap of K at (Tᵀu/‖Tᵀu‖, (t − ⟨v,u⟩)/‖Tᵀu‖).
//! On the base body the cap is evaluated by
//!
//! * exact clipping for polygons (and the polygonal planar balls B²₁, B²_∞),
//! * the closed-form ball cap for ellipsoids and B^n₂,
//! * polar-angle quadrature ½∫ρ(θ)² dθ for other planar l_p balls,
//! * section quadrature for axis-aligned caps of l_p balls in n >= 3,
//! * stratified Monte Carlo otherwise.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::body::{lp_ball_volume, unit_ball_volume, BodyKind, BodySpec, Point, UNIT_TOL};
use crate::error::{Error, Result};
use crate::polygon::{cross, PolygonChain, Vec2};
use crate::quadrature::integrate;
use crate::roots::{bracketed_root, newton_bracketed, RootOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapConfig {
    /// Absolute volume tolerance of `cut_level`, relative to |K|.
    pub tol_vol_rel: f64,
    pub max_iter: usize,
    /// Target number of accepted Monte Carlo points.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for CapConfig {
    fn default() -> Self {
        CapConfig { tol_vol_rel: 1e-10, max_iter: 200, mc_samples: 400_000, seed: 0x5eed }
    }
}

/// A cap volume with an absolute error bound (zero for exact paths,
/// quadrature error for quadrature paths, 3σ for Monte Carlo).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapVolume {
    pub value: f64,
    pub error: f64,
}

/// A solved cut: the level `t` with |K ∩ {⟨x,u⟩ >= t}| = `cap_volume`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutResult {
    pub direction: Point,
    pub level: f64,
    pub cap_volume: f64,
    pub volume_error: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Method {
    Polygon,
    Ball,
    Ellipsoid,
    PolarPlanar,
    AxisSections,
    MonteCarlo,
}

struct Cloud {
    points: Vec<f64>,
    count: usize,
}

/// Cap-volume evaluator bound to one body. Holds the Monte Carlo sample
/// cloud (built on first use, from `cfg.seed`) so that repeated cuts share
/// common random numbers.
pub struct CapSolver<'a> {
    body: &'a BodySpec,
    base: &'a BodySpec,
    base_polygon: Option<PolygonChain>,
    map: DMatrix<f64>,
    shift: DVector<f64>,
    abs_det: f64,
    base_volume: f64,
    cfg: CapConfig,
    cloud: OnceLock<Cloud>,
}

/// Unit-ball cap |B^n₂ ∩ {x_n >= s}|.
pub fn ball_cap(n: usize, s: f64) -> f64 {
    let s = s.clamp(-1.0, 1.0);
    match n {
        2 => s.acos() - s * (1.0 - s * s).max(0.0).sqrt(),
        3 => PI * (1.0 - s).powi(2) * (2.0 + s) / 3.0,
        _ => {
            // y = cos φ turns the section integral into ∫ sinⁿφ dφ
            let phi = s.acos();
            unit_ball_volume(n - 1) * integrate(|a: f64| a.sin().powi(n as i32), 0.0, phi, 1e-16, 1e-14).value
        }
    }
}

impl<'a> CapSolver<'a> {
    pub fn new(body: &'a BodySpec, cfg: CapConfig) -> Self {
        let (base, map, shift) = body.flatten();
        let abs_det = map.determinant().abs();
        CapSolver {
            body,
            base,
            base_polygon: base.as_polygon(),
            map,
            shift,
            abs_det,
            base_volume: base.volume(),
            cfg,
            cloud: OnceLock::new(),
        }
    }

    pub fn body(&self) -> &BodySpec {
        self.body
    }

    pub fn volume(&self) -> f64 {
        self.abs_det * self.base_volume
    }

    fn method(&self, u: &[f64]) -> Method {
        if self.base_polygon.is_some() {
            return Method::Polygon;
        }
        match self.base.kind() {
            BodyKind::LpBall { p, .. } if *p == 2.0 => Method::Ball,
            BodyKind::Ellipsoid { .. } => Method::Ellipsoid,
            BodyKind::LpBall { n: 2, .. } => Method::PolarPlanar,
            BodyKind::LpBall { .. } => {
                let axis = u.iter().filter(|v| v.abs() > 1e-15).count() == 1;
                if axis {
                    Method::AxisSections
                } else {
                    Method::MonteCarlo
                }
            }
            _ => Method::MonteCarlo,
        }
    }

    fn check_direction(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.body.dim() {
            return Err(Error::input(format!("direction has dimension {}, body has {}", u.len(), self.body.dim())));
        }
        let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (nu - 1.0).abs() > UNIT_TOL {
            return Err(Error::input(format!("direction is not a unit vector (‖u‖ = {nu})")));
        }
        Ok(())
    }

    /// Base direction, base level offset and scale: t_base = (t − offset) / scale.
    fn reduce(&self, u: &[f64]) -> (Vec<f64>, f64, f64) {
        let uv = DVector::from_column_slice(u);
        let w = self.map.transpose() * &uv;
        let s = w.norm();
        ((w / s).as_slice().to_vec(), self.shift.dot(&uv), s)
    }

    /// |K ∩ {⟨x,u⟩ >= t}|, clamped to 0 / |K| outside the support interval.
    pub fn cap_volume(&self, u: &[f64], t: f64) -> Result<CapVolume> {
        self.check_direction(u)?;
        if !t.is_finite() {
            return Err(Error::input("cut level is not finite"));
        }
        let (ub, offset, scale) = self.reduce(u);
        let c = self.base_cap(&ub, (t - offset) / scale);
        Ok(CapVolume { value: self.abs_det * c.value, error: self.abs_det * c.error })
    }

    fn base_cap(&self, u: &[f64], t: f64) -> CapVolume {
        let hi = self.base.support_raw(u);
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        let lo = -self.base.support_raw(&neg);
        if t >= hi {
            return CapVolume { value: 0.0, error: 0.0 };
        }
        if t <= lo {
            return CapVolume { value: self.base_volume, error: 0.0 };
        }
        let exact = |value: f64| CapVolume { value, error: 0.0 };
        match self.method(u) {
            Method::Polygon => {
                let poly = self.base_polygon.as_ref().expect("polygon method");
                exact(poly.cap_area(&Vec2::new(u[0], u[1]), t))
            }
            Method::Ball => exact(ball_cap(u.len(), t)),
            Method::Ellipsoid => {
                let cu: f64 = self.base.centroid().iter().zip(u).map(|(a, b)| a * b).sum();
                let s = (t - cu) / (hi - cu);
                let n = u.len();
                exact(self.base_volume * ball_cap(n, s) / unit_ball_volume(n))
            }
            Method::PolarPlanar => self.polar(u, t).0,
            Method::AxisSections => {
                let (n, p) = match self.base.kind() {
                    BodyKind::LpBall { n, p } => (*n, *p),
                    _ => unreachable!(),
                };
                // the cap along −e_k at t equals the cap along e_k at t by symmetry
                let section = lp_ball_volume(n - 1, p);
                let e = (n as f64 - 1.0) / p;
                let r = integrate(
                    |s: f64| section * (1.0 - s.abs().powf(p)).max(0.0).powf(e),
                    t,
                    1.0,
                    1e-15 * self.base_volume,
                    1e-14,
                );
                CapVolume { value: r.value, error: r.error }
            }
            Method::MonteCarlo => {
                let cloud = self.cloud();
                let n = u.len();
                let hits = cloud
                    .points
                    .chunks_exact(n)
                    .filter(|x| x.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() >= t)
                    .count();
                let f = hits as f64 / cloud.count as f64;
                CapVolume {
                    value: self.base_volume * f,
                    error: 3.0 * self.base_volume * (f * (1.0 - f) / cloud.count as f64).sqrt(),
                }
            }
        }
    }

    fn polar(&self, u: &[f64], t: f64) -> (CapVolume, f64) {
        let p = match self.base.kind() {
            BodyKind::LpBall { p, .. } => *p,
            _ => unreachable!("polar caps are used for planar l_p balls"),
        };
        let abs_tol = (1e-13 * self.base_volume).min(1e-2 * self.cfg.tol_vol_rel * self.base_volume);
        polar_cap(p, [u[0], u[1]], t, self.base_volume, abs_tol)
    }

    fn cloud(&self) -> &Cloud {
        self.cloud.get_or_init(|| build_cloud(self.base, self.cfg.mc_samples, self.cfg.seed))
    }

    /// Solves cap_volume(u, t) = delta for t.
    pub fn cut_level(&self, u: &[f64], delta: f64) -> Result<CutResult> {
        self.check_direction(u)?;
        let vol = self.volume();
        if !(delta > 0.0 && delta < vol) {
            return Err(Error::domain(format!("cap volume {delta} outside (0, |K| = {vol})")));
        }
        let (ub, offset, scale) = self.reduce(u);
        let tol_base = self.cfg.tol_vol_rel * self.base_volume;
        let delta_base = delta / self.abs_det;
        let hi = self.base.support_raw(&ub);
        let neg: Vec<f64> = ub.iter().map(|v| -v).collect();
        let lo = -self.base.support_raw(&neg);
        let finish = |t_base: f64, cap: f64, err: f64, iterations: usize| CutResult {
            direction: u.to_vec(),
            level: offset + scale * t_base,
            cap_volume: self.abs_det * cap,
            volume_error: self.abs_det * err,
            iterations,
        };
        if delta_base < tol_base {
            return Ok(finish(hi, 0.0, delta_base, 0));
        }
        if delta_base > self.base_volume - tol_base {
            return Ok(finish(lo, self.base_volume, self.base_volume - delta_base, 0));
        }

        if self.method(&ub) == Method::MonteCarlo {
            let (t, cap, err) = self.monte_carlo_quantile(&ub, delta_base);
            return Ok(finish(t, cap, err, 0));
        }

        let opts = RootOptions { f_tol: tol_base, x_tol: 1e-15 * (hi - lo), max_iter: self.cfg.max_iter };
        let solved = if self.method(&ub) == Method::PolarPlanar {
            let fdf = |t: f64| {
                if t <= lo {
                    return (self.base_volume - delta_base, 0.0);
                }
                if t >= hi {
                    return (-delta_base, 0.0);
                }
                let (cap, chord) = self.polar(&ub, t);
                (cap.value - delta_base, -chord)
            };
            newton_bracketed(fdf, lo, hi, opts)
        } else {
            bracketed_root(|t| self.base_cap(&ub, t).value - delta_base, lo, hi, opts)
        };
        let root = solved.map_err(|e| match e {
            Error::Numeric { message, lo: a, hi: b } => Error::Numeric {
                message: format!("cut level did not converge: {message}"),
                lo: offset + scale * a,
                hi: offset + scale * b,
            },
            other => other,
        })?;
        let cap = self.base_cap(&ub, root.x);
        Ok(finish(root.x, cap.value, (cap.value - delta_base).abs().max(cap.error), root.iterations))
    }

    /// Exact root for the empirical measure of the sample cloud: the level
    /// between the k-th and (k+1)-th largest projections.
    fn monte_carlo_quantile(&self, u: &[f64], delta: f64) -> (f64, f64, f64) {
        let cloud = self.cloud();
        let n = u.len();
        let mut proj: Vec<f64> = cloud
            .points
            .chunks_exact(n)
            .map(|x| x.iter().zip(u).map(|(a, b)| a * b).sum())
            .collect();
        proj.sort_by(|a, b| b.total_cmp(a));
        let count = cloud.count as f64;
        let k = ((delta / self.base_volume) * count).round().clamp(1.0, count - 1.0) as usize;
        let t = 0.5 * (proj[k - 1] + proj[k]);
        let f = k as f64 / count;
        let cap = self.base_volume * f;
        let err = 3.0 * self.base_volume * (f * (1.0 - f) / count).sqrt() + self.base_volume / count;
        (t, cap, err)
    }
}

fn lp_norm2(x: f64, y: f64, p: f64) -> f64 {
    let (x, y) = (x.abs(), y.abs());
    let m = x.max(y);
    if m == 0.0 {
        return 0.0;
    }
    m * ((x / m).powf(p) + (y / m).powf(p)).powf(1.0 / p)
}

/// Cap of the planar unit ball B²_p by polar integration about the origin:
/// area = ½∫_{θ1}^{θ2} ρ(θ)² dθ + ½ p2 × p1, where θ1, θ2 are the polar
/// angles of the chord endpoints p1, p2. Also returns the chord length,
/// which is −d(area)/dt.
fn polar_cap(p: f64, u: [f64; 2], t: f64, volume: f64, abs_tol: f64) -> (CapVolume, f64) {
    let rho = |th: f64| 1.0 / lp_norm2(th.cos(), th.sin(), p);
    let along = |th: f64| rho(th) * (th.cos() * u[0] + th.sin() * u[1]);
    // the support point of B²_p in direction u, and its antipode
    let q = p / (p - 1.0);
    let w = lp_norm2(u[0], u[1], q);
    let top = [u[0].signum() * (u[0].abs() / w).powf(q - 1.0), u[1].signum() * (u[1].abs() / w).powf(q - 1.0)];
    let th_bot = (-top[1]).atan2(-top[0]);
    let mut th_top = top[1].atan2(top[0]);
    while th_top <= th_bot {
        th_top += 2.0 * PI;
    }
    let opts = RootOptions { f_tol: 0.0, x_tol: 1e-15, max_iter: 200 };
    let solve = |a: f64, b: f64| {
        bracketed_root(|th| along(th) - t, a, b, opts)
            .map(|r| r.x)
            .unwrap_or_else(|e| match e {
                Error::Numeric { lo, hi, .. } => 0.5 * (lo + hi),
                _ => 0.5 * (a + b),
            })
    };
    let th1 = solve(th_bot, th_top);
    let th2 = solve(th_top, th_bot + 2.0 * PI);
    let point = |th: f64| {
        let r = rho(th);
        Vec2::new(r * th.cos(), r * th.sin())
    };
    let p1 = point(th1);
    let p2 = point(th2);
    // ρ is only finitely smooth on the axes; integrate piecewise between them
    let mut knots = vec![th1];
    let mut k = (th1 / (0.5 * PI)).floor() + 1.0;
    while k * 0.5 * PI < th2 {
        knots.push(k * 0.5 * PI);
        k += 1.0;
    }
    knots.push(th2);
    let mut value = 0.5 * cross(&p2, &p1);
    let mut error = 0.0;
    let pieces = (knots.len() - 1) as f64;
    for w in knots.windows(2) {
        let r = integrate(|th| 0.5 * rho(th).powi(2), w[0], w[1], abs_tol / pieces, 1e-14);
        value += r.value;
        error += r.error;
    }
    (CapVolume { value: value.clamp(0.0, volume), error }, (p2 - p1).norm())
}

fn build_cloud(base: &BodySpec, target: usize, seed: u64) -> Cloud {
    let n = base.dim();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in 0..n {
        e[i] = 1.0;
        hi[i] = base.support_raw(&e);
        e[i] = -1.0;
        lo[i] = -base.support_raw(&e);
        e[i] = 0.0;
    }
    let box_vol: f64 = (0..n).map(|i| hi[i] - lo[i]).product();
    let fill = base.volume() / box_vol;
    let cells = ((target as f64 / fill).powf(1.0 / n as f64)).ceil().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(target * n + n);
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    'cells: loop {
        for i in 0..n {
            let w = (hi[i] - lo[i]) / cells as f64;
            x[i] = lo[i] + w * (idx[i] as f64 + rng.random::<f64>());
        }
        if base.gauge(&x) <= 1.0 {
            points.extend_from_slice(&x);
        }
        for k in idx.iter_mut().take(n) {
            *k += 1;
            if *k < cells {
                continue 'cells;
            }
            *k = 0;
        }
        break;
    }
    let count = points.len() / n;
    Cloud { points, count }
}

/// |K ∩ {⟨x,u⟩ >= t}| with the default configuration.
pub fn cap_volume(body: &BodySpec, u: &[f64], t: f64) -> Result<f64> {
    CapSolver::new(body, CapConfig::default()).cap_volume(u, t).map(|c| c.value)
}

/// Cut level t(u, δ) with the default configuration.
pub fn cut_level(body: &BodySpec, u: &[f64], delta: f64) -> Result<CutResult> {
    CapSolver::new(body, CapConfig::default()).cut_level(u, delta)
}
