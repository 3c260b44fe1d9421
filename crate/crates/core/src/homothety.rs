//! Homothety defect of discretized floating bodies and the Petty scan.

use rayon::prelude::*;

use crate::body::{BodySpec, Point};
use crate::curvature::boundary_samples;
use crate::error::{Error, Result};
use crate::floating::{floating_body_with, FloatingOptions};
use crate::polygon::{support_gap, PolygonChain, HAUSDORFF_DIRECTIONS};

pub use crate::polygon::hausdorff;

/// Defect floor of the "homothetic at resolution m" verdict.
pub const CLASSIFICATION_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct HomothetyReport {
    pub delta: f64,
    pub directions: usize,
    /// (|hull| / |K|)^{1/n}.
    pub c: f64,
    /// Hausdorff(hull, c·K) / minimal width of K.
    pub defect: f64,
    /// Estimated hull error, normalized like the defect.
    pub discretization_error: f64,
    /// defect <= max(1e-3, 5 × discretization_error). A numerical verdict
    /// at the given resolution, not a proof.
    pub homothetic: bool,
    /// Least-squares fit of h_hull ≈ c·h_K over the sampled directions.
    pub c_lsq: f64,
    pub hull: PolygonChain,
}

/// Compares a planar hull with the homothetic copy c·K of the (centered)
/// body, c from the area ratio.
pub fn hull_defect(hull: &PolygonChain, body: &BodySpec) -> Result<(f64, f64, f64)> {
    if body.dim() != 2 {
        return Err(Error::unsupported("homothety defects are planar"));
    }
    let c = (hull.area() / body.volume()).sqrt();
    let h = |u: &crate::polygon::Vec2| body.support_raw(&[u.x, u.y]);
    let gap = support_gap(|u| hull.support(u), |u| c * h(u), HAUSDORFF_DIRECTIONS);
    let width = body.min_width()?;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..HAUSDORFF_DIRECTIONS {
        let u = crate::polygon::unit(2.0 * std::f64::consts::PI * k as f64 / HAUSDORFF_DIRECTIONS as f64);
        num += hull.support(&u) * h(&u);
        den += h(&u) * h(&u);
    }
    Ok((c, gap / width, num / den))
}

/// How far the discretized K_δ is from a homothetic copy of K.
///
/// K is re-centered at its centroid first, so the homothety center is
/// always the centroid.
pub fn homothety_defect(body: &BodySpec, delta: f64, m: usize) -> Result<HomothetyReport> {
    homothety_defect_with(body, delta, m, &FloatingOptions::default())
}

pub fn homothety_defect_with(body: &BodySpec, delta: f64, m: usize, opts: &FloatingOptions) -> Result<HomothetyReport> {
    if body.dim() != 2 {
        return Err(Error::unsupported("homothety defects are planar"));
    }
    if !(delta > 0.0) {
        return Err(Error::domain(format!("delta must be positive (got {delta})")));
    }
    let centered = body.recentered();
    let opts = FloatingOptions { estimate_error: true, ..*opts };
    let fb = floating_body_with(&centered, delta, m, &opts)?;
    let hull = fb.hull.polygon().cloned().ok_or_else(|| Error::unsupported("planar hull expected"))?;
    let (c, defect, c_lsq) = hull_defect(&hull, &centered)?;
    let discretization_error = fb.discretization_error.unwrap_or(0.0) / centered.min_width()?;
    let homothetic = defect <= CLASSIFICATION_FLOOR.max(5.0 * discretization_error);
    Ok(HomothetyReport { delta, directions: m, c, defect, discretization_error, homothetic, c_lsq, hull })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PettySample {
    pub point: Point,
    pub curvature: f64,
    /// κ(x) / ⟨x, N(x)⟩^{n+1}.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PettyScan {
    pub samples: Vec<PettySample>,
    /// (min value)^{1/(n+1)}.
    pub t_min: f64,
    /// (max value)^{1/(n+1)}.
    pub t_max: f64,
    /// t_max / t_min, or +∞ when degenerate.
    pub tau: f64,
    /// The same ratio over the samples with finite nonzero curvature.
    pub finite_tau: f64,
    pub x_min: Point,
    pub x_max: Point,
    /// Some sampled curvature is 0 or +∞.
    pub degenerate: bool,
}

/// Scans the Petty functional κ/⟨x,N⟩^{n+1} over m boundary points of the
/// centered body.
pub fn petty_scan(body: &BodySpec, m: usize) -> Result<PettyScan> {
    if !body.is_smooth() {
        return Err(Error::unsupported("the Petty scan needs a body with boundary curvature"));
    }
    if m < 16 {
        return Err(Error::input(format!("at least 16 samples are required (got {m})")));
    }
    let centered = body.recentered();
    let n = centered.dim();
    let floor = 1e-9 * centered.diameter_bound();
    let points = boundary_samples(&centered, m)?;
    let samples: Vec<PettySample> = points
        .into_par_iter()
        .map(|x| {
            let normal = centered.normal_at(&x)?;
            let h: f64 = x.iter().zip(&normal).map(|(a, b)| a * b).sum();
            if !(h > floor) {
                return Err(Error::Consistency(format!("⟨x, N⟩ = {h} at a boundary point of a centered body")));
            }
            let curvature = centered.gauss_curvature(&x)?;
            Ok(PettySample { value: curvature / h.powi(n as i32 + 1), curvature, point: x })
        })
        .collect::<Result<_>>()?;
    let root = 1.0 / (n as f64 + 1.0);
    let imin = argext(&samples, |a, b| a < b, |_| true);
    let imax = argext(&samples, |a, b| a > b, |_| true);
    let degenerate = samples.iter().any(|s| s.curvature == 0.0 || s.curvature.is_infinite());
    let t_min = samples[imin].value.powf(root);
    let t_max = samples[imax].value.powf(root);
    let finite = |s: &PettySample| s.curvature > 0.0 && s.curvature.is_finite();
    let finite_tau = if samples.iter().any(finite) {
        let lo = samples[argext(&samples, |a, b| a < b, finite)].value;
        let hi = samples[argext(&samples, |a, b| a > b, finite)].value;
        (hi / lo).powf(root)
    } else {
        f64::NAN
    };
    Ok(PettyScan {
        tau: if degenerate { f64::INFINITY } else { t_max / t_min },
        finite_tau,
        t_min,
        t_max,
        x_min: samples[imin].point.clone(),
        x_max: samples[imax].point.clone(),
        degenerate,
        samples,
    })
}

fn argext(s: &[PettySample], better: impl Fn(f64, f64) -> bool, keep: impl Fn(&PettySample) -> bool) -> usize {
    let mut best: Option<usize> = None;
    for (i, x) in s.iter().enumerate() {
        if keep(x) && best.is_none_or(|b| better(x.value, s[b].value)) {
            best = Some(i);
        }
    }
    best.unwrap_or(0)
}
