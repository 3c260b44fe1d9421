//! Closed-form threshold δ(K) below which K_δ homothetic to K forces K to
//! be an ellipsoid.

use crate::body::unit_ball_volume;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdInputs {
    pub n: usize,
    /// τ = T_M / T_m >= 1.
    pub tau: f64,
    pub t_max: f64,
    /// κ(x_m)^{−1/(n−1)}.
    pub r_m: f64,
    /// κ(x_M)^{−1/(n−1)}.
    pub r_cap_m: f64,
    /// Bound on third derivatives of the boundary graphs.
    pub d: f64,
    /// Inscribed rolling-ball radius.
    pub rho_0: f64,
    /// Circumscribed rolling-ball radius.
    pub r: f64,
}

/// Which term of the minimum defines `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ABound {
    /// 1 − (2/(1+τ))^{(n+1)/(n−1)}; the δ_2 bracket then vanishes.
    Lower,
    /// (3τ/(1+2τ))^{(n+1)/(n−1)} − 1; the δ_1 bracket then vanishes.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub a: f64,
    pub a_bound: ABound,
    pub delta_0: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_m: f64,
    pub delta_cap_m: f64,
    /// (1−a)ⁿ r_mⁿ |Bⁿ|/2 and the r_M analogue.
    pub ball_terms: (f64, f64),
    pub delta_k: f64,
    pub t_am: f64,
    pub t_m1: f64,
    pub t_m2: f64,
    pub big_delta_am: f64,
    pub big_delta_a_cap_m: f64,
    pub xi: f64,
    /// Δ_{a,M} evaluated with the printed denominators 2(1−a)r_m and
    /// 2(1−a)R̄_M, and the δ_M it gives.
    pub literal_big_delta_a_cap_m: f64,
    pub literal_delta_cap_m: f64,
}

impl ThresholdInputs {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::domain(format!("n must be at least 2 (got {})", self.n)));
        }
        let named = [
            ("T_M", self.t_max),
            ("r_m", self.r_m),
            ("r_M", self.r_cap_m),
            ("D", self.d),
            ("rho_0", self.rho_0),
            ("R", self.r),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive and finite (got {v})")));
            }
        }
        if !(self.tau >= 1.0 && self.tau.is_finite()) {
            return Err(Error::domain(format!("tau must be finite and at least 1 (got {})", self.tau)));
        }
        if self.rho_0 > self.r {
            return Err(Error::domain(format!("rho_0 = {} exceeds R = {}", self.rho_0, self.r)));
        }
        Ok(())
    }
}

/// A bracket [·] that is nonnegative by the choice of a. Values within
/// rounding of zero are snapped to zero; a clearly negative value means the
/// formulas were evaluated inconsistently.
fn bracket(v: f64, name: &str) -> Result<f64> {
    if v < -1e-12 {
        return Err(Error::Consistency(format!("{name} bracket is negative ({v})")));
    }
    Ok(if v.abs() <= 1e-14 { 0.0 } else { v })
}

pub fn threshold(inp: &ThresholdInputs) -> Result<ThresholdReport> {
    inp.validate()?;
    let nu = inp.n;
    let n = nu as f64;
    let tau = inp.tau;
    let e = (n + 1.0) / (n - 1.0);
    let half = (n + 1.0) / 2.0;
    let bn1 = unit_ball_volume(nu - 1);
    let bn = unit_ball_volume(nu);

    let lower = 1.0 - (2.0 / (1.0 + tau)).powf(e);
    let upper = (3.0 * tau / (1.0 + 2.0 * tau)).powf(e) - 1.0;
    let (a, a_bound) = if lower <= upper { (lower, ABound::Lower) } else { (upper, ABound::Upper) };
    let a = a.max(0.0);

    let q = inp.rho_0 / (4.0 * inp.r);
    // 1 − √(1 − q²) without cancellation
    let dip = q * q / (1.0 + (1.0 - q * q).sqrt());
    let delta_0 = inp.rho_0.powf(n - 1.0) * inp.r * bn1 / (n * 2f64.powf(n - 1.0)) * dip.powf(n);

    let cube = (n - 1.0).powi(3);
    let rbar_m = (1.0 - a) * inp.r_m;
    let t_am = rbar_m.min(3.0 * a / (inp.d * rbar_m * cube));
    let delta_m = t_am.powf(n + 1.0) * bn1 / (2f64.powf((n - 1.0) / 2.0) * (n + 1.0) * rbar_m);
    let big_delta_am = rbar_m - (rbar_m * rbar_m - t_am * t_am).max(0.0).sqrt();

    let b2 = bracket(1.0 - (2.0 / (tau + 1.0)).powf(e) / (1.0 - a), "delta_2")?;
    let delta_2 = 2f64.powf(3.0 * half) * ((1.0 - a) / (1.0 + tau)).powf(half) * inp.r_m.powf(n) * bn1 / (n + 1.0)
        * b2.powf(half);

    let b1 = bracket(1.0 - (1.0 + a).powf(1.0 / e) * (2.0 * tau + 1.0) / (3.0 * tau), "delta_1")?;
    let delta_1 = b1.powf(half) * 2f64.powf((n + 3.0) / 2.0) * bn1 * (1.0 + a).powf((n - 1.0) / 2.0)
        / ((n - 1.0).powf(half) * inp.t_max.powf(half) * (n + 1.0));

    let rbar_cap = (1.0 - a) * inp.r_cap_m;
    let rbig_cap = (1.0 + a) * inp.r_cap_m;
    let xi = 1.0 + a / 2.0;
    let t_m1 = rbar_cap.min(3.0 * a / (inp.d * rbar_cap * cube));
    let t_m2 = (2.0 * (xi - 1.0).sqrt() / xi * rbig_cap).min(3.0 * a / (2.0 * inp.d * rbig_cap * cube));
    let big_delta_a_cap_m =
        (t_m1 * t_m1 / (2.0 * (1.0 - a) * inp.r_cap_m)).min(t_m2 * t_m2 / (2.0 * (1.0 + a) * inp.r_cap_m));
    let literal = (t_m1 * t_m1 / (2.0 * (1.0 - a) * inp.r_m)).min(t_m2 * t_m2 / (2.0 * (1.0 - a) * rbig_cap));
    let cap_m = |big: f64| 2.0 * bn1 / (n + 1.0) * rbar_cap.powf((n - 1.0) / 2.0) * big.powf(half);
    let delta_cap_m = cap_m(big_delta_a_cap_m);

    let ball_terms = (
        (1.0 - a).powf(n) * inp.r_m.powf(n) * bn / 2.0,
        (1.0 - a).powf(n) * inp.r_cap_m.powf(n) * bn / 2.0,
    );
    let delta_k = [delta_0, delta_1, delta_2, delta_m, delta_cap_m, ball_terms.0, ball_terms.1]
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    Ok(ThresholdReport {
        a,
        a_bound,
        delta_0,
        delta_1,
        delta_2,
        delta_m,
        delta_cap_m,
        ball_terms,
        delta_k,
        t_am,
        t_m1,
        t_m2,
        big_delta_am,
        big_delta_a_cap_m,
        xi,
        literal_big_delta_a_cap_m: literal,
        literal_delta_cap_m: cap_m(literal),
    })
}

/// Volume of the cap of height h of an n-ball of radius r:
/// |B^{n−1}| ∫_{r−h}^{r} (r² − y²)^{(n−1)/2} dy.
pub fn ball_cap_volume(n: usize, r: f64, h: f64) -> f64 {
    let k = (n as f64 - 1.0) / 2.0;
    unit_ball_volume(n - 1) * integrate(|y| (r * r - y * y).max(0.0).powf(k), r - h, r, 1e-300, 1e-12).value
}

/// The integral forms δ_{m,1} and δ_{M,1}; they bound δ_m and δ_M from
/// above.
pub fn integral_cross_check(inp: &ThresholdInputs, rep: &ThresholdReport) -> (f64, f64) {
    let rbar_m = (1.0 - rep.a) * inp.r_m;
    let rbar_cap = (1.0 - rep.a) * inp.r_cap_m;
    let rbig_cap = (1.0 + rep.a) * inp.r_cap_m;
    let d1 = rbar_cap - (rbar_cap * rbar_cap - rep.t_m1 * rep.t_m1).max(0.0).sqrt();
    let d2 = rbig_cap - (rbig_cap * rbig_cap - rep.t_m2 * rep.t_m2).max(0.0).sqrt();
    (
        ball_cap_volume(inp.n, rbar_m, rep.big_delta_am),
        ball_cap_volume(inp.n, rbar_cap, d1.min(d2)),
    )
}
