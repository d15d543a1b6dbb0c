//! Saddle-point equation of the kernel phase and the sub-Riemannian distance.
//!
//! The phase `f(y) = acosh²(cosh r cosh y) - (y - iθ)²` of the subelliptic
//! kernel integral has a critical point at `y = iφ(r,θ)`, where φ solves
//!
//! ```text
//! φ - θ = cosh r · sin φ · G(u),   u = cosh r · cos φ,
//! ```
//!
//! with `G(u) = acosh(u)/√(u²-1)`. As a function of `u`, `G` continues
//! analytically through `u = 1` to `arccos(u)/√(1-u²)` on `u < 1`: both are
//! the single analytic function `T(s) = x/sinh x` of `s = acosh²(u)` (with
//! `s = -arccos²(u) < 0` for `u < 1`). The solution leaves the `u > 1` region
//! as soon as `|θ| > sinh r - arctan(sinh r)`, so the full φ-domain is
//! `(-ψ, ψ)` with `ψ = π - arctan(sinh r) = arccos(-1/cosh r)`, on which the
//! map `φ -> θ` is strictly decreasing onto all of ℝ.
//!
//! The squared sub-Riemannian distance from the north pole is the saddle
//! value of the phase:
//!
//! ```text
//! d²(0,θ) = 2π|θ| + θ²                    (vertical axis, cut locus)
//! d²(r,θ) = (φ-θ)² tanh²r / sin²φ         (r > 0)
//! ```
//!
//! and the curvature of the phase at the saddle,
//! `f''(iφ) = 2 sinh²r (u·G(u) - 1)/(u²-1) = 2 sinh²r · W(s) · T(s)²`, is
//! real positive on both branches.

use crate::error::{Error, Result};
use crate::special::acosh_safe;
use crate::types::{CylPoint, EvalContext, Space};

/// Saddle angle and diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct PhiSolution {
    /// Saddle angle φ(r,θ); `sign(φ) = -sign(θ)`.
    pub phi: f64,
    /// `u = cosh r · cos φ`; exceeds 1 only for `|θ| < sinh r - arctan(sinh r)`.
    pub u: f64,
    /// Half-width `ψ = arccos(-1/cosh r)` of the φ-domain (the integrand's
    /// analyticity strip reaches `|Im y| < ψ`).
    pub strip_bound: f64,
    /// `|(φ-θ) - cosh r sin φ G(u)|` at the returned root.
    pub residual: f64,
}

/// Which closed form produced a distance value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Origin,
    Axis,
    General,
}

/// Squared distance, distance, and the regime that produced them.
#[derive(Debug, Clone, Copy)]
pub struct DistanceValue {
    pub d2: f64,
    pub d: f64,
    pub regime: Regime,
}

/// Positive curvature `f''(iφ(r,θ))` of the saddle phase.
#[derive(Debug, Clone, Copy)]
pub struct SaddleCurvature {
    pub f2: f64,
}

/// Signed squared half-angle `s = acosh²(u)` as a function of `ζ = u - 1`:
/// positive for `u > 1`, negative (`-arccos²u`) for `u < 1`, analytic through
/// `ζ = 0`. Valid for `u > -1`.
pub(crate) fn phase_s(zeta: f64) -> f64 {
    if zeta > 7e-3 {
        let d = (zeta + (zeta * (2.0 + zeta)).sqrt()).ln_1p();
        d * d
    } else if zeta >= -7e-3 {
        // Newton on cosh √s = 1 + ζ in the variable s (sign-agnostic)
        let mut a = 2.0 * zeta;
        for _ in 0..3 {
            let f = a
                * (0.5
                    + a * (1.0 / 24.0 + a * (1.0 / 720.0 + a * (1.0 / 40320.0 + a / 3628800.0))))
                - zeta;
            let df = 0.5
                + a * (1.0 / 12.0 + a * (1.0 / 240.0 + a * (1.0 / 10080.0 + a / 725760.0)));
            a -= f / df;
        }
        a
    } else {
        let v = (1.0 + zeta).acos();
        -v * v
    }
}

/// `T(s) = x/sinh x` at `s = x²`, continued to `v/sin v` for `s = -v² < 0`.
pub(crate) fn t_ratio(s: f64) -> f64 {
    if s > 0.02 {
        let x = s.sqrt();
        x / x.sinh()
    } else if s >= -0.02 {
        // 1 / (1 + s/6 + s²/120 + s³/5040 + s⁴/362880)
        1.0 / (1.0 + s * (1.0 / 6.0 + s * (1.0 / 120.0 + s * (1.0 / 5040.0 + s / 362880.0))))
    } else {
        let v = (-s).sqrt();
        v / v.sin()
    }
}

/// `W(s) = (x coth x - 1)/s` at `s = x²`, continued to `(1 - v cot v)/v²`
/// for `s < 0`; `W > 0` everywhere on `s > -π²`, `W(0) = 1/3`.
pub(crate) fn w_ratio(s: f64) -> f64 {
    if s > 0.02 {
        let x = s.sqrt();
        (x * x.cosh() / x.sinh() - 1.0) / s
    } else if s >= -0.02 {
        1.0 / 3.0 + s * (-1.0 / 45.0 + s * (2.0 / 945.0 + s * (-1.0 / 4725.0 + s * 2.0 / 93555.0)))
    } else {
        let v = (-s).sqrt();
        (1.0 - v * v.cos() / v.sin()) / (v * v)
    }
}

/// `ζ = cosh r cos φ - 1` without cancellation.
fn zeta_u(r: f64, phi: f64) -> f64 {
    let sh = (0.5 * r).sinh();
    let sp = (0.5 * phi).sin();
    2.0 * sh * sh * phi.cos() - 2.0 * sp * sp
}

/// Half-width of the φ-domain, `ψ = π - arctan(sinh r) = arccos(-1/cosh r)`.
fn phi_domain(r: f64) -> f64 {
    std::f64::consts::PI - r.sinh().atan()
}

/// Saddle equation residual `M(φ) = (φ - θ) - cosh r sin φ T(s(φ))` and its
/// derivative `M'(φ) = -sinh²r W(s) T(s)²`.
fn saddle_m(r: f64, theta: f64, phi: f64) -> (f64, f64) {
    let s = phase_s(zeta_u(r, phi));
    let t = t_ratio(s);
    let m = (phi - theta) - r.cosh() * phi.sin() * t;
    let sh = r.sinh();
    let dm = -sh * sh * w_ratio(s) * t * t;
    (m, dm)
}

/// Solve the saddle equation for `φ(r,θ)`. The map `φ -> θ` is strictly
/// decreasing on `(-ψ, ψ)`, so a bracketing bisection refined by safeguarded
/// Newton steps always lands on the unique root. `φ(r,0) = 0` exactly.
pub fn phi_solve(r: f64, theta: f64) -> Result<PhiSolution> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(
            "phi_solve",
            format!("r must be positive (the origin regime has its own closed form), got {r}"),
        ));
    }
    if !theta.is_finite() {
        return Err(Error::domain("phi_solve", "theta must be finite"));
    }
    let psi = phi_domain(r);
    if theta == 0.0 {
        return Ok(PhiSolution {
            phi: 0.0,
            u: r.cosh(),
            strip_bound: psi,
            residual: 0.0,
        });
    }

    // root lies in (-ψ, 0) for θ > 0 and (0, ψ) for θ < 0
    let edge = psi * (1.0 - 1e-14);
    let (mut lo, mut hi) = if theta > 0.0 { (-edge, 0.0) } else { (0.0, edge) };
    // M is decreasing: M(lo) > 0 > M(hi)
    let mut phi = 0.5 * (lo + hi);
    for iter in 0..200 {
        let (m, dm) = saddle_m(r, theta, phi);
        if m == 0.0 {
            break;
        }
        if m > 0.0 {
            lo = phi;
        } else {
            hi = phi;
        }
        let newton = phi - m / dm;
        let next = if newton.is_finite() && newton > lo && newton < hi && iter >= 4 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == phi || hi - lo <= f64::EPSILON * psi {
            break;
        }
        phi = next;
    }
    let (m, _) = saddle_m(r, theta, phi);
    Ok(PhiSolution {
        phi,
        u: r.cosh() * phi.cos(),
        strip_bound: psi,
        residual: m.abs(),
    })
}

/// Sub-Riemannian distance from the north pole.
///
/// Regimes: at `r < 1e-4` the vertical closed form `d² = 2π|θ| + θ²`; at
/// `|θ| < 1e-6` (r > 0) the axis limit `d = r`; otherwise the saddle formula
/// `d² = (φ-θ)² tanh²r / sin²φ`. On the compact space θ is first
/// canonicalized to `[-π, π]`.
pub fn sr_distance(ctx: &EvalContext, pt: &CylPoint) -> Result<DistanceValue> {
    let r = pt.r;
    let theta = match ctx.space {
        Space::CompactCircleBundle => CylPoint::canonical_theta(pt.theta),
        Space::UniversalCover => pt.theta,
    };
    if r < 1e-4 {
        let d2 = 2.0 * std::f64::consts::PI * theta.abs() + theta * theta;
        return Ok(DistanceValue {
            d2,
            d: d2.sqrt(),
            regime: Regime::Origin,
        });
    }
    if theta.abs() < 1e-6 {
        // limit of the saddle formula: (φ-θ)/sin φ -> r coth r, and
        // r coth r · tanh r = r
        return Ok(DistanceValue {
            d2: r * r,
            d: r,
            regime: Regime::Axis,
        });
    }
    let sol = phi_solve(r, theta)?;
    let num = (sol.phi - theta) * r.tanh() / sol.phi.sin();
    let d2 = num * num;
    Ok(DistanceValue {
        d2,
        d: d2.sqrt(),
        regime: Regime::General,
    })
}

/// [`f_second_derivative`] once the saddle angle is already known.
pub(crate) fn f2_from_phi(r: f64, phi: f64) -> f64 {
    let s = phase_s(zeta_u(r, phi));
    let sh = r.sinh();
    let t = t_ratio(s);
    2.0 * sh * sh * w_ratio(s) * t * t
}

/// Curvature of the saddle phase,
/// `f''(iφ) = 2 sinh²r (u G(u) - 1)/(u² - 1) = 2 sinh²r W(s) T(s)²`,
/// a real positive number on both branches of `u`.
pub fn f_second_derivative(r: f64, theta: f64) -> Result<SaddleCurvature> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain("f_second_derivative", "r must be positive"));
    }
    let sol = phi_solve(r, theta)?;
    Ok(SaddleCurvature {
        f2: f2_from_phi(r, sol.phi),
    })
}

/// `acosh` of values `>= 1 - 1e-12`, re-exported for callers working with
/// the phase directly.
pub fn riemannian_distance(cosh_value: f64) -> Result<f64> {
    acosh_safe(cosh_value)
}
