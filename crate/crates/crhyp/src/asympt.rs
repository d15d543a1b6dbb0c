//! Small-time asymptotics of the subelliptic heat kernel: the four regimes
//! (diagonal, vertical cut locus, axis, generic point) and the diagonal
//! constants `A_n`, `B_n`.

use crate::distance::{phase_s, phi_solve, sr_distance, t_ratio, w_ratio};
use crate::error::{Error, Result};
use crate::quad::integrate_adaptive_seeded;
use crate::riemannian::small_time_bracket;
use crate::special::gamma_int;
use crate::types::{CylPoint, EvalContext, EvalResult, HeatTime, QuadSpec};

/// Diagonal expansion constants `p_t(0,0) = (4πt)^{-(n+1)}(A_n + B_n t + …)`:
/// `A_n = ∫ (y/sinh y)ⁿ dy` and `B_n` the same integral weighted by the
/// first-order bracket of the kernel expansion.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticConstants {
    pub n: u32,
    pub a_n: f64,
    pub b_n: f64,
}

fn axis_ratio_pow(n: u32, y: f64) -> f64 {
    if y.abs() < 1e-6 {
        1.0 - n as f64 * y * y / 6.0
    } else {
        (y / y.sinh()).powi(n as i32)
    }
}

/// Both diagonal constants by adaptive quadrature. The integrands decay like
/// `(2y)ⁿ e^{-ny}`; the y = 0 limits are evaluated by series. The quadrature
/// is split at zero so each panel sees a smooth integrand.
pub fn an_bn_constants(n: u32, spec: &QuadSpec) -> Result<AsymptoticConstants> {
    if n < 1 {
        return Err(Error::domain("an_bn_constants", "n must be >= 1"));
    }
    spec.validate()?;
    let y_max = (spec.exponent_cutoff + 10.0) / n as f64 + 5.0;
    let seeds = (2.0 * y_max).ceil() as usize;
    let a = integrate_adaptive_seeded(|y: f64| axis_ratio_pow(n, y), 0.0, y_max, seeds, spec)?;
    let b = integrate_adaptive_seeded(
        |y: f64| axis_ratio_pow(n, y) * small_time_bracket(n as f64, y.abs()),
        0.0,
        y_max,
        seeds,
        spec,
    )?;
    Ok(AsymptoticConstants {
        n,
        a_n: 2.0 * a.value,
        b_n: 2.0 * b.value,
    })
}

/// Diagonal small-time law `p_t(0,0) ≈ (4πt)^{-(n+1)} (A_n + B_n t)`.
pub fn asym_diagonal(ctx: &EvalContext, t: HeatTime, spec: &QuadSpec) -> Result<EvalResult> {
    let c = an_bn_constants(ctx.n(), spec)?;
    let tt = t.get();
    let value = (4.0 * std::f64::consts::PI * tt).powi(-(ctx.n() as i32) - 1)
        * (c.a_n + c.b_n * tt);
    Ok(EvalResult::exact(value))
}

/// Vertical cut-locus law
/// `p_t(0,θ) ≈ |θ|^{n-1} / (2^{3n} t^{2n} (n-1)!) · e^{-(2π|θ|+θ²)/4t}`.
///
/// The kernel is even in θ, so `|θ|` appears throughout (the exponent then
/// equals `e^{-d²(0,θ)/4t}`).
pub fn asym_vertical(ctx: &EvalContext, t: HeatTime, theta: f64) -> Result<EvalResult> {
    if theta == 0.0 {
        return Err(Error::Regime {
            op: "asym_vertical",
            msg: "theta = 0 is the diagonal".into(),
            valid_path: "asym_diagonal",
        });
    }
    let n = ctx.n();
    let tt = t.get();
    let th = theta.abs();
    let value = th.powi(n as i32 - 1)
        / (2.0f64.powi(3 * n as i32) * tt.powi(2 * n as i32) * gamma_int(n))
        * (-(2.0 * std::f64::consts::PI * th + th * th) / (4.0 * tt)).exp();
    Ok(EvalResult::exact(value))
}

/// Axis law `p_t(r,0) ≈ e^{-r²/4t} (4πt)^{-(n+1/2)} (r/sinh r)ⁿ
/// (r coth r - 1)^{-1/2}`.
pub fn asym_axis(ctx: &EvalContext, t: HeatTime, r: f64) -> Result<EvalResult> {
    if !(r > 0.0) {
        return Err(Error::Regime {
            op: "asym_axis",
            msg: "r = 0 is the diagonal".into(),
            valid_path: "asym_diagonal",
        });
    }
    let n = ctx.n() as f64;
    let tt = t.get();
    let value = (-r * r / (4.0 * tt)).exp()
        * (4.0 * std::f64::consts::PI * tt).powf(-(n + 0.5))
        * (r / r.sinh()).powi(ctx.n() as i32)
        * (r / r.tanh() - 1.0).sqrt().recip();
    Ok(EvalResult::exact(value))
}

/// Generic-point steepest-descent law
/// `p_t(r,θ) ≈ (4πt)^{-(n+1/2)} / sinh r · T(s)^{n-1} / √(W(s)) · e^{-d²/4t}`
/// where `s = acosh²(u(r,θ))` and `T`, `W` are the continued ratio functions
/// (the displayed amplitude `(acosh u)ⁿ / [√(uG-1) (u²-1)^{(n-1)/2}]`
/// simplifies to `T^{n-1}/√W` on both branches of `u`).
pub fn asym_general(ctx: &EvalContext, t: HeatTime, pt: &CylPoint) -> Result<EvalResult> {
    if !(pt.r > 0.0) {
        return Err(Error::Regime {
            op: "asym_general",
            msg: "r = 0 is the vertical cut locus".into(),
            valid_path: "asym_vertical",
        });
    }
    if pt.theta == 0.0 {
        return Err(Error::Regime {
            op: "asym_general",
            msg: "theta = 0 is the axis regime".into(),
            valid_path: "asym_axis",
        });
    }
    let n = ctx.n() as f64;
    let tt = t.get();
    let sol = phi_solve(pt.r, pt.theta)?;
    // ζ = u - 1 recomputed stably from φ rather than taken from u
    let sh = (0.5 * pt.r).sinh();
    let sp = (0.5 * sol.phi).sin();
    let zeta = 2.0 * sh * sh * sol.phi.cos() - 2.0 * sp * sp;
    let s = phase_s(zeta);
    let d2 = {
        let num = (sol.phi - pt.theta) * pt.r.tanh() / sol.phi.sin();
        num * num
    };
    let amplitude = t_ratio(s).powi(ctx.n() as i32 - 1) / w_ratio(s).sqrt();
    let value = (4.0 * std::f64::consts::PI * tt).powf(-(n + 0.5)) / pt.r.sinh()
        * amplitude
        * (-d2 / (4.0 * tt)).exp();
    Ok(EvalResult::exact(value))
}

/// Exponent argument `-d²/4t` used by [`asym_general`]; exposed so tests can
/// assert it coincides with [`sr_distance`].
pub fn asym_general_exponent(ctx: &EvalContext, t: HeatTime, pt: &CylPoint) -> Result<f64> {
    let d = sr_distance(ctx, pt)?;
    Ok(-d.d2 / (4.0 * t.get()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Space;
    use approx::assert_relative_eq;

    fn cover(n: u32) -> EvalContext {
        EvalContext::new(n, Space::UniversalCover).unwrap()
    }

    #[test]
    fn diagonal_constants_match_closed_forms() {
        let spec = QuadSpec::default();
        let c1 = an_bn_constants(1, &spec).unwrap();
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert_relative_eq!(c1.a_n, pi2 / 2.0, max_relative = 1e-9);
        assert_relative_eq!(c1.a_n, 4.934802, max_relative = 1e-6);
        // n(n-1) = 0 leaves only the -n² term: B₁ = -A₁
        assert_relative_eq!(c1.b_n, -c1.a_n, max_relative = 1e-9);
        let c2 = an_bn_constants(2, &spec).unwrap();
        assert_relative_eq!(c2.a_n, pi2 / 3.0, max_relative = 1e-9);
        assert_relative_eq!(c2.a_n, 3.289868, max_relative = 1e-6);
    }

    #[test]
    fn diagonal_scaling_identity() {
        let spec = QuadSpec::default();
        let ctx = cover(2);
        let t = HeatTime::new(0.07).unwrap();
        let v = asym_diagonal(&ctx, t, &spec).unwrap();
        let c = an_bn_constants(2, &spec).unwrap();
        let scaled = v.value * (4.0 * std::f64::consts::PI * 0.07f64).powi(3);
        assert_relative_eq!(scaled - c.a_n, c.b_n * 0.07, max_relative = 1e-9);
    }

    #[test]
    fn vertical_prefactor_n1() {
        let ctx = cover(1);
        let t = HeatTime::new(0.02).unwrap();
        let th = 0.8;
        let v = asym_vertical(&ctx, t, th).unwrap();
        let expect = 1.0 / (8.0 * 0.02f64 * 0.02)
            * (-(2.0 * std::f64::consts::PI * th + th * th) / 0.08).exp();
        assert_relative_eq!(v.value, expect, max_relative = 1e-13);
        // evenness via |θ|
        let m = asym_vertical(&ctx, t, -th).unwrap();
        assert_eq!(v.value.to_bits(), m.value.to_bits());
    }

    #[test]
    fn vertical_exponent_matches_distance() {
        let ctx = cover(2);
        let th = 1.3;
        let d = crate::distance::sr_distance(&ctx, &CylPoint::new(0.0, th).unwrap()).unwrap();
        let expect_exp = 2.0 * std::f64::consts::PI * th + th * th;
        assert_relative_eq!(d.d2, expect_exp, max_relative = 1e-14);
    }

    #[test]
    fn regime_errors_point_to_neighbours() {
        let ctx = cover(1);
        let t = HeatTime::new(0.1).unwrap();
        match asym_vertical(&ctx, t, 0.0) {
            Err(Error::Regime { valid_path, .. }) => assert_eq!(valid_path, "asym_diagonal"),
            other => panic!("{other:?}"),
        }
        match asym_axis(&ctx, t, 0.0) {
            Err(Error::Regime { valid_path, .. }) => assert_eq!(valid_path, "asym_diagonal"),
            other => panic!("{other:?}"),
        }
        match asym_general(&ctx, t, &CylPoint::new(0.0, 1.0).unwrap()) {
            Err(Error::Regime { valid_path, .. }) => assert_eq!(valid_path, "asym_vertical"),
            other => panic!("{other:?}"),
        }
        match asym_general(&ctx, t, &CylPoint::new(1.0, 0.0).unwrap()) {
            Err(Error::Regime { valid_path, .. }) => assert_eq!(valid_path, "asym_axis"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn general_reduces_to_axis_as_theta_vanishes() {
        for n in [1u32, 2, 3] {
            let ctx = cover(n);
            let t = HeatTime::new(0.05).unwrap();
            for &r in &[0.5f64, 1.0, 2.0] {
                let axis = asym_axis(&ctx, t, r).unwrap();
                let gen = asym_general(&ctx, t, &CylPoint::new(r, 1e-8).unwrap()).unwrap();
                assert_relative_eq!(gen.value, axis.value, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn axis_exponent_is_gaussian_in_r() {
        // the t-dependence is exactly t^{-(n+1/2)} e^{-r²/4t}
        let ctx = cover(1);
        let r: f64 = 1.4;
        let a1 = asym_axis(&ctx, HeatTime::new(0.01).unwrap(), r).unwrap();
        let a2 = asym_axis(&ctx, HeatTime::new(0.005).unwrap(), r).unwrap();
        let expect = 2.0f64.powf(1.5) * (-r * r / 4.0 * (1.0 / 0.005 - 1.0 / 0.01)).exp();
        assert_relative_eq!(a2.value / a1.value, expect, max_relative = 1e-12);
    }
}
