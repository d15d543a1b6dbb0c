//! Heat kernel `q_t` of the radial Laplace–Beltrami operator on
//! `(2n+1)`-dimensional real hyperbolic space.
//!
//! Two independent evaluators are provided:
//!
//! * [`q_exact`] — the n-fold derivative formula
//!   `q_t(cosh δ) = e^{-n²t}/√(4πt) · (-1/(2π sinh δ) ∂_δ)ⁿ e^{-δ²/4t}`,
//!   evaluated with truncated Taylor (jet) arithmetic of order exactly `n`.
//!   On the axis the operator is even in `δ`, so for small `δ` the recursion
//!   runs on even power series in `δ²` instead, which also yields the finite
//!   limit at `δ = 0`.
//! * [`q_integral`] — the oscillatory integral
//!   `q_t(cosh δ) = Γ(n+1) e^{-n²t} / ((2π)^{n+1} √(πt)) ∫_0^∞
//!   e^{(π²-u²)/4t} sinh u sin(πu/2t) (cosh u + cosh δ)^{-(n+1)} du`,
//!   restricted to `t >= 0.05` where the `sin(πu/2t)` oscillation is
//!   resolvable.
//!
//! Everything is computed in the Gaussian-factored form
//! `q = mantissa · exp(-δ²/4t)`; the subelliptic evaluators consume the
//! factored pieces directly so no intermediate value over- or underflows.

use crate::error::{Error, Result};
use crate::jet::{Jet, JetScalar};
use crate::quad::integrate_adaptive_c;
use crate::special::{acosh_sq_c, gamma_int};
use crate::types::{EvalContext, EvalResult, Flags, HeatTime, QuadSpec, RiemannianArg};
use num_complex::Complex64;

/// Below this `δ` the even-series route evaluates the jet recursion at a
/// symbolic offset; above it, jets at the point. The jet path divides by
/// `sinh δ` jets whose coefficient ratio is `coth δ`, so its rounding error
/// grows like `(n coth δ)ⁿ eps` toward the axis; the series path needs
/// `|δ²|/4t` small. The switch balances the two.
const DELTA_SWITCH: f64 = 0.125;

/// `cosh δ - 1` at the switch; the complex evaluator switches on `|ζ|`.
const ZETA_SWITCH: f64 = 7e-3;

/// `e^{-n²t} / sqrt(4πt)`, the scalar prefactor of the derivative formula.
fn pref_exact(n: u32, t: f64) -> f64 {
    (-((n * n) as f64) * t).exp() / (4.0 * std::f64::consts::PI * t).sqrt()
}

/// Mantissa by the jet recursion at base point `delta0` (real or complex):
/// returns `R_n(delta0)` where
/// `(-1/(2π sinh δ) ∂_δ)ⁿ e^{-δ²/4t} = R_n(δ) e^{-δ²/4t}` via
/// `R_{k+1} = ((δ/2t) R_k - R_k') / (2π sinh δ)`.
///
/// The first two orders are unrolled (they dominate every hot loop):
/// `R_1 = δ / (4πt sinh δ)` and
/// `R_2 = (δ²/2t - 1 + δ coth δ) / (8π²t sinh²δ)`.
fn mantissa_jets<T: JetScalar>(n: u32, t: f64, delta0: T) -> T {
    match n {
        1 => {
            let s = delta0.s_sinh();
            delta0 / (T::from_f64(4.0 * std::f64::consts::PI * t) * s)
        }
        2 => {
            let s = delta0.s_sinh();
            let c = delta0.s_cosh();
            let inv2t = T::from_f64(0.5 / t);
            let bracket = delta0 * delta0 * inv2t - T::one() + delta0 * c / s;
            let a2 = T::from_f64(1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI));
            a2 * inv2t * bracket / (s * s)
        }
        _ => mantissa_jets_general(n, t, delta0),
    }
}

fn mantissa_jets_general<T: JetScalar>(n: u32, t: f64, delta0: T) -> T {
    let order = n as usize;
    let x = Jet::variable(delta0, order);
    let s = x.sinh().scale(T::from_f64(2.0 * std::f64::consts::PI));
    let half_inv_t = T::from_f64(0.5 / t);
    let mut r = Jet::constant(T::one(), order);
    for _ in 0..n {
        let num = x.scale(half_inv_t).mul(&r).sub(&r.deriv());
        r = num.div(&s);
    }
    r.value()
}

/// Mantissa by the even-series recursion: `R_k(δ) = P_k(δ²)` with
/// `P_{k+1}(u) = (P_k/2t - 2 dP_k/du) / (2π S(u))`, `S(u) = sinh(√u)/√u`.
/// Valid for `u = δ²` with `|u| <= ~0.016` and `t >= ~1e-3`; `u` may be
/// negative or complex (contour-shifted evaluation near the removable point
/// `cosh δ = 1`).
fn mantissa_series<T: JetScalar>(n: u32, t: f64, delta_sq: T) -> T {
    let m = n as usize + 32;

    // 2π S(u) = 2π sum u^k / (2k+1)!
    let mut s = vec![T::zero(); m + 1];
    let mut fact = 1.0f64;
    for (k, sk) in s.iter_mut().enumerate() {
        if k > 0 {
            fact *= (2 * k) as f64 * (2 * k + 1) as f64;
        }
        *sk = T::from_f64(2.0 * std::f64::consts::PI / fact);
    }
    let s = Jet { c: s };

    let mut p = Jet::constant(T::one(), m);
    let inv_2t = T::from_f64(0.5 / t);
    for _ in 0..n {
        // 2 dP/du, one term shorter
        let dp = Jet {
            c: (1..p.c.len())
                .map(|j| p.c[j] * T::from_f64(2.0 * j as f64))
                .collect::<Vec<_>>(),
        };
        let num = p.scale(inv_2t).sub(&dp);
        p = num.div(&s);
    }
    // Horner evaluation at u = δ²
    let mut acc = T::zero();
    for &ck in p.c.iter().rev() {
        acc = acc * delta_sq + ck;
    }
    acc
}

/// Factored kernel value at real distance `delta`:
/// `q = mantissa * exp(gauss_exponent)` with `gauss_exponent = -δ²/4t`.
pub(crate) fn q_factored(n: u32, t: f64, delta: f64) -> (f64, f64) {
    let mantissa = if delta < DELTA_SWITCH {
        mantissa_series(n, t, delta * delta)
    } else {
        mantissa_jets(n, t, delta)
    };
    (pref_exact(n, t) * mantissa, -delta * delta / (4.0 * t))
}

/// Factored kernel value continued to complex argument `w = cosh δ`,
/// parametrized by `zeta = w - 1` (computed stably by the caller). Returns
/// `(mantissa, delta_sq)` with `q = mantissa * exp(-delta_sq/4t)`.
pub(crate) fn q_factored_c(n: u32, t: f64, zeta: Complex64) -> (Complex64, Complex64) {
    let delta_sq = acosh_sq_c(zeta);
    let mantissa = if zeta.norm() <= ZETA_SWITCH {
        mantissa_series(n, t, delta_sq)
    } else {
        let delta0 = (Complex64::new(1.0, 0.0) + zeta).acosh();
        mantissa_jets(n, t, delta0)
    };
    (Complex64::new(pref_exact(n, t), 0.0) * mantissa, delta_sq)
}

/// Kernel by the n-fold derivative formula. Valid for all `t > 0`, `δ >= 0`;
/// this is the default evaluator everywhere.
pub fn q_exact(ctx: &EvalContext, t: HeatTime, delta: RiemannianArg) -> EvalResult {
    let (m, e) = q_factored(ctx.n(), t.get(), delta.get());
    let value = m * e.exp();
    EvalResult {
        value,
        abs_err: 64.0 * f64::EPSILON * value.abs(),
        flags: Flags::default(),
    }
}

/// Oscillatory-integral mantissa at complex `w = cosh δ`: returns
/// `A · ∫_0^umax e^{(π²-u²+δ²)/4t} sinh u sin(πu/2t) (cosh u + w)^{-(n+1)} du`
/// together with an error bound that includes the f64 cancellation floor
/// (`eps * envelope`). The caller owes the factor `exp(-δ²/4t)`.
pub(crate) fn eq6_mantissa_c(
    n: u32,
    t: f64,
    w: Complex64,
    delta_sq: Complex64,
    spec: &QuadSpec,
) -> Result<(Complex64, f64)> {
    let inv4t = 1.0 / (4.0 * t);
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    // overflow guard on the scaled integrand
    if (pi2 + delta_sq.re) * inv4t > 650.0 {
        return Err(Error::domain(
            "q_integral",
            format!(
                "scaled integrand would overflow: (pi^2 + Re d^2)/4t = {:.1}",
                (pi2 + delta_sq.re) * inv4t
            ),
        ));
    }
    let u_rule = (pi2 + 4.0 * t * spec.exponent_cutoff).sqrt();
    let u_max = u_rule.min(spec.u_max);
    let omega = std::f64::consts::PI / (2.0 * t); // sin frequency
    let period = 4.0 * t;
    let panel_w = period * 21.0 / spec.nodes_per_unit.max(4) as f64;
    let seeds = (u_max / panel_w).ceil().max(4.0) as usize;

    let mp1 = -((n + 1) as i32);
    let f = move |u: f64| -> Complex64 {
        let expo = delta_sq * inv4t + (pi2 - u * u) * inv4t;
        let base = Complex64::new(u.cosh(), 0.0) + w;
        expo.exp() * u.sinh() * (omega * u).sin() * base.powi(mp1)
    };
    let integral = integrate_adaptive_c(f, 0.0, u_max, seeds, spec)?;
    // Γ(n+1) = n!
    let a = gamma_int(n + 1) * (-((n * n) as f64) * t).exp()
        / ((2.0 * std::f64::consts::PI).powi(n as i32 + 1) * (std::f64::consts::PI * t).sqrt());
    let noise = 4.0 * f64::EPSILON * integral.resabs;
    Ok((a * integral.value, a * (integral.abs_err + noise)))
}

/// Kernel by the oscillatory integral. Precondition `t >= 0.05`: below it the
/// `sin(πu/2t)` oscillation is rejected — use [`q_exact`].
pub fn q_integral(
    ctx: &EvalContext,
    t: HeatTime,
    delta: RiemannianArg,
    spec: &QuadSpec,
) -> Result<EvalResult> {
    spec.validate()?;
    if t.get() < 0.05 {
        return Err(Error::Regime {
            op: "q_integral",
            msg: format!("t = {} below the oscillation threshold 0.05", t.get()),
            valid_path: "q_exact",
        });
    }
    let d = delta.get();
    let delta_sq = Complex64::new(d * d, 0.0);
    let w = Complex64::new(d.cosh(), 0.0);
    let (m, err_m) = eq6_mantissa_c(ctx.n(), t.get(), w, delta_sq, spec)?;
    let gauss = (-d * d / (4.0 * t.get())).exp();
    let value = m.re * gauss;
    let abs_err = err_m * gauss;
    let mut flags = Flags::default();
    flags.oscillation_resolved = true;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    if (pi2 + 4.0 * t.get() * spec.exponent_cutoff).sqrt() > spec.u_max {
        flags.truncated = true;
    }
    if abs_err > 10.0 * spec.tol_for(value) {
        return Err(Error::ToleranceNotMet {
            op: "q_integral",
            value,
            abs_err,
            tol: spec.tol_for(value),
        });
    }
    Ok(EvalResult {
        value,
        abs_err,
        flags,
    })
}

/// First-order bracket coefficient of the small-time expansion:
/// `-n² - n(n-1)(sinh δ - δ cosh δ)/(δ² sinh δ)`.
///
/// The `-n²` term is forced by the spectral factor `e^{-n²t}` of the exact
/// formulas: unrolling the n = 1 derivative recursion gives
/// `q = e^{-t}(4πt)^{-3/2}(δ/sinh δ)e^{-δ²/4t}` exactly, whose expansion is
/// `1 - t + O(t²)`.
pub(crate) fn small_time_bracket(n: f64, d: f64) -> f64 {
    let corr = if d < 1e-4 {
        // (sinh δ - δ cosh δ)/(δ² sinh δ) -> -1/3 + δ²/45
        -1.0 / 3.0 + d * d / 45.0
    } else {
        let sh = d.sinh();
        (sh - d * d.cosh()) / (d * d * sh)
    };
    -n * n - n * (n - 1.0) * corr
}

/// Two-term small-time expansion:
/// `q_t = (4πt)^{-(n+1/2)} (δ/sinh δ)ⁿ e^{-δ²/4t} (1 + bracket·t)` with the
/// bracket from [`small_time_bracket`].
pub fn q_small_time(ctx: &EvalContext, t: HeatTime, delta: RiemannianArg) -> EvalResult {
    let n = ctx.n() as f64;
    let d = delta.get();
    let tt = t.get();
    let ratio = if d < 1e-4 {
        1.0 - d * d / 6.0
    } else {
        d / d.sinh()
    };
    let value = (4.0 * std::f64::consts::PI * tt).powf(-(n + 0.5))
        * ratio.powi(ctx.n() as i32)
        * (-d * d / (4.0 * tt)).exp()
        * (1.0 + small_time_bracket(n, d) * tt);
    EvalResult::exact(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Space;
    use approx::assert_relative_eq;

    fn ctx(n: u32) -> EvalContext {
        EvalContext::new(n, Space::UniversalCover).unwrap()
    }

    /// Closed form of the n=1 kernel, the unrolled one-step recursion:
    /// `q = e^{-t} (4πt)^{-3/2} (δ/sinh δ) e^{-δ²/4t}`.
    fn q_n1_closed(t: f64, d: f64) -> f64 {
        let ratio = if d < 1e-8 { 1.0 } else { d / d.sinh() };
        (-t).exp() * (4.0 * std::f64::consts::PI * t).powf(-1.5) * ratio
            * (-d * d / (4.0 * t)).exp()
    }

    #[test]
    fn q_exact_matches_n1_closed_form() {
        let c = ctx(1);
        let v0 = q_exact(
            &c,
            HeatTime::new(0.5).unwrap(),
            RiemannianArg::new(0.0).unwrap(),
        );
        assert_relative_eq!(v0.value, q_n1_closed(0.5, 0.0), max_relative = 1e-12);
        assert_relative_eq!(v0.value, 0.038511, max_relative = 1e-4);
        let v1 = q_exact(
            &c,
            HeatTime::new(0.5).unwrap(),
            RiemannianArg::new(1.0).unwrap(),
        );
        assert_relative_eq!(v1.value, q_n1_closed(0.5, 1.0), max_relative = 1e-12);
        assert_relative_eq!(v1.value, 0.019876, max_relative = 1e-4);
        for &t in &[0.1, 0.5, 1.0] {
            for k in 0..=40 {
                let d = 5.0 * k as f64 / 40.0;
                let got = q_exact(
                    &c,
                    HeatTime::new(t).unwrap(),
                    RiemannianArg::new(d).unwrap(),
                );
                assert_relative_eq!(got.value, q_n1_closed(t, d), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn series_and_jet_paths_agree_at_the_switch() {
        // Both routes evaluated at the same δ must agree to near machine
        // precision; they are two algebraic forms of the same recursion.
        for n in 1..=4u32 {
            for &t in &[0.05, 0.3, 1.0] {
                // at and above the switch, where the jet path is well
                // conditioned; below it the jets lose (n coth δ)ⁿ eps
                for &d in &[DELTA_SWITCH, 0.15] {
                    let via_series = super::mantissa_series(n, t, d * d);
                    let via_jets = super::mantissa_jets(n, t, d);
                    assert_relative_eq!(via_series, via_jets, max_relative = 1e-9);
                }
                let on_axis = q_factored(n, t, 0.0).0;
                let near_axis = q_factored(n, t, 1e-6).0;
                assert_relative_eq!(on_axis, near_axis, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn unrolled_low_orders_match_the_general_recursion() {
        for &t in &[0.05, 0.5, 2.0] {
            for &d in &[0.2f64, 1.0, 3.5] {
                for n in [1u32, 2] {
                    let fast = super::mantissa_jets(n, t, d);
                    let general = super::mantissa_jets_general(n, t, d);
                    assert_relative_eq!(fast, general, max_relative = 1e-13);
                }
                let zc = Complex64::new(0.4, -1.1);
                for n in [1u32, 2] {
                    let fast = super::mantissa_jets(n, t, zc);
                    let general = super::mantissa_jets_general(n, t, zc);
                    assert!((fast - general).norm() <= 1e-12 * general.norm());
                }
            }
        }
    }

    #[test]
    fn complex_factored_matches_real_on_real_arguments() {
        for n in 1..=3u32 {
            for &d in &[0.02f64, 0.5, 2.0] {
                let t = 0.4;
                let zeta = Complex64::new(d.cosh() - 1.0, 0.0);
                let (mc, dsq) = q_factored_c(n, t, zeta);
                let (mr, er) = q_factored(n, t, d);
                assert_relative_eq!(mc.re, mr, max_relative = 1e-9);
                assert!(mc.im.abs() <= 1e-12 * mr.abs());
                assert_relative_eq!(dsq.re, -er * 4.0 * t, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn q_integral_matches_examples() {
        let spec = QuadSpec::default();
        let c1 = ctx(1);
        let r = q_integral(
            &c1,
            HeatTime::new(0.5).unwrap(),
            RiemannianArg::new(1.0).unwrap(),
            &spec,
        )
        .unwrap();
        assert!((r.value - q_n1_closed(0.5, 1.0)).abs() < 1e-8);
        let r2 = q_integral(
            &c1,
            HeatTime::new(0.25).unwrap(),
            RiemannianArg::new(2.0).unwrap(),
            &spec,
        )
        .unwrap();
        assert_relative_eq!(r2.value, q_n1_closed(0.25, 2.0), max_relative = 1e-8);
        assert_relative_eq!(r2.value, 0.0014127, max_relative = 1e-4);
        // n=3 on the axis
        let c3 = ctx(3);
        let q_i = q_integral(
            &c3,
            HeatTime::new(1.0).unwrap(),
            RiemannianArg::new(0.0).unwrap(),
            &spec,
        )
        .unwrap();
        let q_e = q_exact(
            &c3,
            HeatTime::new(1.0).unwrap(),
            RiemannianArg::new(0.0).unwrap(),
        );
        assert_relative_eq!(q_i.value, q_e.value, max_relative = 1e-6);
    }

    #[test]
    fn q_integral_rejects_small_t() {
        let r = q_integral(
            &ctx(1),
            HeatTime::new(0.01).unwrap(),
            RiemannianArg::new(1.0).unwrap(),
            &QuadSpec::default(),
        );
        match r {
            Err(Error::Regime { valid_path, .. }) => assert_eq!(valid_path, "q_exact"),
            other => panic!("expected regime error, got {other:?}"),
        }
    }

    #[test]
    fn cross_formula_grid() {
        let spec = QuadSpec::default();
        for n in [1u32, 2, 3] {
            let c = ctx(n);
            for &t in &[0.25, 0.5, 1.0] {
                for &d in &[0.0, 0.5, 1.0, 2.0] {
                    let e = q_exact(
                        &c,
                        HeatTime::new(t).unwrap(),
                        RiemannianArg::new(d).unwrap(),
                    );
                    let i = q_integral(
                        &c,
                        HeatTime::new(t).unwrap(),
                        RiemannianArg::new(d).unwrap(),
                        &spec,
                    )
                    .unwrap();
                    let scale = e.value.abs().max(1e-30);
                    assert!(
                        (e.value - i.value).abs() / scale <= 1e-6,
                        "n={n} t={t} d={d}: exact {} vs integral {}",
                        e.value,
                        i.value
                    );
                    assert!(e.value > 0.0);
                }
            }
        }
    }

    #[test]
    fn small_time_expansion_tracks_exact() {
        // n=1: n(n-1) = 0 kills the second term, leaving exactly 1 - t
        // (the expansion of the spectral factor e^{-t}).
        let c1 = ctx(1);
        let t = HeatTime::new(0.37).unwrap();
        let d = RiemannianArg::new(1.3).unwrap();
        let base = (4.0 * std::f64::consts::PI * 0.37f64).powf(-1.5) * (1.3 / 1.3f64.sinh())
            * (-1.3f64 * 1.3 / (4.0 * 0.37)).exp();
        let v = q_small_time(&c1, t, d);
        assert_relative_eq!(v.value / base, 1.0 - 0.37, max_relative = 1e-12);

        for (n, tol) in [(1u32, 1e-3), (2, 1e-3)] {
            let c = ctx(n);
            let t = HeatTime::new(0.01).unwrap();
            let d = RiemannianArg::new(1.0).unwrap();
            let approx_v = q_small_time(&c, t, d).value;
            let exact_v = q_exact(&c, t, d).value;
            assert_relative_eq!(approx_v, exact_v, max_relative = tol);
        }
    }

    #[test]
    fn small_time_ratio_band_as_t_shrinks() {
        // ratio -> 1 quadratically; the limiting constant is 1/2 for n = 1
        // and 16/3 for n = 2 (measured), so a 6t² band holds for both.
        for n in [1u32, 2] {
            let c = ctx(n);
            for &t in &[0.02, 0.01, 0.005] {
                let d = RiemannianArg::new(0.8).unwrap();
                let ratio = q_small_time(&c, HeatTime::new(t).unwrap(), d).value
                    / q_exact(&c, HeatTime::new(t).unwrap(), d).value;
                assert!(
                    ratio >= 1.0 - 6.0 * t * t && ratio <= 1.0 + 6.0 * t * t,
                    "n={n} t={t}: ratio {ratio}"
                );
            }
        }
    }
}
