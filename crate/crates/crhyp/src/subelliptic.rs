//! Subelliptic heat kernel `p_t` issued from the north pole, on the
//! universal cover and on the compact circle bundle.
//!
//! The cover kernel is the complex-shifted Gaussian transform of the
//! hyperbolic kernel,
//!
//! ```text
//! p_t(r,θ) = (4πt)^{-1/2} ∫_ℝ e^{(y-iθ)²/4t} q_t(cosh r cosh y) dy ,
//! ```
//!
//! and the compact kernel is its fiber periodization
//! `Σ_k p_t(r, θ + 2πk)`.
//!
//! ## Contour
//!
//! On the real axis the integrand oscillates as `cos(yθ/2t)` and its value is
//! exponentially smaller than its envelope (by `e^{(d² - r² - θ²)/4t}`), which
//! makes small-`t` evaluation impossible in fixed precision. The integrand is
//! analytic in the strip `|Im y| < ψ(r) = arccos(-1/cosh r)`, so the contour
//! is shifted to `y = x - iv` through the saddle `v = |φ(r,θ)|` of the phase
//! (for `r > 0`); there the integrand is a non-cancelling Gaussian of width
//! `√(2t/f'')`. On the vertical axis `r ≈ 0` there is no saddle — the decay
//! comes from the poles at `±iπ` — and the contour is shifted to
//! `v = π - 2nt/|θ|`, which caps the remaining cancellation at `e^{-n}`-level
//! per the residue structure. Everything is evaluated in the factored form
//! `exp(τ(x) - s₀) · mantissa` with `τ = [(x-i(v+θ))² - δ²(x)]/4t`, so no
//! intermediate quantity over- or underflows; `s₀ = -d²/4t` is restored at
//! the end.
//!
//! [`p_cover_double`] runs the same outer contour with the inner kernel
//! replaced by the oscillatory-integral route, giving an independent
//! cross-check of the whole pipeline (see `riemannian::q_integral`); it is
//! valid where that route is, `t >= 0.05`, and within the window where the
//! inner cancellation stays below the f64 noise floor.

use crate::distance::{f2_from_phi, phase_s, phi_solve};
use crate::error::{Error, Result};
use crate::quad::{integrate_adaptive_c_edges, integrate_adaptive_edges, Kahan};
use crate::riemannian::{eq6_mantissa_c, q_factored_c};
use crate::special::{cosh_m1, cosh_m1_c};
use crate::types::{
    CylPoint, EvalContext, EvalResult, Flags, HeatTime, QuadSpec, Space, WrapSpec,
};
use num_complex::Complex64;

/// Below this radius the vertical-axis contour rule takes over.
const R_AXIS: f64 = 1e-4;

/// Geometry of one outer-contour evaluation.
struct Outer {
    /// downward shift: the contour is `y = x - iv`, `v >= 0`
    v: f64,
    /// `v + θ` (θ canonicalized nonnegative)
    b: f64,
    /// log-scale `s₀` factored out of the integrand (equals `-d²/4t` on a
    /// saddle contour)
    s0: f64,
    /// truncation of `x`
    x_max: f64,
    /// panel edges on `[0, x_max]`
    edges: Vec<f64>,
    /// log-magnitude decay rate at `x_max`, for the tail estimate
    decay: f64,
    /// a truncation cap (y_halfwidth or inner-validity) bound before the
    /// decay rule was satisfied
    truncated: bool,
    oscillatory: bool,
}

/// `ζ(x) = cosh r cosh(x - iv) - 1`, stable for small arguments.
fn zeta_on_contour(r: f64, v: f64, x: f64) -> Complex64 {
    let z = Complex64::new(x, -v);
    cosh_m1(r) * z.cosh() + cosh_m1_c(z)
}

/// Contour selection and panelization for the outer integral.
///
/// `inner_delta_sq_cap`, when present, additionally truncates where
/// `Re δ²(x)` exceeds it (the double-integral inner route is only valid up
/// to a cancellation budget).
fn outer_setup(
    n: u32,
    t: f64,
    r: f64,
    theta: f64,
    spec: &QuadSpec,
    inner_delta_sq_cap: Option<f64>,
) -> Result<Outer> {
    debug_assert!(theta >= 0.0);
    let psi = std::f64::consts::PI - r.sinh().atan();
    let (v, sigma) = if theta == 0.0 {
        let f2 = if r >= R_AXIS {
            2.0 * (r / r.tanh() - 1.0)
        } else {
            0.0
        };
        (0.0, (2.0 * t / f2.max(1e-2)).sqrt().min(2.0))
    } else if r < R_AXIS {
        let v = (std::f64::consts::PI - 2.0 * (n as f64) * t / theta)
            .clamp(0.0, psi - 0.02)
            .max(0.0);
        (v, (4.0 * t).sqrt().min(1.0))
    } else {
        // saddle contour, backed off the pole at i·ψ when the saddle gets
        // too close: past distance s* = 2nt/θ the pole spike costs more than
        // the residual oscillation it avoids (the same tradeoff that picks
        // the vertical-axis shift)
        let sol = phi_solve(r, theta)?;
        let s_star = (2.0 * (n as f64) * t / theta).min(0.5 * psi).max(1e-3);
        let v = sol.phi.abs().min(psi - s_star);
        let f2 = f2_from_phi(r, sol.phi);
        let pole_dist = psi - v;
        let sigma = (2.0 * t / f2.max(1e-2)).sqrt().min(2.0).min(pole_dist);
        (v, sigma)
    };
    let b = v + theta;

    let delta_sq_0 = phase_s(zeta_on_contour(r, v, 0.0).re);
    let inv4t = 1.0 / (4.0 * t);
    let s0 = (-b * b - delta_sq_0) * inv4t;

    // log-magnitude proxy along the contour (without s₀): the mantissa
    // behaves like (δ/sinh δ)ⁿ up to t-dependent constants that cancel in
    // peak-relative comparisons; no jet evaluation needed here
    let log_mag = |x: f64| -> (f64, f64) {
        let zeta = zeta_on_contour(r, v, x);
        let dsq = crate::special::acosh_sq_c(zeta);
        let delta = dsq.sqrt();
        // ln|sinh δ| from cosh(2a) - cos(2b)
        let ln_sinh =
            0.5 * (0.5 * ((2.0 * delta.re).cosh() - (2.0 * delta.im).cos())).max(1e-300).ln();
        let ln_m = n as f64 * (delta.norm().max(1e-300).ln() - ln_sinh);
        let re_tau = (x * x - b * b - dsq.re) * inv4t - s0;
        (re_tau + ln_m, dsq.re)
    };
    let (lm0, _) = log_mag(0.0);
    let cutoff = spec.exponent_cutoff + 8.0;
    // past this drop the oscillation no longer needs resolving: unresolved
    // tail panels contribute below the requested tolerance and the adaptive
    // pass refines them only if their error estimate says otherwise
    let osc_budget = (1.0 / spec.rel_tol.min(spec.abs_tol.max(1e-300))).ln().min(40.0) + 6.0;

    let mut x = 0.0f64;
    let mut step = (0.5 * sigma).max(0.05);
    let mut peak = lm0;
    let mut last_lm = lm0;
    let mut truncated = false;
    let mut decay = 1.0;
    let mut osc_end = f64::INFINITY;
    loop {
        let next = x + step;
        if next > spec.y_halfwidth {
            truncated = true;
            x = spec.y_halfwidth;
            break;
        }
        let (lm, dsq_re) = log_mag(next);
        if let Some(cap) = inner_delta_sq_cap {
            if dsq_re > cap {
                // bisect the crossing so the window stays inside the cap
                let (mut lo, mut hi) = (x, next);
                for _ in 0..20 {
                    let mid = 0.5 * (lo + hi);
                    if log_mag(mid).1 > cap {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                truncated = true;
                x = lo.max(1e-3);
                decay = ((last_lm - lm) / step).max(0.2);
                break;
            }
        }
        peak = peak.max(lm);
        if osc_end.is_infinite() && lm < peak - osc_budget {
            osc_end = next;
        }
        if lm < peak - cutoff {
            decay = ((last_lm - lm) / step).max(0.2);
            x = next;
            break;
        }
        last_lm = lm;
        x = next;
        step *= 1.2;
        if x > 400.0 {
            truncated = true;
            break;
        }
    }
    // widen to a few Gaussian widths unless a hard cap bound the window
    let x_max = if truncated {
        x.min(spec.y_halfwidth)
    } else {
        x.max(4.0 * sigma).min(spec.y_halfwidth)
    };

    // oscillation wavelength on the contour; infinite when θ = 0
    let oscillatory = theta > 0.0;
    let lambda = if oscillatory {
        4.0 * std::f64::consts::PI * t / b
    } else {
        f64::INFINITY
    };
    // oscillation caps the panel width while the envelope matters; smooth
    // exponential tails take wide panels (GK21 resolves e^{-x} over widths
    // of several units)
    let w_tail = (x_max / 10.0).max(2.0);
    let w_osc = (lambda / 3.0).min(w_tail);
    let mut edges = vec![0.0];
    let mut w = sigma.min(w_osc).max(1e-3 * sigma.min(1.0));
    let mut xe = 0.0;
    while xe < x_max {
        xe = (xe + w).min(x_max);
        edges.push(xe);
        let cap = if xe < osc_end { w_osc } else { w_tail };
        w = (w * 1.5).min(cap);
    }
    Ok(Outer {
        v,
        b,
        s0,
        x_max,
        edges,
        decay,
        truncated,
        oscillatory,
    })
}

/// Shared outer integration: integrates `2 Re[e^{τ-s₀} m(x)]` over the panel
/// edges, where `m` is the inner kernel mantissa at `ζ(x)`. Returns
/// `(value, controlled_err, tail_est)`: the controlled error is what the
/// quadrature failed to certify, the tail estimate bounds what a truncation
/// cap cut off.
fn outer_value_real<F>(
    setup: &Outer,
    t: f64,
    r: f64,
    spec: &QuadSpec,
    inner: F,
) -> Result<(f64, f64, f64)>
where
    F: Fn(Complex64) -> (Complex64, Complex64),
{
    let inv4t = 1.0 / (4.0 * t);
    let b = setup.b;
    let v = setup.v;
    let s0 = setup.s0;
    let f = move |x: f64| -> f64 {
        let zeta = zeta_on_contour(r, v, x);
        let (m, dsq) = inner(zeta);
        let tau = (Complex64::new(x * x - b * b, -2.0 * x * b) - dsq) * inv4t - s0;
        2.0 * (tau.exp() * m).re
    };
    // tolerance in integral units: p = C e^{s₀} I with C = (4πt)^{-1/2}
    let ln_c = -(0.5) * (4.0 * std::f64::consts::PI * t).ln();
    let ln_den = ln_c + s0;
    let mut spec_i = *spec;
    let ln_abs = spec.abs_tol.ln() - ln_den;
    spec_i.abs_tol = if ln_abs > 690.0 {
        f64::MAX
    } else {
        ln_abs.exp().max(f64::MIN_POSITIVE)
    };
    let integral = integrate_adaptive_edges(&f, &setup.edges, &spec_i)?;
    // tail bound from the last integrand magnitude and observed decay rate
    let tail = f(setup.x_max).abs() / setup.decay;
    Ok((integral.value, integral.abs_err, tail))
}

/// Kernel on the universal cover, raw coordinates (no space check).
pub(crate) fn p_cover_raw(
    n: u32,
    t: f64,
    r: f64,
    theta: f64,
    spec: &QuadSpec,
) -> Result<EvalResult> {
    spec.validate()?;
    let th = theta.abs();
    let setup = outer_setup(n, t, r, th, spec, None)?;
    if std::env::var("CRHYP_DEBUG").is_ok() {
        eprintln!(
            "p_cover_raw n={n} t={t} r={r} th={th}: v={:.4} x_max={:.3} edges={} s0={:.3}",
            setup.v,
            setup.x_max,
            setup.edges.len(),
            setup.s0
        );
    }
    let (i_val, i_err, i_tail) =
        outer_value_real(&setup, t, r, spec, |zeta| q_factored_c(n, t, zeta))?;
    let c = (4.0 * std::f64::consts::PI * t).sqrt().recip();
    let scale = c * setup.s0.exp();
    let value = scale * i_val;
    let controlled = scale * i_err;
    let abs_err = scale * (i_err + i_tail);
    let mut flags = Flags::default();
    flags.truncated = setup.truncated || scale * i_tail > spec.tol_for(value);
    flags.oscillation_resolved = setup.oscillatory;
    // the gate covers errors the evaluator was supposed to control; a
    // deliberate window cap is reported through the flag and abs_err instead
    if controlled > 10.0 * spec.tol_for(value) {
        return Err(Error::ToleranceNotMet {
            op: "p_cover",
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

/// Subelliptic heat kernel on the universal cover.
///
/// Requires `ctx.space == UniversalCover`; even in θ by construction
/// (the evaluator canonicalizes to `|θ|`, so `p(r,θ)` and `p(r,-θ)` are
/// bit-identical).
pub fn p_cover(
    ctx: &EvalContext,
    t: HeatTime,
    pt: &CylPoint,
    spec: &QuadSpec,
) -> Result<EvalResult> {
    if ctx.space != Space::UniversalCover {
        return Err(Error::domain(
            "p_cover",
            "context selects the compact space; use p_compact",
        ));
    }
    p_cover_raw(ctx.n(), t.get(), pt.r, pt.theta, spec)
}

/// Independent evaluation through the double integral: the same outer
/// contour, with the inner kernel computed by the oscillatory-integral route
/// per outer node. Valid for `t >= 0.05` (the inner oscillation regime); the
/// outer window is further capped where the inner cancellation exceeds its
/// f64 budget, with the `truncated` flag set accordingly.
///
/// Unlike [`p_cover`], the integrand here is accumulated in complex form over
/// the full symmetric window, so the imaginary residue is actually measured:
/// `imag_residue_large` is set iff it exceeds `10 * abs_tol`.
pub fn p_cover_double(
    ctx: &EvalContext,
    t: HeatTime,
    pt: &CylPoint,
    spec: &QuadSpec,
) -> Result<EvalResult> {
    spec.validate()?;
    if t.get() < 0.05 {
        return Err(Error::Regime {
            op: "p_cover_double",
            msg: format!("t = {} below the oscillation threshold 0.05", t.get()),
            valid_path: "p_cover",
        });
    }
    let n = ctx.n();
    let tt = t.get();
    let th = pt.theta.abs();
    let r = pt.r;
    // inner cancellation budget: the envelope/value ratio of the inner
    // oscillatory integral is ~e^{(π² + Re δ²)/4t - stuff}; keep it below
    // e^26 so the inner f64 noise floor stays near 1e-5 even at the window
    // edge (where the outer weight is already tiny)
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let delta_sq_cap = (4.0 * tt * 26.0 - pi2).max(4.0 * tt);
    let setup = outer_setup(n, tt, r, th, spec, Some(delta_sq_cap))?;

    let inv4t = 1.0 / (4.0 * tt);
    let b = setup.b;
    let v = setup.v;
    let s0 = setup.s0;
    let inner_err = std::cell::Cell::new(0.0f64);
    let f = |x: f64| -> Complex64 {
        let zeta = zeta_on_contour(r, v, x);
        let w = Complex64::new(1.0, 0.0) + zeta;
        let dsq = crate::special::acosh_sq_c(zeta);
        let (m, e) = match eq6_mantissa_c(n, tt, w, dsq, spec) {
            Ok(me) => me,
            Err(_) => (Complex64::new(f64::NAN, f64::NAN), f64::INFINITY),
        };
        let tau = (Complex64::new(x * x - b * b, -2.0 * x * b) - dsq) * inv4t - s0;
        let weight = tau.exp();
        inner_err.set(inner_err.get().max(e * weight.norm()));
        weight * m
    };
    // full symmetric window so the imaginary part is measured, not assumed
    let mut edges: Vec<f64> = setup.edges.iter().rev().map(|&x| -x).collect();
    edges.extend(setup.edges.iter().skip(1));
    let mut spec_i = *spec;
    let ln_c = -(0.5) * (4.0 * std::f64::consts::PI * tt).ln();
    let ln_abs = spec.abs_tol.ln() - (ln_c + s0);
    spec_i.abs_tol = if ln_abs > 690.0 {
        f64::MAX
    } else {
        ln_abs.exp().max(f64::MIN_POSITIVE)
    };
    let integral = integrate_adaptive_c_edges(&f, &edges, &spec_i)?;

    let c = (4.0 * std::f64::consts::PI * tt).sqrt().recip();
    let scale = c * s0.exp();
    let value = scale * integral.value.re;
    let imag = scale * integral.value.im.abs();
    let span = setup.x_max * 2.0;
    let tail = 2.0 * scale * f(setup.x_max).norm() / setup.decay;
    let controlled = scale * (integral.abs_err + inner_err.get() * span) + imag;
    let abs_err = controlled + tail;
    let mut flags = Flags::default();
    flags.truncated = setup.truncated || tail > spec.tol_for(value);
    flags.oscillation_resolved = true;
    flags.imag_residue_large = imag > 10.0 * spec.abs_tol;
    if !value.is_finite() {
        return Err(Error::domain(
            "p_cover_double",
            "inner oscillatory route failed inside the outer window",
        ));
    }
    if controlled > 10.0 * spec.tol_for(value) {
        return Err(Error::ToleranceNotMet {
            op: "p_cover_double",
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

/// Half-width of the outer window [`p_cover_double`] can honestly evaluate
/// at these arguments: the inner oscillatory route has an f64 cancellation
/// budget that bounds `Re δ²` along the contour. Cross-formula comparisons
/// restrict both evaluators to this common window (pass it as
/// `QuadSpec::y_halfwidth`): the two formulas are then compared where both
/// regimes are valid.
pub fn double_integral_window(
    ctx: &EvalContext,
    t: HeatTime,
    pt: &CylPoint,
    spec: &QuadSpec,
) -> Result<f64> {
    let tt = t.get();
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let delta_sq_cap = (4.0 * tt * 26.0 - pi2).max(4.0 * tt);
    let setup = outer_setup(ctx.n(), tt, pt.r, pt.theta.abs(), spec, Some(delta_sq_cap))?;
    Ok(setup.x_max)
}

/// Subelliptic heat kernel on the compact circle bundle, by fiber
/// periodization `p^H(r,θ) = Σ_{k∈ℤ} p_cover(r, θ + 2πk)`.
///
/// θ is canonicalized into `[-π, π]` first. The sum stops once a whole ring
/// `|k| = const` contributes less than `tail_tol` times the partial sum;
/// hitting `k_max` first is an error suggesting a larger `k_max`.
pub fn p_compact(
    ctx: &EvalContext,
    t: HeatTime,
    pt: &CylPoint,
    spec: &QuadSpec,
    wrap: &WrapSpec,
) -> Result<EvalResult> {
    if ctx.space != Space::CompactCircleBundle {
        return Err(Error::domain(
            "p_compact",
            "context selects the universal cover; use p_cover",
        ));
    }
    let theta = CylPoint::canonical_theta(pt.theta);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut sum = Kahan::default();
    let mut err = Kahan::default();
    let mut flags = Flags::default();

    let base = p_cover_raw(ctx.n(), t.get(), pt.r, theta, spec)?;
    sum.add(base.value);
    err.add(base.abs_err);
    flags.truncated |= base.flags.truncated;
    flags.oscillation_resolved |= base.flags.oscillation_resolved;

    let mut converged = false;
    for k in 1..=wrap.k_max {
        let mut ring = 0.0;
        for sign in [-1.0, 1.0] {
            let term = p_cover_raw(
                ctx.n(),
                t.get(),
                pt.r,
                theta + sign * two_pi * k as f64,
                spec,
            )?;
            sum.add(term.value);
            err.add(term.abs_err);
            ring += term.value.abs();
            flags.truncated |= term.flags.truncated;
            flags.oscillation_resolved |= term.flags.oscillation_resolved;
        }
        if ring <= wrap.tail_tol * sum.total().abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        // the next omitted ring, by the Gaussian decay of the wrap terms
        let last = 2.0
            * p_cover_raw(
                ctx.n(),
                t.get(),
                pt.r,
                theta + two_pi * wrap.k_max as f64,
                spec,
            )?
            .value
            .abs();
        if last > wrap.tail_tol * sum.total().abs() {
            return Err(Error::WrapTruncated {
                k_max: wrap.k_max,
                tail: last / sum.total().abs(),
                suggested: wrap.k_max + 3,
            });
        }
    }
    Ok(EvalResult {
        value: sum.total(),
        abs_err: err.total(),
        flags,
    })
}

/// Frozen-contour kernel evaluator: one fixed shift, scale, and panel grid,
/// chosen for a center configuration, reused for every nearby evaluation.
/// Finite-difference stencils need this so that quadrature error varies
/// smoothly across the stencil and cancels in the differences.
pub(crate) struct FrozenKernel {
    pub n: u32,
    v: f64,
    s0: f64,
    edges: Vec<f64>,
    /// wrap rings added for the compact space; 0 on the cover
    wrap_rings: usize,
}

impl FrozenKernel {
    /// Build from the center configuration `(t, r, θ)`; the grid covers the
    /// production window with margin and double density.
    pub fn build(
        ctx: &EvalContext,
        t: f64,
        r: f64,
        theta: f64,
        spec: &QuadSpec,
    ) -> Result<FrozenKernel> {
        let th = theta.abs();
        let setup = outer_setup(ctx.n(), t, r, th, spec, None)?;
        let x_max = (setup.x_max * 1.25).min(spec.y_halfwidth);
        let mut edges = Vec::with_capacity(2 * setup.edges.len());
        let mut prev = 0.0f64;
        for &e in setup.edges.iter().skip(1) {
            edges.push(prev);
            edges.push(0.5 * (prev + e));
            prev = e;
        }
        let mut xe = prev;
        let w = setup
            .edges
            .windows(2)
            .last()
            .map(|w| w[1] - w[0])
            .unwrap_or(0.25);
        while xe < x_max {
            edges.push(xe);
            xe += 0.5 * w;
        }
        edges.push(x_max);
        let wrap_rings = match ctx.space {
            Space::UniversalCover => 0,
            Space::CompactCircleBundle => {
                WrapSpec::default_for(t, th, spec.exponent_cutoff).k_max
            }
        };
        Ok(FrozenKernel {
            n: ctx.n(),
            v: setup.v,
            s0: setup.s0,
            edges,
            wrap_rings,
        })
    }

    fn eval_cover_term(&self, t: f64, r: f64, theta: f64) -> f64 {
        let th = theta.abs();
        let inv4t = 1.0 / (4.0 * t);
        let b = self.v + th;
        let n = self.n;
        let v = self.v;
        let s0 = self.s0;
        let f = move |x: f64| -> Complex64 {
            let zeta = zeta_on_contour(r, v, x);
            let (m, dsq) = q_factored_c(n, t, zeta);
            let tau = (Complex64::new(x * x - b * b, -2.0 * x * b) - dsq) * inv4t - s0;
            tau.exp() * m
        };
        let integral = crate::quad::composite_gk21_c(f, &self.edges);
        let c = (4.0 * std::f64::consts::PI * t).sqrt().recip();
        2.0 * c * s0.exp() * integral.value.re
    }

    /// Kernel value at `(t, r, θ)` on the frozen grid.
    pub fn eval(&self, t: f64, r: f64, theta: f64) -> f64 {
        if self.wrap_rings == 0 {
            self.eval_cover_term(t, r, theta)
        } else {
            let two_pi = 2.0 * std::f64::consts::PI;
            let th = CylPoint::canonical_theta(theta);
            let mut acc = self.eval_cover_term(t, r, th);
            for k in 1..=self.wrap_rings {
                acc += self.eval_cover_term(t, r, th + two_pi * k as f64);
                acc += self.eval_cover_term(t, r, th - two_pi * k as f64);
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::composite_gk21_c;
    use crate::riemannian::q_factored;
    use approx::assert_relative_eq;

    fn cover(n: u32) -> EvalContext {
        EvalContext::new(n, Space::UniversalCover).unwrap()
    }

    fn compact(n: u32) -> EvalContext {
        EvalContext::new(n, Space::CompactCircleBundle).unwrap()
    }

    fn ht(t: f64) -> HeatTime {
        HeatTime::new(t).unwrap()
    }

    fn pt(r: f64, th: f64) -> CylPoint {
        CylPoint::new(r, th).unwrap()
    }

    #[test]
    fn theta_symmetry_is_bit_exact() {
        let spec = QuadSpec::default();
        let a = p_cover(&cover(1), ht(0.5), &pt(1.0, 0.7), &spec).unwrap();
        let b = p_cover(&cover(1), ht(0.5), &pt(1.0, -0.7), &spec).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn origin_value_matches_brute_force_oracle() {
        //独立 oracle: dense fixed-grid quadrature of
        // (4πt)^{-1/2} ∫ e^{y²/4t} q_t(cosh y) dy on the real axis. At
        // r = 0 the integrand is (4πt)^{-1/2} R_n(y) (the Gaussians cancel
        // exactly), decaying like e^{-ny}.
        let t = 0.5;
        for n in [1u32, 2] {
            let oracle = {
                let f = |y: f64| -> Complex64 {
                    let (m, _) = q_factored(n, t, y.abs());
                    Complex64::new(m, 0.0)
                };
                let edges: Vec<f64> = (0..=2400).map(|i| -60.0 + i as f64 * 0.05).collect();
                let c = (4.0 * std::f64::consts::PI * t).sqrt().recip();
                c * composite_gk21_c(f, &edges).value.re
            };
            let got = p_cover(&cover(n), ht(t), &pt(0.0, 0.0), &QuadSpec::default()).unwrap();
            assert_relative_eq!(got.value, oracle, max_relative = 1e-9);
        }
    }

    #[test]
    fn positivity_and_radial_decay() {
        let spec = QuadSpec::default();
        for n in [1u32, 2] {
            for &t in &[0.25, 0.5, 1.0] {
                let mut prev = f64::INFINITY;
                for k in 0..=10 {
                    let r = 0.1 + 2.9 * k as f64 / 10.0;
                    let v = p_cover(&cover(n), ht(t), &pt(r, 0.4), &spec).unwrap();
                    assert!(v.value > 0.0, "n={n} t={t} r={r}");
                    assert!(v.value < prev, "not decreasing at n={n} t={t} r={r}");
                    prev = v.value;
                }
                for &th in &[0.0, 1.0, 3.0, 6.28] {
                    let v = p_cover(&cover(n), ht(t), &pt(1.3, th), &spec).unwrap();
                    assert!(v.value > 0.0, "n={n} t={t} th={th}");
                }
            }
        }
    }

    #[test]
    fn single_and_double_integral_agree() {
        // compared on the common window where both formulas are valid: the
        // inner oscillatory route bounds how far out in y the double integral
        // can reach before its f64 cancellation floor, so both evaluators are
        // restricted to that window
        let base = QuadSpec {
            rel_tol: 1e-8,
            ..QuadSpec::default()
        };
        for (n, t, r, th) in [
            (1u32, 0.5, 1.0, 0.0),
            (1, 0.5, 1.0, 0.5),
            (2, 0.5, 0.5, 1.0),
            (1, 0.25, 0.5, 1.0),
        ] {
            let w = double_integral_window(&cover(n), ht(t), &pt(r, th), &base).unwrap();
            let spec = QuadSpec {
                y_halfwidth: w,
                ..base
            };
            let a = p_cover(&cover(n), ht(t), &pt(r, th), &spec).unwrap();
            let b = p_cover_double(&cover(n), ht(t), &pt(r, th), &spec).unwrap();
            assert_relative_eq!(a.value, b.value, max_relative = 1e-5);
            assert!(!b.flags.imag_residue_large, "{b:?}");
        }
    }

    #[test]
    fn double_integral_rejects_small_t() {
        let r = p_cover_double(
            &cover(1),
            ht(0.01),
            &pt(1.0, 0.5),
            &QuadSpec::default(),
        );
        match r {
            Err(Error::Regime { valid_path, .. }) => assert_eq!(valid_path, "p_cover"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn compact_kernel_periodicity_and_tail() {
        let spec = QuadSpec::default();
        let c = compact(1);
        // θ = π and θ = -π are the same point
        let a = p_compact(&c, ht(0.5), &pt(1.0, std::f64::consts::PI), &spec,
            &WrapSpec::new(6, 1e-12).unwrap()).unwrap();
        let b = p_compact(&c, ht(0.5), &pt(1.0, -std::f64::consts::PI), &spec,
            &WrapSpec::new(6, 1e-12).unwrap()).unwrap();
        assert_relative_eq!(a.value, b.value, max_relative = 1e-13);

        // k_max = 3 vs 6 at t = 0.5
        let w3 = p_compact(&c, ht(0.5), &pt(1.0, 0.0), &spec, &WrapSpec::new(3, 1e-12).unwrap())
            .unwrap();
        let w6 = p_compact(&c, ht(0.5), &pt(1.0, 0.0), &spec, &WrapSpec::new(6, 1e-12).unwrap())
            .unwrap();
        assert_relative_eq!(w3.value, w6.value, max_relative = 1e-10);

        // exact periodicity after canonicalization (0.5 + 2π is exactly
        // representable, so the canonical θ is bit-identical)
        let two_pi = 2.0 * std::f64::consts::PI;
        let p1 = p_compact(&c, ht(0.5), &pt(1.0, 0.5), &spec, &WrapSpec::new(5, 1e-12).unwrap())
            .unwrap();
        let p2 = p_compact(&c, ht(0.5), &pt(1.0, 0.5 + two_pi), &spec,
            &WrapSpec::new(5, 1e-12).unwrap()).unwrap();
        assert_eq!(p1.value.to_bits(), p2.value.to_bits());
    }

    #[test]
    fn compact_minus_cover_is_positive_wrap_mass() {
        let spec = QuadSpec::default();
        let th = 0.3;
        // at t = 0.25 the wrap terms sit ~e^{-84} below the k = 0 term:
        // the compact and cover kernels coincide to f64 resolution
        let pc = p_compact(&compact(1), ht(0.25), &pt(0.5, th), &spec,
            &WrapSpec::new(6, 1e-14).unwrap()).unwrap();
        let p0 = p_cover(&cover(1), ht(0.25), &pt(0.5, th), &spec).unwrap();
        assert!(pc.value >= p0.value - 1e-13 * p0.value);
        assert!((pc.value - p0.value).abs() <= 1e-12 * p0.value);

        // at t = 1 the k = ±1 terms are ~1e-8 relative: measurable; the
        // difference must equal the sum of the wrapped terms, each positive
        let t = 1.0;
        let pc = p_compact(&compact(1), ht(t), &pt(0.5, th), &spec,
            &WrapSpec::new(8, 1e-14).unwrap()).unwrap();
        let p0 = p_cover(&cover(1), ht(t), &pt(0.5, th), &spec).unwrap();
        let wrap_sum = pc.value - p0.value;
        assert!(wrap_sum > 0.0);
        let mut direct = 0.0;
        for k in 1..=4i32 {
            for sign in [-1.0, 1.0] {
                let term = p_cover(
                    &cover(1),
                    ht(t),
                    &pt(0.5, th + sign * 2.0 * std::f64::consts::PI * k as f64),
                    &spec,
                )
                .unwrap()
                .value;
                assert!(term > 0.0);
                direct += term;
            }
        }
        assert_relative_eq!(wrap_sum, direct, max_relative = 1e-5);
    }

    #[test]
    fn wrap_error_suggests_larger_kmax() {
        // large t needs more wrap terms than k_max = 1 allows
        let spec = QuadSpec::default();
        let r = p_compact(
            &compact(1),
            ht(1.0),
            &pt(0.5, 0.0),
            &spec,
            &WrapSpec::new(1, 1e-14).unwrap(),
        );
        match r {
            Err(Error::WrapTruncated { suggested, .. }) => assert!(suggested > 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn space_mismatch_is_rejected() {
        let spec = QuadSpec::default();
        assert!(p_cover(&compact(1), ht(0.5), &pt(1.0, 0.0), &spec).is_err());
        assert!(p_compact(
            &cover(1),
            ht(0.5),
            &pt(1.0, 0.0),
            &spec,
            &WrapSpec::new(3, 1e-12).unwrap()
        )
        .is_err());
    }

    #[test]
    fn small_time_off_axis_matches_saddle_asymptotics() {
        // the contour machinery must hold down to t = 0.005 off the axis
        let spec = QuadSpec::default();
        let t = 0.005;
        let p = p_cover(&cover(1), ht(t), &pt(1.0, 0.5), &spec).unwrap();
        let a = crate::asympt::asym_general(&cover(1), ht(t), &pt(1.0, 0.5)).unwrap();
        let ratio = a.value / p.value;
        assert!(
            (0.9..1.1).contains(&ratio),
            "ratio {ratio}: p {} vs asym {}",
            p.value,
            a.value
        );
    }

    #[test]
    fn frozen_kernel_matches_adaptive_at_center() {
        let spec = QuadSpec::default();
        let fk = FrozenKernel::build(&cover(1), 0.5, 1.0, 0.5, &spec).unwrap();
        let frozen = fk.eval(0.5, 1.0, 0.5);
        let adaptive = p_cover(&cover(1), ht(0.5), &pt(1.0, 0.5), &spec).unwrap();
        assert_relative_eq!(frozen, adaptive.value, max_relative = 1e-8);
        // and varies smoothly for nearby arguments
        let nearby = fk.eval(0.5, 1.001, 0.5);
        assert!((nearby - frozen).abs() < 0.01 * frozen.abs());
    }
}
