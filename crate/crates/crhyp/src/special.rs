//! Safe special functions and the invariant measure density.

use crate::error::{Error, Result};
use crate::types::EvalContext;
use num_complex::Complex64;

/// Tolerance band below 1 inside which arguments are clamped to 1.
/// Quadrature nodes can land at `cosh r cosh y = 1` up to rounding.
pub const ACOSH_CLAMP: f64 = 1e-12;

/// Principal inverse hyperbolic cosine, stable down to `x = 1`.
///
/// For `x` slightly below 1 (within [`ACOSH_CLAMP`]) the argument is clamped
/// to 1; further below, the call is a domain error. Near 1 the form
/// `ln(1 + (e + sqrt(e(2+e))))` with `e = x - 1` keeps full precision because
/// `x - 1` is exact there (Sterbenz).
pub fn acosh_safe(x: f64) -> Result<f64> {
    if x < 1.0 - ACOSH_CLAMP {
        return Err(Error::domain(
            "acosh_safe",
            format!("argument {x} below 1 - {ACOSH_CLAMP:e}"),
        ));
    }
    if x <= 1.0 {
        return Ok(0.0);
    }
    let e = x - 1.0;
    Ok((e + (e * (2.0 + e)).sqrt()).ln_1p())
}

/// `(n-1)!` as an exact double. Valid for `n <= 20`, which
/// [`EvalContext::new`] guarantees.
pub fn gamma_int(n: u32) -> f64 {
    let mut acc = 1.0f64;
    for k in 2..n {
        acc *= k as f64;
    }
    acc
}

/// Density of the invariant measure of the radial sub-Laplacian:
/// `(2πⁿ/Γ(n)) (sinh r)^{2n-1} cosh r` per unit `dr dθ`.
pub fn measure_density(ctx: &EvalContext, r: f64) -> f64 {
    let n = ctx.n();
    let pref = 2.0 * std::f64::consts::PI.powi(n as i32) / gamma_int(n);
    pref * r.sinh().powi(2 * n as i32 - 1) * r.cosh()
}

/// Exact μ-mass of the box `[r_lo, r_hi] x [θ_lo, θ_hi]`: the radial factor
/// has antiderivative `(sinh r)^{2n} / (2n)`.
pub fn measure_box_mass(ctx: &EvalContext, r_lo: f64, r_hi: f64, th_lo: f64, th_hi: f64) -> f64 {
    let n = ctx.n();
    let pref = 2.0 * std::f64::consts::PI.powi(n as i32) / gamma_int(n);
    let s = |r: f64| r.sinh().powi(2 * n as i32) / (2.0 * n as f64);
    pref * (s(r_hi) - s(r_lo)) * (th_hi - th_lo)
}

/// `cosh x - 1` without cancellation: `2 sinh²(x/2)`.
pub fn cosh_m1(x: f64) -> f64 {
    let s = (0.5 * x).sinh();
    2.0 * s * s
}

/// Complex `cosh z - 1` by the same identity.
pub fn cosh_m1_c(z: Complex64) -> Complex64 {
    let s = (0.5 * z).sinh();
    2.0 * s * s
}

/// `zeta = cosh r cosh z - 1` computed stably for small `r`, `z`:
/// `(cosh r - 1) cosh z + (cosh z - 1)`, both addends built from `cosh_m1`.
pub fn cosh_product_m1(r: f64, z: Complex64) -> Complex64 {
    let cz = z.cosh();
    cosh_m1(r) * cz + cosh_m1_c(z)
}

/// `acosh(1+ζ)²` as an analytic function of ζ, valid for any complex ζ with
/// `1+ζ` off the cut `(-∞, -1]`. For `|ζ| <= 7e-3` a Newton iteration on
/// `cosh√A = 1+ζ` in the variable `A = δ²` avoids the branch-point precision
/// loss of the direct `acosh`; elsewhere the principal `acosh` is squared.
pub fn acosh_sq_c(zeta: Complex64) -> Complex64 {
    if zeta.norm() <= 7e-3 {
        // Solve A/2 + A²/24 + A³/720 + A⁴/40320 + A⁵/3628800 = ζ for A ≈ 2ζ.
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
        let d = (Complex64::new(1.0, 0.0) + zeta).acosh();
        d * d
    }
}

/// Real version of [`acosh_sq_c`] for arguments `1+ζ >= 1`.
pub fn acosh_sq(zeta: f64) -> f64 {
    debug_assert!(zeta >= -ACOSH_CLAMP);
    if zeta <= 0.0 {
        return 0.0;
    }
    if zeta <= 7e-3 {
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
        let d = (zeta + (zeta * (2.0 + zeta)).sqrt()).ln_1p();
        d * d
    }
}
