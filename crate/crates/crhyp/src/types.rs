//! Parameter and result types shared by every module.

use crate::error::{Error, Result};
use serde::Serialize;

/// Which space the kernel lives on. The fiber coordinate runs over `[-π, π]`
/// on the compact circle bundle and over all of `ℝ` on the universal cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Space {
    CompactCircleBundle,
    UniversalCover,
}

impl Space {
    pub fn as_str(self) -> &'static str {
        match self {
            Space::CompactCircleBundle => "compact",
            Space::UniversalCover => "cover",
        }
    }
}

impl std::str::FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compact" => Ok(Space::CompactCircleBundle),
            "cover" => Ok(Space::UniversalCover),
            other => Err(Error::Usage(format!(
                "unknown space '{other}' (expected 'compact' or 'cover')"
            ))),
        }
    }
}

/// Complex dimension index `n >= 1` plus the space selector. The real
/// dimension of the space is `2n + 1`.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext {
    n: u32,
    pub space: Space,
}

impl EvalContext {
    /// `n` is capped at 20 so `Γ(n) = (n-1)!` stays exact in an `f64`.
    pub fn new(n: u32, space: Space) -> Result<Self> {
        if n < 1 || n > 20 {
            return Err(Error::domain(
                "EvalContext::new",
                format!("n must be in 1..=20, got {n}"),
            ));
        }
        Ok(EvalContext { n, space })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
}

/// Heat-flow time, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatTime(f64);

impl HeatTime {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(
                "HeatTime::new",
                format!("t must be a positive finite real, got {t}"),
            ));
        }
        Ok(HeatTime(t))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Point of the cylindrical chart: radial coordinate `r >= 0` (so that
/// `rho = tanh r`) and fiber coordinate `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylPoint {
    pub r: f64,
    pub theta: f64,
}

impl CylPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::domain(
                "CylPoint::new",
                format!("r must be a nonnegative finite real, got {r}"),
            ));
        }
        if !theta.is_finite() {
            return Err(Error::domain(
                "CylPoint::new",
                format!("theta must be finite, got {theta}"),
            ));
        }
        Ok(CylPoint { r, theta })
    }

    /// `rho = tanh r`, the Poincaré-ball radial coordinate.
    pub fn rho(&self) -> f64 {
        self.r.tanh()
    }

    /// Canonical fiber representative in `[-π, π]`.
    ///
    /// Uses the exact IEEE remainder so that two angles differing by an exact
    /// multiple of the f64 value of `2π` canonicalize to bit-identical
    /// representatives. The boundary folds as `θ = π` fixed, `θ = -π -> -π`.
    pub fn canonical_theta(theta: f64) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut t = theta % two_pi; // exact IEEE remainder, t in (-2π, 2π)
        if t > std::f64::consts::PI {
            t -= two_pi; // Sterbenz-exact: both operands in [π, 2π)
        } else if t < -std::f64::consts::PI {
            t += two_pi;
        }
        t
    }
}

/// Riemannian distance argument for the hyperbolic-space kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannianArg(f64);

impl RiemannianArg {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::domain(
                "RiemannianArg::new",
                format!("delta must be a nonnegative finite real, got {delta}"),
            ));
        }
        Ok(RiemannianArg(delta))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Quadrature controls shared by the integral evaluators.
///
/// `y_halfwidth` and `u_max` are hard caps on the two dummy integration
/// variables; the evaluators choose tighter truncations from
/// `exponent_cutoff` (in e-folds) when possible and set [`Flags::truncated`]
/// when a cap binds.
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    pub y_halfwidth: f64,
    pub u_max: f64,
    pub nodes_per_unit: u32,
    pub exponent_cutoff: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            y_halfwidth: 80.0,
            u_max: 50.0,
            nodes_per_unit: 16,
            exponent_cutoff: 50.0,
            abs_tol: 1e-12,
            rel_tol: 1e-9,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        let all_pos = self.y_halfwidth > 0.0
            && self.u_max > 0.0
            && self.exponent_cutoff > 0.0
            && self.abs_tol > 0.0
            && self.rel_tol > 0.0;
        if !all_pos {
            return Err(Error::domain(
                "QuadSpec::validate",
                "all fields must be positive",
            ));
        }
        if self.nodes_per_unit < 4 {
            return Err(Error::domain(
                "QuadSpec::validate",
                format!("nodes_per_unit must be >= 4, got {}", self.nodes_per_unit),
            ));
        }
        Ok(())
    }

    /// Tolerance actually enforced for a value of magnitude `|v|`.
    pub fn tol_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Truncation of the fiber periodization sum.
#[derive(Debug, Clone, Copy)]
pub struct WrapSpec {
    pub k_max: usize,
    pub tail_tol: f64,
}

impl WrapSpec {
    pub fn new(k_max: usize, tail_tol: f64) -> Result<Self> {
        if k_max < 1 {
            return Err(Error::domain("WrapSpec::new", "k_max must be >= 1"));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::domain("WrapSpec::new", "tail_tol must be positive"));
        }
        Ok(WrapSpec { k_max, tail_tol })
    }

    /// Default truncation for heat time `t`, fiber angle `theta` and a tail
    /// cutoff in e-folds: terms decay like `exp(-(2πk - |θ|)²/4t)`.
    pub fn default_for(t: f64, theta: f64, exponent_cutoff: f64) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        let k = 1.0 + ((4.0 * t * exponent_cutoff).sqrt() / two_pi + theta.abs() / two_pi).ceil();
        WrapSpec {
            k_max: k as usize,
            tail_tol: 1e-12,
        }
    }
}

/// Diagnostic flags attached to every evaluated value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// A truncation cap bound before the requested tolerance was reached; the
    /// estimated tail is folded into `abs_err`.
    pub truncated: bool,
    /// An oscillatory integrand was panelized at its oscillation scale.
    pub oscillation_resolved: bool,
    /// The discarded imaginary part exceeded `10 * abs_tol`.
    pub imag_residue_large: bool,
}

impl Flags {
    pub fn any(&self) -> bool {
        self.truncated || self.oscillation_resolved || self.imag_residue_large
    }
}

impl std::fmt::Display for Flags {
    /// Compact fixed-width rendering used in CSV output: `T`, `O`, `I` for
    /// set flags, `-` otherwise.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}{}{}",
            if self.truncated { 'T' } else { '-' },
            if self.oscillation_resolved { 'O' } else { '-' },
            if self.imag_residue_large { 'I' } else { '-' },
        )
    }
}

/// A computed value with an absolute-error estimate and diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct EvalResult {
    pub value: f64,
    pub abs_err: f64,
    pub flags: Flags,
}

impl EvalResult {
    pub fn exact(value: f64) -> Self {
        EvalResult {
            value,
            abs_err: 4.0 * f64::EPSILON * value.abs(),
            flags: Flags::default(),
        }
    }
}
