//! Numerical evaluation of the subelliptic heat kernel on the CR hyperbolic
//! space `H^{2n+1}` and on its universal cover.
//!
//! The space is the circle bundle `S^1 -> H^{2n+1} -> CH^n` over complex
//! hyperbolic space; its universal cover carries the corresponding line-bundle
//! structure. In the cylindrical chart `(r, theta)` (radial coordinate toward
//! `CH^n` with `rho = tanh r`, fiber coordinate `theta`) the radial part of the
//! sub-Laplacian is
//!
//! ```text
//! L = d²/dr² + ((2n-1) coth r + tanh r) d/dr + tanh²r d²/dθ²
//! ```
//!
//! with invariant measure `dμ = (2πⁿ/Γ(n)) (sinh r)^{2n-1} cosh r dr dθ`.
//! Everything evaluated here is the heat kernel of this operator issued from
//! the north pole `(r, θ) = (0, 0)`, together with the quantities controlling
//! its small-time behaviour.
//!
//! What the crate provides, module by module:
//!
//! * [`riemannian`] — the heat kernel `q_t` of the radial Laplace–Beltrami
//!   operator on real hyperbolic space `H^{2n+1}(ℝ)`, by two independent
//!   routes (an n-fold derivative formula evaluated with truncated Taylor
//!   arithmetic, and an oscillatory integral), plus its small-time expansion.
//! * [`subelliptic`] — the subelliptic kernel `p_t` as a complex-shifted
//!   Gaussian transform of `q_t`, on the universal cover ([`subelliptic::p_cover`])
//!   and on the compact space by fiber periodization ([`subelliptic::p_compact`]),
//!   with an independent double-integral cross-check.
//! * [`distance`] — the saddle angle `φ(r,θ)`, the sub-Riemannian distance
//!   `d(r,θ)`, and the curvature of the saddle phase.
//! * [`asympt`] — the four small-time asymptotic regimes (diagonal, vertical
//!   cut-locus, axis, generic point) and the diagonal constants `A_n`, `B_n`.
//! * [`verify`] — independent checks: finite-difference heat-equation
//!   residual, total-mass quadrature, and an Euler–Maruyama diffusion oracle
//!   with histogram comparison.
//! * [`cli`] — the command-line front end used by the `crhyp` binary.
//!
//! Numerical conventions shared by all evaluators: kernels are computed in a
//! Gaussian-factored form `value = m · exp(E)` so that no intermediate
//! over/underflows at small `t`; oscillatory integrals are evaluated on a
//! contour shifted to the saddle of the phase, which keeps the integrand
//! non-cancelling; all routines are deterministic for fixed inputs.

pub mod asympt;
pub mod cli;
pub mod distance;
pub mod error;
pub mod jet;
pub mod quad;
pub mod riemannian;
pub mod rng;
pub mod special;
pub mod subelliptic;
pub mod types;
pub mod verify;

pub use error::Error;
pub use types::{
    CylPoint, EvalContext, EvalResult, Flags, HeatTime, QuadSpec, RiemannianArg, Space, WrapSpec,
};
