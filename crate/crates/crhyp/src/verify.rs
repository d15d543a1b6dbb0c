//! Independent verification: heat-equation residual, mass conservation, and
//! a diffusion Monte Carlo oracle.
//!
//! The radial generator being verified is
//! `L = ∂²_r + ((2n-1) coth r + tanh r) ∂_r + tanh²r ∂²_θ`, with invariant
//! measure `dμ = (2πⁿ/Γ(n))(sinh r)^{2n-1} cosh r dr dθ`. Its diffusion reads
//! `dr = ((2n-1) coth r + tanh r) ds + √2 dW¹`, `dθ = √2 tanh r dW²` (the
//! second-order coefficients of `L` are 2× the diffusion matrix halves,
//! hence the `√2` noise scaling).

use crate::error::{Error, Result};
use crate::quad::{integrate_adaptive_seeded, Kahan};
use crate::rng::CounterRng;
use crate::special::{measure_box_mass, measure_density};
use crate::subelliptic::{p_cover_raw, FrozenKernel};
use crate::types::{CylPoint, EvalContext, EvalResult, Flags, HeatTime, QuadSpec, Space, WrapSpec};
use rayon::prelude::*;

/// Finite-difference heat-equation residual at one point.
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    /// (t, r, θ)
    pub point: (f64, f64, f64),
    pub dt_estimate: f64,
    pub lp_estimate: f64,
    /// `|dt - Lp| / (|dt| + 1e-30)`
    pub rel_residual: f64,
    /// (h_t, h_r, h_θ)
    pub steps: (f64, f64, f64),
}

/// Apply the central second-order stencil of `∂_t - L` to an arbitrary
/// function of `(t, r, θ)`. Used on the kernel itself and as a negative
/// control on expressions that are not exact solutions.
pub fn pde_residual_of<F: Fn(f64, f64, f64) -> f64>(
    ctx: &EvalContext,
    f: F,
    t: f64,
    r: f64,
    theta: f64,
    steps: (f64, f64, f64),
) -> ResidualReport {
    let (h_t, h_r, h_th) = steps;
    let n = ctx.n() as f64;
    let center = f(t, r, theta);
    let dt = (f(t + h_t, r, theta) - f(t - h_t, r, theta)) / (2.0 * h_t);
    let p_rp = f(t, r + h_r, theta);
    let p_rm = f(t, r - h_r, theta);
    let p_r = (p_rp - p_rm) / (2.0 * h_r);
    let p_rr = (p_rp - 2.0 * center + p_rm) / (h_r * h_r);
    let p_tp = f(t, r, theta + h_th);
    let p_tm = f(t, r, theta - h_th);
    let p_thth = (p_tp - 2.0 * center + p_tm) / (h_th * h_th);
    let drift = (2.0 * n - 1.0) / r.tanh() + r.tanh();
    let lp = p_rr + drift * p_r + r.tanh() * r.tanh() * p_thth;
    ResidualReport {
        point: (t, r, theta),
        dt_estimate: dt,
        lp_estimate: lp,
        rel_residual: (dt - lp).abs() / (dt.abs() + 1e-30),
        steps,
    }
}

/// Heat-equation residual of the computed kernel at `(t, r, θ)`.
///
/// All stencil values are evaluated on one frozen contour and panel grid
/// (chosen for the center point), so quadrature error varies smoothly across
/// the stencil and cancels in the differences; with independent adaptive
/// evaluations the second differences would be noise-dominated.
pub fn pde_residual(
    ctx: &EvalContext,
    t: HeatTime,
    pt: &CylPoint,
    steps: (f64, f64, f64),
    spec: &QuadSpec,
) -> Result<ResidualReport> {
    let (h_t, h_r, h_th) = steps;
    if !(h_t > 0.0 && h_r > 0.0 && h_th > 0.0) {
        return Err(Error::domain("pde_residual", "steps must be positive"));
    }
    if pt.r < 5.0 * h_r {
        return Err(Error::domain(
            "pde_residual",
            format!("r = {} too close to the coordinate singularity (need r >= 5 h_r)", pt.r),
        ));
    }
    if t.get() < 2.0 * h_t {
        return Err(Error::domain(
            "pde_residual",
            format!("t = {} too small for the time stencil (need t >= 2 h_t)", t.get()),
        ));
    }
    let frozen = FrozenKernel::build(ctx, t.get(), pt.r, pt.theta, spec)?;
    Ok(pde_residual_of(
        ctx,
        |tt, rr, th| frozen.eval(tt, rr, th),
        t.get(),
        pt.r,
        pt.theta,
        steps,
    ))
}

/// Composite GK21 with nodes evaluated in parallel; returns (value, err).
fn composite_par<F: Fn(f64) -> (f64, f64) + Sync>(edges: &[f64], g: F) -> (f64, f64) {
    // g returns (value, err) per abscissa; per-panel rule errors are summed
    // with per-node errors
    const XGK: [f64; 11] = [
        0.995_657_163_025_808_080_735_527_280_689_003,
        0.973_906_528_517_171_720_077_964_012_084_452,
        0.930_157_491_355_708_226_001_207_180_059_508,
        0.865_063_366_688_984_510_732_096_688_423_493,
        0.780_817_726_586_416_897_063_717_578_345_042,
        0.679_409_568_299_024_406_234_327_365_114_874,
        0.562_757_134_668_604_683_339_000_099_272_694,
        0.433_395_394_129_247_190_799_265_943_165_784,
        0.294_392_862_701_460_198_131_126_603_103_866,
        0.148_874_338_981_631_210_884_826_001_129_720,
        0.0,
    ];
    const WG: [f64; 5] = [
        0.066_671_344_308_688_137_593_568_809_893_332,
        0.149_451_349_150_580_593_145_776_339_657_697,
        0.219_086_362_515_982_043_995_534_934_228_163,
        0.269_266_719_309_996_355_091_226_921_569_469,
        0.295_524_224_714_752_870_173_892_994_651_338,
    ];
    const WGK: [f64; 11] = [
        0.011_694_638_867_371_874_278_064_396_062_192,
        0.032_558_162_307_964_727_478_818_972_459_390,
        0.054_755_896_574_351_996_031_381_300_244_580,
        0.075_039_674_810_919_952_767_043_140_916_190,
        0.093_125_454_583_697_605_535_065_465_083_366,
        0.109_387_158_802_297_641_899_210_590_325_805,
        0.123_491_976_262_065_851_077_958_109_831_074,
        0.134_709_217_311_473_325_928_054_001_771_707,
        0.142_775_938_577_060_080_797_094_273_138_717,
        0.147_739_104_901_338_491_374_841_515_972_068,
        0.149_445_554_002_916_905_664_936_468_389_821,
    ];
    // all abscissae, tagged (panel, node index)
    let mut jobs: Vec<(usize, usize, f64)> = Vec::new();
    for (ip, w) in edges.windows(2).enumerate() {
        let c = 0.5 * (w[0] + w[1]);
        let h = 0.5 * (w[1] - w[0]);
        jobs.push((ip, 10, c));
        for (j, &x) in XGK.iter().enumerate().take(10) {
            jobs.push((ip, j, c - h * x));
            jobs.push((ip, 20 + j, c + h * x));
        }
    }
    let vals: Vec<(usize, usize, f64, f64)> = jobs
        .par_iter()
        .map(|&(ip, j, x)| {
            let (v, e) = g(x);
            (ip, j, v, e)
        })
        .collect();
    let npanels = edges.len() - 1;
    let mut kron = vec![Kahan::default(); npanels];
    let mut gauss = vec![0.0f64; npanels];
    let mut node_err = vec![0.0f64; npanels];
    for &(ip, j, v, e) in &vals {
        let jj = if j >= 20 { j - 20 } else { j };
        kron[ip].add(WGK[jj] * v);
        node_err[ip] += WGK[jj] * e;
        if jj == 10 {
            // center belongs to the Gauss rule only via odd-index pairs; the
            // 10-point rule does not use it
        } else if jj % 2 == 1 {
            gauss[ip] += WG[jj / 2] * v;
        }
    }
    let mut total = Kahan::default();
    let mut err = Kahan::default();
    for ip in 0..npanels {
        let h = 0.5 * (edges[ip + 1] - edges[ip]);
        total.add(kron[ip].total() * h);
        err.add(((kron[ip].total() - gauss[ip]) * h).abs() + node_err[ip] * h);
    }
    (total.total(), err.total())
}

/// Total kernel mass `∫∫ p dμ` over the truncated domain; expected value 1.
///
/// The θ-domain follows the space: the full line (truncated by the exponent
/// rule) on the cover, `[-π, π]` with the periodized kernel on the compact
/// space. Evaluations fan out over a worker pool; the summation order is
/// fixed.
pub fn normalization_check(ctx: &EvalContext, t: HeatTime, spec: &QuadSpec) -> Result<EvalResult> {
    spec.validate()?;
    let tt = t.get();
    let n = ctx.n() as f64;
    // the mass needs ~1e-4; truncating at e^{-16}-level tails keeps the
    // kernel windows short and still leaves orders of magnitude of slack
    let cutoff = spec.exponent_cutoff.min(16.0);
    // r range: r²/4t - 2nr > cutoff + margin
    let r_max = 4.0 * n * tt + (16.0 * n * n * tt * tt + 4.0 * tt * (cutoff + 6.0)).sqrt();
    let pi = std::f64::consts::PI;
    let inner_spec = QuadSpec {
        rel_tol: (spec.rel_tol).max(1e-6),
        abs_tol: 1e-14,
        exponent_cutoff: cutoff,
        ..*spec
    };
    // wrap rings whose Gaussian bound exp(-(2πk-π)²/4t) matters
    let k_rings = (1..=12)
        .take_while(|&k| {
            let gap = 2.0 * pi * k as f64 - pi;
            gap * gap / (4.0 * tt) < cutoff + 6.0
        })
        .last()
        .unwrap_or(0);

    // radial integrand: μ(r) · 2∫_0^{θmax(r)} p(r,θ) dθ  (kernel even in θ);
    // the θ range uses d(r,θ) >= d(0,θ) - r and the μ-growth e^{2nr}
    let radial = |r: f64| -> (f64, f64) {
        let theta_max = match ctx.space {
            Space::UniversalCover => {
                let c = cutoff + 2.0 * n * r + 6.0;
                let d0 = r + (4.0 * tt * c).sqrt();
                -pi + (pi * pi + d0 * d0).sqrt()
            }
            Space::CompactCircleBundle => pi,
        };
        let inner = |th: f64| -> f64 {
            match ctx.space {
                Space::UniversalCover => p_cover_raw(ctx.n(), tt, r, th, &inner_spec)
                    .map(|e| e.value)
                    .unwrap_or(f64::NAN),
                Space::CompactCircleBundle => {
                    let mut acc = p_cover_raw(ctx.n(), tt, r, th, &inner_spec)
                        .map(|e| e.value)
                        .unwrap_or(f64::NAN);
                    for k in 1..=k_rings {
                        let two_pi_k = 2.0 * pi * k as f64;
                        acc += p_cover_raw(ctx.n(), tt, r, th + two_pi_k, &inner_spec)
                            .map(|e| e.value)
                            .unwrap_or(f64::NAN);
                        acc += p_cover_raw(ctx.n(), tt, r, th - two_pi_k, &inner_spec)
                            .map(|e| e.value)
                            .unwrap_or(f64::NAN);
                    }
                    acc
                }
            }
        };
        let theta_seeds = (theta_max / 2.0).ceil().max(3.0) as usize;
        match integrate_adaptive_seeded(inner, 0.0, theta_max, theta_seeds, &inner_spec) {
            Ok(i) => {
                let mu = measure_density(ctx, r);
                (2.0 * mu * i.value, 2.0 * mu * i.abs_err)
            }
            Err(_) => (f64::NAN, f64::INFINITY),
        }
    };

    let r_panels = r_max.ceil().max(6.0) as usize;
    let edges: Vec<f64> = (0..=r_panels)
        .map(|i| r_max * i as f64 / r_panels as f64)
        .collect();
    let (mass, err) = composite_par(&edges, radial);
    if !mass.is_finite() {
        return Err(Error::domain(
            "normalization_check",
            "kernel evaluation failed inside the mass integral",
        ));
    }
    Ok(EvalResult {
        value: mass,
        abs_err: err,
        flags: Flags::default(),
    })
}

/// Monte Carlo configuration.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// start radius (the drift is singular at r = 0)
    pub r0: f64,
    /// below this radius the step is scaled so `drift·h <= r/2`
    pub substep_threshold: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            paths: 10_000,
            dt: 1e-3,
            seed: 0x5eed_cafe,
            r0: 1e-3,
            substep_threshold: 0.1,
        }
    }
}

impl McConfig {
    pub fn validate(&self, t: f64) -> Result<()> {
        if self.paths < 1000 {
            return Err(Error::domain("McConfig", "paths must be >= 1000"));
        }
        if !(self.dt > 0.0) || self.dt > t {
            return Err(Error::domain("McConfig", "need 0 < dt <= t"));
        }
        if !(self.r0 > 0.0) || !(self.substep_threshold > 0.0) {
            return Err(Error::domain(
                "McConfig",
                "r0 and substep_threshold must be positive",
            ));
        }
        Ok(())
    }
}

/// Result of a diffusion simulation: terminal samples plus the number of
/// paths aborted by the substep budget (excluded from the samples).
#[derive(Debug, Clone)]
pub struct McRun {
    pub samples: Vec<(f64, f64)>,
    pub aborted: usize,
}

/// Euler–Maruyama simulation of the diffusion generated by the radial
/// sub-Laplacian, started at `(r0, 0)`, reflected at `r = 0`, with
/// drift-limited sub-stepping near the origin. Deterministic for a fixed
/// seed: each path owns a counter-derived stream, so the result does not
/// depend on thread scheduling.
pub fn mc_simulate(ctx: &EvalContext, t: HeatTime, cfg: &McConfig) -> Result<McRun> {
    cfg.validate(t.get())?;
    let n = ctx.n() as f64;
    let tt = t.get();
    const MAX_SUBSTEPS: u64 = 1_000_000;

    let results: Vec<Option<(f64, f64)>> = (0..cfg.paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = CounterRng::new(cfg.seed, path as u64);
            let mut r = cfg.r0;
            let mut theta = 0.0f64;
            let mut remaining = tt;
            let mut substeps: u64 = 0;
            while remaining > 0.0 {
                let drift = (2.0 * n - 1.0) / r.tanh() + r.tanh();
                let mut h = cfg.dt.min(remaining);
                if r < cfg.substep_threshold {
                    h = h.min(0.5 * r / drift);
                }
                substeps += 1;
                if substeps > MAX_SUBSTEPS {
                    return None;
                }
                let noise = (2.0 * h).sqrt();
                let r_old = r;
                r += drift * h + noise * rng.normal();
                theta += noise * r_old.tanh() * rng.normal();
                if r < 0.0 {
                    r = -r; // reflection
                }
                r = r.max(1e-12);
                remaining -= h;
            }
            Some((r, theta))
        })
        .collect();

    let mut samples = Vec::with_capacity(cfg.paths);
    let mut aborted = 0usize;
    for s in results {
        match s {
            Some(p) => samples.push(p),
            None => aborted += 1,
        }
    }
    Ok(McRun { samples, aborted })
}

/// Histogram over the (r, θ) plane with exact per-bin μ-mass.
#[derive(Debug, Clone)]
pub struct HistogramGrid {
    pub r_edges: Vec<f64>,
    pub theta_edges: Vec<f64>,
    /// row-major `[ir * ntheta + itheta]`
    pub counts: Vec<u64>,
    pub mu_mass: Vec<f64>,
}

impl HistogramGrid {
    pub fn new(ctx: &EvalContext, r_edges: Vec<f64>, theta_edges: Vec<f64>) -> Result<Self> {
        if r_edges.len() < 2 || theta_edges.len() < 2 {
            return Err(Error::domain("HistogramGrid", "need at least one bin per axis"));
        }
        if r_edges.windows(2).any(|w| !(w[0] < w[1]))
            || theta_edges.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(Error::domain("HistogramGrid", "edges must be ascending"));
        }
        let nr = r_edges.len() - 1;
        let nth = theta_edges.len() - 1;
        let mut mu_mass = vec![0.0; nr * nth];
        for ir in 0..nr {
            for it in 0..nth {
                mu_mass[ir * nth + it] = measure_box_mass(
                    ctx,
                    r_edges[ir],
                    r_edges[ir + 1],
                    theta_edges[it],
                    theta_edges[it + 1],
                );
            }
        }
        Ok(HistogramGrid {
            r_edges,
            theta_edges,
            counts: vec![0; nr * nth],
            mu_mass,
        })
    }

    fn locate(edges: &[f64], x: f64) -> Option<usize> {
        if x < edges[0] || x >= *edges.last().unwrap() {
            return None;
        }
        // binary search for the bin containing x
        let idx = edges.partition_point(|&e| e <= x);
        Some(idx - 1)
    }

    /// Bin the samples; returns how many fell outside the grid.
    pub fn fill(&mut self, samples: &[(f64, f64)]) -> usize {
        let nth = self.theta_edges.len() - 1;
        let mut outside = 0;
        for &(r, th) in samples {
            match (
                Self::locate(&self.r_edges, r),
                Self::locate(&self.theta_edges, th),
            ) {
                (Some(ir), Some(it)) => self.counts[ir * nth + it] += 1,
                _ => outside += 1,
            }
        }
        outside
    }
}

/// One bin of the Monte Carlo comparison.
#[derive(Debug, Clone, Copy)]
pub struct BinReport {
    pub ir: usize,
    pub itheta: usize,
    pub expected: f64,
    pub count: u64,
    pub z: f64,
}

/// Summary of the diffusion-law comparison.
#[derive(Debug, Clone)]
pub struct McCompareReport {
    pub bins: Vec<BinReport>,
    /// bins with >= 20 expected counts
    pub qualifying: usize,
    /// qualifying bins with |z| <= 3
    pub within_3sigma: usize,
    pub fraction_within: f64,
    /// Σ over bins of the predicted probability mass
    pub predicted_total: f64,
    pub samples_in_grid: usize,
    pub samples_outside: usize,
}

/// Compare binned samples against the predicted bin masses
/// `∫∫_bin p_t dμ` under binomial errors.
pub fn mc_compare(
    samples: &[(f64, f64)],
    ctx: &EvalContext,
    t: HeatTime,
    grid: &mut HistogramGrid,
    spec: &QuadSpec,
) -> Result<McCompareReport> {
    if samples.is_empty() {
        return Err(Error::domain("mc_compare", "sample list is empty"));
    }
    spec.validate()?;
    let outside = grid.fill(samples);
    let total = samples.len() as f64;
    let nth = grid.theta_edges.len() - 1;
    let nr = grid.r_edges.len() - 1;
    let tt = t.get();
    let inner_spec = QuadSpec {
        rel_tol: spec.rel_tol.max(1e-7),
        abs_tol: 1e-14,
        ..*spec
    };

    // predicted mass per bin by a 7-point Gauss rule per axis
    const X7: [f64; 7] = [
        -0.949_107_912_342_758_5,
        -0.741_531_185_599_394_4,
        -0.405_845_151_377_397_2,
        0.0,
        0.405_845_151_377_397_2,
        0.741_531_185_599_394_4,
        0.949_107_912_342_758_5,
    ];
    const W7: [f64; 7] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_6,
        0.381_830_050_505_118_94,
        0.417_959_183_673_469_4,
        0.381_830_050_505_118_94,
        0.279_705_391_489_276_6,
        0.129_484_966_168_869_7,
    ];
    let predicted: Vec<f64> = (0..nr * nth)
        .into_par_iter()
        .map(|idx| {
            let ir = idx / nth;
            let it = idx % nth;
            let (ra, rb) = (grid.r_edges[ir], grid.r_edges[ir + 1]);
            let (ta, tb) = (grid.theta_edges[it], grid.theta_edges[it + 1]);
            let (rc, rh) = (0.5 * (ra + rb), 0.5 * (rb - ra));
            let (tc, th2) = (0.5 * (ta + tb), 0.5 * (tb - ta));
            let mut acc = 0.0;
            for (i, &xi) in X7.iter().enumerate() {
                let r = rc + rh * xi;
                let mu = measure_density(ctx, r);
                let mut row = 0.0;
                for (j, &xj) in X7.iter().enumerate() {
                    let th = tc + th2 * xj;
                    let p = p_cover_raw(ctx.n(), tt, r, th, &inner_spec)
                        .map(|e| e.value)
                        .unwrap_or(0.0);
                    row += W7[j] * p;
                }
                acc += W7[i] * mu * row * th2;
            }
            acc * rh
        })
        .collect();

    let predicted_total: f64 = predicted.iter().sum();
    if predicted_total < 0.999 {
        return Err(Error::domain(
            "mc_compare",
            format!("grid covers only {predicted_total:.5} of the predicted mass (need 0.999)"),
        ));
    }

    let mut bins = Vec::with_capacity(nr * nth);
    let mut qualifying = 0;
    let mut within = 0;
    for idx in 0..nr * nth {
        let expected = predicted[idx] * total;
        let count = grid.counts[idx];
        let var = total * predicted[idx] * (1.0 - predicted[idx]);
        let z = if var > 0.0 {
            (count as f64 - expected) / var.sqrt()
        } else {
            0.0
        };
        if expected >= 20.0 {
            qualifying += 1;
            if z.abs() <= 3.0 {
                within += 1;
            }
        }
        bins.push(BinReport {
            ir: idx / nth,
            itheta: idx % nth,
            expected,
            count,
            z,
        });
    }
    Ok(McCompareReport {
        bins,
        qualifying,
        within_3sigma: within,
        fraction_within: within as f64 / qualifying.max(1) as f64,
        predicted_total,
        samples_in_grid: samples.len() - outside,
        samples_outside: outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cover(n: u32) -> EvalContext {
        EvalContext::new(n, Space::UniversalCover).unwrap()
    }

    #[test]
    fn stencil_annihilates_constants() {
        let ctx = cover(1);
        let rep = pde_residual_of(&ctx, |_, _, _| 3.7, 0.5, 1.0, 0.5, (1e-3, 1e-3, 1e-3));
        assert_eq!(rep.dt_estimate, 0.0);
        assert_eq!(rep.lp_estimate, 0.0);
    }

    #[test]
    fn kernel_satisfies_heat_equation() {
        let ctx = cover(1);
        let spec = QuadSpec::default();
        let h = 1e-3;
        let rep = pde_residual(
            &ctx,
            HeatTime::new(0.5).unwrap(),
            &CylPoint::new(1.0, 0.5).unwrap(),
            (h, h, h),
            &spec,
        )
        .unwrap();
        assert!(rep.rel_residual <= 1e-3, "residual {}", rep.rel_residual);
        let rep2 = pde_residual(
            &ctx,
            HeatTime::new(0.5).unwrap(),
            &CylPoint::new(1.0, 0.5).unwrap(),
            (h / 2.0, h / 2.0, h / 2.0),
            &spec,
        )
        .unwrap();
        let factor = rep.rel_residual / rep2.rel_residual;
        assert!(
            (3.0..5.0).contains(&factor),
            "halving factor {factor} ({} -> {})",
            rep.rel_residual,
            rep2.rel_residual
        );
    }

    #[test]
    fn asymptotic_formula_fails_the_pde() {
        // negative control: the steepest-descent formula is not an exact
        // solution, so the same stencil must report a visible residual
        let ctx = cover(1);
        let f = |t: f64, r: f64, th: f64| {
            crate::asympt::asym_general(
                &ctx,
                HeatTime::new(t).unwrap(),
                &CylPoint::new(r, th).unwrap(),
            )
            .map(|e| e.value)
            .unwrap_or(f64::NAN)
        };
        let rep = pde_residual_of(&ctx, f, 0.5, 1.0, 0.5, (1e-3, 1e-3, 1e-3));
        assert!(rep.rel_residual > 1e-2, "residual {}", rep.rel_residual);
    }

    #[test]
    fn pde_preconditions() {
        let ctx = cover(1);
        let spec = QuadSpec::default();
        assert!(pde_residual(
            &ctx,
            HeatTime::new(0.5).unwrap(),
            &CylPoint::new(1e-3, 0.5).unwrap(),
            (1e-3, 1e-3, 1e-3),
            &spec
        )
        .is_err());
        assert!(pde_residual(
            &ctx,
            HeatTime::new(1e-3).unwrap(),
            &CylPoint::new(1.0, 0.5).unwrap(),
            (1e-3, 1e-3, 1e-3),
            &spec
        )
        .is_err());
    }

    #[test]
    fn mass_is_one_on_the_cover() {
        let ctx = cover(1);
        let spec = QuadSpec::default();
        let m = normalization_check(&ctx, HeatTime::new(0.5).unwrap(), &spec).unwrap();
        assert!((m.value - 1.0).abs() <= 1e-3, "mass {}", m.value);
    }

    #[test]
    fn mc_paths_deterministic_and_nonnegative() {
        let ctx = cover(1);
        let cfg = McConfig {
            paths: 2000,
            dt: 2e-3,
            seed: 99,
            ..McConfig::default()
        };
        let a = mc_simulate(&ctx, HeatTime::new(0.3).unwrap(), &cfg).unwrap();
        let b = mc_simulate(&ctx, HeatTime::new(0.3).unwrap(), &cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        assert!(a.samples.iter().all(|&(r, _)| r >= 0.0));
        assert_eq!(a.samples.len() + a.aborted, cfg.paths);

        // θ-symmetry of the law: sample mean within 3 standard errors of 0
        let mean: f64 =
            a.samples.iter().map(|&(_, th)| th).sum::<f64>() / a.samples.len() as f64;
        let var: f64 = a
            .samples
            .iter()
            .map(|&(_, th)| (th - mean) * (th - mean))
            .sum::<f64>()
            / (a.samples.len() as f64 - 1.0);
        let stderr = (var / a.samples.len() as f64).sqrt();
        assert!(mean.abs() <= 3.0 * stderr, "mean {mean} stderr {stderr}");
    }

    #[test]
    fn histogram_accounting() {
        let ctx = cover(1);
        let mut grid = HistogramGrid::new(
            &ctx,
            vec![0.0, 1.0, 2.0],
            vec![-1.0, 0.0, 1.0],
        )
        .unwrap();
        let samples = vec![(0.5, -0.5), (1.5, 0.5), (3.0, 0.0), (0.1, 2.0)];
        let outside = grid.fill(&samples);
        assert_eq!(outside, 2);
        assert_eq!(grid.counts.iter().sum::<u64>(), 2);
        // μ-mass positive on interior bins
        assert!(grid.mu_mass.iter().all(|&m| m > 0.0));
        assert_relative_eq!(
            grid.mu_mass.iter().sum::<f64>(),
            measure_box_mass(&ctx, 0.0, 2.0, -1.0, 1.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn mc_compare_small_run() {
        let ctx = cover(1);
        let t = HeatTime::new(0.5).unwrap();
        let cfg = McConfig {
            paths: 20_000,
            dt: 1e-3,
            seed: 12345,
            ..McConfig::default()
        };
        let run = mc_simulate(&ctx, t, &cfg).unwrap();
        let r_edges: Vec<f64> = (0..=12).map(|i| 4.8 * i as f64 / 12.0).collect();
        let th_edges: Vec<f64> = (0..=12).map(|i| -4.8 + 9.6 * i as f64 / 12.0).collect();
        let mut grid = HistogramGrid::new(&ctx, r_edges, th_edges).unwrap();
        let rep = mc_compare(&run.samples, &ctx, t, &mut grid, &QuadSpec::default()).unwrap();
        assert!(rep.qualifying > 10, "qualifying {}", rep.qualifying);
        assert!(
            rep.fraction_within >= 0.9,
            "fraction {} ({} of {})",
            rep.fraction_within,
            rep.within_3sigma,
            rep.qualifying
        );
        assert!(rep.predicted_total >= 0.999);
        assert_eq!(
            rep.samples_in_grid + rep.samples_outside,
            run.samples.len()
        );
    }

    #[test]
    fn mc_compare_rejects_empty_samples() {
        let ctx = cover(1);
        let mut grid =
            HistogramGrid::new(&ctx, vec![0.0, 1.0], vec![-1.0, 1.0]).unwrap();
        assert!(mc_compare(
            &[],
            &ctx,
            HeatTime::new(0.5).unwrap(),
            &mut grid,
            &QuadSpec::default()
        )
        .is_err());
    }
}
