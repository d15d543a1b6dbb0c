//! Adaptive Gauss–Kronrod quadrature with an embedded error estimate.
//!
//! One 10/21-point rule per panel; adaptation always splits the panel with
//! the largest error estimate. Panel bookkeeping and the final summation use
//! a fixed order so results are bit-reproducible for identical inputs.

use crate::error::{Error, Result};
use crate::types::{EvalResult, Flags, QuadSpec};
use num_complex::Complex64;

/// Kronrod abscissae for the 21-point rule (positive half, descending).
const XGK21: [f64; 11] = [
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
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// 10-point Gauss weights paired with the odd Kronrod abscissae.
const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// 21-point Kronrod weights.
const WGK21: [f64; 11] = [
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

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.c
    }
}

#[derive(Debug, Clone, Copy)]
struct PanelReal {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    resabs: f64,
    /// splitting this panel no longer reduces its error (noise-limited)
    stuck: bool,
}

fn gk21_real<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = Kahan::default();
    let mut gauss = Kahan::default();
    let mut resabs = Kahan::default();
    kron.add(WGK21[10] * fc);
    resabs.add(WGK21[10] * fc.abs());
    for j in 0..10 {
        let x = h * XGK21[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron.add(WGK21[j] * (f1 + f2));
        resabs.add(WGK21[j] * (f1.abs() + f2.abs()));
        if j % 2 == 1 {
            gauss.add(WG10[j / 2] * (f1 + f2));
        }
    }
    let value = kron.total() * h;
    let err = ((kron.total() - gauss.total()) * h).abs();
    (value, err, resabs.total() * h.abs())
}

/// Uniform seed edges for `[a, b]` split into `seed_panels` pieces.
fn uniform_edges(a: f64, b: f64, seed_panels: usize) -> Vec<f64> {
    let seeds = seed_panels.clamp(1, 4096);
    let step = (b - a) / seeds as f64;
    let mut edges: Vec<f64> = (0..seeds).map(|i| a + step * i as f64).collect();
    edges.push(b);
    edges
}

/// Integral of `f` over `[a, b]` with `abs_err <= max(abs_tol, rel_tol*|I|)`.
///
/// `seed_panels` pre-splits the interval (callers with oscillatory integrands
/// size the seeds to the oscillation period); adaptation then bisects the
/// worst panel. Failure to converge within the panel budget is an error
/// carrying the best estimate.
pub fn integrate_adaptive_seeded<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    seed_panels: usize,
    spec: &QuadSpec,
) -> Result<EvalResult> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(
            "integrate_adaptive",
            format!("need finite a < b, got [{a}, {b}]"),
        ));
    }
    integrate_adaptive_edges(f, &uniform_edges(a, b, seed_panels), spec)
}

/// [`integrate_adaptive_seeded`] over an explicit ascending edge list.
pub fn integrate_adaptive_edges<F: Fn(f64) -> f64>(
    f: F,
    edges: &[f64],
    spec: &QuadSpec,
) -> Result<EvalResult> {
    spec.validate()?;
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain(
            "integrate_adaptive",
            "edge list must be ascending with at least two entries",
        ));
    }
    let mut panels: Vec<PanelReal> = Vec::with_capacity(edges.len() + 64);
    for w in edges.windows(2) {
        let (v, e, ra) = gk21_real(&f, w[0], w[1]);
        panels.push(PanelReal {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
            resabs: ra,
            stuck: false,
        });
    }

    const MAX_PANELS: usize = 20_000;
    let mut resolution_break = false;
    loop {
        let mut value = Kahan::default();
        let mut err = Kahan::default();
        let mut resabs = Kahan::default();
        for p in &panels {
            value.add(p.value);
            err.add(p.err);
            resabs.add(p.resabs);
        }
        let tol = spec.tol_for(value.total());
        if err.total() <= tol {
            break;
        }
        // f64 noise floor: the estimate cannot drop below eps * ∫|f|
        if err.total() <= 50.0 * f64::EPSILON * resabs.total() {
            resolution_break = true;
            break;
        }
        if panels.len() >= MAX_PANELS {
            let mut resabs = Kahan::default();
            for p in &panels {
                resabs.add(p.resabs);
            }
            return Err(Error::QuadratureBudget {
                value: value.total(),
                abs_err: err.total() + f64::EPSILON * resabs.total(),
            });
        }
        // split the worst splittable panel (deterministic tie-break on the
        // left edge)
        let mut worst = usize::MAX;
        for (i, p) in panels.iter().enumerate() {
            if p.stuck {
                continue;
            }
            if worst == usize::MAX
                || p.err > panels[worst].err
                || (p.err == panels[worst].err && p.a < panels[worst].a)
            {
                worst = i;
            }
        }
        if worst == usize::MAX {
            // every remaining panel is noise-limited
            resolution_break = true;
            break;
        }
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            panels[worst].stuck = true;
            resolution_break = true;
            continue;
        }
        let (v1, e1, r1) = gk21_real(&f, p.a, mid);
        let (v2, e2, r2) = gk21_real(&f, mid, p.b);
        if !v1.is_finite() || !v2.is_finite() {
            return Err(Error::domain(
                "integrate_adaptive",
                format!("integrand not finite inside [{:e}, {:e}]", p.a, p.b),
            ));
        }
        // round-off detection: a split that does not reduce the error marks
        // both children as noise-limited
        let stuck_children = e1 + e2 >= 0.99 * p.err && p.err > 0.0;
        panels[worst] = PanelReal {
            a: p.a,
            b: mid,
            value: v1,
            err: e1,
            resabs: r1,
            stuck: stuck_children,
        };
        panels.push(PanelReal {
            a: mid,
            b: p.b,
            value: v2,
            err: e2,
            resabs: r2,
            stuck: stuck_children,
        });
    }

    // fixed summation order: ascending left edges
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let mut value = Kahan::default();
    let mut err = Kahan::default();
    let mut resabs = Kahan::default();
    for p in &panels {
        value.add(p.value);
        err.add(p.err);
        resabs.add(p.resabs);
    }
    let noise = f64::EPSILON * resabs.total();
    let abs_err = err.total() + noise;
    let mut flags = Flags::default();
    flags.truncated = resolution_break && abs_err > spec.tol_for(value.total());
    Ok(EvalResult {
        value: value.total(),
        abs_err,
        flags,
    })
}

/// [`integrate_adaptive_seeded`] with a single seed panel.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> Result<EvalResult> {
    integrate_adaptive_seeded(f, a, b, 1, spec)
}

/// Complex-valued result of [`integrate_adaptive_c`].
#[derive(Debug, Clone, Copy)]
pub struct ComplexIntegral {
    pub value: Complex64,
    pub abs_err: f64,
    /// Integral of `|f|`, the cancellation envelope. `eps * resabs` is the
    /// f64 noise floor of the computed value.
    pub resabs: f64,
}

#[derive(Debug, Clone, Copy)]
struct PanelC {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    resabs: f64,
    stuck: bool,
}

fn gk21_c<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron_re = Kahan::default();
    let mut kron_im = Kahan::default();
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut resabs = Kahan::default();
    kron_re.add(WGK21[10] * fc.re);
    kron_im.add(WGK21[10] * fc.im);
    resabs.add(WGK21[10] * fc.norm());
    for j in 0..10 {
        let x = h * XGK21[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        kron_re.add(WGK21[j] * (f1.re + f2.re));
        kron_im.add(WGK21[j] * (f1.im + f2.im));
        resabs.add(WGK21[j] * (f1.norm() + f2.norm()));
        if j % 2 == 1 {
            gauss += WG10[j / 2] * (f1 + f2);
        }
    }
    let kron = Complex64::new(kron_re.total(), kron_im.total());
    let value = kron * h;
    let err = ((kron - gauss) * h).norm();
    (value, err, resabs.total() * h.abs())
}

/// Adaptive integration of a complex-valued function of a real variable.
/// Tolerances apply to the modulus of the result.
pub fn integrate_adaptive_c<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    seed_panels: usize,
    spec: &QuadSpec,
) -> Result<ComplexIntegral> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(
            "integrate_adaptive_c",
            format!("need finite a < b, got [{a}, {b}]"),
        ));
    }
    integrate_adaptive_c_edges(f, &uniform_edges(a, b, seed_panels), spec)
}

/// [`integrate_adaptive_c`] over an explicit ascending edge list.
pub fn integrate_adaptive_c_edges<F: Fn(f64) -> Complex64>(
    f: F,
    edges: &[f64],
    spec: &QuadSpec,
) -> Result<ComplexIntegral> {
    spec.validate()?;
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain(
            "integrate_adaptive_c",
            "edge list must be ascending with at least two entries",
        ));
    }
    let mut panels: Vec<PanelC> = Vec::with_capacity(edges.len() + 64);
    for w in edges.windows(2) {
        let (v, e, ra) = gk21_c(&f, w[0], w[1]);
        panels.push(PanelC {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
            resabs: ra,
            stuck: false,
        });
    }

    const MAX_PANELS: usize = 20_000;
    loop {
        let mut vre = Kahan::default();
        let mut vim = Kahan::default();
        let mut err = Kahan::default();
        let mut resabs = Kahan::default();
        for p in &panels {
            vre.add(p.value.re);
            vim.add(p.value.im);
            err.add(p.err);
            resabs.add(p.resabs);
        }
        let norm = Complex64::new(vre.total(), vim.total()).norm();
        if err.total() <= spec.tol_for(norm) {
            break;
        }
        if err.total() <= 50.0 * f64::EPSILON * resabs.total() {
            break;
        }
        if panels.len() >= MAX_PANELS {
            let mut resabs = Kahan::default();
            for p in &panels {
                resabs.add(p.resabs);
            }
            return Err(Error::QuadratureBudget {
                value: vre.total(),
                abs_err: err.total() + f64::EPSILON * resabs.total(),
            });
        }
        let mut worst = usize::MAX;
        for (i, p) in panels.iter().enumerate() {
            if p.stuck {
                continue;
            }
            if worst == usize::MAX
                || p.err > panels[worst].err
                || (p.err == panels[worst].err && p.a < panels[worst].a)
            {
                worst = i;
            }
        }
        if worst == usize::MAX {
            break;
        }
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            panels[worst].stuck = true;
            continue;
        }
        let (v1, e1, r1) = gk21_c(&f, p.a, mid);
        let (v2, e2, r2) = gk21_c(&f, mid, p.b);
        let stuck_children = e1 + e2 >= 0.99 * p.err && p.err > 0.0;
        panels[worst] = PanelC {
            a: p.a,
            b: mid,
            value: v1,
            err: e1,
            resabs: r1,
            stuck: stuck_children,
        };
        panels.push(PanelC {
            a: mid,
            b: p.b,
            value: v2,
            err: e2,
            resabs: r2,
            stuck: stuck_children,
        });
    }

    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let mut vre = Kahan::default();
    let mut vim = Kahan::default();
    let mut err = Kahan::default();
    let mut resabs = Kahan::default();
    for p in &panels {
        vre.add(p.value.re);
        vim.add(p.value.im);
        err.add(p.err);
        resabs.add(p.resabs);
    }
    Ok(ComplexIntegral {
        value: Complex64::new(vre.total(), vim.total()),
        abs_err: err.total() + f64::EPSILON * resabs.total(),
        resabs: resabs.total(),
    })
}

/// Non-adaptive composite GK21 over an explicit panel edge list, complex
/// integrand. Used where a frozen node set is required (finite-difference
/// stencils), so that nearby evaluations share identical quadrature error.
pub fn composite_gk21_c<F: Fn(f64) -> Complex64>(f: F, edges: &[f64]) -> ComplexIntegral {
    let mut vre = Kahan::default();
    let mut vim = Kahan::default();
    let mut err = Kahan::default();
    let mut resabs = Kahan::default();
    for w in edges.windows(2) {
        let (v, e, ra) = gk21_c(&f, w[0], w[1]);
        vre.add(v.re);
        vim.add(v.im);
        err.add(e);
        resabs.add(ra);
    }
    ComplexIntegral {
        value: Complex64::new(vre.total(), vim.total()),
        abs_err: err.total() + f64::EPSILON * resabs.total(),
        resabs: resabs.total(),
    }
}
