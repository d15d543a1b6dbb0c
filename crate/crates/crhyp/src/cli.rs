//! Command-line front end.
//!
//! Subcommands: `kernel`, `distance`, `asympt`, `verify`, `mc`, `table`.
//! Rows go to `--out PATH` (CSV or JSON-lines), or to standard output when no
//! path is given; a one-line machine-readable summary always ends on standard
//! output. Identical invocations produce byte-identical output: floats are
//! printed with 17 significant digits, seeds are fixed, and evaluation order
//! is the input order.
//!
//! Exit codes: 0 success, 1 numeric-tolerance failure, 2 usage error.

use crate::asympt::{asym_axis, asym_diagonal, asym_general, asym_vertical};
use crate::distance::sr_distance;
use crate::error::Error;
use crate::subelliptic::{p_compact, p_cover};
use crate::types::{CylPoint, EvalContext, HeatTime, QuadSpec, Space, WrapSpec};
use crate::verify::{mc_compare, mc_simulate, normalization_check, pde_residual, HistogramGrid, McConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::HashMap;
use std::io::Write;

#[derive(Parser, Debug)]
#[command(
    name = "crhyp",
    about = "Subelliptic heat kernel, sub-Riemannian distance and small-time asymptotics \
             on the CR hyperbolic space and its universal cover",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the heat kernel at points (cartesian product of the lists)
    Kernel(KernelArgs),
    /// Sub-Riemannian distance from the north pole
    Distance(DistanceArgs),
    /// Small-time asymptotic formulas
    Asympt(AsymptArgs),
    /// Verification checks: heat equation, total mass, Monte Carlo
    Verify(VerifyArgs),
    /// Simulate the diffusion generated by the radial sub-Laplacian
    Mc(McArgs),
    /// Kernel values over a rectangular (t, r, theta) grid
    Table(TableArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// complex dimension index (1..=20)
    #[arg(long)]
    n: Option<u32>,
    /// space: "cover" (universal cover) or "compact" (circle bundle)
    #[arg(long)]
    space: Option<String>,
    /// relative tolerance for quadrature
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
    /// absolute tolerance for quadrature
    #[arg(long = "abs-tol")]
    abs_tol: Option<f64>,
    /// periodization truncation for the compact space
    #[arg(long)]
    kmax: Option<usize>,
    /// output file; rows go to standard output if omitted
    #[arg(long)]
    out: Option<String>,
    /// output format: "csv" or "jsonl"
    #[arg(long)]
    format: Option<String>,
    /// plain-text `key = value` config merged under explicit flags
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// heat times, comma-separated
    #[arg(long)]
    t: Option<String>,
    /// radial coordinates, comma-separated
    #[arg(long)]
    r: Option<String>,
    /// fiber coordinates, comma-separated
    #[arg(long)]
    theta: Option<String>,
}

#[derive(Args, Debug)]
struct DistanceArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    theta: Option<String>,
}

#[derive(Args, Debug)]
struct AsymptArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// regime: diagonal, vertical, axis or general
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    theta: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// check: pde, mass or mc
    #[arg(long)]
    check: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    /// finite-difference step (pde check)
    #[arg(long)]
    h: Option<f64>,
    /// pass/fail threshold for the selected check
    #[arg(long)]
    threshold: Option<f64>,
    /// Monte Carlo paths (mc check)
    #[arg(long)]
    paths: Option<usize>,
    /// Euler–Maruyama step (mc check)
    #[arg(long)]
    dt: Option<f64>,
    /// RNG seed (mc check)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// heat times, comma-separated
    #[arg(long)]
    t: Option<String>,
    /// radial grid as start:stop:count
    #[arg(long)]
    r: Option<String>,
    /// fiber grid as start:stop:count
    #[arg(long)]
    theta: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

/// 17-significant-digit rendering; round-trips every f64 exactly.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

struct Emitter {
    format: Format,
    file: Option<std::io::BufWriter<std::fs::File>>,
    columns: Vec<&'static str>,
    rows: usize,
}

impl Emitter {
    fn new(out: Option<&str>, format: Format, columns: Vec<&'static str>) -> Result<Self, Error> {
        let file = match out {
            Some(path) => Some(std::io::BufWriter::new(
                std::fs::File::create(path)
                    .map_err(|e| Error::Io(format!("cannot create {path}: {e}")))?,
            )),
            None => None,
        };
        let mut em = Emitter {
            format,
            file,
            columns,
            rows: 0,
        };
        if em.format == Format::Csv {
            let header = em.columns.join(",");
            em.write_line(&header)?;
        }
        Ok(em)
    }

    fn write_line(&mut self, line: &str) -> Result<(), Error> {
        match &mut self.file {
            Some(f) => writeln!(f, "{line}").map_err(|e| Error::Io(e.to_string())),
            None => {
                println!("{line}");
                Ok(())
            }
        }
    }

    fn row(&mut self, values: &[String]) -> Result<(), Error> {
        debug_assert_eq!(values.len(), self.columns.len());
        let line = match self.format {
            Format::Csv => values.join(","),
            Format::Jsonl => {
                let mut obj = serde_json::Map::new();
                for (c, v) in self.columns.iter().zip(values) {
                    // numbers stay numbers where they parse; flags/regime stay strings
                    let jv = match v.parse::<f64>() {
                        Ok(x) if v.chars().next().map_or(false, |c| c.is_ascii_digit() || c == '-')
                            => serde_json::json!(x),
                        _ => serde_json::json!(v),
                    };
                    obj.insert((*c).to_string(), jv);
                }
                serde_json::Value::Object(obj).to_string()
            }
        };
        self.rows += 1;
        self.write_line(&line)
    }

    fn finish(mut self) -> Result<usize, Error> {
        if let Some(f) = &mut self.file {
            f.flush().map_err(|e| Error::Io(e.to_string()))?;
        }
        Ok(self.rows)
    }
}

/// Plain-text `key = value` config; `#` starts a comment.
fn load_config(path: &str) -> Result<HashMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read config {path}: {e}")))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Usage(format!("config {path}:{}: expected key = value", lineno + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Resolved evaluation settings after merging flags over config over
/// defaults.
struct Settings {
    ctx: EvalContext,
    spec: QuadSpec,
    kmax: Option<usize>,
    out: Option<String>,
    format: Format,
    config: HashMap<String, String>,
}

fn parse_in<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>, Error>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|e| Error::Usage(format!("config key {key}: {e}"))),
    }
}

fn resolve(common: &CommonArgs) -> Result<Settings, Error> {
    let config = match &common.config {
        Some(path) => load_config(path)?,
        None => HashMap::new(),
    };
    let n = match common.n {
        Some(n) => n,
        None => parse_in::<u32>(&config, "n")?.unwrap_or(1),
    };
    let space_str = common
        .space
        .clone()
        .or_else(|| config.get("space").cloned())
        .unwrap_or_else(|| "cover".to_string());
    let space: Space = space_str.parse()?;
    let ctx = EvalContext::new(n, space)?;
    let mut spec = QuadSpec::default();
    spec.rel_tol = common
        .rel_tol
        .or(parse_in(&config, "rel-tol")?)
        .unwrap_or(spec.rel_tol);
    spec.abs_tol = common
        .abs_tol
        .or(parse_in(&config, "abs-tol")?)
        .unwrap_or(spec.abs_tol);
    spec.validate()?;
    let kmax = match common.kmax {
        Some(k) => Some(k),
        None => parse_in(&config, "kmax")?,
    };
    let format = match common
        .format
        .clone()
        .or_else(|| config.get("format").cloned())
        .as_deref()
    {
        None | Some("csv") => Format::Csv,
        Some("jsonl") => Format::Jsonl,
        Some(other) => {
            return Err(Error::Usage(format!(
                "unknown format '{other}' (expected csv or jsonl)"
            )))
        }
    };
    Ok(Settings {
        ctx,
        spec,
        kmax,
        out: common.out.clone(),
        format,
        config,
    })
}

fn parse_list(s: Option<&str>, cfg: &HashMap<String, String>, key: &str, default: &str)
    -> Result<Vec<f64>, Error>
{
    let text = match s {
        Some(v) => v.to_string(),
        None => cfg.get(key).cloned().unwrap_or_else(|| default.to_string()),
    };
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::Usage(format!("{key} '{p}': {e}")))
        })
        .collect()
}

/// `start:stop:count` inclusive grid.
fn parse_range(s: Option<&str>, cfg: &HashMap<String, String>, key: &str, default: &str)
    -> Result<Vec<f64>, Error>
{
    let text = match s {
        Some(v) => v.to_string(),
        None => cfg.get(key).cloned().unwrap_or_else(|| default.to_string()),
    };
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Usage(format!(
            "{key}: expected start:stop:count, got '{text}'"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|e| Error::Usage(format!("{key} start: {e}")))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|e| Error::Usage(format!("{key} stop: {e}")))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|e| Error::Usage(format!("{key} count: {e}")))?;
    if count == 0 || (count > 1 && !(b > a)) {
        return Err(Error::Usage(format!("{key}: need stop > start and count >= 1")));
    }
    Ok((0..count)
        .map(|i| {
            if count == 1 {
                a
            } else {
                a + (b - a) * i as f64 / (count - 1) as f64
            }
        })
        .collect())
}

fn eval_kernel(
    settings: &Settings,
    t: f64,
    r: f64,
    theta: f64,
) -> Result<crate::types::EvalResult, Error> {
    let time = HeatTime::new(t)?;
    let pt = CylPoint::new(r, theta)?;
    match settings.ctx.space {
        Space::UniversalCover => p_cover(&settings.ctx, time, &pt, &settings.spec),
        Space::CompactCircleBundle => {
            let wrap = match settings.kmax {
                Some(k) => WrapSpec::new(k, 1e-12)?,
                None => WrapSpec::default_for(t, theta, settings.spec.exponent_cutoff),
            };
            p_compact(&settings.ctx, time, &pt, &settings.spec, &wrap)
        }
    }
}

const KERNEL_COLUMNS: [&str; 8] = ["n", "t", "r", "theta", "space", "p", "abs_err", "flags"];

fn kernel_rows(
    settings: &Settings,
    ts: &[f64],
    rs: &[f64],
    thetas: &[f64],
    em: &mut Emitter,
) -> Result<(usize, f64), Error> {
    let mut max_err: f64 = 0.0;
    let mut truncated = 0usize;
    for &t in ts {
        for &r in rs {
            for &theta in thetas {
                let res = eval_kernel(settings, t, r, theta)?;
                max_err = max_err.max(res.abs_err);
                if res.flags.truncated {
                    truncated += 1;
                }
                em.row(&[
                    settings.ctx.n().to_string(),
                    fmt(t),
                    fmt(r),
                    fmt(theta),
                    settings.ctx.space.as_str().to_string(),
                    fmt(res.value),
                    fmt(res.abs_err),
                    res.flags.to_string(),
                ])?;
            }
        }
    }
    Ok((truncated, max_err))
}

fn cmd_kernel(args: &KernelArgs) -> Result<i32, Error> {
    let settings = resolve(&args.common)?;
    let ts = parse_list(args.t.as_deref(), &settings.config, "t", "0.5")?;
    let rs = parse_list(args.r.as_deref(), &settings.config, "r", "1")?;
    let thetas = parse_list(args.theta.as_deref(), &settings.config, "theta", "0")?;
    let mut em = Emitter::new(settings.out.as_deref(), settings.format, KERNEL_COLUMNS.to_vec())?;
    let (truncated, max_err) = kernel_rows(&settings, &ts, &rs, &thetas, &mut em)?;
    let rows = em.finish()?;
    println!("summary command=kernel rows={rows} truncated={truncated} max_abs_err={}", fmt(max_err));
    Ok(0)
}

fn cmd_table(args: &TableArgs) -> Result<i32, Error> {
    let settings = resolve(&args.common)?;
    let ts = parse_list(args.t.as_deref(), &settings.config, "t", "0.5")?;
    let rs = parse_range(args.r.as_deref(), &settings.config, "r", "0:3:13")?;
    let thetas = parse_range(args.theta.as_deref(), &settings.config, "theta", "0:3:13")?;
    let mut em = Emitter::new(settings.out.as_deref(), settings.format, KERNEL_COLUMNS.to_vec())?;
    let (truncated, max_err) = kernel_rows(&settings, &ts, &rs, &thetas, &mut em)?;
    let rows = em.finish()?;
    println!("summary command=table rows={rows} truncated={truncated} max_abs_err={}", fmt(max_err));
    Ok(0)
}

fn cmd_distance(args: &DistanceArgs) -> Result<i32, Error> {
    let settings = resolve(&args.common)?;
    let rs = parse_list(args.r.as_deref(), &settings.config, "r", "1")?;
    let thetas = parse_list(args.theta.as_deref(), &settings.config, "theta", "0")?;
    let mut em = Emitter::new(
        settings.out.as_deref(),
        settings.format,
        vec!["n", "space", "r", "theta", "d2", "d", "regime"],
    )?;
    for &r in &rs {
        for &theta in &thetas {
            let d = sr_distance(&settings.ctx, &CylPoint::new(r, theta)?)?;
            em.row(&[
                settings.ctx.n().to_string(),
                settings.ctx.space.as_str().to_string(),
                fmt(r),
                fmt(theta),
                fmt(d.d2),
                fmt(d.d),
                format!("{:?}", d.regime),
            ])?;
        }
    }
    let rows = em.finish()?;
    println!("summary command=distance rows={rows}");
    Ok(0)
}

fn cmd_asympt(args: &AsymptArgs) -> Result<i32, Error> {
    let settings = resolve(&args.common)?;
    let regime = args
        .regime
        .clone()
        .or_else(|| settings.config.get("regime").cloned())
        .unwrap_or_else(|| "general".to_string());
    let ts = parse_list(args.t.as_deref(), &settings.config, "t", "0.01")?;
    let rs = parse_list(args.r.as_deref(), &settings.config, "r", "1")?;
    let thetas = parse_list(args.theta.as_deref(), &settings.config, "theta", "0.5")?;
    let mut em = Emitter::new(
        settings.out.as_deref(),
        settings.format,
        vec!["n", "t", "r", "theta", "regime", "value"],
    )?;
    for &t in &ts {
        let time = HeatTime::new(t)?;
        for &r in &rs {
            for &theta in &thetas {
                let value = match regime.as_str() {
                    "diagonal" => asym_diagonal(&settings.ctx, time, &settings.spec)?.value,
                    "vertical" => asym_vertical(&settings.ctx, time, theta)?.value,
                    "axis" => asym_axis(&settings.ctx, time, r)?.value,
                    "general" => {
                        asym_general(&settings.ctx, time, &CylPoint::new(r, theta)?)?.value
                    }
                    other => {
                        return Err(Error::Usage(format!(
                            "unknown regime '{other}' (diagonal|vertical|axis|general)"
                        )))
                    }
                };
                em.row(&[
                    settings.ctx.n().to_string(),
                    fmt(t),
                    fmt(r),
                    fmt(theta),
                    regime.clone(),
                    fmt(value),
                ])?;
            }
        }
    }
    let rows = em.finish()?;
    println!("summary command=asympt regime={regime} rows={rows}");
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32, Error> {
    let settings = resolve(&args.common)?;
    let check = args
        .check
        .clone()
        .or_else(|| settings.config.get("check").cloned())
        .unwrap_or_else(|| "pde".to_string());
    let ts = parse_list(args.t.as_deref(), &settings.config, "t", "0.5")?;
    let t = HeatTime::new(ts[0])?;
    match check.as_str() {
        "pde" => {
            let rs = parse_list(args.r.as_deref(), &settings.config, "r", "1")?;
            let thetas = parse_list(args.theta.as_deref(), &settings.config, "theta", "0.5")?;
            let h = args.h.or(parse_in(&settings.config, "h")?).unwrap_or(1e-3);
            let threshold = args
                .threshold
                .or(parse_in(&settings.config, "threshold")?)
                .unwrap_or(1e-3);
            let mut em = Emitter::new(
                settings.out.as_deref(),
                settings.format,
                vec!["n", "t", "r", "theta", "h_t", "h_r", "h_theta", "dt_est", "lp_est", "rel_residual"],
            )?;
            let mut worst: f64 = 0.0;
            for &r in &rs {
                for &theta in &thetas {
                    let rep = pde_residual(
                        &settings.ctx,
                        t,
                        &CylPoint::new(r, theta)?,
                        (h, h, h),
                        &settings.spec,
                    )?;
                    worst = worst.max(rep.rel_residual);
                    em.row(&[
                        settings.ctx.n().to_string(),
                        fmt(ts[0]),
                        fmt(r),
                        fmt(theta),
                        fmt(h),
                        fmt(h),
                        fmt(h),
                        fmt(rep.dt_estimate),
                        fmt(rep.lp_estimate),
                        fmt(rep.rel_residual),
                    ])?;
                }
            }
            let rows = em.finish()?;
            let pass = worst <= threshold;
            println!(
                "summary command=verify check=pde rows={rows} max_rel_residual={} threshold={} pass={pass}",
                fmt(worst),
                fmt(threshold)
            );
            Ok(if pass { 0 } else { 1 })
        }
        "mass" => {
            let threshold = args
                .threshold
                .or(parse_in(&settings.config, "threshold")?)
                .unwrap_or(1e-3);
            let mut em = Emitter::new(
                settings.out.as_deref(),
                settings.format,
                vec!["n", "t", "space", "mass", "abs_err", "deviation"],
            )?;
            let m = normalization_check(&settings.ctx, t, &settings.spec)?;
            let dev = (m.value - 1.0).abs();
            em.row(&[
                settings.ctx.n().to_string(),
                fmt(ts[0]),
                settings.ctx.space.as_str().to_string(),
                fmt(m.value),
                fmt(m.abs_err),
                fmt(dev),
            ])?;
            let rows = em.finish()?;
            let pass = dev <= threshold;
            println!(
                "summary command=verify check=mass rows={rows} mass={} deviation={} threshold={} pass={pass}",
                fmt(m.value),
                fmt(dev),
                fmt(threshold)
            );
            Ok(if pass { 0 } else { 1 })
        }
        "mc" => {
            let cfg = McConfig {
                paths: args
                    .paths
                    .or(parse_in(&settings.config, "paths")?)
                    .unwrap_or(200_000),
                dt: args.dt.or(parse_in(&settings.config, "dt")?).unwrap_or(1e-3),
                seed: args
                    .seed
                    .or(parse_in(&settings.config, "seed")?)
                    .unwrap_or(20260809),
                ..McConfig::default()
            };
            let threshold = args
                .threshold
                .or(parse_in(&settings.config, "threshold")?)
                .unwrap_or(0.95);
            let run = mc_simulate(&settings.ctx, t, &cfg)?;
            // grid sized to the diffusion range at this heat time
            let r_hi = 4.0 * (2.0 * ts[0]).sqrt() + 1.2;
            let th_hi = 4.0 * (2.0 * ts[0]).sqrt() + 1.5;
            let r_edges: Vec<f64> = (0..=16).map(|i| r_hi * i as f64 / 16.0).collect();
            let th_edges: Vec<f64> = (0..=16).map(|i| -th_hi + 2.0 * th_hi * i as f64 / 16.0).collect();
            let mut grid = HistogramGrid::new(&settings.ctx, r_edges, th_edges)?;
            let rep = mc_compare(&run.samples, &settings.ctx, t, &mut grid, &settings.spec)?;
            let mut em = Emitter::new(
                settings.out.as_deref(),
                settings.format,
                vec!["r_lo", "r_hi", "theta_lo", "theta_hi", "expected", "count", "z"],
            )?;
            for b in &rep.bins {
                em.row(&[
                    fmt(grid.r_edges[b.ir]),
                    fmt(grid.r_edges[b.ir + 1]),
                    fmt(grid.theta_edges[b.itheta]),
                    fmt(grid.theta_edges[b.itheta + 1]),
                    fmt(b.expected),
                    b.count.to_string(),
                    fmt(b.z),
                ])?;
            }
            let rows = em.finish()?;
            let pass = rep.fraction_within >= threshold;
            println!(
                "summary command=verify check=mc rows={rows} paths={} aborted={} qualifying={} within_3sigma={} fraction={} predicted_total={} outside={} pass={pass}",
                cfg.paths,
                run.aborted,
                rep.qualifying,
                rep.within_3sigma,
                fmt(rep.fraction_within),
                fmt(rep.predicted_total),
                rep.samples_outside
            );
            Ok(if pass { 0 } else { 1 })
        }
        other => Err(Error::Usage(format!(
            "unknown check '{other}' (pde|mass|mc)"
        ))),
    }
}

fn cmd_mc(args: &McArgs) -> Result<i32, Error> {
    let settings = resolve(&args.common)?;
    let ts = parse_list(args.t.as_deref(), &settings.config, "t", "0.5")?;
    let t = HeatTime::new(ts[0])?;
    let cfg = McConfig {
        paths: args
            .paths
            .or(parse_in(&settings.config, "paths")?)
            .unwrap_or(10_000),
        dt: args.dt.or(parse_in(&settings.config, "dt")?).unwrap_or(1e-3),
        seed: args
            .seed
            .or(parse_in(&settings.config, "seed")?)
            .unwrap_or(20260809),
        ..McConfig::default()
    };
    let run = mc_simulate(&settings.ctx, t, &cfg)?;
    let mut em = Emitter::new(settings.out.as_deref(), settings.format, vec!["r", "theta"])?;
    for &(r, theta) in &run.samples {
        em.row(&[fmt(r), fmt(theta)])?;
    }
    let rows = em.finish()?;
    println!(
        "summary command=mc rows={rows} paths={} aborted={} seed={}",
        cfg.paths, run.aborted, cfg.seed
    );
    Ok(0)
}

/// Entry point shared by the binary and the tests: parses `args` (not
/// including the program name), runs the selected command, and returns the
/// process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = std::iter::once("crhyp".to_string())
        .chain(args.into_iter().map(Into::into))
        .collect();
    // worker pool size; evaluation order (hence output) does not depend on it
    if let Ok(threads) = std::env::var("CRHYP_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build_global();
        }
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Kernel(a) => cmd_kernel(a),
        Command::Distance(a) => cmd_distance(a),
        Command::Asympt(a) => cmd_asympt(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Table(a) => cmd_table(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("crhyp: {e}");
            match e {
                Error::Usage(_) | Error::Io(_) | Error::Domain { .. } => 2,
                _ => 1,
            }
        }
    }
}
