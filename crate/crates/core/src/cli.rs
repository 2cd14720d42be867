//! Command-line front end.
//!
//! Every subcommand writes plain text, CSV or JSON to stdout (or `--out`).
//! Exit codes: 0 success, 1 domain error, 2 a check failed, 3 refused because
//! the signal is below the noise floor, 64 usage error.
//!
//! `--config FILE` reads flat `key = value` lines; each key becomes the flag
//! `--key` unless that flag is also given on the command line. Boolean flags
//! take `true`/`false`.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::bounds::identities::{check_identities, check_semigroup, Relation};
use crate::bounds::estimates::{check_kernel_estimates, EstimateGrid};
use crate::bounds::{
    check_theorem, check_z_bound, fit_decay, l_floor, smallest_constant, theorem_rhs_unit, DecayPoint,
    TheoremBoundInput,
};
use crate::kernels::{
    dirichlet_box_kernel, heat_kernel, mehler_kernel, BoxGeometry, ImageCutoff, OscillatorParams, TimePoint,
    WidenFactor,
};
use crate::oracle::{oracle_trace_2d_extrapolated, quadrature_z_term};
use crate::spectrum::{box_oscillator_eigs, Discretization, DirichletOscillatorSpec, DEFAULT_GRID};
use crate::statmech::{avg_number, finite_size_scan, partition_finite, partition_infinite, EnsembleParams, Volume};
use crate::traces::{
    trace_difference, trace_difference_from_spectrum, trace_finite, trace_infinite, y_term_direct, z_term,
    DEFAULT_TOL,
};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_BELOW_NOISE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable supplying the default for `--jobs`.
pub const JOBS_ENV: &str = "MEHLER_TRACES_JOBS";

/// Fixed header of sweep and fit CSV output.
pub const CSV_HEADER: &str = "L,kappa,t,d,delta,y,z,err,rhs,margin";

#[derive(Debug, Parser)]
#[command(name = "mehler-traces", version, about = "Oscillator kernels and traces on the whole space and in a Dirichlet box")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Point evaluation of a heat, Mehler or Dirichlet-box kernel.
    Kernel(KernelArgs),
    /// Lowest eigenvalues of the oscillator in the interval [-L/2, L/2].
    Eigs(EigsArgs),
    /// Trace of the semigroup, whole space or box.
    Trace(TraceArgs),
    /// Trace difference and its interior/exterior split.
    Diff(DiffArgs),
    /// Exterior term against its Chernoff majorant.
    Zterm(PointArgs),
    /// Check the Gaussian-decay estimate at one point.
    Bound(BoundArgs),
    /// Sweep L and fit the decay of the trace difference.
    FitDecay(FitDecayArgs),
    /// Partition function and mean particle number of the ideal Bose gas.
    Statmech(StatmechArgs),
    /// Trace differences over a parameter grid, written as CSV or JSON.
    Sweep(SweepArgs),
    /// Compare the production pipeline with the dense-grid and quadrature oracles.
    OracleCompare(OracleArgs),
    /// Randomized identity, semigroup and kernel-estimate checks.
    Identities(IdentityArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelKind {
    Heat,
    Mehler,
    Box,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Numerics {
    /// Requested truncation tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Finite-difference grid size (power of two).
    #[arg(long, default_value_t = DEFAULT_GRID)]
    n: usize,
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[arg(long, value_enum)]
    kind: KernelKind,
    /// First point, comma separated; its length is the dimension.
    #[arg(long, value_parser = parse_point)]
    x: Point,
    #[arg(long, value_parser = parse_point)]
    y: Point,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Box side (box kernel only).
    #[arg(long = "L")]
    side: Option<f64>,
    /// Image cutoff (box kernel only); automatic when omitted.
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct EigsArgs {
    #[arg(long = "L")]
    side: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    n: usize,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Whole-space trace.
    #[arg(long, conflicts_with = "side")]
    infinite: bool,
    #[arg(long = "L", required_unless_present = "infinite")]
    side: Option<f64>,
    #[command(flatten)]
    numerics: Numerics,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long)]
    t: f64,
    #[arg(long = "L")]
    side: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct DiffArgs {
    #[command(flatten)]
    point: PointArgs,
    #[command(flatten)]
    numerics: Numerics,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    point: PointArgs,
    /// The constant multiplying the right-hand side.
    #[arg(long = "C", default_value_t = 1.0)]
    constant: f64,
    #[command(flatten)]
    numerics: Numerics,
}

#[derive(Debug, Args)]
struct FitDecayArgs {
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Box sides: `a:b:step`, `geom:a:b:n`, or a comma list.
    #[arg(long = "L", value_parser = parse_grid)]
    sides: Grid,
    #[command(flatten)]
    numerics: Numerics,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatmechArgs {
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    z: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Box side; whole space when omitted.
    #[arg(long = "L", conflicts_with = "scan")]
    side: Option<f64>,
    /// Finite-size scan over these box sides.
    #[arg(long, value_parser = parse_grid)]
    scan: Option<Grid>,
    /// Tolerance for the fugacity series.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    n: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long = "L", value_parser = parse_grid)]
    sides: Grid,
    #[arg(long, value_parser = parse_grid)]
    t: Grid,
    #[arg(long, value_parser = parse_grid, default_value = "1")]
    kappa: Grid,
    #[arg(long, value_parser = parse_dims, default_value = "1")]
    d: Dims,
    #[arg(long = "C", default_value_t = 1.0)]
    constant: f64,
    #[command(flatten)]
    numerics: Numerics,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Worker threads.
    #[arg(long, env = JOBS_ENV)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long = "L")]
    side: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long)]
    t: f64,
    /// Dense grid size for the interior-term oracle.
    #[arg(long, default_value_t = 255)]
    grid: usize,
    /// Also compare the 2D dense oracle with the squared 1D trace.
    #[arg(long)]
    two_d: bool,
    #[command(flatten)]
    numerics: Numerics,
}

#[derive(Debug, Args)]
struct IdentityArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Also run the widened semigroup check.
    #[arg(long)]
    semigroup: bool,
    /// Also run the kernel estimates.
    #[arg(long)]
    estimates: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct Grid(Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
struct Dims(Vec<usize>);

#[derive(Debug, Clone, PartialEq)]
struct Point(Vec<f64>);

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    parse_list(s).map(Point)
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"))).collect()
}

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    s.split(',').map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad dimension {p:?}: {e}"))).collect::<std::result::Result<_, _>>().map(Dims)
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    parse_range(s).map(Grid)
}

/// Parse `a:b:step` (inclusive), `geom:a:b:n`, a comma list, or a single number.
pub fn parse_range(s: &str) -> std::result::Result<Vec<f64>, String> {
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        ["geom", a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|e| format!("bad count {n:?}: {e}"))?;
            if !(a > 0.0 && b > 0.0) || n < 1 {
                return Err(format!("geometric ladder needs a, b > 0 and n >= 1, got {s:?}"));
            }
            if n == 1 {
                vec![a]
            } else {
                let r = (b / a).ln() / (n - 1) as f64;
                (0..n).map(|i| if i + 1 == n { b } else { a * (r * i as f64).exp() }).collect()
            }
        }
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(format!("range needs step > 0 and b >= a, got {s:?}"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| a + i as f64 * step).collect()
        }
        [single] => parse_list(single)?,
        _ => return Err(format!("unrecognised range {s:?}")),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(format!("range {s:?} must be nonempty and finite"));
    }
    Ok(values)
}

/// Parameter grid for `sweep`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sides: Vec<f64>,
    pub times: Vec<f64>,
    pub kappas: Vec<f64>,
    pub dims: Vec<usize>,
    /// Constant multiplying the estimate's right-hand side.
    pub constant: f64,
    pub tol: f64,
    pub grid: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sides.is_empty() || self.times.is_empty() || self.kappas.is_empty() || self.dims.is_empty() {
            return Err(Error::Domain("every sweep grid must be nonempty".into()));
        }
        if !(self.tol > 0.0 && self.constant > 0.0) {
            return Err(Error::Domain("tolerance and constant must be > 0".into()));
        }
        Discretization::new(self.grid)?;
        Ok(())
    }
}

/// One row of sweep output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub side: f64,
    pub kappa: f64,
    pub t: f64,
    pub dim: usize,
    pub delta: f64,
    pub y: f64,
    pub z: f64,
    pub err: f64,
    pub rhs: f64,
    /// `rhs / |delta|`.
    pub margin: f64,
}

fn sorted_unique(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Evaluate the grid. Rows come back ordered by `(L, kappa, t, d)` whatever the
/// thread count; every row is computed independently, so results are bitwise
/// reproducible.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let disc = Discretization::new(cfg.grid)?;
    let sides = sorted_unique(&cfg.sides);
    let kappas = sorted_unique(&cfg.kappas);
    let times = sorted_unique(&cfg.times);
    let mut dims = cfg.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    let pairs: Vec<(f64, f64)> = sides.iter().flat_map(|&l| kappas.iter().map(move |&k| (l, k))).collect();
    let spectra = pairs
        .par_iter()
        .map(|&(l, k)| {
            let spec = DirichletOscillatorSpec::new(l, k)?;
            Ok((spec, box_oscillator_eigs(&spec, disc, disc.max_count())?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut jobs: Vec<(usize, f64, usize)> = Vec::with_capacity(pairs.len() * times.len() * dims.len());
    for i in 0..pairs.len() {
        for &t in &times {
            jobs.extend(dims.iter().map(|&d| (i, t, d)));
        }
    }
    jobs.par_iter()
        .map(|&(i, t, d)| {
            let (spec, spectrum) = &spectra[i];
            let diff = trace_difference_from_spectrum(TimePoint::new(t)?, spectrum, spec, d, cfg.tol)?;
            let rhs = cfg.constant * theorem_rhs_unit(t, spec.side(), spec.kappa(), d)?;
            Ok(SweepRow {
                side: spec.side(),
                kappa: spec.kappa(),
                t,
                dim: d,
                delta: diff.delta,
                y: diff.y_term,
                z: diff.z_term,
                err: diff.err_delta,
                rhs,
                margin: rhs / diff.delta.abs(),
            })
        })
        .collect()
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// `v` rounded to `digits` significant digits, positional when reasonable.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.*e}", digits - 1)
    }
}

pub fn csv_row(r: &SweepRow) -> String {
    [sci(r.side), sci(r.kappa), sci(r.t), r.dim.to_string(), sci(r.delta), sci(r.y), sci(r.z), sci(r.err), sci(r.rhs), sci(r.margin)]
        .join(",")
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&csv_row(r));
        s.push('\n');
    }
    s
}

pub fn render_json(rows: &[SweepRow]) -> String {
    let arr: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "L": r.side, "kappa": r.kappa, "t": r.t, "d": r.dim, "delta": r.delta, "y": r.y,
                "z": r.z, "err": r.err, "rhs": r.rhs, "margin": r.margin,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(arr)).expect("finite numbers serialize");
    s.push('\n');
    s
}

/// Failure of a subcommand, carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BelowNoiseFloor { .. } => EXIT_BELOW_NOISE,
            _ => EXIT_DOMAIN,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_DOMAIN, message: format!("i/o error: {e}") }
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Key/value report printed as `key = value` lines or as one JSON object.
struct Report(Map<String, Value>);

impl Report {
    fn new() -> Self {
        Report(Map::new())
    }

    fn num(mut self, key: &str, v: f64) -> Self {
        self.0.insert(key.into(), json!(v));
        self
    }

    fn int(mut self, key: &str, v: usize) -> Self {
        self.0.insert(key.into(), json!(v));
        self
    }

    fn flag(mut self, key: &str, v: bool) -> Self {
        self.0.insert(key.into(), json!(v));
        self
    }

    fn write(&self, out: &mut dyn Write, as_json: bool) -> std::io::Result<()> {
        if as_json {
            return writeln!(out, "{}", serde_json::to_string_pretty(&Value::Object(self.0.clone())).expect("serializable"));
        }
        for (k, v) in &self.0 {
            let shown = match v {
                Value::Number(n) if n.is_f64() => sci(n.as_f64().unwrap_or(f64::NAN)),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            writeln!(out, "{k} = {shown}")?;
        }
        Ok(())
    }
}

fn disc(n: usize) -> Result<Discretization> {
    Discretization::new(n)
}

fn cmd_kernel(a: &KernelArgs, out: &mut dyn Write) -> Outcome {
    let t = TimePoint::new(a.t)?;
    let report = match a.kind {
        KernelKind::Heat => Report::new().num("value", heat_kernel(&a.x.0, &a.y.0, t)?),
        KernelKind::Mehler => {
            let p = OscillatorParams::new(a.kappa, a.x.0.len())?;
            Report::new().num("value", mehler_kernel(&a.x.0, &a.y.0, t, p, WidenFactor::new(a.gamma)?)?)
        }
        KernelKind::Box => {
            let side = a.side.ok_or_else(|| Error::Domain("box kernel needs --L".into()))?;
            let cutoff = a.m_max.map_or(ImageCutoff::Auto, ImageCutoff::Fixed);
            let v = dirichlet_box_kernel(&a.x.0, &a.y.0, t, BoxGeometry::new(side)?, cutoff)?;
            Report::new().num("value", v.value).num("tail_bound", v.tail_bound).int("images", v.images)
        }
    };
    report.write(out, a.json)?;
    Ok(EXIT_OK)
}

fn cmd_eigs(a: &EigsArgs, out: &mut dyn Write) -> Outcome {
    let spec = DirichletOscillatorSpec::new(a.side, a.kappa)?;
    let spectrum = box_oscillator_eigs(&spec, disc(a.n)?, a.count)?;
    writeln!(out, "s,value,error")?;
    for (s, (v, e)) in spectrum.values.iter().zip(&spectrum.errors).enumerate() {
        writeln!(out, "{s},{},{}", sci(*v), sci(*e))?;
    }
    if !spectrum.is_converged() {
        writeln!(out, "# unconverged indices: {:?}", spectrum.unconverged)?;
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

fn cmd_trace(a: &TraceArgs, out: &mut dyn Write) -> Outcome {
    let t = TimePoint::new(a.t)?;
    let report = match a.side {
        None => Report::new().num("value", trace_infinite(t, OscillatorParams::new(a.kappa, a.d)?)?),
        Some(side) => {
            let spec = DirichletOscillatorSpec::new(side, a.kappa)?;
            let r = trace_finite(t, &spec, a.d, a.numerics.tol, disc(a.numerics.n)?)?;
            Report::new()
                .num("value", r.value)
                .num("truncation_error", r.truncation_error)
                .num("discretization_error", r.discretization_error)
                .int("eigencount_used", r.eigencount_used)
        }
    };
    if a.json {
        report.write(out, true)?;
    } else {
        let v = report.0["value"].as_f64().unwrap_or(f64::NAN);
        writeln!(out, "{}", format_significant(v, 12))?;
    }
    Ok(EXIT_OK)
}

fn cmd_diff(a: &DiffArgs, out: &mut dyn Write) -> Outcome {
    let p = &a.point;
    let spec = DirichletOscillatorSpec::new(p.side, p.kappa)?;
    let d = trace_difference(TimePoint::new(p.t)?, &spec, p.d, a.numerics.tol, disc(a.numerics.n)?)?;
    Report::new()
        .num("delta", d.delta)
        .num("y", d.y_term)
        .num("z", d.z_term)
        .num("err_delta", d.err_delta)
        .num("err_y", d.err_y)
        .num("err_z", d.err_z)
        .flag("noise_floor", d.below_noise_floor)
        .write(out, p.json)?;
    Ok(EXIT_OK)
}

fn cmd_zterm(a: &PointArgs, out: &mut dyn Write) -> Outcome {
    let spec = DirichletOscillatorSpec::new(a.side, a.kappa)?;
    let t = TimePoint::new(a.t)?;
    let c = check_z_bound(t, &spec, a.d)?;
    Report::new().num("z", z_term(t, &spec, a.d)?).num("bound", c.bound).flag("holds", c.holds).write(out, a.json)?;
    Ok(if c.holds { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> Outcome {
    let p = &a.point;
    let spec = DirichletOscillatorSpec::new(p.side, p.kappa)?;
    let diff = trace_difference(TimePoint::new(p.t)?, &spec, p.d, a.numerics.tol, disc(a.numerics.n)?)?;
    let input = TheoremBoundInput::new(p.t, p.side, p.kappa, p.d, a.constant)?;
    let c = check_theorem(&input, &diff)?;
    Report::new()
        .num("delta", c.delta)
        .num("rhs", c.rhs)
        .num("margin", c.margin)
        .num("constant_needed", c.constant_needed)
        .flag("holds", c.holds)
        .write(out, p.json)?;
    Ok(if c.holds { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn write_output(path: &Option<PathBuf>, body: &str, out: &mut dyn Write) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, body),
        None => out.write_all(body.as_bytes()),
    }
}

fn cmd_fit_decay(a: &FitDecayArgs, out: &mut dyn Write) -> Outcome {
    let disc = disc(a.numerics.n)?;
    let t = TimePoint::new(a.t)?;
    let sides = sorted_unique(&a.sides.0);
    let diffs = sides
        .par_iter()
        .map(|&side| trace_difference(t, &DirichletOscillatorSpec::new(side, a.kappa)?, a.d, a.numerics.tol, disc))
        .collect::<Result<Vec<_>>>()?;
    let mut usable = Vec::new();
    for (&side, d) in sides.iter().zip(&diffs) {
        if !d.below_noise_floor && d.delta > 0.0 {
            usable.push((TheoremBoundInput::new(a.t, side, a.kappa, a.d, 1.0)?, d.delta));
        }
    }
    let constant = smallest_constant(&usable)?;
    let mut rows = Vec::with_capacity(sides.len());
    for (&side, d) in sides.iter().zip(&diffs) {
        let rhs = constant * theorem_rhs_unit(a.t, side, a.kappa, a.d)?;
        rows.push(SweepRow {
            side,
            kappa: a.kappa,
            t: a.t,
            dim: a.d,
            delta: d.delta,
            y: d.y_term,
            z: d.z_term,
            err: d.err_delta,
            rhs,
            margin: rhs / d.delta.abs(),
        });
    }
    write_output(&a.out, &render_csv(&rows), out)?;
    let points: Vec<DecayPoint> = sides
        .iter()
        .zip(&diffs)
        .map(|(&side, d)| DecayPoint { side, delta: d.delta, below_noise_floor: d.below_noise_floor })
        .collect();
    let fit = fit_decay(&points, a.kappa, a.t, a.d)?;
    let summary = [
        ("fitted_rate", sci(fit.fitted_rate)),
        ("theorem_rate", sci(fit.theorem_rate)),
        ("expected_rate", sci(fit.expected_rate)),
        ("rate_in_side_squared", sci(fit.rate_in_side_squared)),
        ("intercept", sci(fit.intercept)),
        ("residual_rms", sci(fit.residual_rms)),
        ("relative_rms", sci(fit.relative_rms())),
        ("residual_rms_linear_in_side", sci(fit.residual_rms_linear_in_side)),
        ("gaussian_preferred", fit.gaussian_preferred().to_string()),
        ("points_used", fit.points_used.to_string()),
        ("fitted_constant", sci(constant)),
        ("l_floor", sci(l_floor(a.kappa))),
    ];
    for (k, v) in summary {
        writeln!(out, "# {k} = {v}")?;
    }
    Ok(if fit.beats_theorem_rate() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_statmech(a: &StatmechArgs, out: &mut dyn Write) -> Outcome {
    let ens = EnsembleParams::new(a.beta, a.z)?;
    let disc = disc(a.n)?;
    if let Some(scan) = &a.scan {
        let r = finite_size_scan(ens, a.kappa, a.d, &scan.0, a.tol, disc)?;
        writeln!(out, "L,phi,phi_diff,phi_err,number,number_diff,number_err")?;
        for p in &r.points {
            let cols = [p.side, p.phi, p.phi_diff, p.phi_err, p.number, p.number_diff, p.number_err];
            writeln!(out, "{}", cols.iter().map(|v| sci(*v)).collect::<Vec<_>>().join(","))?;
        }
        writeln!(out, "# phi_infinite = {}", sci(r.phi_infinite))?;
        writeln!(out, "# number_infinite = {}", sci(r.number_infinite))?;
        for (name, f) in [("phi", r.phi_fit), ("number", r.number_fit)] {
            writeln!(out, "# {name}_c = {}", sci(f.c))?;
            writeln!(out, "# {name}_residual_rms = {}", sci(f.residual_rms))?;
            writeln!(out, "# {name}_residual_rms_linear_in_side = {}", sci(f.residual_rms_linear_in_side))?;
            writeln!(out, "# {name}_points_used = {}", f.points_used)?;
        }
        let ok = r.phi_fit.c > 0.0 && r.number_fit.c > 0.0;
        return Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED });
    }
    let (phi, phi_err, volume) = match a.side {
        None => (partition_infinite(a.beta, OscillatorParams::new(a.kappa, a.d)?)?, 0.0, Volume::WholeSpace),
        Some(side) => {
            let spec = DirichletOscillatorSpec::new(side, a.kappa)?;
            let r = partition_finite(a.beta, &spec, a.d, DEFAULT_TOL, disc)?;
            (r.value, r.total_error(), Volume::Box(spec))
        }
    };
    let n = avg_number(ens, volume, a.kappa, a.d, a.tol, disc)?;
    Report::new()
        .num("phi", phi)
        .num("phi_err", phi_err)
        .num("number", n.value)
        .int("terms_used", n.terms_used)
        .num("tail_bound", n.tail_bound)
        .num("number_err", n.total_error())
        .write(out, a.json)?;
    Ok(EXIT_OK)
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Outcome {
    let cfg = SweepConfig {
        sides: a.sides.0.clone(),
        times: a.t.0.clone(),
        kappas: a.kappa.0.clone(),
        dims: a.d.0.clone(),
        constant: a.constant,
        tol: a.numerics.tol,
        grid: a.numerics.n,
    };
    let rows = match a.jobs {
        Some(0) => return Err(Failure { code: EXIT_USAGE, message: "--jobs must be >= 1".into() }),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Failure { code: EXIT_DOMAIN, message: format!("thread pool: {e}") })?
            .install(|| run_sweep(&cfg))?,
        None => run_sweep(&cfg)?,
    };
    let body = match a.format {
        OutputFormat::Csv => render_csv(&rows),
        OutputFormat::Json => render_json(&rows),
    };
    write_output(&a.out, &body, out)?;
    Ok(EXIT_OK)
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Outcome {
    let t = TimePoint::new(a.t)?;
    let spec = DirichletOscillatorSpec::new(a.side, a.kappa)?;
    let disc = disc(a.numerics.n)?;
    let mut all_ok = true;

    let z = z_term(t, &spec, 1)?;
    let zq = quadrature_z_term(a.side, a.kappa, t)?;
    let z_ok = (z - zq).abs() <= 1e-10;
    all_ok &= z_ok;
    writeln!(out, "z closed = {} quadrature = {} diff = {} ok = {z_ok}", sci(z), sci(zq), sci(z - zq))?;

    let diff = trace_difference(t, &spec, 1, a.numerics.tol, disc)?;
    let y = y_term_direct(t, &spec, a.grid)?;
    let budget = diff.err_y + y.error;
    let y_ok = (diff.y_term - y.value).abs() <= budget.max(1e-6);
    all_ok &= y_ok;
    writeln!(
        out,
        "y pipeline = {} direct = {} diff = {} budget = {} ok = {y_ok}",
        sci(diff.y_term),
        sci(y.value),
        sci(diff.y_term - y.value),
        sci(budget)
    )?;

    if a.two_d {
        let one = trace_finite(t, &spec, 1, a.numerics.tol, disc)?.value;
        let two = oracle_trace_2d_extrapolated(a.side, a.kappa, t, &[32, 40, 48])?;
        let rel = (two.value / (one * one) - 1.0).abs();
        let ok = rel <= 1e-4;
        all_ok &= ok;
        for (n, _, v) in &two.samples {
            writeln!(out, "2d n = {n} value = {} rel = {}", sci(*v), sci((v / (one * one) - 1.0).abs()))?;
        }
        writeln!(out, "2d extrapolated = {} squared 1d = {} rel = {} ok = {ok}", sci(two.value), sci(one * one), sci(rel))?;
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_identities(a: &IdentityArgs, out: &mut dyn Write) -> Outcome {
    let mut ok = true;
    let r = check_identities(a.seed, a.samples);
    for c in &r.checks {
        let rel = match c.relation {
            Relation::Equality => "equality",
            Relation::Inequality => "inequality",
        };
        writeln!(out, "{} {rel} samples = {} worst = {} passed = {}", c.name, c.samples, sci(c.worst), c.passed)?;
    }
    ok &= r.passed();
    if a.semigroup {
        for c in check_semigroup(a.seed, 10, &[1.0, 2.0, 8.0])? {
            writeln!(
                out,
                "semigroup gamma = {} quadrature_error = {} closed_form_error = {} prefactor = {} passed = {}",
                c.gamma,
                sci(c.max_quadrature_error),
                sci(c.max_closed_form_error),
                c.prefactor_confirmed,
                c.passed
            )?;
            ok &= c.passed;
        }
    }
    if a.estimates {
        let r = check_kernel_estimates(&EstimateGrid { points: a.samples, seed: a.seed, ..EstimateGrid::default() })?;
        for o in &r.outcomes {
            writeln!(
                out,
                "{} d = {} constant = {} evaluations = {} passed = {}",
                o.kind.name(),
                o.dim,
                sci(o.constant),
                o.evaluations,
                o.passed
            )?;
        }
        ok &= r.passed();
    }
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Splice `--config FILE` entries into the arguments after the subcommand.
fn expand_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            config = Some(it.next().ok_or("--config needs a file")?.to_string_lossy().into_owned());
        } else if let Some(path) = s.strip_prefix("--config=") {
            config = Some(path.to_owned());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let given: BTreeSet<String> = rest
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|s| s.strip_prefix("--"))
        .map(|s| s.split('=').next().unwrap_or(s).to_owned())
        .collect();
    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("{path}:{}: expected key = value", lineno + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if given.contains(k) {
            continue;
        }
        match v {
            "true" => injected.push(OsString::from(format!("--{k}"))),
            "false" => {}
            _ => {
                injected.push(OsString::from(format!("--{k}")));
                injected.push(OsString::from(v));
            }
        }
    }
    // binary name, subcommand, then the file's flags, then the user's
    let split = rest.len().min(2);
    let tail = rest.split_off(split);
    rest.extend(injected);
    rest.extend(tail);
    Ok(rest)
}

/// Run with explicit argument list and output streams; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = match expand_config(args.into_iter().map(Into::into).collect()) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Kernel(a) => cmd_kernel(a, out),
        Command::Eigs(a) => cmd_eigs(a, out),
        Command::Trace(a) => cmd_trace(a, out),
        Command::Diff(a) => cmd_diff(a, out),
        Command::Zterm(a) => cmd_zterm(a, out),
        Command::Bound(a) => cmd_bound(a, out),
        Command::FitDecay(a) => cmd_fit_decay(a, out),
        Command::Statmech(a) => cmd_statmech(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::OracleCompare(a) => cmd_oracle(a, out),
        Command::Identities(a) => cmd_identities(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Run against the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run_with(args, &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    code
}
