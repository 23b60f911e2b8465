//! Command-line front end.
//!
//! Every subcommand writes a CSV table (header row, RFC 4180 quoting, floats
//! with 17 significant digits) and a JSON sidecar holding the full
//! configuration, the crate version, the tolerances in force, fitted
//! quantities and any sweep points that failed. Output is deterministic:
//! sweep points run on a worker pool (`--jobs`) but are written in sweep order.
//!
//! Grids accept either a comma-separated list (`0.5,1,2`) or a range
//! `start:stop:step`, inclusive of `start` and exclusive of `stop`.
//!
//! Exit codes: `0` success, `2` configuration error, `3` numerical failure,
//! `4` unsupported configuration.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    collapse, extract_decay_rate, extract_frequency, scale_curves, Ansatz, Source, TimeSeries, COLLAPSE_OBJECTIVE,
};
use crate::asymptotics::{
    decay_rate_infinite, gamma_curvature, late_time_character, scaling_dataset, ScalingQuantity, SystemSize,
};
use crate::correlators::{bicorrelator, fit_power_law, magnetization_estimate, spin_correlator};
use crate::edoracle::{evolve_continuum, step_channel, string_observable, DoubledState};
use crate::error::{Error, Result};
use crate::meanfield::{dominant_saddle, solve_saddles, SaddleClass, ROOT_TOLERANCE};
use crate::model::ModelParams;
use crate::observable::{qubit0d_observable, qubit0d_rates, string_expectation};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "CTFIM_OUT_DIR";

/// Exit code for configuration errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit code for unsupported configurations.
pub const EXIT_UNSUPPORTED: i32 = 4;

/// Exit code for an error category.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. } | Error::Format(_) | Error::Io(_) => EXIT_CONFIG,
        Error::Unsupported(_) | Error::ExceptionalPoint(_) => EXIT_UNSUPPORTED,
        Error::Numerical(_)
        | Error::DegenerateState(_)
        | Error::InsufficientOscillation { .. }
        | Error::Matrix(_) => EXIT_NUMERICAL,
    }
}

/// Simulations and analytic evaluations of the dissipative Ising string observable.
#[derive(Debug, Parser, Serialize)]
#[command(name = "ctfim", version, about)]
pub struct Cli {
    /// Output directory (default: the value of CTFIM_OUT_DIR, else ".").
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Output file stem; defaults to the subcommand name.
    #[arg(long, global = true)]
    pub name: Option<String>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Analytic string expectation as a time series: columns (T, value).
    Observable(ObservableArgs),
    /// Channel-oracle trajectory, optionally against the analytic result.
    Oracle(OracleArgs),
    /// Rate and frequency sweeps: columns (g, L, value).
    Rates(RatesArgs),
    /// Finite-size scaling collapse: scaled data plus fitted exponents.
    Collapse(CollapseArgs),
    /// String correlators and bicorrelators with power-law fits.
    Correlators(CorrelatorArgs),
    /// Mean-field saddle tables with stability data.
    Meanfield(MeanfieldArgs),
    /// Single-qubit benchmark with fitted rate and frequency.
    Qubit0d(Qubit0dArgs),
}

/// `observable` options.
#[derive(Debug, Args, Serialize)]
pub struct ObservableArgs {
    /// Chain length.
    #[arg(long = "L")]
    pub l: usize,
    /// Field strength g = theta / p.
    #[arg(long)]
    pub g: f64,
    /// Dephasing rate.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Final time.
    #[arg(long)]
    pub t_max: f64,
    /// Sampling interval.
    #[arg(long, default_value_t = 0.01)]
    pub dt_sample: f64,
}

/// `oracle` options.
#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Chain length (at most 8).
    #[arg(long = "L")]
    pub l: usize,
    /// Field strength g = theta / p.
    #[arg(long)]
    pub g: f64,
    /// Dephasing rate.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Trotter step.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Final time.
    #[arg(long)]
    pub t_max: f64,
    /// Sampling interval (rounded to a whole number of Trotter steps).
    #[arg(long)]
    pub dt_sample: Option<f64>,
    /// Use the continuum generator instead of Trotter layers.
    #[arg(long)]
    pub continuum: bool,
    /// Add analytic and abs_diff columns.
    #[arg(long)]
    pub compare: bool,
}

/// Quantities of the `rates` sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateQuantity {
    /// Leading decay rate per site.
    Gamma,
    /// Subleading (pi/2-sector) decay rate, even L only.
    GammaPrime,
    /// Oscillation frequency.
    Omega,
    /// Odd-L phase offset.
    Phi,
    /// Second g-derivative of the decay rate.
    D2gamma,
}

/// `rates` options.
#[derive(Debug, Args, Serialize)]
pub struct RatesArgs {
    /// Chain lengths; `inf` selects the thermodynamic limit (gamma, d2gamma).
    #[arg(long = "L-list")]
    pub l_list: String,
    /// Field strengths (list or start:stop:step).
    #[arg(long)]
    pub g_range: String,
    /// Quantity to sweep.
    #[arg(long, value_enum)]
    pub quantity: RateQuantity,
    /// Dephasing rate.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
}

/// Collapse targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollapseQuantity {
    /// Odd-L oscillation frequency.
    Omega,
    /// Second g-derivative of the decay rate.
    D2gamma,
}

/// `collapse` options.
#[derive(Debug, Args, Serialize)]
pub struct CollapseArgs {
    /// Quantity to collapse.
    #[arg(long, value_enum)]
    pub quantity: CollapseQuantity,
    /// Chain lengths (at least three, same parity).
    #[arg(long = "L-list")]
    pub l_list: String,
    /// Field strengths (list or start:stop:step).
    #[arg(long)]
    pub g_range: String,
    /// Critical coupling.
    #[arg(long, default_value_t = 1.0)]
    pub critical: f64,
    /// Initial (or fixed) nu.
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Keep nu fixed.
    #[arg(long)]
    pub fix_nu: bool,
    /// Initial (or fixed) prefactor exponent a in y = L^a h(x).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub prefactor: f64,
    /// Keep the prefactor exponent fixed.
    #[arg(long)]
    pub fix_prefactor: bool,
}

/// `correlators` options.
#[derive(Debug, Args, Serialize)]
pub struct CorrelatorArgs {
    /// Field strengths (list or start:stop:step).
    #[arg(long)]
    pub g_range: String,
    /// Chain lengths.
    #[arg(long = "L-list")]
    pub l_list: String,
    /// Separation j - i (default L/2), with i = 0.
    #[arg(long)]
    pub separation: Option<usize>,
    /// Also estimate the magnetization (even L).
    #[arg(long)]
    pub magnetization: bool,
}

/// `meanfield` options.
#[derive(Debug, Args, Serialize)]
pub struct MeanfieldArgs {
    /// Field strengths (list or start:stop:step).
    #[arg(long)]
    pub g_range: String,
    /// Spatial dimensions.
    #[arg(long, default_value = "1")]
    pub d_list: String,
    /// Total time T.
    #[arg(long = "T")]
    pub t: f64,
}

/// `qubit0d` options.
#[derive(Debug, Args, Serialize)]
pub struct Qubit0dArgs {
    /// Field strength g = theta / p.
    #[arg(long)]
    pub g: f64,
    /// Dephasing rate.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Final time.
    #[arg(long, default_value_t = 30.0)]
    pub t_max: f64,
    /// Sampling interval.
    #[arg(long, default_value_t = 0.01)]
    pub dt_sample: f64,
}

/// Parse a list `a,b,c` or a range `start:stop:step` (stop exclusive).
pub fn parse_grid(flag: &'static str, text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::invalid(flag, "empty value"));
    }
    let number = |s: &str, what: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::invalid(flag, format!("cannot parse {what} `{s}` as a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::invalid(flag, format!("{what} `{s}` is not finite")))
        }
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(flag, format!("range `{text}` must have the form start:stop:step")));
        }
        let (start, stop, step) = (number(parts[0], "start")?, number(parts[1], "stop")?, number(parts[2], "step")?);
        if !(step > 0.0) {
            return Err(Error::invalid(flag, format!("step must be > 0 in `{text}`")));
        }
        // Points start + i step < stop, with a relative guard against rounding.
        let n = ((stop - start) / step - 1e-9).ceil();
        if n < 1.0 {
            return Err(Error::invalid(flag, format!("range `{text}` is empty")));
        }
        Ok((0..n as usize).map(|i| start + i as f64 * step).collect())
    } else {
        text.split(',')
            .enumerate()
            .map(|(i, s)| number(s, &format!("entry {}", i + 1)))
            .collect()
    }
}

/// Parse a list of positive integers, `start:stop:step` allowed.
pub fn parse_sizes(flag: &'static str, text: &str) -> Result<Vec<usize>> {
    parse_grid(flag, text)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::invalid(flag, format!("`{v}` is not a positive integer")))
            }
        })
        .collect()
}

fn parse_sizes_with_infinity(flag: &'static str, text: &str) -> Result<Vec<SystemSize>> {
    text.split(',')
        .map(|s| {
            if s.trim().eq_ignore_ascii_case("inf") {
                Ok(vec![SystemSize::Infinite])
            } else {
                Ok(parse_sizes(flag, s)?.into_iter().map(SystemSize::Finite).collect())
            }
        })
        .collect::<Result<Vec<Vec<_>>>>()
        .map(|v| v.concat())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// A CSV table plus sidecar data, produced by one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Column names.
    pub header: Vec<String>,
    /// Rows, already formatted.
    pub rows: Vec<Vec<String>>,
    /// Subcommand-specific results for the sidecar.
    pub results: Value,
    /// Sweep points that failed, with their error message.
    pub failures: Vec<Value>,
    /// Tolerances used.
    pub tolerances: Value,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            results: json!({}),
            failures: Vec::new(),
            tolerances: json!({}),
        }
    }
}

/// Paths of the files written by [`run`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    /// CSV table.
    pub csv: PathBuf,
    /// JSON sidecar.
    pub metadata: PathBuf,
}

fn positive(flag: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(flag, format!("must be > 0, got {v}")))
    }
}

fn sample_times(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    positive("--dt-sample", dt)?;
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::invalid("--t-max", format!("must be >= 0, got {t_max}")));
    }
    let n = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| i as f64 * dt).collect())
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::invalid("--jobs", "must be >= 1"));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn failure(point: Value, err: &Error) -> Value {
    json!({ "point": point, "error": err.to_string(), "exit_category": exit_code(err) })
}

fn observable(a: &ObservableArgs, jobs: Option<usize>) -> Result<Table> {
    let params = ModelParams::from_g(a.g, a.p, a.l)?;
    let times = sample_times(a.t_max, a.dt_sample)?;
    let values: Vec<Result<f64>> = with_pool(jobs, || {
        times.par_iter().map(|&t| Ok(string_expectation(&params.with_time(t)?)?.value)).collect()
    })?;
    let mut table = Table::new(&["T", "value"]);
    for (t, v) in times.iter().zip(values) {
        table.rows.push(vec![fmt_f64(*t), fmt_f64(v?)]);
    }
    Ok(table)
}

fn oracle(a: &OracleArgs) -> Result<Table> {
    let params = ModelParams::from_g(a.g, a.p, a.l)?.with_dt(a.dt)?;
    if !(a.t_max.is_finite() && a.t_max >= 0.0) {
        return Err(Error::invalid("--t-max", format!("must be >= 0, got {}", a.t_max)));
    }
    let stride = match a.dt_sample {
        Some(s) => (positive("--dt-sample", s)? / a.dt).round().max(1.0) as usize,
        None => 1,
    };
    let steps = (a.t_max / a.dt + 1e-9).floor() as usize;
    let mut header = vec!["T", "oracle"];
    if a.compare {
        header.extend(["analytic", "abs_diff"]);
    }
    let mut table = Table::new(&header);
    let initial = DoubledState::all_zero(a.l)?;
    let mut state = initial.clone();
    let mut max_diff: f64 = 0.0;
    for n in 0..=steps {
        if n > 0 && !a.continuum {
            state = step_channel(&state, &params)?;
        }
        if n % stride != 0 {
            continue;
        }
        let t = n as f64 * a.dt;
        if a.continuum {
            state = evolve_continuum(&initial, &params, t)?;
        }
        let value = string_observable(&state)?;
        let mut row = vec![fmt_f64(t), fmt_f64(value)];
        if a.compare {
            let analytic = string_expectation(&params.with_time(t)?)?.value;
            max_diff = max_diff.max((value - analytic).abs());
            row.extend([fmt_f64(analytic), fmt_f64((value - analytic).abs())]);
        }
        table.rows.push(row);
    }
    if a.compare {
        table.results = json!({ "max_abs_diff": max_diff });
    }
    table.tolerances = json!({ "continuum_expmv": "Taylor series to machine precision" });
    Ok(table)
}

fn rates(a: &RatesArgs, jobs: Option<usize>) -> Result<Table> {
    let gs = parse_grid("--g-range", &a.g_range)?;
    let sizes = parse_sizes_with_infinity("--L-list", &a.l_list)?;
    let p = positive("--p", a.p)?;
    let points: Vec<(f64, SystemSize)> = gs.iter().flat_map(|&g| sizes.iter().map(move |&s| (g, s))).collect();
    let quantity = a.quantity;
    let eval = move |g: f64, size: SystemSize| -> Result<f64> {
        match (quantity, size) {
            (RateQuantity::D2gamma, s) => gamma_curvature(g, p, s),
            (RateQuantity::Gamma, SystemSize::Infinite) => decay_rate_infinite(g, p),
            (_, SystemSize::Infinite) => {
                Err(Error::Unsupported(format!("{quantity:?} has no thermodynamic-limit evaluation")))
            }
            (q, SystemSize::Finite(l)) => {
                let c = late_time_character(&ModelParams::from_g(g, p, l)?)?;
                match q {
                    RateQuantity::Gamma => Ok(c.gamma),
                    RateQuantity::GammaPrime => c
                        .gamma_prime
                        .ok_or_else(|| Error::Unsupported(format!("gamma-prime needs even L, got {l}"))),
                    RateQuantity::Omega => Ok(c.omega),
                    RateQuantity::Phi => c.phi.ok_or_else(|| Error::Unsupported(format!("phi needs odd L, got {l}"))),
                    RateQuantity::D2gamma => unreachable!(),
                }
            }
        }
    };
    let values: Vec<Result<f64>> = with_pool(jobs, || points.par_iter().map(|&(g, s)| eval(g, s)).collect())?;
    let mut table = Table::new(&["g", "L", "value"]);
    for ((g, s), v) in points.iter().zip(values) {
        let l = match s {
            SystemSize::Finite(l) => l.to_string(),
            SystemSize::Infinite => "inf".to_string(),
        };
        match v {
            Ok(v) => table.rows.push(vec![fmt_f64(*g), l, fmt_f64(v)]),
            Err(e) => table.failures.push(failure(json!({ "g": g, "L": l }), &e)),
        }
    }
    Ok(table)
}

fn collapse_cmd(a: &CollapseArgs, jobs: Option<usize>) -> Result<Table> {
    let gs = parse_grid("--g-range", &a.g_range)?;
    let ls = parse_sizes("--L-list", &a.l_list)?;
    let quantity = match a.quantity {
        CollapseQuantity::Omega => ScalingQuantity::Omega,
        CollapseQuantity::D2gamma => ScalingQuantity::GammaCurvature,
    };
    let curves = with_pool(jobs, || scaling_dataset(quantity, &gs, &ls))??;
    let ansatz = Ansatz {
        critical: a.critical,
        nu: a.nu,
        fit_nu: !a.fix_nu,
        prefactor: a.prefactor,
        fit_prefactor: !a.fix_prefactor,
    };
    let fit = collapse(&curves, ansatz)?;
    let scaled = scale_curves(&curves, a.critical, 1.0 / fit.nu, fit.prefactor);
    let mut table = Table::new(&["L", "g", "value", "x", "y"]);
    for (c, pts) in curves.iter().zip(&scaled) {
        for ((g, y), (sx, sy)) in c.g.iter().zip(&c.y).zip(pts) {
            table.rows.push(vec![c.l.to_string(), fmt_f64(*g), fmt_f64(*y), fmt_f64(*sx), fmt_f64(*sy)]);
        }
    }
    table.results = json!({
        "nu": fit.nu,
        "prefactor": fit.prefactor,
        "cost": fit.cost,
        "master_curve": fit.master,
    });
    table.tolerances = json!({ "objective": COLLAPSE_OBJECTIVE });
    Ok(table)
}

fn correlators_cmd(a: &CorrelatorArgs, jobs: Option<usize>) -> Result<Table> {
    let gs = parse_grid("--g-range", &a.g_range)?;
    let ls = parse_sizes("--L-list", &a.l_list)?;
    let points: Vec<(f64, usize)> = gs.iter().flat_map(|&g| ls.iter().map(move |&l| (g, l))).collect();
    let sep = a.separation;
    let eval = |g: f64, l: usize| -> Result<(usize, num_complex::Complex64, num_complex::Complex64)> {
        let j = sep.unwrap_or(l / 2);
        if j >= l {
            return Err(Error::invalid("--separation", format!("must be < L = {l}, got {j}")));
        }
        Ok((j, spin_correlator(g, l, 0, j)?, bicorrelator(g, l, 0, j)?))
    };
    let values: Vec<_> = with_pool(jobs, || points.par_iter().map(|&(g, l)| eval(g, l)).collect::<Vec<_>>())?;
    let mut table = Table::new(&["g", "L", "i", "j", "C_re", "C_im", "B_re", "B_im"]);
    let mut fits = Vec::new();
    for &g in &gs {
        let (mut x, mut c, mut b) = (Vec::new(), Vec::new(), Vec::new());
        for ((pg, l), v) in points.iter().zip(&values) {
            if *pg != g {
                continue;
            }
            match v {
                Ok((j, cv, bv)) => {
                    table.rows.push(vec![
                        fmt_f64(g),
                        l.to_string(),
                        "0".into(),
                        j.to_string(),
                        fmt_f64(cv.re),
                        fmt_f64(cv.im),
                        fmt_f64(bv.re),
                        fmt_f64(bv.im),
                    ]);
                    x.push(*l as f64);
                    c.push(cv.re);
                    b.push(bv.re);
                }
                Err(e) => table.failures.push(failure(json!({ "g": g, "L": l }), e)),
            }
        }
        let fit_or_error = |y: &[f64]| match fit_power_law(&x, y) {
            Ok(f) => serde_json::to_value(f).unwrap_or(Value::Null),
            Err(e) => json!({ "error": e.to_string() }),
        };
        let mut entry = json!({ "g": g, "spin_power_law": fit_or_error(&c), "bicorrelator_power_law": fit_or_error(&b) });
        if a.magnetization {
            let m: Vec<Value> = ls
                .iter()
                .map(|&l| match magnetization_estimate(g, l) {
                    Ok(m) => json!({ "L": l, "estimate": m }),
                    Err(e) => json!({ "L": l, "error": e.to_string() }),
                })
                .collect();
            entry["magnetization"] = Value::Array(m);
        }
        fits.push(entry);
    }
    table.results = json!({ "fits": fits });
    table.tolerances = json!({ "pfaffian_antisymmetry": crate::correlators::ANTISYMMETRY_TOLERANCE });
    Ok(table)
}

fn meanfield_cmd(a: &MeanfieldArgs, jobs: Option<usize>) -> Result<Table> {
    let gs = parse_grid("--g-range", &a.g_range)?;
    let ds = parse_sizes("--d-list", &a.d_list)?;
    positive("--T", a.t)?;
    let points: Vec<(f64, usize)> = gs.iter().flat_map(|&g| ds.iter().map(move |&d| (g, d))).collect();
    let t = a.t;
    let values: Vec<_> = with_pool(jobs, || {
        points
            .par_iter()
            .map(|&(g, d)| Ok((solve_saddles(g, d, t)?, dominant_saddle(g, d, t)?)))
            .collect::<Vec<Result<_>>>()
    })?;
    let mut table = Table::new(&[
        "g",
        "d",
        "T",
        "class",
        "branch",
        "phi0",
        "action_re",
        "action_im",
        "q_massive",
        "instability_frequency",
        "gap",
        "dominant",
    ]);
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for ((g, d), v) in points.iter().zip(values) {
        match v {
            Ok((saddles, dom)) => {
                for s in saddles {
                    let class = match s.class {
                        SaddleClass::A => "A",
                        SaddleClass::B => "B",
                        SaddleClass::C => "C",
                    };
                    let dominant = s == dom.saddle || dom.ties.contains(&s);
                    table.rows.push(vec![
                        fmt_f64(*g),
                        d.to_string(),
                        fmt_f64(t),
                        class.into(),
                        s.branch.map(|b| b.to_string()).unwrap_or_default(),
                        fmt_f64(s.phi0),
                        fmt_f64(s.action_per_site.re),
                        fmt_f64(s.action_per_site.im),
                        s.stability.q_massive.to_string(),
                        opt(s.stability.instability_frequency),
                        opt(s.stability.gap),
                        dominant.to_string(),
                    ]);
                }
            }
            Err(e) => table.failures.push(failure(json!({ "g": g, "d": d }), &e)),
        }
    }
    table.tolerances = json!({ "root": ROOT_TOLERANCE });
    Ok(table)
}

fn qubit0d_cmd(a: &Qubit0dArgs) -> Result<Table> {
    let params = ModelParams::from_g(a.g, a.p, 2)?;
    let series =
        TimeSeries::sample(0.0, a.t_max, positive("--dt-sample", a.dt_sample)?, Source::Analytic, |t| {
            qubit0d_observable(&params, t)
        })?;
    let mut table = Table::new(&["T", "value"]);
    for (t, v) in series.times().iter().zip(series.values()) {
        table.rows.push(vec![fmt_f64(*t), fmt_f64(*v)]);
    }
    let (gamma, omega) = qubit0d_rates(a.g, a.p)?;
    let t_min = 0.5 * a.t_max;
    let fitted_gamma = if omega == 0.0 {
        extract_decay_rate(&series, t_min, a.t_max - t_min).map(|d| d.rate).ok()
    } else {
        None
    };
    let fitted_omega = if omega > 0.0 { extract_frequency(&series).ok() } else { None };
    table.results = json!({
        "gamma": gamma,
        "omega": omega,
        "fitted_gamma": fitted_gamma,
        "fitted_omega": fitted_omega,
    });
    Ok(table)
}

/// Run one parsed command line and return its table (no files written).
pub fn evaluate(cli: &Cli) -> Result<Table> {
    match &cli.command {
        Command::Observable(a) => observable(a, cli.jobs),
        Command::Oracle(a) => oracle(a),
        Command::Rates(a) => rates(a, cli.jobs),
        Command::Collapse(a) => collapse_cmd(a, cli.jobs),
        Command::Correlators(a) => correlators_cmd(a, cli.jobs),
        Command::Meanfield(a) => meanfield_cmd(a, cli.jobs),
        Command::Qubit0d(a) => qubit0d_cmd(a),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Observable(_) => "observable",
        Command::Oracle(_) => "oracle",
        Command::Rates(_) => "rates",
        Command::Collapse(_) => "collapse",
        Command::Correlators(_) => "correlators",
        Command::Meanfield(_) => "meanfield",
        Command::Qubit0d(_) => "qubit0d",
    }
}

fn output_dir(cli: &Cli) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_table(table: &Table, cli: &Cli, dir: &Path) -> Result<Written> {
    std::fs::create_dir_all(dir)?;
    let stem = cli.name.clone().unwrap_or_else(|| command_name(&cli.command).to_string());
    let csv_path = dir.join(format!("{stem}.csv"));
    let meta_path = dir.join(format!("{stem}.json"));
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&csv_path)?));
    let fmt_err = |e: csv::Error| Error::Format(format!("writing {}: {e}", csv_path.display()));
    w.write_record(&table.header).map_err(fmt_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(fmt_err)?;
    }
    w.flush()?;
    let meta = json!({
        "command": command_name(&cli.command),
        "config": cli,
        "version": env!("CARGO_PKG_VERSION"),
        "rows": table.rows.len(),
        "columns": table.header,
        "tolerances": table.tolerances,
        "results": table.results,
        "failures": table.failures,
    });
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(&meta_path, text + "\n")?;
    Ok(Written { csv: csv_path, metadata: meta_path })
}

/// Evaluate a command line and write its CSV and JSON sidecar.
pub fn run(cli: &Cli) -> Result<Written> {
    let table = evaluate(cli)?;
    write_table(&table, cli, &output_dir(cli))
}

/// Parse `args`, run, report, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(w) => {
            println!("wrote {} and {}", w.csv.display(), w.metadata.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
