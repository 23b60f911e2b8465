//! Extraction tools: zero-crossing frequencies, windowed decay rates, finite
//! differences and the finite-size scaling collapse.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::correlators::linear_fit;
use crate::error::{Error, Result};

/// Where a time series came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    /// Closed-form free-fermion evaluation.
    Analytic,
    /// Brute-force channel simulation.
    Oracle,
}

/// A sampled observable `v(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    source: Source,
}

impl TimeSeries {
    /// Validate and wrap samples; times must be strictly increasing.
    pub fn new(times: Vec<f64>, values: Vec<f64>, source: Source) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(
                "series",
                format!("{} times but {} values", times.len(), values.len()),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("series", "times must be strictly increasing"));
        }
        if values.iter().chain(&times).any(|v| !v.is_finite()) {
            return Err(Error::invalid("series", "non-finite sample"));
        }
        Ok(Self { times, values, source })
    }

    /// Sample `f` at `t_0, t_0 + dt, ...` while `t <= t_max`.
    pub fn sample<F: FnMut(f64) -> f64>(t0: f64, t_max: f64, dt: f64, source: Source, mut f: F) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        let n = ((t_max - t0) / dt + 1e-9).floor() as usize + 1;
        let times: Vec<f64> = (0..n).map(|i| t0 + i as f64 * dt).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values, source)
    }

    /// Sample times.
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    /// Sample values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    /// Provenance tag.
    pub fn source(&self) -> Source {
        self.source
    }
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.times.len()
    }
    /// Whether the series is empty.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Largest `omega * dt` for which linear zero interpolation is trusted.
pub const MAX_PHASE_STEP: f64 = 0.3;

/// Linearly interpolated sign changes of the series.
pub fn zero_crossings(series: &TimeSeries) -> Vec<f64> {
    let (t, v) = (&series.times, &series.values);
    let mut out = Vec::new();
    for i in 0..t.len().saturating_sub(1) {
        let (a, b) = (v[i], v[i + 1]);
        if a == 0.0 {
            if i == 0 || v[i - 1] * b < 0.0 {
                out.push(t[i]);
            }
        } else if a * b < 0.0 {
            out.push(t[i] + (t[i + 1] - t[i]) * a / (a - b));
        }
    }
    out
}

/// `omega = pi / (mean spacing of zero crossings)`.
///
/// Needs at least three crossings; otherwise the series is most likely
/// overdamped. The sampling must resolve the oscillation
/// (`omega * dt < 0.3`).
pub fn extract_frequency(series: &TimeSeries) -> Result<f64> {
    let z = zero_crossings(series);
    if z.len() < 3 {
        return Err(Error::InsufficientOscillation { found: z.len(), needed: 3 });
    }
    let spacing = (z[z.len() - 1] - z[0]) / (z.len() - 1) as f64;
    let omega = std::f64::consts::PI / spacing;
    let dt = series.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if omega * dt >= MAX_PHASE_STEP {
        return Err(Error::invalid(
            "series",
            format!("sampling too coarse: omega * dt = {} >= {MAX_PHASE_STEP}", omega * dt),
        ));
    }
    Ok(omega)
}

/// Decay rate from a log-linear fit, with a flag for sign changes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    /// `-d ln|v| / dt` over the window.
    pub rate: f64,
    /// The window contained sign changes (an undivided oscillation), so the
    /// rate is only a rough envelope estimate.
    pub sign_change_warning: bool,
}

/// Least-squares slope of `ln|v|` on `[t_min, t_min + w]`, negated.
pub fn extract_decay_rate(series: &TimeSeries, t_min: f64, w: f64) -> Result<DecayEstimate> {
    let t_max = t_min + w;
    let last = *series.times.last().unwrap_or(&f64::NEG_INFINITY);
    let first = *series.times.first().unwrap_or(&f64::INFINITY);
    if first > t_min + 1e-12 || last < t_max - 1e-12 {
        return Err(Error::invalid(
            "window",
            format!("[{t_min}, {t_max}] not covered by series [{first}, {last}]"),
        ));
    }
    let (mut x, mut y, mut raw) = (Vec::new(), Vec::new(), Vec::new());
    for (&t, &v) in series.times.iter().zip(&series.values) {
        if t >= t_min - 1e-12 && t <= t_max + 1e-12 {
            if v == 0.0 {
                return Err(Error::invalid("series", format!("exact zero at t = {t} inside the window")));
            }
            x.push(t);
            y.push(v.abs().ln());
            raw.push(v);
        }
    }
    if x.len() < 2 {
        return Err(Error::invalid("window", "fewer than two samples inside the window"));
    }
    let (slope, _, _) = linear_fit(&x, &y);
    let sign_change_warning = raw.windows(2).any(|p| p[0] * p[1] < 0.0);
    Ok(DecayEstimate { rate: -slope, sign_change_warning })
}

/// Central finite difference of order 1 or 2 with one Richardson step:
/// `D = (4 D(h/2) - D(h)) / 3`.
pub fn finite_difference<F: Fn(f64) -> f64>(f: F, x0: f64, order: u8, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", format!("must be > 0, got {h}")));
    }
    let stencil = |h: f64| match order {
        1 => Ok((f(x0 + h) - f(x0 - h)) / (2.0 * h)),
        2 => Ok((f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h)),
        _ => Err(Error::invalid("order", format!("must be 1 or 2, got {order}"))),
    };
    let coarse = stencil(h)?;
    let fine = stencil(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// One finite-size curve `y(g)` at chain length `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    /// Chain length.
    pub l: usize,
    /// Control parameter values.
    pub g: Vec<f64>,
    /// Observable values.
    pub y: Vec<f64>,
}

/// Scaling ansatz `y = L^a h((g - g_c) L^{1/nu})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    /// Critical point `g_c`.
    pub critical: f64,
    /// Starting (or fixed) `nu`.
    pub nu: f64,
    /// Whether `nu` is optimized.
    pub fit_nu: bool,
    /// Starting (or fixed) prefactor exponent `a`.
    pub prefactor: f64,
    /// Whether `a` is optimized.
    pub fit_prefactor: bool,
}

/// Search box for `nu`.
pub const NU_RANGE: (f64, f64) = (0.5, 2.0);
/// Search box for the prefactor exponent.
pub const PREFACTOR_RANGE: (f64, f64) = (-2.0, 2.0);
/// Knots of the monotone master curve.
pub const MASTER_KNOTS: usize = 20;
/// Minimum number of points in the overlap window for a usable cost.
const MIN_OVERLAP_POINTS: usize = 2 * MASTER_KNOTS;

/// Outcome of a collapse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    /// Fitted (or fixed) `nu`.
    pub nu: f64,
    /// Fitted (or fixed) prefactor exponent `a` in `y = L^a h(x)`.
    pub prefactor: f64,
    /// Objective at the returned exponents.
    pub cost: f64,
    /// Master curve samples `(x, h)` at the knots.
    pub master: Vec<(f64, f64)>,
    /// Description of the objective, recorded in output metadata.
    pub objective: String,
}

/// Human-readable description of [`collapse_cost`].
pub const COLLAPSE_OBJECTIVE: &str = "mean squared residual from a monotone PCHIP master curve (20 knots, \
     isotonic knot values from a hat-basis least-squares fit) over the overlap of the scaled curves, \
     divided by the variance of the scaled data there";

fn check_curves(curves: &[Curve]) -> Result<()> {
    let mut ls: Vec<usize> = curves.iter().map(|c| c.l).collect();
    ls.sort_unstable();
    ls.dedup();
    if ls.len() < 3 {
        return Err(Error::invalid("curves", format!("need at least 3 distinct L, got {}", ls.len())));
    }
    if ls.iter().any(|l| l % 2 != ls[0] % 2) {
        return Err(Error::invalid("curves", "mixed L parities have distinct scaling functions"));
    }
    for c in curves {
        if c.g.len() != c.y.len() || c.g.is_empty() {
            return Err(Error::invalid("curves", format!("curve L = {} is empty or ragged", c.l)));
        }
    }
    Ok(())
}

/// Scaled points `(x, y L^{-a})` with `x = (g - g_c) L^{inv_nu}`.
pub fn scale_curves(curves: &[Curve], critical: f64, inv_nu: f64, prefactor: f64) -> Vec<Vec<(f64, f64)>> {
    curves
        .iter()
        .map(|c| {
            let lf = c.l as f64;
            let sx = lf.powf(inv_nu);
            let sy = lf.powf(-prefactor);
            c.g.iter().zip(&c.y).map(|(g, y)| ((g - critical) * sx, y * sy)).collect()
        })
        .collect()
}

/// Pool-adjacent-violators: the closest non-decreasing sequence.
fn isotonic(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new(); // (mean, weight, count)
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            if blocks[n - 2].0 <= blocks[n - 1].0 {
                break;
            }
            let (m2, w2, c2) = blocks.pop().expect("two blocks");
            let (m1, w1, c1) = blocks.pop().expect("two blocks");
            let w = w1 + w2;
            blocks.push(((m1 * w1 + m2 * w2) / w, w, c1 + c2));
        }
    }
    blocks.into_iter().flat_map(|(m, _, c)| std::iter::repeat_n(m, c)).collect()
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Clone, Debug)]
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
            let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if s * d0 <= 0.0 {
                0.0
            } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                s
            }
        };
        if n > 2 {
            d[0] = end(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        } else {
            d[0] = delta[0];
            d[1] = delta[0];
        }
        Self { x, y, d }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

/// Least-squares knot values in the hat (piecewise-linear) basis, then made
/// monotone in the direction `sign` (+1 increasing, -1 decreasing).
fn master_knots(points: &[(f64, f64)], knots: &[f64], sign: f64) -> Vec<f64> {
    let n = knots.len();
    let mut ata = DMatrix::<f64>::zeros(n, n);
    let mut aty = DVector::<f64>::zeros(n);
    let h = knots[1] - knots[0];
    for &(x, y) in points {
        let s = ((x - knots[0]) / h).clamp(0.0, (n - 1) as f64 - 1e-12);
        let i = s.floor() as usize;
        let f = s - i as f64;
        let basis = [(i, 1.0 - f), (i + 1, f)];
        for &(a, wa) in &basis {
            aty[a] += wa * y;
            for &(b, wb) in &basis {
                ata[(a, b)] += wa * wb;
            }
        }
    }
    // A light smoothness penalty keeps empty knots well defined.
    let ridge = 1e-8 * (ata.trace() / n as f64).max(1e-300);
    for i in 0..n {
        ata[(i, i)] += ridge;
        if i + 1 < n {
            ata[(i, i)] += ridge;
            ata[(i + 1, i + 1)] += ridge;
            ata[(i, i + 1)] -= ridge;
            ata[(i + 1, i)] -= ridge;
        }
    }
    let raw = ata.lu().solve(&aty).map(|v| v.iter().copied().collect::<Vec<f64>>()).unwrap_or_else(|| vec![0.0; n]);
    let weights = vec![1.0; n];
    let signed: Vec<f64> = raw.iter().map(|v| sign * v).collect();
    isotonic(&signed, &weights).into_iter().map(|v| sign * v).collect()
}

/// Collapse objective at given exponents (`inv_nu = 1/nu`; `inv_nu = 0`
/// evaluates the unscaled data). Returns the cost and master-curve samples.
pub fn collapse_cost(curves: &[Curve], critical: f64, inv_nu: f64, prefactor: f64) -> Result<(f64, Vec<(f64, f64)>)> {
    check_curves(curves)?;
    let scaled = scale_curves(curves, critical, inv_nu, prefactor);
    let lo = scaled.iter().map(|c| c.iter().map(|p| p.0).fold(f64::INFINITY, f64::min)).fold(f64::NEG_INFINITY, f64::max);
    let hi = scaled.iter().map(|c| c.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)).fold(f64::INFINITY, f64::min);
    let points: Vec<(f64, f64)> = scaled.iter().flatten().copied().filter(|p| p.0 >= lo && p.0 <= hi).collect();
    if !(hi > lo) || points.len() < MIN_OVERLAP_POINTS {
        return Ok((f64::INFINITY, Vec::new()));
    }
    let knots: Vec<f64> = (0..MASTER_KNOTS).map(|i| lo + (hi - lo) * i as f64 / (MASTER_KNOTS - 1) as f64).collect();
    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let var = points.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / points.len() as f64;
    if !(var > 0.0) {
        return Ok((0.0, knots.iter().map(|&x| (x, mean)).collect()));
    }
    let mut best = (f64::INFINITY, Vec::new());
    for sign in [1.0, -1.0] {
        let values = master_knots(&points, &knots, sign);
        let spline = Pchip::new(knots.clone(), values.clone());
        let msr = points.iter().map(|&(x, y)| (y - spline.eval(x)).powi(2)).sum::<f64>() / points.len() as f64;
        let cost = msr / var;
        if cost < best.0 {
            best = (cost, knots.iter().copied().zip(values).collect());
        }
    }
    Ok(best)
}

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Fit the ansatz: a coarse grid scan over the free exponents followed by
/// coordinate descent (golden-section line searches) inside the box
/// `nu in [0.5, 2]`, `a in [-2, 2]`.
pub fn collapse(curves: &[Curve], ansatz: Ansatz) -> Result<CollapseResult> {
    check_curves(curves)?;
    let cost = |nu: f64, a: f64| collapse_cost(curves, ansatz.critical, 1.0 / nu, a).map(|c| c.0).unwrap_or(f64::INFINITY);
    let nu_grid: Vec<f64> = if ansatz.fit_nu {
        (0..=30).map(|i| NU_RANGE.0 + (NU_RANGE.1 - NU_RANGE.0) * i as f64 / 30.0).collect()
    } else {
        vec![ansatz.nu]
    };
    let a_grid: Vec<f64> = if ansatz.fit_prefactor {
        (0..=40).map(|i| PREFACTOR_RANGE.0 + (PREFACTOR_RANGE.1 - PREFACTOR_RANGE.0) * i as f64 / 40.0).collect()
    } else {
        vec![ansatz.prefactor]
    };
    let (mut nu, mut a, mut best) = (ansatz.nu, ansatz.prefactor, cost(ansatz.nu, ansatz.prefactor));
    for &n in &nu_grid {
        for &p in &a_grid {
            let c = cost(n, p);
            if c < best {
                (nu, a, best) = (n, p, c);
            }
        }
    }
    let nu_step = (NU_RANGE.1 - NU_RANGE.0) / 30.0;
    let a_step = (PREFACTOR_RANGE.1 - PREFACTOR_RANGE.0) / 40.0;
    let (mut nu_width, mut a_width) = (nu_step, a_step);
    for _ in 0..40 {
        let (old_nu, old_a) = (nu, a);
        if ansatz.fit_nu {
            let lo = (nu - nu_width).max(NU_RANGE.0);
            let hi = (nu + nu_width).min(NU_RANGE.1);
            let cand = golden(|n| cost(n, a), lo, hi, 60);
            if cost(cand, a) <= cost(nu, a) {
                nu = cand;
            }
        }
        if ansatz.fit_prefactor {
            let lo = (a - a_width).max(PREFACTOR_RANGE.0);
            let hi = (a + a_width).min(PREFACTOR_RANGE.1);
            let cand = golden(|p| cost(nu, p), lo, hi, 60);
            if cost(nu, cand) <= cost(nu, a) {
                a = cand;
            }
        }
        nu_width = (2.0 * (nu - old_nu).abs()).max(nu_step * 0.05);
        a_width = (2.0 * (a - old_a).abs()).max(a_step * 0.05);
        if (nu - old_nu).abs() < 1e-10 && (a - old_a).abs() < 1e-10 {
            break;
        }
    }
    let (cost, master) = collapse_cost(curves, ansatz.critical, 1.0 / nu, a)?;
    if !cost.is_finite() {
        return Err(Error::Numerical("scaled curves do not overlap anywhere in the search box".into()));
    }
    Ok(CollapseResult { nu, prefactor: a, cost, master, objective: COLLAPSE_OBJECTIVE.to_string() })
}
