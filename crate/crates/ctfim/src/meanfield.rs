//! Time-independent saddle points of the higher-dimensional path integral.
//!
//! With `d` spatial dimensions and a uniform field `phi_0`, the
//! self-consistency condition takes one of three forms:
//!
//! * class A (`phi_0 > g`): `sqrt(phi^2 - g^2) / 2d = tanh(T sqrt(phi^2 - g^2))`,
//!   with a unique root tending to `sqrt(g^2 + 4 d^2)` as `T -> infinity`;
//! * class B (`phi_0 = 0`): always a solution;
//! * class C (`0 < phi_0 < g`): `sqrt(g^2 - phi^2) / 2d = tan(T sqrt(g^2 - phi^2))`,
//!   with one root per branch of the tangent, so the count grows like `gT/pi`.
//!
//! Their actions are
//!
//! ```text
//! S_A = T N d [(g/2d)^2 - 1]
//! S_B = -N log(2 cos gT)                               (principal log)
//! S_C = N T phi^2 / 4d - N log(4d / sqrt(4d^2 + g^2 - phi^2))
//! ```
//!
//! Class A dominates at late times while `g < 2d`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bisection tolerance on the saddle field.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// The three saddle families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SaddleClass {
    /// `phi_0 > g`: massive, dominant for `g < 2d`.
    A,
    /// `phi_0 = 0`.
    B,
    /// `0 < phi_0 < g`.
    C,
}

/// Gaussian-fluctuation summary of a saddle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    /// Spatial (`q != 0`) fluctuations are massive.
    pub q_massive: bool,
    /// Frequency of the unstable time-like modulation, if any.
    pub instability_frequency: Option<f64>,
    /// Fluctuation gap, if the saddle is stable.
    pub gap: Option<f64>,
}

/// A saddle point and its data (action per site, i.e. `N = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleSolution {
    /// Saddle family.
    pub class: SaddleClass,
    /// Uniform field `phi_0 >= 0`.
    pub phi0: f64,
    /// Tangent branch index for class C roots (`T s in (n pi, n pi + pi/2)`).
    pub branch: Option<usize>,
    /// `S / N` (complex for class B when `cos gT < 0`).
    pub action_per_site: Complex64,
    /// Stability report.
    pub stability: Stability,
}

fn validate(g: f64, d: usize, t: f64) -> Result<()> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::invalid("g", format!("must be >= 0, got {g}")));
    }
    if d == 0 {
        return Err(Error::invalid("d", "must be >= 1"));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid("T", format!("must be > 0, got {t}")));
    }
    Ok(())
}

/// Bisection for a sign change of `f` on `[a, b]` to [`ROOT_TOLERANCE`].
fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    while b - a > ROOT_TOLERANCE * b.abs().max(1.0) * 0.5 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Class A root `phi_0`, if it exists (`T > 1/2d`).
fn class_a_root(g: f64, d: usize, t: f64) -> Option<f64> {
    let two_d = 2.0 * d as f64;
    if t <= 1.0 / two_d {
        return None;
    }
    // h(s) = tanh(Ts) - s/2d is positive just above 0 and <= 0 at s = 2d.
    let h = |s: f64| (t * s).tanh() - s / two_d;
    let s = if h(two_d) >= 0.0 {
        two_d
    } else {
        bisect(h, 1e-300f64.max(1e-9 / t), two_d)
    };
    Some((g * g + s * s).sqrt())
}

/// Class C roots `(phi_0, branch)`, one per tangent branch that fits in `(0, g)`.
fn class_c_roots(g: f64, d: usize, t: f64) -> Vec<(f64, usize)> {
    let two_d = 2.0 * d as f64;
    let h = |s: f64| (t * s).tan() - s / two_d;
    let mut roots = Vec::new();
    let mut n = 0usize;
    loop {
        let lo = n as f64 * PI / t;
        if lo >= g {
            break;
        }
        let pole = (n as f64 * PI + FRAC_PI_2) / t;
        let hi = pole.min(g);
        // Just inside the branch: tan(Ts) rises from 0 (or from the slope at s = 0).
        let lo_eval = if n == 0 { (1e-9 / t).min(0.5 * hi) } else { lo + 1e-12 * (pole - lo) };
        let hi_eval = if hi == pole { pole - 1e-12 * (pole - lo) } else { hi };
        let (f_lo, f_hi) = (h(lo_eval), h(hi_eval));
        if f_lo < 0.0 && f_hi > 0.0 {
            let s = bisect(h, lo_eval, hi_eval);
            let phi = (g * g - s * s).max(0.0).sqrt();
            if phi > 0.0 && phi < g {
                roots.push((phi, n));
            }
        }
        n += 1;
    }
    roots
}

/// Gaussian-fluctuation report for a saddle.
pub fn stability_report(class: SaddleClass, phi0: f64, g: f64, d: usize) -> Stability {
    match class {
        SaddleClass::A => Stability {
            q_massive: true,
            instability_frequency: None,
            gap: Some((1.0 + g * g) / (4.0 * d as f64)),
        },
        SaddleClass::B => Stability { q_massive: true, instability_frequency: Some(g / PI), gap: None },
        SaddleClass::C => Stability {
            q_massive: true,
            instability_frequency: Some((g * g - phi0 * phi0).max(0.0).sqrt() / PI),
            gap: None,
        },
    }
}

/// Saddle action `S` for `N` sites.
pub fn saddle_action(class: SaddleClass, phi0: f64, g: f64, d: usize, t: f64, n: f64) -> Result<Complex64> {
    let df = d as f64;
    match class {
        SaddleClass::A => Ok(Complex64::new(t * n * df * ((g / (2.0 * df)).powi(2) - 1.0), 0.0)),
        SaddleClass::B => {
            let c = (g * t).cos();
            if c.abs() < 1e-12 {
                return Err(Error::Numerical(format!("class B action has a pole: cos(gT) = {c:e}")));
            }
            Ok(-n * Complex64::new(2.0 * c, 0.0).ln())
        }
        SaddleClass::C => {
            let inside = 4.0 * df * df + g * g - phi0 * phi0;
            let log_term = (4.0 * df / inside.sqrt()).ln();
            Ok(Complex64::new(n * t * phi0 * phi0 / (4.0 * df) - n * log_term, 0.0))
        }
    }
}

fn solution(class: SaddleClass, phi0: f64, branch: Option<usize>, g: f64, d: usize, t: f64) -> Result<SaddleSolution> {
    Ok(SaddleSolution {
        class,
        phi0,
        branch,
        action_per_site: saddle_action(class, phi0, g, d, t, 1.0)?,
        stability: stability_report(class, phi0, g, d),
    })
}

/// All time-independent saddles: class A (when it exists), class B, and
/// every class C root. A class B saddle sitting on a pole of its action is
/// omitted.
pub fn solve_saddles(g: f64, d: usize, t: f64) -> Result<Vec<SaddleSolution>> {
    validate(g, d, t)?;
    let mut out = Vec::new();
    if let Some(phi) = class_a_root(g, d, t) {
        out.push(solution(SaddleClass::A, phi, None, g, d, t)?);
    }
    if let Ok(b) = solution(SaddleClass::B, 0.0, None, g, d, t) {
        out.push(b);
    }
    for (phi, n) in class_c_roots(g, d, t) {
        out.push(solution(SaddleClass::C, phi, Some(n), g, d, t)?);
    }
    Ok(out)
}

/// The saddle of smallest `Re S` and any others tied with it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dominant {
    /// Minimizer of `Re S` (first in enumeration order among ties).
    pub saddle: SaddleSolution,
    /// Other saddles whose `Re S` equals the minimum within `1e-9` (relative).
    pub ties: Vec<SaddleSolution>,
}

/// Dominant saddle at time `T`; ties are reported, not broken silently.
pub fn dominant_saddle(g: f64, d: usize, t: f64) -> Result<Dominant> {
    let all = solve_saddles(g, d, t)?;
    let best = all
        .iter()
        .min_by(|a, b| a.action_per_site.re.total_cmp(&b.action_per_site.re))
        .copied()
        .ok_or_else(|| Error::Numerical("no saddle found".into()))?;
    let tol = 1e-9 * best.action_per_site.re.abs().max(1.0);
    let ties = all
        .iter()
        .filter(|s| **s != best && (s.action_per_site.re - best.action_per_site.re).abs() <= tol)
        .copied()
        .collect();
    Ok(Dominant { saddle: best, ties })
}

/// Smallest `g` on the grid `g_min, g_min + step, ...` (up to `g_max`) at
/// which class A stops being dominant.
pub fn crossover_coupling(d: usize, t: f64, g_min: f64, g_max: f64, step: f64) -> Result<Option<f64>> {
    if !(step > 0.0) {
        return Err(Error::invalid("step", format!("must be > 0, got {step}")));
    }
    let n = ((g_max - g_min) / step).floor() as usize;
    for i in 0..=n {
        let g = g_min + i as f64 * step;
        if dominant_saddle(g, d, t)?.saddle.class != SaddleClass::A {
            return Ok(Some(g));
        }
    }
    Ok(None)
}
