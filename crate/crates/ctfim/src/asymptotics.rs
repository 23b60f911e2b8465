//! Late-time decay rates and frequencies of the string observable, their
//! thermodynamic limits and the singular curvature of the rate at `g = 1`.
//!
//! At late times every mode factor is dominated by its growing branch,
//! `f(k) ~ c_k exp(pT (eps_k - 2))`, so the observable decays with the
//! rate
//!
//! ```text
//! Gamma = (p / L) sum_{0<k<pi} (2 - Re eps_k)          (per site)
//! ```
//!
//! and, for odd `L`, oscillates with the frequency set by the imaginary
//! part of the vacuum energy,
//!
//! ```text
//! omega_odd = theta |1 + (1/g) sum_{k in APBC} Im eps_k|.
//! ```
//!
//! For even `L` the oscillation comes from the `k = pi/2` mode alone,
//! `omega_even = 2 theta sqrt(1 - 1/g^2)` for `g > 1`.
//!
//! The second derivative of the rate simplifies to
//! `d^2 Gamma / dg^2 = (p/L) sum_k Re[2 sin^2 k / u_k^{3/2}]` with
//! `u_k = 1 - g^2 - 2 i g cos k`; for `L -> infinity` the sum becomes
//! `(p / 2 pi) int_0^pi`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{finite_difference, Curve};
use crate::error::{Error, Result};
use crate::model::{build_grid, principal_sqrt, MomentumGrid, ModelParams, Sector};
use crate::spectrum::{eps_half_pi, eps_plus, EXCEPTIONAL_TOLERANCE};

/// Chain length for rate formulas: a finite `L` or the thermodynamic limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemSize {
    /// Finite chain.
    Finite(usize),
    /// `L -> infinity` (momentum integrals).
    Infinite,
}

/// Late-time description `v(T) ~ e^{-Gamma L T} cos(omega T + phi)` (odd `L`)
/// or `~ e^{-Gamma L T} + sgn e^{-Gamma' L T} cos(omega T)` (even `L`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LateTimeCharacter {
    /// Leading decay rate per site.
    pub gamma: f64,
    /// Subleading rate per site of the sector containing `pi/2` (even `L`).
    pub gamma_prime: Option<f64>,
    /// Oscillation frequency (non-negative).
    pub omega: f64,
    /// Time-independent phase offset (odd `L`).
    pub phi: Option<f64>,
}

fn mode_eps(g: f64, grid: &MomentumGrid) -> impl Iterator<Item = (f64, Complex64)> + '_ {
    grid.momenta().iter().map(move |m| {
        if m.is_half_pi() {
            (0.0, eps_half_pi(g))
        } else {
            (m.radians().cos(), eps_plus(g, m.radians()))
        }
    })
}

/// `Gamma = (p/L) sum_{k in grid} (2 - Re eps_k)`.
pub fn decay_rate(g: f64, p: f64, l: usize, sector: Sector) -> Result<f64> {
    let grid = build_grid(l, sector)?;
    Ok(p / l as f64 * mode_eps(g, &grid).map(|(_, e)| 2.0 - e.re).sum::<f64>())
}

/// `Gamma` for `L -> infinity`: `(p / 2 pi) int_0^pi (2 - Re eps_k) dk`.
pub fn decay_rate_infinite(g: f64, p: f64) -> Result<f64> {
    let f = |k: f64| 2.0 - eps_plus(g, k).re;
    let integral = integrate(&f, 0.0, FRAC_PI_2, 1e-13)? + integrate(&f, FRAC_PI_2, PI, 1e-13)?;
    Ok(p / (2.0 * PI) * integral)
}

/// Odd-`L` oscillation frequency `theta |1 + (1/g) sum_{APBC} Im eps_k|`.
///
/// At `g = 0` the ratio `Im eps_k / g` is replaced by its limit `-2 cos k`.
pub fn frequency_odd(g: f64, theta: f64, l: usize) -> Result<f64> {
    if l.is_multiple_of(2) {
        return Err(Error::invalid("L", format!("odd-L frequency needs odd L, got {l}")));
    }
    let grid = build_grid(l, Sector::Apbc)?;
    let sum: f64 = if g == 0.0 {
        grid.radians().map(|k| -2.0 * k.cos()).sum()
    } else {
        mode_eps(g, &grid).map(|(_, e)| e.im).sum::<f64>() / g
    };
    Ok((theta * (1.0 + sum)).abs())
}

/// Even-`L` frequency: `2 theta sqrt(1 - 1/g^2)` for `g > 1`, else 0.
pub fn frequency_even(g: f64, theta: f64) -> f64 {
    if g > 1.0 {
        2.0 * theta * (1.0 - 1.0 / (g * g)).sqrt()
    } else {
        0.0
    }
}

/// Odd-`L` late-time phase `phi = arg prod_{APBC} (1 + (2 - 2ig cos k)/eps_k) / 2`,
/// with the frequency sign convention of [`frequency_odd`] (`cos(omega T + phi)`).
pub fn phase_odd(g: f64, l: usize) -> Result<f64> {
    let grid = build_grid(l, Sector::Apbc)?;
    let mut phase = 0.0;
    for (cos_k, e) in mode_eps(g, &grid) {
        let c = 0.5 * (1.0 + Complex64::new(2.0, -2.0 * g * cos_k) / e);
        phase += c.arg();
    }
    let sum: f64 = mode_eps(g, &grid).map(|(_, e)| e.im).sum();
    // The observable is Re[exp(i pT (g + sum)) * exp(i phase) * ...]; flip the
    // phase with the frequency sign so that it reads cos(|omega| T + phi).
    let sign = if g + sum >= 0.0 { 1.0 } else { -1.0 };
    let wrapped = (sign * phase).rem_euclid(2.0 * PI);
    Ok(if wrapped > PI { wrapped - 2.0 * PI } else { wrapped })
}

/// Rates and frequency for `params` (`g = theta/p`, `L`).
pub fn late_time_character(params: &ModelParams) -> Result<LateTimeCharacter> {
    let (g, p, theta, l) = (params.g(), params.p(), params.theta(), params.l());
    if l % 2 == 1 {
        Ok(LateTimeCharacter {
            gamma: decay_rate(g, p, l, Sector::Apbc)?,
            gamma_prime: None,
            omega: frequency_odd(g, theta, l)?,
            phi: Some(phase_odd(g, l)?),
        })
    } else {
        let with_half_pi = Sector::containing_half_pi(l).expect("even L has pi/2");
        Ok(LateTimeCharacter {
            gamma: decay_rate(g, p, l, with_half_pi.other())?,
            gamma_prime: Some(decay_rate(g, p, l, with_half_pi)?),
            omega: frequency_even(g, theta),
            phi: None,
        })
    }
}

/// `Re[2 sin^2 k / u^{3/2}]`, `u = 1 - g^2 - 2ig cos k`: the per-mode
/// contribution to `d^2 Gamma / dg^2` (in units of `p`).
fn curvature_integrand(g: f64, cos_k: f64, sin_k: f64) -> f64 {
    let u = Complex64::new(1.0 - g * g, -2.0 * g * cos_k);
    let u32 = u * principal_sqrt(u);
    (2.0 * sin_k * sin_k / u32).re
}

/// `d^2 Gamma / dg^2`.
///
/// * Finite `L`: term-by-term second derivative of [`decay_rate`] over the
///   leading sector (APBC for odd `L`, the sector without `pi/2` for even `L`).
/// * `L = infinity`: `(p / 2 pi) int_0^pi Re[2 sin^2 k / u^{3/2}] dk`, split at
///   `pi/2` where the integrand peaks for `g -> 1`.
pub fn gamma_curvature(g: f64, p: f64, size: SystemSize) -> Result<f64> {
    match size {
        SystemSize::Finite(l) => {
            let sector = leading_sector(l);
            let grid = build_grid(l, sector)?;
            let mut sum = 0.0;
            for m in grid.momenta() {
                let k = m.radians();
                let (c, s) = if m.is_half_pi() { (0.0, 1.0) } else { (k.cos(), k.sin()) };
                if m.is_half_pi() && (g - 1.0).abs() < EXCEPTIONAL_TOLERANCE {
                    return Err(Error::ExceptionalPoint("curvature at the exceptional point".into()));
                }
                sum += curvature_integrand(g, c, s);
            }
            Ok(p / l as f64 * sum)
        }
        SystemSize::Infinite => {
            if (g - 1.0).abs() < EXCEPTIONAL_TOLERANCE {
                return Err(Error::ExceptionalPoint("the L = infinity curvature diverges at g = 1".into()));
            }
            let f = |k: f64| curvature_integrand(g, k.cos(), k.sin());
            let tol = 1e-11;
            let integral = integrate(&f, 0.0, FRAC_PI_2, tol)? + integrate(&f, FRAC_PI_2, PI, tol)?;
            Ok(p / (2.0 * PI) * integral)
        }
    }
}

/// Finite-difference step for curvature checks: `max(1e-5, 1e-3 |g - 1|)`.
pub fn curvature_step(g: f64) -> f64 {
    (1e-3 * (g - 1.0).abs()).max(1e-5)
}

/// `d^2 Gamma / dg^2` by a Richardson-refined central difference of the
/// rate (an independent check of [`gamma_curvature`]).
pub fn gamma_curvature_fd(g: f64, p: f64, size: SystemSize) -> Result<f64> {
    let h = curvature_step(g);
    let rate = |x: f64| match size {
        SystemSize::Finite(l) => decay_rate(x, p, l, leading_sector(l)).unwrap_or(f64::NAN),
        SystemSize::Infinite => decay_rate_infinite(x, p).unwrap_or(f64::NAN),
    };
    let v = finite_difference(rate, g, 2, h)?;
    if !v.is_finite() {
        return Err(Error::Numerical(format!("finite difference failed at g = {g}")));
    }
    Ok(v)
}

/// Sector carrying the leading decay rate.
pub fn leading_sector(l: usize) -> Sector {
    match Sector::containing_half_pi(l) {
        Some(s) => s.other(),
        None => Sector::Apbc,
    }
}

/// Finite-size quantity used in scaling collapses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingQuantity {
    /// Odd-`L` frequency in units of `theta`.
    Omega,
    /// `d^2 Gamma / dg^2` in units of `p`.
    GammaCurvature,
}

/// Raw curves `y(g)` for each `L`, ready for [`crate::analysis::collapse`].
///
/// All `L` must share one parity: even and odd chains have different
/// scaling functions.
pub fn scaling_dataset(quantity: ScalingQuantity, g_values: &[f64], ls: &[usize]) -> Result<Vec<Curve>> {
    if let Some(&first) = ls.first() {
        if ls.iter().any(|l| l % 2 != first % 2) {
            return Err(Error::invalid("L-list", "mixed L parities have distinct scaling functions"));
        }
    } else {
        return Err(Error::invalid("L-list", "empty"));
    }
    ls.iter()
        .map(|&l| {
            let y = g_values
                .iter()
                .map(|&g| match quantity {
                    ScalingQuantity::Omega => frequency_odd(g, 1.0, l),
                    ScalingQuantity::GammaCurvature => gamma_curvature(g, 1.0, SystemSize::Finite(l)),
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Curve { l, g: g_values.to_vec(), y })
        })
        .collect()
}

/// Scaled points `((g - 1) L^{1/nu}, y L^{-a})` per curve, for inspection or
/// plotting (`a` is the prefactor exponent of `y = L^a h(x)`).
pub fn scaling_ansatz_check(
    quantity: ScalingQuantity,
    g_values: &[f64],
    ls: &[usize],
    nu: f64,
    prefactor: f64,
) -> Result<Vec<(usize, Vec<(f64, f64)>)>> {
    let curves = scaling_dataset(quantity, g_values, ls)?;
    let scaled = crate::analysis::scale_curves(&curves, 1.0, 1.0 / nu, prefactor);
    Ok(ls.iter().copied().zip(scaled).collect())
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature with absolute-plus-relative
/// tolerance `tol` (bisection of the worst interval).
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut intervals = vec![(a, b, gk15(f, a, b))];
    for _ in 0..5000 {
        let total: f64 = intervals.iter().map(|iv| iv.2 .0).sum();
        let error: f64 = intervals.iter().map(|iv| iv.2 .1).sum();
        if !total.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if error <= tol * total.abs().max(1.0) {
            return Ok(total);
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        intervals.push((lo, mid, gk15(f, lo, mid)));
        intervals.push((mid, hi, gk15(f, mid, hi)));
    }
    Err(Error::Numerical("adaptive quadrature did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadrature_basics() {
        assert_abs_diff_eq!(integrate(&|x: f64| x.sin(), 0.0, PI, 1e-13).unwrap(), 2.0, epsilon = 1e-12);
        let peaked = integrate(&|x: f64| 1e-3 / (x * x + 1e-6), -1.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(peaked, 2.0 * (1000.0f64).atan(), epsilon = 1e-9);
    }

    #[test]
    fn no_field_means_no_decay() {
        assert_abs_diff_eq!(decay_rate(0.0, 1.0, 12, Sector::Apbc).unwrap(), 0.0);
        assert_abs_diff_eq!(decay_rate_infinite(0.0, 1.0).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn odd_sectors_share_the_rate() {
        for g in [0.5, 1.3, 2.0] {
            let a = decay_rate(g, 1.0, 33, Sector::Apbc).unwrap();
            let b = decay_rate(g, 1.0, 33, Sector::Pbc).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn even_subleading_rate_is_larger() {
        let c = late_time_character(&ModelParams::from_g(2.0, 1.0, 32).unwrap()).unwrap();
        assert!(c.gamma < c.gamma_prime.unwrap());
        assert_abs_diff_eq!(c.omega, 2.0 * 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn frequencies() {
        assert_eq!(frequency_even(0.9, 2.0), 0.0);
        assert_abs_diff_eq!(frequency_even(2.0, 2.0), 2.0 * 3f64.sqrt(), epsilon = 1e-14);
        // omega_even ~ (g - 1)^{1/2} near the transition.
        let eps: [f64; 3] = [1e-4, 1e-3, 1e-2];
        let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let y: Vec<f64> = eps.iter().map(|e| frequency_even(1.0 + e, 1.0).ln()).collect();
        let (slope, _, _) = crate::correlators::linear_fit(&x, &y);
        assert_abs_diff_eq!(slope, 0.5, epsilon = 0.02);
        // Odd L converges to half the even-L frequency.
        assert_abs_diff_eq!(frequency_odd(2.0, 1.0, 1601).unwrap(), 0.5 * frequency_even(2.0, 1.0), epsilon = 1e-5);
        assert_abs_diff_eq!(frequency_odd(0.0, 1.0, 7).unwrap(), 0.0, epsilon = 1e-14);
        assert!(frequency_odd(2.0, 1.0, 8).is_err());
    }

    #[test]
    fn curvature_matches_finite_differences() {
        for g in [0.0, 0.4, 1.7] {
            let exact = gamma_curvature(g, 1.0, SystemSize::Finite(21)).unwrap();
            let fd = gamma_curvature_fd(g, 1.0, SystemSize::Finite(21)).unwrap();
            assert_abs_diff_eq!(exact, fd, epsilon = 1e-6);
        }
        let exact = gamma_curvature(1.01, 1.0, SystemSize::Infinite).unwrap();
        let fd = gamma_curvature_fd(1.01, 1.0, SystemSize::Infinite).unwrap();
        assert!((exact - fd).abs() < 0.01 * exact.abs(), "{exact} vs {fd}");
    }

    #[test]
    fn curvature_is_regular_below_and_singular_above() {
        let below: Vec<f64> = [1e-4, 1e-3, 1e-2]
            .iter()
            .map(|e| gamma_curvature(1.0 - e, 1.0, SystemSize::Infinite).unwrap())
            .collect();
        assert!(below.iter().all(|v| v.is_finite()));
        let above: Vec<f64> = [1e-4, 1e-2]
            .iter()
            .map(|e| gamma_curvature(1.0 + e, 1.0, SystemSize::Infinite).unwrap().abs())
            .collect();
        assert!(above[0] > 5.0 * above[1]);
    }

    #[test]
    fn phase_is_finite_and_late_time_consistent() {
        // For large T the analytic observable follows A e^{-Gamma L T} cos(omega T + phi).
        let (g, l) = (2.0, 7);
        let c = late_time_character(&ModelParams::from_g(g, 1.0, l).unwrap()).unwrap();
        let phi = c.phi.unwrap();
        let value = |t: f64| {
            crate::observable::string_expectation(&ModelParams::from_g(g, 1.0, l).unwrap().with_time(t).unwrap())
                .unwrap()
                .value
        };
        let envelope = |t: f64| (-c.gamma * l as f64 * t).exp();
        let amplitude = value(10.0) / (envelope(10.0) * (c.omega * 10.0 + phi).cos());
        for t in [9.3, 10.7, 11.2] {
            let predicted = amplitude * envelope(t) * (c.omega * t + phi).cos();
            assert!((value(t) - predicted).abs() < 1e-3 * envelope(t).abs() * amplitude.abs(), "t={t}");
        }
    }
}
