//! Exact evaluation of the string observable `<prod_j sigma^z_j>(T)`.
//!
//! Starting from `|0...0>`, the string expectation is a ratio of matrix
//! elements of `exp(-pT H(g))`, which factorises over momentum pairs. Each
//! pair contributes
//!
//! ```text
//! f(k) = [cosh(pT eps) + (2 - 2ig cos k)/eps * sinh(pT eps)] / exp(2pT).
//! ```
//!
//! * Odd `L`: value = `Re(exp(igpT) prod_{k in APBC} f(k))`. The PBC product
//!   is the complex conjugate.
//! * Even `L`: value = `1/2 prod_K |f| + 1/2 sgn f(pi/2) prod_K' |f|`, where
//!   `K'` is the sector containing `pi/2`.
//!
//! Products of many small factors are accumulated as
//! `(sum log|f|, sum arg f mod 2 pi)`. The naive product loses everything to
//! underflow and phase cancellation at moderate `pT L`.
//!
//! The module also holds the single-qubit benchmark
//! `H_0d = -tau^z + i g tau^x`.

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_grid, ModelParams, MomentumGrid, Sector};
use crate::spectrum::{eps_half_pi, eps_plus, EXCEPTIONAL_TOLERANCE};

/// One momentum factor `f(k)` in log-polar form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeFactor {
    /// Momentum in radians.
    pub k: f64,
    /// `ln |f(k)|`.
    pub log_magnitude: f64,
    /// `arg f(k)` in `(-pi, pi]`.
    pub phase: f64,
}

impl ModeFactor {
    /// Re-exponentiated `f(k)`.
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.log_magnitude.exp(), self.phase)
    }
}

/// Product of mode factors over one sector in log-polar form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SectorProduct {
    /// `sum ln |f|`.
    pub log_magnitude: f64,
    /// `sum arg f`, reduced to `[0, 2 pi)` after every factor.
    pub phase: f64,
}

impl SectorProduct {
    fn push(&mut self, log_magnitude: f64, phase: f64) {
        self.log_magnitude += log_magnitude;
        self.phase = (self.phase + phase).rem_euclid(TAU);
    }

    /// Re-exponentiated product.
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.log_magnitude.exp(), self.phase)
    }
}

/// Assembled string expectation with its per-sector decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StringExpectation {
    /// `<prod sigma^z>(T)`.
    pub value: f64,
    /// APBC product (odd `L`: including the `exp(igpT)` phase).
    pub apbc: SectorProduct,
    /// PBC product.
    pub pbc: SectorProduct,
    /// Imaginary part discarded when assembling `value`.
    pub imaginary_residue: f64,
}

/// `(1 - exp(-y)) / y`, with a series for small `|y|`.
fn one_minus_exp_over(y: Complex64) -> Complex64 {
    if y.norm() < 0.1 {
        // sum_{n>=0} (-y)^n / (n+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..14 {
            term *= -y / (n as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        (1.0 - (-y).exp()) / y
    }
}

/// `ln(cosh x + c sinh x / x')` style factors share one stable form:
/// `ln[(e^x / 2)(1 + e^{-2x} + 2 b h(x))]` with `h(x) = (1 - e^{-2x}) / (2x)`.
/// Returns the complex logarithm (real part = log magnitude).
fn log_pair_factor(x: Complex64, b: Complex64) -> Complex64 {
    let bracket = 1.0 + (-2.0 * x).exp() + 2.0 * b * one_minus_exp_over(2.0 * x);
    x - LN_2 + bracket.ln()
}

fn mode_factor_unchecked(pt: f64, g: f64, k: f64) -> ModeFactor {
    let half_pi = (k - PI / 2.0).abs() < EXCEPTIONAL_TOLERANCE;
    let (cos_k, eps) = if half_pi { (0.0, eps_half_pi(g)) } else { (k.cos(), eps_plus(g, k)) };
    let x = pt * eps;
    // e^{2pT} f = cosh x + (2 - 2ig cos k) sinh(x) / eps
    //           = (e^x/2)[1 + e^{-2x} + 4 pT (1 - ig cos k) h(x)]
    let b = 2.0 * pt * Complex64::new(1.0, -g * cos_k);
    let log_f = log_pair_factor(x, b) - 2.0 * pt;
    ModeFactor { k, log_magnitude: log_f.re, phase: wrap_phase(log_f.im) }
}

fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Mode factor `f(k)` for `k in (0, pi)` at time `params.t()`.
///
/// Fails at the exceptional point; use [`exceptional_mode_factor`] there.
pub fn mode_factor(params: &ModelParams, k: f64) -> Result<ModeFactor> {
    if !(k > 0.0 && k < PI) {
        return Err(Error::invalid("k", format!("must lie in (0, pi), got {k}")));
    }
    let g = params.g();
    if (g - 1.0).abs() < EXCEPTIONAL_TOLERANCE && (k - PI / 2.0).abs() < EXCEPTIONAL_TOLERANCE {
        return Err(Error::ExceptionalPoint(
            "f(pi/2) at g = 1 must come from exceptional_mode_factor".into(),
        ));
    }
    Ok(mode_factor_unchecked(params.pt(), g, k))
}

/// The `k = pi/2` factor at the exceptional point `g = 1`:
/// `f = (1 + 2pT) exp(-2pT)`.
///
/// At `g = 1` the pair block is nilpotent, so `exp(-pT M)` is linear in `pT`.
/// The result is the continuous limit of [`mode_factor`] as `g -> 1`.
pub fn exceptional_mode_factor(params: &ModelParams) -> Result<ModeFactor> {
    if (params.g() - 1.0).abs() >= EXCEPTIONAL_TOLERANCE {
        return Err(Error::invalid(
            "g",
            format!("exceptional factor requires g = 1, got {}", params.g()),
        ));
    }
    let pt = params.pt();
    Ok(ModeFactor { k: PI / 2.0, log_magnitude: (1.0 + 2.0 * pt).ln() - 2.0 * pt, phase: 0.0 })
}

fn factor_any(params: &ModelParams, k: f64) -> ModeFactor {
    match mode_factor(params, k) {
        Ok(f) => f,
        // Only the exceptional point fails for in-range k.
        Err(_) => exceptional_mode_factor(params).expect("g = 1 at the exceptional point"),
    }
}

/// Product of mode factors over one grid.
pub fn sector_product(params: &ModelParams, grid: &MomentumGrid) -> SectorProduct {
    let mut acc = SectorProduct::default();
    for k in grid.radians() {
        let f = factor_any(params, k);
        acc.push(f.log_magnitude, f.phase);
    }
    acc
}

/// `<prod_j sigma^z_j>(T)` for the chain described by `params`.
pub fn string_expectation(params: &ModelParams) -> Result<StringExpectation> {
    let l = params.l();
    let apbc_grid = build_grid(l, Sector::Apbc)?;
    let pbc_grid = build_grid(l, Sector::Pbc)?;
    let mut apbc = sector_product(params, &apbc_grid);
    let mut pbc = sector_product(params, &pbc_grid);
    if l % 2 == 1 {
        let shift = params.g() * params.pt();
        apbc.push(0.0, shift);
        pbc.push(0.0, -shift);
        // The two sectors are complex conjugates of each other; their average
        // is real and the leftover imaginary part measures roundoff.
        let z = 0.5 * (apbc.value() + pbc.value());
        Ok(StringExpectation { value: z.re, apbc, pbc, imaginary_residue: z.im })
    } else {
        let (k_prime, k_plain) = match Sector::containing_half_pi(l) {
            Some(Sector::Pbc) => (&pbc, &apbc),
            _ => (&apbc, &pbc),
        };
        // The pi/2 factor is real, so the K' phase is 0 or pi; its cosine is the sign.
        let sign = k_prime.phase.cos().signum();
        let value = 0.5 * k_plain.log_magnitude.exp() + 0.5 * sign * k_prime.log_magnitude.exp();
        let residue = 0.5 * k_plain.value().im + 0.5 * k_prime.value().im;
        Ok(StringExpectation { value, apbc, pbc, imaginary_residue: residue })
    }
}

/// Single-qubit benchmark `<sigma^z(T)>`:
/// `<0|exp(-pT H_0d(g))|0> / <0|exp(-pT H_0d(0))|0>` with
/// `H_0d = -tau^z + i g tau^x`.
///
/// Since `H_0d^2 = (1 - g^2)`, the exponential is
/// `cosh(pT s) - sinh(pT s) H_0d / s` with `s = sqrt(1 - g^2)`, evaluated in
/// the same stable form as the chain factors.
pub fn qubit0d_observable(params: &ModelParams, t: f64) -> f64 {
    let pt = params.p() * t;
    let g = params.g();
    let s = crate::model::principal_sqrt(Complex64::new(1.0 - g * g, 0.0));
    // e^{pT} <sigma^z> = cosh(pT s) + sinh(pT s)/s = (e^y/2)[1 + e^{-2y} + 2 pT h(y)]
    let log_v = log_pair_factor(pt * s, Complex64::new(pt, 0.0)) - pt;
    let v = log_v.exp();
    v.re
}

/// Late-time rates of the single-qubit benchmark.
///
/// * Overdamped `g < 1`: `Gamma = p - p sqrt(1 - g^2)`, `omega = 0`.
/// * Underdamped `g > 1`: `Gamma = p`, `omega = p sqrt(g^2 - 1)`.
///
/// `g = 1` is refused: the decay there picks up a logarithmic,
/// time-dependent correction.
pub fn qubit0d_rates(g: f64, p: f64) -> Result<(f64, f64)> {
    if !(g.is_finite() && g >= 0.0) {
        return Err(Error::invalid("g", format!("must be >= 0, got {g}")));
    }
    if !(p > 0.0) {
        return Err(Error::invalid("p", format!("must be > 0, got {p}")));
    }
    if (g - 1.0).abs() < EXCEPTIONAL_TOLERANCE {
        return Err(Error::ExceptionalPoint("single-qubit rates at g = 1".into()));
    }
    if g < 1.0 {
        Ok((p - p * (1.0 - g * g).sqrt(), 0.0))
    } else {
        Ok((p, p * (g * g - 1.0).sqrt()))
    }
}
