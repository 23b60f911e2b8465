//! Single-particle spectrum of the complex-field Ising chain.
//!
//! After a Jordan–Wigner transformation the generator
//!
//! ```text
//! H(g) = - sum_j tau^z_j tau^z_{j+1} - i g sum_j tau^x_j
//! ```
//!
//! splits into 2x2 blocks pairing `k` with `-k`. Each block has eigenvalues
//! `a_k ± eps_k` with
//!
//! ```text
//! a_k   = 2 i g - 2 cos k
//! eps_k = 2 sqrt(1 - g^2 - 2 i g cos k)     (principal branch)
//! ```
//!
//! The pair `k = pi/2`, `g = 1` is an exceptional point: `eps` vanishes and
//! the block is a nilpotent Jordan block rather than diagonalizable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{principal_sqrt, MomentumGrid, Sector};

/// Tolerance on `|g - 1|` and `|k - pi/2|` below which a point is treated as
/// the exceptional point.
pub const EXCEPTIONAL_TOLERANCE: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `eps_k^+ = 2 sqrt(1 - g^2 - 2 i g cos k)` for any real `k`.
pub fn eps_plus(g: f64, k: f64) -> Complex64 {
    2.0 * principal_sqrt(Complex64::new(1.0 - g * g, -2.0 * g * k.cos()))
}

/// `eps_k^+` evaluated at `k = pi/2` without roundoff in `cos k`.
pub fn eps_half_pi(g: f64) -> Complex64 {
    2.0 * principal_sqrt(Complex64::new(1.0 - g * g, 0.0))
}

/// Whether `(g, k)` is the exceptional point within [`EXCEPTIONAL_TOLERANCE`].
pub fn is_exceptional(g: f64, k: f64) -> bool {
    (g - 1.0).abs() < EXCEPTIONAL_TOLERANCE
        && (k - std::f64::consts::FRAC_PI_2).abs() < EXCEPTIONAL_TOLERANCE
}

/// One point of the complex single-particle spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrumPoint {
    /// Momentum in radians.
    pub k: f64,
    /// `eps_k^+`, with non-negative real part.
    pub eps_plus: Complex64,
    /// `alpha_+ = (2g + 2i cos k + i eps^+) / (2 sin k)`; absent at the
    /// exceptional point and at `sin k = 0`.
    pub alpha_plus: Option<Complex64>,
    /// `alpha_- = (2g + 2i cos k - i eps^+) / (2 sin k)`.
    pub alpha_minus: Option<Complex64>,
    /// Set at `g = 1, k = pi/2`.
    pub is_exceptional: bool,
}

/// Evaluate the spectrum at one momentum `k in [0, pi]`.
///
/// The exceptional point is not an error: the point comes back flagged and
/// without Bogoliubov coefficients.
pub fn dispersion(g: f64, k: f64) -> Result<ComplexSpectrumPoint> {
    if !(0.0..=std::f64::consts::PI).contains(&k) {
        return Err(Error::invalid("k", format!("must lie in [0, pi], got {k}")));
    }
    let exceptional = is_exceptional(g, k);
    let eps = eps_plus(g, k);
    let sin_k = k.sin();
    let (alpha_plus, alpha_minus) = if exceptional || sin_k.abs() < 1e-300 {
        (None, None)
    } else {
        let base = Complex64::new(2.0 * g, 2.0 * k.cos());
        (Some((base + I * eps) / (2.0 * sin_k)), Some((base - I * eps) / (2.0 * sin_k)))
    };
    Ok(ComplexSpectrumPoint { k, eps_plus: eps, alpha_plus, alpha_minus, is_exceptional: exceptional })
}

/// The similarity transform `P` and its inverse that diagonalise one
/// momentum block away from the exceptional point:
///
/// ```text
/// P    = sqrt(sin k / eps) [[1, i], [alpha_+, i alpha_-]]
/// P^-1 = sqrt(sin k / eps) [[i alpha_-, -i], [-alpha_+, 1]]
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bogoliubov {
    /// `P`, row-major.
    pub p: [[Complex64; 2]; 2],
    /// `P^-1`, row-major.
    pub p_inv: [[Complex64; 2]; 2],
}

/// Bogoliubov matrices of one block; fails at the exceptional point.
pub fn bogoliubov(g: f64, k: f64) -> Result<Bogoliubov> {
    let point = dispersion(g, k)?;
    let (Some(ap), Some(am)) = (point.alpha_plus, point.alpha_minus) else {
        return Err(Error::ExceptionalPoint(format!(
            "no Bogoliubov transform at g = {g}, k = {k}"
        )));
    };
    let scale = (Complex64::new(k.sin(), 0.0) / point.eps_plus).sqrt();
    let p = [[scale, scale * I], [scale * ap, scale * I * am]];
    let p_inv = [[scale * I * am, -scale * I], [-scale * ap, scale]];
    Ok(Bogoliubov { p, p_inv })
}

/// Energies of the unpaired `k = 0` and `k = pi` modes.
///
/// `H_0 = (ig - 1)(2 n_0 - 1)` belongs to the odd-parity (PBC) sector for
/// every `L`; `H_pi = (ig + 1)(2 n_pi - 1)` belongs to PBC for even `L` and
/// to APBC for odd `L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeEnergies {
    /// `ig - 1`: energy of the occupied `k = 0` mode (its negative when empty).
    pub e0: Complex64,
    /// `ig + 1`: energy of the occupied `k = pi` mode (its negative when empty).
    pub epi: Complex64,
    /// Sector carrying `k = 0`.
    pub zero_sector: Sector,
    /// Sector carrying `k = pi`.
    pub pi_sector: Sector,
}

/// Zero-mode energies and their sector assignment for chain length `l`.
pub fn zero_modes(g: f64, l: usize) -> ZeroModeEnergies {
    ZeroModeEnergies {
        e0: Complex64::new(-1.0, g),
        epi: Complex64::new(1.0, g),
        zero_sector: Sector::Pbc,
        pi_sector: if l.is_multiple_of(2) { Sector::Pbc } else { Sector::Apbc },
    }
}

/// Energy of the sector vacuum (the state of smallest real energy in the
/// sector): every pair in its lower branch `a_k - eps_k`, the `k = 0` mode
/// occupied (parity requires it) and the `k = pi` mode empty.
///
/// At `g = 0` both sectors give `-L`, the ferromagnetic ground energy.
pub fn vacuum_energy(g: f64, grid: &MomentumGrid) -> Complex64 {
    let l = grid.l() as f64;
    let mut energy = Complex64::new(0.0, -g * l);
    for m in grid.momenta() {
        let (cos_k, eps) = if m.is_half_pi() {
            (0.0, eps_half_pi(g))
        } else {
            (m.radians().cos(), eps_plus(g, m.radians()))
        };
        energy += Complex64::new(-2.0 * cos_k, 2.0 * g) - eps;
    }
    if grid.has_zero() {
        energy += Complex64::new(-2.0, 2.0 * g);
    }
    energy
}

/// Whether `eps(pi - k) = conj eps(k)` holds to `tol` over a grid.
///
/// For `g >= 1` the momentum `pi/2` sits on the branch cut of the square
/// root (`eps = 2i sqrt(g^2 - 1)` is its own reflection), so it is skipped.
pub fn conjugate_pair_check(g: f64, grid: &MomentumGrid, tol: f64) -> bool {
    grid.momenta()
        .iter()
        .filter(|m| !(m.is_half_pi() && g >= 1.0 - EXCEPTIONAL_TOLERANCE))
        .all(|m| {
            let k = m.radians();
            let reflected = m.reflect().radians();
            (eps_plus(g, reflected) - eps_plus(g, k).conj()).norm() <= tol
        })
}

/// `inf_k Re eps_k^+`: `2 sqrt(1 - g^2)` for `g < 1`, zero once the gap closes
/// at `k = pi/2` for `g >= 1`.
///
/// `Re sqrt(a - ib) >= sqrt(a)` for `a >= 0`, so the infimum sits at
/// `cos k = 0`.
pub fn real_gap(g: f64) -> f64 {
    if g < 1.0 {
        2.0 * (1.0 - g * g).sqrt()
    } else {
        0.0
    }
}

/// Dense-grid estimate of [`real_gap`], used as a self-check.
pub fn real_gap_scan(g: f64, points: usize) -> f64 {
    (1..points)
        .map(|i| eps_plus(g, std::f64::consts::PI * i as f64 / points as f64).re)
        .fold(f64::INFINITY, f64::min)
}
