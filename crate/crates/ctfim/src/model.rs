//! Model parameters, momentum grids and the square-root branch convention.
//!
//! Every other module takes its couplings from [`ModelParams`] and its momenta
//! from [`MomentumGrid`]. The field strength `g = theta / p` is derived on
//! demand and never stored, so it cannot drift out of sync with the rates.
//!
//! Momenta are stored as exact rationals `num/den` of `pi`. Sector and parity
//! logic is then integer arithmetic, and grid-identity checks are exact.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings, sizes and times of one run.
///
/// * `p` — dephasing rate (inverse time), strictly positive.
/// * `theta` — unitary rotation rate (inverse time), non-negative.
/// * `l` — chain length, at least 2.
/// * `t` — total evolution time, non-negative.
/// * `dt` — Trotter step (channel oracle only), strictly positive.
/// * `d` — spatial dimension (mean-field only), at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    p: f64,
    theta: f64,
    l: usize,
    t: f64,
    dt: f64,
    d: usize,
}

impl ModelParams {
    /// Build parameters from the two rates and the chain length, with `T = 0`,
    /// `dt = 0.01` and `d = 1`.
    pub fn new(p: f64, theta: f64, l: usize) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::invalid("p", format!("must be finite and > 0, got {p}")));
        }
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(Error::invalid("theta", format!("must be finite and >= 0, got {theta}")));
        }
        if l < 2 {
            return Err(Error::invalid("L", format!("must be >= 2, got {l}")));
        }
        Ok(Self { p, theta, l, t: 0.0, dt: 0.01, d: 1 })
    }

    /// Build parameters from the field strength `g` instead of `theta`.
    pub fn from_g(g: f64, p: f64, l: usize) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::invalid("g", format!("must be finite and >= 0, got {g}")));
        }
        Self::new(p, g * p, l)
    }

    /// Set the total evolution time.
    pub fn with_time(mut self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid("T", format!("must be finite and >= 0, got {t}")));
        }
        self.t = t;
        Ok(self)
    }

    /// Set the Trotter step of the channel oracle.
    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
        }
        self.dt = dt;
        Ok(self)
    }

    /// Set the spatial dimension used by the mean-field analysis.
    pub fn with_dimension(mut self, d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::invalid("d", "must be >= 1"));
        }
        self.d = d;
        Ok(self)
    }

    /// Same parameters with the sign of the unitary rate flipped, as used in
    /// the second half of the defect protocol.
    pub(crate) fn with_negated_theta(self) -> Self {
        Self { theta: -self.theta, ..self }
    }

    /// Dephasing rate.
    pub fn p(&self) -> f64 {
        self.p
    }
    /// Unitary rotation rate.
    pub fn theta(&self) -> f64 {
        self.theta
    }
    /// Field strength `g = theta / p` (derived; `p > 0` is a constructor
    /// invariant so the division is always defined).
    pub fn g(&self) -> f64 {
        self.theta / self.p
    }
    /// Chain length.
    pub fn l(&self) -> usize {
        self.l
    }
    /// Total evolution time.
    pub fn t(&self) -> f64 {
        self.t
    }
    /// Trotter step.
    pub fn dt(&self) -> f64 {
        self.dt
    }
    /// Spatial dimension.
    pub fn d(&self) -> usize {
        self.d
    }
    /// Dimensionless time `pT`.
    pub fn pt(&self) -> f64 {
        self.p * self.t
    }
}

/// Fermion boundary condition, equivalently the Ising parity sector.
///
/// After the Jordan–Wigner map, the even-parity sector carries anti-periodic
/// and the odd-parity sector periodic boundary conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sector {
    /// Anti-periodic: `k = pi (2n - 1) / L`.
    Apbc,
    /// Periodic: `k = 2 pi n / L`.
    Pbc,
}

impl Sector {
    /// The other sector.
    pub fn other(self) -> Sector {
        match self {
            Sector::Apbc => Sector::Pbc,
            Sector::Pbc => Sector::Apbc,
        }
    }

    /// The sector whose grid contains `k = pi/2`, if any: PBC when `4 | L`,
    /// APBC when `L = 2 mod 4`, none for odd `L`.
    pub fn containing_half_pi(l: usize) -> Option<Sector> {
        match l % 4 {
            0 => Some(Sector::Pbc),
            2 => Some(Sector::Apbc),
            _ => None,
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::Apbc => "APBC",
            Sector::Pbc => "PBC",
        })
    }
}

/// A momentum `k = pi * num / den`, kept as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Momentum {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Momentum {
    /// `pi * num / den`, reduced. Panics on a zero denominator, which is a
    /// programming error rather than a data error.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "momentum denominator must be positive");
        let c = gcd(num, den).max(1);
        Self { num: num / c, den: den / c }
    }

    /// Numerator of `k / pi`.
    pub fn numerator(&self) -> u64 {
        self.num
    }
    /// Denominator of `k / pi`.
    pub fn denominator(&self) -> u64 {
        self.den
    }
    /// Value in radians.
    pub fn radians(&self) -> f64 {
        std::f64::consts::PI * self.num as f64 / self.den as f64
    }
    /// Whether this is exactly `pi/2`.
    pub fn is_half_pi(&self) -> bool {
        self.num == 1 && self.den == 2
    }
    /// The reflected momentum `pi - k` (requires `k <= pi`).
    pub fn reflect(&self) -> Momentum {
        Momentum::new(self.den - self.num, self.den)
    }
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, _) => f.write_str("0"),
            (1, 1) => f.write_str("pi"),
            (n, 1) => write!(f, "{n}pi"),
            (1, d) => write!(f, "pi/{d}"),
            (n, d) => write!(f, "{n}pi/{d}"),
        }
    }
}

/// The positive momenta `0 < k < pi` of one sector, with the unpaired modes
/// `k = 0` and `k = pi` recorded as flags rather than grid members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentumGrid {
    sector: Sector,
    l: usize,
    momenta: Vec<Momentum>,
    has_zero: bool,
    has_pi: bool,
    has_half_pi: bool,
}

impl MomentumGrid {
    /// Boundary condition of the grid.
    pub fn sector(&self) -> Sector {
        self.sector
    }
    /// Chain length the grid was built for.
    pub fn l(&self) -> usize {
        self.l
    }
    /// Momenta in `(0, pi)`, strictly increasing.
    pub fn momenta(&self) -> &[Momentum] {
        &self.momenta
    }
    /// Momenta in radians.
    pub fn radians(&self) -> impl Iterator<Item = f64> + '_ {
        self.momenta.iter().map(Momentum::radians)
    }
    /// Whether the unpaired `k = 0` mode belongs to this sector.
    pub fn has_zero(&self) -> bool {
        self.has_zero
    }
    /// Whether the unpaired `k = pi` mode belongs to this sector.
    pub fn has_pi(&self) -> bool {
        self.has_pi
    }
    /// Whether `k = pi/2` is one of the grid momenta.
    pub fn has_half_pi(&self) -> bool {
        self.has_half_pi
    }
    /// Number of paired momenta.
    pub fn len(&self) -> usize {
        self.momenta.len()
    }
    /// Whether the grid has no paired momenta (only possible for `L = 2`).
    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }
    /// Number of fermion modes accounted for: two per paired momentum plus
    /// the unpaired ones. Always equals `L`.
    pub fn mode_count(&self) -> usize {
        2 * self.momenta.len() + usize::from(self.has_zero) + usize::from(self.has_pi)
    }
}

/// Enumerate the momentum grid of one sector.
///
/// APBC momenta are `pi (2n - 1)/L` and PBC momenta `2 pi n / L`, restricted
/// to the open interval `(0, pi)`; the endpoints are reported by flag.
pub fn build_grid(l: usize, sector: Sector) -> Result<MomentumGrid> {
    if l < 2 {
        return Err(Error::invalid("L", format!("must be >= 2, got {l}")));
    }
    let den = l as u64;
    // Numerators of k/pi over the common denominator L.
    let (start, has_zero) = match sector {
        Sector::Apbc => (1u64, false),
        Sector::Pbc => (2u64, true),
    };
    let mut momenta = Vec::new();
    let mut has_pi = false;
    let mut n = start;
    while n <= den {
        if n == den {
            has_pi = true;
        } else {
            momenta.push(Momentum::new(n, den));
        }
        n += 2;
    }
    let has_half_pi = momenta.iter().any(Momentum::is_half_pi);
    Ok(MomentumGrid { sector, l, momenta, has_zero, has_pi, has_half_pi })
}

/// Principal square root: the root with non-negative real part.
///
/// On the negative real axis the sign of the imaginary part follows the
/// sign of the input's (possibly signed-zero) imaginary part, so
/// `principal_sqrt(-1 + 0i) = i`.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.re < 0.0 {
        -r
    } else {
        r
    }
}
