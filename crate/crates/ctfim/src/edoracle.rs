//! Brute-force oracle: the channel acting on the full density matrix.
//!
//! The density matrix of `L <= 8` qubits is stored densely in the doubled
//! space, `rho_{ab}` at index `a * 2^L + b` (row-major over forward and
//! backward bit strings; bit `j` of an index is qubit `j`, `0 = |0>`).
//!
//! One Trotter step applies
//!
//! 1. `U = exp(i theta dt sigma^x / 2)` on every qubit, `rho -> U rho U^dag`;
//! 2. on every periodic bond the exact dephasing mixture
//!    `rho -> (1 - p dt) rho + p dt (Z_j Z_{j+1}) rho (Z_j Z_{j+1})`.
//!
//! The continuum limit is generated by
//! `D(rho) = i (theta/2) sum_j [X_j, rho] + p sum_bonds (ZZ rho ZZ - rho)`,
//! which [`evolve_continuum`] exponentiates exactly (Taylor series,
//! matrix-free). Both maps are trace preserving and Hermiticity preserving.
//!
//! The module also holds a dense solver for the effective generator
//! `H = -sum tau^z tau^z - i sum g_j tau^x_j` on `2^L` states. It is used for
//! the purity identity and for small-`L` correlator checks.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expmv, norm, walsh_hadamard};
use crate::model::ModelParams;
use crate::spectrum::EXCEPTIONAL_TOLERANCE;

/// Largest chain the oracle accepts (`4^8 = 65536` amplitudes).
pub const MAX_SITES: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Snapshot magic bytes.
pub const SNAPSHOT_MAGIC: [u8; 4] = *b"CTFS";
/// Snapshot format version.
pub const SNAPSHOT_VERSION: u32 = 1;

/// A density matrix in the doubled space.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubledState {
    l: usize,
    amplitudes: Vec<Complex64>,
}

fn check_sites(l: usize) -> Result<()> {
    if !(1..=MAX_SITES).contains(&l) {
        return Err(Error::Unsupported(format!(
            "the dense oracle handles 1..={MAX_SITES} sites, got {l}"
        )));
    }
    Ok(())
}

impl DoubledState {
    /// `|0...0><0...0|`.
    pub fn all_zero(l: usize) -> Result<Self> {
        check_sites(l)?;
        let mut amplitudes = vec![ZERO; 1 << (2 * l)];
        amplitudes[0] = ONE;
        Ok(Self { l, amplitudes })
    }

    /// The maximally mixed state `1 / 2^L`.
    pub fn maximally_mixed(l: usize) -> Result<Self> {
        check_sites(l)?;
        let dim = 1usize << l;
        let mut amplitudes = vec![ZERO; dim * dim];
        for a in 0..dim {
            amplitudes[a * dim + a] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { l, amplitudes })
    }

    /// Wrap raw amplitudes (row-major `rho_{ab}`).
    pub fn from_amplitudes(l: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_sites(l)?;
        if amplitudes.len() != 1 << (2 * l) {
            return Err(Error::Format(format!(
                "expected {} amplitudes for L = {l}, got {}",
                1usize << (2 * l),
                amplitudes.len()
            )));
        }
        Ok(Self { l, amplitudes })
    }

    /// Chain length.
    pub fn l(&self) -> usize {
        self.l
    }
    /// Hilbert-space dimension `2^L` of one copy.
    pub fn dim(&self) -> usize {
        1 << self.l
    }
    /// Raw amplitudes.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
    /// `rho_{ab}`.
    pub fn amplitude(&self, a: usize, b: usize) -> Complex64 {
        self.amplitudes[a * self.dim() + b]
    }

    /// `Tr rho` (complex in general; real for physical states).
    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|a| self.amplitudes[a * dim + a]).sum()
    }

    /// `max |rho_{ab} - conj rho_{ba}|`.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for a in 0..dim {
            for b in a..dim {
                worst = worst.max((self.amplitude(a, b) - self.amplitude(b, a).conj()).norm());
            }
        }
        worst
    }

    /// Apply a single-qubit operator on the forward copy: `rho -> u_j rho`.
    pub fn apply_forward(&mut self, site: usize, u: [[Complex64; 2]; 2]) {
        let dim = self.dim();
        let bit = 1usize << site;
        for a in 0..dim {
            if a & bit != 0 {
                continue;
            }
            let a1 = a | bit;
            for b in 0..dim {
                let x0 = self.amplitudes[a * dim + b];
                let x1 = self.amplitudes[a1 * dim + b];
                self.amplitudes[a * dim + b] = u[0][0] * x0 + u[0][1] * x1;
                self.amplitudes[a1 * dim + b] = u[1][0] * x0 + u[1][1] * x1;
            }
        }
    }

    /// Apply a single-qubit operator on the backward copy: `rho -> rho u_j`.
    pub fn apply_backward(&mut self, site: usize, u: [[Complex64; 2]; 2]) {
        let dim = self.dim();
        let bit = 1usize << site;
        for a in 0..dim {
            let row = &mut self.amplitudes[a * dim..(a + 1) * dim];
            for b in 0..dim {
                if b & bit != 0 {
                    continue;
                }
                let b1 = b | bit;
                let (x0, x1) = (row[b], row[b1]);
                row[b] = x0 * u[0][0] + x1 * u[1][0];
                row[b1] = x0 * u[0][1] + x1 * u[1][1];
            }
        }
    }

    /// `rho -> u_j rho u_j^dag`.
    pub fn conjugate_site(&mut self, site: usize, u: [[Complex64; 2]; 2]) {
        self.apply_forward(site, u);
        self.apply_backward(site, dagger(u));
    }

    /// Boundary vector `w[m] = Tr(prod_j P_j rho)` with `P_j = sigma^z` where
    /// bit `j` of `m` is 0 and `P_j = i sigma^y` where it is 1.
    ///
    /// These `2^L` numbers are the components of `rho` seen by the string
    /// observable and its dressings.
    pub fn boundary_vector(&self) -> Vec<Complex64> {
        // Contract one qubit at a time: the (a_j, b_j) pair of indices is
        // replaced by a single index (0: sigma^z, 1: i sigma^y).
        // Current layout: a list of (forward-remaining, backward-remaining, done) tensors.
        let l = self.l;
        let mut cur = self.amplitudes.clone();
        // cur is indexed by (a_rest, b_rest, m_done) flattened as
        // ((a_rest * 2^{rest} + b_rest) * 2^{done} + m_done).
        for step in 0..l {
            let rest = l - step; // qubits still in (a, b)
            let done = step;
            let rest_dim = 1usize << rest;
            let done_dim = 1usize << done;
            let new_rest_dim = rest_dim >> 1;
            let mut next = vec![ZERO; new_rest_dim * new_rest_dim * done_dim * 2];
            // Contract the lowest remaining qubit of a and b.
            for a in 0..rest_dim {
                for b in 0..rest_dim {
                    let (aj, bj) = (a & 1, b & 1);
                    let (ar, br) = (a >> 1, b >> 1);
                    let base_in = (a * rest_dim + b) * done_dim;
                    let base_out = (ar * new_rest_dim + br) * done_dim * 2;
                    // sigma^z: rho_00 - rho_11 ; i sigma^y: rho_10 - rho_01
                    let (slot, sign) = match (aj, bj) {
                        (0, 0) => (0, 1.0),
                        (1, 1) => (0, -1.0),
                        (1, 0) => (1, 1.0),
                        _ => (1, -1.0),
                    };
                    for m in 0..done_dim {
                        next[base_out + (slot << done) + m] += sign * cur[base_in + m];
                    }
                }
            }
            cur = next;
        }
        cur
    }

    /// `Tr(prod_j sigma^{s_j}_j rho)` for every sign string, with
    /// `sigma^± = sigma^z ± i sigma^y`; bit `j` of the index set means `sigma^-`.
    pub fn sign_vector(&self) -> Vec<Complex64> {
        let mut w = self.boundary_vector();
        walsh_hadamard(&mut w);
        w
    }

    /// Write the state as a binary snapshot: 16-byte header
    /// (`b"CTFS"`, version `u32` LE, `L` as `u64` LE) followed by
    /// interleaved `f64` LE real/imaginary parts, row-major over
    /// (forward, backward).
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        w.write_all(&(self.l as u64).to_le_bytes())?;
        for z in &self.amplitudes {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read a snapshot written by [`DoubledState::write_snapshot`].
    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if header[0..4] != SNAPSHOT_MAGIC {
            return Err(Error::Format("bad snapshot magic".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
        if version != SNAPSHOT_VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {version}")));
        }
        let l = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes")) as usize;
        check_sites(l)?;
        let n = 1usize << (2 * l);
        let mut bytes = vec![0u8; 16 * n];
        r.read_exact(&mut bytes)?;
        let amplitudes = bytes
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[0..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..16].try_into().expect("8 bytes")),
                )
            })
            .collect();
        Self::from_amplitudes(l, amplitudes)
    }
}

fn dagger(u: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]]
}

/// Bit `j` set iff `Z_j Z_{j+1} = -1` on the bit string `a` (periodic bonds).
fn bond_mask(a: usize, l: usize) -> usize {
    let mut mask = 0;
    for j in 0..l {
        let k = (j + 1) % l;
        if ((a >> j) ^ (a >> k)) & 1 == 1 {
            mask |= 1 << j;
        }
    }
    mask
}

/// `exp(i phi sigma^x)`.
fn x_rotation(phi: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = (Complex64::new(phi.cos(), 0.0), Complex64::new(0.0, phi.sin()));
    [[c, s], [s, c]]
}

/// One Trotter step of the channel.
pub fn step_channel(state: &DoubledState, params: &ModelParams) -> Result<DoubledState> {
    let mut next = state.clone();
    step_in_place(&mut next, params.theta(), params.p(), params.dt())?;
    Ok(next)
}

fn step_in_place(state: &mut DoubledState, theta: f64, p: f64, dt: f64) -> Result<()> {
    if p * dt >= 1.0 {
        return Err(Error::invalid(
            "dt",
            format!("p dt = {} must be < 1 for the dephasing mixture to be a channel", p * dt),
        ));
    }
    let l = state.l;
    let u = x_rotation(theta * dt / 2.0);
    for site in 0..l {
        state.conjugate_site(site, u);
    }
    // Each bond leaves rho_{ab} alone when Z_j Z_{j+1} agrees on a and b
    // and multiplies it by 1 - 2 p dt when it does not.
    let flip = 1.0 - 2.0 * p * dt;
    let dim = state.dim();
    let masks: Vec<usize> = (0..dim).map(|a| bond_mask(a, l)).collect();
    let factors: Vec<f64> = (0..=l).map(|c| flip.powi(c as i32)).collect();
    for a in 0..dim {
        for b in 0..dim {
            let c = (masks[a] ^ masks[b]).count_ones() as usize;
            state.amplitudes[a * dim + b] *= factors[c];
        }
    }
    Ok(())
}

/// Evolve by `round(t / dt)` Trotter steps.
pub fn evolve_trotter(state: &DoubledState, params: &ModelParams, t: f64) -> Result<DoubledState> {
    let steps = (t / params.dt()).round() as usize;
    let mut s = state.clone();
    for _ in 0..steps {
        step_in_place(&mut s, params.theta(), params.p(), params.dt())?;
    }
    Ok(s)
}

/// The continuum generator applied to a flattened density matrix.
fn generator(l: usize, theta: f64, p: f64, masks: &[usize], x: &[Complex64], out: &mut [Complex64]) {
    let dim = 1usize << l;
    let half = I * (theta / 2.0);
    for a in 0..dim {
        for b in 0..dim {
            let c = (masks[a] ^ masks[b]).count_ones() as f64;
            let mut acc = x[a * dim + b] * (-2.0 * p * c);
            for site in 0..l {
                let bit = 1usize << site;
                acc += half * (x[(a ^ bit) * dim + b] - x[a * dim + (b ^ bit)]);
            }
            out[a * dim + b] = acc;
        }
    }
}

/// Exact continuum evolution `exp(t D) rho` (no Trotter error).
pub fn evolve_continuum(state: &DoubledState, params: &ModelParams, t: f64) -> Result<DoubledState> {
    let l = state.l;
    let masks: Vec<usize> = (0..state.dim()).map(|a| bond_mask(a, l)).collect();
    let (theta, p) = (params.theta(), params.p());
    let bound = l as f64 * (theta.abs() + 2.0 * p);
    let amplitudes = expmv(
        |x, out| generator(l, theta, p, &masks, x, out),
        &state.amplitudes,
        t,
        bound,
    );
    DoubledState::from_amplitudes(l, amplitudes)
}

fn real_trace(state: &DoubledState) -> Result<f64> {
    let tr = state.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::DegenerateState(tr.norm()));
    }
    Ok(tr.re)
}

/// `Tr(prod_j sigma^z_j rho) / Tr rho`.
pub fn string_observable(state: &DoubledState) -> Result<f64> {
    let tr = real_trace(state)?;
    let dim = state.dim();
    let s: f64 = (0..dim)
        .map(|a| {
            let sign = if a.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            sign * state.amplitudes[a * dim + a].re
        })
        .sum();
    Ok(s / tr)
}

/// `Tr rho^2 / (Tr rho)^2`.
pub fn purity(state: &DoubledState) -> Result<f64> {
    let tr = real_trace(state)?;
    let dim = state.dim();
    let mut sum = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            sum += (state.amplitude(a, b) * state.amplitude(b, a)).re;
        }
    }
    Ok(sum / (tr * tr))
}

/// Doubled-space expectation `<<1| mu^x_j |rho>>` of the on-site weak
/// symmetry `mu^x_j = sigma^x_j (x) sigma^x_j`, with `<<1|` the trace vector
/// (`sum_a <a|<a|`). In operator language this is `Tr(X_j rho X_j)`.
pub fn weak_symmetry_expectation(state: &DoubledState, site: usize) -> Complex64 {
    let dim = state.dim();
    let bit = 1usize << site;
    (0..dim).map(|a| state.amplitude(a ^ bit, a ^ bit)).sum()
}

/// Apply `mu^x_j`: `rho -> X_j rho X_j`.
pub fn apply_weak_symmetry(state: &DoubledState, site: usize) -> DoubledState {
    let mut out = state.clone();
    out.conjugate_site(site, [[ZERO, ONE], [ONE, ZERO]]);
    out
}

/// `max |E(mu_j rho) - mu_j E(rho)|` for one Trotter step `E`: zero when
/// `mu^x_j` is a (weak) symmetry of the averaged channel.
pub fn weak_symmetry_commutator(state: &DoubledState, params: &ModelParams, site: usize) -> Result<f64> {
    let a = step_channel(&apply_weak_symmetry(state, site), params)?;
    let b = apply_weak_symmetry(&step_channel(state, params)?, site);
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// Result of the defect-insertion protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectOutcome {
    /// `Tr(prod sigma^z rho~) / Tr(prod sigma^z rho)`.
    pub ratio: f64,
    /// `Tr rho~`.
    pub trace_with_defects: f64,
    /// `Tr rho`.
    pub trace_without: f64,
}

/// Defect-insertion correlator.
///
/// The state is evolved for time `T` with the channel, the defect
/// `sigma^z_i (x) sigma^z_i` (and likewise at `j`) is inserted, and it is
/// evolved for another `T` with `theta -> -theta`. The ratio of string
/// observables with and without defects approaches the Hermitian
/// ground-state correlator `<tau^z_i tau^z_j>` at late times.
pub fn defect_protocol(params: &ModelParams, site_i: usize, site_j: usize) -> Result<DefectOutcome> {
    let l = params.l();
    if site_i >= l || site_j >= l {
        return Err(Error::invalid("site", format!("sites must be < L = {l}")));
    }
    let start = DoubledState::all_zero(l)?;
    let first = evolve_trotter(&start, params, params.t())?;
    let flipped = params.with_negated_theta();
    let z = [[ONE, ZERO], [ZERO, -ONE]];
    let mut defected = first.clone();
    for site in [site_i, site_j] {
        defected.conjugate_site(site, z);
    }
    let with = evolve_trotter(&defected, &flipped, params.t())?;
    let without = evolve_trotter(&first, &flipped, params.t())?;
    let num = string_observable(&with)? * real_trace(&with)?;
    let den = string_observable(&without)? * real_trace(&without)?;
    Ok(DefectOutcome {
        ratio: num / den,
        trace_with_defects: with.trace().re,
        trace_without: without.trace().re,
    })
}

/// Mixing coefficient `kappa` in `O_1 ∝ A + kappa B`, chosen so that the two
/// `k = pi/2` eigencomponents enter with equal weight:
/// `kappa = -i (g - i) / (g + i)`.
pub fn ep_mixing(g: f64) -> Complex64 {
    let gc = Complex64::new(g, 0.0);
    -I * (gc - I) / (gc + I)
}

/// `alpha_± = g (1 ∓ sqrt(1 - 1/g^2))` of the `pi/2` mode for `g > 1`.
pub fn ep_alphas(g: f64) -> (f64, f64) {
    let s = (1.0 - 1.0 / (g * g)).sqrt();
    (g * (1.0 - s), g * (1.0 + s))
}

/// The PBC-sector probe amplitudes `(Tr A rho, Tr B rho)`.
///
/// `A = L^{-1/2} sum_j sigma^-_j prod_{i != j} sigma^+_i`.
///
/// `B` is a sum over triples `{x < y, j}` with `x - y` odd of
/// `sigma^-_x sigma^-_y sigma^-_j prod sigma^+`. Each term has coefficient
/// `(-2i / L^{3/2}) (-1)^{(x-y-1)/2}`, times an extra `-1` when
/// `x < j < y` (the Jordan–Wigner string).
pub fn ep_probe_components(state: &DoubledState) -> (Complex64, Complex64) {
    let l = state.l;
    let u = state.sign_vector();
    let lf = l as f64;
    let a: Complex64 = (0..l).map(|j| u[1 << j]).sum::<Complex64>() / lf.sqrt();
    let mut b = ZERO;
    for x in 0..l {
        for y in (x + 1)..l {
            let d = y - x;
            if d % 2 == 0 {
                continue;
            }
            // (x - y - 1)/2 = -(d + 1)/2
            let sign = if d.div_ceil(2) % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..l {
                if j == x || j == y {
                    continue;
                }
                let string = if x < j && j < y { -1.0 } else { 1.0 };
                b += sign * string * u[(1 << x) | (1 << y) | (1 << j)];
            }
        }
    }
    b *= Complex64::new(0.0, -2.0) / lf.powf(1.5);
    (a, b)
}

/// Probe ratio `Tr O_1 rho(T) / |Tr O_2 rho(T)|` with
/// `O_1 = e^{-i chi} (A + kappa B)` and `O_2 = A - alpha_+ B`.
///
/// The constant phase `chi` is fixed at `T = 0` so the ratio is real. For
/// `L = 4` the ratio is then exactly `R_0 cos(omega_even T)`.
pub struct EpProbe {
    kappa: Complex64,
    alpha_plus: f64,
    phase: Complex64,
}

impl EpProbe {
    /// Build the probe for `params` (requires `4 | L` and `g > 1`).
    pub fn new(params: &ModelParams) -> Result<Self> {
        let (l, g) = (params.l(), params.g());
        if l % 4 != 0 {
            return Err(Error::Unsupported(format!(
                "exceptional-point probe needs pi/2 in the PBC grid (L divisible by 4), got L = {l}"
            )));
        }
        if g <= 1.0 + EXCEPTIONAL_TOLERANCE {
            return Err(Error::Unsupported(format!("exceptional-point probe needs g > 1, got {g}")));
        }
        let kappa = ep_mixing(g);
        let (alpha_plus, _) = ep_alphas(g);
        let (a0, b0) = ep_probe_components(&DoubledState::all_zero(l)?);
        let o1 = a0 + kappa * b0;
        let phase = if o1.norm() > 0.0 { o1.conj() / o1.norm() } else { ONE };
        Ok(Self { kappa, alpha_plus, phase })
    }

    /// Evaluate the ratio on a state.
    pub fn ratio(&self, state: &DoubledState) -> Result<Complex64> {
        let (a, b) = ep_probe_components(state);
        let o2 = (a - self.alpha_plus * b).norm();
        if o2 < 1e-300 {
            return Err(Error::DegenerateState(o2));
        }
        Ok(self.phase * (a + self.kappa * b) / o2)
    }
}

/// Probe ratio at time `T` (Trotter evolution with `params.dt()`); the real
/// part is returned, the imaginary part being roundoff.
pub fn ep_probe_ratio(params: &ModelParams, t: f64) -> Result<f64> {
    let probe = EpProbe::new(params)?;
    let state = evolve_trotter(&DoubledState::all_zero(params.l())?, params, t)?;
    Ok(probe.ratio(&state)?.re)
}

/// Probe ratio on a grid of times `0, dt_sample, 2 dt_sample, ...` up to
/// `t_max`, sharing one Trotter trajectory.
pub fn ep_probe_series(params: &ModelParams, t_max: f64, dt_sample: f64) -> Result<Vec<(f64, f64)>> {
    let probe = EpProbe::new(params)?;
    let per_sample = (dt_sample / params.dt()).round().max(1.0) as usize;
    let mut state = DoubledState::all_zero(params.l())?;
    let mut out = Vec::new();
    let mut t = 0.0;
    while t <= t_max + 1e-12 {
        out.push((t, probe.ratio(&state)?.re));
        for _ in 0..per_sample {
            step_in_place(&mut state, params.theta(), params.p(), params.dt())?;
        }
        t += per_sample as f64 * params.dt();
    }
    Ok(out)
}

/// Apply `H = -sum tau^z_j tau^z_{j+1} - i sum g_j tau^x_j` (periodic) to a
/// vector in the `tau^z` basis.
pub fn apply_ctfim(fields: &[f64], x: &[Complex64], out: &mut [Complex64]) {
    let l = fields.len();
    for (a, o) in out.iter_mut().enumerate() {
        let bonds = bond_mask(a, l).count_ones() as f64;
        let mut acc = x[a] * -(l as f64 - 2.0 * bonds);
        for (j, &g) in fields.iter().enumerate() {
            if g != 0.0 {
                acc += Complex64::new(0.0, -g) * x[a ^ (1 << j)];
            }
        }
        *o = acc;
    }
}

/// `exp(-tau H(fields)) v`.
pub fn propagate_ctfim(fields: &[f64], v: &[Complex64], tau: f64) -> Vec<Complex64> {
    let l = fields.len();
    let bound = l as f64 + fields.iter().map(|g| g.abs()).sum::<f64>();
    expmv(|x, out| apply_ctfim(fields, x, out), v, -tau, bound)
}

/// Purity predicted by the disorder-sum identity:
///
/// ```text
/// Tr rho^2 = 2^{-L} sum_{g_j in {0, g}} || exp(-pT H({g_j})) |0> ||^2
///            / <0| exp(-2 pT H(0)) |0>
/// ```
///
/// evaluated with dense `2^L` propagation.
pub fn purity_disorder_sum(params: &ModelParams) -> Result<f64> {
    let l = params.l();
    check_sites(l)?;
    let dim = 1usize << l;
    let mut zero = vec![ZERO; dim];
    zero[0] = ONE;
    let pt = params.pt();
    let g = params.g();
    let mut total = 0.0;
    for config in 0..dim {
        let fields: Vec<f64> = (0..l).map(|j| if config >> j & 1 == 1 { g } else { 0.0 }).collect();
        let psi = propagate_ctfim(&fields, &zero, pt);
        total += norm(&psi).powi(2);
    }
    let reference = propagate_ctfim(&vec![0.0; l], &zero, 2.0 * pt)[0].re;
    Ok(total / dim as f64 / reference)
}

/// Ising parity sector of a dense ground state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// `prod tau^x = +1` (APBC fermions).
    Even,
    /// `prod tau^x = -1` (PBC fermions).
    Odd,
}

/// Lowest-real-energy eigenvector of `H(g)` in one parity sector, by
/// imaginary-time projection from the GHZ state of that sector.
///
/// `H` is complex symmetric, so the same vector serves as right and
/// (transposed) left eigenvector.
pub fn dense_ground_state(g: f64, l: usize, parity: Parity, tau: f64) -> Result<Vec<Complex64>> {
    check_sites(l)?;
    let dim = 1usize << l;
    let mut v = vec![ZERO; dim];
    let sign = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    v[0] = ONE;
    v[dim - 1] = Complex64::new(sign, 0.0);
    let fields = vec![g; l];
    let chunk = 2.0;
    let mut left = tau;
    while left > 0.0 {
        let step = left.min(chunk);
        v = propagate_ctfim(&fields, &v, step);
        let n = norm(&v);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Numerical("imaginary-time projection lost the state".into()));
        }
        v.iter_mut().for_each(|z| *z /= n);
        left -= step;
    }
    Ok(v)
}

/// `<tau^z_i tau^z_j>` in a dense vector: Hermitian (`v^dag O v / v^dag v`)
/// and biorthogonal (`v^T O v / v^T v`) forms.
pub fn dense_zz(v: &[Complex64], i: usize, j: usize) -> (Complex64, Complex64) {
    let mut herm = ZERO;
    let mut herm_norm = 0.0;
    let mut bi = ZERO;
    let mut bi_norm = ZERO;
    for (a, z) in v.iter().enumerate() {
        let s = if ((a >> i) ^ (a >> j)) & 1 == 0 { 1.0 } else { -1.0 };
        herm += s * z.norm_sqr();
        herm_norm += z.norm_sqr();
        bi += s * z * z;
        bi_norm += z * z;
    }
    (herm / herm_norm, bi / bi_norm)
}
