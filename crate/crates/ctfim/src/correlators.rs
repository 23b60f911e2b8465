//! Ground-state spin–spin correlators of the cTFIM by Wick's theorem.
//!
//! After a rotation of the spin axes the effective generator reads
//! `H = -sum_l X_l X_{l+1} - i g sum_l Z_l`, and the Jordan–Wigner fermions
//! `c_l` give Majoranas `A_l = c_l + c_l^dag`, `B_l = -i (c_l - c_l^dag)` with
//! `X_l X_{l+1} = -i B_l A_{l+1}`. The two-point function of the original
//! `tau^z` spins becomes a Majorana string,
//!
//! ```text
//! C(i, j) = (-i)^r <B_i A_{i+1} B_{i+1} A_{i+2} ... B_{j-1} A_j>,   r = j - i,
//! ```
//!
//! which Wick's theorem turns into the Pfaffian of the `2r x 2r` matrix of
//! pair contractions. The contractions follow from momentum sums over the
//! ground-state sector:
//!
//! ```text
//! F(r) = <c_r c_0>   = -(2i/L) sum_k sin(kr) P_k
//! G(r) = <c_r c_0^dag> = (1/L) [ sum_k 2 cos(kr) (1 - N_k) + (-1)^r [pi mode] ]
//! ```
//!
//! with `v_k = (2ig - 2cos k - eps_k) / (2i sin k)`. For the Hermitian norm
//! `P_k = v/(1+|v|^2)`, `N_k = |v|^2/(1+|v|^2)`. For the biorthogonal
//! (left/right) norm `P_k = v/(1-v^2)`, `N_k = -v^2/(1-v^2)`.
//!
//! Both `H` terms couple `A` to `B` only. In the biorthogonal
//! ground state the `AA` and `BB` contractions therefore vanish, and the
//! Pfaffian collapses to the Toeplitz determinant of `<B_a A_b>`; that is
//! how [`bicorrelator`] is evaluated.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_grid, MomentumGrid, Sector};
use crate::spectrum::{eps_half_pi, eps_plus, vacuum_energy, EXCEPTIONAL_TOLERANCE};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative asymmetry above which [`pfaffian`] refuses its input.
pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-12;

/// Which inner product defines the ground-state expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inner {
    /// `<0|O|0> / <0|0>` with the usual Hermitian conjugate.
    Hermitian,
    /// `<0_L|O|0_R> / <0_L|0_R>` with left and right eigenvectors.
    Biorthogonal,
}

/// Momentum-space data of one sector's ground state: the pair amplitudes
/// and occupations entering `F` and `G`.
#[derive(Clone, Debug)]
pub struct Contractions {
    l: usize,
    inner: Inner,
    grid: MomentumGrid,
    pair: Vec<Complex64>,
    occupation: Vec<Complex64>,
}

impl Contractions {
    /// Build the contractions for `g`, chain length `l`, `sector` and `inner`.
    pub fn new(g: f64, l: usize, sector: Sector, inner: Inner) -> Result<Self> {
        let grid = build_grid(l, sector)?;
        if grid.has_half_pi() && (g - 1.0).abs() < EXCEPTIONAL_TOLERANCE {
            return Err(Error::ExceptionalPoint(
                "correlators are not defined at g = 1 with pi/2 in the sector".into(),
            ));
        }
        let mut pair = Vec::with_capacity(grid.len());
        let mut occupation = Vec::with_capacity(grid.len());
        for m in grid.momenta() {
            let k = m.radians();
            let (cos_k, eps) = if m.is_half_pi() { (0.0, eps_half_pi(g)) } else { (k.cos(), eps_plus(g, k)) };
            let a = Complex64::new(-2.0 * cos_k, 2.0 * g);
            let v = (a - eps) / (2.0 * I * k.sin());
            let (p, n) = match inner {
                Inner::Hermitian => {
                    let norm = 1.0 + v.norm_sqr();
                    (v / norm, Complex64::new(v.norm_sqr() / norm, 0.0))
                }
                Inner::Biorthogonal => {
                    let norm = 1.0 - v * v;
                    if norm.norm() < 1e-14 {
                        return Err(Error::ExceptionalPoint(format!(
                            "biorthogonal norm vanishes at k = {k}"
                        )));
                    }
                    (v / norm, -v * v / norm)
                }
            };
            pair.push(p);
            occupation.push(n);
        }
        Ok(Self { l, inner, grid, pair, occupation })
    }

    /// `F(r) = <c_r c_0>`.
    pub fn f(&self, r: i64) -> Complex64 {
        let s: Complex64 = self
            .grid
            .radians()
            .zip(&self.pair)
            .map(|(k, p)| (k * r as f64).sin() * p)
            .sum();
        -2.0 * I * s / self.l as f64
    }

    /// `G(r) = <c_r c_0^dag>`.
    pub fn g(&self, r: i64) -> Complex64 {
        let mut s: Complex64 = self
            .grid
            .radians()
            .zip(&self.occupation)
            .map(|(k, n)| 2.0 * (k * r as f64).cos() * (1.0 - n))
            .sum();
        if self.grid.has_pi() {
            s += if r.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        }
        s / self.l as f64
    }

    /// `<c_x^dag c_y^dag>` as a function of `r = x - y`.
    fn anomalous_dagger(&self, r: i64) -> Complex64 {
        match self.inner {
            Inner::Hermitian => self.f(-r).conj(),
            Inner::Biorthogonal => {
                let s: Complex64 = self
                    .grid
                    .radians()
                    .zip(&self.pair)
                    .map(|(k, p)| (k * r as f64).sin() * p)
                    .sum();
                2.0 * I * s / self.l as f64
            }
        }
    }

    /// Contraction `<m_p m_q>` of two Majoranas at sites `x`, `y`.
    pub fn majorana(&self, p: Majorana, x: i64, q: Majorana, y: i64) -> Complex64 {
        // (c, c^dag) coefficients: A = c + c^dag, B = -i c + i c^dag.
        let coef = |m: Majorana| match m {
            Majorana::A => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
            Majorana::B => (-I, I),
        };
        let (p0, p1) = coef(p);
        let (q0, q1) = coef(q);
        let cc = self.f(x - y);
        let ccd = self.g(x - y);
        let cdc = if x == y { 1.0 - self.g(0) } else { -self.g(y - x) };
        let cdcd = self.anomalous_dagger(x - y);
        p0 * q0 * cc + p0 * q1 * ccd + p1 * q0 * cdc + p1 * q1 * cdcd
    }
}

/// Majorana species.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Majorana {
    /// `c + c^dag`.
    A,
    /// `-i (c - c^dag)`.
    B,
}

/// `(F(r), G(r))` for the given sector and inner product.
pub fn elementary_fg(g: f64, l: usize, sector: Sector, r: i64, inner: Inner) -> Result<(Complex64, Complex64)> {
    let c = Contractions::new(g, l, sector, inner)?;
    Ok((c.f(r), c.g(r)))
}

/// Sector whose many-body ground state has the smaller real energy.
///
/// Exact ties (odd `L` conjugate pairs, or `g = 0`) resolve to APBC.
pub fn ground_sector(g: f64, l: usize) -> Result<Sector> {
    let ea = vacuum_energy(g, &build_grid(l, Sector::Apbc)?).re;
    let ep = vacuum_energy(g, &build_grid(l, Sector::Pbc)?).re;
    let tie = 1e-12 * ea.abs().max(ep.abs()).max(1.0);
    Ok(if ep < ea - tie { Sector::Pbc } else { Sector::Apbc })
}

/// Wick matrix of the Majorana string `B_i A_{i+1} ... B_{j-1} A_j`
/// (ordered pairs of sites, `2r x 2r`, antisymmetric by construction).
#[derive(Clone, Debug)]
pub struct WickMatrix {
    /// The matrix `K_{pq} = <m_p m_q>` for `p < q`, `K_{qp} = -K_{pq}`.
    pub k: DMatrix<Complex64>,
    /// Separation `r = j - i`.
    pub r: usize,
}

impl WickMatrix {
    /// Assemble from contractions for sites `i < j`.
    pub fn new(c: &Contractions, i: usize, j: usize) -> Self {
        let r = j - i;
        let string: Vec<(Majorana, i64)> = (i..j)
            .flat_map(|s| [(Majorana::B, s as i64), (Majorana::A, s as i64 + 1)])
            .collect();
        let n = string.len();
        let mut k = DMatrix::from_element(n, n, ZERO);
        for p in 0..n {
            for q in (p + 1)..n {
                let (mp, xp) = string[p];
                let (mq, xq) = string[q];
                let v = c.majorana(mp, xp, mq, xq);
                k[(p, q)] = v;
                k[(q, p)] = -v;
            }
        }
        Self { k, r }
    }
}

/// Pfaffian of an antisymmetric matrix by Parlett–Reid elimination with
/// partial pivoting; row/column swaps flip the sign.
pub fn pfaffian(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Matrix(format!("pfaffian needs a square matrix, got {n}x{}", a.ncols())));
    }
    if n % 2 == 1 {
        return Err(Error::Matrix(format!("pfaffian of odd dimension {n}")));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for p in 0..n {
        for q in p..n {
            if (a[(p, q)] + a[(q, p)]).norm() > ANTISYMMETRY_TOLERANCE * scale {
                return Err(Error::Matrix(format!("matrix is not antisymmetric at ({p}, {q})")));
            }
        }
    }
    let mut m = a.clone();
    let mut result = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        // Pivot: largest entry in row k to the right of the diagonal.
        let (pivot, _) = (k + 1..n)
            .map(|c| (c, m[(k, c)].norm()))
            .fold((k + 1, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot != k + 1 {
            m.swap_rows(k + 1, pivot);
            m.swap_columns(k + 1, pivot);
            result = -result;
        }
        let head = m[(k, k + 1)];
        if head == ZERO {
            return Ok(ZERO);
        }
        result *= head;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|c| m[(k, c)] / head).collect();
            let row: Vec<Complex64> = (k + 2..n).map(|c| m[(k + 1, c)]).collect();
            for (ii, p) in (k + 2..n).enumerate() {
                for (jj, q) in (k + 2..n).enumerate() {
                    m[(p, q)] += row[ii] * tau[jj] - tau[ii] * row[jj];
                }
            }
        }
        k += 2;
    }
    Ok(result)
}

fn check_sites(l: usize, i: usize, j: usize) -> Result<()> {
    if !(i < j && j < l) {
        return Err(Error::invalid("sites", format!("need 0 <= i < j < L = {l}, got ({i}, {j})")));
    }
    Ok(())
}

/// `C(i, j)` in a given sector and inner product, by Pfaffian.
pub fn spin_correlator_in(g: f64, l: usize, i: usize, j: usize, sector: Sector, inner: Inner) -> Result<Complex64> {
    check_sites(l, i, j)?;
    let c = Contractions::new(g, l, sector, inner)?;
    let w = WickMatrix::new(&c, i, j);
    Ok(I.powi(-(w.r as i32)) * pfaffian(&w.k)?)
}

/// Hermitian ground-state correlator `<tau^z_i tau^z_j>` in the ground
/// sector (see [`ground_sector`]).
///
/// For odd `L` the ground state is one member of a conjugate pair; its
/// correlator is returned as is, and the real part is the pair average.
pub fn spin_correlator(g: f64, l: usize, i: usize, j: usize) -> Result<Complex64> {
    spin_correlator_in(g, l, i, j, ground_sector(g, l)?, Inner::Hermitian)
}

/// Biorthogonal correlator `<0_L| tau^z_i tau^z_j |0_R>` in a given sector,
/// as the Toeplitz determinant `(-i)^r det[<B_{i+a} A_{i+b+1}>]`.
pub fn bicorrelator_in(g: f64, l: usize, i: usize, j: usize, sector: Sector) -> Result<Complex64> {
    check_sites(l, i, j)?;
    let c = Contractions::new(g, l, sector, Inner::Biorthogonal)?;
    let r = j - i;
    let m = DMatrix::from_fn(r, r, |a, b| {
        c.majorana(Majorana::B, (i + a) as i64, Majorana::A, (i + b + 1) as i64)
    });
    Ok(I.powi(-(r as i32)) * m.determinant())
}

/// Bicorrelator in the ground sector.
pub fn bicorrelator(g: f64, l: usize, i: usize, j: usize) -> Result<Complex64> {
    bicorrelator_in(g, l, i, j, ground_sector(g, l)?)
}

/// Fitted form of a correlator curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FitKind {
    /// `amplitude * exp(-r / xi) + constant`.
    ExponentialPlusConstant {
        /// Prefactor `A`.
        amplitude: f64,
        /// Correlation length.
        xi: f64,
        /// Long-distance plateau.
        constant: f64,
    },
    /// `amplitude / x^exponent`.
    PowerLaw {
        /// Prefactor `A`.
        amplitude: f64,
        /// Decay exponent `alpha`.
        exponent: f64,
    },
}

/// A fit with its root-mean-square residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorFit {
    /// Fitted form and parameters.
    pub kind: FitKind,
    /// RMS residual (in log space for the power law).
    pub residual: f64,
}

fn check_fit_data(x: &[f64], y: &[f64], needed: usize) -> Result<()> {
    if x.len() != y.len() || x.len() < needed {
        return Err(Error::invalid(
            "data",
            format!("need {needed}+ paired points, got {} and {}", x.len(), y.len()),
        ));
    }
    Ok(())
}

/// Least-squares power law `y = A / x^alpha` (linear fit of `ln|y|` on `ln x`).
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<CorrelatorFit> {
    check_fit_data(x, y, 2)?;
    if x.iter().any(|v| *v <= 0.0) || y.contains(&0.0) {
        return Err(Error::invalid("data", "power-law fit needs x > 0 and y != 0"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let (slope, intercept, rms) = linear_fit(&lx, &ly);
    Ok(CorrelatorFit {
        kind: FitKind::PowerLaw { amplitude: intercept.exp(), exponent: -slope },
        residual: rms,
    })
}

/// Ordinary least squares `y = slope x + intercept`; returns RMS residual too.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum::<f64>() / n).sqrt();
    (slope, intercept, rms)
}

/// For fixed `xi`, the best `(A, C)` and the RMS residual.
fn exp_const_at(xi: f64, r: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let e: Vec<f64> = r.iter().map(|v| (-v / xi).exp()).collect();
    let (a, c, rms) = linear_fit(&e, y);
    (a, c, rms)
}

/// Least-squares fit `y = A exp(-r/xi) + C`. For each `xi` the linear
/// parameters are solved exactly; `xi` is found by a log-spaced scan
/// followed by golden-section refinement.
pub fn fit_exponential_plus_constant(r: &[f64], y: &[f64]) -> Result<CorrelatorFit> {
    check_fit_data(r, y, 3)?;
    let cost = |log_xi: f64| exp_const_at(log_xi.exp(), r, y).2;
    let (lo, hi) = (0.01f64.ln(), 1e4f64.ln());
    let n = 400;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let best = (0..=n)
        .min_by(|&a, &b| cost(grid[a]).total_cmp(&cost(grid[b])))
        .expect("non-empty grid");
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let xi = (0.5 * (a + b)).exp();
    let (amplitude, constant, residual) = exp_const_at(xi, r, y);
    Ok(CorrelatorFit { kind: FitKind::ExponentialPlusConstant { amplitude, xi, constant }, residual })
}

/// `C(0, r)` (real part) for `r` in the fit window `[2, L/2 - 2]`.
pub fn correlation_profile(g: f64, l: usize) -> Result<Vec<(usize, f64)>> {
    let sector = ground_sector(g, l)?;
    let c = Contractions::new(g, l, sector, Inner::Hermitian)?;
    let hi = (l / 2).saturating_sub(2);
    if hi < 2 {
        return Err(Error::invalid("L", format!("fit window [2, L/2-2] is empty for L = {l}")));
    }
    (2..=hi)
        .map(|r| {
            let w = WickMatrix::new(&c, 0, r);
            Ok((r, (I.powi(-(r as i32)) * pfaffian(&w.k)?).re))
        })
        .collect()
}

/// Magnetization estimate `sqrt(C(0, L/2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Magnetization {
    /// `sqrt(Re C(0, L/2))`, or 0 when that is negative.
    pub value: f64,
    /// The same from the bicorrelator.
    pub from_bicorrelator: f64,
    /// Largest imaginary residue seen in the two correlators.
    pub imaginary_residue: f64,
    /// Set when a negative correlator was clamped to zero.
    pub clamped: bool,
}

/// Magnetization estimated from the half-chain correlators (even `L`).
pub fn magnetization_estimate(g: f64, l: usize) -> Result<Magnetization> {
    if l % 2 == 1 {
        return Err(Error::invalid("L", format!("magnetization estimate needs even L, got {l}")));
    }
    let c = spin_correlator(g, l, 0, l / 2)?;
    let b = bicorrelator(g, l, 0, l / 2)?;
    let root = |x: f64| if x < 0.0 { (0.0, true) } else { (x.sqrt(), false) };
    let (value, c1) = root(c.re);
    let (from_bicorrelator, c2) = root(b.re);
    Ok(Magnetization {
        value,
        from_bicorrelator,
        imaginary_residue: c.im.abs().max(b.im.abs()),
        clamped: c1 || c2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pfaffian_small_closed_forms() {
        let a = DMatrix::from_row_slice(2, 2, &[c(0.0), c(3.5), c(-3.5), c(0.0)]);
        assert_abs_diff_eq!(pfaffian(&a).unwrap().re, 3.5);
        let (a12, a13, a14, a23, a24, a34) = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                c(0.0), c(a12), c(a13), c(a14),
                c(-a12), c(0.0), c(a23), c(a24),
                c(-a13), c(-a23), c(0.0), c(a34),
                c(-a14), c(-a24), c(-a34), c(0.0),
            ],
        );
        assert_abs_diff_eq!(pfaffian(&m).unwrap().re, a12 * a34 - a13 * a24 + a14 * a23, epsilon = 1e-12);
    }

    #[test]
    fn pfaffian_rejects_bad_input() {
        let odd = DMatrix::from_element(3, 3, ZERO);
        assert!(matches!(pfaffian(&odd), Err(Error::Matrix(_))));
        let sym = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        assert!(matches!(pfaffian(&sym), Err(Error::Matrix(_))));
    }

    fn antisymmetric(n: usize, entries: &[(f64, f64)]) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(n, n, ZERO);
        let mut it = entries.iter().cycle();
        for p in 0..n {
            for q in (p + 1)..n {
                let (re, im) = *it.next().unwrap();
                m[(p, q)] = Complex64::new(re, im);
                m[(q, p)] = -Complex64::new(re, im);
            }
        }
        m
    }

    proptest! {
        #[test]
        fn pfaffian_squares_to_determinant(
            half in 1usize..5,
            entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 45),
        ) {
            let m = antisymmetric(2 * half, &entries);
            let pf = pfaffian(&m).unwrap();
            let det = m.determinant();
            prop_assert!((pf * pf - det).norm() <= 1e-10 * det.norm().max(1e-3));
        }

        #[test]
        fn pfaffian_transforms_with_determinant(
            entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 15),
            perm_seed in 0usize..720,
            flips in proptest::collection::vec(proptest::bool::ANY, 6),
        ) {
            // Pf(P^T A P) = det(P) Pf(A) for signed permutations P.
            let a = antisymmetric(6, &entries);
            let mut perm: Vec<usize> = (0..6).collect();
            let mut seed = perm_seed;
            for i in (1..6).rev() {
                perm.swap(i, seed % (i + 1));
                seed /= i + 1;
            }
            let p = DMatrix::from_fn(6, 6, |r, col| {
                if perm[col] == r { c(if flips[col] { -1.0 } else { 1.0 }) } else { ZERO }
            });
            let lhs = pfaffian(&(p.transpose() * &a * &p)).unwrap();
            let rhs = p.determinant() * pfaffian(&a).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn free_limit_is_ferromagnetic() {
        for l in [6, 7, 8] {
            for (i, j) in [(0, 1), (1, 4), (0, l - 1)] {
                assert_abs_diff_eq!(spin_correlator(0.0, l, i, j).unwrap().re, 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(bicorrelator(0.0, l, i, j).unwrap().re, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn f_is_odd_and_vanishes_at_zero() {
        let c = Contractions::new(0.7, 12, Sector::Apbc, Inner::Hermitian).unwrap();
        assert_abs_diff_eq!(c.f(0).norm(), 0.0);
        for r in 1..6 {
            assert!((c.f(r) + c.f(-r)).norm() < 1e-14);
        }
        // Sum rule: <c_0 c_0^dag> + <c_0^dag c_0> = 1 holds term by term.
        let (f0, g0) = elementary_fg(0.7, 12, Sector::Pbc, 0, Inner::Hermitian).unwrap();
        assert_abs_diff_eq!(f0.norm(), 0.0);
        assert!(g0.re > 0.0 && g0.re < 1.0);
        assert_abs_diff_eq!(g0.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn translation_invariance() {
        for g in [0.5, 2.0] {
            let base = spin_correlator(g, 12, 0, 3).unwrap();
            for i in 1..9 {
                assert!((spin_correlator(g, 12, i, i + 3).unwrap() - base).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn determinant_route_matches_pfaffian_route() {
        for g in [0.5, 2.0, 4.0] {
            for sector in [Sector::Apbc, Sector::Pbc] {
                for (i, j) in [(0, 1), (0, 4), (2, 7)] {
                    let det = bicorrelator_in(g, 10, i, j, sector).unwrap();
                    let pf = spin_correlator_in(g, 10, i, j, sector, Inner::Biorthogonal).unwrap();
                    assert!((det - pf).norm() < 1e-12, "g={g} {sector} ({i},{j}): {det} vs {pf}");
                }
            }
        }
    }

    #[test]
    fn exceptional_point_is_refused() {
        // L = 8 puts pi/2 in the PBC grid; the APBC sector is regular.
        let pbc = spin_correlator_in(1.0, 8, 0, 2, Sector::Pbc, Inner::Hermitian);
        assert!(matches!(pbc, Err(Error::ExceptionalPoint(_))));
        assert!(spin_correlator_in(1.0, 8, 0, 2, Sector::Apbc, Inner::Hermitian).is_ok());
        assert!(spin_correlator(1.0, 7, 0, 2).is_ok());
    }

    #[test]
    fn sites_are_validated() {
        assert!(spin_correlator(0.5, 8, 3, 3).is_err());
        assert!(spin_correlator(0.5, 8, 2, 8).is_err());
    }

    #[test]
    fn fits_recover_synthetic_parameters() {
        let r: Vec<f64> = (2..30).map(|v| v as f64).collect();
        let y: Vec<f64> = r.iter().map(|v| 0.3 * (-v / 4.5).exp() + 0.8).collect();
        match fit_exponential_plus_constant(&r, &y).unwrap().kind {
            FitKind::ExponentialPlusConstant { amplitude, xi, constant } => {
                assert_abs_diff_eq!(amplitude, 0.3, epsilon = 1e-6);
                assert_abs_diff_eq!(xi, 4.5, epsilon = 1e-5);
                assert_abs_diff_eq!(constant, 0.8, epsilon = 1e-8);
            }
            other => panic!("unexpected {other:?}"),
        }
        let x = [32.0, 64.0, 128.0, 256.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 2.0 * v.powf(-0.5)).collect();
        match fit_power_law(&x, &y).unwrap().kind {
            FitKind::PowerLaw { amplitude, exponent } => {
                assert_abs_diff_eq!(amplitude, 2.0, epsilon = 1e-12);
                assert_abs_diff_eq!(exponent, 0.5, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn magnetization_limits() {
        let m = magnetization_estimate(0.0, 16).unwrap();
        assert_abs_diff_eq!(m.value, 1.0, epsilon = 1e-12);
        assert!(!m.clamped);
        assert!(magnetization_estimate(0.5, 15).is_err());
    }
}
