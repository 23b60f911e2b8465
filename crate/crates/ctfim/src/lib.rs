//! Dissipative dynamics of a spin chain under rotations and ZZ dephasing,
//! solved through its complex-field Ising description.
//!
//! A chain of `L` qubits is rotated about `x` at rate `theta` and dephased on
//! every bond at rate `p`. The global string `prod_j sigma^z_j` then evolves
//! exactly as the imaginary-time return amplitude of a transverse-field Ising
//! chain with a purely imaginary field `i g`, `g = theta / p`:
//!
//! ```text
//! <prod sigma^z>(T) = e^{-pTL} <0| exp(-pT H(g)) |0> / norm,
//! H(g) = -sum_j tau^z_j tau^z_{j+1} - i g sum_j tau^x_j.
//! ```
//!
//! `H(g)` is free-fermion solvable, and its spectrum has an exceptional point
//! at `g = 1, k = pi/2` that separates an overdamped (`g < 1`) from an
//! underdamped (`g > 1`) phase.
//!
//! Modules:
//!
//! * [`model`] — parameters, momentum grids, the square-root branch.
//! * [`spectrum`] — complex dispersion, Bogoliubov data, vacuum energies.
//! * [`observable`] — exact string expectation as a product over momenta.
//! * [`asymptotics`] — late-time rates, frequencies and scaling datasets.
//! * [`edoracle`] — brute-force channel simulation in the doubled space.
//! * [`correlators`] — Pfaffian string correlators and bicorrelators.
//! * [`meanfield`] — saddle points of the higher-dimensional path integral.
//! * [`analysis`] — frequency/decay extraction and scaling collapse.
//! * [`cli`] — the `ctfim` command-line front end.
//!
//! ```
//! use ctfim::model::ModelParams;
//! use ctfim::observable::string_expectation;
//!
//! let params = ModelParams::from_g(2.0, 1.0, 5)?.with_time(0.0)?;
//! assert!((string_expectation(&params)?.value - 1.0).abs() < 1e-14);
//! # Ok::<(), ctfim::Error>(())
//! ```

pub mod analysis;
pub mod asymptotics;
pub mod cli;
pub mod correlators;
pub mod edoracle;
pub mod error;
pub mod linalg;
pub mod meanfield;
pub mod model;
pub mod observable;
pub mod spectrum;

pub use error::{Error, Result};

/// Every chapter of the book, compiled as doctests so its snippets stay in
/// sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/observable.md")]
    mod observable {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/correlators.md")]
    mod correlators {}
    #[doc = include_str!("../../../book/src/meanfield.md")]
    mod meanfield {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
