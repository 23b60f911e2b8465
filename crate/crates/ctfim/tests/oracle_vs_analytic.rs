//! Cross-checks of the free-fermion string expectation against the
//! brute-force channel, evolved exactly in continuous time.

use ctfim::edoracle::{evolve_continuum, string_observable, DoubledState};
use ctfim::model::ModelParams;
use ctfim::observable::string_expectation;

/// Continuum evolution is exact to roundoff, and the free-fermion formula
/// is exact, so the two agree to near machine precision.
const EXACT_TOL: f64 = 1e-10;

fn compare(g: f64, l: usize) {
    let p = ModelParams::from_g(g, 1.0, l).unwrap();
    let mut state = DoubledState::all_zero(l).unwrap();
    let mut t = 0.0;
    for _ in 0..8 {
        state = evolve_continuum(&state, &p, 0.35).unwrap();
        t += 0.35;
        let oracle = string_observable(&state).unwrap();
        let analytic = string_expectation(&p.with_time(t).unwrap()).unwrap().value;
        assert!(
            (oracle - analytic).abs() < EXACT_TOL,
            "g={g} L={l} T={t}: oracle {oracle} analytic {analytic}"
        );
    }
}

#[test]
fn odd_chains_match() {
    for g in [0.5, 1.0, 2.0] {
        compare(g, 3);
        compare(g, 5);
    }
}

#[test]
fn even_chains_match() {
    for g in [0.5, 1.0, 2.0] {
        compare(g, 4);
        compare(g, 6);
    }
}

#[test]
fn two_site_chain_matches() {
    for g in [0.5, 2.0] {
        compare(g, 2);
    }
}
