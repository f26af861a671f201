//! Quantum harmonic oscillator eigenbasis in d = 1, 2, or 3 dimensions.
//!
//! One-dimensional Hermite functions are generated by the normalized
//! recurrence
//!
//!   psi_0(x)     = pi^{-1/4} exp(-x^2/2)
//!   psi_{n+1}(x) = x sqrt(2/(n+1)) psi_n(x) - sqrt(n/(n+1)) psi_{n-1}(x)
//!
//! which keeps every intermediate at unit L^2 scale (no factorials, no
//! overflow up to n = 200, |x| = 30). Multi-dimensional modes are tensor
//! products with level s = |n| = n_1 + ... + n_d and eigenvalue
//! lambda = -(s + d/2) - gamma, degenerate with multiplicity C(s+d-1, d-1).

use crate::error::{Error, Result};
use crate::spectrum::{DissipativeSpectrum, Geometry, GeometryParams, ModeIndex};

pub const MAX_HERMITE_INDEX: u32 = 200;
pub const MAX_HERMITE_ARG: f64 = 30.0;

/// Unit-norm Hermite function psi_n(x), n <= 200, |x| <= 30.
pub fn hermite_function(n: u32, x: f64) -> Result<f64> {
    if n > MAX_HERMITE_INDEX {
        return Err(Error::SizeLimit {
            what: "Hermite index",
            got: n as usize,
            max: MAX_HERMITE_INDEX as usize,
        });
    }
    if !x.is_finite() || x.abs() > MAX_HERMITE_ARG {
        return Err(Error::InvalidParameter {
            name: "x",
            message: format!(
                "argument must lie in [-{MAX_HERMITE_ARG}, {MAX_HERMITE_ARG}], got {x}"
            ),
        });
    }
    let gauss = (-0.5 * x * x).exp();
    let mut prev = 0.0_f64;
    let mut cur = std::f64::consts::PI.powf(-0.25) * gauss;
    for k in 0..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Polynomial part h_n(x) = psi_n(x) exp(x^2 / 2), generated by the same
/// recurrence without the Gaussian. Used with Gauss-Hermite weights, where
/// the exp(-x^2) factor lives in the rule: integral psi_a psi_b dx equals
/// sum_i w_i h_a(x_i) h_b(x_i) exactly for a + b below the rule's degree.
pub(crate) fn hermite_poly_normalized(n: u32, x: f64) -> Result<f64> {
    if n > MAX_HERMITE_INDEX {
        return Err(Error::SizeLimit {
            what: "Hermite index",
            got: n as usize,
            max: MAX_HERMITE_INDEX as usize,
        });
    }
    let mut prev = 0.0_f64;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    for k in 0..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Leading `cutoff` oscillator modes: levels ascending, within a level
/// multi-indices in lexicographic order. d must be 1, 2, or 3.
///
/// Any gamma > 0 is accepted; configurations with gamma <= d/2 damp slower
/// than the ground level spacing, which callers may want to flag, but the
/// spectrum itself is well defined for all positive gamma.
pub fn oscillator_spectrum(params: &GeometryParams, cutoff: usize) -> Result<DissipativeSpectrum> {
    params.validate()?;
    let d = params.d;
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidParameter {
            name: "d",
            message: format!("oscillator dimension must be 1, 2, or 3, got {d}"),
        });
    }
    if cutoff == 0 {
        return Err(Error::InvalidParameter {
            name: "cutoff",
            message: "must be >= 1".into(),
        });
    }
    if cutoff > 4096 {
        return Err(Error::SizeLimit {
            what: "oscillator cutoff",
            got: cutoff,
            max: 4096,
        });
    }

    let mut eigenvalues = Vec::with_capacity(cutoff);
    let mut modes = Vec::with_capacity(cutoff);
    let mut level = 0u32;
    while modes.len() < cutoff {
        let lam = -(level as f64 + d as f64 / 2.0) - params.gamma;
        for n in multi_indices(level, d) {
            if modes.len() == cutoff {
                break;
            }
            eigenvalues.push(lam);
            modes.push(ModeIndex::Oscillator { n });
        }
        level += 1;
        if level > MAX_HERMITE_INDEX {
            return Err(Error::SizeLimit {
                what: "oscillator level",
                got: level as usize,
                max: MAX_HERMITE_INDEX as usize,
            });
        }
    }
    DissipativeSpectrum::from_sorted(Geometry::Oscillator, *params, eigenvalues, modes)
}

/// All d-tuples of nonnegative integers summing to `level`, lexicographically
/// ascending.
fn multi_indices(level: u32, d: u32) -> Vec<Vec<u32>> {
    match d {
        1 => vec![vec![level]],
        _ => {
            let mut out = Vec::new();
            for first in 0..=level {
                for mut rest in multi_indices(level - first, d - 1) {
                    let mut v = Vec::with_capacity(d as usize);
                    v.push(first);
                    v.append(&mut rest);
                    out.push(v);
                }
            }
            out
        }
    }
}
