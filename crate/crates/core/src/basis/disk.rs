//! Dirichlet eigenbasis of the damped Laplacian on the unit disk.
//!
//! Modes are indexed by angular order m >= 0, radial index k >= 1 and a
//! cos/sin parity (m = 0 has only cos). With j = j_{m,k} the k-th positive
//! zero of J_m:
//!
//!   phi_{m,k}(r, theta) = c_{m,k} J_m(j r) * {cos(m theta), sin(m theta)}
//!   lambda_{m,k}        = -alpha^2 j^2 - gamma
//!
//! The normalization uses the closed form
//! integral_0^1 J_m(j r)^2 r dr = J_{m+1}(j)^2 / 2, making each mode unit
//! norm in L^2(disk).
//!
//! These eigenfunctions are Bessel radial profiles, not Zernike polynomials;
//! the classical Zernike radial polynomials R_n^m are provided separately
//! (`zernike_radial`) because they share the disk setting and show up in
//! noise models, but they are not eigenfunctions of the Laplacian.

use super::bessel::{bessel_j, bessel_zeros};
use crate::error::{Error, Result};
use crate::spectrum::{DissipativeSpectrum, Geometry, GeometryParams, ModeIndex, Parity};

/// Leading `cutoff` modes of the damped Dirichlet Laplacian on the unit
/// disk, sorted by descending eigenvalue with ties broken by
/// (|m| ascending, cos before sin, k ascending).
pub fn disk_spectrum(params: &GeometryParams, cutoff: usize) -> Result<DissipativeSpectrum> {
    params.validate()?;
    if cutoff == 0 {
        return Err(Error::InvalidParameter {
            name: "cutoff",
            message: "must be >= 1".into(),
        });
    }
    if cutoff > 2048 {
        return Err(Error::SizeLimit {
            what: "disk cutoff",
            got: cutoff,
            max: 2048,
        });
    }

    // Weyl counting gives ~ j_cap^2 / 4 modes below zero magnitude j_cap;
    // widen until enough candidates exist.
    let mut j_cap = 2.0 * (cutoff as f64).sqrt() + 10.0;
    loop {
        let mut candidates: Vec<(f64, u32, u32, Parity)> = Vec::new();
        let mut m = 0u32;
        loop {
            let zeros = zeros_below(m, j_cap)?;
            if zeros.is_empty() {
                break; // j_{m,1} grows with m, higher orders contribute nothing
            }
            for (i, &z) in zeros.iter().enumerate() {
                let k = i as u32 + 1;
                candidates.push((z, m, k, Parity::Cos));
                if m > 0 {
                    candidates.push((z, m, k, Parity::Sin));
                }
            }
            m += 1;
        }
        if candidates.len() >= cutoff {
            candidates.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .expect("finite zeros")
                    .then(a.1.cmp(&b.1))
                    .then(a.3.cmp(&b.3))
                    .then(a.2.cmp(&b.2))
            });
            candidates.truncate(cutoff);
            let a2 = params.alpha * params.alpha;
            let eigenvalues: Vec<f64> = candidates
                .iter()
                .map(|&(z, _, _, _)| -(a2 * (z * z)) - params.gamma)
                .collect();
            let modes: Vec<ModeIndex> = candidates
                .iter()
                .map(|&(_, m, k, parity)| ModeIndex::Disk { m, k, parity })
                .collect();
            return DissipativeSpectrum::from_sorted(Geometry::Disk, *params, eigenvalues, modes);
        }
        j_cap *= 1.3;
    }
}

/// Zeros of J_m that are <= cap, in increasing order.
fn zeros_below(m: u32, cap: f64) -> Result<Vec<f64>> {
    // first zero of order m exceeds m, so high orders are cheap to rule out
    if m as f64 > cap {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        k += 1;
        let zs = bessel_zeros(m, k)?;
        let z = zs[k as usize - 1];
        if z > cap {
            return Ok(out);
        }
        out.push(z);
    }
}

/// The radial zero j_{m,k} and L^2 normalization constant of a disk mode.
pub(crate) fn disk_mode_constants(m: u32, k: u32) -> Result<(f64, f64)> {
    let zeros = bessel_zeros(m, k)?;
    let j = zeros[k as usize - 1];
    let radial_sq = bessel_j(m + 1, j)?.powi(2) / 2.0; // integral_0^1 J_m(j r)^2 r dr
    let angular = if m == 0 {
        2.0 * std::f64::consts::PI
    } else {
        std::f64::consts::PI
    };
    let c = 1.0 / (angular * radial_sq).sqrt();
    Ok((j, c))
}

/// Value of a unit-norm disk eigenfunction at polar coordinates
/// (r, theta), r in [0, 1].
pub fn disk_eigenfunction(mode: &ModeIndex, r: f64, theta: f64) -> Result<f64> {
    let (m, k, parity) = match mode {
        ModeIndex::Disk { m, k, parity } => (*m, *k, *parity),
        _ => {
            return Err(Error::InvalidParameter {
                name: "mode",
                message: format!("expected a disk mode, got {}", mode.label()),
            })
        }
    };
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter {
            name: "r",
            message: format!("radius must lie in [0, 1], got {r}"),
        });
    }
    if m == 0 && parity == Parity::Sin {
        return Err(Error::InvalidParameter {
            name: "mode",
            message: "sin parity requires m >= 1".into(),
        });
    }
    let (j, c) = disk_mode_constants(m, k)?;
    let radial = bessel_j(m, j * r)?;
    let ang = match parity {
        Parity::Cos => (m as f64 * theta).cos(),
        Parity::Sin => (m as f64 * theta).sin(),
    };
    Ok(c * radial * ang)
}

pub(crate) use disk_mode_constants as mode_constants;

/// Classical Zernike radial polynomial R_n^m on [0, 1].
///
/// R_n^m(r) = sum_s (-1)^s (n-s)! / (s! ((n+m)/2 - s)! ((n-m)/2 - s)!)
///            r^{n-2s},  s = 0 .. (n-m)/2.
///
/// Requires m <= n and n - m even. Coefficients are built as f64 factorial
/// ratios; n is capped at 60 to keep them exact to rounding.
pub fn zernike_radial(n: u32, m: u32, r: f64) -> Result<f64> {
    if m > n || (n - m) % 2 != 0 {
        return Err(Error::InvalidParameter {
            name: "n,m",
            message: format!("requires m <= n and n - m even, got n={n}, m={m}"),
        });
    }
    if n > 60 {
        return Err(Error::SizeLimit {
            what: "Zernike degree",
            got: n as usize,
            max: 60,
        });
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter {
            name: "r",
            message: format!("radius must lie in [0, 1], got {r}"),
        });
    }
    let shalf = ((n - m) / 2) as i64;
    let phalf = ((n + m) / 2) as i64;
    let nn = n as i64;
    let mut sum = 0.0_f64;
    for s in 0..=shalf {
        let num = factorial(nn - s);
        let den = factorial(s) * factorial(phalf - s) * factorial(shalf - s);
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (num / den) * r.powi((nn - 2 * s) as i32);
    }
    Ok(sum)
}

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, v| acc * v as f64)
}
