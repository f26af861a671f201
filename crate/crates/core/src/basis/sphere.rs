//! Real spherical harmonic eigenbasis on the unit sphere.
//!
//! lambda_l = -alpha^2 l (l + 1) - gamma, each degree l carrying 2l + 1
//! orders m in [-l, l]. Real harmonics:
//!
//!   Y_l^0          = Pbar_l^0(cos theta)
//!   Y_l^m  (m > 0) = sqrt(2) Pbar_l^m(cos theta) cos(m phi)
//!   Y_l^m  (m < 0) = sqrt(2) Pbar_l^{|m|}(cos theta) sin(|m| phi)
//!
//! where Pbar is the fully normalized associated Legendre function,
//! generated by recurrences that keep every intermediate at unit scale
//! (no factorial ratios, so no overflow for any supported degree):
//!
//!   Pbar_0^0 = sqrt(1 / 4 pi)
//!   Pbar_m^m = -sqrt((2m + 1) / 2m) sin(theta) Pbar_{m-1}^{m-1}
//!   Pbar_{m+1}^m = sqrt(2m + 3) cos(theta) Pbar_m^m
//!   Pbar_l^m = a_l^m (cos(theta) Pbar_{l-1}^m - Pbar_{l-2}^m / a_{l-1}^m),
//!     a_l^m = sqrt((4 l^2 - 1) / (l^2 - m^2))

use crate::error::{Error, Result};
use crate::spectrum::{DissipativeSpectrum, Geometry, GeometryParams, ModeIndex};

pub const MAX_DEGREE: u32 = 64;

/// Full spherical spectrum through degree `l_max`: (l_max + 1)^2 modes,
/// ordered by l ascending then m ascending, which coincides with descending
/// eigenvalue order.
pub fn sphere_spectrum(params: &GeometryParams, l_max: u32) -> Result<DissipativeSpectrum> {
    params.validate()?;
    if l_max > MAX_DEGREE {
        return Err(Error::SizeLimit {
            what: "sphere degree",
            got: l_max as usize,
            max: MAX_DEGREE as usize,
        });
    }
    let a2 = params.alpha * params.alpha;
    let mut eigenvalues = Vec::new();
    let mut modes = Vec::new();
    for l in 0..=l_max {
        let lf = l as f64;
        let lam = -(a2 * (lf * (lf + 1.0))) - params.gamma;
        for m in -(l as i32)..=(l as i32) {
            eigenvalues.push(lam);
            modes.push(ModeIndex::Sphere { l, m });
        }
    }
    DissipativeSpectrum::from_sorted(Geometry::Sphere, *params, eigenvalues, modes)
}

/// Fully normalized associated Legendre Pbar_l^m(cos theta) for 0 <= m <= l,
/// taking (cos theta, sin theta) with sin theta >= 0.
fn legendre_normalized(l: u32, m: u32, ct: f64, st: f64) -> f64 {
    debug_assert!(m <= l);
    let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * st;
    }
    if l == m {
        return pmm;
    }
    let mf = m as f64;
    let mut prev = pmm; // Pbar_m^m
    let mut cur = (2.0 * mf + 3.0).sqrt() * ct * pmm; // Pbar_{m+1}^m
    if l == m + 1 {
        return cur;
    }
    for deg in (m + 2)..=l {
        let lf = deg as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let a_prev =
            ((4.0 * (lf - 1.0) * (lf - 1.0) - 1.0) / ((lf - 1.0) * (lf - 1.0) - mf * mf)).sqrt();
        let next = a * (ct * cur - prev / a_prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Value of the real spherical harmonic for `mode` at colatitude theta in
/// [0, pi] and azimuth phi.
pub fn sphere_eigenfunction(mode: &ModeIndex, theta: f64, phi: f64) -> Result<f64> {
    let (l, m) = match mode {
        ModeIndex::Sphere { l, m } => (*l, *m),
        _ => {
            return Err(Error::InvalidParameter {
                name: "mode",
                message: format!("expected a sphere mode, got {}", mode.label()),
            })
        }
    };
    if m.unsigned_abs() > l {
        return Err(Error::InvalidParameter {
            name: "mode",
            message: format!("|m| must be <= l, got l={l}, m={m}"),
        });
    }
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidParameter {
            name: "theta",
            message: format!("colatitude must lie in [0, pi], got {theta}"),
        });
    }
    if l > MAX_DEGREE {
        return Err(Error::SizeLimit {
            what: "sphere degree",
            got: l as usize,
            max: MAX_DEGREE as usize,
        });
    }
    let (ct, st) = (theta.cos(), theta.sin());
    Ok(sphere_value(l, m, ct, st, phi))
}

/// Harmonic value from precomputed cos/sin of the colatitude; shared with
/// the grid builder, which starts from cos(theta) quadrature nodes.
pub(crate) fn sphere_value(l: u32, m: i32, ct: f64, st: f64, phi: f64) -> f64 {
    let sqrt2 = std::f64::consts::SQRT_2;
    if m == 0 {
        legendre_normalized(l, 0, ct, st)
    } else if m > 0 {
        sqrt2 * legendre_normalized(l, m as u32, ct, st) * ((m as f64) * phi).cos()
    } else {
        let ma = (-m) as u32;
        sqrt2 * legendre_normalized(l, ma, ct, st) * ((ma as f64) * phi).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre_rule, trapezoid_periodic_rule};
    use approx::assert_relative_eq;

    #[test]
    fn spectrum_degree_one() {
        let p = GeometryParams {
            alpha: 1.0,
            gamma: 0.5,
            d: 1,
        };
        let s = sphere_spectrum(&p, 1).unwrap();
        assert_eq!(s.eigenvalues(), &[-0.5, -2.5, -2.5, -2.5]);
        assert_eq!(s.modes()[0], ModeIndex::Sphere { l: 0, m: 0 });
        assert_eq!(s.modes()[1], ModeIndex::Sphere { l: 1, m: -1 });
        assert_eq!(s.modes()[2], ModeIndex::Sphere { l: 1, m: 0 });
        assert_eq!(s.modes()[3], ModeIndex::Sphere { l: 1, m: 1 });
        assert_eq!(s.gamma_eff(), 0.5);
    }

    #[test]
    fn mode_count_is_squared_degree_plus_one() {
        let p = GeometryParams::default();
        for l_max in [0u32, 2, 6] {
            let s = sphere_spectrum(&p, l_max).unwrap();
            assert_eq!(s.len(), ((l_max + 1) * (l_max + 1)) as usize);
        }
    }

    #[test]
    fn constant_harmonic_value() {
        // Y_0^0 = 1 / sqrt(4 pi) everywhere
        let mode = ModeIndex::Sphere { l: 0, m: 0 };
        for (theta, phi) in [(0.0, 0.0), (1.1, 2.3), (3.0, 5.9)] {
            assert_relative_eq!(
                sphere_eigenfunction(&mode, theta, phi).unwrap(),
                0.28209479177387814,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn dipole_axis_value() {
        // Y_1^0 = sqrt(3 / 4 pi) cos(theta)
        let mode = ModeIndex::Sphere { l: 1, m: 0 };
        let c = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
        for theta in [0.0, 0.7, 1.5707963267948966, 2.9] {
            assert_relative_eq!(
                sphere_eigenfunction(&mode, theta, 0.4).unwrap(),
                c * theta.cos(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn orthonormal_under_product_quadrature() {
        // Gauss-Legendre in cos(theta) x trapezoid in phi integrates the
        // polynomial integrands exactly; defect stays at rounding level.
        let polar = gauss_legendre_rule(24).unwrap();
        let azim = trapezoid_periodic_rule(32).unwrap();
        let p = GeometryParams::default();
        let s = sphere_spectrum(&p, 4).unwrap();
        let modes = s.modes();
        for a in 0..modes.len() {
            for b in a..modes.len() {
                let mut acc = 0.0;
                for (&u, &wu) in polar.nodes.iter().zip(&polar.weights) {
                    let st = (1.0 - u * u).max(0.0).sqrt();
                    let (la, ma) = match modes[a] {
                        ModeIndex::Sphere { l, m } => (l, m),
                        _ => unreachable!(),
                    };
                    let (lb, mb) = match modes[b] {
                        ModeIndex::Sphere { l, m } => (l, m),
                        _ => unreachable!(),
                    };
                    let mut phi_acc = 0.0;
                    for (&phi, &wp) in azim.nodes.iter().zip(&azim.weights) {
                        phi_acc += wp
                            * sphere_value(la, ma, u, st, phi)
                            * sphere_value(lb, mb, u, st, phi);
                    }
                    acc += wu * phi_acc;
                }
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (acc - want).abs() < 1e-12,
                    "<{},{}> = {acc}",
                    modes[a].label(),
                    modes[b].label()
                );
            }
        }
    }

    #[test]
    fn rejects_invalid_order() {
        let bad = ModeIndex::Sphere { l: 2, m: 3 };
        assert!(sphere_eigenfunction(&bad, 1.0, 1.0).is_err());
        assert!(sphere_eigenfunction(&ModeIndex::Sphere { l: 1, m: 0 }, -0.1, 0.0).is_err());
    }
}
