//! Eigenbases for the supported geometries, plus the quadrature-side
//! machinery shared by noise projection and orthonormality checks: a
//! discretized basis holds every mode evaluated on a tensor quadrature grid
//! together with the measure weights.

pub mod bessel;
pub mod disk;
pub mod oscillator;
pub mod sphere;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::quadrature::{
    gauss_hermite_rule, gauss_legendre_rule, map_to_radial, trapezoid_periodic_rule, QuadratureSet,
};
use crate::spectrum::{DissipativeSpectrum, Geometry, ModeIndex, Parity};

/// A dissipative spectrum viewed as a function basis.
#[derive(Debug, Clone)]
pub struct Basis {
    spectrum: DissipativeSpectrum,
}

impl Basis {
    pub fn new(spectrum: DissipativeSpectrum) -> Self {
        Basis { spectrum }
    }

    pub fn spectrum(&self) -> &DissipativeSpectrum {
        &self.spectrum
    }

    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectrum.is_empty()
    }

    pub fn geometry(&self) -> Geometry {
        self.spectrum.geometry
    }
}

/// Basis evaluated on a quadrature grid.
///
/// `values` is modes x nodes row-major; `weights[i]` carries the full
/// measure weight of node i, so sum_i weights[i] f(point_i) approximates the
/// geometry's integral. `points` are embedding coordinates (disk: 2D
/// Cartesian in the unit disk; sphere: 3D unit vectors), the coordinates a
/// spatial kernel is evaluated on.
pub(crate) struct DiscretizedBasis {
    pub n_modes: usize,
    pub n_nodes: usize,
    pub point_dim: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl DiscretizedBasis {
    #[inline]
    pub fn value(&self, mode: usize, node: usize) -> f64 {
        self.values[mode * self.n_nodes + node]
    }
}

const MAX_GRID_NODES: usize = 1 << 16;

/// Evaluates every mode of `basis` on the tensor quadrature grid for its
/// geometry. Supported for disk and sphere; the oscillator never needs a
/// joint grid (its Gram matrix factorizes over dimensions and kernels are
/// not offered there).
pub(crate) fn discretize(basis: &Basis, rules: &QuadratureSet) -> Result<DiscretizedBasis> {
    match basis.geometry() {
        Geometry::Disk => discretize_disk(basis, rules),
        Geometry::Sphere => discretize_sphere(basis, rules),
        Geometry::Oscillator => Err(Error::UnsupportedGeometry {
            operation: "grid discretization",
            geometry: "oscillator",
        }),
        Geometry::Synthetic => Err(Error::UnsupportedGeometry {
            operation: "grid discretization",
            geometry: "synthetic",
        }),
    }
}

fn check_grid_size(n: usize) -> Result<()> {
    if n > MAX_GRID_NODES {
        return Err(Error::SizeLimit {
            what: "quadrature grid nodes",
            got: n,
            max: MAX_GRID_NODES,
        });
    }
    Ok(())
}

fn discretize_disk(basis: &Basis, rules: &QuadratureSet) -> Result<DiscretizedBasis> {
    let radial = map_to_radial(&gauss_legendre_rule(rules.radial)?)?;
    let angular = trapezoid_periodic_rule(rules.angular)?;
    let (nr, na) = (radial.len(), angular.len());
    let n_nodes = nr * na;
    check_grid_size(n_nodes)?;
    let n_modes = basis.len();

    let mut points = Vec::with_capacity(n_nodes);
    let mut weights = Vec::with_capacity(n_nodes);
    for (&r, &wr) in radial.nodes.iter().zip(&radial.weights) {
        for (&th, &wt) in angular.nodes.iter().zip(&angular.weights) {
            points.push([r * th.cos(), r * th.sin(), 0.0]);
            weights.push(wr * wt);
        }
    }

    let mut values = vec![0.0; n_modes * n_nodes];
    for (mi, mode) in basis.spectrum.modes().iter().enumerate() {
        let (m, k, parity) = match mode {
            ModeIndex::Disk { m, k, parity } => (*m, *k, *parity),
            other => {
                return Err(Error::InvalidParameter {
                    name: "basis",
                    message: format!("disk basis contains {}", other.label()),
                })
            }
        };
        let (zero, c) = disk::mode_constants(m, k)?;
        let radial_profile: Vec<f64> = radial
            .nodes
            .iter()
            .map(|&r| bessel::bessel_j(m, zero * r).map(|v| c * v))
            .collect::<Result<_>>()?;
        let angular_profile: Vec<f64> = angular
            .nodes
            .iter()
            .map(|&th| match parity {
                Parity::Cos => (m as f64 * th).cos(),
                Parity::Sin => (m as f64 * th).sin(),
            })
            .collect();
        for ir in 0..nr {
            for ia in 0..na {
                values[mi * n_nodes + ir * na + ia] = radial_profile[ir] * angular_profile[ia];
            }
        }
    }

    Ok(DiscretizedBasis {
        n_modes,
        n_nodes,
        point_dim: 2,
        points,
        weights,
        values,
    })
}

fn discretize_sphere(basis: &Basis, rules: &QuadratureSet) -> Result<DiscretizedBasis> {
    let polar = gauss_legendre_rule(rules.sphere_polar)?;
    let azim = trapezoid_periodic_rule(rules.angular)?;
    let (np, na) = (polar.len(), azim.len());
    let n_nodes = np * na;
    check_grid_size(n_nodes)?;
    let n_modes = basis.len();

    let mut points = Vec::with_capacity(n_nodes);
    let mut weights = Vec::with_capacity(n_nodes);
    for (&u, &wu) in polar.nodes.iter().zip(&polar.weights) {
        let st = (1.0 - u * u).max(0.0).sqrt();
        for (&phi, &wp) in azim.nodes.iter().zip(&azim.weights) {
            points.push([st * phi.cos(), st * phi.sin(), u]);
            weights.push(wu * wp);
        }
    }

    let mut values = vec![0.0; n_modes * n_nodes];
    for (mi, mode) in basis.spectrum.modes().iter().enumerate() {
        let (l, m) = match mode {
            ModeIndex::Sphere { l, m } => (*l, *m),
            other => {
                return Err(Error::InvalidParameter {
                    name: "basis",
                    message: format!("sphere basis contains {}", other.label()),
                })
            }
        };
        for (ip, &u) in polar.nodes.iter().enumerate() {
            let st = (1.0 - u * u).max(0.0).sqrt();
            for (ia, &phi) in azim.nodes.iter().enumerate() {
                values[mi * n_nodes + ip * na + ia] = sphere::sphere_value(l, m, u, st, phi);
            }
        }
    }

    Ok(DiscretizedBasis {
        n_modes,
        n_nodes,
        point_dim: 3,
        points,
        weights,
        values,
    })
}

#[derive(Debug, Clone)]
pub struct GramResult {
    pub gram: SymMatrix,
    /// max |G - I| over all entries.
    pub defect: f64,
}

/// Matrix of quadrature inner products G_ab = <phi_a, phi_b> under the
/// geometry's measure. For an orthonormal basis and adequate quadrature
/// orders the defect max|G - I| sits at rounding level; it is the
/// discretization sanity metric for the projection machinery.
pub fn gram_matrix(basis: &Basis, rules: &QuadratureSet) -> Result<GramResult> {
    let gram = match basis.geometry() {
        Geometry::Disk | Geometry::Sphere => {
            let grid = discretize(basis, rules)?;
            SymMatrix::from_fn(grid.n_modes, |a, b| {
                (0..grid.n_nodes)
                    .map(|i| grid.weights[i] * grid.value(a, i) * grid.value(b, i))
                    .sum()
            })
        }
        Geometry::Oscillator => oscillator_gram(basis, rules)?,
        Geometry::Synthetic => {
            return Err(Error::UnsupportedGeometry {
                operation: "gram matrix",
                geometry: "synthetic",
            })
        }
    };
    let n = gram.dim();
    let mut defect = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            let want = if a == b { 1.0 } else { 0.0 };
            defect = defect.max((gram.get(a, b) - want).abs());
        }
    }
    Ok(GramResult { gram, defect })
}

/// Oscillator inner products factorize over dimensions, so the Gram matrix
/// is a product of 1D Gauss-Hermite sums; the exp(-x^2) weight is
/// compensated by evaluating the polynomial parts h_n = psi_n e^{x^2/2}.
fn oscillator_gram(basis: &Basis, rules: &QuadratureSet) -> Result<SymMatrix> {
    let rule = gauss_hermite_rule(rules.hermite)?;
    let modes = basis.spectrum.modes();
    let mut max_index = 0u32;
    let multi: Vec<&Vec<u32>> = modes
        .iter()
        .map(|mode| match mode {
            ModeIndex::Oscillator { n } => {
                max_index = max_index.max(n.iter().copied().max().unwrap_or(0));
                Ok(n)
            }
            other => Err(Error::InvalidParameter {
                name: "basis",
                message: format!("oscillator basis contains {}", other.label()),
            }),
        })
        .collect::<Result<_>>()?;

    // table[n][i] = h_n(x_i)
    let nq = rule.len();
    let mut table = vec![0.0; (max_index as usize + 1) * nq];
    for (i, &x) in rule.nodes.iter().enumerate() {
        for n in 0..=max_index {
            table[n as usize * nq + i] = oscillator::hermite_poly_normalized(n, x)?;
        }
    }
    let pair_1d = |a: u32, b: u32| -> f64 {
        (0..nq)
            .map(|i| rule.weights[i] * table[a as usize * nq + i] * table[b as usize * nq + i])
            .sum()
    };

    Ok(SymMatrix::from_fn(modes.len(), |a, b| {
        multi[a]
            .iter()
            .zip(multi[b].iter())
            .map(|(&na, &nb)| pair_1d(na, nb))
            .product()
    }))
}
