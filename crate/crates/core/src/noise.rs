//! Projection of a noise covariance operator onto an eigenbasis: Q_jk =
//! <phi_j, Q phi_k>. White and diagonal specifications project exactly;
//! spatial kernels K(x,y) are projected by tensor quadrature, Q_jk =
//! sum_{x,y} w_x phi_j(x) K(x,y) phi_k(y) w_y, evaluated row by row so the
//! kernel matrix is never materialized. Rotation-invariant kernels must come
//! out block-diagonal in the azimuthal index; block_structure_report
//! measures how well the projected matrix honors that.

use std::sync::Arc;

use crate::basis::{discretize, Basis};
use crate::error::{Error, Result};
use crate::matrix::{operator_norm_sym, psd_check, sym_eigen, SymMatrix};
use crate::quadrature::QuadratureSet;
use crate::spectrum::{Geometry, ModeIndex};

/// Pointwise kernel K(x, y); slices carry the embedding coordinates of the
/// geometry (disk: 2, sphere: 3).
pub type KernelFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Profile of an isotropic kernel as a function of point separation
/// (Euclidean distance on the disk, great-circle angle on the sphere).
pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Declarative noise covariance specification.
#[derive(Clone)]
pub enum NoiseSpec {
    /// Q = sigma2 * I in the orthonormal eigenbasis.
    White { sigma2: f64 },
    /// Explicit positive per-mode variances.
    DiagonalValues(Vec<f64>),
    /// Decay law q_k = c * (1 + |lambda_k|)^(-p).
    DiagonalDecay { c: f64, p: f64 },
    /// Pointwise symmetric kernel, projected by quadrature.
    Kernel(KernelFn),
    /// Rotation-invariant kernel given by a separation profile.
    Isotropic(ProfileFn),
    /// Kernel pre-evaluated on the quadrature grid, row-major over node
    /// pairs; `n_nodes` must match the grid of the basis it is used with.
    KernelTable {
        values: Arc<Vec<f64>>,
        n_nodes: usize,
    },
}

/// Result of [`project_noise`].
#[derive(Debug, Clone)]
pub struct NoiseProjection {
    pub q: SymMatrix,
    /// Smallest eigenvalue of the projection before any clipping.
    pub min_eigenvalue: f64,
    /// Whether min_eigenvalue >= -1e-8 * ||Q||. Quadrature of a PSD kernel
    /// can dip slightly negative; callers decide whether to warn or clip.
    pub psd_ok: bool,
    /// True when clipping was requested and actually changed the matrix.
    pub clipped: bool,
}

/// Mode count cap for kernel projections; the cost is quadratic in grid
/// nodes and linear in modes, and desk-scale truncations never need more.
pub const MAX_KERNEL_MODES: usize = 256;

const PSD_TOL_REL: f64 = 1e-8;

/// Projects `noise` onto `basis`. White and diagonal variants are exact by
/// construction; kernel variants run the quadrature double sum. With `clip`
/// set, a projection that fails the PSD tolerance is replaced by its nearest
/// PSD matrix (negative eigenvalues zeroed); by default the indefiniteness
/// is only reported, since silently repairing it would hide quadrature
/// under-resolution.
pub fn project_noise(
    noise: &NoiseSpec,
    basis: &Basis,
    rules: &QuadratureSet,
    clip: bool,
) -> Result<NoiseProjection> {
    let n = basis.len();
    let q = match noise {
        NoiseSpec::White { sigma2 } => {
            require_nonnegative("noise.sigma2", *sigma2)?;
            let q = SymMatrix::scaled_identity(n, *sigma2);
            return Ok(NoiseProjection {
                q,
                min_eigenvalue: *sigma2,
                psd_ok: true,
                clipped: false,
            });
        }
        NoiseSpec::DiagonalValues(values) => {
            if values.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "diagonal noise values vs basis",
                    expected: n,
                    got: values.len(),
                });
            }
            for &v in values {
                require_nonnegative("noise.q", v)?;
            }
            let q = SymMatrix::from_diagonal(values);
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            return Ok(NoiseProjection {
                q,
                min_eigenvalue: min,
                psd_ok: true,
                clipped: false,
            });
        }
        NoiseSpec::DiagonalDecay { c, p } => {
            require_positive("noise.c", *c)?;
            if !(*p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "noise.p",
                    message: format!("decay exponent must be >= 0, got {p}"),
                });
            }
            let values: Vec<f64> = basis
                .spectrum()
                .eigenvalues()
                .iter()
                .map(|&lam| c * (1.0 + lam.abs()).powf(-p))
                .collect();
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let q = SymMatrix::from_diagonal(&values);
            return Ok(NoiseProjection {
                q,
                min_eigenvalue: min,
                psd_ok: true,
                clipped: false,
            });
        }
        NoiseSpec::Kernel(_) | NoiseSpec::Isotropic(_) | NoiseSpec::KernelTable { .. } => {
            project_kernel(noise, basis, rules)?
        }
    };

    let norm = operator_norm_sym(&q)?;
    let report = psd_check(&q, PSD_TOL_REL * norm)?;
    let mut q = q;
    let mut clipped = false;
    if clip && !report.ok {
        q = clip_to_psd(&q)?;
        clipped = true;
    }
    Ok(NoiseProjection {
        q,
        min_eigenvalue: report.min_eigenvalue,
        psd_ok: report.ok,
        clipped,
    })
}

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            message: format!("must be positive and finite, got {v}"),
        });
    }
    Ok(())
}

// variances may legitimately be zero (noiseless channel, Q = 0)
fn require_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            message: format!("must be nonnegative and finite, got {v}"),
        });
    }
    Ok(())
}

fn clip_to_psd(q: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eigen(q)?;
    let n = q.dim();
    let kept: Vec<(f64, Vec<f64>)> = (0..n)
        .filter(|&j| eig.values[j] > 0.0)
        .map(|j| (eig.values[j], eig.vector(j)))
        .collect();
    Ok(SymMatrix::from_fn(n, |a, b| {
        kept.iter().map(|(v, vec)| v * vec[a] * vec[b]).sum()
    }))
}

fn kernel_geometry_check(geometry: Geometry) -> Result<()> {
    match geometry {
        Geometry::Disk | Geometry::Sphere => Ok(()),
        Geometry::Oscillator => Err(Error::UnsupportedGeometry {
            operation: "kernel noise projection",
            geometry: "oscillator",
        }),
        Geometry::Synthetic => Err(Error::UnsupportedGeometry {
            operation: "kernel noise projection",
            geometry: "synthetic",
        }),
    }
}

/// Separation measure used by isotropic profiles.
fn separation(geometry: Geometry, x: &[f64; 3], y: &[f64; 3]) -> f64 {
    match geometry {
        Geometry::Sphere => {
            let dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
            dot.clamp(-1.0, 1.0).acos()
        }
        _ => {
            let dx = x[0] - y[0];
            let dy = x[1] - y[1];
            let dz = x[2] - y[2];
            (dx * dx + dy * dy + dz * dz).sqrt()
        }
    }
}

fn project_kernel(noise: &NoiseSpec, basis: &Basis, rules: &QuadratureSet) -> Result<SymMatrix> {
    kernel_geometry_check(basis.geometry())?;
    let n_modes = basis.len();
    if n_modes > MAX_KERNEL_MODES {
        return Err(Error::SizeLimit {
            what: "kernel projection mode count",
            got: n_modes,
            max: MAX_KERNEL_MODES,
        });
    }
    let grid = discretize(basis, rules)?;
    let nn = grid.n_nodes;
    let geometry = basis.geometry();

    let eval: Box<dyn Fn(usize, usize) -> f64 + Send + Sync> = match noise {
        NoiseSpec::Kernel(k) => {
            let k = Arc::clone(k);
            let dim = grid.point_dim;
            let points = grid.points.clone();
            Box::new(move |i, j| k(&points[i][..dim], &points[j][..dim]))
        }
        NoiseSpec::Isotropic(profile) => {
            let profile = Arc::clone(profile);
            let points = grid.points.clone();
            Box::new(move |i, j| profile(separation(geometry, &points[i], &points[j])))
        }
        NoiseSpec::KernelTable { values, n_nodes } => {
            if *n_nodes != nn || values.len() != nn * nn {
                return Err(Error::DimensionMismatch {
                    context: "kernel table vs quadrature grid nodes",
                    expected: nn,
                    got: *n_nodes,
                });
            }
            let values = Arc::clone(values);
            Box::new(move |i, j| values[i * nn + j])
        }
        _ => unreachable!("non-kernel variants handled by the caller"),
    };

    check_kernel_symmetry(&eval, nn)?;

    // b_t[y][k] = w_y * phi_k(y), node-major so the inner contraction below
    // runs over contiguous memory.
    let mut b_t = vec![0.0_f64; nn * n_modes];
    for y in 0..nn {
        for k in 0..n_modes {
            b_t[y * n_modes + k] = grid.weights[y] * grid.value(k, y);
        }
    }

    // t[x][k] = sum_y K(x,y) * b_t[y][k]. Rows are independent, so parallel
    // execution writes disjoint slices and the result does not depend on the
    // worker count.
    let mut t = vec![0.0_f64; nn * n_modes];
    let fill_row = |x: usize, row: &mut [f64]| {
        for y in 0..nn {
            let kv = eval(x, y);
            let b_row = &b_t[y * n_modes..(y + 1) * n_modes];
            for (acc, &b) in row.iter_mut().zip(b_row) {
                *acc += kv * b;
            }
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        t.par_chunks_mut(n_modes)
            .enumerate()
            .for_each(|(x, row)| fill_row(x, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (x, row) in t.chunks_mut(n_modes).enumerate() {
            fill_row(x, row);
        }
    }

    // g[j][k] = sum_x b_t[x][j] * t[x][k], then symmetrize: quadrature of a
    // symmetric kernel is symmetric only up to summation order.
    let mut g = vec![0.0_f64; n_modes * n_modes];
    for x in 0..nn {
        let b_row = &b_t[x * n_modes..(x + 1) * n_modes];
        let t_row = &t[x * n_modes..(x + 1) * n_modes];
        for j in 0..n_modes {
            let bj = b_row[j];
            let out = &mut g[j * n_modes..(j + 1) * n_modes];
            for (acc, &tv) in out.iter_mut().zip(t_row) {
                *acc += bj * tv;
            }
        }
    }
    Ok(SymMatrix::from_fn(n_modes, |j, k| {
        0.5 * (g[j * n_modes + k] + g[k * n_modes + j])
    }))
}

/// Samples a handful of node pairs and rejects kernels that are visibly
/// asymmetric; full verification would double the quadrature cost. Sample
/// indices are scattered by a fixed multiplicative hash so they do not all
/// land on one symmetry line of the tensor grid (e.g. theta = 0).
fn check_kernel_symmetry(
    eval: &(dyn Fn(usize, usize) -> f64 + Send + Sync),
    nn: usize,
) -> Result<()> {
    let count = nn.min(8);
    let mut idx: Vec<usize> = (0..count)
        .map(|i| ((i as u64).wrapping_mul(2654435761) % nn as u64) as usize)
        .collect();
    idx.sort_unstable();
    idx.dedup();
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let kij = eval(i, j);
            let kji = eval(j, i);
            if (kij - kji).abs() > 1e-12 * (1.0 + kij.abs().max(kji.abs())) {
                return Err(Error::InvalidParameter {
                    name: "noise.kernel",
                    message: format!(
                        "kernel is not symmetric: K(x{i},x{j}) = {kij:e} but K(x{j},x{i}) = {kji:e}"
                    ),
                });
            }
        }
    }
    Ok(())
}

/// How strongly `q` couples modes in different azimuthal groups: |m| on the
/// disk, m on the sphere.
#[derive(Debug, Clone, Copy)]
pub struct BlockStructureReport {
    pub max_cross_coupling: f64,
    /// 1e-8 * max|Q|, the scale below which coupling counts as zero.
    pub threshold: f64,
    pub block_diagonal: bool,
}

/// Measures block-diagonality of `q` with respect to the azimuthal grouping
/// of `modes`. Rotation-invariant noise must pass; anything else is a
/// quantitative symmetry diagnostic.
pub fn block_structure_report(q: &SymMatrix, modes: &[ModeIndex]) -> Result<BlockStructureReport> {
    if q.dim() != modes.len() {
        return Err(Error::DimensionMismatch {
            context: "matrix vs mode list",
            expected: modes.len(),
            got: q.dim(),
        });
    }
    let group = |mode: &ModeIndex| -> Result<i64> {
        match mode {
            ModeIndex::Disk { m, .. } => Ok(*m as i64),
            ModeIndex::Sphere { m, .. } => Ok(*m as i64),
            ModeIndex::Oscillator { .. } => Err(Error::UnsupportedGeometry {
                operation: "block structure report",
                geometry: "oscillator",
            }),
            ModeIndex::Synthetic { .. } => Err(Error::UnsupportedGeometry {
                operation: "block structure report",
                geometry: "synthetic",
            }),
        }
    };
    let groups: Vec<i64> = modes.iter().map(group).collect::<Result<_>>()?;
    let mut max_cross = 0.0_f64;
    for j in 0..modes.len() {
        for k in j + 1..modes.len() {
            if groups[j] != groups[k] {
                max_cross = max_cross.max(q.get(j, k).abs());
            }
        }
    }
    let threshold = 1e-8 * q.max_abs();
    Ok(BlockStructureReport {
        max_cross_coupling: max_cross,
        threshold,
        block_diagonal: max_cross <= threshold,
    })
}
