//! Mode indexing and the dissipative spectrum container.
//!
//! A dissipative spectrum is a finite list of strictly negative eigenvalues
//! `lambda_k` together with the mode indices that generated them. Ordering is
//! part of the contract: eigenvalues are sorted descending (closest to zero
//! first) with a deterministic tie-break per geometry, so every consumer
//! (solver, bounds, simulator, serialization) sees the same layout.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Disk,
    Oscillator,
    Sphere,
    /// Explicit eigenvalue list with no spatial structure; used for
    /// cross-checks on arbitrary stable spectra.
    Synthetic,
}

impl Geometry {
    pub fn name(&self) -> &'static str {
        match self {
            Geometry::Disk => "disk",
            Geometry::Oscillator => "oscillator",
            Geometry::Sphere => "sphere",
            Geometry::Synthetic => "synthetic",
        }
    }
}

/// Angular factor of a disk mode: cos(m theta) or sin(m theta).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Parity {
    Cos,
    Sin,
}

impl Parity {
    pub fn name(&self) -> &'static str {
        match self {
            Parity::Cos => "cos",
            Parity::Sin => "sin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModeIndex {
    /// Dirichlet disk mode: radial Bessel profile J_m(j_{m,k} r) with the
    /// k-th positive zero, times cos/sin(m theta). `parity` is Cos when m = 0.
    Disk { m: u32, k: u32, parity: Parity },
    /// Harmonic oscillator multi-index, one entry per dimension.
    Oscillator { n: Vec<u32> },
    /// Spherical harmonic degree l and order m, -l <= m <= l.
    Sphere { l: u32, m: i32 },
    /// Position in a synthetic eigenvalue list.
    Synthetic { index: usize },
}

impl ModeIndex {
    pub fn label(&self) -> String {
        match self {
            ModeIndex::Disk { m, k, parity } => format!("disk(m={m},k={k},{})", parity.name()),
            ModeIndex::Oscillator { n } => {
                let parts: Vec<String> = n.iter().map(|v| v.to_string()).collect();
                format!("osc(n=[{}])", parts.join(","))
            }
            ModeIndex::Sphere { l, m } => format!("sphere(l={l},m={m})"),
            ModeIndex::Synthetic { index } => format!("synthetic({index})"),
        }
    }
}

/// Geometry parameters shared by the spectrum builders.
///
/// `alpha` scales the Laplacian (disk and sphere), `gamma` is the uniform
/// damping offset, `d` is the oscillator dimension (1, 2, or 3; ignored by
/// the other geometries).
#[derive(Debug, Clone, Copy)]
pub struct GeometryParams {
    pub alpha: f64,
    pub gamma: f64,
    pub d: u32,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams {
            alpha: 1.0,
            gamma: 0.5,
            d: 1,
        }
    }
}

impl GeometryParams {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                message: format!("must be finite and > 0, got {}", self.alpha),
            });
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "gamma",
                message: format!("must be finite and > 0, got {}", self.gamma),
            });
        }
        Ok(())
    }
}

/// Truncated spectrum of a dissipative generator.
///
/// Invariants, enforced on construction:
/// - all eigenvalues strictly negative and finite,
/// - sorted descending (`eigenvalues[0]` is the slowest mode),
/// - `gamma_eff = -eigenvalues[0] = min_k |lambda_k| > 0`,
/// - one mode index per eigenvalue.
#[derive(Debug, Clone)]
pub struct DissipativeSpectrum {
    pub geometry: Geometry,
    pub params: GeometryParams,
    eigenvalues: Vec<f64>,
    modes: Vec<ModeIndex>,
    gamma_eff: f64,
}

impl DissipativeSpectrum {
    /// Internal constructor used by the geometry builders; `pairs` must be
    /// pre-sorted per the geometry's tie-break rule.
    pub(crate) fn from_sorted(
        geometry: Geometry,
        params: GeometryParams,
        eigenvalues: Vec<f64>,
        modes: Vec<ModeIndex>,
    ) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidParameter {
                name: "cutoff",
                message: "spectrum must contain at least one mode".into(),
            });
        }
        if eigenvalues.len() != modes.len() {
            return Err(Error::DimensionMismatch {
                context: "eigenvalue/mode list lengths",
                expected: eigenvalues.len(),
                got: modes.len(),
            });
        }
        for (i, &l) in eigenvalues.iter().enumerate() {
            if !(l < 0.0) || !l.is_finite() {
                return Err(Error::UnstableEigenvalue { index: i, value: l });
            }
            if i > 0 && eigenvalues[i - 1] < l {
                return Err(Error::InvalidParameter {
                    name: "eigenvalues",
                    message: format!("not sorted descending at position {i}"),
                });
            }
        }
        let gamma_eff = -eigenvalues[0];
        Ok(DissipativeSpectrum {
            geometry,
            params,
            eigenvalues,
            modes,
            gamma_eff,
        })
    }

    /// Builds a spectrum from an explicit list of strictly negative
    /// eigenvalues (sorted internally, descending).
    pub fn synthetic(mut eigenvalues: Vec<f64>) -> Result<Self> {
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).ok_or(()).expect("finite eigenvalues"));
        let modes = (0..eigenvalues.len())
            .map(|index| ModeIndex::Synthetic { index })
            .collect();
        Self::from_sorted(
            Geometry::Synthetic,
            GeometryParams::default(),
            eigenvalues,
            modes,
        )
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    /// Spectral gap: smallest damping rate, `min_k |lambda_k|`.
    pub fn gamma_eff(&self) -> f64 {
        self.gamma_eff
    }

    /// Truncation to the leading (slowest) `n` modes.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidParameter {
                name: "n",
                message: format!("truncation size must be in 1..={}, got {n}", self.len()),
            });
        }
        Ok(DissipativeSpectrum {
            geometry: self.geometry,
            params: self.params,
            eigenvalues: self.eigenvalues[..n].to_vec(),
            modes: self.modes[..n].to_vec(),
            gamma_eff: self.gamma_eff,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_sorts_descending_and_sets_gap() {
        let s = DissipativeSpectrum::synthetic(vec![-3.0, -0.5, -7.0]).unwrap();
        assert_eq!(s.eigenvalues(), &[-0.5, -3.0, -7.0]);
        assert_eq!(s.gamma_eff(), 0.5);
    }

    #[test]
    fn synthetic_rejects_nonnegative() {
        assert!(DissipativeSpectrum::synthetic(vec![-1.0, 0.0]).is_err());
        assert!(DissipativeSpectrum::synthetic(vec![-1.0, 2.0]).is_err());
        assert!(DissipativeSpectrum::synthetic(vec![]).is_err());
    }

    #[test]
    fn truncate_keeps_leading_modes() {
        let s = DissipativeSpectrum::synthetic(vec![-1.0, -2.0, -3.0]).unwrap();
        let t = s.truncate(2).unwrap();
        assert_eq!(t.eigenvalues(), &[-1.0, -2.0]);
        assert_eq!(t.gamma_eff(), 1.0);
        assert!(s.truncate(0).is_err());
        assert!(s.truncate(4).is_err());
    }
}
