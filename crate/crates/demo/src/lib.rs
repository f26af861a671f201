//! Browser bindings for the covariance library: enough surface to render
//! eigenmode fields, steady-state covariance heatmaps, and truncation-error
//! curves from a static page. Quadrature orders are reduced relative to the
//! CLI defaults so kernel projections stay interactive on one thread; the
//! numerics behind them are unchanged.
//!
//! Every export is a plain function or getter struct so the host target can
//! unit test the exact code the wasm bundle ships.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use lyacov::basis::disk::{disk_eigenfunction, disk_spectrum};
use lyacov::{
    operator_norm_sym, project_noise, solve_spectral_lyapunov, truncation_bound, Basis,
    GeometryParams, NoiseSpec, QuadratureSet, SymMatrix,
};

/// Interactive ceiling: heatmaps above this are unreadable anyway.
const MAX_DEMO_MODES: usize = 64;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn demo_spectrum(cutoff: usize) -> Result<lyacov::DissipativeSpectrum, String> {
    if cutoff < 1 || cutoff > MAX_DEMO_MODES {
        return Err(format!(
            "cutoff must be between 1 and {MAX_DEMO_MODES}, got {cutoff}"
        ));
    }
    disk_spectrum(&GeometryParams::default(), cutoff).map_err(err)
}

/// Quadrature orders for the in-browser kernel projection: 24 x 48 nodes
/// keeps a 20-mode Gaussian-kernel solve under a few milliseconds while the
/// Gram defect stays below 1e-10 for every cutoff this page exposes.
fn demo_rules() -> QuadratureSet {
    QuadratureSet {
        radial: 24,
        angular: 48,
        ..QuadratureSet::default()
    }
}

/// Eigenvalues of the first `cutoff` disk modes, most slowly decaying first.
#[wasm_bindgen]
pub fn disk_eigenvalues(cutoff: usize) -> Result<Vec<f64>, String> {
    Ok(demo_spectrum(cutoff)?.eigenvalues().to_vec())
}

/// Human-readable mode labels, newline separated, same order as the
/// eigenvalues.
#[wasm_bindgen]
pub fn disk_mode_labels(cutoff: usize) -> Result<String, String> {
    let spec = demo_spectrum(cutoff)?;
    Ok(spec
        .modes()
        .iter()
        .map(|m| m.label())
        .collect::<Vec<_>>()
        .join("\n"))
}

/// One eigenmode sampled on an `n_grid` x `n_grid` Cartesian grid over
/// [-1, 1]^2, row-major with the first row at y = -1. Points outside the
/// unit disk come back as NaN so the renderer can mask them.
#[wasm_bindgen]
pub fn disk_mode_field(cutoff: usize, index: usize, n_grid: usize) -> Result<Vec<f64>, String> {
    let spec = demo_spectrum(cutoff)?;
    if index >= spec.len() {
        return Err(format!(
            "mode index {index} out of range for cutoff {}",
            spec.len()
        ));
    }
    if n_grid < 2 || n_grid > 512 {
        return Err(format!("grid size must be between 2 and 512, got {n_grid}"));
    }
    let mode = &spec.modes()[index];
    let mut field = Vec::with_capacity(n_grid * n_grid);
    for iy in 0..n_grid {
        let y = -1.0 + 2.0 * iy as f64 / (n_grid - 1) as f64;
        for ix in 0..n_grid {
            let x = -1.0 + 2.0 * ix as f64 / (n_grid - 1) as f64;
            let r = (x * x + y * y).sqrt();
            if r > 1.0 {
                field.push(f64::NAN);
            } else {
                field.push(disk_eigenfunction(mode, r, y.atan2(x)).map_err(err)?);
            }
        }
    }
    Ok(field)
}

/// Steady-state covariance of the truncated disk system for one noise
/// model. Matrices come back flattened row-major through the getters.
#[wasm_bindgen]
pub struct DiskCovariance {
    n: usize,
    eigenvalues: Vec<f64>,
    q: Vec<f64>,
    p: Vec<f64>,
    residual_rel: f64,
    min_eigenvalue: f64,
}

#[wasm_bindgen]
impl DiskCovariance {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }

    #[wasm_bindgen(getter)]
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.clone()
    }

    /// Projected noise matrix Q, row-major n x n.
    #[wasm_bindgen(getter)]
    pub fn q(&self) -> Vec<f64> {
        self.q.clone()
    }

    /// Covariance P, row-major n x n.
    #[wasm_bindgen(getter)]
    pub fn p(&self) -> Vec<f64> {
        self.p.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn residual_rel(&self) -> f64 {
        self.residual_rel
    }

    #[wasm_bindgen(getter)]
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }
}

fn flatten(m: &SymMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            out.push(m.get(j, k));
        }
    }
    out
}

/// Solves for the covariance under `noise_kind` = "white" (uses `sigma2`),
/// "diagonal" (variance sigma2 / (1 + j)), or "kernel-gaussian" (uses
/// `sigma2` and `lengthscale`).
#[wasm_bindgen]
pub fn disk_covariance(
    cutoff: usize,
    noise_kind: &str,
    sigma2: f64,
    lengthscale: f64,
) -> Result<DiskCovariance, String> {
    let spec = demo_spectrum(cutoff)?;
    let noise = match noise_kind {
        "white" => NoiseSpec::White { sigma2 },
        "diagonal" => NoiseSpec::DiagonalDecay { c: sigma2, p: 1.0 },
        "kernel-gaussian" => {
            if !(lengthscale > 0.0) || !lengthscale.is_finite() {
                return Err(format!("lengthscale must be positive, got {lengthscale}"));
            }
            let ell2 = 2.0 * lengthscale * lengthscale;
            NoiseSpec::Isotropic(Arc::new(move |dist| sigma2 * (-dist * dist / ell2).exp()))
        }
        other => {
            return Err(format!(
                "unknown noise kind {other:?}; expected white, diagonal, or kernel-gaussian"
            ))
        }
    };
    let proj =
        project_noise(&noise, &Basis::new(spec.clone()), &demo_rules(), false).map_err(err)?;
    let sol = solve_spectral_lyapunov(&spec, &proj.q).map_err(err)?;
    Ok(DiskCovariance {
        n: spec.len(),
        eigenvalues: spec.eigenvalues().to_vec(),
        q: flatten(&proj.q),
        p: flatten(&sol.p),
        residual_rel: sol.residual_rel,
        min_eigenvalue: sol.min_eigenvalue,
    })
}

/// Truncation error sweep against a fixed reference truncation, white noise.
#[wasm_bindgen]
pub struct TruncationCurve {
    kept: Vec<u32>,
    lambda_next: Vec<f64>,
    measured: Vec<f64>,
    improved: Vec<f64>,
    coarse: Vec<f64>,
}

#[wasm_bindgen]
impl TruncationCurve {
    /// Kept mode counts N, ascending.
    #[wasm_bindgen(getter)]
    pub fn kept(&self) -> Vec<u32> {
        self.kept.clone()
    }

    /// |lambda_{N+1}| for each N, the rate variable of the improved bound.
    #[wasm_bindgen(getter)]
    pub fn lambda_next(&self) -> Vec<f64> {
        self.lambda_next.clone()
    }

    /// Operator norm of P_ref - P_N.
    #[wasm_bindgen(getter)]
    pub fn measured(&self) -> Vec<f64> {
        self.measured.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn improved(&self) -> Vec<f64> {
        self.improved.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn coarse(&self) -> Vec<f64> {
        self.coarse.clone()
    }
}

/// Measured truncation error and both bounds for every N in
/// 2, 4, 8, ... up to `n_ref` / 2, against a white-noise reference with
/// `n_ref` modes (capped at 256).
#[wasm_bindgen]
pub fn truncation_curve(n_ref: usize) -> Result<TruncationCurve, String> {
    if n_ref < 4 || n_ref > 256 {
        return Err(format!(
            "reference size must be between 4 and 256, got {n_ref}"
        ));
    }
    let spec = disk_spectrum(&GeometryParams::default(), n_ref).map_err(err)?;
    let q = SymMatrix::scaled_identity(n_ref, 1.0);
    let q_norm = operator_norm_sym(&q).map_err(err)?;
    let p_ref = solve_spectral_lyapunov(&spec, &q).map_err(err)?.p;
    let mut curve = TruncationCurve {
        kept: Vec::new(),
        lambda_next: Vec::new(),
        measured: Vec::new(),
        improved: Vec::new(),
        coarse: Vec::new(),
    };
    let mut n = 2;
    while n <= n_ref / 2 {
        let sub = spec.truncate(n).map_err(err)?;
        let p_n = solve_spectral_lyapunov(&sub, &q.leading_block(n).map_err(err)?)
            .map_err(err)?
            .p
            .embed_leading(n_ref)
            .map_err(err)?;
        let diff = SymMatrix::from_fn(n_ref, |j, k| p_ref.get(j, k) - p_n.get(j, k));
        let bounds = truncation_bound(&spec, n, q_norm).map_err(err)?;
        curve.kept.push(n as u32);
        curve.lambda_next.push(spec.eigenvalues()[n].abs());
        curve.measured.push(operator_norm_sym(&diff).map_err(err)?);
        curve.improved.push(bounds.improved);
        curve.coarse.push(bounds.coarse);
        n *= 2;
    }
    Ok(curve)
}
