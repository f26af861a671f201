//! Monte Carlo validation of the spectral covariance. The truncated dynamics
//! dX = Lambda X dt + dW(t) with Cov(dW) = Q dt has the exact transition
//! X(t+dt) = e^{Lambda dt} X(t) + eta, eta ~ N(0, S(dt)) with S_jk =
//! Q_jk (e^{(lambda_j+lambda_k) dt} - 1)/(lambda_j + lambda_k), i.e. the
//! dissipation integral over one step. Sampling that transition directly has
//! no time-step bias, so the empirical steady-state covariance differs from
//! the Lyapunov solution by statistics alone. Uncertainty comes from batch
//! means: 16 batches per path, standard error of the batch-mean population.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{cholesky_psd, SymMatrix};
use crate::spectrum::DissipativeSpectrum;

/// Batches used for the batch-means standard error, per path.
pub const BATCHES_PER_PATH: usize = 16;

/// Simulation controls. `n_steps` counts total steps per path including
/// burn-in; after discarding `burn_in` steps the remainder is divided into
/// [`BATCHES_PER_PATH`] equal batches (a trailing remainder is dropped).
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub burn_in: usize,
    pub n_paths: usize,
    pub seed: u64,
}

impl SimConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sim.dt",
                message: format!("time step must be positive and finite, got {}", self.dt),
            });
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter {
                name: "sim.paths",
                message: "need at least one path".into(),
            });
        }
        if self.burn_in >= self.n_steps {
            return Err(Error::InvalidParameter {
                name: "sim.burn_in",
                message: format!(
                    "burn-in ({}) must be smaller than total steps ({})",
                    self.burn_in, self.n_steps
                ),
            });
        }
        if self.n_steps - self.burn_in < BATCHES_PER_PATH {
            return Err(Error::InvalidParameter {
                name: "sim.steps",
                message: format!(
                    "need at least {BATCHES_PER_PATH} post-burn-in steps, got {}",
                    self.n_steps - self.burn_in
                ),
            });
        }
        Ok(())
    }

    /// A step with dt * gamma_eff above this already equilibrates the
    /// slowest mode; larger values only waste random numbers.
    pub fn dt_warning(&self, gamma_eff: f64) -> Option<String> {
        let product = self.dt * gamma_eff;
        (product > 10.0).then(|| {
            format!(
                "dt * gamma_eff = {product:.3} > 10: one step fully equilibrates; \
                 consider a smaller dt"
            )
        })
    }
}

/// Burn-in long enough for the slowest mode to decay by e^{-10}.
pub fn default_burn_in(gamma_eff: f64, dt: f64) -> usize {
    (10.0 / (gamma_eff * dt)).ceil() as usize
}

/// Covariance of the exact one-step noise increment: the dissipation
/// integral truncated to [0, dt], S_jk = Q_jk expm1((lambda_j+lambda_k) dt)
/// / (lambda_j + lambda_k). Limits: S -> Q dt as dt -> 0 and S -> P as
/// dt -> infinity.
pub fn exact_step_covariance(
    spec: &DissipativeSpectrum,
    q: &SymMatrix,
    dt: f64,
) -> Result<SymMatrix> {
    if q.dim() != spec.len() {
        return Err(Error::DimensionMismatch {
            context: "noise matrix vs spectrum",
            expected: spec.len(),
            got: q.dim(),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            message: format!("time step must be positive and finite, got {dt}"),
        });
    }
    let lam = spec.eigenvalues();
    Ok(SymMatrix::from_fn(spec.len(), |j, k| {
        let s = lam[j] + lam[k];
        q.get(j, k) * (s * dt).exp_m1() / s
    }))
}

/// Empirical covariance estimate with batch-means uncertainty.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub p_hat: SymMatrix,
    /// Standard error of each entry of `p_hat` from the batch-mean spread.
    pub stderr: SymMatrix,
    /// Post-burn-in steps actually averaged per path.
    pub samples_per_path: usize,
    /// Total batches entering the standard error (paths x 16).
    pub n_batches: usize,
}

struct PathAccumulator {
    /// Upper-triangle batch means, `BATCHES_PER_PATH` blocks of tri_len.
    batches: Vec<f64>,
}

fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Runs `cfg.n_paths` independent trajectories of the exact discretization
/// and averages outer products. Each path draws from its own counter-derived
/// random stream (master seed + path index), and the cross-path reduction
/// runs in ascending path order, so the result is bitwise identical no
/// matter how many worker threads execute the paths.
pub fn simulate(spec: &DissipativeSpectrum, q: &SymMatrix, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let n = spec.len();
    if q.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "noise matrix vs spectrum",
            expected: n,
            got: q.dim(),
        });
    }
    let step_cov = exact_step_covariance(spec, q, cfg.dt)?;
    let l = cholesky_with_jitter(&step_cov)?;
    let decay: Vec<f64> = spec
        .eigenvalues()
        .iter()
        .map(|&lam| (lam * cfg.dt).exp())
        .collect();

    let batch_len = (cfg.n_steps - cfg.burn_in) / BATCHES_PER_PATH;
    let samples_per_path = batch_len * BATCHES_PER_PATH;
    let run_path = |path: usize| -> PathAccumulator {
        run_one_path(n, &l, &decay, cfg, batch_len, path as u64)
    };

    #[cfg(feature = "parallel")]
    let per_path: Vec<PathAccumulator> = {
        use rayon::prelude::*;
        (0..cfg.n_paths).into_par_iter().map(run_path).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_path: Vec<PathAccumulator> = (0..cfg.n_paths).map(run_path).collect();

    // Batch means across all paths, reduced in path order.
    let t = tri_len(n);
    let n_batches = cfg.n_paths * BATCHES_PER_PATH;
    let mut mean = vec![0.0_f64; t];
    for acc in &per_path {
        for batch in acc.batches.chunks(t) {
            for (m, &v) in mean.iter_mut().zip(batch) {
                *m += v;
            }
        }
    }
    for m in &mut mean {
        *m /= n_batches as f64;
    }
    let mut var = vec![0.0_f64; t];
    for acc in &per_path {
        for batch in acc.batches.chunks(t) {
            for ((s, &v), &m) in var.iter_mut().zip(batch).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
    }

    let idx = |j: usize, k: usize| j * n - j * (j + 1) / 2 + k; // j <= k
    let p_hat = SymMatrix::from_fn(n, |j, k| mean[idx(j, k)]);
    let denom = (n_batches * (n_batches - 1)) as f64;
    let stderr = SymMatrix::from_fn(n, |j, k| (var[idx(j, k)] / denom).sqrt());
    Ok(SimResult {
        p_hat,
        stderr,
        samples_per_path,
        n_batches,
    })
}

fn run_one_path(
    n: usize,
    l: &[f64],
    decay: &[f64],
    cfg: &SimConfig,
    batch_len: usize,
    path: u64,
) -> PathAccumulator {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    rng.set_stream(path);
    let t = tri_len(n);
    let mut batches = vec![0.0_f64; BATCHES_PER_PATH * t];
    let mut x = vec![0.0_f64; n];
    let mut z = vec![0.0_f64; n];
    let total = cfg.burn_in + batch_len * BATCHES_PER_PATH;
    for step in 0..total {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for i in 0..n {
            let mut eta = 0.0;
            for k in 0..=i {
                eta += l[i * n + k] * z[k];
            }
            x[i] = decay[i] * x[i] + eta;
        }
        if step >= cfg.burn_in {
            let batch = (step - cfg.burn_in) / batch_len;
            let out = &mut batches[batch * t..(batch + 1) * t];
            let mut pos = 0;
            for j in 0..n {
                let xj = x[j];
                for k in j..n {
                    out[pos] += xj * x[k];
                    pos += 1;
                }
            }
        }
    }
    let scale = 1.0 / batch_len as f64;
    for v in &mut batches {
        *v *= scale;
    }
    PathAccumulator { batches }
}

/// Cholesky with escalating diagonal jitter: quadrature-projected Q can make
/// the step covariance indefinite at rounding level. Starts at 1e-15 * trace
/// and grows tenfold, at most four jittered attempts.
fn cholesky_with_jitter(s: &SymMatrix) -> Result<Vec<f64>> {
    match cholesky_psd(s) {
        Ok(l) => return Ok(l),
        Err(_) => {}
    }
    let trace = s.trace();
    let n = s.dim();
    let mut jitter = 1e-15 * trace;
    let mut last = None;
    for _ in 0..4 {
        let jittered = SymMatrix::from_fn(n, |j, k| {
            if j == k {
                s.get(j, j) + jitter
            } else {
                s.get(j, k)
            }
        });
        match cholesky_psd(&jittered) {
            Ok(l) => return Ok(l),
            Err(e) => last = Some(e),
        }
        jitter *= 10.0;
    }
    Err(last.expect("jitter loop ran"))
}

/// Entrywise comparison of an empirical covariance against a reference.
#[derive(Debug, Clone)]
pub struct CompareReport {
    /// Largest |P_hat - P_ref| / stderr over entries with stderr > 0.
    pub max_z: f64,
    /// Entry attaining `max_z` (row, col).
    pub worst_entry: (usize, usize),
    /// Fraction of entries with z <= 4 (stderr-free entries count when they
    /// match exactly).
    pub frac_within: f64,
    /// Largest relative error over diagonal entries with nonzero reference.
    pub max_diag_rel: f64,
    /// An entry with stderr = 0 failed the exact-equality requirement.
    pub stderr_zero_mismatch: bool,
    /// frac_within >= 0.99 and no stderr-zero mismatches.
    pub pass: bool,
}

/// Z-scores `p_hat` against `p_ref`: entries with positive stderr must sit
/// within 4 standard errors at a 99% rate; entries with stderr = 0 carry no
/// sampling noise and must match exactly.
pub fn compare_covariance(
    p_hat: &SymMatrix,
    stderr: &SymMatrix,
    p_ref: &SymMatrix,
) -> Result<CompareReport> {
    let n = p_hat.dim();
    if stderr.dim() != n || p_ref.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "covariance comparison matrices",
            expected: n,
            got: stderr.dim().min(p_ref.dim()),
        });
    }
    let mut max_z = 0.0_f64;
    let mut worst = (0, 0);
    let mut within = 0usize;
    let mut total = 0usize;
    let mut mismatch = false;
    let mut max_diag_rel = 0.0_f64;
    for j in 0..n {
        for k in j..n {
            total += 1;
            let diff = (p_hat.get(j, k) - p_ref.get(j, k)).abs();
            let se = stderr.get(j, k);
            if se > 0.0 {
                let z = diff / se;
                if z > max_z {
                    max_z = z;
                    worst = (j, k);
                }
                if z <= 4.0 {
                    within += 1;
                }
            } else if diff == 0.0 {
                within += 1;
            } else {
                mismatch = true;
            }
        }
        let rf = p_ref.get(j, j);
        if rf != 0.0 {
            max_diag_rel = max_diag_rel.max((p_hat.get(j, j) - rf).abs() / rf.abs());
        }
    }
    let frac_within = within as f64 / total as f64;
    Ok(CompareReport {
        max_z,
        worst_entry: worst,
        frac_within,
        max_diag_rel,
        stderr_zero_mismatch: mismatch,
        pass: frac_within >= 0.99 && !mismatch,
    })
}
