//! The four subcommands. Each is a pure function of the resolved
//! `RunConfig`: it builds the spectrum, projects the configured noise,
//! runs its computation, and returns the serialized document plus a flag
//! for checks that failed (mapped to exit code 4 by `main`).

use std::fs;
use std::sync::Arc;

use lyacov::{
    block_structure_report, compare_covariance, default_burn_in, integral_bound_check,
    operator_norm_sym, project_noise, quadrature_oracle_covariance, semigroup_decay_check,
    simulate, solve_dense_lyapunov, solve_spectral_lyapunov, truncation_bound, Basis,
    DissipativeSpectrum, Geometry, NoiseProjection, NoiseSpec, SimConfig, SymMatrix,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::config::{NoiseKind, OutputFormat, RunConfig};
use crate::output::{fmt_float, push_matrix_triples, to_json_bytes};

pub enum CmdError {
    /// Bad inputs discovered past argument parsing (missing or malformed
    /// data files); exit code 2.
    Config(String),
    /// Numerical or contract failure inside the library; exit code 3.
    Compute(lyacov::Error),
}

impl From<lyacov::Error> for CmdError {
    fn from(e: lyacov::Error) -> Self {
        CmdError::Compute(e)
    }
}

pub struct CmdOutput {
    pub bytes: Vec<u8>,
    /// A verification or statistical check failed; exit code 4.
    pub failed: bool,
}

type CmdResult = std::result::Result<CmdOutput, CmdError>;

/// Spectrum at the run truncation: `cutoff` modes, or the full multiplets
/// up to band limit L on the sphere.
fn build_run_spectrum(cfg: &RunConfig) -> Result<DissipativeSpectrum, lyacov::Error> {
    let params = cfg.geometry_params();
    match cfg.geometry {
        Geometry::Disk => lyacov::basis::disk::disk_spectrum(&params, cfg.cutoff),
        Geometry::Oscillator => lyacov::basis::oscillator::oscillator_spectrum(&params, cfg.cutoff),
        Geometry::Sphere => lyacov::basis::sphere::sphere_spectrum(&params, cfg.l_max),
        Geometry::Synthetic => unreachable!("config cannot name the synthetic geometry"),
    }
}

/// Run spectrum plus one extra mode, so lambda_{N+1} is available for the
/// improved truncation bound. Returns (extended, run).
fn build_extended_spectrum(
    cfg: &RunConfig,
) -> Result<(DissipativeSpectrum, DissipativeSpectrum), lyacov::Error> {
    let params = cfg.geometry_params();
    let n = cfg.mode_count();
    let extended = match cfg.geometry {
        Geometry::Disk => lyacov::basis::disk::disk_spectrum(&params, cfg.cutoff + 1)?,
        Geometry::Oscillator => {
            lyacov::basis::oscillator::oscillator_spectrum(&params, cfg.cutoff + 1)?
        }
        Geometry::Sphere => lyacov::basis::sphere::sphere_spectrum(&params, cfg.l_max + 1)?,
        Geometry::Synthetic => unreachable!("config cannot name the synthetic geometry"),
    };
    let run = extended.truncate(n)?;
    Ok((extended, run))
}

/// Reference spectrum with at least `n_ref` modes, truncated to exactly
/// `n_ref`.
fn build_reference_spectrum(
    cfg: &RunConfig,
    n_ref: usize,
) -> Result<DissipativeSpectrum, lyacov::Error> {
    let params = cfg.geometry_params();
    match cfg.geometry {
        Geometry::Disk => lyacov::basis::disk::disk_spectrum(&params, n_ref),
        Geometry::Oscillator => lyacov::basis::oscillator::oscillator_spectrum(&params, n_ref),
        Geometry::Sphere => {
            // smallest band limit whose multiplets cover n_ref modes
            let mut l = (n_ref as f64).sqrt().ceil() as u32;
            while (l as usize + 1) * (l as usize + 1) < n_ref {
                l += 1;
            }
            lyacov::basis::sphere::sphere_spectrum(&params, l)?.truncate(n_ref)
        }
        Geometry::Synthetic => unreachable!("config cannot name the synthetic geometry"),
    }
}

fn noise_spec(cfg: &RunConfig) -> Result<NoiseSpec, CmdError> {
    Ok(match cfg.noise.kind {
        NoiseKind::White => NoiseSpec::White {
            sigma2: cfg.noise.sigma2,
        },
        NoiseKind::Diagonal => NoiseSpec::DiagonalDecay {
            c: cfg.noise.c,
            p: cfg.noise.p,
        },
        NoiseKind::KernelGaussian => {
            let s2 = cfg.noise.sigma2;
            let ell = cfg.noise.lengthscale;
            NoiseSpec::Isotropic(Arc::new(move |dist: f64| {
                s2 * (-dist * dist / (2.0 * ell * ell)).exp()
            }))
        }
        NoiseKind::KernelCustomTable => load_kernel_table(cfg)?,
    })
}

/// Reads a dense square CSV of kernel values K(x_i, x_j) sampled at the
/// quadrature grid nodes, row-major, one grid row per line.
fn load_kernel_table(cfg: &RunConfig) -> Result<NoiseSpec, CmdError> {
    let path = cfg
        .noise
        .table
        .as_ref()
        .expect("validated: table path present");
    let text = fs::read_to_string(path).map_err(|e| {
        CmdError::Config(format!("noise.table: cannot read {}: {e}", path.display()))
    })?;
    let expected = match cfg.geometry {
        Geometry::Disk => cfg.quad.radial * cfg.quad.angular,
        Geometry::Sphere => cfg.quad.sphere_polar * cfg.quad.angular,
        _ => unreachable!("validated: kernel noise implies a grid geometry"),
    };
    let mut values = Vec::new();
    let mut n_rows = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        n_rows += 1;
        let before = values.len();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                CmdError::Config(format!(
                    "noise.table: line {}: expected a number, got `{}`",
                    idx + 1,
                    field.trim()
                ))
            })?;
            values.push(v);
        }
        let row_len = values.len() - before;
        if row_len != expected {
            return Err(CmdError::Config(format!(
                "noise.table: line {}: {row_len} values, grid has {expected} nodes \
                 (quadrature orders give a {expected}-node grid)",
                idx + 1
            )));
        }
    }
    if n_rows != expected {
        return Err(CmdError::Config(format!(
            "noise.table: {n_rows} rows, grid has {expected} nodes"
        )));
    }
    Ok(NoiseSpec::KernelTable {
        values: Arc::new(values),
        n_nodes: expected,
    })
}

fn project(cfg: &RunConfig, basis: &Basis) -> Result<NoiseProjection, CmdError> {
    let spec = noise_spec(cfg)?;
    let proj = project_noise(&spec, basis, &cfg.quad, cfg.noise.clip)?;
    if !proj.psd_ok && !proj.clipped {
        eprintln!(
            "warning: projected noise is indefinite beyond tolerance \
             (min eigenvalue {:.3e}); set noise.clip = true to repair",
            proj.min_eigenvalue
        );
    }
    Ok(proj)
}

fn warn_slow_oscillator_damping(cfg: &RunConfig) {
    if cfg.geometry == Geometry::Oscillator && cfg.gamma <= cfg.d as f64 / 2.0 {
        eprintln!(
            "warning: gamma = {} <= d/2 = {}: damping is slower than the ground \
             level spacing; the spectrum is still stable",
            cfg.gamma,
            cfg.d as f64 / 2.0
        );
    }
}

// ---------------------------------------------------------------- spectrum

#[derive(Serialize)]
struct SpectrumDoc {
    geometry: &'static str,
    modes: Vec<String>,
    eigenvalues: Vec<f64>,
    gamma_eff: f64,
}

pub fn cmd_spectrum(cfg: &RunConfig) -> CmdResult {
    warn_slow_oscillator_damping(cfg);
    let spec = build_run_spectrum(cfg)?;
    let doc = SpectrumDoc {
        geometry: cfg.geometry.name(),
        modes: spec.modes().iter().map(|m| m.label()).collect(),
        eigenvalues: spec.eigenvalues().to_vec(),
        gamma_eff: spec.gamma_eff(),
    };
    let bytes = match cfg.output_format {
        OutputFormat::Json => to_json_bytes(&doc),
        OutputFormat::Csv => {
            let mut s = String::from("index,label,eigenvalue\n");
            for (i, (m, &lam)) in doc.modes.iter().zip(&doc.eigenvalues).enumerate() {
                s.push_str(&format!("{i},{m},{}\n", fmt_float(lam)));
            }
            s.into_bytes()
        }
    };
    Ok(CmdOutput {
        bytes,
        failed: false,
    })
}

// ------------------------------------------------------------------- solve

#[derive(Serialize)]
struct BoundsDoc {
    coarse: f64,
    improved: f64,
}

#[derive(Serialize)]
struct BlockDoc {
    max_cross_coupling: f64,
    threshold: f64,
    block_diagonal: bool,
}

#[derive(Serialize)]
struct BlockPairDoc {
    #[serde(rename = "Q")]
    q: BlockDoc,
    #[serde(rename = "P")]
    p: BlockDoc,
}

#[derive(Serialize)]
struct SolveDoc {
    geometry: &'static str,
    modes: Vec<String>,
    eigenvalues: Vec<f64>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    residual_rel: f64,
    #[serde(rename = "min_eig_P")]
    min_eig_p: f64,
    bounds: BoundsDoc,
    noise_psd_ok: bool,
    noise_clipped: bool,
    /// Azimuthal coupling diagnostic; null unless the noise is isotropic
    /// on a geometry with an angular quantum number.
    block_structure: Option<BlockPairDoc>,
}

fn block_doc(m: &SymMatrix, spec: &DissipativeSpectrum) -> Result<BlockDoc, lyacov::Error> {
    let r = block_structure_report(m, spec.modes())?;
    Ok(BlockDoc {
        max_cross_coupling: r.max_cross_coupling,
        threshold: r.threshold,
        block_diagonal: r.block_diagonal,
    })
}

pub fn cmd_solve(cfg: &RunConfig) -> CmdResult {
    warn_slow_oscillator_damping(cfg);
    let (extended, run) = build_extended_spectrum(cfg)?;
    let basis = Basis::new(run.clone());
    let proj = project(cfg, &basis)?;
    let sol = solve_spectral_lyapunov(&run, &proj.q)?;
    let q_norm = operator_norm_sym(&proj.q)?;
    let bounds = truncation_bound(&extended, run.len(), q_norm)?;
    let block_structure = if cfg.noise.kind == NoiseKind::KernelGaussian {
        Some(BlockPairDoc {
            q: block_doc(&proj.q, &run)?,
            p: block_doc(&sol.p, &run)?,
        })
    } else {
        None
    };
    let doc = SolveDoc {
        geometry: cfg.geometry.name(),
        modes: run.modes().iter().map(|m| m.label()).collect(),
        eigenvalues: run.eigenvalues().to_vec(),
        q: proj.q.to_rows(),
        p: sol.p.to_rows(),
        residual_rel: sol.residual_rel,
        min_eig_p: sol.min_eigenvalue,
        bounds: BoundsDoc {
            coarse: bounds.coarse,
            improved: bounds.improved,
        },
        noise_psd_ok: proj.psd_ok,
        noise_clipped: proj.clipped,
        block_structure,
    };
    let bytes = match cfg.output_format {
        OutputFormat::Json => to_json_bytes(&doc),
        OutputFormat::Csv => {
            let mut s = String::from("matrix,row,col,value\n");
            for (i, &lam) in doc.eigenvalues.iter().enumerate() {
                s.push_str(&format!("lambda,{i},{i},{}\n", fmt_float(lam)));
            }
            push_matrix_triples(&mut s, "Q", &doc.q);
            push_matrix_triples(&mut s, "P", &doc.p);
            s.into_bytes()
        }
    };
    Ok(CmdOutput {
        bytes,
        failed: false,
    })
}

// ------------------------------------------------------------------ verify

#[derive(Serialize)]
struct SweepRowDoc {
    n: usize,
    lambda_next: f64,
    measured: f64,
    improved: f64,
    coarse: f64,
    ok: bool,
}

#[derive(Serialize)]
struct SlopeDoc {
    value: f64,
    limit: f64,
    ok: bool,
}

#[derive(Serialize)]
struct OracleDoc {
    n: usize,
    /// Relative Frobenius gap to the vectorized dense solve; null when the
    /// run cutoff exceeds the dense solver's size cap.
    dense_rel_gap: Option<f64>,
    dense_tol: f64,
    quadrature_rel_gap: f64,
    quadrature_tol: f64,
    ok: bool,
}

#[derive(Serialize)]
struct CountDoc {
    samples: usize,
    violations: usize,
}

#[derive(Serialize)]
struct VerifyDoc {
    geometry: &'static str,
    n_ref: usize,
    q_norm: f64,
    sweep: Vec<SweepRowDoc>,
    slope: SlopeDoc,
    oracle: OracleDoc,
    semigroup: CountDoc,
    integral: CountDoc,
    pass: bool,
}

fn rel_frobenius(a: &SymMatrix, b: &SymMatrix) -> Result<f64, lyacov::Error> {
    let diff = a.sub(b)?.frobenius_norm();
    Ok(diff / a.frobenius_norm().max(1e-300))
}

/// Least-squares slope of ln(measured) against ln|lambda_{N+1}| over sweep
/// points with positive error; None when fewer than two such points exist
/// (then the rate claim is vacuous).
fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

const SLOPE_LIMIT: f64 = -0.85; // decay rate -1 with 0.15 fit tolerance
const DENSE_ORACLE_TOL: f64 = 1e-10;
const QUADRATURE_ORACLE_TOL: f64 = 1e-6;
const QUADRATURE_ORACLE_STEPS: usize = 10_000;

pub fn cmd_verify(cfg: &RunConfig) -> CmdResult {
    warn_slow_oscillator_damping(cfg);
    let n_run = cfg.mode_count();
    let reference = build_reference_spectrum(cfg, cfg.verify.n_ref)?;
    let basis_ref = Basis::new(reference.clone());
    let proj = project(cfg, &basis_ref)?;
    let q_norm = operator_norm_sym(&proj.q)?;
    let p_ref = solve_spectral_lyapunov(&reference, &proj.q)?.p;

    // truncation sweep: measured operator-norm error against both bounds
    let mut sweep = Vec::new();
    let mut slope_points = Vec::new();
    for &n in &cfg.verify.sweep {
        let spec_n = reference.truncate(n)?;
        let q_n = proj.q.leading_block(n)?;
        let p_n = solve_spectral_lyapunov(&spec_n, &q_n)?.p;
        let measured = operator_norm_sym(&p_ref.sub(&p_n.embed_leading(reference.len())?)?)?;
        let bounds = truncation_bound(&reference, n, q_norm)?;
        let lambda_next = reference.eigenvalues()[n];
        if measured > 0.0 {
            slope_points.push((lambda_next.abs().ln(), measured.ln()));
        }
        sweep.push(SweepRowDoc {
            n,
            lambda_next,
            measured,
            improved: bounds.improved,
            coarse: bounds.coarse,
            ok: measured <= bounds.improved && bounds.improved <= bounds.coarse,
        });
    }
    let slope_value = fit_slope(&slope_points);
    let slope = SlopeDoc {
        value: slope_value.unwrap_or(f64::NAN),
        limit: SLOPE_LIMIT,
        ok: slope_value.map_or(true, |s| s <= SLOPE_LIMIT),
    };

    // oracle agreement at the run cutoff
    let run = reference.truncate(n_run)?;
    let q_run = proj.q.leading_block(n_run)?;
    let p_run = solve_spectral_lyapunov(&run, &q_run)?.p;
    let dense_rel_gap = if n_run <= lyacov::lyapunov::MAX_DENSE_DIM {
        Some(rel_frobenius(&p_run, &solve_dense_lyapunov(&run, &q_run)?)?)
    } else {
        None
    };
    let horizon = 10.0 / run.gamma_eff();
    let p_quad = quadrature_oracle_covariance(&run, &q_run, horizon, QUADRATURE_ORACLE_STEPS)?;
    let quadrature_rel_gap = rel_frobenius(&p_run, &p_quad)?;
    let oracle = OracleDoc {
        n: n_run,
        dense_rel_gap,
        dense_tol: DENSE_ORACLE_TOL,
        quadrature_rel_gap,
        quadrature_tol: QUADRATURE_ORACLE_TOL,
        ok: dense_rel_gap.map_or(true, |g| g <= DENSE_ORACLE_TOL)
            && quadrature_rel_gap <= QUADRATURE_ORACLE_TOL,
    };

    // randomized decay and correlation-bound spot checks on the run spectrum
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut semigroup_violations = 0usize;
    let mut integral_violations = 0usize;
    for _ in 0..cfg.verify.samples {
        let coeffs: Vec<f64> = (0..n_run).map(|_| rng.random_range(-3.0..3.0)).collect();
        let t: f64 = rng.random_range(0.0..20.0);
        let (lhs, rhs) = semigroup_decay_check(&run, &coeffs, t)?;
        if lhs > rhs {
            semigroup_violations += 1;
        }
        let phi: Vec<f64> = (0..n_run).map(|_| rng.random_range(-1.0..1.0)).collect();
        let psi: Vec<f64> = (0..n_run).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (value, bound) = integral_bound_check(&run, &q_run, &phi, &psi)?;
        if value > bound {
            integral_violations += 1;
        }
    }

    let pass = sweep.iter().all(|r| r.ok)
        && slope.ok
        && oracle.ok
        && semigroup_violations == 0
        && integral_violations == 0;
    let doc = VerifyDoc {
        geometry: cfg.geometry.name(),
        n_ref: cfg.verify.n_ref,
        q_norm,
        sweep,
        slope,
        oracle,
        semigroup: CountDoc {
            samples: cfg.verify.samples,
            violations: semigroup_violations,
        },
        integral: CountDoc {
            samples: cfg.verify.samples,
            violations: integral_violations,
        },
        pass,
    };
    eprintln!("verify: {}", if pass { "PASS" } else { "FAIL" });
    let bytes = match cfg.output_format {
        OutputFormat::Json => to_json_bytes(&doc),
        OutputFormat::Csv => {
            let mut s = String::from("n,lambda_next,measured,improved,coarse,ok\n");
            for r in &doc.sweep {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.n,
                    fmt_float(r.lambda_next),
                    fmt_float(r.measured),
                    fmt_float(r.improved),
                    fmt_float(r.coarse),
                    r.ok
                ));
            }
            s.into_bytes()
        }
    };
    Ok(CmdOutput {
        bytes,
        failed: !pass,
    })
}

// ---------------------------------------------------------------- simulate

#[derive(Serialize)]
struct ComparisonDoc {
    max_z: f64,
    worst_entry: [usize; 2],
    frac_within: f64,
    max_diag_rel: f64,
    stderr_zero_mismatch: bool,
    pass: bool,
}

#[derive(Serialize)]
struct SimulateDoc {
    geometry: &'static str,
    dt: f64,
    steps: usize,
    burn_in: usize,
    paths: usize,
    seed: u64,
    eigenvalues: Vec<f64>,
    #[serde(rename = "P_hat")]
    p_hat: Vec<Vec<f64>>,
    stderr: Vec<Vec<f64>>,
    #[serde(rename = "P_ref")]
    p_ref: Vec<Vec<f64>>,
    comparison: ComparisonDoc,
    pass: bool,
}

pub fn cmd_simulate(cfg: &RunConfig) -> CmdResult {
    warn_slow_oscillator_damping(cfg);
    let run = build_run_spectrum(cfg)?;
    let basis = Basis::new(run.clone());
    let proj = project(cfg, &basis)?;
    let p_ref = solve_spectral_lyapunov(&run, &proj.q)?.p;
    let burn_in = cfg
        .sim
        .burn_in
        .unwrap_or_else(|| default_burn_in(run.gamma_eff(), cfg.sim.dt));
    let sim_cfg = SimConfig {
        dt: cfg.sim.dt,
        n_steps: cfg.sim.steps,
        burn_in,
        n_paths: cfg.sim.paths,
        seed: cfg.seed,
    };
    if let Some(w) = sim_cfg.dt_warning(run.gamma_eff()) {
        eprintln!("warning: {w}");
    }
    let result = simulate(&run, &proj.q, &sim_cfg)?;
    let report = compare_covariance(&result.p_hat, &result.stderr, &p_ref)?;
    let doc = SimulateDoc {
        geometry: cfg.geometry.name(),
        dt: cfg.sim.dt,
        steps: cfg.sim.steps,
        burn_in,
        paths: cfg.sim.paths,
        seed: cfg.seed,
        eigenvalues: run.eigenvalues().to_vec(),
        p_hat: result.p_hat.to_rows(),
        stderr: result.stderr.to_rows(),
        p_ref: p_ref.to_rows(),
        comparison: ComparisonDoc {
            max_z: report.max_z,
            worst_entry: [report.worst_entry.0, report.worst_entry.1],
            frac_within: report.frac_within,
            max_diag_rel: report.max_diag_rel,
            stderr_zero_mismatch: report.stderr_zero_mismatch,
            pass: report.pass,
        },
        pass: report.pass,
    };
    eprintln!("simulate: {}", if report.pass { "PASS" } else { "FAIL" });
    let bytes = match cfg.output_format {
        OutputFormat::Json => to_json_bytes(&doc),
        OutputFormat::Csv => {
            let mut s = String::from("matrix,row,col,value\n");
            push_matrix_triples(&mut s, "P_hat", &doc.p_hat);
            push_matrix_triples(&mut s, "stderr", &doc.stderr);
            push_matrix_triples(&mut s, "P_ref", &doc.p_ref);
            s.into_bytes()
        }
    };
    Ok(CmdOutput {
        bytes,
        failed: !report.pass,
    })
}
