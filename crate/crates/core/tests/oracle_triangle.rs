//! Cross-checks the three independent routes to the stationary covariance:
//! the entrywise spectral formula, the dense Kronecker-vectorized linear
//! solve, and time quadrature of the dissipation integral. Agreement within
//! stated tolerances on random instances is the library's core correctness
//! argument, since no published numbers exist to compare against.

use std::sync::Arc;

use lyacov::basis::disk::disk_spectrum;
use lyacov::basis::oscillator::oscillator_spectrum;
use lyacov::basis::sphere::sphere_spectrum;
use lyacov::*;

fn xorshift(state: &mut u64) -> f64 {
    *state ^= *state << 13;
    *state ^= *state >> 7;
    *state ^= *state << 17;
    (*state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

/// Random stable spectrum in [-10, -0.1] with a random PSD noise matrix.
fn random_instance(seed: u64, n: usize) -> (DissipativeSpectrum, SymMatrix) {
    let mut s = seed;
    let lam: Vec<f64> = (0..n)
        .map(|_| -0.1 - 4.95 * (xorshift(&mut s) + 1.0))
        .collect();
    let spec = DissipativeSpectrum::synthetic(lam).unwrap();
    let b: Vec<f64> = (0..n * n).map(|_| xorshift(&mut s)).collect();
    let q = SymMatrix::from_fn(n, |j, k| (0..n).map(|i| b[j * n + i] * b[k * n + i]).sum());
    (spec, q)
}

fn rel_frobenius(a: &SymMatrix, b: &SymMatrix) -> f64 {
    let diff = a.sub(b).unwrap().frobenius_norm();
    diff / a.frobenius_norm().max(1e-300)
}

#[test]
fn triangle_agreement_across_dimensions() {
    for &n in &[1usize, 2, 3, 5, 8, 13, 16] {
        for seed in 1..=3u64 {
            let (spec, q) = random_instance(seed.wrapping_mul(0x9e37) + n as u64, n);
            let spectral = solve_spectral_lyapunov(&spec, &q).unwrap().p;
            let dense = solve_dense_lyapunov(&spec, &q).unwrap();
            let horizon = 10.0 / spec.gamma_eff();
            let quad = quadrature_oracle_covariance(&spec, &q, horizon, 10_000).unwrap();

            let sd = rel_frobenius(&spectral, &dense);
            assert!(sd <= 1e-10, "n={n} seed={seed}: spectral vs dense {sd:e}");
            let sq = rel_frobenius(&spectral, &quad);
            assert!(
                sq <= 1e-6,
                "n={n} seed={seed}: spectral vs quadrature {sq:e}"
            );
            let dq = rel_frobenius(&dense, &quad);
            assert!(dq <= 1e-6, "n={n} seed={seed}: dense vs quadrature {dq:e}");
        }
    }
}

#[test]
fn triangle_on_geometry_spectra() {
    // the algebra is geometry-blind, but run the full triangle once per
    // geometry to tie spectra construction into the same contract
    let disk = disk_spectrum(&GeometryParams::default(), 10).unwrap();
    let osc = oscillator_spectrum(
        &GeometryParams {
            alpha: 1.0,
            gamma: 1.0,
            d: 2,
        },
        10,
    )
    .unwrap();
    let sphere = sphere_spectrum(&GeometryParams::default(), 2).unwrap(); // 9 modes
    for spec in [disk, osc, sphere] {
        let n = spec.len();
        let mut state = 0xabcdef12345_u64;
        let b: Vec<f64> = (0..n * n).map(|_| xorshift(&mut state)).collect();
        let q = SymMatrix::from_fn(n, |j, k| (0..n).map(|i| b[j * n + i] * b[k * n + i]).sum());
        let spectral = solve_spectral_lyapunov(&spec, &q).unwrap().p;
        let dense = solve_dense_lyapunov(&spec, &q).unwrap();
        assert!(rel_frobenius(&spectral, &dense) <= 1e-10);
        let quad =
            quadrature_oracle_covariance(&spec, &q, 10.0 / spec.gamma_eff(), 10_000).unwrap();
        assert!(rel_frobenius(&spectral, &quad) <= 1e-6);
    }
}

#[test]
fn diagonal_law_all_geometries_cutoff_25() {
    // diagonal noise: P must be diagonal with P_jj = Q_jj / (2 |lambda_j|),
    // and the spectral formula reproduces that division bit for bit because
    // -(lambda + lambda) and 2 |lambda| are the same float
    let disk = disk_spectrum(&GeometryParams::default(), 25).unwrap();
    let osc = oscillator_spectrum(
        &GeometryParams {
            alpha: 1.0,
            gamma: 0.75,
            d: 3,
        },
        25,
    )
    .unwrap();
    let sphere = sphere_spectrum(&GeometryParams::default(), 4).unwrap(); // (4+1)^2 = 25
    for spec in [disk, osc, sphere] {
        assert_eq!(spec.len(), 25);
        let basis = Basis::new(spec.clone());
        let proj = project_noise(
            &NoiseSpec::DiagonalDecay { c: 1.3, p: 1.0 },
            &basis,
            &QuadratureSet::default(),
            false,
        )
        .unwrap();
        let p = solve_spectral_lyapunov(&spec, &proj.q).unwrap().p;
        for j in 0..25 {
            for k in 0..25 {
                if j == k {
                    let want = proj.q.get(j, j) / (2.0 * spec.eigenvalues()[j].abs());
                    assert_eq!(p.get(j, j), want, "diagonal entry {j}");
                } else {
                    assert_eq!(p.get(j, k), 0.0, "off-diagonal {j},{k}");
                }
            }
        }
    }
}

#[test]
fn white_noise_truncation_error_equals_improved_bound() {
    // for white noise both P and P - P_N are diagonal, so the measured
    // operator-norm error IS the improved bound, floating point included;
    // the coarse bound dominates it strictly once |lambda_{N+1}| > gamma_eff
    let full = disk_spectrum(&GeometryParams::default(), 64).unwrap();
    let sigma2 = 1.0;
    let q_full = SymMatrix::scaled_identity(64, sigma2);
    let p_full = solve_spectral_lyapunov(&full, &q_full).unwrap().p;
    let q_norm = operator_norm_sym(&q_full).unwrap();
    assert_eq!(q_norm, sigma2);

    for n in [10usize, 20, 40] {
        let spec_n = full.truncate(n).unwrap();
        let q_n = q_full.leading_block(n).unwrap();
        let p_n = solve_spectral_lyapunov(&spec_n, &q_n).unwrap().p;
        let measured =
            operator_norm_sym(&p_full.sub(&p_n.embed_leading(64).unwrap()).unwrap()).unwrap();
        let bounds = truncation_bound(&full, n, q_norm).unwrap();
        assert_eq!(measured, bounds.improved, "N={n}");
        assert!(bounds.improved <= bounds.coarse);
        assert!(measured <= bounds.coarse);
    }
}

#[test]
fn generic_noise_respects_both_bounds() {
    let full = disk_spectrum(&GeometryParams::default(), 48).unwrap();
    let basis = Basis::new(full.clone());
    let proj = project_noise(
        &NoiseSpec::DiagonalDecay { c: 2.0, p: 0.7 },
        &basis,
        &QuadratureSet::default(),
        false,
    )
    .unwrap();
    let p_full = solve_spectral_lyapunov(&full, &proj.q).unwrap().p;
    let q_norm = operator_norm_sym(&proj.q).unwrap();
    for n in [8usize, 16, 32] {
        let spec_n = full.truncate(n).unwrap();
        let q_n = proj.q.leading_block(n).unwrap();
        let p_n = solve_spectral_lyapunov(&spec_n, &q_n).unwrap().p;
        let measured =
            operator_norm_sym(&p_full.sub(&p_n.embed_leading(48).unwrap()).unwrap()).unwrap();
        let bounds = truncation_bound(&full, n, q_norm).unwrap();
        assert!(
            measured <= bounds.improved && bounds.improved <= bounds.coarse,
            "N={n}: measured {measured:e} improved {:e} coarse {:e}",
            bounds.improved,
            bounds.coarse
        );
    }
}

#[test]
fn kernel_projection_nests_and_reprojects_identically() {
    let rules = QuadratureSet {
        radial: 24,
        angular: 48,
        hermite: 40,
        sphere_polar: 24,
    };
    let profile: NoiseSpec = NoiseSpec::Isotropic(Arc::new(|d: f64| (-d * d / 0.25).exp()));
    let big = Basis::new(disk_spectrum(&GeometryParams::default(), 20).unwrap());
    let small = Basis::new(disk_spectrum(&GeometryParams::default(), 12).unwrap());

    let q_big = project_noise(&profile, &big, &rules, false).unwrap().q;
    let q_small = project_noise(&profile, &small, &rules, false).unwrap().q;
    let q_again = project_noise(&profile, &small, &rules, false).unwrap().q;
    assert_eq!(
        q_small.as_slice(),
        q_again.as_slice(),
        "projection not deterministic"
    );

    // mode lists nest, the grid is unchanged, and every entry depends only
    // on its own pair of modes, so the small projection is the leading block
    for j in 0..12 {
        for k in 0..12 {
            assert_eq!(q_small.get(j, k), q_big.get(j, k), "entry {j},{k}");
        }
    }

    // and the covariances nest in turn
    let p_big = solve_spectral_lyapunov(big.spectrum(), &q_big).unwrap().p;
    let p_small = solve_spectral_lyapunov(small.spectrum(), &q_small)
        .unwrap()
        .p;
    for j in 0..12 {
        for k in 0..12 {
            assert_eq!(p_small.get(j, k), p_big.get(j, k));
        }
    }
}

#[test]
fn simulation_closes_the_loop_on_a_disk_instance() {
    // spectral P vs Monte Carlo on an actual geometry + projected noise,
    // the full pipeline in miniature
    let spec = disk_spectrum(&GeometryParams::default(), 6).unwrap();
    let basis = Basis::new(spec.clone());
    let proj = project_noise(
        &NoiseSpec::DiagonalDecay { c: 1.0, p: 1.0 },
        &basis,
        &QuadratureSet::default(),
        false,
    )
    .unwrap();
    let p_ref = solve_spectral_lyapunov(&spec, &proj.q).unwrap().p;
    let cfg = SimConfig {
        dt: 0.1,
        n_steps: 30_016,
        burn_in: default_burn_in(spec.gamma_eff(), 0.1),
        n_paths: 8,
        seed: 2024,
    };
    let sim = simulate(&spec, &proj.q, &cfg).unwrap();
    let report = compare_covariance(&sim.p_hat, &sim.stderr, &p_ref).unwrap();
    assert!(
        report.pass,
        "max z {} at {:?}, frac within {}",
        report.max_z, report.worst_entry, report.frac_within
    );
}
