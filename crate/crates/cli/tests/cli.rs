//! End-to-end runs of the installed binary: documented examples, exit
//! codes, config handling, and output formats.

use std::fs;
use std::process::{Command, Output};

fn lyacov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lyacov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn eigenvalues(doc: &serde_json::Value) -> Vec<f64> {
    doc["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect()
}

#[test]
fn sphere_band_one_spectrum() {
    let doc = json_of(&lyacov(&[
        "spectrum",
        "--set",
        "geometry=sphere",
        "--set",
        "L=1",
    ]));
    assert_eq!(eigenvalues(&doc), vec![-0.5, -2.5, -2.5, -2.5]);
    assert_eq!(doc["modes"].as_array().unwrap().len(), 4);
}

#[test]
fn oscillator_line_spectrum() {
    let doc = json_of(&lyacov(&[
        "spectrum",
        "--set",
        "geometry=oscillator",
        "--set",
        "gamma=1",
        "--set",
        "cutoff=3",
    ]));
    assert_eq!(eigenvalues(&doc), vec![-1.5, -2.5, -3.5]);
}

#[test]
fn disk_ground_eigenvalue() {
    let doc = json_of(&lyacov(&["spectrum", "--set", "cutoff=3"]));
    let lam = eigenvalues(&doc);
    assert!((lam[0] - -6.283185962946785).abs() < 1e-12, "{}", lam[0]);
}

#[test]
fn solve_white_noise_gives_diagonal_covariance() {
    let doc = json_of(&lyacov(&[
        "solve",
        "--set",
        "noise.sigma2=2",
        "--set",
        "cutoff=5",
    ]));
    let lam = eigenvalues(&doc);
    let p = doc["P"].as_array().unwrap();
    for (j, row) in p.iter().enumerate() {
        for (k, v) in row.as_array().unwrap().iter().enumerate() {
            let v = v.as_f64().unwrap();
            if j == k {
                let want = 2.0 / (2.0 * lam[j].abs());
                assert_eq!(v, want, "diagonal {j}");
            } else {
                assert_eq!(v, 0.0, "off-diagonal {j},{k}");
            }
        }
    }
    assert!(doc["residual_rel"].as_f64().unwrap() <= 1e-12);
    assert!(doc["block_structure"].is_null());
    let bounds = &doc["bounds"];
    assert!(bounds["improved"].as_f64().unwrap() <= bounds["coarse"].as_f64().unwrap());
}

#[test]
fn config_file_and_overrides_compose() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(
        &path,
        "# archived run\ngeometry = oscillator\nd = 2\ngamma = 2.0\ncutoff = 6\nnoise.kind = diagonal\n",
    )
    .unwrap();
    let doc = json_of(&lyacov(&[
        "solve",
        "--config",
        path.to_str().unwrap(),
        "--set",
        "cutoff=4",
    ]));
    assert_eq!(doc["geometry"], "oscillator");
    assert_eq!(doc["eigenvalues"].as_array().unwrap().len(), 4);
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    // unknown key: config error
    let out = lyacov(&["spectrum", "--set", "bogus=1"]);
    assert_eq!(out.status.code(), Some(2));
    // malformed value: config error
    let out = lyacov(&["spectrum", "--set", "alpha=-1"]);
    assert_eq!(out.status.code(), Some(2));
    // missing config file: config error
    let out = lyacov(&["spectrum", "--config", "/nonexistent/x.conf"]);
    assert_eq!(out.status.code(), Some(2));
    // verify sweep exceeding the reference cutoff: config error
    let out = lyacov(&["verify", "--set", "verify.n_ref=30"]);
    assert_eq!(out.status.code(), Some(2));
    // clean run: success
    let out = lyacov(&[
        "simulate",
        "--set",
        "cutoff=2",
        "--set",
        "sim.steps=2016",
        "--set",
        "sim.paths=4",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn statistical_failure_exits_4() {
    // a starved run (2 paths, 32 retained steps) has batch statistics noisy
    // enough that some seeds land an entry past the 4 sigma gate; runs are
    // pure functions of config and seed, so this one fails forever
    let out = lyacov(&[
        "simulate",
        "--set",
        "cutoff=4",
        "--set",
        "sim.steps=48",
        "--set",
        "sim.paths=2",
        "--seed",
        "31",
    ]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn compute_errors_exit_3() {
    // the config syntax is fine but the mode count exceeds the library's
    // truncation cap, which only the spectrum builder knows
    let out = lyacov(&["solve", "--set", "cutoff=3000"]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error"), "{err}");
}

#[test]
fn zero_noise_simulation_is_exactly_zero() {
    let doc = json_of(&lyacov(&[
        "simulate",
        "--set",
        "noise.sigma2=0",
        "--set",
        "cutoff=3",
        "--set",
        "sim.steps=1016",
        "--set",
        "sim.paths=2",
    ]));
    for row in doc["P_hat"].as_array().unwrap() {
        for v in row.as_array().unwrap() {
            assert_eq!(v.as_f64().unwrap(), 0.0);
        }
    }
    assert_eq!(doc["pass"], true);
}

#[test]
fn same_seed_reruns_are_bytewise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = lyacov(&[
            "simulate",
            "--set",
            "sim.steps=2016",
            "--set",
            "sim.paths=4",
            "--seed",
            "7",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.json");
    let out = lyacov(&[
        "simulate",
        "--set",
        "sim.steps=2016",
        "--set",
        "sim.paths=4",
        "--seed",
        "8",
        "--output",
        c.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn csv_format_flattens_matrices() {
    let out = lyacov(&["solve", "--set", "cutoff=2", "--set", "output.format=csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("matrix,row,col,value"));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    // 2 eigenvalues + 4 Q entries + 4 P entries
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.split(',').count() == 4));
}

#[test]
fn custom_kernel_table_matches_builtin_constant_kernel() {
    // a table of ones is the constant kernel; its projection must couple
    // only the angular average modes
    let dir = tempfile::tempdir().unwrap();
    let radial = 8;
    let angular = 16;
    let nodes = radial * angular;
    let mut table = String::new();
    for _ in 0..nodes {
        let row = vec!["1.0"; nodes].join(",");
        table.push_str(&row);
        table.push('\n');
    }
    let path = dir.path().join("ones.csv");
    fs::write(&path, table).unwrap();
    let doc = json_of(&lyacov(&[
        "solve",
        "--set",
        "noise.kind=kernel-custom-table",
        "--set",
        &format!("noise.table={}", path.display()),
        "--set",
        "quad.radial=8",
        "--set",
        "quad.angular=16",
        "--set",
        "cutoff=4",
        "--set",
        "noise.clip=true",
    ]));
    let q = doc["Q"].as_array().unwrap();
    // modes: (0,1,cos), (1,1,cos), (1,1,sin), (2,1,cos); constant noise
    // feeds only m = 0
    let q00 = q[0][0].as_f64().unwrap();
    assert!(q00 > 1e-3, "angular average mode must couple, got {q00}");
    for j in 1..4 {
        let qjj = q[j][j].as_f64().unwrap();
        assert!(qjj.abs() <= 1e-10 * q00, "m>0 diagonal {j}: {qjj}");
    }

    // a wrong-sized table is a config error
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1.0,2.0\n3.0,4.0\n").unwrap();
    let out = lyacov(&[
        "solve",
        "--set",
        "noise.kind=kernel-custom-table",
        "--set",
        &format!("noise.table={}", bad.display()),
        "--set",
        "quad.radial=8",
        "--set",
        "quad.angular=16",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_on_defaults_and_reports_sweep() {
    let out = lyacov(&["verify", "--set", "verify.samples=100"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["sweep"].as_array().unwrap().len(), 4);
    let slope = doc["slope"]["value"].as_f64().unwrap();
    assert!(
        (slope + 1.0).abs() < 0.05,
        "white-noise rate must sit at -1, got {slope}"
    );
}

#[test]
fn output_file_matches_stdout_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let stdout_run = lyacov(&["solve", "--set", "cutoff=3"]);
    let file_run = lyacov(&[
        "solve",
        "--set",
        "cutoff=3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(file_run.status.success());
    assert!(file_run.stdout.is_empty());
    assert_eq!(fs::read(&path).unwrap(), stdout_run.stdout);
}

#[test]
fn oscillator_slow_damping_warns_but_runs() {
    let out = lyacov(&[
        "spectrum",
        "--set",
        "geometry=oscillator",
        "--set",
        "d=3",
        "--set",
        "gamma=1.0",
    ]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning") && err.contains("d/2"), "{err}");
}

#[test]
fn help_exits_zero() {
    let out = lyacov(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["spectrum", "solve", "verify", "simulate"] {
        assert!(text.contains(sub), "help must list {sub}");
    }
}
