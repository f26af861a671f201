//! Line-oriented `key = value` run configuration.
//!
//! A run is archived as one flat UTF-8 file: `#` starts a comment, blank
//! lines are ignored, dotted keys group related settings. Every value is
//! validated where it is parsed so errors point at the offending line and
//! key. `--set KEY=VALUE` overrides are applied on top of the file in
//! command-line order.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use lyacov::{Geometry, GeometryParams, QuadratureSet};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    White,
    Diagonal,
    KernelGaussian,
    KernelCustomTable,
}

#[derive(Debug, Clone)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub sigma2: f64,
    pub c: f64,
    pub p: f64,
    pub lengthscale: f64,
    pub table: Option<PathBuf>,
    pub clip: bool,
}

#[derive(Debug, Clone)]
pub struct SimKeys {
    pub dt: f64,
    pub steps: usize,
    /// None means the command derives it from gamma_eff and dt.
    pub burn_in: Option<usize>,
    pub paths: usize,
}

#[derive(Debug, Clone)]
pub struct VerifyKeys {
    pub n_ref: usize,
    pub sweep: Vec<usize>,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub alpha: f64,
    pub gamma: f64,
    pub d: u32,
    /// Mode count for disk and oscillator runs.
    pub cutoff: usize,
    /// Sphere band limit; the sphere mode count is (l_max + 1)^2.
    pub l_max: u32,
    pub quad: QuadratureSet,
    pub noise: NoiseConfig,
    pub sim: SimKeys,
    pub verify: VerifyKeys,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: Geometry::Disk,
            alpha: 1.0,
            gamma: 0.5,
            d: 1,
            cutoff: 8,
            l_max: 4,
            quad: QuadratureSet::default(),
            noise: NoiseConfig {
                kind: NoiseKind::White,
                sigma2: 1.0,
                c: 1.0,
                p: 1.0,
                lengthscale: 0.5,
                table: None,
                clip: false,
            },
            sim: SimKeys {
                dt: 0.1,
                steps: 50_000,
                burn_in: None,
                paths: 64,
            },
            verify: VerifyKeys {
                n_ref: 200,
                sweep: vec![10, 20, 40, 80],
                samples: 1000,
            },
            seed: 42,
            output_path: None,
            output_format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn geometry_params(&self) -> GeometryParams {
        GeometryParams {
            alpha: self.alpha,
            gamma: self.gamma,
            d: self.d,
        }
    }

    /// Mode count the run solves at: `cutoff` directly, except on the
    /// sphere where full degenerate multiplets are kept.
    pub fn mode_count(&self) -> usize {
        match self.geometry {
            Geometry::Sphere => (self.l_max as usize + 1) * (self.l_max as usize + 1),
            _ => self.cutoff,
        }
    }
}

/// Parses a config file body on top of the defaults.
pub fn parse_config(text: &str) -> CResult<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = split_pair(line).ok_or_else(|| {
            ConfigError(format!(
                "line {line_no}: expected `key = value`, got `{line}`"
            ))
        })?;
        if let Some(first) = seen.insert(key.to_string(), line_no) {
            return Err(ConfigError(format!(
                "line {line_no}: {key}: duplicate key (first set at line {first})"
            )));
        }
        apply_key(&mut cfg, key, value)
            .map_err(|e| ConfigError(format!("line {line_no}: {}", e.0)))?;
    }
    Ok(cfg)
}

/// Applies one `KEY=VALUE` override from the command line.
pub fn apply_override(cfg: &mut RunConfig, pair: &str) -> CResult<()> {
    let (key, value) = split_pair(pair)
        .ok_or_else(|| ConfigError(format!("--set: expected KEY=VALUE, got `{pair}`")))?;
    apply_key(cfg, key, value).map_err(|e| ConfigError(format!("--set: {}", e.0)))
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    let eq = s.find('=')?;
    let key = s[..eq].trim();
    let value = s[eq + 1..].trim();
    if key.is_empty() {
        return None;
    }
    Some((key, value))
}

fn apply_key(cfg: &mut RunConfig, key: &str, value: &str) -> CResult<()> {
    let fail = |msg: String| ConfigError(format!("{key}: {msg}"));
    match key {
        "geometry" => {
            cfg.geometry = match value {
                "disk" => Geometry::Disk,
                "oscillator" => Geometry::Oscillator,
                "sphere" => Geometry::Sphere,
                other => {
                    return Err(fail(format!(
                        "expected disk | oscillator | sphere, got `{other}`"
                    )))
                }
            };
        }
        "alpha" => cfg.alpha = parse_pos_f64(key, value)?,
        "gamma" => cfg.gamma = parse_pos_f64(key, value)?,
        "d" => {
            let d = parse_int::<u32>(key, value)?;
            if !(1..=3).contains(&d) {
                return Err(fail(format!(
                    "oscillator dimension must be 1, 2, or 3, got {d}"
                )));
            }
            cfg.d = d;
        }
        "cutoff" => {
            let n = parse_int::<usize>(key, value)?;
            if n == 0 {
                return Err(fail("mode count must be >= 1".into()));
            }
            cfg.cutoff = n;
        }
        "L" => cfg.l_max = parse_int::<u32>(key, value)?,
        "quad.radial" => cfg.quad.radial = parse_order(key, value)?,
        "quad.angular" => cfg.quad.angular = parse_order(key, value)?,
        "quad.hermite" => cfg.quad.hermite = parse_order(key, value)?,
        "quad.sphere_polar" => cfg.quad.sphere_polar = parse_order(key, value)?,
        "noise.kind" => {
            cfg.noise.kind = match value {
                "white" => NoiseKind::White,
                "diagonal" => NoiseKind::Diagonal,
                "kernel-gaussian" => NoiseKind::KernelGaussian,
                "kernel-custom-table" => NoiseKind::KernelCustomTable,
                other => {
                    return Err(fail(format!(
                        "expected white | diagonal | kernel-gaussian | kernel-custom-table, got `{other}`"
                    )))
                }
            };
        }
        "noise.sigma2" => {
            let v = parse_f64(key, value)?;
            if !(v >= 0.0) {
                return Err(fail(format!("variance must be >= 0, got {v}")));
            }
            cfg.noise.sigma2 = v;
        }
        "noise.c" => cfg.noise.c = parse_pos_f64(key, value)?,
        "noise.p" => {
            let v = parse_f64(key, value)?;
            if !(v >= 0.0) {
                return Err(fail(format!("decay exponent must be >= 0, got {v}")));
            }
            cfg.noise.p = v;
        }
        "noise.lengthscale" => cfg.noise.lengthscale = parse_pos_f64(key, value)?,
        "noise.table" => cfg.noise.table = Some(PathBuf::from(value)),
        "noise.clip" => cfg.noise.clip = parse_bool(key, value)?,
        "sim.dt" => cfg.sim.dt = parse_pos_f64(key, value)?,
        "sim.steps" => {
            let n = parse_int::<usize>(key, value)?;
            if n == 0 {
                return Err(fail("step count must be >= 1".into()));
            }
            cfg.sim.steps = n;
        }
        "sim.burn_in" => cfg.sim.burn_in = Some(parse_int::<usize>(key, value)?),
        "sim.paths" => {
            let n = parse_int::<usize>(key, value)?;
            if n == 0 {
                return Err(fail("path count must be >= 1".into()));
            }
            cfg.sim.paths = n;
        }
        "verify.n_ref" => {
            let n = parse_int::<usize>(key, value)?;
            if n == 0 {
                return Err(fail("reference cutoff must be >= 1".into()));
            }
            cfg.verify.n_ref = n;
        }
        "verify.sweep" => {
            let mut sweep = Vec::new();
            for part in value.split(',') {
                let n: usize = part.trim().parse().map_err(|_| {
                    fail(format!("expected comma-separated integers, got `{value}`"))
                })?;
                if n == 0 {
                    return Err(fail("sweep entries must be >= 1".into()));
                }
                sweep.push(n);
            }
            if sweep.is_empty() {
                return Err(fail("sweep must not be empty".into()));
            }
            cfg.verify.sweep = sweep;
        }
        "verify.samples" => {
            let n = parse_int::<usize>(key, value)?;
            if n == 0 {
                return Err(fail("sample count must be >= 1".into()));
            }
            cfg.verify.samples = n;
        }
        "seed" => cfg.seed = parse_int::<u64>(key, value)?,
        "output.path" => cfg.output_path = Some(PathBuf::from(value)),
        "output.format" => {
            cfg.output_format = match value {
                "json" => OutputFormat::Json,
                "csv" => OutputFormat::Csv,
                other => return Err(fail(format!("expected json | csv, got `{other}`"))),
            };
        }
        unknown => return Err(ConfigError(format!("unknown key `{unknown}`"))),
    }
    Ok(())
}

fn parse_f64(key: &str, value: &str) -> CResult<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| ConfigError(format!("{key}: expected a number, got `{value}`")))?;
    if !v.is_finite() {
        return Err(ConfigError(format!("{key}: must be finite, got `{value}`")));
    }
    Ok(v)
}

fn parse_pos_f64(key: &str, value: &str) -> CResult<f64> {
    let v = parse_f64(key, value)?;
    if !(v > 0.0) {
        return Err(ConfigError(format!("{key}: must be > 0, got {v}")));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> CResult<T> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("{key}: expected an integer, got `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> CResult<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ConfigError(format!(
            "{key}: expected true | false, got `{other}`"
        ))),
    }
}

fn parse_order(key: &str, value: &str) -> CResult<usize> {
    let n = parse_int::<usize>(key, value)?;
    if n == 0 {
        return Err(ConfigError(format!("{key}: quadrature order must be >= 1")));
    }
    Ok(n)
}

/// Cross-key checks that individual assignments cannot see.
pub fn validate(cfg: &RunConfig, command_needs_verify: bool) -> CResult<()> {
    if cfg.geometry == Geometry::Sphere {
        // mode count comes from L (cutoff is not consulted on the sphere);
        // the cap leaves room for the one extra multiplet the improved
        // truncation bound reads past the run cutoff
        if cfg.l_max > 63 {
            return Err(ConfigError(format!(
                "L: band limit must be <= 63, got {}",
                cfg.l_max
            )));
        }
    }
    if cfg.noise.kind == NoiseKind::KernelCustomTable && cfg.noise.table.is_none() {
        return Err(ConfigError(
            "noise.table: required when noise.kind = kernel-custom-table".into(),
        ));
    }
    if matches!(
        cfg.noise.kind,
        NoiseKind::KernelGaussian | NoiseKind::KernelCustomTable
    ) && cfg.geometry == Geometry::Oscillator
    {
        return Err(ConfigError(
            "noise.kind: kernel noise needs a quadrature grid; geometry must be disk or sphere"
                .into(),
        ));
    }
    if let Some(burn_in) = cfg.sim.burn_in {
        if burn_in >= cfg.sim.steps {
            return Err(ConfigError(format!(
                "sim.burn_in: must be < sim.steps ({} >= {})",
                burn_in, cfg.sim.steps
            )));
        }
    }
    if command_needs_verify {
        let n = cfg.mode_count();
        if cfg.verify.n_ref <= n {
            return Err(ConfigError(format!(
                "verify.n_ref: reference cutoff must exceed the run cutoff ({} <= {n})",
                cfg.verify.n_ref
            )));
        }
        for &s in &cfg.verify.sweep {
            if s >= cfg.verify.n_ref {
                return Err(ConfigError(format!(
                    "verify.sweep: every entry must be < verify.n_ref, got {s}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.geometry, Geometry::Disk);
        assert_eq!(cfg.cutoff, 8);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.noise.kind, NoiseKind::White);
        validate(&cfg, true).unwrap();
    }

    #[test]
    fn full_file_parses() {
        let text = "\
# run archive
geometry = sphere
alpha = 2.0
gamma = 1.5   # damping
L = 3
quad.angular = 96
noise.kind = diagonal
noise.c = 0.7
noise.p = 1.25
sim.dt = 0.05
sim.steps = 1000
sim.paths = 4
seed = 7
output.format = csv
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.geometry, Geometry::Sphere);
        assert_eq!(cfg.alpha, 2.0);
        assert_eq!(cfg.gamma, 1.5);
        assert_eq!(cfg.l_max, 3);
        assert_eq!(cfg.mode_count(), 16);
        assert_eq!(cfg.quad.angular, 96);
        assert_eq!(cfg.noise.kind, NoiseKind::Diagonal);
        assert_eq!(cfg.noise.c, 0.7);
        assert_eq!(cfg.sim.dt, 0.05);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.output_format, OutputFormat::Csv);
    }

    #[test]
    fn errors_name_line_and_key() {
        let err = parse_config("geometry = torus").unwrap_err().0;
        assert!(err.contains("line 1") && err.contains("geometry"), "{err}");
        let err = parse_config("\n\ncutoff = -3").unwrap_err().0;
        assert!(err.contains("line 3") && err.contains("cutoff"), "{err}");
        let err = parse_config("nose.kind = white").unwrap_err().0;
        assert!(err.contains("unknown key"), "{err}");
        let err = parse_config("alpha 1.0").unwrap_err().0;
        assert!(err.contains("key = value"), "{err}");
        let err = parse_config("alpha = 1.0\nalpha = 2.0").unwrap_err().0;
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn overrides_apply_after_file() {
        let mut cfg = parse_config("cutoff = 12").unwrap();
        apply_override(&mut cfg, "cutoff=20").unwrap();
        apply_override(&mut cfg, "noise.sigma2 = 2.5").unwrap();
        assert_eq!(cfg.cutoff, 20);
        assert_eq!(cfg.noise.sigma2, 2.5);
        assert!(apply_override(&mut cfg, "bogus").is_err());
        assert!(apply_override(&mut cfg, "quad.radial=0").is_err());
    }

    #[test]
    fn cross_key_validation() {
        let mut cfg = parse_config("noise.kind = kernel-custom-table").unwrap();
        assert!(validate(&cfg, false).is_err());
        cfg.noise.table = Some(PathBuf::from("t.csv"));
        validate(&cfg, false).unwrap();

        let cfg = parse_config("geometry = oscillator\nnoise.kind = kernel-gaussian").unwrap();
        assert!(validate(&cfg, false).is_err());

        let cfg = parse_config("sim.burn_in = 50000").unwrap();
        assert!(validate(&cfg, false).is_err());

        let cfg = parse_config("cutoff = 300").unwrap();
        assert!(validate(&cfg, true).is_err());
        validate(&cfg, false).unwrap();

        let cfg = parse_config("verify.sweep = 10,20,300").unwrap();
        assert!(validate(&cfg, true).is_err());
    }

    #[test]
    fn zero_variance_is_accepted() {
        let cfg = parse_config("noise.sigma2 = 0").unwrap();
        assert_eq!(cfg.noise.sigma2, 0.0);
        assert!(parse_config("noise.sigma2 = -1").is_err());
    }
}
