//! Line-based `key = value` run configuration with `#` comments.

use std::collections::HashMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::allen_cahn::AcMode;
use crate::energetics::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Stationary,
    PerturbedFlat,
    Band,
    Snapshot,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Stationary => "stationary",
            Preset::PerturbedFlat => "perturbed-flat",
            Preset::Band => "band",
            Preset::Snapshot => "snapshot",
        }
    }
}

/// Initial-condition shape parameters for the analytic presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcParams {
    /// Background value of phi.
    pub mean: f64,
    /// Perturbation amplitude.
    pub amp: f64,
    /// Integer wavenumber of the perturbation along x.
    pub k: usize,
    /// Amplitude of the initial slip-eigenmode velocity.
    pub u_amp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n_periodic: Vec<usize>,
    pub n_wall: usize,
    pub period_lengths: Vec<f64>,
    pub params: PhysParams,
    pub mode: AcMode,
    pub dt: f64,
    pub t_end: f64,
    pub picard_iters: usize,
    pub preset: Preset,
    pub snapshot_path: Option<PathBuf>,
    pub ic: IcParams,
    pub out_dir: PathBuf,
    /// Diagnostics cadence in steps.
    pub diag_every: usize,
    /// Snapshot cadence in steps; 0 writes only the final snapshot.
    pub snapshot_every: usize,
    /// Start of the window used for decay fitting.
    pub fit_t0: f64,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: key '{key}': expected {expected}, got '{value}'")]
    TypeMismatch {
        key: String,
        line: usize,
        value: String,
        expected: &'static str,
    },
    #[error("line {line}: malformed line (expected 'key = value'): '{text}'")]
    Malformed { line: usize, text: String },
    #[error("missing required key '{key}'")]
    Missing { key: &'static str },
    #[error("line {line}: key '{key}': {msg}")]
    Invariant {
        key: String,
        line: usize,
        msg: String,
    },
}

struct Raw {
    values: HashMap<String, (String, usize)>,
}

impl Raw {
    fn line_of(&self, key: &str) -> usize {
        self.values.get(key).map(|(_, l)| *l).unwrap_or(0)
    }

    fn take_f64(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some((v, line)) => parse_f64(v).ok_or_else(|| ConfigError::TypeMismatch {
                key: key.into(),
                line: *line,
                value: v.clone(),
                expected: "a real number (pi, pi/2 and 2pi/5 also accepted)",
            }),
        }
    }

    fn take_usize(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|_| ConfigError::TypeMismatch {
                key: key.into(),
                line: *line,
                value: v.clone(),
                expected: "an unsigned integer",
            }),
        }
    }

    fn take_u64(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|_| ConfigError::TypeMismatch {
                key: key.into(),
                line: *line,
                value: v.clone(),
                expected: "an unsigned integer",
            }),
        }
    }

    fn require_f64(&self, key: &'static str) -> Result<f64, ConfigError> {
        if !self.values.contains_key(key) {
            return Err(ConfigError::Missing { key });
        }
        self.take_f64(key, f64::NAN)
    }

    fn require_usize(&self, key: &'static str) -> Result<usize, ConfigError> {
        if !self.values.contains_key(key) {
            return Err(ConfigError::Missing { key });
        }
        self.take_usize(key, 0)
    }
}

/// Accepts plain floats plus the few angle shorthands that appear in
/// configurations: `pi`, `pi/2`, `pi/3`, `pi/4`, `2pi/5`, `2pi`.
fn parse_f64(s: &str) -> Option<f64> {
    use std::f64::consts::PI;
    match s {
        "pi" => Some(PI),
        "2pi" => Some(2.0 * PI),
        "pi/2" => Some(PI / 2.0),
        "pi/3" => Some(PI / 3.0),
        "pi/4" => Some(PI / 4.0),
        "2pi/5" => Some(2.0 * PI / 5.0),
        _ => s.parse().ok(),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "dim",
    "nx",
    "ny",
    "nz",
    "lx",
    "ly",
    "eta",
    "beta",
    "nu",
    "gamma",
    "delta",
    "theta_s",
    "stab",
    "eps0",
    "mode",
    "dt",
    "t_end",
    "picard_iters",
    "preset",
    "snapshot_path",
    "ic_mean",
    "ic_amp",
    "ic_k",
    "ic_u_amp",
    "out_dir",
    "diag_every",
    "snapshot_every",
    "fit_t0",
    "seed",
];

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut values: HashMap<String, (String, usize)> = HashMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Malformed {
            line: line_no,
            text: line.to_string(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { key, line: line_no });
        }
        values.insert(key, (value, line_no));
    }
    let raw = Raw { values };

    let dim = raw.take_usize("dim", 2)?;
    if dim != 2 && dim != 3 {
        return Err(ConfigError::Invariant {
            key: "dim".into(),
            line: raw.line_of("dim"),
            msg: format!("must be 2 or 3, got {dim}"),
        });
    }
    let nx = raw.require_usize("nx")?;
    let n_wall = raw.require_usize("nz")?;
    let lx = raw.take_f64("lx", 2.0 * std::f64::consts::PI)?;
    let (n_periodic, period_lengths) = if dim == 3 {
        let ny = raw.require_usize("ny")?;
        let ly = raw.take_f64("ly", 2.0 * std::f64::consts::PI)?;
        (vec![nx, ny], vec![lx, ly])
    } else {
        (vec![nx], vec![lx])
    };
    // validate geometry early with the grid constructor
    if let Err(e) = crate::channel::build_grid(dim, &n_periodic, n_wall, &period_lengths) {
        return Err(ConfigError::Invariant {
            key: "nx/ny/nz/lx/ly".into(),
            line: raw.line_of("nx"),
            msg: e.to_string(),
        });
    }

    let params = PhysParams {
        eta: raw.take_f64("eta", 1.0)?,
        beta: raw.take_f64("beta", 1.0)?,
        gamma: raw.take_f64("gamma", 0.1)?,
        delta: raw.take_f64("delta", 0.0)?,
        nu: raw.take_f64("nu", 1.0)?,
        theta_s: raw.take_f64("theta_s", std::f64::consts::FRAC_PI_2)?,
        stab: raw.take_f64("stab", 2.0)?,
        eps0: raw.take_f64("eps0", 0.5)?,
    };
    if let Err(e) = params.validate() {
        return Err(ConfigError::Invariant {
            key: "params".into(),
            line: 0,
            msg: e.to_string(),
        });
    }

    let mode = match raw.values.get("mode") {
        None => AcMode::Dynamic,
        Some((v, line)) => match v.as_str() {
            "dynamic" => AcMode::Dynamic,
            "delta_approx" => AcMode::DeltaApprox,
            "relaxation" => AcMode::Relaxation,
            _ => {
                return Err(ConfigError::TypeMismatch {
                    key: "mode".into(),
                    line: *line,
                    value: v.clone(),
                    expected: "one of dynamic | delta_approx | relaxation",
                })
            }
        },
    };
    if let Err(e) = mode.validate(&params) {
        return Err(ConfigError::Invariant {
            key: "mode".into(),
            line: raw.line_of("mode"),
            msg: e.to_string(),
        });
    }

    let dt = raw.require_f64("dt")?;
    if !(dt > 0.0) {
        return Err(ConfigError::Invariant {
            key: "dt".into(),
            line: raw.line_of("dt"),
            msg: format!("must be > 0, got {dt}"),
        });
    }
    let t_end = raw.require_f64("t_end")?;
    if !(t_end >= dt) {
        return Err(ConfigError::Invariant {
            key: "t_end".into(),
            line: raw.line_of("t_end"),
            msg: format!("must be >= dt = {dt}, got {t_end}"),
        });
    }
    let picard_iters = raw.take_usize("picard_iters", 1)?;
    if picard_iters < 1 {
        return Err(ConfigError::Invariant {
            key: "picard_iters".into(),
            line: raw.line_of("picard_iters"),
            msg: "must be >= 1".into(),
        });
    }

    let preset = match raw.values.get("preset") {
        None => Preset::Stationary,
        Some((v, line)) => match v.as_str() {
            "stationary" => Preset::Stationary,
            "perturbed-flat" => Preset::PerturbedFlat,
            "band" => Preset::Band,
            "snapshot" => Preset::Snapshot,
            _ => {
                return Err(ConfigError::TypeMismatch {
                    key: "preset".into(),
                    line: *line,
                    value: v.clone(),
                    expected: "one of stationary | perturbed-flat | band | snapshot",
                })
            }
        },
    };
    let snapshot_path = raw
        .values
        .get("snapshot_path")
        .map(|(v, _)| PathBuf::from(v));
    if preset == Preset::Snapshot && snapshot_path.is_none() {
        return Err(ConfigError::Missing {
            key: "snapshot_path",
        });
    }

    let ic = IcParams {
        mean: raw.take_f64("ic_mean", 0.9)?,
        amp: raw.take_f64("ic_amp", 0.05)?,
        k: raw.take_usize("ic_k", 1)?,
        u_amp: raw.take_f64("ic_u_amp", 0.0)?,
    };

    let diag_every = raw.take_usize("diag_every", 1)?;
    if diag_every < 1 {
        return Err(ConfigError::Invariant {
            key: "diag_every".into(),
            line: raw.line_of("diag_every"),
            msg: "must be >= 1".into(),
        });
    }

    Ok(RunConfig {
        dim,
        n_periodic,
        n_wall,
        period_lengths,
        params,
        mode,
        dt,
        t_end,
        picard_iters,
        preset,
        snapshot_path,
        ic,
        out_dir: raw
            .values
            .get("out_dir")
            .map(|(v, _)| PathBuf::from(v))
            .unwrap_or_else(|| PathBuf::from("out")),
        diag_every,
        snapshot_every: raw.take_usize("snapshot_every", 0)?,
        fit_t0: raw.take_f64("fit_t0", 0.5)?,
        seed: raw.take_u64("seed", 0)?,
    })
}

impl RunConfig {
    /// Canonical text form; `parse_config(cfg.serialize())` reproduces `cfg`.
    pub fn serialize(&self) -> String {
        let f = |v: f64| format!("{v:.16e}");
        let mut out = String::new();
        out.push_str(&format!("dim = {}\n", self.dim));
        out.push_str(&format!("nx = {}\n", self.n_periodic[0]));
        out.push_str(&format!("lx = {}\n", f(self.period_lengths[0])));
        if self.dim == 3 {
            out.push_str(&format!("ny = {}\n", self.n_periodic[1]));
            out.push_str(&format!("ly = {}\n", f(self.period_lengths[1])));
        }
        out.push_str(&format!("nz = {}\n", self.n_wall));
        out.push_str(&format!("eta = {}\n", f(self.params.eta)));
        out.push_str(&format!("beta = {}\n", f(self.params.beta)));
        out.push_str(&format!("nu = {}\n", f(self.params.nu)));
        out.push_str(&format!("gamma = {}\n", f(self.params.gamma)));
        out.push_str(&format!("delta = {}\n", f(self.params.delta)));
        out.push_str(&format!("theta_s = {}\n", f(self.params.theta_s)));
        out.push_str(&format!("stab = {}\n", f(self.params.stab)));
        out.push_str(&format!("eps0 = {}\n", f(self.params.eps0)));
        out.push_str(&format!("mode = {}\n", self.mode.name()));
        out.push_str(&format!("dt = {}\n", f(self.dt)));
        out.push_str(&format!("t_end = {}\n", f(self.t_end)));
        out.push_str(&format!("picard_iters = {}\n", self.picard_iters));
        out.push_str(&format!("preset = {}\n", self.preset.name()));
        if let Some(p) = &self.snapshot_path {
            out.push_str(&format!("snapshot_path = {}\n", p.display()));
        }
        out.push_str(&format!("ic_mean = {}\n", f(self.ic.mean)));
        out.push_str(&format!("ic_amp = {}\n", f(self.ic.amp)));
        out.push_str(&format!("ic_k = {}\n", self.ic.k));
        out.push_str(&format!("ic_u_amp = {}\n", f(self.ic.u_amp)));
        out.push_str(&format!("out_dir = {}\n", self.out_dir.display()));
        out.push_str(&format!("diag_every = {}\n", self.diag_every));
        out.push_str(&format!("snapshot_every = {}\n", self.snapshot_every));
        out.push_str(&format!("fit_t0 = {}\n", f(self.fit_t0)));
        out.push_str(&format!("seed = {}\n", self.seed));
        out
    }

    pub fn grid(
        &self,
    ) -> Result<std::sync::Arc<crate::channel::ChannelGrid>, crate::channel::GridError> {
        crate::channel::build_grid(
            self.dim,
            &self.n_periodic,
            self.n_wall,
            &self.period_lengths,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let cfg = parse_config("nx = 16\nnz = 9\ndt = 1e-3\nt_end = 0.01\n").unwrap();
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.params.eta, 1.0);
        assert_eq!(cfg.params.beta, 1.0);
        assert_eq!(cfg.params.nu, 1.0);
        assert_eq!(cfg.params.theta_s, FRAC_PI_2);
        assert_eq!(cfg.params.gamma, 0.1);
        assert_eq!(cfg.mode, AcMode::Dynamic);
        assert_eq!(cfg.picard_iters, 1);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config(
            "# a run\nnx = 16 # lattice\n\nnz = 9\ndt = 1e-3\nt_end = 0.01\ntheta_s = 2pi/5\n",
        )
        .unwrap();
        assert!((cfg.params.theta_s - 2.0 * std::f64::consts::PI / 5.0).abs() < 1e-15);
    }

    #[test]
    fn mode_parameter_consistency_is_enforced() {
        let err = parse_config("nx = 16\nnz = 9\ndt = 1e-3\nt_end = 0.01\nmode = relaxation\n")
            .unwrap_err();
        // default gamma = 0.1 conflicts with relaxation
        assert!(matches!(err, ConfigError::Invariant { .. }), "{err}");
        let ok = parse_config(
            "nx = 16\nnz = 9\ndt = 1e-3\nt_end = 0.01\nmode = relaxation\ngamma = 0\n",
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn errors_name_key_and_line() {
        let err = parse_config("nx = 16\nnz = 9\nwibble = 3\n").unwrap_err();
        match err {
            ConfigError::UnknownKey { key, line } => {
                assert_eq!(key, "wibble");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other}"),
        }
        let err = parse_config("nx = sixteen\n").unwrap_err();
        match err {
            ConfigError::TypeMismatch { key, line, .. } => {
                assert_eq!(key, "nx");
                assert_eq!(line, 1);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn serialize_round_trip() {
        let text = "dim = 3\nnx = 16\nny = 8\nnz = 9\ndt = 1e-3\nt_end = 0.5\nmode = delta_approx\ndelta = 0.05\ngamma = 0\npreset = perturbed-flat\nic_amp = 0.02\nseed = 7\n";
        let cfg = parse_config(text).unwrap();
        let cfg2 = parse_config(&cfg.serialize()).unwrap();
        assert_eq!(cfg, cfg2);
    }
}
