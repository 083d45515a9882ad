//! Plain-text experiment configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Omitted optional
//! keys take their defaults. In strict mode unknown keys are errors.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::flow::{FlowConfig, FlowTolerances};
use crate::grid::BaseGrid;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },

    #[error("line {line}: `{key}` {constraint}")]
    Constraint {
        line: usize,
        key: &'static str,
        constraint: &'static str,
    },

    #[error("missing required key `{key}` for preset `{preset}`")]
    Missing { preset: String, key: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: String,
    pub n: usize,
    pub epsilon: f64,
    pub mode: (u32, u32),
    pub scale: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub cfl_safety: f64,
    pub vaisman_tol: f64,
    pub csc_tol: f64,
    pub identity_tol: f64,
    pub samples: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub snapshot: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let flow = FlowConfig::default();
        Self {
            preset: "identity_suite".into(),
            n: 32,
            epsilon: 0.1,
            mode: (1, 1),
            scale: 1.0,
            dt: flow.dt,
            t_end: flow.t_end,
            record_every: flow.record_every,
            cfl_safety: flow.cfl_safety,
            vaisman_tol: flow.tolerances.vaisman,
            csc_tol: flow.tolerances.csc,
            identity_tol: 1e-7,
            samples: 50,
            seed: 20240531,
            out_dir: PathBuf::from("out"),
            snapshot: None,
        }
    }
}

const KEYS: [&str; 16] = [
    "preset",
    "n",
    "epsilon",
    "mode",
    "scale",
    "dt",
    "t_end",
    "record_every",
    "cfl_safety",
    "vaisman_tol",
    "csc_tol",
    "identity_tol",
    "samples",
    "seed",
    "out_dir",
    "snapshot",
];

/// Keys that a preset cannot run without.
fn required_keys(preset: &str) -> &'static [&'static str] {
    match preset {
        "noncsc_vaisman" => &["epsilon", "mode"],
        "custom" => &["snapshot"],
        _ => &[],
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> BaseGrid {
        BaseGrid::new(self.n).expect("validated at parse time")
    }

    pub fn flow(&self) -> FlowConfig {
        FlowConfig {
            dt: self.dt,
            t_end: self.t_end,
            cfl_safety: self.cfl_safety,
            record_every: self.record_every,
            tolerances: FlowTolerances {
                vaisman: self.vaisman_tol,
                csc: self.csc_tol,
            },
        }
    }

    /// Serializes every effective value; `parse_config` reads it back.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "preset = {}", self.preset);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "epsilon = {:?}", self.epsilon);
        let _ = writeln!(s, "mode = {},{}", self.mode.0, self.mode.1);
        let _ = writeln!(s, "scale = {:?}", self.scale);
        let _ = writeln!(s, "dt = {:?}", self.dt);
        let _ = writeln!(s, "t_end = {:?}", self.t_end);
        let _ = writeln!(s, "record_every = {}", self.record_every);
        let _ = writeln!(s, "cfl_safety = {:?}", self.cfl_safety);
        let _ = writeln!(s, "vaisman_tol = {:?}", self.vaisman_tol);
        let _ = writeln!(s, "csc_tol = {:?}", self.csc_tol);
        let _ = writeln!(s, "identity_tol = {:?}", self.identity_tol);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "out_dir = {}", self.out_dir.display());
        if let Some(p) = &self.snapshot {
            let _ = writeln!(s, "snapshot = {}", p.display());
        }
        s
    }
}

fn positive(line: usize, key: &'static str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| ConfigError::Constraint {
        line,
        key,
        constraint: "must be a number",
    })?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(ConfigError::Constraint {
            line,
            key,
            constraint: "must be positive and finite",
        });
    }
    Ok(x)
}

fn count(line: usize, key: &'static str, v: &str) -> Result<usize, ConfigError> {
    match v.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k),
        _ => Err(ConfigError::Constraint {
            line,
            key,
            constraint: "must be a positive integer",
        }),
    }
}

/// Parses configuration text. Validation of value ranges is done per line so
/// errors carry the offending line number.
pub fn parse_config(text: &str, strict: bool) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: Vec<&'static str> = Vec::new();
    let mut preset_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(ConfigError::Malformed {
                line,
                text: raw.to_string(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Malformed {
                line,
                text: raw.to_string(),
            });
        }
        let Some(&key) = KEYS.iter().find(|&&known| known == k) else {
            if strict {
                return Err(ConfigError::UnknownKey { line, key: k.to_string() });
            }
            continue;
        };
        if seen.contains(&key) {
            return Err(ConfigError::Duplicate { line, key: k.to_string() });
        }
        seen.push(key);

        match key {
            "preset" => {
                cfg.preset = v.to_string();
                preset_line = line;
            }
            "n" => {
                cfg.n = v
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| BaseGrid::new(n).is_ok())
                    .ok_or(ConfigError::Constraint {
                        line,
                        key,
                        constraint: "must be a power of two >= 8",
                    })?;
            }
            "epsilon" => {
                let e: f64 = v.parse().map_err(|_| ConfigError::Constraint {
                    line,
                    key,
                    constraint: "must be a number",
                })?;
                if !(e.abs() < 0.5) {
                    return Err(ConfigError::Constraint {
                        line,
                        key,
                        constraint: "must satisfy |epsilon| < 1/2",
                    });
                }
                cfg.epsilon = e;
            }
            "mode" => {
                let parts: Vec<_> = v.split(',').map(|p| p.trim().parse::<u32>()).collect();
                match parts.as_slice() {
                    [Ok(a), Ok(b)] if *a >= 1 && *b >= 1 => cfg.mode = (*a, *b),
                    _ => {
                        return Err(ConfigError::Constraint {
                            line,
                            key,
                            constraint: "must be two positive integers `kx,ky`",
                        })
                    }
                }
            }
            "scale" => cfg.scale = positive(line, key, v)?,
            "dt" => cfg.dt = positive(line, key, v)?,
            "t_end" => cfg.t_end = positive(line, key, v)?,
            "record_every" => cfg.record_every = count(line, key, v)?,
            "cfl_safety" => {
                let c = positive(line, key, v)?;
                if c > 0.5 {
                    return Err(ConfigError::Constraint {
                        line,
                        key,
                        constraint: "must lie in (0, 0.5]",
                    });
                }
                cfg.cfl_safety = c;
            }
            "vaisman_tol" => cfg.vaisman_tol = positive(line, key, v)?,
            "csc_tol" => cfg.csc_tol = positive(line, key, v)?,
            "identity_tol" => cfg.identity_tol = positive(line, key, v)?,
            "samples" => cfg.samples = count(line, key, v)?,
            "seed" => {
                cfg.seed = v.parse().map_err(|_| ConfigError::Constraint {
                    line,
                    key,
                    constraint: "must be a non-negative integer",
                })?
            }
            "out_dir" => cfg.out_dir = PathBuf::from(v),
            "snapshot" => cfg.snapshot = Some(PathBuf::from(v)),
            _ => unreachable!("key table and match arms agree"),
        }
    }

    if !seen.contains(&"preset") {
        return Err(ConfigError::Missing {
            preset: "<none>".into(),
            key: "preset",
        });
    }
    if !super::experiment::Registry::builtin().contains(&cfg.preset) {
        return Err(ConfigError::Constraint {
            line: preset_line,
            key: "preset",
            constraint: "must name a registered preset",
        });
    }
    for &key in required_keys(&cfg.preset) {
        if !seen.contains(&key) {
            return Err(ConfigError::Missing {
                preset: cfg.preset.clone(),
                key,
            });
        }
    }
    Ok(cfg)
}
