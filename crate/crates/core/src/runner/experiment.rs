//! Named experiment presets behind a common trait.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig};
use super::identities::{identity_battery, IdentityCheck};
use super::io::{emit_csv, emit_snapshot, load_snapshot, write_json, IoError};
use crate::flow::{conservation_monitors, run, FlowError, MonitorSummary, Termination};
use crate::geometry::MetricState;
use crate::vaisman::{make_noncsc_vaisman, make_standard_vaisman};

/// Thresholds applied to the conservation monitors of every flow preset.
pub const CHAR_DRIFT_TOL: f64 = 1e-9;
pub const FIBER_TOL: f64 = 1e-7;
pub const SIGMA1_ODE_TOL: f64 = 1e-6;
pub const PLURICLOSED_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),

    #[error("configuration: {0}")]
    Setup(String),

    #[error("numerical abort: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] IoError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Setup(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 2,
        }
    }
}

impl From<FlowError> for RunError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::InvalidConfig(_) | FlowError::StepTooLarge { .. } => RunError::Setup(e.to_string()),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

impl From<crate::Error> for RunError {
    fn from(e: crate::Error) -> Self {
        RunError::Numerical(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Assertion {
    fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            passed: value < tol,
        }
    }

    fn holds(name: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            tol: f64::NAN,
            passed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub preset: String,
    pub assertions: Vec<Assertion>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome, RunError>;
}

pub struct Registry {
    entries: Vec<Box<dyn Experiment>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(IdentitySuite));
        r.register(Box::new(FlowPreset {
            name: "stationary_csc",
            summary: "flow from the homogeneous Vaisman metric (u = scale), expected to stay Vaisman",
            seed: SeedSource::Standard,
            expect_vaisman: Some(true),
        }));
        r.register(Box::new(FlowPreset {
            name: "noncsc_vaisman",
            summary: "flow from a Vaisman seed with varying scalar curvature, expected to leave the Vaisman class",
            seed: SeedSource::NonCsc,
            expect_vaisman: Some(false),
        }));
        r.register(Box::new(FlowPreset {
            name: "custom",
            summary: "flow from a JSON snapshot",
            seed: SeedSource::Snapshot,
            expect_vaisman: None,
        }));
        r
    }

    /// Later registrations with the same name replace earlier ones.
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.entries.retain(|x| x.name() != e.name());
        self.entries.push(e);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Experiment> {
        self.entries.iter().find(|e| e.name() == name).map(|e| e.as_ref())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.entries.iter().map(|e| e.as_ref())
    }

    pub fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
        let e = self
            .get(&cfg.preset)
            .ok_or_else(|| RunError::Setup(format!("no preset named `{}`", cfg.preset)))?;
        e.run(cfg)
    }
}

fn prepare_out_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| {
        RunError::Io(IoError::Io {
            path: dir.to_path_buf(),
            source,
        })
    })
}

pub struct IdentitySuite;

#[derive(Serialize)]
struct SuiteReport<'a> {
    config: String,
    checks: &'a [IdentityCheck],
    passed: bool,
}

impl Experiment for IdentitySuite {
    fn name(&self) -> &'static str {
        "identity_suite"
    }

    fn summary(&self) -> &'static str {
        "split, Lee-form and curvature identities on random states and the seed families"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
        let checks = identity_battery(cfg.grid(), cfg.samples, cfg.seed, cfg.identity_tol)?;
        prepare_out_dir(&cfg.out_dir)?;
        let path = cfg.out_dir.join("identity_suite.json");
        let passed = checks.iter().all(IdentityCheck::passed);
        write_json(
            &SuiteReport {
                config: cfg.to_text(),
                checks: &checks,
                passed,
            },
            &path,
        )?;
        Ok(Outcome {
            preset: self.name().into(),
            assertions: checks
                .iter()
                .map(|c| Assertion::below(format!("{} ({} cases)", c.name, c.cases), c.max_residual, c.tol))
                .collect(),
            files: vec![path],
        })
    }
}

enum SeedSource {
    Standard,
    NonCsc,
    Snapshot,
}

struct FlowPreset {
    name: &'static str,
    summary: &'static str,
    seed: SeedSource,
    expect_vaisman: Option<bool>,
}

#[derive(Serialize)]
struct Verdict<'a> {
    preset: &'a str,
    config: String,
    stays_vaisman: bool,
    exit_time: Option<f64>,
    completed: bool,
    abort_reason: Option<&'a str>,
    monitors: &'a MonitorSummary,
}

impl FlowPreset {
    fn seed(&self, cfg: &ExperimentConfig) -> Result<MetricState, RunError> {
        Ok(match self.seed {
            SeedSource::Standard => make_standard_vaisman(cfg.grid(), cfg.scale)?,
            SeedSource::NonCsc => make_noncsc_vaisman(cfg.grid(), cfg.epsilon, cfg.mode)?,
            SeedSource::Snapshot => {
                let path = cfg
                    .snapshot
                    .as_ref()
                    .ok_or_else(|| RunError::Setup("preset `custom` needs `snapshot`".into()))?;
                load_snapshot(path)?
            }
        })
    }
}

impl Experiment for FlowPreset {
    fn name(&self) -> &'static str {
        self.name
    }

    fn summary(&self) -> &'static str {
        self.summary
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
        let m0 = self.seed(cfg)?;
        let flow = cfg.flow();
        let trace = run(&m0, &flow)?;

        prepare_out_dir(&cfg.out_dir)?;
        let seed_path = cfg.out_dir.join(format!("{}_seed.json", self.name));
        let trace_path = cfg.out_dir.join(format!("{}_trace.csv", self.name));
        let verdict_path = cfg.out_dir.join(format!("{}_verdict.json", self.name));
        emit_snapshot(&m0, &seed_path)?;
        emit_csv(&trace, &trace_path)?;

        let abort_reason = match &trace.termination {
            Termination::Completed => None,
            Termination::Aborted { reason, .. } => Some(reason.as_str()),
        };
        let monitors = conservation_monitors(&trace, &flow.tolerances)?;
        write_json(
            &Verdict {
                preset: self.name,
                config: cfg.to_text(),
                stays_vaisman: monitors.stays_vaisman(),
                exit_time: monitors.exit_time(),
                completed: trace.is_complete(),
                abort_reason,
                monitors: &monitors,
            },
            &verdict_path,
        )?;
        if let Some(reason) = abort_reason {
            return Err(RunError::Numerical(format!("{reason} (partial trace in {})", trace_path.display())));
        }

        let mut assertions = vec![
            Assertion::below("characteristic-number drift per unit time", monitors.char_drift_rate, CHAR_DRIFT_TOL),
            Assertion::below("fiber residual at Vaisman instants", monitors.max_fiber_residual_vaisman, FIBER_TOL),
            Assertion::below("sigma1 ODE residual at Vaisman instants", monitors.max_sigma1_ode_residual_vaisman, SIGMA1_ODE_TOL),
            Assertion::below("pluriclosed defect", monitors.max_pluriclosed_defect, PLURICLOSED_TOL),
        ];
        if let Some(expected) = self.expect_vaisman {
            assertions.push(Assertion::holds(
                format!("stays_vaisman == {expected}"),
                monitors.stays_vaisman() == expected,
            ));
        }
        Ok(Outcome {
            preset: self.name.into(),
            assertions,
            files: vec![seed_path, trace_path, verdict_path],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Dummy;

    impl Experiment for Dummy {
        fn name(&self) -> &'static str {
            "custom"
        }
        fn summary(&self) -> &'static str {
            "replacement"
        }
        fn run(&self, cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
            Ok(Outcome {
                preset: cfg.preset.clone(),
                assertions: vec![],
                files: vec![],
            })
        }
    }

    #[test]
    fn registry_lookup_and_replacement() {
        let mut r = Registry::builtin();
        assert_eq!(r.names(), ["identity_suite", "stationary_csc", "noncsc_vaisman", "custom"]);
        r.register(Box::new(Dummy));
        assert_eq!(r.names().len(), 4);
        assert_eq!(r.get("custom").unwrap().summary(), "replacement");
        assert!(r.get("missing").is_none());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Setup("x".into()).exit_code(), 2);
        assert_eq!(RunError::Numerical("x".into()).exit_code(), 3);
        let failing = Outcome {
            preset: "p".into(),
            assertions: vec![Assertion::below("a", 2.0, 1.0)],
            files: vec![],
        };
        assert_eq!(failing.exit_code(), 1);
    }
}
