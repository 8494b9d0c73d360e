//! Harness configuration, read from a flat TOML document.
//!
//! | key                 | default            | meaning                                   |
//! |---------------------|--------------------|-------------------------------------------|
//! | `m`, `n`            | 100, 120           | reads and SNP sites per instance          |
//! | `pd_grid`           | `[0.3, 0.5, 0.7]`  | observation probabilities                 |
//! | `err_grid`          | `[0.35]`           | flipped fraction of observed entries      |
//! | `trials`            | 20                 | instances per grid cell                   |
//! | `base_seed`         | 0                  | root of all per-trial seeds               |
//! | `methods`           | `["rtr", "altmin"]`| registered method names                   |
//! | `epsilon`           | 1e-6               | smoothing parameter                       |
//! | `delta_bar`         | pi                 | maximum trust radius                      |
//! | `delta0`            | pi / 8             | initial trust radius                      |
//! | `rho_prime`         | 0.1                | acceptance threshold                      |
//! | `grad_tol`          | 1e-6               | gradient-norm stopping tolerance          |
//! | `max_outer`         | 500                | outer iteration cap                       |
//! | `tcg_kappa`         | 0.1                | tCG linear residual factor                |
//! | `tcg_theta`         | 1.0                | tCG superlinear residual exponent         |
//! | `seed`              | 0                  | solver seed for `solve`                   |
//! | `init`              | `"random"`         | `"random"` or `"spectral"` first start    |
//! | `restarts`          | 0                  | extra random starts, best cost kept       |
//! | `altmin_max_sweeps` | 100                | baseline sweep cap                        |
//! | `altmin_tol`        | 1e-8               | baseline residual-change tolerance        |
//! | `record_wall_time`  | false              | write measured times instead of 0         |
//!
//! Unknown keys are rejected. `record_wall_time = false` keeps experiment
//! CSVs byte-identical across runs.

use std::path::Path;

use haprtr_core::altmin::AltMinConfig;
use haprtr_core::assemble::InitStrategy;
use haprtr_core::objective::Smoothing;
use haprtr_core::rtr::RtrConfig;
use serde::Deserialize;

use crate::error::{HarnessError, Result};
use crate::methods::Method;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub m: usize,
    pub n: usize,
    pub pd_grid: Vec<f64>,
    pub err_grid: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub methods: Vec<String>,
    pub epsilon: f64,
    pub delta_bar: f64,
    pub delta0: f64,
    pub rho_prime: f64,
    pub grad_tol: f64,
    pub max_outer: usize,
    pub tcg_kappa: f64,
    pub tcg_theta: f64,
    pub seed: u64,
    pub init: String,
    pub restarts: usize,
    pub altmin_max_sweeps: usize,
    pub altmin_tol: f64,
    pub record_wall_time: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        let rtr = RtrConfig::default();
        let alt = AltMinConfig::default();
        Self {
            m: 100,
            n: 120,
            pd_grid: vec![0.3, 0.5, 0.7],
            err_grid: vec![0.35],
            trials: 20,
            base_seed: 0,
            methods: vec!["rtr".into(), "altmin".into()],
            epsilon: Smoothing::DEFAULT.get(),
            delta_bar: rtr.delta_bar,
            delta0: rtr.delta0,
            rho_prime: rtr.rho_prime,
            grad_tol: rtr.grad_tol,
            max_outer: rtr.max_outer,
            tcg_kappa: rtr.tcg_kappa,
            tcg_theta: rtr.tcg_theta,
            seed: rtr.seed,
            init: "random".into(),
            restarts: 0,
            altmin_max_sweeps: alt.max_sweeps,
            altmin_tol: alt.tol,
            record_wall_time: false,
        }
    }
}

/// Per-method solver settings resolved from a [`HarnessConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub epsilon: Smoothing,
    pub rtr: RtrConfig,
    pub init: InitStrategy,
    pub restarts: usize,
    pub altmin: AltMinConfig,
    pub record_wall_time: bool,
}

impl SolverSettings {
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.rtr.seed = seed;
        s.altmin.seed = seed;
        s
    }
}

impl HarnessConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let quoted = msg.split('`').nth(1).map(str::to_string);
            let at_span = e.span().and_then(|s| {
                let line_start = text[..s.start].rfind('\n').map_or(0, |p| p + 1);
                let line = text[line_start..].lines().next()?;
                let key = line.split('=').next()?.trim();
                (!key.is_empty() && !line.trim_start().starts_with('[')).then(|| key.to_string())
            });
            let field = at_span.or(quoted).unwrap_or_else(|| "<document>".into());
            HarnessError::config(field, msg)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Checks solver fields and resolves them into typed configurations.
    pub fn solver_settings(&self) -> Result<SolverSettings> {
        let epsilon = Smoothing::new(self.epsilon).map_err(|e| HarnessError::config("epsilon", e.to_string()))?;
        let rtr = RtrConfig {
            delta_bar: self.delta_bar,
            delta0: self.delta0,
            rho_prime: self.rho_prime,
            grad_tol: self.grad_tol,
            max_outer: self.max_outer,
            tcg_kappa: self.tcg_kappa,
            tcg_theta: self.tcg_theta,
            seed: self.seed,
        };
        rtr.validate().map_err(core_field)?;
        let init: InitStrategy = self
            .init
            .parse()
            .map_err(|e: haprtr_core::Error| HarnessError::config("init", e.to_string()))?;
        let altmin = AltMinConfig {
            max_sweeps: self.altmin_max_sweeps,
            tol: self.altmin_tol,
            seed: self.seed,
        };
        altmin.validate().map_err(|e| match e {
            haprtr_core::Error::Parameter { name, reason } => HarnessError::config(format!("altmin_{name}"), reason),
            other => HarnessError::config("altmin", other.to_string()),
        })?;
        Ok(SolverSettings {
            epsilon,
            rtr,
            init,
            restarts: self.restarts,
            altmin,
            record_wall_time: self.record_wall_time,
        })
    }

    /// Full validation for a sweep: instance shape, grids, and methods.
    pub fn validate_experiment(&self) -> Result<(SolverSettings, Vec<Method>)> {
        if self.m < 1 {
            return Err(HarnessError::config("m", "must be at least 1"));
        }
        if self.n < 2 {
            return Err(HarnessError::config("n", "must be at least 2"));
        }
        if self.trials < 1 {
            return Err(HarnessError::config("trials", "must be at least 1"));
        }
        check_grid("pd_grid", &self.pd_grid, |p| p > 0.0 && p <= 1.0, "(0, 1]")?;
        check_grid("err_grid", &self.err_grid, |e| (0.0..0.5).contains(&e), "[0, 0.5)")?;
        for (field, len) in [("pd_grid", self.pd_grid.len()), ("err_grid", self.err_grid.len()), ("trials", self.trials)] {
            if len > crate::experiment::MAX_INDEX {
                return Err(HarnessError::config(field, format!("at most {} entries", crate::experiment::MAX_INDEX)));
            }
        }
        if self.methods.is_empty() {
            return Err(HarnessError::config("methods", "must list at least one method"));
        }
        let mut methods = Vec::with_capacity(self.methods.len());
        for name in &self.methods {
            let method: Method = name.parse()?;
            if methods.contains(&method) {
                return Err(HarnessError::config("methods", format!("{name:?} listed twice")));
            }
            methods.push(method);
        }
        Ok((self.solver_settings()?, methods))
    }
}

fn core_field(e: haprtr_core::Error) -> HarnessError {
    match e {
        haprtr_core::Error::Parameter { name, reason } => HarnessError::config(name, reason),
        other => HarnessError::config("solver", other.to_string()),
    }
}

fn check_grid(field: &str, grid: &[f64], ok: impl Fn(f64) -> bool, range: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(HarnessError::config(field, "must not be empty"));
    }
    if let Some(bad) = grid.iter().find(|&&v| !ok(v)) {
        return Err(HarnessError::config(field, format!("value {bad} outside {range}")));
    }
    Ok(())
}
