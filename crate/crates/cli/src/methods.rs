//! Registered assembly methods.

use std::time::Instant;

use haprtr_core::altmin::altmin_rank1;
use haprtr_core::assemble::assemble_rtr;
use haprtr_core::objective::ReadMatrix;
use haprtr_core::pipeline::Haplotype;

use crate::config::SolverSettings;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Rtr,
    AltMin,
}

impl Method {
    pub const REGISTERED: [Method; 2] = [Method::Rtr, Method::AltMin];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rtr => "rtr",
            Method::AltMin => "altmin",
        }
    }

    pub fn registered_names() -> String {
        Self::REGISTERED.map(Method::name).join(", ")
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Self::REGISTERED
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| HarnessError::UnknownMethod {
                name: s.to_string(),
                registered: Self::registered_names(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub haplotype: Haplotype,
    /// Outer iterations for `rtr` (summed over starts), sweeps for `altmin`.
    pub iterations: usize,
    /// Riemannian gradient norm for `rtr`, masked least-squares gradient norm
    /// for `altmin`.
    pub grad_norm: f64,
    pub wall_time_ms: f64,
}

pub fn run_method(method: Method, reads: &ReadMatrix, settings: &SolverSettings) -> Result<MethodOutcome> {
    let start = Instant::now();
    let (haplotype, iterations, grad_norm) = match method {
        Method::Rtr => {
            let a = assemble_rtr(reads, settings.epsilon, &settings.rtr, settings.init, settings.restarts)?;
            (a.haplotype, a.iterations, a.grad_norm)
        }
        Method::AltMin => {
            let r = altmin_rank1(reads, &settings.altmin)?;
            (r.estimate, r.sweeps, r.grad_norm)
        }
    };
    let wall_time_ms = if settings.record_wall_time {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok(MethodOutcome {
        haplotype,
        iterations,
        grad_norm,
        wall_time_ms,
    })
}
