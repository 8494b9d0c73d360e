//! Command-line harness for the haplotype assembly solvers: instance files,
//! single solves, seeded sweeps written as CSV, and SVG charts.

pub mod config;
pub mod error;
pub mod experiment;
pub mod format;
pub mod methods;
pub mod plot;

use std::fmt;
use std::path::Path;

use haprtr_core::pipeline::{generate_instance, hd_ambiguous, mec, Haplotype};

pub use config::HarnessConfig;
pub use error::{HarnessError, Result};
pub use experiment::ExperimentRecord;
pub use methods::Method;

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| HarnessError::io(path, e))
}

pub fn cmd_generate(m: usize, n: usize, pd: f64, err: f64, seed: u64, out: &Path) -> Result<()> {
    let inst = generate_instance(m, n, pd, err, seed)?;
    let text = format::write_instance(&inst.reads, Some(&inst.truth_h));
    experiment::write_atomic(out, text.as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: Method,
    pub hd: Option<usize>,
    pub mec: usize,
    pub iterations: usize,
    pub grad_norm: f64,
    pub wall_time_ms: f64,
    pub haplotype: Haplotype,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method: {}", self.method)?;
        match self.hd {
            Some(hd) => writeln!(f, "hd: {hd}")?,
            None => writeln!(f, "hd: n/a")?,
        }
        writeln!(f, "mec: {}", self.mec)?;
        writeln!(f, "iterations: {}", self.iterations)?;
        writeln!(f, "grad_norm: {:e}", self.grad_norm)?;
        writeln!(f, "wall_time_ms: {:.3}", self.wall_time_ms)?;
        writeln!(f, "haplotype: {}", self.haplotype)
    }
}

/// Solves one instance file. `seed` overrides the config's solver seed.
pub fn cmd_solve(instance: &Path, method: &str, config: Option<&Path>, seed: Option<u64>) -> Result<SolveReport> {
    let method: Method = method.parse()?;
    let cfg = match config {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::default(),
    };
    let mut settings = cfg.solver_settings()?;
    if let Some(s) = seed {
        settings = settings.with_seed(s);
    }
    settings.record_wall_time = true;

    let bytes = read_file(instance)?;
    let text = String::from_utf8(bytes).map_err(|e| HarnessError::Parse {
        line: 1,
        message: format!("not UTF-8: {e}"),
    })?;
    let file = format::parse_instance(&text)?;

    let out = methods::run_method(method, &file.reads, &settings)?;
    let hd = file
        .truth
        .as_ref()
        .map(|t| hd_ambiguous(&out.haplotype, t))
        .transpose()?;
    Ok(SolveReport {
        method,
        hd,
        mec: mec(&file.reads, &out.haplotype)?,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        wall_time_ms: out.wall_time_ms,
        haplotype: out.haplotype,
    })
}

/// Runs the sweep described by `config` and writes the CSV to `out`.
/// Returns the number of data rows.
pub fn cmd_experiment(config: &Path, out: &Path, threads: usize) -> Result<usize> {
    let cfg = HarnessConfig::load(config)?;
    let records = experiment::run_experiment(&cfg, threads)?;
    experiment::write_atomic(out, &experiment::records_to_csv(&records)?)?;
    Ok(records.len())
}

pub fn cmd_plot(csv_path: &Path, out: &Path) -> Result<()> {
    let records = experiment::read_records(&read_file(csv_path)?)?;
    let svg = plot::render_svg(&records)?;
    experiment::write_atomic(out, svg.as_bytes())
}
