//! Seeded parameter sweeps.
//!
//! Trial `t` of grid cell `(pd_grid[a], err_grid[b])` uses the seed
//!
//! ```text
//! base_seed.wrapping_add(splitmix64((a << 42) | (b << 21) | t))
//! ```
//!
//! with `a, b, t < 2^21`. Packing is injective on that range and the
//! splitmix64 finalizer is a bijection of `u64`, so distinct trials get
//! distinct seeds. The seed drives instance generation and every solver, each
//! on its own random stream.

use std::io::Write as _;
use std::path::Path;

use haprtr_core::pipeline::{generate_instance, hd_ambiguous, mec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::HarnessConfig;
use crate::error::{HarnessError, Result};
use crate::methods::run_method;

/// Exclusive bound on grid indices and trial numbers.
pub const MAX_INDEX: usize = 1 << 21;

pub const CSV_HEADER: [&str; 11] = [
    "pd",
    "err",
    "trial",
    "seed",
    "method",
    "hd",
    "mec",
    "unrecoverable_sites",
    "iterations",
    "grad_norm",
    "wall_time_ms",
];

/// Environment variable holding the worker thread count. Unset or `0` means
/// the available parallelism.
pub const THREADS_ENV: &str = "HAPRTR_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub pd: f64,
    pub err: f64,
    pub trial: usize,
    pub seed: u64,
    pub method: String,
    pub hd: usize,
    pub mec: usize,
    pub unrecoverable_sites: usize,
    pub iterations: usize,
    pub grad_norm: f64,
    pub wall_time_ms: f64,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trial_seed(base_seed: u64, pd_idx: usize, err_idx: usize, trial: usize) -> u64 {
    debug_assert!(pd_idx < MAX_INDEX && err_idx < MAX_INDEX && trial < MAX_INDEX);
    let packed = ((pd_idx as u64) << 42) | ((err_idx as u64) << 21) | trial as u64;
    base_seed.wrapping_add(splitmix64(packed))
}

pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(HarnessError::Usage(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| HarnessError::Usage(format!("{THREADS_ENV}: expected a thread count, got {v:?}"))),
    }
}

/// Runs every (pd, err, trial, method) combination and returns the records
/// sorted by that key. `threads == 0` uses the available parallelism.
pub fn run_experiment(cfg: &HarnessConfig, threads: usize) -> Result<Vec<ExperimentRecord>> {
    let (settings, methods) = cfg.validate_experiment()?;
    let mut jobs = Vec::with_capacity(cfg.pd_grid.len() * cfg.err_grid.len() * cfg.trials);
    for a in 0..cfg.pd_grid.len() {
        for b in 0..cfg.err_grid.len() {
            for t in 0..cfg.trials {
                jobs.push((a, b, t));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Usage(format!("thread pool: {e}")))?;
    let per_trial: Vec<Vec<ExperimentRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(a, b, t)| {
                let (pd, err) = (cfg.pd_grid[a], cfg.err_grid[b]);
                let seed = trial_seed(cfg.base_seed, a, b, t);
                let inst = generate_instance(cfg.m, cfg.n, pd, err, seed)?;
                let unrecoverable_sites = inst.reads.unobserved_columns();
                let trial_settings = settings.with_seed(seed);
                methods
                    .iter()
                    .map(|&method| {
                        let out = run_method(method, &inst.reads, &trial_settings)?;
                        Ok(ExperimentRecord {
                            pd,
                            err,
                            trial: t,
                            seed,
                            method: method.name().to_string(),
                            hd: hd_ambiguous(&out.haplotype, &inst.truth_h)?,
                            mec: mec(&inst.reads, &out.haplotype)?,
                            unrecoverable_sites,
                            iterations: out.iterations,
                            grad_norm: out.grad_norm,
                            wall_time_ms: out.wall_time_ms,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records: Vec<ExperimentRecord> = per_trial.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|x, y| {
        x.pd.total_cmp(&y.pd)
            .then(x.err.total_cmp(&y.err))
            .then(x.trial.cmp(&y.trial))
            .then_with(|| x.method.cmp(&y.method))
    });
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_internal)?;
    for r in records {
        w.serialize(r).map_err(csv_internal)?;
    }
    w.into_inner().map_err(|e| HarnessError::Usage(e.to_string()))
}

fn csv_internal(e: csv::Error) -> HarnessError {
    HarnessError::Usage(format!("csv encoding: {e}"))
}

/// Writes `bytes` next to `path` under a temporary name, then renames it into
/// place, so a failed run never leaves a truncated file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| HarnessError::Usage(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|()| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(HarnessError::io(path, e));
    }
    Ok(())
}

/// Parses a results CSV, requiring the exact column schema.
pub fn read_records(bytes: &[u8]) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = r.headers().map_err(|e| schema(CSV_HEADER[0], e.to_string()))?.clone();
    for (i, expected) in CSV_HEADER.iter().enumerate() {
        match header.get(i) {
            Some(found) if found == *expected => {}
            Some(found) => return Err(schema(expected, format!("header is {found:?}"))),
            None => return Err(schema(expected, "missing")),
        }
    }
    if let Some(extra) = header.get(CSV_HEADER.len()) {
        return Err(schema(extra, "unexpected column"));
    }
    r.deserialize()
        .enumerate()
        .map(|(row, rec)| {
            rec.map_err(|e| {
                let column = match e.kind() {
                    csv::ErrorKind::Deserialize { err, .. } => err.field().map(|f| f as usize),
                    _ => None,
                };
                let name = column.and_then(|c| CSV_HEADER.get(c).copied()).unwrap_or("<row>");
                schema(name, format!("data row {}: {e}", row + 1))
            })
        })
        .collect()
}

fn schema(column: &str, reason: impl Into<String>) -> HarnessError {
    HarnessError::Schema {
        column: column.to_string(),
        reason: reason.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn trial_seeds_are_distinct() {
        let mut seen = HashSet::new();
        for a in 0..8 {
            for b in 0..8 {
                for t in 0..64 {
                    assert!(seen.insert(trial_seed(123, a, b, t)));
                }
            }
        }
        assert_eq!(trial_seed(0, 0, 0, 0), splitmix64(0));
        assert_eq!(trial_seed(5, 1, 2, 3), 5u64.wrapping_add(splitmix64((1 << 42) | (2 << 21) | 3)));
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference generator seeded with 0.
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(splitmix64(0x9e37_79b9_7f4a_7c15), 0x6e78_9e6a_a1b9_65f4);
    }

    fn record(pd: f64, trial: usize, method: &str) -> ExperimentRecord {
        ExperimentRecord {
            pd,
            err: 0.1,
            trial,
            seed: 9,
            method: method.into(),
            hd: 1,
            mec: 2,
            unrecoverable_sites: 0,
            iterations: 3,
            grad_norm: 1.5e-7,
            wall_time_ms: 0.0,
        }
    }

    #[test]
    fn csv_round_trip_and_header() {
        let mut recs = vec![record(0.7, 0, "rtr"), record(0.3, 1, "altmin"), record(0.3, 0, "rtr"), record(0.3, 0, "altmin")];
        sort_records(&mut recs);
        assert_eq!(recs.iter().map(|r| (r.pd, r.trial, r.method.as_str())).collect::<Vec<_>>(), vec![
            (0.3, 0, "altmin"),
            (0.3, 0, "rtr"),
            (0.3, 1, "altmin"),
            (0.7, 0, "rtr")
        ]);
        let bytes = records_to_csv(&recs).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("pd,err,trial,seed,method,hd,mec,unrecoverable_sites,iterations,grad_norm,wall_time_ms\n"));
        assert_eq!(read_records(&bytes).unwrap(), recs);
    }

    fn bad_column(text: &str) -> String {
        match read_records(text.as_bytes()) {
            Err(HarnessError::Schema { column, .. }) => column,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn schema_errors_name_first_bad_column() {
        let good = CSV_HEADER.join(",");
        assert_eq!(bad_column(&good.replace("mec", "MEC")), "mec");
        assert_eq!(bad_column("pd,err,trial\n"), "seed");
        assert_eq!(bad_column(&format!("{good},extra\n")), "extra");
        assert_eq!(bad_column(&format!("{good}\n0.3,0.1,0,1,rtr,-4,0,0,1,0.0,0.0\n")), "hd");
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = std::env::temp_dir().join(format!("haprtr-atomic-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        assert!(write_atomic(&dir.join("missing/out.csv"), b"x").is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
