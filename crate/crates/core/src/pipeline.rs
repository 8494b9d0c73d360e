//! Synthetic haplotype instances and the scores used to evaluate estimates.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{check_len, param, Error, Result};
use crate::objective::ReadMatrix;
use crate::rng::{stream, Stream};
use crate::sphere::UnitVector;

/// A `±1` string over SNP sites. `h` and `-h` describe the same diploid pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Haplotype(Vec<i8>);

impl Haplotype {
    pub fn new(sites: Vec<i8>) -> Result<Self> {
        if let Some(bad) = sites.iter().find(|s| s.abs() != 1) {
            return Err(param("haplotype", format!("site value {bad} is not +1 or -1")));
        }
        Ok(Self(sites))
    }

    pub fn sites(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

impl fmt::Display for Haplotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for Haplotype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(param("haplotype", format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// A synthetic read matrix together with the truth it was generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub truth_h: Haplotype,
    pub truth_c: Vec<i8>,
    pub reads: ReadMatrix,
    pub pd: f64,
    pub err: f64,
    pub seed: u64,
    /// Row-major positions of the sign-flipped observations `Ω_E`.
    pub flipped: Vec<(usize, usize)>,
}

fn random_signs<R: Rng>(len: usize, rng: &mut R) -> Vec<i8> {
    (0..len).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()
}

/// Draws `h` and `c` uniformly over `{±1}`, observes each entry of `c h^T`
/// independently with probability `pd`, then flips the sign of exactly
/// `round(err · |Ω|)` observed entries chosen without replacement.
pub fn generate_instance(m: usize, n: usize, pd: f64, err: f64, seed: u64) -> Result<Instance> {
    if m < 1 {
        return Err(param("m", "need at least one read"));
    }
    if n < 2 {
        return Err(param("n", "need at least two sites"));
    }
    if !(pd > 0.0 && pd <= 1.0) {
        return Err(param("pd", format!("must lie in (0, 1], got {pd}")));
    }
    if !(0.0..0.5).contains(&err) {
        return Err(param("err", format!("must lie in [0, 0.5), got {err}")));
    }

    let h = random_signs(n, &mut stream(seed, Stream::Haplotype));
    let c = random_signs(m, &mut stream(seed, Stream::ReadSigns));

    let mut mask_rng = stream(seed, Stream::Mask);
    let mut cells: Vec<Option<i8>> = Vec::with_capacity(m * n);
    let mut observed = Vec::new();
    for (i, ci) in c.iter().enumerate() {
        for (j, hj) in h.iter().enumerate() {
            if mask_rng.random_bool(pd) {
                observed.push(i * n + j);
                cells.push(Some(ci * hj));
            } else {
                cells.push(None);
            }
        }
    }

    let n_flips = (err * observed.len() as f64).round() as usize;
    let picks = index::sample(&mut stream(seed, Stream::Flips), observed.len(), n_flips);
    let mut flipped: Vec<(usize, usize)> = picks
        .iter()
        .map(|k| {
            let at = observed[k];
            cells[at] = cells[at].map(|v| -v);
            (at / n, at % n)
        })
        .collect();
    flipped.sort_unstable();

    Ok(Instance {
        truth_h: Haplotype(h),
        truth_c: c,
        reads: ReadMatrix::new(m, n, cells)?,
        pd,
        err,
        seed,
        flipped,
    })
}

/// The sampling operator `P_Ω`: observed entries pass through, the rest are 0.
pub fn apply_sampling(rows: usize, cols: usize, full: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    check_len(rows * cols, full.len())?;
    check_len(rows * cols, mask.len())?;
    Ok(full
        .iter()
        .zip(mask)
        .map(|(&v, &seen)| if seen { v } else { 0.0 })
        .collect())
}

/// Entrywise sign with `sign(0) = +1`.
pub fn decode(x: &UnitVector) -> Haplotype {
    decode_slice(x.coords())
}

pub(crate) fn decode_slice(v: &[f64]) -> Haplotype {
    Haplotype(v.iter().map(|&c| if c >= 0.0 { 1 } else { -1 }).collect())
}

/// Hamming distance up to the global sign: `min(d(est, h), d(est, -h))`.
pub fn hd_ambiguous(est: &Haplotype, truth: &Haplotype) -> Result<usize> {
    check_len(truth.len(), est.len())?;
    let d = est.0.iter().zip(&truth.0).filter(|(a, b)| a != b).count();
    Ok(d.min(est.len() - d))
}

/// Minimum error correction score of `z`: per read, the number of observed
/// entries disagreeing with the closer of `z` and `-z`.
pub fn mec(reads: &ReadMatrix, z: &Haplotype) -> Result<usize> {
    check_len(reads.cols(), z.len())?;
    Ok((0..reads.rows())
        .map(|i| {
            let mismatches = reads
                .row(i)
                .filter(|&(j, v)| v != f64::from(z.0[j]))
                .count();
            mismatches.min(reads.row_count(i) - mismatches)
        })
        .sum())
}
