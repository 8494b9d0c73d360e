//! Haplotype assembly with the trust-region solver: initial points,
//! multi-start, and sign decoding of the best local minimizer.

use rand::Rng;

use crate::error::{param, Result};
use crate::objective::{ReadMatrix, Smoothing, SmoothedL1};
use crate::pipeline::{decode, Haplotype};
use crate::rng::{stream, Stream};
use crate::rtr::{rtr_minimize, RtrConfig, RtrTrace};
use crate::sphere::{dot, norm, UnitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitStrategy {
    /// Normalized isotropic Gaussian sample.
    #[default]
    Random,
    /// Leading right singular vector of `P_Ω(M)`.
    Spectral,
}

impl std::str::FromStr for InitStrategy {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "spectral" => Ok(Self::Spectral),
            other => Err(param("init", format!("unknown strategy {other:?} (random, spectral)"))),
        }
    }
}

/// Power iteration on `A^T A` with `A = P_Ω(M)`. Falls back to a random point
/// when `A` vanishes.
pub fn spectral_point<R: Rng + ?Sized>(reads: &ReadMatrix, rng: &mut R) -> Result<UnitVector> {
    let n = reads.cols();
    let mut x = UnitVector::random(n, rng)?.coords().to_vec();
    for _ in 0..1000 {
        let mut next = vec![0.0; n];
        for i in 0..reads.rows() {
            let u: f64 = reads.row(i).map(|(j, v)| v * x[j]).sum();
            for (j, v) in reads.row(i) {
                next[j] += u * v;
            }
        }
        let r = norm(&next);
        if r == 0.0 {
            return UnitVector::random(n, rng);
        }
        next.iter_mut().for_each(|c| *c /= r);
        let aligned = dot(&next, &x).abs();
        x = next;
        if 1.0 - aligned < 1e-14 {
            break;
        }
    }
    UnitVector::normalize(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub x: UnitVector,
    pub haplotype: Haplotype,
    pub cost: f64,
    pub grad_norm: f64,
    /// Outer iterations summed over all starts.
    pub iterations: usize,
    pub starts: usize,
    /// Trace of the start that produced `x`.
    pub trace: RtrTrace,
}

/// Runs the solver from `1 + restarts` initial points and keeps the lowest
/// cost. The first start follows `init`; the others are uniform random. All
/// starting points are drawn from the solver's stream of `cfg.seed`.
pub fn assemble_rtr(
    reads: &ReadMatrix,
    eps: Smoothing,
    cfg: &RtrConfig,
    init: InitStrategy,
    restarts: usize,
) -> Result<Assembly> {
    let obj = SmoothedL1::new(reads, eps);
    let mut rng = stream(cfg.seed, Stream::RtrInit);
    let mut best: Option<Assembly> = None;
    let mut iterations = 0;
    for start in 0..=restarts {
        let x0 = match (start, init) {
            (0, InitStrategy::Spectral) => spectral_point(reads, &mut rng)?,
            _ => UnitVector::random(reads.cols(), &mut rng)?,
        };
        let sol = rtr_minimize(&obj, x0, cfg)?;
        iterations += sol.trace.iterations.len();
        if best.as_ref().is_none_or(|b| sol.trace.final_cost < b.cost) {
            best = Some(Assembly {
                haplotype: decode(&sol.x),
                cost: sol.trace.final_cost,
                grad_norm: sol.trace.final_grad_norm,
                x: sol.x,
                iterations: 0,
                starts: 0,
                trace: sol.trace,
            });
        }
    }
    let mut best = best.expect("at least one start");
    best.iterations = iterations;
    best.starts = restarts + 1;
    Ok(best)
}
