//! Rank-one completion by alternating least squares.
//!
//! Minimizes `|P_Ω(M) - P_Ω(u v^T)|_F^2` one factor at a time; each update is
//! the exact least-squares minimizer over the observed entries of its row or
//! column:
//!
//! ```text
//! u_i <- Σ_{j∈Ω_i} M_ij v_j / Σ_{j∈Ω_i} v_j^2
//! v_j <- Σ_{i∈Ω_j} M_ij u_i / Σ_{i∈Ω_j} u_i^2
//! ```

use crate::error::{param, Error, Result};
use crate::objective::ReadMatrix;
use crate::pipeline::{decode_slice, Haplotype};
use crate::rng::{stream, Stream};
use crate::sphere::UnitVector;

#[derive(Debug, Clone, PartialEq)]
pub struct AltMinConfig {
    /// Sweep budget; the initialization counts as the first sweep.
    pub max_sweeps: usize,
    /// Stop once the masked residual norm changes by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for AltMinConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 100,
            tol: 1e-8,
            seed: 0,
        }
    }
}

impl AltMinConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps < 1 {
            return Err(param("max_sweeps", "must be at least 1"));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(param("tol", "must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltMinResult {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub estimate: Haplotype,
    pub sweeps: usize,
    /// Final `|P_Ω(M) - P_Ω(u v^T)|_F`.
    pub residual: f64,
    /// Norm of the gradient of the squared residual with respect to `(u, v)`.
    pub grad_norm: f64,
    /// Coordinate updates skipped because their denominator was zero.
    pub stalled_updates: usize,
}

/// Starts from a uniform random `v` on the sphere (seeded by `cfg.seed`).
pub fn altmin_rank1(reads: &ReadMatrix, cfg: &AltMinConfig) -> Result<AltMinResult> {
    cfg.validate()?;
    check_observed(reads)?;
    let v0 = UnitVector::random(reads.cols(), &mut stream(cfg.seed, Stream::AltMinInit))?;
    let mut state = State::new(reads, vec![0.0; reads.rows()], v0.coords().to_vec());
    state.update_u();
    run(state, cfg)
}

/// Starts from a given read-factor `u`; the first sweep solves for `v`.
pub fn altmin_rank1_from_u(reads: &ReadMatrix, cfg: &AltMinConfig, u0: Vec<f64>) -> Result<AltMinResult> {
    cfg.validate()?;
    check_observed(reads)?;
    crate::error::check_len(reads.rows(), u0.len())?;
    let mut state = State::new(reads, u0, vec![0.0; reads.cols()]);
    state.update_v();
    state.update_u();
    run(state, cfg)
}

fn check_observed(reads: &ReadMatrix) -> Result<()> {
    if reads.observed_count() == 0 {
        return Err(Error::DegenerateInput("read matrix has no observed entries".into()));
    }
    Ok(())
}

fn run(mut state: State<'_>, cfg: &AltMinConfig) -> Result<AltMinResult> {
    let mut sweeps = 1;
    let mut residual = state.residual();
    while sweeps < cfg.max_sweeps {
        state.update_v();
        state.update_u();
        sweeps += 1;
        let next = state.residual();
        let change = (residual - next).abs();
        residual = next;
        if change < cfg.tol {
            break;
        }
    }
    if !residual.is_finite() {
        return Err(Error::NumericFailure { iteration: sweeps });
    }
    let grad_norm = state.grad_norm();
    Ok(AltMinResult {
        estimate: decode_slice(&state.v),
        u: state.u,
        v: state.v,
        sweeps,
        residual,
        grad_norm,
        stalled_updates: state.stalled,
    })
}

struct State<'a> {
    reads: &'a ReadMatrix,
    u: Vec<f64>,
    v: Vec<f64>,
    stalled: usize,
}

impl<'a> State<'a> {
    fn new(reads: &'a ReadMatrix, u: Vec<f64>, v: Vec<f64>) -> Self {
        Self {
            reads,
            u,
            v,
            stalled: 0,
        }
    }

    fn update_u(&mut self) {
        for i in 0..self.reads.rows() {
            let (mut num, mut den) = (0.0, 0.0);
            for (j, m) in self.reads.row(i) {
                num += m * self.v[j];
                den += self.v[j] * self.v[j];
            }
            if den > 0.0 {
                self.u[i] = num / den;
            } else {
                self.stalled += 1;
            }
        }
    }

    fn update_v(&mut self) {
        let n = self.reads.cols();
        let (mut num, mut den) = (vec![0.0; n], vec![0.0; n]);
        for i in 0..self.reads.rows() {
            let ui = self.u[i];
            for (j, m) in self.reads.row(i) {
                num[j] += m * ui;
                den[j] += ui * ui;
            }
        }
        for j in 0..n {
            if den[j] > 0.0 {
                self.v[j] = num[j] / den[j];
            } else {
                self.stalled += 1;
            }
        }
    }

    fn residual(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.reads.rows() {
            for (j, m) in self.reads.row(i) {
                let r = m - self.u[i] * self.v[j];
                total += r * r;
            }
        }
        total.sqrt()
    }

    fn grad_norm(&self) -> f64 {
        let mut gu = vec![0.0; self.u.len()];
        let mut gv = vec![0.0; self.v.len()];
        for (i, gi) in gu.iter_mut().enumerate() {
            for (j, m) in self.reads.row(i) {
                let r = m - self.u[i] * self.v[j];
                *gi -= 2.0 * r * self.v[j];
                gv[j] -= 2.0 * r * self.u[i];
            }
        }
        gu.iter().chain(&gv).map(|g| g * g).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{generate_instance, hd_ambiguous};

    #[test]
    fn exact_from_true_read_signs() {
        let inst = generate_instance(12, 9, 1.0, 0.0, 4).unwrap();
        let u0: Vec<f64> = inst.truth_c.iter().map(|&c| f64::from(c)).collect();
        let cfg = AltMinConfig {
            max_sweeps: 1,
            ..AltMinConfig::default()
        };
        let out = altmin_rank1_from_u(&inst.reads, &cfg, u0).unwrap();
        for (v, h) in out.v.iter().zip(inst.truth_h.sites()) {
            assert!((v - f64::from(*h)).abs() < 1e-15);
        }
        assert_eq!(hd_ambiguous(&out.estimate, &inst.truth_h).unwrap(), 0);
        assert!(out.residual < 1e-12);
    }

    #[test]
    fn single_sweep_returns_decoded_initialization() {
        let inst = generate_instance(10, 8, 0.6, 0.1, 2).unwrap();
        let cfg = AltMinConfig {
            max_sweeps: 1,
            tol: 1e300,
            seed: 17,
        };
        let a = altmin_rank1(&inst.reads, &cfg).unwrap();
        let b = altmin_rank1(&inst.reads, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sweeps, 1);
        let v0 = UnitVector::random(8, &mut stream(17, Stream::AltMinInit)).unwrap();
        assert_eq!(a.v, v0.coords());
        assert_eq!(a.estimate, decode_slice(v0.coords()));
    }

    #[test]
    fn residual_never_increases_across_half_sweeps() {
        for seed in 0..10 {
            let inst = generate_instance(20, 15, 0.5, 0.25, seed).unwrap();
            let v0 = UnitVector::random(15, &mut stream(seed, Stream::AltMinInit)).unwrap();
            let mut st = State::new(&inst.reads, vec![0.0; 20], v0.coords().to_vec());
            st.update_u();
            let mut last = st.residual();
            for half in 0..40 {
                if half % 2 == 0 {
                    st.update_v();
                } else {
                    st.update_u();
                }
                let r = st.residual();
                assert!(r <= last * (1.0 + 1e-12) + 1e-12, "seed {seed} half {half}: {r} > {last}");
                last = r;
            }
        }
    }

    #[test]
    fn estimate_is_invariant_under_positive_rescaling() {
        let inst = generate_instance(15, 10, 0.7, 0.2, 8).unwrap();
        let out = altmin_rank1(&inst.reads, &AltMinConfig::default()).unwrap();
        for s in [1e-3, 0.5, 7.0] {
            let v: Vec<f64> = out.v.iter().map(|x| x * s).collect();
            assert_eq!(decode_slice(&v), out.estimate);
            let u: Vec<f64> = out.u.iter().map(|x| x / s).collect();
            let st = State::new(&inst.reads, u, v);
            assert!((st.residual() - out.residual).abs() < 1e-9 * (1.0 + out.residual));
        }
    }

    #[test]
    fn empty_rows_are_flagged_not_fatal() {
        let reads = ReadMatrix::from_rows(&[
            vec![Some(1), Some(-1), None],
            vec![None, None, None],
            vec![Some(-1), Some(1), None],
        ])
        .unwrap();
        let out = altmin_rank1(&reads, &AltMinConfig::default()).unwrap();
        assert!(out.stalled_updates > 0);
        assert!(out.residual < 1e-6);
    }

    #[test]
    fn all_unobserved_is_degenerate() {
        let reads = ReadMatrix::new(2, 3, vec![None; 6]).unwrap();
        assert!(matches!(
            altmin_rank1(&reads, &AltMinConfig::default()),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn zero_sweeps_rejected() {
        let reads = ReadMatrix::new(1, 2, vec![Some(1), Some(1)]).unwrap();
        let cfg = AltMinConfig {
            max_sweeps: 0,
            ..AltMinConfig::default()
        };
        assert!(altmin_rank1(&reads, &cfg).is_err());
    }
}
