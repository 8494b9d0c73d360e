//! Riemannian trust-region minimization on the sphere.
//!
//! Each outer iteration approximately minimizes the quadratic model
//!
//! ```text
//! m(η) = f(x) + <grad f(x), η> + ½ <H[η], η>,   |η| <= Δ
//! ```
//!
//! with Steihaug-Toint truncated conjugate gradients, scores the step by the
//! ratio `ρ` of actual to predicted decrease, moves through the retraction
//! `R_x(η) = (x + η) / |x + η|` when `ρ > ρ'`, and rescales the radius by
//! 0.25 (`ρ < 0.25`), 2 capped at `Δ̄` (`ρ > 0.75` on the boundary) or 1.
//!
//! The first tCG step is the Cauchy step, and every later step only lowers the
//! model, so each subproblem solution satisfies
//! `m(0) - m(η) >= ½ |g| min(Δ, |g| / |H|)`.

use std::f64::consts::PI;

use crate::error::{param, Error, Result};
use crate::sphere::{inner, retract, TangentVector, UnitVector};

/// A smooth cost on the sphere with its Riemannian gradient and Hessian.
pub trait Objective {
    fn cost(&self, x: &UnitVector) -> Result<f64>;

    fn gradient(&self, x: &UnitVector) -> Result<TangentVector>;

    fn hess_vec(&self, x: &UnitVector, xi: &TangentVector) -> Result<TangentVector>;

    /// `f(x) - f(y)`. Objectives whose values are large compared with the
    /// decreases seen near a minimizer should override this with a form that
    /// avoids cancellation.
    fn cost_decrease(&self, x: &UnitVector, y: &UnitVector) -> Result<f64> {
        Ok(self.cost(x)? - self.cost(y)?)
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn cost(&self, x: &UnitVector) -> Result<f64> {
        (**self).cost(x)
    }

    fn gradient(&self, x: &UnitVector) -> Result<TangentVector> {
        (**self).gradient(x)
    }

    fn hess_vec(&self, x: &UnitVector, xi: &TangentVector) -> Result<TangentVector> {
        (**self).hess_vec(x, xi)
    }

    fn cost_decrease(&self, x: &UnitVector, y: &UnitVector) -> Result<f64> {
        (**self).cost_decrease(x, y)
    }
}

/// Solver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RtrConfig {
    /// Largest admissible radius `Δ̄`.
    pub delta_bar: f64,
    /// Initial radius `Δ_0 ∈ (0, Δ̄)`.
    pub delta0: f64,
    /// Acceptance threshold `ρ' ∈ [0, 0.25)`.
    pub rho_prime: f64,
    pub grad_tol: f64,
    pub max_outer: usize,
    /// Linear-convergence target of the inner residual test.
    pub tcg_kappa: f64,
    /// Superlinear exponent of the inner residual test.
    pub tcg_theta: f64,
    /// Seed for initial points drawn on behalf of this configuration.
    pub seed: u64,
}

impl Default for RtrConfig {
    fn default() -> Self {
        Self {
            delta_bar: PI,
            delta0: PI / 8.0,
            rho_prime: 0.1,
            grad_tol: 1e-6,
            max_outer: 500,
            tcg_kappa: 0.1,
            tcg_theta: 1.0,
            seed: 0,
        }
    }
}

impl RtrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_bar.is_finite() && self.delta_bar > 0.0) {
            return Err(param("delta_bar", "must be positive and finite"));
        }
        if !(self.delta0 > 0.0 && self.delta0 < self.delta_bar) {
            return Err(param("delta0", "must lie in (0, delta_bar)"));
        }
        if !(0.0..0.25).contains(&self.rho_prime) {
            return Err(param("rho_prime", "must lie in [0, 0.25)"));
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return Err(param("grad_tol", "must be positive and finite"));
        }
        if !(self.tcg_kappa > 0.0 && self.tcg_kappa < 1.0) {
            return Err(param("tcg_kappa", "must lie in (0, 1)"));
        }
        if !(self.tcg_theta.is_finite() && self.tcg_theta > 0.0) {
            return Err(param("tcg_theta", "must be positive and finite"));
        }
        Ok(())
    }
}

/// Why the inner solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcgStop {
    ZeroGradient,
    ResidualTolerance,
    NegativeCurvature,
    ExceededRadius,
    MaxIterations,
}

/// Approximate minimizer of the trust-region model.
#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    pub eta: TangentVector,
    /// `m(0) - m(η)`.
    pub model_decrease: f64,
    pub hit_boundary: bool,
    pub iterations: usize,
    pub stop: TcgStop,
}

/// Smallest `τ >= 0` with `|η + τ δ| = Δ`, given `|η| <= Δ`.
fn step_to_boundary(eta_eta: f64, eta_delta: f64, delta_delta: f64, radius: f64) -> f64 {
    let slack = (radius * radius - eta_eta).max(0.0);
    let disc = (eta_delta * eta_delta + delta_delta * slack).sqrt();
    if eta_delta > 0.0 {
        slack / (eta_delta + disc)
    } else {
        (disc - eta_delta) / delta_delta
    }
}

/// Steihaug-Toint truncated CG on `min <g, η> + ½ <H η, η>` s.t. `|η| <= Δ`.
///
/// Iterates stop on the residual test `|r_j| <= |r_0| min(κ, |r_0|^θ)`, on
/// nonpositive curvature (moving to the boundary along the current direction),
/// when a step would leave the ball (clipped to the boundary), or after
/// `dim T_x = n - 1` iterations.
pub fn solve_subproblem<H>(
    grad: &TangentVector,
    mut hess: H,
    delta: f64,
    cfg: &RtrConfig,
) -> Result<Subproblem>
where
    H: FnMut(&TangentVector) -> Result<TangentVector>,
{
    if !(delta.is_finite() && delta > 0.0) {
        return Err(param("delta", "trust radius must be positive and finite"));
    }
    let base = grad.base().clone();
    let r0_norm = grad.norm();
    let mut eta = TangentVector::zero(base.clone());
    if r0_norm == 0.0 {
        return Ok(Subproblem {
            eta,
            model_decrease: 0.0,
            hit_boundary: false,
            iterations: 0,
            stop: TcgStop::ZeroGradient,
        });
    }
    let max_iter = base.dim() - 1;
    let target = r0_norm * cfg.tcg_kappa.min(r0_norm.powf(cfg.tcg_theta));

    let mut h_eta = TangentVector::zero(base.clone());
    let mut r = grad.clone();
    let mut rr = r0_norm * r0_norm;
    let mut dir = r.scaled(-1.0);
    let mut eta_eta = 0.0;
    let mut stop = TcgStop::MaxIterations;
    let mut hit_boundary = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let h_dir = hess(&dir)?;
        let curvature = inner(&dir, &h_dir)?;
        if !curvature.is_finite() {
            return Err(Error::NumericFailure { iteration: 0 });
        }
        let eta_dir = inner(&eta, &dir)?;
        let dir_dir = inner(&dir, &dir)?;

        if curvature <= 0.0 {
            let tau = step_to_boundary(eta_eta, eta_dir, dir_dir, delta);
            eta = eta.plus_scaled(tau, &dir)?;
            h_eta = h_eta.plus_scaled(tau, &h_dir)?;
            hit_boundary = true;
            stop = TcgStop::NegativeCurvature;
            break;
        }

        let alpha = rr / curvature;
        let next_eta_eta = eta_eta + 2.0 * alpha * eta_dir + alpha * alpha * dir_dir;
        if next_eta_eta >= delta * delta {
            let tau = step_to_boundary(eta_eta, eta_dir, dir_dir, delta);
            eta = eta.plus_scaled(tau, &dir)?;
            h_eta = h_eta.plus_scaled(tau, &h_dir)?;
            hit_boundary = true;
            stop = TcgStop::ExceededRadius;
            break;
        }

        eta = eta.plus_scaled(alpha, &dir)?;
        h_eta = h_eta.plus_scaled(alpha, &h_dir)?;
        eta_eta = next_eta_eta;
        r = r.plus_scaled(alpha, &h_dir)?;
        let rr_next = inner(&r, &r)?;
        if rr_next.sqrt() <= target {
            stop = TcgStop::ResidualTolerance;
            break;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        dir = r.scaled(-1.0).plus_scaled(beta, &dir)?;
    }

    // Rounding in the boundary solve can overshoot by an ulp or two.
    let len = eta.norm();
    if len > delta {
        let shrink = delta / len;
        eta = eta.scaled(shrink);
        h_eta = h_eta.scaled(shrink);
    }

    let model_decrease = -(inner(grad, &eta)? + 0.5 * inner(&eta, &h_eta)?);
    Ok(Subproblem {
        eta,
        model_decrease,
        hit_boundary,
        iterations,
        stop,
    })
}

/// One outer iteration of the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Iterate `x_k` at which the model was built.
    pub point: Vec<f64>,
    pub cost: f64,
    pub grad_norm: f64,
    /// Radius `Δ_k` used for this subproblem.
    pub delta: f64,
    /// `None` when the predicted decrease was too small to form the ratio.
    pub rho: Option<f64>,
    pub step_norm: f64,
    pub model_decrease: f64,
    /// `f(x_k) - f(R_{x_k}(η_k))`.
    pub actual_decrease: f64,
    pub accepted: bool,
    pub inner_iterations: usize,
    pub inner_stop: TcgStop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RtrTrace {
    pub iterations: Vec<IterationRecord>,
    pub final_cost: f64,
    pub final_grad_norm: f64,
    pub stop: StopReason,
}

impl RtrTrace {
    pub fn accepted_steps(&self) -> usize {
        self.iterations.iter().filter(|r| r.accepted).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RtrSolution {
    pub x: UnitVector,
    pub trace: RtrTrace,
}

/// Predicted decreases below this multiple of `1 + |f|` reject the step
/// without forming the ratio.
pub const MODEL_DECREASE_FLOOR: f64 = f64::EPSILON * f64::EPSILON;

fn finite_or(v: f64, iteration: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericFailure { iteration })
    }
}

fn tag_iteration(e: Error, iteration: usize) -> Error {
    match e {
        Error::NumericFailure { .. } => Error::NumericFailure { iteration },
        other => other,
    }
}

/// Runs the trust-region method from `x0` until `|grad f| <= grad_tol` or
/// `max_outer` steps have been attempted, returning the last accepted iterate.
pub fn rtr_minimize<O: Objective>(obj: &O, x0: UnitVector, cfg: &RtrConfig) -> Result<RtrSolution> {
    cfg.validate()?;
    let mut x = x0;
    let mut fx = finite_or(obj.cost(&x)?, 0)?;
    let mut delta = cfg.delta0;
    let mut records = Vec::new();

    let mut k = 0;
    loop {
        let grad = obj.gradient(&x).map_err(|e| tag_iteration(e, k))?;
        let grad_norm = finite_or(grad.norm(), k)?;
        if grad_norm <= cfg.grad_tol || k == cfg.max_outer {
            let stop = if grad_norm <= cfg.grad_tol {
                StopReason::GradientTolerance
            } else {
                StopReason::MaxIterations
            };
            return Ok(RtrSolution {
                x,
                trace: RtrTrace {
                    iterations: records,
                    final_cost: fx,
                    final_grad_norm: grad_norm,
                    stop,
                },
            });
        }

        let sub = solve_subproblem(&grad, |v| obj.hess_vec(&x, v), delta, cfg)
            .map_err(|e| tag_iteration(e, k))?;
        finite_or(sub.model_decrease, k)?;
        let candidate = retract(&x, &sub.eta)?;
        let f_candidate = finite_or(obj.cost(&candidate)?, k)?;
        let actual_decrease = finite_or(obj.cost_decrease(&x, &candidate)?, k)?;

        let rho = (sub.model_decrease > MODEL_DECREASE_FLOOR * (1.0 + fx.abs()))
            .then(|| actual_decrease / sub.model_decrease);
        let ratio = rho.unwrap_or(0.0);

        let delta_used = delta;
        if ratio < 0.25 {
            delta *= 0.25;
        } else if ratio > 0.75 && sub.hit_boundary {
            delta = (2.0 * delta).min(cfg.delta_bar);
        }

        let accepted = rho.is_some() && ratio > cfg.rho_prime;
        records.push(IterationRecord {
            point: x.coords().to_vec(),
            cost: fx,
            grad_norm,
            delta: delta_used,
            rho,
            step_norm: sub.eta.norm(),
            model_decrease: sub.model_decrease,
            actual_decrease,
            accepted,
            inner_iterations: sub.iterations,
            inner_stop: sub.stop,
        });

        if accepted {
            x = candidate;
            fx = f_candidate;
        }
        k += 1;
    }
}
