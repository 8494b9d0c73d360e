//! Haplotype assembly as minimization of a smoothed negative-L1 cost over the
//! unit sphere, solved with a Riemannian trust-region method.
//!
//! The read matrix `M` (entries `±1`, partially observed) of a diploid sample
//! is approximately `c h^T`. Maximizing `|P_Ω(M) x|_1` over unit vectors `x`
//! recovers `±h / sqrt(n)` in the noiseless case; the solver minimizes the
//! smoothed form `-Σ_i sqrt((m_i·x)^2 + ε)` and decodes the haplotype by sign.
//!
//! - [`sphere`]: points, tangent vectors, geodesics, retraction, transport.
//! - [`objective`]: the read matrix and the cost with its derivatives.
//! - [`rtr`]: truncated-CG subproblem solver and the trust-region loop.
//! - [`pipeline`]: synthetic instances, decoding, Hamming distance, MEC.
//! - [`altmin`]: alternating least-squares rank-one completion baseline.
//! - [`assemble`]: multi-start assembly driver.

pub mod altmin;
pub mod assemble;
mod error;
pub mod objective;
pub mod pipeline;
pub mod rng;
pub mod rtr;
pub mod sphere;

pub use error::{Error, Result};
