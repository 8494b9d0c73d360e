//! Geometry of the unit sphere S^{n-1} embedded in R^n.
//!
//! Points are [`UnitVector`]s and tangent vectors carry their base point, so
//! every operation can check that its arguments live in the same tangent
//! space. The metric is the Euclidean inner product restricted to
//! `T_x S^{n-1} = { v : x·v = 0 }`.
//!
//! Closed forms used here:
//!
//! ```text
//! geodesic(x, v, t) = x cos(|v| t) + (v / |v|) sin(|v| t)
//! exp_x(v)          = geodesic(x, v, 1)
//! R_x(v)            = (x + v) / |x + v|
//! P_{x->y}(v)       = v - ((x + y)·v / (1 + x·y)) (x + y) + 2 (x·v) y
//! dist(x, y)        = arccos(x·y)
//! ```

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, param, Error, Result};

/// Tolerance on `| |x| - 1 |` accepted by [`UnitVector::new`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Relative tangency tolerance: `|x·v| <= TANGENCY_TOL * (1 + |v|)`.
pub const TANGENCY_TOL: f64 = 1e-10;

/// Below this `|x + y|` the pair is treated as antipodal.
pub const ANTIPODAL_TOL: f64 = 1e-10;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point on the unit sphere.
///
/// Coordinates are shared behind an `Arc`, so cloning a point (which every
/// tangent vector does) is cheap.
#[derive(Debug, Clone)]
pub struct UnitVector {
    coords: Arc<[f64]>,
}

impl PartialEq for UnitVector {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.coords, &other.coords) || self.coords == other.coords
    }
}

impl UnitVector {
    /// Wraps coordinates that already have unit norm (within [`UNIT_NORM_TOL`]).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(param("n", format!("sphere needs n >= 2, got {}", coords.len())));
        }
        let r = norm(&coords);
        if !r.is_finite() || (r - 1.0).abs() > UNIT_NORM_TOL {
            return Err(param("coords", format!("norm {r} is not 1")));
        }
        Ok(Self {
            coords: coords.into(),
        })
    }

    /// Scales a nonzero vector onto the sphere.
    pub fn normalize(v: Vec<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(param("n", format!("sphere needs n >= 2, got {}", v.len())));
        }
        let r = norm(&v);
        if !(r.is_finite() && r > 0.0) {
            return Err(param("coords", format!("cannot normalize vector of norm {r}")));
        }
        Ok(Self::from_raw(v.into_iter().map(|c| c / r).collect()))
    }

    /// Normalizes without validation; callers guarantee a finite nonzero input.
    fn from_raw(mut v: Vec<f64>) -> Self {
        let r = norm(&v);
        v.iter_mut().for_each(|c| *c /= r);
        Self { coords: v.into() }
    }

    /// The `k`-th standard basis vector of R^n.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::Index { index: k, len: n });
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        Self::new(v)
    }

    /// Uniform sample: a normalized isotropic Gaussian vector.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(param("n", format!("sphere needs n >= 2, got {n}")));
        }
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            if norm(&v) > 1e-300 {
                return Ok(Self::from_raw(v));
            }
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dot(&self, other: &UnitVector) -> Result<f64> {
        check_len(self.dim(), other.dim())?;
        Ok(dot(&self.coords, &other.coords))
    }

    /// The antipodal point `-x`.
    pub fn antipode(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

/// A vector in the tangent space at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: UnitVector,
    dir: Vec<f64>,
}

impl TangentVector {
    /// Builds a tangent vector. Inputs that miss the tangency tolerance are
    /// projected onto `T_base` once instead of being rejected.
    pub fn new(base: UnitVector, mut dir: Vec<f64>) -> Result<Self> {
        check_len(base.dim(), dir.len())?;
        if dir.iter().any(|c| !c.is_finite()) {
            return Err(param("dir", "tangent direction has non-finite entries"));
        }
        let along = dot(base.coords(), &dir);
        if along.abs() > TANGENCY_TOL * (1.0 + norm(&dir)) {
            for (d, x) in dir.iter_mut().zip(base.coords()) {
                *d -= along * x;
            }
        }
        Ok(Self { base, dir })
    }

    pub fn zero(base: UnitVector) -> Self {
        let n = base.dim();
        Self {
            base,
            dir: vec![0.0; n],
        }
    }

    pub fn base(&self) -> &UnitVector {
        &self.base
    }

    pub fn dir(&self) -> &[f64] {
        &self.dir
    }

    pub fn into_dir(self) -> Vec<f64> {
        self.dir
    }

    pub fn norm(&self) -> f64 {
        norm(&self.dir)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            dir: self.dir.iter().map(|d| d * s).collect(),
        }
    }

    /// `self + s * other`, both in the same tangent space.
    pub fn plus_scaled(&self, s: f64, other: &TangentVector) -> Result<Self> {
        same_base(self, other)?;
        Ok(Self {
            base: self.base.clone(),
            dir: self
                .dir
                .iter()
                .zip(&other.dir)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }
}

fn same_base(u: &TangentVector, v: &TangentVector) -> Result<()> {
    check_len(u.base.dim(), v.base.dim())?;
    if u.base != v.base {
        return Err(Error::Contract("tangent vectors live at different base points"));
    }
    Ok(())
}

fn require_base(x: &UnitVector, v: &TangentVector) -> Result<()> {
    check_len(x.dim(), v.base.dim())?;
    if *x != v.base {
        return Err(Error::Contract("tangent vector is not based at the given point"));
    }
    Ok(())
}

/// Riemannian metric: the Euclidean dot product of two tangent vectors at the
/// same point.
pub fn inner(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    same_base(u, v)?;
    Ok(dot(&u.dir, &v.dir))
}

/// Orthogonal projection `(I - x x^T) v` onto `T_x S^{n-1}`.
pub fn project_tangent(x: &UnitVector, v: &[f64]) -> Result<TangentVector> {
    check_len(x.dim(), v.len())?;
    let along = dot(x.coords(), v);
    let dir = v
        .iter()
        .zip(x.coords())
        .map(|(vi, xi)| vi - along * xi)
        .collect();
    Ok(TangentVector {
        base: x.clone(),
        dir,
    })
}

/// Great circle through `x` with initial velocity `v`, evaluated at time `t`.
pub fn geodesic(x: &UnitVector, v: &TangentVector, t: f64) -> Result<UnitVector> {
    require_base(x, v)?;
    let speed = v.norm();
    if speed == 0.0 || t == 0.0 {
        return Ok(x.clone());
    }
    let (s, c) = (speed * t).sin_cos();
    let k = s / speed;
    let out = x
        .coords()
        .iter()
        .zip(&v.dir)
        .map(|(xi, vi)| c * xi + k * vi)
        .collect();
    Ok(UnitVector::from_raw(out))
}

/// Exponential map: the geodesic with velocity `v` evaluated at time 1.
pub fn exp(x: &UnitVector, v: &TangentVector) -> Result<UnitVector> {
    geodesic(x, v, 1.0)
}

/// Metric-projection retraction `(x + v) / |x + v|`.
///
/// `|x + v|^2 = 1 + |v|^2` for tangent `v`, so the denominator never vanishes.
pub fn retract(x: &UnitVector, v: &TangentVector) -> Result<UnitVector> {
    require_base(x, v)?;
    let out = x.coords().iter().zip(&v.dir).map(|(a, b)| a + b).collect();
    Ok(UnitVector::from_raw(out))
}

/// Parallel transport of `v` from `T_x` to `T_y` along the minimizing
/// geodesic, i.e. the rotation in span{x, y} that carries `x` onto `y`.
pub fn transport(x: &UnitVector, y: &UnitVector, v: &TangentVector) -> Result<TangentVector> {
    require_base(x, v)?;
    check_len(x.dim(), y.dim())?;
    let (xc, yc) = (x.coords(), y.coords());
    let sum: Vec<f64> = xc.iter().zip(yc).map(|(a, b)| a + b).collect();
    let sum_norm = norm(&sum);
    if sum_norm <= ANTIPODAL_TOL {
        return Err(Error::Antipodal);
    }
    // 1 + x·y, without cancellation near the antipode.
    let denom = 0.5 * sum_norm * sum_norm;
    let k = dot(&sum, &v.dir) / denom;
    let xv = dot(xc, &v.dir);
    let dir = v
        .dir
        .iter()
        .zip(&sum)
        .zip(yc)
        .map(|((vi, si), yi)| vi - k * si + 2.0 * xv * yi)
        .collect();
    TangentVector::new(y.clone(), dir)
}

/// Geodesic distance `arccos(x·y)`.
///
/// Evaluated as `2 atan2(|x - y|, |x + y|)`, which equals the arccosine on the
/// sphere but keeps full relative accuracy for nearly coincident or nearly
/// antipodal points.
pub fn dist(x: &UnitVector, y: &UnitVector) -> Result<f64> {
    check_len(x.dim(), y.dim())?;
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in x.coords().iter().zip(y.coords()) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    Ok(2.0 * diff.sqrt().atan2(sum.sqrt()))
}

/// Uniform direction in `T_x`, scaled to norm `len`.
pub fn random_tangent<R: Rng + ?Sized>(x: &UnitVector, len: f64, rng: &mut R) -> TangentVector {
    loop {
        let g: Vec<f64> = (0..x.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let t = project_tangent(x, &g).expect("length matches by construction");
        let r = t.norm();
        if r > 1e-12 {
            return t.scaled(len / r);
        }
    }
}
