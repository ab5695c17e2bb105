//! Parameter sweeps, boundary bisection and directional (ray) limits.
//!
//! Grid points are evaluated with [`par_map`], which runs on the rayon pool
//! when the `parallel` feature is enabled and sequentially otherwise. Output
//! order never depends on the execution mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance of [`bisect_boundary`].
pub const BISECTION_TOL: f64 = 1e-12;

/// Execution mode for data-parallel loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

/// Maps `f` over `items`, preserving order.
pub fn par_map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        Exec::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(name: impl Into<String>, lo: f64, hi: f64, count: usize) -> Result<Self> {
        Self::new(name, lo, hi, count, Spacing::Linear)
    }

    pub fn log(name: impl Into<String>, lo: f64, hi: f64, count: usize) -> Result<Self> {
        Self::new(name, lo, hi, count, Spacing::Log)
    }

    pub fn new(name: impl Into<String>, lo: f64, hi: f64, count: usize, spacing: Spacing) -> Result<Self> {
        let name = name.into();
        if count < 2 {
            return Err(Error::InvalidInput(format!("axis {name}: count must be >= 2")));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!("axis {name}: need finite lo < hi")));
        }
        if spacing == Spacing::Log && lo <= 0.0 {
            return Err(Error::InvalidInput(format!("axis {name}: log axis needs lo > 0")));
        }
        Ok(Self { name, lo, hi, count, spacing })
    }

    pub fn value(&self, i: usize) -> f64 {
        let t = i as f64 / (self.count - 1) as f64;
        match self.spacing {
            Spacing::Linear => {
                if i + 1 == self.count {
                    self.hi
                } else {
                    self.lo + t * (self.hi - self.lo)
                }
            }
            Spacing::Log => (self.lo.ln() + t * (self.hi.ln() - self.lo.ln())).exp(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Dense rectangular grid over up to three axes, stored row-major with the
/// last axis fastest.
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid<T> {
    pub axes: Vec<Axis>,
    pub points: Vec<Vec<f64>>,
    pub results: Vec<T>,
}

impl<T: Send> SweepGrid<T> {
    pub fn evaluate<F>(axes: Vec<Axis>, exec: Exec, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> T + Sync + Send,
    {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidInput("a sweep needs one to three axes".into()));
        }
        let points = grid_points(&axes);
        let results = par_map(exec, &points, |p| f(p));
        Ok(Self { axes, points, results })
    }
}

fn grid_points(axes: &[Axis]) -> Vec<Vec<f64>> {
    let values: Vec<Vec<f64>> = axes.iter().map(Axis::values).collect();
    let mut points = vec![Vec::new()];
    for vals in &values {
        points = points
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Bisects the point where the boolean `predicate` changes value on
/// `[lo, hi]`, to absolute tolerance `tol`. Deterministic.
pub fn bisect_boundary<F>(predicate: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> bool,
{
    let (mut a, mut b) = (lo, hi);
    let fa = predicate(a);
    if fa == predicate(b) {
        return Err(Error::NoBracket { lo, hi });
    }
    while (b - a).abs() > tol {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if predicate(mid) == fa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Grows `[lo, hi]` geometrically away from `lo` until the predicate at the
/// far end differs from its value at `lo`. Returns the far end.
pub fn expand_bracket<F>(predicate: F, lo: f64, first_step: f64, max_far: f64) -> Result<f64>
where
    F: Fn(f64) -> bool,
{
    let start = predicate(lo);
    let mut step = first_step;
    loop {
        let far = lo + step;
        if (far - lo).abs() > (max_far - lo).abs() {
            return Err(Error::NoBracket { lo, hi: max_far });
        }
        if predicate(far) != start {
            return Ok(far);
        }
        step *= 2.0;
    }
}

/// Critical parameter along a ray `magnitude · direction` in parameter space,
/// extrapolated to zero magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayLimit {
    pub direction: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub values: Vec<f64>,
    pub extrapolated_limit: f64,
    /// Apparent order `p` in `value(h) ≈ limit + C·hᵖ`.
    pub convergence_order: f64,
    pub residual: f64,
}

/// Evaluates `critical(direction, h)` for each magnitude and extrapolates to
/// `h = 0` with Richardson's formula on the last three points.
pub fn ray_limit<F>(critical: F, direction: &[f64], magnitudes: &[f64]) -> Result<RayLimit>
where
    F: Fn(&[f64], f64) -> Result<f64>,
{
    if magnitudes.len() < 3 {
        return Err(Error::InvalidInput("ray_limit needs at least three magnitudes".into()));
    }
    if magnitudes.windows(2).any(|w| !(w[1] < w[0])) || magnitudes.iter().any(|&h| h <= 0.0) {
        return Err(Error::InvalidInput("magnitudes must be positive and strictly decreasing".into()));
    }
    let values = magnitudes.iter().map(|&h| critical(direction, h)).collect::<Result<Vec<_>>>()?;
    let n = values.len();
    let (limit, order) = richardson(&magnitudes[n - 3..], &values[n - 3..]);
    let residual = if n >= 4 {
        let (previous, _) = richardson(&magnitudes[n - 4..n - 1], &values[n - 4..n - 1]);
        (limit - previous).abs()
    } else {
        (limit - values[n - 1]).abs()
    };
    let floor = 1e-12 * (1.0 + limit.abs());
    Ok(RayLimit {
        direction: direction.to_vec(),
        magnitudes: magnitudes.to_vec(),
        values,
        extrapolated_limit: limit,
        convergence_order: order,
        residual: residual.max(floor),
    })
}

/// Extrapolation from three samples. Uses the measured order when it is
/// well defined and in `[0.5, 6]`, otherwise assumes first order.
fn richardson(h: &[f64], v: &[f64]) -> (f64, f64) {
    let d1 = v[1] - v[0];
    let d2 = v[2] - v[1];
    let scale = 1e-13 * (1.0 + v[2].abs());
    if d2.abs() <= scale {
        return (v[2], f64::INFINITY);
    }
    // For geometric magnitudes d1/d2 = (h0ᵖ − h1ᵖ)/(h1ᵖ − h2ᵖ) = (h0/h1)ᵖ.
    let ratio = h[1] / h[2];
    let measured = (d1 / d2).ln() / (h[0] / h[1]).ln();
    let order = if measured.is_finite() && (0.5..=6.0).contains(&measured) { measured } else { 1.0 };
    let limit = v[2] + d2 / (ratio.powf(order) - 1.0);
    (limit, if measured.is_finite() { measured } else { order })
}
