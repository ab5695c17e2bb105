//! The Whitney umbrella `y₁y₂² = y₃²` and Bottema's marginal surface
//! `a₁a₂a₃ = a₁² + a₃²` in the coefficient space of a quartic with `a₄ = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::{par_map, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmbrellaPoint {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BottemaSurfacePoint {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Slope `a₃/a₁` of the generator through the point, `None` on the `a₂` axis.
    pub m: Option<f64>,
}

/// `(x₁, x₂) ↦ (x₁², x₂, x₁x₂)`.
pub fn umbrella_map(x1: f64, x2: f64) -> UmbrellaPoint {
    UmbrellaPoint { y1: x1 * x1, y2: x2, y3: x1 * x2, x1: Some(x1), x2: Some(x2) }
}

pub fn umbrella_residual(y1: f64, y2: f64, y3: f64) -> f64 {
    y1 * y2 * y2 - y3 * y3
}

/// Marginal height `a₂ = (a₁² + a₃²)/(a₁a₃)` of surface V over `(a₁, a₃)`.
pub fn bottema_height(a1: f64, a3: f64) -> Result<f64> {
    if !(a1 > 0.0 && a3 > 0.0) {
        return Err(Error::Domain(format!("need a1 > 0 and a3 > 0, got ({a1}, {a3})")));
    }
    let m = a3 / a1;
    Ok(m + 1.0 / m)
}

/// Residual `a₁a₂a₃ − a₁² − a₃²` of surface V.
pub fn bottema_residual(a1: f64, a2: f64, a3: f64) -> f64 {
    a1 * a2 * a3 - a1 * a1 - a3 * a3
}

/// Residual relative to the size of the terms in it.
pub fn bottema_relative_residual(a1: f64, a2: f64, a3: f64) -> f64 {
    let scale = (a1 * a2 * a3).abs() + a1 * a1 + a3 * a3;
    if scale == 0.0 {
        0.0
    } else {
        bottema_residual(a1, a2, a3).abs() / scale
    }
}

/// The diffeomorphism carrying the umbrella onto V:
/// `a₁ = y₃/2 + w`, `a₂ = 2 + y₂`, `a₃ = −y₃/2 + w`, `w = √(y₃²/4 + y₁y₂)`.
pub fn bottema_from_whitney(y1: f64, y2: f64, y3: f64) -> Result<BottemaSurfacePoint> {
    let w2 = 0.25 * y3 * y3 + y1 * y2;
    if w2 < 0.0 {
        return Err(Error::Domain(format!("y3²/4 + y1·y2 = {w2:e} is negative")));
    }
    let w = w2.sqrt();
    let a1 = 0.5 * y3 + w;
    let a3 = -0.5 * y3 + w;
    let m = (a1 > 0.0).then(|| a3 / a1);
    Ok(BottemaSurfacePoint { a1, a2: 2.0 + y2, a3, m })
}

/// Point `(a₁, m + 1/m, m·a₁)` on the generator of slope `m`.
pub fn generator_point(a1: f64, m: f64) -> BottemaSurfacePoint {
    BottemaSurfacePoint { a1, a2: m + 1.0 / m, a3: m * a1, m: Some(m) }
}

/// The two generator slopes through the height `a₂ ≥ 2` of the `a₂` axis.
pub fn generator_slopes(a2: f64) -> Result<(f64, f64)> {
    if !(a2 >= 2.0) {
        return Err(Error::Domain(format!("no generator reaches a2 = {a2} < 2")));
    }
    let root = (a2 * a2 - 4.0).sqrt();
    let large = 0.5 * (a2 + root);
    Ok((1.0 / large, large))
}

/// One row of an exported surface sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSample {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub umbrella_residual: f64,
    pub bottema_residual: f64,
}

/// Samples the umbrella on an `n × n` grid of `(x₁, x₂) ∈ [−x1_max, x1_max] × [0, x2_max]`
/// and maps every point to V. The half `x₂ ≥ 0` is the part where the
/// transformation is real.
pub fn sample_surface(n: usize, x1_max: f64, x2_max: f64, exec: Exec) -> Result<Vec<SurfaceSample>> {
    if n < 2 {
        return Err(Error::InvalidInput("grid size must be >= 2".into()));
    }
    if !(x1_max > 0.0 && x2_max > 0.0) {
        return Err(Error::InvalidInput("sample extents must be positive".into()));
    }
    let step = |i: usize, n: usize| i as f64 / (n - 1) as f64;
    let params: Vec<(f64, f64)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (x1_max * (2.0 * step(i, n) - 1.0), x2_max * step(j, n)))).collect();
    par_map(exec, &params, |&(x1, x2)| {
        let y = umbrella_map(x1, x2);
        let b = bottema_from_whitney(y.y1, y.y2, y.y3)?;
        Ok(SurfaceSample {
            x1,
            x2,
            y1: y.y1,
            y2: y.y2,
            y3: y.y3,
            a1: b.a1,
            a2: b.a2,
            a3: b.a3,
            umbrella_residual: umbrella_residual(y.y1, y.y2, y.y3),
            bottema_residual: bottema_relative_residual(b.a1, b.a2, b.a3),
        })
    })
    .into_iter()
    .collect()
}
