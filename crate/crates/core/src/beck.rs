//! Galerkin model of Beck's column with Kelvin–Voigt and external damping:
//!
//! ```text
//! ∂⁴u + q∂²u + (d₁∂⁴ + d₂)∂ₜu + ∂ₜ²u = 0,  u(0) = u'(0) = u''(1) = u'''(1) = 0
//! ```
//!
//! The displacement is expanded in clamped-free beam eigenfunctions, which
//! satisfy every boundary condition. The follower-load matrix
//! `P₂ = (∫φⱼφₖ'')` is not symmetric, which is what allows flutter.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::sweep::{bisect_boundary, par_map, Exec, BISECTION_TOL};

pub const MIN_MODES: usize = 8;
pub const MAX_MODES: usize = 32;
pub const QUADRATURE_TOL: f64 = 1e-10;
pub const DEFAULT_CEILING: f64 = 60.0;
const SCAN_STEP: f64 = 0.25;

/// Reference constants of the closed-form critical surface.
pub const Q0: f64 = 20.05;
const BE_A: f64 = 1902.0;
const BE_B1: f64 = 14.34;
const BE_B2: f64 = 0.091;
const BE_C: f64 = 12.68;
const BE_E: f64 = 0.053;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeckParams {
    pub q: f64,
    pub d1: f64,
    pub d2: f64,
    pub n_modes: usize,
}

impl BeckParams {
    pub fn validate(&self) -> Result<()> {
        if !(MIN_MODES..=MAX_MODES).contains(&self.n_modes) {
            return Err(Error::InvalidInput(format!(
                "n_modes must lie in [{MIN_MODES}, {MAX_MODES}], got {}",
                self.n_modes
            )));
        }
        if !(self.q >= 0.0 && self.d1 >= 0.0 && self.d2 >= 0.0) || !self.q.is_finite() {
            return Err(Error::InvalidInput("q, d1, d2 must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// The first `n` roots of `cos β cosh β = −1`.
pub fn beam_roots(n: usize) -> Vec<f64> {
    let f = |b: f64| b.cos() + 1.0 / b.cosh();
    (0..n)
        .map(|k| {
            let centre = (k as f64 + 0.5) * std::f64::consts::PI;
            let (lo, hi) = if k == 0 { (0.5, 2.5) } else { (centre - 0.5, centre + 0.5) };
            bisect_boundary(|b| f(b) > 0.0, lo, hi, 1e-15).expect("beam root bracket")
        })
        .collect()
}

/// Clamped-free beam eigenfunction `φ = cosh βx − cos βx − s(sinh βx − sin βx)`,
/// evaluated without the cancellation between the growing hyperbolic terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamMode {
    pub beta: f64,
    s: f64,
    /// `(1 − s)·e^β`, finite for every root.
    ratio: f64,
}

impl BeamMode {
    pub fn new(beta: f64) -> Self {
        let e = (-beta).exp();
        // (sinh β + sin β)·e^{−β}
        let denom = 0.5 * (1.0 - e * e) + beta.sin() * e;
        let ratio = (-e + beta.sin() - beta.cos()) / denom;
        Self { beta, s: 1.0 - ratio * e, ratio }
    }

    /// `(cosh βx − s sinh βx, sinh βx − s cosh βx)`.
    fn hyperbolic(&self, x: f64) -> (f64, f64) {
        let decay = (-self.beta * x).exp();
        let grow = (self.beta * (x - 1.0)).exp();
        let tail = decay * (-self.beta).exp();
        let sh = 0.5 * (grow - tail);
        let ch = 0.5 * (grow + tail);
        (decay + self.ratio * sh, -decay + self.ratio * ch)
    }

    /// `φ⁽ᵏ⁾(x)` for `k = 0..=4`.
    pub fn derivative(&self, x: f64, k: usize) -> f64 {
        let (e, f) = self.hyperbolic(x);
        let bx = self.beta * x;
        let (c, s) = (bx.cos(), bx.sin());
        let b = self.beta;
        match k {
            0 => e - c + self.s * s,
            1 => b * (f + s + self.s * c),
            2 => b * b * (e + c - self.s * s),
            3 => b * b * b * (f - s - self.s * c),
            4 => b.powi(4) * (e - c + self.s * s),
            _ => panic!("derivative order {k} not supported"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projections {
    pub betas: Vec<f64>,
    /// `∫φⱼφₖ`.
    pub mass: DMatrix<f64>,
    /// `∫φⱼφₖ''`.
    pub p2: DMatrix<f64>,
    /// `∫φⱼφₖ''''`.
    pub p4: DMatrix<f64>,
}

fn project(modes: &[BeamMode], panels: usize, order: usize) -> Projections {
    let n = modes.len();
    let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("quadrature order"));
    let h = 1.0 / panels as f64;
    let mut mass = DMatrix::zeros(n, n);
    let mut p2 = DMatrix::zeros(n, n);
    let mut p4 = DMatrix::zeros(n, n);
    let mut v0 = DVector::zeros(n);
    let mut v2 = DVector::zeros(n);
    let mut v4 = DVector::zeros(n);
    for panel in 0..panels {
        let a = panel as f64 * h;
        for &(node, weight) in rule.as_node_weight_pairs() {
            let x = a + 0.5 * h * (node + 1.0);
            let w = 0.5 * h * weight;
            for (j, m) in modes.iter().enumerate() {
                v0[j] = m.derivative(x, 0);
                v2[j] = m.derivative(x, 2);
                v4[j] = m.derivative(x, 4);
            }
            mass.ger(w, &v0, &v0, 1.0);
            p2.ger(w, &v0, &v2, 1.0);
            p4.ger(w, &v0, &v4, 1.0);
        }
    }
    Projections { betas: modes.iter().map(|m| m.beta).collect(), mass, p2, p4 }
}

/// Projected operators for `n_modes` beam functions. The composite rule is
/// checked against one with twice as many panels.
pub fn projections(n_modes: usize) -> Result<Projections> {
    if !(MIN_MODES..=MAX_MODES).contains(&n_modes) {
        return Err(Error::InvalidInput(format!("n_modes must lie in [{MIN_MODES}, {MAX_MODES}]")));
    }
    let modes: Vec<BeamMode> = beam_roots(n_modes).into_iter().map(BeamMode::new).collect();
    let panels = 2 * n_modes;
    let coarse = project(&modes, panels, 16);
    let fine = project(&modes, 2 * panels, 16);
    let mut deviation: f64 = 0.0;
    for (c, f) in [(&coarse.mass, &fine.mass), (&coarse.p2, &fine.p2), (&coarse.p4, &fine.p4)] {
        deviation = deviation.max((c - f).amax() / f.amax());
    }
    if deviation > QUADRATURE_TOL {
        return Err(Error::Quadrature { deviation });
    }
    Ok(fine)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinSystem {
    pub params: BeckParams,
    pub mass: DMatrix<f64>,
    pub damping: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
}

impl GalerkinSystem {
    pub fn from_projections(proj: &Projections, params: BeckParams) -> Result<Self> {
        params.validate()?;
        if proj.betas.len() != params.n_modes {
            return Err(Error::InvalidInput("projection size does not match n_modes".into()));
        }
        Ok(Self {
            params,
            mass: proj.mass.clone(),
            damping: &proj.p4 * params.d1 + &proj.mass * params.d2,
            stiffness: &proj.p4 + &proj.p2 * params.q,
        })
    }

    /// First-order matrix `[[0, I], [−M⁻¹K, −M⁻¹D]]`.
    pub fn first_order(&self) -> Result<DMatrix<f64>> {
        let n = self.params.n_modes;
        let chol =
            self.mass.clone().cholesky().ok_or_else(|| Error::Domain("mass matrix is not positive definite".into()))?;
        let mut c = DMatrix::zeros(2 * n, 2 * n);
        c.view_mut((0, n), (n, n)).copy_from(&DMatrix::identity(n, n));
        c.view_mut((n, 0), (n, n)).copy_from(&(-chol.solve(&self.stiffness)));
        c.view_mut((n, n), (n, n)).copy_from(&(-chol.solve(&self.damping)));
        Ok(c)
    }

    pub fn spectrum(&self) -> Result<Vec<num_complex::Complex64>> {
        Ok(eigenvalues(&self.first_order()?))
    }

    /// Eigenvalues `ω²` of `M⁻¹K`; the undamped spectrum is `±i√(ω²)`.
    pub fn squared_frequencies(&self) -> Result<Vec<num_complex::Complex64>> {
        let chol =
            self.mass.clone().cholesky().ok_or_else(|| Error::Domain("mass matrix is not positive definite".into()))?;
        Ok(eigenvalues(&chol.solve(&self.stiffness)))
    }
}

pub fn assemble(params: BeckParams) -> Result<GalerkinSystem> {
    params.validate()?;
    GalerkinSystem::from_projections(&projections(params.n_modes)?, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlutterPoint {
    pub q_cr: f64,
    pub omega_cr: f64,
}

fn undamped_flutter(proj: &Projections, n_modes: usize, q: f64) -> Result<Option<f64>> {
    let sys = GalerkinSystem::from_projections(proj, BeckParams { q, d1: 0.0, d2: 0.0, n_modes })?;
    let w2 = sys.squared_frequencies()?;
    Ok(w2.iter().filter(|z| z.im.abs() > 1e-9 * z.norm() || z.re < 0.0).map(|z| z.norm().sqrt()).reduce(f64::min))
}

fn max_real_part(proj: &Projections, params: BeckParams) -> Result<(f64, f64)> {
    let sys = GalerkinSystem::from_projections(proj, params)?;
    let spec = sys.spectrum()?;
    let top = spec
        .iter()
        .copied()
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .ok_or_else(|| Error::Domain("empty spectrum".into()))?;
    Ok((top.re, top.im.abs()))
}

/// Critical follower load and flutter frequency.
///
/// Without damping the load is where two squared frequencies of `M⁻¹K`
/// merge and leave the real axis; with damping it is the first load at
/// which the rightmost eigenvalue crosses the imaginary axis.
pub fn flutter_load(d1: f64, d2: f64, n_modes: usize) -> Result<FlutterPoint> {
    flutter_load_with(&projections(n_modes)?, d1, d2, DEFAULT_CEILING)
}

pub fn flutter_load_with(proj: &Projections, d1: f64, d2: f64, ceiling: f64) -> Result<FlutterPoint> {
    let n_modes = proj.betas.len();
    let base = BeckParams { q: 0.0, d1, d2, n_modes };
    base.validate()?;
    let undamped = d1 == 0.0 && d2 == 0.0;
    let unstable = |q: f64| -> Result<bool> {
        if undamped {
            Ok(undamped_flutter(proj, n_modes, q)?.is_some())
        } else {
            Ok(max_real_part(proj, BeckParams { q, ..base })?.0 > 0.0)
        }
    };
    if unstable(0.0)? {
        return Err(Error::Domain("unstable at zero load".into()));
    }
    let mut lo = 0.0;
    let hi = loop {
        let q = lo + SCAN_STEP;
        if q > ceiling {
            return Err(Error::NoFlutter { ceiling });
        }
        if unstable(q)? {
            break q;
        }
        lo = q;
    };
    let q_cr = bisect_boundary(|q| unstable(q).unwrap_or(true), lo, hi, BISECTION_TOL * 100.0)?;
    let omega_cr = if undamped {
        // Merged pair just past the boundary.
        let q_past = q_cr + 1e-9;
        undamped_flutter(proj, n_modes, q_past)?.ok_or(Error::NoFlutter { ceiling })?
    } else {
        max_real_part(proj, BeckParams { q: q_cr, ..base })?.1
    };
    Ok(FlutterPoint { q_cr, omega_cr })
}

/// Closed-form critical surface
/// `q₀ − 1902d₁²/(14.34d₁ + 0.091d₂)² + 12.68d₁d₂ + 0.053d₂²`.
pub fn closed_form_load(d1: f64, d2: f64) -> Result<f64> {
    let den = BE_B1 * d1 + BE_B2 * d2;
    if den == 0.0 {
        return Err(Error::Domain("14.34·d1 + 0.091·d2 vanishes".into()));
    }
    Ok(Q0 - BE_A * d1 * d1 / (den * den) + BE_C * d1 * d2 + BE_E * d2 * d2)
}

/// Limit of [`closed_form_load`] along `d₂ = c·d₁`, `d₁ → 0`.
pub fn closed_form_ray_limit(c: f64) -> Result<f64> {
    let den = BE_B1 + BE_B2 * c;
    if den == 0.0 {
        return Err(Error::Domain("ray direction makes the denominator vanish".into()));
    }
    Ok(Q0 - BE_A / (den * den))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormRow {
    pub d1: f64,
    pub d2: f64,
    pub q_cr_numeric: f64,
    pub q_cr_closed_form: f64,
    pub relative_discrepancy: f64,
}

/// Direct flutter loads against the closed-form surface on a grid.
pub fn closed_form_comparison(d1s: &[f64], d2s: &[f64], n_modes: usize, exec: Exec) -> Result<Vec<ClosedFormRow>> {
    let proj = projections(n_modes)?;
    let points: Vec<(f64, f64)> = d1s.iter().flat_map(|&a| d2s.iter().map(move |&b| (a, b))).collect();
    par_map(exec, &points, |&(d1, d2)| {
        let numeric = flutter_load_with(&proj, d1, d2, DEFAULT_CEILING)?.q_cr;
        let closed = closed_form_load(d1, d2)?;
        Ok(ClosedFormRow {
            d1,
            d2,
            q_cr_numeric: numeric,
            q_cr_closed_form: closed,
            relative_discrepancy: (numeric - closed).abs() / numeric,
        })
    })
    .into_iter()
    .collect()
}
