//! Parametric sum resonance of a rotating disk on an axially excited
//! elastic support:
//!
//! ```text
//! ẍ + 2αẏ + (1 + 4εη²cos 2ηt)x + μẋ = 0
//! ÿ − 2αẋ + (1 + 4εη²cos 2ηt)y + μẏ = 0
//! ```
//!
//! Stability is decided from the Floquet multipliers of the monodromy
//! matrix over one period `π/η`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::sweep::{bisect_boundary, par_map, Exec};

pub const DEFAULT_STEPS: usize = 1024;
pub const MULTIPLIER_TOL: f64 = 1e-9;
pub const HALVING_TOL: f64 = 1e-6;
pub const LIOUVILLE_TOL: f64 = 1e-8;
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorParams {
    pub alpha: f64,
    pub eps: f64,
    pub eta: f64,
    pub mu: f64,
}

impl RotorParams {
    pub fn new(alpha: f64, eps: f64, eta: f64, mu: f64) -> Result<Self> {
        let p = Self { alpha, eps, eta, mu };
        p.validate()?;
        Ok(p)
    }

    /// Damping given through `κ` with `μ = 2εκ`.
    pub fn with_kappa(alpha: f64, eps: f64, eta: f64, kappa: f64) -> Result<Self> {
        Self::new(alpha, eps, eta, 2.0 * eps * kappa)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha >= 0.0 && self.eps >= 0.0 && self.eta > 0.0 && self.mu >= 0.0;
        if !ok || ![self.alpha, self.eps, self.eta, self.mu].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput(format!("need α ≥ 0, ε ≥ 0, η > 0, μ ≥ 0 (got {self:?})")));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::PI / self.eta
    }

    /// Resonance centre `η₀ = √(1 + α²)`.
    pub fn eta0(&self) -> f64 {
        (1.0 + self.alpha * self.alpha).sqrt()
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        Self { eta, ..*self }
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..*self }
    }

    fn rhs(&self, t: f64, y: &Matrix4<f64>) -> Matrix4<f64> {
        let p = 1.0 + 4.0 * self.eps * self.eta * self.eta * (2.0 * self.eta * t).cos();
        let (a, mu) = (self.alpha, self.mu);
        #[rustfmt::skip]
        let a_t = Matrix4::new(
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            -p, 0.0, -mu, -2.0 * a,
            0.0, -p, 2.0 * a, -mu,
        );
        a_t * y
    }
}

/// Classical fourth-order Runge–Kutta over one period from the identity.
pub fn integrate_monodromy(p: &RotorParams, steps: usize) -> Matrix4<f64> {
    let h = p.period() / steps as f64;
    let mut y = Matrix4::identity();
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = p.rhs(t, &y);
        let k2 = p.rhs(t + 0.5 * h, &(y + k1 * (0.5 * h)));
        let k3 = p.rhs(t + 0.5 * h, &(y + k2 * (0.5 * h)));
        let k4 = p.rhs(t + h, &(y + k3 * h));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    y
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetResult {
    pub multipliers: Vec<Complex64>,
    pub max_modulus: f64,
    pub stable: bool,
    pub determinant: f64,
    /// Relative deviation of `det M` from `exp(−2μT)`.
    pub liouville_error: f64,
    /// Largest entrywise change of `M` under step halving, relative to `max|M|`.
    pub halving_change: f64,
}

/// Monodromy matrix and multipliers with the step-halving and Liouville checks.
pub fn monodromy(p: &RotorParams, steps: usize) -> Result<FloquetResult> {
    p.validate()?;
    if steps < 256 {
        return Err(Error::InvalidInput(format!("steps must be at least 256, got {steps}")));
    }
    let m = integrate_monodromy(p, steps);
    let fine = integrate_monodromy(p, 2 * steps);
    let scale = m.amax().max(1.0);
    let halving_change = (m - fine).amax() / scale;
    if halving_change > HALVING_TOL {
        return Err(Error::Integration { deviation: halving_change });
    }
    let determinant = m.determinant();
    let expected = (-2.0 * p.mu * p.period()).exp();
    let liouville_error = (determinant - expected).abs() / expected;
    let dyn_m = nalgebra::DMatrix::from_column_slice(4, 4, m.as_slice());
    let multipliers = eigenvalues(&dyn_m);
    let max_modulus = multipliers.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(FloquetResult {
        multipliers,
        max_modulus,
        stable: max_modulus <= 1.0 + MULTIPLIER_TOL,
        determinant,
        liouville_error,
        halving_change,
    })
}

pub fn is_unstable(p: &RotorParams) -> Result<bool> {
    Ok(!monodromy(p, DEFAULT_STEPS)?.stable)
}

/// Monodromy of `v'' + ((1 + α²)/η² + 4ε cos 2τ)v = 0` over `τ ∈ [0, π]`.
pub fn mathieu_monodromy(p: &RotorParams, steps: usize) -> Matrix2<f64> {
    let a = (1.0 + p.alpha * p.alpha) / (p.eta * p.eta);
    let f = |tau: f64, y: &Matrix2<f64>| Matrix2::new(0.0, 1.0, -(a + 4.0 * p.eps * (2.0 * tau).cos()), 0.0) * y;
    let h = std::f64::consts::PI / steps as f64;
    let mut y = Matrix2::identity();
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &(y + k1 * (0.5 * h)));
        let k3 = f(t + 0.5 * h, &(y + k2 * (0.5 * h)));
        let k4 = f(t + h, &(y + k3 * h));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    y
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub points: usize,
    pub disagreements: usize,
    pub in_band: usize,
    /// Largest `| |λ|max − max(1, |tr/2| + √(tr²/4 − 1)) |` over the grid.
    pub max_modulus_deviation: f64,
}

/// Compares the four-dimensional verdict with the scalar Mathieu verdict
/// over `etas` for an undamped rotor. Points with either indicator within
/// `band` of the threshold are counted separately.
pub fn mathieu_reduction_check(p: &RotorParams, etas: &[f64], band: f64, exec: Exec) -> Result<ReductionReport> {
    if p.mu != 0.0 {
        return Err(Error::InvalidInput("the scalar reduction needs μ = 0".into()));
    }
    let rows = par_map(exec, etas, |&eta| -> Result<(bool, bool, f64)> {
        let q = p.with_eta(eta);
        let full = monodromy(&q, DEFAULT_STEPS)?;
        let half_trace = 0.5 * mathieu_monodromy(&q, DEFAULT_STEPS).trace();
        let scalar_modulus =
            if half_trace.abs() > 1.0 { half_trace.abs() + (half_trace * half_trace - 1.0).sqrt() } else { 1.0 };
        let disagree = full.stable != (half_trace.abs() <= 1.0 + MULTIPLIER_TOL);
        let near = (full.max_modulus - 1.0).abs() <= band || (half_trace.abs() - 1.0).abs() <= band;
        Ok((disagree, near, (full.max_modulus - scalar_modulus).abs()))
    });
    let mut report = ReductionReport { points: etas.len(), disagreements: 0, in_band: 0, max_modulus_deviation: 0.0 };
    for row in rows {
        let (disagree, near, dev) = row?;
        if near {
            report.in_band += 1;
        } else if disagree {
            report.disagreements += 1;
        }
        report.max_modulus_deviation = report.max_modulus_deviation.max(dev);
    }
    Ok(report)
}

/// First-order boundaries `η₀(1 ± ε)` of the undamped tongue.
pub fn analytic_bound(alpha: f64, eps: f64) -> (f64, f64) {
    let eta0 = (1.0 + alpha * alpha).sqrt();
    (eta0 * (1.0 - eps), eta0 * (1.0 + eps))
}

/// Boundaries `η₀(1 ± √((1 + α²)ε² − (μ/(2η₀))²))` of the damped tongue.
pub fn analytic_bound_damped(alpha: f64, eps: f64, mu: f64) -> Result<(f64, f64)> {
    let eta0 = (1.0 + alpha * alpha).sqrt();
    let radicand = (1.0 + alpha * alpha) * eps * eps - (mu / (2.0 * eta0)).powi(2);
    if radicand < 0.0 {
        return Err(Error::NoBoundary { radicand });
    }
    let w = radicand.sqrt();
    Ok((eta0 * (1.0 - w), eta0 * (1.0 + w)))
}

/// Same boundaries written with `κ = μ/(2ε)`:
/// `η₀(1 ± ε√(1 + α² − κ²/η₀²))`.
pub fn analytic_bound_kappa(alpha: f64, eps: f64, kappa: f64) -> Result<(f64, f64)> {
    let eta0 = (1.0 + alpha * alpha).sqrt();
    let radicand = 1.0 + alpha * alpha - kappa * kappa / (eta0 * eta0);
    if radicand < 0.0 {
        return Err(Error::NoBoundary { radicand });
    }
    let w = eps * radicand.sqrt();
    Ok((eta0 * (1.0 - w), eta0 * (1.0 + w)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Lower => -1.0,
            Side::Upper => 1.0,
        }
    }
}

/// Bisected edge of the first sum-resonance tongue on `side`.
///
/// The search starts at `η₀`, where the tongue is unstable unless it has
/// lifted off, and steps outward by `εη₀/4` until the rotor is stable.
pub fn tongue_boundary(p: &RotorParams, side: Side) -> Result<f64> {
    tongue_boundary_with_tol(p, side, BOUNDARY_TOL)
}

pub fn tongue_boundary_with_tol(p: &RotorParams, side: Side, tol: f64) -> Result<f64> {
    p.validate()?;
    if !(p.eps > 0.0) {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    let eta0 = p.eta0();
    let unstable = |eta: f64| is_unstable(&p.with_eta(eta));
    if !unstable(eta0)? {
        let radicand = (1.0 + p.alpha * p.alpha) * p.eps * p.eps - (p.mu / (2.0 * eta0)).powi(2);
        return Err(Error::NoBoundary { radicand });
    }
    let step = 0.25 * p.eps * eta0 * side.sign();
    let mut inner = eta0;
    let mut outer = eta0 + step;
    let mut guard = 0;
    while unstable(outer)? {
        inner = outer;
        outer += step;
        guard += 1;
        if guard > 40 || outer <= 0.0 {
            return Err(Error::NoBracket { lo: eta0, hi: outer });
        }
    }
    let predicate = |eta: f64| unstable(eta).unwrap_or(true);
    bisect_boundary(predicate, inner, outer, tol)
}

/// Apparent order of the integrator from monodromies at `n`, `2n`, `4n` steps.
pub fn convergence_order(p: &RotorParams, steps: usize) -> f64 {
    let m1 = integrate_monodromy(p, steps);
    let m2 = integrate_monodromy(p, 2 * steps);
    let m4 = integrate_monodromy(p, 4 * steps);
    ((m1 - m2).amax() / (m2 - m4).amax()).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TongueRow {
    pub eta: f64,
    pub max_modulus: f64,
    pub stable: bool,
}

/// Maximal multiplier modulus along a grid of `η` values.
pub fn tongue_scan(p: &RotorParams, etas: &[f64], exec: Exec) -> Result<Vec<TongueRow>> {
    par_map(exec, etas, |&eta| {
        monodromy(&p.with_eta(eta), DEFAULT_STEPS).map(|r| TongueRow {
            eta,
            max_modulus: r.max_modulus,
            stable: r.stable,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotor(eta: f64, mu: f64) -> RotorParams {
        RotorParams::new(1.0, 0.05, eta, mu).unwrap()
    }

    #[test]
    fn unexcited_rotor_is_on_the_unit_circle() {
        for (alpha, eta) in [(0.0, 1.0), (1.0, 1.3), (2.5, 0.7)] {
            let r = monodromy(&RotorParams::new(alpha, 0.0, eta, 0.0).unwrap(), DEFAULT_STEPS).unwrap();
            for z in &r.multipliers {
                assert!((z.norm() - 1.0).abs() < 1e-9, "{z}");
            }
            assert!(r.stable);
        }
    }

    #[test]
    fn tongue_centre_and_outside() {
        assert!(!monodromy(&rotor(2f64.sqrt(), 0.0), DEFAULT_STEPS).unwrap().stable);
        assert!(monodromy(&rotor(1.6, 0.0), DEFAULT_STEPS).unwrap().stable);
    }

    #[test]
    fn liouville_identity() {
        for mu in [0.0, 1e-3, 0.3] {
            for eta in [1.2, 2f64.sqrt(), 1.7] {
                let r = monodromy(&rotor(eta, mu), DEFAULT_STEPS).unwrap();
                assert!(r.liouville_error < LIOUVILLE_TOL, "{mu} {eta}: {}", r.liouville_error);
            }
        }
        let undamped = monodromy(&rotor(1.5, 0.0), DEFAULT_STEPS).unwrap();
        assert!((undamped.determinant - 1.0).abs() < 1e-10);
    }

    #[test]
    fn integrator_is_fourth_order() {
        let order = convergence_order(&rotor(1.6, 0.01), 64);
        assert!(order > 3.8, "{order}");
    }

    #[test]
    fn rejects_coarse_steps_and_bad_parameters() {
        assert!(monodromy(&rotor(1.5, 0.0), 128).is_err());
        assert!(RotorParams::new(1.0, 0.05, 0.0, 0.0).is_err());
        assert!(RotorParams::new(1.0, 0.05, 1.0, -1.0).is_err());
    }

    #[test]
    fn step_halving_flags_unresolved_integration() {
        let p = RotorParams::new(1.0, 2.0, 0.05, 0.0).unwrap();
        assert!(matches!(monodromy(&p, 256), Err(Error::Integration { .. })));
    }

    #[test]
    fn mathieu_reduction_agrees() {
        let p = rotor(1.0, 0.0);
        let etas: Vec<f64> = (0..200).map(|i| 1.0 + 0.005 * i as f64).collect();
        let report = mathieu_reduction_check(&p, &etas, 1e-7, Exec::default()).unwrap();
        assert_eq!(report.disagreements, 0);
        assert!(report.max_modulus_deviation < 1e-6, "{report:?}");
        let flat = RotorParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
        let report = mathieu_reduction_check(&flat, &etas, 1e-7, Exec::Sequential).unwrap();
        assert_eq!(report.disagreements, 0);
        assert!(tongue_scan(&flat, &etas, Exec::default()).unwrap().iter().all(|r| r.stable));
    }

    #[test]
    fn classical_mathieu_tongue_without_rotation() {
        let p = RotorParams::new(0.0, 0.05, 1.0, 0.0).unwrap();
        assert!(is_unstable(&p).unwrap());
        assert!(!is_unstable(&p.with_eta(1.2)).unwrap());
        let (lo, hi) = (tongue_boundary(&p, Side::Lower).unwrap(), tongue_boundary(&p, Side::Upper).unwrap());
        assert!((lo - 0.95).abs() < 6e-3 && (hi - 1.05).abs() < 6e-3, "{lo} {hi}");
    }

    #[test]
    fn boundaries_bracket_the_analytic_tongue() {
        let p = rotor(1.0, 0.0);
        let lo = tongue_boundary(&p, Side::Lower).unwrap();
        let hi = tongue_boundary(&p, Side::Upper).unwrap();
        let (alo, ahi) = analytic_bound(1.0, 0.05);
        assert!((lo - alo).abs() < 4.0 * 0.05f64.powi(2));
        assert!((hi - ahi).abs() < 4.0 * 0.05f64.powi(2));
        // Symmetric about η₀ to second order.
        let eta0 = 2f64.sqrt();
        assert!(((hi - eta0) - (eta0 - lo)).abs() < 6.0 * 0.05f64.powi(2));
        assert!(is_unstable(&p.with_eta(lo + 1e-6)).unwrap());
        assert!(!is_unstable(&p.with_eta(lo - 1e-6)).unwrap());
    }

    #[test]
    fn damping_widens_and_then_lifts_the_tongue() {
        let undamped = rotor(1.0, 0.0);
        let damped = rotor(1.0, 1e-4);
        let w0 = tongue_boundary(&undamped, Side::Upper).unwrap() - tongue_boundary(&undamped, Side::Lower).unwrap();
        let w1 = tongue_boundary(&damped, Side::Upper).unwrap() - tongue_boundary(&damped, Side::Lower).unwrap();
        assert!(w1 > 1.2 * w0, "{w0} {w1}");
        let heavy = rotor(1.0, 0.4);
        assert!(matches!(tongue_boundary(&heavy, Side::Lower), Err(Error::NoBoundary { .. })));
        assert!(matches!(analytic_bound_damped(1.0, 0.05, 0.4), Err(Error::NoBoundary { .. })));
    }

    #[test]
    fn kappa_and_mu_forms_agree() {
        for kappa in [0.0, 0.1, 0.7, 1.3] {
            let a = analytic_bound_damped(1.0, 0.05, 2.0 * 0.05 * kappa).unwrap();
            let b = analytic_bound_kappa(1.0, 0.05, kappa).unwrap();
            assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
        }
        let (lo, hi) = analytic_bound_damped(1.0, 0.05, 0.0).unwrap();
        let (blo, bhi) = analytic_bound(1.0, 0.05);
        assert!((lo - 2f64.sqrt() * (1.0 - 0.05 * 2f64.sqrt())).abs() < 1e-14);
        assert!(lo < blo && hi > bhi);
    }
}
