//! Two-layer quasi-geostrophic channel flow with Ekman friction `−r∇²φ`.
//!
//! For waves `φⱼ = Φⱼ e^{iα(x − ct)} sin(mπy)` with `a² = α² + m²π²` the
//! layer equations reduce to `A c² + B c + C = 0` with
//!
//! ```text
//! A = a²(a² + 2F)
//! B = −A(U₁ + U₂) + 2(a² + F)b
//! C = A U₁U₂ − (a² + F)b(U₁ + U₂) + F a²(U₁ − U₂)² + b²
//! b = β + i r a²/α
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::{bisect_boundary, par_map, Exec};

pub const GROWTH_TOL: f64 = 1e-12;
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaroclinicParams {
    pub f: f64,
    pub beta: f64,
    pub r: f64,
    pub alpha: f64,
    pub m: u32,
    pub u1: f64,
    pub u2: f64,
}

impl BaroclinicParams {
    /// Layer velocities `±U/2`.
    pub fn with_shear(f: f64, beta: f64, r: f64, alpha: f64, m: u32, shear: f64) -> Self {
        Self { f, beta, r, alpha, m, u1: 0.5 * shear, u2: -0.5 * shear }
    }

    pub fn shear(&self) -> f64 {
        self.u1 - self.u2
    }

    pub fn set_shear(&self, shear: f64) -> Self {
        let mean = 0.5 * (self.u1 + self.u2);
        Self { u1: mean + 0.5 * shear, u2: mean - 0.5 * shear, ..*self }
    }

    pub fn a2(&self) -> f64 {
        self.alpha * self.alpha + (self.m as f64 * std::f64::consts::PI).powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.f, self.beta, self.r, self.alpha, self.u1, self.u2].iter().all(|x| x.is_finite());
        if !finite || !(self.f > 0.0) || self.beta < 0.0 || self.r < 0.0 || !(self.alpha > 0.0) || self.m == 0 {
            return Err(Error::InvalidInput(format!("need F > 0, β ≥ 0, r ≥ 0, α > 0, m ≥ 1 (got {self:?})")));
        }
        Ok(())
    }

    /// Coefficients `(A, B, C)` of the phase-speed quadratic.
    pub fn quadratic(&self) -> (Complex64, Complex64, Complex64) {
        let a2 = self.a2();
        let s = a2 + self.f;
        let a = a2 * (a2 + 2.0 * self.f);
        let b = Complex64::new(self.beta, self.r * a2 / self.alpha);
        let (u1, u2) = (self.u1, self.u2);
        let sum = u1 + u2;
        let lin = -a * sum + b * (2.0 * s);
        let con = Complex64::new(a * u1 * u2 + self.f * a2 * (u1 - u2).powi(2), 0.0) - b * (s * sum) + b * b;
        (Complex64::new(a, 0.0), lin, con)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRoots {
    pub c1: Complex64,
    pub c2: Complex64,
    /// `α·Im(c)` for each root.
    pub growth_rates: [f64; 2],
    pub residual: f64,
}

impl DispersionRoots {
    pub fn max_growth(&self) -> f64 {
        self.growth_rates[0].max(self.growth_rates[1])
    }

    pub fn is_unstable(&self) -> bool {
        self.c1.im.max(self.c2.im) > GROWTH_TOL
    }
}

/// Phase speeds of the two modes, ordered by real part.
pub fn dispersion(p: &BaroclinicParams) -> Result<DispersionRoots> {
    p.validate()?;
    let (a, b, c) = p.quadratic();
    if a.norm() == 0.0 {
        return Err(Error::DegenerateQuadratic);
    }
    let disc = (b * b - a * c * 4.0).sqrt();
    // Avoid cancellation: pick the sign that adds magnitudes.
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) * 0.5 } else { -(b - disc) * 0.5 };
    let (mut c1, mut c2) = if q.norm() == 0.0 {
        let root = -b / (a * 2.0);
        (root, root)
    } else {
        (q / a, c / q)
    };
    if (c1.re, c1.im) > (c2.re, c2.im) {
        std::mem::swap(&mut c1, &mut c2);
    }
    let scale = a.norm() * c1.norm().max(c2.norm()).powi(2) + b.norm() * c1.norm().max(c2.norm()) + c.norm();
    let residual =
        [c1, c2].iter().map(|&z| (a * z * z + b * z + c).norm() / scale.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    Ok(DispersionRoots { c1, c2, growth_rates: [p.alpha * c1.im, p.alpha * c2.im], residual })
}

/// Inviscid threshold `U_cI = 2βF/(a²√(4F² − a⁴))`.
pub fn inviscid_threshold(p: &BaroclinicParams) -> Result<f64> {
    let a2 = p.a2();
    let radicand = 4.0 * p.f * p.f - a2 * a2;
    if !(radicand > 0.0) {
        return Err(Error::Domain(format!("4F² − a⁴ = {radicand} is not positive")));
    }
    Ok(2.0 * p.beta * p.f / (a2 * radicand.sqrt()))
}

/// Vanishing-friction threshold `U_cR = 2βF/(a(a² + F)√(2F − a²))`.
pub fn vanishing_viscosity_threshold(p: &BaroclinicParams) -> Result<f64> {
    let a2 = p.a2();
    let radicand = 2.0 * p.f - a2;
    if !(radicand > 0.0) {
        return Err(Error::Domain(format!("2F − a² = {radicand} is not positive")));
    }
    Ok(2.0 * p.beta * p.f / (a2.sqrt() * (a2 + p.f) * radicand.sqrt()))
}

/// Smallest shear in `[lo, hi]` at which a mode grows, by bisection.
pub fn critical_shear(p: &BaroclinicParams, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let unstable = |u: f64| dispersion(&p.set_shear(u)).map(|d| d.is_unstable()).unwrap_or(false);
    bisect_boundary(unstable, lo, hi, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortraitRow {
    pub shear: f64,
    pub roots: DispersionRoots,
}

/// Both phase speeds along a sweep of the shear at fixed friction `r`.
pub fn merging_portrait(p: &BaroclinicParams, shears: &[f64], r: f64, exec: Exec) -> Result<Vec<PortraitRow>> {
    let base = BaroclinicParams { r, ..*p };
    par_map(exec, shears, |&u| dispersion(&base.set_shear(u)).map(|roots| PortraitRow { shear: u, roots }))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub alpha: f64,
    pub u_ci: Option<f64>,
    pub u_cr: Option<f64>,
}

/// Both thresholds as functions of the zonal wavenumber.
pub fn threshold_curves(p: &BaroclinicParams, alphas: &[f64], exec: Exec) -> Vec<ThresholdRow> {
    par_map(exec, alphas, |&alpha| {
        let q = BaroclinicParams { alpha, ..*p };
        ThresholdRow { alpha, u_ci: inviscid_threshold(&q).ok(), u_cr: vanishing_viscosity_threshold(&q).ok() }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(r: f64, shear: f64) -> BaroclinicParams {
        BaroclinicParams::with_shear(10.0, 1.0, r, 1.0, 1, shear)
    }

    #[test]
    fn thresholds_reference_values() {
        let p = reference(0.0, 0.0);
        assert!((p.a2() - 10.869_604_401_089_358).abs() < 1e-12);
        let uci = inviscid_threshold(&p).unwrap();
        let ucr = vanishing_viscosity_threshold(&p).unwrap();
        assert!((uci - 0.1096).abs() < 1e-4, "{uci}");
        assert!((ucr - 0.0962).abs() < 1e-4, "{ucr}");
        assert!(ucr < uci);
        let flat = BaroclinicParams { beta: 0.0, ..p };
        assert_eq!(inviscid_threshold(&flat).unwrap(), 0.0);
        assert_eq!(vanishing_viscosity_threshold(&flat).unwrap(), 0.0);
    }

    #[test]
    fn short_wave_cutoff() {
        let a2 = 1.0 + std::f64::consts::PI.powi(2);
        let p = BaroclinicParams { f: 0.5 * a2, ..reference(0.0, 0.0) };
        assert!(inviscid_threshold(&p).is_err());
        assert!(vanishing_viscosity_threshold(&p).is_err());
        assert!(inviscid_threshold(&BaroclinicParams { f: 1.0, ..p }).is_err());
    }

    #[test]
    fn roots_satisfy_the_quadratic() {
        for (r, u) in [(0.0, 0.0), (0.0, 0.05), (0.0, 0.3), (1e-3, 0.1), (0.5, 2.0)] {
            let d = dispersion(&reference(r, u)).unwrap();
            assert!(d.residual < RESIDUAL_TOL, "{r} {u}: {}", d.residual);
        }
    }

    #[test]
    fn limiting_cases() {
        let neutral = dispersion(&reference(0.0, 0.0)).unwrap();
        assert_eq!(neutral.c1.im, 0.0);
        assert_eq!(neutral.c2.im, 0.0);
        let damped = dispersion(&reference(0.1, 0.0)).unwrap();
        assert!(damped.growth_rates.iter().all(|&g| g < 0.0));
        let uci = inviscid_threshold(&reference(0.0, 0.0)).unwrap();
        let above = dispersion(&reference(0.0, uci * 1.01)).unwrap();
        assert!(above.is_unstable());
        assert!((above.c1.im + above.c2.im).abs() < 1e-14);
        assert!(!dispersion(&reference(0.0, uci * 0.99)).unwrap().is_unstable());
    }

    #[test]
    fn mean_flow_only_shifts_phase_speed() {
        let p = reference(0.01, 0.2);
        let shifted = BaroclinicParams { u1: p.u1 + 0.3, u2: p.u2 + 0.3, ..p };
        let (a, b) = (dispersion(&p).unwrap(), dispersion(&shifted).unwrap());
        assert!((b.c1 - a.c1 - 0.3).norm() < 1e-12);
        assert!((b.c2 - a.c2 - 0.3).norm() < 1e-12);
    }

    #[test]
    fn bisected_onsets() {
        let p = reference(0.0, 0.0);
        let uci = inviscid_threshold(&p).unwrap();
        let inviscid = critical_shear(&p, 0.01, 0.5, 1e-14).unwrap();
        assert!((inviscid - uci).abs() / uci < 1e-6);
        let ucr = vanishing_viscosity_threshold(&p).unwrap();
        let viscous = critical_shear(&reference(1e-6, 0.0), 0.01, 0.5, 1e-14).unwrap();
        assert!((viscous - ucr).abs() / ucr < 1e-3, "{viscous} {ucr}");
    }

    #[test]
    fn roots_are_continuous_in_r_away_from_collision() {
        let p = reference(0.0, 0.0);
        let uci = inviscid_threshold(&p).unwrap();
        let shears: Vec<f64> = (0..=60).map(|i| 0.005 * i as f64).collect();
        let clean = merging_portrait(&p, &shears, 0.0, Exec::Sequential).unwrap();
        let dirty = merging_portrait(&p, &shears, 1e-6, Exec::default()).unwrap();
        for (a, b) in clean.iter().zip(&dirty) {
            let (x, y) = (a.roots, b.roots);
            let d =
                ((x.c1 - y.c1).norm().max((x.c2 - y.c2).norm())).min((x.c1 - y.c2).norm().max((x.c2 - y.c1).norm()));
            if (a.shear - uci).abs() > 0.02 {
                assert!(d < 1e-3, "U = {}: {d}", a.shear);
            }
        }
    }

    #[test]
    fn imperfect_merging() {
        let p = reference(0.0, 0.0);
        let uci = inviscid_threshold(&p).unwrap();
        let ucr = vanishing_viscosity_threshold(&p).unwrap();
        let u = 0.5 * (uci + ucr);
        assert!(!dispersion(&p.set_shear(u)).unwrap().is_unstable());
        assert!(dispersion(&BaroclinicParams { r: 1e-4, ..p.set_shear(u) }).unwrap().is_unstable());
        let low = dispersion(&BaroclinicParams { r: 1e-2, ..p.set_shear(0.01) }).unwrap();
        assert!(low.growth_rates.iter().all(|&g| g < 0.0));
    }

    #[test]
    fn ordering_on_grid() {
        let p = reference(0.0, 0.0);
        let alphas: Vec<f64> = (1..=20).map(|i| 0.2 * i as f64).collect();
        for f in [5.0, 10.0, 40.0] {
            for row in threshold_curves(&BaroclinicParams { f, ..p }, &alphas, Exec::default()) {
                if let (Some(i), Some(r)) = (row.u_ci, row.u_cr) {
                    assert!(r < i);
                }
            }
        }
    }
}
