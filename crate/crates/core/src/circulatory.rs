//! Two-degree-of-freedom systems `ẍ + (δD + ΩG)ẋ + (K + νN)x = 0`.
//!
//! Covers the coefficient map onto [`QuarticCoeffs`], Bottema's limits of the
//! critical circulatory parameter, Ziegler's double pendulum and the Hultén
//! drum-brake model.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::quartic::{hurwitz_verdict, QuarticCoeffs, StabilityVerdict, DEFAULT_BAND};
use crate::sweep::{bisect_boundary, expand_bracket, BISECTION_TOL};

/// The canonical skew matrix `[[0, 1], [−1, 0]]` used for both N and G.
pub fn skew_unit() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

fn check_symmetric(m: &Matrix2<f64>, name: &str) -> Result<()> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
    }
    let scale = m.abs().max().max(1.0);
    if (m[(0, 1)] - m[(1, 0)]).abs() > 1e-12 * scale {
        return Err(Error::InvalidInput(format!("{name} must be symmetric")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemMatrices2 {
    pub k: Matrix2<f64>,
    pub nu: f64,
    pub d: Matrix2<f64>,
    pub delta: f64,
    pub omega: f64,
}

impl SystemMatrices2 {
    pub fn new(k: Matrix2<f64>, nu: f64, d: Matrix2<f64>, delta: f64, omega: f64) -> Result<Self> {
        check_symmetric(&k, "K")?;
        check_symmetric(&d, "D")?;
        ensure_finite(nu, "nu")?;
        ensure_finite(delta, "delta")?;
        ensure_finite(omega, "omega")?;
        Ok(Self { k, nu, d, delta, omega })
    }

    /// Splits `ẍ + Bẋ + Ax = 0` into symmetric and skew parts, with `δ = 1`.
    pub fn from_general(a: Matrix2<f64>, b: Matrix2<f64>) -> Result<Self> {
        let k = (a + a.transpose()) * 0.5;
        let d = (b + b.transpose()) * 0.5;
        Self::new(k, 0.5 * (a[(0, 1)] - a[(1, 0)]), d, 1.0, 0.5 * (b[(0, 1)] - b[(1, 0)]))
    }

    pub fn positional(&self) -> Matrix2<f64> {
        self.k + skew_unit() * self.nu
    }

    pub fn velocity(&self) -> Matrix2<f64> {
        self.d * self.delta + skew_unit() * self.omega
    }

    /// `[[0, I], [−(K + νN), −(δD + ΩG)]]`.
    pub fn first_order(&self) -> Matrix4<f64> {
        first_order_matrix(&self.positional(), &self.velocity())
    }
}

pub(crate) fn first_order_matrix(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix4<f64> {
    let mut c = Matrix4::zeros();
    c[(0, 2)] = 1.0;
    c[(1, 3)] = 1.0;
    for i in 0..2 {
        for j in 0..2 {
            c[(2 + i, j)] = -a[(i, j)];
            c[(2 + i, 2 + j)] = -b[(i, j)];
        }
    }
    c
}

/// Bottema's coefficients of `det(λ²I + λ(δD + ΩG) + K + νN)`.
pub fn quartic_from_system(s: &SystemMatrices2) -> QuarticCoeffs {
    let dd = s.d * s.delta;
    let tr_k = s.k.trace();
    let tr_d = dd.trace();
    QuarticCoeffs {
        a1: tr_d,
        a2: tr_k + dd.determinant() + s.omega * s.omega,
        a3: tr_k * tr_d - (s.k * dd).trace() + 2.0 * s.omega * s.nu,
        a4: s.k.determinant() + s.nu * s.nu,
    }
}

/// Monic quartic `det(Mλ² + Bλ + C)/det M` for arbitrary 2×2 matrices.
pub fn quartic_from_matrices(m: &Matrix2<f64>, b: &Matrix2<f64>, c: &Matrix2<f64>) -> Result<QuarticCoeffs> {
    // Entry (i, j) of the matrix polynomial as ascending coefficients.
    let entry = |i: usize, j: usize| [c[(i, j)], b[(i, j)], m[(i, j)]];
    let mul = |p: [f64; 3], q: [f64; 3]| {
        let mut r = [0.0; 5];
        for (i, pi) in p.iter().enumerate() {
            for (j, qj) in q.iter().enumerate() {
                r[i + j] += pi * qj;
            }
        }
        r
    };
    let diag = mul(entry(0, 0), entry(1, 1));
    let off = mul(entry(0, 1), entry(1, 0));
    let det: Vec<f64> = diag.iter().zip(off).map(|(x, y)| x - y).collect();
    QuarticCoeffs::from_descending([det[4], det[3], det[2], det[1], det[0]])
}

/// Characteristic polynomial `det(λI − A)` of a 4×4 matrix by the
/// Faddeev–LeVerrier recursion, as a monic quartic.
pub fn characteristic_quartic(a: &Matrix4<f64>) -> QuarticCoeffs {
    let mut coeffs = [0.0; 4];
    let mut mk = Matrix4::<f64>::zeros();
    let mut prev = 1.0;
    for k in 1..=4 {
        mk = a * mk + Matrix4::identity() * prev;
        prev = -(a * mk).trace() / k as f64;
        coeffs[k - 1] = prev;
    }
    QuarticCoeffs { a1: coeffs[0], a2: coeffs[1], a3: coeffs[2], a4: coeffs[3] }
}

/// Undamped stability limit `ν₀ = √((trK/2)² − detK)`.
pub fn nu_critical_undamped(k: &Matrix2<f64>) -> Result<f64> {
    check_symmetric(k, "K")?;
    let radicand = (0.5 * k.trace()).powi(2) - k.determinant();
    if radicand < 0.0 {
        // Can only happen through rounding for symmetric K.
        if radicand > -1e-14 * k.abs().max().powi(2) {
            return Ok(0.0);
        }
        return Err(Error::Domain(format!("(trK/2)² − detK = {radicand:e} < 0")));
    }
    Ok(radicand.sqrt())
}

/// `(2tr(KD) − trK·trD)/(2trD)`, the size of the jump in `ν_cr`.
pub fn damping_shape_offset(k: &Matrix2<f64>, d: &Matrix2<f64>) -> Result<f64> {
    check_symmetric(k, "K")?;
    check_symmetric(d, "D")?;
    let tr_d = d.trace();
    if !(tr_d > 0.0) {
        return Err(Error::Domain(format!("trD must be positive, got {tr_d}")));
    }
    Ok((2.0 * (k * d).trace() - k.trace() * tr_d) / (2.0 * tr_d))
}

/// Limit of the critical `ν` as the damping `δD` vanishes with fixed shape D.
pub fn nu_critical_damped_limit(k: &Matrix2<f64>, d: &Matrix2<f64>) -> Result<f64> {
    let nu0 = nu_critical_undamped(k)?;
    let offset = damping_shape_offset(k, d)?;
    let radicand = nu0 * nu0 - offset * offset;
    if radicand < 0.0 {
        return Err(Error::Domain(format!("stability window closed for this damping shape (radicand {radicand:e})")));
    }
    Ok(radicand.sqrt())
}

/// First-order approximation `ν₀ − offset²/(2ν₀)` of the damped limit.
pub fn nu_critical_damped_approx(k: &Matrix2<f64>, d: &Matrix2<f64>) -> Result<f64> {
    let nu0 = nu_critical_undamped(k)?;
    if nu0 == 0.0 {
        return Err(Error::Domain("nu0 = 0, expansion undefined".into()));
    }
    let offset = damping_shape_offset(k, d)?;
    Ok(nu0 - offset * offset / (2.0 * nu0))
}

/// Exact critical `ν` at finite damping `dd = δD` for diagonal K
/// (`k₁₂ = 0`), from the condition `H ≤ 0`.
pub fn nu_critical_diagonal_k(k11: f64, k22: f64, dd: &Matrix2<f64>) -> Result<f64> {
    check_symmetric(dd, "D")?;
    let (d11, d12, d22) = (dd[(0, 0)], dd[(0, 1)], dd[(1, 1)]);
    let t = d11 + d22;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("trD must be positive, got {t}")));
    }
    let dk = k11 - k22;
    let nu2 = dk * dk / 4.0
        - ((d11 - d22).powi(2) * dk * dk - 4.0 * (k11 * d22 + k22 * d11) * (d11 * d22 - d12 * d12) * t) / (4.0 * t * t);
    if nu2 < 0.0 {
        return Err(Error::Domain(format!("no stable circulatory range (ν² bound {nu2:e})")));
    }
    Ok(nu2.sqrt())
}

/// Bisected critical `ν ≥ 0` of `K`, `δD` with `Ω = 0`: the first value at
/// which the system becomes unstable.
pub fn nu_critical_bisected(k: &Matrix2<f64>, d: &Matrix2<f64>, delta: f64) -> Result<f64> {
    let unstable = |nu: f64| -> bool {
        let s = SystemMatrices2 { k: *k, nu, d: *d, delta, omega: 0.0 };
        hurwitz_verdict(&quartic_from_system(&s), DEFAULT_BAND).map(|v| v.is_unstable()).unwrap_or(true)
    };
    if unstable(0.0) {
        return Err(Error::Domain("system is unstable already at nu = 0".into()));
    }
    let scale = k.abs().max().max(1e-3);
    let hi = expand_bracket(unstable, 0.0, 0.125 * scale, 1e6 * scale)?;
    bisect_boundary(unstable, 0.0, hi, BISECTION_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZieglerParams {
    pub m: f64,
    pub l: f64,
    pub c: f64,
    pub b: f64,
    pub p: f64,
}

impl Default for ZieglerParams {
    fn default() -> Self {
        Self { m: 1.0, l: 1.0, c: 1.0, b: 0.0, p: 0.0 }
    }
}

impl ZieglerParams {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [(self.m, "m"), (self.l, "l"), (self.c, "c"), (self.b, "b"), (self.p, "P")] {
            ensure_finite(v, name)?;
        }
        if !(self.m > 0.0 && self.l > 0.0 && self.c > 0.0) {
            return Err(Error::InvalidInput("m, l and c must be positive".into()));
        }
        if self.b < 0.0 {
            return Err(Error::InvalidInput("b must be non-negative".into()));
        }
        Ok(())
    }

    /// Mass, damping and stiffness matrices for `m₁ = 2m`, `m₂ = m`, equal
    /// rod lengths and joint constants.
    pub fn matrices(&self) -> (Matrix2<f64>, Matrix2<f64>, Matrix2<f64>) {
        let (m, l, c, b, p) = (self.m, self.l, self.c, self.b, self.p);
        let ml2 = m * l * l;
        let mass = Matrix2::new(3.0 * ml2, ml2, ml2, ml2);
        let damping = Matrix2::new(2.0 * b, -b, -b, b);
        let stiffness = Matrix2::new(-p * l + 2.0 * c, p * l - c, -c, c);
        (mass, damping, stiffness)
    }
}

pub fn ziegler_quartic(p: &ZieglerParams) -> Result<QuarticCoeffs> {
    p.validate()?;
    let (m, b, c) = p.matrices();
    quartic_from_matrices(&m, &b, &c)
}

pub fn ziegler_verdict(p: &ZieglerParams) -> Result<StabilityVerdict> {
    hurwitz_verdict(&ziegler_quartic(p)?, DEFAULT_BAND)
}

/// `P_k = (7/2 − √2)c/l` for `b = 0` and `P_k(b) = (41/28)c/l + b²/(2ml³)` otherwise.
pub fn ziegler_critical_load(b: f64, p: &ZieglerParams) -> Result<f64> {
    ZieglerParams { b, ..*p }.validate()?;
    Ok(if b == 0.0 {
        (3.5 - std::f64::consts::SQRT_2) * p.c / p.l
    } else {
        41.0 / 28.0 * p.c / p.l + b * b / (2.0 * p.m * p.l.powi(3))
    })
}

/// Flutter load found by bisection on the verdict. For `b = 0` the
/// boundary is the loss of marginal stability, otherwise the loss of
/// asymptotic stability.
pub fn ziegler_critical_load_bisected(b: f64, p: &ZieglerParams) -> Result<f64> {
    let base = ZieglerParams { b, ..*p };
    base.validate()?;
    let lost = |load: f64| -> bool {
        match ziegler_verdict(&ZieglerParams { p: load, ..base }) {
            Ok(v) if b == 0.0 => v.is_unstable(),
            Ok(v) => !v.is_asymptotically_stable(),
            Err(_) => true,
        }
    };
    let unit = p.c / p.l;
    let hi = expand_bracket(lost, 0.0, 0.25 * unit, 1e3 * unit)?;
    bisect_boundary(lost, 0.0, hi, BISECTION_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HultenParams {
    pub omega1: f64,
    pub omega2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub mu: f64,
}

impl HultenParams {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.omega1, "omega1"),
            (self.omega2, "omega2"),
            (self.eta1, "eta1"),
            (self.eta2, "eta2"),
            (self.mu, "mu"),
        ] {
            ensure_finite(v, name)?;
        }
        if !(self.omega1 > 0.0 && self.omega2 > 0.0) {
            return Err(Error::InvalidInput("natural pulsations must be positive".into()));
        }
        if self.eta1 < 0.0 || self.eta2 < 0.0 || self.mu < 0.0 {
            return Err(Error::InvalidInput("damping and friction must be non-negative".into()));
        }
        Ok(())
    }

    pub fn matrices(&self) -> (Matrix2<f64>, Matrix2<f64>) {
        let (w1, w2) = (self.omega1 * self.omega1, self.omega2 * self.omega2);
        let damping = Matrix2::new(self.eta1 * self.omega1, 0.0, 0.0, self.eta2 * self.omega2);
        let stiffness = Matrix2::new(w1, -self.mu * w2, self.mu * w1, w2);
        (damping, stiffness)
    }
}

pub fn hulten_quartic(p: &HultenParams) -> Result<QuarticCoeffs> {
    p.validate()?;
    let (d, k) = p.matrices();
    quartic_from_matrices(&Matrix2::identity(), &d, &k)
}

/// Friction coefficient at which the undamped brake flutters:
/// `μ² = (ω₁² − ω₂²)²/(4ω₁²ω₂²)`.
pub fn hulten_mu_undamped(omega1: f64, omega2: f64) -> f64 {
    let (w1, w2) = (omega1 * omega1, omega2 * omega2);
    (w1 - w2).abs() / (2.0 * omega1 * omega2)
}

/// Bisected critical friction coefficient. Undamped parameters use the
/// loss of marginal stability.
pub fn hulten_critical_mu(p: &HultenParams) -> Result<f64> {
    p.validate()?;
    let undamped = p.eta1 == 0.0 && p.eta2 == 0.0;
    let lost = |mu: f64| -> bool {
        match hulten_quartic(&HultenParams { mu, ..*p }).and_then(|q| hurwitz_verdict(&q, DEFAULT_BAND)) {
            Ok(v) if undamped => v.is_unstable(),
            Ok(v) => !v.is_asymptotically_stable(),
            Err(_) => true,
        }
    };
    if lost(0.0) {
        return Err(Error::Domain("brake is not stable at mu = 0".into()));
    }
    let hi = expand_bracket(lost, 0.0, 0.01, 1e4)?;
    bisect_boundary(lost, 0.0, hi, BISECTION_TOL)
}
