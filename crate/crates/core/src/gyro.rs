//! Gyroscopic systems `ẍ + (δD + ΩG)ẋ + (K + νN)x = 0` near a Krein
//! collision of the conservative part `ẍ + ΩGẋ + Kx = 0`.
//!
//! The collision at `Ω = Ω₀` produces a double eigenvalue `iω₀` with a
//! Jordan chain `u₀, u₁`. From the chain we get the splitting rate `μ`, the
//! first-order drift of simple eigenvalues under damping and circulatory
//! forces, and the singular (umbrella shaped) critical surface `Ω_cr(δ, ν)`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circulatory::{quartic_from_system, skew_unit, SystemMatrices2};
use crate::error::{ensure_finite, Error, Result};
use crate::linalg::eigenvalues;
use crate::quartic::{hurwitz_verdict, QuarticCoeffs, StabilityVerdict, DEFAULT_BAND};
use crate::sweep::{bisect_boundary, expand_bracket, BISECTION_TOL};

type CMatrix = DMatrix<Complex64>;
type CVector = DVector<Complex64>;

const GOLDEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GyroSystem {
    pub k: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub n: DMatrix<f64>,
    pub omega: f64,
    pub delta: f64,
    pub nu: f64,
}

fn check_square(m: &DMatrix<f64>, dim: usize, name: &str) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::InvalidInput(format!("{name} must be {dim}×{dim}")));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
    }
    Ok(())
}

fn check_parity(m: &DMatrix<f64>, sign: f64, name: &str) -> Result<()> {
    let scale = m.amax().max(1.0);
    if (m - m.transpose() * sign).amax() > 1e-12 * scale {
        let kind = if sign > 0.0 { "symmetric" } else { "skew-symmetric" };
        return Err(Error::InvalidInput(format!("{name} must be {kind}")));
    }
    Ok(())
}

impl GyroSystem {
    pub fn new(
        k: DMatrix<f64>,
        d: DMatrix<f64>,
        g: DMatrix<f64>,
        n: DMatrix<f64>,
        omega: f64,
        delta: f64,
        nu: f64,
    ) -> Result<Self> {
        let dim = k.nrows();
        if dim < 2 {
            return Err(Error::InvalidInput("dimension must be at least 2".into()));
        }
        for (m, name) in [(&k, "K"), (&d, "D"), (&g, "G"), (&n, "N")] {
            check_square(m, dim, name)?;
        }
        check_parity(&k, 1.0, "K")?;
        check_parity(&d, 1.0, "D")?;
        check_parity(&g, -1.0, "G")?;
        check_parity(&n, -1.0, "N")?;
        ensure_finite(omega, "omega")?;
        ensure_finite(delta, "delta")?;
        ensure_finite(nu, "nu")?;
        Ok(Self { k, d, g, n, omega, delta, nu })
    }

    /// Two degrees of freedom with `G = N = [[0, 1], [−1, 0]]`.
    pub fn two_dof(k: Matrix2<f64>, d: Matrix2<f64>, omega: f64, delta: f64, nu: f64) -> Result<Self> {
        let to_dyn = |m: Matrix2<f64>| DMatrix::from_column_slice(2, 2, m.as_slice());
        let j = to_dyn(skew_unit());
        Self::new(to_dyn(k), to_dyn(d), j.clone(), j, omega, delta, nu)
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    pub fn with_parameters(&self, omega: f64, delta: f64, nu: f64) -> Self {
        Self { omega, delta, nu, ..self.clone() }
    }

    /// The conservative gyroscopic part (`δ = ν = 0`).
    pub fn conservative(&self) -> Self {
        self.with_parameters(self.omega, 0.0, 0.0)
    }

    /// First-order matrix acting on `(x, ẋ + ΩGx/2)`.
    pub fn first_order(&self) -> DMatrix<f64> {
        let m = self.dim();
        let (om, de, nu) = (self.omega, self.delta, self.nu);
        let half_g = &self.g * (0.5 * om);
        let lower_left =
            &self.d * &self.g * (0.5 * de * om) + &self.g * &self.g * (0.25 * om * om) - &self.k - &self.n * nu;
        let lower_right = -(&self.d * de) - &half_g;
        let mut c = DMatrix::zeros(2 * m, 2 * m);
        c.view_mut((0, 0), (m, m)).copy_from(&(-&half_g));
        c.view_mut((0, m), (m, m)).copy_from(&DMatrix::identity(m, m));
        c.view_mut((m, 0), (m, m)).copy_from(&lower_left);
        c.view_mut((m, m), (m, m)).copy_from(&lower_right);
        c
    }

    /// Two-degree-of-freedom systems whose skew matrices are multiples of
    /// the canonical one, written in circulatory form.
    pub fn as_two_dof(&self) -> Option<SystemMatrices2> {
        if self.dim() != 2 || self.g[(1, 1)] != 0.0 || self.n[(1, 1)] != 0.0 {
            return None;
        }
        let k = Matrix2::new(self.k[(0, 0)], self.k[(0, 1)], self.k[(1, 0)], self.k[(1, 1)]);
        let d = Matrix2::new(self.d[(0, 0)], self.d[(0, 1)], self.d[(1, 0)], self.d[(1, 1)]);
        Some(SystemMatrices2 {
            k,
            nu: self.nu * self.n[(0, 1)],
            d,
            delta: self.delta,
            omega: self.omega * self.g[(0, 1)],
        })
    }

    pub fn quartic(&self) -> Option<QuarticCoeffs> {
        self.as_two_dof().map(|s| quartic_from_system(&s))
    }

    /// Exact verdict for two degrees of freedom, spectral otherwise.
    pub fn is_asymptotically_stable(&self) -> bool {
        match self.quartic() {
            Some(q) => hurwitz_verdict(&q, DEFAULT_BAND).map(|v| v.is_asymptotically_stable()).unwrap_or(false),
            None => spectrum(self).iter().all(|z| z.re < 0.0),
        }
    }

    /// `−ω²I + iωΩG + K`, the conservative pencil at `λ = iω`.
    fn pencil(&self, omega_gyro: f64, freq: f64) -> CMatrix {
        let m = self.dim();
        CMatrix::from_fn(m, m, |i, j| {
            let diag = if i == j { -freq * freq } else { 0.0 };
            Complex64::new(diag + self.k[(i, j)], freq * omega_gyro * self.g[(i, j)])
        })
    }
}

/// Eigenvalues of the first-order matrix.
pub fn spectrum(sys: &GyroSystem) -> Vec<Complex64> {
    eigenvalues(&sys.first_order())
}

/// Largest distance from an eigenvalue to the nearest member of `−spectrum`.
pub fn pairing_error(spec: &[Complex64]) -> f64 {
    spec.iter().map(|z| spec.iter().map(|w| (z + w).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KreinCollision {
    /// Gyroscopic parameter `Ω₀` at the collision.
    pub omega0: f64,
    /// Frequency `ω₀` of the double eigenvalue `iω₀`.
    pub freq0: f64,
    pub u0: Vec<Complex64>,
    pub u1: Vec<Complex64>,
    pub mu_squared: f64,
    pub mu: f64,
    pub d1: f64,
    pub d2: f64,
    pub n1: f64,
    pub n2: f64,
    pub gamma_star: f64,
    pub chain_residual: f64,
}

impl KreinCollision {
    fn u0(&self) -> CVector {
        CVector::from_vec(self.u0.clone())
    }

    fn u1(&self) -> CVector {
        CVector::from_vec(self.u1.clone())
    }
}

/// `ūᵀ A v` for a real matrix `A`.
fn form(u: &CVector, a: &DMatrix<f64>, v: &CVector) -> Complex64 {
    let av = a.map(|x| Complex64::new(x, 0.0)) * v;
    u.dotc(&av)
}

/// Smallest pairwise distance between eigenvalues in the open upper half-plane.
fn upper_gap(sys: &GyroSystem, omega: f64) -> (f64, Option<(Complex64, Complex64)>) {
    let spec = spectrum(&sys.with_parameters(omega, 0.0, 0.0));
    let scale = sys.k.amax().sqrt().max(1e-300);
    let upper: Vec<Complex64> = spec.into_iter().filter(|z| z.im > 1e-9 * scale).collect();
    let mut best = (f64::INFINITY, None);
    for (i, a) in upper.iter().enumerate() {
        for b in &upper[i + 1..] {
            let gap = (a - b).norm();
            if gap < best.0 {
                best = (gap, Some((*a, *b)));
            }
        }
    }
    best
}

/// Locates the Krein collision of the conservative part of `sys` in
/// `[lo, hi]` and builds its Jordan chain.
///
/// The interval is scanned on `scan_points` values of `Ω`, the minimum of
/// the gap between upper-half-plane eigenvalues is refined by golden-section
/// search, and the chain is normalised by `‖u₀‖ = 1`, `u₀ᴴu₁ = 0`.
pub fn find_krein_collision(sys: &GyroSystem, lo: f64, hi: f64, scan_points: usize) -> Result<KreinCollision> {
    if !(lo < hi) || scan_points < 3 {
        return Err(Error::InvalidInput("need lo < hi and at least 3 scan points".into()));
    }
    let base = sys.conservative();
    let step = (hi - lo) / (scan_points - 1) as f64;
    let gaps: Vec<f64> = (0..scan_points).map(|i| upper_gap(&base, lo + step * i as f64).0).collect();
    let (imin, _) =
        gaps.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &g)| if g < acc.1 { (i, g) } else { acc });
    let mut a = lo + step * imin.saturating_sub(1) as f64;
    let mut b = (lo + step * (imin + 1) as f64).min(hi);

    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let gap = |om: f64| upper_gap(&base, om).0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (gap(c), gap(d));
    while (b - a).abs() > GOLDEN_TOL {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = gap(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = gap(d);
        }
    }
    let omega0 = 0.5 * (a + b);
    let (g0, pair) = upper_gap(&base, omega0);
    let scale = base.k.amax().sqrt().max(1e-300);
    let Some((p, q)) = pair.filter(|_| g0 < 1e-3 * scale) else {
        return Err(Error::NoCollision { lo, hi, gap: g0 });
    };
    let freq0 = 0.5 * (p.im + q.im);
    jordan_chain(&base, omega0, freq0)
}

/// Jordan chain of `−ω₀²I + iω₀Ω₀G + K` and the coefficients derived from it.
pub fn jordan_chain(sys: &GyroSystem, omega0: f64, freq0: f64) -> Result<KreinCollision> {
    let m = sys.dim();
    let degenerate = |reason: String| Error::DegenerateChain { omega0, reason };
    let l0 = sys.pencil(omega0, freq0);
    let svd = l0.clone().svd(true, true);
    let (Some(u_mat), Some(v_t)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
        return Err(degenerate("SVD failed".into()));
    };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let (smallest, second) = (svd.singular_values[order[0]], svd.singular_values[order[1]]);
    let norm = svd.singular_values.max();
    if smallest > 1e-6 * norm {
        return Err(degenerate(format!("iω₀ is not an eigenvalue (σ_min = {smallest:.3e})")));
    }
    if second < 1e-6 * norm {
        return Err(degenerate("two-dimensional kernel, eigenvalue is semisimple".into()));
    }
    let u0: CVector = v_t.row(order[0]).transpose().map(|z| z.conj());
    let u0 = &u0 / Complex64::new(u0.norm(), 0.0);

    let rhs_op =
        sys.g.map(|x| Complex64::new(omega0 * x, 0.0)) + CMatrix::identity(m, m) * Complex64::new(0.0, 2.0 * freq0);
    let rhs = -(&rhs_op * &u0);
    let solvability = u0.dotc(&rhs).norm();
    if solvability > 1e-6 * rhs.norm().max(1.0) {
        return Err(degenerate(format!("chain equation not solvable ({solvability:.3e})")));
    }
    // Pseudo-inverse on the complement of the kernel.
    let mut u1 = CVector::zeros(m);
    for &k in &order[1..] {
        let coeff = u_mat.column(k).dotc(&rhs) / svd.singular_values[k];
        u1 += v_t.row(k).transpose().map(|z| z.conj()) * coeff;
    }
    u1 -= &u0 * u0.dotc(&u1);

    let residual = (&l0 * &u0).norm().max((&l0 * &u1 - &rhs).norm());
    let mut data = KreinCollision {
        omega0,
        freq0,
        u0: u0.iter().copied().collect(),
        u1: u1.iter().copied().collect(),
        mu_squared: 0.0,
        mu: 0.0,
        d1: 0.0,
        d2: 0.0,
        n1: 0.0,
        n2: 0.0,
        gamma_star: 0.0,
        chain_residual: residual,
    };
    fill_coefficients(sys, &mut data)?;
    Ok(data)
}

fn fill_coefficients(sys: &GyroSystem, data: &mut KreinCollision) -> Result<()> {
    let (u0, u1) = (data.u0(), data.u1());
    let (w0, om0) = (data.freq0, data.omega0);
    let m = sys.dim();
    let id = DMatrix::identity(m, m);
    let u0u0 = u0.dotc(&u0);
    let denom = form(&u1, &id, &u1) * (w0 * w0)
        - form(&u1, &sys.k, &u1)
        - Complex64::new(0.0, w0 * om0) * form(&u1, &sys.g, &u1)
        - u0u0;
    let mu2 = -(u0u0 * (2.0 * w0 * w0)) / (denom * om0);
    data.mu_squared = mu2.re;
    data.mu = mu2.re.max(0.0).sqrt();
    data.d1 = form(&u0, &sys.d, &u0).re;
    data.d2 = (form(&u0, &sys.d, &u1) - form(&u1, &sys.d, &u0)).im;
    data.n1 = form(&u0, &sys.n, &u0).im;
    data.n2 = (form(&u0, &sys.n, &u1) - form(&u1, &sys.n, &u0)).re;
    let nu0 = form(&u0, &sys.n, &u0);
    if nu0.norm() < 1e-14 {
        return Err(Error::DegenerateChain { omega0: om0, reason: "circulatory form vanishes on u0".into() });
    }
    data.gamma_star = (Complex64::new(0.0, -w0) * form(&u0, &sys.d, &u0) / nu0).re;
    Ok(())
}

/// Re-evaluates the chain coefficients with `u₁ + c·u₀` in place of `u₁`.
pub fn regauge(sys: &GyroSystem, data: &KreinCollision, c: Complex64) -> Result<KreinCollision> {
    let u1 = data.u1() + data.u0() * c;
    let mut out = KreinCollision { u1: u1.iter().copied().collect(), ..data.clone() };
    fill_coefficients(sys, &mut out)?;
    Ok(out)
}

/// Two-term expansion `iω₀ ± iμ√(Ω − Ω₀)` of the colliding eigenvalues.
pub fn krein_splitting(data: &KreinCollision, omega: f64) -> [Complex64; 2] {
    let root = Complex64::new(omega - data.omega0, 0.0).sqrt();
    let i = Complex64::i();
    let centre = i * data.freq0;
    [centre + i * data.mu * root, centre - i * data.mu * root]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Upper,
    Lower,
}

/// The simple imaginary eigenvalue `iω(Ω)` on `branch` and its eigenvector,
/// for `Ω` on the stable side of the collision.
pub fn branch_mode(sys: &GyroSystem, data: &KreinCollision, omega: f64, branch: Branch) -> Result<(f64, CVector)> {
    let base = sys.with_parameters(omega, 0.0, 0.0);
    let spec = spectrum(&base);
    let mut near: Vec<Complex64> = spec.into_iter().filter(|z| z.im > 0.0).collect();
    near.sort_by(|a, b| (a.im - data.freq0).abs().total_cmp(&(b.im - data.freq0).abs()));
    if near.len() < 2 {
        return Err(Error::Domain("fewer than two upper eigenvalues".into()));
    }
    let (a, b) = (near[0], near[1]);
    let scale = data.freq0.abs().max(1.0);
    if a.re.abs() > 1e-9 * scale || b.re.abs() > 1e-9 * scale || (a.im - b.im).abs() < 1e-9 * scale {
        return Err(Error::Domain(format!("Ω = {omega} is not in the simple-eigenvalue regime")));
    }
    let freq = match branch {
        Branch::Upper => a.im.max(b.im),
        Branch::Lower => a.im.min(b.im),
    };
    let svd = base.pencil(omega, freq).svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or_else(|| Error::Domain("SVD failed".into()))?;
    let k = svd.singular_values.imin();
    let u: CVector = v_t.row(k).transpose().map(|z| z.conj());
    Ok((freq, &u / Complex64::new(u.norm(), 0.0)))
}

/// First-order increment of the simple eigenvalue `iω(Ω)` under damping `δ`
/// and circulatory forces `ν`. The result is real.
pub fn eigenvalue_increment(
    sys: &GyroSystem,
    data: &KreinCollision,
    omega: f64,
    delta: f64,
    nu: f64,
    branch: Branch,
) -> Result<Complex64> {
    let (w, u) = branch_mode(sys, data, omega, branch)?;
    let m = sys.dim();
    let num = form(&u, &sys.d, &u) * (w * w * delta) - Complex64::new(0.0, w * nu) * form(&u, &sys.n, &u);
    let den = form(&u, &sys.k, &u) + form(&u, &DMatrix::identity(m, m), &u) * (w * w);
    Ok(-num / den)
}

/// Ratio `γ(Ω) = ν/δ` for which the increment on `branch` vanishes.
pub fn neutral_ratio(sys: &GyroSystem, data: &KreinCollision, omega: f64, branch: Branch) -> Result<f64> {
    let (w, u) = branch_mode(sys, data, omega, branch)?;
    Ok((Complex64::new(0.0, -w) * form(&u, &sys.d, &u) / form(&u, &sys.n, &u)).re)
}

/// Expansion of [`neutral_ratio`] in `√(Ω − Ω₀)`; `sign` selects the branch.
pub fn neutral_ratio_expansion(data: &KreinCollision, omega: f64, sign: f64) -> f64 {
    let s = data.mu * (omega - data.omega0).max(0.0).sqrt();
    -(data.freq0 + sign * s) * (data.d1 - sign * data.d2 * s) / (data.n1 + sign * data.n2 * s)
}

fn surface_denominator(data: &KreinCollision) -> Result<f64> {
    let den = data.freq0 * data.d2 - data.gamma_star * data.n2 - data.d1;
    let scale = (data.freq0 * data.d2).abs() + (data.gamma_star * data.n2).abs() + data.d1.abs();
    if den.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) || data.mu_squared <= 0.0 {
        return Err(Error::DegenerateSurface { denominator: den });
    }
    Ok(den)
}

/// Limit of the critical gyroscopic parameter along `ν = γδ`, `δ → 0`.
pub fn omega_cr_limit(data: &KreinCollision, gamma: f64) -> Result<f64> {
    let den = surface_denominator(data)?;
    Ok(data.omega0 + data.n1.powi(2) * (gamma - data.gamma_star).powi(2) / (data.mu_squared * den * den))
}

/// Umbrella approximation of the critical surface `Ω_cr(δ, ν)`.
pub fn omega_cr_surface(data: &KreinCollision, delta: f64, nu: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let den = surface_denominator(data)?;
    Ok(data.omega0
        + data.n1.powi(2) * (nu - data.gamma_star * delta).powi(2) / (data.mu_squared * den * den * delta * delta))
}

/// `ω₀ = (detK)^{1/4}` and `Ω₀ = √(−trK + 2√detK)` for two degrees of freedom.
pub fn two_dof_collision(k: &Matrix2<f64>) -> Result<(f64, f64)> {
    let (det, tr) = (k.determinant(), k.trace());
    if !(det > 0.0 && tr < 0.0) {
        return Err(Error::Domain(format!("need detK > 0 and trK < 0, got {det}, {tr}")));
    }
    Ok(((-tr + 2.0 * det.sqrt()).sqrt(), det.powf(0.25)))
}

/// `γ* = (tr(KD) + (Ω₀² − ω₀²)trD)/(2Ω₀)`.
pub fn two_dof_gamma_star(k: &Matrix2<f64>, d: &Matrix2<f64>) -> Result<f64> {
    let (om0, w0) = two_dof_collision(k)?;
    Ok(((k * d).trace() + (om0 * om0 - w0 * w0) * d.trace()) / (2.0 * om0))
}

/// Closed-form critical surface for two oscillators:
/// `Ω₀ + Ω₀·2(ν − γ*δ)²/((ω₀trD)²δ²)`.
pub fn two_dof_omega_cr(k: &Matrix2<f64>, d: &Matrix2<f64>, delta: f64, nu: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let (om0, w0) = two_dof_collision(k)?;
    let gs = two_dof_gamma_star(k, d)?;
    let tr_d = d.trace();
    if tr_d == 0.0 {
        return Err(Error::DegenerateSurface { denominator: 0.0 });
    }
    Ok(om0 + om0 * 2.0 * (nu - gs * delta).powi(2) / ((w0 * tr_d).powi(2) * delta * delta))
}

/// Exact `δ → 0` limit of the critical gyroscopic parameter of a
/// two-degree-of-freedom system along `ν = γδ`.
///
/// To first order in `δ` the quartic is `(δb₁, trK + Ω², δb₃, detK)` with
/// `b₁ = trD`, `b₃ = trK·trD − tr(KD) + 2Ωγ`, which is asymptotically stable
/// for small `δ` iff `b₃ > 0` and `trK + Ω² > (b₁²detK + b₃²)/(b₁b₃)`.
pub fn two_dof_ray_limit(k: &Matrix2<f64>, d: &Matrix2<f64>, gamma: f64) -> Result<f64> {
    let (tr_k, det_k, tr_d) = (k.trace(), k.determinant(), d.trace());
    if !(tr_d > 0.0 && det_k > 0.0) {
        return Err(Error::Domain("need trD > 0 and detK > 0".into()));
    }
    let c0 = tr_k * tr_d - (k * d).trace();
    let stable = |om: f64| {
        let b3 = c0 + 2.0 * om * gamma;
        b3 > 0.0 && tr_k + om * om > (tr_d * tr_d * det_k + b3 * b3) / (tr_d * b3)
    };
    let start = if gamma > 0.0 { (-c0 / (2.0 * gamma)).max(0.0) } else { 0.0 };
    if stable(start) {
        return Ok(start);
    }
    let hi = expand_bracket(stable, start, 0.125, 1e6)?;
    bisect_boundary(stable, start, hi, BISECTION_TOL)
}

/// Bisected onset of asymptotic stability in `Ω ≥ lo`: the smallest `Ω`
/// above which the perturbed system is asymptotically stable.
pub fn omega_critical_bisected(sys: &GyroSystem, lo: f64, first_step: f64) -> Result<f64> {
    let stable = |om: f64| sys.with_parameters(om, sys.delta, sys.nu).is_asymptotically_stable();
    let hi = expand_bracket(stable, lo, first_step, lo + 1e6 * first_step)?;
    bisect_boundary(stable, lo, hi, BISECTION_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxwellBlochParams {
    pub omega: f64,
    pub delta: f64,
    pub nu: f64,
    pub kappa: f64,
}

/// Real quartic of `ẍ + iΩẋ + δẋ + iνx + κx = 0`.
pub fn maxwell_bloch_quartic(p: &MaxwellBlochParams) -> Result<QuarticCoeffs> {
    let MaxwellBlochParams { omega, delta, nu, kappa } = *p;
    QuarticCoeffs::new(
        2.0 * delta,
        delta * delta + omega * omega + 2.0 * kappa,
        2.0 * (delta * kappa + omega * nu),
        kappa * kappa + nu * nu,
    )
}

/// Roots of the complex characteristic polynomial `λ² + (δ + iΩ)λ + κ + iν`
/// and of its conjugate, which together form the real spectrum.
pub fn maxwell_bloch_roots(p: &MaxwellBlochParams) -> [Complex64; 4] {
    let b = Complex64::new(p.delta, p.omega);
    let c = Complex64::new(p.kappa, p.nu);
    let disc = (b * b - c * 4.0).sqrt();
    let r1 = (-b + disc) / 2.0;
    let r2 = (-b - disc) / 2.0;
    [r1, r2, r1.conj(), r2.conj()]
}

pub fn maxwell_bloch_verdict(p: &MaxwellBlochParams) -> Result<StabilityVerdict> {
    hurwitz_verdict(&maxwell_bloch_quartic(p)?, DEFAULT_BAND)
}

/// Closed-form asymptotic stability test, `None` when `ν = 0` and `δ > 0`.
///
/// Stable iff `δ > 0` and `δΩν > ν² − δ²κ`. Dividing by `δν` gives
/// `Ω > ν/δ − (δ/ν)κ` for `ν > 0`; for `ν < 0` the inequality reverses.
pub fn maxwell_bloch_closed_form(p: &MaxwellBlochParams) -> Option<bool> {
    if !(p.delta > 0.0) {
        return Some(false);
    }
    if p.nu == 0.0 {
        return None;
    }
    Some(p.delta * p.omega * p.nu > p.nu * p.nu - p.delta * p.delta * p.kappa)
}

/// The two boundary lines `ν = (Ω ± √(Ω² + 4κ))δ/2` of a section `Ω = const`.
pub fn maxwell_bloch_boundaries(omega: f64, delta: f64, kappa: f64) -> Option<(f64, f64)> {
    let disc = omega * omega + 4.0 * kappa;
    (disc >= 0.0).then(|| {
        let r = disc.sqrt();
        (0.5 * (omega - r) * delta, 0.5 * (omega + r) * delta)
    })
}

/// Exact critical `Ω` on the positive pocket for `ν/δ = γ > 0`:
/// `Ω = γ − κ/γ`.
pub fn maxwell_bloch_exact_omega_cr(delta: f64, nu: f64, kappa: f64) -> Result<f64> {
    if !(delta > 0.0) || nu == 0.0 {
        return Err(Error::Domain("need delta > 0 and nu != 0".into()));
    }
    let gamma = nu / delta;
    Ok(gamma - kappa / gamma)
}

/// Local approximation of the two stability boundaries near `Ω = ±2√(−κ)`.
/// Returns `(positive branch, negative branch)`.
pub fn hauger_omega_cr(delta: f64, nu: f64, kappa: f64) -> Result<(f64, f64)> {
    if !(kappa < 0.0) {
        return Err(Error::Domain(format!("kappa must be negative, got {kappa}")));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let s = (-kappa).sqrt();
    let plus = 2.0 * s + (nu - delta * s).powi(2) / (s * delta * delta);
    let minus = -2.0 * s - (nu + delta * s).powi(2) / (s * delta * delta);
    Ok((plus, minus))
}

/// Physical parameters of Hauger's gyropendulum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaugerPendulum {
    pub inertia: f64,
    pub axial_inertia: f64,
    pub damping: f64,
    pub hinge_stiffness: f64,
    /// Gravity moment `m·g·s`.
    pub gravity_moment: f64,
    pub torque_angle_ratio: f64,
    pub torque: f64,
    pub spin_damping: f64,
}

impl HaugerPendulum {
    pub fn to_maxwell_bloch(&self) -> Result<MaxwellBlochParams> {
        if self.spin_damping == 0.0 || self.inertia == 0.0 || self.torque == 0.0 {
            return Err(Error::Domain("inertia, torque and spin damping must be non-zero".into()));
        }
        let w = -self.torque / self.spin_damping;
        let iw2 = self.inertia * w * w;
        Ok(MaxwellBlochParams {
            omega: self.axial_inertia / self.inertia,
            delta: self.damping / (self.inertia * w),
            kappa: (self.hinge_stiffness - self.gravity_moment) / iw2,
            nu: (1.0 - self.torque_angle_ratio) * self.torque / iw2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quartic::{census, StabilityLabel};
    use approx::assert_relative_eq;

    fn diag(a: f64, b: f64) -> Matrix2<f64> {
        Matrix2::new(a, 0.0, 0.0, b)
    }

    fn unstable_pair(d: Matrix2<f64>) -> GyroSystem {
        GyroSystem::two_dof(diag(-1.0, -4.0), d, 0.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn decoupled_spectrum() {
        let sys = GyroSystem::two_dof(diag(1.0, 4.0), diag(0.0, 0.0), 0.0, 0.0, 0.0).unwrap();
        let mut im: Vec<f64> = spectrum(&sys).iter().map(|z| z.im).collect();
        im.sort_by(f64::total_cmp);
        for (x, y) in im.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn gyroscopic_stabilization_for_large_omega() {
        let sys = unstable_pair(Matrix2::identity()).with_parameters(5.0, 0.0, 0.0);
        let v = hurwitz_verdict(&sys.quartic().unwrap(), DEFAULT_BAND).unwrap();
        assert_eq!(v.label, StabilityLabel::MarginallyStable);
        assert!(spectrum(&sys).iter().all(|z| z.re.abs() < 1e-12));
    }

    #[test]
    fn damped_potential_system_decays() {
        let sys = GyroSystem::two_dof(diag(1.0, 4.0), Matrix2::new(1.0, 0.2, 0.2, 0.5), 0.0, 0.3, 0.0).unwrap();
        assert!(spectrum(&sys).iter().all(|z| z.re < 0.0));
    }

    #[test]
    fn first_order_matrix_matches_quartic() {
        let sys = GyroSystem::two_dof(diag(-1.0, -4.0), Matrix2::new(1.0, 0.3, 0.3, 2.0), 3.2, 0.1, 0.2).unwrap();
        let spec = spectrum(&sys);
        let q = sys.quartic().unwrap();
        for z in spec {
            assert!(q.eval(z).norm() < 1e-10, "{z}");
        }
    }

    #[test]
    fn symmetries() {
        let k = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.1, 0.5, -1.0, 0.3, 0.1, 0.3, 3.0]);
        let g = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -0.4, -1.0, 0.0, 0.7, 0.4, -0.7, 0.0]);
        let d = DMatrix::identity(3, 3);
        let sys = GyroSystem::new(k, d, g.clone(), g, 1.7, 0.0, 0.0).unwrap();
        assert!(pairing_error(&spectrum(&sys)) < 1e-10);
        let reversible = sys.with_parameters(0.0, 0.0, 0.8);
        assert!(pairing_error(&spectrum(&reversible)) < 1e-10);
    }

    #[test]
    fn rejects_wrong_parity() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(GyroSystem::new(k, DMatrix::identity(2, 2), j.clone(), j, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn collision_matches_closed_form() {
        let sys = unstable_pair(Matrix2::identity());
        let data = find_krein_collision(&sys, 0.5, 6.0, 200).unwrap();
        assert!((data.omega0 - 3.0).abs() < 1e-8, "{}", data.omega0);
        assert!((data.freq0 - 2f64.sqrt()).abs() < 1e-8, "{}", data.freq0);
        assert!(data.chain_residual < 1e-8 * 4.0);
        assert!(data.mu_squared > 0.0);
        assert!((data.gamma_star - 1.5).abs() < 1e-8);
    }

    #[test]
    fn isotropic_collision() {
        let kappa = -2.0;
        let sys = unstable_pair(Matrix2::identity());
        let sys = GyroSystem { k: DMatrix::identity(2, 2) * kappa, ..sys };
        let data = find_krein_collision(&sys, 0.5, 6.0, 200).unwrap();
        assert!((data.omega0 - 2.0 * 2f64.sqrt()).abs() < 1e-8);
        assert!((data.freq0 - 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn positive_definite_has_no_collision() {
        let sys = GyroSystem::two_dof(diag(1.0, 4.0), Matrix2::identity(), 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(find_krein_collision(&sys, 0.0, 10.0, 200), Err(Error::NoCollision { .. })));
    }

    #[test]
    fn splitting_rate_matches_spectrum() {
        let sys = unstable_pair(Matrix2::identity());
        let data = find_krein_collision(&sys, 0.5, 6.0, 200).unwrap();
        let at = |h: f64| {
            let mut up: Vec<Complex64> =
                spectrum(&sys.with_parameters(data.omega0 + h, 0.0, 0.0)).into_iter().filter(|z| z.im > 0.0).collect();
            up.sort_by(|a, b| a.im.total_cmp(&b.im));
            let pred = krein_splitting(&data, data.omega0 + h);
            ((up[1] - pred[0]).norm()).max((up[0] - pred[1]).norm())
        };
        let (e2, e4) = (at(1e-2), at(1e-4));
        assert!(e2 < 0.05 && e4 < 5e-4, "{e2} {e4}");
        assert!(e4 / 1e-4 < 2.0 * e2 / 1e-2);
        // Flutter side: the prediction leaves the axis.
        let below = krein_splitting(&data, data.omega0 - 1e-4);
        assert!(below[0].re.abs() > 1e-3);
        let exact = spectrum(&sys.with_parameters(data.omega0 - 1e-4, 0.0, 0.0));
        assert!(exact.iter().any(|z| (z - below[0]).norm() < 1e-3 || (z - below[1]).norm() < 1e-3));
    }

    #[test]
    fn gauge_invariance() {
        let sys = unstable_pair(Matrix2::new(1.0, 0.3, 0.3, 2.0));
        let data = find_krein_collision(&sys, 0.5, 6.0, 200).unwrap();
        let other = regauge(&sys, &data, Complex64::new(0.3, 0.7)).unwrap();
        assert_relative_eq!(data.mu_squared, other.mu_squared, max_relative = 1e-10);
        let a = omega_cr_surface(&data, 1e-3, 2.5e-3).unwrap();
        let b = omega_cr_surface(&other, 1e-3, 2.5e-3).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn surface_agrees_with_two_dof_closed_form() {
        for d in [Matrix2::identity(), Matrix2::new(1.0, 0.3, 0.3, 2.0), Matrix2::new(0.2, -0.1, -0.1, 3.0)] {
            let sys = unstable_pair(d);
            let data = find_krein_collision(&sys, 0.5, 6.0, 200).unwrap();
            for (delta, nu) in [(1e-3, 0.0), (1e-3, 2e-3), (0.5, 0.1), (1.0, -1.0)] {
                let general = omega_cr_surface(&data, delta, nu).unwrap();
                let closed = two_dof_omega_cr(&diag(-1.0, -4.0), &d, delta, nu).unwrap();
                assert_relative_eq!(general, closed, max_relative = 1e-8);
            }
            assert_relative_eq!(
                data.gamma_star,
                two_dof_gamma_star(&diag(-1.0, -4.0), &d).unwrap(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn surface_examples() {
        let d = Matrix2::identity();
        let k = diag(-1.0, -4.0);
        assert_eq!(two_dof_gamma_star(&k, &d).unwrap(), 1.5);
        assert_relative_eq!(two_dof_omega_cr(&k, &d, 1e-3, 1.5e-3).unwrap(), 3.0, epsilon = 1e-12);
        assert_relative_eq!(two_dof_omega_cr(&k, &d, 1.0, 2.5).unwrap(), 3.75, epsilon = 1e-12);
        assert!(two_dof_omega_cr(&k, &d, 0.0, 1.0).is_err());
        let data = find_krein_collision(&unstable_pair(d), 0.5, 6.0, 200).unwrap();
        assert!(omega_cr_surface(&data, -1.0, 0.0).is_err());
        for nu in [-1.0, 0.0, 0.3, 5.0] {
            assert!(omega_cr_surface(&data, 0.2, nu).unwrap() >= data.omega0);
        }
    }

    #[test]
    fn increment_vanishes_on_neutral_ray() {
        let d = Matrix2::new(1.0, 0.3, 0.3, 2.0);
        let sys = unstable_pair(d);
        let data = find_krein_collision(&sys, 0.5, 6.0, 200).unwrap();
        let omega = data.omega0 + 0.2;
        for branch in [Branch::Upper, Branch::Lower] {
            assert_eq!(eigenvalue_increment(&sys, &data, omega, 0.0, 0.0, branch).unwrap().norm(), 0.0);
            let gamma = neutral_ratio(&sys, &data, omega, branch).unwrap();
            let inc = eigenvalue_increment(&sys, &data, omega, 1e-2, gamma * 1e-2, branch).unwrap();
            assert!(inc.norm() < 1e-14, "{inc}");
        }
    }

    #[test]
    fn increment_predicts_exact_drift() {
        let d = Matrix2::new(1.0, 0.3, 0.3, 2.0);
        let sys = unstable_pair(d);
        let data = find_krein_collision(&sys, 0.5, 6.0, 200).unwrap();
        let omega = data.omega0 + 0.5;
        let mut errors = Vec::new();
        for eps in [1e-3, 1e-4, 1e-5] {
            let (w, _) = branch_mode(&sys, &data, omega, Branch::Upper).unwrap();
            let inc = eigenvalue_increment(&sys, &data, omega, eps, eps, Branch::Upper).unwrap();
            assert!(inc.im.abs() < 1e-14);
            let exact = spectrum(&sys.with_parameters(omega, eps, eps))
                .into_iter()
                .min_by(|a, b| (a.im - w).abs().total_cmp(&(b.im - w).abs()))
                .unwrap();
            errors.push((exact.re - inc.re).abs() / eps);
        }
        assert!(errors[2] < 1e-3 && errors[1] < errors[0], "{errors:?}");
    }

    #[test]
    fn neutral_ratio_expansion_tracks_exact() {
        let d = Matrix2::new(1.0, 0.3, 0.3, 2.0);
        let sys = unstable_pair(d);
        let data = find_krein_collision(&sys, 0.5, 6.0, 200).unwrap();
        for h in [1e-3, 1e-4] {
            let omega = data.omega0 + h;
            let mut exact = [
                neutral_ratio(&sys, &data, omega, Branch::Upper).unwrap(),
                neutral_ratio(&sys, &data, omega, Branch::Lower).unwrap(),
            ];
            let mut approx = [neutral_ratio_expansion(&data, omega, 1.0), neutral_ratio_expansion(&data, omega, -1.0)];
            exact.sort_by(f64::total_cmp);
            approx.sort_by(f64::total_cmp);
            for (e, a) in exact.iter().zip(approx) {
                assert!((e - a).abs() < 20.0 * h, "h = {h}: {e} vs {a}");
            }
        }
    }

    #[test]
    fn bisected_onset_approaches_exact_ray_limit() {
        let k = diag(-1.0, -4.0);
        let d = Matrix2::identity();
        for gamma in [1.0, 1.5, 2.5] {
            let limit = two_dof_ray_limit(&k, &d, gamma).unwrap();
            let mut prev = f64::INFINITY;
            for delta in [1e-2, 1e-3, 1e-4] {
                let sys = GyroSystem::two_dof(k, d, 0.0, delta, gamma * delta).unwrap();
                let om = omega_critical_bisected(&sys, 0.0, 0.5).unwrap();
                let err = (om - limit).abs();
                assert!(err < 20.0 * delta, "γ = {gamma}, δ = {delta}: {om} vs {limit}");
                assert!(err <= prev + 1e-9);
                prev = err;
            }
        }
        assert!((two_dof_ray_limit(&k, &d, 1.5).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn ray_limit_is_locally_the_umbrella() {
        let k = diag(-1.0, -4.0);
        let d = Matrix2::identity();
        let data = find_krein_collision(&unstable_pair(d), 0.5, 6.0, 200).unwrap();
        for dg in [0.1, 0.05, 0.025] {
            let gamma = data.gamma_star + dg;
            let exact = two_dof_ray_limit(&k, &d, gamma).unwrap();
            let umbrella = omega_cr_limit(&data, gamma).unwrap();
            assert!((exact - umbrella).abs() < 2.0 * dg.powi(3), "{dg}: {exact} vs {umbrella}");
        }
    }

    #[test]
    fn maxwell_bloch_examples() {
        let p = |omega, delta, nu, kappa| MaxwellBlochParams { omega, delta, nu, kappa };
        for om in [-3.0, 0.0, 2.0] {
            assert!(maxwell_bloch_verdict(&p(om, 1.0, 0.0, 1.0)).unwrap().is_asymptotically_stable());
        }
        assert!(maxwell_bloch_verdict(&p(2.0, 1.0, 2.0, 1.0)).unwrap().is_asymptotically_stable());
        assert!(maxwell_bloch_verdict(&p(1.0, 1.0, 2.0, 1.0)).unwrap().is_unstable());
        assert_eq!(maxwell_bloch_closed_form(&p(2.0, 1.0, 2.0, 1.0)), Some(true));
        assert_eq!(maxwell_bloch_closed_form(&p(1.0, 1.0, 2.0, 1.0)), Some(false));
        assert_eq!(maxwell_bloch_closed_form(&p(1.0, 1.0, 0.0, 1.0)), None);
        let stable = |om: f64| maxwell_bloch_verdict(&p(om, 1.0, 2.0, 1.0)).unwrap().is_asymptotically_stable();
        let om = bisect_boundary(stable, 0.0, 5.0, BISECTION_TOL).unwrap();
        assert!((om - 1.5).abs() < 5e-9, "{om}");
    }

    #[test]
    fn statically_unstable_pockets() {
        let kappa = -1.0;
        for om in [-1.99, -1.0, 0.0, 1.0, 1.99] {
            for nu in [-3.0, -1.0, 0.5, 1.0, 3.0] {
                let v = maxwell_bloch_verdict(&MaxwellBlochParams { omega: om, delta: 0.7, nu, kappa }).unwrap();
                assert!(!v.is_asymptotically_stable(), "Ω = {om}, ν = {nu}");
            }
        }
    }

    #[test]
    fn complex_roots_match_quartic_census() {
        let p = MaxwellBlochParams { omega: 0.7, delta: 0.3, nu: -0.4, kappa: 0.5 };
        let q = maxwell_bloch_quartic(&p).unwrap();
        for z in maxwell_bloch_roots(&p) {
            assert!(q.eval(z).norm() < 1e-12);
        }
        let v = census(&maxwell_bloch_roots(&p), 1e-9);
        assert!(v.same_census(&maxwell_bloch_verdict(&p).unwrap()));
    }

    #[test]
    fn section_boundaries() {
        let (lo, hi) = maxwell_bloch_boundaries(0.0, 1.0, 1.0).unwrap();
        assert_eq!((lo, hi), (-1.0, 1.0));
        assert!(maxwell_bloch_boundaries(0.0, 1.0, -1.0).is_none());
        let (lo, hi) = maxwell_bloch_boundaries(3.0, 0.5, -1.0).unwrap();
        for nu in [lo, hi] {
            let q = maxwell_bloch_quartic(&MaxwellBlochParams { omega: 3.0, delta: 0.5, nu, kappa: -1.0 }).unwrap();
            assert!(crate::quartic::marginal_h(&q).abs() < 1e-12);
        }
    }

    #[test]
    fn hauger_branches() {
        let (plus, minus) = hauger_omega_cr(1.0, 1.0, -1.0).unwrap();
        assert_eq!(plus, 2.0);
        assert!(minus < -2.0);
        assert_eq!(hauger_omega_cr(1.0, 2.0, -1.0).unwrap().0, 3.0);
        let (p1, m1) = hauger_omega_cr(0.4, 0.9, -2.0).unwrap();
        let (p2, m2) = hauger_omega_cr(0.4, -0.9, -2.0).unwrap();
        assert_relative_eq!(p1, -m2, max_relative = 1e-15);
        assert_relative_eq!(m1, -p2, max_relative = 1e-15);
        assert!(hauger_omega_cr(1.0, 1.0, 1.0).is_err());
        assert!(hauger_omega_cr(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn hauger_is_second_order_accurate() {
        // Exact boundary γ − κ/γ against the local approximation near γ = √(−κ).
        let kappa = -1.0;
        for dg in [0.1, 0.05, 0.025] {
            let (delta, nu) = (1e-3, (1.0 + dg) * 1e-3);
            let exact = maxwell_bloch_exact_omega_cr(delta, nu, kappa).unwrap();
            let approx = hauger_omega_cr(delta, nu, kappa).unwrap().0;
            assert!((exact - approx).abs() < 1.1 * dg.powi(3), "{dg}: {exact} vs {approx}");
            let stable = |om: f64| {
                maxwell_bloch_verdict(&MaxwellBlochParams { omega: om, delta, nu, kappa })
                    .unwrap()
                    .is_asymptotically_stable()
            };
            let bisected = bisect_boundary(stable, 1.0, 6.0, BISECTION_TOL).unwrap();
            assert!((bisected - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn hauger_parameter_map() {
        let h = HaugerPendulum {
            inertia: 2.0,
            axial_inertia: 3.0,
            damping: 0.4,
            hinge_stiffness: 5.0,
            gravity_moment: 1.0,
            torque_angle_ratio: 0.5,
            torque: 2.0,
            spin_damping: -1.0,
        };
        let p = h.to_maxwell_bloch().unwrap();
        assert_eq!(p.omega, 1.5);
        assert_eq!(p.delta, 0.1);
        assert_eq!(p.kappa, 0.5);
        assert_eq!(p.nu, 0.125);
    }
}
