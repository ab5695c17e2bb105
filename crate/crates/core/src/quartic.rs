//! Stability of the monic real quartic `λ⁴ + a₁λ³ + a₂λ² + a₃λ + a₄`.
//!
//! Two independent routes are provided. [`hurwitz_verdict`] decides from the
//! coefficients alone (Bottema's condition sets together with the Routh
//! array for the root census). [`root_oracle`] computes the roots and counts
//! them. Every analytic result elsewhere in the crate is validated against
//! the oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::linalg::eigenvalues;
use crate::sweep::{par_map, Exec};

/// Default half-width of the indeterminacy band around each defining equality.
pub const DEFAULT_BAND: f64 = 1e-10;

/// Absolute root distance below which two imaginary roots count as repeated.
pub const REPEATED_ROOT_TOL: f64 = 1e-7;

/// Real-part threshold, relative to the root scale, used when a band point
/// is handed to the oracle.
pub const BAND_REAL_PART_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl QuarticCoeffs {
    pub fn new(a1: f64, a2: f64, a3: f64, a4: f64) -> Result<Self> {
        Ok(Self {
            a1: ensure_finite(a1, "a1")?,
            a2: ensure_finite(a2, "a2")?,
            a3: ensure_finite(a3, "a3")?,
            a4: ensure_finite(a4, "a4")?,
        })
    }

    /// Normalizes `c[0]λ⁴ + c[1]λ³ + c[2]λ² + c[3]λ + c[4]` to monic form.
    pub fn from_descending(c: [f64; 5]) -> Result<Self> {
        if c[0] == 0.0 || !c[0].is_finite() {
            return Err(Error::Domain(format!("leading coefficient must be finite and non-zero, got {}", c[0])));
        }
        Self::new(c[1] / c[0], c[2] / c[0], c[3] / c[0], c[4] / c[0])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|a| a.is_finite())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (((z + self.a1) * z + self.a2) * z + self.a3) * z + self.a4
    }

    fn eval_derivative(&self, z: Complex64) -> Complex64 {
        ((z * 4.0 + 3.0 * self.a1) * z + 2.0 * self.a2) * z + self.a3
    }

    /// Coefficients of the quartic in `μ` after substituting `λ = cμ`.
    pub fn rescaled(&self, c: f64) -> Self {
        Self { a1: self.a1 / c, a2: self.a2 / (c * c), a3: self.a3 / (c * c * c), a4: self.a4 / (c * c * c * c) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityLabel {
    AsymptoticallyStable,
    MarginallyStable,
    Unstable,
    DegenerateMarginal,
}

impl StabilityLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::AsymptoticallyStable => "AsymptoticallyStable",
            Self::MarginallyStable => "MarginallyStable",
            Self::Unstable => "Unstable",
            Self::DegenerateMarginal => "DegenerateMarginal",
        }
    }
}

impl std::fmt::Display for StabilityLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Root census of a quartic plus its classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub left_count: u8,
    pub imag_count: u8,
    pub right_count: u8,
    pub label: StabilityLabel,
    pub has_repeated_imag_root: bool,
    /// Set when the point fell inside the indeterminacy band and the root
    /// oracle decided.
    pub boundary_resolved: bool,
}

impl StabilityVerdict {
    fn from_counts(left: u8, imag: u8, right: u8, repeated: bool) -> Self {
        debug_assert_eq!(left + imag + right, 4);
        let label = if right > 0 {
            StabilityLabel::Unstable
        } else if imag == 0 {
            StabilityLabel::AsymptoticallyStable
        } else if repeated {
            StabilityLabel::DegenerateMarginal
        } else {
            StabilityLabel::MarginallyStable
        };
        Self {
            left_count: left,
            imag_count: imag,
            right_count: right,
            label,
            has_repeated_imag_root: repeated,
            boundary_resolved: false,
        }
    }

    pub fn is_asymptotically_stable(&self) -> bool {
        self.label == StabilityLabel::AsymptoticallyStable
    }

    pub fn is_unstable(&self) -> bool {
        self.label == StabilityLabel::Unstable
    }

    /// Same census and label, ignoring how the verdict was obtained.
    pub fn same_census(&self, other: &Self) -> bool {
        self.left_count == other.left_count
            && self.imag_count == other.imag_count
            && self.right_count == other.right_count
            && self.label == other.label
    }
}

/// Bottema's marginal function `H = a₁²a₄ + a₃² − a₁a₂a₃`.
pub fn marginal_h(q: &QuarticCoeffs) -> f64 {
    q.a1 * q.a1 * q.a4 + q.a3 * q.a3 - q.a1 * q.a2 * q.a3
}

/// Discriminant `a₂² − 4a₄` of the biquadratic `λ⁴ + a₂λ² + a₄`.
pub fn biquadratic_discriminant(q: &QuarticCoeffs) -> f64 {
    q.a2 * q.a2 - 4.0 * q.a4
}

/// Condition set A: `a₁, a₂, a₃ > 0`, `a₄ ≥ 0`, `a₂ ≥ (a₁²a₄ + a₃²)/(a₁a₃)`.
pub fn condition_a(q: &QuarticCoeffs) -> bool {
    q.a1 > 0.0 && q.a2 > 0.0 && q.a3 > 0.0 && q.a4 >= 0.0 && q.a2 >= (q.a1 * q.a1 * q.a4 + q.a3 * q.a3) / (q.a1 * q.a3)
}

/// Condition set B: `a₁ = a₃ = 0`, `a₂ > 0`, `a₄ > 0`, `a₂ > 2√a₄`.
pub fn condition_b(q: &QuarticCoeffs) -> bool {
    q.a1 == 0.0 && q.a3 == 0.0 && q.a2 > 0.0 && q.a4 > 0.0 && q.a2 > 2.0 * q.a4.sqrt()
}

fn in_band(x: f64, magnitude: f64, tol: f64) -> bool {
    x.abs() <= tol * magnitude
}

/// Root-size scale `max |aᵢ|^{1/i}`; `aᵢ` is compared against `scaleⁱ`.
fn root_scale(q: &QuarticCoeffs) -> f64 {
    q.as_array().iter().enumerate().map(|(i, a)| a.abs().powf(1.0 / (i + 1) as f64)).fold(0.0, f64::max)
}

/// Exact stability classification from the coefficients.
///
/// `tol` is the relative half-width of the band around every defining
/// equality (`aᵢ = 0`, `H = 0`, `a₂² = 4a₄`, and the Routh pivot). Each
/// quantity is measured against the size of the terms it is built from,
/// and `aᵢ` against `ρⁱ` with `ρ = max |aⱼ|^{1/j}`. Points
/// inside the band are handed to [`root_oracle`] and flagged
/// `boundary_resolved`. Exactly degenerate coefficients (undamped systems
/// produce `a₁ = a₃ = 0` identically) are classified analytically.
pub fn hurwitz_verdict(q: &QuarticCoeffs, tol: f64) -> Result<StabilityVerdict> {
    if !q.is_finite() {
        return Err(Error::NonFinite("quartic coefficient"));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!("band must be non-negative, got {tol}")));
    }
    let QuarticCoeffs { a1, a2, a3, a4 } = *q;
    let fallback = || {
        let real_tol = BAND_REAL_PART_TOL * root_scale(q).max(f64::MIN_POSITIVE);
        let mut v = census_with(&quartic_roots(q), real_tol, REPEATED_ROOT_TOL);
        v.boundary_resolved = true;
        v
    };

    if a1 == 0.0 && a3 == 0.0 {
        return Ok(biquadratic_verdict(a2, a4, tol).unwrap_or_else(fallback));
    }
    let rho = root_scale(q);
    let coeff_in_band = |i: i32, a: f64| in_band(a, rho.powi(i), tol);

    let h = marginal_h(q);
    let h_mag = (a1 * a1 * a4).abs() + a3 * a3 + (a1 * a2 * a3).abs();
    let positive = |i: i32, a: f64| a > 0.0 && !coeff_in_band(i, a);
    let h_negative = h < 0.0 && !in_band(h, h_mag, tol);

    // Marginal border cases of condition set A, reachable only with exact zeros.
    if positive(1, a1) && positive(2, a2) && positive(3, a3) {
        if a4 == 0.0 && h_negative {
            return Ok(StabilityVerdict::from_counts(3, 1, 0, false));
        }
        if h == 0.0 && positive(4, a4) {
            return Ok(StabilityVerdict::from_counts(2, 2, 0, false));
        }
        if a4 == 0.0 && h == 0.0 {
            return Ok(StabilityVerdict::from_counts(1, 3, 0, false));
        }
    }

    let pivot = a1 * a2 - a3;
    let pivot_mag = (a1 * a2).abs() + a3.abs();
    if [a1, a2, a3, a4].iter().zip(1..).any(|(&a, i)| coeff_in_band(i, a))
        || in_band(h, h_mag, tol)
        || in_band(pivot, pivot_mag, tol)
    {
        return Ok(fallback());
    }

    if a1 > 0.0 && a2 > 0.0 && a3 > 0.0 && a4 > 0.0 {
        // At least two roots lie in the left half-plane; H decides the rest.
        return Ok(if h < 0.0 {
            StabilityVerdict::from_counts(4, 0, 0, false)
        } else {
            StabilityVerdict::from_counts(2, 0, 2, false)
        });
    }

    // Routh array first column: 1, a₁, (a₁a₂ − a₃)/a₁, −H/(a₁a₂ − a₃), a₄.
    let column = [1.0, a1, pivot / a1, -h / pivot, a4];
    let right = column.windows(2).filter(|w| w[0].signum() != w[1].signum()).count() as u8;
    Ok(StabilityVerdict::from_counts(4 - right, 0, right, false))
}

/// `λ⁴ + a₂λ² + a₄` with `s = λ²`. Returns `None` inside the band.
fn biquadratic_verdict(a2: f64, a4: f64, tol: f64) -> Option<StabilityVerdict> {
    let disc = a2 * a2 - 4.0 * a4;
    let disc_mag = a2 * a2 + 4.0 * a4.abs();
    if disc == 0.0 {
        // Double root s = −a₂/2.
        return Some(if a2 > 0.0 {
            StabilityVerdict::from_counts(0, 4, 0, true)
        } else if a2 < 0.0 {
            StabilityVerdict::from_counts(2, 0, 2, false)
        } else {
            StabilityVerdict::from_counts(0, 4, 0, true)
        });
    }
    if in_band(disc, disc_mag, tol) {
        return None;
    }
    if disc < 0.0 {
        // s complex: λ forms a symmetric quadruple off both axes.
        return Some(StabilityVerdict::from_counts(2, 0, 2, false));
    }
    if a4 == 0.0 {
        // λ²(λ² + a₂): double root at the origin.
        return Some(if a2 > 0.0 {
            StabilityVerdict::from_counts(0, 4, 0, true)
        } else {
            StabilityVerdict::from_counts(1, 2, 1, true)
        });
    }
    if in_band(a4, a2 * a2, tol) {
        return None;
    }
    let root = disc.sqrt();
    let s1 = if a2 >= 0.0 { -(a2 + root) / 2.0 } else { (-a2 + root) / 2.0 };
    let s2 = a4 / s1;
    let (mut left, mut imag, mut right) = (0u8, 0u8, 0u8);
    for s in [s1, s2] {
        if s < 0.0 {
            imag += 2;
        } else {
            left += 1;
            right += 1;
        }
    }
    Some(StabilityVerdict::from_counts(left, imag, right, false))
}

/// All four roots. Biquadratics are solved in closed form through `s = λ²`,
/// which keeps the `±λ` pairing exact; other quartics use the companion
/// matrix polished by Newton steps.
pub fn quartic_roots(q: &QuarticCoeffs) -> [Complex64; 4] {
    if q.a1 == 0.0 && q.a3 == 0.0 {
        return biquadratic_roots(q.a2, q.a4);
    }
    #[rustfmt::skip]
    let companion = DMatrix::from_row_slice(4, 4, &[
        0.0, 0.0, 0.0, -q.a4,
        1.0, 0.0, 0.0, -q.a3,
        0.0, 1.0, 0.0, -q.a2,
        0.0, 0.0, 1.0, -q.a1,
    ]);
    let eig = eigenvalues(&companion);
    let mut roots = [eig[0], eig[1], eig[2], eig[3]];
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let p = q.eval(*z);
            let dp = q.eval_derivative(*z);
            if dp.norm() == 0.0 {
                break;
            }
            let candidate = *z - p / dp;
            if q.eval(candidate).norm() < p.norm() {
                *z = candidate;
            } else {
                break;
            }
        }
    }
    // Real coefficients: snap conjugate pairs so the census is symmetric.
    for z in roots.iter_mut() {
        if z.im.abs() < 1e-14 * (1.0 + z.re.abs()) {
            z.im = 0.0;
        }
    }
    roots
}

fn biquadratic_roots(a2: f64, a4: f64) -> [Complex64; 4] {
    let disc = Complex64::new(a2 * a2 - 4.0 * a4, 0.0).sqrt();
    let s1 = if a2 >= 0.0 { -(a2 + disc) / 2.0 } else { (-a2 + disc) / 2.0 };
    let s2 = if s1.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { a4 / s1 };
    let (r1, r2) = (s1.sqrt(), s2.sqrt());
    [r1, -r1, r2, -r2]
}

/// Root census with real-part threshold `tol`; imaginary-axis roots closer
/// than `tol` to each other are reported as repeated.
pub fn root_oracle(q: &QuarticCoeffs, tol: f64) -> StabilityVerdict {
    census(&quartic_roots(q), tol)
}

/// Census of an arbitrary root list of length four.
pub fn census(roots: &[Complex64; 4], tol: f64) -> StabilityVerdict {
    census_with(roots, tol, tol)
}

/// Census with separate thresholds for the real part and for the distance
/// between imaginary-axis roots.
pub fn census_with(roots: &[Complex64; 4], real_tol: f64, repeat_tol: f64) -> StabilityVerdict {
    let tol = real_tol;
    let (mut left, mut imag, mut right) = (0u8, 0u8, 0u8);
    let mut on_axis = Vec::with_capacity(4);
    for z in roots {
        if z.re < -tol {
            left += 1;
        } else if z.re > tol {
            right += 1;
        } else {
            imag += 1;
            on_axis.push(*z);
        }
    }
    let repeated =
        on_axis.iter().enumerate().any(|(i, a)| on_axis[i + 1..].iter().any(|b| (a - b).norm() < repeat_tol));
    StabilityVerdict::from_counts(left, imag, right, repeated)
}

/// Outcome of a randomized comparison of [`hurwitz_verdict`] with [`root_oracle`].
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub samples: usize,
    pub compared: usize,
    pub skipped_near_boundary: usize,
    pub disagreements: usize,
    pub first_disagreement: Option<QuarticCoeffs>,
}

/// Draws `samples` quartics with coefficients uniform in `[-range, range]`
/// and counts census disagreements between the two routes at points farther
/// than `10·band` from every defining equality.
pub fn oracle_equivalence(
    samples: usize,
    seed: u64,
    range: f64,
    band: f64,
    oracle_tol: f64,
    exec: Exec,
) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<QuarticCoeffs> = (0..samples)
        .map(|_| QuarticCoeffs {
            a1: rng.random_range(-range..=range),
            a2: rng.random_range(-range..=range),
            a3: rng.random_range(-range..=range),
            a4: rng.random_range(-range..=range),
        })
        .collect();
    let outcomes = par_map(exec, &points, |q| {
        let far = q.as_array().iter().all(|a| a.abs() > 10.0 * band)
            && marginal_h(q).abs() > 10.0 * band
            && biquadratic_discriminant(q).abs() > 10.0 * band;
        if !far {
            return None;
        }
        let exact = hurwitz_verdict(q, band).expect("finite sample");
        let oracle = root_oracle(q, oracle_tol);
        Some(exact.same_census(&oracle))
    });
    let mut report =
        OracleReport { samples, compared: 0, skipped_near_boundary: 0, disagreements: 0, first_disagreement: None };
    for (q, outcome) in points.iter().zip(outcomes) {
        match outcome {
            None => report.skipped_near_boundary += 1,
            Some(agree) => {
                report.compared += 1;
                if !agree {
                    report.disagreements += 1;
                    report.first_disagreement.get_or_insert(*q);
                }
            }
        }
    }
    report
}
