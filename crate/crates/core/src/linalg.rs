use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

/// Eigenvalues of a real square matrix.
///
/// The unbounded `Schur::new` iteration can stall on matrices with exact
/// symmetric spectra (companion matrices of biquadratics, for example).
/// The decomposition is run with an iteration cap and, on failure, repeated
/// on `A + σI` for a few real shifts `σ`, which moves the spectrum off the
/// stalling configuration without changing the eigenvectors.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigenvalues of a non-square matrix");
    if n == 0 {
        return Vec::new();
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let max_iter = 200 * n;
    for shift in [0.0, 0.1, -0.23, 0.37, -0.61, 1.3] {
        let sigma = shift * scale;
        let shifted = a + DMatrix::identity(n, n) * sigma;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, max_iter) {
            return schur.complex_eigenvalues().iter().map(|z| Complex64::new(z.re - sigma, z.im)).collect();
        }
    }
    panic!("Schur iteration failed to converge for every shift");
}
