use nalgebra::{DMatrix, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{HullError, Result};

/// Largest matrix handed to the dense eigensolver.
pub const MAX_EIGEN_DIM: usize = 2000;

/// Iteration budget passed to the QR-type solvers (per unit of dimension).
const QR_ITERATIONS_PER_DIM: usize = 60;

fn is_real(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn is_hermitian(m: &DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (i..n).all(|j| m[(i, j)] == m[(j, i)].conj()))
}

fn real_part(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Singular values of a dense complex matrix, descending.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let sv = if is_real(m) {
        SVD::new(real_part(m), false, false).singular_values
    } else {
        SVD::new(m.clone(), false, false).singular_values
    };
    let mut out: Vec<f64> = sv.iter().copied().collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// ‖M‖₂.
pub fn sigma_max(m: &DMatrix<Complex64>) -> f64 {
    if m.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// σ_min by full singular value decomposition.
pub fn smallest_singular_value_dense(m: &DMatrix<Complex64>) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Orders complex numbers by (re, im) with a total order on each part.
pub fn sort_complex(points: &mut [Complex64]) {
    points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// All eigenvalues with multiplicity, sorted by (re, im).
///
/// Hermitian input goes through the symmetric QR algorithm, everything else
/// through a Schur decomposition (real or complex).
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(HullError::Domain("eigenvalues of a non-square matrix".into()));
    }
    if n > MAX_EIGEN_DIM {
        return Err(HullError::Resource(format!("matrix of size {n} exceeds {MAX_EIGEN_DIM}")));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let budget = QR_ITERATIONS_PER_DIM * n.max(10);
    let eps = f64::EPSILON;
    let mut out: Vec<Complex64> = match (is_real(m), is_hermitian(m)) {
        (true, true) => SymmetricEigen::try_new(real_part(m), eps, budget)
            .ok_or(HullError::NoConvergence { budget })?
            .eigenvalues
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect(),
        (false, true) => SymmetricEigen::try_new(m.clone(), eps, budget)
            .ok_or(HullError::NoConvergence { budget })?
            .eigenvalues
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect(),
        (true, false) => Schur::try_new(real_part(m), eps, budget)
            .ok_or(HullError::NoConvergence { budget })?
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect(),
        (false, false) => {
            let schur = Schur::try_new(m.clone(), eps, budget).ok_or(HullError::NoConvergence { budget })?;
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
    };
    sort_complex(&mut out);
    Ok(out)
}
