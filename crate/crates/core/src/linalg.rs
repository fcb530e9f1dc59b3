//! Small dense helpers shared by the geometry and relaxation modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Hermitian Toeplitz matrix `R_pq = c_{p-q}` with `c_{-k} = conj(c_k)`.
pub fn hermitian_toeplitz(coeffs: &[Complex64], n: usize) -> DMatrix<Complex64> {
    assert!(n <= coeffs.len(), "toeplitz order exceeds coefficient count");
    let m = DMatrix::from_fn(n, n, |p, q| {
        if p >= q {
            coeffs[p - q]
        } else {
            coeffs[q - p].conj()
        }
    });
    debug_assert!(is_hermitian(&m, 1e-12));
    m
}

pub fn is_hermitian(m: &DMatrix<Complex64>, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    (0..m.nrows()).all(|i| {
        (0..=i).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol * scale)
    })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn symmetric_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Replace `m` by `(m + mᵀ) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Real embedding `[[Re H, −Im H], [Im H, Re H]]` of a complex matrix.
pub fn real_embedding(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let k = h.nrows();
    DMatrix::from_fn(2 * k, 2 * k, |i, j| {
        let z = h[(i % k, j % k)];
        match (i < k, j < k) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Hermitian matrix `(Y₁₁ + Y₂₂) + i(Y₂₁ − Y₁₂)` read from a real symmetric
/// `2k × 2k` block. PSD whenever `Y` is; left inverse of `2 ·` [`real_embedding`].
pub fn hermitian_from_real_block(y: &DMatrix<f64>) -> DMatrix<Complex64> {
    let k = y.nrows() / 2;
    DMatrix::from_fn(k, k, |p, q| {
        Complex64::new(
            y[(p, q)] + y[(k + p, k + q)],
            y[(k + p, q)] - y[(p, k + q)],
        )
    })
}
