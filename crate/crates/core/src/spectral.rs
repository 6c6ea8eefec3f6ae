//! Spectral kernels: Hermitian eigendecomposition (cyclic complex
//! Jacobi), positive-semidefiniteness checks, PSD square roots and
//! polar decompositions.
//!
//! Everything here is deterministic: fixed sweep order, fixed
//! tie-breaking, no randomized pivoting. Matrices at desk scale
//! (dimension ≤ a few hundred) converge in a handful of sweeps.

use crate::matrix::{ComplexMatrix, MatrixError};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("rank-deficient input where full column rank is required")]
    RankDeficient,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type SpectralResult<T> = Result<T, SpectralError>;

const JACOBI_SWEEPS: usize = 64;
const JACOBI_EPS: f64 = 1e-14;

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns `(values, vectors)` with eigenvalues ascending and the
/// columns of `vectors` the matching orthonormal eigenvectors, so that
/// `m = vectors · diag(values) · vectors†`.
pub fn hermitian_eig(m: &ComplexMatrix) -> SpectralResult<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(MatrixError::ShapeMismatch(format!("eig of {}x{}", m.rows(), m.cols())).into());
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.max_norm().max(1.0);

    for _sweep in 0..JACOBI_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= JACOBI_EPS * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r <= JACOBI_EPS * scale {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let phase = apq / r;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Unitary rotation U: e_p ↦ c·e_p − s·conj(phase)·e_q,
                //                     e_q ↦ s·phase·e_p + c·e_q.
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = s * phase;
                let u_qp = -s * phase.conj();
                let u_qq = Complex64::new(c, 0.0);

                // A ← U† A U, applied as row then column updates.
                for j in 0..n {
                    let ap = a.get(p, j);
                    let aq = a.get(q, j);
                    a.set(p, j, u_pp.conj() * ap + u_qp.conj() * aq);
                    a.set(q, j, u_pq.conj() * ap + u_qq.conj() * aq);
                }
                for i in 0..n {
                    let ap = a.get(i, p);
                    let aq = a.get(i, q);
                    a.set(i, p, ap * u_pp + aq * u_qp);
                    a.set(i, q, ap * u_pq + aq * u_qq);
                }
                for i in 0..n {
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, vp * u_pp + vq * u_qp);
                    v.set(i, q, vp * u_pq + vq * u_qq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let values: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Ok((sorted_values, vectors))
}

/// Hermiticity residual ‖M − M†‖_max.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    m.max_diff(&m.adjoint())
}

/// Positive-semidefiniteness test: Hermitian within `tol` and minimum
/// eigenvalue ≥ −`tol`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> bool {
    if !m.is_square() || hermiticity_residual(m) > tol {
        return false;
    }
    match hermitian_eig(&symmetrize(m)) {
        Ok((values, _)) => values.first().is_none_or(|&lo| lo >= -tol),
        Err(_) => false,
    }
}

/// Minimum eigenvalue of the Hermitian part; the PSD residual reported
/// by validators (negative means a PSD violation of that size).
pub fn min_eigenvalue(m: &ComplexMatrix) -> SpectralResult<f64> {
    let (values, _) = hermitian_eig(&symmetrize(m))?;
    Ok(values.first().copied().unwrap_or(0.0))
}

fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    m.add(&m.adjoint()).unwrap().scale(Complex64::new(0.5, 0.0))
}

/// Unique PSD square root of a numerically PSD Hermitian matrix.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero; anything below
/// `-tol` is an error.
pub fn hermitian_sqrt(m: &ComplexMatrix, tol: f64) -> SpectralResult<ComplexMatrix> {
    let herm = hermiticity_residual(m);
    if herm > tol {
        return Err(SpectralError::NotHermitian(herm));
    }
    let (values, vectors) = hermitian_eig(&symmetrize(m))?;
    if let Some(&lo) = values.first() {
        if lo < -tol {
            return Err(SpectralError::NotPsd(lo));
        }
    }
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        let root = lambda.max(0.0).sqrt();
        if root == 0.0 {
            continue;
        }
        for r in 0..n {
            for c in 0..n {
                let v = out.get(r, c) + vectors.get(r, k) * vectors.get(c, k).conj() * root;
                out.set(r, c, v);
            }
        }
    }
    Ok(out)
}

/// Polar factorisation `m = isometry · positive`.
#[derive(Clone, Debug)]
pub struct Polar {
    /// `rows × cols` matrix with orthonormal columns.
    pub isometry: ComplexMatrix,
    /// `cols × cols` PSD factor, the square root of `m† m`.
    pub positive: ComplexMatrix,
    /// True when the positive factor is singular and the isometry had
    /// to be completed on the null space.
    pub rank_deficient: bool,
}

/// Strict polar decomposition; rejects rank-deficient input.
pub fn polar_decompose(m: &ComplexMatrix, tol: f64) -> SpectralResult<Polar> {
    let polar = polar_decompose_completed(m, tol)?;
    if polar.rank_deficient {
        return Err(SpectralError::RankDeficient);
    }
    Ok(polar)
}

/// Polar decomposition that tolerates singular positive parts by
/// extending the isometry deterministically: null-space columns are
/// filled by Gram–Schmidt against the standard basis in index order.
pub fn polar_decompose_completed(m: &ComplexMatrix, tol: f64) -> SpectralResult<Polar> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows < cols {
        return Err(MatrixError::ShapeMismatch(format!(
            "polar of {}x{}: more columns than rows",
            rows, cols
        ))
        .into());
    }
    let gram = m.adjoint().matmul(m)?;
    let (values, w) = hermitian_eig(&symmetrize(&gram))?;
    let sigma: Vec<f64> = values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max).max(1.0);
    let rank_tol = tol.max(1e-13) * sigma_max;

    // positive = W Σ W†
    let mut positive = ComplexMatrix::zeros(cols, cols);
    for k in 0..cols {
        if sigma[k] == 0.0 {
            continue;
        }
        for r in 0..cols {
            for c in 0..cols {
                let v = positive.get(r, c) + w.get(r, k) * w.get(c, k).conj() * sigma[k];
                positive.set(r, c, v);
            }
        }
    }

    // Left singular vectors u_k = M w_k / σ_k where defined.
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    let mut deficient = false;
    for k in 0..cols {
        if sigma[k] > rank_tol {
            let mut col = vec![Complex64::new(0.0, 0.0); rows];
            for r in 0..rows {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..cols {
                    acc += m.get(r, j) * w.get(j, k);
                }
                col[r] = acc / sigma[k];
            }
            u_cols.push(col);
        } else {
            deficient = true;
            u_cols.push(Vec::new()); // placeholder, filled below
        }
    }
    if deficient {
        complete_columns(&mut u_cols, rows);
    }

    // isometry = U W†
    let isometry = ComplexMatrix::from_fn(rows, cols, |r, c| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..cols {
            acc += u_cols[k][r] * w.get(c, k).conj();
        }
        acc
    });
    Ok(Polar {
        isometry,
        positive,
        rank_deficient: deficient,
    })
}

/// Fill empty slots with unit vectors orthogonal to every present
/// column, taken from the standard basis in index order.
fn complete_columns(cols: &mut [Vec<Complex64>], dim: usize) {
    for slot in 0..cols.len() {
        if !cols[slot].is_empty() {
            continue;
        }
        'candidates: for e in 0..dim {
            let mut cand = vec![Complex64::new(0.0, 0.0); dim];
            cand[e] = Complex64::new(1.0, 0.0);
            for other in cols.iter().filter(|c| !c.is_empty()) {
                let overlap: Complex64 = other
                    .iter()
                    .zip(cand.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for (c, o) in cand.iter_mut().zip(other.iter()) {
                    *c -= overlap * o;
                }
            }
            let norm: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for z in cand.iter_mut() {
                    *z /= norm;
                }
                cols[slot] = cand;
                break 'candidates;
            }
        }
        assert!(
            !cols[slot].is_empty(),
            "failed to complete orthonormal basis"
        );
    }
}

/// Checks `m† m = 1` within `tol`.
pub fn is_isometry(m: &ComplexMatrix, tol: f64) -> bool {
    match m.adjoint().matmul(m) {
        Ok(gram) => gram.max_diff(&ComplexMatrix::identity(m.cols())) <= tol,
        Err(_) => false,
    }
}

/// Extend the columns of an isometry `V : C^c → C^r` to a full unitary
/// on `C^r`, deterministically (Gram–Schmidt against the standard
/// basis in index order). The first `c` columns of the result are `V`.
pub fn unitary_completion(v: &ComplexMatrix) -> SpectralResult<ComplexMatrix> {
    let (rows, cols) = (v.rows(), v.cols());
    if rows < cols {
        return Err(MatrixError::ShapeMismatch(format!(
            "completion of {}x{}: more columns than rows",
            rows, cols
        ))
        .into());
    }
    let mut all: Vec<Vec<Complex64>> = (0..cols)
        .map(|c| (0..rows).map(|r| v.get(r, c)).collect())
        .chain((cols..rows).map(|_| Vec::new()))
        .collect();
    complete_columns(&mut all, rows);
    Ok(ComplexMatrix::from_fn(rows, rows, |r, c| all[c][r]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    #[test]
    fn eig_reconstructs_hermitian_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..7 {
            let g = random_matrix(&mut rng, n, n);
            let h = g.add(&g.adjoint()).unwrap();
            let (values, vectors) = hermitian_eig(&h).unwrap();
            let mut recon = ComplexMatrix::zeros(n, n);
            for (k, &l) in values.iter().enumerate() {
                for r in 0..n {
                    for c in 0..n {
                        let v = recon.get(r, c) + vectors.get(r, k) * vectors.get(c, k).conj() * l;
                        recon.set(r, c, v);
                    }
                }
            }
            assert!(h.approx_eq(&recon, 1e-11), "n={n}");
            assert!(is_isometry(&vectors, 1e-11));
            assert!(values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn sqrt_of_scaled_identity() {
        let four = ComplexMatrix::identity(2).scale(Complex64::new(4.0, 0.0));
        let root = hermitian_sqrt(&four, 1e-10).unwrap();
        assert!(root.approx_eq(
            &ComplexMatrix::identity(2).scale(Complex64::new(2.0, 0.0)),
            1e-12
        ));
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..6 {
            let g = random_matrix(&mut rng, n, n);
            let psd = g.adjoint().matmul(&g).unwrap();
            let root = hermitian_sqrt(&psd, 1e-9).unwrap();
            assert!(root.matmul(&root).unwrap().approx_eq(&psd, 1e-10));
        }
    }

    #[test]
    fn sqrt_rejects_negative() {
        let m = ComplexMatrix::from_real(&[&[-1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            hermitian_sqrt(&m, 1e-10),
            Err(SpectralError::NotPsd(_))
        ));
    }

    #[test]
    fn random_gram_matrices_are_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = random_matrix(&mut rng, 4, 4);
            assert!(is_psd(&g.adjoint().matmul(&g).unwrap(), 1e-10));
        }
    }

    #[test]
    fn polar_of_positive_diagonal_is_trivial() {
        let d = ComplexMatrix::from_real(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let p = polar_decompose(&d, 1e-10).unwrap();
        assert!(p.isometry.approx_eq(&ComplexMatrix::identity(2), 1e-12));
        assert!(p.positive.approx_eq(&d, 1e-12));
        assert!(!p.rank_deficient);
    }

    #[test]
    fn polar_reassembles_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 4, 4);
            let p = polar_decompose_completed(&m, 1e-10).unwrap();
            assert!(is_isometry(&p.isometry, 1e-10));
            assert!(is_psd(&p.positive, 1e-9));
            assert!(p.isometry.matmul(&p.positive).unwrap().approx_eq(&m, 1e-9));
        }
    }

    #[test]
    fn polar_completes_singular_input_deterministically() {
        let m = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let p = polar_decompose_completed(&m, 1e-10).unwrap();
        assert!(p.rank_deficient);
        assert!(is_isometry(&p.isometry, 1e-10));
        assert!(p.isometry.matmul(&p.positive).unwrap().approx_eq(&m, 1e-10));
        assert!(matches!(
            polar_decompose(&m, 1e-10),
            Err(SpectralError::RankDeficient)
        ));
        let again = polar_decompose_completed(&m, 1e-10).unwrap();
        assert!(p.isometry.approx_eq(&again.isometry, 0.0));
    }

    #[test]
    fn unitary_completion_extends_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 6, 2);
        let p = polar_decompose_completed(&m, 1e-10).unwrap();
        let w = unitary_completion(&p.isometry).unwrap();
        assert!(is_isometry(&w, 1e-10));
        assert_eq!((w.rows(), w.cols()), (6, 6));
        for c in 0..2 {
            for r in 0..6 {
                assert!((w.get(r, c) - p.isometry.get(r, c)).norm() < 1e-12);
            }
        }
    }
}
