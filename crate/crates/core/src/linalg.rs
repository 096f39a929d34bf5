//! Dense linear-algebra kernels shared by the propagators and the master
//! equation: matrix exponential, sorted Hermitian eigendecompositions, and a
//! general complex eigensolver (Schur form plus triangular back-substitution)
//! used for Liouvillian spectra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("Schur iteration failed to converge")]
    SchurFailed,
    #[error("linear solve failed (singular matrix)")]
    Singular,
    #[error("eigenvector basis is numerically defective (residual {residual:.3e})")]
    Defective { residual: f64 },
}

pub fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by Pade(13) with scaling and squaring.
pub fn expm(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    const THETA_13: f64 = 5.371920351148152;
    #[rustfmt::skip]
    const B: [f64; 14] = [
        64_764_752_532_480_000.0, 32_382_376_266_240_000.0, 7_771_770_303_897_600.0,
        1_187_353_796_428_800.0, 129_060_195_264_000.0, 10_559_470_521_600.0,
        670_442_572_800.0, 33_522_128_640.0, 1_323_241_920.0, 40_840_800.0,
        960_960.0, 16_380.0, 182.0, 1.0,
    ];
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a = a / Complex64::from(2f64.powi(s as i32));

    let b = |k: usize| Complex64::from(B[k]);
    let eye = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &eye * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &eye * b(0);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut f = lhs.lu().solve(&rhs).ok_or(LinalgError::Singular)?;
    for _ in 0..s {
        f = &f * &f;
    }
    Ok(f)
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Eigenvalues (ascending) and eigenvectors of a complex Hermitian matrix.
pub fn hermitian_eigen_sorted(m: &DMatrix<Complex64>) -> (DVector<f64>, DMatrix<Complex64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Full eigendecomposition of a general complex matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    /// Column k is the (unit-norm) right eigenvector of values[k].
    pub vectors: DMatrix<Complex64>,
}

/// General complex eigendecomposition: Schur form, then back-substitution on
/// the triangular factor. Eigenpairs are sorted by (re, im) for determinism.
pub fn eigen_general(m: &DMatrix<Complex64>) -> Result<Eigen, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    let schur = m
        .clone()
        .try_schur(1.0e-13, 10_000)
        .ok_or(LinalgError::SchurFailed)?;
    let (q, t) = schur.unpack();
    let t_norm = one_norm(&t).max(f64::MIN_POSITIVE);

    let mut values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let lambda = values[i];
        let mut x = DVector::<Complex64>::zeros(n);
        x[i] = Complex64::new(1.0, 0.0);
        for k in (0..i).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in (k + 1)..=i {
                s += t[(k, j)] * x[j];
            }
            let mut denom = t[(k, k)] - lambda;
            if denom.norm() < 1e-15 * t_norm {
                // perturb the divisor for (near-)repeated eigenvalues
                denom = Complex64::new(1e-15 * t_norm, 0.0);
            }
            x[k] = -s / denom;
        }
        let v = &q * x;
        let norm = v.norm();
        vectors.set_column(i, &(v / Complex64::from(norm)));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        (values[a].re, values[a].im)
            .partial_cmp(&(values[b].re, values[b].im))
            .unwrap()
    });
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    values = order.iter().map(|&i| values[i]).collect();
    Ok(Eigen {
        values,
        vectors: sorted_vectors,
    })
}

impl Eigen {
    /// Expansion coefficients of `v0` in the eigenvector basis. Errors when
    /// the basis is numerically defective.
    pub fn coefficients(&self, v0: &DVector<Complex64>) -> Result<DVector<Complex64>, LinalgError> {
        let lu = self.vectors.clone().lu();
        let c = lu.solve(v0).ok_or(LinalgError::Singular)?;
        let residual = (&self.vectors * &c - v0).norm() / v0.norm().max(f64::MIN_POSITIVE);
        if residual > 1e-8 {
            return Err(LinalgError::Defective { residual });
        }
        Ok(c)
    }
}

pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec_of(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    DVector::from_iterator(m.nrows() * m.ncols(), m.iter().cloned())
}

/// Inverse of [`vec_of`] for square matrices.
pub fn unvec(v: &DVector<Complex64>, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_iterator(n, n, v.iter().cloned())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Deterministic pseudo-random complex matrix.
    fn test_matrix(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        DMatrix::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = DMatrix::<Complex64>::zeros(5, 5);
        let e = expm(&z).unwrap();
        assert!((e - DMatrix::<Complex64>::identity(5, 5)).norm() < 1e-14);
    }

    #[test]
    fn expm_matches_scalar_exponential_on_diagonal() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(-0.3, 2.0),
            c(0.1, -1.0),
            c(-2.0, 0.0),
        ]));
        let e = expm(&d).unwrap();
        for i in 0..3 {
            assert!((e[(i, i)] - d[(i, i)].exp()).norm() < 1e-13);
        }
    }

    #[test]
    fn expm_unitary_for_hermitian_generator() {
        let h = {
            let m = test_matrix(8, 7);
            (&m + m.adjoint()) * c(0.5, 0.0)
        };
        let u = expm(&(h * c(0.0, -1.0))).unwrap();
        let eye = DMatrix::<Complex64>::identity(8, 8);
        assert!((u.adjoint() * &u - eye).norm() < 1e-12);
    }

    #[test]
    fn expm_additivity_on_commuting_scalings() {
        // exp(A) exp(A) = exp(2A), exercised through the squaring path
        let a = test_matrix(6, 3) * c(4.0, 0.0);
        let e1 = expm(&a).unwrap();
        let e2 = expm(&(&a * c(2.0, 0.0))).unwrap();
        assert!((&e1 * &e1 - e2).norm() < 1e-9 * one_norm(&e1).powi(2));
    }

    #[test]
    fn general_eigen_reconstructs_matrix_action() {
        for seed in [1, 2, 3] {
            let a = test_matrix(12, seed);
            let eig = eigen_general(&a).unwrap();
            for k in 0..12 {
                let v = eig.vectors.column(k).clone_owned();
                let residual = (&a * &v - &v * eig.values[k]).norm();
                assert!(residual < 1e-10, "seed {seed} col {k}: residual {residual}");
            }
        }
    }

    #[test]
    fn general_eigen_agrees_with_hermitian_solver() {
        let m = test_matrix(10, 11);
        let h = (&m + m.adjoint()) * c(0.5, 0.0);
        let (vals_h, _) = hermitian_eigen_sorted(&h);
        let eig = eigen_general(&h).unwrap();
        for k in 0..10 {
            assert!(eig.values[k].im.abs() < 1e-10);
            assert!((eig.values[k].re - vals_h[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn eigen_expansion_coefficients_solve_initial_value() {
        let a = test_matrix(9, 5);
        let eig = eigen_general(&a).unwrap();
        let v0 = DVector::from_fn(9, |i, _| c(1.0 / (i + 1) as f64, 0.2));
        let coeff = eig.coefficients(&v0).unwrap();
        let rebuilt = &eig.vectors * coeff;
        assert!((rebuilt - v0).norm() < 1e-10);
    }

    #[test]
    fn vec_unvec_round_trip() {
        let m = test_matrix(4, 9);
        assert!((unvec(&vec_of(&m), 4) - &m).norm() < 1e-15);
    }
}
