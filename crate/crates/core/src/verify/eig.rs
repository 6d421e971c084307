use nalgebra::DMatrix;

use super::VerifyError;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. Sweeps run until the off-diagonal Frobenius norm drops below
/// `1e-12 * (1 + |M|_F)`.
pub fn eig_sym(m: &DMatrix<f64>) -> Result<Vec<f64>, VerifyError> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let scale = m.norm();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * (1.0 + scale) {
                return Err(VerifyError::Asymmetric);
            }
        }
    }
    let mut a = m.clone();
    let tol = 1e-12 * (1.0 + scale);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn identity_and_diagonal() {
        let eye = DMatrix::identity(2, 2);
        assert_eq!(eig_sym(&eye).unwrap(), vec![1.0, 1.0]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[2.0, 1.0]));
        assert_eq!(eig_sym(&d).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn planar_point_matrix_eigenvalues() {
        // [[0, 0.25], [0.25, 0.875]]; 2x2 quadratic-formula oracle:
        // (b +- sqrt(b^2 + 4 a^2)) / 2 with b = 0.875, a = 0.25
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.25, 0.25, 0.875]);
        let eigs = eig_sym(&m).unwrap();
        let b = 0.875f64;
        let disc = (b * b + 4.0 * 0.25 * 0.25).sqrt();
        let lo = (b - disc) / 2.0;
        let hi = (b + disc) / 2.0;
        assert!((eigs[0] - lo).abs() < 1e-12, "{} vs {}", eigs[0], lo);
        assert!((eigs[1] - hi).abs() < 1e-12);
        assert!((eigs[0] - -0.06639).abs() < 5e-6);
        assert!((eigs[1] - 0.94139).abs() < 5e-6);
    }

    #[test]
    fn asymmetric_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(eig_sym(&m), Err(VerifyError::Asymmetric)));
    }

    #[test]
    fn trace_and_determinant_identities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-2.0..2.0));
            let m = (&a + a.transpose()).scale(0.5);
            let eigs = eig_sym(&m).unwrap();
            let trace: f64 = m.trace();
            let det = m.determinant();
            let sum: f64 = eigs.iter().sum();
            let prod: f64 = eigs.iter().product();
            assert!((sum - trace).abs() < 1e-9);
            assert!((prod - det).abs() < 1e-9 * (1.0 + det.abs()));
        }
    }
}
