//! Small dense kernels shared by the form evaluator, the frame builder and the
//! Stiefel optimizer. Minors are at most 12×12, so everything works on flat
//! row-major buffers without allocation in the hot loops.

use nalgebra::DMatrix;

pub(crate) const MAX_MINOR: usize = 12;

/// Determinant of the row-major `k×k` matrix in `buf` by LU with partial
/// pivoting. `buf` is overwritten.
pub(crate) fn det_in_place(buf: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..k {
        let mut piv = col;
        let mut best = buf[col * k + col].abs();
        for row in col + 1..k {
            let v = buf[row * k + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..k {
                buf.swap(col * k + j, piv * k + j);
            }
            det = -det;
        }
        let p = buf[col * k + col];
        det *= p;
        for row in col + 1..k {
            let factor = buf[row * k + col] / p;
            if factor != 0.0 {
                for j in col + 1..k {
                    buf[row * k + j] -= factor * buf[col * k + j];
                }
            }
        }
    }
    det
}

/// Determinant of a row-major `k×k` matrix.
pub(crate) fn det(m: &[f64], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            let mut buf = [0.0; MAX_MINOR * MAX_MINOR];
            buf[..k * k].copy_from_slice(&m[..k * k]);
            det_in_place(&mut buf[..k * k], k)
        }
    }
}

/// Cofactor matrix of the row-major `k×k` matrix `m`, written into `out`
/// (`out[i*k+j] = ∂det/∂m[i][j]`). Returns the determinant.
///
/// Every cofactor is an explicit `(k-1)`-minor, so singular inputs are fine.
pub(crate) fn cofactors(m: &[f64], k: usize, out: &mut [f64]) -> f64 {
    match k {
        0 => 1.0,
        1 => {
            out[0] = 1.0;
            m[0]
        }
        2 => {
            out[0] = m[3];
            out[1] = -m[2];
            out[2] = -m[1];
            out[3] = m[0];
            m[0] * m[3] - m[1] * m[2]
        }
        _ => {
            let km = k - 1;
            let mut sub = [0.0; MAX_MINOR * MAX_MINOR];
            for i in 0..k {
                for j in 0..k {
                    let mut idx = 0;
                    for r in (0..k).filter(|&r| r != i) {
                        for c in (0..k).filter(|&c| c != j) {
                            sub[idx] = m[r * k + c];
                            idx += 1;
                        }
                    }
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    out[i * k + j] = sign * det(&sub[..km * km], km);
                }
            }
            (0..k).map(|j| m[j] * out[j]).sum()
        }
    }
}

/// Thin QR retraction onto the Stiefel manifold: the Q factor of `a`, with
/// column signs chosen so that R has a nonnegative diagonal.
pub(crate) fn qr_retract(a: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = a.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Extends the orthonormal columns of `cols` to an orthonormal basis of
/// `R^dim` by Gram-Schmidt over the standard basis vectors.
pub(crate) fn complete_orthonormal(cols: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let mut basis: Vec<nalgebra::DVector<f64>> =
        cols.column_iter().map(|c| c.into_owned()).collect();
    let mut candidate = 0;
    while basis.len() < dim && candidate < dim {
        let mut v = nalgebra::DVector::<f64>::zeros(dim);
        v[candidate] = 1.0;
        candidate += 1;
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v.axpy(-proj, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / norm);
        }
    }
    DMatrix::from_columns(&basis)
}

/// Symmetric inverse square root of a symmetric positive definite matrix.
pub(crate) fn sym_inv_sqrt(g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = g.clone().symmetric_eigen();
    let d = eig
        .eigenvalues
        .map(|v: f64| 1.0 / v.sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Max-norm of the entrywise difference of two equally shaped matrices.
#[cfg(test)]
pub(crate) fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_det(m: &[f64], k: usize) -> f64 {
        // Leibniz over all permutations
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(k - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, k - 1);
                    out.push(q);
                }
            }
            out
        }
        perms(k)
            .into_iter()
            .map(|p| {
                let mut inv = 0;
                for i in 0..k {
                    for j in i + 1..k {
                        if p[i] > p[j] {
                            inv += 1;
                        }
                    }
                }
                let s = if inv % 2 == 0 { 1.0 } else { -1.0 };
                s * (0..k).map(|i| m[i * k + p[i]]).product::<f64>()
            })
            .sum()
    }

    #[test]
    fn lu_det_matches_leibniz() {
        let m: Vec<f64> = (0..25).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        for k in 1..=5 {
            let sub: Vec<f64> = (0..k * k).map(|i| m[i]).collect();
            assert!((det(&sub, k) - brute_det(&sub, k)).abs() < 1e-9);
        }
    }

    #[test]
    fn cofactors_expand_determinant_along_every_row() {
        let m = [2.0, -1.0, 0.5, 3.0, 0.0, 1.0, -2.0, 4.0, 1.5, 0.25, -3.0, 2.0, 1.0, 1.0, 0.0, -1.0];
        let mut c = [0.0; 16];
        let d = cofactors(&m, 4, &mut c);
        for row in 0..4 {
            let e: f64 = (0..4).map(|j| m[row * 4 + j] * c[row * 4 + j]).sum();
            assert!((e - d).abs() < 1e-12);
        }
        assert!((d - brute_det(&m, 4)).abs() < 1e-12);
    }

    #[test]
    fn singular_cofactors_are_finite() {
        let m = [1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0];
        let mut c = [0.0; 9];
        let d = cofactors(&m, 3, &mut c);
        assert_eq!(d, 0.0);
        assert!(c.iter().any(|v| *v != 0.0));
    }

    #[test]
    fn completion_is_orthogonal() {
        let v = DMatrix::from_column_slice(4, 1, &[0.5, 0.5, 0.5, 0.5]);
        let q = complete_orthonormal(&v, 4);
        let gram = q.transpose() * &q;
        assert!(max_abs_diff(&gram, &DMatrix::identity(4, 4)) < 1e-12);
        assert!(max_abs_diff(&q.columns(0, 1).into_owned(), &v) < 1e-15);
    }

    #[test]
    fn retraction_keeps_span_orientation() {
        let a = DMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.0, -3.0, 0.0, 0.0]);
        let q = qr_retract(&a);
        assert!((q[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((q[(1, 1)] + 1.0).abs() < 1e-15);
    }
}
