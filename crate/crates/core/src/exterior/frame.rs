use nalgebra::DMatrix;

use crate::linalg::{cofactors, det, MAX_MINOR};

/// `k` vectors in `R^d`, stored as the columns of a `d×k` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    columns: DMatrix<f64>,
}

impl Frame {
    pub fn new(columns: DMatrix<f64>) -> Self {
        assert!(columns.ncols() <= MAX_MINOR, "frames of more than {MAX_MINOR} vectors");
        Frame { columns }
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn count(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn into_columns(self) -> DMatrix<f64> {
        self.columns
    }

    /// `max |Aᵀ A - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.columns.transpose() * &self.columns;
        let k = self.count();
        let mut err = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((gram[(i, j)] - target).abs());
            }
        }
        err
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        self.orthonormality_error() <= tol
    }

    /// Same plane with the opposite orientation (first column negated).
    pub fn reversed(&self) -> Frame {
        let mut c = self.columns.clone();
        if c.ncols() > 0 {
            c.column_mut(0).neg_mut();
        }
        Frame { columns: c }
    }

    fn gather_rows(&self, mask: u64, buf: &mut [f64]) {
        let k = self.count();
        let mut m = mask;
        let mut r = 0;
        while m != 0 {
            let row = m.trailing_zeros() as usize;
            for c in 0..k {
                buf[r * k + c] = self.columns[(row, c)];
            }
            r += 1;
            m &= m - 1;
        }
    }

    /// `Σ c_I det(rows I)` over `(mask, c)` terms.
    pub(crate) fn pair(&self, terms: &[(u64, f64)]) -> f64 {
        let k = self.count();
        let mut buf = [0.0; MAX_MINOR * MAX_MINOR];
        terms
            .iter()
            .map(|&(mask, c)| {
                self.gather_rows(mask, &mut buf);
                c * det(&buf[..k * k], k)
            })
            .sum()
    }

    /// Value of `Σ c_I det(rows I)` together with its Euclidean gradient in
    /// the frame entries, accumulated from the cofactors of each minor.
    pub(crate) fn pair_with_gradient(&self, terms: &[(u64, f64)], grad: &mut DMatrix<f64>) -> f64 {
        let k = self.count();
        grad.fill(0.0);
        let mut buf = [0.0; MAX_MINOR * MAX_MINOR];
        let mut cof = [0.0; MAX_MINOR * MAX_MINOR];
        let mut value = 0.0;
        for &(mask, c) in terms {
            self.gather_rows(mask, &mut buf);
            value += c * cofactors(&buf[..k * k], k, &mut cof[..k * k]);
            let mut m = mask;
            let mut r = 0;
            while m != 0 {
                let row = m.trailing_zeros() as usize;
                for col in 0..k {
                    grad[(row, col)] += c * cof[r * k + col];
                }
                r += 1;
                m &= m - 1;
            }
        }
        value
    }
}
