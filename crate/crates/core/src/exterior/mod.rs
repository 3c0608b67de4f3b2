//! Dense exterior algebra over `R^d`.
//!
//! Coordinates are 0-based: on `R^n × R^m` index `j < n` is `dx_{j+1}` and
//! index `n + α` is `dy_{α+1}`. A degree-`k` form stores one coefficient per
//! increasing multi-index, in lexicographic rank order.

mod frame;
pub mod multi_index;

pub use frame::Frame;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use multi_index::{binomial, from_mask, rank_mask, shuffle_sign, to_mask, Subsets};

/// Largest ambient dimension supported by the mask-based index arithmetic.
pub const MAX_DIM: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NForm {
    ambient_dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl NForm {
    pub fn zero(ambient_dim: usize, degree: usize) -> Self {
        assert!(degree <= ambient_dim && ambient_dim <= MAX_DIM);
        NForm {
            ambient_dim,
            degree,
            coeffs: vec![0.0; binomial(ambient_dim, degree)],
        }
    }

    pub fn from_coeffs(ambient_dim: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if degree > ambient_dim || ambient_dim > MAX_DIM {
            return Err(Error::DimensionMismatch(format!(
                "degree {degree} in ambient dimension {ambient_dim}"
            )));
        }
        let expected = binomial(ambient_dim, degree);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for C({ambient_dim},{degree}) = {expected}",
                coeffs.len()
            )));
        }
        Ok(NForm {
            ambient_dim,
            degree,
            coeffs,
        })
    }

    pub fn scalar(ambient_dim: usize, value: f64) -> Self {
        let mut f = Self::zero(ambient_dim, 0);
        f.coeffs[0] = value;
        f
    }

    /// `dx_{i_1} ∧ … ∧ dx_{i_k}` for an arbitrary index list; repeated
    /// indices give zero, unsorted lists pick up the sorting sign.
    pub fn monomial(ambient_dim: usize, indices: &[usize]) -> Self {
        let mut f = Self::zero(ambient_dim, indices.len());
        let mut mask = 0u64;
        let mut sign = 1.0;
        for &i in indices {
            assert!(i < ambient_dim, "index {i} out of range");
            let bit = 1u64 << i;
            if mask & bit != 0 {
                return f;
            }
            sign *= shuffle_sign(mask, bit);
            mask |= bit;
        }
        f.coeffs[rank_mask(mask, ambient_dim)] = sign;
        f
    }

    /// The 1-form `Σ_i c_i dx_i`.
    pub fn covector(components: &[f64]) -> Self {
        NForm {
            ambient_dim: components.len(),
            degree: 1,
            coeffs: components.to_vec(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, indices: &[usize]) -> f64 {
        self.coeffs[multi_index::rank(indices, self.ambient_dim)]
    }

    pub fn set_coeff(&mut self, indices: &[usize], value: f64) {
        let r = multi_index::rank(indices, self.ambient_dim);
        self.coeffs[r] = value;
    }

    /// `(multi-index, coefficient)` pairs in rank order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        Subsets::new(self.ambient_dim, self.degree).zip(self.coeffs.iter().copied())
    }

    pub(crate) fn nonzero_masks(&self) -> Vec<(u64, f64)> {
        Subsets::new(self.ambient_dim, self.degree)
            .zip(self.coeffs.iter())
            .filter(|(_, c)| **c != 0.0)
            .map(|(idx, c)| (to_mask(&idx), *c))
            .collect()
    }

    fn check_same_space(&self, other: &NForm) -> Result<()> {
        if self.ambient_dim != other.ambient_dim || self.degree != other.degree {
            return Err(Error::DimensionMismatch(format!(
                "Λ^{}(R^{}) vs Λ^{}(R^{})",
                self.degree, self.ambient_dim, other.degree, other.ambient_dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &NForm) -> Result<NForm> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        out.add_assign_scaled(other, 1.0);
        Ok(out)
    }

    pub fn sub(&self, other: &NForm) -> Result<NForm> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        out.add_assign_scaled(other, -1.0);
        Ok(out)
    }

    /// `self += s · other`; panics on mismatched spaces.
    pub fn add_assign_scaled(&mut self, other: &NForm, s: f64) {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        assert_eq!(self.degree, other.degree);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn scale(&self, s: f64) -> NForm {
        NForm {
            ambient_dim: self.ambient_dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Largest coefficientwise deviation; infinite when the spaces differ.
    pub fn max_abs_diff(&self, other: &NForm) -> f64 {
        if self.check_same_space(other).is_err() {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn wedge(&self, other: &NForm) -> Result<NForm> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "wedge of forms on R^{} and R^{}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        let d = self.ambient_dim;
        if self.degree + other.degree > d {
            return Err(Error::DegreeOverflow {
                left: self.degree,
                right: other.degree,
                ambient: d,
            });
        }
        let mut out = NForm::zero(d, self.degree + other.degree);
        let rhs = other.nonzero_masks();
        for (a, ca) in self.nonzero_masks() {
            for &(b, cb) in &rhs {
                if a & b != 0 {
                    continue;
                }
                out.coeffs[rank_mask(a | b, d)] += shuffle_sign(a, b) * ca * cb;
            }
        }
        Ok(out)
    }

    /// Interior product `ι_v a`.
    pub fn interior(&self, v: &[f64]) -> Result<NForm> {
        if self.degree == 0 {
            return Err(Error::DegreeZero);
        }
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against forms on R^{}",
                v.len(),
                self.ambient_dim
            )));
        }
        let d = self.ambient_dim;
        let mut out = NForm::zero(d, self.degree - 1);
        for (mask, c) in self.nonzero_masks() {
            for (pos, i) in from_mask(mask).into_iter().enumerate() {
                if v[i] == 0.0 {
                    continue;
                }
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.coeffs[rank_mask(mask & !(1u64 << i), d)] += sign * v[i] * c;
            }
        }
        Ok(out)
    }

    /// Hodge star on the base factor `R^base` (coordinates `0..base`) with
    /// the standard metric and orientation `dx_1∧…∧dx_base`; the result keeps
    /// the ambient dimension.
    pub fn hodge_star_rn(&self, base: usize) -> Result<NForm> {
        let d = self.ambient_dim;
        if base > d || self.degree > base {
            return Err(Error::SupportOutsideBase { base });
        }
        let base_mask = if base == 64 { u64::MAX } else { (1u64 << base) - 1 };
        let mut out = NForm::zero(d, base - self.degree);
        for (mask, c) in self.nonzero_masks() {
            if mask & !base_mask != 0 {
                return Err(Error::SupportOutsideBase { base });
            }
            let comp = base_mask & !mask;
            out.coeffs[rank_mask(comp, d)] += shuffle_sign(mask, comp) * c;
        }
        Ok(out)
    }

    /// `Σ_I a_I det(rows I of frame)`.
    pub fn evaluate(&self, frame: &Frame) -> Result<f64> {
        if frame.ambient_dim() != self.ambient_dim || frame.count() != self.degree {
            return Err(Error::DimensionMismatch(format!(
                "{}-form on R^{} evaluated on {} vectors in R^{}",
                self.degree,
                self.ambient_dim,
                frame.count(),
                frame.ambient_dim()
            )));
        }
        Ok(frame.pair(&self.nonzero_masks()))
    }
}

/// Volume form `dx_1 ∧ … ∧ dx_base` inside `Λ^base(R^ambient)`.
pub fn base_volume(ambient_dim: usize, base: usize) -> NForm {
    NForm::monomial(ambient_dim, &(0..base).collect::<Vec<_>>())
}

/// Wedge of a list of 1-forms, in order; the empty list gives the scalar 1.
pub fn wedge_all(ambient_dim: usize, factors: &[NForm]) -> Result<NForm> {
    factors
        .iter()
        .try_fold(NForm::scalar(ambient_dim, 1.0), |acc, f| acc.wedge(f))
}
