//! Exact rational forms of the two combinatorial identities behind the
//! dilation thresholds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// `C(n, k)` with `C(·, k) = 0` for `k < 0` or `k > n`.
fn choose(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `Σ_{ℓ=2}^{r} (ℓ−1) C(r,ℓ) (r−1)^{−ℓ}`, which equals 1 for every `r ≥ 2`.
pub fn crude_sum_identity(r: u32) -> Result<BigRational> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("rank r = {r} must be at least 2")));
    }
    let r = r as i64;
    let base = int(r - 1);
    let mut sum = BigRational::zero();
    let mut power = BigRational::one();
    for ell in 1..=r {
        power *= &base;
        if ell >= 2 {
            sum += BigRational::from_integer((ell - 1) * choose(r, ell)) / &power;
        }
    }
    Ok(sum)
}

/// Both sides of
/// `(r−1)² C(2r−2,ℓ−2) − 2(r−1) C(2r−2,ℓ−1) + C(2r−2,ℓ) = (ℓ−1) C(2r,ℓ) (ℓr/(2(2r−1)) − 1)`.
pub fn refined_binomial_identity(r: u32, ell: u32) -> Result<(BigRational, BigRational)> {
    if r < 1 || ell > 2 * r {
        return Err(Error::InvalidArgument(format!("need r ≥ 1 and 0 ≤ ℓ ≤ 2r, got r = {r}, ℓ = {ell}")));
    }
    let (r, l) = (r as i64, ell as i64);
    let lhs = (r - 1) * (r - 1) * choose(2 * r - 2, l - 2) - 2 * (r - 1) * choose(2 * r - 2, l - 1)
        + choose(2 * r - 2, l);
    let factor = BigRational::new(BigInt::from(l * r), BigInt::from(2 * (2 * r - 1))) - int(1);
    let rhs = BigRational::from_integer((l - 1) * choose(2 * r, l)) * factor;
    Ok((BigRational::from_integer(lhs), rhs))
}
