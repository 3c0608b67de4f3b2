//! Comass of `Θ(F)` at a point: the analytic upper bound in terms of the
//! singular values, the dilation hypotheses that force it to be at most one,
//! optimizer-based lower bounds, and the numerical constant `ε*(r)`.

mod identities;
mod optimize;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exterior::multi_index::binomial;
use crate::exterior::Frame;
use crate::theta::ThetaForm;

pub use identities::{crude_sum_identity, refined_binomial_identity};
pub use optimize::{lower_bound, stiefel_lower_bound, LowerBound, ASCENT_MAX_ITERS};

pub const DEFAULT_RESTARTS: usize = 64;
pub const THETA_GRID: usize = 2048;
pub const GOLDEN_TOL: f64 = 1e-12;

fn frame_columns<S: Serializer>(frame: &Frame, s: S) -> std::result::Result<S::Ok, S::Error> {
    let cols: Vec<Vec<f64>> = frame
        .columns()
        .column_iter()
        .map(|c| c.iter().copied().collect())
        .collect();
    cols.serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComassEstimate {
    pub lower: f64,
    /// Columns of the best oriented `n`-plane found.
    #[serde(serialize_with = "frame_columns")]
    pub witness: Frame,
    pub upper: f64,
    pub theta_star: f64,
    pub restarts_used: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DilationCheck {
    pub rank_r: usize,
    pub lambda: Vec<f64>,
    pub max_pair_product: f64,
    /// `1/(r−1)²`; infinite when `r ≤ 1`.
    pub crude_threshold: f64,
    /// `ε/(r−1)`; infinite when `r ≤ 1`.
    pub refined_threshold: f64,
    pub crude_ok: bool,
    pub refined_ok: bool,
}

const DILATION_SLACK: f64 = 1e-12;

fn check_rank(r: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("rank r = {r} must be at least 2")));
    }
    Ok(())
}

/// `Σ_{ℓ=2}^{r} w_ℓ (ℓ−1) C(r,ℓ) cos^{r−ℓ}θ sin^ℓθ + cos^r θ`.
fn weighted_profile(theta: f64, r: usize, weight: impl Fn(usize) -> f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let mut total = c.powi(r as i32);
    for ell in 2..=r {
        let w = weight(ell);
        if w == 0.0 {
            continue;
        }
        total += w * (ell as f64 - 1.0) * binomial(r, ell) as f64 * c.powi((r - ell) as i32) * s.powi(ell as i32);
    }
    total
}

/// `cos^r θ + Σ_{ℓ=2}^{r} τ^ℓ (ℓ−1) C(r,ℓ) cos^{r−ℓ}θ sin^ℓθ`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
pub fn f_theta_tau(theta: f64, tau: f64, r: usize) -> Result<f64> {
    check_rank(r)?;
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) || !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need θ ∈ [0, π/2] and τ ≥ 0, got θ = {theta}, τ = {tau}"
        )));
    }
    Ok(weighted_profile(theta, r, |ell| tau.powi(ell as i32)))
}

fn golden_section(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while b - a > GOLDEN_TOL {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + phi * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - phi * (b - a);
            g1 = g(x1);
        }
    }
    if g1 >= g2 {
        (g1, x1)
    } else {
        (g2, x2)
    }
}

/// Maximum of `g` on `[0, π/2]` and its location: a `THETA_GRID`-point grid,
/// with golden-section refinement around every discrete local maximum.
///
/// Refining only the best grid cell is not enough: near `ε*` an interior
/// bump can exceed the endpoint value while every grid sample on it does not.
pub fn maximize_on_quarter(g: impl Fn(f64) -> f64) -> (f64, f64) {
    let end = std::f64::consts::FRAC_PI_2;
    let h = end / (THETA_GRID - 1) as f64;
    let grid: Vec<f64> = (0..THETA_GRID)
        .map(|i| if i == THETA_GRID - 1 { end } else { i as f64 * h })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
    let mut best = (values[0], 0.0);
    for i in 0..THETA_GRID {
        let left = i == 0 || values[i] >= values[i - 1];
        let right = i == THETA_GRID - 1 || values[i] >= values[i + 1];
        if !(left && right) {
            continue;
        }
        if values[i] > best.0 {
            best = (values[i], grid[i]);
        }
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(THETA_GRID - 1)];
        let refined = golden_section(&g, a, b);
        if refined.0 > best.0 {
            best = refined;
        }
    }
    best
}

/// `max_θ [cos^r θ + Σ_ℓ Λ_ℓ (ℓ−1) C(r,ℓ) cos^{r−ℓ}θ sin^ℓθ]` with
/// `Λ_ℓ = λ_1⋯λ_ℓ`, and the maximizing `θ`. Returns `(1, 0)` when `r < 2`.
pub fn upper_bound(lambda: &[f64], r: usize) -> (f64, f64) {
    if r < 2 {
        return (1.0, 0.0);
    }
    let mut partial = vec![1.0; r + 1];
    for ell in 1..=r {
        partial[ell] = partial[ell - 1] * lambda.get(ell - 1).copied().unwrap_or(0.0);
    }
    maximize_on_quarter(|t| weighted_profile(t, r, |ell| partial[ell]))
}

pub fn dilation_check(lambda: &[f64], r: usize, epsilon: f64) -> DilationCheck {
    let max_pair_product = if lambda.len() >= 2 { lambda[0] * lambda[1] } else { 0.0 };
    let (crude_threshold, refined_threshold) = if r <= 1 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let k = (r - 1) as f64;
        (1.0 / (k * k), epsilon / k)
    };
    DilationCheck {
        rank_r: r,
        lambda: lambda.to_vec(),
        max_pair_product,
        crude_threshold,
        refined_threshold,
        crude_ok: r <= 1 || max_pair_product <= crude_threshold + DILATION_SLACK,
        refined_ok: r <= 1 || max_pair_product <= refined_threshold + DILATION_SLACK,
    }
}

/// Tolerance on `max_θ f ≤ 1` inside the ε search.
const EPSILON_ACCEPT: f64 = 4.0 * f64::EPSILON;

/// Largest `ε` (to `tol`, by bisection) with
/// `max_θ f(θ, √(ε/(r−1)), r) ≤ 1`, together with the `θ` at which the
/// bound first becomes tight.
///
/// The condition is monotone in `ε` because `f` increases with `τ`, and it
/// fails for every `ε > 1`: `(f−1)/θ² → (r/2)((r−1)τ² − 1)` as `θ → 0`.
pub fn epsilon_star(r: usize, tol: f64) -> Result<(f64, f64)> {
    check_rank(r)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let k = (r - 1) as f64;
    let max_at = |eps: f64| {
        let tau = (eps / k).sqrt();
        maximize_on_quarter(|t| weighted_profile(t, r, |ell| tau.powi(ell as i32)))
    };
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    let mut critical = max_at(hi).1;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (v, t) = max_at(mid);
        if v <= 1.0 + EPSILON_ACCEPT {
            lo = mid;
        } else {
            hi = mid;
            critical = t;
        }
    }
    Ok((lo, critical))
}

/// `(f(θ,τ,r) − 1)/θ²` Richardson-extrapolated from `θ = 1e-3, 1e-4`, and
/// its limit `(r/2)((r−1)τ² − 1)`.
pub fn taylor_check(tau: f64, r: usize) -> (f64, f64) {
    let q = |t: f64| (weighted_profile(t, r, |ell| tau.powi(ell as i32)) - 1.0) / (t * t);
    let extrapolated = (100.0 * q(1e-4) - q(1e-3)) / 99.0;
    let limit = 0.5 * r as f64 * ((r as f64 - 1.0) * tau * tau - 1.0);
    (extrapolated, limit)
}

/// Lower and upper bounds for `Θ(F)` given its singular values.
pub fn comass_estimate(theta: &ThetaForm, lambda: &[f64], r: usize, restarts: usize, seed: u64) -> ComassEstimate {
    let lb = lower_bound(theta, restarts, seed);
    let (upper, theta_star) = upper_bound(lambda, r);
    ComassEstimate {
        lower: lb.value,
        witness: lb.witness,
        upper,
        theta_star,
        restarts_used: lb.restarts_used,
        seed,
    }
}
