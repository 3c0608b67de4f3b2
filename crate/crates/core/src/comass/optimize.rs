//! Multi-start Riemannian ascent over column-orthonormal frames.
//!
//! Each start ascends along the projected gradient `ξ = G − A sym(AᵀG)` with
//! Armijo backtracking and the QR retraction. Starts are independent and are
//! run in parallel; the winner is the largest value, ties going to the
//! earliest start, so the result does not depend on scheduling.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::multi_index::{binomial, Subsets};
use crate::exterior::Frame;
use crate::linalg::{cofactors, qr_retract, MAX_MINOR};
use crate::theta::ThetaForm;

pub const ASCENT_MAX_ITERS: usize = 500;
const STEP_MIN: f64 = 1e-12;
const GRAD_MIN: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;
/// Coordinate planes are enumerated only up to this many.
const COORDINATE_ENUMERATION_LIMIT: usize = 100_000;
/// At most this many coordinate planes (best first) are ascended from.
const COORDINATE_SEEDS: usize = 256;

#[derive(Clone, Debug)]
pub struct LowerBound {
    pub value: f64,
    pub witness: Frame,
    /// Random restarts, not counting the coordinate-plane seeds.
    pub restarts_used: usize,
    pub seed: u64,
}

fn ascend<F>(objective: &F, start: DMatrix<f64>) -> (f64, DMatrix<f64>)
where
    F: Fn(&DMatrix<f64>, &mut DMatrix<f64>) -> f64,
{
    let (rows, cols) = start.shape();
    let mut a = start;
    let mut grad = DMatrix::zeros(rows, cols);
    let mut value = objective(&a, &mut grad);
    let mut cand_grad = DMatrix::zeros(rows, cols);
    let mut t = 1.0;
    for _ in 0..ASCENT_MAX_ITERS {
        let at_g = a.transpose() * &grad;
        let sym = (&at_g + at_g.transpose()) * 0.5;
        let xi = &grad - &a * sym;
        let g2 = xi.norm_squared();
        if g2.sqrt() < GRAD_MIN {
            break;
        }
        let accepted = loop {
            let cand = qr_retract(&(&a + &xi * t));
            let v = objective(&cand, &mut cand_grad);
            if v >= value + ARMIJO * t * g2 {
                break Some((cand, v));
            }
            t *= 0.5;
            if t < STEP_MIN {
                break None;
            }
        };
        match accepted {
            Some((cand, v)) => {
                a = cand;
                value = v;
                std::mem::swap(&mut grad, &mut cand_grad);
                t = (2.0 * t).min(1e3);
            }
            None => break,
        }
    }
    (value, a)
}

fn random_frame(rows: usize, cols: usize, seed: u64, stream: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let raw = DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng));
    qr_retract(&raw)
}

/// Both orientations of the coordinate planes, best first.
fn coordinate_seeds<F>(objective: &F, rows: usize, cols: usize) -> Vec<DMatrix<f64>>
where
    F: Fn(&DMatrix<f64>, &mut DMatrix<f64>) -> f64,
{
    if binomial(rows, cols) > COORDINATE_ENUMERATION_LIMIT {
        return Vec::new();
    }
    let mut scratch = DMatrix::zeros(rows, cols);
    let mut seeds: Vec<(f64, DMatrix<f64>)> = Vec::new();
    for subset in Subsets::new(rows, cols) {
        let mut a = DMatrix::zeros(rows, cols);
        for (c, &r) in subset.iter().enumerate() {
            a[(r, c)] = 1.0;
        }
        let v = objective(&a, &mut scratch);
        let mut flipped = a.clone();
        if cols > 0 {
            flipped.column_mut(0).neg_mut();
        }
        seeds.push((v, a));
        seeds.push((-v, flipped));
    }
    // stable: equal values keep enumeration order
    seeds.sort_by(|x, y| y.0.total_cmp(&x.0));
    seeds.truncate(COORDINATE_SEEDS);
    seeds.into_iter().map(|(_, a)| a).collect()
}

fn multistart<F>(objective: &F, rows: usize, cols: usize, restarts: usize, seed: u64) -> (f64, DMatrix<f64>)
where
    F: Fn(&DMatrix<f64>, &mut DMatrix<f64>) -> f64 + Sync,
{
    let mut starts = coordinate_seeds(objective, rows, cols);
    starts.extend((0..restarts).map(|i| random_frame(rows, cols, seed, i as u64)));
    let results: Vec<(f64, DMatrix<f64>)> = starts.into_par_iter().map(|a| ascend(objective, a)).collect();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 > results[best].0 {
            best = i;
        }
    }
    results.into_iter().nth(best).expect("at least one start")
}

/// Best value of `Θ` over oriented orthonormal `n`-frames in `R^{n+m}`.
pub fn lower_bound(theta: &ThetaForm, restarts: usize, seed: u64) -> LowerBound {
    let form = &theta.form;
    let (d, n) = (form.ambient_dim(), form.degree());
    let terms = form.nonzero_masks();
    let objective = |a: &DMatrix<f64>, grad: &mut DMatrix<f64>| Frame::new(a.clone()).pair_with_gradient(&terms, grad);
    let (value, a) = multistart(&objective, d, n, restarts.max(1), seed);
    LowerBound {
        value,
        witness: Frame::new(a),
        restarts_used: restarts.max(1),
        seed,
    }
}

/// The reduced problem on `2r×r` frames `A = [U; V]`:
/// `det U − Σ_{ℓ≥2} (−1)^ℓ (ℓ−1) Σ_{|I|=ℓ} (Π_{j∈I} λ_j) det A_I`,
/// where row `i` of `A_I` is row `i` of `V` for `i ∈ I` and of `U` otherwise.
pub fn stiefel_lower_bound(lambda: &[f64], r: usize, restarts: usize, seed: u64) -> Result<f64> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("rank r = {r} must be at least 2")));
    }
    if r > MAX_MINOR {
        return Err(Error::InvalidArgument(format!("rank r = {r} exceeds {MAX_MINOR}")));
    }
    let lam = |j: usize| lambda.get(j).copied().unwrap_or(0.0);
    let mut terms: Vec<(u32, f64)> = vec![(0, 1.0)];
    for mask in 1u32..(1 << r) {
        let ell = mask.count_ones() as usize;
        if ell < 2 {
            continue;
        }
        let prod: f64 = (0..r).filter(|j| mask & (1 << j) != 0).map(lam).product();
        let sign = if ell.is_multiple_of(2) { 1.0 } else { -1.0 };
        let w = -sign * (ell as f64 - 1.0) * prod;
        if w != 0.0 {
            terms.push((mask, w));
        }
    }
    let objective = |a: &DMatrix<f64>, grad: &mut DMatrix<f64>| {
        grad.fill(0.0);
        let mut buf = [0.0; MAX_MINOR * MAX_MINOR];
        let mut cof = [0.0; MAX_MINOR * MAX_MINOR];
        let mut value = 0.0;
        for &(mask, w) in &terms {
            let source = |i: usize| if mask & (1 << i) != 0 { r + i } else { i };
            for i in 0..r {
                for c in 0..r {
                    buf[i * r + c] = a[(source(i), c)];
                }
            }
            value += w * cofactors(&buf[..r * r], r, &mut cof[..r * r]);
            for i in 0..r {
                for c in 0..r {
                    grad[(source(i), c)] += w * cof[i * r + c];
                }
            }
        }
        value
    };
    Ok(multistart(&objective, 2 * r, r, restarts.max(1), seed).0)
}
