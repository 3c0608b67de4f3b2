//! Two independent residuals for minimality of a graph: the divergence-form
//! minimal graph system, expanded analytically, and the norm of `dΘ(F)`
//! obtained by differencing the coefficients of `Θ(F)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::NForm;
use crate::maps::GraphMap;
use crate::theta::theta_h;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalityReport {
    pub point: Vec<f64>,
    pub mgs_residual: Vec<f64>,
    pub mgs_norm: f64,
    pub dtheta_norm: f64,
    pub step: f64,
}

/// `1e-4·max(1,|x|)`.
pub fn default_step(x: &[f64]) -> f64 {
    1e-4 * x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0)
}

/// `Σ_{j,k} ∂_j(√g g^{jk} ∂_k f_α)` for each `α`.
///
/// With `W = √g G^{-1}`, `∂_j W = √g (½ tr(G^{-1}∂_jG) G^{-1} − G^{-1}(∂_jG)G^{-1})`
/// and `∂_j G = (∂_j dF)ᵀ dF + dFᵀ (∂_j dF)`.
pub fn mgs_residual(f: &GraphMap, x: &[f64]) -> Result<Vec<f64>> {
    let s = f.jacobian(x)?.entries;
    let hess = f.hessians(x)?;
    let (m, n) = s.shape();
    let g = DMatrix::identity(n, n) + s.transpose() * &s;
    let gi = g.clone().cholesky().expect("I + dF* dF is positive definite").inverse();
    let sqrt_g = g.determinant().sqrt();
    let w = &gi * sqrt_g;

    let mut out = vec![0.0; m];
    for j in 0..n {
        // ∂_j dF: row α is the j-th row of the Hessian of f_α
        let dj_s = DMatrix::from_fn(m, n, |a, k| hess[a][(j, k)]);
        let dj_g = dj_s.transpose() * &s + s.transpose() * &dj_s;
        let gi_dg = &gi * &dj_g;
        let dj_w = (&gi * (0.5 * gi_dg.trace()) - &gi_dg * &gi) * sqrt_g;
        for (a, r) in out.iter_mut().enumerate() {
            for k in 0..n {
                *r += dj_w[(j, k)] * s[(a, k)] + w[(j, k)] * hess[a][(j, k)];
            }
        }
    }
    Ok(out)
}

/// Euclidean coefficient norm of `dΘ(F) = Σ_j dx_j ∧ ∂_jΘ`, with `∂_jΘ`
/// taken by central differences of step `h` in `x` (Θ does not depend on `y`).
pub fn dtheta_residual(f: &GraphMap, x: &[f64], h: f64) -> Result<f64> {
    Ok(dtheta_form(f, x, h)?.norm())
}

/// The differenced `(n+1)`-form itself.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN margins fail too
pub fn dtheta_form(f: &GraphMap, x: &[f64], h: f64) -> Result<NForm> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step h = {h} must be positive")));
    }
    let margin = f.margin(x);
    if !(margin >= h) {
        return Err(Error::InsufficientMargin {
            point: x.to_vec(),
            margin: h,
        });
    }
    let (n, m) = (f.n(), f.m());
    let d = n + m;
    let mut out = NForm::zero(d, n + 1);
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        let plus = theta_h(&f.jacobian(&xp)?).form;
        xp[j] = x[j] - h;
        let minus = theta_h(&f.jacobian(&xp)?).form;
        xp[j] = x[j];
        let mut deriv = plus;
        deriv.add_assign_scaled(&minus, -1.0);
        let dxj = NForm::monomial(d, &[j]);
        out.add_assign_scaled(&dxj.wedge(&deriv)?, 0.5 / h);
    }
    // every surviving component is dy_α ∧ (n-form in dx)
    debug_assert!(out
        .terms()
        .all(|(idx, c)| c == 0.0 || idx.iter().filter(|&&i| i >= n).count() == 1));
    Ok(out)
}

pub fn minimality_report(f: &GraphMap, x: &[f64], h: Option<f64>) -> Result<MinimalityReport> {
    let step = h.unwrap_or_else(|| default_step(x));
    let mgs = mgs_residual(f, x)?;
    let mgs_norm = mgs.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(MinimalityReport {
        point: x.to_vec(),
        mgs_norm,
        mgs_residual: mgs,
        dtheta_norm: dtheta_residual(f, x, step)?,
        step,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub point: Vec<f64>,
    pub mgs_norm: f64,
    pub dtheta_norm: f64,
    /// `dtheta_norm / mgs_norm`, when `mgs_norm > 1e-6`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EquivalenceSummary {
    pub rows: Vec<ProbeRow>,
    pub max_mgs_norm: f64,
    pub max_dtheta_norm: f64,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
}

/// Both residuals side by side at each point, with their ratio.
pub fn equivalence_probe(f: &GraphMap, points: &[Vec<f64>]) -> Result<EquivalenceSummary> {
    let mut summary = EquivalenceSummary::default();
    for x in points {
        let rep = minimality_report(f, x, None)?;
        let ratio = (rep.mgs_norm > 1e-6).then(|| rep.dtheta_norm / rep.mgs_norm);
        summary.max_mgs_norm = summary.max_mgs_norm.max(rep.mgs_norm);
        summary.max_dtheta_norm = summary.max_dtheta_norm.max(rep.dtheta_norm);
        if let Some(q) = ratio {
            summary.min_ratio = Some(summary.min_ratio.map_or(q, |v| v.min(q)));
            summary.max_ratio = Some(summary.max_ratio.map_or(q, |v| v.max(q)));
        }
        summary.rows.push(ProbeRow {
            point: x.clone(),
            mgs_norm: rep.mgs_norm,
            dtheta_norm: rep.dtheta_norm,
            ratio,
        });
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{Builtin, Monomial};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scherk() -> GraphMap {
        GraphMap::builtin(Builtin::Scherk, 2, 1, None).unwrap()
    }

    fn paraboloid() -> GraphMap {
        GraphMap::builtin(Builtin::Paraboloid, 2, 1, None).unwrap()
    }

    fn square() -> GraphMap {
        GraphMap::builtin(Builtin::HolomorphicSquare { scale: 1.0 }, 2, 2, None).unwrap()
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// `[(1+f_y²) f_xx − 2 f_x f_y f_xy + (1+f_x²) f_yy] / (1+|∇f|²)^{3/2}`
    fn mse_by_hand(fx: f64, fy: f64, fxx: f64, fxy: f64, fyy: f64) -> f64 {
        ((1.0 + fy * fy) * fxx - 2.0 * fx * fy * fxy + (1.0 + fx * fx) * fyy)
            / (1.0 + fx * fx + fy * fy).powf(1.5)
    }

    #[test]
    fn linear_maps_have_zero_residual() {
        let f = GraphMap::builtin(Builtin::Linear { matrix: vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0] }, 3, 2, None).unwrap();
        let x = [0.1, -0.4, 0.7];
        assert_eq!(mgs_residual(&f, &x).unwrap(), vec![0.0, 0.0]);
        assert!(dtheta_residual(&f, &x, 1e-4).unwrap() < 1e-10);
    }

    #[test]
    fn hypersurface_residual_matches_the_hand_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let c: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            // f = c0 x² + c1 xy + c2 y² + c3 x³ + c4 x y²
            let comps = vec![vec![
                Monomial { exps: vec![2, 0], coef: c[0] },
                Monomial { exps: vec![1, 1], coef: c[1] },
                Monomial { exps: vec![0, 2], coef: c[2] },
                Monomial { exps: vec![3, 0], coef: c[3] },
                Monomial { exps: vec![1, 2], coef: c[4] },
            ]];
            let f = GraphMap::polynomial(comps, 2, None).unwrap();
            let (x, y) = (rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9));
            let fx = 2.0 * c[0] * x + c[1] * y + 3.0 * c[3] * x * x + c[4] * y * y;
            let fy = c[1] * x + 2.0 * c[2] * y + 2.0 * c[4] * x * y;
            let fxx = 2.0 * c[0] + 6.0 * c[3] * x;
            let fxy = c[1] + 2.0 * c[4] * y;
            let fyy = 2.0 * c[2] + 2.0 * c[4] * x;
            let want = mse_by_hand(fx, fy, fxx, fxy, fyy);
            let got = mgs_residual(&f, &[x, y]).unwrap()[0];
            assert!((got - want).abs() < 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn scherk_is_minimal() {
        let r = mgs_residual(&scherk(), &[0.3, 0.2]).unwrap();
        assert!(norm(&r) <= 1e-8);
        assert!(dtheta_residual(&scherk(), &[0.3, 0.2], 1e-4).unwrap() <= 1e-6);
    }

    #[test]
    fn paraboloid_is_not_minimal() {
        let r = mgs_residual(&paraboloid(), &[0.5, 0.5]).unwrap();
        // f_x = f_y = 1, f_xx = f_yy = 2
        let want = mse_by_hand(1.0, 1.0, 2.0, 0.0, 2.0);
        assert!((r[0] - want).abs() < 1e-12);
        assert!(norm(&r) > 0.1);
        assert!(dtheta_residual(&paraboloid(), &[0.5, 0.5], 1e-4).unwrap() > 1e-3);
    }

    #[test]
    fn holomorphic_and_linear_maps_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let lin = GraphMap::builtin(Builtin::Linear { matrix: vec![2.0, -1.0, 0.3, 4.0] }, 2, 2, None).unwrap();
        let cubic = GraphMap::polynomial(
            // Re and Im of z³/3
            vec![
                vec![
                    Monomial { exps: vec![3, 0], coef: 1.0 / 3.0 },
                    Monomial { exps: vec![1, 2], coef: -1.0 },
                ],
                vec![
                    Monomial { exps: vec![2, 1], coef: 1.0 },
                    Monomial { exps: vec![0, 3], coef: -1.0 / 3.0 },
                ],
            ],
            2,
            None,
        )
        .unwrap();
        for _ in 0..100 {
            let x = [rng.random_range(-0.95..0.95), rng.random_range(-0.95..0.95)];
            for f in [&lin, &square(), &cubic] {
                assert!(norm(&mgs_residual(f, &x).unwrap()) <= 1e-9);
            }
            assert!(dtheta_residual(&square(), &x, 1e-4).unwrap() <= 1e-6);
        }
    }

    #[test]
    fn scherk_residual_converges_quadratically() {
        let x = [0.3, 0.2];
        let r: Vec<f64> = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
            .iter()
            .map(|&h| dtheta_residual(&scherk(), &x, h).unwrap())
            .collect();
        for w in r.windows(2) {
            let q = w[0] / w[1];
            assert!((3.5..=4.5).contains(&q), "ratio {q} from {r:?}");
        }
    }

    #[test]
    fn hypersurface_residuals_coincide() {
        // m = 1: dΘ = ± R dy ∧ dx_1∧…∧dx_n
        let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![0.1 * i as f64, 0.5 - 0.1 * i as f64]).collect();
        let s = equivalence_probe(&paraboloid(), &pts).unwrap();
        assert!((s.min_ratio.unwrap() - 1.0).abs() < 1e-6);
        assert!((s.max_ratio.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn codimension_two_residuals_are_comparable() {
        let f = GraphMap::polynomial(
            vec![
                vec![Monomial { exps: vec![2, 0], coef: 1.0 }],
                vec![Monomial { exps: vec![1, 1], coef: 0.7 }, Monomial { exps: vec![0, 3], coef: 0.4 }],
            ],
            2,
            None,
        )
        .unwrap();
        let pts: Vec<Vec<f64>> = (0..6).flat_map(|i| (0..6).map(move |j| vec![-0.8 + 0.3 * i as f64, -0.75 + 0.3 * j as f64])).collect();
        let s = equivalence_probe(&f, &pts).unwrap();
        for row in &s.rows {
            assert!(row.dtheta_norm <= 20.0 * row.mgs_norm + 1e-8, "{row:?}");
            assert!(row.mgs_norm <= 20.0 * row.dtheta_norm + 1e-8, "{row:?}");
        }
    }

    #[test]
    fn margin_and_step_are_checked() {
        assert!(matches!(
            dtheta_residual(&paraboloid(), &[0.99995, 0.0], 1e-4),
            Err(Error::InsufficientMargin { .. })
        ));
        assert!(dtheta_residual(&paraboloid(), &[0.0, 0.0], 0.0).is_err());
        assert!(equivalence_probe(&paraboloid(), &[]).unwrap().rows.is_empty());
    }
}
