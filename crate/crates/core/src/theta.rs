//! The calibrating candidate `Θ(F) = (1+Ψ)exp(−Ψ) vol_Σ` at a point.
//!
//! `theta_h` is the canonical route: it needs no frame and depends smoothly
//! on `dF`. The frame routes (`theta_svd`, `theta_svd_coords`) and the
//! `g`-matrix and codimension-two formulas exist as independent cross-checks.
//! Frame routes are multiplied by `sign(det u_basis)` so that every route
//! restricts to `+vol_Σ` for the orientation induced from `R^n`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{base_volume, multi_index::Subsets, wedge_all, NForm};
use crate::frames::{j_by_definition, tangent_isometry, SvdFrame};
use crate::maps::Jacobian;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    SvdSeries,
    HFormula,
    GFormula,
    Codim2,
    SvdCoords,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::SvdSeries => "svd_series",
            Route::HFormula => "h_formula",
            Route::GFormula => "g_formula",
            Route::Codim2 => "codim2",
            Route::SvdCoords => "svd_coords",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ThetaForm {
    pub form: NForm,
    pub base_point: Vec<f64>,
    pub route: Route,
}

fn column_covector(frame: &DMatrix<f64>, col: usize) -> NForm {
    NForm::covector(frame.column(col).as_slice())
}

/// `Δ_I`: the wedge over `j = 1..n` of `ω^{n+j}` for `j ∈ I` and `ω^j` otherwise.
fn delta(fr: &SvdFrame, subset: &[usize]) -> NForm {
    let n = fr.n();
    let d = n + fr.m();
    let factors: Vec<NForm> = (0..n)
        .map(|j| {
            if subset.contains(&j) {
                column_covector(&fr.normal_frame, j)
            } else {
                column_covector(&fr.tangent_frame, j)
            }
        })
        .collect();
    wedge_all(d, &factors).expect("n covectors fit in Λ^n(R^{n+m})")
}

/// `Σ_{|I|=ℓ} (Π_{j∈I} λ_j) Δ_I`, in the frame's own orientation. Only
/// `I ⊂ {1..rank_r}` contribute.
fn delta_sum(fr: &SvdFrame, ell: usize) -> NForm {
    let n = fr.n();
    let d = n + fr.m();
    let mut out = NForm::zero(d, n);
    if ell > fr.rank_r {
        return out;
    }
    for subset in Subsets::new(fr.rank_r, ell) {
        let weight: f64 = subset.iter().map(|&j| fr.lambdas[j]).product();
        out.add_assign_scaled(&delta(fr, &subset), weight);
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `Ψ^ℓ(F) = ℓ! Σ_{|I|=ℓ} (Π_{j∈I} λ_j) Δ_I` in standard coordinates.
pub fn psi_ell(fr: &SvdFrame, ell: usize) -> Result<NForm> {
    let n = fr.n();
    if ell > n {
        return Err(Error::InvalidArgument(format!("ℓ = {ell} exceeds n = {n}")));
    }
    Ok(delta_sum(fr, ell).scale(factorial(ell) * fr.orientation()))
}

/// One application of `Ψ(ξ) = Σ_i (J e_i)^♭ ∧ ι_{e_i} ξ`, with `e_i` the
/// columns of `tangent` and `J` given as an ambient matrix.
pub fn psi_operator(j_ambient: &DMatrix<f64>, tangent: &DMatrix<f64>, xi: &NForm) -> Result<NForm> {
    let mut out = NForm::zero(xi.ambient_dim(), xi.degree());
    for i in 0..tangent.ncols() {
        let e = tangent.column(i);
        let je = j_ambient * e;
        let term = NForm::covector(je.as_slice()).wedge(&xi.interior(e.as_slice())?)?;
        out.add_assign_scaled(&term, 1.0);
    }
    Ok(out)
}

/// `Θ(F)` from its definition as `Σ_ℓ c_ℓ Ψ^ℓ(vol_Σ)`, using the `J` map
/// and the orthonormal tangent basis `L_p(∂x_j)`. No SVD is involved.
pub fn theta_definition(df: &Jacobian) -> ThetaForm {
    let s = &df.entries;
    let n = s.ncols();
    let d = n + s.nrows();
    let j = j_by_definition(s);
    let l = tangent_isometry(s);
    let covectors: Vec<NForm> = (0..n).map(|i| column_covector(&l, i)).collect();
    let mut psi = wedge_all(d, &covectors).expect("n covectors");
    let mut form = psi.clone();
    for ell in 1..=n {
        psi = psi_operator(&j, &l, &psi).expect("matching dimensions");
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        form.add_assign_scaled(&psi, -sign * (ell as f64 - 1.0) / factorial(ell));
    }
    ThetaForm {
        form,
        base_point: df.base_point.clone(),
        route: Route::SvdSeries,
    }
}

/// `vol − Σ_{ℓ≥2} (−1)^ℓ (ℓ−1) Σ_{|I|=ℓ} (Π λ_j) Δ_I`.
pub fn theta_svd(fr: &SvdFrame) -> ThetaForm {
    let n = fr.n();
    let mut form = delta_sum(fr, 0);
    for ell in 2..=fr.rank_r {
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        form.add_assign_scaled(&delta_sum(fr, ell), -sign * (ell as f64 - 1.0));
    }
    debug_assert_eq!(form.degree(), n);
    ThetaForm {
        form: form.scale(fr.orientation()),
        base_point: vec![],
        route: Route::SvdSeries,
    }
}

/// `dy_α` inside `Λ^1(R^{n+m})`.
fn dy(n: usize, m: usize, alpha: usize) -> NForm {
    NForm::monomial(n + m, &[n + alpha])
}

/// `df_β = Σ_j ∂_j f_β dx_j`.
fn df_row(df: &DMatrix<f64>, beta: usize) -> NForm {
    let (m, n) = df.shape();
    let mut c = vec![0.0; n + m];
    for j in 0..n {
        c[j] = df[(beta, j)];
    }
    NForm::covector(&c)
}

/// `√h (tr h^{-1} − (m−1)) (*1) + Σ_{α,β} dy_α ∧ √h (h^{-1})^{αβ} (*df_β)`.
pub fn theta_h(df: &Jacobian) -> ThetaForm {
    let s = &df.entries;
    let (m, n) = s.shape();
    let d = n + m;
    let h = DMatrix::identity(m, m) + s * s.transpose();
    let hi = h.clone().cholesky().expect("I + dF dF* is positive definite").inverse();
    let sqrt_h = h.determinant().sqrt();
    let mut form = base_volume(d, n).scale(sqrt_h * (hi.trace() - (m as f64 - 1.0)));
    let stars: Vec<NForm> = (0..m)
        .map(|b| df_row(s, b).hodge_star_rn(n).expect("df has base support"))
        .collect();
    for a in 0..m {
        let mut weighted = NForm::zero(d, n - 1);
        for (b, star) in stars.iter().enumerate() {
            weighted.add_assign_scaled(star, sqrt_h * hi[(a, b)]);
        }
        form.add_assign_scaled(&dy(n, m, a).wedge(&weighted).expect("degree n"), 1.0);
    }
    ThetaForm {
        form,
        base_point: df.base_point.clone(),
        route: Route::HFormula,
    }
}

/// `√g (tr g^{-1} − (n−1)) (*1) + Σ_α dy_α ∧ [(Σ_{j,k} √g g^{jk} ∂_k f_α ∂/∂x_j) ⌟ (*1)]`.
pub fn theta_g(df: &Jacobian) -> ThetaForm {
    let s = &df.entries;
    let (m, n) = s.shape();
    let d = n + m;
    let g = DMatrix::identity(n, n) + s.transpose() * s;
    let gi = g.clone().cholesky().expect("I + dF* dF is positive definite").inverse();
    let sqrt_g = g.determinant().sqrt();
    let vol = base_volume(d, n);
    let mut form = vol.scale(sqrt_g * (gi.trace() - (n as f64 - 1.0)));
    for a in 0..m {
        let mut field = vec![0.0; d];
        for j in 0..n {
            field[j] = sqrt_g * (0..n).map(|k| gi[(j, k)] * s[(a, k)]).sum::<f64>();
        }
        let contracted = vol.interior(&field).expect("degree n ≥ 1");
        form.add_assign_scaled(&dy(n, m, a).wedge(&contracted).expect("degree n"), 1.0);
    }
    ThetaForm {
        form,
        base_point: df.base_point.clone(),
        route: Route::GFormula,
    }
}

/// The explicit form for `F = (f, g)` into `R^2`, divided by
/// `√Ξ`, `Ξ = (1+|∇f|²)(1+|∇g|²) − (∇f·∇g)²`.
pub fn theta_codim2(grad_f: &[f64], grad_g: &[f64]) -> Result<ThetaForm> {
    let n = grad_f.len();
    if grad_g.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "gradients of length {n} and {}",
            grad_g.len()
        )));
    }
    let d = n + 2;
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let (ff, gg, fg) = (dot(grad_f, grad_f), dot(grad_g, grad_g), dot(grad_f, grad_g));
    let xi = (1.0 + ff) * (1.0 + gg) - fg * fg;
    let star = |grad: &[f64]| {
        let mut c = vec![0.0; d];
        c[..n].copy_from_slice(grad);
        NForm::covector(&c).hodge_star_rn(n).expect("base support")
    };
    let (star_f, star_g) = (star(grad_f), star(grad_g));
    let mut form = base_volume(d, n).scale(1.0 - ff * gg + fg * fg);
    let mut first = star_f.scale(1.0 + gg);
    first.add_assign_scaled(&star_g, -fg);
    let mut second = star_f.scale(-fg);
    second.add_assign_scaled(&star_g, 1.0 + ff);
    form.add_assign_scaled(&dy(n, 2, 0).wedge(&first)?, 1.0);
    form.add_assign_scaled(&dy(n, 2, 1).wedge(&second)?, 1.0);
    Ok(ThetaForm {
        form: form.scale(1.0 / xi.sqrt()),
        base_point: vec![],
        route: Route::Codim2,
    })
}

/// `theta_codim2` fed from the two rows of an `m = 2` Jacobian.
pub fn theta_codim2_from_jacobian(df: &Jacobian) -> Result<ThetaForm> {
    if df.m() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "codimension-two formula needs m = 2, got m = {}",
            df.m()
        )));
    }
    let rows: Vec<Vec<f64>> = (0..2)
        .map(|a| df.entries.row(a).iter().copied().collect())
        .collect();
    let mut t = theta_codim2(&rows[0], &rows[1])?;
    t.base_point = df.base_point.clone();
    Ok(t)
}

/// The SVD-coordinate expression
/// `√Π(1+λ_i²) [(1 − Σ λ_j²/(1+λ_j²)) dx'_{1..n} + Σ_k (−1)^{k−1} λ_k/(1+λ_k²) dy'_k ∧ dx'_{1..k̂..n}]`,
/// with `dx'_j = u_j` and `dy'_k = v_k` rotated back to standard coordinates.
pub fn theta_svd_coords(fr: &SvdFrame) -> ThetaForm {
    let (n, m) = (fr.n(), fr.m());
    let d = n + m;
    let lam = |i: usize| if i < fr.rank_r { fr.lambdas[i] } else { 0.0 };
    let dxp: Vec<NForm> = (0..n)
        .map(|j| {
            let mut c = vec![0.0; d];
            c[..n].copy_from_slice(fr.u_basis.column(j).as_slice());
            NForm::covector(&c)
        })
        .collect();
    let dyp = |k: usize| {
        let mut c = vec![0.0; d];
        for r in 0..m {
            c[n + r] = fr.v_basis[(r, k)];
        }
        NForm::covector(&c)
    };
    let prefactor: f64 = (0..n).map(|i| (1.0 + lam(i).powi(2)).sqrt()).product();
    let block_coeff = 1.0 - (0..n).map(|j| lam(j).powi(2) / (1.0 + lam(j).powi(2))).sum::<f64>();
    let mut form = wedge_all(d, &dxp).expect("n covectors").scale(block_coeff);
    for k in 0..n.min(m) {
        let l = lam(k);
        if l == 0.0 {
            continue;
        }
        let rest: Vec<NForm> = dxp
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, f)| f.clone())
            .collect();
        let omitted = wedge_all(d, &rest).expect("n−1 covectors");
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        form.add_assign_scaled(&dyp(k).wedge(&omitted).expect("degree n"), sign * l / (1.0 + l * l));
    }
    ThetaForm {
        form: form.scale(prefactor * fr.orientation()),
        base_point: vec![],
        route: Route::SvdCoords,
    }
}

/// Every applicable route at one Jacobian, with the largest pairwise
/// coefficient deviation.
pub fn all_routes(df: &Jacobian) -> (Vec<ThetaForm>, f64) {
    let fr = crate::frames::svd_frame(df);
    let mut forms = vec![theta_h(df), theta_svd(&fr), theta_g(df), theta_svd_coords(&fr)];
    if df.m() == 2 {
        forms.push(theta_codim2_from_jacobian(df).expect("m = 2"));
    }
    for f in forms.iter_mut() {
        f.base_point = df.base_point.clone();
    }
    let mut dev = 0.0f64;
    for i in 0..forms.len() {
        for j in i + 1..forms.len() {
            dev = dev.max(forms[i].form.max_abs_diff(&forms[j].form));
        }
    }
    (forms, dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::Frame;
    use crate::frames::svd_frame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn jac(df: DMatrix<f64>) -> Jacobian {
        Jacobian::from_matrix(df)
    }

    fn random_jacobian(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Jacobian {
        let n = rng.random_range(1..=max_n);
        let m = rng.random_range(1..=max_m);
        jac(DMatrix::from_fn(m, n, |_, _| rng.random_range(-2.0..2.0)))
    }

    fn diag(m: usize, n: usize, l: &[f64]) -> Jacobian {
        jac(DMatrix::from_fn(m, n, |i, j| if i == j { l.get(i).copied().unwrap_or(0.0) } else { 0.0 }))
    }

    #[test]
    fn psi_zero_is_the_volume_form() {
        let df = diag(2, 3, &[1.5, 0.5]);
        let fr = svd_frame(&df);
        let vol = psi_ell(&fr, 0).unwrap();
        assert!((vol.evaluate(&Frame::new(fr.oriented_tangent_frame())).unwrap() - 1.0).abs() < 1e-12);
        assert!(psi_ell(&fr, 4).is_err());
    }

    #[test]
    fn psi_one_for_diagonal_differential() {
        // Ψ^1 = Σ_j λ_j ω^{n+j} ∧ ι_{e_j} vol
        let df = diag(2, 3, &[1.5, 0.5]);
        let fr = svd_frame(&df);
        let vol = psi_ell(&fr, 0).unwrap();
        let mut want = NForm::zero(5, 3);
        for j in 0..2 {
            let omega = NForm::covector(fr.normal_frame.column(j).as_slice());
            let contracted = vol.interior(fr.tangent_frame.column(j).as_slice()).unwrap();
            want.add_assign_scaled(&omega.wedge(&contracted).unwrap(), fr.lambdas[j]);
        }
        assert!(psi_ell(&fr, 1).unwrap().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn psi_vanishes_beyond_the_rank() {
        let df = diag(3, 3, &[1.0, 2.0, 0.0]);
        let fr = svd_frame(&df);
        assert_eq!(fr.rank_r, 2);
        assert_eq!(psi_ell(&fr, 3).unwrap().max_abs(), 0.0);
        assert!(psi_ell(&fr, 2).unwrap().max_abs() > 0.1);
    }

    #[test]
    fn psi_ell_matches_the_iterated_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let df = random_jacobian(&mut rng, 4, 3);
            let fr = svd_frame(&df);
            let j = j_by_definition(&df.entries);
            let t = fr.oriented_tangent_frame();
            let mut psi = psi_ell(&fr, 0).unwrap();
            for ell in 1..=df.n() {
                psi = psi_operator(&j, &t, &psi).unwrap();
                let want = psi_ell(&fr, ell).unwrap();
                assert!(psi.max_abs_diff(&want) < 1e-9 * (1.0 + want.max_abs()));
            }
        }
    }

    #[test]
    fn zero_differential_gives_the_base_volume() {
        let df = jac(DMatrix::zeros(2, 3));
        let vol = base_volume(5, 3);
        let fr = svd_frame(&df);
        assert_eq!(theta_h(&df).form, vol);
        assert!(theta_g(&df).form.max_abs_diff(&vol) < 1e-15);
        assert!(theta_svd(&fr).form.max_abs_diff(&vol) < 1e-15);
        assert!(theta_svd_coords(&fr).form.max_abs_diff(&vol) < 1e-15);
        assert_eq!(theta_codim2(&[0.0; 3], &[0.0; 3]).unwrap().form, vol);
    }

    #[test]
    fn hypersurface_case() {
        let grad = [0.3, -1.2, 0.7];
        let df = jac(DMatrix::from_row_slice(1, 3, &grad));
        let t = theta_h(&df).form;
        let w = (1.0 + grad.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let mut c = vec![0.0; 4];
        c[..3].copy_from_slice(&grad);
        let star_df = NForm::covector(&c).hodge_star_rn(3).unwrap();
        let mut want = base_volume(4, 3).scale(1.0 / w);
        want.add_assign_scaled(&NForm::monomial(4, &[3]).wedge(&star_df).unwrap(), 1.0 / w);
        assert!(t.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn one_variable_svd_coordinates() {
        let c = 1.7f64;
        let df = jac(DMatrix::from_row_slice(1, 1, &[c]));
        let t = theta_svd_coords(&svd_frame(&df)).form;
        let s = (1.0 + c * c).sqrt();
        assert!((t.coeff(&[0]) - 1.0 / s).abs() < 1e-15);
        assert!((t.coeff(&[1]) - c / s).abs() < 1e-15);
        assert!(t.max_abs_diff(&theta_h(&df).form) < 1e-15);
    }

    #[test]
    fn orthogonal_gradients_in_codimension_two() {
        let (a, b) = (0.8f64, 1.3f64);
        let t = theta_codim2(&[a, 0.0, 0.0], &[0.0, b, 0.0]).unwrap();
        let want = (1.0 - a * a * b * b) / ((1.0 + a * a) * (1.0 + b * b)).sqrt();
        assert!((t.form.coeff(&[0, 1, 2]) - want).abs() < 1e-15);
    }

    #[test]
    fn routes_agree_on_random_jacobians() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let df = random_jacobian(&mut rng, 4, 3);
            let (_, dev) = all_routes(&df);
            assert!(dev <= 1e-9, "n={} m={} dev={dev}", df.n(), df.m());
            let def = theta_definition(&df);
            assert!(def.form.max_abs_diff(&theta_h(&df).form) <= 1e-9);
        }
    }

    #[test]
    fn g_and_h_formulas_agree_for_hypersurfaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let n = rng.random_range(1..=5);
            let df = jac(DMatrix::from_fn(1, n, |_, _| rng.random_range(-2.0..2.0)));
            assert!(theta_g(&df).form.max_abs_diff(&theta_h(&df).form) < 1e-10);
        }
    }

    #[test]
    fn restriction_is_the_volume_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let df = random_jacobian(&mut rng, 4, 3);
            let fr = svd_frame(&df);
            let t = Frame::new(fr.oriented_tangent_frame());
            let (forms, _) = all_routes(&df);
            for f in forms {
                assert!((f.form.evaluate(&t).unwrap() - 1.0).abs() < 1e-9, "{:?}", f.route);
            }
        }
    }

    #[test]
    fn no_single_normal_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let df = random_jacobian(&mut rng, 4, 3);
            let fr = svd_frame(&df);
            let theta = theta_h(&df).form;
            for j in 0..df.n() {
                for a in 0..df.m() {
                    let mut cols = fr.oriented_tangent_frame();
                    cols.set_column(j, &fr.normal_frame.column(a));
                    assert!(theta.evaluate(&Frame::new(cols)).unwrap().abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn mixed_frame_values() {
        // (e_{n+1},…,e_{n+ℓ}, e_{ℓ+1},…,e_n) ↦ (ℓ−1)(−1)^{ℓ−1} λ_1⋯λ_ℓ
        let lambdas = [2.0, 1.5, 0.7, 0.3];
        let df = diag(4, 4, &lambdas);
        let fr = svd_frame(&df);
        let theta = theta_svd_coords(&fr).form;
        for ell in 1..=4 {
            let mut cols = fr.oriented_tangent_frame();
            for i in 0..ell {
                cols.set_column(i, &fr.normal_frame.column(i));
            }
            if fr.orientation() < 0.0 {
                cols.column_mut(0).neg_mut();
            }
            let got = theta.evaluate(&Frame::new(cols)).unwrap() * fr.orientation();
            let prod: f64 = lambdas[..ell].iter().product();
            let sign = if (ell - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let want = (ell as f64 - 1.0) * sign * prod;
            assert!((got - want).abs() < 1e-10, "ℓ={ell}: {got} vs {want}");
        }
    }
}
