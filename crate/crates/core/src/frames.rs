//! Pointwise adapted frames of a graph.
//!
//! With `dF u_i = λ_i v_i`, the tangent frame is
//! `e_i = (u_i, λ_i v_i)/√(1+λ_i²)` and the normal frame is
//! `e_{n+i} = (−λ_i u_i, v_i)/√(1+λ_i²)`, both written in the standard
//! coordinates of `R^n × R^m`.

use nalgebra::DMatrix;

use crate::linalg::{complete_orthonormal, sym_inv_sqrt};
use crate::maps::Jacobian;

#[derive(Clone, Debug)]
pub struct SvdFrame {
    /// `λ_1 ≥ … ≥ λ_min(n,m) ≥ 0`.
    pub lambdas: Vec<f64>,
    pub rank_r: usize,
    /// Domain singular directions, `n×n` orthogonal.
    pub u_basis: DMatrix<f64>,
    /// Codomain singular directions, `m×m` with determinant `+1`.
    pub v_basis: DMatrix<f64>,
    /// `(n+m)×n`, column `i` is `e_{i+1}`.
    pub tangent_frame: DMatrix<f64>,
    /// `(n+m)×m`, column `i` is `e_{n+i+1}`.
    pub normal_frame: DMatrix<f64>,
}

impl SvdFrame {
    pub fn n(&self) -> usize {
        self.u_basis.nrows()
    }

    pub fn m(&self) -> usize {
        self.v_basis.nrows()
    }

    /// `λ_i` for `i < n`, zero past `min(n,m)`.
    pub fn lambda(&self, i: usize) -> f64 {
        self.lambdas.get(i).copied().unwrap_or(0.0)
    }

    /// `sign(det u_basis)`: `+1` when `e_1,…,e_n` is positively oriented over `R^n`.
    pub fn orientation(&self) -> f64 {
        if self.u_basis.determinant() < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Tangent frame with the first column flipped if needed so that it is
    /// positively oriented with respect to `dx_1∧…∧dx_n`.
    pub fn oriented_tangent_frame(&self) -> DMatrix<f64> {
        let mut t = self.tangent_frame.clone();
        if self.orientation() < 0.0 {
            t.column_mut(0).neg_mut();
        }
        t
    }

    /// `[tangent | normal]`, an orthogonal `(n+m)×(n+m)` matrix.
    pub fn full_frame(&self) -> DMatrix<f64> {
        let (n, m) = (self.n(), self.m());
        let mut e = DMatrix::zeros(n + m, n + m);
        e.columns_mut(0, n).copy_from(&self.tangent_frame);
        e.columns_mut(n, m).copy_from(&self.normal_frame);
        e
    }
}

fn rank_tolerance(lambda_max: f64) -> f64 {
    if lambda_max == 0.0 {
        1e-12
    } else {
        1e-9 * lambda_max
    }
}

pub fn svd_frame(df: &Jacobian) -> SvdFrame {
    let (m, n) = df.entries.shape();
    let k = n.min(m);
    let (mut u_basis, mut v_basis, lambdas) = if df.entries.iter().all(|v| *v == 0.0) {
        (DMatrix::identity(n, n), DMatrix::identity(m, m), vec![0.0; k])
    } else {
        let svd = df.entries.clone().svd(true, true);
        let w = svd.u.expect("requested u");
        let zt = svd.v_t.expect("requested v_t");
        let u_thin = zt.transpose();
        (
            complete_orthonormal(&u_thin, n),
            complete_orthonormal(&w, m),
            svd.singular_values.iter().copied().collect::<Vec<_>>(),
        )
    };
    let tol = rank_tolerance(lambdas.first().copied().unwrap_or(0.0));
    let rank_r = lambdas.iter().filter(|&&l| l > tol).count();

    if v_basis.determinant() < 0.0 {
        let last = m - 1;
        let carries_zero = last >= k || lambdas[last] <= tol;
        v_basis.column_mut(last).neg_mut();
        if !carries_zero {
            // keep dF u_j = λ_j v_j on the smallest nonzero pair
            u_basis.column_mut(last).neg_mut();
        }
    }

    let lam = |i: usize| lambdas.get(i).copied().unwrap_or(0.0);
    let mut tangent_frame = DMatrix::zeros(n + m, n);
    for i in 0..n {
        let l = lam(i);
        let s = 1.0 / (1.0 + l * l).sqrt();
        for r in 0..n {
            tangent_frame[(r, i)] = s * u_basis[(r, i)];
        }
        if i < m {
            for r in 0..m {
                tangent_frame[(n + r, i)] = s * l * v_basis[(r, i)];
            }
        }
    }
    let mut normal_frame = DMatrix::zeros(n + m, m);
    for a in 0..m {
        let l = lam(a);
        let s = 1.0 / (1.0 + l * l).sqrt();
        if a < n {
            for r in 0..n {
                normal_frame[(r, a)] = -s * l * u_basis[(r, a)];
            }
        }
        for r in 0..m {
            normal_frame[(n + r, a)] = s * v_basis[(r, a)];
        }
    }
    SvdFrame {
        lambdas,
        rank_r,
        u_basis,
        v_basis,
        tangent_frame,
        normal_frame,
    }
}

/// `G`, `H`, the induced metrics and the map `J_p`.
#[derive(Clone, Debug)]
pub struct TangentNormalData {
    /// `I_n + dF* dF`.
    pub g: DMatrix<f64>,
    /// `I_m + dF dF*`.
    pub h: DMatrix<f64>,
    /// `J_p` in the bases `L_p(∂x_j)` of `T_pΣ` and `L_p^⊥(∂y_α)` of `N_pΣ`, `m×n`.
    pub j: DMatrix<f64>,
    /// `J_p` extended by zero on `N_pΣ`, as an `(n+m)×(n+m)` matrix.
    pub j_ambient: DMatrix<f64>,
    pub g_metric: DMatrix<f64>,
    pub h_metric: DMatrix<f64>,
}

/// `L_p` as an `(n+m)×n` matrix with orthonormal columns.
pub fn tangent_isometry(df: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = df.shape();
    let g = DMatrix::identity(n, n) + df.transpose() * df;
    let gi = sym_inv_sqrt(&g);
    let mut l = DMatrix::zeros(n + m, n);
    l.rows_mut(0, n).copy_from(&gi);
    l.rows_mut(n, m).copy_from(&(df * &gi));
    l
}

/// `L_p^⊥` as an `(n+m)×m` matrix with orthonormal columns.
pub fn normal_isometry(df: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = df.shape();
    let h = DMatrix::identity(m, m) + df * df.transpose();
    let hi = sym_inv_sqrt(&h);
    let mut l = DMatrix::zeros(n + m, m);
    l.rows_mut(0, n).copy_from(&(-(df.transpose() * &hi)));
    l.rows_mut(n, m).copy_from(&hi);
    l
}

/// `J_p = L_p^⊥ ∘ dF ∘ L_p^{-1}`, composed with the orthogonal projection onto `T_pΣ`.
pub fn j_by_definition(df: &DMatrix<f64>) -> DMatrix<f64> {
    let l = tangent_isometry(df);
    let lp = normal_isometry(df);
    &lp * df * l.transpose()
}

/// `J_p = π^N ∘ ι_2 ∘ dF ∘ G ∘ π_1|_T`, composed with the projection onto `T_pΣ`.
pub fn j_by_projection(df: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = df.shape();
    let g = DMatrix::identity(n, n) + df.transpose() * df;
    let l = tangent_isometry(df);
    let lp = normal_isometry(df);
    let proj_t = &l * l.transpose();
    let proj_n = &lp * lp.transpose();
    let mut lift = DMatrix::zeros(n + m, n + m);
    // ι_2 ∘ dF ∘ G ∘ π_1
    lift.view_mut((n, 0), (m, n)).copy_from(&(df * g));
    proj_n * lift * proj_t
}

/// `J_p = π^N ∘ ι_2 ∘ H ∘ dF ∘ π_1|_T`, the second projection form.
pub fn j_by_projection_h(df: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = df.shape();
    let h = DMatrix::identity(m, m) + df * df.transpose();
    let l = tangent_isometry(df);
    let lp = normal_isometry(df);
    let proj_t = &l * l.transpose();
    let proj_n = &lp * lp.transpose();
    let mut lift = DMatrix::zeros(n + m, n + m);
    lift.view_mut((n, 0), (m, n)).copy_from(&(h * df));
    proj_n * lift * proj_t
}

pub fn tangent_normal_data(df: &Jacobian) -> TangentNormalData {
    let s = &df.entries;
    let (m, n) = s.shape();
    let g = DMatrix::identity(n, n) + s.transpose() * s;
    let h = DMatrix::identity(m, m) + s * s.transpose();
    let j_ambient = j_by_definition(s);
    let j = normal_isometry(s).transpose() * &j_ambient * tangent_isometry(s);
    TangentNormalData {
        g_metric: g.clone(),
        h_metric: h.clone(),
        g,
        h,
        j,
        j_ambient,
    }
}

/// Max normalized error over the determinant, inverse, trace and
/// intertwining identities relating `I + S*S` and `I + SS*`.
pub fn sylvester_check(s: &DMatrix<f64>) -> f64 {
    let (m, n) = s.shape();
    let g = DMatrix::identity(n, n) + s.transpose() * s;
    let h = DMatrix::identity(m, m) + s * s.transpose();
    let gi = g.clone().try_inverse().expect("I + S*S is positive definite");
    let hi = h.clone().try_inverse().expect("I + SS* is positive definite");
    let (dg, dh) = (g.determinant(), h.determinant());
    let scale = 1.0 + s.norm() * s.norm();
    let max_abs = |a: DMatrix<f64>| a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    let det_err = (dg - dh).abs() / dg.abs().max(1.0);
    let h_inv_err = max_abs(&hi - (DMatrix::identity(m, m) - s * &gi * s.transpose()));
    let g_inv_err = max_abs(&gi - (DMatrix::identity(n, n) - s.transpose() * &hi * s));
    let trace_err = (hi.trace() - m as f64 - gi.trace() + n as f64).abs();
    let intertwine_err = max_abs(&hi * s - s * &gi) / scale.sqrt();
    [det_err, h_inv_err, g_inv_err, trace_err, intertwine_err]
        .into_iter()
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn jac(m: usize, n: usize, data: &[f64]) -> Jacobian {
        Jacobian::from_matrix(DMatrix::from_row_slice(m, n, data))
    }

    fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize, amp: f64) -> DMatrix<f64> {
        DMatrix::from_fn(m, n, |_, _| rng.random_range(-amp..amp))
    }

    fn check_invariants(fr: &SvdFrame, df: &DMatrix<f64>) {
        let (m, n) = df.shape();
        let mut recon = DMatrix::zeros(m, n);
        for i in 0..n.min(m) {
            recon += fr.lambdas[i] * fr.v_basis.column(i) * fr.u_basis.column(i).transpose();
        }
        assert!(max_abs_diff(&recon, df) <= 1e-10 * (1.0 + df.norm()));
        for i in 0..n {
            let lhs = df * fr.u_basis.column(i);
            let rhs = if i < m { fr.lambda(i) * fr.v_basis.column(i) } else { lhs.clone() * 0.0 };
            assert!((lhs - rhs).amax() <= 1e-10 * (1.0 + df.norm()));
        }
        let e = fr.full_frame();
        assert!(max_abs_diff(&(e.transpose() * &e), &DMatrix::identity(n + m, n + m)) <= 1e-10);
        assert!((fr.v_basis.determinant() - 1.0).abs() < 1e-10);
        assert!(fr.lambdas.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn zero_differential_gives_standard_frames() {
        let fr = svd_frame(&jac(2, 3, &[0.0; 6]));
        assert_eq!(fr.lambdas, vec![0.0, 0.0]);
        assert_eq!(fr.rank_r, 0);
        let mut t = DMatrix::zeros(5, 3);
        for i in 0..3 {
            t[(i, i)] = 1.0;
        }
        let mut nf = DMatrix::zeros(5, 2);
        nf[(3, 0)] = 1.0;
        nf[(4, 1)] = 1.0;
        assert_eq!(fr.tangent_frame, t);
        assert_eq!(fr.normal_frame, nf);
    }

    #[test]
    fn one_dimensional_frame() {
        let c = 3.0f64;
        let fr = svd_frame(&jac(1, 1, &[c]));
        let s = (1.0 + c * c).sqrt();
        assert!((fr.lambdas[0] - c).abs() < 1e-15);
        assert!(max_abs_diff(&fr.tangent_frame, &DMatrix::from_column_slice(2, 1, &[1.0 / s, c / s])) < 1e-15);
        assert!(max_abs_diff(&fr.normal_frame, &DMatrix::from_column_slice(2, 1, &[-c / s, 1.0 / s])) < 1e-15);
    }

    #[test]
    fn negative_slope_reverses_the_domain_direction() {
        // det(v) = +1 forces v = 1, so u = −1 and e_1 = (−1, 2)/√5, against dx
        let fr = svd_frame(&jac(1, 1, &[-2.0]));
        let s = 5.0f64.sqrt();
        assert_eq!(fr.orientation(), -1.0);
        assert!(max_abs_diff(&fr.tangent_frame, &DMatrix::from_column_slice(2, 1, &[-1.0 / s, 2.0 / s])) < 1e-15);
        assert!(max_abs_diff(&fr.oriented_tangent_frame(), &DMatrix::from_column_slice(2, 1, &[1.0 / s, -2.0 / s])) < 1e-15);
    }

    #[test]
    fn diagonal_two_by_two() {
        let fr = svd_frame(&jac(2, 2, &[2.0, 0.0, 0.0, 1.0]));
        assert_eq!(fr.lambdas, vec![2.0, 1.0]);
        let s5 = 5.0f64.sqrt();
        let e1 = fr.tangent_frame.column(0).into_owned();
        let e3 = fr.normal_frame.column(0).into_owned();
        let sign = e1[0].signum();
        let want1 = nalgebra::DVector::from_vec(vec![1.0 / s5, 0.0, 2.0 / s5, 0.0]) * sign;
        let want3 = nalgebra::DVector::from_vec(vec![-2.0 / s5, 0.0, 1.0 / s5, 0.0]) * sign;
        assert!((e1 - want1).amax() < 1e-14);
        assert!((e3 - want3).amax() < 1e-14);
    }

    #[test]
    fn random_frames_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.random_range(1..=5);
            let m = rng.random_range(1..=5);
            let df = random_matrix(&mut rng, m, n, 2.0);
            let fr = svd_frame(&Jacobian::from_matrix(df.clone()));
            check_invariants(&fr, &df);
            assert_eq!(fr.rank_r, n.min(m));
        }
    }

    #[test]
    fn rank_deficient_frames() {
        // rank one 3×3, and a matrix with a zero column
        let df = DMatrix::from_fn(3, 3, |i, j| (i as f64 + 1.0) * (j as f64 - 1.5));
        let fr = svd_frame(&Jacobian::from_matrix(df.clone()));
        assert_eq!(fr.rank_r, 1);
        check_invariants(&fr, &df);
        let df = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let fr = svd_frame(&Jacobian::from_matrix(df.clone()));
        assert_eq!(fr.rank_r, 1);
        check_invariants(&fr, &df);
    }

    #[test]
    fn induced_metrics_are_diagonal_in_svd_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.random_range(1..=4);
            let m = rng.random_range(1..=4);
            let df = random_matrix(&mut rng, m, n, 2.0);
            let fr = svd_frame(&Jacobian::from_matrix(df.clone()));
            let data = tangent_normal_data(&Jacobian::from_matrix(df));
            let g_svd = fr.u_basis.transpose() * &data.g_metric * &fr.u_basis;
            let h_svd = fr.v_basis.transpose() * &data.h_metric * &fr.v_basis;
            let g_want = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 + fr.lambda(i).powi(2) } else { 0.0 });
            let h_want = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 + fr.lambda(i).powi(2) } else { 0.0 });
            assert!(max_abs_diff(&g_svd, &g_want) < 1e-10);
            assert!(max_abs_diff(&h_svd, &h_want) < 1e-10);
            let rel = (data.g_metric.determinant() - data.h_metric.determinant()).abs() / data.g_metric.determinant();
            assert!(rel < 1e-10);
        }
    }

    #[test]
    fn zero_differential_tangent_normal_data() {
        let data = tangent_normal_data(&jac(2, 2, &[0.0; 4]));
        assert_eq!(data.g, DMatrix::identity(2, 2));
        assert_eq!(data.h, DMatrix::identity(2, 2));
        assert_eq!(data.j, DMatrix::zeros(2, 2));
        assert_eq!(data.j_ambient, DMatrix::zeros(4, 4));
    }

    #[test]
    fn j_is_diagonal_in_the_svd_frame() {
        let df = DMatrix::from_row_slice(2, 2, &[1.7, 0.0, 0.0, 0.4]);
        let fr = svd_frame(&Jacobian::from_matrix(df.clone()));
        let j = j_by_definition(&df);
        let in_frames = fr.normal_frame.transpose() * j * &fr.tangent_frame;
        assert!(max_abs_diff(&in_frames, &DMatrix::from_row_slice(2, 2, &[1.7, 0.0, 0.0, 0.4])) < 1e-12);
    }

    #[test]
    fn j_definition_agrees_with_projection_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..1000 {
            let n = rng.random_range(1..=5);
            let m = rng.random_range(1..=5);
            let df = random_matrix(&mut rng, m, n, 2.0);
            let a = j_by_definition(&df);
            let b = j_by_projection(&df);
            let c = j_by_projection_h(&df);
            assert!(max_abs_diff(&a, &b) < 1e-10, "n={n} m={m}");
            assert!(max_abs_diff(&a, &c) < 1e-10);
            // J(e_j) = λ_j e_{n+j}
            let fr = svd_frame(&Jacobian::from_matrix(df.clone()));
            let diag = fr.normal_frame.transpose() * &a * &fr.tangent_frame;
            let want = DMatrix::from_fn(m, n, |i, j| if i == j { fr.lambda(i) } else { 0.0 });
            assert!(max_abs_diff(&diag, &want) < 1e-10);
            // in the graph bases (L_p, L_p^⊥), J is dF itself
            let data = tangent_normal_data(&Jacobian::from_matrix(df.clone()));
            assert!(max_abs_diff(&data.j, &df) < 1e-10);
        }
    }

    #[test]
    fn sylvester_identities() {
        assert_eq!(sylvester_check(&DMatrix::zeros(3, 2)), 0.0);
        let s = DMatrix::from_row_slice(1, 1, &[1.0]);
        assert!(sylvester_check(&s) < 1e-15);
        let g = DMatrix::identity(1, 1) + s.transpose() * &s;
        assert_eq!(g.determinant(), 2.0);
        let hi = g.try_inverse().unwrap();
        assert_eq!(hi.trace() - 1.0, -0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let s = random_matrix(&mut rng, 4, 3, 2.0);
            assert!(sylvester_check(&s) <= 1e-10);
        }
    }
}
