//! Seeded property suites, runnable from the command line.
//!
//! Every case draws from its own `ChaCha8Rng` seeded with the suite seed, so
//! a failure can be reproduced from the printed seed alone.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certify::{certify_grid, parse_report_json, render_csv, render_json, CertifyOptions, Grid, GridAxis, Verdict};
use crate::comass::{
    crude_sum_identity, dilation_check, epsilon_star, lower_bound, refined_binomial_identity, stiefel_lower_bound,
    taylor_check, upper_bound,
};
use crate::error::{Error, Result};
use crate::exterior::multi_index::binomial;
use crate::exterior::{Frame, NForm};
use crate::frames::{j_by_definition, j_by_projection, j_by_projection_h, svd_frame, sylvester_check};
use crate::gallery;
use crate::maps::{Builtin, GraphMap, Jacobian};
use crate::minimality::{dtheta_residual, equivalence_probe, mgs_residual};
use crate::theta::{all_routes, theta_codim2_from_jacobian, theta_h, theta_svd_coords};

pub const TAGS: [&str; 6] = ["algebra", "frames", "theta", "minimality", "comass", "certify"];
pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub tag: String,
    pub seed: u64,
    pub cases: Vec<CaseResult>,
}

type Outcome = std::result::Result<String, String>;
type Case = (&'static str, fn(&mut ChaCha8Rng) -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_form(rng: &mut ChaCha8Rng, d: usize, k: usize) -> NForm {
    let coeffs = (0..binomial(d, k)).map(|_| rng.random_range(-1.0..1.0)).collect();
    NForm::from_coeffs(d, k, coeffs).expect("sized to C(d, k)")
}

fn random_jacobian(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize, range: f64) -> Jacobian {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(1..=max_m);
    Jacobian::from_matrix(DMatrix::from_fn(m, n, |_, _| rng.random_range(-range..range)))
}

fn diagonal(m: usize, n: usize, lambda: &[f64]) -> Jacobian {
    Jacobian::diagonal(m, n, lambda)
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

// ---- algebra ----

fn graded_commutativity(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.random_range(1..=7);
        let p = rng.random_range(0..=d);
        let q = rng.random_range(0..=d - p);
        let (a, b) = (random_form(rng, d, p), random_form(rng, d, q));
        let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = a.wedge(&b).map_err(|e| e.to_string())?;
        let rhs = b.wedge(&a).map_err(|e| e.to_string())?.scale(sign);
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("200 pairs, max deviation {worst:.1e}"))
}

fn associativity(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.random_range(1..=7);
        let p = rng.random_range(0..=d);
        let q = rng.random_range(0..=d - p);
        let s = rng.random_range(0..=d - p - q);
        let (a, b, c) = (random_form(rng, d, p), random_form(rng, d, q), random_form(rng, d, s));
        let left = a.wedge(&b).and_then(|ab| ab.wedge(&c)).map_err(|e| e.to_string())?;
        let right = b.wedge(&c).and_then(|bc| a.wedge(&bc)).map_err(|e| e.to_string())?;
        worst = worst.max(left.max_abs_diff(&right));
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("100 triples, max deviation {worst:.1e}"))
}

fn interior_rules(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.random_range(2..=7);
        let p = rng.random_range(1..d);
        let q = rng.random_range(1..=d - p);
        let (a, b) = (random_form(rng, d, p), random_form(rng, d, q));
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let e = |r: Result<NForm>| r.map_err(|e| e.to_string());
        // ι_v(a∧b) = ι_v a ∧ b + (−1)^p a ∧ ι_v b
        let lhs = e(e(a.wedge(&b))?.interior(&v))?;
        let mut rhs = e(e(a.interior(&v))?.wedge(&b))?;
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        rhs.add_assign_scaled(&e(a.wedge(&e(b.interior(&v))?))?, sign);
        worst = worst.max(lhs.max_abs_diff(&rhs));
        // ι_v ι_w + ι_w ι_v = 0
        if p >= 2 {
            let mut anti = e(e(a.interior(&w))?.interior(&v))?;
            anti.add_assign_scaled(&e(e(a.interior(&v))?.interior(&w))?, 1.0);
            worst = worst.max(anti.max_abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("200 cases, max deviation {worst:.1e}"))
}

fn hodge_double_star(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let m = rng.random_range(0..=2);
        let k = rng.random_range(0..=n);
        let coeffs = (0..binomial(n, k)).map(|_| rng.random_range(-1.0..1.0)).collect();
        // a form on the base R^n, embedded in R^{n+m}
        let base = NForm::from_coeffs(n, k, coeffs).map_err(|e| e.to_string())?;
        let mut a = NForm::zero(n + m, k);
        for (idx, c) in base.terms() {
            a.set_coeff(&idx, c);
        }
        let ss = a.hodge_star_rn(n).and_then(|s| s.hodge_star_rn(n)).map_err(|e| e.to_string())?;
        let sign = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
        worst = worst.max(ss.max_abs_diff(&a.scale(sign)));
    }
    ensure(worst <= 1e-14, || format!("max deviation {worst:e}"))?;
    Ok(format!("100 forms, max deviation {worst:.1e}"))
}

fn evaluation_invariance(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.random_range(2..=7);
        let k = rng.random_range(2..=d);
        let form = random_form(rng, d, k);
        let raw = DMatrix::from_fn(d, k, |_, _| rng.random_range(-1.0..1.0));
        let a = raw.qr().q();
        let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let mut rot = DMatrix::identity(k, k);
        rot[(0, 0)] = t.cos();
        rot[(0, 1)] = -t.sin();
        rot[(1, 0)] = t.sin();
        rot[(1, 1)] = t.cos();
        let v = form.evaluate(&Frame::new(a.clone())).map_err(|e| e.to_string())?;
        let v_rot = form.evaluate(&Frame::new(&a * rot)).map_err(|e| e.to_string())?;
        let v_rev = form.evaluate(&Frame::new(a).reversed()).map_err(|e| e.to_string())?;
        worst = worst.max((v - v_rot).abs()).max((v + v_rev).abs());
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("100 planes, max deviation {worst:.1e}"))
}

// ---- frames ----

fn svd_frame_properties(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..300 {
        let df = random_jacobian(rng, 5, 5, 2.0);
        let fr = svd_frame(&df);
        let e = fr.full_frame();
        let ortho = (e.transpose() * &e - DMatrix::identity(e.nrows(), e.nrows())).abs().max();
        worst = worst.max(ortho);
        for i in 0..df.n().min(df.m()) {
            let lhs = &df.entries * fr.u_basis.column(i);
            let rhs = fr.v_basis.column(i) * fr.lambda(i);
            worst = worst.max((lhs - rhs).abs().max());
        }
        let j = j_by_definition(&df.entries);
        let jd = fr.normal_frame.transpose() * j * &fr.tangent_frame;
        for a in 0..df.m() {
            for i in 0..df.n() {
                let want = if a == i { fr.lambda(i) } else { 0.0 };
                worst = worst.max((jd[(a, i)] - want).abs());
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("300 Jacobians, max deviation {worst:.1e}"))
}

fn j_routes(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let df = random_jacobian(rng, 4, 4, 2.0).entries;
        let a = j_by_definition(&df);
        worst = worst
            .max((&a - j_by_projection(&df)).abs().max())
            .max((&a - j_by_projection_h(&df)).abs().max());
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("1000 Jacobians, max deviation {worst:.1e}"))
}

fn sylvester(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let s = random_jacobian(rng, 6, 6, 2.0).entries;
        worst = worst.max(sylvester_check(&s));
    }
    ensure(worst <= 1e-10, || format!("max error {worst:e}"))?;
    Ok(format!("1000 matrices, max error {worst:.1e}"))
}

// ---- theta ----

fn four_routes(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut worst, mut worst_codim2) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let df = random_jacobian(rng, 4, 3, 2.0);
        let (_, dev) = all_routes(&df);
        worst = worst.max(dev);
        if df.m() == 2 {
            let c2 = theta_codim2_from_jacobian(&df).map_err(|e| e.to_string())?;
            worst_codim2 = worst_codim2.max(c2.form.max_abs_diff(&theta_h(&df).form));
        }
    }
    ensure(worst <= 1e-9 && worst_codim2 <= 1e-10, || {
        format!("routes {worst:e}, codim2 {worst_codim2:e}")
    })?;
    Ok(format!("500 Jacobians, routes {worst:.1e}, codim2 {worst_codim2:.1e}"))
}

fn restriction(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let df = random_jacobian(rng, 4, 3, 2.0);
        let t = Frame::new(svd_frame(&df).oriented_tangent_frame());
        let (forms, _) = all_routes(&df);
        for f in forms {
            worst = worst.max((f.form.evaluate(&t).map_err(|e| e.to_string())? - 1.0).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max |Θ(T) − 1| = {worst:e}"))?;
    Ok(format!("500 Jacobians, max |Θ(T) − 1| = {worst:.1e}"))
}

fn no_single_normal_component(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let df = random_jacobian(rng, 4, 3, 2.0);
        let fr = svd_frame(&df);
        let theta = theta_h(&df).form;
        for j in 0..df.n() {
            for a in 0..df.m() {
                let mut cols = fr.oriented_tangent_frame();
                cols.set_column(j, &fr.normal_frame.column(a));
                worst = worst.max(theta.evaluate(&Frame::new(cols)).map_err(|e| e.to_string())?.abs());
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max value {worst:e}"))?;
    Ok(format!("100 Jacobians, max value {worst:.1e}"))
}

fn mixed_frames(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let lambda = sorted_desc((0..n).map(|_| rng.random_range(0.05..2.0)).collect());
        let fr = svd_frame(&diagonal(n, n, &lambda));
        let theta = theta_svd_coords(&fr).form;
        for ell in 1..=n {
            let mut cols = fr.tangent_frame.clone();
            for i in 0..ell {
                cols.set_column(i, &fr.normal_frame.column(i));
            }
            // the formula is stated in the frame's own orientation
            let got = theta.evaluate(&Frame::new(cols)).map_err(|e| e.to_string())? * fr.orientation();
            let prod: f64 = (0..ell).map(|i| fr.lambda(i)).product();
            let sign = if (ell - 1) % 2 == 0 { 1.0 } else { -1.0 };
            worst = worst.max((got - (ell as f64 - 1.0) * sign * prod).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("100 diagonal Jacobians, max deviation {worst:.1e}"))
}

// ---- minimality ----

fn polynomial_minimal_maps(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for name in ["linear", "identity", "holomorphic_square"] {
        let f = gallery::entry(name).map_err(|e| e.to_string())?.map;
        for _ in 0..100 {
            let x: Vec<f64> = (0..f.n()).map(|_| rng.random_range(-0.95..0.95)).collect();
            let r = mgs_residual(&f, &x).map_err(|e| e.to_string())?;
            worst = worst.max(r.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
    }
    ensure(worst <= 1e-9, || format!("max residual {worst:e}"))?;
    Ok(format!("300 points, max residual {worst:.1e}"))
}

fn scherk_convergence(_: &mut ChaCha8Rng) -> Outcome {
    let f = gallery::entry("scherk").map_err(|e| e.to_string())?.map;
    let x = [0.3, 0.2];
    let r: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&h| dtheta_residual(&f, &x, h))
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = r.windows(2).map(|w| w[0] / w[1]).collect();
    ensure(ratios.iter().all(|q| (3.5..=4.5).contains(q)), || format!("ratios {ratios:?}"))?;
    Ok(format!("ratios {:.3}, {:.3}", ratios[0], ratios[1]))
}

fn residual_equivalence(_: &mut ChaCha8Rng) -> Outcome {
    let mut details = Vec::new();
    for e in gallery::entries() {
        let s = equivalence_probe(&e.map, &e.reference_points()).map_err(|err| err.to_string())?;
        if e.is_minimal {
            ensure(s.max_mgs_norm <= 1e-6 && s.max_dtheta_norm <= 1e-6, || {
                format!("{}: mgs {:e}, dΘ {:e}", e.name, s.max_mgs_norm, s.max_dtheta_norm)
            })?;
            details.push(format!("{} ≤ {:.1e}", e.name, s.max_mgs_norm.max(s.max_dtheta_norm)));
        } else {
            let (lo, hi) = (s.min_ratio.unwrap_or(0.0), s.max_ratio.unwrap_or(f64::INFINITY));
            ensure(lo >= 0.05 && hi <= 20.0, || format!("{}: ratio range [{lo}, {hi}]", e.name))?;
            details.push(format!("{} ratio ∈ [{lo:.3}, {hi:.3}]", e.name));
        }
    }
    let p = gallery::entry("paraboloid").map_err(|e| e.to_string())?.map;
    let mgs = mgs_residual(&p, &[0.5, 0.5]).map_err(|e| e.to_string())?[0].abs();
    let dth = dtheta_residual(&p, &[0.5, 0.5], 1e-4).map_err(|e| e.to_string())?;
    ensure(mgs > 1e-3 && dth > 1e-3, || format!("paraboloid at (0.5, 0.5): {mgs:e}, {dth:e}"))?;
    Ok(details.join("; "))
}

// ---- comass ----

fn crude_identity(_: &mut ChaCha8Rng) -> Outcome {
    for r in 2..=12 {
        let v = crude_sum_identity(r).map_err(|e| e.to_string())?;
        ensure(v == num_rational::BigRational::from_integer(1.into()), || format!("r = {r}: {v}"))?;
    }
    Ok("exactly 1 for r = 2..12".into())
}

fn refined_identity(_: &mut ChaCha8Rng) -> Outcome {
    let mut count = 0;
    for r in 1..=10 {
        for ell in 0..=2 * r {
            let (l, rr) = refined_binomial_identity(r, ell).map_err(|e| e.to_string())?;
            ensure(l == rr, || format!("r = {r}, ℓ = {ell}: {l} ≠ {rr}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} exact cases"))
}

fn bracketing(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=4);
        let k = n.min(m);
        let lambda = sorted_desc((0..k).map(|_| rng.random_range(0.0..1.5)).collect());
        let df = diagonal(m, n, &lambda);
        let r = svd_frame(&df).rank_r;
        let lower = lower_bound(&theta_h(&df), 8, rng.random()).value;
        let upper = upper_bound(&lambda, r).0;
        worst = worst.max(lower - upper);
    }
    ensure(worst <= 1e-7, || format!("lower − upper reached {worst:e}"))?;
    Ok(format!("200 cases, max lower − upper = {worst:.1e}"))
}

fn calibration_certificate(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let r = rng.random_range(2..=4);
        let mut lambda = sorted_desc((0..r).map(|_| rng.random_range(0.05..1.5)).collect());
        let limit = 1.0 / ((r - 1) as f64).powi(2);
        let excess = lambda[0] * lambda[1] / limit;
        if excess > 1.0 {
            let s = 1.0 / excess.sqrt();
            lambda.iter_mut().for_each(|l| *l *= s);
        }
        ensure(dilation_check(&lambda, r, 0.0).crude_ok, || format!("{lambda:?} not crude"))?;
        let lower = lower_bound(&theta_h(&diagonal(r, r, &lambda)), 16, rng.random()).value;
        ensure(upper_bound(&lambda, r).0 <= 1.0 + 1e-12, || format!("upper > 1 at {lambda:?}"))?;
        worst = worst.max(lower);
    }
    ensure(worst <= 1.0 + 1e-6, || format!("lower bound {worst}"))?;
    Ok(format!("30 cases, max lower bound {worst:.9}"))
}

fn violation_witness(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = f64::INFINITY;
    for _ in 0..10 {
        let lambda = sorted_desc(vec![rng.random_range(1.05..2.5), rng.random_range(1.05..2.5)]);
        let lower = lower_bound(&theta_h(&diagonal(2, 2, &lambda)), 32, rng.random()).value;
        worst = worst.min(lower - lambda[0] * lambda[1]);
    }
    ensure(worst >= -1e-6, || format!("lower fell {worst:e} below λ1λ2"))?;
    Ok(format!("10 cases, min lower − λ1λ2 = {worst:.1e}"))
}

fn taylor(_: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for r in 2..=6usize {
        for tau in [0.1, 1.0 / (r as f64 - 1.0), 0.9] {
            let (got, want) = taylor_check(tau, r);
            let err = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
            worst = worst.max(err);
        }
    }
    ensure(worst <= 1e-3, || format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn epsilon_finder(_: &mut ChaCha8Rng) -> Outcome {
    let (e2, _) = epsilon_star(2, 1e-12).map_err(|e| e.to_string())?;
    ensure((e2 - 1.0).abs() <= 1e-9, || format!("ε*(2) = {e2}"))?;
    let mut list = vec![format!("ε*(2) = {e2:.9}")];
    for r in 3..=8 {
        let (e, _) = epsilon_star(r, 1e-10).map_err(|e| e.to_string())?;
        ensure(e > 0.0 && e <= 1.0, || format!("ε*({r}) = {e}"))?;
        list.push(format!("ε*({r}) = {e:.6}"));
    }
    Ok(list.join(", "))
}

fn reduction(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst_equal = 0.0f64;
    let mut gaps = Vec::new();
    for _ in 0..6 {
        let r = rng.random_range(2..=3);
        let lambda = sorted_desc((0..r).map(|_| rng.random_range(0.1..1.8)).collect());
        let seed = rng.random();
        let reduced = stiefel_lower_bound(&lambda, r, 32, seed).map_err(|e| e.to_string())?;
        let full = lower_bound(&theta_h(&diagonal(r, r, &lambda)), 32, seed).value;
        worst_equal = worst_equal.max((full - reduced).abs());
        let wide = lower_bound(&theta_h(&diagonal(r, r + 1, &lambda)), 32, seed).value;
        gaps.push(wide - reduced);
    }
    ensure(worst_equal <= 1e-5, || format!("n = r gap {worst_equal:e}"))?;
    let max_gap = gaps.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    Ok(format!("n = r gap {worst_equal:.1e}; n = r+1 gap (reported only) {max_gap:.1e}"))
}

// ---- certify ----

fn gallery_verdicts(_: &mut ChaCha8Rng) -> Outcome {
    for e in gallery::entries() {
        let rep = certify_grid(&e.map, &e.reference_grid, &CertifyOptions::default()).map_err(|err| err.to_string())?;
        if let Some(v) = e.expected_verdict {
            let got = rep.summary.pointwise.get(v);
            ensure(got == e.reference_grid.len(), || format!("{}: {got} of {} are {}", e.name, e.reference_grid.len(), v.as_str()))?;
        }
        ensure(rep.summary.pointwise.total() == rep.points.len(), || "counts do not sum".into())?;
    }
    Ok("every gallery entry matches its expected verdict".into())
}

fn holomorphic_region(_: &mut ChaCha8Rng) -> Outcome {
    let f = gallery::entry("holomorphic_square").map_err(|e| e.to_string())?.map;
    let grid = Grid::new(vec![GridAxis { lo: -0.6, hi: 0.6, count: 41 }; 2]).map_err(|e| e.to_string())?;
    let opts = CertifyOptions::default();
    let a = certify_grid(&f, &grid, &opts).map_err(|e| e.to_string())?;
    let b = certify_grid(&f, &grid, &CertifyOptions { threads: Some(1), ..opts }).map_err(|e| e.to_string())?;
    ensure(a.summary.pointwise.calibrated_crude == 41 * 41, || "not all calibrated_crude".into())?;
    ensure(render_csv(&a) == render_csv(&b), || "parallel and serial CSV differ".into())?;
    let json = render_json(&a);
    let again = parse_report_json(&json).map_err(|e| e.to_string())?;
    ensure(render_json(&again) == json, || "JSON round trip is not byte-identical".into())?;
    Ok("1681 points calibrated_crude; serial = parallel; JSON round-trips".into())
}

fn monotone_verdicts(rng: &mut ChaCha8Rng) -> Outcome {
    let grid = Grid::new(vec![GridAxis { lo: 0.0, hi: 0.0, count: 1 }; 3]).map_err(|e| e.to_string())?;
    for _ in 0..20 {
        let base: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut prev: Option<Verdict> = None;
        for s in [1.0, 0.7, 0.5, 0.3, 0.1] {
            let m: Vec<f64> = base.iter().map(|v| v * s).collect();
            let f = GraphMap::builtin(Builtin::Linear { matrix: m }, 3, 2, None).map_err(|e| e.to_string())?;
            let v = certify_grid(&f, &grid, &CertifyOptions::default()).map_err(|e| e.to_string())?.points[0].verdict;
            if let Some(p) = prev {
                ensure(!(p != Verdict::NotCertified && v == Verdict::NotCertified), || format!("{base:?}: {p:?} → {v:?} at scale {s}"))?;
            }
            prev = Some(v);
        }
    }
    Ok("20 linear maps × 5 scalings".into())
}

fn cases(tag: &str) -> Option<Vec<Case>> {
    Some(match tag {
        "algebra" => vec![
            ("graded_commutativity", graded_commutativity),
            ("associativity", associativity),
            ("interior_rules", interior_rules),
            ("hodge_double_star", hodge_double_star),
            ("evaluation_invariance", evaluation_invariance),
        ],
        "frames" => vec![
            ("svd_frame_properties", svd_frame_properties),
            ("j_routes_agree", j_routes),
            ("sylvester_identities", sylvester),
        ],
        "theta" => vec![
            ("four_route_agreement", four_routes),
            ("restriction_is_volume", restriction),
            ("no_single_normal_component", no_single_normal_component),
            ("mixed_frame_values", mixed_frames),
        ],
        "minimality" => vec![
            ("polynomial_minimal_maps", polynomial_minimal_maps),
            ("scherk_quadratic_convergence", scherk_convergence),
            ("residual_equivalence", residual_equivalence),
        ],
        "comass" => vec![
            ("crude_sum_identity", crude_identity),
            ("refined_binomial_identity", refined_identity),
            ("bracketing", bracketing),
            ("calibration_certificate", calibration_certificate),
            ("violation_witness", violation_witness),
            ("taylor_consistency", taylor),
            ("epsilon_star", epsilon_finder),
            ("reduction_consistency", reduction),
        ],
        "certify" => vec![
            ("gallery_verdicts", gallery_verdicts),
            ("holomorphic_region", holomorphic_region),
            ("verdict_monotonicity", monotone_verdicts),
        ],
        _ => return None,
    })
}

pub fn run_suite(tag: &str, seed: u64) -> Result<SuiteReport> {
    let list = cases(tag).ok_or_else(|| {
        Error::InvalidArgument(format!("unknown suite `{tag}`; expected one of {}", TAGS.join(", ")))
    })?;
    let cases = list
        .into_iter()
        .map(|(name, case)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = Instant::now();
            // a panicking case is a failing case
            let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| case(&mut rng)))
                .unwrap_or_else(|_| Err("panicked".into()));
            let seconds = start.elapsed().as_secs_f64();
            match outcome {
                Ok(detail) => CaseResult { name, passed: true, detail, seconds },
                Err(detail) => CaseResult { name, passed: false, detail: format!("{detail} (seed {seed})"), seconds },
            }
        })
        .collect();
    Ok(SuiteReport {
        tag: tag.into(),
        seed,
        cases,
    })
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            let _ = writeln!(out, "{} {}/{}: {}", if c.passed { "PASS" } else { "FAIL" }, self.tag, c.name, c.detail);
        }
        let failed = self.cases.iter().filter(|c| !c.passed).count();
        let _ = writeln!(out, "{}: {} passed, {} failed (seed {})", self.tag, self.cases.len() - failed, failed, self.seed);
        out
    }

    pub fn render_junit(&self) -> String {
        let failed = self.cases.iter().filter(|c| !c.passed).count();
        let total: f64 = self.cases.iter().map(|c| c.seconds).sum();
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<testsuite name=\"{}\" tests=\"{}\" failures=\"{failed}\" time=\"{total:.3}\">",
            xml_escape(&self.tag),
            self.cases.len()
        );
        for c in &self.cases {
            let _ = write!(out, "  <testcase classname=\"{}\" name=\"{}\" time=\"{:.3}\"", xml_escape(&self.tag), xml_escape(c.name), c.seconds);
            if c.passed {
                out.push_str("/>\n");
            } else {
                let _ = writeln!(out, ">\n    <failure message=\"{}\"/>\n  </testcase>", xml_escape(&c.detail));
            }
        }
        out.push_str("</testsuite>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_tag_is_rejected() {
        assert!(run_suite("nope", 0).is_err());
    }

    #[test]
    fn algebra_suite_passes() {
        let rep = run_suite("algebra", DEFAULT_SEED).unwrap();
        assert!(rep.passed(), "{}", rep.render_text());
        assert_eq!(rep.render_text().lines().count(), rep.cases.len() + 1);
    }

    #[test]
    fn junit_output_escapes_and_counts() {
        let rep = SuiteReport {
            tag: "t".into(),
            seed: 1,
            cases: vec![
                CaseResult { name: "a", passed: true, detail: String::new(), seconds: 0.0 },
                CaseResult { name: "b", passed: false, detail: "x < y & z".into(), seconds: 0.5 },
            ],
        };
        let xml = rep.render_junit();
        assert!(xml.contains("tests=\"2\" failures=\"1\""));
        assert!(xml.contains("x &lt; y &amp; z"));
        assert!(!rep.passed());
    }
}
