//! Graphical maps `F: Ω ⊂ R^n → R^m` and their first and second differentials.
//!
//! All first and second derivatives are exact: polynomials are
//! differentiated term by term, and the one transcendental gallery entry
//! (Scherk's surface) carries closed-form derivatives.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack applied to the closed domain intervals.
pub const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub coef: f64,
}

impl Monomial {
    fn eval(&self, x: &[f64]) -> f64 {
        self.coef
            * self
                .exps
                .iter()
                .zip(x)
                .map(|(&e, &xi)| xi.powi(e as i32))
                .product::<f64>()
    }

    /// Exact mixed partial derivative `∂^{orders} (coef · x^exps)`.
    fn derivative(&self, orders: &[u32], x: &[f64]) -> f64 {
        let mut acc = self.coef;
        for ((&e, &o), &xi) in self.exps.iter().zip(orders).zip(x) {
            if o > e {
                return 0.0;
            }
            let falling: f64 = (0..o).map(|t| (e - t) as f64).product();
            acc *= falling * xi.powi((e - o) as i32);
        }
        acc
    }
}

/// One polynomial per output component.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub components: Vec<Vec<Monomial>>,
}

impl Polynomial {
    fn partial(&self, alpha: usize, orders: &[u32], x: &[f64]) -> f64 {
        self.components[alpha]
            .iter()
            .map(|t| t.derivative(orders, x))
            .sum()
    }
}

/// Value, Jacobian and per-component Hessians at a point.
type Jet = (Vec<f64>, DMatrix<f64>, Vec<DMatrix<f64>>);

#[derive(Clone, Debug, PartialEq)]
pub enum Builtin {
    /// `F(x) = A x` for an `m×n` matrix given row-major.
    Linear { matrix: Vec<f64> },
    /// `F(x) = s·x` with `n = m`.
    Identity { scale: f64 },
    /// `F = s·((x1²−x2²)/2, x1 x2)`, the real form of `z ↦ s z²/2`.
    HolomorphicSquare { scale: f64 },
    /// `f = log cos x1 − log cos x2` on `(−π/2, π/2)²`.
    Scherk,
    /// `f = x1² + x2²`, not minimal.
    Paraboloid,
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Linear { .. } => "linear",
            Builtin::Identity { .. } => "identity",
            Builtin::HolomorphicSquare { .. } => "holomorphic_square",
            Builtin::Scherk => "scherk",
            Builtin::Paraboloid => "paraboloid",
        }
    }

    /// Exact polynomial form, when the entry has one.
    fn as_polynomial(&self, n: usize, m: usize) -> Option<Polynomial> {
        let unit = |j: usize, power: u32| {
            let mut e = vec![0u32; n];
            e[j] = power;
            e
        };
        match self {
            Builtin::Linear { matrix } => {
                let components = (0..m)
                    .map(|a| {
                        (0..n)
                            .filter_map(|j| {
                                let c = matrix.get(a * n + j).copied().unwrap_or(0.0);
                                (c != 0.0).then(|| Monomial { exps: unit(j, 1), coef: c })
                            })
                            .collect()
                    })
                    .collect();
                Some(Polynomial { components })
            }
            Builtin::Identity { scale } => Some(Polynomial {
                components: (0..m)
                    .map(|a| vec![Monomial { exps: unit(a, 1), coef: *scale }])
                    .collect(),
            }),
            Builtin::HolomorphicSquare { scale } => Some(Polynomial {
                components: vec![
                    vec![
                        Monomial { exps: vec![2, 0], coef: 0.5 * scale },
                        Monomial { exps: vec![0, 2], coef: -0.5 * scale },
                    ],
                    vec![Monomial { exps: vec![1, 1], coef: *scale }],
                ],
            }),
            Builtin::Paraboloid => Some(Polynomial {
                components: vec![vec![
                    Monomial { exps: vec![2, 0], coef: 1.0 },
                    Monomial { exps: vec![0, 2], coef: 1.0 },
                ]],
            }),
            Builtin::Scherk => None,
        }
    }

    /// Required `(n, m)`, or `None` when any shape is allowed.
    pub fn shape(&self) -> Option<(usize, usize)> {
        match self {
            Builtin::Linear { .. } | Builtin::Identity { .. } => None,
            Builtin::HolomorphicSquare { .. } => Some((2, 2)),
            Builtin::Scherk | Builtin::Paraboloid => Some((2, 1)),
        }
    }

    fn eval_analytic(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Builtin::Scherk => {
                if x[0].abs() >= FRAC_PI_2 || x[1].abs() >= FRAC_PI_2 {
                    return Err(Error::Undefined {
                        name: self.name().into(),
                        point: x.to_vec(),
                    });
                }
                let (c0, c1) = (x[0].cos(), x[1].cos());
                if c0 <= 0.0 || c1 <= 0.0 {
                    return Err(Error::Undefined {
                        name: self.name().into(),
                        point: x.to_vec(),
                    });
                }
                Ok(vec![c0.ln() - c1.ln()])
            }
            _ => unreachable!("polynomial builtins are evaluated exactly"),
        }
    }

    /// `(f, ∂f, ∂²f)` for the non-polynomial entries.
    fn analytic_jet(&self, x: &[f64]) -> Result<Jet> {
        let value = self.eval_analytic(x)?;
        match self {
            Builtin::Scherk => {
                // ∂ log cos x = −tan x, ∂² log cos x = −sec² x
                let (t0, t1) = (x[0].tan(), x[1].tan());
                let grad = DMatrix::from_row_slice(1, 2, &[-t0, t1]);
                let hess = DMatrix::from_row_slice(2, 2, &[-(1.0 + t0 * t0), 0.0, 0.0, 1.0 + t1 * t1]);
                Ok((value, grad, vec![hess]))
            }
            _ => unreachable!("polynomial builtins are differentiated exactly"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapKind {
    Polynomial(Polynomial),
    Builtin(Builtin),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphMap {
    n: usize,
    m: usize,
    kind: MapKind,
    domain: Vec<[f64; 2]>,
    exact: Option<Polynomial>,
}

/// `dF` at a point: entry `(α, j)` is `∂_j f_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian {
    pub entries: DMatrix<f64>,
    pub base_point: Vec<f64>,
}

impl Jacobian {
    /// A Jacobian not tied to any map, e.g. a synthetic `diag(λ)`.
    pub fn from_matrix(entries: DMatrix<f64>) -> Self {
        let n = entries.ncols();
        Jacobian {
            entries,
            base_point: vec![0.0; n],
        }
    }

    /// `m×n` with `λ_i` in entry `(i, i)`; missing values are zero.
    pub fn diagonal(m: usize, n: usize, lambda: &[f64]) -> Self {
        Self::from_matrix(DMatrix::from_fn(m, n, |i, j| {
            if i == j {
                lambda.get(i).copied().unwrap_or(0.0)
            } else {
                0.0
            }
        }))
    }

    pub fn n(&self) -> usize {
        self.entries.ncols()
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }
}

impl GraphMap {
    pub fn new(n: usize, m: usize, kind: MapKind, domain: Option<Vec<[f64; 2]>>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::schema("n", "n and m must be at least 1"));
        }
        let domain = domain.unwrap_or_else(|| vec![[-1.0, 1.0]; n]);
        if domain.len() != n {
            return Err(Error::schema(
                "domain",
                format!("expected {n} intervals, found {}", domain.len()),
            ));
        }
        for (i, [lo, hi]) in domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::schema(format!("domain[{i}]"), "need finite lo ≤ hi"));
            }
        }
        let exact = match &kind {
            MapKind::Polynomial(p) => {
                if p.components.len() != m {
                    return Err(Error::schema(
                        "components",
                        format!("expected {m} components, found {}", p.components.len()),
                    ));
                }
                for (a, comp) in p.components.iter().enumerate() {
                    for (t, term) in comp.iter().enumerate() {
                        if term.exps.len() != n {
                            return Err(Error::schema(
                                format!("components[{a}][{t}].exps"),
                                format!("expected {n} exponents, found {}", term.exps.len()),
                            ));
                        }
                        if !term.coef.is_finite() {
                            return Err(Error::schema(
                                format!("components[{a}][{t}].coef"),
                                "coefficient must be finite",
                            ));
                        }
                    }
                }
                Some(p.clone())
            }
            MapKind::Builtin(b) => {
                if let Some((bn, bm)) = b.shape() {
                    if (bn, bm) != (n, m) {
                        return Err(Error::schema(
                            "name",
                            format!("builtin `{}` needs n={bn}, m={bm}", b.name()),
                        ));
                    }
                }
                match b {
                    Builtin::Linear { matrix } if !matrix.is_empty() && matrix.len() != n * m => {
                        return Err(Error::schema(
                            "params",
                            format!("linear map needs {} entries, found {}", n * m, matrix.len()),
                        ));
                    }
                    Builtin::Identity { .. } if n != m => {
                        return Err(Error::schema("name", "identity needs n = m"));
                    }
                    _ => {}
                }
                b.as_polynomial(n, m)
            }
        };
        Ok(GraphMap {
            n,
            m,
            kind,
            domain,
            exact,
        })
    }

    pub fn polynomial(components: Vec<Vec<Monomial>>, n: usize, domain: Option<Vec<[f64; 2]>>) -> Result<Self> {
        let m = components.len();
        Self::new(n, m, MapKind::Polynomial(Polynomial { components }), domain)
    }

    pub fn builtin(b: Builtin, n: usize, m: usize, domain: Option<Vec<[f64; 2]>>) -> Result<Self> {
        Self::new(n, m, MapKind::Builtin(b), domain)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn domain(&self) -> &[[f64; 2]] {
        &self.domain
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n
            && x.iter()
                .zip(&self.domain)
                .all(|(v, [lo, hi])| *v >= lo - DOMAIN_SLACK && *v <= hi + DOMAIN_SLACK)
    }

    /// Distance from `x` to the boundary of the domain box.
    pub fn margin(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.domain)
            .map(|(v, [lo, hi])| (v - lo).min(hi - v))
            .fold(f64::INFINITY, f64::min)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} for a map on R^{}",
                x.len(),
                self.n
            )));
        }
        if !self.contains(x) {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        Ok(())
    }

    /// `F(x)` without the domain check.
    fn eval_raw(&self, x: &[f64]) -> Result<Vec<f64>> {
        match (&self.exact, &self.kind) {
            (Some(p), _) => Ok(p
                .components
                .iter()
                .map(|c| c.iter().map(|t| t.eval(x)).sum())
                .collect()),
            (None, MapKind::Builtin(b)) => b.eval_analytic(x),
            (None, MapKind::Polynomial(_)) => unreachable!(),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.eval_raw(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<Jacobian> {
        self.check_point(x)?;
        let (n, m) = (self.n, self.m);
        let mut entries = DMatrix::zeros(m, n);
        match &self.exact {
            Some(p) => {
                let mut orders = vec![0u32; n];
                for j in 0..n {
                    orders[j] = 1;
                    for a in 0..m {
                        entries[(a, j)] = p.partial(a, &orders, x);
                    }
                    orders[j] = 0;
                }
            }
            None => match &self.kind {
                MapKind::Builtin(bi) => entries = bi.analytic_jet(x)?.1,
                MapKind::Polynomial(_) => unreachable!(),
            },
        }
        Ok(Jacobian {
            entries,
            base_point: x.to_vec(),
        })
    }

    /// One symmetric `n×n` Hessian per component.
    pub fn hessians(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.check_point(x)?;
        let (n, m) = (self.n, self.m);
        let mut out = vec![DMatrix::zeros(n, n); m];
        match &self.exact {
            Some(p) => {
                let mut orders = vec![0u32; n];
                for j in 0..n {
                    for k in j..n {
                        orders[j] += 1;
                        orders[k] += 1;
                        for (a, hess) in out.iter_mut().enumerate() {
                            let v = p.partial(a, &orders, x);
                            hess[(j, k)] = v;
                            hess[(k, j)] = v;
                        }
                        orders[j] -= 1;
                        orders[k] -= 1;
                    }
                }
            }
            None => match &self.kind {
                MapKind::Builtin(bi) => out = bi.analytic_jet(x)?.2,
                MapKind::Polynomial(_) => unreachable!(),
            },
        }
        Ok(out)
    }

    /// Serializes back to the map spec schema.
    pub fn to_spec_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("n".into(), self.n.into());
        obj.insert("m".into(), self.m.into());
        match &self.kind {
            MapKind::Polynomial(p) => {
                obj.insert("kind".into(), "polynomial".into());
                obj.insert(
                    "components".into(),
                    serde_json::to_value(&p.components).expect("serializable"),
                );
            }
            MapKind::Builtin(b) => {
                obj.insert("kind".into(), "builtin".into());
                obj.insert("name".into(), b.name().into());
                let params: Vec<f64> = match b {
                    Builtin::Linear { matrix } => matrix.clone(),
                    Builtin::Identity { scale } | Builtin::HolomorphicSquare { scale } => vec![*scale],
                    Builtin::Scherk | Builtin::Paraboloid => vec![],
                };
                if !params.is_empty() {
                    obj.insert("params".into(), params.into());
                }
            }
        }
        obj.insert(
            "domain".into(),
            serde_json::to_value(&self.domain).expect("serializable"),
        );
        serde_json::Value::Object(obj)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    n: usize,
    m: usize,
    kind: String,
    components: Option<Vec<Vec<Monomial>>>,
    name: Option<String>,
    params: Option<Vec<f64>>,
    domain: Option<Vec<[f64; 2]>>,
}

/// Constructs a builtin from its gallery name and parameter list.
pub fn builtin_from_name(name: &str, params: &[f64]) -> Result<Builtin> {
    let scale = |default: f64| -> Result<f64> {
        match params {
            [] => Ok(default),
            [s] if s.is_finite() => Ok(*s),
            _ => Err(Error::schema("params", format!("`{name}` takes one finite scale"))),
        }
    };
    let none = || -> Result<()> {
        if params.is_empty() {
            Ok(())
        } else {
            Err(Error::schema("params", format!("`{name}` takes no parameters")))
        }
    };
    Ok(match name {
        "linear" => {
            if params.iter().any(|p| !p.is_finite()) {
                return Err(Error::schema("params", "matrix entries must be finite"));
            }
            Builtin::Linear { matrix: params.to_vec() }
        }
        "identity" => Builtin::Identity { scale: scale(1.0)? },
        "holomorphic_square" => Builtin::HolomorphicSquare { scale: scale(1.0)? },
        "scherk" => {
            none()?;
            Builtin::Scherk
        }
        "paraboloid" => {
            none()?;
            Builtin::Paraboloid
        }
        other => return Err(Error::schema("name", format!("unknown builtin `{other}`"))),
    })
}

/// Parses and validates a map spec document.
pub fn parse_map_spec(text: &str) -> Result<GraphMap> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(if path.is_empty() { ".".into() } else { path }, e.inner().to_string())
    })?;
    let kind = match raw.kind.as_str() {
        "polynomial" => {
            if raw.name.is_some() || raw.params.is_some() {
                return Err(Error::schema("kind", "polynomial maps take no name/params"));
            }
            let components = raw
                .components
                .ok_or_else(|| Error::schema("components", "required for polynomial maps"))?;
            MapKind::Polynomial(Polynomial { components })
        }
        "builtin" => {
            if raw.components.is_some() {
                return Err(Error::schema("components", "not allowed for builtin maps"));
            }
            let name = raw
                .name
                .ok_or_else(|| Error::schema("name", "required for builtin maps"))?;
            MapKind::Builtin(builtin_from_name(&name, raw.params.as_deref().unwrap_or(&[]))?)
        }
        other => {
            return Err(Error::schema(
                "kind",
                format!("expected \"polynomial\" or \"builtin\", found \"{other}\""),
            ))
        }
    };
    GraphMap::new(raw.n, raw.m, kind, raw.domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square_map() -> GraphMap {
        parse_map_spec(
            r#"{"n":2,"m":2,"kind":"polynomial","components":[
                [{"exps":[2,0],"coef":0.5},{"exps":[0,2],"coef":-0.5}],
                [{"exps":[1,1],"coef":1.0}]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn linear_map_jacobian_is_constant() {
        let a = vec![1.0, -2.0, 0.5, 3.0, 0.0, 4.0];
        let f = GraphMap::builtin(Builtin::Linear { matrix: a.clone() }, 3, 2, None).unwrap();
        for x in [[0.0, 0.0, 0.0], [0.3, -0.7, 0.9]] {
            let j = f.jacobian(&x).unwrap();
            assert_eq!(j.entries, DMatrix::from_row_slice(2, 3, &a));
            for h in f.hessians(&x).unwrap() {
                assert_eq!(h, DMatrix::zeros(3, 3));
            }
        }
    }

    #[test]
    fn square_map_jacobian_at_unit_point() {
        let j = square_map().jacobian(&[1.0, 0.0]).unwrap();
        assert_eq!(j.entries, DMatrix::identity(2, 2));
    }

    #[test]
    fn monomial_hessian() {
        let f = GraphMap::polynomial(
            vec![vec![Monomial { exps: vec![2, 0], coef: 1.0 }], vec![]],
            2,
            None,
        )
        .unwrap();
        let h = f.hessians(&[0.2, 0.4]).unwrap();
        assert_eq!(h[0], DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));
        assert_eq!(h[1], DMatrix::zeros(2, 2));
    }

    #[test]
    fn scherk_at_origin() {
        let f = parse_map_spec(r#"{"n":2,"m":1,"kind":"builtin","name":"scherk"}"#).unwrap();
        let j = f.jacobian(&[0.0, 0.0]).unwrap();
        assert!(j.entries.iter().all(|v| v.abs() < 1e-12));
        let h = &f.hessians(&[0.0, 0.0]).unwrap()[0];
        // d²/dx² log cos x = −sec² x
        assert_eq!(h[(0, 0)], -1.0);
        assert_eq!(h[(1, 1)], 1.0);
        assert_eq!(h[(0, 1)], 0.0);
    }

    #[test]
    fn scherk_jacobian_matches_differenced_values() {
        let f = GraphMap::builtin(Builtin::Scherk, 2, 1, Some(vec![[-1.5, 1.5]; 2])).unwrap();
        let h = 1e-5;
        for x in [[0.3, 0.2], [-0.8, 0.5], [1.0, -1.0]] {
            let j = f.jacobian(&x).unwrap().entries;
            for k in 0..2 {
                let (mut xp, mut xm) = (x, x);
                xp[k] += h;
                xm[k] -= h;
                let fd = (f.value(&xp).unwrap()[0] - f.value(&xm).unwrap()[0]) / (2.0 * h);
                assert!((fd - j[(0, k)]).abs() < 1e-8, "x={x:?} k={k}");
            }
        }
    }

    #[test]
    fn scherk_is_undefined_on_the_boundary() {
        let f = GraphMap::builtin(Builtin::Scherk, 2, 1, Some(vec![[-2.0, 2.0]; 2])).unwrap();
        assert!(matches!(f.jacobian(&[FRAC_PI_2, 0.0]), Err(Error::Undefined { .. })));
        assert!(matches!(f.jacobian(&[1.8, 0.0]), Err(Error::Undefined { .. })));
    }

    #[test]
    fn domain_check_uses_slack() {
        let f = square_map();
        assert!(f.jacobian(&[1.0 + 1e-13, -1.0]).is_ok());
        assert!(matches!(f.jacobian(&[1.0 + 1e-9, 0.0]), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn parse_builtin_and_polynomial() {
        let f = parse_map_spec(r#"{"n":2,"m":1,"kind":"builtin","name":"scherk"}"#).unwrap();
        assert!(matches!(f.kind(), MapKind::Builtin(Builtin::Scherk)));
        assert!(!f.is_exact());
        let g = square_map();
        assert_eq!(g.m(), 2);
        assert!(g.is_exact());
        assert_eq!(g.domain(), &[[-1.0, 1.0], [-1.0, 1.0]]);
    }

    #[test]
    fn parse_errors_carry_field_paths() {
        let err = parse_map_spec(
            r#"{"n":2,"m":1,"kind":"polynomial","components":[[{"exps":[1],"coef":1.0}]]}"#,
        )
        .unwrap_err();
        match err {
            Error::Schema { path, .. } => assert_eq!(path, "components[0][0].exps"),
            e => panic!("unexpected {e}"),
        }
        let err = parse_map_spec(r#"{"n":2,"m":1,"kind":"polynomial","components":[[{"exps":[1,0],"coef":"x"}]]}"#)
            .unwrap_err();
        match err {
            Error::Schema { path, .. } => assert_eq!(path, "components[0][0].coef"),
            e => panic!("unexpected {e}"),
        }
        assert!(parse_map_spec("{not json").is_err());
        assert!(parse_map_spec(r#"{"n":2,"m":2,"kind":"builtin","name":"scherk"}"#).is_err());
        assert!(parse_map_spec(r#"{"n":2,"m":1,"kind":"builtin","name":"nope"}"#).is_err());
        assert!(parse_map_spec(r#"{"n":2,"m":1,"kind":"weird"}"#).is_err());
        assert!(parse_map_spec(r#"{"n":2,"m":1,"kind":"builtin","name":"linear","params":[1,2,3]}"#).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let f = square_map();
        let again = parse_map_spec(&f.to_spec_json().to_string()).unwrap();
        assert_eq!(f, again);
    }

    fn cubic_strategy() -> impl Strategy<Value = GraphMap> {
        let term = (prop::collection::vec(0u32..=3, 2), -1.0f64..1.0);
        prop::collection::vec(prop::collection::vec(term, 1..6), 2).prop_map(|comps| {
            let components = comps
                .into_iter()
                .map(|c| {
                    c.into_iter()
                        .map(|(mut exps, coef)| {
                            // keep total degree ≤ 3
                            while exps.iter().sum::<u32>() > 3 {
                                let i = exps.iter().position(|&e| e > 0).unwrap();
                                exps[i] -= 1;
                            }
                            Monomial { exps, coef }
                        })
                        .collect()
                })
                .collect();
            GraphMap::polynomial(components, 2, None).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_jacobian_matches_central_difference(f in cubic_strategy(), x0 in -0.9f64..0.9, x1 in -0.9f64..0.9) {
            let x = [x0, x1];
            let j = f.jacobian(&x).unwrap();
            let h = 1e-3;
            for k in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                let (fp, fm) = (f.value(&xp).unwrap(), f.value(&xm).unwrap());
                for a in 0..2 {
                    let fd = (fp[a] - fm[a]) / (2.0 * h);
                    prop_assert!((fd - j.entries[(a, k)]).abs() <= 10.0 * h * h);
                }
            }
        }
    }

    #[test]
    fn scherk_hessian_matches_differenced_jacobian() {
        let f = GraphMap::builtin(Builtin::Scherk, 2, 1, Some(vec![[-1.5, 1.5]; 2])).unwrap();
        for x in [[0.3, 0.2], [-0.8, 0.5], [1.0, -1.0]] {
            let hess = &f.hessians(&x).unwrap()[0];
            let h = 1e-4;
            for k in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                let jp = f.jacobian(&xp).unwrap().entries;
                let jm = f.jacobian(&xm).unwrap().entries;
                for j in 0..2 {
                    let fd = (jp[(0, j)] - jm[(0, j)]) / (2.0 * h);
                    assert!((fd - hess[(j, k)]).abs() < 1e-7, "x={x:?} j={j} k={k}");
                }
            }
            assert_eq!(hess[(0, 1)], hess[(1, 0)]);
        }
    }
}
