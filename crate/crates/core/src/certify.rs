//! Grid certification: at each grid point, decide whether the hypotheses
//! that make `Θ(F)` a calibration are met.
//!
//! Verdicts are taken in order: `not_minimal` if the minimal graph system
//! residual exceeds the tolerance, then `calibrated_crude`, then
//! `calibrated_refined`, then `comass_bound_only` if the analytic comass
//! bound is at most one, and `not_certified` otherwise.
//!
//! The dilation criteria use one rank for the whole domain, so every point gets a
//! second, global verdict evaluated against the grid-wide maximum rank.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::comass::{dilation_check, epsilon_star, lower_bound, upper_bound, DEFAULT_RESTARTS};
use crate::error::{Error, Result};
use crate::frames::svd_frame;
use crate::maps::GraphMap;
use crate::minimality::{default_step, dtheta_residual, mgs_residual};
use crate::theta::theta_h;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CalibratedCrude,
    CalibratedRefined,
    ComassBoundOnly,
    NotCertified,
    NotMinimal,
}

impl Verdict {
    pub const ALL: [Verdict; 5] = [
        Verdict::CalibratedCrude,
        Verdict::CalibratedRefined,
        Verdict::ComassBoundOnly,
        Verdict::NotCertified,
        Verdict::NotMinimal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::CalibratedCrude => "calibrated_crude",
            Verdict::CalibratedRefined => "calibrated_refined",
            Verdict::ComassBoundOnly => "comass_bound_only",
            Verdict::NotCertified => "not_certified",
            Verdict::NotMinimal => "not_minimal",
        }
    }

    pub fn is_calibrated(&self) -> bool {
        matches!(self, Verdict::CalibratedCrude | Verdict::CalibratedRefined)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Absolute tolerance on `mgs_norm`.
    pub minimality_tol: f64,
    /// Slack in `upper ≤ 1 + comass_tol`.
    pub comass_tol: f64,
    /// Bisection tolerance for `ε*(r)`.
    pub epsilon_tol: f64,
    pub optimize: bool,
    pub restarts: usize,
    pub seed: u64,
    /// Worker cap; `None` uses the global pool.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            minimality_tol: 1e-6,
            comass_tol: 1e-12,
            epsilon_tol: 1e-10,
            optimize: false,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            threads: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridAxis {
    fn coordinate(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.lo
        } else if i + 1 == self.count {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64
        }
    }
}

/// Tensor grid; points are listed with `x_1` varying slowest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<GridAxis>,
}

impl Grid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        for (i, a) in axes.iter().enumerate() {
            if !(a.lo.is_finite() && a.hi.is_finite() && a.lo <= a.hi) {
                return Err(Error::InvalidArgument(format!("axis x{}: need finite lo ≤ hi", i + 1)));
            }
        }
        Ok(Grid { axes })
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.iter().map(|a| a.count).product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let total = self.len();
        let mut out = Vec::with_capacity(total);
        for mut flat in 0..total {
            let mut p = vec![0.0; self.axes.len()];
            for (k, axis) in self.axes.iter().enumerate().rev() {
                p[k] = axis.coordinate(flat % axis.count);
                flat /= axis.count;
            }
            out.push(p);
        }
        out
    }
}

/// Parses `x1=lo:hi:count,x2=lo:hi:count,…` with every axis `x1..xn`
/// given exactly once, in order.
pub fn parse_grid(text: &str, n: usize) -> Result<Grid> {
    let bad = |msg: String| Error::InvalidArgument(format!("grid `{text}`: {msg}"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(bad(format!("expected {n} axes, found {}", parts.len())));
    }
    let mut axes = Vec::with_capacity(n);
    for (i, part) in parts.iter().enumerate() {
        let (name, range) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("axis `{part}` is not of the form x{}=lo:hi:count", i + 1)))?;
        if name.trim() != format!("x{}", i + 1) {
            return Err(bad(format!("expected axis x{}, found `{}`", i + 1, name.trim())));
        }
        let fields: Vec<&str> = range.split(':').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(bad(format!("axis x{} needs lo:hi:count", i + 1)));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")));
        let (lo, hi) = (num(fields[0])?, num(fields[1])?);
        let count: usize = fields[2]
            .parse()
            .map_err(|_| bad(format!("`{}` is not a nonnegative integer", fields[2])))?;
        if count == 0 {
            return Err(bad(format!("axis x{} has no points", i + 1)));
        }
        axes.push(GridAxis { lo, hi, count });
    }
    Grid::new(axes)
}

/// Non-finite values are written as `null` and read back as NaN.
mod nan_as_null {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointReport {
    pub point: Vec<f64>,
    pub rank_r: usize,
    pub lambdas: Vec<f64>,
    #[serde(with = "nan_as_null")]
    pub max_pair_product: f64,
    #[serde(with = "nan_as_null")]
    pub mgs_norm: f64,
    /// NaN when the point is too close to the boundary for the stencil.
    #[serde(with = "nan_as_null")]
    pub dtheta_norm: f64,
    #[serde(with = "nan_as_null")]
    pub upper: f64,
    pub lower: Option<f64>,
    pub verdict: Verdict,
    pub global_verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub calibrated_crude: usize,
    pub calibrated_refined: usize,
    pub comass_bound_only: usize,
    pub not_certified: usize,
    pub not_minimal: usize,
}

impl VerdictCounts {
    fn add(&mut self, v: Verdict) {
        *match v {
            Verdict::CalibratedCrude => &mut self.calibrated_crude,
            Verdict::CalibratedRefined => &mut self.calibrated_refined,
            Verdict::ComassBoundOnly => &mut self.comass_bound_only,
            Verdict::NotCertified => &mut self.not_certified,
            Verdict::NotMinimal => &mut self.not_minimal,
        } += 1;
    }

    pub fn get(&self, v: Verdict) -> usize {
        match v {
            Verdict::CalibratedCrude => self.calibrated_crude,
            Verdict::CalibratedRefined => self.calibrated_refined,
            Verdict::ComassBoundOnly => self.comass_bound_only,
            Verdict::NotCertified => self.not_certified,
            Verdict::NotMinimal => self.not_minimal,
        }
    }

    pub fn total(&self) -> usize {
        Verdict::ALL.iter().map(|&v| self.get(v)).sum()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub pointwise: VerdictCounts,
    pub global: VerdictCounts,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionReport {
    pub n: usize,
    pub m: usize,
    pub map: serde_json::Value,
    pub grid: Grid,
    pub config: CertifyOptions,
    /// `ε*(r)` for every rank that was needed.
    pub epsilon: BTreeMap<usize, f64>,
    pub global_rank: usize,
    pub summary: Summary,
    pub points: Vec<PointReport>,
}

struct Measured {
    rank_r: usize,
    lambdas: Vec<f64>,
    mgs_norm: f64,
    dtheta_norm: f64,
    lower: Option<f64>,
}

fn measure(f: &GraphMap, x: &[f64], opts: &CertifyOptions) -> Result<Measured> {
    let jac = f.jacobian(x)?;
    let fr = svd_frame(&jac);
    let lambdas: Vec<f64> = fr.lambdas.clone();
    let mgs_norm = mgs_residual(f, x)?.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = default_step(x);
    let dtheta_norm = if f.margin(x) >= h {
        dtheta_residual(f, x, h)?
    } else {
        f64::NAN
    };
    let lower = opts
        .optimize
        .then(|| lower_bound(&theta_h(&jac), opts.restarts, opts.seed).value);
    Ok(Measured {
        rank_r: fr.rank_r,
        lambdas,
        mgs_norm,
        dtheta_norm,
        lower,
    })
}

fn decide(mgs_norm: f64, lambdas: &[f64], r: usize, eps: f64, opts: &CertifyOptions) -> (Verdict, f64, f64) {
    let dc = dilation_check(lambdas, r, eps);
    let upper = upper_bound(lambdas, r).0;
    let verdict = if mgs_norm > opts.minimality_tol {
        Verdict::NotMinimal
    } else if dc.crude_ok {
        Verdict::CalibratedCrude
    } else if dc.refined_ok {
        Verdict::CalibratedRefined
    } else if upper <= 1.0 + opts.comass_tol {
        Verdict::ComassBoundOnly
    } else {
        Verdict::NotCertified
    };
    (verdict, upper, dc.max_pair_product)
}

fn check_grid(f: &GraphMap, grid: &Grid) -> Result<()> {
    if grid.axes.len() != f.n() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} axes for a map on R^{}",
            grid.axes.len(),
            f.n()
        )));
    }
    for (i, (a, [lo, hi])) in grid.axes.iter().zip(f.domain()).enumerate() {
        let slack = crate::maps::DOMAIN_SLACK;
        if a.lo < lo - slack || a.hi > hi + slack {
            return Err(Error::InvalidArgument(format!(
                "grid axis x{} = [{}, {}] leaves the domain [{lo}, {hi}]",
                i + 1,
                a.lo,
                a.hi
            )));
        }
    }
    Ok(())
}

pub fn certify_grid(f: &GraphMap, grid: &Grid, opts: &CertifyOptions) -> Result<RegionReport> {
    match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| certify_in_pool(f, grid, opts)),
        None => certify_in_pool(f, grid, opts),
    }
}

fn certify_in_pool(f: &GraphMap, grid: &Grid, opts: &CertifyOptions) -> Result<RegionReport> {
    check_grid(f, grid)?;
    let points = grid.points();
    let measured: Vec<Result<Measured>> = points.par_iter().map(|x| measure(f, x, opts)).collect();

    let global_rank = measured
        .iter()
        .filter_map(|m| m.as_ref().ok().map(|m| m.rank_r))
        .max()
        .unwrap_or(0);
    let mut epsilon = BTreeMap::new();
    for r in measured
        .iter()
        .filter_map(|m| m.as_ref().ok().map(|m| m.rank_r))
        .chain(std::iter::once(global_rank))
    {
        if r >= 2 && !epsilon.contains_key(&r) {
            epsilon.insert(r, epsilon_star(r, opts.epsilon_tol)?.0);
        }
    }
    let eps_for = |r: usize| epsilon.get(&r).copied().unwrap_or(0.0);

    let mut summary = Summary {
        pointwise: VerdictCounts::default(),
        global: VerdictCounts::default(),
    };
    let mut reports = Vec::with_capacity(points.len());
    for (x, m) in points.into_iter().zip(measured) {
        let report = match m {
            Ok(m) => {
                let (verdict, upper, mpp) = decide(m.mgs_norm, &m.lambdas, m.rank_r, eps_for(m.rank_r), opts);
                let (global_verdict, _, _) = decide(m.mgs_norm, &m.lambdas, global_rank, eps_for(global_rank), opts);
                PointReport {
                    point: x,
                    rank_r: m.rank_r,
                    lambdas: m.lambdas,
                    max_pair_product: mpp,
                    mgs_norm: m.mgs_norm,
                    dtheta_norm: m.dtheta_norm,
                    upper,
                    lower: m.lower,
                    verdict,
                    global_verdict,
                    error: None,
                }
            }
            Err(e) => PointReport {
                point: x,
                rank_r: 0,
                lambdas: Vec::new(),
                max_pair_product: f64::NAN,
                mgs_norm: f64::NAN,
                dtheta_norm: f64::NAN,
                upper: f64::NAN,
                lower: None,
                verdict: Verdict::NotCertified,
                global_verdict: Verdict::NotCertified,
                error: Some(e.to_string()),
            },
        };
        summary.pointwise.add(report.verdict);
        summary.global.add(report.global_verdict);
        reports.push(report);
    }
    Ok(RegionReport {
        n: f.n(),
        m: f.m(),
        map: f.to_spec_json(),
        grid: grid.clone(),
        config: opts.clone(),
        epsilon,
        global_rank,
        summary,
        points: reports,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format `{other}`"))),
        }
    }
}

/// 17 significant digits; empty for non-finite values.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

pub fn render_csv(rep: &RegionReport) -> String {
    let k = rep.n.min(rep.m);
    let mut header: Vec<String> = (1..=rep.n).map(|i| format!("x_{i}")).collect();
    header.push("rank".into());
    header.extend((1..=k).map(|i| format!("lambda_{i}")));
    for h in [
        "max_pair_product",
        "mgs_norm",
        "dtheta_norm",
        "comass_upper",
        "comass_lower",
        "pointwise_verdict",
        "global_verdict",
    ] {
        header.push(h.into());
    }
    let mut out = header.join(",");
    out.push('\n');
    for p in &rep.points {
        let mut row: Vec<String> = p.point.iter().map(|&v| num(v)).collect();
        row.push(if p.error.is_some() { String::new() } else { p.rank_r.to_string() });
        row.extend((0..k).map(|i| num(p.lambdas.get(i).copied().unwrap_or(f64::NAN))));
        row.push(num(p.max_pair_product));
        row.push(num(p.mgs_norm));
        row.push(num(p.dtheta_norm));
        row.push(num(p.upper));
        row.push(p.lower.map(num).unwrap_or_default());
        row.push(p.verdict.as_str().into());
        row.push(p.global_verdict.as_str().into());
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn render_json(rep: &RegionReport) -> String {
    let mut s = serde_json::to_string_pretty(rep).expect("report is serializable");
    s.push('\n');
    s
}

pub fn parse_report_json(text: &str) -> Result<RegionReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn render_report(rep: &RegionReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => render_csv(rep),
        ReportFormat::Json => render_json(rep),
    }
}

pub fn emit_report(rep: &RegionReport, path: &Path, format: ReportFormat) -> Result<()> {
    std::fs::write(path, render_report(rep, format))?;
    Ok(())
}
