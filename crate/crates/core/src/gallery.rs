//! Curated maps with known answers.

use serde::Serialize;

use crate::certify::{Grid, GridAxis, Verdict};
use crate::error::{Error, Result};
use crate::maps::{Builtin, GraphMap};

#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub map: GraphMap,
    pub is_minimal: bool,
    /// Where the map is defined, as text.
    pub natural_domain: &'static str,
    pub notes: &'static str,
    pub reference_grid: Grid,
    /// Expected pointwise verdict on the reference grid, when uniform.
    pub expected_verdict: Option<Verdict>,
}

/// Serializable summary for listings.
#[derive(Clone, Debug, Serialize)]
pub struct GalleryInfo {
    pub name: &'static str,
    pub n: usize,
    pub m: usize,
    pub is_minimal: bool,
    pub natural_domain: &'static str,
    pub default_domain: Vec<[f64; 2]>,
    pub reference_grid: Grid,
    pub expected_verdict: Option<Verdict>,
    pub notes: &'static str,
    pub spec: serde_json::Value,
}

fn square_grid(lo: f64, hi: f64, count: usize) -> Grid {
    Grid::new(vec![GridAxis { lo, hi, count }; 2]).expect("valid grid")
}

/// `[[1, 0.5], [−0.3, 0.8]]`: `λ_1λ_2 = |det| = 0.95 ≤ 1`.
const LINEAR_MATRIX: [f64; 4] = [1.0, 0.5, -0.3, 0.8];

pub fn entries() -> Vec<GalleryEntry> {
    let build = |b: Builtin, n: usize, m: usize, domain: Option<Vec<[f64; 2]>>| {
        GraphMap::builtin(b, n, m, domain).expect("gallery maps are valid")
    };
    vec![
        GalleryEntry {
            name: "linear",
            map: build(Builtin::Linear { matrix: LINEAR_MATRIX.to_vec() }, 2, 2, None),
            is_minimal: true,
            natural_domain: "R^2",
            notes: "F(x) = A x with A = [[1, 0.5], [-0.3, 0.8]]; constant singular values with product 0.95.",
            reference_grid: square_grid(-0.9, 0.9, 10),
            expected_verdict: Some(Verdict::CalibratedCrude),
        },
        GalleryEntry {
            name: "identity",
            map: build(Builtin::Identity { scale: 1.0 }, 2, 2, None),
            is_minimal: true,
            natural_domain: "R^2",
            notes: "F(x) = x; all singular values 1, so lambda_1 lambda_2 = 1 sits on the crude threshold.",
            reference_grid: square_grid(-0.9, 0.9, 10),
            expected_verdict: Some(Verdict::CalibratedCrude),
        },
        GalleryEntry {
            name: "holomorphic_square",
            map: build(Builtin::HolomorphicSquare { scale: 1.0 }, 2, 2, None),
            is_minimal: true,
            natural_domain: "R^2",
            notes: "F = ((x1^2 - x2^2)/2, x1 x2), the real form of z^2/2; lambda_1 = lambda_2 = |z|.",
            reference_grid: square_grid(-0.6, 0.6, 10),
            expected_verdict: Some(Verdict::CalibratedCrude),
        },
        GalleryEntry {
            name: "scherk",
            map: build(Builtin::Scherk, 2, 1, Some(vec![[-1.5, 1.5]; 2])),
            is_minimal: true,
            natural_domain: "(-pi/2, pi/2)^2",
            notes: "f = log cos x1 - log cos x2, Scherk's doubly periodic surface; rank 1, so comass 1.",
            reference_grid: square_grid(-1.0, 1.0, 10),
            expected_verdict: Some(Verdict::CalibratedCrude),
        },
        GalleryEntry {
            name: "paraboloid",
            map: build(Builtin::Paraboloid, 2, 1, None),
            is_minimal: false,
            natural_domain: "R^2",
            notes: "f = x1^2 + x2^2, not minimal; a distractor for the residuals.",
            reference_grid: square_grid(-0.9, 0.9, 10),
            expected_verdict: Some(Verdict::NotMinimal),
        },
    ]
}

pub fn entry(name: &str) -> Result<GalleryEntry> {
    entries()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("no gallery entry named `{name}`")))
}

impl GalleryEntry {
    pub fn info(&self) -> GalleryInfo {
        GalleryInfo {
            name: self.name,
            n: self.map.n(),
            m: self.map.m(),
            is_minimal: self.is_minimal,
            natural_domain: self.natural_domain,
            default_domain: self.map.domain().to_vec(),
            reference_grid: self.reference_grid.clone(),
            expected_verdict: self.expected_verdict,
            notes: self.notes,
            spec: self.map.to_spec_json(),
        }
    }

    /// Points of the reference grid.
    pub fn reference_points(&self) -> Vec<Vec<f64>> {
        self.reference_grid.points()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify_grid, CertifyOptions};
    use crate::minimality::minimality_report;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn at_least_four_entries_with_unique_names() {
        let e = entries();
        assert!(e.len() >= 4);
        let mut names: Vec<_> = e.iter().map(|x| x.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), e.len());
        assert!(entry("nope").is_err());
    }

    #[test]
    fn minimal_entries_pass_on_their_reference_grids() {
        for e in entries() {
            let worst = e
                .reference_points()
                .iter()
                .map(|x| minimality_report(&e.map, x, None).unwrap().mgs_norm)
                .fold(0.0, f64::max);
            assert_eq!(worst <= 1e-6, e.is_minimal, "{}: {worst}", e.name);
        }
    }

    #[test]
    fn expected_verdicts_hold() {
        for e in entries() {
            let rep = certify_grid(&e.map, &e.reference_grid, &CertifyOptions::default()).unwrap();
            if let Some(v) = e.expected_verdict {
                assert_eq!(rep.summary.pointwise.get(v), e.reference_grid.len(), "{}", e.name);
            }
        }
    }

    #[test]
    fn scherk_reference_grid_is_inside_its_natural_domain() {
        let e = entry("scherk").unwrap();
        for ax in &e.reference_grid.axes {
            assert!(ax.lo > -FRAC_PI_2 && ax.hi < FRAC_PI_2);
        }
    }
}
