//! Quadrature rules from pole–residue forms: construction, filtering,
//! application to scalar and matrix functions, error bounds and
//! convergence sweeps.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aaa::PoleResidueForm;
use crate::gauss;
use crate::geometry::{ContourSpec, GeometryError};
use crate::linalg::{ComplexMatrix, LinalgError, LuDecomposition};
use crate::sum::pairwise_sum;

/// Largest matrix accepted by [`apply_rule_matrix`].
pub const MAX_MATRIX_DIM: usize = 500;
/// Largest fraction of nodes [`filter_rule`] may discard.
pub const MAX_FILTERED_FRACTION: f64 = 0.2;

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("poles {first} and {second} coincide ({pole}); run cleanup first")]
    DuplicatePoles { first: usize, second: usize, pole: Complex64 },
    #[error("filtering removed {removed} of {total} nodes; the approximation is likely invalid")]
    TooManyRemoved { removed: usize, total: usize },
    #[error("filter region has no closed piece")]
    OpenRegion,
    #[error("integrand is not finite at node {index} ({node})")]
    NonFinite { index: usize, node: Complex64 },
    #[error("rule lacks {0}")]
    MissingMetadata(&'static str),
    #[error("shift at node {index} ({node}) makes zI - A singular")]
    SingularShift { index: usize, node: Complex64 },
    #[error("matrix must be square with at most {MAX_MATRIX_DIM} rows and match b (got {rows}x{cols}, b of length {len})")]
    MatrixShape { rows: usize, cols: usize, len: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, RuleError>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub recipe: String,
    pub options_hash: String,
}

/// `I_n = sum_k c_k f(z_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Value of the rational function at infinity; not part of `I_n`.
    pub constant: Complex64,
    pub degree: usize,
    pub approx_error: Option<f64>,
    pub contour_length: Option<f64>,
    pub provenance: Provenance,
}

impl QuadratureRule {
    pub fn new(nodes: Vec<Complex64>, weights: Vec<Complex64>) -> Self {
        let degree = nodes.len();
        Self { nodes, weights, constant: Complex64::default(), degree, approx_error: None, contour_length: None, provenance: Provenance::default() }
    }

    pub fn weight_sum(&self) -> Complex64 {
        pairwise_sum(&self.weights)
    }
}

/// Nodes are the poles and weights the residues; no filtering.
pub fn rule_from_rational(pr: &PoleResidueForm, contour_length: f64, approx_error: f64, provenance: Provenance) -> Result<QuadratureRule> {
    let scale = pr.poles.iter().map(|p| p.norm()).fold(1.0, f64::max);
    for i in 0..pr.poles.len() {
        for j in i + 1..pr.poles.len() {
            if (pr.poles[i] - pr.poles[j]).norm() <= 1e-12 * scale {
                return Err(RuleError::DuplicatePoles { first: i, second: j, pole: pr.poles[i] });
            }
        }
    }
    Ok(QuadratureRule {
        nodes: pr.poles.clone(),
        weights: pr.residues.clone(),
        constant: pr.constant,
        degree: pr.poles.len(),
        approx_error: Some(approx_error),
        contour_length: Some(contour_length),
        provenance,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FilterReport {
    pub removed_nodes: Vec<Complex64>,
    pub removed_weights: Vec<Complex64>,
}

/// Drops nodes outside the region bounded by the closed pieces of `region`.
pub fn filter_rule(rule: &QuadratureRule, region: &ContourSpec) -> Result<(QuadratureRule, FilterReport)> {
    let d = region.discretize()?;
    if !d.pieces.iter().any(|(_, closed)| *closed) {
        return Err(RuleError::OpenRegion);
    }
    let mut out = rule.clone();
    out.nodes.clear();
    out.weights.clear();
    let mut report = FilterReport::default();
    for (&z, &c) in rule.nodes.iter().zip(&rule.weights) {
        if d.contains(z) {
            out.nodes.push(z);
            out.weights.push(c);
        } else {
            report.removed_nodes.push(z);
            report.removed_weights.push(c);
        }
    }
    let removed = report.removed_nodes.len();
    if removed as f64 > MAX_FILTERED_FRACTION * rule.nodes.len() as f64 {
        return Err(RuleError::TooManyRemoved { removed, total: rule.nodes.len() });
    }
    out.degree = out.nodes.len();
    Ok((out, report))
}

/// Weighted sum in pairwise order.
pub fn apply_rule<F>(rule: &QuadratureRule, f: F) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut terms = Vec::with_capacity(rule.nodes.len());
    for (index, (&z, &c)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(z);
        if !v.is_finite() {
            return Err(RuleError::NonFinite { index, node: z });
        }
        terms.push(c * v);
    }
    Ok(pairwise_sum(&terms))
}

/// `(approx_error / 2 pi) |Gamma| f_sup`.
pub fn error_bound(rule: &QuadratureRule, f_sup: f64) -> Result<f64> {
    let eps = rule.approx_error.ok_or(RuleError::MissingMetadata("approx_error"))?;
    let len = rule.contour_length.ok_or(RuleError::MissingMetadata("contour_length"))?;
    Ok(eps / (2.0 * std::f64::consts::PI) * len * f_sup)
}

/// `sum_k c_k f(z_k) (z_k I - A)^{-1} b`, one LU solve per node.
pub fn apply_rule_matrix<F>(rule: &QuadratureRule, f: F, a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let n = a.rows();
    if !a.is_square() || n > MAX_MATRIX_DIM || b.len() != n {
        return Err(RuleError::MatrixShape { rows: a.rows(), cols: a.cols(), len: b.len() });
    }
    let solves: Vec<Result<Vec<Complex64>>> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .enumerate()
        .map(|(index, (&z, &c))| {
            let fz = f(z);
            if !fz.is_finite() {
                return Err(RuleError::NonFinite { index, node: z });
            }
            let shifted = ComplexMatrix::from_fn(n, n, |i, j| if i == j { z - a[(i, j)] } else { -a[(i, j)] });
            let lu = LuDecomposition::new(&shifted).map_err(|e| match e {
                LinalgError::Singular { .. } => RuleError::SingularShift { index, node: z },
                other => RuleError::Linalg(other),
            })?;
            let x = lu.solve(b)?;
            Ok(x.into_iter().map(|v| v * c * fz).collect())
        })
        .collect();
    let solves: Vec<Vec<Complex64>> = solves.into_iter().collect::<Result<_>>()?;
    Ok((0..n)
        .map(|i| {
            let col: Vec<Complex64> = solves.iter().map(|s| s[i]).collect();
            pairwise_sum(&col)
        })
        .collect())
}

/// A reference value and where it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub value: Complex64,
    pub provenance: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Baseline {
    GaussLegendre,
    /// Gauss–Jacobi for `(1 - x)^alpha (1 + x)^beta`.
    GaussJacobi { alpha: f64, beta: f64 },
}

impl Baseline {
    pub fn rule(&self, n: usize) -> QuadratureRule {
        match *self {
            Baseline::GaussLegendre => gauss_legendre_oracle(n),
            Baseline::GaussJacobi { alpha, beta } => gauss_jacobi_oracle(n, alpha, beta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub degrees: Vec<usize>,
    /// `None` where the fit at that degree failed.
    pub errors: Vec<Option<f64>>,
    pub failures: Vec<(usize, String)>,
    pub reference: Reference,
    pub baseline: Option<Vec<Option<f64>>>,
}

impl ConvergenceReport {
    /// Least-squares slope `s` of `ln(error)` against degree over the
    /// successful entries; the geometric rate is `exp(-s)`.
    pub fn fitted_rate(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .degrees
            .iter()
            .zip(&self.errors)
            .filter_map(|(&n, e)| e.filter(|e| *e > 0.0).map(|e| (n as f64, e.ln())))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some((-sxy / sxx).exp())
    }
}

/// Refits at each degree independently (in parallel) and records
/// `|I_n - reference|`. Fit failures become gaps.
pub fn convergence_sweep<B, E, F>(build: B, degrees: &[usize], f: F, reference: Reference, baseline: Option<Baseline>) -> ConvergenceReport
where
    B: Fn(usize) -> std::result::Result<QuadratureRule, E> + Sync,
    E: std::fmt::Display,
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let results: Vec<std::result::Result<f64, String>> = degrees
        .par_iter()
        .map(|&n| {
            let rule = build(n).map_err(|e| e.to_string())?;
            let v = apply_rule(&rule, &f).map_err(|e| e.to_string())?;
            Ok((v - reference.value).norm())
        })
        .collect();
    let mut errors = Vec::with_capacity(degrees.len());
    let mut failures = Vec::new();
    for (&n, r) in degrees.iter().zip(results) {
        match r {
            Ok(e) => errors.push(Some(e)),
            Err(msg) => {
                errors.push(None);
                failures.push((n, msg));
            }
        }
    }
    let baseline = baseline.map(|b| {
        degrees
            .iter()
            .map(|&n| apply_rule(&b.rule(n.max(1)), &f).ok().map(|v| (v - reference.value).norm()))
            .collect()
    });
    ConvergenceReport { degrees: degrees.to_vec(), errors, failures, reference, baseline }
}

fn real_rule(g: gauss::GaussRule, name: &str) -> QuadratureRule {
    let mut r = QuadratureRule::new(
        g.nodes.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        g.weights.iter().map(|&w| Complex64::new(w, 0.0)).collect(),
    );
    r.provenance.recipe = name.to_string();
    r
}

pub fn gauss_legendre_oracle(n: usize) -> QuadratureRule {
    real_rule(gauss::gauss_legendre(n), "gauss-legendre")
}

pub fn gauss_jacobi_oracle(n: usize, alpha: f64, beta: f64) -> QuadratureRule {
    real_rule(gauss::gauss_jacobi(n, alpha, beta), "gauss-jacobi")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Piece;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_pole() -> PoleResidueForm {
        PoleResidueForm { constant: c(0.0, 0.0), poles: vec![c(2.0, 0.0)], residues: vec![c(1.0, 0.0)], zeros: vec![] }
    }

    #[test]
    fn single_node_rule() {
        let r = rule_from_rational(&one_pole(), 1.0, 0.0, Provenance::default()).unwrap();
        assert_eq!(r.degree, 1);
        assert_eq!(apply_rule(&r, |_| c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(error_bound(&r, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn duplicate_poles_rejected() {
        let pr = PoleResidueForm { constant: c(0.0, 0.0), poles: vec![c(0.5, 0.0), c(0.5, 1e-14)], residues: vec![c(1.0, 0.0); 2], zeros: vec![] };
        assert!(matches!(rule_from_rational(&pr, 1.0, 0.0, Provenance::default()), Err(RuleError::DuplicatePoles { .. })));
    }

    #[test]
    fn error_bound_is_linear_and_needs_metadata() {
        let r = rule_from_rational(&one_pole(), 4.0, 1e-6, Provenance::default()).unwrap();
        let b1 = error_bound(&r, 1.0).unwrap();
        assert!((error_bound(&r, 2.0).unwrap() - 2.0 * b1).abs() < 1e-20);
        assert!(matches!(error_bound(&QuadratureRule::new(vec![], vec![]), 1.0), Err(RuleError::MissingMetadata(_))));
    }

    #[test]
    fn filtering() {
        let disk = ContourSpec::single(Piece::Circle { center: c(0.0, 0.0), radius: 1.0, n: 100 });
        let inside: Vec<Complex64> = (0..10).map(|k| Complex64::from_polar(0.5, k as f64)).collect();
        let r = QuadratureRule::new(inside.clone(), vec![c(1.0, 0.0); 10]);
        let (f, rep) = filter_rule(&r, &disk).unwrap();
        assert_eq!(f, r);
        assert!(rep.removed_nodes.is_empty());
        let mut nodes = inside;
        nodes.push(c(1e3, 0.0));
        let r = QuadratureRule::new(nodes, vec![c(1.0, 0.0); 11]);
        let (f, rep) = filter_rule(&r, &disk).unwrap();
        assert_eq!(f.degree, 10);
        assert_eq!(rep.removed_nodes, vec![c(1e3, 0.0)]);
        let r = QuadratureRule::new(vec![c(5.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0); 2]);
        assert!(matches!(filter_rule(&r, &disk), Err(RuleError::TooManyRemoved { .. })));
    }

    #[test]
    fn non_finite_integrand_names_node() {
        let r = QuadratureRule::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0); 2]);
        match apply_rule(&r, |z| 1.0 / (z - 1.0)) {
            Err(RuleError::NonFinite { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gauss_oracles_as_rules() {
        let r = gauss_legendre_oracle(20);
        assert!((r.weight_sum() - 2.0).norm() < 1e-13);
        for k in 0..40 {
            let v = apply_rule(&r, |z| z.powi(k)).unwrap();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((v.re - exact).abs() < 1e-12);
        }
        assert_eq!(gauss_jacobi_oracle(4, 0.0, 0.0).nodes, gauss_legendre_oracle(4).nodes);
    }

    #[test]
    fn matrix_application_of_trapezoid_rule() {
        // Trapezoid rule on a circle of radius 2: c_k = z_k / n.
        let n = 64;
        let nodes: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(2.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
        let weights = nodes.iter().map(|z| z / n as f64).collect();
        let r = QuadratureRule::new(nodes, weights);
        let a = ComplexMatrix::from_diag(&[c(0.125, 0.0), c(1.0, 0.0)]);
        let b = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let x = apply_rule_matrix(&r, |z| z, &a, &b).unwrap();
        assert!((x[0] - 0.125).norm() < 1e-12 && (x[1] - 1.0).norm() < 1e-12);
        let x = apply_rule_matrix(&r, |_| c(1.0, 0.0), &a, &b).unwrap();
        assert!((x[0] - 1.0).norm() < 1e-12 && (x[1] - 1.0).norm() < 1e-12);
        let bad = QuadratureRule::new(vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]);
        assert!(matches!(apply_rule_matrix(&bad, |z| z, &a, &b), Err(RuleError::SingularShift { index: 0, .. })));
    }

    #[test]
    fn sweep_records_gaps_and_rate() {
        let reference = Reference { value: c(0.0, 0.0), provenance: "test".into() };
        let rep = convergence_sweep(
            |n| if n == 3 { Err("boom") } else { Ok(QuadratureRule::new(vec![c(0.0, 0.0)], vec![c(10f64.powi(-(n as i32)), 0.0)])) },
            &[1, 2, 3, 4],
            |_| c(1.0, 0.0),
            reference,
            Some(Baseline::GaussLegendre),
        );
        assert_eq!(rep.errors[2], None);
        assert_eq!(rep.failures.len(), 1);
        assert!((rep.fitted_rate().unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(rep.baseline.as_ref().unwrap().len(), 4);
    }
}
