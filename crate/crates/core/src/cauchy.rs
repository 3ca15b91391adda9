//! Cauchy transforms `C(s) = int_gamma w(z) / (s - z) dz` of weight functions,
//! in closed form where available and by adaptive quadrature otherwise.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aaa::{AaaError, SampleSet};
use crate::geometry::{ContourSpec, Discretization, GeometryError, Label};
use crate::quad::{self, ArcSegment, QuadError, QuadTolerance};

/// Closest approach to the integration arc tolerated by the transforms.
pub const PROXIMITY: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CauchyError {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("point {s} lies within {distance:e} of the integration arc")]
    Proximity { s: Complex64, distance: f64 },
    #[error("no closed form for the {0} weight")]
    NoClosedForm(&'static str),
    #[error("no numeric transform for the {0} weight")]
    NoNumeric(&'static str),
    #[error("quadrature failed at s = {s}: {source}")]
    Quadrature { s: Complex64, source: QuadError },
    #[error("sample {index} at {s}: {source}")]
    Sample { index: usize, s: Complex64, source: Box<CauchyError> },
    #[error("sample {index} at {s} carries no interior/exterior label")]
    Unlabeled { index: usize, s: Complex64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Samples(#[from] AaaError),
}

pub type Result<T> = std::result::Result<T, CauchyError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// `g(z) = z`
    Linear,
    /// `g(z) = z^4`
    Quartic,
}

impl Phase {
    pub fn eval(self, z: Complex64) -> Complex64 {
        match self {
            Phase::Linear => z,
            Phase::Quartic => {
                let z2 = z * z;
                z2 * z2
            }
        }
    }
}

/// Weight functions. Unless a support contour is given, `unit`, `jacobi`,
/// `oscillatory` and `tabulated` live on `[-1, 1]`; `band` lives on
/// `[-1, -1/2] u [1/2, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightKind {
    Unit,
    /// `(1 - z)^alpha (1 + z)^beta`
    Jacobi { alpha: f64, beta: f64 },
    /// `sqrt(1 - z^2)` on `1/2 <= |z| <= 1`
    Band,
    /// `exp(i omega g(z))`
    Oscillatory { omega: f64, phase: Phase },
    /// Transform `e^s` of the inverse-Laplace weight on a Hankel contour.
    ExpHankel,
    /// Piecewise-constant transform of `1/(2 pi i)` on a closed curve.
    Jump { interior_value: Complex64, exterior_value: Complex64 },
    /// Piecewise-linear weight through `(abscissae[i], values[i])` on the
    /// real axis, zero outside the table.
    Tabulated { abscissae: Vec<f64>, values: Vec<Complex64> },
}

impl WeightKind {
    pub fn name(&self) -> &'static str {
        match self {
            WeightKind::Unit => "unit",
            WeightKind::Jacobi { .. } => "jacobi",
            WeightKind::Band => "band",
            WeightKind::Oscillatory { .. } => "oscillatory",
            WeightKind::ExpHankel => "exp-hankel",
            WeightKind::Jump { .. } => "jump",
            WeightKind::Tabulated { .. } => "tabulated",
        }
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(self, WeightKind::Unit | WeightKind::ExpHankel | WeightKind::Jump { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub kind: WeightKind,
    /// The arc `gamma` (or, for `jump`, the closed curve separating the two
    /// components). Defaults depend on the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<ContourSpec>,
}

impl WeightSpec {
    pub fn new(kind: WeightKind) -> Result<Self> {
        let w = Self { kind, support: None };
        w.validate()?;
        Ok(w)
    }

    pub fn with_support(kind: WeightKind, support: ContourSpec) -> Result<Self> {
        let w = Self { kind, support: Some(support) };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            WeightKind::Jacobi { alpha, beta } => {
                if !(*alpha > -1.0 && *beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
                    return Err(CauchyError::InvalidWeight(format!("jacobi exponents must exceed -1, got ({alpha}, {beta})")));
                }
            }
            WeightKind::Oscillatory { omega, .. } => {
                if !omega.is_finite() {
                    return Err(CauchyError::InvalidWeight(format!("omega must be finite, got {omega}")));
                }
            }
            WeightKind::Jump { interior_value, exterior_value } => {
                if !interior_value.is_finite() || !exterior_value.is_finite() {
                    return Err(CauchyError::InvalidWeight("jump values must be finite".into()));
                }
            }
            WeightKind::Tabulated { abscissae, values } => {
                if abscissae.len() < 2 || abscissae.len() != values.len() {
                    return Err(CauchyError::InvalidWeight("tabulated weight needs at least two (abscissa, value) pairs".into()));
                }
                if abscissae.windows(2).any(|w| !(w[1] > w[0])) || abscissae.iter().any(|x| !x.is_finite()) {
                    return Err(CauchyError::InvalidWeight("tabulated abscissae must be finite and strictly increasing".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(CauchyError::InvalidWeight("tabulated values must be finite".into()));
                }
            }
            _ => {}
        }
        if let (Some(_), WeightKind::Jacobi { .. } | WeightKind::Tabulated { .. } | WeightKind::Band) = (&self.support, &self.kind) {
            return Err(CauchyError::InvalidWeight(format!("the {} weight is tied to the real interval", self.kind.name())));
        }
        Ok(())
    }

    /// `w(z)` at a point of the real support.
    pub fn density(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match &self.kind {
            WeightKind::Unit => one,
            WeightKind::Jacobi { alpha, beta } => (1.0 - z).powf(*alpha) * (1.0 + z).powf(*beta),
            WeightKind::Band => {
                let x = z.re.abs();
                if (0.5..=1.0).contains(&x) {
                    Complex64::new((1.0 - z.re * z.re).max(0.0).sqrt(), 0.0)
                } else {
                    Complex64::default()
                }
            }
            WeightKind::Oscillatory { omega, phase } => (Complex64::i() * *omega * phase.eval(z)).exp(),
            WeightKind::Tabulated { abscissae, values } => {
                let x = z.re;
                let n = abscissae.len();
                if x < abscissae[0] || x > abscissae[n - 1] {
                    return Complex64::default();
                }
                let k = abscissae.partition_point(|a| *a <= x).clamp(1, n - 1);
                let t = (x - abscissae[k - 1]) / (abscissae[k] - abscissae[k - 1]);
                values[k - 1] * (1.0 - t) + values[k] * t
            }
            WeightKind::ExpHankel => Complex64::new(0.0, -1.0 / (2.0 * std::f64::consts::PI)),
            WeightKind::Jump { .. } => Complex64::new(0.0, -1.0 / (2.0 * std::f64::consts::PI)),
        }
    }

    /// `int_gamma w(z) dz` by adaptive quadrature (closed forms for the
    /// contour weights).
    pub fn mass(&self, tol: QuadTolerance) -> Result<Complex64> {
        match &self.kind {
            // The jump transform is 0 or constant-difference off gamma; its
            // weight 1/(2 pi i) integrates to 0 over a closed curve, and
            // int e^z over a Hankel contour vanishes as well.
            WeightKind::Jump { .. } | WeightKind::ExpHankel => Ok(Complex64::default()),
            _ => self.integrate_against(|_| Complex64::new(1.0, 0.0), tol),
        }
    }

    /// `int_gamma w(z) g(z) dz` for the arc-supported kinds.
    pub fn integrate_against<G>(&self, g: G, tol: QuadTolerance) -> Result<Complex64>
    where
        G: Fn(Complex64) -> Complex64,
    {
        let s_dummy = Complex64::new(f64::NAN, f64::NAN);
        let mut total = Complex64::default();
        for piece in self.real_pieces()? {
            let (a, b) = (piece.a, piece.b);
            let v = quad::integrate_param(
                |t, tc| {
                    let z = self.point_on(a, b, t, tc);
                    self.density_param(z, a, b, t, tc) * g(z) * (b - a)
                },
                piece.singular,
                tol,
            )
            .map_err(|source| CauchyError::Quadrature { s: s_dummy, source })?;
            total += v.value;
        }
        if let Some(support) = &self.support {
            let arcs = support.arcs()?;
            let v = quad::integrate_path(|z| self.density(z) * g(z), &arcs, tol).map_err(|source| CauchyError::Quadrature { s: s_dummy, source })?;
            total += v.value;
        }
        Ok(total)
    }

    fn point_on(&self, a: f64, b: f64, t: f64, tc: f64) -> Complex64 {
        Complex64::new(if t <= 0.5 { a + (b - a) * t } else { b - (b - a) * tc }, 0.0)
    }

    /// Density evaluated with endpoint distances taken from the parameter so
    /// that singular factors never see a rounded-away zero.
    fn density_param(&self, z: Complex64, a: f64, b: f64, t: f64, tc: f64) -> Complex64 {
        match &self.kind {
            WeightKind::Jacobi { alpha, beta } => {
                let one_minus = if b == 1.0 { (b - a) * tc } else { 1.0 - z.re };
                let one_plus = if a == -1.0 { (b - a) * t } else { 1.0 + z.re };
                Complex64::new(one_minus.powf(*alpha) * one_plus.powf(*beta), 0.0)
            }
            WeightKind::Band => {
                let x = z.re;
                let d = if x > 0.0 {
                    if b == 1.0 {
                        (b - a) * tc
                    } else {
                        1.0 - x
                    }
                } else if a == -1.0 {
                    (b - a) * t
                } else {
                    1.0 + x
                };
                Complex64::new((d * (2.0 - d)).max(0.0).sqrt(), 0.0)
            }
            _ => self.density(z),
        }
    }

    /// Real intervals making up the default support, with singular-end
    /// flags for the graded substitution.
    fn real_pieces(&self) -> Result<Vec<RealPiece>> {
        let non_integer = |x: f64| x != x.round();
        let pieces = match &self.kind {
            WeightKind::Unit | WeightKind::Oscillatory { .. } if self.support.is_none() => vec![RealPiece::new(-1.0, 1.0, (false, false))],
            WeightKind::Unit | WeightKind::Oscillatory { .. } => vec![],
            WeightKind::Jacobi { alpha, beta } => vec![RealPiece::new(-1.0, 1.0, (non_integer(*beta) || *beta < 0.0, non_integer(*alpha) || *alpha < 0.0))],
            WeightKind::Band => vec![RealPiece::new(-1.0, -0.5, (true, false)), RealPiece::new(0.5, 1.0, (false, true))],
            WeightKind::Tabulated { abscissae, .. } => abscissae.windows(2).map(|w| RealPiece::new(w[0], w[1], (false, false))).collect(),
            WeightKind::ExpHankel | WeightKind::Jump { .. } => return Err(CauchyError::NoNumeric(self.kind.name())),
        };
        Ok(pieces)
    }

    /// Distance from `s` to the weight's support.
    pub fn distance_to_support(&self, s: Complex64) -> Result<f64> {
        let mut best = f64::INFINITY;
        if !matches!(self.kind, WeightKind::Jump { .. } | WeightKind::ExpHankel) {
            for p in self.real_pieces()? {
                let x = s.re.clamp(p.a, p.b);
                best = best.min((s - Complex64::new(x, 0.0)).norm());
            }
        }
        if let Some(support) = &self.support {
            best = best.min(support.discretize()?.distance(s));
        }
        Ok(best)
    }
}

#[derive(Clone, Copy, Debug)]
struct RealPiece {
    a: f64,
    b: f64,
    singular: (bool, bool),
}

impl RealPiece {
    fn new(a: f64, b: f64, singular: (bool, bool)) -> Self {
        Self { a, b, singular }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EvalMode {
    ClosedForm,
    Numeric { tol: QuadTolerance },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CauchyTransform {
    pub weight: WeightSpec,
    pub mode: EvalMode,
}

impl CauchyTransform {
    pub fn new(weight: WeightSpec, mode: EvalMode) -> Result<Self> {
        weight.validate()?;
        if mode == EvalMode::ClosedForm && !weight.kind.has_closed_form() {
            return Err(CauchyError::NoClosedForm(weight.kind.name()));
        }
        if let EvalMode::Numeric { tol } = mode {
            QuadTolerance::new(tol.abs_tol, tol.rel_tol).map_err(|source| CauchyError::Quadrature { s: Complex64::default(), source })?;
        }
        Ok(Self { weight, mode })
    }

    /// Closed form when the kind has one, numeric otherwise.
    pub fn preferred(weight: WeightSpec, tol: QuadTolerance) -> Result<Self> {
        let mode = if weight.kind.has_closed_form() { EvalMode::ClosedForm } else { EvalMode::Numeric { tol } };
        Self::new(weight, mode)
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        match self.mode {
            EvalMode::ClosedForm => transform_closed_form(&self.weight, s),
            EvalMode::Numeric { tol } => transform_numeric(&self.weight, s, tol),
        }
    }
}

/// Principal `log(1 + x)` accurate for small `x`.
fn clog1p(x: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * x.re + x.norm_sqr()).ln_1p();
    let im = x.im.atan2(1.0 + x.re);
    Complex64::new(re, im)
}

/// `log((s + 1) / (s - 1))`, principal branch.
pub fn unit_closed_form(s: Complex64) -> Complex64 {
    let x = 2.0 / (s - 1.0);
    if x.norm() < 0.5 {
        clog1p(x)
    } else {
        ((s + 1.0) / (s - 1.0)).ln()
    }
}

pub fn transform_closed_form(weight: &WeightSpec, s: Complex64) -> Result<Complex64> {
    match &weight.kind {
        WeightKind::Unit if weight.support.is_none() => {
            let d = weight.distance_to_support(s)?;
            if d <= PROXIMITY {
                return Err(CauchyError::Proximity { s, distance: d });
            }
            Ok(unit_closed_form(s))
        }
        WeightKind::ExpHankel => Ok(s.exp()),
        WeightKind::Jump { interior_value, exterior_value } => {
            let support = weight.support.as_ref().ok_or_else(|| CauchyError::InvalidWeight("jump needs a closed support curve for the region test".into()))?;
            let d = support.discretize()?;
            let dist = d.distance(s);
            if dist <= PROXIMITY {
                return Err(CauchyError::Proximity { s, distance: dist });
            }
            Ok(if d.contains(s) { *interior_value } else { *exterior_value })
        }
        _ => Err(CauchyError::NoClosedForm(weight.kind.name())),
    }
}

pub fn transform_numeric(weight: &WeightSpec, s: Complex64, tol: QuadTolerance) -> Result<Complex64> {
    let d = weight.distance_to_support(s)?;
    if d <= PROXIMITY {
        return Err(CauchyError::Proximity { s, distance: d });
    }
    weight
        .integrate_against(|z| 1.0 / (s - z), tol)
        .map_err(|e| match e {
            CauchyError::Quadrature { source, .. } => CauchyError::Quadrature { s, source },
            other => other,
        })
}

/// `F_i = C(Z_i)` over a discretized contour, evaluated in parallel and
/// assembled in input order. For a `jump` weight without support curve the
/// sample labels decide between interior and exterior values.
pub fn sample_transform(transform: &CauchyTransform, gamma: &Discretization, label: &str) -> Result<SampleSet> {
    let points = &gamma.points;
    let values: Vec<Complex64> = if let (WeightKind::Jump { interior_value, exterior_value }, None) = (&transform.weight.kind, &transform.weight.support) {
        points
            .iter()
            .zip(&gamma.labels)
            .enumerate()
            .map(|(index, (&s, l))| match l {
                Label::Interior => Ok(*interior_value),
                Label::Exterior => Ok(*exterior_value),
                Label::Unlabeled => Err(CauchyError::Unlabeled { index, s }),
            })
            .collect::<Result<_>>()?
    } else {
        // Repeated points are evaluated once per call.
        let mut first: HashMap<(u64, u64), usize> = HashMap::new();
        let mut unique = Vec::new();
        let slot: Vec<usize> = points
            .iter()
            .map(|z| {
                *first.entry((z.re.to_bits(), z.im.to_bits())).or_insert_with(|| {
                    unique.push(*z);
                    unique.len() - 1
                })
            })
            .collect();
        let computed: Vec<Complex64> = unique
            .par_iter()
            .map(|&s| transform.eval(s))
            .collect::<Vec<_>>()
            .into_iter()
            .enumerate()
            .map(|(u, r)| {
                r.map_err(|e| {
                    let index = slot.iter().position(|&k| k == u).unwrap_or(u);
                    CauchyError::Sample { index, s: unique[u], source: Box::new(e) }
                })
            })
            .collect::<Result<_>>()?;
        slot.iter().map(|&k| computed[k]).collect()
    };
    Ok(SampleSet::new(points.clone(), values, label)?)
}

/// Arcs of the real support, for callers that need the parameterization.
pub fn support_arcs(weight: &WeightSpec) -> Result<Vec<ArcSegment>> {
    let mut arcs: Vec<ArcSegment> = weight
        .real_pieces()?
        .into_iter()
        .map(|p| ArcSegment::line(Complex64::new(p.a, 0.0), Complex64::new(p.b, 0.0)).with_singular_ends(p.singular.0, p.singular.1))
        .collect();
    if let Some(s) = &weight.support {
        arcs.extend(s.arcs()?);
    }
    Ok(arcs)
}
