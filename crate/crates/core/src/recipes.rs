//! Named end-to-end problems: geometry, Cauchy-transform samples, AAA fit,
//! quadrature rule, and a default test integrand with a reference value.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aaa::{aaa_fit, AaaFit, AaaOptions, SampleSet};
use crate::cauchy::{sample_transform, CauchyTransform, Phase, WeightKind, WeightSpec};
use crate::gauss;
use crate::geometry::{self, ContourSpec, Discretization, Label, Piece, PieceSpec, SegmentMode};
use crate::portrait::Window;
use crate::quad::QuadTolerance;
use crate::rule::{apply_rule, filter_rule, rule_from_rational, ConvergenceReport, FilterReport, Provenance, QuadratureRule, Reference};

/// Bernstein parameter of the ellipse through `+-i/sqrt(20)`.
pub fn runge_rho() -> f64 {
    1.0 / 20f64.sqrt() + (21.0f64 / 20.0).sqrt()
}

/// Ellipse parameter for the slit recipes.
pub const SLIT_RHO: f64 = 1.5;
/// Center of the default rectangle, the pole of the `resolvent-sqrt` integrand.
pub const RECTANGLE_CENTER: Complex64 = Complex64::new(0.5625, 0.0);
const RECTANGLE_CORNERS: (Complex64, Complex64) = (Complex64::new(0.125, -0.5), Complex64::new(1.0, 0.5));
const SECTOR_ANGLE: f64 = 0.333 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RecipeName {
    Gauss,
    Stadium,
    Slits,
    Multislit,
    Jacobi,
    BandWeight,
    Oscillatory,
    Hankel,
    Sector,
    Circle,
    Strip,
    Matfun,
    Rectangle,
    Yinyang,
    Custom,
}

impl RecipeName {
    pub const ALL: [RecipeName; 15] = [
        RecipeName::Gauss,
        RecipeName::Stadium,
        RecipeName::Slits,
        RecipeName::Multislit,
        RecipeName::Jacobi,
        RecipeName::BandWeight,
        RecipeName::Oscillatory,
        RecipeName::Hankel,
        RecipeName::Sector,
        RecipeName::Circle,
        RecipeName::Strip,
        RecipeName::Matfun,
        RecipeName::Rectangle,
        RecipeName::Yinyang,
        RecipeName::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RecipeName::Gauss => "gauss",
            RecipeName::Stadium => "stadium",
            RecipeName::Slits => "slits",
            RecipeName::Multislit => "multislit",
            RecipeName::Jacobi => "jacobi",
            RecipeName::BandWeight => "band-weight",
            RecipeName::Oscillatory => "oscillatory",
            RecipeName::Hankel => "hankel",
            RecipeName::Sector => "sector",
            RecipeName::Circle => "circle",
            RecipeName::Strip => "strip",
            RecipeName::Matfun => "matfun",
            RecipeName::Rectangle => "rectangle",
            RecipeName::Yinyang => "yinyang",
            RecipeName::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            RecipeName::Gauss => "unit weight on [-1,1], samples on the Bernstein ellipse through +-i/sqrt(20)",
            RecipeName::Stadium => "unit weight on [-1,1], samples on the eps-neighborhood boundary, eps = 1/sqrt(20)",
            RecipeName::Slits => "unit weight on [-1,1], ellipse with slits to +-0.1i",
            RecipeName::Multislit => "unit weight on [-1,1], ellipse with slits to 0.01i and 0.5-0.01i",
            RecipeName::Jacobi => "weight (1+z)^(3/2) (1-z)^(-1/2) on [-1,1]",
            RecipeName::BandWeight => "weight sqrt(1-z^2) on 1/2 <= |z| <= 1",
            RecipeName::Oscillatory => "weight exp(25 pi i g(z)) on [-1,1], samples on the rho = 2 ellipse",
            RecipeName::Hankel => "inverse Laplace transform, samples of e^z on the negative real axis",
            RecipeName::Sector => "inverse Laplace transform, samples of e^z on two rays at angle pi -+ 0.333 pi",
            RecipeName::Circle => "trapezoidal-rule replacement on the annulus 1/2 <= |z| <= 2",
            RecipeName::Strip => "the strip |Im z| < 1 minus [-1,1]",
            RecipeName::Matfun => "matrix functions with spectrum in [1/8,1]",
            RecipeName::Rectangle => "matrix functions with spectrum in a rectangle",
            RecipeName::Yinyang => "two-valued approximation on the yin-yang curves (diagnostic)",
            RecipeName::Custom => "contour and weight from a JSON file (--seed-geometry)",
        }
    }

    fn defaults(self) -> Defaults {
        let deg = |n| Defaults {
            degree: Some(n),
            tol: None,
            sign_blend: true,
            real_symmetry: false,
            lawson_steps: 0,
            damping: 1.0,
            sweep: SweepRange::new(2, 2, 30),
        };
        match self {
            RecipeName::Gauss | RecipeName::Stadium => Defaults { sign_blend: false, real_symmetry: true, ..deg(20) },
            RecipeName::Jacobi => deg(20),
            RecipeName::Slits | RecipeName::Multislit => Defaults { sweep: SweepRange::new(2, 2, 40), ..deg(24) },
            RecipeName::BandWeight => Defaults { sweep: SweepRange::new(2, 2, 40), ..deg(20) },
            RecipeName::Oscillatory => Defaults { sweep: SweepRange::new(2, 2, 40), ..deg(30) },
            RecipeName::Hankel => Defaults { sign_blend: false, sweep: SweepRange::new(4, 1, 14), ..deg(14) },
            RecipeName::Sector => Defaults { sign_blend: false, sweep: SweepRange::new(4, 2, 24), ..deg(20) },
            RecipeName::Circle | RecipeName::Strip => Defaults {
                degree: None,
                tol: Some(1e-8),
                lawson_steps: 20,
                sweep: SweepRange::new(4, 4, 48),
                ..deg(0)
            },
            RecipeName::Matfun => Defaults { sweep: SweepRange::new(4, 4, 48), ..deg(32) },
            RecipeName::Rectangle => Defaults { sweep: SweepRange::new(4, 4, 48), ..deg(40) },
            RecipeName::Yinyang => deg(20),
            RecipeName::Custom => Defaults { degree: None, tol: Some(1e-10), sign_blend: false, ..deg(0) },
        }
    }
}

impl fmt::Display for RecipeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RecipeName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        RecipeName::ALL.iter().copied().find(|r| r.as_str() == s).ok_or_else(|| format!("unknown recipe `{s}`"))
    }
}

struct Defaults {
    degree: Option<usize>,
    tol: Option<f64>,
    sign_blend: bool,
    real_symmetry: bool,
    lawson_steps: usize,
    damping: f64,
    sweep: SweepRange,
}

/// Degrees `start, start + step, ..., <= end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRange {
    pub start: usize,
    pub step: usize,
    pub end: usize,
}

impl SweepRange {
    pub const fn new(start: usize, step: usize, end: usize) -> Self {
        Self { start, step, end }
    }

    pub fn degrees(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step.max(1)).collect()
    }
}

impl FromStr for SweepRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("sweep must look like N1:STEP:N2, got `{s}`"));
        };
        let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad sweep bound `{x}`: {e}"));
        let r = SweepRange::new(num(a)?, num(b)?, num(c)?);
        if r.step == 0 || r.start == 0 || r.start > r.end {
            return Err(format!("sweep needs 1 <= N1 <= N2 and STEP >= 1, got `{s}`"));
        }
        Ok(r)
    }
}

/// Built-in test integrands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Integrand {
    /// `1/(1 + 20 z^2)`
    Runge20,
    /// `1/(1 + 100 z^2)`
    Runge100,
    /// `log(i (z - 0.01i)) + log(-i (z - 0.5 + 0.01i))`
    LogPair,
    /// `1/(1 + z^2/4)`
    Lorentz4,
    /// `-e/(1 + z)`
    HankelPole,
    /// `-2 sqrt(z - 1/2) sqrt(z + 1/2)`
    CircleSqrt,
    /// `-sqrt((z - 1)/(z + 1))`
    StripSqrt,
    /// `(16/7) sqrt((z - 1/8)/(z - 1))`
    MatfunSqrt,
    /// `sqrt(z)/(z - 9/16)`
    ResolventSqrt,
    /// `1`
    One,
}

const LOG_PAIR_B1: Complex64 = Complex64::new(0.0, 0.01);
const LOG_PAIR_B2: Complex64 = Complex64::new(0.5, -0.01);
const I: Complex64 = Complex64::new(0.0, 1.0);

impl Integrand {
    pub fn eval(self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self {
            Integrand::Runge20 => one / (1.0 + 20.0 * z * z),
            Integrand::Runge100 => one / (1.0 + 100.0 * z * z),
            Integrand::LogPair => (I * (z - LOG_PAIR_B1)).ln() + (-I * (z - LOG_PAIR_B2)).ln(),
            Integrand::Lorentz4 => one / (1.0 + z * z / 4.0),
            Integrand::HankelPole => -E / (1.0 + z),
            Integrand::CircleSqrt => -2.0 * (z - 0.5).sqrt() * (z + 0.5).sqrt(),
            Integrand::StripSqrt => -((z - 1.0) / (z + 1.0)).sqrt(),
            Integrand::MatfunSqrt => (16.0 / 7.0) * ((z - 0.125) / (z - 1.0)).sqrt(),
            Integrand::ResolventSqrt => z.sqrt() / (z - RECTANGLE_CENTER),
            Integrand::One => one,
        }
    }

    /// `int_{-1}^{1} f(x) dx` where an antiderivative is available.
    fn unit_interval_integral(self) -> Option<Complex64> {
        let re = |x: f64| Some(Complex64::new(x, 0.0));
        match self {
            Integrand::Runge20 => re(2.0 * 20f64.sqrt().atan() / 20f64.sqrt()),
            Integrand::Runge100 => re(2.0 * 10f64.atan() / 10.0),
            Integrand::Lorentz4 => re(4.0 * 0.5f64.atan()),
            Integrand::One => re(2.0),
            Integrand::LogPair => {
                let anti = |z: Complex64, a: Complex64, b: Complex64| (z - b) * ((a * (z - b)).ln() - 1.0);
                let term = |a, b| anti(Complex64::new(1.0, 0.0), a, b) - anti(Complex64::new(-1.0, 0.0), a, b);
                Some(term(I, LOG_PAIR_B1) + term(-I, LOG_PAIR_B2))
            }
            _ => None,
        }
    }
}

/// Contour (and optional weight) read from a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryFile {
    pub pieces: Vec<PieceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
}

impl GeometryFile {
    pub fn contour(&self) -> ContourSpec {
        ContourSpec::new(self.pieces.clone())
    }
}

/// User-facing run configuration. Unset options fall back to recipe defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecipeConfig {
    pub recipe: RecipeName,
    pub degree: Option<usize>,
    pub tol: Option<f64>,
    pub sign_blend: Option<bool>,
    pub lawson_steps: Option<usize>,
    pub damping: Option<f64>,
    pub real_symmetry: Option<bool>,
    pub sweep: Option<SweepRange>,
    pub integrand: Option<Integrand>,
    /// Phase function of the oscillatory weight.
    pub phase: Option<Phase>,
    pub geometry: Option<GeometryFile>,
}

impl RecipeConfig {
    pub fn new(recipe: RecipeName) -> Self {
        Self {
            recipe,
            degree: None,
            tol: None,
            sign_blend: None,
            lawson_steps: None,
            damping: None,
            real_symmetry: None,
            sweep: None,
            integrand: None,
            phase: None,
            geometry: None,
        }
    }

    pub fn with_degree(mut self, n: usize) -> Self {
        self.degree = Some(n);
        self.tol = None;
        self
    }

    /// AAA options after applying recipe defaults.
    pub fn aaa_options(&self) -> AaaOptions {
        let d = self.recipe.defaults();
        let (degree, tol) = match (self.degree, self.tol) {
            (None, None) => (d.degree, d.tol),
            other => other,
        };
        AaaOptions {
            degree,
            tol,
            sign_blend: self.sign_blend.unwrap_or(d.sign_blend),
            lawson_steps: self.lawson_steps.unwrap_or(d.lawson_steps),
            damping: self.damping.unwrap_or(d.damping),
            enforce_real_symmetry: self.real_symmetry.unwrap_or(d.real_symmetry),
            ..AaaOptions::default()
        }
    }

    pub fn default_sweep(&self) -> SweepRange {
        self.recipe.defaults().sweep
    }

    /// Stable hash of the resolved configuration.
    pub fn options_hash(&self) -> String {
        let payload = serde_json::json!({ "config": self, "options": self.aaa_options() });
        let digest = Sha256::digest(payload.to_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Config,
    Geometry,
    Sampling,
    Approximation,
    Rule,
    Filter,
    Integrand,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Geometry => "geometry",
            Stage::Sampling => "sampling",
            Stage::Approximation => "approximation",
            Stage::Rule => "rule",
            Stage::Filter => "filter",
            Stage::Integrand => "integrand",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
#[error("{recipe}: {stage} stage failed: {message}")]
pub struct RecipeError {
    pub recipe: RecipeName,
    pub stage: Stage,
    pub message: String,
}

trait StageExt<T> {
    fn stage(self, recipe: RecipeName, stage: Stage) -> Result<T, RecipeError>;
}

impl<T, E: fmt::Display> StageExt<T> for Result<T, E> {
    fn stage(self, recipe: RecipeName, stage: Stage) -> Result<T, RecipeError> {
        self.map_err(|e| RecipeError { recipe, stage, message: e.to_string() })
    }
}

fn config_error(recipe: RecipeName, message: &str) -> RecipeError {
    RecipeError { recipe, stage: Stage::Config, message: message.to_string() }
}

/// Everything needed to fit and evaluate one recipe, before any AAA work.
#[derive(Clone, Debug)]
pub struct Problem {
    pub recipe: RecipeName,
    pub gamma: Discretization,
    pub weight: WeightSpec,
    /// Region whose exterior nodes are dropped, for closed contours.
    pub filter_region: Option<ContourSpec>,
    pub integrand: Option<Integrand>,
    pub reference: Option<Reference>,
    pub baseline: Option<BaselineKind>,
    pub window: Window,
    /// Added to `r` before rendering so that two-valued targets separate.
    pub portrait_shift: Complex64,
}

/// Classical comparison rule applied to `f w` (or `f` for Gauss–Jacobi).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaselineKind {
    GaussLegendre,
    GaussJacobi { alpha: f64, beta: f64 },
}

impl BaselineKind {
    pub fn value(&self, n: usize, weight: &WeightSpec, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        let (rule, weighted) = match *self {
            BaselineKind::GaussLegendre => (gauss::gauss_legendre(n), true),
            BaselineKind::GaussJacobi { alpha, beta } => (gauss::gauss_jacobi(n, alpha, beta), false),
        };
        let terms: Vec<Complex64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| {
                let z = Complex64::new(x, 0.0);
                let wz = if weighted { weight.density(z) } else { Complex64::new(1.0, 0.0) };
                w * wz * f(z)
            })
            .collect();
        crate::sum::pairwise_sum(&terms)
    }
}

fn interval_recipe(recipe: RecipeName) -> bool {
    matches!(
        recipe,
        RecipeName::Gauss
            | RecipeName::Stadium
            | RecipeName::Slits
            | RecipeName::Multislit
            | RecipeName::Jacobi
            | RecipeName::BandWeight
            | RecipeName::Oscillatory
    )
}

fn default_integrand(recipe: RecipeName) -> Option<Integrand> {
    Some(match recipe {
        RecipeName::Gauss | RecipeName::Stadium | RecipeName::Jacobi | RecipeName::BandWeight => Integrand::Runge20,
        RecipeName::Slits => Integrand::Runge100,
        RecipeName::Multislit => Integrand::LogPair,
        RecipeName::Oscillatory => Integrand::Lorentz4,
        RecipeName::Hankel | RecipeName::Sector => Integrand::HankelPole,
        RecipeName::Circle => Integrand::CircleSqrt,
        RecipeName::Strip => Integrand::StripSqrt,
        RecipeName::Matfun => Integrand::MatfunSqrt,
        RecipeName::Rectangle => Integrand::ResolventSqrt,
        RecipeName::Yinyang | RecipeName::Custom => return None,
    })
}

/// Known value of `(1/2 pi i) int f C` for the contour recipes, whose
/// weights have no real support to integrate against.
fn contour_reference(recipe: RecipeName, f: Integrand) -> Option<(f64, &'static str)> {
    use Integrand::*;
    use RecipeName::*;
    match (recipe, f) {
        (Hankel | Sector | Circle | Strip | Matfun | Rectangle, One) => Some((0.0, "residue theorem: no singularity enclosed")),
        (Hankel | Sector, HankelPole) => Some((1.0, "residue of -e e^z/(1+z) at z = -1")),
        (Circle, CircleSqrt) => Some((0.25, "coefficient of 1/z in the Laurent series at infinity")),
        (Strip, StripSqrt) => Some((1.0, "coefficient of 1/z in the Laurent series at infinity")),
        (Matfun, MatfunSqrt) => Some((1.0, "coefficient of 1/z in the Laurent series at infinity")),
        (Rectangle, ResolventSqrt) => Some((RECTANGLE_CENTER.sqrt().re, "Cauchy integral formula for sqrt at the rectangle center")),
        _ => None,
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ellipse_spec(rho: f64, n: usize) -> ContourSpec {
    ContourSpec::single(Piece::Ellipse { rho, n })
}

/// Geometry, weight, integrand and reference for a configuration.
pub fn build_problem(config: &RecipeConfig) -> Result<Problem, RecipeError> {
    let recipe = config.recipe;
    let jump = |inner: f64, outer: f64| WeightSpec::new(WeightKind::Jump { interior_value: c(inner, 0.0), exterior_value: c(outer, 0.0) });
    let unit = || WeightSpec::new(WeightKind::Unit);
    let interval_window = Window::new((-1.5, 1.5), (-1.0, 1.0));
    let rho = runge_rho();
    if config.phase.is_some() && recipe != RecipeName::Oscillatory {
        return Err(config_error(recipe, "--phase applies only to the oscillatory recipe"));
    }

    // (sample ContourSpec or discretization, weight, closed, window, shift)
    let (spec, mut gamma, weight, closed, window, shift): (Option<ContourSpec>, Option<Discretization>, WeightSpec, bool, Window, Complex64) = match recipe {
        RecipeName::Gauss => (Some(ellipse_spec(rho, 200)), None, unit().stage(recipe, Stage::Config)?, true, interval_window, c(0.0, 0.0)),
        RecipeName::Stadium => {
            let s = ContourSpec::single(Piece::Stadium { eps: 1.0 / 20f64.sqrt(), n_side: 100, n_cap: 99 });
            (Some(s), None, unit().stage(recipe, Stage::Config)?, true, interval_window, c(0.0, 0.0))
        }
        RecipeName::Slits | RecipeName::Multislit => {
            let tips = if recipe == RecipeName::Slits { vec![c(0.0, 0.1), c(0.0, -0.1)] } else { vec![LOG_PAIR_B1, LOG_PAIR_B2] };
            let s = ContourSpec::single(Piece::SlitEllipse { rho: SLIT_RHO, tips, n: 200, n_slit: 40 });
            (Some(s), None, unit().stage(recipe, Stage::Config)?, true, Window::new((-1.8, 1.8), (-1.2, 1.2)), c(0.0, 0.0))
        }
        RecipeName::Jacobi => {
            let w = WeightSpec::new(WeightKind::Jacobi { alpha: -0.5, beta: 1.5 }).stage(recipe, Stage::Config)?;
            (Some(ellipse_spec(rho, 400)), None, w, true, interval_window, c(0.0, 0.0))
        }
        RecipeName::BandWeight => {
            let w = WeightSpec::new(WeightKind::Band).stage(recipe, Stage::Config)?;
            (Some(ellipse_spec(rho, 400)), None, w, true, interval_window, c(0.0, 0.0))
        }
        RecipeName::Oscillatory => {
            let phase = config.phase.unwrap_or(Phase::Linear);
            let w = WeightSpec::new(WeightKind::Oscillatory { omega: 25.0 * PI, phase }).stage(recipe, Stage::Config)?;
            (Some(ellipse_spec(2.0, 400)), None, w, true, Window::new((-1.5, 1.5), (-1.0, 1.0)), c(0.0, 0.0))
        }
        RecipeName::Hankel | RecipeName::Sector => {
            let pts = if recipe == RecipeName::Hankel {
                geometry::hankel_domain(300, 1e-3, 1e4).stage(recipe, Stage::Geometry)?
            } else {
                geometry::sector_domain(300, 1e-3, 1e4, SECTOR_ANGLE).stage(recipe, Stage::Geometry)?
            };
            let w = WeightSpec::new(WeightKind::ExpHankel).stage(recipe, Stage::Config)?;
            (None, Some(Discretization::from_points(pts, false)), w, false, Window::new((-10.0, 6.0), (-8.0, 8.0)), c(0.0, 0.0))
        }
        RecipeName::Circle => {
            let s = ContourSpec::new(vec![
                PieceSpec::labeled(Piece::Circle { center: c(0.0, 0.0), radius: 2.0, n: 100 }, Label::Exterior),
                PieceSpec::labeled(Piece::Circle { center: c(0.0, 0.0), radius: 0.5, n: 100 }, Label::Interior).reversed(),
            ]);
            let d = geometry::annulus_pair(0.5, 2.0, 100).stage(recipe, Stage::Geometry)?;
            (Some(s), Some(d), jump(-1.0, 0.0).stage(recipe, Stage::Config)?, true, Window::new((-2.5, 2.5), (-2.5, 2.5)), c(0.5, 0.0))
        }
        RecipeName::Strip => {
            let d = geometry::strip_minus_segment(199, 200, SegmentMode::Corrected).stage(recipe, Stage::Geometry)?;
            (None, Some(d), jump(-1.0, 0.0).stage(recipe, Stage::Config)?, false, Window::new((-3.0, 3.0), (-2.0, 2.0)), c(0.5, 0.0))
        }
        RecipeName::Matfun => {
            let d = geometry::interval_plus_cut(100, 100, 0.125, 1.0).stage(recipe, Stage::Geometry)?;
            (None, Some(d), jump(-1.0, 0.0).stage(recipe, Stage::Config)?, false, Window::new((-1.0, 2.0), (-1.5, 1.5)), c(0.5, 0.0))
        }
        RecipeName::Rectangle => {
            let (ll, ur) = RECTANGLE_CORNERS;
            let d = geometry::rectangle_exterior(ll, ur, 50, 100).stage(recipe, Stage::Geometry)?;
            (None, Some(d), jump(-1.0, 0.0).stage(recipe, Stage::Config)?, false, Window::new((-1.5, 2.0), (-1.75, 1.75)), c(0.5, 0.0))
        }
        RecipeName::Yinyang => {
            let d = geometry::yin_yang(100).stage(recipe, Stage::Geometry)?;
            (None, Some(d), jump(-1.0, 1.0).stage(recipe, Stage::Config)?, false, Window::new((-1.5, 1.5), (-1.5, 1.5)), c(0.0, 0.0))
        }
        RecipeName::Custom => {
            let file = config.geometry.as_ref().ok_or_else(|| config_error(recipe, "the custom recipe needs a geometry file"))?;
            let w = file.weight.clone().ok_or_else(|| config_error(recipe, "the custom geometry file needs a `weight` entry"))?;
            w.validate().stage(recipe, Stage::Config)?;
            let s = file.contour();
            let closed = s.pieces.iter().all(|p| p.piece.is_closed());
            (Some(s), None, w, closed, Window::new((-2.0, 2.0), (-2.0, 2.0)), c(0.0, 0.0))
        }
    };

    // A geometry file replaces the sample contour of a named recipe.
    let mut spec = spec;
    let mut closed = closed;
    if let (Some(file), true) = (&config.geometry, recipe != RecipeName::Custom) {
        if file.weight.is_some() {
            return Err(config_error(recipe, "a weight in the geometry file is only used by the custom recipe"));
        }
        let s = file.contour();
        closed = s.pieces.iter().all(|p| p.piece.is_closed());
        gamma = None;
        spec = Some(s);
    }
    let gamma = match gamma {
        Some(d) => d,
        None => spec.as_ref().expect("recipes without a discretization carry a spec").discretize().stage(recipe, Stage::Geometry)?,
    };
    gamma.check_distinct().stage(recipe, Stage::Geometry)?;
    let filter_region = if closed && recipe != RecipeName::Yinyang { spec } else { None };

    let integrand = match config.integrand {
        Some(f) => Some(f),
        None => default_integrand(recipe),
    };
    let reference = match integrand {
        None => None,
        Some(f) => Some(reference_value(recipe, &weight, f)?),
    };
    let baseline = match recipe {
        RecipeName::Jacobi => Some(BaselineKind::GaussJacobi { alpha: -0.5, beta: 1.5 }),
        r if interval_recipe(r) => Some(BaselineKind::GaussLegendre),
        RecipeName::Custom if weight.support.is_none() && !matches!(weight.kind, WeightKind::Jump { .. } | WeightKind::ExpHankel) => {
            Some(BaselineKind::GaussLegendre)
        }
        _ => None,
    };
    Ok(Problem { recipe, gamma, weight, filter_region, integrand, reference, baseline, window, portrait_shift: shift })
}

fn reference_value(recipe: RecipeName, weight: &WeightSpec, f: Integrand) -> Result<Reference, RecipeError> {
    let real_support = !matches!(weight.kind, WeightKind::Jump { .. } | WeightKind::ExpHankel);
    if interval_recipe(recipe) || (recipe == RecipeName::Custom && real_support) {
        if weight.kind == WeightKind::Unit && weight.support.is_none() {
            if let Some(v) = f.unit_interval_integral() {
                return Ok(Reference { value: v, provenance: "closed-form antiderivative".into() });
            }
        }
        let v = weight.integrate_against(|z| f.eval(z), QuadTolerance::default()).stage(recipe, Stage::Integrand)?;
        return Ok(Reference { value: v, provenance: "adaptive Gauss-Kronrod on the weight support".into() });
    }
    match contour_reference(recipe, f) {
        Some((v, why)) => Ok(Reference { value: c(v, 0.0), provenance: why.into() }),
        None => Err(RecipeError { recipe, stage: Stage::Integrand, message: format!("no reference value for integrand {f:?} on this recipe") }),
    }
}

/// Result of a full recipe run (no files written).
#[derive(Clone, Debug)]
pub struct RecipeRun {
    pub config: RecipeConfig,
    pub options: AaaOptions,
    pub problem: Problem,
    pub samples: SampleSet,
    pub fit: AaaFit,
    pub rule: QuadratureRule,
    pub filter: Option<FilterReport>,
    pub integral: Option<Complex64>,
    pub error: Option<f64>,
    pub sweep: Option<ConvergenceReport>,
}

/// Achieved metrics, as echoed to `run.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetrics {
    pub degree: usize,
    pub nodes: usize,
    pub approx_error: f64,
    pub contour_length: f64,
    pub weight_sum: Complex64,
    pub integrand: Option<Integrand>,
    pub integral: Option<Complex64>,
    pub reference: Option<Reference>,
    pub error: Option<f64>,
    pub filtered_nodes: usize,
    pub cleanup_removed: usize,
    pub lawson: Option<crate::aaa::LawsonReport>,
}

impl RecipeRun {
    pub fn metrics(&self) -> RunMetrics {
        RunMetrics {
            degree: self.fit.degree(),
            nodes: self.rule.nodes.len(),
            approx_error: self.fit.max_error,
            contour_length: self.rule.contour_length.unwrap_or(f64::NAN),
            weight_sum: self.rule.weight_sum(),
            integrand: self.problem.integrand,
            integral: self.integral,
            reference: self.problem.reference.clone(),
            error: self.error,
            filtered_nodes: self.filter.as_ref().map_or(0, |f| f.removed_nodes.len()),
            cleanup_removed: self.fit.cleanup.removed,
            lawson: self.fit.lawson.clone(),
        }
    }
}

/// Transform samples on the problem's contour.
pub fn sample(problem: &Problem) -> Result<SampleSet, RecipeError> {
    let t = CauchyTransform::preferred(problem.weight.clone(), QuadTolerance::default()).stage(problem.recipe, Stage::Sampling)?;
    sample_transform(&t, &problem.gamma, problem.recipe.as_str()).stage(problem.recipe, Stage::Sampling)
}

/// AAA fit and rule (filtered for closed contours) from existing samples.
pub fn fit_rule(
    problem: &Problem,
    samples: &SampleSet,
    options: &AaaOptions,
    provenance: Provenance,
) -> Result<(AaaFit, QuadratureRule, Option<FilterReport>), RecipeError> {
    let recipe = problem.recipe;
    let fit = aaa_fit(samples, options).stage(recipe, Stage::Approximation)?;
    let rule = rule_from_rational(&fit.poles, problem.gamma.length(), fit.max_error, provenance).stage(recipe, Stage::Rule)?;
    match &problem.filter_region {
        Some(region) => {
            let (rule, report) = filter_rule(&rule, region).stage(recipe, Stage::Filter)?;
            Ok((fit, rule, Some(report)))
        }
        None => Ok((fit, rule, None)),
    }
}

fn integral_error(problem: &Problem, rule: &QuadratureRule) -> Result<(Option<Complex64>, Option<f64>), RecipeError> {
    let Some(f) = problem.integrand else { return Ok((None, None)) };
    let v = apply_rule(rule, |z| f.eval(z)).stage(problem.recipe, Stage::Integrand)?;
    let e = problem.reference.as_ref().map(|r| (v - r.value).norm());
    Ok((Some(v), e))
}

/// Refits at each degree on the same samples. The error column is
/// `|I_n - reference|` when the recipe has an integrand, and the AAA max
/// residual otherwise.
pub fn sweep(problem: &Problem, samples: &SampleSet, options: &AaaOptions, degrees: &[usize]) -> ConvergenceReport {
    let results: Vec<Result<f64, String>> = degrees
        .par_iter()
        .map(|&n| {
            let opts = AaaOptions { degree: Some(n), tol: None, ..options.clone() };
            let (fit, rule, _) = fit_rule(problem, samples, &opts, Provenance::default()).map_err(|e| e.to_string())?;
            match integral_error(problem, &rule).map_err(|e| e.to_string())? {
                (_, Some(e)) => Ok(e),
                _ => Ok(fit.max_error),
            }
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
    let reference = problem.reference.clone().unwrap_or(Reference { value: c(0.0, 0.0), provenance: "none (error column is the AAA residual)".into() });
    let baseline = match (problem.baseline, problem.integrand, &problem.reference) {
        (Some(b), Some(f), Some(r)) => Some(degrees.iter().map(|&n| Some((b.value(n.max(1), &problem.weight, |z| f.eval(z)) - r.value).norm())).collect()),
        _ => None,
    };
    ConvergenceReport { degrees: degrees.to_vec(), errors, failures, reference, baseline }
}

/// Full pipeline: geometry, sampling, fit, rule, integrand check, optional
/// sweep.
pub fn run_recipe(config: &RecipeConfig) -> Result<RecipeRun, RecipeError> {
    let options = config.aaa_options();
    options.validate().stage(config.recipe, Stage::Config)?;
    let problem = build_problem(config)?;
    let samples = sample(&problem)?;
    let provenance = Provenance { recipe: config.recipe.to_string(), options_hash: config.options_hash() };
    let (fit, rule, filter) = fit_rule(&problem, &samples, &options, provenance)?;
    let (integral, error) = integral_error(&problem, &rule)?;
    let sweep = config.sweep.map(|r| sweep(&problem, &samples, &options, &r.degrees()));
    Ok(RecipeRun { config: config.clone(), options, problem, samples, fit, rule, filter, integral, error, sweep })
}
