//! Discretized contours and integration arcs.
//!
//! Generators return point sequences (plus component labels for the
//! two-component sign problems). `ContourSpec` composes primitive pieces and
//! is the JSON-facing description used by the `custom` recipe.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::ArcSegment;

/// Offset separating the two sides of a slit.
pub const SLIT_OFFSET: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("slit tip {tip} is not strictly inside the ellipse")]
    TipOutside { tip: Complex64 },
    #[error("duplicate points at indices {first} and {second}: {point}")]
    DuplicatePoint { first: usize, second: usize, point: Complex64 },
    #[error("piece `{0}` has no smooth parameterization")]
    NoArcs(&'static str),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(GeometryError::InvalidParameter(msg()))
    }
}

/// Which side of a two-valued target a sample belongs to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    #[default]
    Unlabeled,
    Interior,
    Exterior,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Uniform,
    /// Geometric spacing; both endpoints must lie on the same ray from 0.
    Log,
    /// `tan` grading as in `tan(pi j / (n + 1))`, scaled to the segment.
    TanGraded,
    /// Chebyshev points, clustered at both ends.
    Chebyshev,
}

/// A geometric primitive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Piece {
    Ellipse {
        rho: f64,
        #[serde(default = "default_n")]
        n: usize,
    },
    Circle {
        #[serde(default)]
        center: Complex64,
        radius: f64,
        #[serde(default = "default_n")]
        n: usize,
    },
    Segment {
        a: Complex64,
        b: Complex64,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default)]
        spacing: Spacing,
    },
    Ray {
        #[serde(default)]
        origin: Complex64,
        direction: Complex64,
        r_min: f64,
        r_max: f64,
        #[serde(default = "default_n")]
        n: usize,
    },
    Stadium {
        eps: f64,
        #[serde(default = "default_n")]
        n_side: usize,
        #[serde(default = "default_cap")]
        n_cap: usize,
    },
    SlitEllipse {
        rho: f64,
        tips: Vec<Complex64>,
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_slit")]
        n_slit: usize,
    },
    Rectangle {
        lower_left: Complex64,
        upper_right: Complex64,
        #[serde(default = "default_side")]
        n_side: usize,
    },
    Points {
        points: Vec<Complex64>,
        #[serde(default)]
        closed: bool,
    },
}

fn default_n() -> usize {
    200
}
fn default_cap() -> usize {
    99
}
fn default_slit() -> usize {
    40
}
fn default_side() -> usize {
    50
}

impl Piece {
    pub fn name(&self) -> &'static str {
        match self {
            Piece::Ellipse { .. } => "ellipse",
            Piece::Circle { .. } => "circle",
            Piece::Segment { .. } => "segment",
            Piece::Ray { .. } => "ray",
            Piece::Stadium { .. } => "stadium",
            Piece::SlitEllipse { .. } => "slit-ellipse",
            Piece::Rectangle { .. } => "rectangle",
            Piece::Points { .. } => "points",
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Piece::Segment { .. } | Piece::Ray { .. } => false,
            Piece::Points { closed, .. } => *closed,
            _ => true,
        }
    }

    pub fn discretize(&self) -> Result<Vec<Complex64>> {
        let pts = match self {
            Piece::Ellipse { rho, n } => bernstein_ellipse(*rho, *n)?,
            Piece::Circle { center, radius, n } => circle(*center, *radius, *n)?,
            Piece::Segment { a, b, n, spacing } => segment(*a, *b, *n, *spacing)?,
            Piece::Ray { origin, direction, r_min, r_max, n } => ray(*origin, *direction, *r_min, *r_max, *n)?,
            Piece::Stadium { eps, n_side, n_cap } => stadium(*eps, *n_side, *n_cap)?,
            Piece::SlitEllipse { rho, tips, n, n_slit } => slit_ellipse(*rho, tips, *n, *n_slit)?,
            Piece::Rectangle { lower_left, upper_right, n_side } => rectangle(*lower_left, *upper_right, *n_side)?,
            Piece::Points { points, .. } => {
                check(points.len() >= 2, || "point lists need at least two points".into())?;
                check(points.iter().all(|z| z.is_finite()), || "point lists must be finite".into())?;
                points.clone()
            }
        };
        Ok(pts)
    }

    /// Smooth arcs tracing the piece (for adaptive integration along it).
    pub fn arcs(&self) -> Result<Vec<ArcSegment>> {
        match self {
            Piece::Ellipse { rho, .. } => {
                check(*rho > 1.0, || format!("ellipse parameter must exceed 1, got {rho}"))?;
                let (a, b) = ellipse_axes(*rho);
                Ok(vec![ArcSegment::new(
                    std::sync::Arc::new(move |t| Complex64::new(a * (2.0 * PI * t).cos(), b * (2.0 * PI * t).sin())),
                    std::sync::Arc::new(move |t| 2.0 * PI * Complex64::new(-a * (2.0 * PI * t).sin(), b * (2.0 * PI * t).cos())),
                )])
            }
            Piece::Circle { center, radius, .. } => Ok(vec![ArcSegment::circular(*center, *radius, 0.0, 2.0 * PI)]),
            Piece::Segment { a, b, .. } => Ok(vec![ArcSegment::line(*a, *b)]),
            Piece::Ray { origin, direction, r_min, r_max, .. } => {
                let d = direction / direction.norm();
                Ok(vec![ArcSegment::line(origin + d * *r_min, origin + d * *r_max)])
            }
            Piece::Stadium { eps, .. } => {
                let e = *eps;
                Ok(vec![
                    ArcSegment::line(c(-1.0, -e), c(1.0, -e)),
                    ArcSegment::circular(c(1.0, 0.0), e, -PI / 2.0, PI / 2.0),
                    ArcSegment::line(c(1.0, e), c(-1.0, e)),
                    ArcSegment::circular(c(-1.0, 0.0), e, PI / 2.0, 1.5 * PI),
                ])
            }
            Piece::Rectangle { lower_left, upper_right, .. } => {
                let (ll, ur) = (*lower_left, *upper_right);
                let lr = c(ur.re, ll.im);
                let ul = c(ll.re, ur.im);
                Ok(vec![ArcSegment::line(ll, lr), ArcSegment::line(lr, ur), ArcSegment::line(ur, ul), ArcSegment::line(ul, ll)])
            }
            Piece::Points { points, closed } => {
                let mut arcs: Vec<ArcSegment> = points.windows(2).map(|w| ArcSegment::line(w[0], w[1])).collect();
                if *closed {
                    arcs.push(ArcSegment::line(points[points.len() - 1], points[0]));
                }
                Ok(arcs)
            }
            Piece::SlitEllipse { .. } => Err(GeometryError::NoArcs("slit-ellipse")),
        }
    }
}

/// A piece together with its orientation and component label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    #[serde(flatten)]
    pub piece: Piece,
    #[serde(default)]
    pub reversed: bool,
    #[serde(default)]
    pub label: Label,
}

impl PieceSpec {
    pub fn new(piece: Piece) -> Self {
        Self { piece, reversed: false, label: Label::Unlabeled }
    }

    pub fn labeled(piece: Piece, label: Label) -> Self {
        Self { piece, reversed: false, label }
    }

    pub fn reversed(mut self) -> Self {
        self.reversed = !self.reversed;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub pieces: Vec<PieceSpec>,
}

impl ContourSpec {
    pub fn new(pieces: Vec<PieceSpec>) -> Self {
        Self { pieces }
    }

    pub fn single(piece: Piece) -> Self {
        Self { pieces: vec![PieceSpec::new(piece)] }
    }

    pub fn discretize(&self) -> Result<Discretization> {
        check(!self.pieces.is_empty(), || "contour has no pieces".into())?;
        let mut d = Discretization::default();
        for p in &self.pieces {
            let mut pts = p.piece.discretize()?;
            if p.reversed {
                pts.reverse();
            }
            d.push(pts, p.label, p.piece.is_closed());
        }
        Ok(d)
    }

    /// Smooth arcs of every piece, honoring orientation.
    pub fn arcs(&self) -> Result<Vec<ArcSegment>> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let arcs = p.piece.arcs()?;
            if p.reversed {
                out.extend(arcs.into_iter().rev().map(reverse_arc));
            } else {
                out.extend(arcs);
            }
        }
        Ok(out)
    }
}

fn reverse_arc(a: ArcSegment) -> ArcSegment {
    let (s, e) = a.singular_ends();
    let a1 = a.clone();
    let a2 = a;
    ArcSegment::new(std::sync::Arc::new(move |t| a1.point(1.0 - t)), std::sync::Arc::new(move |t| -a2.tangent(1.0 - t)))
        .with_singular_ends(e, s)
}

/// Concatenated point sequence with per-point labels and piece boundaries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Discretization {
    pub points: Vec<Complex64>,
    pub labels: Vec<Label>,
    pub pieces: Vec<(Range<usize>, bool)>,
}

impl Discretization {
    pub fn from_points(points: Vec<Complex64>, closed: bool) -> Self {
        let mut d = Self::default();
        d.push(points, Label::Unlabeled, closed);
        d
    }

    pub fn push(&mut self, points: Vec<Complex64>, label: Label, closed: bool) {
        let start = self.points.len();
        self.labels.extend(std::iter::repeat(label).take(points.len()));
        self.points.extend(points);
        self.pieces.push((start..self.points.len(), closed));
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Polyline length; closed pieces include the closing edge and open
    /// pieces count twice (Γ wraps around them).
    pub fn length(&self) -> f64 {
        self.pieces
            .iter()
            .map(|(r, closed)| {
                let pts = &self.points[r.clone()];
                let l = polyline_length(pts, *closed);
                if *closed {
                    l
                } else {
                    2.0 * l
                }
            })
            .sum()
    }

    /// Winding number of the closed pieces about `z`.
    pub fn winding_number(&self, z: Complex64) -> f64 {
        self.pieces.iter().filter(|(_, closed)| *closed).map(|(r, _)| winding_number(&self.points[r.clone()], z)).sum()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.winding_number(z).abs() > 0.5
    }

    /// Distance from `z` to the polyline through the points.
    pub fn distance(&self, z: Complex64) -> f64 {
        self.pieces.iter().map(|(r, closed)| polyline_distance(&self.points[r.clone()], *closed, z)).fold(f64::INFINITY, f64::min)
    }

    /// Fails on exactly repeated points.
    pub fn check_distinct(&self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        let p = &self.points;
        order.sort_by(|&a, &b| p[a].re.total_cmp(&p[b].re).then(p[a].im.total_cmp(&p[b].im)));
        for w in order.windows(2) {
            if p[w[0]] == p[w[1]] {
                return Err(GeometryError::DuplicatePoint { first: w[0].min(w[1]), second: w[0].max(w[1]), point: p[w[0]] });
            }
        }
        Ok(())
    }
}

pub fn polyline_length(points: &[Complex64], closed: bool) -> f64 {
    let mut l: f64 = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if closed && points.len() > 1 {
        l += (points[0] - points[points.len() - 1]).norm();
    }
    l
}

/// Winding number of the closed polygon through `points` about `z`, from
/// summed argument increments.
pub fn winding_number(points: &[Complex64], z: Complex64) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for k in 0..n {
        let a = points[k] - z;
        let b = points[(k + 1) % n] - z;
        total += (b / a).arg();
    }
    total / (2.0 * PI)
}

fn segment_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

pub fn polyline_distance(points: &[Complex64], closed: bool, z: Complex64) -> f64 {
    if points.len() == 1 {
        return (z - points[0]).norm();
    }
    let mut best = points.windows(2).map(|w| segment_distance(w[0], w[1], z)).fold(f64::INFINITY, f64::min);
    if closed {
        best = best.min(segment_distance(points[points.len() - 1], points[0], z));
    }
    best
}

pub fn ellipse_axes(rho: f64) -> (f64, f64) {
    ((rho + 1.0 / rho) / 2.0, (rho - 1.0 / rho) / 2.0)
}

/// `(c + 1/c) / 2` for `c = rho e^{2 pi i k / n}`, `k = 1..n`.
pub fn bernstein_ellipse(rho: f64, n: usize) -> Result<Vec<Complex64>> {
    check(rho > 1.0 && rho.is_finite(), || format!("ellipse parameter must exceed 1, got {rho}"))?;
    check(n >= 3, || format!("ellipse needs at least 3 points, got {n}"))?;
    Ok((1..=n)
        .map(|k| {
            let cc = Complex64::from_polar(rho, 2.0 * PI * k as f64 / n as f64);
            (cc + 1.0 / cc) / 2.0
        })
        .collect())
}

/// `center + radius e^{2 pi i k / n}`, `k = 1..n`.
pub fn circle(center: Complex64, radius: f64, n: usize) -> Result<Vec<Complex64>> {
    check(radius > 0.0 && radius.is_finite(), || format!("radius must be positive, got {radius}"))?;
    check(n >= 3, || format!("circle needs at least 3 points, got {n}"))?;
    Ok((1..=n).map(|k| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect())
}

/// `n` points from `a` to `b` inclusive.
pub fn segment(a: Complex64, b: Complex64, n: usize, spacing: Spacing) -> Result<Vec<Complex64>> {
    check(n >= 2, || format!("segment needs at least 2 points, got {n}"))?;
    check(a != b, || "segment endpoints coincide".into())?;
    let m = (n - 1) as f64;
    let pts = match spacing {
        Spacing::Uniform => linspace(0.0, 1.0, n).into_iter().map(|t| a + (b - a) * t).collect(),
        Spacing::Log => {
            let ratio = b / a;
            check(a != Complex64::default() && ratio.im.abs() <= 1e-14 * ratio.norm() && ratio.re > 0.0, || {
                "log spacing needs both endpoints on one ray from the origin".into()
            })?;
            let (la, lb) = (a.norm().log10(), b.norm().log10());
            let dir = a / a.norm();
            logspace(la, lb, n).into_iter().map(|r| dir * r).collect()
        }
        Spacing::TanGraded => {
            let half = m / 2.0;
            let top = (PI * half / (m + 2.0)).tan();
            let mid = (a + b) / 2.0;
            let h = (b - a) / 2.0;
            (0..n).map(|j| mid + h * ((PI * (j as f64 - half) / (m + 2.0)).tan() / top)).collect()
        }
        Spacing::Chebyshev => (0..n).map(|j| a + (b - a) * ((1.0 - (PI * j as f64 / m).cos()) / 2.0)).collect(),
    };
    Ok(pts)
}

/// MATLAB-style `linspace` (endpoints exact).
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![b];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| {
            if k == n - 1 {
                b
            } else {
                a + (b - a) * (k as f64 / m)
            }
        })
        .collect()
}

/// `10^t` for `t = linspace(a, b, n)`.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a, b, n).into_iter().map(|t| 10f64.powf(t)).collect()
}

/// Log-spaced points on a ray, nearest first.
pub fn ray(origin: Complex64, direction: Complex64, r_min: f64, r_max: f64, n: usize) -> Result<Vec<Complex64>> {
    check(direction.norm() > 0.0, || "ray direction must be nonzero".into())?;
    check(r_min > 0.0 && r_max > r_min, || format!("need 0 < r_min < r_max, got {r_min}, {r_max}"))?;
    check(n >= 2, || format!("ray needs at least 2 points, got {n}"))?;
    let d = direction / direction.norm();
    Ok(logspace(r_min.log10(), r_max.log10(), n).into_iter().map(|r| origin + d * r).collect())
}

/// Boundary of the `eps`-neighborhood of `[-1, 1]`: bottom side, right cap,
/// then the negation of both, counterclockwise.
pub fn stadium(eps: f64, n_side: usize, n_cap: usize) -> Result<Vec<Complex64>> {
    check(eps > 0.0 && eps.is_finite(), || format!("eps must be positive, got {eps}"))?;
    check(n_side >= 2 && n_cap >= 1, || "stadium needs n_side >= 2 and n_cap >= 1".into())?;
    let mut half: Vec<Complex64> = linspace(-1.0, 1.0, n_side).into_iter().map(|x| c(x, -eps)).collect();
    let centre = (n_cap as f64 - 1.0) / 2.0;
    for j in 0..n_cap {
        let theta = PI * (j as f64 - centre) / (n_cap as f64 + 1.0);
        half.push(c(1.0, 0.0) + Complex64::from_polar(eps, theta));
    }
    let neg: Vec<Complex64> = half.iter().map(|z| -z).collect();
    half.extend(neg);
    Ok(half)
}

/// Bernstein ellipse with a two-sided vertical incision from the boundary to
/// each tip. Slit points are Chebyshev-clustered toward both ends; the sides
/// are displaced by `SLIT_OFFSET` along the ellipse tangent at the base.
pub fn slit_ellipse(rho: f64, tips: &[Complex64], n: usize, n_slit: usize) -> Result<Vec<Complex64>> {
    let ellipse = bernstein_ellipse(rho, n)?;
    if tips.is_empty() {
        return Ok(ellipse);
    }
    check(n_slit >= 3, || format!("slits need at least 3 points, got {n_slit}"))?;
    let (a, b) = ellipse_axes(rho);
    let mut slits: Vec<(f64, Vec<Complex64>)> = Vec::new();
    for &tip in tips {
        if !tip.is_finite() || (tip.re / a).powi(2) + (tip.im / b).powi(2) >= 1.0 {
            return Err(GeometryError::TipOutside { tip });
        }
        let phi0 = (tip.re / a).acos();
        let phi = if tip.im >= 0.0 { phi0 } else { 2.0 * PI - phi0 };
        let base = c(a * phi.cos(), b * phi.sin());
        let tangent = c(-a * phi.sin(), b * phi.cos());
        let tau = tangent / tangent.norm();
        let s = segment(base, tip, n_slit, Spacing::Chebyshev)?;
        let mut path = Vec::with_capacity(2 * n_slit - 1);
        for z in &s[..n_slit - 1] {
            path.push(z - tau * SLIT_OFFSET);
        }
        path.push(tip);
        for z in s[..n_slit - 1].iter().rev() {
            path.push(z + tau * SLIT_OFFSET);
        }
        slits.push((phi, path));
    }
    slits.sort_by(|x, y| x.0.total_cmp(&y.0));
    // Ellipse point k sits at angle 2 pi k / n; k = n is angle 0.
    let angle = |k: usize| if k == n { 0.0 } else { 2.0 * PI * k as f64 / n as f64 };
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&x, &y| angle(x).total_cmp(&angle(y)));
    let mut out = Vec::with_capacity(n + slits.len() * 2 * n_slit);
    let mut si = 0;
    for k in order {
        while si < slits.len() && slits[si].0 < angle(k) {
            out.extend_from_slice(&slits[si].1);
            si += 1;
        }
        out.push(ellipse[k - 1]);
    }
    for s in &slits[si..] {
        out.extend_from_slice(&s.1);
    }
    Ok(out)
}

/// Counterclockwise rectangle boundary starting at the lower-left corner,
/// `n_side` points per side.
pub fn rectangle(lower_left: Complex64, upper_right: Complex64, n_side: usize) -> Result<Vec<Complex64>> {
    check(upper_right.re > lower_left.re && upper_right.im > lower_left.im, || "rectangle corners must be lower-left then upper-right".into())?;
    check(n_side >= 1, || "rectangle needs at least one point per side".into())?;
    let lr = c(upper_right.re, lower_left.im);
    let ul = c(lower_left.re, upper_right.im);
    let mut out = Vec::with_capacity(4 * n_side);
    for (p, q) in [(lower_left, lr), (lr, upper_right), (upper_right, ul), (ul, lower_left)] {
        for j in 0..n_side {
            out.push(p + (q - p) * (j as f64 / n_side as f64));
        }
    }
    Ok(out)
}

/// `-10^t` for `t` uniform in `[log10 r_min, log10 r_max]`.
pub fn hankel_domain(n: usize, r_min: f64, r_max: f64) -> Result<Vec<Complex64>> {
    ray(Complex64::default(), c(-1.0, 0.0), r_min, r_max, n)
}

/// Two rays at angles `pi -/+ theta`, traversed from far on the upper ray,
/// through the neighborhood of the origin, out along the lower ray.
pub fn sector_domain(n: usize, r_min: f64, r_max: f64, theta: f64) -> Result<Vec<Complex64>> {
    check(theta > 0.0 && theta < PI / 2.0, || format!("sector angle must lie in (0, pi/2), got {theta}"))?;
    let z = hankel_domain(n, r_min, r_max)?;
    let down = Complex64::from_polar(1.0, -theta);
    let up = Complex64::from_polar(1.0, theta);
    let mut out: Vec<Complex64> = z.iter().rev().map(|p| p * down).collect();
    out.extend(z.iter().map(|p| p * up));
    Ok(out)
}

/// Outer circle (exterior label) followed by inner circle (interior label).
pub fn annulus_pair(r_inner: f64, r_outer: f64, n: usize) -> Result<Discretization> {
    check(r_inner > 0.0 && r_inner < r_outer, || format!("need 0 < r_inner < r_outer, got {r_inner}, {r_outer}"))?;
    let mut d = Discretization::default();
    d.push(circle(Complex64::default(), r_outer, n)?, Label::Exterior, true);
    d.push(circle(Complex64::default(), r_inner, n)?, Label::Interior, true);
    Ok(d)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentMode {
    /// Uniform points across `[-1, 1]`.
    #[default]
    Corrected,
    /// The degenerate single point `1`.
    Faithful,
}

/// Lines `Im z = +-1` with abscissae `tan(pi j / (n + 1))` (exterior) and the
/// segment `[-1, 1]` (interior).
pub fn strip_minus_segment(n_long: usize, n_segment: usize, mode: SegmentMode) -> Result<Discretization> {
    check(n_long >= 2 && n_segment >= 2, || "strip needs at least 2 points per piece".into())?;
    let centre = (n_long as f64 - 1.0) / 2.0;
    let long: Vec<f64> = (0..n_long).map(|j| (PI * (j as f64 - centre) / (n_long as f64 + 1.0)).tan()).collect();
    let mut d = Discretization::default();
    d.push(long.iter().map(|&x| c(x, 1.0)).collect(), Label::Exterior, false);
    d.push(long.iter().map(|&x| c(x, -1.0)).collect(), Label::Exterior, false);
    let seg = match mode {
        SegmentMode::Corrected => linspace(-1.0, 1.0, n_segment).into_iter().map(|x| c(x, 0.0)).collect(),
        SegmentMode::Faithful => vec![c(1.0, 0.0)],
    };
    d.push(seg, Label::Interior, false);
    Ok(d)
}

/// Graded points `1 - 1/t`, `t = linspace(t_min, 1, n)`, on `(-inf, 0]`.
pub fn graded_cut(n: usize, t_min: f64) -> Result<Vec<Complex64>> {
    check(t_min > 0.0 && t_min < 1.0, || format!("t_min must lie in (0, 1), got {t_min}"))?;
    check(n >= 2, || "cut needs at least 2 points".into())?;
    Ok(linspace(t_min, 1.0, n).into_iter().map(|t| c(1.0 - 1.0 / t, 0.0)).collect())
}

/// Graded negative real cut (exterior) then log-spaced `[m, M]` (interior).
pub fn interval_plus_cut(n_segment: usize, n_negreal: usize, m: f64, big_m: f64) -> Result<Discretization> {
    check(m > 0.0 && big_m > m, || format!("need 0 < m < M, got {m}, {big_m}"))?;
    let mut d = Discretization::default();
    d.push(graded_cut(n_negreal, 0.005)?, Label::Exterior, false);
    d.push(logspace(m.log10(), big_m.log10(), n_segment).into_iter().map(|x| c(x, 0.0)).collect(), Label::Interior, false);
    Ok(d)
}

/// Rectangle boundary (interior) plus the graded cut `(-inf, 0]` (exterior).
pub fn rectangle_exterior(lower_left: Complex64, upper_right: Complex64, n_side: usize, n_cut: usize) -> Result<Discretization> {
    check(lower_left.re > 0.0, || "rectangle must lie in the right half-plane".into())?;
    let mut d = Discretization::default();
    d.push(graded_cut(n_cut, 0.005)?, Label::Exterior, false);
    d.push(rectangle(lower_left, upper_right, n_side)?, Label::Interior, true);
    Ok(d)
}

/// Two mirror-image yin-yang halves, `n` points per arc (three arcs each).
/// The first (yin, shifted left) is labeled interior, the second exterior.
pub fn yin_yang(n: usize) -> Result<Discretization> {
    check(n >= 2, || "yin-yang needs at least 2 points per arc".into())?;
    let i = Complex64::i();
    let cs: Vec<Complex64> = (1..=n).map(|k| Complex64::from_polar(1.0, PI * k as f64 / n as f64) / i).collect();
    let mut yin: Vec<Complex64> = cs.iter().map(|z| -z).collect();
    yin.extend(cs.iter().map(|z| (i * z).conj() / (2.0 * i) - 0.5 * i));
    yin.extend(cs.iter().map(|z| z / 2.0 + 0.5 * i));
    for z in &mut yin {
        *z -= 0.5;
    }
    let yang: Vec<Complex64> = yin.iter().map(|z| -z).collect();
    let mut d = Discretization::default();
    d.push(yin, Label::Interior, true);
    d.push(yang, Label::Exterior, true);
    Ok(d)
}
