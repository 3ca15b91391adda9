//! Globally adaptive Gauss–Kronrod (7, 15) integration of complex functions
//! along parameterized arcs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

/// Kronrod abscissae on [-1, 1] (nonnegative half, descending). Odd indices are
/// the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 50;
const MAX_EVALS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("tolerances must be nonnegative with at least one positive (abs {abs_tol:e}, rel {rel_tol:e})")]
    InvalidTolerance { abs_tol: f64, rel_tol: f64 },
    #[error("adaptive quadrature did not converge after {evals} evaluations (estimate {best}, error {error:e})")]
    NonConvergence { best: Complex64, error: f64, evals: usize },
    #[error("integrand is not finite at t = {t} (z = {z})")]
    NotFinite { t: f64, z: Complex64 },
    #[error("empty path")]
    EmptyPath,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadTolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl QuadTolerance {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self, QuadError> {
        let ok = abs_tol >= 0.0 && rel_tol >= 0.0 && (abs_tol > 0.0 || rel_tol > 0.0);
        if !ok {
            return Err(QuadError::InvalidTolerance { abs_tol, rel_tol });
        }
        Ok(Self { abs_tol, rel_tol })
    }

    pub fn uniform(tol: f64) -> Result<Self, QuadError> {
        Self::new(tol, tol)
    }

    fn target(&self, value: Complex64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.norm())
    }
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-13 }
    }
}

pub type PathFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A smooth arc `t -> z(t)`, `t in [0, 1]`, with its derivative.
#[derive(Clone)]
pub struct ArcSegment {
    point: PathFn,
    tangent: PathFn,
    singular_ends: (bool, bool),
}

impl std::fmt::Debug for ArcSegment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ArcSegment")
            .field("start", &self.point(0.0))
            .field("end", &self.point(1.0))
            .field("singular_ends", &self.singular_ends)
            .finish()
    }
}

impl ArcSegment {
    pub fn new(point: PathFn, tangent: PathFn) -> Self {
        Self { point, tangent, singular_ends: (false, false) }
    }

    pub fn line(a: Complex64, b: Complex64) -> Self {
        let d = b - a;
        Self::new(Arc::new(move |t| a + d * t), Arc::new(move |_| d))
    }

    /// Circular arc from angle `theta0` to `theta1` (radians).
    pub fn circular(center: Complex64, radius: f64, theta0: f64, theta1: f64) -> Self {
        let span = theta1 - theta0;
        Self::new(
            Arc::new(move |t| center + Complex64::from_polar(radius, theta0 + span * t)),
            Arc::new(move |t| Complex64::i() * span * Complex64::from_polar(radius, theta0 + span * t)),
        )
    }

    /// Marks endpoints where the integrand has an integrable singularity.
    pub fn with_singular_ends(mut self, start: bool, end: bool) -> Self {
        self.singular_ends = (start, end);
        self
    }

    pub fn singular_ends(&self) -> (bool, bool) {
        self.singular_ends
    }

    pub fn point(&self, t: f64) -> Complex64 {
        (self.point)(t)
    }

    pub fn tangent(&self, t: f64) -> Complex64 {
        (self.tangent)(t)
    }

    /// Largest relative mismatch between the tangent and a central difference
    /// of the parameterization at a few interior parameters.
    pub fn tangent_mismatch(&self) -> f64 {
        let h = 1e-6;
        [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .map(|&t| {
                let fd = (self.point(t + h) - self.point(t - h)) / (2.0 * h);
                let d = self.tangent(t);
                (fd - d).norm() / d.norm().max(1e-300)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evals: usize,
}

struct Interval {
    a: f64,
    b: f64,
    depth: u32,
    value: Complex64,
    error: f64,
    roundoff: f64,
}

struct HeapEntry {
    error: f64,
    index: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Larger error first; lower index breaks ties.
        self.error.total_cmp(&other.error).then(other.index.cmp(&self.index))
    }
}

/// Graded reparameterization `t = u^2 (3 - 2u)`, which flattens both ends.
/// Returns `(t, 1 - t, dt/du)` with the complement formed without
/// cancellation.
fn graded(u: f64) -> (f64, f64, f64) {
    let v = 1.0 - u;
    (u * u * (3.0 - 2.0 * u), v * v * (1.0 + 2.0 * u), 6.0 * u * v)
}

fn kronrod<G>(g: &G, a: f64, b: f64) -> Result<(Complex64, f64, f64), QuadError>
where
    G: Fn(f64) -> Result<Complex64, QuadError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut fv = [(Complex64::default(), Complex64::default()); 7];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = g(center - dx)?;
        let f2 = g(center + dx)?;
        res_k += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            res_g += (f1 + f2) * WG[j / 2];
        }
        *slot = (f1, f2);
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).norm() + (f2 - mean).norm());
    }
    let habs = half.abs();
    let value = res_k * half;
    res_abs *= habs;
    res_asc *= habs;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(roundoff);
    }
    Ok((value, err, roundoff))
}

/// Integrates `f(z) dz` along `arc` with a global adaptive strategy that
/// always bisects the interval with the largest error estimate.
pub fn integrate<F>(f: F, arc: &ArcSegment, tol: QuadTolerance) -> Result<Integral, QuadError>
where
    F: Fn(Complex64) -> Complex64,
{
    let grade = arc.singular_ends.0 || arc.singular_ends.1;
    adaptive(
        |u: f64| {
            let (t, _, dt) = if grade { graded(u) } else { (u, 1.0 - u, 1.0) };
            let z = arc.point(t);
            let v = f(z) * arc.tangent(t) * dt;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(QuadError::NotFinite { t, z })
            }
        },
        tol,
    )
}

/// Integrates `f(t, 1 - t)` over `t in [0, 1]`. Passing the complement
/// separately keeps endpoint distances accurate under the graded
/// substitution, which matters for weights such as `(1 - x)^(-1/2)`.
pub fn integrate_param<F>(f: F, singular_ends: (bool, bool), tol: QuadTolerance) -> Result<Integral, QuadError>
where
    F: Fn(f64, f64) -> Complex64,
{
    let grade = singular_ends.0 || singular_ends.1;
    adaptive(
        |u: f64| {
            let (t, tc, dt) = if grade { graded(u) } else { (u, 1.0 - u, 1.0) };
            let v = f(t, tc) * dt;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(QuadError::NotFinite { t, z: Complex64::new(t, 0.0) })
            }
        },
        tol,
    )
}

fn adaptive<G>(g: G, tol: QuadTolerance) -> Result<Integral, QuadError>
where
    G: Fn(f64) -> Result<Complex64, QuadError>,
{
    QuadTolerance::new(tol.abs_tol, tol.rel_tol)?;

    let mut evals = 15;
    let (v0, e0, r0) = kronrod(&g, 0.0, 1.0)?;
    let mut intervals = vec![Interval { a: 0.0, b: 1.0, depth: 0, value: v0, error: e0, roundoff: r0 }];
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry { error: e0, index: 0 });
    let mut total = v0;
    let mut total_err = e0;
    let mut total_round = r0;
    loop {
        if total_err <= tol.target(total) || total_err <= 1.01 * total_round {
            // Re-sum from the leaves so the result does not carry update drift.
            let value = intervals.iter().filter(|iv| iv.b > iv.a).map(|iv| iv.value).sum();
            let error = intervals.iter().filter(|iv| iv.b > iv.a).map(|iv| iv.error).sum();
            return Ok(Integral { value, error, evals });
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let (a, b, depth, value, error, roundoff) = {
            let iv = &intervals[worst.index];
            (iv.a, iv.b, iv.depth, iv.value, iv.error, iv.roundoff)
        };
        if depth >= MAX_DEPTH || evals + 30 > MAX_EVALS {
            return Err(QuadError::NonConvergence { best: total, error: total_err, evals });
        }
        let mid = 0.5 * (a + b);
        let (vl, el, rl) = kronrod(&g, a, mid)?;
        let (vr, er, rr) = kronrod(&g, mid, b)?;
        evals += 30;
        total += vl + vr - value;
        total_err += el + er - error;
        total_round += rl + rr - roundoff;
        // Retire the parent in place and append the children.
        intervals[worst.index].b = intervals[worst.index].a;
        for (lo, hi, v, e, r) in [(a, mid, vl, el, rl), (mid, b, vr, er, rr)] {
            let index = intervals.len();
            intervals.push(Interval { a: lo, b: hi, depth: depth + 1, value: v, error: e, roundoff: r });
            heap.push(HeapEntry { error: e, index });
        }
    }
    Err(QuadError::NonConvergence { best: total, error: total_err, evals })
}

/// Sum of [`integrate`] over consecutive arcs; error estimates add.
pub fn integrate_path<F>(f: F, segments: &[ArcSegment], tol: QuadTolerance) -> Result<Integral, QuadError>
where
    F: Fn(Complex64) -> Complex64,
{
    if segments.is_empty() {
        return Err(QuadError::EmptyPath);
    }
    let mut out = Integral { value: Complex64::default(), error: 0.0, evals: 0 };
    for seg in segments {
        let part = integrate(&f, seg, tol)?;
        out.value += part.value;
        out.error += part.error;
        out.evals += part.evals;
    }
    Ok(out)
}

/// Convenience wrapper for a straight segment from `a` to `b`.
pub fn integrate_segment<F>(f: F, a: Complex64, b: Complex64, tol: QuadTolerance) -> Result<Integral, QuadError>
where
    F: Fn(Complex64) -> Complex64,
{
    integrate(f, &ArcSegment::line(a, b), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn constant_on_unit_segment() {
        let r = integrate_segment(|_| re(1.0), re(0.0), re(1.0), QuadTolerance::default()).unwrap();
        assert!((r.value - 1.0).norm() < 1e-15);
        assert_eq!(r.evals, 15);
    }

    #[test]
    fn runge_type_integral() {
        // Closed form: 2 atan(sqrt(20)) / sqrt(20).
        let exact = 2.0 * 20f64.sqrt().atan() / 20f64.sqrt();
        let r = integrate_segment(|z| 1.0 / (1.0 + 20.0 * z * z), re(-1.0), re(1.0), QuadTolerance::default()).unwrap();
        assert!((r.value.re - exact).abs() < 1e-13);
        assert!((r.value.re - 0.604100).abs() < 5e-7);
    }

    #[test]
    fn gauss_kronrod_exact_for_degree_22() {
        for k in 0..=22u32 {
            let g = |u: f64| Ok::<_, QuadError>(re(u.powi(k as i32)));
            let (v, _, _) = kronrod(&g, -1.0, 1.0).unwrap();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((v.re - exact).abs() < 1e-12, "k = {k}: {} vs {exact}", v.re);
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(QuadTolerance::new(0.0, 0.0).is_err());
        assert!(QuadTolerance::new(-1.0, 1e-3).is_err());
    }

    #[test]
    fn nan_integrand_reports_location() {
        let err = integrate_segment(|z| if z.re > 0.5 { re(f64::NAN) } else { re(1.0) }, re(0.0), re(1.0), QuadTolerance::default())
            .unwrap_err();
        match err {
            QuadError::NotFinite { t, .. } => assert!(t > 0.5),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn non_integrable_singularity_fails() {
        let err = integrate_segment(|z| 1.0 / z, re(0.0), re(1.0), QuadTolerance::default()).unwrap_err();
        assert!(matches!(err, QuadError::NonConvergence { .. }));
    }

    #[test]
    fn endpoint_singularity_with_grading() {
        // Oracle: with z = cos(theta) the integrand (1+z)^{3/2}(1-z)^{-1/2} dz
        // becomes (1+cos)^{3/2}(1-cos)^{-1/2} sin dtheta = (1 + cos)^2 dtheta,
        // whose integral over [0, pi] is 3 pi / 2.
        let w = |z: Complex64| (1.0 + z).powf(1.5) / (1.0 - z).sqrt();
        let arc = ArcSegment::line(re(-1.0), re(1.0)).with_singular_ends(true, true);
        let r = integrate(w, &arc, QuadTolerance::default()).unwrap();
        assert!((r.value.re - 1.5 * PI).abs() < 1e-12, "{}", r.value);
        assert!(r.evals < MAX_EVALS);
    }

    #[test]
    fn path_additivity_and_residue() {
        let f = |z: Complex64| z.exp() * (3.0 * z).cos();
        let tol = QuadTolerance::default();
        let whole = integrate_segment(f, re(-1.0), re(1.0), tol).unwrap();
        let halves = integrate_path(f, &[ArcSegment::line(re(-1.0), re(0.0)), ArcSegment::line(re(0.0), re(1.0))], tol).unwrap();
        assert!((whole.value - halves.value).norm() < 1e-12);

        let quarters: Vec<ArcSegment> =
            (0..4).map(|k| ArcSegment::circular(Complex64::default(), 1.0, k as f64 * PI / 2.0, (k + 1) as f64 * PI / 2.0)).collect();
        let r = integrate_path(|z| 1.0 / z, &quarters, tol).unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-10);
        assert!(integrate_path(f, &[], tol).is_err());
    }

    #[test]
    fn tangent_check_for_builtin_arcs() {
        assert!(ArcSegment::line(re(0.0), Complex64::new(1.0, 2.0)).tangent_mismatch() < 1e-6);
        assert!(ArcSegment::circular(re(0.5), 2.0, 0.3, 2.0).tangent_mismatch() < 1e-6);
    }
}
