//! AAA rational approximation in barycentric form.
//!
//! The greedy loop adds the worst-approximated sample to the support set and
//! takes barycentric weights from the SVD of the Loewner matrix. On top of
//! that sit a blended-singular-vector weight choice for two-valued (sign
//! type) targets, AAA-Lawson refinement with a damped weight update, pole and
//! residue extraction, and removal of spurious pole/zero pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative residual at which the greedy loop stops even in degree mode.
pub const NOISE_TOL: f64 = 1e-13;
/// Degree cap when only a tolerance is given.
pub const DEFAULT_MAX_DEGREE: usize = 99;

#[derive(Debug, Error)]
pub enum AaaError {
    #[error("invalid sample set: {0}")]
    InvalidSamples(String),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("{points} samples cannot support degree {degree} (need at least {})", 2 * (degree + 1))]
    InsufficientSamples { points: usize, degree: usize },
    #[error("degree {degree} unreachable: sample points exhausted at degree {}", best.degree())]
    DegreeUnreachable { degree: usize, best: Box<BarycentricRational> },
    #[error("pole {pole} collides with a support point")]
    PoleCollision { pole: Complex64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, AaaError>;

/// Sample points `Z` with target values `F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    points: Vec<Complex64>,
    values: Vec<Complex64>,
    label: String,
}

impl SampleSet {
    pub fn new(points: Vec<Complex64>, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(AaaError::InvalidSamples(format!("{} points but {} values", points.len(), values.len())));
        }
        if points.len() < 2 {
            return Err(AaaError::InvalidSamples("need at least two samples".into()));
        }
        if let Some(i) = points.iter().zip(&values).position(|(z, f)| !z.is_finite() || !f.is_finite()) {
            return Err(AaaError::InvalidSamples(format!("sample {i} is not finite")));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].re.total_cmp(&points[b].re).then(points[a].im.total_cmp(&points[b].im)));
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(AaaError::InvalidSamples(format!("duplicate point {} at indices {} and {}", points[w[0]], w[0], w[1])));
            }
        }
        Ok(Self { points, values, label: label.into() })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().map(|f| f.norm()).fold(0.0, f64::max)
    }

    /// Conjugate-symmetric closure: real-axis points become exactly real with
    /// real values, every upper point is paired with its exact mirror image
    /// (value conjugated), and lower points without a partner are mirrored up.
    pub fn mirrored(&self) -> Self {
        let scale = self.points.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        let near = 1e-13 * scale;
        let mut out_z = Vec::with_capacity(self.points.len() + 8);
        let mut out_f = Vec::with_capacity(self.points.len() + 8);
        let uppers: Vec<usize> = (0..self.len()).filter(|&i| self.points[i].im > near).collect();
        for (i, (&z, &f)) in self.points.iter().zip(&self.values).enumerate() {
            if z.im.abs() <= near {
                out_z.push(Complex64::new(z.re, 0.0));
                out_f.push(Complex64::new(f.re, 0.0));
            } else if z.im > near {
                out_z.push(z);
                out_f.push(f);
                out_z.push(z.conj());
                out_f.push(f.conj());
            } else {
                let partnered = uppers.iter().any(|&u| (self.points[u] - z.conj()).norm() <= near);
                if !partnered {
                    out_z.push(z.conj());
                    out_f.push(f.conj());
                    out_z.push(z);
                    out_f.push(f);
                }
                let _ = i;
            }
        }
        Self { points: out_z, values: out_f, label: format!("{} (mirrored)", self.label) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AaaOptions {
    pub degree: Option<usize>,
    /// Relative to `max |F|`.
    pub tol: Option<f64>,
    pub sign_blend: bool,
    pub lawson_steps: usize,
    pub damping: f64,
    pub cleanup_tol: f64,
    pub enforce_real_symmetry: bool,
}

impl Default for AaaOptions {
    fn default() -> Self {
        Self {
            degree: None,
            tol: Some(NOISE_TOL),
            sign_blend: false,
            lawson_steps: 0,
            damping: 1.0,
            cleanup_tol: 1e-13,
            enforce_real_symmetry: false,
        }
    }
}

impl AaaOptions {
    pub fn with_degree(degree: usize) -> Self {
        Self { degree: Some(degree), tol: None, ..Self::default() }
    }

    pub fn with_tol(tol: f64) -> Self {
        Self { tol: Some(tol), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree.is_none() && self.tol.is_none() {
            return Err(AaaError::InvalidOptions("either degree or tol must be set".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(AaaError::InvalidOptions(format!("tol must be positive, got {t}")));
            }
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(AaaError::InvalidOptions(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.cleanup_tol > 0.0) {
            return Err(AaaError::InvalidOptions(format!("cleanup_tol must be positive, got {}", self.cleanup_tol)));
        }
        Ok(())
    }
}

/// `r(z) = sum_j a_j / (z - z_j) / sum_j w_j / (z - z_j)`.
///
/// For an interpolatory fit `a_j = w_j f_j`; after Lawson refinement the
/// numerator coefficients are free and `f_j = a_j / w_j` is the limit value at
/// the support point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarycentricRational {
    support_points: Vec<Complex64>,
    support_values: Vec<Complex64>,
    weights: Vec<Complex64>,
    numerator_weights: Vec<Complex64>,
}

impl BarycentricRational {
    /// Interpolatory form; weights are normalized to unit 2-norm.
    pub fn new(support_points: Vec<Complex64>, support_values: Vec<Complex64>, weights: Vec<Complex64>) -> Result<Self> {
        if support_points.is_empty() || support_points.len() != support_values.len() || support_points.len() != weights.len() {
            return Err(AaaError::InvalidSamples("support points, values and weights must be nonempty and of equal length".into()));
        }
        let nrm = linalg::vec_norm(&weights);
        if nrm == 0.0 {
            return Err(AaaError::InvalidSamples("all barycentric weights are zero".into()));
        }
        let weights: Vec<Complex64> = weights.iter().map(|w| w / nrm).collect();
        let numerator_weights = weights.iter().zip(&support_values).map(|(w, f)| w * f).collect();
        Ok(Self { support_points, support_values, weights, numerator_weights })
    }

    fn from_coefficients(support_points: Vec<Complex64>, numerator: Vec<Complex64>, denominator: Vec<Complex64>) -> Self {
        let nrm = linalg::vec_norm(&denominator).max(1e-300);
        let weights: Vec<Complex64> = denominator.iter().map(|w| w / nrm).collect();
        let numerator_weights: Vec<Complex64> = numerator.iter().map(|a| a / nrm).collect();
        let support_values = numerator_weights.iter().zip(&weights).map(|(a, w)| a / w).collect();
        Self { support_points, support_values, weights, numerator_weights }
    }

    pub fn support_points(&self) -> &[Complex64] {
        &self.support_points
    }

    pub fn support_values(&self) -> &[Complex64] {
        &self.support_values
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn numerator_weights(&self) -> &[Complex64] {
        &self.numerator_weights
    }

    pub fn degree(&self) -> usize {
        self.support_points.len() - 1
    }

    /// Value at infinity.
    pub fn constant(&self) -> Complex64 {
        let n: Complex64 = self.numerator_weights.iter().sum();
        let d: Complex64 = self.weights.iter().sum();
        n / d
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        evaluate(self, z)
    }

    fn denominator_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut d = ZERO;
        let mut dp = ZERO;
        for (&zj, &wj) in self.support_points.iter().zip(&self.weights) {
            let inv = 1.0 / (z - zj);
            d += wj * inv;
            dp -= wj * inv * inv;
        }
        (d, dp)
    }

    fn numerator(&self, z: Complex64) -> Complex64 {
        self.support_points.iter().zip(&self.numerator_weights).map(|(&zj, &aj)| aj / (z - zj)).sum()
    }
}

/// Barycentric evaluation. Returns the stored value at support points, the
/// constant term at infinity and an infinite value at exact poles.
pub fn evaluate(r: &BarycentricRational, z: Complex64) -> Complex64 {
    if z.re.is_infinite() || z.im.is_infinite() {
        return r.constant();
    }
    let mut n = ZERO;
    let mut d = ZERO;
    for (j, &zj) in r.support_points.iter().enumerate() {
        if z == zj {
            return r.support_values[j];
        }
        let inv = 1.0 / (z - zj);
        n += r.numerator_weights[j] * inv;
        d += r.weights[j] * inv;
    }
    if d == ZERO {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    n / d
}

/// Largest `|F_i - r(Z_i)|` over the samples.
pub fn max_residual(r: &BarycentricRational, samples: &SampleSet) -> f64 {
    samples.points.iter().zip(&samples.values).map(|(&z, &f)| (f - evaluate(r, z)).norm()).fold(0.0, f64::max)
}

/// Pole–residue form `r(s) = C + sum_k c_k / (s - z_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleResidueForm {
    pub constant: Complex64,
    pub poles: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub zeros: Vec<Complex64>,
}

impl PoleResidueForm {
    pub fn degree(&self) -> usize {
        self.poles.len()
    }

    pub fn evaluate(&self, s: Complex64) -> Complex64 {
        self.constant + self.poles.iter().zip(&self.residues).map(|(p, c)| c / (s - p)).sum::<Complex64>()
    }

    /// Pairs poles by conjugation and replaces each pair by its average, so
    /// that nodes and residues come in exact conjugate pairs; unpaired poles
    /// become exactly real. Pairs are stored adjacent (upper first), real
    /// poles last.
    pub fn symmetrized(&self) -> Self {
        let (poles, residues) = symmetrize_pairs(&self.poles, Some(&self.residues));
        let (zeros, _) = symmetrize_pairs(&self.zeros, None);
        Self { constant: Complex64::new(self.constant.re, 0.0), poles, residues: residues.unwrap_or_default(), zeros }
    }
}

fn symmetrize_pairs(points: &[Complex64], values: Option<&[Complex64]>) -> (Vec<Complex64>, Option<Vec<Complex64>>) {
    let n = points.len();
    let mut used = vec![false; n];
    let mut pairs: Vec<(Complex64, Complex64)> = Vec::new();
    let mut reals: Vec<(Complex64, Complex64)> = Vec::new();
    let val = |k: usize| values.map_or(ZERO, |v| v[k]);
    for i in 0..n {
        if used[i] {
            continue;
        }
        let target = points[i].conj();
        let mut best = i;
        let mut best_d = (points[i] - target).norm();
        for j in 0..n {
            if used[j] || j == i {
                continue;
            }
            let d = (points[j] - target).norm();
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        used[i] = true;
        if best == i {
            reals.push((Complex64::new(points[i].re, 0.0), Complex64::new(val(i).re, 0.0)));
            continue;
        }
        used[best] = true;
        let (up, lo) = if points[i].im >= points[best].im { (i, best) } else { (best, i) };
        let p = (points[up] + points[lo].conj()) * 0.5;
        let c = (val(up) + val(lo).conj()) * 0.5;
        pairs.push((p, c));
    }
    pairs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    reals.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
    let mut pts = Vec::with_capacity(n);
    let mut vals = Vec::with_capacity(n);
    for (p, c) in pairs {
        pts.push(p);
        vals.push(c);
        pts.push(p.conj());
        vals.push(c.conj());
    }
    for (p, c) in reals {
        pts.push(p);
        vals.push(c);
    }
    (pts, values.map(|_| vals))
}

/// Everything produced by [`aaa_fit`].
#[derive(Clone, Debug)]
pub struct AaaFit {
    pub rational: BarycentricRational,
    pub poles: PoleResidueForm,
    /// Samples actually fitted (mirrored when real symmetry is enforced).
    pub samples: SampleSet,
    /// Max residual over the fitted samples.
    pub max_error: f64,
    /// Max residual after each greedy step.
    pub history: Vec<f64>,
    pub lawson: Option<LawsonReport>,
    pub cleanup: CleanupReport,
}

impl AaaFit {
    pub fn degree(&self) -> usize {
        self.poles.degree()
    }
}

/// Full AAA pipeline: greedy fit, optional Lawson refinement, pole/residue
/// extraction and doublet cleanup.
pub fn aaa_fit(samples: &SampleSet, opts: &AaaOptions) -> Result<AaaFit> {
    opts.validate()?;
    let samples = if opts.enforce_real_symmetry { samples.mirrored() } else { samples.clone() };
    let (mut rational, history) = aaa_greedy(&samples, opts)?;
    let mut lawson = None;
    if opts.lawson_steps > 0 && rational.degree() > 0 {
        let refined = lawson_refine(&rational, &samples, opts.lawson_steps, opts.damping, opts.sign_blend)?;
        rational = refined.rational;
        lawson = Some(refined.report);
    }
    let pr = poles_residues(&rational)?;
    let cleaned = cleanup(&pr, &rational, &samples, opts.cleanup_tol, opts.sign_blend)?;
    let rational = cleaned.rational;
    let mut poles = cleaned.poles;
    fit_residues(&mut poles, &samples)?;
    if opts.enforce_real_symmetry {
        poles = poles.symmetrized();
    }
    let max_error = max_residual(&rational, &samples);
    Ok(AaaFit { rational, poles, samples, max_error, history, lawson, cleanup: cleaned.report })
}

/// Greedy AAA iteration only (no Lawson, no cleanup).
pub fn aaa_greedy(samples: &SampleSet, opts: &AaaOptions) -> Result<(BarycentricRational, Vec<f64>)> {
    opts.validate()?;
    let z = &samples.points;
    let f = &samples.values;
    let m = z.len();
    if let Some(d) = opts.degree {
        if m < 2 * (d + 1) {
            return Err(AaaError::InsufficientSamples { points: m, degree: d });
        }
    }
    let fmax = samples.max_abs_value();
    let stop = opts.tol.unwrap_or(NOISE_TOL).max(NOISE_TOL) * fmax;
    let max_support = match opts.degree {
        Some(d) => d + 1,
        None => (DEFAULT_MAX_DEGREE + 1).min(m / 2),
    };
    if f.iter().all(|v| *v == f[0]) {
        let r = BarycentricRational::new(vec![z[0]], vec![f[0]], vec![Complex64::new(1.0, 0.0)])?;
        return Ok((r, vec![0.0]));
    }

    let mean: Complex64 = f.iter().sum::<Complex64>() / m as f64;
    let mut approx = vec![mean; m];
    let mut is_support = vec![false; m];
    let mut support: Vec<usize> = Vec::new();
    let mut cauchy: Vec<Vec<Complex64>> = Vec::new();
    let mut history = Vec::new();
    let mut iterates: Vec<(f64, BarycentricRational)> = Vec::new();

    loop {
        let mut pick = None;
        let mut worst = -1.0;
        for i in 0..m {
            if is_support[i] {
                continue;
            }
            let e = (f[i] - approx[i]).norm();
            if e > worst || (e.is_nan() && pick.is_none()) {
                worst = e;
                pick = Some(i);
            }
        }
        let Some(j) = pick else {
            let best = iterates.pop().map(|(_, r)| r).ok_or_else(|| AaaError::InvalidSamples("no support points".into()))?;
            return Err(AaaError::DegreeUnreachable { degree: opts.degree.unwrap_or(0), best: Box::new(best) });
        };
        is_support[j] = true;
        support.push(j);
        let zj = z[j];
        cauchy.push((0..m).map(|i| if i == j { ZERO } else { 1.0 / (z[i] - zj) }).collect());

        let rows: Vec<usize> = (0..m).filter(|&i| !is_support[i]).collect();
        let ns = support.len();
        if rows.is_empty() {
            let best = iterates.pop().map(|(_, r)| r);
            return match best {
                Some(b) => Err(AaaError::DegreeUnreachable { degree: opts.degree.unwrap_or(ns - 1), best: Box::new(b) }),
                None => Err(AaaError::InvalidSamples("sample set exhausted".into())),
            };
        }
        let loewner = ComplexMatrix::from_fn(rows.len(), ns, |r, c| (f[rows[r]] - f[support[c]]) * cauchy[c][rows[r]]);
        let w = choose_weights(&loewner, opts.sign_blend)?;
        let fs: Vec<Complex64> = support.iter().map(|&k| f[k]).collect();
        let mut err = 0.0f64;
        for &i in &rows {
            let mut n = ZERO;
            let mut d = ZERO;
            for c in 0..ns {
                n += w[c] * fs[c] * cauchy[c][i];
                d += w[c] * cauchy[c][i];
            }
            approx[i] = n / d;
            let e = (f[i] - approx[i]).norm();
            err = if e.is_nan() { f64::INFINITY } else { err.max(e) };
        }
        for &k in &support {
            approx[k] = f[k];
        }
        history.push(err);
        let r = BarycentricRational::new(support.iter().map(|&k| z[k]).collect(), fs, w)?;
        if err <= stop || ns >= max_support {
            if err > stop && opts.degree.is_none() {
                // Tolerance never met: hand back the best iterate seen.
                iterates.push((err, r));
                let best = iterates
                    .into_iter()
                    .enumerate()
                    .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
                    .map(|(_, it)| it.1)
                    .expect("nonempty");
                return Ok((best, history));
            }
            return Ok((r, history));
        }
        iterates.push((err, r));
    }
}

/// Barycentric weight vector from the Loewner matrix: the smallest right
/// singular vector, or with `blend` a combination of all right singular
/// vectors weighted by `exp(-(s_j - s_min) / (s_min + delta))`.
pub fn choose_weights(loewner: &ComplexMatrix, blend: bool) -> Result<Vec<Complex64>> {
    let cols = loewner.cols();
    let padded;
    let a = if loewner.rows() < cols {
        let mut m = ComplexMatrix::zeros(cols, cols);
        for i in 0..loewner.rows() {
            for j in 0..cols {
                m[(i, j)] = loewner[(i, j)];
            }
        }
        padded = m;
        &padded
    } else {
        loewner
    };
    let dec = linalg::svd(a)?;
    let s = &dec.singular_values;
    let last = s.len() - 1;
    let mut w = if blend {
        let smin = s[last];
        let delta = 1e-30 * s[0];
        let mut acc = vec![ZERO; cols];
        for (j, &sj) in s.iter().enumerate() {
            let beta = if smin + delta > 0.0 {
                (-(sj - smin) / (smin + delta)).exp()
            } else if sj == smin {
                1.0
            } else {
                0.0
            };
            if beta == 0.0 {
                continue;
            }
            for (a, v) in acc.iter_mut().zip(dec.right_vector(j)) {
                *a += v * beta;
            }
        }
        acc
    } else {
        dec.right_vector(last)
    };
    normalize_phase(&mut w);
    Ok(w)
}

/// Unit 2-norm with the largest entry real and positive.
fn normalize_phase(w: &mut [Complex64]) {
    let nrm = linalg::vec_norm(w);
    if nrm == 0.0 {
        if let Some(first) = w.first_mut() {
            *first = Complex64::new(1.0, 0.0);
        }
        return;
    }
    let mut k = 0;
    for (i, x) in w.iter().enumerate() {
        if x.norm() > w[k].norm() {
            k = i;
        }
    }
    let phase = w[k].conj() / w[k].norm();
    for x in w.iter_mut() {
        *x = *x * phase / nrm;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawsonReport {
    pub steps_taken: usize,
    pub initial_error: f64,
    pub best_error: f64,
    /// Set when the weighted problem became rank deficient and iteration
    /// stopped early.
    pub rank_deficient: bool,
}

#[derive(Clone, Debug)]
pub struct LawsonOutcome {
    pub rational: BarycentricRational,
    pub report: LawsonReport,
}

/// Damped Lawson update `lambda_i <- lambda_i |e_i|^damping`, renormalized
/// to sum 1. Returns `false` when every weighted error vanished.
pub fn lawson_update(lambda: &mut [f64], errors: &[f64], damping: f64) -> bool {
    for (l, e) in lambda.iter_mut().zip(errors) {
        *l *= e.powf(damping);
    }
    let s: f64 = lambda.iter().sum();
    if !(s > 0.0) || !s.is_finite() {
        return false;
    }
    for l in lambda.iter_mut() {
        *l /= s;
    }
    true
}

/// AAA-Lawson: iteratively reweighted linearized least squares for the
/// numerator and denominator coefficients at fixed support points. Returns
/// the iterate with the smallest max residual (possibly the input).
pub fn lawson_refine(
    r: &BarycentricRational,
    samples: &SampleSet,
    steps: usize,
    damping: f64,
    sign_blend: bool,
) -> Result<LawsonOutcome> {
    let initial_error = max_residual(r, samples);
    let mut report = LawsonReport { steps_taken: 0, initial_error, best_error: initial_error, rank_deficient: false };
    let mut best = r.clone();
    if steps == 0 {
        return Ok(LawsonOutcome { rational: best, report });
    }
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(AaaError::InvalidOptions(format!("damping must lie in (0, 1], got {damping}")));
    }
    let zs = &r.support_points;
    let n = zs.len();
    let rows: Vec<usize> = (0..samples.len()).filter(|&i| !zs.contains(&samples.points[i])).collect();
    if rows.len() < 2 * n {
        return Ok(LawsonOutcome { rational: best, report });
    }
    let cauchy: Vec<Vec<Complex64>> = rows.iter().map(|&i| zs.iter().map(|&zj| 1.0 / (samples.points[i] - zj)).collect()).collect();
    let row_errors = |q: &BarycentricRational| -> Vec<f64> {
        rows.iter().map(|&i| (samples.values[i] - q.evaluate(samples.points[i])).norm()).collect()
    };
    let mut lambda = vec![1.0; rows.len()];
    let mut errors = row_errors(r);
    for _ in 0..steps {
        if !lawson_update(&mut lambda, &errors, damping) {
            break;
        }
        let sq: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
        let a = ComplexMatrix::from_fn(rows.len(), 2 * n, |i, c| {
            if c < n {
                sq[i] * samples.values[rows[i]] * cauchy[i][c]
            } else {
                -sq[i] * cauchy[i][c - n]
            }
        });
        report.steps_taken += 1;
        if !sign_blend {
            let s = linalg::svd(&a)?.singular_values;
            let k = s.len() - 1;
            if s[k - 1] <= s[0] * f64::EPSILON * (rows.len() as f64) {
                report.rank_deficient = true;
                break;
            }
        }
        let v = choose_weights(&a, sign_blend)?;
        let cand = BarycentricRational::from_coefficients(zs.clone(), v[n..].to_vec(), v[..n].to_vec());
        errors = row_errors(&cand);
        let err = max_residual(&cand, samples);
        if err < report.best_error {
            report.best_error = err;
            best = cand;
        }
    }
    Ok(LawsonOutcome { rational: best, report })
}

/// Poles, residues, zeros and the constant term of `r`.
///
/// Poles are the roots of the barycentric denominator. The arrowhead pencil
/// has two infinite eigenvalues; deflating them around a support point
/// `z_k` leaves the ordinary eigenproblem for
/// `diag(z_j) + a 1^T`, `a_j = -w_j (z_j - z_k) / sum w`, `j != k`.
/// Each eigenvalue is then polished by Newton steps on the denominator.
pub fn poles_residues(r: &BarycentricRational) -> Result<PoleResidueForm> {
    let constant = r.constant();
    if r.support_points.len() < 2 {
        return Ok(PoleResidueForm { constant, poles: vec![], residues: vec![], zeros: vec![] });
    }
    let poles = match roots_of_partial_fractions(&r.support_points, &r.weights, 0)? {
        Some(p) => p,
        None => roots_of_partial_fractions(&r.support_points, &r.weights, 1)?.ok_or_else(|| {
            let pole = r.support_points[0];
            AaaError::PoleCollision { pole }
        })?,
    };
    let poles: Vec<Complex64> = poles.into_iter().map(|p| polish_pole(r, p)).collect();
    let residues = poles
        .iter()
        .map(|&p| {
            let (_, dp) = r.denominator_and_derivative(p);
            r.numerator(p) / dp
        })
        .collect();
    let zeros = if r.numerator_weights.iter().all(|a| *a == ZERO) {
        vec![]
    } else {
        roots_of_partial_fractions(&r.support_points, &r.numerator_weights, 0)?.unwrap_or_default()
    };
    Ok(PoleResidueForm { constant, poles, residues, zeros })
}

/// Re-solves the residues in the least-squares sense against the samples,
/// holding poles and constant fixed. The derivative formula `N(p)/D'(p)`
/// loses several digits when residues are large and of mixed sign; the
/// fitted residues keep the pole–residue form as accurate on the samples
/// as the barycentric form it came from.
pub fn fit_residues(pr: &mut PoleResidueForm, samples: &SampleSet) -> Result<()> {
    if pr.poles.is_empty() {
        return Ok(());
    }
    let z = samples.points();
    if z.iter().any(|zi| pr.poles.iter().any(|p| p == zi)) || z.len() < pr.poles.len() {
        return Ok(());
    }
    let a = ComplexMatrix::from_fn(z.len(), pr.poles.len(), |i, k| 1.0 / (z[i] - pr.poles[k]));
    let rhs: Vec<Complex64> = samples.values().iter().map(|f| f - pr.constant).collect();
    let ls = linalg::least_squares(&a, &rhs)?;
    if ls.solution.iter().all(|c| c.is_finite()) {
        let old = max_pr_residual(pr, samples);
        let previous = std::mem::replace(&mut pr.residues, ls.solution);
        if !(max_pr_residual(pr, samples) <= old) {
            pr.residues = previous;
        }
    }
    Ok(())
}

fn max_pr_residual(pr: &PoleResidueForm, samples: &SampleSet) -> f64 {
    samples.points().iter().zip(samples.values()).map(|(&z, &f)| (f - pr.evaluate(z)).norm()).fold(0.0, f64::max)
}

/// Roots of `sum_j c_j / (z - z_j)`. `attempt` selects which support point is
/// used for deflation; `None` signals a root colliding with a support point.
fn roots_of_partial_fractions(zs: &[Complex64], coef: &[Complex64], attempt: usize) -> Result<Option<Vec<Complex64>>> {
    let n = zs.len();
    let total: Complex64 = coef.iter().sum();
    let cmax = coef.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if total.norm() <= f64::EPSILON * cmax * 1e-3 || total == ZERO {
        // Leading coefficient vanishes; nudge it so the lost root goes to a
        // very large finite value instead of producing NaNs.
        return roots_of_partial_fractions_with_total(zs, coef, attempt, Complex64::new(cmax * f64::EPSILON, 0.0) + total);
    }
    roots_of_partial_fractions_with_total(zs, coef, attempt, total)
        .map(|r| r.filter(|roots| roots.len() == n - 1))
}

fn roots_of_partial_fractions_with_total(zs: &[Complex64], coef: &[Complex64], attempt: usize, total: Complex64) -> Result<Option<Vec<Complex64>>> {
    let n = zs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| coef[b].norm().total_cmp(&coef[a].norm()).then(a.cmp(&b)));
    let k = order[attempt.min(n - 1)];
    let keep: Vec<usize> = (0..n).filter(|&j| j != k).collect();
    let zk = zs[k];
    let a: Vec<Complex64> = keep.iter().map(|&j| -coef[j] * (zs[j] - zk) / total).collect();
    let m = ComplexMatrix::from_fn(keep.len(), keep.len(), |i, j| {
        let d = if i == j { zs[keep[i]] } else { ZERO };
        d + a[i]
    });
    let roots = linalg::eigenvalues(&m)?;
    let scale = zs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for p in &roots {
        if zs.iter().any(|zj| (p - zj).norm() <= 1e-14 * scale) {
            return Ok(None);
        }
    }
    Ok(Some(roots))
}

fn polish_pole(r: &BarycentricRational, p0: Complex64) -> Complex64 {
    let mut p = p0;
    let (mut d, mut dp) = r.denominator_and_derivative(p);
    for _ in 0..8 {
        if d == ZERO || dp == ZERO {
            break;
        }
        let cand = p - d / dp;
        let (dc, dpc) = r.denominator_and_derivative(cand);
        if !(dc.norm() < d.norm()) || !cand.is_finite() {
            break;
        }
        p = cand;
        d = dc;
        dp = dpc;
    }
    p
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CleanupReport {
    pub removed: usize,
    pub removed_poles: Vec<Complex64>,
    /// Set when cleanup would have emptied the support set and was skipped.
    pub skipped: bool,
}

#[derive(Clone, Debug)]
pub struct Cleaned {
    pub poles: PoleResidueForm,
    pub rational: BarycentricRational,
    pub report: CleanupReport,
}

/// Removes Froissart doublets: poles whose residue satisfies
/// `|c_k| < cleanup_tol * max|F| * dist(p_k, Z)`. The support point nearest
/// to each such pole is dropped and the weights are re-solved once.
pub fn cleanup(pr: &PoleResidueForm, r: &BarycentricRational, samples: &SampleSet, cleanup_tol: f64, sign_blend: bool) -> Result<Cleaned> {
    let fmax = samples.max_abs_value();
    let spurious: Vec<usize> = (0..pr.poles.len())
        .filter(|&k| {
            let p = pr.poles[k];
            let dist = samples.points.iter().map(|z| (z - p).norm()).fold(f64::INFINITY, f64::min);
            let c = pr.residues[k].norm();
            !(c >= cleanup_tol * fmax * dist)
        })
        .collect();
    let unchanged = |skipped| Cleaned {
        poles: pr.clone(),
        rational: r.clone(),
        report: CleanupReport { removed: 0, removed_poles: vec![], skipped },
    };
    if spurious.is_empty() {
        return Ok(unchanged(false));
    }
    let zs = &r.support_points;
    let mut drop = vec![false; zs.len()];
    for &k in &spurious {
        let p = pr.poles[k];
        let mut best: Option<usize> = None;
        for j in 0..zs.len() {
            if drop[j] {
                continue;
            }
            if best.map_or(true, |b| (zs[j] - p).norm() < (zs[b] - p).norm()) {
                best = Some(j);
            }
        }
        if let Some(b) = best {
            drop[b] = true;
        }
    }
    let keep: Vec<usize> = (0..zs.len()).filter(|&j| !drop[j]).collect();
    if keep.is_empty() {
        return Ok(unchanged(true));
    }
    let new_support: Vec<Complex64> = keep.iter().map(|&j| zs[j]).collect();
    let new_values: Vec<Complex64> = keep.iter().map(|&j| r.support_values[j]).collect();
    let rows: Vec<usize> = (0..samples.len()).filter(|&i| !new_support.contains(&samples.points[i])).collect();
    let loewner = ComplexMatrix::from_fn(rows.len().max(1), new_support.len(), |i, c| {
        if rows.is_empty() {
            return ZERO;
        }
        let i = rows[i];
        (samples.values[i] - new_values[c]) / (samples.points[i] - new_support[c])
    });
    let w = choose_weights(&loewner, sign_blend)?;
    let rational = BarycentricRational::new(new_support, new_values, w)?;
    let poles = poles_residues(&rational)?;
    let removed_poles = spurious.iter().map(|&k| pr.poles[k]).collect();
    Ok(Cleaned { poles, rational, report: CleanupReport { removed: spurious.len(), removed_poles, skipped: false } })
}
