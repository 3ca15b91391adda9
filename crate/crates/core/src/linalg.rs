//! Dense complex linear algebra for small problems.
//!
//! Everything here works on row-major [`ComplexMatrix`] values of at most a
//! few hundred rows: one-sided Jacobi SVD (with a Householder QR
//! preconditioner for tall inputs), Hessenberg + shifted QR eigenvalues,
//! Householder least squares and partially pivoted LU.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix data has {got} entries, expected {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is empty or too large ({rows}x{cols})")]
    BadSize { rows: usize, cols: usize },
    #[error("Jacobi SVD did not converge for a {rows}x{cols} matrix")]
    SvdNoConvergence { rows: usize, cols: usize },
    #[error("QR eigenvalue iteration did not converge ({} of {n} eigenvalues found)", partial.len())]
    EigNoConvergence { n: usize, partial: Vec<Complex64> },
    #[error("matrix is singular to working precision (pivot {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Row-major dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:.6e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch { rows, cols, got: data.len() });
        }
        if let Some(k) = data.iter().position(|z| !z.is_finite()) {
            return Err(LinalgError::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from columns of equal length.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Complex64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn scale_rows(&self, s: &[f64]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s[i])
    }

    /// Returns `self - shift * I`.
    pub fn shifted(&self, shift: Complex64) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] -= shift;
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

// ---------------------------------------------------------------------------
// Householder QR

struct Householder {
    /// Reflector vectors, `v_k` acts on rows `k..`.
    vs: Vec<Vec<Complex64>>,
    /// Upper triangular factor stored column by column (`cols` columns of length `rows`).
    r: Vec<Vec<Complex64>>,
}

fn householder_qr(a: &ComplexMatrix) -> Householder {
    let (m, n) = (a.rows, a.cols);
    let mut cols = a.columns();
    let mut vs = Vec::with_capacity(n.min(m));
    for k in 0..n.min(m) {
        let x = &cols[k][k..];
        let xnorm = vec_norm(x);
        let mut v: Vec<Complex64> = x.to_vec();
        if xnorm == 0.0 {
            vs.push(vec![ZERO; m - k]);
            continue;
        }
        let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = vec_norm(&v);
        if vnorm == 0.0 {
            vs.push(vec![ZERO; m - k]);
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        for col in cols.iter_mut().skip(k) {
            let seg = &mut col[k..];
            let p = dotc(&v, seg) * 2.0;
            for (s, vi) in seg.iter_mut().zip(&v) {
                *s -= p * vi;
            }
        }
        cols[k][k] = alpha;
        for z in cols[k][k + 1..].iter_mut() {
            *z = ZERO;
        }
        vs.push(v);
    }
    Householder { vs, r: cols }
}

impl Householder {
    /// Applies `Q^H` to `b` in place.
    fn apply_qh(&self, b: &mut [Complex64]) {
        for (k, v) in self.vs.iter().enumerate() {
            let seg = &mut b[k..];
            let p = dotc(v, seg) * 2.0;
            for (s, vi) in seg.iter_mut().zip(v) {
                *s -= p * vi;
            }
        }
    }

    /// Applies `Q` to `b` in place.
    fn apply_q(&self, b: &mut [Complex64]) {
        for (k, v) in self.vs.iter().enumerate().rev() {
            let seg = &mut b[k..];
            let p = dotc(v, seg) * 2.0;
            for (s, vi) in seg.iter_mut().zip(v) {
                *s -= p * vi;
            }
        }
    }

    /// Square upper-triangular factor (n x n, n = number of columns <= rows).
    fn r_square(&self) -> ComplexMatrix {
        let n = self.r.len();
        ComplexMatrix::from_fn(n, n, |i, j| if i <= j { self.r[j][i] } else { ZERO })
    }
}

// ---------------------------------------------------------------------------
// SVD

/// Thin singular value decomposition `A = U diag(s) V^H` with
/// `k = min(rows, cols)` singular triplets.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    /// `rows x k`, orthonormal columns.
    pub left_singular_vectors: ComplexMatrix,
    /// `cols x k`, orthonormal columns.
    pub right_singular_vectors: ComplexMatrix,
}

impl SvdResult {
    pub fn right_vector(&self, j: usize) -> Vec<Complex64> {
        self.right_singular_vectors.column(j)
    }

    pub fn left_vector(&self, j: usize) -> Vec<Complex64> {
        self.left_singular_vectors.column(j)
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    let (m, n) = (a.rows, a.cols);
    if m == 0 || n == 0 || m.saturating_mul(n) > 1_000_000 {
        return Err(LinalgError::BadSize { rows: m, cols: n });
    }
    if m < n {
        let t = svd(&a.adjoint())?;
        return Ok(SvdResult {
            singular_values: t.singular_values,
            left_singular_vectors: t.right_singular_vectors,
            right_singular_vectors: t.left_singular_vectors,
        });
    }
    if m > n {
        // Precondition with QR so Jacobi works on an n x n triangle.
        let qr = householder_qr(a);
        let inner = jacobi_svd(&qr.r_square())?;
        let k = inner.singular_values.len();
        let mut ucols = Vec::with_capacity(k);
        for j in 0..k {
            let mut col = inner.left_singular_vectors.column(j);
            col.resize(m, ZERO);
            qr.apply_q(&mut col);
            ucols.push(col);
        }
        return Ok(SvdResult {
            singular_values: inner.singular_values,
            left_singular_vectors: ComplexMatrix::from_columns(&ucols),
            right_singular_vectors: inner.right_singular_vectors,
        });
    }
    jacobi_svd(a)
}

/// One-sided (Hestenes) Jacobi SVD for `rows >= cols`.
fn jacobi_svd(a: &ComplexMatrix) -> Result<SvdResult> {
    let (m, n) = (a.rows, a.cols);
    debug_assert!(m >= n);
    let mut g = a.columns();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            e
        })
        .collect();
    let tol = f64::EPSILON * (m as f64).sqrt();
    let max_sweeps = 100 * n.max(1);
    let mut converged = n < 2;
    for _sweep in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha = g[p].iter().map(|z| z.norm_sqr()).sum::<f64>();
                let beta = g[q].iter().map(|z| z.norm_sqr()).sum::<f64>();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dotc(&g[p], &g[q]);
                let gabs = gamma.norm();
                if gabs <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / gabs;
                let zeta = (beta - alpha) / (2.0 * gabs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let sp = phase * s; // s e^{i phi}
                let sm = phase.conj() * s; // s e^{-i phi}
                rotate_pair(&mut g, p, q, c, sm, sp);
                rotate_pair(&mut v, p, q, c, sm, sp);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::SvdNoConvergence { rows: m, cols: n });
    }
    let norms: Vec<f64> = g.iter().map(|c| vec_norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let mut ucols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut vcols = Vec::with_capacity(n);
    let mut sv = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        sv.push(s);
        vcols.push(v[j].clone());
        if s > 0.0 {
            ucols.push(g[j].iter().map(|z| z / s).collect());
        } else {
            ucols.push(vec![ZERO; m]);
            missing.push(slot);
        }
    }
    for slot in missing {
        ucols[slot] = complete_basis(&ucols, slot, m);
    }
    Ok(SvdResult {
        singular_values: sv,
        left_singular_vectors: ComplexMatrix::from_columns(&ucols),
        right_singular_vectors: ComplexMatrix::from_columns(&vcols),
    })
}

fn rotate_pair(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, sm: Complex64, sp: Complex64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let xq = *y;
        *x = xp * c - sm * xq;
        *y = sp * xp + xq * c;
    }
}

/// Unit vector orthogonal to every nonzero column in `cols` except `slot`.
fn complete_basis(cols: &[Vec<Complex64>], slot: usize, m: usize) -> Vec<Complex64> {
    for e in 0..m {
        let mut x = vec![ZERO; m];
        x[e] = ONE;
        for _ in 0..2 {
            for (k, c) in cols.iter().enumerate() {
                if k == slot || c.iter().all(|z| *z == ZERO) {
                    continue;
                }
                let p = dotc(c, &x);
                for (xi, ci) in x.iter_mut().zip(c) {
                    *xi -= p * ci;
                }
            }
        }
        let nrm = vec_norm(&x);
        if nrm > 0.5 {
            return x.iter().map(|z| z / nrm).collect();
        }
    }
    vec![ZERO; m]
}

// ---------------------------------------------------------------------------
// Eigenvalues

/// Eigenvalues of a square matrix by Householder reduction to Hessenberg form
/// followed by single-shift complex QR.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(LinalgError::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    if n == 0 || n > 500 {
        return Err(LinalgError::BadSize { rows: n, cols: n });
    }
    let mut h = hessenberg(a);
    hessenberg_qr(&mut h, n)
}

fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows;
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = vec_norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- P H, rows k+1..n
        for j in 0..n {
            let p: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum::<Complex64>() * 2.0;
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= p * vi;
            }
        }
        // H <- H P, cols k+1..n
        for i in 0..n {
            let p: Complex64 = v.iter().enumerate().map(|(j, vj)| h[(i, k + 1 + j)] * vj).sum::<Complex64>() * 2.0;
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= p * vj.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

fn hessenberg_qr(h: &mut ComplexMatrix, n: usize) -> Result<Vec<Complex64>> {
    let norm = h.frobenius_norm();
    let mut eig = vec![ZERO; n];
    if norm == 0.0 {
        return Ok(eig);
    }
    let mut hi = n - 1;
    let mut block_iters = 0usize;
    let mut total = 0usize;
    let cap = 30 * n;
    let mut rots: Vec<(Complex64, Complex64)> = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            block_iters = 0;
            continue;
        }
        total += 1;
        block_iters += 1;
        if total > cap {
            return Err(LinalgError::EigNoConvergence { n, partial: eig[hi + 1..].to_vec() });
        }
        let mu = if block_iters % 10 == 0 {
            let sub = h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + Complex64::new(0.75 * sub, 0.4375 * sub)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        rots.clear();
        for k in lo..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
            for j in k..=hi {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = c.conj() * a + s.conj() * b;
                h[(k + 1, j)] = -s * a + c * b;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 1).min(hi) {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s;
                h[(i, k + 1)] = -a * s.conj() + b * c.conj();
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(eig)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m = (a + d) * 0.5;
    let e1 = m + disc;
    let e2 = m - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

// ---------------------------------------------------------------------------
// Least squares

#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub solution: Vec<Complex64>,
    /// Set when the matrix was numerically rank deficient and the
    /// minimum-norm solution was returned instead.
    pub rank_deficient: bool,
    pub rank: usize,
}

pub fn least_squares(a: &ComplexMatrix, b: &[Complex64]) -> Result<LeastSquares> {
    let (m, n) = (a.rows, a.cols);
    if m < n {
        return Err(LinalgError::Dimension(format!("least squares needs rows >= cols, got {m}x{n}")));
    }
    if b.len() != m {
        return Err(LinalgError::Dimension(format!("rhs has length {}, expected {m}", b.len())));
    }
    if n == 0 {
        return Err(LinalgError::BadSize { rows: m, cols: n });
    }
    let qr = householder_qr(a);
    let rmax = (0..n).map(|k| qr.r[k][k].norm()).fold(0.0, f64::max);
    let cutoff = rmax * (m.max(n) as f64) * f64::EPSILON;
    let deficient = rmax == 0.0 || (0..n).any(|k| qr.r[k][k].norm() <= cutoff);
    if !deficient {
        let mut y = b.to_vec();
        qr.apply_qh(&mut y);
        let mut x = vec![ZERO; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= qr.r[j][i] * x[j];
            }
            x[i] = s / qr.r[i][i];
        }
        return Ok(LeastSquares { solution: x, rank_deficient: false, rank: n });
    }
    let dec = svd(a)?;
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let cut = smax * (m.max(n) as f64) * f64::EPSILON;
    let mut x = vec![ZERO; n];
    let mut rank = 0;
    for (j, &s) in dec.singular_values.iter().enumerate() {
        if s <= cut || s == 0.0 {
            continue;
        }
        rank += 1;
        let u = dec.left_vector(j);
        let coef = dotc(&u, b) / s;
        for (xi, vi) in x.iter_mut().zip(dec.right_vector(j)) {
            *xi += coef * vi;
        }
    }
    Ok(LeastSquares { solution: x, rank_deficient: true, rank })
}

// ---------------------------------------------------------------------------
// LU

/// `P A = L U` with partial pivoting.
#[derive(Clone, Debug)]
pub struct LuDecomposition {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl LuDecomposition {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(LinalgError::Dimension(format!("LU needs a square matrix, got {}x{}", a.rows, a.cols)));
        }
        let n = a.rows;
        if n == 0 {
            return Err(LinalgError::BadSize { rows: 0, cols: 0 });
        }
        let anorm = a.norm_inf();
        let floor = 1e-14 * anorm;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= floor || best == 0.0 {
                return Err(LinalgError::Singular { column: k, pivot: best });
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / piv;
                lu[(i, k)] = l;
                if l == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= l * u;
                }
            }
        }
        Ok(Self { lu, perm, swaps })
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.lu.rows;
        if b.len() != n {
            return Err(LinalgError::Dimension(format!("rhs has length {}, expected {n}", b.len())));
        }
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn determinant(&self) -> Complex64 {
        let mut d: Complex64 = (0..self.lu.rows).map(|i| self.lu[(i, i)]).product();
        if self.swaps % 2 == 1 {
            d = -d;
        }
        d
    }
}

pub fn lu_solve(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    LuDecomposition::new(a)?.solve(b)
}
