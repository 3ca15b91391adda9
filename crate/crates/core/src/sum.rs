use num_complex::Complex64;

const BLOCK: usize = 8;

/// Pairwise (cascade) summation. Split points are kept even so that
/// adjacent pairs `(x, conj(x))` always land in the same leaf block.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= BLOCK {
        let mut s = Complex64::new(0.0, 0.0);
        for x in xs {
            s += x;
        }
        return s;
    }
    let mut mid = xs.len() / 2;
    mid -= mid % 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_real(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_real(&xs[..mid]) + pairwise_sum_real(&xs[mid..])
}
