//! Dense vector kernels shared by the solvers.
//!
//! All reductions run sequentially in index order, so results are bitwise
//! reproducible for a fixed input.

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub fn scale(a: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= a;
    }
}

pub fn scaled(a: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|xi| a * xi).collect()
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// `‖x - y‖ / ‖y‖`, falling back to the absolute difference when `y = 0`.
pub fn rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let d = norm(&sub(x, y));
    let s = norm(y);
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

/// Unit-norm vector with i.i.d. standard normal direction, seeded.
pub fn random_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let s = norm(&v);
    if s > 0.0 {
        scale(1.0 / s, &mut v);
    }
    v
}

/// `V c` for a basis stored column-wise.
pub fn combine(columns: &[Vec<f64>], coeffs: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (col, &c) in columns.iter().zip(coeffs) {
        axpy(c, col, &mut out);
    }
    out
}
