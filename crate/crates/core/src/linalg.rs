//! Dense symmetric positive-definite solves for the small normal-equation
//! systems of the built-in models.

use alloc::vec::Vec;

/// Solves `A x = b` for SPD `A` (row-major, `n × n`) by Cholesky. Returns
/// `None` when a pivot falls below `1e-12 · max diag`.
pub(crate) fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let mut l = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 1e-12 * scale {
                    return None;
                }
                l[i * n + i] = libm::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut y = alloc::vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Cholesky with an escalating diagonal stabilizer on the entries flagged in
/// `penalize`. Tries the plain system first.
pub(crate) fn stabilized_solve(a: &[f64], b: &[f64], n: usize, penalize: &[bool]) -> Option<Vec<f64>> {
    if let Some(x) = cholesky_solve(a, b, n) {
        return Some(x);
    }
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max).max(1.0);
    let mut ridge = 1e-10 * scale;
    let mut work = a.to_vec();
    while ridge <= 1e-2 * scale {
        for i in 0..n {
            work[i * n + i] = a[i * n + i] + if penalize[i] { ridge } else { 0.0 };
        }
        if let Some(x) = cholesky_solve(&work, b, n) {
            return Some(x);
        }
        ridge *= 100.0;
    }
    None
}
