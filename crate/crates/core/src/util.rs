//! Small complex-vector helpers shared across the crate.

use num_complex::Complex64;

pub mod fft;

/// Hermitian inner product `a^H b` (conjugate on the first argument).
pub fn dot_h(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Squared Euclidean norm.
pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    norm2(v).sqrt()
}

pub fn scale(v: &[Complex64], c: Complex64) -> Vec<Complex64> {
    v.iter().map(|x| x * c).collect()
}

pub fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::ZERO; n]
}

/// Solves `A x = b` for a small Hermitian positive-definite `A` (row-major)
/// by Gaussian elimination with partial pivoting. Sizes here are the number
/// of TX antennas, so no effort is spent on anything clever.
pub fn solve_hermitian(a: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<Complex64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i][col]
                    .norm_sqr()
                    .partial_cmp(&m[j][col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let diag = m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / diag;
            for k in col..n {
                let sub = factor * m[col][k];
                m[row][k] -= sub;
            }
            let sub = factor * rhs[col];
            rhs[row] -= sub;
        }
    }
    let mut x = vec![Complex64::ZERO; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}
