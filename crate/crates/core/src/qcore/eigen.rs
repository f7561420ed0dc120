//! Cyclic Jacobi eigenvalue solver for small symmetric and Hermitian matrices.
//!
//! A Hermitian `H = A + iB` is handled through its real symmetric embedding
//! `[[A, -B], [B, A]]`, whose spectrum is that of `H` with every eigenvalue
//! doubled in multiplicity.

use super::{Matrix, Scalar};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a real symmetric matrix given as row-major `n*n` entries,
/// sorted ascending.
pub fn symmetric_eigenvalues(n: usize, entries: &[f64]) -> Vec<f64> {
    symmetric_eigen(n, entries).0
}

/// Eigenvalues (ascending) and matching unit eigenvectors of a real
/// symmetric matrix. Eigenvector `j` is column `j` of the returned row-major
/// `n*n` matrix.
pub fn symmetric_eigen(n: usize, entries: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(entries.len(), n * n);
    let mut a = entries.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = if theta == 0.0 {
                        1.0
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    rotate_columns(&mut a, n, p, q, c, s);
                    rotate_rows(&mut a, n, p, q, c, s);
                    rotate_columns(&mut v, n, p, q, c, s);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + new_col] = v[row * n + old_col];
        }
    }
    (values, vectors)
}

fn rotate_columns(m: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        let mp = m[k * n + p];
        let mq = m[k * n + q];
        m[k * n + p] = c * mp - s * mq;
        m[k * n + q] = s * mp + c * mq;
    }
}

fn rotate_rows(m: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        let mp = m[p * n + k];
        let mq = m[q * n + k];
        m[p * n + k] = c * mp - s * mq;
        m[q * n + k] = s * mp + c * mq;
    }
}

/// Eigenvalues of a Hermitian matrix, sorted ascending. Only the Hermitian
/// part of `m` is used.
pub fn hermitian_eigenvalues<T: Scalar>(m: &Matrix<T>) -> Vec<f64> {
    assert!(m.is_square());
    let n = m.rows();
    let big = 2 * n;
    let mut e = vec![0.0; big * big];
    for i in 0..n {
        for j in 0..n {
            let h = (m.get(i, j) + m.get(j, i).conj()).scale(0.5);
            let (re, im) = (h.re(), h.im());
            e[i * big + j] = re;
            e[(i + n) * big + (j + n)] = re;
            e[i * big + (j + n)] = -im;
            e[(i + n) * big + j] = im;
        }
    }
    symmetric_eigenvalues(big, &e)
        .into_iter()
        .step_by(2)
        .collect()
}
