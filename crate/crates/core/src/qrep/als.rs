//! CP decomposition by alternating least squares.

use super::{cp_reconstruct, DenseTensor, GlobalRepresentation};
use crate::error::{Error, Result};
use crate::qcore::symmetric_eigen;
use rand::Rng;
use rand_distr::StandardNormal;

const RIDGE: f64 = 1e-10;
const LINE_SEARCH_DOUBLINGS: i32 = 12;
const GOLDEN_ITERATIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlsOptions {
    pub max_sweeps: usize,
    /// Stop once the relative fit changes by less than this between sweeps.
    pub tolerance: f64,
    pub restarts: usize,
}

impl Default for AlsOptions {
    fn default() -> Self {
        AlsOptions {
            max_sweeps: 500,
            tolerance: 1e-9,
            restarts: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlsReport {
    /// `‖t − cp_reconstruct(result)‖ / ‖t‖`, defined as 0 for a zero tensor.
    pub relative_error: f64,
    pub sweeps: usize,
    /// Index of the restart that produced the result.
    pub restart: usize,
}

/// Fits a rank-`rank` CP model to a cubical tensor, keeping the best of
/// several seeded restarts. For order-3 tensors with `rank ≤ min(k, 3)` the
/// first restart starts from a simultaneous-diagonalization estimate instead
/// of random factors.
pub fn cp_decompose<R: Rng + ?Sized>(
    t: &DenseTensor,
    rank: usize,
    rng: &mut R,
    opts: &AlsOptions,
) -> Result<(GlobalRepresentation, AlsReport)> {
    let order = t.order();
    let k = *t.shape().first().ok_or(Error::EmptyInput)?;
    if t.shape().iter().any(|&d| d != k) || k == 0 {
        return Err(Error::ShapeMismatch(format!(
            "CP decomposition needs a cubical tensor, got shape {:?}",
            t.shape()
        )));
    }
    let max_rank = t.len() / k;
    if rank == 0 || rank > max_rank {
        return Err(Error::RankTooLarge {
            rank,
            max: max_rank,
        });
    }

    let norm = t.frobenius_norm();
    if norm == 0.0 {
        let mut factors = vec![0.0; rank * order * k];
        for f in factors.chunks_mut(k) {
            f[0] = 1.0;
        }
        let g = GlobalRepresentation::new(k, order, vec![0.0; rank], factors)?;
        return Ok((
            g,
            AlsReport {
                relative_error: 0.0,
                sweeps: 0,
                restart: 0,
            },
        ));
    }

    let mut best: Option<(GlobalRepresentation, AlsReport)> = None;
    for restart in 0..opts.restarts.max(1) {
        let init = if restart == 0 {
            diagonalization_init(t, rank, rng)
        } else {
            None
        };
        let (g, mut report) = als_run(t, norm, rank, init, rng, opts)?;
        report.restart = restart;
        if best
            .as_ref()
            .is_none_or(|(_, b)| report.relative_error < b.relative_error)
        {
            best = Some((g, report));
        }
        if best.as_ref().is_some_and(|(_, b)| b.relative_error < 1e-14) {
            break;
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Factor matrices are stored `k × rank`, row-major, one per mode.
fn als_run<R: Rng + ?Sized>(
    t: &DenseTensor,
    norm: f64,
    rank: usize,
    init: Option<Vec<Vec<f64>>>,
    rng: &mut R,
    opts: &AlsOptions,
) -> Result<(GlobalRepresentation, AlsReport)> {
    let order = t.order();
    let k = t.shape()[0];
    let mut modes: Vec<Vec<f64>> = init.unwrap_or_else(|| {
        (0..order)
            .map(|_| (0..k * rank).map(|_| rng.sample(StandardNormal)).collect())
            .collect()
    });
    let mut weights = vec![1.0; rank];
    for m in 0..order {
        weights = normalize_columns(&mut modes[m], k, rank);
    }

    let indices: Vec<Vec<usize>> = (0..t.len()).map(|f| t.multi_index(f)).collect();
    let mut error = f64::INFINITY;
    let mut sweeps = 0;
    let mut previous: Option<Vec<Vec<f64>>> = None;
    for sweep in 1..=opts.max_sweeps {
        sweeps = sweep;
        for m in 0..order {
            let rhs = mttkrp(t, &indices, &modes, m, k, rank);
            let gram = hadamard_gram(&modes, m, k, rank);
            modes[m] = solve_rows(&gram, &rhs, k, rank);
            weights = normalize_columns(&mut modes[m], k, rank);
        }
        let mut residual = relative_error(t, &assemble(&modes, &weights, order, k, rank)?, norm)?;

        // Extrapolate along the last sweep's direction when that lowers the
        // residual; this is what pulls ALS out of swamps.
        let current = fold_weights(&modes, &weights, k, rank);
        if let Some(prev) = &previous {
            if let Some((jumped, jumped_weights, jumped_residual)) =
                line_search(t, norm, prev, &current, order, k, rank)?
            {
                if jumped_residual < residual {
                    modes = jumped;
                    weights = jumped_weights;
                    residual = jumped_residual;
                }
            }
        }
        previous = Some(fold_weights(&modes, &weights, k, rank));

        let change = (error - residual).abs();
        error = residual;
        if change < opts.tolerance || error < 1e-15 {
            break;
        }
    }
    let g = assemble(&modes, &weights, order, k, rank)?;
    Ok((
        g,
        AlsReport {
            relative_error: error,
            sweeps,
            restart: 0,
        },
    ))
}

/// Matricized tensor times the Khatri-Rao product of every mode but `skip`.
fn mttkrp(
    t: &DenseTensor,
    indices: &[Vec<usize>],
    modes: &[Vec<f64>],
    skip: usize,
    k: usize,
    rank: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; k * rank];
    for (&val, idx) in t.as_slice().iter().zip(indices) {
        if val == 0.0 {
            continue;
        }
        for r in 0..rank {
            let prod: f64 = idx
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(i, &b)| modes[i][b * rank + r])
                .product();
            out[idx[skip] * rank + r] += val * prod;
        }
    }
    out
}

/// Elementwise product of the `rank × rank` Gram matrices of every mode but
/// `skip`.
fn hadamard_gram(modes: &[Vec<f64>], skip: usize, k: usize, rank: usize) -> Vec<f64> {
    let mut v = vec![1.0; rank * rank];
    for (i, a) in modes.iter().enumerate() {
        if i == skip {
            continue;
        }
        for p in 0..rank {
            for q in 0..rank {
                let g: f64 = (0..k).map(|b| a[b * rank + p] * a[b * rank + q]).sum();
                v[p * rank + q] *= g;
            }
        }
    }
    v
}

/// Solves `X · gram = rhs` row by row. A singular system is retried with a
/// ridge term on the diagonal.
fn solve_rows(gram: &[f64], rhs: &[f64], k: usize, rank: usize) -> Vec<f64> {
    let solve = |ridge: f64| -> Option<Vec<f64>> {
        let mut sys = gram.to_vec();
        for p in 0..rank {
            sys[p * rank + p] += ridge;
        }
        let mut out = Vec::with_capacity(k * rank);
        for row in rhs.chunks(rank) {
            out.extend(gauss_solve(&sys, row, rank)?);
        }
        Some(out)
    };
    solve(0.0)
        .or_else(|| solve(RIDGE))
        .unwrap_or_else(|| vec![0.0; k * rank])
}

/// Gaussian elimination with partial pivoting; `None` when a pivot is
/// negligible relative to the matrix scale.
fn gauss_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[pivot * n + col].abs() <= 1e-13 * scale {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            x.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let f = m[row * n + col] / m[col * n + col];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[row * n + j] -= f * m[col * n + j];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let s: f64 = ((col + 1)..n).map(|j| m[col * n + j] * x[j]).sum();
        x[col] = (x[col] - s) / m[col * n + col];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Scales each column to unit length and returns the removed norms. Zero
/// columns become the first basis vector with norm 0.
fn normalize_columns(a: &mut [f64], k: usize, rank: usize) -> Vec<f64> {
    (0..rank)
        .map(|r| {
            let norm = (0..k).map(|b| a[b * rank + r].powi(2)).sum::<f64>().sqrt();
            if norm > 0.0 && norm.is_finite() {
                (0..k).for_each(|b| a[b * rank + r] /= norm);
                norm
            } else {
                (0..k).for_each(|b| a[b * rank + r] = if b == 0 { 1.0 } else { 0.0 });
                0.0
            }
        })
        .collect()
}

/// Jennrich-style estimate for an order-3 tensor `Σ_r w_r a_r ⊗ b_r ⊗ c_r`:
/// two random mode-3 contractions `A·Dx·Bᵀ` and `A·Dy·Bᵀ`, compressed onto
/// the dominant mode-1/mode-2 subspaces, share eigenvectors that recover
/// `A` and `B`; `C` then follows from one least-squares solve.
fn diagonalization_init<R: Rng + ?Sized>(
    t: &DenseTensor,
    rank: usize,
    rng: &mut R,
) -> Option<Vec<Vec<f64>>> {
    let k = t.shape()[0];
    if t.order() != 3 || rank > k || rank > 3 {
        return None;
    }
    let at = |a: usize, b: usize, c: usize| t.as_slice()[(a * k + b) * k + c];
    let u = dominant_subspace(k, rank, |a, b| {
        (0..k).flat_map(|j| (0..k).map(move |l| (j, l))).map(|(j, l)| at(a, j, l) * at(b, j, l)).sum()
    });
    let v = dominant_subspace(k, rank, |a, b| {
        (0..k).flat_map(|j| (0..k).map(move |l| (j, l))).map(|(j, l)| at(j, a, l) * at(j, b, l)).sum()
    });
    let x: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
    let y: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
    // compressed contraction Uᵀ · T(·,·,z) · V, rank × rank
    let compress = |z: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; rank * rank];
        for p in 0..rank {
            for q in 0..rank {
                let mut acc = 0.0;
                for a in 0..k {
                    for b in 0..k {
                        let tz: f64 = (0..k).map(|c| at(a, b, c) * z[c]).sum();
                        acc += u[a * rank + p] * tz * v[b * rank + q];
                    }
                }
                out[p * rank + q] = acc;
            }
        }
        out
    };
    let px = compress(&x);
    let py = compress(&y);
    let py_inv = invert(&py, rank)?;
    let left = matmul(&px, &py_inv, rank);
    let right = matmul(&transpose(&px, rank), &transpose(&py_inv, rank), rank);
    let mut left_eig = small_eigen(&left, rank)?;
    let mut right_eig = small_eigen(&right, rank)?;
    left_eig.sort_by(|a, b| a.0.total_cmp(&b.0));
    right_eig.sort_by(|a, b| a.0.total_cmp(&b.0));

    let lift = |basis: &[f64], eig: &[(f64, Vec<f64>)]| -> Vec<f64> {
        let mut m = vec![0.0; k * rank];
        for (r, (_, z)) in eig.iter().enumerate() {
            for a in 0..k {
                m[a * rank + r] = (0..rank).map(|p| basis[a * rank + p] * z[p]).sum();
            }
        }
        m
    };
    let mut modes = vec![lift(&u, &left_eig), lift(&v, &right_eig), vec![0.0; k * rank]];
    normalize_columns(&mut modes[0], k, rank);
    normalize_columns(&mut modes[1], k, rank);
    let indices: Vec<Vec<usize>> = (0..t.len()).map(|f| t.multi_index(f)).collect();
    let rhs = mttkrp(t, &indices, &modes, 2, k, rank);
    let gram = hadamard_gram(&modes, 2, k, rank);
    modes[2] = solve_rows(&gram, &rhs, k, rank);
    Some(modes)
}

/// Leading `rank` eigenvectors of the `k × k` Gram matrix `gram(a, b)`, as a
/// row-major `k × rank` basis.
fn dominant_subspace(k: usize, rank: usize, gram: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let entries: Vec<f64> = (0..k * k).map(|i| gram(i / k, i % k)).collect();
    let (_, vectors) = symmetric_eigen(k, &entries);
    let mut basis = vec![0.0; k * rank];
    for p in 0..rank {
        let col = k - 1 - p;
        for a in 0..k {
            basis[a * rank + p] = vectors[a * k + col];
        }
    }
    basis
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..n).map(|l| a[i * n + l] * b[l * n + j]).sum();
        }
    }
    out
}

fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    (0..n * n).map(|i| a[(i % n) * n + i / n]).collect()
}

fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        let e: Vec<f64> = (0..n).map(|i| if i == col { 1.0 } else { 0.0 }).collect();
        let x = gauss_solve(a, &e, n)?;
        for row in 0..n {
            inv[row * n + col] = x[row];
        }
    }
    Some(inv)
}

/// Real eigenpairs of a matrix of order at most 3 from its characteristic
/// polynomial. `None` unless all eigenvalues are real and well separated.
fn small_eigen(m: &[f64], n: usize) -> Option<Vec<(f64, Vec<f64>)>> {
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(f64::MIN_POSITIVE);
    let values: Vec<f64> = match n {
        1 => vec![m[0]],
        2 => {
            let tr = m[0] + m[3];
            let det = m[0] * m[3] - m[1] * m[2];
            let disc = tr * tr / 4.0 - det;
            if disc <= 0.0 {
                return None;
            }
            vec![tr / 2.0 - disc.sqrt(), tr / 2.0 + disc.sqrt()]
        }
        3 => {
            let p = m[0] + m[4] + m[8];
            let q = m[0] * m[4] - m[1] * m[3] + m[0] * m[8] - m[2] * m[6] + m[4] * m[8]
                - m[5] * m[7];
            let r = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6]);
            // λ = μ + p/3 turns λ³ − pλ² + qλ − r into μ³ + Pμ + Q
            let big_p = q - p * p / 3.0;
            let big_q = -2.0 * p * p * p / 27.0 + p * q / 3.0 - r;
            if big_p >= 0.0 || 4.0 * big_p.powi(3) + 27.0 * big_q * big_q >= 0.0 {
                return None;
            }
            let amp = 2.0 * (-big_p / 3.0).sqrt();
            let arg = ((3.0 * big_q / (2.0 * big_p)) * (-3.0 / big_p).sqrt()).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            (0..3)
                .map(|j| p / 3.0 + amp * (phi - 2.0 * std::f64::consts::PI * j as f64 / 3.0).cos())
                .collect()
        }
        _ => return None,
    };
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[1] - w[0] <= 1e-9 * scale) {
        return None;
    }
    values
        .into_iter()
        .map(|lambda| null_vector(m, n, lambda).map(|v| (lambda, v)))
        .collect()
}

/// Unit vector spanning the null space of `m − λI` for `n ≤ 3`.
fn null_vector(m: &[f64], n: usize, lambda: f64) -> Option<Vec<f64>> {
    let s: Vec<f64> = (0..n * n)
        .map(|i| if i / n == i % n { m[i] - lambda } else { m[i] })
        .collect();
    let candidates: Vec<Vec<f64>> = match n {
        1 => vec![vec![1.0]],
        2 => vec![vec![-s[1], s[0]], vec![s[3], -s[2]]],
        _ => {
            let row = |i: usize| [s[i * 3], s[i * 3 + 1], s[i * 3 + 2]];
            let cross = |a: [f64; 3], b: [f64; 3]| {
                vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
            };
            vec![cross(row(0), row(1)), cross(row(0), row(2)), cross(row(1), row(2))]
        }
    };
    let best = candidates
        .into_iter()
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))?;
    let len = norm(&best);
    (len > 0.0).then(|| best.iter().map(|x| x / len).collect())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

type Jump = (Vec<Vec<f64>>, Vec<f64>, f64);

/// Minimizes the residual of `prev + s·(current − prev)` over `s > 1`: a
/// doubling ladder brackets the best step, golden-section search refines it.
fn line_search(
    t: &DenseTensor,
    norm: f64,
    prev: &[Vec<f64>],
    current: &[Vec<f64>],
    order: usize,
    k: usize,
    rank: usize,
) -> Result<Option<Jump>> {
    let eval = |step: f64| -> Result<Jump> {
        let mut jumped: Vec<Vec<f64>> = prev
            .iter()
            .zip(current)
            .map(|(p, c)| p.iter().zip(c).map(|(p, c)| p + step * (c - p)).collect())
            .collect();
        let mut jumped_weights = vec![1.0; rank];
        for mode in jumped.iter_mut() {
            let norms = normalize_columns(mode, k, rank);
            jumped_weights.iter_mut().zip(norms).for_each(|(w, n)| *w *= n);
        }
        let residual = relative_error(t, &assemble(&jumped, &jumped_weights, order, k, rank)?, norm)?;
        Ok((jumped, jumped_weights, residual))
    };

    let ladder: Vec<f64> = (0..=LINE_SEARCH_DOUBLINGS).map(|j| 2f64.powi(j)).collect();
    let mut values = Vec::with_capacity(ladder.len());
    for &s in &ladder {
        values.push(eval(s)?.2);
    }
    let best = (0..ladder.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    if best == 0 {
        return Ok(None);
    }
    let mut lo = ladder[best - 1];
    let mut hi = ladder.get(best + 1).copied().unwrap_or(ladder[best]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (eval(a)?.2, eval(b)?.2);
    for _ in 0..GOLDEN_ITERATIONS {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = eval(a)?.2;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = eval(b)?.2;
        }
    }
    let refined = if fa < fb { a } else { b };
    let candidate = eval(refined)?;
    Ok(Some(if candidate.2 < values[best] {
        candidate
    } else {
        eval(ladder[best])?
    }))
}

/// Copies of the factor matrices with the weights folded into the last mode.
fn fold_weights(modes: &[Vec<f64>], weights: &[f64], k: usize, rank: usize) -> Vec<Vec<f64>> {
    let mut out = modes.to_vec();
    if let Some(last) = out.last_mut() {
        for b in 0..k {
            for r in 0..rank {
                last[b * rank + r] *= weights[r];
            }
        }
    }
    out
}

fn assemble(
    modes: &[Vec<f64>],
    weights: &[f64],
    order: usize,
    k: usize,
    rank: usize,
) -> Result<GlobalRepresentation> {
    let mut factors = Vec::with_capacity(rank * order * k);
    for r in 0..rank {
        for mode in modes {
            factors.extend((0..k).map(|b| mode[b * rank + r]));
        }
    }
    GlobalRepresentation::new(k, order, weights.to_vec(), factors)
}

fn relative_error(t: &DenseTensor, g: &GlobalRepresentation, norm: f64) -> Result<f64> {
    let recon = cp_reconstruct(g)?;
    let diff: f64 = t
        .as_slice()
        .iter()
        .zip(recon.as_slice())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok(diff.sqrt() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rank_one_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = GlobalRepresentation::random(1, 3, 3, 1.0, &mut rng);
        let g = g.with_scaled_weights(1.0 / g.weights()[0]);
        let t = cp_reconstruct(&g).unwrap();
        let (_, report) = cp_decompose(&t, 1, &mut rng, &AlsOptions::default()).unwrap();
        assert!(report.relative_error < 1e-10, "{report:?}");
    }

    #[test]
    fn known_rank_two_cube() {
        // e₀⊗e₀⊗e₀ + 2·u⊗v⊗w with fixed non-orthogonal unit vectors
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = [h, h];
        let v = [0.6, 0.8];
        let w = [0.8, -0.6];
        let mut factors = vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        factors.extend(u.iter().chain(&v).chain(&w));
        let g = GlobalRepresentation::new(2, 3, vec![1.0, 2.0], factors).unwrap();
        let t = cp_reconstruct(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (fit, report) = cp_decompose(&t, 2, &mut rng, &AlsOptions::default()).unwrap();
        assert!(report.relative_error < 1e-6, "{report:?}");
        let mut w = fit.weights().to_vec();
        w.sort_by(f64::total_cmp);
        assert!((w[0] - 1.0).abs() < 1e-5 && (w[1] - 2.0).abs() < 1e-5, "{w:?}");
    }

    #[test]
    fn zero_tensor() {
        let t = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (g, report) = cp_decompose(&t, 2, &mut rng, &AlsOptions::default()).unwrap();
        assert_eq!(report.relative_error, 0.0);
        assert!(g.weights().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn rank_guard() {
        let t = DenseTensor::zeros(vec![2, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            cp_decompose(&t, 3, &mut rng, &AlsOptions::default()),
            Err(Error::RankTooLarge { rank: 3, max: 2 })
        ));
        let ragged = DenseTensor::zeros(vec![2, 3]).unwrap();
        assert!(cp_decompose(&ragged, 1, &mut rng, &AlsOptions::default()).is_err());
    }

    #[test]
    fn small_eigen_matches_diagonalizable_matrices() {
        // S · diag(1, 2, -3) · S⁻¹ with a non-orthogonal S
        let s = [1.0, 0.5, 0.0, 0.0, 1.0, 0.3, 0.2, 0.0, 1.0];
        let d = [1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, -3.0];
        let m = matmul(&matmul(&s, &d, 3), &invert(&s, 3).unwrap(), 3);
        let mut eig = small_eigen(&m, 3).unwrap();
        eig.sort_by(|a, b| a.0.total_cmp(&b.0));
        for ((lambda, v), expected) in eig.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((lambda - expected).abs() < 1e-10);
            let mv: Vec<f64> = (0..3).map(|i| (0..3).map(|j| m[i * 3 + j] * v[j]).sum()).collect();
            for i in 0..3 {
                assert!((mv[i] - lambda * v[i]).abs() < 1e-9);
            }
        }
        // rotation by 90°: complex spectrum
        assert!(small_eigen(&[0.0, -1.0, 1.0, 0.0], 2).is_none());
    }

    #[test]
    fn gauss_solves_small_system() {
        let x = gauss_solve(&[2.0, 1.0, 1.0, 3.0], &[3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(gauss_solve(&[1.0, 1.0, 1.0, 1.0], &[1.0, 1.0], 2).is_none());
    }
}
