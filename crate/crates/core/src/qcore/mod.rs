//! Finite-dimensional Hilbert-space primitives over real or complex scalars:
//! state vectors, tensor products, projectors, density matrices, Born-rule
//! probabilities and collapse sampling.

mod eigen;
mod matrix;
mod scalar;

pub use eigen::{hermitian_eigenvalues, symmetric_eigen, symmetric_eigenvalues};
pub use matrix::Matrix;
pub use scalar::Scalar;

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Largest number of entries any dense tensor or Kronecker product may have.
pub const DENSE_CAP: usize = 4096;

/// Tolerance on `|‖v‖ - 1|` for a vector to count as normalized.
pub const NORM_TOL: f64 = 1e-9;

const PROJECTOR_TOL: f64 = 1e-10;
const DENSITY_TOL: f64 = 1e-10;
const MIN_EIGENVALUE: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    entries: Vec<T>,
    normalized: bool,
}

impl<T: Scalar> StateVector<T> {
    /// Wraps `entries` without any normalization claim.
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(StateVector {
            entries,
            normalized: false,
        })
    }

    /// Wraps `entries`, requiring unit norm within [`NORM_TOL`].
    pub fn normalized(entries: Vec<T>) -> Result<Self> {
        let mut v = Self::new(entries)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        v.normalized = true;
        Ok(v)
    }

    /// Scales `entries` to unit norm.
    pub fn from_unnormalized(entries: Vec<T>) -> Result<Self> {
        let v = Self::new(entries)?;
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector {
            entries: v.entries.into_iter().map(|x| x.scale(1.0 / norm)).collect(),
            normalized: true,
        })
    }

    /// Computational basis vector `|index⟩` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut entries = vec![T::zero(); dim];
        entries[index] = T::one();
        StateVector {
            entries,
            normalized: true,
        }
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |acc, (&a, &b)| acc + a.conj() * b))
    }

    fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }
}

/// Kronecker product of `vectors`, first factor most significant.
pub fn tensor_product<T: Scalar>(vectors: &[StateVector<T>]) -> Result<StateVector<T>> {
    tensor_product_capped(vectors, DENSE_CAP)
}

pub fn tensor_product_capped<T: Scalar>(
    vectors: &[StateVector<T>],
    cap: usize,
) -> Result<StateVector<T>> {
    let (first, rest) = vectors.split_first().ok_or(Error::EmptyInput)?;
    let size = vectors
        .iter()
        .try_fold(1usize, |acc, v| acc.checked_mul(v.dim()))
        .unwrap_or(usize::MAX);
    if size > cap {
        return Err(Error::DenseCapExceeded { size, cap });
    }
    let mut out = first.entries.clone();
    for v in rest {
        out = out
            .iter()
            .flat_map(|&a| v.entries.iter().map(move |&b| a * b))
            .collect();
    }
    let mut result = StateVector {
        entries: out,
        normalized: false,
    };
    result.normalized =
        vectors.iter().all(|v| v.normalized) && (result.norm() - 1.0).abs() <= NORM_TOL;
    Ok(result)
}

/// Rank-1 projector `|v⟩⟨v|`.
pub fn projector<T: Scalar>(v: &StateVector<T>) -> Result<Matrix<T>> {
    v.require_normalized()?;
    Ok(Matrix::outer(&v.entries, &v.entries))
}

/// A complete projective measurement: mutually orthogonal projectors that
/// resolve the identity, each tagged with a real eigenvalue.
#[derive(Debug, Clone)]
pub struct Observable<T> {
    projectors: Vec<Matrix<T>>,
    eigenvalues: Vec<f64>,
}

impl<T: Scalar> Observable<T> {
    pub fn new(projectors: Vec<Matrix<T>>, eigenvalues: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidObservable(msg));
        let Some(first) = projectors.first() else {
            return bad("no projectors".into());
        };
        if projectors.len() != eigenvalues.len() {
            return bad(format!(
                "{} projectors but {} eigenvalues",
                projectors.len(),
                eigenvalues.len()
            ));
        }
        let dim = first.rows();
        let mut sum = Matrix::zeros(dim, dim);
        for (i, p) in projectors.iter().enumerate() {
            if !p.is_square() || p.rows() != dim {
                return bad(format!("projector {i} has the wrong shape"));
            }
            if !p.is_hermitian(PROJECTOR_TOL) || !p.is_idempotent(PROJECTOR_TOL) {
                return bad(format!("projector {i} is not an orthogonal projection"));
            }
            for (j, q) in projectors.iter().enumerate().skip(i + 1) {
                let overlap = p.matmul(q)?.max_abs_diff(&Matrix::zeros(dim, dim))?;
                if overlap > PROJECTOR_TOL {
                    return bad(format!("projectors {i} and {j} overlap"));
                }
            }
            sum = sum.add(p)?;
        }
        if sum.max_abs_diff(&Matrix::identity(dim))? > PROJECTOR_TOL {
            return bad("projectors do not sum to the identity".into());
        }
        Ok(Observable {
            projectors,
            eigenvalues,
        })
    }

    /// Projectors onto consecutive coordinate blocks of equal size.
    pub fn coordinate_blocks(dim: usize, eigenvalues: Vec<f64>) -> Result<Self> {
        let blocks = eigenvalues.len();
        if blocks == 0 || !dim.is_multiple_of(blocks) {
            return Err(Error::InvalidObservable(format!(
                "cannot split dimension {dim} into {blocks} equal blocks"
            )));
        }
        let size = dim / blocks;
        let projectors = (0..blocks)
            .map(|c| Matrix::coordinate_projector(dim, c * size..(c + 1) * size))
            .collect();
        Self::new(projectors, eigenvalues)
    }

    pub fn projectors(&self) -> &[Matrix<T>] {
        &self.projectors
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].rows()
    }

    /// Born probabilities of every outcome in state `rho`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.projectors
            .iter()
            .map(|p| born_probability(p, rho))
            .collect()
    }
}

/// Hermitian, unit-trace, positive semidefinite complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Matrix<Complex64>,
}

impl DensityMatrix {
    /// Validates all density-matrix invariants, including the spectrum.
    pub fn new(matrix: Matrix<Complex64>) -> Result<Self> {
        let rho = DensityMatrix { matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::InvalidDensity("not a non-empty square matrix".into()));
        }
        if !m.is_hermitian(DENSITY_TOL) {
            return Err(Error::InvalidDensity("not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < MIN_EIGENVALUE {
            return Err(Error::InvalidDensity(format!("eigenvalue {min} < 0")));
        }
        Ok(())
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: Matrix::identity(dim).scaled(1.0 / dim as f64),
        }
    }

    pub fn pure(v: &StateVector<Complex64>) -> Result<Self> {
        Ok(DensityMatrix {
            matrix: projector(v)?,
        })
    }

    pub fn matrix(&self) -> &Matrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `Tr(ρ²)`, equal to 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        (0..m.rows())
            .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j).norm_sqr())
            .sum()
    }

    pub fn frobenius_distance(&self, other: &Self) -> Result<f64> {
        self.matrix.frobenius_distance(&other.matrix)
    }
}

/// Born rule `Tr(Pρ)`. Values within 1e-10 outside `[0, 1]` are clamped;
/// anything further out is returned unchanged.
pub fn born_probability<T: Scalar>(p: &Matrix<T>, rho: &DensityMatrix) -> Result<f64> {
    let d = rho.dim();
    if !p.is_square() || p.rows() != d {
        return Err(Error::ShapeMismatch(format!(
            "projector {}x{} against density {d}x{d}",
            p.rows(),
            p.cols()
        )));
    }
    let mut tr = 0.0;
    for i in 0..d {
        for j in 0..d {
            tr += (p.get(i, j).to_complex() * rho.get(j, i)).re;
        }
    }
    Ok(if (-DENSITY_TOL..0.0).contains(&tr) {
        0.0
    } else if tr > 1.0 && tr <= 1.0 + DENSITY_TOL {
        1.0
    } else {
        tr
    })
}

/// Measures `psi` in the computational basis: draws index `i` with
/// probability `|psi_i|²` and returns the collapsed basis state.
pub fn collapse_sample<T: Scalar, R: Rng + ?Sized>(
    psi: &StateVector<T>,
    rng: &mut R,
) -> Result<(usize, StateVector<T>)> {
    psi.require_normalized()?;
    let u: f64 = rng.random::<f64>() * psi.norm().powi(2);
    let mut cumulative = 0.0;
    let mut last_nonzero = 0;
    for (i, x) in psi.entries.iter().enumerate() {
        let p = x.norm_sqr();
        if p > 0.0 {
            last_nonzero = i;
            cumulative += p;
            if u < cumulative {
                return Ok((i, StateVector::basis(psi.dim(), i)));
            }
        }
    }
    Ok((last_nonzero, StateVector::basis(psi.dim(), last_nonzero)))
}

/// Mixture `ρ = Σ βᵢ|wᵢ⟩⟨wᵢ|` of normalized complex states.
pub fn build_density(weights: &[f64], vectors: &[StateVector<Complex64>]) -> Result<DensityMatrix> {
    let first = vectors.first().ok_or(Error::EmptyInput)?;
    if weights.len() != vectors.len() {
        return Err(Error::DimensionMismatch {
            expected: vectors.len(),
            found: weights.len(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&b| !(b >= 0.0)) || (sum - 1.0).abs() > DENSITY_TOL {
        return Err(Error::WeightNotNormalized { sum });
    }
    let d = first.dim();
    let mut rho = Matrix::zeros(d, d);
    for (&beta, v) in weights.iter().zip(vectors) {
        if v.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.dim(),
            });
        }
        v.require_normalized()?;
        if beta == 0.0 {
            continue;
        }
        rho = rho.add(&Matrix::outer(v.entries(), v.entries()).scaled(beta))?;
    }
    // Hermitian by construction and a convex mixture of pure states, so the
    // spectral check is left to `DensityMatrix::validate`.
    Ok(DensityMatrix { matrix: rho })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_complex_unit(dim: usize, rng: &mut ChaCha8Rng) -> StateVector<Complex64> {
        let entries = (0..dim)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        StateVector::from_unnormalized(entries).unwrap()
    }

    #[test]
    fn tensor_single_factor_is_identity() {
        let zero = StateVector::<f64>::basis(2, 0);
        assert_eq!(tensor_product(&[zero.clone()]).unwrap(), zero);
    }

    #[test]
    fn tensor_of_basis_vectors() {
        let t = tensor_product(&[StateVector::<f64>::basis(2, 0), StateVector::basis(2, 1)]).unwrap();
        assert_eq!(t.entries(), &[0.0, 1.0, 0.0, 0.0]);
        assert!(t.is_normalized());
    }

    #[test]
    fn tensor_of_three_random_units_is_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vs: Vec<StateVector<f64>> = (0..3)
            .map(|_| StateVector::from_unnormalized((0..3).map(|_| rng.random::<f64>() - 0.5).collect()).unwrap())
            .collect();
        let t = tensor_product(&vs).unwrap();
        assert_eq!(t.dim(), 27);
        // direct computation of the norm over all 27 index triples
        let mut sq = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    let x = vs[0].entries()[a] * vs[1].entries()[b] * vs[2].entries()[cc];
                    sq += x * x;
                }
            }
        }
        assert!((sq.sqrt() - 1.0).abs() < 1e-12);
        assert!((t.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_errors() {
        assert!(matches!(tensor_product::<f64>(&[]), Err(Error::EmptyInput)));
        let big = StateVector::<f64>::basis(65, 0);
        assert!(matches!(
            tensor_product(&[big.clone(), big]),
            Err(Error::DenseCapExceeded { size: 4225, cap: 4096 })
        ));
    }

    #[test]
    fn projector_examples() {
        let p0 = projector(&StateVector::<f64>::basis(2, 0)).unwrap();
        assert_eq!(p0.as_slice(), &[1.0, 0.0, 0.0, 0.0]);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::normalized(vec![h, h]).unwrap();
        let pp = projector(&plus).unwrap();
        for &x in pp.as_slice() {
            assert!((x - 0.5).abs() < 1e-15);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = random_complex_unit(4, &mut rng);
        let p = projector(&v).unwrap();
        assert!((p.trace().re - 1.0).abs() < 1e-12);
        assert!(p.trace().im.abs() < 1e-12);
        assert!(p.matmul(&p).unwrap().max_abs_diff(&p).unwrap() < 1e-12);
    }

    #[test]
    fn projector_rejects_unnormalized() {
        let v = StateVector::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(projector(&v), Err(Error::NotNormalized { .. })));
        assert!(StateVector::normalized(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn born_examples() {
        let zero = StateVector::<Complex64>::basis(2, 0);
        let p0 = projector(&zero).unwrap();
        let rho0 = DensityMatrix::pure(&zero).unwrap();
        assert_eq!(born_probability(&p0, &rho0).unwrap(), 1.0);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::normalized(vec![c(h, 0.0), c(h, 0.0)]).unwrap();
        let rho_plus = DensityMatrix::pure(&plus).unwrap();
        assert!((born_probability(&p0, &rho_plus).unwrap() - 0.5).abs() < 1e-15);

        let bad = Matrix::<f64>::identity(3);
        assert!(matches!(born_probability(&bad, &rho0), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn born_rank_two_block_matches_basis_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vs: Vec<_> = (0..3).map(|_| random_complex_unit(4, &mut rng)).collect();
        let rho = build_density(&[0.2, 0.5, 0.3], &vs).unwrap();
        let p = Matrix::<f64>::coordinate_projector(4, 1..3);
        // ⟨b_i|ρ|b_i⟩ summed over the block, written out from the mixture
        let mut expected = 0.0;
        for i in 1..3 {
            for (beta, v) in [0.2, 0.5, 0.3].iter().zip(&vs) {
                expected += beta * v.entries()[i].norm_sqr();
            }
        }
        assert!((born_probability(&p, &rho).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn collapse_of_basis_state_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let zero = StateVector::<f64>::basis(2, 0);
        for _ in 0..100 {
            let (i, post) = collapse_sample(&zero, &mut rng).unwrap();
            assert_eq!(i, 0);
            assert_eq!(post, zero);
        }
    }

    #[test]
    fn collapse_frequencies_follow_squared_amplitudes() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (amps, expected) in [(vec![h, h], 0.5), (vec![0.6, 0.8], 0.36)] {
            let psi = StateVector::normalized(amps).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let draws = 100_000;
            let zeros = (0..draws)
                .filter(|_| collapse_sample(&psi, &mut rng).unwrap().0 == 0)
                .count();
            let freq = zeros as f64 / draws as f64;
            assert!((freq - expected).abs() < 0.01, "freq {freq} vs {expected}");
        }
    }

    #[test]
    fn collapse_rejects_unnormalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = StateVector::new(vec![2.0, 0.0]).unwrap();
        assert!(collapse_sample(&v, &mut rng).is_err());
    }

    #[test]
    fn density_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = random_complex_unit(3, &mut rng);
        let pure = build_density(&[1.0], &[w]).unwrap();
        let sq = pure.matrix().matmul(pure.matrix()).unwrap();
        assert!(sq.max_abs_diff(pure.matrix()).unwrap() < 1e-12);

        let mixed = build_density(
            &[0.5, 0.5],
            &[StateVector::basis(2, 0), StateVector::basis(2, 1)],
        )
        .unwrap();
        let eig = mixed.eigenvalues();
        assert!((eig[0] - 0.5).abs() < 1e-12 && (eig[1] - 0.5).abs() < 1e-12);
        mixed.validate().unwrap();
    }

    #[test]
    fn density_errors() {
        let e0 = StateVector::<Complex64>::basis(2, 0);
        let e1 = StateVector::<Complex64>::basis(3, 1);
        assert!(matches!(
            build_density(&[0.6, 0.6], &[e0.clone(), e0.clone()]),
            Err(Error::WeightNotNormalized { .. })
        ));
        assert!(matches!(
            build_density(&[0.5, 0.5], &[e0.clone(), e1]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            build_density(&[1.5, -0.5], &[e0.clone(), e0]),
            Err(Error::WeightNotNormalized { .. })
        ));
    }

    #[test]
    fn observable_validation() {
        let obs = Observable::<f64>::coordinate_blocks(6, vec![-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(obs.projectors().len(), 3);
        let rho = DensityMatrix::maximally_mixed(6);
        let total: f64 = obs.probabilities(&rho).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);

        // two copies of the same projector overlap and overshoot the identity
        let p = Matrix::<f64>::coordinate_projector(2, 0..1);
        assert!(Observable::new(vec![p.clone(), p], vec![0.0, 1.0]).is_err());
        // incomplete
        let q = Matrix::<f64>::coordinate_projector(2, 0..1);
        assert!(Observable::new(vec![q], vec![1.0]).is_err());
    }

    #[test]
    fn density_validation_rejects_bad_matrices() {
        let mut m = Matrix::<Complex64>::identity(2).scaled(0.5);
        m.set(0, 1, c(0.0, 0.3));
        assert!(DensityMatrix::new(m).is_err()); // not Hermitian
        let neg = Matrix::from_rows(2, 2, vec![c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]).unwrap();
        assert!(DensityMatrix::new(neg).is_err());
    }
}
