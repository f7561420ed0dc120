use super::amplitude::normalize_row;
use crate::error::{Error, Result};
use crate::qcore::NORM_TOL;
use rand::Rng;
use rand_distr::StandardNormal;

/// CP-factored global tensor `𝓖 = Σ_r w_r · e_{r,1} ⊗ … ⊗ e_{r,n}` with unit
/// factor vectors of dimension `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalRepresentation {
    k: usize,
    order: usize,
    weights: Vec<f64>,
    /// `rank × order × k`, row-major.
    factors: Vec<f64>,
}

impl GlobalRepresentation {
    pub fn new(k: usize, order: usize, weights: Vec<f64>, factors: Vec<f64>) -> Result<Self> {
        let rank = weights.len();
        if rank == 0 || k == 0 || order == 0 {
            return Err(Error::ShapeMismatch(format!(
                "rank {rank}, order {order}, basis dimension {k}"
            )));
        }
        if factors.len() != rank * order * k {
            return Err(Error::ShapeMismatch(format!(
                "{} factor entries for rank {rank}, order {order}, dimension {k}",
                factors.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::ShapeMismatch("non-finite weight".into()));
        }
        for f in factors.chunks(k) {
            let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { norm });
            }
        }
        Ok(GlobalRepresentation {
            k,
            order,
            weights,
            factors,
        })
    }

    /// Gaussian weights scaled by `weight_scale` and uniformly random unit
    /// factors.
    pub fn random<R: Rng + ?Sized>(
        rank: usize,
        order: usize,
        k: usize,
        weight_scale: f64,
        rng: &mut R,
    ) -> Self {
        assert!(rank >= 1 && order >= 1 && k >= 1);
        let weights = (0..rank)
            .map(|_| weight_scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut factors: Vec<f64> = (0..rank * order * k)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        for f in factors.chunks_mut(k) {
            normalize_row(f);
        }
        GlobalRepresentation {
            k,
            order,
            weights,
            factors,
        }
    }

    #[cfg(test)]
    pub(crate) fn unchecked(k: usize, order: usize, weights: Vec<f64>, factors: Vec<f64>) -> Self {
        assert_eq!(factors.len(), weights.len() * order * k);
        GlobalRepresentation {
            k,
            order,
            weights,
            factors,
        }
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn basis_dim(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    /// Unit vector `e_{r,i}`.
    pub fn factor(&self, r: usize, i: usize) -> &[f64] {
        let start = (r * self.order + i) * self.k;
        &self.factors[start..start + self.k]
    }

    /// Returns a copy with every weight multiplied by `s`.
    pub fn with_scaled_weights(&self, s: f64) -> Self {
        GlobalRepresentation {
            weights: self.weights.iter().map(|w| w * s).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn descend_weights(&mut self, grad: &[f64], lr: f64) {
        if lr == 0.0 {
            return;
        }
        for (w, g) in self.weights.iter_mut().zip(grad) {
            *w -= lr * g;
        }
    }

    /// Gradient step on each factor followed by renormalization; factors with
    /// an all-zero gradient are left untouched.
    pub(crate) fn descend_factors(&mut self, grad: &[f64], lr: f64) {
        if lr == 0.0 {
            return;
        }
        let k = self.k;
        for (f, g) in self.factors.chunks_mut(k).zip(grad.chunks(k)) {
            if g.iter().all(|&x| x == 0.0) {
                continue;
            }
            for (x, gx) in f.iter_mut().zip(g) {
                *x -= lr * gx;
            }
            normalize_row(f);
        }
    }

    pub fn renormalize_factors(&mut self) {
        for f in self.factors.chunks_mut(self.k) {
            normalize_row(f);
        }
    }
}
