use crate::error::{Error, Result};
use crate::qcore::NORM_TOL;
use crate::vocab::NULL_ID;
use rand::Rng;
use rand_distr::StandardNormal;

/// Trainable real amplitudes `α[word][b]`: one unit row per vocabulary entry
/// over `k` basis meanings. The NULL row is pinned to `(1, 0, …, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTable {
    k: usize,
    rows: Vec<f64>,
}

impl AmplitudeTable {
    /// Gaussian rows normalized to the unit sphere.
    pub fn random<R: Rng + ?Sized>(vocab_len: usize, k: usize, rng: &mut R) -> Self {
        assert!(k >= 1 && vocab_len > NULL_ID);
        let mut rows: Vec<f64> = (0..vocab_len * k).map(|_| rng.sample(StandardNormal)).collect();
        rows[..k].fill(0.0);
        rows[0] = 1.0;
        let mut table = AmplitudeTable { k, rows };
        table.renormalize();
        table
    }

    pub fn from_rows(vocab_len: usize, k: usize, rows: Vec<f64>) -> Result<Self> {
        if k == 0 || vocab_len == 0 || rows.len() != vocab_len * k {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes for {vocab_len} words of dimension {k}",
                rows.len()
            )));
        }
        let table = AmplitudeTable { k, rows };
        for id in 0..vocab_len {
            let norm = table.row(id).iter().map(|a| a * a).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { norm });
            }
        }
        if table.row(NULL_ID)[0] != 1.0 {
            return Err(Error::ShapeMismatch("NULL row must be the first basis vector".into()));
        }
        Ok(table)
    }

    #[cfg(test)]
    pub(crate) fn unchecked(vocab_len: usize, k: usize, rows: Vec<f64>) -> Self {
        assert_eq!(rows.len(), vocab_len * k);
        AmplitudeTable { k, rows }
    }

    pub fn basis_dim(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.rows.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.rows[id * self.k..(id + 1) * self.k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rows
    }

    /// Overwrites a non-NULL row and renormalizes it.
    pub fn set_row(&mut self, id: usize, values: &[f64]) -> Result<()> {
        if id == NULL_ID {
            return Err(Error::ShapeMismatch("the NULL row is fixed".into()));
        }
        if id >= self.len() || values.len() != self.k {
            return Err(Error::ShapeMismatch(format!("row {id} of width {}", values.len())));
        }
        self.rows[id * self.k..(id + 1) * self.k].copy_from_slice(values);
        normalize_row(&mut self.rows[id * self.k..(id + 1) * self.k]);
        Ok(())
    }

    /// Gradient step `row -= lr * grad` followed by projection back onto the
    /// unit sphere. Rows with an all-zero step are left untouched.
    pub fn descend(&mut self, id: usize, grad: &[f64], lr: f64) {
        if id == NULL_ID || lr == 0.0 || grad.iter().all(|&g| g == 0.0) {
            return;
        }
        let k = self.k;
        let row = &mut self.rows[id * k..(id + 1) * k];
        for (a, g) in row.iter_mut().zip(grad) {
            *a -= lr * g;
        }
        normalize_row(row);
    }

    /// Rescales every row to unit length; the NULL row is reset to `e₀`.
    pub fn renormalize(&mut self) {
        let k = self.k;
        for row in self.rows.chunks_mut(k) {
            normalize_row(row);
        }
        self.rows[..k].fill(0.0);
        self.rows[0] = 1.0;
    }
}

/// Unit-normalizes in place, skipping rows already within rounding of unit
/// length so repeated calls are exact no-ops. Zero rows become `e₀`.
pub(crate) fn normalize_row(row: &mut [f64]) {
    let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        row.fill(0.0);
        row[0] = 1.0;
    } else if (norm - 1.0).abs() > 1e-14 {
        row.iter_mut().for_each(|a| *a /= norm);
    }
}
