//! Density-matrix critic.
//!
//! The (state, action) token sequence becomes a salience-weighted mixture
//! `ρ = Σ βᵢ|wᵢ⟩⟨wᵢ|` of complex word states, which is then measured against
//! three coordinate-block projectors for mismatch, partial and match.

use crate::error::{Error, Result};
use crate::label::Label;
use crate::qcore::{build_density, born_probability, DensityMatrix, Matrix, Observable, StateVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Loss floor for `−log p_label`.
pub const MIN_PROBABILITY: f64 = 1e-12;

/// Per-word complex embeddings stored as nonnegative unit amplitudes and
/// phases in `[−π, π)`, plus a scalar salience per word.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEmbeddingTable {
    dim: usize,
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    salience: Vec<f64>,
}

impl ComplexEmbeddingTable {
    /// Random amplitudes (folded Gaussian, normalized), uniform phases and
    /// zero salience.
    pub fn random<R: Rng + ?Sized>(vocab_len: usize, dim: usize, rng: &mut R) -> Result<Self> {
        check_dim(dim)?;
        let mut amplitudes: Vec<f64> = (0..vocab_len * dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
            .collect();
        for row in amplitudes.chunks_mut(dim) {
            normalize(row);
        }
        let phases = (0..vocab_len * dim).map(|_| rng.random_range(-PI..PI)).collect();
        Ok(ComplexEmbeddingTable {
            dim,
            amplitudes,
            phases,
            salience: vec![0.0; vocab_len],
        })
    }

    pub fn from_parts(
        dim: usize,
        amplitudes: Vec<f64>,
        phases: Vec<f64>,
        salience: Vec<f64>,
    ) -> Result<Self> {
        check_dim(dim)?;
        let v = salience.len();
        if amplitudes.len() != v * dim || phases.len() != v * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes and {} phases for {v} words of dimension {dim}",
                amplitudes.len(),
                phases.len()
            )));
        }
        for row in amplitudes.chunks(dim) {
            let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > crate::qcore::NORM_TOL {
                return Err(Error::NotNormalized { norm });
            }
            if row.iter().any(|&a| a < 0.0) {
                return Err(Error::ShapeMismatch("negative amplitude".into()));
            }
        }
        if phases.iter().any(|p| !(-PI..PI).contains(p)) {
            return Err(Error::ShapeMismatch("phase outside [-pi, pi)".into()));
        }
        if salience.iter().any(|s| !s.is_finite()) {
            return Err(Error::ShapeMismatch("non-finite salience".into()));
        }
        Ok(ComplexEmbeddingTable {
            dim,
            amplitudes,
            phases,
            salience,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.salience.len()
    }

    pub fn is_empty(&self) -> bool {
        self.salience.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn salience(&self) -> &[f64] {
        &self.salience
    }

    pub fn amplitude_row(&self, id: usize) -> &[f64] {
        &self.amplitudes[id * self.dim..(id + 1) * self.dim]
    }

    pub fn phase_row(&self, id: usize) -> &[f64] {
        &self.phases[id * self.dim..(id + 1) * self.dim]
    }

    /// Unit complex state `uⱼ·e^{iφⱼ}` of word `id`, with `u` the amplitude
    /// row rescaled to unit length.
    pub fn state(&self, id: usize) -> Result<StateVector<Complex64>> {
        self.check_id(id)?;
        let (u, _) = unit(self.amplitude_row(id));
        let entries = u
            .iter()
            .zip(self.phase_row(id))
            .map(|(&a, &p)| Complex64::from_polar(a, p))
            .collect();
        StateVector::normalized(entries)
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: id,
                len: self.len(),
            })
        }
    }

    /// Gradient step on every touched word. Amplitude rows are folded back
    /// to nonnegative entries (a sign flip is a phase shift by π) and
    /// renormalized; phases are wrapped into `[−π, π)`.
    pub fn apply(&mut self, grads: &CriticGradients, lr: f64) {
        if lr == 0.0 {
            return;
        }
        let d = self.dim;
        for (&id, g) in &grads.amplitudes {
            if g.iter().all(|&x| x == 0.0) {
                continue;
            }
            let range = id * d..(id + 1) * d;
            for ((a, p), gj) in self.amplitudes[range.clone()]
                .iter_mut()
                .zip(&mut self.phases[range.clone()])
                .zip(g)
            {
                *a -= lr * gj;
                if *a < 0.0 {
                    *a = -*a;
                    *p = wrap_phase(*p + PI);
                }
            }
            normalize(&mut self.amplitudes[range]);
        }
        for (&id, g) in &grads.phases {
            for (p, gj) in self.phases[id * d..(id + 1) * d].iter_mut().zip(g) {
                if *gj != 0.0 {
                    *p = wrap_phase(*p - lr * gj);
                }
            }
        }
        for (&id, g) in &grads.salience {
            self.salience[id] -= lr * g;
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || !dim.is_multiple_of(3) {
        Err(Error::DimensionNotDivisible(dim))
    } else {
        Ok(())
    }
}

fn unit(row: &[f64]) -> (Vec<f64>, f64) {
    let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
    (row.iter().map(|a| a / norm).collect(), norm)
}

fn normalize(row: &mut [f64]) {
    let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        row.fill(0.0);
        row[0] = 1.0;
    } else if (norm - 1.0).abs() > 1e-14 {
        row.iter_mut().for_each(|a| *a /= norm);
    }
}

/// Maps any angle into `[−π, π)`.
pub fn wrap_phase(p: f64) -> f64 {
    let w = p - 2.0 * PI * ((p + PI) / (2.0 * PI)).floor();
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn salience_weights(table: &ComplexEmbeddingTable, ids: &[usize]) -> Vec<f64> {
    let s: Vec<f64> = ids.iter().map(|&id| table.salience[id]).collect();
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = s.iter().map(|x| (x - max).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

fn concat(state: &[usize], action: &[usize]) -> Vec<usize> {
    state.iter().chain(action).copied().collect()
}

/// `ρ = Σ βᵢ|wᵢ⟩⟨wᵢ|` over the concatenated state and action tokens, with
/// `β = softmax(salience)`.
pub fn critic_density(
    state: &[usize],
    action: &[usize],
    table: &ComplexEmbeddingTable,
) -> Result<DensityMatrix> {
    density_of(&concat(state, action), table)
}

fn density_of(ids: &[usize], table: &ComplexEmbeddingTable) -> Result<DensityMatrix> {
    if ids.is_empty() {
        return Err(Error::EmptyInput);
    }
    let states: Vec<_> = ids.iter().map(|&id| table.state(id)).collect::<Result<_>>()?;
    build_density(&salience_weights(table, ids), &states)
}

/// Born probabilities over (mismatch, partial, match).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMeasurement {
    pub probabilities: [f64; 3],
}

impl ClassMeasurement {
    pub fn probability(&self, label: Label) -> f64 {
        self.probabilities[label.class_index()]
    }

    /// Most probable class, lowest class index on ties.
    pub fn predicted(&self) -> Label {
        let mut best = 0;
        for c in 1..3 {
            if self.probabilities[c] > self.probabilities[best] {
                best = c;
            }
        }
        Label::ALL[best]
    }
}

/// The three-outcome observable with eigenvalues `−1, 0, +1` on consecutive
/// coordinate blocks of size `d/3`.
pub fn class_observable(dim: usize) -> Result<Observable<f64>> {
    check_dim(dim)?;
    Observable::coordinate_blocks(dim, vec![-1.0, 0.0, 1.0])
}

pub fn measure_classes(rho: &DensityMatrix) -> Result<ClassMeasurement> {
    let p = class_observable(rho.dim())?.probabilities(rho)?;
    Ok(ClassMeasurement {
        probabilities: [p[0], p[1], p[2]],
    })
}

/// Expected reward of the measurement.
pub fn q_value(m: &ClassMeasurement) -> f64 {
    -m.probabilities[0] + m.probabilities[2]
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriticGradients {
    pub amplitudes: BTreeMap<usize, Vec<f64>>,
    pub phases: BTreeMap<usize, Vec<f64>>,
    pub salience: BTreeMap<usize, f64>,
}

impl CriticGradients {
    pub fn is_zero(&self) -> bool {
        self.amplitudes.values().flatten().all(|&g| g == 0.0)
            && self.phases.values().flatten().all(|&g| g == 0.0)
            && self.salience.values().all(|&g| g == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticLoss {
    pub loss: f64,
    pub measurement: ClassMeasurement,
    pub gradients: CriticGradients,
}

/// Cross-entropy `−log p_label` and its gradients with respect to the stored
/// amplitudes, phases and saliences of every token.
pub fn critic_loss_and_gradients(
    state: &[usize],
    action: &[usize],
    label: Label,
    table: &ComplexEmbeddingTable,
) -> Result<CriticLoss> {
    let ids = concat(state, action);
    let rho = density_of(&ids, table)?;
    let measurement = measure_classes(&rho)?;
    let d = table.dim;
    let p_label = measurement.probability(label);
    let loss = -p_label.max(MIN_PROBABILITY).ln();

    let mut gradients = CriticGradients::default();
    // ∂loss/∂ρ = G = −P_label / p_label (zero once the floor is active)
    let coefficient = if p_label > MIN_PROBABILITY { -1.0 / p_label } else { 0.0 };
    let size = d / 3;
    let block = label.class_index() * size..(label.class_index() + 1) * size;
    let projector: Matrix<f64> = Matrix::coordinate_projector(d, block);

    let beta = salience_weights(table, &ids);
    let mut d_beta = Vec::with_capacity(ids.len());
    for (&id, &b) in ids.iter().zip(&beta) {
        let w = table.state(id)?;
        let w = w.entries();
        // G·w with G real symmetric here
        let gw: Vec<Complex64> = (0..d)
            .map(|i| {
                (0..d).fold(Complex64::new(0.0, 0.0), |acc, j| {
                    acc + w[j] * (coefficient * projector.get(i, j))
                })
            })
            .collect();
        // ∂/∂βᵢ of Tr(G ρ) is ⟨wᵢ|G|wᵢ⟩
        d_beta.push(
            w.iter()
                .zip(&gw)
                .map(|(a, g)| (a.conj() * g).re)
                .sum::<f64>(),
        );
        // (∂/∂Re wⱼ, ∂/∂Im wⱼ) = 2βᵢ (Re (Gw)ⱼ, Im (Gw)ⱼ)
        let (u, norm) = unit(table.amplitude_row(id));
        let phases = table.phase_row(id);
        let mut d_unit = vec![0.0; d];
        let mut d_phase = vec![0.0; d];
        for j in 0..d {
            let (gr, gi) = (2.0 * b * gw[j].re, 2.0 * b * gw[j].im);
            let (s, c) = phases[j].sin_cos();
            d_unit[j] = gr * c + gi * s;
            d_phase[j] = u[j] * (gi * c - gr * s);
        }
        // back through u = a / ‖a‖
        let radial: f64 = u.iter().zip(&d_unit).map(|(x, g)| x * g).sum();
        let d_amp: Vec<f64> = d_unit
            .iter()
            .zip(&u)
            .map(|(g, x)| (g - x * radial) / norm)
            .collect();
        add_into(gradients.amplitudes.entry(id).or_insert_with(|| vec![0.0; d]), &d_amp);
        add_into(gradients.phases.entry(id).or_insert_with(|| vec![0.0; d]), &d_phase);
    }
    // softmax backward: ∂/∂sᵢ = βᵢ (∂βᵢ − Σⱼ βⱼ ∂βⱼ)
    let mean: f64 = beta.iter().zip(&d_beta).map(|(b, g)| b * g).sum();
    for ((&id, &b), &g) in ids.iter().zip(&beta).zip(&d_beta) {
        *gradients.salience.entry(id).or_insert(0.0) += b * (g - mean);
    }
    Ok(CriticLoss {
        loss,
        measurement,
        gradients,
    })
}

fn add_into(acc: &mut [f64], g: &[f64]) {
    for (a, x) in acc.iter_mut().zip(g) {
        *a += x;
    }
}

/// Probability of class `label` straight from the Born rule, without the
/// coordinate-block shortcut.
pub fn class_probability(rho: &DensityMatrix, label: Label) -> Result<f64> {
    let d = rho.dim();
    check_dim(d)?;
    let size = d / 3;
    let c = label.class_index();
    born_probability(&Matrix::<f64>::coordinate_projector(d, c * size..(c + 1) * size), rho)
}
