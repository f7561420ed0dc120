//! Policy network.
//!
//! Each candidate query is scored by its projection onto the global
//! representation: the per-position inner products `⟨e_{r,i}, α_i⟩` act as
//! convolution filters, the product over positions is the pooling step, and
//! the weighted sum over ranks is the score. A softmax over scores with
//! temperature `τ` is the stochastic policy.

use crate::error::{Error, Result};
use crate::qrep::{
    filter_responses, weighted_sum, AmplitudeTable, GlobalRepresentation, QueryState,
};
use crate::vocab::NULL_ID;
use rand::Rng;
use std::collections::BTreeMap;

pub const MIN_TEMPERATURE: f64 = 1e-3;
pub const MAX_TEMPERATURE: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct ActorParams {
    pub table: AmplitudeTable,
    pub global: GlobalRepresentation,
    temperature: f64,
}

impl ActorParams {
    pub fn new(table: AmplitudeTable, global: GlobalRepresentation, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        if table.basis_dim() != global.basis_dim() {
            return Err(Error::ShapeMismatch(format!(
                "amplitude dimension {} vs factor dimension {}",
                table.basis_dim(),
                global.basis_dim()
            )));
        }
        Ok(ActorParams {
            table,
            global,
            temperature,
        })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn order(&self) -> usize {
        self.global.order()
    }

    pub fn rank(&self) -> usize {
        self.global.rank()
    }

    /// Plain gradient descent followed by projection of every touched
    /// amplitude row and factor vector back onto the unit sphere.
    pub fn apply(&mut self, grads: &ActorGradients, lr: f64) {
        for (&id, g) in &grads.table {
            self.table.descend(id, g, lr);
        }
        self.global.descend_weights(&grads.weights, lr);
        self.global.descend_factors(&grads.factors, lr);
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if (MIN_TEMPERATURE..=MAX_TEMPERATURE).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidTemperature(t))
    }
}

/// Scores and per-rank pooled vectors of every candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorForward {
    pub scores: Vec<f64>,
    pub pooled: Vec<Vec<f64>>,
}

pub fn actor_forward(params: &ActorParams, candidates: &[QueryState]) -> Result<ActorForward> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut scores = Vec::with_capacity(candidates.len());
    let mut pooled = Vec::with_capacity(candidates.len());
    for q in candidates {
        let pool = pool_from_responses(&filter_responses(&params.global, q)?);
        scores.push(weighted_sum(params.global.weights(), &pool));
        pooled.push(pool);
    }
    Ok(ActorForward { scores, pooled })
}

fn pool_from_responses(responses: &[Vec<f64>]) -> Vec<f64> {
    responses
        .iter()
        .map(|row| row.iter().fold(1.0, |acc, x| acc * x))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Sample from `softmax(scores / τ)`.
    Sample,
    /// Lowest-index argmax; the `τ → 0` limit.
    Greedy,
}

/// `softmax(scores / τ)` with max-shift.
pub fn policy(scores: &[f64], temperature: f64) -> Result<Vec<f64>> {
    Ok(log_policy(scores, temperature)?
        .into_iter()
        .map(f64::exp)
        .collect())
}

/// Log-probabilities of `softmax(scores / τ)`.
pub fn log_policy(scores: &[f64], temperature: f64) -> Result<Vec<f64>> {
    check_scores(scores)?;
    if !(temperature > 0.0) {
        return Err(Error::InvalidTemperature(temperature));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = scores.iter().map(|s| (s - max) / temperature).collect();
    let log_z = shifted.iter().map(|z| z.exp()).sum::<f64>().ln();
    Ok(shifted.into_iter().map(|z| z - log_z).collect())
}

fn check_scores(scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::NoCandidates);
    }
    match scores.iter().position(|s| !s.is_finite()) {
        Some(index) => Err(Error::NonFiniteScore { index }),
        None => Ok(()),
    }
}

/// Lowest index among the maximal scores.
pub fn greedy_index(scores: &[f64]) -> Result<usize> {
    check_scores(scores)?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Picks a candidate and returns its index with its log-probability under
/// the chosen mode (greedy choices are certain, so their log-probability is
/// 0).
pub fn select_action<R: Rng + ?Sized>(
    scores: &[f64],
    temperature: f64,
    selection: Selection,
    rng: &mut R,
) -> Result<(usize, f64)> {
    match selection {
        Selection::Greedy => Ok((greedy_index(scores)?, 0.0)),
        Selection::Sample => {
            let logp = log_policy(scores, temperature)?;
            let u: f64 = rng.random();
            let mut cumulative = 0.0;
            for (i, lp) in logp.iter().enumerate() {
                cumulative += lp.exp();
                if u < cumulative {
                    return Ok((i, *lp));
                }
            }
            let last = logp.len() - 1;
            Ok((last, logp[last]))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionOutput {
    pub index: usize,
    pub scores: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Pooled per-rank products `(a_1, …, a_R)` of the chosen candidate.
    pub action_vector: Vec<f64>,
    pub log_prob: f64,
}

/// Forward pass plus selection.
pub fn act<R: Rng + ?Sized>(
    params: &ActorParams,
    candidates: &[QueryState],
    selection: Selection,
    rng: &mut R,
) -> Result<ActionOutput> {
    let forward = actor_forward(params, candidates)?;
    let probabilities = policy(&forward.scores, params.temperature)?;
    let (index, log_prob) = select_action(&forward.scores, params.temperature, selection, rng)?;
    Ok(ActionOutput {
        index,
        action_vector: forward.pooled[index].clone(),
        scores: forward.scores,
        probabilities,
        log_prob,
    })
}

/// Gradients of `−advantage · log π(chosen)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorGradients {
    /// Per amplitude row, excluding the fixed NULL row.
    pub table: BTreeMap<usize, Vec<f64>>,
    pub weights: Vec<f64>,
    /// Same `rank × order × k` layout as [`GlobalRepresentation::factors`].
    pub factors: Vec<f64>,
}

impl ActorGradients {
    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&g| g == 0.0)
            && self.factors.iter().all(|&g| g == 0.0)
            && self.table.values().flatten().all(|&g| g == 0.0)
    }
}

pub fn actor_gradients(
    params: &ActorParams,
    candidates: &[QueryState],
    chosen: usize,
    advantage: f64,
) -> Result<ActorGradients> {
    let g = &params.global;
    let (rank, order, k) = (g.rank(), g.order(), g.basis_dim());
    if chosen >= candidates.len() {
        return Err(Error::IndexOutOfRange {
            index: chosen,
            len: candidates.len(),
        });
    }
    let responses: Vec<Vec<Vec<f64>>> = candidates
        .iter()
        .map(|q| filter_responses(g, q))
        .collect::<Result<_>>()?;
    let scores: Vec<f64> = responses
        .iter()
        .map(|x| weighted_sum(g.weights(), &pool_from_responses(x)))
        .collect();
    let probs = policy(&scores, params.temperature)?;

    let mut grads = ActorGradients {
        table: BTreeMap::new(),
        weights: vec![0.0; rank],
        factors: vec![0.0; rank * order * k],
    };
    for (c, (q, x)) in candidates.iter().zip(&responses).enumerate() {
        let indicator = if c == chosen { 1.0 } else { 0.0 };
        // ∂(−A log π_chosen)/∂score_c
        let d_score = -advantage * (indicator - probs[c]) / params.temperature;
        if d_score == 0.0 {
            continue;
        }
        for r in 0..rank {
            let row = &x[r];
            grads.weights[r] += d_score * row.iter().fold(1.0, |acc, v| acc * v);
            // leave-one-out products via prefix/suffix sweeps, exact with zeros
            let mut prefix = vec![1.0; order + 1];
            for i in 0..order {
                prefix[i + 1] = prefix[i] * row[i];
            }
            let mut suffix = 1.0;
            for i in (0..order).rev() {
                let d_response = d_score * g.weights()[r] * prefix[i] * suffix;
                suffix *= row[i];
                if d_response == 0.0 {
                    continue;
                }
                let factor = g.factor(r, i);
                let start = (r * order + i) * k;
                for (gf, a) in grads.factors[start..start + k].iter_mut().zip(q.row(i)) {
                    *gf += d_response * a;
                }
                let word = q.word_ids()[i];
                if word != NULL_ID {
                    let ga = grads.table.entry(word).or_insert_with(|| vec![0.0; k]);
                    for (gv, e) in ga.iter_mut().zip(factor) {
                        *gv += d_response * e;
                    }
                }
            }
        }
    }
    Ok(grads)
}
