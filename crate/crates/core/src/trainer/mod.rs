//! Actor-critic training loop, evaluation and checkpoints.

mod checkpoint;
mod config;
mod inspect;

pub use checkpoint::{load_checkpoint, parse_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, RngState, HEADER};
pub use config::{TrainConfig, KEYS};
pub use inspect::{inspect, CandidateReport, InspectReport, TOP_OFF_DIAGONAL};

use crate::actor::{act, actor_gradients, greedy_index, ActorGradients, ActorParams, Selection};
use crate::critic::{critic_loss_and_gradients, critic_density, measure_classes, q_value, ComplexEmbeddingTable};
use crate::env::{scent_stats, Corpus, Environment, Observation, ScentStats, Transition};
use crate::error::Result;
use crate::label::Label;
use crate::qrep::{embed_ids, AmplitudeTable, GlobalRepresentation, QueryState};
use crate::rng::{Rng, SeedStreams};
use crate::vocab::Vocabulary;
use std::fmt::Write as _;

/// Everything a trained agent needs: its vocabulary and both networks.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub vocab: Vocabulary,
    pub actor: ActorParams,
    pub critic: ComplexEmbeddingTable,
}

impl Model {
    pub fn init<R: rand::Rng + ?Sized>(config: &TrainConfig, vocab: Vocabulary, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let table = AmplitudeTable::random(vocab.len(), config.k, rng);
        let global = GlobalRepresentation::random(config.rank, config.order, config.k, config.weight_scale, rng);
        let actor = ActorParams::new(table, global, config.temperature)?;
        let critic = ComplexEmbeddingTable::random(vocab.len(), config.critic_dim, rng)?;
        Ok(Model { vocab, actor, critic })
    }

    /// Re-expresses ids of `corpus`'s vocabulary in the model's own,
    /// unknown words becoming UNK.
    fn remap(&self, corpus: &Corpus, ids: &[usize]) -> Vec<usize> {
        let words = corpus.vocabulary();
        ids.iter()
            .map(|&id| words.word(id).map_or(crate::vocab::UNK_ID, |w| self.vocab.lookup(w)))
            .collect()
    }

    fn candidate_states(&self, corpus: &Corpus, obs: &Observation) -> Result<(Vec<Vec<usize>>, Vec<QueryState>)> {
        let ids: Vec<Vec<usize>> = obs.candidates.iter().map(|c| self.remap(corpus, c)).collect();
        let states = ids
            .iter()
            .map(|c| embed_ids(c, &self.actor.table, self.actor.order()))
            .collect::<Result<_>>()?;
        Ok((ids, states))
    }

    /// Every amplitude row, factor vector and critic amplitude has unit
    /// norm within `tol`.
    pub fn norms_hold(&self, tol: f64) -> bool {
        let unit = |rows: &[f64], width: usize| {
            rows.chunks(width)
                .all(|r| (r.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() <= tol)
        };
        unit(self.actor.table.as_slice(), self.actor.table.basis_dim())
            && unit(self.actor.global.factors(), self.actor.global.basis_dim())
            && unit(self.critic.amplitudes(), self.critic.dim())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    pub reward: i8,
    pub q_value: f64,
    pub advantage: f64,
    pub critic_loss: f64,
    pub log_prob: f64,
}

/// One sampled interaction, measured by the critic but not yet applied.
struct Rollout {
    transition: Transition,
    candidates: Vec<QueryState>,
    q: f64,
    critic_loss: f64,
    critic_grads: crate::critic::CriticGradients,
}

fn rollout<R: rand::Rng + ?Sized>(
    model: &Model,
    env: &Environment<'_>,
    obs: &Observation,
    rng: &mut R,
) -> Result<Rollout> {
    let corpus = env.corpus();
    let (ids, candidates) = model.candidate_states(corpus, obs)?;
    let action = act(&model.actor, &candidates, Selection::Sample, rng)?;
    let (reward, mut transition) = env.step(obs, action.index)?;
    let label = Label::from_reward(reward.into())?;
    let state = model.remap(corpus, &obs.keywords);
    let critic = critic_loss_and_gradients(&state, &ids[action.index], label, &model.critic)?;
    transition.critic_probabilities = Some(critic.measurement.probabilities);
    transition.log_prob = action.log_prob;
    Ok(Rollout {
        transition,
        candidates,
        q: q_value(&critic.measurement),
        critic_loss: critic.loss,
        critic_grads: critic.gradients,
    })
}

fn actor_update(model: &Model, r: &Rollout, coefficient: f64) -> Result<(f64, ActorGradients)> {
    let advantage = coefficient - r.q;
    let grads = actor_gradients(&model.actor, &r.candidates, r.transition.chosen, advantage)?;
    Ok((advantage, grads))
}

/// One bandit interaction: sample a candidate, score it with the critic,
/// then update the actor with advantage `r − Q` and the critic with the
/// cross-entropy against the revealed label. Parameters are projected back
/// onto the unit sphere after the step.
pub fn train_step<R: rand::Rng + ?Sized>(
    model: &mut Model,
    env: &Environment<'_>,
    obs: &Observation,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<(Transition, StepMetrics)> {
    let r = rollout(model, env, obs, rng)?;
    let (advantage, grads) = actor_update(model, &r, f64::from(r.transition.reward))?;
    model.actor.apply(&grads, config.lr_actor);
    model.critic.apply(&r.critic_grads, config.lr_critic);
    let metrics = StepMetrics {
        reward: r.transition.reward,
        q_value: r.q,
        advantage,
        critic_loss: r.critic_loss,
        log_prob: r.transition.log_prob,
    };
    Ok((r.transition, metrics))
}

/// Runs one episode. In bandit mode this is a single [`train_step`]; in
/// session mode the critic learns after every step and the actor once at the
/// end, each step weighted by its discounted return `Σ γᵏ r_{t+k}`.
pub fn train_episode<R: rand::Rng + ?Sized>(
    model: &mut Model,
    env: &mut Environment<'_>,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<Vec<(Transition, StepMetrics)>> {
    let obs = env.reset(rng)?;
    if obs.last {
        return Ok(vec![train_step(model, env, &obs, config, rng)?]);
    }
    let mut rollouts = Vec::new();
    let mut obs = obs;
    loop {
        let r = rollout(model, env, &obs, rng)?;
        model.critic.apply(&r.critic_grads, config.lr_critic);
        let done = r.transition.done;
        rollouts.push(r);
        if done {
            break;
        }
        obs = env.reset(rng)?;
    }
    let mut returns = vec![0.0; rollouts.len()];
    let mut g = 0.0;
    for (t, r) in rollouts.iter().enumerate().rev() {
        g = f64::from(r.transition.reward) + config.gamma * g;
        returns[t] = g;
    }
    let mut out = Vec::with_capacity(rollouts.len());
    let mut updates = Vec::with_capacity(rollouts.len());
    for (r, &ret) in rollouts.iter().zip(&returns) {
        let (advantage, grads) = actor_update(model, r, ret)?;
        updates.push(grads);
        out.push((
            r.transition.clone(),
            StepMetrics {
                reward: r.transition.reward,
                q_value: r.q,
                advantage,
                critic_loss: r.critic_loss,
                log_prob: r.transition.log_prob,
            },
        ));
    }
    for grads in &updates {
        model.actor.apply(grads, config.lr_actor);
    }
    Ok(out)
}

/// Greedy choice for one document, in the model's terms.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalChoice {
    pub doc_id: String,
    /// Index into the document's own candidate list.
    pub chosen: usize,
    pub query: String,
    pub reward: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalMetrics {
    /// Fraction of documents whose greedy choice is labeled `+1`.
    pub greedy_accuracy: f64,
    pub mean_reward: f64,
    /// Fraction of (document, candidate) pairs whose most probable critic
    /// class equals the label.
    pub critic_accuracy: f64,
    pub scent: ScentStats,
    pub choices: Vec<EvalChoice>,
}

/// Deterministic greedy pass over every document in corpus order.
pub fn evaluate(model: &Model, corpus: &Corpus, config: &TrainConfig) -> Result<EvalMetrics> {
    if corpus.is_empty() {
        return Err(crate::error::Error::EmptyCorpus);
    }
    let env = Environment::new(corpus, config.mode, config.keywords);
    let mut transitions = Vec::with_capacity(corpus.len());
    let mut choices = Vec::with_capacity(corpus.len());
    let (mut hits, mut critic_hits, mut pairs) = (0usize, 0usize, 0usize);
    for (i, doc) in corpus.documents().iter().enumerate() {
        let obs = env.observe_in_order(i);
        let (ids, states) = model.candidate_states(corpus, &obs)?;
        let scores = crate::actor::actor_forward(&model.actor, &states)?.scores;
        let chosen = greedy_index(&scores)?;
        let (reward, transition) = env.step(&obs, chosen)?;
        hits += usize::from(reward == 1);
        let state = model.remap(corpus, &obs.keywords);
        for (c, cand) in ids.iter().zip(&doc.candidates) {
            let m = measure_classes(&critic_density(&state, c, &model.critic)?)?;
            critic_hits += usize::from(m.predicted() == cand.label);
            pairs += 1;
        }
        choices.push(EvalChoice {
            doc_id: doc.id.clone(),
            chosen,
            query: doc.candidates[chosen].text.clone(),
            reward,
        });
        transitions.push(transition);
    }
    let n = corpus.len() as f64;
    Ok(EvalMetrics {
        greedy_accuracy: hits as f64 / n,
        mean_reward: choices.iter().map(|c| f64::from(c.reward)).sum::<f64>() / n,
        critic_accuracy: critic_hits as f64 / pairs as f64,
        scent: scent_stats(&transitions, config.scent_lambda),
        choices,
    })
}

/// One line of the metric log.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub episode: usize,
    /// Mean training reward since the previous record.
    pub avg_reward: f64,
    pub greedy_acc: f64,
    pub critic_acc: f64,
    /// Smoothed scent of the training rewards so far.
    pub scent_scalar: f64,
}

pub const METRIC_COLUMNS: &str = "episode\tavg_reward\tgreedy_acc\tcritic_acc\tscent_scalar";

impl MetricRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.episode, self.avg_reward, self.greedy_acc, self.critic_acc, self.scent_scalar
        )
    }
}

/// Metric log text: config echo, column header, one line per record.
pub fn format_metrics(config: &TrainConfig, records: &[MetricRecord]) -> String {
    let mut out = String::new();
    for (k, v) in config.to_pairs() {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "{METRIC_COLUMNS}");
    for r in records {
        let _ = writeln!(out, "{}", r.to_line());
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub records: Vec<MetricRecord>,
    /// Reward of every training step in order.
    pub rewards: Vec<i8>,
}

/// Trains a fresh model on `corpus`. Randomness comes from named streams of
/// `config.seed`; when `config.checkpoint_path` is set the checkpoint is
/// written at every evaluation and at the end.
pub fn train(config: &TrainConfig, corpus: &Corpus) -> Result<TrainOutcome> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(crate::error::Error::EmptyCorpus);
    }
    let streams = SeedStreams::new(config.seed);
    let mut model = Model::init(config, corpus.vocabulary().clone(), &mut streams.rng("init"))?;
    let mut rng: Rng = streams.rng("train");
    let mut env = Environment::new(corpus, config.mode, config.keywords);

    let mut rewards = Vec::new();
    let mut records = Vec::new();
    let mut transitions: Vec<Transition> = Vec::new();
    let mut since_record = 0usize;
    for episode in 1..=config.episodes {
        for (t, _) in train_episode(&mut model, &mut env, config, &mut rng)? {
            rewards.push(t.reward);
            transitions.push(t);
        }
        let due = config.eval_interval > 0
            && (episode % config.eval_interval == 0 || episode == config.episodes);
        if due {
            let eval = evaluate(&model, corpus, config)?;
            let window = &rewards[since_record..];
            since_record = rewards.len();
            records.push(MetricRecord {
                episode,
                avg_reward: window.iter().map(|&r| f64::from(r)).sum::<f64>() / window.len().max(1) as f64,
                greedy_acc: eval.greedy_accuracy,
                critic_acc: eval.critic_accuracy,
                scent_scalar: scent_stats(&transitions, config.scent_lambda).scalar(),
            });
            if let Some(path) = &config.checkpoint_path {
                save_checkpoint(&Checkpoint::new(config, &model, &rng), path)?;
            }
        }
    }
    let checkpoint = Checkpoint::new(config, &model, &rng);
    if let Some(path) = &config.checkpoint_path {
        save_checkpoint(&checkpoint, path)?;
    }
    Ok(TrainOutcome {
        checkpoint,
        records,
        rewards,
    })
}

#[cfg(test)]
mod tests;
