use super::*;
use crate::actor::actor_gradients;
use crate::env::{gen_corpus, GenSpec, Mode, NEGATION};
use crate::error::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn toy_corpus(seed: u64) -> Corpus {
    gen_corpus(&GenSpec::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn small_config() -> TrainConfig {
    TrainConfig {
        episodes: 30,
        eval_interval: 10,
        seed: 3,
        ..TrainConfig::default()
    }
}

#[test]
fn zero_advantage_or_rate_leaves_actor_untouched() {
    let corpus = toy_corpus(0);
    let cfg = small_config();
    let mut model = Model::init(&cfg, corpus.vocabulary().clone(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let env = Environment::new(&corpus, Mode::Bandit, cfg.keywords);
    let obs = env.observe_in_order(0);
    let (_, states) = model.candidate_states(&corpus, &obs).unwrap();
    let before = model.clone();
    let grads = actor_gradients(&model.actor, &states, 1, 0.0).unwrap();
    model.actor.apply(&grads, 0.7);
    assert_eq!(model, before);

    let frozen = TrainConfig {
        lr_actor: 0.0,
        lr_critic: 0.0,
        ..cfg
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..5 {
        train_step(&mut model, &env, &obs, &frozen, &mut rng).unwrap();
    }
    assert_eq!(model, before);
}

#[test]
fn steps_keep_unit_norms_and_repeat() {
    let corpus = toy_corpus(1);
    let cfg = small_config();
    let run = || {
        let mut model = Model::init(&cfg, corpus.vocabulary().clone(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let mut env = Environment::new(&corpus, Mode::Bandit, cfg.keywords);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut metrics = Vec::new();
        for _ in 0..10 {
            let obs = env.reset(&mut rng).unwrap();
            let (t, m) = train_step(&mut model, &env, &obs, &cfg, &mut rng).unwrap();
            assert!(model.norms_hold(1e-9));
            assert!(t.log_prob <= 0.0 && (-1..=1).contains(&t.reward));
            metrics.push(m);
        }
        metrics
    };
    assert_eq!(run(), run());
}

#[test]
fn uniform_critic_reduces_to_reinforce() {
    let corpus = toy_corpus(2);
    let cfg = TrainConfig {
        lr_critic: 0.0,
        ..small_config()
    };
    let mut model = Model::init(&cfg, corpus.vocabulary().clone(), &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    // equal amplitude on every coordinate: every class has probability 1/3
    let v = model.vocab.len();
    let d = cfg.critic_dim;
    model.critic = ComplexEmbeddingTable::from_parts(
        d,
        vec![1.0 / (d as f64).sqrt(); v * d],
        vec![0.0; v * d],
        vec![0.0; v],
    )
    .unwrap();
    let env = Environment::new(&corpus, Mode::Bandit, cfg.keywords);
    let obs = env.observe_in_order(3);
    let mut expected = model.clone();
    let (t, m) = train_step(&mut model, &env, &obs, &cfg, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
    assert!(m.q_value.abs() < 1e-15);
    assert_eq!(m.advantage, f64::from(t.reward) - m.q_value);
    let (_, states) = expected.candidate_states(&corpus, &obs).unwrap();
    let grads = actor_gradients(&expected.actor, &states, t.chosen, m.advantage).unwrap();
    expected.actor.apply(&grads, cfg.lr_actor);
    assert_eq!(model.actor, expected.actor);
}

/// Topic words aligned with the single filter, filler at an angle, the
/// negation orthogonal: every match outscores every other candidate.
fn oracle_model(corpus: &Corpus) -> Model {
    let cfg = TrainConfig {
        k: 2,
        rank: 1,
        ..TrainConfig::default()
    };
    let mut model = Model::init(&cfg, corpus.vocabulary().clone(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let vocab = model.vocab.clone();
    for (id, w) in vocab.words().iter().enumerate().skip(1) {
        let row = if w.starts_with('t') {
            [1.0, 0.0]
        } else if w == NEGATION {
            [0.0, 1.0]
        } else {
            [0.6, 0.8]
        };
        model.actor.table.set_row(id, &row).unwrap();
    }
    let global = GlobalRepresentation::new(2, cfg.order, vec![1.0], [1.0, 0.0].repeat(cfg.order)).unwrap();
    model.actor = ActorParams::new(model.actor.table.clone(), global, cfg.temperature).unwrap();
    model
}

#[test]
fn oracle_parameters_score_perfectly() {
    let corpus = toy_corpus(4);
    let model = oracle_model(&corpus);
    let cfg = TrainConfig::default();
    let a = evaluate(&model, &corpus, &cfg).unwrap();
    assert_eq!(a.greedy_accuracy, 1.0);
    assert_eq!(a.mean_reward, 1.0);
    assert_eq!(evaluate(&model, &corpus, &cfg).unwrap(), a);
}

#[test]
fn untrained_reward_is_in_range() {
    let corpus = toy_corpus(5);
    let cfg = TrainConfig::default();
    let model = Model::init(&cfg, corpus.vocabulary().clone(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let m = evaluate(&model, &corpus, &cfg).unwrap();
    assert!((-1.0..=1.0).contains(&m.mean_reward));
    let empty = crate::env::parse_corpus("").unwrap();
    assert!(matches!(evaluate(&model, &empty, &cfg), Err(Error::EmptyCorpus)));
}

#[test]
fn disabled_evaluation_logs_nothing() {
    let corpus = toy_corpus(6);
    let cfg = TrainConfig {
        eval_interval: 0,
        ..small_config()
    };
    let out = train(&cfg, &corpus).unwrap();
    assert!(out.records.is_empty());
    assert_eq!(out.rewards.len(), cfg.episodes);
}

#[test]
fn training_is_deterministic_and_logs_the_last_episode() {
    let corpus = toy_corpus(7);
    let cfg = TrainConfig {
        episodes: 25,
        ..small_config()
    };
    let a = train(&cfg, &corpus).unwrap();
    let b = train(&cfg, &corpus).unwrap();
    assert_eq!(write_checkpoint(&a.checkpoint), write_checkpoint(&b.checkpoint));
    assert_eq!(format_metrics(&cfg, &a.records), format_metrics(&cfg, &b.records));
    let episodes: Vec<usize> = a.records.iter().map(|r| r.episode).collect();
    assert_eq!(episodes, [10, 20, 25]);
}

#[test]
fn session_mode_runs_whole_patches() {
    let corpus = toy_corpus(8);
    let cfg = TrainConfig {
        mode: Mode::Session,
        episodes: 2,
        ..small_config()
    };
    let out = train(&cfg, &corpus).unwrap();
    assert_eq!(out.rewards.len(), corpus.len());
    assert!(out.checkpoint.model.norms_hold(1e-9));
}

#[test]
fn checkpoint_round_trip_is_bitwise() {
    let corpus = toy_corpus(9);
    let out = train(&small_config(), &corpus).unwrap();
    let text = write_checkpoint(&out.checkpoint);
    let back = parse_checkpoint(&text).unwrap();
    assert_eq!(back, out.checkpoint);
    assert_eq!(write_checkpoint(&back), text);
    assert_eq!(back.rng.restore(), RngState::capture(&back.rng.restore()).restore());
}

#[test]
fn damaged_checkpoints_are_rejected() {
    let corpus = toy_corpus(10);
    let text = write_checkpoint(&train(&small_config(), &corpus).unwrap().checkpoint);
    let cut = &text[..text.len() / 2];
    assert!(matches!(parse_checkpoint(cut), Err(Error::ParseError { .. })));
    let wrong = text.replacen(HEADER, "qforage-checkpoint v2", 1);
    assert!(matches!(parse_checkpoint(&wrong), Err(Error::VersionMismatch { .. })));
}
