use crate::actor::{MAX_TEMPERATURE, MIN_TEMPERATURE};
use crate::env::Mode;
use crate::error::{Error, Result};
use std::path::PathBuf;

/// Hyperparameters of a training run. Everything except the checkpoint
/// location is echoed into output artifacts as `key=value` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub episodes: usize,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub temperature: f64,
    /// Scent smoothing `λ ∈ (0, 1]`.
    pub scent_lambda: f64,
    /// Session-mode discount.
    pub gamma: f64,
    pub seed: u64,
    pub mode: Mode,
    /// Episodes between evaluation records; 0 disables evaluation.
    pub eval_interval: usize,
    pub checkpoint_path: Option<PathBuf>,
    /// Basis meanings per word on the actor side.
    pub k: usize,
    /// Query tensor order.
    pub order: usize,
    pub rank: usize,
    /// Scale of the initial Gaussian rank weights.
    pub weight_scale: f64,
    /// Complex embedding dimension of the critic, divisible by 3.
    pub critic_dim: usize,
    /// Document keywords fed to the critic as state tokens.
    pub keywords: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 2000,
            lr_actor: 0.04,
            lr_critic: 0.1,
            temperature: 0.05,
            scent_lambda: 0.3,
            gamma: 0.9,
            seed: 0,
            mode: Mode::Bandit,
            eval_interval: 100,
            checkpoint_path: None,
            k: 8,
            order: 5,
            rank: 10,
            weight_scale: 1.0,
            critic_dim: 12,
            keywords: 5,
        }
    }
}

/// Keys accepted by [`TrainConfig::set`], in echo order.
pub const KEYS: [&str; 15] = [
    "episodes",
    "lr_actor",
    "lr_critic",
    "temperature",
    "scent_lambda",
    "gamma",
    "seed",
    "mode",
    "eval_interval",
    "k",
    "order",
    "rank",
    "weight_scale",
    "critic_dim",
    "keywords",
];

impl TrainConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {value:?}")))
        }
        match key {
            "episodes" => self.episodes = num(key, value)?,
            "lr_actor" => self.lr_actor = num(key, value)?,
            "lr_critic" => self.lr_critic = num(key, value)?,
            "temperature" => self.temperature = num(key, value)?,
            "scent_lambda" => self.scent_lambda = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "mode" => self.mode = value.trim().parse()?,
            "eval_interval" => self.eval_interval = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "order" => self.order = num(key, value)?,
            "rank" => self.rank = num(key, value)?,
            "weight_scale" => self.weight_scale = num(key, value)?,
            "critic_dim" => self.critic_dim = num(key, value)?,
            "keywords" => self.keywords = num(key, value)?,
            "checkpoint_path" => self.checkpoint_path = Some(PathBuf::from(value.trim())),
            other => return Err(Error::InvalidConfig(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Echoed configuration. Floats use Rust's shortest round-trip form.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        KEYS.iter()
            .map(|&k| {
                let v = match k {
                    "episodes" => self.episodes.to_string(),
                    "lr_actor" => self.lr_actor.to_string(),
                    "lr_critic" => self.lr_critic.to_string(),
                    "temperature" => self.temperature.to_string(),
                    "scent_lambda" => self.scent_lambda.to_string(),
                    "gamma" => self.gamma.to_string(),
                    "seed" => self.seed.to_string(),
                    "mode" => self.mode.to_string(),
                    "eval_interval" => self.eval_interval.to_string(),
                    "k" => self.k.to_string(),
                    "order" => self.order.to_string(),
                    "rank" => self.rank.to_string(),
                    "weight_scale" => self.weight_scale.to_string(),
                    "critic_dim" => self.critic_dim.to_string(),
                    "keywords" => self.keywords.to_string(),
                    _ => unreachable!(),
                };
                (k.to_string(), v)
            })
            .collect()
    }

    /// Rebuilds a configuration from echoed pairs.
    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, &'a str)>>(pairs: I) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.episodes == 0 {
            return bad("episodes must be at least 1");
        }
        // zero rates are accepted so a run can freeze one side
        if !(self.lr_actor >= 0.0 && self.lr_critic >= 0.0) {
            return bad("learning rates must be nonnegative");
        }
        if !(MIN_TEMPERATURE..=MAX_TEMPERATURE).contains(&self.temperature) {
            return bad("temperature must lie in [1e-3, 1e3]");
        }
        if !(self.scent_lambda > 0.0 && self.scent_lambda <= 1.0) {
            return bad("scent_lambda must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.k == 0 || self.order == 0 || self.rank == 0 || self.keywords == 0 {
            return bad("k, order, rank and keywords must be at least 1");
        }
        if !self.weight_scale.is_finite() {
            return bad("weight_scale must be finite");
        }
        if self.critic_dim == 0 || !self.critic_dim.is_multiple_of(3) {
            return Err(Error::DimensionNotDivisible(self.critic_dim));
        }
        Ok(())
    }
}
