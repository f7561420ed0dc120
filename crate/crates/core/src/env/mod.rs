//! Patchy-corpus environment.
//!
//! Each episode hands the agent a document together with its labeled
//! candidate queries; choosing a candidate yields that candidate's label as
//! the reward.

mod corpus;
mod generate;
mod scent;

pub use corpus::{load_corpus, parse_corpus, tokenize, write_corpus, Candidate, Corpus, Document};
pub use generate::{gen_corpus, overlap, overlap_fits, GenSpec, NEGATION};
pub use scent::{Scent, ScentStats};

use crate::error::{Error, Result};
use crate::label::Label;
use rand::seq::SliceRandom;
use rand::Rng;
use std::fmt;
use std::str::FromStr;

pub const DEFAULT_KEYWORDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One-step episodes on uniformly drawn documents.
    Bandit,
    /// Documents visited patch by patch; an episode ends with its patch.
    Session,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bandit" => Ok(Mode::Bandit),
            "session" => Ok(Mode::Session),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Bandit => "bandit",
            Mode::Session => "session",
        })
    }
}

/// What the agent sees of one document, with candidate order shuffled.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Index into [`Corpus::documents`].
    pub doc: usize,
    /// Vocabulary ids of the document's keyword summary.
    pub keywords: Vec<usize>,
    /// Vocabulary ids of every candidate, in presentation order.
    pub candidates: Vec<Vec<usize>>,
    /// Position of each presented candidate in the document's own list.
    pub order: Vec<usize>,
    /// Whether stepping ends the episode.
    pub last: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub doc_id: String,
    pub patch: String,
    pub candidates: Vec<Vec<usize>>,
    pub chosen: usize,
    pub reward: i8,
    /// Critic class probabilities for the chosen candidate, once measured.
    pub critic_probabilities: Option<[f64; 3]>,
    pub log_prob: f64,
    pub done: bool,
}

pub struct Environment<'a> {
    corpus: &'a Corpus,
    mode: Mode,
    keywords: usize,
    /// Session visiting order: document indices grouped by patch.
    schedule: Vec<usize>,
    cursor: usize,
}

impl<'a> Environment<'a> {
    pub fn new(corpus: &'a Corpus, mode: Mode, keywords: usize) -> Self {
        let mut schedule = Vec::with_capacity(corpus.len());
        for patch in corpus.patches() {
            schedule.extend((0..corpus.len()).filter(|&i| corpus.documents()[i].patch == patch));
        }
        Environment {
            corpus,
            mode,
            keywords,
            schedule,
            cursor: 0,
        }
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Draws the next document: uniformly in bandit mode, the next one in
    /// patch order in session mode.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Observation> {
        if self.corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let (doc, last) = match self.mode {
            Mode::Bandit => (rng.random_range(0..self.corpus.len()), true),
            Mode::Session => {
                let doc = self.schedule[self.cursor];
                self.cursor = (self.cursor + 1) % self.schedule.len();
                let next = self.schedule[self.cursor];
                let docs = self.corpus.documents();
                (doc, self.cursor == 0 || docs[next].patch != docs[doc].patch)
            }
        };
        let mut order: Vec<usize> = (0..self.corpus.documents()[doc].candidates.len()).collect();
        order.shuffle(rng);
        Ok(self.observe(doc, order, last))
    }

    /// Observation of document `doc` with candidates in stored order.
    pub fn observe_in_order(&self, doc: usize) -> Observation {
        let n = self.corpus.documents()[doc].candidates.len();
        self.observe(doc, (0..n).collect(), true)
    }

    fn observe(&self, doc: usize, order: Vec<usize>, last: bool) -> Observation {
        let vocab = self.corpus.vocabulary();
        let d = &self.corpus.documents()[doc];
        let ids = |tokens: &[String]| tokens.iter().map(|t| vocab.lookup(t)).collect::<Vec<_>>();
        Observation {
            doc,
            keywords: d.keywords(self.keywords).into_iter().map(|t| vocab.lookup(t)).collect(),
            candidates: order.iter().map(|&i| ids(&d.candidates[i].tokens)).collect(),
            order,
            last,
        }
    }

    /// Hidden label of the presented candidate at `index`.
    pub fn label(&self, obs: &Observation, index: usize) -> Result<Label> {
        let slot = *obs.order.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: obs.order.len(),
        })?;
        Ok(self.corpus.documents()[obs.doc].candidates[slot].label)
    }

    /// Reward for choosing the presented candidate `index`.
    pub fn step(&self, obs: &Observation, index: usize) -> Result<(i8, Transition)> {
        let reward = self.label(obs, index)?.reward();
        let d = &self.corpus.documents()[obs.doc];
        Ok((
            reward,
            Transition {
                doc_id: d.id.clone(),
                patch: d.patch.clone(),
                candidates: obs.candidates.clone(),
                chosen: index,
                reward,
                critic_probabilities: None,
                log_prob: 0.0,
                done: obs.last,
            },
        ))
    }
}

pub fn scent_stats(transitions: &[Transition], lambda: f64) -> ScentStats {
    ScentStats::from_rewards(transitions.iter().map(|t| (t.patch.as_str(), t.reward)), lambda)
}
