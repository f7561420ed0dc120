use super::Model;
use crate::actor::{actor_forward, policy};
use crate::critic::{critic_density, measure_classes};
use crate::env::Document;
use crate::error::{Error, Result};
use crate::qrep::{embed_ids, QueryState};
use std::fmt::Write as _;

/// Off-diagonal entries of ρ listed per candidate.
pub const TOP_OFF_DIAGONAL: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateReport {
    pub text: String,
    pub score: f64,
    pub probability: f64,
    /// Per-rank product pool, length `R`.
    pub pooled: Vec<f64>,
    /// Critic class probabilities (mismatch, partial, match).
    pub critic: [f64; 3],
    pub rho_diagonal: Vec<f64>,
    /// `(i, j, |ρ_ij|)` for `i < j`, largest first.
    pub off_diagonal: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InspectReport {
    pub doc_id: String,
    pub keywords: Vec<String>,
    pub candidates: Vec<CandidateReport>,
}

/// Diagnostics for one document under `model`. The document need not
/// belong to a valid corpus, so single-candidate documents are accepted.
pub fn inspect(model: &Model, doc: &Document, keywords: usize) -> Result<InspectReport> {
    if doc.candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let lookup = |tokens: &[String]| tokens.iter().map(|t| model.vocab.lookup(t)).collect::<Vec<_>>();
    let keyword_words: Vec<String> = doc.keywords(keywords).into_iter().map(String::from).collect();
    let state = lookup(&keyword_words);
    let ids: Vec<Vec<usize>> = doc.candidates.iter().map(|c| lookup(&c.tokens)).collect();
    let states: Vec<QueryState> = ids
        .iter()
        .map(|c| embed_ids(c, &model.actor.table, model.actor.order()))
        .collect::<Result<_>>()?;
    let forward = actor_forward(&model.actor, &states)?;
    let probs = policy(&forward.scores, model.actor.temperature())?;

    let mut candidates = Vec::with_capacity(ids.len());
    for (i, action) in ids.iter().enumerate() {
        let rho = critic_density(&state, action, &model.critic)?;
        let d = rho.dim();
        let mut off: Vec<(usize, usize, f64)> = (0..d)
            .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, rho.get(i, j).norm()))
            .collect();
        off.sort_by(|a, b| b.2.total_cmp(&a.2));
        off.truncate(TOP_OFF_DIAGONAL);
        candidates.push(CandidateReport {
            text: doc.candidates[i].text.clone(),
            score: forward.scores[i],
            probability: probs[i],
            pooled: forward.pooled[i].clone(),
            critic: measure_classes(&rho)?.probabilities,
            rho_diagonal: rho.diagonal(),
            off_diagonal: off,
        });
    }
    Ok(InspectReport {
        doc_id: doc.id.clone(),
        keywords: keyword_words,
        candidates,
    })
}

impl InspectReport {
    /// Tab-separated text; numbers use the shortest round-trip form.
    pub fn render(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "document\t{}", self.doc_id);
        let _ = writeln!(out, "keywords\t{}", self.keywords.join(" "));
        for (i, c) in self.candidates.iter().enumerate() {
            let _ = writeln!(out, "candidate {i}\t{}", c.text);
            let _ = writeln!(out, "  score\t{}", c.score);
            let _ = writeln!(out, "  policy\t{}", c.probability);
            let _ = writeln!(out, "  pooled\t{}", list(&c.pooled));
            let _ = writeln!(out, "  critic_p\t{}", list(&c.critic));
            let _ = writeln!(out, "  rho_diag\t{}", list(&c.rho_diagonal));
            let off: Vec<String> = c
                .off_diagonal
                .iter()
                .map(|(i, j, m)| format!("({i},{j})={m}"))
                .collect();
            let _ = writeln!(out, "  rho_offdiag\t{}", off.join(" "));
        }
        out
    }
}
