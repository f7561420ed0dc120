use super::corpus::{Candidate, Corpus, Document};
use crate::error::{Error, Result};
use crate::label::Label;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

/// The polarity token that turns an on-topic query into a mismatch.
pub const NEGATION: &str = "not";

/// Shape of a synthetic corpus.
///
/// The vocabulary is split into one topical cluster per patch plus a shared
/// pool of filler words. Documents draw their text from their patch's
/// cluster; candidates mix document tokens with filler in proportions that
/// fix their label.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub docs: usize,
    pub patches: usize,
    pub vocab_size: usize,
    pub candidates: usize,
    /// Probability of replacing each query token by a random vocabulary word.
    pub noise: f64,
    pub doc_len: usize,
    pub query_len: usize,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            docs: 50,
            patches: 2,
            vocab_size: 60,
            candidates: 3,
            noise: 0.0,
            doc_len: 12,
            query_len: 5,
        }
    }
}

impl GenSpec {
    fn cluster_size(&self) -> usize {
        self.vocab_size / (self.patches + 1)
    }

    fn filler_size(&self) -> usize {
        self.vocab_size - self.patches * self.cluster_size()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SpecInvalid(m));
        if self.docs == 0 || self.patches == 0 || self.doc_len == 0 {
            return bad("docs, patches and doc_len must be at least 1".into());
        }
        if self.patches > self.docs {
            return bad(format!("{} patches for {} documents", self.patches, self.docs));
        }
        if self.candidates < 2 {
            return bad("each document needs at least 2 candidates".into());
        }
        if self.query_len < 3 {
            return bad("query_len must be at least 3 to separate the three labels".into());
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return bad(format!("noise {} outside [0, 1]", self.noise));
        }
        if self.cluster_size() < 2 || self.filler_size() < self.query_len {
            return bad(format!(
                "vocabulary of {} is too small for {} patches and queries of {} tokens",
                self.vocab_size, self.patches, self.query_len
            ));
        }
        Ok(())
    }
}

/// Fraction of query tokens that occur in the document, as the exact ratio
/// `(shared, total)`.
pub fn overlap(query: &[String], doc: &[String]) -> (usize, usize) {
    (query.iter().filter(|t| doc.contains(t)).count(), query.len())
}

/// Whether `(shared, total)` lies in the overlap band of `label`:
/// match `≥ 60%`, partial `[20%, 60%)`, mismatch `< 20%` (mismatches may
/// instead carry the negation token).
pub fn overlap_fits(label: Label, shared: usize, total: usize, negated: bool) -> bool {
    let (s5, t) = (5 * shared, total);
    match label {
        Label::Match => s5 >= 3 * t,
        Label::Partial => s5 >= t && s5 < 3 * t,
        Label::Mismatch => negated || s5 < t,
    }
}

pub fn gen_corpus<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> Result<Corpus> {
    spec.validate()?;
    let cluster = spec.cluster_size();
    let topics: Vec<Vec<String>> = (0..spec.patches)
        .map(|p| (0..cluster).map(|j| format!("t{p}_{j}")).collect())
        .collect();
    let filler: Vec<String> = (0..spec.filler_size()).map(|j| format!("c{j}")).collect();
    let all_words: Vec<&String> = topics.iter().flatten().chain(&filler).collect();

    let l = spec.query_len;
    let match_min = (3 * l).div_ceil(5);
    let partial_min = l.div_ceil(5);

    let mut documents = Vec::with_capacity(spec.docs);
    for i in 0..spec.docs {
        let patch = i * spec.patches / spec.docs;
        let tokens: Vec<String> = (0..spec.doc_len)
            .map(|_| topics[patch].choose(rng).expect("non-empty cluster").clone())
            .collect();
        let mut distinct: Vec<String> = Vec::new();
        for t in &tokens {
            if !distinct.contains(t) {
                distinct.push(t.clone());
            }
        }

        let mut labels = vec![Label::Match, Label::Partial, Label::Mismatch];
        if spec.candidates == 2 {
            labels.truncate(1);
            labels.push(*[Label::Partial, Label::Mismatch].choose(rng).expect("two labels"));
        }
        while labels.len() < spec.candidates {
            labels.push(*Label::ALL.choose(rng).expect("three labels"));
        }

        let mut candidates: Vec<Candidate> = labels
            .into_iter()
            .map(|label| {
                let mut words: Vec<String> = match label {
                    Label::Match => mix(rng.random_range(match_min..=l), l, &distinct, &filler, rng),
                    Label::Partial => mix(rng.random_range(partial_min..match_min), l, &distinct, &filler, rng),
                    Label::Mismatch if rng.random_bool(0.5) => {
                        let mut w = mix(l - 1, l - 1, &distinct, &filler, rng);
                        w.insert(rng.random_range(0..l), NEGATION.to_string());
                        w
                    }
                    Label::Mismatch => mix(0, l, &distinct, &filler, rng),
                };
                if spec.noise > 0.0 {
                    for w in words.iter_mut() {
                        if rng.random_bool(spec.noise) {
                            *w = (*all_words.choose(rng).expect("non-empty vocabulary")).clone();
                        }
                    }
                }
                Candidate {
                    text: words.join(" "),
                    tokens: words,
                    label,
                }
            })
            .collect();
        candidates.shuffle(rng);

        documents.push(Document {
            id: format!("d{i:03}"),
            patch: format!("p{patch}"),
            text: tokens.join(" "),
            tokens,
            candidates,
        });
    }
    Corpus::new(documents)
}

/// `shared` document tokens and `len − shared` filler tokens in random order.
fn mix<R: Rng + ?Sized>(
    shared: usize,
    len: usize,
    doc: &[String],
    filler: &[String],
    rng: &mut R,
) -> Vec<String> {
    let mut words = Vec::with_capacity(len);
    for i in 0..len {
        let pool = if i < shared { doc } else { filler };
        words.push(pool.choose(rng).expect("non-empty word pool").clone());
    }
    words.shuffle(rng);
    words
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::corpus::{parse_corpus, write_corpus};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_of_each_label() {
        let spec = GenSpec {
            docs: 1,
            patches: 1,
            ..GenSpec::default()
        };
        let c = gen_corpus(&spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let mut labels: Vec<Label> = c.documents()[0].candidates.iter().map(|c| c.label).collect();
        labels.sort();
        assert_eq!(labels, Label::ALL.to_vec());
    }

    #[test]
    fn same_seed_same_file() {
        let spec = GenSpec::default();
        let a = gen_corpus(&spec, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = gen_corpus(&spec, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(write_corpus(&a, &[]), write_corpus(&b, &[]));
    }

    #[test]
    fn noiseless_candidates_fit_their_band() {
        for seed in 0..10 {
            let spec = GenSpec {
                candidates: 5,
                ..GenSpec::default()
            };
            let c = gen_corpus(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            for d in c.documents() {
                for cand in &d.candidates {
                    let (s, t) = overlap(&cand.tokens, &d.tokens);
                    let negated = cand.tokens.iter().any(|w| w == NEGATION);
                    assert!(overlap_fits(cand.label, s, t, negated), "{cand:?}");
                }
            }
            assert_eq!(parse_corpus(&write_corpus(&c, &[])).unwrap(), c);
        }
    }

    #[test]
    fn rejects_degenerate_specs() {
        for spec in [
            GenSpec { docs: 0, ..GenSpec::default() },
            GenSpec { candidates: 1, ..GenSpec::default() },
            GenSpec { vocab_size: 6, ..GenSpec::default() },
            GenSpec { noise: 1.5, ..GenSpec::default() },
        ] {
            assert!(matches!(spec.validate(), Err(Error::SpecInvalid(_))));
        }
    }
}
