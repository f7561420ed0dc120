use crate::error::{Error, Result};
use crate::label::Label;
use crate::vocab::Vocabulary;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Query text as written in the corpus file.
    pub text: String,
    pub tokens: Vec<String>,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub patch: String,
    pub text: String,
    pub tokens: Vec<String>,
    pub candidates: Vec<Candidate>,
}

impl Document {
    /// The `m` most frequent distinct tokens, ties broken by first
    /// appearance.
    pub fn keywords(&self, m: usize) -> Vec<&str> {
        let mut counts: Vec<(&str, usize)> = Vec::new();
        let mut slot: HashMap<&str, usize> = HashMap::new();
        for t in &self.tokens {
            match slot.get(t.as_str()) {
                Some(&i) => counts[i].1 += 1,
                None => {
                    slot.insert(t, counts.len());
                    counts.push((t, 1));
                }
            }
        }
        // stable sort keeps first-appearance order among equal counts
        counts.sort_by_key(|c| std::cmp::Reverse(c.1));
        counts.into_iter().take(m).map(|(t, _)| t).collect()
    }

    pub fn has_positive(&self) -> bool {
        self.candidates.iter().any(|c| c.label == Label::Match)
    }
}

/// Lowercased whitespace tokenization.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Validated documents plus the vocabulary of every token they use, in order
/// of first appearance after the reserved entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Vocabulary,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        for doc in &documents {
            validate_document(doc)?;
        }
        let mut vocabulary = Vocabulary::new();
        for doc in &documents {
            for t in doc.tokens.iter().chain(doc.candidates.iter().flat_map(|c| &c.tokens)) {
                vocabulary.insert(t);
            }
        }
        Ok(Corpus {
            documents,
            vocabulary,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn find(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Patch ids in order of first appearance.
    pub fn patches(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for d in &self.documents {
            if !seen.contains(&d.patch.as_str()) {
                seen.push(&d.patch);
            }
        }
        seen
    }
}

fn validate_document(doc: &Document) -> Result<()> {
    if !doc.has_positive() {
        return Err(Error::MissingPositiveCandidate { doc: doc.id.clone() });
    }
    if doc.candidates.len() < 2 {
        return Err(Error::TooFewCandidates { doc: doc.id.clone() });
    }
    Ok(())
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

/// Parses the tab-separated corpus format
/// `doc_id  patch_id  doc_text  candidate_query  label`, one candidate per
/// line. Blank lines and lines starting with `#` are skipped.
pub fn parse_corpus(input: &str) -> Result<Corpus> {
    let mut documents: Vec<Document> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let parse_error = |message: String| Error::ParseError { line, message };
        if fields.len() != 5 {
            return Err(parse_error(format!("expected 5 tab-separated fields, found {}", fields.len())));
        }
        let [doc_id, patch, text, query, label] = [fields[0], fields[1], fields[2], fields[3], fields[4]];
        let label = label
            .trim()
            .parse::<i64>()
            .ok()
            .and_then(|r| Label::from_reward(r).ok())
            .ok_or_else(|| Error::BadLabel {
                line,
                label: label.to_string(),
            })?;
        if doc_id.trim().is_empty() {
            return Err(parse_error("empty document id".into()));
        }
        let tokens = tokenize(query);
        if tokens.is_empty() {
            return Err(parse_error("empty candidate query".into()));
        }
        let candidate = Candidate {
            text: query.to_string(),
            tokens,
            label,
        };
        match by_id.get(doc_id) {
            Some(&i) => {
                let doc = &mut documents[i];
                if doc.text != text {
                    return Err(parse_error(format!("text of document {doc_id} differs from earlier lines")));
                }
                if doc.patch != patch {
                    return Err(parse_error(format!("patch of document {doc_id} differs from earlier lines")));
                }
                doc.candidates.push(candidate);
            }
            None => {
                let tokens = tokenize(text);
                if tokens.is_empty() {
                    return Err(parse_error("empty document text".into()));
                }
                by_id.insert(doc_id.to_string(), documents.len());
                documents.push(Document {
                    id: doc_id.to_string(),
                    patch: patch.to_string(),
                    text: text.to_string(),
                    tokens,
                    candidates: vec![candidate],
                });
            }
        }
    }
    Corpus::new(documents)
}

/// Serializes in the format read by [`parse_corpus`], preceded by one
/// `# key=value` comment line per header entry.
pub fn write_corpus(corpus: &Corpus, header: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k}={v}");
    }
    for d in corpus.documents() {
        for c in &d.candidates {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", d.id, d.patch, d.text, c.text, c.label);
        }
    }
    out
}
