use std::collections::HashMap;

/// Padding token id; its amplitude row is pinned to the first basis vector.
pub const NULL_ID: usize = 0;
/// Out-of-vocabulary token id.
pub const UNK_ID: usize = 1;

pub const NULL_TOKEN: &str = "<null>";
pub const UNK_TOKEN: &str = "<unk>";

/// Bidirectional token/id map with the two reserved entries at ids 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        let mut v = Vocabulary {
            words: Vec::new(),
            index: HashMap::new(),
        };
        v.insert(NULL_TOKEN);
        v.insert(UNK_TOKEN);
        v
    }

    /// Rebuilds a vocabulary from its word list, which must start with the
    /// reserved tokens and contain no duplicates.
    pub fn from_words<I, S>(words: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Vocabulary {
            words: Vec::new(),
            index: HashMap::new(),
        };
        for w in words {
            let w = w.into();
            if v.index.contains_key(&w) {
                return None;
            }
            v.insert(&w);
        }
        (v.words.len() >= 2 && v.words[NULL_ID] == NULL_TOKEN && v.words[UNK_ID] == UNK_TOKEN)
            .then_some(v)
    }

    /// Returns the id of `word`, adding it if new.
    pub fn insert(&mut self, word: &str) -> usize {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len();
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        id
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Id of `word`, or [`UNK_ID`] when unseen.
    pub fn lookup(&self, word: &str) -> usize {
        self.get(word).unwrap_or(UNK_ID)
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        // the reserved tokens are always present
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_ids() {
        let mut v = Vocabulary::new();
        assert_eq!(v.lookup(NULL_TOKEN), NULL_ID);
        assert_eq!(v.lookup("cats"), UNK_ID);
        let cats = v.insert("cats");
        assert_eq!(cats, 2);
        assert_eq!(v.insert("cats"), 2);
        assert_eq!(v.word(2), Some("cats"));
    }

    #[test]
    fn rebuild_from_words() {
        let mut v = Vocabulary::new();
        v.insert("dogs");
        let w = Vocabulary::from_words(v.words().to_vec()).unwrap();
        assert_eq!(v, w);
        assert!(Vocabulary::from_words(["dogs", "cats"]).is_none());
        assert!(Vocabulary::from_words([NULL_TOKEN, UNK_TOKEN, "a", "a"]).is_none());
    }
}
