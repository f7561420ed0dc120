use crate::error::{Error, Result};
use std::fmt;

/// Relevance judgment of a candidate query; doubles as the reward and as the
/// critic's measurement class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Mismatch,
    Partial,
    Match,
}

impl Label {
    /// Classes in measurement-block order.
    pub const ALL: [Label; 3] = [Label::Mismatch, Label::Partial, Label::Match];

    pub fn from_reward(r: i64) -> Result<Label> {
        match r {
            -1 => Ok(Label::Mismatch),
            0 => Ok(Label::Partial),
            1 => Ok(Label::Match),
            other => Err(Error::InvalidLabel(other)),
        }
    }

    pub fn reward(self) -> i8 {
        match self {
            Label::Mismatch => -1,
            Label::Partial => 0,
            Label::Match => 1,
        }
    }

    /// Index of the coordinate block measured for this class.
    pub fn class_index(self) -> usize {
        match self {
            Label::Mismatch => 0,
            Label::Partial => 1,
            Label::Match => 2,
        }
    }

    pub fn from_class_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.reward())
    }
}
