//! Quantum-probabilistic actor-critic engine for semantic query matching.
//!
//! An actor scores candidate queries through tensor-product word states and a
//! CP-factored global semantic space; a critic measures (state, action) pairs
//! through density matrices of complex word embeddings under the Born rule;
//! a patchy-corpus environment hands out `-1 / 0 / +1` rewards; the trainer
//! ties the three together with a policy-gradient loop.
//!
//! The accompanying guide in `book/` walks through each layer; its code
//! listings are compiled and run as doc-tests of this crate.

pub mod actor;
pub mod critic;
pub mod env;
mod error;
pub mod label;
pub mod oracle;
pub mod qcore;
pub mod qrep;
pub mod rng;
pub mod trainer;
pub mod vocab;

pub use error::{Error, Result};
pub use label::Label;
pub use vocab::Vocabulary;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hilbert-space.md")]
    mod hilbert_space {}
    #[doc = include_str!("../../../book/src/query-representation.md")]
    mod query_representation {}
    #[doc = include_str!("../../../book/src/actor.md")]
    mod actor {}
    #[doc = include_str!("../../../book/src/critic.md")]
    mod critic {}
    #[doc = include_str!("../../../book/src/environment.md")]
    mod environment {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
}
