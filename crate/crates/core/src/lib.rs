//! Compositional demographic word embeddings.
//!
//! The pipeline reads a post corpus ([`corpus`]), extracts self-reported
//! speaker demographics ([`demographics`]), builds a frequency-ordered
//! vocabulary with a Huffman tree ([`vocab`]), trains skip-gram models with a
//! hierarchical softmax ([`skipgram`]), and analyses the result through
//! nearest neighbours, per-user composition ([`store`]) and word-association
//! scoring ([`assoc`]).

pub mod assoc;
pub mod corpus;
pub mod demographics;
pub mod error;
pub mod pipeline;
pub mod skipgram;
pub mod store;
pub mod vocab;

pub use error::{Error, ErrorClass, Result};
