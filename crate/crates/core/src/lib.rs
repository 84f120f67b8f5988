//! Structured-attention machine translation primitives.
//!
//! The crate is `no_std` (it needs `alloc`) and contains everything that is
//! pure computation:
//!
//! * [`semgraph`]: UCCA graph and CoNLL-U ingestion, scene extraction,
//!   scene-graph distances and scene-based sentence splitting.
//! * [`masks`]: binary, scaled and normally-distributed scene masks, the
//!   PASCAL and UDISCAL dependency masks, and word-to-subword expansion.
//! * [`numcore`]: a dense `f64` tensor with a reverse-mode tape.
//! * [`model`]: an encoder-decoder transformer whose selected heads are
//!   scene-aware (masked self-attention, scene-aggregated cross-attention
//!   keys), plus training and beam search.
//! * [`textpipe`]: corpus filtering, BPE and word/subword alignment.
//! * [`eval`]: BLEU, chrF and the paired sign test.
//!
//! File IO and the command-line front end live in the `scenemt` crate.
#![no_std]

extern crate alloc;

pub mod error;
pub mod eval;
pub mod masks;
pub mod model;
pub mod numcore;
pub mod semgraph;
pub mod textpipe;

pub use error::{Error, Result};
