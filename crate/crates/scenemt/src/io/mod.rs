//! Text and binary formats read and written by the command-line tool.

mod checkpoint;
mod corpus;
mod manifest;
mod maskfile;
mod modelfile;
mod report;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use corpus::{read_lines, read_text, write_text, Vocab, BOS_TOKEN, EOS_TOKEN};
pub use manifest::Manifest;
pub use maskfile::{format_mask, parse_mask, parse_masks};
pub use modelfile::{format_head_spec, format_model_file, parse_head_spec, parse_model_file};
pub use report::{format_per_sentence, parse_score_file, ScoreLine};
