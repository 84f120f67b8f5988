//! Encoder-decoder transformer with scene-aware heads.
//!
//! Individual heads are redirected by [`HeadSpec`]s:
//!
//! * encoder self-attention heads multiply their post-softmax weights by a
//!   mask (scene masks for SASA, PASCAL or UDISCAL masks for the
//!   syntactic baselines);
//! * cross-attention heads drop their key projection and attend over
//!   scene-aggregated encoder states `M * X_enc / L_src` (SACrA).

mod attention;
mod beam;
mod config;
mod copytask;
mod optim;
mod train;
mod transformer;

pub use attention::{
    sacra_attention, sacra_keys, sasa_attention, scaled_dot_attention, AttentionOutput,
};
pub use beam::{beam_search, greedy_decode, length_penalty, Hypothesis, StepScorer};
pub use config::{validate_head_specs, DecodeConfig, HeadSpec, ModelConfig, Site, TrainConfig};
pub use copytask::{copy_task, window_cover};
pub use optim::{lr_schedule, Adam};
pub use train::{token_accuracy, train, MaskProvider, TrainExample, TrainReport};
pub use transformer::{Transformer, BOS, EOS};
