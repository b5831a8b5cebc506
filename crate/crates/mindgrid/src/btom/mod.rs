//! Observer-side theory of mind: particle beliefs and inverse planning.

mod belief;
mod bsips;

pub use belief::{enumerate_beliefs, Belief};
pub use bsips::{
    run_inference, AgentVariant, Hypothesis, InferenceConfig, InferenceError, Posterior,
};
