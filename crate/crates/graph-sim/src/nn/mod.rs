//! Minimal differentiable-computation substrate: dense f64 tensors, the
//! layers the predictor needs with hand-chained analytic gradients, Adam,
//! and the binary checkpoint format. Everything is finite-difference
//! verified in the test suites.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod tensor;

pub use adam::{AdamError, AdamState};
pub use checkpoint::{Checkpoint, CheckpointError};
pub use layers::{
    glorot_uniform, prelu, sigmoid, softmax, Attention, Dense, GraphConv, Lstm, PRelu, Parameter,
    TemporalConv,
};
pub use loss::{bce_loss, bce_loss_batch, bce_with_logit, ClassWeights};
pub use tensor::{Tensor, TensorError};
