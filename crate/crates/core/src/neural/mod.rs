//! Minimal differentiable core: parameters, a forward-only and a reverse-mode
//! backend, recurrent layers, and the optimizer.

pub mod gradcheck;
mod lstm;
mod ops;
mod optim;
mod params;
mod stack;
mod tape;
mod vocab;

pub use lstm::{encode_utterance, BiEncoder, LstmParams};
pub use ops::{argmax, log_sigmoid, log_softmax, logsumexp, sigmoid, Eval, Ops};
pub use optim::{dropout_mask, MomentumSgd, PlateauSchedule};
pub use params::{Gradients, NeuralError, ParamId, ParamStore, Tensor, INIT_SCALE};
pub use stack::{StackEncoder, StackState};
pub use tape::{NodeId, Tape};
pub use vocab::{Vocab, UNK};
