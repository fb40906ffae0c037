//! Top-down and bottom-up transition systems over FunQL trees.

mod config;
mod ops;
mod oracle;

pub use config::{
    apply_transition, legal_transitions, reconstruct, BottomUpConfig, Fragment, Grammar, Limits, ParserConfig, Slot,
    TokenClass, TopDownConfig, TransitionError,
};
pub use ops::{Derivation, Mode, OpTag, Step, TransitionOp};
pub use oracle::{bu_oracle, oracle, td_oracle};
