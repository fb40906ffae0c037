//! FunQL: logical forms, surface syntax, typing, knowledge bases and execution.

mod exec;
mod kb;
mod lf;
mod syntax;
mod types;

pub use exec::{execute, Denotation, ExecError};
pub use kb::{Entity, KbError, KnowledgeBase, Triple};
pub use lf::{format_number, parse_number, Comparator, LogicalForm, Value};
pub use syntax::{is_reserved, is_valid_identifier, parse_funql, print_funql, SyntaxError};
pub use types::{type_check, LfType, Signature, TypeError};
