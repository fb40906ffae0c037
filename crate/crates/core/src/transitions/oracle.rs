use super::config::TransitionError;
use super::ops::{Derivation, Mode, OpTag, TransitionOp};
use crate::semantics::{format_number, LogicalForm, Value};

fn tag_of(lf: &LogicalForm) -> OpTag {
    match lf {
        LogicalForm::Entity(_) => OpTag::Entity,
        LogicalForm::Apply { .. } => OpTag::Relation,
        LogicalForm::Count(_) => OpTag::Count,
        LogicalForm::ArgMax { .. } => OpTag::ArgMax,
        LogicalForm::ArgMin { .. } => OpTag::ArgMin,
        LogicalForm::Filter { cmp, .. } => OpTag::Filter(*cmp),
        LogicalForm::And(..) => OpTag::And,
        LogicalForm::Or(..) => OpTag::Or,
    }
}

fn value_token(v: &Value) -> String {
    match v {
        Value::Number(n) => format_number(*n),
        Value::Entity(e) => e.clone(),
    }
}

/// Token carried by the node itself (relation id for `r(u)`).
fn head_token(lf: &LogicalForm) -> Option<&str> {
    match lf {
        LogicalForm::Apply { relation, .. } => Some(relation),
        _ => None,
    }
}

/// Relation and value arguments that follow the unary child.
fn extra_terminals(lf: &LogicalForm) -> Vec<(OpTag, String)> {
    match lf {
        LogicalForm::ArgMax { relation, .. } | LogicalForm::ArgMin { relation, .. } => {
            vec![(OpTag::Relation, relation.clone())]
        }
        LogicalForm::Filter { relation, value, .. } => {
            vec![(OpTag::Relation, relation.clone()), (OpTag::Entity, value_token(value))]
        }
        _ => Vec::new(),
    }
}

/// Pre-order derivation. A bare entity has none, since the first operation must be NT.
pub fn td_oracle(lf: &LogicalForm) -> Result<Derivation, TransitionError> {
    if let LogicalForm::Entity(_) = lf {
        return Err(TransitionError::BareEntityRoot);
    }
    let mut d = Derivation::new(Mode::TopDown);
    td_walk(lf, &mut d);
    Ok(d)
}

fn td_walk(lf: &LogicalForm, d: &mut Derivation) {
    if let LogicalForm::Entity(e) = lf {
        d.push(TransitionOp::Ter(OpTag::Entity), Some(e));
        return;
    }
    d.push(TransitionOp::Nt(tag_of(lf)), head_token(lf));
    for child in lf.children() {
        td_walk(child, d);
    }
    for (tag, token) in extra_terminals(lf) {
        d.push(TransitionOp::Ter(tag), Some(&token));
    }
    d.push(TransitionOp::Red, None);
}

/// Post-order derivation without the final STOP (see [`Derivation::with_stop`]).
pub fn bu_oracle(lf: &LogicalForm) -> Derivation {
    let mut d = Derivation::new(Mode::BottomUp);
    bu_walk(lf, &mut d);
    d
}

fn bu_walk(lf: &LogicalForm, d: &mut Derivation) {
    if let LogicalForm::Entity(e) = lf {
        d.push(TransitionOp::Ter(OpTag::Entity), Some(e));
        return;
    }
    for child in lf.children() {
        bu_walk(child, d);
    }
    for (tag, token) in extra_terminals(lf) {
        d.push(TransitionOp::Ter(tag), Some(&token));
    }
    d.push(TransitionOp::NtRed(tag_of(lf)), head_token(lf));
}

/// The oracle derivation the parser is trained on: top-down as is, bottom-up with STOP.
pub fn oracle(lf: &LogicalForm, mode: Mode) -> Result<Derivation, TransitionError> {
    match mode {
        Mode::TopDown => td_oracle(lf),
        Mode::BottomUp => Ok(bu_oracle(lf).with_stop()),
    }
}
