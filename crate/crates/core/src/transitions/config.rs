//! Parser configurations for the two generation orders and their legality masks.

use std::fmt;

use thiserror::Error;

use super::ops::{Derivation, Mode, OpTag, Step, TransitionOp};
use crate::semantics::{format_number, is_valid_identifier, parse_number, print_funql, LogicalForm, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransitionError {
    #[error("illegal transition {op}: {reason}")]
    IllegalTransition { op: String, reason: String },
    #[error("{op} needs {needed} stack fragments, found {available}")]
    ArityUnderflow {
        op: String,
        needed: usize,
        available: usize,
    },
    #[error("bad token {token:?} for {op}")]
    BadToken { op: String, token: Option<String> },
    #[error("derivation is incomplete")]
    IncompleteDerivation,
    #[error("a bare entity has no top-down derivation (the first operation must be NT)")]
    BareEntityRoot,
}

fn illegal(op: TransitionOp, reason: impl Into<String>) -> TransitionError {
    TransitionError::IllegalTransition {
        op: op.to_string(),
        reason: reason.into(),
    }
}

/// Which token space a placeholder draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenClass {
    /// KB entity ids.
    Entity,
    /// Number literals (filter values).
    Number,
    /// Any relation (relation applied as a function).
    Relation,
    /// Relations with numeric objects (argmax/argmin/filter argument).
    NumericRelation,
}

/// Availability of each token class, so that no opened node is unfillable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grammar {
    pub has_entities: bool,
    pub has_numbers: bool,
    pub has_relations: bool,
    pub has_numeric_relations: bool,
}

impl Grammar {
    pub fn unrestricted() -> Self {
        Grammar {
            has_entities: true,
            has_numbers: true,
            has_relations: true,
            has_numeric_relations: true,
        }
    }

    pub fn has(&self, class: TokenClass) -> bool {
        match class {
            TokenClass::Entity => self.has_entities,
            TokenClass::Number => self.has_numbers,
            TokenClass::Relation => self.has_relations,
            TokenClass::NumericRelation => self.has_numeric_relations,
        }
    }

    fn can_open(&self, tag: OpTag) -> bool {
        match tag {
            OpTag::Count | OpTag::And | OpTag::Or => true,
            OpTag::Relation => self.has_relations,
            OpTag::ArgMax | OpTag::ArgMin => self.has_numeric_relations,
            OpTag::Filter(_) => self.has_numeric_relations && self.has_numbers,
            OpTag::Entity => false,
        }
    }
}

/// Structural limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Open nonterminals on the top-down stack.
    pub max_open_nt: usize,
    /// Nonterminals generated in total. Bottom-up, this caps only the
    /// non-shrinking `NTRED(relation)` and `NTRED(count)`.
    pub max_total_nt: usize,
    /// Consecutive bottom-up TER operations.
    pub max_consecutive_ter: usize,
    /// Bottom-up terminals, normally the sentence length.
    pub max_terminals: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_open_nt: 10,
            max_total_nt: 10,
            max_consecutive_ter: 5,
            max_terminals: 10,
        }
    }
}

impl Limits {
    pub fn for_sentence(self, words: usize) -> Self {
        Limits {
            max_terminals: words,
            ..self
        }
    }
}

/// A completed constituent.
#[derive(Debug, Clone, PartialEq)]
pub enum Fragment {
    Unary(LogicalForm),
    Count(LogicalForm),
    Relation(String),
    Number(f64),
}

impl Fragment {
    fn render(&self) -> String {
        match self {
            Fragment::Unary(lf) | Fragment::Count(lf) => print_funql(lf),
            Fragment::Relation(r) => r.clone(),
            Fragment::Number(n) => format_number(*n),
        }
    }

    fn unary(self) -> Option<LogicalForm> {
        match self {
            Fragment::Unary(lf) => Some(lf),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Item {
    Open { tag: OpTag, token: Option<String> },
    Done(Fragment),
}

/// What the innermost open top-down nonterminal expects next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Root,
    Unary,
    Relation,
    Number,
    Reduce,
    Finished,
}

fn slot_kind(tag: OpTag, index: usize) -> Slot {
    match (tag, index) {
        (_, 0) => Slot::Unary,
        (OpTag::ArgMax | OpTag::ArgMin | OpTag::Filter(_), 1) => Slot::Relation,
        (OpTag::Filter(_), 2) => Slot::Number,
        _ => Slot::Unary,
    }
}

/// Builds the subtree for `tag` from its argument fragments.
fn combine(op: TransitionOp, tag: OpTag, token: Option<String>, args: Vec<Fragment>) -> Result<Fragment, TransitionError> {
    let bad = || illegal(op, "argument types do not match the operator signature");
    let mut it = args.into_iter();
    let unary = |it: &mut std::vec::IntoIter<Fragment>| it.next().and_then(Fragment::unary).ok_or_else(bad);
    Ok(match tag {
        OpTag::Count => Fragment::Count(LogicalForm::count(unary(&mut it)?)),
        OpTag::Relation => {
            let rel = token.ok_or_else(|| TransitionError::BadToken {
                op: op.to_string(),
                token: None,
            })?;
            Fragment::Unary(LogicalForm::apply(rel, unary(&mut it)?))
        }
        OpTag::And | OpTag::Or => {
            let l = unary(&mut it)?;
            let r = unary(&mut it)?;
            Fragment::Unary(if tag == OpTag::And {
                LogicalForm::and(l, r)
            } else {
                LogicalForm::or(l, r)
            })
        }
        OpTag::ArgMax | OpTag::ArgMin => {
            let arg = unary(&mut it)?;
            let Some(Fragment::Relation(rel)) = it.next() else {
                return Err(bad());
            };
            Fragment::Unary(if tag == OpTag::ArgMax {
                LogicalForm::argmax(arg, rel)
            } else {
                LogicalForm::argmin(arg, rel)
            })
        }
        OpTag::Filter(cmp) => {
            let arg = unary(&mut it)?;
            let (Some(Fragment::Relation(rel)), Some(Fragment::Number(v))) = (it.next(), it.next()) else {
                return Err(bad());
            };
            Fragment::Unary(LogicalForm::filter(cmp, arg, rel, Value::Number(v)))
        }
        OpTag::Entity => return Err(bad()),
    })
}

fn check_token(op: TransitionOp, token: Option<&str>) -> Result<Option<String>, TransitionError> {
    let bad = || TransitionError::BadToken {
        op: op.to_string(),
        token: token.map(str::to_string),
    };
    match (op.needs_token(), token) {
        (true, Some(t)) if is_valid_identifier(t) => Ok(Some(t.to_string())),
        (false, None) => Ok(None),
        _ => Err(bad()),
    }
}

/// Top-down configuration: fragment stack, open-nonterminal stack and counters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TopDownConfig {
    stack: Vec<Item>,
    /// Stack indices of open nonterminals; the last one is the attachment point.
    open: Vec<usize>,
    total_nt: usize,
}

impl TopDownConfig {
    pub fn slot(&self) -> Slot {
        match self.open.last() {
            None if self.stack.is_empty() => Slot::Root,
            None => Slot::Finished,
            Some(&idx) => {
                let Item::Open { tag, .. } = &self.stack[idx] else {
                    unreachable!("open index addresses an open item")
                };
                let filled = self.stack.len() - idx - 1;
                if filled == tag.arity() {
                    Slot::Reduce
                } else {
                    slot_kind(*tag, filled)
                }
            }
        }
    }

    pub fn open_count(&self) -> usize {
        self.open.len()
    }

    pub fn total_nt(&self) -> usize {
        self.total_nt
    }

    fn legal(&self, grammar: &Grammar, limits: &Limits) -> Vec<TransitionOp> {
        let nt_ok = self.open.len() < limits.max_open_nt && self.total_nt < limits.max_total_nt;
        let mut ops = Vec::new();
        match self.slot() {
            Slot::Root | Slot::Unary => {
                if nt_ok {
                    let root = self.slot() == Slot::Root;
                    for tag in OpTag::nonterminals() {
                        if (root || tag != OpTag::Count) && grammar.can_open(tag) {
                            ops.push(TransitionOp::Nt(tag));
                        }
                    }
                }
                if self.slot() == Slot::Unary && grammar.has_entities {
                    ops.push(TransitionOp::Ter(OpTag::Entity));
                }
            }
            Slot::Relation => ops.push(TransitionOp::Ter(OpTag::Relation)),
            Slot::Number => ops.push(TransitionOp::Ter(OpTag::Entity)),
            Slot::Reduce => ops.push(TransitionOp::Red),
            Slot::Finished => {}
        }
        ops
    }

    fn token_class(&self, op: TransitionOp) -> Option<TokenClass> {
        match op {
            TransitionOp::Nt(OpTag::Relation) => Some(TokenClass::Relation),
            TransitionOp::Ter(OpTag::Relation) => Some(TokenClass::NumericRelation),
            TransitionOp::Ter(OpTag::Entity) => Some(if self.slot() == Slot::Number {
                TokenClass::Number
            } else {
                TokenClass::Entity
            }),
            _ => None,
        }
    }

    /// Number of stack items a RED pops (children plus the nonterminal).
    pub fn reduce_width(&self) -> Option<usize> {
        (self.slot() == Slot::Reduce).then(|| self.stack.len() - self.open.last().unwrap())
    }

    fn apply(&mut self, op: TransitionOp, token: Option<&str>) -> Result<(), TransitionError> {
        let slot = self.slot();
        let token = check_token(op, token)?;
        match op {
            TransitionOp::Nt(tag) => {
                let ok = match slot {
                    Slot::Root => true,
                    Slot::Unary => tag != OpTag::Count,
                    _ => false,
                };
                if !ok {
                    return Err(illegal(op, format!("no {} slot open", tag.name())));
                }
                self.open.push(self.stack.len());
                self.stack.push(Item::Open { tag, token });
                self.total_nt += 1;
            }
            TransitionOp::Ter(tag) => {
                let token = token.expect("checked");
                let frag = match (tag, slot) {
                    (OpTag::Entity, Slot::Unary) => Fragment::Unary(LogicalForm::Entity(token)),
                    (OpTag::Entity, Slot::Number) => {
                        Fragment::Number(parse_number(&token).ok_or_else(|| TransitionError::BadToken {
                            op: op.to_string(),
                            token: Some(token.clone()),
                        })?)
                    }
                    (OpTag::Relation, Slot::Relation) => Fragment::Relation(token),
                    (_, Slot::Root) => return Err(illegal(op, "the first operation must be NT")),
                    _ => return Err(illegal(op, format!("slot expects {slot:?}"))),
                };
                self.stack.push(Item::Done(frag));
            }
            TransitionOp::Red => {
                if slot != Slot::Reduce {
                    return Err(illegal(op, "the innermost nonterminal still expects arguments"));
                }
                let idx = self.open.pop().expect("reduce slot has an open nonterminal");
                let children: Vec<Fragment> = self
                    .stack
                    .drain(idx + 1..)
                    .map(|item| match item {
                        Item::Done(f) => f,
                        Item::Open { .. } => unreachable!("children above the pointer are closed"),
                    })
                    .collect();
                let Some(Item::Open { tag, token }) = self.stack.pop() else {
                    unreachable!()
                };
                let frag = combine(op, tag, token, children)?;
                self.stack.push(Item::Done(frag));
            }
            TransitionOp::NtRed(_) | TransitionOp::Stop => {
                return Err(illegal(op, "not a top-down operation"));
            }
        }
        Ok(())
    }

    fn is_complete(&self) -> bool {
        self.slot() == Slot::Finished
    }

    fn result(&self) -> Option<LogicalForm> {
        match (self.is_complete(), self.stack.first()) {
            (true, Some(Item::Done(Fragment::Unary(lf) | Fragment::Count(lf)))) => Some(lf.clone()),
            _ => None,
        }
    }

    fn render(&self) -> String {
        self.stack
            .iter()
            .map(|item| match item {
                Item::Open { tag, token } => format!("{}(", token.clone().unwrap_or_else(|| tag.name())),
                Item::Done(f) => f.render(),
            })
            .collect::<Vec<_>>()
            .join(" || ")
    }
}

/// Bottom-up configuration: a stack of closed fragments plus counters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BottomUpConfig {
    stack: Vec<Fragment>,
    consecutive_ter: usize,
    terminals: usize,
    capped_nt: usize,
    stopped: bool,
}

impl BottomUpConfig {
    pub fn stack_len(&self) -> usize {
        self.stack.len()
    }

    pub fn consecutive_ter(&self) -> usize {
        self.consecutive_ter
    }

    fn legal(&self, grammar: &Grammar, limits: &Limits) -> Vec<TransitionOp> {
        let mut ops = Vec::new();
        if self.stopped {
            return ops;
        }
        let ter_ok = self.consecutive_ter < limits.max_consecutive_ter && self.terminals < limits.max_terminals;
        let nt_ok = self.capped_nt < limits.max_total_nt;
        let n = self.stack.len();
        match self.stack.last() {
            None => {
                if ter_ok && grammar.has_entities {
                    ops.push(TransitionOp::Ter(OpTag::Entity));
                }
            }
            Some(Fragment::Unary(_)) => {
                if ter_ok && grammar.has_numeric_relations {
                    ops.push(TransitionOp::Ter(OpTag::Relation));
                }
                if ter_ok && grammar.has_entities {
                    ops.push(TransitionOp::Ter(OpTag::Entity));
                }
                let below_unary = n >= 2 && matches!(self.stack[n - 2], Fragment::Unary(_));
                if n == 1 && nt_ok {
                    ops.push(TransitionOp::NtRed(OpTag::Count));
                }
                if below_unary {
                    ops.push(TransitionOp::NtRed(OpTag::And));
                    ops.push(TransitionOp::NtRed(OpTag::Or));
                }
                if nt_ok && grammar.has_relations {
                    ops.push(TransitionOp::NtRed(OpTag::Relation));
                }
                if n == 1 {
                    ops.push(TransitionOp::Stop);
                }
            }
            Some(Fragment::Count(_)) => ops.push(TransitionOp::Stop),
            Some(Fragment::Relation(_)) => {
                if ter_ok && grammar.has_numbers {
                    ops.push(TransitionOp::Ter(OpTag::Entity));
                }
                ops.push(TransitionOp::NtRed(OpTag::ArgMax));
                ops.push(TransitionOp::NtRed(OpTag::ArgMin));
            }
            Some(Fragment::Number(_)) => {
                for cmp in crate::semantics::Comparator::ALL {
                    ops.push(TransitionOp::NtRed(OpTag::Filter(cmp)));
                }
            }
        }
        ops.sort_by_key(|op| op.index());
        ops
    }

    fn token_class(&self, op: TransitionOp) -> Option<TokenClass> {
        match op {
            TransitionOp::NtRed(OpTag::Relation) => Some(TokenClass::Relation),
            TransitionOp::Ter(OpTag::Relation) => Some(TokenClass::NumericRelation),
            TransitionOp::Ter(OpTag::Entity) => Some(match self.stack.last() {
                Some(Fragment::Relation(_)) => TokenClass::Number,
                _ => TokenClass::Entity,
            }),
            _ => None,
        }
    }

    fn apply(&mut self, op: TransitionOp, token: Option<&str>) -> Result<(), TransitionError> {
        if self.stopped {
            return Err(illegal(op, "derivation already stopped"));
        }
        let token = check_token(op, token)?;
        match op {
            TransitionOp::Ter(tag) => {
                let token = token.expect("checked");
                let frag = match (tag, self.stack.last()) {
                    (OpTag::Entity, Some(Fragment::Relation(_))) => {
                        Fragment::Number(parse_number(&token).ok_or_else(|| TransitionError::BadToken {
                            op: op.to_string(),
                            token: Some(token.clone()),
                        })?)
                    }
                    (OpTag::Entity, None | Some(Fragment::Unary(_))) => Fragment::Unary(LogicalForm::Entity(token)),
                    (OpTag::Relation, Some(Fragment::Unary(_))) => Fragment::Relation(token),
                    _ => return Err(illegal(op, "terminal cannot follow the top fragment")),
                };
                self.stack.push(frag);
                self.consecutive_ter += 1;
                self.terminals += 1;
            }
            TransitionOp::NtRed(tag) => {
                let arity = tag.arity();
                if self.stack.len() < arity {
                    return Err(TransitionError::ArityUnderflow {
                        op: op.to_string(),
                        needed: arity,
                        available: self.stack.len(),
                    });
                }
                if tag == OpTag::Count && self.stack.len() != 1 {
                    return Err(illegal(op, "count is only legal at the root"));
                }
                let args = self.stack.split_off(self.stack.len() - arity);
                let frag = combine(op, tag, token, args)?;
                self.stack.push(frag);
                self.consecutive_ter = 0;
                if matches!(tag, OpTag::Relation | OpTag::Count) {
                    self.capped_nt += 1;
                }
            }
            TransitionOp::Stop => {
                if self.stack.len() != 1 || matches!(self.stack[0], Fragment::Relation(_) | Fragment::Number(_)) {
                    return Err(illegal(op, "stack must hold exactly one complete tree"));
                }
                self.stopped = true;
            }
            TransitionOp::Nt(_) | TransitionOp::Red => return Err(illegal(op, "not a bottom-up operation")),
        }
        Ok(())
    }

    fn result(&self) -> Option<LogicalForm> {
        match (self.stopped, self.stack.first()) {
            (true, Some(Fragment::Unary(lf) | Fragment::Count(lf))) => Some(lf.clone()),
            _ => None,
        }
    }

    fn render(&self) -> String {
        self.stack.iter().map(Fragment::render).collect::<Vec<_>>().join(" || ")
    }
}

/// A configuration of either transition system.
#[derive(Debug, Clone, PartialEq)]
pub enum ParserConfig {
    TopDown(TopDownConfig),
    BottomUp(BottomUpConfig),
}

impl ParserConfig {
    pub fn new(mode: Mode) -> Self {
        match mode {
            Mode::TopDown => ParserConfig::TopDown(TopDownConfig::default()),
            Mode::BottomUp => ParserConfig::BottomUp(BottomUpConfig::default()),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            ParserConfig::TopDown(_) => Mode::TopDown,
            ParserConfig::BottomUp(_) => Mode::BottomUp,
        }
    }

    /// Exactly the operations satisfying the structural and grammar constraints.
    pub fn legal_ops(&self, grammar: &Grammar, limits: &Limits) -> Vec<TransitionOp> {
        match self {
            ParserConfig::TopDown(c) => c.legal(grammar, limits),
            ParserConfig::BottomUp(c) => c.legal(grammar, limits),
        }
    }

    /// Token class a placeholder op would draw from in this configuration.
    pub fn token_class(&self, op: TransitionOp) -> Option<TokenClass> {
        match self {
            ParserConfig::TopDown(c) => c.token_class(op),
            ParserConfig::BottomUp(c) => c.token_class(op),
        }
    }

    /// Applies `op`, checking the operator signatures (limits are only enforced by the mask).
    pub fn apply(&mut self, op: TransitionOp, token: Option<&str>) -> Result<(), TransitionError> {
        match self {
            ParserConfig::TopDown(c) => c.apply(op, token),
            ParserConfig::BottomUp(c) => c.apply(op, token),
        }
    }

    pub fn apply_step(&mut self, step: &Step) -> Result<(), TransitionError> {
        self.apply(step.op, step.token.as_deref())
    }

    pub fn is_complete(&self) -> bool {
        match self {
            ParserConfig::TopDown(c) => c.is_complete(),
            ParserConfig::BottomUp(c) => c.stopped,
        }
    }

    pub fn result(&self) -> Option<LogicalForm> {
        match self {
            ParserConfig::TopDown(c) => c.result(),
            ParserConfig::BottomUp(c) => c.result(),
        }
    }

    /// Stack items a reduction pops: children plus the nonterminal top-down, arity bottom-up.
    pub fn pop_count(&self, op: TransitionOp) -> Option<usize> {
        match (self, op) {
            (ParserConfig::TopDown(c), TransitionOp::Red) => c.reduce_width(),
            (ParserConfig::BottomUp(_), TransitionOp::NtRed(tag)) => Some(tag.arity()),
            _ => None,
        }
    }

    /// Stack rendering with `||` separators, top on the right.
    pub fn render_stack(&self) -> String {
        match self {
            ParserConfig::TopDown(c) => c.render(),
            ParserConfig::BottomUp(c) => c.render(),
        }
    }
}

impl fmt::Display for ParserConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_stack())
    }
}

/// Free-function form of [`ParserConfig::legal_ops`].
pub fn legal_transitions(config: &ParserConfig, grammar: &Grammar, limits: &Limits) -> Vec<TransitionOp> {
    config.legal_ops(grammar, limits)
}

/// Free-function form of [`ParserConfig::apply`] returning the successor configuration.
pub fn apply_transition(config: &ParserConfig, op: TransitionOp, token: Option<&str>) -> Result<ParserConfig, TransitionError> {
    let mut next = config.clone();
    next.apply(op, token)?;
    Ok(next)
}

/// Replays a derivation and returns the logical form it builds. A bottom-up
/// derivation may leave its final STOP implicit.
pub fn reconstruct(d: &Derivation) -> Result<LogicalForm, TransitionError> {
    let mut config = ParserConfig::new(d.mode);
    for step in &d.steps {
        config.apply_step(step)?;
    }
    if d.mode == Mode::BottomUp && !config.is_complete() {
        config
            .apply(TransitionOp::Stop, None)
            .map_err(|_| TransitionError::IncompleteDerivation)?;
    }
    config.result().ok_or(TransitionError::IncompleteDerivation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn td() -> ParserConfig {
        ParserConfig::new(Mode::TopDown)
    }

    #[test]
    fn empty_top_down_offers_only_nonterminals() {
        let ops = td().legal_ops(&Grammar::unrestricted(), &Limits::default());
        assert_eq!(ops.len(), OpTag::nonterminals().len());
        assert!(ops.iter().all(|op| matches!(op, TransitionOp::Nt(_))));
        assert!(ops.contains(&TransitionOp::Nt(OpTag::Count)));
    }

    #[test]
    fn open_nonterminal_limit() {
        let mut c = td();
        c.apply(TransitionOp::Nt(OpTag::Count), None).unwrap();
        for _ in 0..9 {
            c.apply(TransitionOp::Nt(OpTag::Relation), Some("r")).unwrap();
        }
        let limits = Limits {
            max_total_nt: 100,
            ..Limits::default()
        };
        let ParserConfig::TopDown(inner) = &c else { unreachable!() };
        assert_eq!(inner.open_count(), 10);
        let ops = c.legal_ops(&Grammar::unrestricted(), &limits);
        assert_eq!(ops, vec![TransitionOp::Ter(OpTag::Entity)]);
    }

    #[test]
    fn full_arity_forces_reduce() {
        let mut c = td();
        c.apply(TransitionOp::Nt(OpTag::Relation), Some("r")).unwrap();
        c.apply(TransitionOp::Ter(OpTag::Entity), Some("e")).unwrap();
        assert_eq!(
            c.legal_ops(&Grammar::unrestricted(), &Limits::default()),
            vec![TransitionOp::Red]
        );
    }

    #[test]
    fn reduce_right_after_nt_is_illegal() {
        let mut c = td();
        c.apply(TransitionOp::Nt(OpTag::Count), None).unwrap();
        assert!(matches!(
            c.apply(TransitionOp::Red, None),
            Err(TransitionError::IllegalTransition { .. })
        ));
    }

    #[test]
    fn consecutive_terminal_limit() {
        let mut c = ParserConfig::new(Mode::BottomUp);
        for e in ["a", "b", "c", "d", "e"] {
            c.apply(TransitionOp::Ter(OpTag::Entity), Some(e)).unwrap();
        }
        let ops = c.legal_ops(&Grammar::unrestricted(), &Limits::default().for_sentence(20));
        assert!(!ops.iter().any(|op| matches!(op, TransitionOp::Ter(_))));
        assert!(ops.contains(&TransitionOp::NtRed(OpTag::And)));
    }

    #[test]
    fn bottom_up_underflow() {
        let mut c = ParserConfig::new(Mode::BottomUp);
        c.apply(TransitionOp::Ter(OpTag::Entity), Some("a")).unwrap();
        assert!(matches!(
            c.apply(TransitionOp::NtRed(OpTag::And), None),
            Err(TransitionError::ArityUnderflow { needed: 2, available: 1, .. })
        ));
    }

    #[test]
    fn bottom_up_entity_derivation() {
        let mut d = Derivation::new(Mode::BottomUp);
        d.push(TransitionOp::Ter(OpTag::Entity), Some("e"));
        assert_eq!(reconstruct(&d).unwrap(), LogicalForm::entity("e"));
        d.push(TransitionOp::Stop, None);
        assert_eq!(reconstruct(&d).unwrap(), LogicalForm::entity("e"));
        d.push(TransitionOp::Ter(OpTag::Entity), Some("f"));
        assert!(reconstruct(&d).is_err());
        d.steps.truncate(0);
        d.push(TransitionOp::Ter(OpTag::Entity), Some("e"));
        d.push(TransitionOp::Ter(OpTag::Entity), Some("f"));
        assert_eq!(reconstruct(&d), Err(TransitionError::IncompleteDerivation));
    }

    #[test]
    fn terminals_after_relation_must_be_numbers() {
        let mut c = ParserConfig::new(Mode::BottomUp);
        c.apply(TransitionOp::Ter(OpTag::Entity), Some("a")).unwrap();
        c.apply(TransitionOp::Ter(OpTag::Relation), Some("age")).unwrap();
        assert_eq!(c.token_class(TransitionOp::Ter(OpTag::Entity)), Some(TokenClass::Number));
        assert!(c.apply(TransitionOp::Ter(OpTag::Entity), Some("b")).is_err());
    }
}
