use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::semantics::Comparator;

/// Generation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "td")]
    TopDown,
    #[serde(rename = "bu")]
    BottomUp,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::TopDown => "td",
            Mode::BottomUp => "bu",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "td" | "top-down" => Some(Mode::TopDown),
            "bu" | "bottom-up" => Some(Mode::BottomUp),
            _ => None,
        }
    }
}

/// Node label carried by a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpTag {
    Count,
    ArgMax,
    ArgMin,
    And,
    Or,
    Filter(Comparator),
    Relation,
    Entity,
}

impl OpTag {
    /// Every tag that can head a subtree.
    pub fn nonterminals() -> Vec<OpTag> {
        let mut tags = vec![OpTag::Count, OpTag::ArgMax, OpTag::ArgMin, OpTag::And, OpTag::Or];
        tags.extend(Comparator::ALL.into_iter().map(OpTag::Filter));
        tags.push(OpTag::Relation);
        tags
    }

    /// Number of children; relation and value arguments count as children.
    pub fn arity(self) -> usize {
        match self {
            OpTag::Count | OpTag::Relation => 1,
            OpTag::ArgMax | OpTag::ArgMin | OpTag::And | OpTag::Or => 2,
            OpTag::Filter(_) => 3,
            OpTag::Entity => 0,
        }
    }

    /// True when the concrete token must be predicted (an id) rather than implied.
    pub fn is_placeholder(self) -> bool {
        matches!(self, OpTag::Relation | OpTag::Entity)
    }

    pub fn name(self) -> String {
        match self {
            OpTag::Count => "count".into(),
            OpTag::ArgMax => "argmax".into(),
            OpTag::ArgMin => "argmin".into(),
            OpTag::And => "and".into(),
            OpTag::Or => "or".into(),
            OpTag::Filter(c) => format!("filter_{}", c.name()),
            OpTag::Relation => "relation".into(),
            OpTag::Entity => "entity".into(),
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "count" => OpTag::Count,
            "argmax" => OpTag::ArgMax,
            "argmin" => OpTag::ArgMin,
            "and" => OpTag::And,
            "or" => OpTag::Or,
            "relation" => OpTag::Relation,
            "entity" => OpTag::Entity,
            _ => OpTag::Filter(Comparator::from_name(s.strip_prefix("filter_")?)?),
        })
    }
}

/// A transition operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionOp {
    /// Top-down: open a nonterminal.
    Nt(OpTag),
    /// Push a terminal (`relation` or `entity`).
    Ter(OpTag),
    /// Top-down: close the innermost open nonterminal.
    Red,
    /// Bottom-up: pop the tag's arguments and push the combined subtree.
    NtRed(OpTag),
    /// Bottom-up: accept the single completed tree.
    Stop,
}

impl TransitionOp {
    /// The full action inventory shared by both systems, in index order.
    pub fn all() -> Vec<TransitionOp> {
        let mut ops: Vec<TransitionOp> = OpTag::nonterminals().into_iter().map(TransitionOp::Nt).collect();
        ops.push(TransitionOp::Ter(OpTag::Relation));
        ops.push(TransitionOp::Ter(OpTag::Entity));
        ops.push(TransitionOp::Red);
        ops.extend(OpTag::nonterminals().into_iter().map(TransitionOp::NtRed));
        ops.push(TransitionOp::Stop);
        ops
    }

    pub fn count() -> usize {
        2 * OpTag::nonterminals().len() + 4
    }

    /// Position in [`TransitionOp::all`].
    pub fn index(self) -> usize {
        let nts = OpTag::nonterminals();
        let n = nts.len();
        let pos = |t: OpTag| nts.iter().position(|&x| x == t).expect("nonterminal tag");
        match self {
            TransitionOp::Nt(t) => pos(t),
            TransitionOp::Ter(OpTag::Relation) => n,
            TransitionOp::Ter(_) => n + 1,
            TransitionOp::Red => n + 2,
            TransitionOp::NtRed(t) => n + 3 + pos(t),
            TransitionOp::Stop => 2 * n + 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::all().get(i).copied()
    }

    pub fn tag(self) -> Option<OpTag> {
        match self {
            TransitionOp::Nt(t) | TransitionOp::Ter(t) | TransitionOp::NtRed(t) => Some(t),
            TransitionOp::Red | TransitionOp::Stop => None,
        }
    }

    /// True when applying the op requires a predicted domain token.
    pub fn needs_token(self) -> bool {
        self.tag().is_some_and(OpTag::is_placeholder)
    }

    /// Token written into the tree: operator name, or `None` for placeholders and RED/STOP.
    pub fn implied_token(self) -> Option<String> {
        match self.tag() {
            Some(t) if !t.is_placeholder() => Some(t.name()),
            _ => None,
        }
    }

    pub fn kind_name(self) -> &'static str {
        match self {
            TransitionOp::Nt(_) => "NT",
            TransitionOp::Ter(_) => "TER",
            TransitionOp::Red => "RED",
            TransitionOp::NtRed(_) => "NTRED",
            TransitionOp::Stop => "STOP",
        }
    }
}

impl fmt::Display for TransitionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag() {
            Some(t) => write!(f, "{}({})", self.kind_name(), t.name()),
            None => f.write_str(self.kind_name()),
        }
    }
}

/// One derivation step: an operation and, for placeholders, the emitted id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub op: TransitionOp,
    pub token: Option<String>,
}

impl Step {
    pub fn new(op: TransitionOp, token: Option<&str>) -> Self {
        Step {
            op,
            token: token.map(str::to_string),
        }
    }

    /// The logical-form token this step writes (operator name or predicted id).
    pub fn surface_token(&self) -> Option<String> {
        self.token.clone().or_else(|| self.op.implied_token())
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.token {
            Some(t) => write!(f, "{}:{}", self.op, t),
            None => write!(f, "{}", self.op),
        }
    }
}

impl Serialize for Step {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.op.kind_name(), self.op.tag().map(OpTag::name), &self.token).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Step {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let (kind, tag, token) = <(String, Option<String>, Option<String>)>::deserialize(d)?;
        let tag = match tag {
            Some(t) => Some(OpTag::from_name(&t).ok_or_else(|| D::Error::custom(format!("unknown tag {t}")))?),
            None => None,
        };
        let op = match (kind.as_str(), tag) {
            ("NT", Some(t)) if t != OpTag::Entity => TransitionOp::Nt(t),
            ("TER", Some(t)) if t.is_placeholder() => TransitionOp::Ter(t),
            ("RED", None) => TransitionOp::Red,
            ("NTRED", Some(t)) if t != OpTag::Entity => TransitionOp::NtRed(t),
            ("STOP", None) => TransitionOp::Stop,
            _ => return Err(D::Error::custom(format!("invalid operation {kind}"))),
        };
        Ok(Step { op, token })
    }
}

/// A complete or partial transition sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Derivation {
    pub mode: Mode,
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn new(mode: Mode) -> Self {
        Derivation { mode, steps: Vec::new() }
    }

    pub fn push(&mut self, op: TransitionOp, token: Option<&str>) {
        self.steps.push(Step::new(op, token));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("derivations always serialize")
    }

    pub fn from_json(line: &str) -> serde_json::Result<Self> {
        serde_json::from_str(line)
    }

    /// Appends STOP to a bottom-up derivation that lacks one.
    pub fn with_stop(mut self) -> Self {
        if self.mode == Mode::BottomUp && self.steps.last().map(|s| s.op) != Some(TransitionOp::Stop) {
            self.push(TransitionOp::Stop, None);
        }
        self
    }

    /// Number of steps that write a logical-form token.
    pub fn token_predictions(&self) -> usize {
        self.steps.iter().filter(|s| s.surface_token().is_some()).count()
    }
}
