use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

/// Comparison operator carried by `filter_*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparator {
    Eq,
    Neq,
    Gt,
    Lt,
    Ge,
    Le,
}

impl Comparator {
    pub const ALL: [Comparator; 6] = [
        Comparator::Eq,
        Comparator::Neq,
        Comparator::Gt,
        Comparator::Lt,
        Comparator::Ge,
        Comparator::Le,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Comparator::Eq => "eq",
            Comparator::Neq => "neq",
            Comparator::Gt => "gt",
            Comparator::Lt => "lt",
            Comparator::Ge => "ge",
            Comparator::Le => "le",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparator::Eq => lhs == rhs,
            Comparator::Neq => lhs != rhs,
            Comparator::Gt => lhs > rhs,
            Comparator::Lt => lhs < rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Le => lhs <= rhs,
        }
    }
}

/// A KB value: an entity reference or a number.
///
/// Numbers compare and hash by their IEEE total order so values can live in
/// ordered sets.
#[derive(Debug, Clone)]
pub enum Value {
    Entity(String),
    Number(f64),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            Value::Entity(_) => None,
        }
    }

    pub fn as_entity(&self) -> Option<&str> {
        match self {
            Value::Entity(e) => Some(e),
            Value::Number(_) => None,
        }
    }

    /// Parses a literal: a number if it reads as one, otherwise an entity id.
    pub fn parse_literal(text: &str) -> Value {
        match parse_number(text) {
            Some(n) => Value::Number(n),
            None => Value::Entity(text.to_string()),
        }
    }
}

/// Strict numeric literal parsing (rejects `inf`, `nan` and friends).
pub fn parse_number(text: &str) -> Option<f64> {
    let body = text.strip_prefix('-').unwrap_or(text);
    if body.is_empty() || !body.chars().next().unwrap().is_ascii_digit() {
        return None;
    }
    if !body
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
    {
        return None;
    }
    text.parse::<f64>().ok().filter(|n| n.is_finite())
}

pub fn format_number(n: f64) -> String {
    format!("{n}")
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Entity(a), Value::Entity(b)) => a.cmp(b),
            (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
            (Value::Entity(_), Value::Number(_)) => Ordering::Less,
            (Value::Number(_), Value::Entity(_)) => Ordering::Greater,
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Value::Entity(e) => {
                0u8.hash(state);
                e.hash(state);
            }
            Value::Number(n) => {
                1u8.hash(state);
                n.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Entity(e) => f.write_str(e),
            Value::Number(n) => f.write_str(&format_number(*n)),
        }
    }
}

/// A FunQL logical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LogicalForm {
    Entity(String),
    Apply {
        relation: String,
        arg: Box<LogicalForm>,
    },
    Count(Box<LogicalForm>),
    ArgMax {
        arg: Box<LogicalForm>,
        relation: String,
    },
    ArgMin {
        arg: Box<LogicalForm>,
        relation: String,
    },
    Filter {
        cmp: Comparator,
        arg: Box<LogicalForm>,
        relation: String,
        value: Value,
    },
    And(Box<LogicalForm>, Box<LogicalForm>),
    Or(Box<LogicalForm>, Box<LogicalForm>),
}

impl LogicalForm {
    pub fn entity(id: impl Into<String>) -> Self {
        LogicalForm::Entity(id.into())
    }

    pub fn apply(relation: impl Into<String>, arg: LogicalForm) -> Self {
        LogicalForm::Apply {
            relation: relation.into(),
            arg: Box::new(arg),
        }
    }

    pub fn count(arg: LogicalForm) -> Self {
        LogicalForm::Count(Box::new(arg))
    }

    pub fn argmax(arg: LogicalForm, relation: impl Into<String>) -> Self {
        LogicalForm::ArgMax {
            arg: Box::new(arg),
            relation: relation.into(),
        }
    }

    pub fn argmin(arg: LogicalForm, relation: impl Into<String>) -> Self {
        LogicalForm::ArgMin {
            arg: Box::new(arg),
            relation: relation.into(),
        }
    }

    pub fn filter(cmp: Comparator, arg: LogicalForm, relation: impl Into<String>, value: Value) -> Self {
        LogicalForm::Filter {
            cmp,
            arg: Box::new(arg),
            relation: relation.into(),
            value,
        }
    }

    pub fn and(left: LogicalForm, right: LogicalForm) -> Self {
        LogicalForm::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: LogicalForm, right: LogicalForm) -> Self {
        LogicalForm::Or(Box::new(left), Box::new(right))
    }

    /// Logical-form children (relation and value arguments excluded).
    pub fn children(&self) -> Vec<&LogicalForm> {
        match self {
            LogicalForm::Entity(_) => vec![],
            LogicalForm::Apply { arg, .. }
            | LogicalForm::Count(arg)
            | LogicalForm::ArgMax { arg, .. }
            | LogicalForm::ArgMin { arg, .. }
            | LogicalForm::Filter { arg, .. } => vec![arg],
            LogicalForm::And(l, r) | LogicalForm::Or(l, r) => vec![l, r],
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Number of non-leaf nodes.
    pub fn internal_nodes(&self) -> usize {
        match self {
            LogicalForm::Entity(_) => 0,
            _ => 1 + self.children().into_iter().map(|c| c.internal_nodes()).sum::<usize>(),
        }
    }

    pub fn is_count(&self) -> bool {
        matches!(self, LogicalForm::Count(_))
    }

    /// Every relation id in pre-order, including relation arguments.
    pub fn relations(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |lf| match lf {
            LogicalForm::Apply { relation, .. }
            | LogicalForm::ArgMax { relation, .. }
            | LogicalForm::ArgMin { relation, .. }
            | LogicalForm::Filter { relation, .. } => out.push(relation.as_str()),
            _ => {}
        });
        out
    }

    /// Every entity leaf in pre-order.
    pub fn entities(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |lf| {
            if let LogicalForm::Entity(e) = lf {
                out.push(e.as_str());
            }
        });
        out
    }

    /// Surface tokens in pre-order: operator names, relation ids, entity ids and literals.
    pub fn tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |lf| match lf {
            LogicalForm::Entity(e) => out.push(e.clone()),
            LogicalForm::Apply { relation, .. } => out.push(relation.clone()),
            LogicalForm::Count(_) => out.push("count".into()),
            LogicalForm::ArgMax { relation, .. } => {
                out.push("argmax".into());
                out.push(relation.clone());
            }
            LogicalForm::ArgMin { relation, .. } => {
                out.push("argmin".into());
                out.push(relation.clone());
            }
            LogicalForm::Filter {
                cmp, relation, value, ..
            } => {
                out.push(format!("filter_{}", cmp.name()));
                out.push(relation.clone());
                out.push(value.to_string());
            }
            LogicalForm::And(..) => out.push("and".into()),
            LogicalForm::Or(..) => out.push("or".into()),
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a LogicalForm)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::syntax::print_funql(self))
    }
}
