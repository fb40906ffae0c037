use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use super::kb::KnowledgeBase;
use super::lf::{LogicalForm, Value};

/// Result type of a logical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfType {
    /// A set of entities or values.
    Unary,
    /// The singleton produced by `count`; only legal at the root.
    NumberSet,
}

impl fmt::Display for LfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LfType::Unary => "unary",
            LfType::NumberSet => "number-set producer",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type error at node {path:?}: expected {expected}, found {found}")]
pub struct TypeError {
    /// Child indices from the root to the offending node.
    pub path: Vec<usize>,
    pub expected: String,
    pub found: String,
}

/// Vocabulary half of the signature table. The operator half is fixed:
///
/// | operator | arguments                     | result     |
/// |----------|-------------------------------|------------|
/// | entity   | –                             | unary      |
/// | r(·)     | unary                         | unary      |
/// | count    | unary                         | number-set |
/// | argmax   | unary, numeric relation       | unary      |
/// | argmin   | unary, numeric relation       | unary      |
/// | filter_c | unary, numeric relation, num  | unary      |
/// | and / or | unary, unary                  | unary      |
#[derive(Debug, Clone, Default)]
pub struct Signature {
    pub entities: Option<HashSet<String>>,
    pub relations: Option<HashSet<String>>,
    pub numeric_relations: Option<HashSet<String>>,
}

impl Signature {
    /// Operator typing only; any identifier is accepted.
    pub fn open() -> Self {
        Self::default()
    }

    pub fn from_kb(kb: &KnowledgeBase) -> Self {
        Signature {
            entities: Some(kb.entities().iter().map(|e| e.id.clone()).collect()),
            relations: Some(kb.relations().iter().cloned().collect()),
            numeric_relations: Some(kb.numeric_relations().iter().cloned().collect()),
        }
    }
}

fn err(path: &[usize], expected: impl Into<String>, found: impl Into<String>) -> TypeError {
    TypeError {
        path: path.to_vec(),
        expected: expected.into(),
        found: found.into(),
    }
}

/// Checks `lf` and returns its type; reports the first violation in pre-order.
pub fn type_check(lf: &LogicalForm, sig: &Signature) -> Result<LfType, TypeError> {
    let mut path = Vec::new();
    check(lf, sig, &mut path)
}

fn check_relation(rel: &str, numeric: bool, sig: &Signature, path: &[usize]) -> Result<(), TypeError> {
    if let Some(rels) = &sig.relations {
        if !rels.contains(rel) {
            return Err(err(path, "known relation", format!("unknown relation {rel}")));
        }
    }
    if numeric {
        if let Some(nums) = &sig.numeric_relations {
            if !nums.contains(rel) {
                return Err(err(path, "numeric relation", format!("non-numeric relation {rel}")));
            }
        }
    }
    Ok(())
}

fn check(lf: &LogicalForm, sig: &Signature, path: &mut Vec<usize>) -> Result<LfType, TypeError> {
    // node-local checks first, then children left to right
    match lf {
        LogicalForm::Entity(e) => {
            if let Some(ents) = &sig.entities {
                if !ents.contains(e) {
                    return Err(err(path, "known entity", format!("unknown entity {e}")));
                }
            }
            return Ok(LfType::Unary);
        }
        LogicalForm::Apply { relation, .. } => check_relation(relation, false, sig, path)?,
        LogicalForm::ArgMax { relation, .. } | LogicalForm::ArgMin { relation, .. } => {
            check_relation(relation, true, sig, path)?
        }
        LogicalForm::Filter { relation, value, .. } => {
            check_relation(relation, true, sig, path)?;
            if let Value::Entity(e) = value {
                return Err(err(path, "numeric value", format!("entity {e}")));
            }
        }
        LogicalForm::Count(_) | LogicalForm::And(..) | LogicalForm::Or(..) => {}
    }
    for (i, child) in lf.children().into_iter().enumerate() {
        path.push(i);
        let ty = check(child, sig, path)?;
        if ty != LfType::Unary {
            return Err(err(path, LfType::Unary.to_string(), ty.to_string()));
        }
        path.pop();
    }
    Ok(if lf.is_count() {
        LfType::NumberSet
    } else {
        LfType::Unary
    })
}
