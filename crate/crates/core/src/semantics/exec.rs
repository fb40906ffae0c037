use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::kb::KnowledgeBase;
use super::lf::{Comparator, LogicalForm, Value};

/// The set a logical form denotes. An empty set is the `Empty` denotation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Denotation(pub BTreeSet<Value>);

impl Denotation {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn singleton(v: Value) -> Self {
        Denotation(BTreeSet::from([v]))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.0.iter()
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.0.contains(v)
    }

    /// Values as strings (entity ids and canonical number literals).
    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(Value::to_string).collect()
    }

    /// Inverse of [`Denotation::to_strings`]; `kb` disambiguates numeric-looking entity ids.
    pub fn from_strings<S: AsRef<str>>(items: &[S], kb: Option<&KnowledgeBase>) -> Self {
        Denotation(
            items
                .iter()
                .map(|s| {
                    let s = s.as_ref();
                    if kb.is_some_and(|kb| kb.has_entity(s)) {
                        Value::Entity(s.to_string())
                    } else {
                        Value::parse_literal(s)
                    }
                })
                .collect(),
        )
    }
}

impl FromIterator<Value> for Denotation {
    fn from_iter<T: IntoIterator<Item = Value>>(iter: T) -> Self {
        Denotation(iter.into_iter().collect())
    }
}

impl Serialize for Denotation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Denotation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        Ok(Denotation::from_strings(&items, None))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("no element has a numeric value for relation {0}")]
    NonNumericComparison(String),
    #[error("filter value {0} is not a number")]
    NonNumericValue(String),
}

impl ExecError {
    /// True for the unknown-symbol family.
    pub fn is_unknown_symbol(&self) -> bool {
        matches!(self, ExecError::UnknownEntity(_) | ExecError::UnknownRelation(_))
    }
}

/// Evaluates `lf` against `kb` with set semantics.
pub fn execute(lf: &LogicalForm, kb: &KnowledgeBase) -> Result<Denotation, ExecError> {
    eval(lf, kb).map(Denotation)
}

fn check_relation(kb: &KnowledgeBase, relation: &str) -> Result<(), ExecError> {
    if kb.has_relation(relation) {
        Ok(())
    } else {
        Err(ExecError::UnknownRelation(relation.to_string()))
    }
}

/// Numeric `relation` values of each entity in `set` (entities without one are skipped).
fn numeric_values<'a>(
    kb: &'a KnowledgeBase,
    set: &'a BTreeSet<Value>,
    relation: &'a str,
) -> impl Iterator<Item = (&'a Value, Vec<f64>)> + 'a {
    set.iter().filter_map(move |v| {
        let e = v.as_entity()?;
        let nums: Vec<f64> = kb.objects(e, relation).iter().filter_map(Value::as_number).collect();
        (!nums.is_empty()).then_some((v, nums))
    })
}

fn extremum(
    kb: &KnowledgeBase,
    arg: &LogicalForm,
    relation: &str,
    max: bool,
) -> Result<BTreeSet<Value>, ExecError> {
    check_relation(kb, relation)?;
    let set = eval(arg, kb)?;
    if set.is_empty() {
        return Ok(set);
    }
    let scored: Vec<(&Value, f64)> = numeric_values(kb, &set, relation)
        .map(|(v, nums)| {
            let pick = nums
                .into_iter()
                .reduce(|a, b| if max { a.max(b) } else { a.min(b) })
                .expect("nonempty");
            (v, pick)
        })
        .collect();
    let best = scored
        .iter()
        .map(|&(_, x)| x)
        .reduce(|a, b| if max { a.max(b) } else { a.min(b) })
        .ok_or_else(|| ExecError::NonNumericComparison(relation.to_string()))?;
    Ok(scored.into_iter().filter(|&(_, x)| x == best).map(|(v, _)| v.clone()).collect())
}

fn filter(
    kb: &KnowledgeBase,
    cmp: Comparator,
    arg: &LogicalForm,
    relation: &str,
    value: &Value,
) -> Result<BTreeSet<Value>, ExecError> {
    check_relation(kb, relation)?;
    let threshold = value
        .as_number()
        .ok_or_else(|| ExecError::NonNumericValue(value.to_string()))?;
    let set = eval(arg, kb)?;
    if set.is_empty() {
        return Ok(set);
    }
    let mut any_numeric = false;
    let mut out = BTreeSet::new();
    for (v, nums) in numeric_values(kb, &set, relation) {
        any_numeric = true;
        if nums.iter().any(|&x| cmp.holds(x, threshold)) {
            out.insert(v.clone());
        }
    }
    if !any_numeric {
        return Err(ExecError::NonNumericComparison(relation.to_string()));
    }
    Ok(out)
}

fn eval(lf: &LogicalForm, kb: &KnowledgeBase) -> Result<BTreeSet<Value>, ExecError> {
    match lf {
        LogicalForm::Entity(e) => {
            if !kb.has_entity(e) {
                return Err(ExecError::UnknownEntity(e.clone()));
            }
            Ok(BTreeSet::from([Value::Entity(e.clone())]))
        }
        LogicalForm::Apply { relation, arg } => {
            check_relation(kb, relation)?;
            let set = eval(arg, kb)?;
            Ok(set
                .iter()
                .filter_map(Value::as_entity)
                .flat_map(|e| kb.objects(e, relation).iter().cloned())
                .collect())
        }
        LogicalForm::Count(arg) => {
            let n = eval(arg, kb)?.len();
            Ok(BTreeSet::from([Value::Number(n as f64)]))
        }
        LogicalForm::ArgMax { arg, relation } => extremum(kb, arg, relation, true),
        LogicalForm::ArgMin { arg, relation } => extremum(kb, arg, relation, false),
        LogicalForm::Filter {
            cmp,
            arg,
            relation,
            value,
        } => filter(kb, *cmp, arg, relation, value),
        LogicalForm::And(l, r) => {
            let a = eval(l, kb)?;
            let b = eval(r, kb)?;
            Ok(a.intersection(&b).cloned().collect())
        }
        LogicalForm::Or(l, r) => {
            let mut a = eval(l, kb)?;
            a.extend(eval(r, kb)?);
            Ok(a)
        }
    }
}
