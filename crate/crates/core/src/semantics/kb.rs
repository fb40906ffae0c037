//! Knowledge base of subject–relation–object triples.
//!
//! File format (UTF-8 TSV):
//!
//! ```text
//! # comment
//! @entity<TAB>id[<TAB>display name]
//! @relation<TAB>id
//! subject<TAB>relation<TAB>object
//! ```
//!
//! The `@entity` / `@relation` lines are optional. When any `@entity` line is
//! present the entity vocabulary is strict: every subject (and every object
//! that is not a number) must be declared. The same holds for `@relation`.
//! Without declarations the vocabularies are inferred from the triples.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::lf::{format_number, parse_number, Value};
use super::syntax::{is_reserved, is_valid_identifier};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: String,
    pub display_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: String,
    pub relation: String,
    pub object: Value,
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    Integrity { line: usize, message: String },
    #[error("{message}")]
    Invalid { message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl KbError {
    pub fn line(&self) -> Option<usize> {
        match self {
            KbError::Parse { line, .. } | KbError::Integrity { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    entities: Vec<Entity>,
    entity_index: HashMap<String, usize>,
    relations: Vec<String>,
    relation_index: HashMap<String, usize>,
    triples: Vec<Triple>,
    triple_set: HashSet<Triple>,
    /// relation -> subject -> objects
    forward: HashMap<String, HashMap<String, Vec<Value>>>,
    numeric_relations: BTreeSet<String>,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.entities == other.entities && self.relations == other.relations && self.triples == other.triples
    }
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_entity(&mut self, id: &str, display_name: &str) -> Result<(), KbError> {
        if !is_valid_identifier(id) {
            return Err(KbError::Invalid {
                message: format!("invalid entity id {id:?}"),
            });
        }
        if self.entity_index.contains_key(id) {
            return Err(KbError::Invalid {
                message: format!("duplicate entity {id}"),
            });
        }
        self.entity_index.insert(id.to_string(), self.entities.len());
        self.entities.push(Entity {
            id: id.to_string(),
            display_name: display_name.to_string(),
        });
        Ok(())
    }

    pub fn add_relation(&mut self, id: &str) -> Result<(), KbError> {
        if !is_valid_identifier(id) || is_reserved(id) {
            return Err(KbError::Invalid {
                message: format!("invalid relation id {id:?}"),
            });
        }
        if self.relation_index.contains_key(id) {
            return Err(KbError::Invalid {
                message: format!("duplicate relation {id}"),
            });
        }
        self.relation_index.insert(id.to_string(), self.relations.len());
        self.relations.push(id.to_string());
        Ok(())
    }

    /// Adds a triple whose ids must already be declared. Duplicates are ignored.
    pub fn add_triple(&mut self, subject: &str, relation: &str, object: Value) -> Result<(), KbError> {
        if !self.entity_index.contains_key(subject) {
            return Err(KbError::Invalid {
                message: format!("unknown subject entity {subject}"),
            });
        }
        if !self.relation_index.contains_key(relation) {
            return Err(KbError::Invalid {
                message: format!("unknown relation {relation}"),
            });
        }
        if let Value::Entity(e) = &object {
            if !self.entity_index.contains_key(e.as_str()) {
                return Err(KbError::Invalid {
                    message: format!("unknown object entity {e}"),
                });
            }
        }
        let triple = Triple {
            subject: subject.to_string(),
            relation: relation.to_string(),
            object,
        };
        if !self.triple_set.insert(triple.clone()) {
            return Ok(());
        }
        if matches!(triple.object, Value::Number(_)) {
            self.numeric_relations.insert(triple.relation.clone());
        }
        self.forward
            .entry(triple.relation.clone())
            .or_default()
            .entry(triple.subject.clone())
            .or_default()
            .push(triple.object.clone());
        self.triples.push(triple);
        Ok(())
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn has_entity(&self, id: &str) -> bool {
        self.entity_index.contains_key(id)
    }

    pub fn has_relation(&self, id: &str) -> bool {
        self.relation_index.contains_key(id)
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entity_index.get(id).map(|&i| &self.entities[i])
    }

    /// Relations with at least one numeric object.
    pub fn numeric_relations(&self) -> &BTreeSet<String> {
        &self.numeric_relations
    }

    pub fn is_numeric_relation(&self, id: &str) -> bool {
        self.numeric_relations.contains(id)
    }

    /// Objects `o` with `(subject, relation, o)` in the KB.
    pub fn objects(&self, subject: &str, relation: &str) -> &[Value] {
        self.forward
            .get(relation)
            .and_then(|m| m.get(subject))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, KbError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_tsv(&text)
    }

    pub fn from_tsv(text: &str) -> Result<Self, KbError> {
        let mut declared_entities: Vec<(usize, String, String)> = Vec::new();
        let mut declared_relations: Vec<(usize, String)> = Vec::new();
        let mut rows: Vec<(usize, String, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            let bad = |message: String| KbError::Parse { line, message };
            match fields[0] {
                "@entity" => {
                    if !(2..=3).contains(&fields.len()) {
                        return Err(bad("expected `@entity<TAB>id[<TAB>name]`".into()));
                    }
                    let name = fields.get(2).copied().unwrap_or(fields[1]);
                    declared_entities.push((line, fields[1].to_string(), name.to_string()));
                }
                "@relation" => {
                    if fields.len() != 2 {
                        return Err(bad("expected `@relation<TAB>id`".into()));
                    }
                    declared_relations.push((line, fields[1].to_string()));
                }
                _ => {
                    if fields.len() != 3 {
                        return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
                    }
                    if fields.iter().any(|f| f.trim().is_empty()) {
                        return Err(bad("empty field".into()));
                    }
                    rows.push((line, fields[0].into(), fields[1].into(), fields[2].into()));
                }
            }
        }

        let mut kb = KnowledgeBase::new();
        let strict_entities = !declared_entities.is_empty();
        let strict_relations = !declared_relations.is_empty();
        for (line, id, name) in &declared_entities {
            kb.add_entity(id, name).map_err(|e| KbError::Integrity {
                line: *line,
                message: e.to_string(),
            })?;
        }
        for (line, id) in &declared_relations {
            kb.add_relation(id).map_err(|e| KbError::Integrity {
                line: *line,
                message: e.to_string(),
            })?;
        }
        if !strict_entities {
            // subjects first, so a numeric-looking object that names a subject stays an entity
            for (line, s, _, _) in &rows {
                if !kb.has_entity(s) {
                    kb.add_entity(s, s).map_err(|e| KbError::Integrity {
                        line: *line,
                        message: e.to_string(),
                    })?;
                }
            }
        }
        for (line, s, r, o) in rows {
            let integrity = |message: String| KbError::Integrity { line, message };
            let object = if kb.has_entity(&o) {
                Value::Entity(o.clone())
            } else if let Some(n) = parse_number(&o) {
                Value::Number(n)
            } else if strict_entities {
                return Err(integrity(format!("undeclared object entity {o}")));
            } else {
                kb.add_entity(&o, &o).map_err(|e| integrity(e.to_string()))?;
                Value::Entity(o.clone())
            };
            if !kb.has_entity(&s) {
                if strict_entities {
                    return Err(integrity(format!("undeclared subject entity {s}")));
                }
                kb.add_entity(&s, &s).map_err(|e| integrity(e.to_string()))?;
            }
            if !kb.has_relation(&r) {
                if strict_relations {
                    return Err(integrity(format!("undeclared relation {r}")));
                }
                kb.add_relation(&r).map_err(|e| integrity(e.to_string()))?;
            }
            kb.add_triple(&s, &r, object).map_err(|e| integrity(e.to_string()))?;
        }
        Ok(kb)
    }

    /// Serializes with full vocabulary declarations so that loading restores an equal KB.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entities {
            if e.display_name == e.id {
                let _ = writeln!(out, "@entity\t{}", e.id);
            } else {
                let _ = writeln!(out, "@entity\t{}\t{}", e.id, e.display_name);
            }
        }
        for r in &self.relations {
            let _ = writeln!(out, "@relation\t{r}");
        }
        for t in &self.triples {
            let object = match &t.object {
                Value::Entity(e) => e.clone(),
                Value::Number(n) => format_number(*n),
            };
            let _ = writeln!(out, "{}\t{}\t{}", t.subject, t.relation, object);
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), KbError> {
        std::fs::write(path, self.to_tsv())?;
        Ok(())
    }
}
