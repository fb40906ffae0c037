//! JSON-lines datasets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semantics::{execute, parse_funql, print_funql, type_check, Denotation, KnowledgeBase, LogicalForm, Signature};
use crate::text::tokenize;

/// An utterance paired with its logical form.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedExample {
    pub utterance: String,
    pub words: Vec<String>,
    pub lf: LogicalForm,
}

/// An utterance paired with its answer.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakExample {
    pub utterance: String,
    pub words: Vec<String>,
    pub denotation: Denotation,
    /// The answer is a single entity.
    pub exactly_one: bool,
    /// Any answer containing `denotation` counts (synthesized examples).
    pub containment: bool,
}

impl WeakExample {
    pub fn new(utterance: &str, denotation: Denotation) -> Self {
        WeakExample {
            utterance: utterance.to_string(),
            words: tokenize(utterance),
            denotation,
            exactly_one: false,
            containment: false,
        }
    }

    /// Whether a predicted answer satisfies this example.
    pub fn is_consistent(&self, predicted: &Denotation) -> bool {
        if self.exactly_one && predicted.len() != 1 {
            return false;
        }
        if self.containment {
            !predicted.is_empty() && self.denotation.iter().all(|v| predicted.contains(v))
        } else {
            *predicted == self.denotation
        }
    }
}

impl SupervisedExample {
    pub fn new(utterance: &str, lf: LogicalForm) -> Self {
        SupervisedExample {
            utterance: utterance.to_string(),
            words: tokenize(utterance),
            lf,
        }
    }

    /// The example's answer under `kb`.
    pub fn to_weak(&self, kb: &KnowledgeBase) -> Result<WeakExample> {
        Ok(WeakExample::new(&self.utterance, execute(&self.lf, kb)?))
    }
}

#[derive(Serialize, Deserialize)]
struct SupervisedJson {
    utterance: String,
    lf: String,
}

#[derive(Serialize, Deserialize)]
struct WeakJson {
    utterance: String,
    denotation: Vec<String>,
    #[serde(default)]
    exactly_one: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    containment: bool,
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses `{"utterance", "lf"}` lines. With a KB, each form must type-check against it.
pub fn parse_supervised(text: &str, file: &str, kb: Option<&KnowledgeBase>) -> Result<Vec<SupervisedExample>> {
    let sig = kb.map(Signature::from_kb);
    let mut out = Vec::new();
    for (line, l) in lines(text) {
        let j: SupervisedJson = serde_json::from_str(l).map_err(|e| Error::data(file, line, e.to_string()))?;
        let lf = parse_funql(&j.lf).map_err(|e| Error::data(file, line, e.to_string()))?;
        if let Some(sig) = &sig {
            type_check(&lf, sig).map_err(|e| Error::data(file, line, e.to_string()))?;
        }
        out.push(SupervisedExample::new(&j.utterance, lf));
    }
    Ok(out)
}

/// Parses `{"utterance", "denotation", "exactly_one"}` lines; `containment` is optional.
pub fn parse_weak(text: &str, file: &str, kb: Option<&KnowledgeBase>) -> Result<Vec<WeakExample>> {
    let mut out = Vec::new();
    for (line, l) in lines(text) {
        let j: WeakJson = serde_json::from_str(l).map_err(|e| Error::data(file, line, e.to_string()))?;
        if j.denotation.is_empty() {
            return Err(Error::data(file, line, "empty denotation"));
        }
        out.push(WeakExample {
            exactly_one: j.exactly_one,
            containment: j.containment,
            ..WeakExample::new(&j.utterance, Denotation::from_strings(&j.denotation, kb))
        });
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn load_supervised(path: &Path, kb: Option<&KnowledgeBase>) -> Result<Vec<SupervisedExample>> {
    parse_supervised(&read(path)?, &path.display().to_string(), kb)
}

pub fn load_weak(path: &Path, kb: Option<&KnowledgeBase>) -> Result<Vec<WeakExample>> {
    parse_weak(&read(path)?, &path.display().to_string(), kb)
}

pub fn supervised_to_jsonl(examples: &[SupervisedExample]) -> String {
    examples
        .iter()
        .map(|e| {
            let j = SupervisedJson {
                utterance: e.utterance.clone(),
                lf: print_funql(&e.lf),
            };
            serde_json::to_string(&j).expect("serializable") + "\n"
        })
        .collect()
}

pub fn weak_to_jsonl(examples: &[WeakExample]) -> String {
    examples
        .iter()
        .map(|e| {
            let j = WeakJson {
                utterance: e.utterance.clone(),
                denotation: e.denotation.to_strings(),
                exactly_one: e.exactly_one,
                containment: e.containment,
            };
            serde_json::to_string(&j).expect("serializable") + "\n"
        })
        .collect()
}

/// Either dataset kind, told apart by the `lf` key of the first line.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Supervised(Vec<SupervisedExample>),
    Weak(Vec<WeakExample>),
}

impl Dataset {
    pub fn load(path: &Path, kb: Option<&KnowledgeBase>) -> Result<Self> {
        let text = read(path)?;
        let file = path.display().to_string();
        let first = lines(&text).next().map(|(_, l)| l.to_string()).unwrap_or_default();
        let supervised = serde_json::from_str::<serde_json::Value>(&first)
            .ok()
            .is_some_and(|v| v.get("lf").is_some());
        if supervised {
            Ok(Dataset::Supervised(parse_supervised(&text, &file, kb)?))
        } else {
            Ok(Dataset::Weak(parse_weak(&text, &file, kb)?))
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Supervised(v) => v.len(),
            Dataset::Weak(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An entity mention `tokens[span.0..span.1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub span: (usize, usize),
    pub entity: String,
}

/// A declarative sentence with linked entity mentions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistantSentence {
    pub tokens: Vec<String>,
    pub mentions: Vec<Mention>,
}

pub fn parse_corpus(text: &str, file: &str) -> Result<Vec<DistantSentence>> {
    let mut out = Vec::new();
    for (line, l) in lines(text) {
        let s: DistantSentence = serde_json::from_str(l).map_err(|e| Error::data(file, line, e.to_string()))?;
        for m in &s.mentions {
            if m.span.0 >= m.span.1 || m.span.1 > s.tokens.len() {
                return Err(Error::data(file, line, format!("mention span {:?} out of range", m.span)));
            }
        }
        out.push(s);
    }
    Ok(out)
}

pub fn load_corpus(path: &Path) -> Result<Vec<DistantSentence>> {
    parse_corpus(&read(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::Value;

    fn kb() -> KnowledgeBase {
        KnowledgeBase::from_tsv("Barack_Obama\tdaughterOf\tMalia_Obama\n2014\tyear\tMalia_Obama\n").unwrap()
    }

    #[test]
    fn formats_round_trip() {
        let kb = kb();
        let text = "{\"utterance\": \"Whose daughter?\", \"lf\": \"daughterOf(Barack_Obama)\"}\n";
        let s = parse_supervised(text, "s", Some(&kb)).unwrap();
        assert_eq!(s[0].words, ["whose", "daughter"]);
        assert_eq!(parse_supervised(&supervised_to_jsonl(&s), "s", Some(&kb)).unwrap(), s);

        let text = "{\"utterance\": \"x\", \"denotation\": [\"2014\", \"3\"], \"exactly_one\": true}\n";
        let w = parse_weak(text, "w", Some(&kb)).unwrap();
        assert!(w[0].denotation.contains(&Value::Entity("2014".into())));
        assert!(w[0].denotation.contains(&Value::Number(3.0)));
        assert_eq!(parse_weak(&weak_to_jsonl(&w), "w", Some(&kb)).unwrap(), w);
    }

    #[test]
    fn data_errors_cite_lines() {
        let kb = kb();
        let err = parse_supervised("\n{\"utterance\": \"a\", \"lf\": \"nosuch(Barack_Obama)\"}", "d.jsonl", Some(&kb));
        assert!(err.unwrap_err().to_string().starts_with("d.jsonl:2:"));
        assert!(parse_weak("{\"utterance\": \"a\", \"denotation\": []}", "w", None).is_err());
        assert!(parse_corpus("{\"tokens\": [\"a\"], \"mentions\": [{\"span\": [0, 2], \"entity\": \"x\"}]}", "c").is_err());
    }

    #[test]
    fn consistency_modes() {
        let d = |xs: &[&str]| Denotation::from_strings(xs, None);
        let mut ex = WeakExample::new("q", d(&["a"]));
        assert!(ex.is_consistent(&d(&["a"])));
        assert!(!ex.is_consistent(&d(&["a", "b"])));
        ex.containment = true;
        assert!(ex.is_consistent(&d(&["a", "b"])));
        ex.exactly_one = true;
        assert!(!ex.is_consistent(&d(&["a", "b"])));
        assert!(ex.is_consistent(&d(&["a"])));
    }
}
