//! Question synthesis from entity-annotated declarative sentences.

use super::data::{DistantSentence, WeakExample};
use crate::semantics::{Denotation, KnowledgeBase, Value};
use crate::text::tokenize;

pub const BLANK: &str = "_blank_";

/// Outcome of [`synth_distant`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DistantOutput {
    pub examples: Vec<WeakExample>,
    /// Indices of sentences with fewer than two KB-linked mentions.
    pub skipped: Vec<usize>,
}

/// One example per linked mention: the mention is replaced by [`BLANK`] and the
/// answer must contain its entity. A mention preceded by "the" also requires a
/// single-entity answer.
pub fn synth_distant(sentences: &[DistantSentence], kb: &KnowledgeBase) -> DistantOutput {
    let mut out = DistantOutput::default();
    for (i, s) in sentences.iter().enumerate() {
        let linked: Vec<_> = s.mentions.iter().filter(|m| kb.has_entity(&m.entity)).collect();
        if linked.len() < 2 {
            out.skipped.push(i);
            continue;
        }
        for m in linked {
            let (a, b) = m.span;
            let mut toks: Vec<&str> = s.tokens[..a].iter().map(String::as_str).collect();
            toks.push(BLANK);
            toks.extend(s.tokens[b..].iter().map(String::as_str));
            let utterance = toks.join(" ");
            let exactly_one = a > 0 && s.tokens[a - 1].eq_ignore_ascii_case("the");
            out.examples.push(WeakExample {
                utterance: utterance.clone(),
                words: tokenize(&utterance),
                denotation: Denotation::singleton(Value::Entity(m.entity.clone())),
                exactly_one,
                containment: true,
            });
        }
    }
    out
}
