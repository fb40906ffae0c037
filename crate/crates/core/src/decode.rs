//! Grammar-constrained greedy and beam decoding, and dictionary entity linking.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DecodeContext, ParserModel, Policy};
use crate::neural::{argmax, Eval, Ops, StackState};
use crate::semantics::{execute, print_funql, Denotation, ExecError, KnowledgeBase, LogicalForm};
use crate::text::tokenize;
use crate::transitions::{Derivation, ParserConfig, TokenClass, TransitionOp};

/// Upper bound on derivation length; the structural limits keep real derivations far shorter.
const MAX_STEPS: usize = 512;

/// Entities kept per linked span.
pub const MAX_CANDIDATES_PER_SPAN: usize = 10;

/// A decoded logical form with its score and execution result.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub lf: LogicalForm,
    pub derivation: Derivation,
    pub log_prob: f64,
    pub denotation: Result<Denotation, ExecError>,
}

impl Candidate {
    /// Denotation, with failed executions treated as empty.
    pub fn answer(&self) -> Denotation {
        self.denotation.clone().unwrap_or_default()
    }
}

/// Beam output sorted by log-probability, best first, one entry per logical form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    pub utterance: String,
    pub candidates: Vec<Candidate>,
}

#[derive(Serialize, Deserialize)]
struct CandidateJson {
    lf: String,
    logprob: f64,
    denotation: Denotation,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    error: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct CandidateSetJson {
    utterance: String,
    candidates: Vec<CandidateJson>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.candidates.first()
    }

    /// One JSON line: `{"utterance", "candidates": [{"lf", "logprob", "denotation"}]}`.
    pub fn to_json(&self) -> String {
        let j = CandidateSetJson {
            utterance: self.utterance.clone(),
            candidates: self
                .candidates
                .iter()
                .map(|c| CandidateJson {
                    lf: print_funql(&c.lf),
                    logprob: c.log_prob,
                    denotation: c.answer(),
                    error: c.denotation.as_ref().err().map(|e| e.to_string()),
                })
                .collect(),
        };
        serde_json::to_string(&j).expect("serializable")
    }
}

struct Hyp<V> {
    derivation: Derivation,
    config: ParserConfig,
    stack: StackState<V>,
    log_prob: f64,
    /// Entity rows emitted so far.
    used: Vec<usize>,
}

impl<V> Hyp<V> {
    fn finished(&self) -> bool {
        self.config.is_complete()
    }
}

/// Per-hypothesis values shared by the action and token phases.
struct StepCache<V> {
    scores: V,
    soft: (V, V),
    tokens: HashMap<TokenClass, Vec<f64>>,
}

fn sort_desc<T>(items: &mut [T], key: impl Fn(&T) -> f64) {
    items.sort_by(|a, b| key(b).total_cmp(&key(a)));
}

/// Picks the highest-scoring legal action, then the highest-scoring token.
pub fn greedy_decode(model: &ParserModel, ctx: &DecodeContext) -> Result<Derivation> {
    let mode = model.config.mode;
    let mut o = Eval::new(&model.params);
    let enc = model.encode(&mut o, &ctx.words)?;
    let mut stack = model.start_stack(&mut o);
    let mut config = ParserConfig::new(mode);
    let mut d = Derivation::new(mode);
    let mut used = Vec::new();
    while !config.is_complete() {
        let legal = ctx.legal_ops(&config, &used);
        if legal.is_empty() || d.steps.len() >= MAX_STEPS {
            return Err(Error::DecodeStall(config.render_stack()));
        }
        let scores = model.scores(&mut o, &enc, &stack);
        let soft = model.soft_feature(&mut o, &enc, &stack, &scores, None);
        let alp = model.action_log_probs(&mut o, &soft.0, &legal)?;
        let op = legal[argmax(o.value(&alp))];
        let token = match config.token_class(op) {
            Some(class) => {
                let rows = ctx.token_rows(class, &used);
                let ts = model.token_step(&mut o, &enc, &stack, &scores, &soft, &rows, &mut Policy::Infer, 0, None)?;
                let row = rows[argmax(o.value(&ts.log_probs))];
                if class == TokenClass::Entity {
                    used.push(row);
                }
                Some(model.tokens.item(row).to_string())
            }
            None => None,
        };
        model.advance(&mut o, &mut stack, &config, op, token.as_deref())?;
        config.apply(op, token.as_deref())?;
        d.push(op, token.as_deref());
    }
    Ok(d)
}

/// Fixed-width beam search. Each step first keeps the `width` best
/// (hypothesis, action) pairs, then the `width` best token completions.
/// Finished hypotheses stay in the beam and compete without being expanded.
/// Hypotheses that could only continue by repeating an entity are dropped
/// while any other hypothesis remains.
/// Returns complete derivations with their log-probabilities, best first.
pub fn beam_search(model: &ParserModel, ctx: &DecodeContext, width: usize) -> Result<Vec<(Derivation, f64)>> {
    let width = width.max(1);
    let mode = model.config.mode;
    let mut o = Eval::new(&model.params);
    let enc = model.encode(&mut o, &ctx.words)?;
    let mut beam = vec![Hyp {
        derivation: Derivation::new(mode),
        config: ParserConfig::new(mode),
        stack: model.start_stack(&mut o),
        log_prob: 0.0,
        used: Vec::new(),
    }];
    for _ in 0..MAX_STEPS {
        if beam.iter().all(Hyp::finished) {
            let mut out: Vec<_> = beam.into_iter().map(|h| (h.derivation, h.log_prob)).collect();
            sort_desc(&mut out, |x| x.1);
            return Ok(out);
        }

        let stuck: Vec<bool> = beam
            .iter()
            .map(|h| !h.finished() && ctx.must_reuse_entity(&h.config, &h.used))
            .collect();
        let prune = stuck.iter().any(|s| !s);
        let mut caches: Vec<Option<StepCache<_>>> = Vec::with_capacity(beam.len());
        let mut actions: Vec<(usize, Option<TransitionOp>, f64)> = Vec::new();
        for (i, h) in beam.iter().enumerate() {
            if h.finished() {
                caches.push(None);
                actions.push((i, None, h.log_prob));
                continue;
            }
            if prune && stuck[i] {
                caches.push(None);
                continue;
            }
            let legal = ctx.legal_ops(&h.config, &h.used);
            if legal.is_empty() {
                return Err(Error::DecodeStall(h.config.render_stack()));
            }
            let scores = model.scores(&mut o, &enc, &h.stack);
            let soft = model.soft_feature(&mut o, &enc, &h.stack, &scores, None);
            let alp = model.action_log_probs(&mut o, &soft.0, &legal)?;
            for (op, lp) in legal.iter().zip(o.value(&alp)) {
                actions.push((i, Some(*op), h.log_prob + lp));
            }
            caches.push(Some(StepCache {
                scores,
                soft,
                tokens: HashMap::new(),
            }));
        }
        sort_desc(&mut actions, |x| x.2);
        actions.truncate(width);

        let mut expansions: Vec<(usize, Option<TransitionOp>, Option<usize>, f64)> = Vec::new();
        for (i, op, lp) in actions {
            let Some(op) = op else {
                expansions.push((i, None, None, lp));
                continue;
            };
            let h = &beam[i];
            let Some(class) = h.config.token_class(op) else {
                expansions.push((i, Some(op), None, lp));
                continue;
            };
            let cache = caches[i].as_mut().expect("live hypothesis");
            let rows = ctx.token_rows(class, &h.used);
            if !cache.tokens.contains_key(&class) {
                let ts = model.token_step(
                    &mut o,
                    &enc,
                    &h.stack,
                    &cache.scores,
                    &cache.soft,
                    &rows,
                    &mut Policy::Infer,
                    0,
                    None,
                )?;
                cache.tokens.insert(class, o.value(&ts.log_probs).to_vec());
            }
            for (&row, tlp) in rows.iter().zip(&cache.tokens[&class]) {
                expansions.push((i, Some(op), Some(row), lp + tlp));
            }
        }
        sort_desc(&mut expansions, |x| x.3);
        expansions.truncate(width);

        let mut next = Vec::with_capacity(expansions.len());
        let mut old: Vec<Option<Hyp<_>>> = beam.into_iter().map(Some).collect();
        let mut uses = vec![0usize; old.len()];
        for e in &expansions {
            uses[e.0] += 1;
        }
        for (i, op, row, lp) in expansions {
            uses[i] -= 1;
            let mut h = if uses[i] == 0 {
                old[i].take().expect("hypothesis used once")
            } else {
                let src = old[i].as_ref().expect("hypothesis");
                Hyp {
                    derivation: src.derivation.clone(),
                    config: src.config.clone(),
                    stack: src.stack.clone(),
                    log_prob: src.log_prob,
                    used: src.used.clone(),
                }
            };
            if let Some(op) = op {
                if h.config.token_class(op) == Some(TokenClass::Entity) {
                    h.used.extend(row);
                }
                let token = row.map(|r| model.tokens.item(r).to_string());
                model.advance(&mut o, &mut h.stack, &h.config, op, token.as_deref())?;
                h.config.apply(op, token.as_deref())?;
                h.derivation.push(op, token.as_deref());
            }
            h.log_prob = lp;
            next.push(h);
        }
        beam = next;
    }
    Err(Error::DecodeStall(format!("beam did not finish within {MAX_STEPS} steps")))
}

/// Beam search followed by execution. Logical forms reached by several
/// derivations are merged, keeping the highest log-probability.
pub fn beam_decode(model: &ParserModel, kb: &KnowledgeBase, ctx: &DecodeContext, width: usize) -> Result<CandidateSet> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    for (derivation, log_prob) in beam_search(model, ctx, width)? {
        let lf = crate::transitions::reconstruct(&derivation)?;
        let key = print_funql(&lf);
        if seen.contains_key(&key) {
            continue;
        }
        seen.insert(key, candidates.len());
        let denotation = execute(&lf, kb);
        candidates.push(Candidate {
            lf,
            derivation,
            log_prob,
            denotation,
        });
    }
    Ok(CandidateSet {
        utterance: ctx.words.join(" "),
        candidates,
    })
}

/// Tokenizes, links entities and decodes one utterance.
pub fn parse_utterance(
    model: &ParserModel,
    kb: &KnowledgeBase,
    linker: Option<&Linker>,
    utterance: &str,
    width: usize,
) -> Result<CandidateSet> {
    let words = tokenize(utterance);
    let entities = linker.map(|l| l.entity_mask(&words)).unwrap_or_default();
    let ctx = model.context(&words, kb, &entities);
    let mut set = beam_decode(model, kb, &ctx, width)?;
    set.utterance = utterance.to_string();
    Ok(set)
}

/// Decodes several utterances on worker threads; output order follows input order.
pub fn parse_batch(
    model: &ParserModel,
    kb: &KnowledgeBase,
    linker: Option<&Linker>,
    utterances: &[String],
    width: usize,
) -> Vec<Result<CandidateSet>> {
    parallel_map(utterances, |u| parse_utterance(model, kb, linker, u, width))
}

/// Maps `f` over `items` on up to `available_parallelism` scoped threads.
pub fn parallel_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    if workers <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(f).collect::<Vec<U>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Phrase dictionary mapping tokenized surface strings to ranked entity ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Linker {
    entries: HashMap<Vec<String>, Vec<String>>,
    longest: usize,
}

impl Linker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, phrase: &str, entity: &str) {
        let key = tokenize(phrase);
        if key.is_empty() {
            return;
        }
        self.longest = self.longest.max(key.len());
        let list = self.entries.entry(key).or_default();
        if !list.iter().any(|e| e == entity) {
            list.push(entity.to_string());
        }
    }

    /// `phrase<TAB>entity_id` per line, best entity first for repeated phrases.
    pub fn from_tsv(text: &str, file: &str) -> Result<Self> {
        let mut l = Linker::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (phrase, entity) = line
                .split_once('\t')
                .ok_or_else(|| Error::data(file, i + 1, "expected phrase<TAB>entity"))?;
            l.add(phrase, entity.trim());
        }
        Ok(l)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_tsv(&std::fs::read_to_string(path)?, &path.display().to_string())
    }

    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<_> = self.entries.iter().collect();
        rows.sort();
        let mut out = String::new();
        for (phrase, entities) in rows {
            for e in entities {
                out.push_str(&format!("{}\t{e}\n", phrase.join(" ")));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Scans left to right taking the longest dictionary phrase at each position;
    /// keeps at most ten entities per span and removes duplicates.
    pub fn entity_mask(&self, words: &[String]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let max = self.longest.min(words.len() - i);
            let hit = (1..=max)
                .rev()
                .find_map(|n| self.entries.get(&words[i..i + n]).map(|es| (n, es)));
            match hit {
                Some((n, es)) => {
                    for e in es.iter().take(MAX_CANDIDATES_PER_SPAN) {
                        if !out.contains(e) {
                            out.push(e.clone());
                        }
                    }
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }
}
