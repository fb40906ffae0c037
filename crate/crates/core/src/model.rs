//! The parser network: utterance encoder, stack encoder, attention and output heads.

use std::borrow::Cow;
use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attention::{
    binomial_attend, binomial_log_prob, binomial_select, crf_marginals, effective_selection, hard_argmax, hard_sample,
    soft_attend, structured_attend, AttentionKind, AttentionParams, AttentionTrace, Heads,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::neural::{
    dropout_mask, encode_utterance, BiEncoder, Eval, NeuralError, NodeId, Ops, ParamId, ParamStore, StackEncoder,
    StackState, Tape, Vocab,
};
use crate::semantics::{format_number, parse_number, KnowledgeBase, LogicalForm, Value};
use crate::text::is_number_token;
use crate::transitions::{Derivation, Grammar, Limits, OpTag, ParserConfig, TokenClass, TransitionOp};

pub const CHECKPOINT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ModelIds {
    word_emb: ParamId,
    tok_emb: ParamId,
    act_emb: ParamId,
    encoder: BiEncoder,
    stack: StackEncoder,
    attn: AttentionParams,
    heads: Heads,
}

/// Parameters and vocabularies of one parser.
#[derive(Debug, Clone)]
pub struct ParserModel {
    pub config: RunConfig,
    pub params: ParamStore,
    pub words: Vocab,
    pub tokens: Vocab,
    ids: ModelIds,
}

/// Per-utterance token masks and the words to encode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeContext {
    pub words: Vec<String>,
    pub entity_rows: Vec<usize>,
    pub number_rows: Vec<usize>,
    pub relation_rows: Vec<usize>,
    pub numeric_relation_rows: Vec<usize>,
    pub limits: Limits,
    pub distinct_entities: bool,
}

impl DecodeContext {
    pub fn grammar(&self) -> Grammar {
        Grammar {
            has_entities: !self.entity_rows.is_empty(),
            has_numbers: !self.number_rows.is_empty(),
            has_relations: !self.relation_rows.is_empty(),
            has_numeric_relations: !self.numeric_relation_rows.is_empty(),
        }
    }

    pub fn rows(&self, class: TokenClass) -> &[usize] {
        match class {
            TokenClass::Entity => &self.entity_rows,
            TokenClass::Number => &self.number_rows,
            TokenClass::Relation => &self.relation_rows,
            TokenClass::NumericRelation => &self.numeric_relation_rows,
        }
    }

    fn unused_entities(&self, used: &[usize]) -> Vec<usize> {
        self.entity_rows.iter().copied().filter(|r| !used.contains(r)).collect()
    }

    /// Legal operations of `config` given the entity rows the derivation has
    /// already emitted. With `distinct_entities`, an entity slot is dropped
    /// once every candidate is used, unless nothing else would remain.
    pub fn legal_ops(&self, config: &ParserConfig, used: &[usize]) -> Vec<TransitionOp> {
        let mut ops = config.legal_ops(&self.grammar(), &self.limits);
        let entity_op = TransitionOp::Ter(OpTag::Entity);
        if self.distinct_entities
            && ops.len() > 1
            && config.token_class(entity_op) == Some(TokenClass::Entity)
            && self.unused_entities(used).is_empty()
        {
            ops.retain(|&op| op != entity_op);
        }
        ops
    }

    /// Whether `config` can only continue by repeating an entity.
    pub fn must_reuse_entity(&self, config: &ParserConfig, used: &[usize]) -> bool {
        self.distinct_entities
            && !self.entity_rows.is_empty()
            && config.token_class(TransitionOp::Ter(OpTag::Entity)) == Some(TokenClass::Entity)
            && self.unused_entities(used).is_empty()
            && config.legal_ops(&self.grammar(), &self.limits) == [TransitionOp::Ter(OpTag::Entity)]
    }

    /// Token rows on offer for `class`; see [`Self::legal_ops`].
    pub fn token_rows(&self, class: TokenClass, used: &[usize]) -> Cow<'_, [usize]> {
        if self.distinct_entities && class == TokenClass::Entity {
            let left = self.unused_entities(used);
            if !left.is_empty() {
                return Cow::Owned(left);
            }
        }
        Cow::Borrowed(self.rows(class))
    }
}

/// An utterance run through the bidirectional encoder.
#[derive(Debug, Clone)]
pub struct Encoded<V> {
    pub buffer: Vec<V>,
    /// `W_b b_i`, shared by every attention step.
    pub projected: Vec<V>,
}

/// Attention decision for one token prediction of a stochastic variant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Choice {
    Index(usize),
    Mask(Vec<bool>),
}

/// How stochastic attention picks its choice.
pub enum Policy<'a> {
    /// Argmax (hard) or threshold (binomial).
    Infer,
    Sample(&'a mut ChaCha8Rng),
    /// Replays the given choices in order.
    Forced(&'a [Choice]),
}

/// Outcome of one token-attention step.
pub struct TokenStep<V> {
    pub log_probs: V,
    /// `log p(u)` of the attention choice (stochastic variants).
    pub choice_log_prob: Option<V>,
    pub choice: Option<Choice>,
    /// Per-word weights for traces.
    pub weights: Vec<f64>,
}

/// Result of scoring a fixed derivation.
#[derive(Debug, Clone)]
pub struct ForcedRun {
    /// Quantity to minimize; its gradient is the training signal.
    pub surrogate: NodeId,
    pub action_log_prob: f64,
    pub token_log_prob: f64,
    /// `Σ log p(u)` over the attention choices (0 for deterministic variants).
    pub choice_log_prob: f64,
    /// Soft-attention token log-likelihood used as the baseline.
    pub baseline: f64,
    pub choices: Vec<Choice>,
    pub nodes: RunNodes,
}

/// Tape nodes of the summed log-likelihood terms of a [`ForcedRun`].
#[derive(Debug, Clone, Copy)]
pub struct RunNodes {
    pub action: NodeId,
    pub token: NodeId,
    pub choice: NodeId,
    pub baseline: NodeId,
}

impl ForcedRun {
    pub fn log_prob(&self) -> f64 {
        self.action_log_prob + self.token_log_prob
    }
}

/// Operator and placeholder tokens every token vocabulary contains.
pub fn operator_tokens() -> Vec<String> {
    OpTag::nonterminals()
        .into_iter()
        .filter(|t| *t != OpTag::Relation)
        .map(OpTag::name)
        .collect()
}

/// Token vocabulary: operators, KB relations and entities, and number literals
/// from the KB and the given logical forms.
pub fn build_token_vocab<'a>(kb: &KnowledgeBase, lfs: impl IntoIterator<Item = &'a LogicalForm>) -> Vocab {
    let mut v = Vocab::new();
    for t in operator_tokens() {
        v.add(&t);
    }
    for r in kb.relations() {
        v.add(r);
    }
    for e in kb.entities() {
        v.add(&e.id);
    }
    let mut numbers = BTreeSet::new();
    for t in kb.triples() {
        if let Value::Number(n) = t.object {
            numbers.insert(format_number(n));
        }
    }
    for lf in lfs {
        for t in lf.tokens() {
            v.add(&t);
        }
    }
    for n in numbers {
        v.add(&n);
    }
    v
}

/// Word vocabulary over tokenized utterances.
pub fn build_word_vocab<'a>(utterances: impl IntoIterator<Item = &'a [String]>) -> Vocab {
    let mut v = Vocab::new();
    for u in utterances {
        for w in u {
            v.add(w);
        }
    }
    v
}

impl ParserModel {
    pub fn new(config: RunConfig, words: Vocab, tokens: Vocab) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut p = ParamStore::new();
        let (wd, td, h) = (config.word_dim, config.token_dim, config.hidden_dim);
        let word_emb = p.add_uniform("emb.word", &[words.len(), wd], &mut rng);
        let tok_emb = p.add_uniform("emb.token", &[tokens.len(), td], &mut rng);
        let act_emb = p.add_uniform("emb.action", &[TransitionOp::count(), td], &mut rng);
        let encoder = BiEncoder::new(&mut p, "enc", wd, h, &mut rng);
        let stack = StackEncoder::new(&mut p, "stack", td, h, &mut rng);
        let attn = AttentionParams::new(&mut p, 2 * h, h, h, &mut rng);
        let heads = Heads::new(&mut p, 2 * h, h, h, TransitionOp::count(), tokens.len(), &mut rng);
        ParserModel {
            config,
            params: p,
            words,
            tokens,
            ids: ModelIds {
                word_emb,
                tok_emb,
                act_emb,
                encoder,
                stack,
                attn,
                heads,
            },
        }
    }

    pub fn attention_params(&self) -> AttentionParams {
        self.ids.attn
    }

    pub fn heads(&self) -> Heads {
        self.ids.heads
    }

    /// Overwrites word-embedding rows from a `word v1 v2 ...` text file; returns rows set.
    pub fn load_word_vectors(&mut self, path: &Path) -> Result<usize> {
        let text = std::fs::read_to_string(path)?;
        let dim = self.config.word_dim;
        let mut set = 0;
        for (i, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let values: Vec<f64> = parts
                .map(|x| x.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::data(path.display().to_string(), i + 1, "bad number"))?;
            if values.len() != dim {
                return Err(Error::data(
                    path.display().to_string(),
                    i + 1,
                    format!("expected {dim} values, found {}", values.len()),
                ));
            }
            if let Some(r) = self.words.get(word) {
                let t = self.params.get_mut(self.ids.word_emb);
                t.data[r * dim..(r + 1) * dim].copy_from_slice(&values);
                set += 1;
            }
        }
        Ok(set)
    }

    /// Token masks for an utterance. An empty candidate list allows every KB entity.
    pub fn context(&self, words: &[String], kb: &KnowledgeBase, entity_candidates: &[String]) -> DecodeContext {
        let rows_of = |items: &mut dyn Iterator<Item = &str>| -> Vec<usize> {
            let mut seen = BTreeSet::new();
            items.filter_map(|s| self.tokens.get(s)).filter(|r| seen.insert(*r)).collect()
        };
        let entity_rows = if entity_candidates.is_empty() {
            rows_of(&mut kb.entities().iter().map(|e| e.id.as_str()))
        } else {
            rows_of(&mut entity_candidates.iter().map(String::as_str).filter(|e| kb.has_entity(e)))
        };
        let numbers: Vec<String> = words
            .iter()
            .filter(|w| is_number_token(w))
            .filter_map(|w| parse_number(w).map(format_number))
            .collect();
        DecodeContext {
            words: words.to_vec(),
            entity_rows,
            number_rows: rows_of(&mut numbers.iter().map(String::as_str)),
            relation_rows: rows_of(&mut kb.relations().iter().map(String::as_str)),
            numeric_relation_rows: rows_of(&mut kb.numeric_relations().iter().map(String::as_str)),
            limits: self.config.limits().for_sentence(words.len()),
            distinct_entities: self.config.distinct_entities,
        }
    }

    pub fn encode<O: Ops>(&self, o: &mut O, words: &[String]) -> Result<Encoded<O::V>> {
        let ids: Vec<usize> = words.iter().map(|w| self.words.id(w)).collect();
        let buffer = encode_utterance(o, &self.ids.encoder, self.ids.word_emb, &ids)?;
        let projected = self.ids.attn.project_buffer(o, &buffer);
        Ok(Encoded { buffer, projected })
    }

    pub fn start_stack<O: Ops>(&self, o: &mut O) -> StackState<O::V> {
        self.ids.stack.start(o)
    }

    /// Attention scores `u_t` for the current stack state.
    pub fn scores<O: Ops>(&self, o: &mut O, enc: &Encoded<O::V>, stack: &StackState<O::V>) -> O::V {
        self.ids.attn.score(o, &enc.projected, stack.top())
    }

    /// Soft-attention feature `tanh(W_f [b̄; s])` used by the action head.
    pub fn soft_feature<O: Ops>(
        &self,
        o: &mut O,
        enc: &Encoded<O::V>,
        stack: &StackState<O::V>,
        scores: &O::V,
        dropout: Option<&[f64]>,
    ) -> (O::V, O::V) {
        let (bbar, alpha) = soft_attend(o, scores, &enc.buffer);
        (self.ids.heads.features(o, &bbar, stack.top(), dropout), alpha)
    }

    /// Log-probabilities over `legal` (in order).
    pub fn action_log_probs<O: Ops>(&self, o: &mut O, feature: &O::V, legal: &[TransitionOp]) -> Result<O::V> {
        let rows: Vec<usize> = legal.iter().map(|op| op.index()).collect();
        Ok(self.ids.heads.action_log_probs(o, feature, &rows)?)
    }

    /// Token distribution over `rows` with the configured attention variant.
    #[allow(clippy::too_many_arguments)]
    pub fn token_step<O: Ops>(
        &self,
        o: &mut O,
        enc: &Encoded<O::V>,
        stack: &StackState<O::V>,
        scores: &O::V,
        soft: &(O::V, O::V),
        rows: &[usize],
        policy: &mut Policy<'_>,
        forced_index: usize,
        dropout: Option<&[f64]>,
    ) -> Result<TokenStep<O::V>> {
        let heads = self.ids.heads;
        let s = stack.top();
        let (feature, choice_log_prob, choice, weights) = match self.config.attention {
            AttentionKind::Soft => (soft.0.clone(), None, None, o.value(&soft.1).to_vec()),
            AttentionKind::Structured => {
                let w = o.param(self.ids.attn.crf);
                let marg = crf_marginals(o, scores, &w);
                let bbar = structured_attend(o, &marg, &enc.buffer);
                let weights = o.value(&marg).to_vec();
                (heads.features(o, &bbar, s, dropout), None, None, weights)
            }
            AttentionKind::Hard => {
                let sv = o.value(scores).to_vec();
                let j = match policy {
                    Policy::Infer => hard_argmax(&sv).0,
                    Policy::Sample(rng) => hard_sample(&sv, rng).0,
                    Policy::Forced(cs) => match cs.get(forced_index) {
                        Some(Choice::Index(j)) if *j < sv.len() => *j,
                        other => return Err(Error::Invalid(format!("forced choice {other:?} is not a buffer index"))),
                    },
                };
                let lsm = o.log_softmax(scores);
                let lp = o.pick(&lsm, j);
                let mut weights = vec![0.0; sv.len()];
                weights[j] = 1.0;
                let f = heads.features(o, &enc.buffer[j], s, dropout);
                (f, Some(lp), Some(Choice::Index(j)), weights)
            }
            AttentionKind::Binomial => {
                let sv = o.value(scores).to_vec();
                let mask = match policy {
                    Policy::Infer => binomial_select::<ChaCha8Rng>(&sv, None),
                    Policy::Sample(rng) => binomial_select(&sv, Some(&mut **rng)),
                    Policy::Forced(cs) => match cs.get(forced_index) {
                        Some(Choice::Mask(m)) if m.len() == sv.len() => m.clone(),
                        other => return Err(Error::Invalid(format!("forced choice {other:?} is not a selection mask"))),
                    },
                };
                let lp = binomial_log_prob(o, scores, &mask);
                let bbar = binomial_attend(o, scores, &enc.buffer, &mask);
                let mut weights = vec![0.0; sv.len()];
                for i in effective_selection(&sv, &mask) {
                    weights[i] = 1.0;
                }
                let f = heads.features(o, &bbar, s, dropout);
                (f, Some(lp), Some(Choice::Mask(mask)), weights)
            }
        };
        let log_probs = heads.token_log_probs(o, &feature, rows)?;
        Ok(TokenStep {
            log_probs,
            choice_log_prob,
            choice,
            weights,
        })
    }

    fn token_embedding<O: Ops>(&self, o: &mut O, token: &str) -> O::V {
        o.row(self.ids.tok_emb, self.tokens.id(token))
    }

    /// Mirrors a transition on the stack encoder. `config` is the configuration before `op`.
    pub fn advance<O: Ops>(
        &self,
        o: &mut O,
        stack: &mut StackState<O::V>,
        config: &ParserConfig,
        op: TransitionOp,
        token: Option<&str>,
    ) -> Result<()> {
        let enc = self.ids.stack;
        let surface = token.map(str::to_string).or_else(|| op.implied_token());
        match op {
            TransitionOp::Nt(_) | TransitionOp::Ter(_) => {
                let surface = surface.ok_or_else(|| Error::Invalid(format!("{op} without a token")))?;
                let y = self.token_embedding(o, &surface);
                let a = o.row(self.ids.act_emb, op.index());
                let input = o.add(&y, &a);
                enc.push(o, stack, &input, y)?;
            }
            TransitionOp::Red => {
                let width = config
                    .pop_count(op)
                    .ok_or_else(|| Error::Invalid("RED without a complete nonterminal".into()))?;
                enc.reduce(o, stack, width - 1, None)?;
            }
            TransitionOp::NtRed(tag) => {
                let surface = surface.ok_or_else(|| Error::Invalid(format!("{op} without a token")))?;
                let p = self.token_embedding(o, &surface);
                enc.reduce(o, stack, tag.arity(), Some(&p))?;
            }
            TransitionOp::Stop => {}
        }
        Ok(())
    }

    fn dropout<R: Rng>(&self, rng: Option<&mut R>) -> Option<Vec<f64>> {
        match rng {
            Some(rng) if self.config.dropout > 0.0 => Some(dropout_mask(rng, self.config.hidden_dim, self.config.dropout)),
            _ => None,
        }
    }

    /// Scores `d` with teacher forcing on `tape`. Gold operations and tokens are
    /// added to the masks when the constraints would exclude them. Dropout and
    /// attention sampling draw from `rng` when given.
    pub fn forced_run(
        &self,
        tape: &mut Tape,
        ctx: &DecodeContext,
        d: &Derivation,
        mut rng: Option<&mut ChaCha8Rng>,
        forced: Option<&[Choice]>,
    ) -> Result<ForcedRun> {
        let o = tape;
        let enc = self.encode(o, &ctx.words)?;
        let mut stack = self.start_stack(o);
        let mut config = ParserConfig::new(d.mode);
        let stochastic = self.config.attention.is_stochastic();
        let mut action_terms = Vec::new();
        let mut token_terms = Vec::new();
        let mut choice_terms = Vec::new();
        let mut baseline_terms = Vec::new();
        let mut choices = Vec::new();
        let mut used = Vec::new();
        for step in &d.steps {
            let mut legal = ctx.legal_ops(&config, &used);
            if !legal.contains(&step.op) {
                legal.push(step.op);
                legal.sort_by_key(|op| op.index());
            }
            let mask = self.dropout(rng.as_deref_mut());
            let scores = self.scores(o, &enc, &stack);
            let soft = self.soft_feature(o, &enc, &stack, &scores, mask.as_deref());
            let alp = self.action_log_probs(o, &soft.0, &legal)?;
            let pos = legal.iter().position(|op| *op == step.op).expect("gold op in mask");
            action_terms.push(o.pick(&alp, pos));

            if let Some(class) = config.token_class(step.op) {
                let token = step
                    .token
                    .as_deref()
                    .ok_or_else(|| Error::Invalid(format!("{} without a token", step.op)))?;
                let gold = self.tokens.id(token);
                let mut rows = ctx.token_rows(class, &used).into_owned();
                if !rows.contains(&gold) {
                    rows.push(gold);
                }
                if class == TokenClass::Entity {
                    used.push(gold);
                }
                let tpos = rows.iter().position(|&r| r == gold).expect("gold row");
                let mut policy = match (forced, rng.as_deref_mut()) {
                    (Some(cs), _) => Policy::Forced(cs),
                    (None, Some(r)) => Policy::Sample(r),
                    (None, None) => Policy::Infer,
                };
                let ts = self.token_step(
                    o,
                    &enc,
                    &stack,
                    &scores,
                    &soft,
                    &rows,
                    &mut policy,
                    choices.len(),
                    mask.as_deref(),
                )?;
                token_terms.push(o.pick(&ts.log_probs, tpos));
                if let (Some(lp), Some(c)) = (ts.choice_log_prob, ts.choice) {
                    choice_terms.push(lp);
                    choices.push(c);
                }
                if stochastic {
                    let base = self.ids.heads.token_log_probs(o, &soft.0, &rows)?;
                    baseline_terms.push(o.pick(&base, tpos));
                }
            }
            self.advance(o, &mut stack, &config, step.op, step.token.as_deref())?;
            config.apply_step(step)?;
        }

        let total = |o: &mut Tape, terms: &[NodeId]| {
            if terms.is_empty() {
                o.scalar(0.0)
            } else {
                let v = o.concat(terms);
                o.sum(&v)
            }
        };
        let a = total(o, &action_terms);
        let y = total(o, &token_terms);
        let u = total(o, &choice_terms);
        let b = total(o, &baseline_terms);
        let (av, yv, uv, bv) = (o.value_of(a), o.value_of(y), o.value_of(u), o.value_of(b));
        let mut objective = o.add(&a, &y);
        if stochastic {
            let advantage = o.scale(&u, yv - bv);
            objective = o.add(&objective, &advantage);
            objective = o.add(&objective, &b);
        }
        let surrogate = o.scale(&objective, -1.0);
        Ok(ForcedRun {
            surrogate,
            action_log_prob: av,
            token_log_prob: yv,
            choice_log_prob: uv,
            baseline: bv,
            choices,
            nodes: RunNodes {
                action: a,
                token: y,
                choice: u,
                baseline: b,
            },
        })
    }

    /// Log-probability of `d` at inference (no dropout, deterministic attention).
    pub fn score_derivation(&self, ctx: &DecodeContext, d: &Derivation) -> Result<f64> {
        let mut tape = Tape::new(&self.params);
        Ok(self.forced_run(&mut tape, ctx, d, None, None)?.log_prob())
    }

    /// Attention traces of an inference-mode replay of `d`.
    pub fn trace(&self, ctx: &DecodeContext, d: &Derivation) -> Result<Vec<AttentionTrace>> {
        let mut o = Eval::new(&self.params);
        let enc = self.encode(&mut o, &ctx.words)?;
        let mut stack = self.start_stack(&mut o);
        let mut config = ParserConfig::new(d.mode);
        let mut out = Vec::new();
        let mut used = Vec::new();
        for (i, step) in d.steps.iter().enumerate() {
            let scores = self.scores(&mut o, &enc, &stack);
            let soft = self.soft_feature(&mut o, &enc, &stack, &scores, None);
            let (kind, weights) = match config.token_class(step.op) {
                Some(class) => {
                    let rows = ctx.token_rows(class, &used).into_owned();
                    let rows = if rows.is_empty() { vec![0] } else { rows };
                    if class == TokenClass::Entity {
                        if let Some(t) = &step.token {
                            used.push(self.tokens.id(t));
                        }
                    }
                    let ts = self.token_step(&mut o, &enc, &stack, &scores, &soft, &rows, &mut Policy::Infer, 0, None)?;
                    (self.config.attention.name().to_string(), ts.weights)
                }
                None => ("soft".to_string(), soft.1.to_vec()),
            };
            out.push(AttentionTrace {
                step: i,
                op: step.op.to_string(),
                token: step.token.clone(),
                kind,
                weights,
                words: ctx.words.clone(),
            });
            self.advance(&mut o, &mut stack, &config, step.op, step.token.as_deref())?;
            config.apply_step(step)?;
        }
        Ok(out)
    }

    /// Writes `format_version`, `config.txt`, `manifest.tsv`, `params.bin`, `words.txt`, `tokens.txt`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("format_version"), format!("{CHECKPOINT_VERSION}\n"))?;
        std::fs::write(dir.join("config.txt"), self.config.to_text())?;
        self.words.save(&dir.join("words.txt"))?;
        self.tokens.save(&dir.join("tokens.txt"))?;
        self.params.save(dir)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let version = std::fs::read_to_string(dir.join("format_version"))?;
        if version.trim() != CHECKPOINT_VERSION {
            return Err(NeuralError::Checkpoint(format!("unsupported format version {}", version.trim())).into());
        }
        let config = RunConfig::load(&dir.join("config.txt"))?;
        let words = Vocab::load(&dir.join("words.txt"))?;
        let tokens = Vocab::load(&dir.join("tokens.txt"))?;
        let mut model = ParserModel::new(config, words, tokens);
        model.params.load_into(dir)?;
        Ok(model)
    }
}
