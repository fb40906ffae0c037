//! Buffer attention for action and token prediction.

mod crf;
mod heads;

use std::fmt;

use rand::Rng;
use serde::Serialize;

pub use crf::crf_marginals;
pub use heads::{full_distribution, Heads, PredictError};

use crate::neural::{argmax, log_softmax, sigmoid, Ops, ParamId, ParamStore};

/// Token-prediction attention variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttentionKind {
    Soft,
    Structured,
    Hard,
    Binomial,
}

impl AttentionKind {
    pub const ALL: [AttentionKind; 4] = [
        AttentionKind::Soft,
        AttentionKind::Structured,
        AttentionKind::Hard,
        AttentionKind::Binomial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttentionKind::Soft => "soft",
            AttentionKind::Structured => "structured",
            AttentionKind::Hard => "hard",
            AttentionKind::Binomial => "binomial",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// True for the sampled variants trained with the score-function estimator.
    pub fn is_stochastic(self) -> bool {
        matches!(self, AttentionKind::Hard | AttentionKind::Binomial)
    }
}

impl fmt::Display for AttentionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scorer `u_i = V·tanh(W_b b_i + W_s s)` shared by action and token prediction,
/// plus the chain weights of the structured variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttentionParams {
    pub v: ParamId,
    pub w_b: ParamId,
    pub w_s: ParamId,
    pub crf: ParamId,
}

impl AttentionParams {
    pub fn new<R: Rng>(store: &mut ParamStore, buffer_dim: usize, state_dim: usize, dim: usize, rng: &mut R) -> Self {
        AttentionParams {
            v: store.add_uniform("attn.v", &[dim], rng),
            w_b: store.add_uniform("attn.w_b", &[dim, buffer_dim], rng),
            w_s: store.add_uniform("attn.w_s", &[dim, state_dim], rng),
            crf: store.add_uniform("attn.crf", &[3], rng),
        }
    }

    /// `W_b b_i` for every buffer position; computed once per utterance.
    pub fn project_buffer<O: Ops>(&self, o: &mut O, buffer: &[O::V]) -> Vec<O::V> {
        buffer.iter().map(|b| o.affine(self.w_b, None, None, b)).collect()
    }

    pub fn score<O: Ops>(&self, o: &mut O, projected: &[O::V], state: &O::V) -> O::V {
        let ws = o.affine(self.w_s, None, None, state);
        let v = o.param(self.v);
        let scores: Vec<O::V> = projected
            .iter()
            .map(|pb| {
                let z = o.add(pb, &ws);
                let t = o.tanh(&z);
                o.dot(&v, &t)
            })
            .collect();
        o.concat(&scores)
    }
}

/// Softmax-weighted buffer average; returns (b̄, weights).
pub fn soft_attend<O: Ops>(o: &mut O, scores: &O::V, buffer: &[O::V]) -> (O::V, O::V) {
    let alpha = o.softmax(scores);
    (o.weighted_sum(&alpha, buffer), alpha)
}

/// `Σ_i α_i b_i` with CRF marginals (not renormalized across positions).
pub fn structured_attend<O: Ops>(o: &mut O, marginals: &O::V, buffer: &[O::V]) -> O::V {
    o.weighted_sum(marginals, buffer)
}

/// Samples a buffer position from `softmax(scores)`; returns it with its log-probability.
pub fn hard_sample<R: Rng>(scores: &[f64], rng: &mut R) -> (usize, f64) {
    let lp = log_softmax(scores);
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, l) in lp.iter().enumerate() {
        acc += l.exp();
        if r < acc {
            return (i, *l);
        }
    }
    let i = lp.len() - 1;
    (i, lp[i])
}

/// Inference-time hard choice.
pub fn hard_argmax(scores: &[f64]) -> (usize, f64) {
    let i = argmax(scores);
    (i, log_softmax(scores)[i])
}

/// Per-token Bernoulli selection. With `rng` each token is sampled with
/// probability `logistic(u_i)`; without, a token is kept iff `logistic(u_i) > 0.5`.
pub fn binomial_select<R: Rng>(scores: &[f64], rng: Option<&mut R>) -> Vec<bool> {
    match rng {
        Some(rng) => scores.iter().map(|&u| rng.gen::<f64>() < sigmoid(u)).collect(),
        None => scores.iter().map(|&u| sigmoid(u) > 0.5).collect(),
    }
}

/// Buffer positions actually attended for a selection mask: the selected ones,
/// or the single highest-scoring token when nothing is selected.
pub fn effective_selection(scores: &[f64], mask: &[bool]) -> Vec<usize> {
    let sel: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    if sel.is_empty() {
        vec![argmax(scores)]
    } else {
        sel
    }
}

/// Mean of the selected buffer vectors (with the empty-mask fallback).
pub fn binomial_attend<O: Ops>(o: &mut O, scores: &O::V, buffer: &[O::V], mask: &[bool]) -> O::V {
    let sel = effective_selection(o.value(scores), mask);
    let mut w = vec![0.0; buffer.len()];
    for &i in &sel {
        w[i] = 1.0 / sel.len() as f64;
    }
    let w = o.constant(w);
    o.weighted_sum(&w, buffer)
}

/// `log p(A)` of a selection mask under independent logistic selection.
pub fn binomial_log_prob<O: Ops>(o: &mut O, scores: &O::V, mask: &[bool]) -> O::V {
    let signs: Vec<f64> = mask.iter().map(|&m| if m { 1.0 } else { -1.0 }).collect();
    let signs = o.constant(signs);
    let signed = o.mul(scores, &signs);
    let ls = o.log_sigmoid(&signed);
    o.sum(&ls)
}

/// One step of attention for inspection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttentionTrace {
    pub step: usize,
    pub op: String,
    pub token: Option<String>,
    pub kind: String,
    /// Per-word weights (softmax weights, marginals, or 0/1 selection).
    pub weights: Vec<f64>,
    pub words: Vec<String>,
}

impl AttentionTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}
