//! Teacher-forced likelihood training from logical forms.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::SupervisedExample;
use crate::decode::{greedy_decode, parallel_map, Linker};
use crate::error::{Error, Result};
use crate::model::{DecodeContext, ParserModel};
use crate::neural::{Gradients, MomentumSgd, PlateauSchedule, Tape};
use crate::semantics::KnowledgeBase;
use crate::transitions::{oracle, reconstruct, Derivation};

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Summed negative log-likelihood over the epoch.
    pub loss: f64,
    pub train_accuracy: f64,
    pub dev_accuracy: Option<f64>,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    /// Epoch whose parameters were kept (best dev accuracy), if a dev set was given.
    pub best_epoch: Option<usize>,
    pub reached_target: bool,
}

impl TrainReport {
    pub fn final_train_accuracy(&self) -> f64 {
        self.epochs.last().map_or(0.0, |e| e.train_accuracy)
    }
}

/// Negative log-likelihood of `d` and the gradient of its training objective.
/// `rng` enables dropout and attention sampling.
pub fn loss_supervised(
    model: &ParserModel,
    ctx: &DecodeContext,
    d: &Derivation,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<(f64, Gradients)> {
    let mut tape = Tape::new(&model.params);
    let run = model.forced_run(&mut tape, ctx, d, rng, None)?;
    Ok((-run.log_prob(), tape.backward(run.surrogate)))
}

/// Mean of `samples` single-sample score-function estimates for a
/// stochastic attention variant (each including the baseline terms).
pub fn reinforce_grads(
    model: &ParserModel,
    ctx: &DecodeContext,
    d: &Derivation,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Gradients> {
    if !model.config.attention.is_stochastic() {
        return Err(Error::Invalid(format!(
            "{} attention is deterministic",
            model.config.attention
        )));
    }
    let mut total = model.params.zero_grads();
    for _ in 0..samples.max(1) {
        let mut tape = Tape::new(&model.params);
        let run = model.forced_run(&mut tape, ctx, d, Some(rng), None)?;
        tape.backward_into(run.surrogate, 1.0, &mut total);
    }
    total.scale(1.0 / samples.max(1) as f64);
    Ok(total)
}

pub(crate) fn optimizer(model: &ParserModel) -> MomentumSgd {
    MomentumSgd::new(&model.params, model.config.lr, model.config.momentum).with_clip(model.config.clip_norm)
}

fn entity_candidates(linker: Option<&Linker>, words: &[String]) -> Vec<String> {
    linker.map(|l| l.entity_mask(words)).unwrap_or_default()
}

/// Fraction of examples whose greedy parse equals the gold form.
pub fn greedy_exact_match(
    model: &ParserModel,
    kb: &KnowledgeBase,
    linker: Option<&Linker>,
    examples: &[SupervisedExample],
) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let hits = parallel_map(examples, |ex| {
        let ctx = model.context(&ex.words, kb, &entity_candidates(linker, &ex.words));
        greedy_decode(model, &ctx)
            .ok()
            .and_then(|d| reconstruct(&d).ok())
            .is_some_and(|lf| lf == ex.lf)
    });
    hits.iter().filter(|&&h| h).count() as f64 / examples.len() as f64
}

/// Shuffled single-example momentum SGD on the oracle derivations. Stops
/// after `config.epochs` or once greedy training accuracy reaches
/// `config.target_accuracy`. With a nonempty dev set the parameters of the
/// best dev epoch are restored at the end. The learning rate is halved when
/// dev accuracy stalls and stays constant without a dev set.
pub fn train_supervised(
    model: &mut ParserModel,
    kb: &KnowledgeBase,
    linker: Option<&Linker>,
    train: &[SupervisedExample],
    dev: &[SupervisedExample],
    progress: &mut dyn FnMut(&EpochStats),
) -> Result<TrainReport> {
    if train.is_empty() {
        return Err(Error::Invalid("empty training set".into()));
    }
    let mode = model.config.mode;
    let items: Vec<(DecodeContext, Derivation)> = train
        .iter()
        .map(|ex| {
            let d = oracle(&ex.lf, mode).map_err(|e| Error::Invalid(format!("{}: {e}", ex.utterance)))?;
            Ok((model.context(&ex.words, kb, &entity_candidates(linker, &ex.words)), d))
        })
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(model.config.seed);
    let mut opt = optimizer(model);
    let mut schedule = PlateauSchedule::new(model.config.lr_patience);
    let mut report = TrainReport::default();
    let mut best: Option<(f64, crate::neural::ParamStore)> = None;
    let mut order: Vec<usize> = (0..items.len()).collect();
    for epoch in 1..=model.config.epochs {
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        for &i in &order {
            let (ctx, d) = &items[i];
            let (l, mut grads) = loss_supervised(model, ctx, d, Some(&mut rng))?;
            loss += l;
            opt.step(&mut model.params, &mut grads)?;
        }
        let train_accuracy = greedy_exact_match(model, kb, linker, train);
        let dev_accuracy = (!dev.is_empty()).then(|| greedy_exact_match(model, kb, linker, dev));
        if let Some(acc) = dev_accuracy {
            schedule.observe(acc, &mut opt);
        }
        if let Some(acc) = dev_accuracy {
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                best = Some((acc, model.params.clone()));
                report.best_epoch = Some(epoch);
            }
        }
        let stats = EpochStats {
            epoch,
            loss,
            train_accuracy,
            dev_accuracy,
            lr: opt.lr,
        };
        progress(&stats);
        report.epochs.push(stats);
        if train_accuracy >= model.config.target_accuracy {
            report.reached_target = true;
            break;
        }
    }
    if let Some((_, params)) = best {
        model.params = params;
    }
    Ok(report)
}
