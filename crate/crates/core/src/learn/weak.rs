//! Training from answers: beam search, consistency filtering, parser and ranker updates.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::WeakExample;
use super::pipeline::Pipeline;
use super::ranker::{FeatureExtractor, Ranker, WordVectors};
use super::supervised::optimizer;
use crate::decode::{beam_decode, parallel_map, CandidateSet};
use crate::error::{Error, Result};
use crate::neural::{log_softmax, Ops, Tape};

#[derive(Debug, Clone, PartialEq)]
pub struct WeakEpochStats {
    pub epoch: usize,
    pub examples: usize,
    /// Examples with at least one consistent candidate.
    pub updated: usize,
    /// Summed negative log-likelihood of the consistent forms.
    pub parser_loss: f64,
    pub ranker_loss: f64,
    /// Fraction of the weak examples answered correctly by the ranker over
    /// the beams decoded at the start of the epoch.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeakReport {
    pub epochs: Vec<WeakEpochStats>,
    pub reached_target: bool,
}

/// Indices of the consistent candidates of `set`.
pub fn consistent_indices(ex: &WeakExample, set: &CandidateSet) -> Vec<usize> {
    set.candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.denotation.is_ok() && ex.is_consistent(&c.answer()))
        .map(|(i, _)| i)
        .collect()
}

/// One parser update on the log-likelihood of the consistent forms (see
/// `marginal_updates`) and one ranker update on their marginal likelihood. Nothing changes when no
/// candidate is consistent. Returns the two losses when an update happened.
pub fn weak_step(
    system: &mut Pipeline,
    parser_opt: &mut crate::neural::MomentumSgd,
    ex: &WeakExample,
    set: &CandidateSet,
    features: &FeatureExtractor,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(f64, f64)>> {
    let consistent = consistent_indices(ex, set);
    if consistent.is_empty() {
        return Ok(None);
    }
    let entities = system.linker.as_ref().map(|l| l.entity_mask(&ex.words)).unwrap_or_default();
    let ctx = system.model.context(&ex.words, &system.kb, &entities);
    let (nll, mut grads) = {
        let mut tape = Tape::new(&system.model.params);
        let weights = if system.model.config.marginal_updates {
            let lp: Vec<f64> = consistent.iter().map(|&i| set.candidates[i].log_prob).collect();
            log_softmax(&lp).into_iter().map(f64::exp).collect()
        } else {
            vec![1.0; consistent.len()]
        };
        let mut total = None;
        let mut nll = 0.0;
        for (&i, &w) in consistent.iter().zip(&weights) {
            let run = system
                .model
                .forced_run(&mut tape, &ctx, &set.candidates[i].derivation, Some(rng), None)?;
            nll -= run.log_prob();
            let term = tape.scale(&run.surrogate, w);
            total = Some(match total {
                None => term,
                Some(t) => tape.add(&t, &term),
            });
        }
        (nll, tape.backward(total.expect("nonempty")))
    };
    parser_opt.step(&mut system.model.params, &mut grads)?;

    let phi = features.for_set(&ex.words, set);
    let mut flags = vec![false; set.len()];
    for &i in &consistent {
        flags[i] = true;
    }
    let ranker = system.ranker.as_mut().expect("ranker present");
    let rloss = ranker.train_step(&phi, &flags)?;
    Ok(Some((nll, rloss)))
}

fn accuracy(system: &Pipeline, examples: &[WeakExample], beams: &[CandidateSet], features: &FeatureExtractor) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let hits = examples
        .iter()
        .zip(beams)
        .filter(|(ex, set)| {
            system
                .choose(set, features)
                .is_some_and(|k| set.candidates[k].denotation.is_ok() && ex.is_consistent(&set.candidates[k].answer()))
        })
        .count();
    hits as f64 / examples.len() as f64
}

/// Trains the parser and the ranker of `system` on `train`, mixing in
/// `config.distant_ratio · |train|` synthesized examples per epoch. Beams for
/// an epoch are decoded in parallel from the parameters at its start; updates
/// are applied one example at a time. Stops after `config.epochs` or when the
/// start-of-epoch accuracy reaches `config.target_accuracy`.
pub fn train_weak(
    system: &mut Pipeline,
    train: &[WeakExample],
    distant: &[WeakExample],
    progress: &mut dyn FnMut(&WeakEpochStats),
) -> Result<WeakReport> {
    if train.is_empty() && distant.is_empty() {
        return Err(Error::Invalid("empty training set".into()));
    }
    let config = system.model.config.clone();
    if system.ranker.is_none() {
        system.ranker = Some(Ranker::new(config.ranker_lr, config.momentum));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut parser_opt = optimizer(&system.model);
    let mut report = WeakReport::default();
    let mut distant_order: Vec<usize> = (0..distant.len()).collect();
    distant_order.shuffle(&mut rng);
    let per_epoch = if distant.is_empty() {
        0
    } else if train.is_empty() {
        distant.len()
    } else {
        (config.distant_ratio * train.len() as f64).round() as usize
    };
    let mut cursor = 0;
    for epoch in 1..=config.epochs {
        let mut batch: Vec<&WeakExample> = train.iter().collect();
        for _ in 0..per_epoch {
            if cursor == distant_order.len() {
                distant_order.shuffle(&mut rng);
                cursor = 0;
            }
            batch.push(&distant[distant_order[cursor]]);
            cursor += 1;
        }
        let beams: Vec<CandidateSet> = {
            let snapshot = &*system;
            parallel_map(&batch, |ex| {
                let entities = snapshot.linker.as_ref().map(|l| l.entity_mask(&ex.words)).unwrap_or_default();
                let ctx = snapshot.model.context(&ex.words, &snapshot.kb, &entities);
                beam_decode(&snapshot.model, &snapshot.kb, &ctx, config.train_beam)
            })
            .into_iter()
            .collect::<Result<_>>()?
        };
        let features = FeatureExtractor::new(WordVectors::from_model(&system.model));
        let acc = accuracy(system, train, &beams[..train.len()], &features);
        if acc >= config.target_accuracy && !train.is_empty() {
            report.reached_target = true;
            break;
        }
        let mut order: Vec<usize> = (0..batch.len()).collect();
        order.shuffle(&mut rng);
        let mut stats = WeakEpochStats {
            epoch,
            examples: batch.len(),
            updated: 0,
            parser_loss: 0.0,
            ranker_loss: 0.0,
            accuracy: acc,
        };
        for i in order {
            if let Some((p, r)) = weak_step(system, &mut parser_opt, batch[i], &beams[i], &features, &mut rng)? {
                stats.updated += 1;
                stats.parser_loss += p;
                stats.ranker_loss += r;
            }
        }
        progress(&stats);
        report.epochs.push(stats);
    }
    Ok(report)
}
