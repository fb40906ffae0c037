//! Exact-match and denotation-F1 evaluation.

use std::fmt;

use super::data::WeakExample;
use super::pipeline::Pipeline;
use crate::decode::parallel_map;
use crate::error::{Error, Result};
use crate::semantics::{Denotation, LogicalForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    ExactMatch,
    F1,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::ExactMatch => "em",
            Metric::F1 => "f1",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "em" => Some(Metric::ExactMatch),
            "f1" => Some(Metric::F1),
            _ => None,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub metric: Metric,
    pub width: usize,
    pub examples: usize,
    pub score: f64,
    /// Fraction whose beam holds at least one consistent logical form.
    pub answerable: f64,
    /// Fraction whose chosen logical form is consistent.
    pub correct: f64,
}

/// Harmonic mean of set precision and recall; two empty sets score 1.
pub fn f1(predicted: &Denotation, gold: &Denotation) -> f64 {
    if predicted.is_empty() && gold.is_empty() {
        return 1.0;
    }
    let hit = predicted.iter().filter(|v| gold.contains(v)).count() as f64;
    if hit == 0.0 {
        return 0.0;
    }
    let p = hit / predicted.len() as f64;
    let r = hit / gold.len() as f64;
    2.0 * p * r / (p + r)
}

struct Outcome {
    answerable: bool,
    correct: bool,
    score: f64,
}

/// Decodes every example at `width` and scores the chosen logical form.
/// Exact match needs `gold_lfs` aligned with `examples`.
pub fn evaluate(
    system: &Pipeline,
    examples: &[WeakExample],
    gold_lfs: Option<&[LogicalForm]>,
    metric: Metric,
    width: usize,
) -> Result<EvalReport> {
    if metric == Metric::ExactMatch && gold_lfs.is_none_or(|g| g.len() != examples.len()) {
        return Err(Error::Invalid("exact match needs a gold logical form per example".into()));
    }
    let features = system.features();
    let indexed: Vec<usize> = (0..examples.len()).collect();
    let outcomes = parallel_map(&indexed, |&i| -> Result<Outcome> {
        let ex = &examples[i];
        let set = system.parse(&ex.utterance, width)?;
        let answerable = set.candidates.iter().any(|c| c.denotation.is_ok() && ex.is_consistent(&c.answer()));
        let Some(k) = system.choose(&set, &features) else {
            return Ok(Outcome {
                answerable,
                correct: false,
                score: 0.0,
            });
        };
        let pick = &set.candidates[k];
        let correct = pick.denotation.is_ok() && ex.is_consistent(&pick.answer());
        let score = match metric {
            Metric::ExactMatch => f64::from(u8::from(gold_lfs.is_some_and(|g| g[i] == pick.lf))),
            Metric::F1 => f1(&pick.answer(), &ex.denotation),
        };
        Ok(Outcome {
            answerable,
            correct,
            score,
        })
    });
    let outcomes: Vec<Outcome> = outcomes.into_iter().collect::<Result<_>>()?;
    let n = outcomes.len().max(1) as f64;
    let frac = |f: &dyn Fn(&Outcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / n;
    Ok(EvalReport {
        metric,
        width,
        examples: outcomes.len(),
        score: outcomes.iter().map(|o| o.score).sum::<f64>() / n,
        answerable: frac(&|o| o.answerable),
        correct: frac(&|o| o.correct),
    })
}

/// [`evaluate`] at each width.
pub fn beam_sweep(
    system: &Pipeline,
    examples: &[WeakExample],
    gold_lfs: Option<&[LogicalForm]>,
    metric: Metric,
    widths: &[usize],
) -> Result<Vec<EvalReport>> {
    widths
        .iter()
        .map(|&w| evaluate(system, examples, gold_lfs, metric, w))
        .collect()
}

/// Tab-separated `width answerable correct` table with a header.
pub fn sweep_table(reports: &[EvalReport]) -> String {
    let mut out = String::from("width\tanswerable\tcorrect\n");
    for r in reports {
        out.push_str(&format!("{}\t{:.4}\t{:.4}\n", r.width, r.answerable, r.correct));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(xs: &[&str]) -> Denotation {
        Denotation::from_strings(xs, None)
    }

    #[test]
    fn f1_cases() {
        assert_eq!(f1(&d(&["a", "b"]), &d(&["a", "b"])), 1.0);
        assert_eq!(f1(&d(&["a"]), &d(&["b"])), 0.0);
        assert!((f1(&d(&["a", "b"]), &d(&["a"])) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(f1(&d(&[]), &d(&["a"])), 0.0);
    }

    #[test]
    fn metric_names() {
        for m in [Metric::ExactMatch, Metric::F1] {
            assert_eq!(Metric::from_name(m.name()), Some(m));
        }
    }
}
