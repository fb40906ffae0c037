//! Supervised, weakly supervised and distantly supervised training, ranking and evaluation.

pub mod data;
pub mod distant;
pub mod eval;
pub mod pipeline;
pub mod ranker;
pub mod supervised;
pub mod weak;

pub use data::{
    load_corpus, load_supervised, load_weak, parse_corpus, parse_supervised, parse_weak, supervised_to_jsonl,
    weak_to_jsonl, Dataset, DistantSentence, Mention, SupervisedExample, WeakExample,
};
pub use distant::{synth_distant, DistantOutput, BLANK};
pub use eval::{beam_sweep, evaluate, f1, sweep_table, EvalReport, Metric};
pub use pipeline::{load_vectors, Pipeline};
pub use ranker::{FeatureExtractor, Ranker, TextResources, WordVectors, FEATURE_NAMES, NUM_FEATURES};
pub use supervised::{greedy_exact_match, loss_supervised, reinforce_grads, train_supervised, EpochStats, TrainReport};
pub use weak::{consistent_indices, train_weak, weak_step, WeakEpochStats, WeakReport};
