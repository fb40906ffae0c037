//! Parser, ranker, KB and linker bundled as one question-answering system.

use std::path::Path;

use crate::decode::{beam_decode, parallel_map, Candidate, CandidateSet, Linker};
use crate::error::Result;
use crate::model::ParserModel;
use crate::semantics::KnowledgeBase;
use crate::text::tokenize;

use super::ranker::{FeatureExtractor, Ranker, WordVectors};

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub model: ParserModel,
    pub kb: KnowledgeBase,
    pub linker: Option<Linker>,
    pub ranker: Option<Ranker>,
}

impl Pipeline {
    pub fn new(model: ParserModel, kb: KnowledgeBase) -> Self {
        Pipeline {
            model,
            kb,
            linker: None,
            ranker: None,
        }
    }

    /// Feature extractor over the current word embeddings, or over the
    /// configured word-vector file when one is set and readable.
    pub fn features(&self) -> FeatureExtractor {
        let vectors = self
            .model
            .config
            .word_vectors
            .as_deref()
            .and_then(|p| load_vectors(Path::new(p)).ok())
            .unwrap_or_else(|| WordVectors::from_model(&self.model));
        FeatureExtractor::new(vectors)
    }

    pub fn parse(&self, utterance: &str, width: usize) -> Result<CandidateSet> {
        let words = tokenize(utterance);
        let entities = self.linker.as_ref().map(|l| l.entity_mask(&words)).unwrap_or_default();
        let ctx = self.model.context(&words, &self.kb, &entities);
        let mut set = beam_decode(&self.model, &self.kb, &ctx, width)?;
        set.utterance = utterance.to_string();
        Ok(set)
    }

    pub fn parse_many(&self, utterances: &[String], width: usize) -> Vec<Result<CandidateSet>> {
        parallel_map(utterances, |u| self.parse(u, width))
    }

    /// Index of the candidate to execute: the ranker's choice, or the parser's best.
    pub fn choose(&self, set: &CandidateSet, features: &FeatureExtractor) -> Option<usize> {
        if set.is_empty() {
            return None;
        }
        match &self.ranker {
            Some(r) => {
                let words = tokenize(&set.utterance);
                r.rank_index(set, &features.for_set(&words, set)).ok()
            }
            None => Some(0),
        }
    }

    /// Parses and picks the logical form to execute.
    pub fn answer(&self, utterance: &str, width: usize) -> Result<Option<Candidate>> {
        let set = self.parse(utterance, width)?;
        let i = self.choose(&set, &self.features());
        Ok(i.map(|i| set.candidates[i].clone()))
    }

    /// Model files plus `kb.tsv`, and `linker.tsv` / `ranker.txt` when present.
    pub fn save(&self, dir: &Path) -> Result<()> {
        self.model.save(dir)?;
        self.kb.save(dir.join("kb.tsv"))?;
        if let Some(l) = &self.linker {
            std::fs::write(dir.join("linker.tsv"), l.to_tsv())?;
        }
        if let Some(r) = &self.ranker {
            r.save(&dir.join("ranker.txt"))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let model = ParserModel::load(dir)?;
        let kb = KnowledgeBase::load(dir.join("kb.tsv"))?;
        let linker_path = dir.join("linker.tsv");
        let linker = linker_path.exists().then(|| Linker::load(&linker_path)).transpose()?;
        let ranker_path = dir.join("ranker.txt");
        let ranker = ranker_path
            .exists()
            .then(|| Ranker::load(&ranker_path, model.config.ranker_lr, model.config.momentum))
            .transpose()?;
        Ok(Pipeline {
            model,
            kb,
            linker,
            ranker,
        })
    }
}

/// Reads `word v1 v2 ...` lines.
pub fn load_vectors(path: &Path) -> Result<WordVectors> {
    let text = std::fs::read_to_string(path)?;
    let file = path.display().to_string();
    let mut out: Option<WordVectors> = None;
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let v: Vec<f64> = parts
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| crate::Error::data(&file, i + 1, "bad number"))?;
        let vectors = out.get_or_insert_with(|| WordVectors::new(v.len()));
        if v.len() != vectors.dim {
            return Err(crate::Error::data(&file, i + 1, format!("expected {} values", vectors.dim)));
        }
        vectors.insert(word, v);
    }
    Ok(out.unwrap_or_default())
}
