//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::attention::AttentionKind;
use crate::transitions::{Limits, Mode};

/// Environment variable naming a default configuration file.
pub const CONFIG_ENV: &str = "FUNQL_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{key}: {message}")]
    Value { key: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub attention: AttentionKind,
    pub word_dim: usize,
    pub token_dim: usize,
    pub hidden_dim: usize,
    pub dropout: f64,
    pub train_beam: usize,
    pub test_beam: usize,
    pub max_open_nt: usize,
    pub max_total_nt: usize,
    pub max_consecutive_ter: usize,
    /// Each linked entity appears at most once per decoded logical form.
    pub distinct_entities: bool,
    /// Weak parser updates weight each consistent form by its parser
    /// probability renormalized over the consistent forms; otherwise uniformly.
    pub marginal_updates: bool,
    pub lr: f64,
    pub momentum: f64,
    pub lr_patience: usize,
    pub clip_norm: f64,
    pub ranker_lr: f64,
    pub epochs: usize,
    /// Stop once training exact match (or answer accuracy) reaches this.
    pub target_accuracy: f64,
    /// Distant examples mixed into each weak epoch, as a fraction of the weak set.
    pub distant_ratio: f64,
    pub seed: u64,
    /// Optional pretrained word vectors (word followed by values, whitespace separated).
    pub word_vectors: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::TopDown,
            attention: AttentionKind::Soft,
            word_dim: 50,
            token_dim: 50,
            hidden_dim: 150,
            dropout: 0.5,
            train_beam: 500,
            test_beam: 300,
            max_open_nt: 10,
            max_total_nt: 10,
            max_consecutive_ter: 5,
            distinct_entities: true,
            marginal_updates: true,
            lr: 0.1,
            momentum: 0.9,
            lr_patience: 3,
            clip_norm: 1.0,
            ranker_lr: 0.01,
            epochs: 200,
            target_accuracy: 1.0,
            distant_ratio: 1.0,
            seed: 1,
            word_vectors: None,
        }
    }
}

const KEYS: &[&str] = &[
    "mode",
    "attention",
    "word_dim",
    "token_dim",
    "hidden_dim",
    "dropout",
    "train_beam",
    "test_beam",
    "max_open_nt",
    "max_total_nt",
    "max_consecutive_ter",
    "distinct_entities",
    "marginal_updates",
    "lr",
    "momentum",
    "lr_patience",
    "clip_norm",
    "ranker_lr",
    "epochs",
    "target_accuracy",
    "distant_ratio",
    "seed",
    "word_vectors",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value {
        key: key.into(),
        message: format!("cannot parse {value:?}"),
    })
}

impl RunConfig {
    pub fn keys() -> &'static [&'static str] {
        KEYS
    }

    pub fn limits(&self) -> Limits {
        Limits {
            max_open_nt: self.max_open_nt,
            max_total_nt: self.max_total_nt,
            max_consecutive_ter: self.max_consecutive_ter,
            ..Limits::default()
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |message: &str| ConfigError::Value {
            key: key.into(),
            message: message.into(),
        };
        match key {
            "mode" => self.mode = Mode::from_name(value).ok_or_else(|| bad("expected td or bu"))?,
            "attention" => {
                self.attention =
                    AttentionKind::from_name(value).ok_or_else(|| bad("expected soft, structured, hard or binomial"))?
            }
            "word_dim" => self.word_dim = num(key, value)?,
            "token_dim" => self.token_dim = num(key, value)?,
            "hidden_dim" => self.hidden_dim = num(key, value)?,
            "dropout" => self.dropout = num(key, value)?,
            "train_beam" => self.train_beam = num(key, value)?,
            "test_beam" => self.test_beam = num(key, value)?,
            "max_open_nt" => self.max_open_nt = num(key, value)?,
            "max_total_nt" => self.max_total_nt = num(key, value)?,
            "max_consecutive_ter" => self.max_consecutive_ter = num(key, value)?,
            "distinct_entities" => self.distinct_entities = num(key, value)?,
            "marginal_updates" => self.marginal_updates = num(key, value)?,
            "lr" => self.lr = num(key, value)?,
            "momentum" => self.momentum = num(key, value)?,
            "lr_patience" => self.lr_patience = num(key, value)?,
            "clip_norm" => self.clip_norm = num(key, value)?,
            "ranker_lr" => self.ranker_lr = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "target_accuracy" => self.target_accuracy = num(key, value)?,
            "distant_ratio" => self.distant_ratio = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "word_vectors" => self.word_vectors = (!value.is_empty()).then(|| value.to_string()),
            _ => return Err(bad("unknown key")),
        }
        self.validate()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, message: &str| {
            Err(ConfigError::Value {
                key: key.into(),
                message: message.into(),
            })
        };
        if self.word_dim == 0 || self.token_dim == 0 || self.hidden_dim == 0 {
            return bad("dims", "dimensions must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout", "must be in [0, 1)");
        }
        if self.train_beam == 0 || self.test_beam == 0 {
            return bad("beam", "widths must be at least 1");
        }
        if self.lr <= 0.0 || self.ranker_lr <= 0.0 {
            return bad("lr", "must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum", "must be in [0, 1)");
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, source_name: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text, source_name)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str, source_name: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Parse {
                source_name: source_name.into(),
                line: i + 1,
                message,
            };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            self.set(k.trim(), v.trim()).map_err(|e| err(e.to_string()))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        for o in overrides {
            let (k, v) = o.as_ref().split_once('=').ok_or_else(|| ConfigError::Value {
                key: o.as_ref().into(),
                message: "expected key=value".into(),
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "mode" => self.mode.name().to_string(),
            "attention" => self.attention.name().to_string(),
            "word_dim" => self.word_dim.to_string(),
            "token_dim" => self.token_dim.to_string(),
            "hidden_dim" => self.hidden_dim.to_string(),
            "dropout" => self.dropout.to_string(),
            "train_beam" => self.train_beam.to_string(),
            "test_beam" => self.test_beam.to_string(),
            "max_open_nt" => self.max_open_nt.to_string(),
            "max_total_nt" => self.max_total_nt.to_string(),
            "max_consecutive_ter" => self.max_consecutive_ter.to_string(),
            "distinct_entities" => self.distinct_entities.to_string(),
            "marginal_updates" => self.marginal_updates.to_string(),
            "lr" => self.lr.to_string(),
            "momentum" => self.momentum.to_string(),
            "lr_patience" => self.lr_patience.to_string(),
            "clip_norm" => self.clip_norm.to_string(),
            "ranker_lr" => self.ranker_lr.to_string(),
            "epochs" => self.epochs.to_string(),
            "target_accuracy" => self.target_accuracy.to_string(),
            "distant_ratio" => self.distant_ratio.to_string(),
            "seed" => self.seed.to_string(),
            "word_vectors" => self.word_vectors.clone().unwrap_or_default(),
            _ => return None,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for k in KEYS {
            let _ = writeln!(out, "{k} = {}", self.get(k).expect("known key"));
        }
        out
    }
}
