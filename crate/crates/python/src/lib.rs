//! Python bindings. Build with `--features extension-module` to produce an
//! importable `funql` module.

use std::path::Path;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use funql_core::config::RunConfig;
use funql_core::decode::Linker;
use funql_core::learn::{self, Pipeline};
use funql_core::model::{build_token_vocab, build_word_vocab, ParserModel};
use funql_core::semantics::{self, type_check, Signature};
use funql_core::transitions::{self, Mode};
use funql_core::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn lf_from(text: &str) -> PyResult<semantics::LogicalForm> {
    semantics::parse_funql(text).map_err(|e| err(e.into()))
}

/// Parses FunQL text and returns its canonical printed form.
#[pyfunction]
fn canonical(text: &str) -> PyResult<String> {
    Ok(semantics::print_funql(&lf_from(text)?))
}

/// Oracle transition sequence for a logical form, one `OP[:token]` string per step.
#[pyfunction]
#[pyo3(signature = (lf, mode = "td"))]
fn oracle(lf: &str, mode: &str) -> PyResult<Vec<String>> {
    let mode = Mode::from_name(mode).ok_or_else(|| PyValueError::new_err("mode must be td or bu"))?;
    let d = transitions::oracle(&lf_from(lf)?, mode).map_err(|e| err(e.into()))?;
    Ok(d.steps.iter().map(|s| s.to_string()).collect())
}

#[pyclass(name = "KnowledgeBase")]
struct PyKnowledgeBase {
    inner: semantics::KnowledgeBase,
}

#[pymethods]
impl PyKnowledgeBase {
    /// Builds a knowledge base from `subject<TAB>relation<TAB>object` lines.
    #[new]
    fn new(tsv: &str) -> PyResult<Self> {
        let inner = semantics::KnowledgeBase::from_tsv(tsv).map_err(|e| err(e.into()))?;
        Ok(PyKnowledgeBase { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = semantics::KnowledgeBase::load(path).map_err(|e| err(e.into()))?;
        Ok(PyKnowledgeBase { inner })
    }

    fn entities(&self) -> Vec<String> {
        self.inner.entities().iter().map(|e| e.id.clone()).collect()
    }

    fn relations(&self) -> Vec<String> {
        self.inner.relations().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.triples().len()
    }

    /// Type-checks and executes a FunQL query, returning the denotation as strings.
    fn execute(&self, lf: &str) -> PyResult<Vec<String>> {
        let lf = lf_from(lf)?;
        type_check(&lf, &Signature::from_kb(&self.inner)).map_err(|e| err(e.into()))?;
        let d = semantics::execute(&lf, &self.inner).map_err(|e| err(e.into()))?;
        Ok(d.to_strings())
    }
}

/// One beam candidate: (lf, log_prob, denotation or None when execution failed).
type PyCandidate = (String, f64, Option<Vec<String>>);

#[pyclass(name = "Parser", unsendable)]
struct PyParser {
    inner: Pipeline,
}

#[pymethods]
impl PyParser {
    /// Loads a checkpoint directory written by `save` or by the command-line trainer.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyParser {
            inner: Pipeline::load(Path::new(path)).map_err(err)?,
        })
    }

    /// Trains on supervised JSON-lines data (`{"utterance", "lf"}`).
    #[staticmethod]
    #[pyo3(signature = (data, kb, linker = None, overrides = Vec::new()))]
    fn train_supervised(data: &str, kb: &str, linker: Option<&str>, overrides: Vec<String>) -> PyResult<Self> {
        let mut config = RunConfig::default();
        config.apply_overrides(&overrides).map_err(|e| err(e.into()))?;
        let kb = semantics::KnowledgeBase::load(kb).map_err(|e| err(e.into()))?;
        let linker = linker.map(|p| Linker::load(Path::new(p))).transpose().map_err(err)?;
        let train = learn::load_supervised(Path::new(data), Some(&kb)).map_err(err)?;
        let words = build_word_vocab(train.iter().map(|e| e.words.as_slice()));
        let lfs: Vec<_> = train.iter().map(|e| e.lf.clone()).collect();
        let mut model = ParserModel::new(config, words, build_token_vocab(&kb, &lfs));
        learn::train_supervised(&mut model, &kb, linker.as_ref(), &train, &[], &mut |_| {}).map_err(err)?;
        Ok(PyParser {
            inner: Pipeline {
                linker,
                ..Pipeline::new(model, kb)
            },
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(Path::new(path)).map_err(err)
    }

    /// Beam candidates for an utterance, best first.
    #[pyo3(signature = (utterance, beam = 10))]
    fn parse(&self, utterance: &str, beam: usize) -> PyResult<Vec<PyCandidate>> {
        let set = self.inner.parse(utterance, beam).map_err(err)?;
        Ok(set
            .candidates
            .iter()
            .map(|c| {
                (
                    semantics::print_funql(&c.lf),
                    c.log_prob,
                    c.denotation.as_ref().ok().map(|d| d.to_strings()),
                )
            })
            .collect())
    }

    /// Denotation of the chosen candidate, or None when nothing parses.
    #[pyo3(signature = (utterance, beam = 10))]
    fn answer(&self, utterance: &str, beam: usize) -> PyResult<Option<Vec<String>>> {
        let c = self.inner.answer(utterance, beam).map_err(err)?;
        Ok(c.and_then(|c| c.denotation.ok()).map(|d| d.to_strings()))
    }
}

/// Blanked question/answer pairs from a JSON-lines corpus of entity-annotated sentences.
#[pyfunction]
fn synth_distant(corpus: &str, kb: &PyKnowledgeBase) -> PyResult<Vec<(String, Vec<String>)>> {
    let sentences = learn::load_corpus(Path::new(corpus)).map_err(err)?;
    let out = learn::synth_distant(&sentences, &kb.inner);
    Ok(out
        .examples
        .into_iter()
        .map(|e| (e.utterance, e.denotation.to_strings()))
        .collect())
}

#[pymodule]
fn funql(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKnowledgeBase>()?;
    m.add_class::<PyParser>()?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(synth_distant, m)?)?;
    Ok(())
}
