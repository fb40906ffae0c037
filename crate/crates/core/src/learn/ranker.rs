//! Log-linear reranking of beam candidates.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::decode::{Candidate, CandidateSet};
use crate::error::{Error, Result};
use crate::model::ParserModel;
use crate::neural::{MomentumSgd, ParamId, ParamStore};
use crate::semantics::{print_funql, Denotation, LogicalForm};

pub const FEATURE_NAMES: [&str; 9] = [
    "cosine",
    "overlap",
    "lemma_cosine",
    "lemma_overlap",
    "qword_lf_cosine",
    "qword_relation_cosine",
    "answer_type",
    "denotation_length",
    "parser_log_prob",
];

pub const NUM_FEATURES: usize = FEATURE_NAMES.len();

pub const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Question words; multiword entries match consecutive tokens.
pub const QUESTION_WORDS: [&str; 8] = ["what", "who", "where", "whose", "date", "which", "how many", "count"];

/// Suffix rewrites tried in order; the first applicable one wins.
pub const LEMMA_RULES: [(&str, &str); 9] = [
    ("ies", "y"),
    ("sses", "ss"),
    ("ves", "f"),
    ("ing", ""),
    ("ers", "er"),
    ("ed", ""),
    ("es", "e"),
    ("s", ""),
    ("est", ""),
];

/// Stop-word list and lemmatizer used by the ranker features.
#[derive(Debug, Clone, PartialEq)]
pub struct TextResources {
    pub stopwords: HashSet<String>,
    pub lemma_rules: Vec<(String, String)>,
}

impl Default for TextResources {
    fn default() -> Self {
        TextResources {
            stopwords: DEFAULT_STOPWORDS.split_whitespace().map(str::to_string).collect(),
            lemma_rules: LEMMA_RULES.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }
}

impl TextResources {
    pub fn with_stopwords(text: &str) -> Self {
        TextResources {
            stopwords: text.split_whitespace().map(str::to_lowercase).collect(),
            ..Self::default()
        }
    }

    pub fn is_stopword(&self, w: &str) -> bool {
        self.stopwords.contains(w)
    }

    /// Strips the first matching suffix, keeping at least three characters of stem.
    pub fn lemma(&self, w: &str) -> String {
        for (suffix, repl) in &self.lemma_rules {
            if let Some(stem) = w.strip_suffix(suffix.as_str()) {
                if stem.chars().count() >= 3 && !(suffix == "s" && stem.ends_with('s')) {
                    return format!("{stem}{repl}");
                }
            }
        }
        w.to_string()
    }
}

/// Lowercased words of an identifier, split at `_`, `.`, `-` and lower-to-upper case changes.
pub fn identifier_words(id: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut prev_lower = false;
    for c in id.chars() {
        if c == '_' || c == '.' || c == '-' || c.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            prev_lower = false;
            continue;
        }
        if c.is_uppercase() && prev_lower && !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
        prev_lower = c.is_lowercase() || c.is_ascii_digit();
        cur.extend(c.to_lowercase());
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn lf_words(lf: &LogicalForm) -> Vec<String> {
    lf.tokens().iter().flat_map(|t| identifier_words(t)).collect()
}

/// Relation whose objects form the answer.
fn answer_relation(lf: &LogicalForm) -> Option<&str> {
    match lf {
        LogicalForm::Entity(_) => None,
        LogicalForm::Apply { relation, .. } => Some(relation),
        LogicalForm::Count(a) => answer_relation(a),
        LogicalForm::ArgMax { arg, .. } | LogicalForm::ArgMin { arg, .. } | LogicalForm::Filter { arg, .. } => {
            answer_relation(arg)
        }
        LogicalForm::And(l, r) | LogicalForm::Or(l, r) => answer_relation(l).or_else(|| answer_relation(r)),
    }
}

/// Word embeddings for the similarity features.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordVectors {
    pub dim: usize,
    map: HashMap<String, Vec<f64>>,
}

impl WordVectors {
    pub fn new(dim: usize) -> Self {
        WordVectors {
            dim,
            map: HashMap::new(),
        }
    }

    pub fn insert(&mut self, word: &str, v: Vec<f64>) {
        assert_eq!(v.len(), self.dim, "vector for {word}");
        self.map.insert(word.to_string(), v);
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.map.get(word).map(Vec::as_slice)
    }

    /// The parser's word-embedding rows (the unknown-word row excluded).
    pub fn from_model(model: &ParserModel) -> Self {
        let id = model.params.id("emb.word").expect("word embeddings");
        let t = model.params.get(id);
        let mut v = WordVectors::new(t.cols());
        for (r, w) in model.words.items().iter().enumerate().skip(1) {
            v.insert(w, t.row(r).to_vec());
        }
        v
    }

    /// Mean vector of the known words, or `None` when none is known.
    pub fn mean<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dim];
        let mut n = 0;
        for w in words {
            if let Some(v) = self.get(w) {
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                n += 1;
            }
        }
        (n > 0).then(|| sum.into_iter().map(|x| x / n as f64).collect())
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn mean_cosine(v: &WordVectors, a: &[String], b: &[String]) -> f64 {
    match (v.mean(a.iter().map(String::as_str)), v.mean(b.iter().map(String::as_str))) {
        (Some(x), Some(y)) => cosine(&x, &y),
        _ => 0.0,
    }
}

/// Size of the multiset intersection.
pub fn overlap(a: &[String], b: &[String]) -> f64 {
    let mut counts: HashMap<&str, i64> = HashMap::new();
    for w in b {
        *counts.entry(w).or_default() += 1;
    }
    let mut n = 0;
    for w in a {
        if let Some(c) = counts.get_mut(w.as_str()) {
            if *c > 0 {
                *c -= 1;
                n += 1;
            }
        }
    }
    n as f64
}

/// Question words found in the utterance, multiword entries split into words.
pub fn question_words(words: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for q in QUESTION_WORDS {
        let parts: Vec<&str> = q.split(' ').collect();
        if words.windows(parts.len()).any(|w| w.iter().zip(&parts).all(|(a, b)| a == b)) {
            out.extend(parts.iter().map(|p| p.to_string()));
        }
    }
    out
}

/// Feature computation shared by training and ranking.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureExtractor {
    pub vectors: WordVectors,
    pub resources: TextResources,
}

impl FeatureExtractor {
    pub fn new(vectors: WordVectors) -> Self {
        FeatureExtractor {
            vectors,
            resources: TextResources::default(),
        }
    }

    pub fn features(
        &self,
        words: &[String],
        lf: &LogicalForm,
        denotation: &Denotation,
        log_prob: f64,
    ) -> [f64; NUM_FEATURES] {
        let v = &self.vectors;
        let r = &self.resources;
        let content: Vec<String> = words.iter().filter(|w| !r.is_stopword(w)).cloned().collect();
        let lfw = lf_words(lf);
        let lemma = |ws: &[String]| ws.iter().map(|w| r.lemma(w)).collect::<Vec<_>>();
        let (content_l, words_l, lfw_l) = (lemma(&content), lemma(words), lemma(&lfw));
        let qw = question_words(words);
        let rel_words: Vec<String> = lf.relations().iter().flat_map(|x| identifier_words(x)).collect();
        let answer_type: Vec<String> = answer_relation(lf)
            .and_then(|rel| rel.rsplit('.').next())
            .map(identifier_words)
            .unwrap_or_default();
        [
            mean_cosine(v, &content, &lfw),
            overlap(words, &lfw),
            mean_cosine(v, &content_l, &lfw_l),
            overlap(&words_l, &lfw_l),
            mean_cosine(v, &qw, &lfw),
            mean_cosine(v, &qw, &rel_words),
            mean_cosine(v, &qw, &answer_type),
            denotation.len() as f64,
            log_prob,
        ]
    }

    pub fn for_set(&self, words: &[String], set: &CandidateSet) -> Vec<[f64; NUM_FEATURES]> {
        set.candidates
            .iter()
            .map(|c| self.features(words, &c.lf, &c.answer(), c.log_prob))
            .collect()
    }
}

/// Log-linear model `p(l|x) ∝ exp(φ·θ)` over a candidate list.
#[derive(Debug, Clone)]
pub struct Ranker {
    pub params: ParamStore,
    theta: ParamId,
    opt: MomentumSgd,
}

impl Ranker {
    pub fn new(lr: f64, momentum: f64) -> Self {
        let mut params = ParamStore::new();
        let theta = params.add_zeros("ranker.theta", &[NUM_FEATURES]);
        let opt = MomentumSgd::new(&params, lr, momentum);
        Ranker { params, theta, opt }
    }

    pub fn theta(&self) -> &[f64] {
        &self.params.get(self.theta).data
    }

    pub fn set_theta(&mut self, theta: &[f64]) {
        self.params.get_mut(self.theta).data.copy_from_slice(theta);
    }

    pub fn score(&self, phi: &[f64]) -> f64 {
        self.theta().iter().zip(phi).map(|(a, b)| a * b).sum()
    }

    /// Softmax over the candidates.
    pub fn probabilities(&self, features: &[[f64; NUM_FEATURES]]) -> Vec<f64> {
        let s: Vec<f64> = features.iter().map(|f| self.score(f)).collect();
        crate::neural::log_softmax(&s).into_iter().map(f64::exp).collect()
    }

    /// Gradient of `−log Σ_{consistent} p(l|x)`; zero when nothing is consistent.
    pub fn gradient(&self, features: &[[f64; NUM_FEATURES]], consistent: &[bool]) -> Vec<f64> {
        let p = self.probabilities(features);
        let mass: f64 = p.iter().zip(consistent).filter(|(_, &c)| c).map(|(x, _)| x).sum();
        let mut g = vec![0.0; NUM_FEATURES];
        if mass <= 0.0 {
            return g;
        }
        for ((f, &pi), &c) in features.iter().zip(&p).zip(consistent) {
            let q = if c { pi / mass } else { 0.0 };
            for (gk, fk) in g.iter_mut().zip(f) {
                *gk += (pi - q) * fk;
            }
        }
        g
    }

    /// One momentum step on the marginal likelihood of the consistent candidates.
    /// Returns the loss before the step.
    pub fn train_step(&mut self, features: &[[f64; NUM_FEATURES]], consistent: &[bool]) -> Result<f64> {
        let p = self.probabilities(features);
        let mass: f64 = p.iter().zip(consistent).filter(|(_, &c)| c).map(|(x, _)| x).sum();
        let mut grads = self.params.zero_grads();
        grads.get_mut(self.theta).copy_from_slice(&self.gradient(features, consistent));
        self.opt.step(&mut self.params, &mut grads)?;
        Ok(-mass.ln())
    }

    /// Index of the best candidate: highest φ·θ, then parser log-probability,
    /// then the lexicographically smallest printed form.
    pub fn rank_index(&self, set: &CandidateSet, features: &[[f64; NUM_FEATURES]]) -> Result<usize> {
        if set.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        let key = |i: usize| (self.score(&features[i]), set.candidates[i].log_prob);
        let mut best = 0;
        for i in 1..set.len() {
            let (a, b) = (key(i), key(best));
            let better = match a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => print_funql(&set.candidates[i].lf) < print_funql(&set.candidates[best].lf),
            };
            if better {
                best = i;
            }
        }
        Ok(best)
    }

    pub fn rank<'a>(&self, set: &'a CandidateSet, features: &[[f64; NUM_FEATURES]]) -> Result<&'a Candidate> {
        Ok(&set.candidates[self.rank_index(set, features)?])
    }

    /// `name<TAB>weight` lines.
    pub fn to_text(&self) -> String {
        FEATURE_NAMES
            .iter()
            .zip(self.theta())
            .map(|(n, w)| format!("{n}\t{w:?}\n"))
            .collect()
    }

    pub fn from_text(text: &str, file: &str, lr: f64, momentum: f64) -> Result<Self> {
        let mut r = Ranker::new(lr, momentum);
        let mut theta = vec![0.0; NUM_FEATURES];
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (name, w) = line
                .split_once('\t')
                .ok_or_else(|| Error::data(file, i + 1, "expected name<TAB>weight"))?;
            let k = FEATURE_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::data(file, i + 1, format!("unknown feature {name}")))?;
            theta[k] = w.trim().parse().map_err(|_| Error::data(file, i + 1, "bad weight"))?;
        }
        r.set_theta(&theta);
        Ok(r)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path, lr: f64, momentum: f64) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?, &path.display().to_string(), lr, momentum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{parse_funql, Value};
    use crate::text::tokenize;
    use crate::transitions::{Derivation, Mode};

    fn cand(lf: &str, log_prob: f64) -> Candidate {
        Candidate {
            lf: parse_funql(lf).unwrap(),
            derivation: Derivation::new(Mode::BottomUp),
            log_prob,
            denotation: Ok(Denotation::empty()),
        }
    }

    fn set(cs: Vec<Candidate>) -> CandidateSet {
        CandidateSet {
            utterance: String::new(),
            candidates: cs,
        }
    }

    #[test]
    fn identifier_splitting() {
        assert_eq!(identifier_words("daughterOf"), ["daughter", "of"]);
        assert_eq!(identifier_words("people.person.place_of_birth"), ["people", "person", "place", "of", "birth"]);
        assert_eq!(identifier_words("Jen-Hsun_Huang"), ["jen", "hsun", "huang"]);
        assert_eq!(identifier_words("InfluentialTeensByYear"), ["influential", "teens", "by", "year"]);
    }

    #[test]
    fn lemmatizer() {
        let r = TextResources::default();
        assert_eq!(r.lemma("daughters"), "daughter");
        assert_eq!(r.lemma("cities"), "city");
        assert_eq!(r.lemma("flows"), "flow");
        assert_eq!(r.lemma("class"), "class");
        assert_eq!(r.lemma("is"), "is");
    }

    #[test]
    fn feature_examples() {
        let fx = FeatureExtractor::default();
        let lf = parse_funql("daughterOf(Barack_Obama)").unwrap();
        let two = Denotation::from_iter([Value::Entity("a".into()), Value::Entity("b".into())]);
        let f = fx.features(&tokenize("whose kids"), &lf, &two, -1.5);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[7], 2.0);
        let f = fx.features(&tokenize("daughter of barack obama"), &lf, &two, -1.5);
        assert_eq!(f[1], 4.0);
        let f = fx.features(&tokenize("daughters of obama"), &lf, &two, -1.5);
        assert_eq!((f[1], f[3]), (2.0, 3.0));
        assert!(f.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn cosine_features_use_vectors() {
        let mut v = WordVectors::new(2);
        v.insert("daughter", vec![1.0, 0.0]);
        v.insert("who", vec![0.0, 1.0]);
        v.insert("of", vec![1.0, 1.0]);
        let fx = FeatureExtractor::new(v);
        let lf = parse_funql("daughterOf(Barack_Obama)").unwrap();
        let f = fx.features(&tokenize("who is the daughter"), &lf, &Denotation::empty(), 0.0);
        assert!(f[0] > 0.9, "{f:?}");
        assert!((f[6] - 0.5 / 1.25f64.sqrt()).abs() < 1e-12, "{f:?}");
    }

    #[test]
    fn rank_ties_and_weights() {
        let s = set(vec![cand("r(a)", -2.0), cand("r(b)", -1.0), cand("q(b)", -1.0)]);
        let r = Ranker::new(0.01, 0.9);
        let f = vec![[0.0; NUM_FEATURES]; 3];
        assert_eq!(print_funql(&r.rank(&s, &f).unwrap().lf), "q(b)");
        let mut r = Ranker::new(0.01, 0.9);
        let mut th = [0.0; NUM_FEATURES];
        th[1] = 1.0;
        r.set_theta(&th);
        let mut f = vec![[0.0; NUM_FEATURES]; 3];
        f[0][1] = 2.0;
        f[1][1] = 1.0;
        assert_eq!(r.rank_index(&s, &f).unwrap(), 0);
        assert!(matches!(r.rank(&set(vec![]), &[]), Err(Error::EmptyCandidates)));
        assert_eq!(r.rank_index(&set(vec![cand("r(a)", -5.0)]), &f[..1]).unwrap(), 0);
    }

    #[test]
    fn all_consistent_identical_features_give_zero_gradient() {
        let r = Ranker::new(0.01, 0.9);
        let f = vec![[0.3, 1.0, 0.2, 1.0, 0.0, 0.5, 0.1, 2.0, -3.0]; 4];
        assert!(r.gradient(&f, &[true; 4]).iter().all(|g| *g == 0.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut r = Ranker::new(0.01, 0.9);
        r.set_theta(&[0.1, -0.2, 0.3, 0.0, 0.5, -0.1, 0.2, 0.05, -0.3]);
        let f: Vec<[f64; NUM_FEATURES]> = (0..5)
            .map(|i| std::array::from_fn(|k| ((i * 7 + k * 3) % 5) as f64 * 0.3 - 0.5))
            .collect();
        let c = [true, false, true, false, false];
        let loss = |r: &Ranker| {
            let p = r.probabilities(&f);
            -(p[0] + p[2]).ln()
        };
        let g = r.gradient(&f, &c);
        for k in 0..NUM_FEATURES {
            let mut th = r.theta().to_vec();
            th[k] += 1e-6;
            let mut rp = r.clone();
            rp.set_theta(&th);
            th[k] -= 2e-6;
            let mut rm = r.clone();
            rm.set_theta(&th);
            let num = (loss(&rp) - loss(&rm)) / 2e-6;
            assert!((num - g[k]).abs() < 1e-6, "{k}: {num} vs {}", g[k]);
        }
    }

    #[test]
    fn text_round_trip() {
        let mut r = Ranker::new(0.01, 0.9);
        r.set_theta(&[0.1, -0.2, 0.3, 0.0, 0.5, -0.1, 0.2, 1e-17, 0.7]);
        let back = Ranker::from_text(&r.to_text(), "r", 0.01, 0.9).unwrap();
        assert_eq!(back.theta(), r.theta());
    }
}
