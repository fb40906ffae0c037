//! Shared fixtures and independent reference implementations.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use funql_core::semantics::{Comparator, ExecError, KnowledgeBase, LogicalForm, Value};
use rand::Rng;

pub fn toy(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/toy").join(name)
}

pub fn toy_kb() -> KnowledgeBase {
    KnowledgeBase::load(toy("kb.tsv")).expect("toy kb")
}

/// Symbols a random logical form draws from.
#[derive(Debug, Clone)]
pub struct Pool {
    pub entities: Vec<String>,
    pub relations: Vec<String>,
    pub numeric: Vec<String>,
    pub numbers: Vec<f64>,
}

impl Pool {
    pub fn synthetic() -> Self {
        Pool {
            entities: (0..8).map(|i| format!("e{i}")).collect(),
            relations: ["r", "childOf", "locatedIn", "Influential_Teens"].map(String::from).to_vec(),
            numeric: ["age", "size"].map(String::from).to_vec(),
            numbers: vec![0.0, 1.5, 7.0, 2014.0, -3.0],
        }
    }

    pub fn from_kb(kb: &KnowledgeBase) -> Self {
        let numeric: Vec<String> = kb.numeric_relations().iter().cloned().collect();
        Pool {
            entities: kb.entities().iter().map(|e| e.id.clone()).collect(),
            relations: kb.relations().to_vec(),
            numeric,
            numbers: vec![0.0, 1.0, 2.0, 3.0, 5.0, 10.0],
        }
    }
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [String]) -> &'a str {
    &xs[rng.gen_range(0..xs.len())]
}

/// A random well-typed form of depth at most `depth`; `count` only appears at
/// the root, and the root is never a bare entity when `depth > 1`.
pub fn random_lf<R: Rng>(rng: &mut R, pool: &Pool, depth: usize) -> LogicalForm {
    gen(rng, pool, depth, true)
}

fn gen<R: Rng>(rng: &mut R, pool: &Pool, depth: usize, root: bool) -> LogicalForm {
    if depth <= 1 || (!root && rng.gen_bool(0.3)) {
        return LogicalForm::entity(pick(rng, &pool.entities));
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 | 1 => LogicalForm::apply(pick(rng, &pool.relations), gen(rng, pool, d, false)),
        2 if root => LogicalForm::count(gen(rng, pool, d, false)),
        2 => LogicalForm::apply(pick(rng, &pool.relations), gen(rng, pool, d, false)),
        3 => LogicalForm::argmax(gen(rng, pool, d, false), pick(rng, &pool.numeric)),
        4 => LogicalForm::argmin(gen(rng, pool, d, false), pick(rng, &pool.numeric)),
        5 => {
            let cmp = Comparator::ALL[rng.gen_range(0..6)];
            let n = pool.numbers[rng.gen_range(0..pool.numbers.len())];
            LogicalForm::filter(cmp, gen(rng, pool, d, false), pick(rng, &pool.numeric), Value::Number(n))
        }
        6 => LogicalForm::and(gen(rng, pool, d, false), gen(rng, pool, d, false)),
        _ => LogicalForm::or(gen(rng, pool, d, false), gen(rng, pool, d, false)),
    }
}

/// Set-algebra evaluation by scanning the triple list.
pub fn brute_force(lf: &LogicalForm, kb: &KnowledgeBase) -> Result<BTreeSet<Value>, ExecError> {
    let known_relation = |r: &str| kb.relations().iter().any(|x| x == r);
    let need = |r: &str| {
        if known_relation(r) {
            Ok(())
        } else {
            Err(ExecError::UnknownRelation(r.to_string()))
        }
    };
    let numbers_of = |x: &Value, r: &str| -> Vec<f64> {
        let Value::Entity(e) = x else { return Vec::new() };
        kb.triples()
            .iter()
            .filter(|t| t.subject == *e && t.relation == r)
            .filter_map(|t| match t.object {
                Value::Number(n) => Some(n),
                _ => None,
            })
            .collect()
    };
    match lf {
        LogicalForm::Entity(e) => {
            if kb.entities().iter().any(|x| x.id == *e) {
                Ok(BTreeSet::from([Value::Entity(e.clone())]))
            } else {
                Err(ExecError::UnknownEntity(e.clone()))
            }
        }
        LogicalForm::Apply { relation, arg } => {
            need(relation)?;
            let s = brute_force(arg, kb)?;
            let mut out = BTreeSet::new();
            for t in kb.triples() {
                if t.relation == *relation && s.contains(&Value::Entity(t.subject.clone())) {
                    out.insert(t.object.clone());
                }
            }
            Ok(out)
        }
        LogicalForm::Count(arg) => Ok(BTreeSet::from([Value::Number(brute_force(arg, kb)?.len() as f64)])),
        LogicalForm::ArgMax { arg, relation } | LogicalForm::ArgMin { arg, relation } => {
            let max = matches!(lf, LogicalForm::ArgMax { .. });
            need(relation)?;
            let s = brute_force(arg, kb)?;
            if s.is_empty() {
                return Ok(s);
            }
            let mut scored = Vec::new();
            for x in &s {
                let ns = numbers_of(x, relation);
                if ns.is_empty() {
                    continue;
                }
                let v = if max {
                    ns.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                } else {
                    ns.iter().cloned().fold(f64::INFINITY, f64::min)
                };
                scored.push((x.clone(), v));
            }
            if scored.is_empty() {
                return Err(ExecError::NonNumericComparison(relation.clone()));
            }
            let best = scored
                .iter()
                .map(|p| p.1)
                .fold(if max { f64::NEG_INFINITY } else { f64::INFINITY }, |a, b| {
                    if max {
                        a.max(b)
                    } else {
                        a.min(b)
                    }
                });
            Ok(scored.into_iter().filter(|p| p.1 == best).map(|p| p.0).collect())
        }
        LogicalForm::Filter {
            cmp,
            arg,
            relation,
            value,
        } => {
            need(relation)?;
            let Value::Number(threshold) = value else {
                return Err(ExecError::NonNumericValue(value.to_string()));
            };
            let s = brute_force(arg, kb)?;
            if s.is_empty() {
                return Ok(s);
            }
            let mut seen_numeric = false;
            let mut out = BTreeSet::new();
            for x in &s {
                let ns = numbers_of(x, relation);
                seen_numeric |= !ns.is_empty();
                let keep = ns.iter().any(|&n| match cmp {
                    Comparator::Eq => n == *threshold,
                    Comparator::Neq => n != *threshold,
                    Comparator::Gt => n > *threshold,
                    Comparator::Lt => n < *threshold,
                    Comparator::Ge => n >= *threshold,
                    Comparator::Le => n <= *threshold,
                });
                if keep {
                    out.insert(x.clone());
                }
            }
            if seen_numeric {
                Ok(out)
            } else {
                Err(ExecError::NonNumericComparison(relation.clone()))
            }
        }
        LogicalForm::And(l, r) => {
            let a = brute_force(l, kb)?;
            let b = brute_force(r, kb)?;
            Ok(a.into_iter().filter(|x| b.contains(x)).collect())
        }
        LogicalForm::Or(l, r) => {
            let mut a = brute_force(l, kb)?;
            a.extend(brute_force(r, kb)?);
            Ok(a)
        }
    }
}

/// A random KB with at most `max_entities` entities, two entity relations and
/// two numeric ones.
pub fn random_kb<R: Rng>(rng: &mut R, max_entities: usize) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    let n = rng.gen_range(1..=max_entities);
    let ents: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    for e in &ents {
        kb.add_entity(e, e).unwrap();
    }
    for r in ["r", "childOf", "age", "size"] {
        kb.add_relation(r).unwrap();
    }
    for _ in 0..rng.gen_range(0..4 * n) {
        let s = &ents[rng.gen_range(0..n)];
        let o = &ents[rng.gen_range(0..n)];
        let r = if rng.gen_bool(0.5) { "r" } else { "childOf" };
        kb.add_triple(s, r, Value::Entity(o.clone())).unwrap();
    }
    for _ in 0..rng.gen_range(0..2 * n) {
        let s = &ents[rng.gen_range(0..n)];
        let r = if rng.gen_bool(0.5) { "age" } else { "size" };
        kb.add_triple(s, r, Value::Number(rng.gen_range(0..8) as f64)).unwrap();
    }
    kb
}

/// `p(a_i = 1)` by summing over all `2^k` labelings of the chain.
pub fn crf_enumerate(u: &[f64], w: &[f64; 3]) -> Vec<f64> {
    let k = u.len();
    let mut z = 0.0;
    let mut marg = vec![0.0; k];
    for bits in 0u32..(1 << k) {
        let a = |i: usize| ((bits >> i) & 1) as f64;
        let mut s = 0.0;
        for i in 0..k {
            s += w[0] * u[i] * a(i);
            if i > 0 {
                s += (w[1] + w[2] * u[i]) * a(i - 1) * a(i);
            }
        }
        let p = s.exp();
        z += p;
        for (i, m) in marg.iter_mut().enumerate() {
            *m += p * a(i);
        }
    }
    marg.iter().map(|m| m / z).collect()
}
