use rand::Rng;
use thiserror::Error;

use crate::neural::{Ops, ParamId, ParamStore};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictError {
    #[error("no legal choice")]
    EmptyMask,
}

/// Output layers: `softmax(W_o· tanh(W_f [context; s] + b_f) + b_o)` over masked rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Heads {
    pub w_f: ParamId,
    pub b_f: ParamId,
    pub w_oa: ParamId,
    pub b_oa: ParamId,
    pub w_oy: ParamId,
    pub b_oy: ParamId,
}

impl Heads {
    pub fn new<R: Rng>(
        store: &mut ParamStore,
        context_dim: usize,
        state_dim: usize,
        feature_dim: usize,
        actions: usize,
        tokens: usize,
        rng: &mut R,
    ) -> Self {
        Heads {
            w_f: store.add_uniform("out.w_f", &[feature_dim, context_dim + state_dim], rng),
            b_f: store.add_uniform("out.b_f", &[feature_dim], rng),
            w_oa: store.add_uniform("out.w_oa", &[actions, feature_dim], rng),
            b_oa: store.add_uniform("out.b_oa", &[actions], rng),
            w_oy: store.add_uniform("out.w_oy", &[tokens, feature_dim], rng),
            b_oy: store.add_uniform("out.b_oy", &[tokens], rng),
        }
    }

    /// Combined representation, optionally multiplied by a dropout mask.
    pub fn features<O: Ops>(&self, o: &mut O, context: &O::V, state: &O::V, dropout: Option<&[f64]>) -> O::V {
        let x = o.concat(&[context.clone(), state.clone()]);
        let z = o.affine(self.w_f, Some(self.b_f), None, &x);
        let f = o.tanh(&z);
        match dropout {
            Some(mask) => {
                let m = o.constant(mask.to_vec());
                o.mul(&f, &m)
            }
            None => f,
        }
    }

    /// Log-probabilities over the listed action rows.
    pub fn action_log_probs<O: Ops>(&self, o: &mut O, feature: &O::V, rows: &[usize]) -> Result<O::V, PredictError> {
        masked_log_softmax(o, self.w_oa, self.b_oa, feature, rows)
    }

    /// Log-probabilities over the listed token rows.
    pub fn token_log_probs<O: Ops>(&self, o: &mut O, feature: &O::V, rows: &[usize]) -> Result<O::V, PredictError> {
        masked_log_softmax(o, self.w_oy, self.b_oy, feature, rows)
    }
}

fn masked_log_softmax<O: Ops>(
    o: &mut O,
    w: ParamId,
    b: ParamId,
    feature: &O::V,
    rows: &[usize],
) -> Result<O::V, PredictError> {
    if rows.is_empty() {
        return Err(PredictError::EmptyMask);
    }
    let logits = o.affine(w, Some(b), Some(rows), feature);
    Ok(o.log_softmax(&logits))
}

/// Expands log-probabilities over `rows` to a full distribution of size `n`.
pub fn full_distribution(log_probs: &[f64], rows: &[usize], n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n];
    for (&r, lp) in rows.iter().zip(log_probs) {
        p[r] = lp.exp();
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{gradcheck::check_gradients, Eval, Tape};
    use rand::SeedableRng;

    fn setup(seed: u64) -> (ParamStore, Heads) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let h = Heads::new(&mut store, 4, 3, 5, 6, 7, &mut rng);
        (store, h)
    }

    #[test]
    fn masked_distributions() {
        let (mut store, h) = setup(0);
        let mut o = Eval::new(&store);
        let c = o.constant(vec![0.1, 0.2, 0.3, 0.4]);
        let s = o.constant(vec![1.0, -1.0, 0.5]);
        let f = h.features(&mut o, &c, &s, None);
        let one = h.action_log_probs(&mut o, &f, &[3]).unwrap();
        assert_eq!(one[0], 0.0);
        assert_eq!(h.token_log_probs(&mut o, &f, &[]), Err(PredictError::EmptyMask));
        let rows = [0, 2, 5];
        let lp = h.token_log_probs(&mut o, &f, &rows).unwrap();
        let full = full_distribution(&lp, &rows, 7);
        assert_eq!(full[1], 0.0);
        assert!((full.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        for id in [h.w_oa, h.b_oa] {
            store.get_mut(id).data.fill(0.0);
        }
        let mut o = Eval::new(&store);
        let f = o.constant(vec![0.3; 5]);
        let lp = h.action_log_probs(&mut o, &f, &[0, 1, 4]).unwrap();
        for x in lp.iter() {
            assert!((x.exp() - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn output_gradients() {
        for seed in 0..3 {
            let (mut store, h) = setup(seed);
            for id in [h.w_f, h.w_oa, h.w_oy] {
                for x in &mut store.get_mut(id).data {
                    *x *= 10.0;
                }
            }
            let ids = [h.w_f, h.b_f, h.w_oa, h.b_oa, h.w_oy, h.b_oy];
            let mask = [2.0, 0.0, 2.0, 2.0, 0.0];
            let report = check_gradients(&store, &ids, |o: &mut Tape| {
                let c = o.constant(vec![0.1, -0.2, 0.3, 0.4]);
                let s = o.constant(vec![1.0, -1.0, 0.5]);
                let f = h.features(o, &c, &s, Some(&mask));
                let a = h.action_log_probs(o, &f, &[1, 2, 5]).unwrap();
                let y = h.token_log_probs(o, &f, &[0, 6]).unwrap();
                let pa = o.pick(&a, 2);
                let py = o.pick(&y, 0);
                o.add(&pa, &py)
            });
            assert!(report.max_rel_error < 1e-4, "{report:?}");
        }
    }
}
