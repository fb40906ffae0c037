use rand::Rng;

use super::lstm::LstmParams;
use super::ops::Ops;
use super::params::{NeuralError, ParamId, ParamStore};

/// Stack-structured LSTM over the partial tree with subtree composition `u = W_u·[p; c]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackEncoder {
    pub cell: LstmParams,
    pub w_u: ParamId,
}

/// Recurrent states and fragment embeddings; `states.len() == fragments.len() + 1`.
#[derive(Debug, Clone)]
pub struct StackState<V> {
    states: Vec<(V, V)>,
    fragments: Vec<V>,
}

impl<V: Clone> StackState<V> {
    /// Hidden state summarizing the whole stack.
    pub fn top(&self) -> &V {
        &self.states.last().expect("initial state is never popped").0
    }

    pub fn height(&self) -> usize {
        self.fragments.len()
    }

    pub fn fragments(&self) -> &[V] {
        &self.fragments
    }

    /// Hidden states, bottom first, including the initial state.
    pub fn hidden_states(&self) -> impl Iterator<Item = &V> {
        self.states.iter().map(|(h, _)| h)
    }

    /// Restores the state held when the stack had `height` fragments.
    pub fn truncate(&mut self, height: usize) {
        self.fragments.truncate(height);
        self.states.truncate(height + 1);
    }
}

impl StackEncoder {
    pub fn new<R: Rng>(store: &mut ParamStore, prefix: &str, input: usize, hidden: usize, rng: &mut R) -> Self {
        StackEncoder {
            cell: LstmParams::new(store, &format!("{prefix}.lstm"), input, hidden, rng),
            w_u: store.add_uniform(&format!("{prefix}.w_u"), &[input, 2 * input], rng),
        }
    }

    pub fn start<O: Ops>(&self, o: &mut O) -> StackState<O::V> {
        StackState {
            states: vec![self.cell.initial(o)],
            fragments: Vec::new(),
        }
    }

    /// One recurrent step from the top state; `fragment` is the item's embedding.
    pub fn push<O: Ops>(&self, o: &mut O, s: &mut StackState<O::V>, input: &O::V, fragment: O::V) -> Result<(), NeuralError> {
        let (h, c) = s.states.last().expect("initial state");
        let next = self.cell.step(o, input, h, c)?;
        s.states.push(next);
        s.fragments.push(fragment);
        Ok(())
    }

    /// `u = W_u·[p; mean(children)]`.
    pub fn compose<O: Ops>(&self, o: &mut O, parent: &O::V, children: &[O::V]) -> O::V {
        let c = o.mean(children);
        let pc = o.concat(&[parent.clone(), c]);
        o.affine(self.w_u, None, None, &pc)
    }

    /// Pops `children` items (and, when `parent` is `None`, the open nonterminal
    /// below them, whose embedding becomes the parent), then pushes the subtree.
    pub fn reduce<O: Ops>(
        &self,
        o: &mut O,
        s: &mut StackState<O::V>,
        children: usize,
        parent: Option<&O::V>,
    ) -> Result<O::V, NeuralError> {
        let needed = children + usize::from(parent.is_none());
        if children == 0 || s.height() < needed {
            return Err(NeuralError::StackUnderflow {
                needed: needed.max(1),
                available: s.height(),
            });
        }
        let h = s.height();
        let kids: Vec<O::V> = s.fragments[h - children..].to_vec();
        let p = match parent {
            Some(p) => p.clone(),
            None => s.fragments[h - needed].clone(),
        };
        s.truncate(h - needed);
        let u = self.compose(o, &p, &kids);
        self.push(o, s, &u, u.clone())?;
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::gradcheck::check_gradients;
    use crate::neural::{Eval, Tape};
    use rand::SeedableRng;

    fn setup(seed: u64) -> (ParamStore, StackEncoder) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let enc = StackEncoder::new(&mut store, "stack", 3, 4, &mut rng);
        (store, enc)
    }

    #[test]
    fn push_then_pop_restores_state() {
        let (store, enc) = setup(0);
        let mut o = Eval::new(&store);
        let mut s = enc.start(&mut o);
        let x = o.constant(vec![0.1, 0.2, 0.3]);
        enc.push(&mut o, &mut s, &x, x.clone()).unwrap();
        let before = s.top().clone();
        enc.push(&mut o, &mut s, &x, x.clone()).unwrap();
        assert_ne!(*s.top(), before);
        s.truncate(1);
        assert_eq!(*s.top(), before);
    }

    #[test]
    fn composition_uses_child_mean() {
        let (store, enc) = setup(1);
        let mut o = Eval::new(&store);
        let p = o.constant(vec![1.0, 2.0, 3.0]);
        let a = o.constant(vec![1.0, 0.0, -1.0]);
        let b = o.constant(vec![3.0, 2.0, 1.0]);
        let mid = o.constant(vec![2.0, 1.0, 0.0]);
        let two = enc.compose(&mut o, &p, &[a.clone(), b]);
        let one = enc.compose(&mut o, &p, &[mid]);
        for (x, y) in two.iter().zip(one.iter()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn reduce_heights() {
        let (store, enc) = setup(2);
        let mut o = Eval::new(&store);
        let mut s = enc.start(&mut o);
        let x = o.constant(vec![0.1, 0.2, 0.3]);
        // count( || and( || daughterOf( || Barack_Obama
        for _ in 0..4 {
            enc.push(&mut o, &mut s, &x, x.clone()).unwrap();
        }
        enc.reduce(&mut o, &mut s, 1, None).unwrap();
        assert_eq!(s.height(), 3);
        assert!(matches!(
            enc.reduce(&mut o, &mut s, 3, None),
            Err(NeuralError::StackUnderflow { .. })
        ));
        enc.reduce(&mut o, &mut s, 2, Some(&x)).unwrap();
        assert_eq!(s.height(), 2);
        assert_eq!(s.hidden_states().count(), 3);
    }

    #[test]
    fn composition_gradients() {
        for seed in 0..3 {
            let (mut store, enc) = setup(seed);
            for v in &mut store.get_mut(enc.w_u).data {
                *v *= 10.0;
            }
            let report = check_gradients(&store, &[enc.w_u, enc.cell.w], |o: &mut Tape| {
                let mut s = enc.start(o);
                let a = o.constant(vec![0.3, -0.7, 1.1]);
                let b = o.constant(vec![-0.2, 0.4, 0.9]);
                enc.push(o, &mut s, &a, a).unwrap();
                enc.push(o, &mut s, &b, b).unwrap();
                let u = enc.reduce(o, &mut s, 1, None).unwrap();
                let t = o.tanh(&u);
                let st = o.sum(s.top());
                let su = o.sum(&t);
                o.add(&st, &su)
            });
            assert!(report.max_rel_error < 1e-4, "{report:?}");
        }
    }
}
