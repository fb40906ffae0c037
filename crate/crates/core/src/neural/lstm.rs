use rand::Rng;

use super::ops::Ops;
use super::params::{NeuralError, ParamId, ParamStore};

/// One LSTM layer: gate pre-activations `W·[h; x] + b` in the order i, f, o, ĉ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmParams {
    pub w: ParamId,
    pub b: ParamId,
    pub h0: ParamId,
    pub c0: ParamId,
    pub input: usize,
    pub hidden: usize,
}

impl LstmParams {
    pub fn new<R: Rng>(store: &mut ParamStore, prefix: &str, input: usize, hidden: usize, rng: &mut R) -> Self {
        LstmParams {
            w: store.add_uniform(&format!("{prefix}.w"), &[4 * hidden, hidden + input], rng),
            b: store.add_uniform(&format!("{prefix}.b"), &[4 * hidden], rng),
            h0: store.add_uniform(&format!("{prefix}.h0"), &[hidden], rng),
            c0: store.add_uniform(&format!("{prefix}.c0"), &[hidden], rng),
            input,
            hidden,
        }
    }

    /// Learned initial (hidden, memory) state.
    pub fn initial<O: Ops>(&self, o: &mut O) -> (O::V, O::V) {
        (o.param(self.h0), o.param(self.c0))
    }

    pub fn step<O: Ops>(&self, o: &mut O, x: &O::V, h: &O::V, c: &O::V) -> Result<(O::V, O::V), NeuralError> {
        if o.value(x).len() != self.input || o.value(h).len() != self.hidden || o.value(c).len() != self.hidden {
            return Err(NeuralError::ShapeMismatch(format!(
                "lstm step expects input {} and hidden {}, got {}, {}, {}",
                self.input,
                self.hidden,
                o.value(x).len(),
                o.value(h).len(),
                o.value(c).len()
            )));
        }
        let n = self.hidden;
        let hx = o.concat(&[h.clone(), x.clone()]);
        let z = o.affine(self.w, Some(self.b), None, &hx);
        let zi = o.slice(&z, 0, n);
        let zf = o.slice(&z, n, n);
        let zo = o.slice(&z, 2 * n, n);
        let zc = o.slice(&z, 3 * n, n);
        let i = o.sigmoid(&zi);
        let f = o.sigmoid(&zf);
        let og = o.sigmoid(&zo);
        let cand = o.tanh(&zc);
        let keep = o.mul(&f, c);
        let write = o.mul(&i, &cand);
        let c_new = o.add(&keep, &write);
        let tc = o.tanh(&c_new);
        let h_new = o.mul(&og, &tc);
        Ok((h_new, c_new))
    }
}

/// Forward and backward layers over the word sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BiEncoder {
    pub fwd: LstmParams,
    pub bwd: LstmParams,
}

impl BiEncoder {
    pub fn new<R: Rng>(store: &mut ParamStore, prefix: &str, input: usize, hidden: usize, rng: &mut R) -> Self {
        BiEncoder {
            fwd: LstmParams::new(store, &format!("{prefix}.fwd"), input, hidden, rng),
            bwd: LstmParams::new(store, &format!("{prefix}.bwd"), input, hidden, rng),
        }
    }

    /// Buffer vectors `b_i = [forward h_i; backward h_i]`.
    pub fn encode<O: Ops>(&self, o: &mut O, inputs: &[O::V]) -> Result<Vec<O::V>, NeuralError> {
        if inputs.is_empty() {
            return Err(NeuralError::EmptyUtterance);
        }
        let run = |o: &mut O, cell: &LstmParams, order: &mut dyn Iterator<Item = usize>| {
            let (mut h, mut c) = cell.initial(o);
            let mut out = vec![None; inputs.len()];
            for i in order {
                (h, c) = cell.step(o, &inputs[i], &h, &c)?;
                out[i] = Some(h.clone());
            }
            Ok::<_, NeuralError>(out.into_iter().map(|v| v.expect("filled")).collect::<Vec<_>>())
        };
        let f = run(o, &self.fwd, &mut (0..inputs.len()))?;
        let b = run(o, &self.bwd, &mut (0..inputs.len()).rev())?;
        Ok(f.into_iter().zip(b).map(|(f, b)| o.concat(&[f, b])).collect())
    }
}

/// Encodes an utterance given word-embedding rows.
pub fn encode_utterance<O: Ops>(
    o: &mut O,
    encoder: &BiEncoder,
    embeddings: ParamId,
    word_ids: &[usize],
) -> Result<Vec<O::V>, NeuralError> {
    let inputs: Vec<O::V> = word_ids.iter().map(|&w| o.row(embeddings, w)).collect();
    encoder.encode(o, &inputs)
}
