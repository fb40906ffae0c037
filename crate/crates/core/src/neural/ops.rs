use std::rc::Rc;

use super::params::{ParamId, ParamStore, Tensor};

/// Differentiable vector operations. Implemented by [`Eval`] (values only)
/// and by [`super::Tape`] (records a graph for reverse mode).
pub trait Ops {
    type V: Clone;

    fn params(&self) -> &ParamStore;
    fn value<'a>(&'a self, v: &'a Self::V) -> &'a [f64];

    fn constant(&mut self, data: Vec<f64>) -> Self::V;
    /// Whole parameter, flattened.
    fn param(&mut self, p: ParamId) -> Self::V;
    /// One row of a matrix parameter (embedding lookup).
    fn row(&mut self, p: ParamId, r: usize) -> Self::V;
    /// `W[rows]·x + b[rows]`; `rows = None` selects every row.
    fn affine(&mut self, w: ParamId, b: Option<ParamId>, rows: Option<&[usize]>, x: &Self::V) -> Self::V;

    fn add(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn sub(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn mul(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn scale(&mut self, a: &Self::V, k: f64) -> Self::V;
    fn tanh(&mut self, a: &Self::V) -> Self::V;
    fn sigmoid(&mut self, a: &Self::V) -> Self::V;
    fn log_sigmoid(&mut self, a: &Self::V) -> Self::V;
    fn exp(&mut self, a: &Self::V) -> Self::V;

    fn concat(&mut self, parts: &[Self::V]) -> Self::V;
    fn slice(&mut self, a: &Self::V, start: usize, len: usize) -> Self::V;
    /// Scalar (length-1) inner product.
    fn dot(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn sum(&mut self, a: &Self::V) -> Self::V;
    /// `Σ_i w[i]·vs[i]`.
    fn weighted_sum(&mut self, w: &Self::V, vs: &[Self::V]) -> Self::V;
    fn log_softmax(&mut self, a: &Self::V) -> Self::V;
    fn logsumexp(&mut self, a: &Self::V) -> Self::V;

    fn pick(&mut self, a: &Self::V, i: usize) -> Self::V {
        self.slice(a, i, 1)
    }

    fn scalar(&mut self, x: f64) -> Self::V {
        self.constant(vec![x])
    }

    fn softmax(&mut self, a: &Self::V) -> Self::V {
        let l = self.log_softmax(a);
        self.exp(&l)
    }

    /// Elementwise mean of equally sized vectors.
    fn mean(&mut self, vs: &[Self::V]) -> Self::V {
        let w = self.constant(vec![1.0 / vs.len() as f64; vs.len()]);
        self.weighted_sum(&w, vs)
    }

    fn scalar_value(&self, v: &Self::V) -> f64 {
        self.value(v)[0]
    }
}

pub(crate) fn affine_forward(w: &Tensor, b: Option<&Tensor>, rows: Option<&[usize]>, x: &[f64]) -> Vec<f64> {
    let cols = w.cols();
    assert_eq!(cols, x.len(), "affine: matrix has {cols} columns, input has {}", x.len());
    let one = |r: usize| {
        let row = &w.data[r * cols..(r + 1) * cols];
        let mut s = b.map_or(0.0, |b| b.data[r]);
        for (a, c) in row.iter().zip(x) {
            s += a * c;
        }
        s
    };
    match rows {
        Some(rows) => rows.iter().map(|&r| one(r)).collect(),
        None => (0..w.rows()).map(one).collect(),
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn log_sigmoid(x: f64) -> f64 {
    // -softplus(-x)
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn log_softmax(xs: &[f64]) -> Vec<f64> {
    let z = logsumexp(xs);
    xs.iter().map(|x| x - z).collect()
}

/// Index of the largest element; the first one on ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn zip_map(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "elementwise op on lengths {} and {}", a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

pub(crate) fn weighted_sum_forward(w: &[f64], vs: &[&[f64]]) -> Vec<f64> {
    assert_eq!(w.len(), vs.len(), "weighted_sum: {} weights for {} vectors", w.len(), vs.len());
    let mut out = vec![0.0; vs.first().map_or(0, |v| v.len())];
    for (&k, v) in w.iter().zip(vs) {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += k * x;
        }
    }
    out
}

/// Forward-only backend. Counts primitive calls so that algorithmic cost can be measured.
pub struct Eval<'a> {
    params: &'a ParamStore,
    pub op_count: usize,
}

impl<'a> Eval<'a> {
    pub fn new(params: &'a ParamStore) -> Self {
        Eval { params, op_count: 0 }
    }

    fn wrap(&mut self, v: Vec<f64>) -> Rc<Vec<f64>> {
        self.op_count += 1;
        Rc::new(v)
    }
}

impl Ops for Eval<'_> {
    type V = Rc<Vec<f64>>;

    fn params(&self) -> &ParamStore {
        self.params
    }

    fn value<'b>(&'b self, v: &'b Self::V) -> &'b [f64] {
        v
    }

    fn constant(&mut self, data: Vec<f64>) -> Self::V {
        self.wrap(data)
    }

    fn param(&mut self, p: ParamId) -> Self::V {
        let d = self.params.get(p).data.clone();
        self.wrap(d)
    }

    fn row(&mut self, p: ParamId, r: usize) -> Self::V {
        let d = self.params.get(p).row(r).to_vec();
        self.wrap(d)
    }

    fn affine(&mut self, w: ParamId, b: Option<ParamId>, rows: Option<&[usize]>, x: &Self::V) -> Self::V {
        let out = affine_forward(self.params.get(w), b.map(|b| self.params.get(b)), rows, x);
        self.wrap(out)
    }

    fn add(&mut self, a: &Self::V, b: &Self::V) -> Self::V {
        let v = zip_map(a, b, |x, y| x + y);
        self.wrap(v)
    }

    fn sub(&mut self, a: &Self::V, b: &Self::V) -> Self::V {
        let v = zip_map(a, b, |x, y| x - y);
        self.wrap(v)
    }

    fn mul(&mut self, a: &Self::V, b: &Self::V) -> Self::V {
        let v = zip_map(a, b, |x, y| x * y);
        self.wrap(v)
    }

    fn scale(&mut self, a: &Self::V, k: f64) -> Self::V {
        let v = a.iter().map(|x| x * k).collect();
        self.wrap(v)
    }

    fn tanh(&mut self, a: &Self::V) -> Self::V {
        let v = a.iter().map(|x| x.tanh()).collect();
        self.wrap(v)
    }

    fn sigmoid(&mut self, a: &Self::V) -> Self::V {
        let v = a.iter().map(|&x| sigmoid(x)).collect();
        self.wrap(v)
    }

    fn log_sigmoid(&mut self, a: &Self::V) -> Self::V {
        let v = a.iter().map(|&x| log_sigmoid(x)).collect();
        self.wrap(v)
    }

    fn exp(&mut self, a: &Self::V) -> Self::V {
        let v = a.iter().map(|x| x.exp()).collect();
        self.wrap(v)
    }

    fn concat(&mut self, parts: &[Self::V]) -> Self::V {
        let v = parts.iter().flat_map(|p| p.iter().copied()).collect();
        self.wrap(v)
    }

    fn slice(&mut self, a: &Self::V, start: usize, len: usize) -> Self::V {
        let v = a[start..start + len].to_vec();
        self.wrap(v)
    }

    fn dot(&mut self, a: &Self::V, b: &Self::V) -> Self::V {
        let s = zip_map(a, b, |x, y| x * y).iter().sum();
        self.wrap(vec![s])
    }

    fn sum(&mut self, a: &Self::V) -> Self::V {
        let s = a.iter().sum();
        self.wrap(vec![s])
    }

    fn weighted_sum(&mut self, w: &Self::V, vs: &[Self::V]) -> Self::V {
        let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        let v = weighted_sum_forward(w, &refs);
        self.wrap(v)
    }

    fn log_softmax(&mut self, a: &Self::V) -> Self::V {
        let v = log_softmax(a);
        self.wrap(v)
    }

    fn logsumexp(&mut self, a: &Self::V) -> Self::V {
        let v = vec![logsumexp(a)];
        self.wrap(v)
    }
}
