use super::ops::{affine_forward, log_sigmoid, log_softmax, logsumexp, sigmoid, weighted_sum_forward, zip_map, Ops};
use super::params::{Gradients, ParamId, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Const,
    Param(ParamId),
    Row(ParamId, usize),
    Affine {
        w: ParamId,
        b: Option<ParamId>,
        rows: Option<Vec<usize>>,
        x: NodeId,
    },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Tanh(NodeId),
    Sigmoid(NodeId),
    LogSigmoid(NodeId),
    Exp(NodeId),
    Concat(Vec<NodeId>),
    Slice(NodeId, usize),
    Dot(NodeId, NodeId),
    Sum(NodeId),
    WeightedSum(NodeId, Vec<NodeId>),
    LogSoftmax(NodeId),
    LogSumExp(NodeId),
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    op: Op,
}

/// Dynamic reverse-mode tape over a borrowed parameter store.
pub struct Tape<'a> {
    params: &'a ParamStore,
    nodes: Vec<Node>,
}

impl<'a> Tape<'a> {
    pub fn new(params: &'a ParamStore) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    /// Value of a scalar node.
    pub fn value_of(&self, id: NodeId) -> f64 {
        self.nodes[id.0].value[0]
    }

    fn val(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    /// Gradients of the scalar node `loss` with respect to every parameter.
    pub fn backward(&self, loss: NodeId) -> Gradients {
        let mut grads = self.params.zero_grads();
        self.backward_into(loss, 1.0, &mut grads);
        grads
    }

    /// Accumulates `seed · ∂loss/∂θ` into `grads`.
    pub fn backward_into(&self, loss: NodeId, seed: f64, grads: &mut Gradients) {
        assert_eq!(self.val(loss).len(), 1, "backward needs a scalar");
        let mut adj: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        adj[loss.0] = Some(vec![seed]);
        for i in (0..=loss.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            let mut acc = |id: NodeId, f: &dyn Fn(usize) -> f64| {
                let n = self.nodes[id.0].value.len();
                let slot = adj[id.0].get_or_insert_with(|| vec![0.0; n]);
                for (j, s) in slot.iter_mut().enumerate() {
                    *s += f(j);
                }
            };
            match &node.op {
                Op::Const => {}
                Op::Param(p) => {
                    for (s, x) in grads.get_mut(*p).iter_mut().zip(&g) {
                        *s += x;
                    }
                }
                Op::Row(p, r) => {
                    let c = self.params.get(*p).cols();
                    for (s, x) in grads.get_mut(*p)[r * c..(r + 1) * c].iter_mut().zip(&g) {
                        *s += x;
                    }
                }
                Op::Affine { w, b, rows, x } => {
                    let wt = self.params.get(*w);
                    let cols = wt.cols();
                    let xv = self.val(*x);
                    let row_of = |k: usize| rows.as_ref().map_or(k, |rs| rs[k]);
                    let mut dx = vec![0.0; cols];
                    for (k, &gk) in g.iter().enumerate() {
                        if gk == 0.0 {
                            continue;
                        }
                        let r = row_of(k);
                        let wrow = &wt.data[r * cols..(r + 1) * cols];
                        for (d, wv) in dx.iter_mut().zip(wrow) {
                            *d += gk * wv;
                        }
                    }
                    {
                        let gw = grads.get_mut(*w);
                        for (k, &gk) in g.iter().enumerate() {
                            if gk == 0.0 {
                                continue;
                            }
                            let r = row_of(k);
                            for (s, xv) in gw[r * cols..(r + 1) * cols].iter_mut().zip(xv) {
                                *s += gk * xv;
                            }
                        }
                    }
                    if let Some(b) = b {
                        let gb = grads.get_mut(*b);
                        for (k, &gk) in g.iter().enumerate() {
                            gb[row_of(k)] += gk;
                        }
                    }
                    acc(*x, &|j| dx[j]);
                }
                Op::Add(a, b) => {
                    acc(*a, &|j| g[j]);
                    acc(*b, &|j| g[j]);
                }
                Op::Sub(a, b) => {
                    acc(*a, &|j| g[j]);
                    acc(*b, &|j| -g[j]);
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.val(*a), self.val(*b));
                    acc(*a, &|j| g[j] * bv[j]);
                    acc(*b, &|j| g[j] * av[j]);
                }
                Op::Scale(a, k) => acc(*a, &|j| g[j] * k),
                Op::Tanh(a) => {
                    let y = &node.value;
                    acc(*a, &|j| g[j] * (1.0 - y[j] * y[j]));
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    acc(*a, &|j| g[j] * y[j] * (1.0 - y[j]));
                }
                Op::LogSigmoid(a) => {
                    let x = self.val(*a);
                    acc(*a, &|j| g[j] * sigmoid(-x[j]));
                }
                Op::Exp(a) => {
                    let y = &node.value;
                    acc(*a, &|j| g[j] * y[j]);
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let n = self.val(*p).len();
                        acc(*p, &|j| g[off + j]);
                        off += n;
                    }
                }
                Op::Slice(a, start) => {
                    let n = self.nodes[a.0].value.len();
                    let slot = adj[a.0].get_or_insert_with(|| vec![0.0; n]);
                    for (s, x) in slot[*start..*start + g.len()].iter_mut().zip(&g) {
                        *s += x;
                    }
                }
                Op::Dot(a, b) => {
                    let (av, bv) = (self.val(*a), self.val(*b));
                    acc(*a, &|j| g[0] * bv[j]);
                    acc(*b, &|j| g[0] * av[j]);
                }
                Op::Sum(a) => acc(*a, &|_| g[0]),
                Op::WeightedSum(w, vs) => {
                    let wv = self.val(*w);
                    let dw: Vec<f64> = vs.iter().map(|v| zip_map(self.val(*v), &g, |x, y| x * y).iter().sum()).collect();
                    for (i, v) in vs.iter().enumerate() {
                        let k = wv[i];
                        acc(*v, &|j| g[j] * k);
                    }
                    acc(*w, &|i| dw[i]);
                }
                Op::LogSoftmax(a) => {
                    let y = &node.value;
                    let total: f64 = g.iter().sum();
                    acc(*a, &|j| g[j] - y[j].exp() * total);
                }
                Op::LogSumExp(a) => {
                    let x = self.val(*a);
                    let z = node.value[0];
                    acc(*a, &|j| if z == f64::NEG_INFINITY { 0.0 } else { g[0] * (x[j] - z).exp() });
                }
            }
        }
    }
}

impl Ops for Tape<'_> {
    type V = NodeId;

    fn params(&self) -> &ParamStore {
        self.params
    }

    fn value<'b>(&'b self, v: &'b NodeId) -> &'b [f64] {
        self.val(*v)
    }

    fn constant(&mut self, data: Vec<f64>) -> NodeId {
        self.push(data, Op::Const)
    }

    fn param(&mut self, p: ParamId) -> NodeId {
        let v = self.params.get(p).data.clone();
        self.push(v, Op::Param(p))
    }

    fn row(&mut self, p: ParamId, r: usize) -> NodeId {
        let v = self.params.get(p).row(r).to_vec();
        self.push(v, Op::Row(p, r))
    }

    fn affine(&mut self, w: ParamId, b: Option<ParamId>, rows: Option<&[usize]>, x: &NodeId) -> NodeId {
        let v = affine_forward(self.params.get(w), b.map(|b| self.params.get(b)), rows, self.val(*x));
        self.push(
            v,
            Op::Affine {
                w,
                b,
                rows: rows.map(<[usize]>::to_vec),
                x: *x,
            },
        )
    }

    fn add(&mut self, a: &NodeId, b: &NodeId) -> NodeId {
        let v = zip_map(self.val(*a), self.val(*b), |x, y| x + y);
        self.push(v, Op::Add(*a, *b))
    }

    fn sub(&mut self, a: &NodeId, b: &NodeId) -> NodeId {
        let v = zip_map(self.val(*a), self.val(*b), |x, y| x - y);
        self.push(v, Op::Sub(*a, *b))
    }

    fn mul(&mut self, a: &NodeId, b: &NodeId) -> NodeId {
        let v = zip_map(self.val(*a), self.val(*b), |x, y| x * y);
        self.push(v, Op::Mul(*a, *b))
    }

    fn scale(&mut self, a: &NodeId, k: f64) -> NodeId {
        let v = self.val(*a).iter().map(|x| x * k).collect();
        self.push(v, Op::Scale(*a, k))
    }

    fn tanh(&mut self, a: &NodeId) -> NodeId {
        let v = self.val(*a).iter().map(|x| x.tanh()).collect();
        self.push(v, Op::Tanh(*a))
    }

    fn sigmoid(&mut self, a: &NodeId) -> NodeId {
        let v = self.val(*a).iter().map(|&x| sigmoid(x)).collect();
        self.push(v, Op::Sigmoid(*a))
    }

    fn log_sigmoid(&mut self, a: &NodeId) -> NodeId {
        let v = self.val(*a).iter().map(|&x| log_sigmoid(x)).collect();
        self.push(v, Op::LogSigmoid(*a))
    }

    fn exp(&mut self, a: &NodeId) -> NodeId {
        let v = self.val(*a).iter().map(|x| x.exp()).collect();
        self.push(v, Op::Exp(*a))
    }

    fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let v = parts.iter().flat_map(|p| self.val(*p).iter().copied()).collect();
        self.push(v, Op::Concat(parts.to_vec()))
    }

    fn slice(&mut self, a: &NodeId, start: usize, len: usize) -> NodeId {
        let v = self.val(*a)[start..start + len].to_vec();
        self.push(v, Op::Slice(*a, start))
    }

    fn dot(&mut self, a: &NodeId, b: &NodeId) -> NodeId {
        let s = zip_map(self.val(*a), self.val(*b), |x, y| x * y).iter().sum();
        self.push(vec![s], Op::Dot(*a, *b))
    }

    fn sum(&mut self, a: &NodeId) -> NodeId {
        let s = self.val(*a).iter().sum();
        self.push(vec![s], Op::Sum(*a))
    }

    fn weighted_sum(&mut self, w: &NodeId, vs: &[NodeId]) -> NodeId {
        let refs: Vec<&[f64]> = vs.iter().map(|v| self.val(*v)).collect();
        let v = weighted_sum_forward(self.val(*w), &refs);
        self.push(v, Op::WeightedSum(*w, vs.to_vec()))
    }

    fn log_softmax(&mut self, a: &NodeId) -> NodeId {
        let v = log_softmax(self.val(*a));
        self.push(v, Op::LogSoftmax(*a))
    }

    fn logsumexp(&mut self, a: &NodeId) -> NodeId {
        let v = vec![logsumexp(self.val(*a))];
        self.push(v, Op::LogSumExp(*a))
    }
}
