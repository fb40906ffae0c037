use crate::neural::Ops;

/// Per-token marginals `p(A_i = 1)` of a binary linear-chain CRF.
///
/// Log-potential of labels `(a', a)` at position `i` is
/// `w[0]·u_i·a + w[1]·a'·a + w[2]·u_i·a'·a`; the first position has only the
/// state term. Forward and backward messages are kept in log space and the
/// marginals are normalized by the partition function.
pub fn crf_marginals<O: Ops>(o: &mut O, scores: &O::V, weights: &O::V) -> O::V {
    let k = o.value(scores).len();
    assert!(k >= 1, "crf over an empty buffer");
    assert_eq!(o.value(weights).len(), 3, "crf has exactly three feature weights");
    let w_state = o.slice(weights, 0, 1);
    let w_trans = o.slice(weights, 1, 1);
    let w_ctx = o.slice(weights, 2, 1);
    let mut state = Vec::with_capacity(k);
    let mut pair = Vec::with_capacity(k);
    for i in 0..k {
        let u = o.slice(scores, i, 1);
        state.push(o.mul(&w_state, &u));
        let c = o.mul(&w_ctx, &u);
        pair.push(o.add(&w_trans, &c));
    }
    let zero = o.scalar(0.0);
    let lse2 = |o: &mut O, a: &O::V, b: &O::V| {
        let ab = o.concat(&[a.clone(), b.clone()]);
        o.logsumexp(&ab)
    };

    let mut fwd: Vec<(O::V, O::V)> = Vec::with_capacity(k);
    fwd.push((zero.clone(), state[0].clone()));
    for i in 1..k {
        let (f0, f1) = fwd[i - 1].clone();
        let n0 = lse2(o, &f0, &f1);
        let f1p = o.add(&f1, &pair[i]);
        let inner = lse2(o, &f0, &f1p);
        let n1 = o.add(&state[i], &inner);
        fwd.push((n0, n1));
    }

    let mut bwd: Vec<(O::V, O::V)> = vec![(zero.clone(), zero.clone()); k];
    for i in (0..k.saturating_sub(1)).rev() {
        let (b0, b1) = bwd[i + 1].clone();
        let on = o.add(&state[i + 1], &b1);
        let n0 = lse2(o, &b0, &on);
        let on_pair = o.add(&on, &pair[i + 1]);
        let n1 = lse2(o, &b0, &on_pair);
        bwd[i] = (n0, n1);
    }

    let (l0, l1) = fwd[k - 1].clone();
    let log_z = lse2(o, &l0, &l1);
    let mut logs = Vec::with_capacity(k);
    for i in 0..k {
        let a = o.add(&fwd[i].1, &bwd[i].1);
        logs.push(o.sub(&a, &log_z));
    }
    let all = o.concat(&logs);
    o.exp(&all)
}
