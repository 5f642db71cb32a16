//! Straight-line TreeRNN forward pass written from the layer definitions with
//! plain nested loops. It shares no code with the library's forward path.
#![allow(clippy::needless_range_loop)]

use treernn_core::nn::{FeatureMap, Model, Pooling, Role, HIDDEN};

fn rnn_sequence(inputs: &[Vec<f64>], w_in: &[f64], w_h: &[f64], bias: &[f64]) -> Vec<Vec<f64>> {
    let in_dim = inputs[0].len();
    let mut h = vec![0.0; HIDDEN];
    let mut out = Vec::new();
    for x in inputs {
        let mut next = vec![0.0; HIDDEN];
        for k in 0..HIDDEN {
            let mut acc = bias[k];
            for j in 0..in_dim {
                acc += x[j] * w_in[j * HIDDEN + k];
            }
            for j in 0..HIDDEN {
                acc += h[j] * w_h[j * HIDDEN + k];
            }
            next[k] = acc.tanh();
        }
        h = next.clone();
        out.push(next);
    }
    out
}

pub fn treernn_probs(m: &Model, x: &FeatureMap) -> Vec<f64> {
    let (hgt, wid, ch) = (x.height(), x.width(), x.channels());
    let w1 = m.get(Role::MlpWeight);
    let b1 = m.get(Role::MlpBias);
    // point-wise perceptron
    let mut p = vec![vec![vec![0.0; HIDDEN]; wid]; hgt];
    for r in 0..hgt {
        for t in 0..wid {
            let px = x.at(r, t);
            for k in 0..HIDDEN {
                let mut acc = b1[k];
                for c in 0..ch {
                    acc += px[c] * w1[c * HIDDEN + k];
                }
                p[r][t][k] = if acc > 0.0 { acc } else { 0.0 };
            }
        }
    }
    let rows: Vec<usize> = (0..hgt).rev().collect();
    let concat = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().chain(b).copied().collect() };
    let (w_in, w_h, bc) = (m.get(Role::CellInput), m.get(Role::CellRecurrent), m.get(Role::CellBias));

    let second = if hgt == 1 { rows[0] } else { rows[1] };
    let first_inputs: Vec<Vec<f64>> = (0..wid).map(|t| concat(&p[rows[0]][t], &p[second][t])).collect();
    let mut s = rnn_sequence(&first_inputs, w_in, w_h, bc);
    let mut all = s.clone();
    for &u in rows.iter().skip(2) {
        let inputs: Vec<Vec<f64>> = (0..wid).map(|t| concat(&s[t], &p[u][t])).collect();
        s = rnn_sequence(&inputs, w_in, w_h, bc);
        all.extend(s.iter().cloned());
    }
    let pool_over = if m.pooling() == Pooling::AllSteps { &all } else { &s };
    let mut z = vec![f64::NEG_INFINITY; HIDDEN];
    for v in pool_over {
        for k in 0..HIDDEN {
            if v[k] > z[k] {
                z[k] = v[k];
            }
        }
    }
    let (w2, b2) = (m.get(Role::HeadWeight), m.get(Role::HeadBias));
    let classes = m.classes();
    let mut logits = vec![0.0; classes];
    for c in 0..classes {
        logits[c] = b2[c];
        for k in 0..HIDDEN {
            logits[c] += z[k] * w2[k * classes + c];
        }
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.iter().map(|v| v / sum).collect()
}
