//! Forward pass and exact backpropagation for every [`Variant`].

use super::linalg::{gemm_acc, transpose, vec_mat_acc, MatRef};
use super::model::{Gradients, Model, Pooling, Role, Variant, HIDDEN};
use super::FeatureMap;
use crate::error::{Error, Result};

/// Class probabilities plus everything the backward pass needs.
#[derive(Debug, Clone)]
pub struct Forward {
    pub probs: Vec<f64>,
    pub logits: Vec<f64>,
    mlp_out: Vec<f64>,
    body: Body,
    pooled: Vec<f64>,
    argmax: Vec<usize>,
}

#[derive(Debug, Clone)]
enum Body {
    Pool,
    Conv {
        patches: Vec<f64>,
        out: Vec<f64>,
    },
    Row {
        states: Vec<f64>,
    },
    /// `empty[r * w + t]` marks all-zero input pixels, whose perceptron
    /// output is the constant `relu(mlp bias)`.
    Tree {
        empty: Vec<bool>,
        states: Vec<Vec<f64>>,
    },
}

/// `rows` copies of `v` back to back.
fn tile(v: &[f64], rows: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * v.len());
    for _ in 0..rows {
        out.extend_from_slice(v);
    }
    out
}

/// Runs the tanh recurrence in place over `steps x HIDDEN` pre-activations
/// that already hold the input contribution and bias. Starts from a zero state.
fn recur(a: &mut [f64], steps: usize, w_h: &[f64]) {
    for t in 0..steps {
        let (done, rest) = a.split_at_mut(t * HIDDEN);
        let at = &mut rest[..HIDDEN];
        if t > 0 {
            vec_mat_acc(at, &done[(t - 1) * HIDDEN..], w_h);
        }
        for v in at.iter_mut() {
            *v = v.tanh();
        }
    }
}

/// Tanh recurrent scan over `steps` inputs of width `in_dim`, from a zero
/// state. Returns the `steps x HIDDEN` hidden states.
fn scan(x: &[f64], steps: usize, in_dim: usize, w_in: &[f64], w_h: &[f64], bias: &[f64]) -> Vec<f64> {
    let mut hs = tile(bias, steps);
    gemm_acc(&mut hs, MatRef::new(x, steps, in_dim), MatRef::new(w_in, in_dim, HIDDEN));
    recur(&mut hs, steps, w_h);
    hs
}

/// Backpropagation through [`recur`]: turns gradients with respect to the
/// hidden states into gradients with respect to the pre-activations, and
/// accumulates the recurrent weight and bias gradients.
fn recur_backward(states: &[f64], d_states: &[f64], steps: usize, w_h_t: &[f64], gw_h: &mut [f64], gb: &mut [f64]) -> Vec<f64> {
    let mut da = vec![0.0; steps * HIDDEN];
    let mut carry = [0.0; HIDDEN];
    for t in (0..steps).rev() {
        let h = &states[t * HIDDEN..(t + 1) * HIDDEN];
        let d = &d_states[t * HIDDEN..(t + 1) * HIDDEN];
        let at = &mut da[t * HIDDEN..(t + 1) * HIDDEN];
        for k in 0..HIDDEN {
            at[k] = (d[k] + carry[k]) * (1.0 - h[k] * h[k]);
        }
        if t > 0 {
            carry = [0.0; HIDDEN];
            vec_mat_acc(&mut carry, at, w_h_t);
        }
    }
    for row in da.chunks_exact(HIDDEN) {
        for (g, v) in gb.iter_mut().zip(row) {
            *g += v;
        }
    }
    if steps > 1 {
        gemm_acc(gw_h, MatRef::new(states, steps - 1, HIDDEN).t(), MatRef::new(&da[HIDDEN..], steps - 1, HIDDEN));
    }
    da
}

/// `g += u^T v` for vectors `u` (rows) and `v` (columns).
fn outer_acc(g: &mut [f64], u: &[f64], v: &[f64]) {
    for (&uk, row) in u.iter().zip(g.chunks_exact_mut(v.len())) {
        if uk != 0.0 {
            for (a, &b) in row.iter_mut().zip(v) {
                *a += uk * b;
            }
        }
    }
}

/// Column-wise max over `rows x HIDDEN` values, merged into `(pooled, argmax)`.
/// `base` offsets the recorded positions; the first maximum wins ties.
fn max_pool_into(values: &[f64], base: usize, pooled: &mut [f64], argmax: &mut [usize]) {
    for (r, row) in values.chunks_exact(HIDDEN).enumerate() {
        for k in 0..HIDDEN {
            if row[k] > pooled[k] {
                pooled[k] = row[k];
                argmax[k] = base + r;
            }
        }
    }
}

/// 3x3 same-padded patches: `(h*w) x (9*HIDDEN)`, ordered `(ky, kx, c)`.
fn im2col(p: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; h * w * 9 * HIDDEN];
    for r in 0..h {
        for c in 0..w {
            let dst = &mut out[(r * w + c) * 9 * HIDDEN..(r * w + c + 1) * 9 * HIDDEN];
            for ky in 0..3 {
                for kx in 0..3 {
                    let (sr, sc) = (r + ky, c + kx);
                    if sr < 1 || sc < 1 || sr > h || sc > w {
                        continue;
                    }
                    let src = ((sr - 1) * w + (sc - 1)) * HIDDEN;
                    let at = (ky * 3 + kx) * HIDDEN;
                    dst[at..at + HIDDEN].copy_from_slice(&p[src..src + HIDDEN]);
                }
            }
        }
    }
    out
}

fn col2im_acc(d_patches: &[f64], h: usize, w: usize, d_p: &mut [f64]) {
    for r in 0..h {
        for c in 0..w {
            let src = &d_patches[(r * w + c) * 9 * HIDDEN..(r * w + c + 1) * 9 * HIDDEN];
            for ky in 0..3 {
                for kx in 0..3 {
                    let (sr, sc) = (r + ky, c + kx);
                    if sr < 1 || sc < 1 || sr > h || sc > w {
                        continue;
                    }
                    let dst = ((sr - 1) * w + (sc - 1)) * HIDDEN;
                    let at = (ky * 3 + kx) * HIDDEN;
                    for k in 0..HIDDEN {
                        d_p[dst + k] += src[at + k];
                    }
                }
            }
        }
    }
}

/// Number of row steps the TreeRNN runs on an image of `h` rows.
fn tree_steps(h: usize) -> usize {
    h.saturating_sub(1).max(1)
}

/// Image row feeding the second half of step `s`'s input. Rows are visited
/// deepest first, so step `s` reads row `h - 2 - s`; a single-row image
/// feeds its row to both halves.
fn tree_row(h: usize, s: usize) -> usize {
    if h == 1 {
        0
    } else {
        h - 2 - s
    }
}

fn check_input(m: &Model, x: &FeatureMap) -> Result<()> {
    if x.channels() != m.input_channels {
        return Err(Error::Shape(format!("feature map has {} channels, model expects {}", x.channels(), m.input_channels)));
    }
    if x.height() == 0 || x.width() == 0 {
        return Err(Error::Shape("empty feature map".into()));
    }
    Ok(())
}

pub fn forward(m: &Model, x: &FeatureMap) -> Result<Forward> {
    check_input(m, x)?;
    let (h, w, c) = (x.height(), x.width(), x.channels());
    let n = h * w;

    let mut p = tile(m.get(Role::MlpBias), n);
    gemm_acc(&mut p, MatRef::new(x.data(), n, c), MatRef::new(m.get(Role::MlpWeight), c, HIDDEN));
    for v in &mut p {
        *v = v.max(0.0);
    }

    let mut pooled = vec![f64::NEG_INFINITY; HIDDEN];
    let mut argmax = vec![0usize; HIDDEN];
    let body = match m.variant {
        Variant::MlpOnly => {
            max_pool_into(&p, 0, &mut pooled, &mut argmax);
            Body::Pool
        }
        Variant::Conv2d => {
            let patches = im2col(&p, h, w);
            let mut out = tile(m.get(Role::ConvBias), n);
            gemm_acc(&mut out, MatRef::new(&patches, n, 9 * HIDDEN), MatRef::new(m.get(Role::ConvKernel), 9 * HIDDEN, HIDDEN));
            for v in &mut out {
                *v = v.max(0.0);
            }
            max_pool_into(&out, 0, &mut pooled, &mut argmax);
            Body::Conv { patches, out }
        }
        Variant::RowRnn => {
            let states = scan(&p, n, HIDDEN, m.get(Role::CellInput), m.get(Role::CellRecurrent), m.get(Role::CellBias));
            max_pool_into(&states, 0, &mut pooled, &mut argmax);
            Body::Row { states }
        }
        Variant::TreeRnn => {
            // The shared input weight splits into the half that reads the
            // lower sequence and the half that reads the current image row.
            let (w_lo, w_up) = m.get(Role::CellInput).split_at(HIDDEN * HIDDEN);
            let (w_h, cell_bias) = (m.get(Role::CellRecurrent), m.get(Role::CellBias));
            let empty: Vec<bool> = x.data().chunks_exact(c).map(|px| px.iter().all(|&v| v == 0.0)).collect();
            let p_empty: Vec<f64> = m.get(Role::MlpBias).iter().map(|b| b.max(0.0)).collect();
            let mut q_empty = cell_bias.to_vec();
            vec_mat_acc(&mut q_empty, &p_empty, w_up);

            let steps = tree_steps(h);
            let mut states: Vec<Vec<f64>> = Vec::with_capacity(steps);
            for s in 0..steps {
                let row = tree_row(h, s);
                let mut a = vec![0.0; w * HIDDEN];
                for (t, at) in a.chunks_exact_mut(HIDDEN).enumerate() {
                    if empty[row * w + t] {
                        at.copy_from_slice(&q_empty);
                    } else {
                        at.copy_from_slice(cell_bias);
                        vec_mat_acc(at, &p[(row * w + t) * HIDDEN..(row * w + t + 1) * HIDDEN], w_up);
                    }
                }
                let lower: &[f64] = match states.last() {
                    Some(prev) => prev,
                    None => &p[(h - 1) * w * HIDDEN..h * w * HIDDEN],
                };
                gemm_acc(&mut a, MatRef::new(lower, w, HIDDEN), MatRef::new(w_lo, HIDDEN, HIDDEN));
                recur(&mut a, w, w_h);
                if m.pooling == Pooling::AllSteps || s + 1 == steps {
                    max_pool_into(&a, s * w, &mut pooled, &mut argmax);
                }
                states.push(a);
            }
            Body::Tree { empty, states }
        }
    };

    let mut logits = m.get(Role::HeadBias).to_vec();
    vec_mat_acc(&mut logits, &pooled, m.get(Role::HeadWeight));
    let probs = softmax(&logits);
    Ok(Forward { probs, logits, mlp_out: p, body, pooled, argmax })
}

impl Forward {
    /// True when `other` took the same side of every relu and picked the
    /// same winner in every max-pool lane, i.e. both passes lie on one
    /// smooth piece of the loss.
    pub(crate) fn same_branches(&self, other: &Forward) -> bool {
        let signs_match = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (*x > 0.0) == (*y > 0.0));
        let body = match (&self.body, &other.body) {
            (Body::Conv { out: a, .. }, Body::Conv { out: b, .. }) => signs_match(a, b),
            _ => true,
        };
        body && self.argmax == other.argmax && signs_match(&self.mlp_out, &other.mlp_out)
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

/// `-log p[label]`, computed from the logits for accuracy near p = 1.
pub fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

fn check_label(m: &Model, label: usize) -> Result<()> {
    if label >= m.classes {
        return Err(Error::InvalidArgument(format!("label {label} outside 0..{}", m.classes)));
    }
    Ok(())
}

pub fn loss(m: &Model, x: &FeatureMap, label: usize) -> Result<f64> {
    check_label(m, label)?;
    Ok(cross_entropy(&forward(m, x)?.logits, label))
}

/// Exact gradient of the cross-entropy loss with respect to every parameter.
pub fn backward(m: &Model, x: &FeatureMap, fwd: &Forward, label: usize) -> Result<Gradients> {
    let mut grads = Gradients::zeros_like(m);
    backward_acc(m, x, fwd, label, &mut grads)?;
    Ok(grads)
}

/// Like [`backward`], but adds the gradient into `grads`.
pub fn backward_acc(m: &Model, x: &FeatureMap, fwd: &Forward, label: usize, grads: &mut Gradients) -> Result<()> {
    check_input(m, x)?;
    check_label(m, label)?;
    let (h, w, c) = (x.height(), x.width(), x.channels());
    let n = h * w;
    if grads.values.len() != m.parameter_count() {
        return Err(Error::Shape(format!("gradient buffer holds {} values, model has {}", grads.values.len(), m.parameter_count())));
    }
    let g = &mut grads.values;

    let mut d_logits = fwd.probs.clone();
    d_logits[label] -= 1.0;
    {
        let head = m.range(Role::HeadWeight);
        let gw = &mut g[head];
        for (k, &z) in fwd.pooled.iter().enumerate() {
            for (j, &d) in d_logits.iter().enumerate() {
                gw[k * m.classes + j] += z * d;
            }
        }
        for (gb, d) in g[m.range(Role::HeadBias)].iter_mut().zip(&d_logits) {
            *gb += d;
        }
    }
    let head_w = m.get(Role::HeadWeight);
    let d_pooled: Vec<f64> = (0..HIDDEN).map(|k| d_logits.iter().enumerate().map(|(j, d)| head_w[k * m.classes + j] * d).sum()).collect();

    let mut d_p = vec![0.0; n * HIDDEN];
    // Gradient reaching empty pixels in aggregate (TreeRNN only). Empty
    // pixels have zero input, so it only feeds the perceptron bias.
    let mut d_p_empty = [0.0; HIDDEN];
    match &fwd.body {
        Body::Pool => {
            for k in 0..HIDDEN {
                d_p[fwd.argmax[k] * HIDDEN + k] += d_pooled[k];
            }
        }
        Body::Conv { patches, out } => {
            let mut d_out = vec![0.0; n * HIDDEN];
            for k in 0..HIDDEN {
                d_out[fwd.argmax[k] * HIDDEN + k] += d_pooled[k];
            }
            for (d, &o) in d_out.iter_mut().zip(out) {
                if o <= 0.0 {
                    *d = 0.0;
                }
            }
            let (kr, br) = (m.range(Role::ConvKernel), m.range(Role::ConvBias));
            gemm_acc(&mut g[kr], MatRef::new(patches, n, 9 * HIDDEN).t(), MatRef::new(&d_out, n, HIDDEN));
            for row in d_out.chunks_exact(HIDDEN) {
                for (gb, v) in g[br.clone()].iter_mut().zip(row) {
                    *gb += v;
                }
            }
            let mut d_patches = vec![0.0; n * 9 * HIDDEN];
            gemm_acc(&mut d_patches, MatRef::new(&d_out, n, HIDDEN), MatRef::new(m.get(Role::ConvKernel), 9 * HIDDEN, HIDDEN).t());
            col2im_acc(&d_patches, h, w, &mut d_p);
        }
        Body::Row { states } => {
            let mut d_states = vec![0.0; n * HIDDEN];
            for k in 0..HIDDEN {
                d_states[fwd.argmax[k] * HIDDEN + k] += d_pooled[k];
            }
            let w_h_t = transpose(m.get(Role::CellRecurrent), HIDDEN, HIDDEN);
            let mut gw_in = vec![0.0; HIDDEN * HIDDEN];
            let mut gw_h = vec![0.0; HIDDEN * HIDDEN];
            let mut gb = vec![0.0; HIDDEN];
            let da = recur_backward(states, &d_states, n, &w_h_t, &mut gw_h, &mut gb);
            gemm_acc(&mut gw_in, MatRef::new(&fwd.mlp_out, n, HIDDEN).t(), MatRef::new(&da, n, HIDDEN));
            gemm_acc(&mut d_p, MatRef::new(&da, n, HIDDEN), MatRef::new(m.get(Role::CellInput), HIDDEN, HIDDEN).t());
            add_block(g, m, Role::CellInput, &gw_in);
            add_block(g, m, Role::CellRecurrent, &gw_h);
            add_block(g, m, Role::CellBias, &gb);
        }
        Body::Tree { empty, states } => {
            let steps = states.len();
            let mut d_states: Vec<Vec<f64>> = vec![vec![0.0; w * HIDDEN]; steps];
            for k in 0..HIDDEN {
                let (s, t) = (fwd.argmax[k] / w, fwd.argmax[k] % w);
                d_states[s][t * HIDDEN + k] += d_pooled[k];
            }
            let (w_lo, w_up) = m.get(Role::CellInput).split_at(HIDDEN * HIDDEN);
            let w_h_t = transpose(m.get(Role::CellRecurrent), HIDDEN, HIDDEN);
            let w_up_t = transpose(w_up, HIDDEN, HIDDEN);
            let p_empty: Vec<f64> = m.get(Role::MlpBias).iter().map(|b| b.max(0.0)).collect();
            let mut gw_in = vec![0.0; 2 * HIDDEN * HIDDEN];
            let mut gw_h = vec![0.0; HIDDEN * HIDDEN];
            let mut gb = vec![0.0; HIDDEN];
            for s in (0..steps).rev() {
                let da = recur_backward(&states[s], &d_states[s], w, &w_h_t, &mut gw_h, &mut gb);
                let (g_lo, g_up) = gw_in.split_at_mut(HIDDEN * HIDDEN);

                let row = tree_row(h, s);
                let mut da_empty = [0.0; HIDDEN];
                for (t, dat) in da.chunks_exact(HIDDEN).enumerate() {
                    let at = (row * w + t) * HIDDEN;
                    if empty[row * w + t] {
                        for (e, v) in da_empty.iter_mut().zip(dat) {
                            *e += v;
                        }
                    } else {
                        outer_acc(g_up, &fwd.mlp_out[at..at + HIDDEN], dat);
                        vec_mat_acc(&mut d_p[at..at + HIDDEN], dat, &w_up_t);
                    }
                }
                // all empty positions of the row share one input vector
                outer_acc(g_up, &p_empty, &da_empty);
                vec_mat_acc(&mut d_p_empty, &da_empty, &w_up_t);

                let (lower, d_lower): (&[f64], &mut [f64]) = if s == 0 {
                    (&fwd.mlp_out[(h - 1) * w * HIDDEN..h * w * HIDDEN], &mut d_p[(h - 1) * w * HIDDEN..h * w * HIDDEN])
                } else {
                    let (before, _) = d_states.split_at_mut(s);
                    (&states[s - 1], &mut before[s - 1])
                };
                gemm_acc(g_lo, MatRef::new(lower, w, HIDDEN).t(), MatRef::new(&da, w, HIDDEN));
                gemm_acc(d_lower, MatRef::new(&da, w, HIDDEN), MatRef::new(w_lo, HIDDEN, HIDDEN).t());
            }
            add_block(g, m, Role::CellInput, &gw_in);
            add_block(g, m, Role::CellRecurrent, &gw_h);
            add_block(g, m, Role::CellBias, &gb);
        }
    }

    for (d, &p) in d_p.iter_mut().zip(&fwd.mlp_out) {
        if p <= 0.0 {
            *d = 0.0;
        }
    }
    for (d, &b) in d_p_empty.iter_mut().zip(m.get(Role::MlpBias)) {
        if b <= 0.0 {
            *d = 0.0;
        }
    }
    let (wr, br) = (m.range(Role::MlpWeight), m.range(Role::MlpBias));
    gemm_acc(&mut g[wr], MatRef::new(x.data(), n, c).t(), MatRef::new(&d_p, n, HIDDEN));
    for row in d_p.chunks_exact(HIDDEN).chain(std::iter::once(&d_p_empty[..])) {
        for (gb, v) in g[br.clone()].iter_mut().zip(row) {
            *gb += v;
        }
    }
    Ok(())
}

fn add_block(g: &mut [f64], m: &Model, role: Role, values: &[f64]) {
    for (a, b) in g[m.range(role)].iter_mut().zip(values) {
        *a += b;
    }
}

/// Loss and gradient for one labelled sample.
pub fn loss_and_backward(m: &Model, x: &FeatureMap, label: usize) -> Result<(f64, Gradients)> {
    check_label(m, label)?;
    let fwd = forward(m, x)?;
    let loss = cross_entropy(&fwd.logits, label);
    let grads = backward(m, x, &fwd, label)?;
    Ok((loss, grads))
}

/// Index of the most probable class (lowest index on ties).
pub fn predict(m: &Model, x: &FeatureMap) -> Result<usize> {
    let probs = forward(m, x)?.probs;
    Ok(probs.iter().enumerate().fold(0, |best, (i, &p)| if p > probs[best] { i } else { best }))
}
