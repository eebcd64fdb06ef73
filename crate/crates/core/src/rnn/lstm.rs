use rand::Rng as _;

use super::{BiLstmModel, DirOffsets, ParamLayout};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, gemm, sigmoid, Layout};
use crate::seeds::Rng;
use crate::seqdata::RepresentedSequence;

/// Probabilities are clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]` inside logs.
pub const PROB_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone)]
struct DirCache {
    /// Activated gates per timestep, `len × 4H` (i, f, g, o).
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

#[derive(Debug, Clone)]
struct LayerCache {
    /// What this layer consumed, `len × In` (after the previous layer's dropout).
    input: Vec<f64>,
    dirs: [DirCache; 2],
    /// Inverted-dropout factors applied to this layer's `len × 2H` output.
    drop: Option<Vec<f64>>,
}

/// Activations of one sequence, kept for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    len: usize,
    layers: Vec<LayerCache>,
    summary: Vec<f64>,
    pub logit: f64,
    pub prob: f64,
}

/// Gradient buffer in the model's parameter layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub values: Vec<f64>,
}

fn run_direction(
    params: &[f64],
    d: DirOffsets,
    h: usize,
    x: &[f64],
    len: usize,
    reverse: bool,
) -> DirCache {
    let g4 = 4 * h;
    let mut z = vec![0.0; len * g4];
    gemm(
        1.0,
        x,
        Layout::row_major(len, d.input),
        &params[d.w_x..d.w_x + g4 * d.input],
        Layout::transposed(g4, d.input),
        0.0,
        &mut z,
    );
    let b = &params[d.b..d.b + g4];
    let w_h = &params[d.w_h..d.w_h + g4 * h];
    let mut c_all = vec![0.0; len * h];
    let mut tc_all = vec![0.0; len * h];
    let mut h_all = vec![0.0; len * h];
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    for step in 0..len {
        let t = if reverse { len - 1 - step } else { step };
        let zt = &mut z[t * g4..(t + 1) * g4];
        for (r, zr) in zt.iter_mut().enumerate() {
            *zr += b[r] + dot(&w_h[r * h..(r + 1) * h], &h_prev);
        }
        for v in &mut zt[..2 * h] {
            *v = sigmoid(*v);
        }
        for v in &mut zt[2 * h..3 * h] {
            *v = v.tanh();
        }
        for v in &mut zt[3 * h..] {
            *v = sigmoid(*v);
        }
        for j in 0..h {
            let (i, f, g, o) = (zt[j], zt[h + j], zt[2 * h + j], zt[3 * h + j]);
            let c = f * c_prev[j] + i * g;
            let tc = c.tanh();
            c_all[t * h + j] = c;
            tc_all[t * h + j] = tc;
            h_all[t * h + j] = o * tc;
        }
        h_prev.copy_from_slice(&h_all[t * h..(t + 1) * h]);
        c_prev.copy_from_slice(&c_all[t * h..(t + 1) * h]);
    }
    DirCache {
        gates: z,
        c: c_all,
        tanh_c: tc_all,
        h: h_all,
    }
}

/// Runs one sequence through the network. Only the real (unmasked) prefix is
/// processed: padded steps would copy the recurrent state unchanged, so the
/// forward direction's state at the last real step and the backward
/// direction's state at step 0 are the same either way.
///
/// `dropout` supplies the mask stream; `None` disables dropout.
pub fn forward_one(
    model: &BiLstmModel,
    seq: &RepresentedSequence,
    dropout: Option<&mut Rng>,
) -> Result<ForwardCache> {
    let cfg = &model.config;
    if seq.dim != cfg.input_dim {
        return Err(Error::Config(format!(
            "input has {} channels, model expects {}",
            seq.dim, cfg.input_dim
        )));
    }
    if seq.max_len() > cfg.max_len {
        return Err(Error::Config(format!(
            "sequence length {} exceeds model max_len {}",
            seq.max_len(),
            cfg.max_len
        )));
    }
    let len = seq.len();
    if len == 0 {
        return Err(Error::EmptySequence);
    }
    let layout = model.layout();
    let h = cfg.units;
    let rate = cfg.dropout_rate;
    let mut dropout = dropout.filter(|_| rate > 0.0);
    let mut input = seq.real_rows().to_vec();
    let mut layers = Vec::with_capacity(cfg.num_layers);
    for pair in &layout.dirs {
        let fwd = run_direction(&model.params, pair[0], h, &input, len, false);
        let bwd = run_direction(&model.params, pair[1], h, &input, len, true);
        let mut out = vec![0.0; len * 2 * h];
        for t in 0..len {
            out[t * 2 * h..t * 2 * h + h].copy_from_slice(&fwd.h[t * h..(t + 1) * h]);
            out[t * 2 * h + h..(t + 1) * 2 * h].copy_from_slice(&bwd.h[t * h..(t + 1) * h]);
        }
        let drop = dropout.as_deref_mut().map(|rng| {
            let keep = 1.0 / (1.0 - rate);
            let mask: Vec<f64> = (0..out.len())
                .map(|_| {
                    if rng.random::<f64>() < rate {
                        0.0
                    } else {
                        keep
                    }
                })
                .collect();
            for (o, m) in out.iter_mut().zip(&mask) {
                *o *= m;
            }
            mask
        });
        layers.push(LayerCache {
            input: std::mem::replace(&mut input, out),
            dirs: [fwd, bwd],
            drop,
        });
    }
    // `input` now holds the top layer's (dropped) output.
    let mut summary = Vec::with_capacity(2 * h);
    summary.extend_from_slice(&input[(len - 1) * 2 * h..(len - 1) * 2 * h + h]);
    summary.extend_from_slice(&input[h..2 * h]);
    let logit = dot(
        &model.params[layout.head_w..layout.head_w + 2 * h],
        &summary,
    ) + model.params[layout.head_b];
    Ok(ForwardCache {
        len,
        layers,
        summary,
        logit,
        prob: sigmoid(logit),
    })
}

/// Probabilities of good abandonment for a batch. With `training` set,
/// inverted dropout is applied using `rng`.
pub fn forward(
    model: &BiLstmModel,
    batch: &[RepresentedSequence],
    training: bool,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|s| {
            let drop = if training { Some(&mut *rng) } else { None };
            forward_one(model, s, drop).map(|c| c.prob)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn backprop_direction(
    params: &[f64],
    grads: &mut [f64],
    d: DirOffsets,
    h: usize,
    x: &[f64],
    cache: &DirCache,
    d_h: &[f64],
    len: usize,
    reverse: bool,
    dx: &mut [f64],
) {
    let g4 = 4 * h;
    let w_h = &params[d.w_h..d.w_h + g4 * h];
    let mut dz = vec![0.0; len * g4];
    let mut h_prev_mat = vec![0.0; len * h];
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    for step in 0..len {
        // Walk against the direction of the recurrence.
        let t = if reverse { step } else { len - 1 - step };
        let prev = if reverse {
            (t + 1 < len).then_some(t + 1)
        } else {
            t.checked_sub(1)
        };
        if let Some(p) = prev {
            h_prev_mat[t * h..(t + 1) * h].copy_from_slice(&cache.h[p * h..(p + 1) * h]);
        }
        let gates = &cache.gates[t * g4..(t + 1) * g4];
        let dzt = &mut dz[t * g4..(t + 1) * g4];
        for j in 0..h {
            let (i, f, g, o) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
            let tc = cache.tanh_c[t * h + j];
            let c_prev = prev.map_or(0.0, |p| cache.c[p * h + j]);
            let dh = d_h[t * h + j] + dh_next[j];
            let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
            dzt[j] = dc * g * i * (1.0 - i);
            dzt[h + j] = dc * c_prev * f * (1.0 - f);
            dzt[2 * h + j] = dc * i * (1.0 - g * g);
            dzt[3 * h + j] = dh * tc * o * (1.0 - o);
            dc_next[j] = dc * f;
        }
        dh_next.fill(0.0);
        for (r, &dzr) in dzt.iter().enumerate() {
            if dzr != 0.0 {
                axpy(dzr, &w_h[r * h..(r + 1) * h], &mut dh_next);
            }
        }
    }
    let dzt_layout = Layout::transposed(len, g4);
    gemm(
        1.0,
        &dz,
        dzt_layout,
        x,
        Layout::row_major(len, d.input),
        1.0,
        &mut grads[d.w_x..d.w_x + g4 * d.input],
    );
    gemm(
        1.0,
        &dz,
        dzt_layout,
        &h_prev_mat,
        Layout::row_major(len, h),
        1.0,
        &mut grads[d.w_h..d.w_h + g4 * h],
    );
    let db = &mut grads[d.b..d.b + g4];
    for t in 0..len {
        for (b, z) in db.iter_mut().zip(&dz[t * g4..(t + 1) * g4]) {
            *b += z;
        }
    }
    gemm(
        1.0,
        &dz,
        Layout::row_major(len, g4),
        &params[d.w_x..d.w_x + g4 * d.input],
        Layout::row_major(g4, d.input),
        1.0,
        dx,
    );
}

/// Gradient of `dlogit`-scaled output with respect to every parameter,
/// accumulated into `grads`.
fn backward_one(
    model: &BiLstmModel,
    layout: &ParamLayout,
    cache: &ForwardCache,
    dlogit: f64,
    grads: &mut [f64],
) {
    let h = model.config.units;
    let len = cache.len;
    let head_w = &model.params[layout.head_w..layout.head_w + 2 * h];
    axpy(
        dlogit,
        &cache.summary,
        &mut grads[layout.head_w..layout.head_w + 2 * h],
    );
    grads[layout.head_b] += dlogit;

    let mut d_out = vec![0.0; len * 2 * h];
    axpy(
        dlogit,
        &head_w[..h],
        &mut d_out[(len - 1) * 2 * h..(len - 1) * 2 * h + h],
    );
    axpy(dlogit, &head_w[h..], &mut d_out[h..2 * h]);

    for (l, layer) in cache.layers.iter().enumerate().rev() {
        if let Some(mask) = &layer.drop {
            for (d, m) in d_out.iter_mut().zip(mask) {
                *d *= m;
            }
        }
        let pair = layout.dirs[l];
        let mut dx = vec![0.0; len * pair[0].input];
        for (dir, reverse) in [(0usize, false), (1usize, true)] {
            let mut d_h = vec![0.0; len * h];
            for t in 0..len {
                d_h[t * h..(t + 1) * h]
                    .copy_from_slice(&d_out[t * 2 * h + dir * h..t * 2 * h + (dir + 1) * h]);
            }
            backprop_direction(
                &model.params,
                grads,
                pair[dir],
                h,
                &layer.input,
                &layer.dirs[dir],
                &d_h,
                len,
                reverse,
                &mut dx,
            );
        }
        d_out = dx;
    }
}

/// Derivative of the clamped binary cross-entropy with respect to the logit.
pub(crate) fn dloss_dlogit(prob: f64, target: f64) -> f64 {
    if prob < PROB_FLOOR || prob > 1.0 - PROB_FLOOR {
        0.0
    } else {
        prob - target
    }
}

/// Gradients of the mean (optionally sample-weighted) binary cross-entropy
/// over a batch whose forward passes are in `caches`.
pub fn backward(
    model: &BiLstmModel,
    caches: &[ForwardCache],
    targets: &[f64],
    weights: Option<&[f64]>,
) -> Gradients {
    let layout = model.layout();
    let mut values = vec![0.0; layout.total];
    let n = caches.len().max(1) as f64;
    for (i, (cache, &y)) in caches.iter().zip(targets).enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let dlogit = w * dloss_dlogit(cache.prob, y) / n;
        if dlogit != 0.0 {
            backward_one(model, &layout, cache, dlogit, &mut values);
        }
    }
    Gradients { values }
}
