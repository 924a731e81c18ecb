//! The differentiable layers the predictor is assembled from. Every layer
//! owns its parameters, caches what the backward pass needs during forward,
//! and accumulates analytic gradients into the parameter gradient buffers.
//!
//! Gradient buffers are only cleared by an explicit `zero_grad`, so batch
//! accumulation is a plain sequence of backward calls in a fixed order.

use rand::Rng;

use super::tensor::{Tensor, TensorError};

/// A named trainable tensor with its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Tensor) -> Self {
        let grad = Tensor::zeros(value.shape());
        Parameter {
            name: name.into(),
            value,
            grad,
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Uniform init in +-sqrt(6 / (fan_in + fan_out)).
pub fn glorot_uniform<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Tensor {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-bound..bound))
        .collect();
    Tensor::from_vec(&[rows, cols], data).expect("finite init")
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax over a slice; subtracts the max for stability.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

// ── Spatial graph convolution: Z = A · V · W ────────────────────────────

#[derive(Debug, Clone)]
pub struct GraphConv {
    pub weight: Parameter,
}

pub struct GraphConvCache {
    a: Tensor,
    v: Tensor,
    av: Tensor,
}

impl GraphConv {
    pub fn new<R: Rng>(name: &str, rng: &mut R, in_dim: usize, out_dim: usize) -> Self {
        GraphConv {
            weight: Parameter::new(format!("{name}.weight"), glorot_uniform(rng, in_dim, out_dim)),
        }
    }

    pub fn forward(&self, a: &Tensor, v: &Tensor) -> Result<(Tensor, GraphConvCache), TensorError> {
        let av = a.matmul(v)?;
        let z = av.matmul(&self.weight.value)?;
        Ok((
            z,
            GraphConvCache {
                a: a.clone(),
                v: v.clone(),
                av,
            },
        ))
    }

    /// Accumulates dW and returns dV.
    pub fn backward(&mut self, cache: &GraphConvCache, d_z: &Tensor) -> Tensor {
        // dW = (A·V)^T · dZ
        let d_w = cache.av.transposed().matmul(d_z).expect("shapes fixed");
        self.weight.grad.add_scaled(&d_w, 1.0);
        // dV = A^T · dZ · W^T
        let d_av = d_z
            .matmul(&self.weight.value.transposed())
            .expect("shapes fixed");
        cache.a.transposed().matmul(&d_av).expect("shapes fixed")
    }

    /// Gradient with respect to the adjacency, used only by tests.
    pub fn input_adjacency_grad(&self, cache: &GraphConvCache, d_z: &Tensor) -> Tensor {
        let d_av = d_z
            .matmul(&self.weight.value.transposed())
            .expect("shapes fixed");
        d_av.matmul(&cache.v.transposed()).expect("shapes fixed")
    }
}

// ── Temporal convolution over the frame axis ────────────────────────────

/// Depthwise 1-D convolution over time with a single 3-tap kernel shared by
/// every node and channel; zero padding of 1 preserves the sequence length.
#[derive(Debug, Clone)]
pub struct TemporalConv {
    pub kernel: Parameter,
}

pub struct TemporalConvCache {
    input: Vec<Tensor>,
}

impl TemporalConv {
    pub fn new(name: &str) -> Self {
        // Identity-at-centre start so early training preserves frame content.
        let kernel = Tensor::from_vec(&[3], vec![0.0, 1.0, 0.0]).expect("finite");
        TemporalConv {
            kernel: Parameter::new(format!("{name}.kernel"), kernel),
        }
    }

    pub fn forward(&self, frames: &[Tensor]) -> (Vec<Tensor>, TemporalConvCache) {
        let t_len = frames.len();
        let k = self.kernel.value.data();
        let mut out = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let mut acc = Tensor::zeros(frames[0].shape());
            for (tap, &kv) in k.iter().enumerate() {
                let src = t as i64 + tap as i64 - 1;
                if src >= 0 && (src as usize) < t_len {
                    acc.add_scaled(&frames[src as usize], kv);
                }
            }
            out.push(acc);
        }
        (
            out,
            TemporalConvCache {
                input: frames.to_vec(),
            },
        )
    }

    pub fn backward(&mut self, cache: &TemporalConvCache, d_out: &[Tensor]) -> Vec<Tensor> {
        let t_len = cache.input.len();
        let k = self.kernel.value.data().to_vec();
        let mut d_kernel = [0.0f64; 3];
        let mut d_in: Vec<Tensor> = cache
            .input
            .iter()
            .map(|f| Tensor::zeros(f.shape()))
            .collect();
        for t in 0..t_len {
            for tap in 0..3 {
                let src = t as i64 + tap as i64 - 1;
                if src >= 0 && (src as usize) < t_len {
                    let src = src as usize;
                    d_kernel[tap] += cache.input[src]
                        .data()
                        .iter()
                        .zip(d_out[t].data())
                        .map(|(x, g)| x * g)
                        .sum::<f64>();
                    d_in[src].add_scaled(&d_out[t], k[tap]);
                }
            }
        }
        for (g, d) in self.kernel.grad.data_mut().iter_mut().zip(d_kernel) {
            *g += d;
        }
        d_in
    }
}

// ── PReLU with one learned slope ─────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct PRelu {
    pub slope: Parameter,
}

pub struct PReluCache {
    input: Vec<Tensor>,
}

impl PRelu {
    pub fn new(name: &str) -> Self {
        PRelu {
            slope: Parameter::new(format!("{name}.slope"), Tensor::scalar(0.25)),
        }
    }

    pub fn forward(&self, frames: &[Tensor]) -> (Vec<Tensor>, PReluCache) {
        let a = self.slope.value.data()[0];
        let out = frames
            .iter()
            .map(|f| {
                let data = f
                    .data()
                    .iter()
                    .map(|&x| if x >= 0.0 { x } else { a * x })
                    .collect();
                Tensor::from_vec(f.shape(), data).expect("finite")
            })
            .collect();
        (
            out,
            PReluCache {
                input: frames.to_vec(),
            },
        )
    }

    pub fn backward(&mut self, cache: &PReluCache, d_out: &[Tensor]) -> Vec<Tensor> {
        let a = self.slope.value.data()[0];
        let mut d_slope = 0.0;
        let d_in = cache
            .input
            .iter()
            .zip(d_out)
            .map(|(f, g)| {
                let data = f
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&x, &gy)| {
                        if x >= 0.0 {
                            gy
                        } else {
                            d_slope += gy * x;
                            gy * a
                        }
                    })
                    .collect();
                Tensor::from_vec(f.shape(), data).expect("finite")
            })
            .collect();
        self.slope.grad.data_mut()[0] += d_slope;
        d_in
    }
}

/// Standalone PReLU evaluation for a single value.
pub fn prelu(x: f64, a: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        a * x
    }
}

// ── LSTM ────────────────────────────────────────────────────────────────

/// Standard LSTM cell; gate order in the stacked weight matrices is
/// input, forget, candidate, output.
#[derive(Debug, Clone)]
pub struct Lstm {
    pub w_ih: Parameter,
    pub w_hh: Parameter,
    pub bias: Parameter,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

#[derive(Debug, Clone)]
pub struct LstmStepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
}

pub struct LstmSeqCache {
    steps: Vec<LstmStepCache>,
}

impl Lstm {
    pub fn new<R: Rng>(name: &str, rng: &mut R, input_dim: usize, hidden_dim: usize) -> Self {
        Lstm {
            w_ih: Parameter::new(
                format!("{name}.w_ih"),
                glorot_uniform(rng, 4 * hidden_dim, input_dim),
            ),
            w_hh: Parameter::new(
                format!("{name}.w_hh"),
                glorot_uniform(rng, 4 * hidden_dim, hidden_dim),
            ),
            bias: Parameter::new(format!("{name}.bias"), Tensor::zeros(&[4 * hidden_dim])),
            input_dim,
            hidden_dim,
        }
    }

    /// One cell step. Returns (h, c) and the cache for backward.
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> (Vec<f64>, Vec<f64>, LstmStepCache) {
        let h_dim = self.hidden_dim;
        let mut z = vec![0.0; 4 * h_dim];
        for (r, zr) in z.iter_mut().enumerate() {
            let mut acc = self.bias.value.data()[r];
            let w_row = &self.w_ih.value.data()[r * self.input_dim..(r + 1) * self.input_dim];
            for (w, xv) in w_row.iter().zip(x) {
                acc += w * xv;
            }
            let u_row = &self.w_hh.value.data()[r * h_dim..(r + 1) * h_dim];
            for (u, hv) in u_row.iter().zip(h_prev) {
                acc += u * hv;
            }
            *zr = acc;
        }
        let i: Vec<f64> = z[0..h_dim].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<f64> = z[h_dim..2 * h_dim].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<f64> = z[2 * h_dim..3 * h_dim].iter().map(|&v| v.tanh()).collect();
        let o: Vec<f64> = z[3 * h_dim..4 * h_dim].iter().map(|&v| sigmoid(v)).collect();
        let c: Vec<f64> = (0..h_dim)
            .map(|k| f[k] * c_prev[k] + i[k] * g[k])
            .collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = (0..h_dim).map(|k| o[k] * tanh_c[k]).collect();
        let cache = LstmStepCache {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            c_prev: c_prev.to_vec(),
            i,
            f,
            g,
            o,
            tanh_c,
        };
        (h, c, cache)
    }

    /// Run the cell over a sequence from zero initial state, returning the
    /// hidden state of every step.
    pub fn forward_seq(&self, xs: &[Vec<f64>]) -> (Vec<Vec<f64>>, LstmSeqCache) {
        let mut h = vec![0.0; self.hidden_dim];
        let mut c = vec![0.0; self.hidden_dim];
        let mut hs = Vec::with_capacity(xs.len());
        let mut steps = Vec::with_capacity(xs.len());
        for x in xs {
            let (nh, nc, cache) = self.step(x, &h, &c);
            h = nh;
            c = nc;
            hs.push(h.clone());
            steps.push(cache);
        }
        (hs, LstmSeqCache { steps })
    }

    /// Backpropagation through time. `d_hs` holds the gradient flowing into
    /// each step's hidden state; returns gradients for the inputs.
    pub fn backward_seq(&mut self, cache: &LstmSeqCache, d_hs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let h_dim = self.hidden_dim;
        let t_len = cache.steps.len();
        let mut d_xs = vec![vec![0.0; self.input_dim]; t_len];
        let mut d_h_next = vec![0.0; h_dim];
        let mut d_c_next = vec![0.0; h_dim];

        for t in (0..t_len).rev() {
            let s = &cache.steps[t];
            let d_h: Vec<f64> = (0..h_dim).map(|k| d_hs[t][k] + d_h_next[k]).collect();
            // h = o * tanh(c)
            let d_o: Vec<f64> = (0..h_dim).map(|k| d_h[k] * s.tanh_c[k]).collect();
            let mut d_c: Vec<f64> = (0..h_dim)
                .map(|k| d_h[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]) + d_c_next[k])
                .collect();
            // c = f * c_prev + i * g
            let d_f: Vec<f64> = (0..h_dim).map(|k| d_c[k] * s.c_prev[k]).collect();
            let d_i: Vec<f64> = (0..h_dim).map(|k| d_c[k] * s.g[k]).collect();
            let d_g: Vec<f64> = (0..h_dim).map(|k| d_c[k] * s.i[k]).collect();
            for k in 0..h_dim {
                d_c[k] *= s.f[k]; // becomes d_c_prev
            }

            // Pre-activation gradients, stacked [i, f, g, o].
            let mut d_z = vec![0.0; 4 * h_dim];
            for k in 0..h_dim {
                d_z[k] = d_i[k] * s.i[k] * (1.0 - s.i[k]);
                d_z[h_dim + k] = d_f[k] * s.f[k] * (1.0 - s.f[k]);
                d_z[2 * h_dim + k] = d_g[k] * (1.0 - s.g[k] * s.g[k]);
                d_z[3 * h_dim + k] = d_o[k] * s.o[k] * (1.0 - s.o[k]);
            }

            let mut d_h_prev = vec![0.0; h_dim];
            for r in 0..4 * h_dim {
                let dz = d_z[r];
                if dz == 0.0 {
                    continue;
                }
                self.bias.grad.data_mut()[r] += dz;
                let wih_g = &mut self.w_ih.grad.data_mut()[r * self.input_dim..(r + 1) * self.input_dim];
                for (gw, xv) in wih_g.iter_mut().zip(&s.x) {
                    *gw += dz * xv;
                }
                let whh_g = &mut self.w_hh.grad.data_mut()[r * h_dim..(r + 1) * h_dim];
                for (gu, hv) in whh_g.iter_mut().zip(&s.h_prev) {
                    *gu += dz * hv;
                }
                let w_row = &self.w_ih.value.data()[r * self.input_dim..(r + 1) * self.input_dim];
                for (dx, w) in d_xs[t].iter_mut().zip(w_row) {
                    *dx += dz * w;
                }
                let u_row = &self.w_hh.value.data()[r * h_dim..(r + 1) * h_dim];
                for (dh, u) in d_h_prev.iter_mut().zip(u_row) {
                    *dh += dz * u;
                }
            }
            d_h_next = d_h_prev;
            d_c_next = d_c;
        }
        d_xs
    }
}

// ── Additive attention over time ─────────────────────────────────────────

/// score_t = v . tanh(W1 h_t); alpha = softmax(scores); context = sum alpha_t h_t.
#[derive(Debug, Clone)]
pub struct Attention {
    pub w1: Parameter,
    pub v: Parameter,
    pub feature_dim: usize,
    pub attn_dim: usize,
}

pub struct AttentionCache {
    h: Vec<Vec<f64>>,
    tanh_u: Vec<Vec<f64>>,
    alphas: Vec<f64>,
}

impl Attention {
    pub fn new<R: Rng>(name: &str, rng: &mut R, feature_dim: usize, attn_dim: usize) -> Self {
        Attention {
            w1: Parameter::new(format!("{name}.w1"), glorot_uniform(rng, attn_dim, feature_dim)),
            v: Parameter::new(
                format!("{name}.v"),
                glorot_uniform(rng, attn_dim, 1).reshaped(&[attn_dim]),
            ),
            feature_dim,
            attn_dim,
        }
    }

    pub fn forward(&self, h: &[Vec<f64>]) -> (Vec<f64>, AttentionCache) {
        let mut scores = Vec::with_capacity(h.len());
        let mut tanh_us = Vec::with_capacity(h.len());
        for ht in h {
            let mut tanh_u = vec![0.0; self.attn_dim];
            for (d, tu) in tanh_u.iter_mut().enumerate() {
                let row = &self.w1.value.data()[d * self.feature_dim..(d + 1) * self.feature_dim];
                let mut acc = 0.0;
                for (w, x) in row.iter().zip(ht) {
                    acc += w * x;
                }
                *tu = acc.tanh();
            }
            let score: f64 = self
                .v
                .value
                .data()
                .iter()
                .zip(&tanh_u)
                .map(|(a, b)| a * b)
                .sum();
            scores.push(score);
            tanh_us.push(tanh_u);
        }
        let alphas = softmax(&scores);
        let mut context = vec![0.0; self.feature_dim];
        for (t, ht) in h.iter().enumerate() {
            for (cx, x) in context.iter_mut().zip(ht) {
                *cx += alphas[t] * x;
            }
        }
        (
            context,
            AttentionCache {
                h: h.to_vec(),
                tanh_u: tanh_us,
                alphas,
            },
        )
    }

    pub fn attention_weights<'a>(&self, cache: &'a AttentionCache) -> &'a [f64] {
        &cache.alphas
    }

    pub fn backward(&mut self, cache: &AttentionCache, d_context: &[f64]) -> Vec<Vec<f64>> {
        let t_len = cache.h.len();
        let mut d_h: Vec<Vec<f64>> = cache
            .h
            .iter()
            .map(|ht| {
                ht.iter()
                    .zip(d_context)
                    .map(|(_, _)| 0.0)
                    .collect::<Vec<f64>>()
            })
            .collect();
        // d(alpha_t) and direct context path into h_t.
        let mut d_alpha = vec![0.0; t_len];
        for t in 0..t_len {
            d_alpha[t] = cache.h[t]
                .iter()
                .zip(d_context)
                .map(|(x, g)| x * g)
                .sum();
            for (dh, g) in d_h[t].iter_mut().zip(d_context) {
                *dh += cache.alphas[t] * g;
            }
        }
        // Softmax backward.
        let weighted: f64 = cache
            .alphas
            .iter()
            .zip(&d_alpha)
            .map(|(a, d)| a * d)
            .sum();
        let d_scores: Vec<f64> = (0..t_len)
            .map(|t| cache.alphas[t] * (d_alpha[t] - weighted))
            .collect();
        // Score path.
        for t in 0..t_len {
            let ds = d_scores[t];
            if ds == 0.0 {
                continue;
            }
            for d in 0..self.attn_dim {
                let tu = cache.tanh_u[t][d];
                self.v.grad.data_mut()[d] += ds * tu;
                let du = ds * self.v.value.data()[d] * (1.0 - tu * tu);
                let row_grad =
                    &mut self.w1.grad.data_mut()[d * self.feature_dim..(d + 1) * self.feature_dim];
                for (gw, x) in row_grad.iter_mut().zip(&cache.h[t]) {
                    *gw += du * x;
                }
                let row = &self.w1.value.data()[d * self.feature_dim..(d + 1) * self.feature_dim];
                for (dh, w) in d_h[t].iter_mut().zip(row) {
                    *dh += du * w;
                }
            }
        }
        d_h
    }
}

// ── Dense scalar head ────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct Dense {
    pub weight: Parameter,
    pub bias: Parameter,
}

pub struct DenseCache {
    input: Vec<f64>,
}

impl Dense {
    pub fn new<R: Rng>(name: &str, rng: &mut R, in_dim: usize) -> Self {
        Dense {
            weight: Parameter::new(
                format!("{name}.weight"),
                glorot_uniform(rng, in_dim, 1).reshaped(&[in_dim]),
            ),
            bias: Parameter::new(format!("{name}.bias"), Tensor::zeros(&[1])),
        }
    }

    pub fn forward(&self, x: &[f64]) -> (f64, DenseCache) {
        let logit: f64 = self
            .weight
            .value
            .data()
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias.value.data()[0];
        (logit, DenseCache { input: x.to_vec() })
    }

    pub fn backward(&mut self, cache: &DenseCache, d_logit: f64) -> Vec<f64> {
        for (g, x) in self.weight.grad.data_mut().iter_mut().zip(&cache.input) {
            *g += d_logit * x;
        }
        self.bias.grad.data_mut()[0] += d_logit;
        self.weight
            .value
            .data()
            .iter()
            .map(|w| d_logit * w)
            .collect()
    }
}

