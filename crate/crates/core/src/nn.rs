//! Small dense networks with hand-written backpropagation, plus Adam.
//!
//! Parameters live in one flat `Vec<f64>`; layer `l` stores its weights
//! row-major as `[out][in]` followed by its `out` biases. Gradients use the
//! same layout, which keeps the optimizer, hashing and finite-difference
//! checks trivial.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Tanh,
    Swish,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
            Activation::Swish => z * sigmoid(z),
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Swish => {
                let s = sigmoid(z);
                s + z * s * (1.0 - s)
            }
        }
    }

    pub fn code(self) -> u32 {
        match self {
            Activation::Identity => 0,
            Activation::Tanh => 1,
            Activation::Swish => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Swish),
            _ => None,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Fully connected network: hidden layers use `hidden`, the output is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    hidden: Activation,
    params: Vec<f64>,
}

/// Per-layer pre- and post-activation values from a forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `post[0]` is the input; `post[l + 1]` is layer `l`'s output.
    post: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("trace has an input layer")
    }
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new(sizes: &[usize], hidden: Activation, rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        let mut params = Vec::with_capacity(param_count(sizes));
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.gen_range(-limit..limit)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Self {
            sizes: sizes.to_vec(),
            hidden,
            params,
        }
    }

    pub fn from_parts(sizes: Vec<usize>, hidden: Activation, params: Vec<f64>) -> Option<Self> {
        (sizes.len() >= 2 && params.len() == param_count(&sizes)).then_some(Self { sizes, hidden, params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Multiplies the output layer's weights and biases by `factor`.
    pub fn scale_output_layer(&mut self, factor: f64) {
        let n = self.sizes.len();
        let last = self.sizes[n - 2] * self.sizes[n - 1] + self.sizes[n - 1];
        let start = self.params.len() - last;
        for p in &mut self.params[start..] {
            *p *= factor;
        }
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.input_dim());
        let layers = self.sizes.len() - 1;
        let mut x = input.to_vec();
        let mut offset = 0;
        for l in 0..layers {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + fan_in * fan_out];
            let b = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            let act = if l + 1 == layers {
                Activation::Identity
            } else {
                self.hidden
            };
            x = (0..fan_out)
                .map(|o| {
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    act.apply(b[o] + dot(row, &x))
                })
                .collect();
            offset += fan_in * fan_out + fan_out;
        }
        x
    }

    pub fn forward_trace(&self, input: &[f64]) -> Trace {
        debug_assert_eq!(input.len(), self.input_dim());
        let layers = self.sizes.len() - 1;
        let mut post = Vec::with_capacity(layers + 1);
        let mut pre = Vec::with_capacity(layers);
        post.push(input.to_vec());
        let mut offset = 0;
        for l in 0..layers {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + fan_in * fan_out];
            let b = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            let x = &post[l];
            let z: Vec<f64> = (0..fan_out)
                .map(|o| b[o] + dot(&w[o * fan_in..(o + 1) * fan_in], x))
                .collect();
            let act = if l + 1 == layers {
                Activation::Identity
            } else {
                self.hidden
            };
            post.push(z.iter().map(|&v| act.apply(v)).collect());
            pre.push(z);
            offset += fan_in * fan_out + fan_out;
        }
        Trace { post, pre }
    }

    /// Accumulates `dL/dparams` into `grads` given `dL/doutput`.
    pub fn backward(&self, trace: &Trace, d_output: &[f64], grads: &mut [f64]) {
        debug_assert_eq!(grads.len(), self.params.len());
        let layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(layers);
        let mut acc = 0;
        for l in 0..layers {
            offsets.push(acc);
            acc += self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        }

        let mut delta = d_output.to_vec();
        for l in (0..layers).rev() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            if l + 1 != layers {
                for (d, &z) in delta.iter_mut().zip(&trace.pre[l]) {
                    *d *= self.hidden.derivative(z);
                }
            }
            let off = offsets[l];
            let input = &trace.post[l];
            for o in 0..fan_out {
                let g = &mut grads[off + o * fan_in..off + (o + 1) * fan_in];
                for (gi, &xi) in g.iter_mut().zip(input) {
                    *gi += delta[o] * xi;
                }
                grads[off + fan_in * fan_out + o] += delta[o];
            }
            if l > 0 {
                let w = &self.params[off..off + fan_in * fan_out];
                let mut prev = vec![0.0; fan_in];
                for o in 0..fan_out {
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    for (p, &wi) in prev.iter_mut().zip(row) {
                        *p += wi * delta[o];
                    }
                }
                delta = prev;
            }
        }
    }

    /// SHA-256 over the little-endian parameter bytes.
    pub fn param_hash(&self) -> String {
        let mut h = Sha256::new();
        for s in &self.sizes {
            h.update((*s as u64).to_le_bytes());
        }
        for p in &self.params {
            h.update(p.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(len: usize) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    /// One descent step on `params` along `grads`. A zero learning rate leaves
    /// the parameters untouched.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        debug_assert_eq!(params.len(), grads.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            if lr != 0.0 {
                let m_hat = self.m[i] / bc1;
                let v_hat = self.v[i] / bc2;
                params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}
