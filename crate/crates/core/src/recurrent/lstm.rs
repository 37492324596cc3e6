//! LSTM cell and unrolled sequence network.
//!
//! Gate weights live in one `4h x (d_in + h)` matrix whose row blocks are,
//! in order: input gate, forget gate, cell candidate, output gate. Each
//! time step additionally applies a shared output projection `V: h -> d_out`.
//! Outputs are pre-activation; callers apply tanh/sigmoid as needed.

use crate::numerics::{Matrix, Rng, Tensor3};
use crate::{Error, Result};

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Parameters of a single-layer LSTM with a per-step output projection.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    d_in: usize,
    hidden: usize,
    d_out: usize,
    /// Gate weights, `4h x (d_in + h)`, row blocks `[i; f; g; o]`.
    pub w: Matrix,
    /// Gate biases, `4h`.
    pub b: Vec<f64>,
    /// Output projection, `d_out x h`.
    pub v: Matrix,
    /// Output bias, `d_out`.
    pub v_b: Vec<f64>,
}

impl LstmParams {
    pub fn new(d_in: usize, hidden: usize, d_out: usize) -> Self {
        LstmParams {
            d_in,
            hidden,
            d_out,
            w: Matrix::zeros(4 * hidden, d_in + hidden),
            b: vec![0.0; 4 * hidden],
            v: Matrix::zeros(d_out, hidden),
            v_b: vec![0.0; d_out],
        }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn zeros_like(&self) -> Self {
        LstmParams::new(self.d_in, self.hidden, self.d_out)
    }

    pub fn n_params(&self) -> usize {
        self.w.data().len() + self.b.len() + self.v.data().len() + self.v_b.len()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.d_in == other.d_in && self.hidden == other.hidden && self.d_out == other.d_out
    }

    /// Flat parameter order: gate weights, gate biases, projection, projection bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        out.extend_from_slice(self.w.data());
        out.extend_from_slice(&self.b);
        out.extend_from_slice(self.v.data());
        out.extend_from_slice(&self.v_b);
        out
    }

    pub fn from_flat(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.n_params() {
            return Err(Error::ShapeMismatch(format!(
                "flat parameter length {} != {}",
                flat.len(),
                self.n_params()
            )));
        }
        let mut p = self.zeros_like();
        let mut off = 0;
        for (dst, chunk) in [
            (p.w.data_mut(), self.w.data().len()),
            (&mut p.b[..], self.b.len()),
            (p.v.data_mut(), self.v.data().len()),
            (&mut p.v_b[..], self.v_b.len()),
        ] {
            dst.copy_from_slice(&flat[off..off + chunk]);
            off += chunk;
        }
        Ok(p)
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for v in self.w.data_mut() {
            f(v);
        }
        for v in &mut self.b {
            f(v);
        }
        for v in self.v.data_mut() {
            f(v);
        }
        for v in &mut self.v_b {
            f(v);
        }
    }

    /// `self += scale * other`, shapes must match.
    pub fn axpy(&mut self, scale: f64, other: &Self) {
        debug_assert!(self.same_shape(other));
        for (a, b) in self.w.data_mut().iter_mut().zip(other.w.data()) {
            *a += scale * b;
        }
        for (a, b) in self.b.iter_mut().zip(&other.b) {
            *a += scale * b;
        }
        for (a, b) in self.v.data_mut().iter_mut().zip(other.v.data()) {
            *a += scale * b;
        }
        for (a, b) in self.v_b.iter_mut().zip(&other.v_b) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.for_each_mut(|v| *v *= s);
    }

    pub fn l2_norm(&self) -> f64 {
        let mut acc = 0.0;
        for v in self
            .w
            .data()
            .iter()
            .chain(&self.b)
            .chain(self.v.data())
            .chain(&self.v_b)
        {
            acc += v * v;
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite()
            && self.v.is_finite()
            && self.b.iter().all(|v| v.is_finite())
            && self.v_b.iter().all(|v| v.is_finite())
    }
}

/// Uniform(-s, s) weights with s = 1/sqrt(hidden); forget-gate biases start
/// at 1 to keep gradients flowing early, all other biases at 0.
pub fn init_params(d_in: usize, hidden: usize, d_out: usize, rng: &mut Rng) -> LstmParams {
    assert!(d_in >= 1 && hidden >= 1 && d_out >= 1);
    let s = 1.0 / (hidden as f64).sqrt();
    let mut p = LstmParams::new(d_in, hidden, d_out);
    for v in p.w.data_mut() {
        *v = rng.uniform_in(-s, s);
    }
    for v in p.v.data_mut() {
        *v = rng.uniform_in(-s, s);
    }
    for v in &mut p.b[hidden..2 * hidden] {
        *v = 1.0;
    }
    p
}

/// Per-example forward activations retained for the backward pass.
#[derive(Debug, Clone)]
struct ExampleCache {
    /// `T x (d_in + h)` gate inputs `[x_t; h_{t-1}]`.
    concat: Vec<f64>,
    /// `T x 4h` post-activation gates `[i; f; g; o]`.
    gates: Vec<f64>,
    /// `T x h` cell states.
    c: Vec<f64>,
    /// `T x h` tanh of cell states.
    tanh_c: Vec<f64>,
    /// `T x h` hidden states.
    h: Vec<f64>,
}

/// Activations of a full batch forward pass.
#[derive(Debug, Clone)]
pub struct LstmCache {
    n: usize,
    t: usize,
    d_in: usize,
    hidden: usize,
    d_out: usize,
    examples: Vec<ExampleCache>,
}

fn forward_example(params: &LstmParams, x: &[f64], t_len: usize, y: &mut [f64]) -> ExampleCache {
    let h = params.hidden;
    let d_in = params.d_in;
    let cdim = d_in + h;
    let mut cache = ExampleCache {
        concat: vec![0.0; t_len * cdim],
        gates: vec![0.0; t_len * 4 * h],
        c: vec![0.0; t_len * h],
        tanh_c: vec![0.0; t_len * h],
        h: vec![0.0; t_len * h],
    };
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    for t in 0..t_len {
        let concat = &mut cache.concat[t * cdim..(t + 1) * cdim];
        concat[..d_in].copy_from_slice(&x[t * d_in..(t + 1) * d_in]);
        concat[d_in..].copy_from_slice(&h_prev);

        let gates = &mut cache.gates[t * 4 * h..(t + 1) * 4 * h];
        params.w.matvec(concat, gates);
        for (g, b) in gates.iter_mut().zip(&params.b) {
            *g += b;
        }
        for v in &mut gates[..h] {
            *v = sigmoid(*v);
        }
        for v in &mut gates[h..2 * h] {
            *v = sigmoid(*v);
        }
        for v in &mut gates[2 * h..3 * h] {
            *v = v.tanh();
        }
        for v in &mut gates[3 * h..4 * h] {
            *v = sigmoid(*v);
        }

        let (c_row, tanh_row, h_row) = (
            &mut cache.c[t * h..(t + 1) * h],
            &mut cache.tanh_c[t * h..(t + 1) * h],
            &mut cache.h[t * h..(t + 1) * h],
        );
        for k in 0..h {
            let c = gates[h + k] * c_prev[k] + gates[k] * gates[2 * h + k];
            c_row[k] = c;
            let tc = c.tanh();
            tanh_row[k] = tc;
            h_row[k] = gates[3 * h + k] * tc;
        }
        h_prev.copy_from_slice(h_row);
        c_prev.copy_from_slice(c_row);

        let y_row = &mut y[t * params.d_out..(t + 1) * params.d_out];
        params.v.matvec(h_row, y_row);
        for (o, b) in y_row.iter_mut().zip(&params.v_b) {
            *o += b;
        }
    }
    cache
}

/// Unrolled forward pass over a batch; initial hidden and cell states are
/// zero. Outputs are `V h_t + bias`, left pre-activation.
pub fn lstm_forward(params: &LstmParams, inputs: &Tensor3) -> Result<(Tensor3, LstmCache)> {
    if inputs.d() != params.d_in {
        return Err(Error::ShapeMismatch(format!(
            "input channels {} != lstm d_in {}",
            inputs.d(),
            params.d_in
        )));
    }
    let (n, t_len, _) = inputs.shape();
    let mut outputs = Tensor3::zeros(n, t_len, params.d_out);
    let mut examples = Vec::with_capacity(n);
    for i in 0..n {
        let cache = forward_example(params, inputs.example(i), t_len, outputs.example_mut(i));
        examples.push(cache);
    }
    Ok((
        outputs,
        LstmCache {
            n,
            t: t_len,
            d_in: params.d_in,
            hidden: params.hidden,
            d_out: params.d_out,
            examples,
        },
    ))
}

fn backward_example(
    params: &LstmParams,
    cache: &ExampleCache,
    t_len: usize,
    dy: &[f64],
    grads: &mut LstmParams,
    dx: &mut [f64],
) {
    let h = params.hidden;
    let d_in = params.d_in;
    let d_out = params.d_out;
    let cdim = d_in + h;

    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut dh = vec![0.0; h];
    let mut da = vec![0.0; 4 * h];
    let mut dconcat = vec![0.0; cdim];

    for t in (0..t_len).rev() {
        let dy_row = &dy[t * d_out..(t + 1) * d_out];
        let h_row = &cache.h[t * h..(t + 1) * h];
        let tanh_row = &cache.tanh_c[t * h..(t + 1) * h];
        let gates = &cache.gates[t * 4 * h..(t + 1) * 4 * h];
        let concat = &cache.concat[t * cdim..(t + 1) * cdim];

        grads.v.add_outer(dy_row, h_row, 1.0);
        for (g, d) in grads.v_b.iter_mut().zip(dy_row) {
            *g += d;
        }

        dh.copy_from_slice(&dh_next);
        params.v.matvec_t_acc(dy_row, &mut dh);

        let c_prev = |k: usize| if t == 0 { 0.0 } else { cache.c[(t - 1) * h + k] };
        for k in 0..h {
            let (i_g, f_g, g_g, o_g) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
            let tc = tanh_row[k];
            let dc = dc_next[k] + dh[k] * o_g * (1.0 - tc * tc);
            let d_o = dh[k] * tc;
            da[k] = dc * g_g * i_g * (1.0 - i_g);
            da[h + k] = dc * c_prev(k) * f_g * (1.0 - f_g);
            da[2 * h + k] = dc * i_g * (1.0 - g_g * g_g);
            da[3 * h + k] = d_o * o_g * (1.0 - o_g);
            dc_next[k] = dc * f_g;
        }

        grads.w.add_outer(&da, concat, 1.0);
        for (g, d) in grads.b.iter_mut().zip(&da) {
            *g += d;
        }

        dconcat.iter_mut().for_each(|v| *v = 0.0);
        params.w.matvec_t_acc(&da, &mut dconcat);
        dx[t * d_in..(t + 1) * d_in].copy_from_slice(&dconcat[..d_in]);
        dh_next.copy_from_slice(&dconcat[d_in..]);
    }
}

/// Exact gradients of the scalar `<output_grads, outputs>` with respect to
/// parameters and inputs, via backpropagation through time.
pub fn lstm_backward(
    params: &LstmParams,
    cache: &LstmCache,
    output_grads: &Tensor3,
) -> Result<(LstmParams, Tensor3)> {
    if cache.d_in != params.d_in || cache.hidden != params.hidden || cache.d_out != params.d_out {
        return Err(Error::StaleCache(
            "cache was built by a differently-shaped network".into(),
        ));
    }
    let (n, t_len, d_out) = output_grads.shape();
    if n != cache.n || t_len != cache.t || d_out != cache.d_out {
        return Err(Error::StaleCache(format!(
            "gradient shape {n}x{t_len}x{d_out} != cached {}x{}x{}",
            cache.n, cache.t, cache.d_out
        )));
    }
    let mut grads = params.zeros_like();
    let mut dinputs = Tensor3::zeros(n, t_len, params.d_in);
    for i in 0..n {
        backward_example(
            params,
            &cache.examples[i],
            t_len,
            output_grads.example(i),
            &mut grads,
            dinputs.example_mut(i),
        );
    }
    Ok((grads, dinputs))
}
