//! Single-layer LSTM with a linear head, generic over the float type.
//!
//! Gate pre-activations for all four gates come from one product
//! `[x_t, h_{t-1}] · W + b`, with `W` of shape `(input + hidden) x 4·hidden`
//! holding column blocks in the order input, forget, output, candidate:
//!
//! ```text
//! i = σ(a_i)  f = σ(a_f)  o = σ(a_o)  g = tanh(a_g)
//! c_t = f ⊙ c_{t-1} + i ⊙ g
//! h_t = o ⊙ tanh(c_t)
//! ŷ   = (m ⊙ h_T) · w_head + b_head
//! ```
//!
//! `m` is an optional inverted-dropout mask on the final hidden state.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayView3, Axis, NdFloat};
use num_traits::NumCast;
use rand::Rng;

use super::ForecastError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input,
    Forget,
    Output,
    Candidate,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Output, Gate::Candidate];

    fn block(self) -> usize {
        self as usize
    }
}

pub fn cast<F: NdFloat, G: NdFloat>(v: F) -> G {
    <G as NumCast>::from(v).expect("float cast")
}

fn lit<F: NdFloat>(v: f64) -> F {
    cast::<f64, F>(v)
}

#[derive(Debug, Clone)]
pub struct LstmParams<F> {
    input_size: usize,
    hidden: usize,
    w: Array2<F>,
    b: Array1<F>,
    head_w: Array1<F>,
    head_b: F,
    // bumped on every mutation; caches from older generations are stale
    generation: u64,
}

impl<F: NdFloat> PartialEq for LstmParams<F> {
    fn eq(&self, other: &Self) -> bool {
        self.w == other.w && self.b == other.b && self.head_w == other.head_w && self.head_b == other.head_b
    }
}

impl<F: NdFloat> LstmParams<F> {
    pub fn zeros(input_size: usize, hidden: usize) -> Self {
        LstmParams {
            input_size,
            hidden,
            w: Array2::zeros((input_size + hidden, 4 * hidden)),
            b: Array1::zeros(4 * hidden),
            head_w: Array1::zeros(hidden),
            head_b: F::zero(),
            generation: 0,
        }
    }

    /// Glorot-uniform weights per gate block and for the head, forget-gate
    /// bias 1, other biases 0.
    pub fn init<R: Rng + ?Sized>(input_size: usize, hidden: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_size, hidden);
        let gate_limit = (6.0 / (input_size + 2 * hidden) as f64).sqrt();
        p.w.iter_mut().for_each(|v| *v = lit(rng.random_range(-gate_limit..gate_limit)));
        let head_limit = (6.0 / (hidden + 1) as f64).sqrt();
        p.head_w.iter_mut().for_each(|v| *v = lit(rng.random_range(-head_limit..head_limit)));
        p.b.slice_mut(s![hidden..2 * hidden]).fill(F::one());
        p
    }

    /// Redraws forget-gate biases as ln U(1, max_steps - 1) and sets each
    /// input-gate bias to the negated forget bias.
    pub fn chrono_gate_bias<R: Rng + ?Sized>(&mut self, max_steps: usize, rng: &mut R) {
        let hi = (max_steps as f64 - 1.0).max(1.0 + 1e-9);
        let h = self.hidden;
        for j in 0..h {
            let forget = rng.random_range(1.0..hi).ln();
            self.b[h + j] = lit(forget);
            self.b[j] = lit(-forget);
        }
        self.generation += 1;
    }

    pub fn from_parts(w: Array2<F>, b: Array1<F>, head_w: Array1<F>, head_b: F) -> Result<Self, ForecastError> {
        let hidden = head_w.len();
        if hidden == 0 || w.ncols() != 4 * hidden || w.nrows() <= hidden || b.len() != 4 * hidden {
            return Err(ForecastError::ShapeMismatch(format!(
                "weights {:?}, bias {}, head {} do not describe an LSTM",
                w.shape(),
                b.len(),
                hidden
            )));
        }
        let input_size = w.nrows() - hidden;
        // force standard layout so flat views are contiguous
        let w = w.as_standard_layout().into_owned();
        let p = LstmParams { input_size, hidden, w, b, head_w, head_b, generation: 0 };
        if !p.tensors().iter().all(|t| t.iter().all(|v| v.is_finite())) {
            return Err(ForecastError::NonFiniteActivation);
        }
        Ok(p)
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn weights(&self) -> ArrayView2<'_, F> {
        self.w.view()
    }

    pub fn bias(&self) -> ArrayView1<'_, F> {
        self.b.view()
    }

    pub fn head_weights(&self) -> ArrayView1<'_, F> {
        self.head_w.view()
    }

    pub fn head_bias(&self) -> F {
        self.head_b
    }

    /// Rows `0..input` act on the input, the remaining rows on `h_{t-1}`.
    pub fn gate_weights(&self, gate: Gate) -> ArrayView2<'_, F> {
        let h = self.hidden;
        self.w.slice(s![.., gate.block() * h..(gate.block() + 1) * h])
    }

    pub fn gate_bias(&self, gate: Gate) -> ArrayView1<'_, F> {
        let h = self.hidden;
        self.b.slice(s![gate.block() * h..(gate.block() + 1) * h])
    }

    /// Flat views in serialization order: W (row-major), b, head weights, head bias.
    pub fn tensors(&self) -> [&[F]; 4] {
        [
            self.w.as_slice().expect("standard layout"),
            self.b.as_slice().expect("contiguous"),
            self.head_w.as_slice().expect("contiguous"),
            std::slice::from_ref(&self.head_b),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [F]; 4] {
        self.generation += 1;
        [
            self.w.as_slice_mut().expect("standard layout"),
            self.b.as_slice_mut().expect("contiguous"),
            self.head_w.as_slice_mut().expect("contiguous"),
            std::slice::from_mut(&mut self.head_b),
        ]
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<F> {
        self.tensors().concat()
    }

    pub fn get(&self, index: usize) -> F {
        locate(&self.tensors(), index)
    }

    pub fn set(&mut self, index: usize, value: F) {
        let mut tensors = self.tensors_mut();
        let mut i = index;
        for t in tensors.iter_mut() {
            if i < t.len() {
                t[i] = value;
                return;
            }
            i -= t.len();
        }
        panic!("parameter index {index} out of range");
    }

    pub fn cast<G: NdFloat>(&self) -> LstmParams<G> {
        LstmParams {
            input_size: self.input_size,
            hidden: self.hidden,
            w: self.w.mapv(cast),
            b: self.b.mapv(cast),
            head_w: self.head_w.mapv(cast),
            head_b: cast(self.head_b),
            generation: 0,
        }
    }
}

fn locate<F: Copy>(tensors: &[&[F]], index: usize) -> F {
    let mut i = index;
    for t in tensors {
        if i < t.len() {
            return t[i];
        }
        i -= t.len();
    }
    panic!("parameter index {index} out of range");
}

/// Gradients with the same layout as [`LstmParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstmGrads<F> {
    pub w: Array2<F>,
    pub b: Array1<F>,
    pub head_w: Array1<F>,
    pub head_b: F,
}

impl<F: NdFloat> LstmGrads<F> {
    pub fn zeros_like(p: &LstmParams<F>) -> Self {
        LstmGrads {
            w: Array2::zeros(p.w.raw_dim()),
            b: Array1::zeros(p.b.len()),
            head_w: Array1::zeros(p.hidden),
            head_b: F::zero(),
        }
    }

    pub fn tensors(&self) -> [&[F]; 4] {
        [
            self.w.as_slice().expect("standard layout"),
            self.b.as_slice().expect("contiguous"),
            self.head_w.as_slice().expect("contiguous"),
            std::slice::from_ref(&self.head_b),
        ]
    }

    pub fn flatten(&self) -> Vec<F> {
        self.tensors().concat()
    }

    pub fn get(&self, index: usize) -> F {
        locate(&self.tensors(), index)
    }
}

/// Activations retained by [`forward`] for [`backward`]. Per-step arrays
/// are stacked by rows: step `t` occupies rows `t·batch .. (t+1)·batch`.
#[derive(Debug, Clone)]
pub struct ForwardCache<F> {
    generation: u64,
    batch: usize,
    steps: usize,
    /// Concatenated `[x_t, h_{t-1}]`, (steps·batch) x (input + hidden).
    z: Array2<F>,
    /// Post-activation gates, (steps·batch) x 4·hidden.
    gates: Array2<F>,
    /// Cell states `c_0 ..= c_T`, ((steps + 1)·batch) x hidden.
    c: Array2<F>,
    tanh_c: Array2<F>,
    mask: Option<Array2<F>>,
    /// Final hidden state after dropout.
    dropped: Array2<F>,
}

impl<F> ForwardCache<F> {
    pub fn batch_size(&self) -> usize {
        self.batch
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Float types the LSTM runs in, with slice-wise gate activations.
pub trait LstmFloat: NdFloat {
    fn sigmoid_slice(xs: &mut [Self]);
    fn tanh_slice(xs: &mut [Self]);
}

impl LstmFloat for f64 {
    fn sigmoid_slice(xs: &mut [f64]) {
        xs.iter_mut().for_each(|v| *v = 1.0 / (1.0 + (-*v).exp()));
    }

    fn tanh_slice(xs: &mut [f64]) {
        xs.iter_mut().for_each(|v| *v = v.tanh());
    }
}

// Branch-free exp for f32 that the compiler can vectorize: Cody-Waite range
// reduction and a degree-6 polynomial, accurate to a few ulp.
#[inline(always)]
fn exp_f32(x: f32) -> f32 {
    const SHIFT: f32 = 12_582_912.0; // 1.5 * 2^23
    let x = x.clamp(-87.0, 88.0);
    let t = x * std::f32::consts::LOG2_E + SHIFT;
    let n = t - SHIFT;
    let r = x - n * 0.693_145_75 - n * 1.428_606_8e-6;
    let p = 1.0 + r * (1.0 + r * (0.5 + r * (0.166_666_67 + r * (0.041_666_668 + r * (0.008_333_452 + r * 0.001_388_974_6)))));
    let bits = (t.to_bits() as i32 - SHIFT.to_bits() as i32 + 127) << 23;
    p * f32::from_bits(bits as u32)
}

impl LstmFloat for f32 {
    fn sigmoid_slice(xs: &mut [f32]) {
        xs.iter_mut().for_each(|v| *v = 1.0 / (1.0 + exp_f32(-*v)));
    }

    fn tanh_slice(xs: &mut [f32]) {
        xs.iter_mut().for_each(|v| {
            let e = exp_f32(-2.0 * v.abs());
            *v = ((1.0 - e) / (1.0 + e)).copysign(*v);
        });
    }
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else
/// `1 / (1 - rate)`.
pub fn dropout_mask<F: NdFloat, R: Rng + ?Sized>(rng: &mut R, batch: usize, hidden: usize, rate: f64) -> Array2<F> {
    let keep: F = lit(1.0 / (1.0 - rate));
    Array2::from_shape_simple_fn((batch, hidden), || if rng.random::<f64>() < rate { F::zero() } else { keep })
}

/// Runs a batch of windows (batch x steps x input) from zero state and
/// returns one prediction per window.
pub fn forward<F: LstmFloat>(
    params: &LstmParams<F>,
    windows: ArrayView3<'_, F>,
    mask: Option<&Array2<F>>,
) -> Result<(Array1<F>, ForwardCache<F>), ForecastError> {
    let (batch, steps, input) = windows.dim();
    let h = params.hidden;
    if input != params.input_size {
        return Err(ForecastError::ShapeMismatch(format!("window has {input} features, model expects {}", params.input_size)));
    }
    if steps == 0 || batch == 0 {
        return Err(ForecastError::ShapeMismatch("empty window batch".into()));
    }
    if let Some(m) = mask {
        if m.dim() != (batch, h) {
            return Err(ForecastError::ShapeMismatch(format!("dropout mask {:?}, expected ({batch}, {h})", m.dim())));
        }
    }

    let mut z = Array2::<F>::zeros((steps * batch, input + h));
    let mut gates = Array2::<F>::zeros((steps * batch, 4 * h));
    let mut c = Array2::<F>::zeros(((steps + 1) * batch, h));
    let mut tanh_c = Array2::<F>::zeros((steps * batch, h));
    let mut hidden_state = Array2::<F>::zeros((batch, h));
    let bias = params.b.as_slice().expect("contiguous");
    for t in 0..steps {
        let rows = t * batch..(t + 1) * batch;
        {
            let mut zt = z.slice_mut(s![rows.clone(), ..]);
            zt.slice_mut(s![.., ..input]).assign(&windows.slice(s![.., t, ..]));
            zt.slice_mut(s![.., input..]).assign(&hidden_state);
        }
        general_mat_mul(F::one(), &z.slice(s![rows.clone(), ..]), &params.w, F::zero(), &mut gates.slice_mut(s![rows, ..]));

        let gate_rows = &mut gates.as_slice_mut().expect("standard layout")[t * batch * 4 * h..(t + 1) * batch * 4 * h];
        let (c_prev, c_next) = c.as_slice_mut().expect("standard layout").split_at_mut((t + 1) * batch * h);
        let c_prev = &c_prev[t * batch * h..];
        let c_next = &mut c_next[..batch * h];
        let tc_rows = &mut tanh_c.as_slice_mut().expect("standard layout")[t * batch * h..(t + 1) * batch * h];
        let h_rows = hidden_state.as_slice_mut().expect("standard layout");
        for r in 0..batch {
            let row = &mut gate_rows[r * 4 * h..(r + 1) * 4 * h];
            for (v, &bv) in row.iter_mut().zip(bias) {
                *v += bv;
            }
            let (sig, cand) = row.split_at_mut(3 * h);
            F::sigmoid_slice(sig);
            F::tanh_slice(cand);
            let (ig, rest) = row.split_at(h);
            let (fg, rest) = rest.split_at(h);
            let (og, gg) = rest.split_at(h);
            let span = r * h..(r + 1) * h;
            let cells = c_next[span.clone()].iter_mut().zip(&c_prev[span.clone()]);
            for ((cn, &cp), ((&i_g, &f_g), &g_g)) in cells.zip(ig.iter().zip(fg).zip(gg)) {
                *cn = f_g * cp + i_g * g_g;
            }
            let tc = &mut tc_rows[span.clone()];
            tc.copy_from_slice(&c_next[span.clone()]);
            F::tanh_slice(tc);
            for ((hv, &t), &o_g) in h_rows[span].iter_mut().zip(tc.iter()).zip(og) {
                *hv = o_g * t;
            }
        }
    }

    let dropped = match mask {
        Some(m) => &hidden_state * m,
        None => hidden_state,
    };
    let mut out = dropped.dot(&params.head_w);
    out.mapv_inplace(|v| v + params.head_b);
    if !out.iter().all(|v| v.is_finite()) {
        return Err(ForecastError::NonFiniteActivation);
    }
    let cache = ForwardCache { generation: params.generation, batch, steps, z, gates, c, tanh_c, mask: mask.cloned(), dropped };
    Ok((out, cache))
}

/// Inference-mode predictions for a batch of windows.
pub fn predict<F: LstmFloat>(params: &LstmParams<F>, windows: ArrayView3<'_, F>) -> Result<Array1<F>, ForecastError> {
    forward(params, windows, None).map(|(out, _)| out)
}

/// Exact gradients given `dloss/dprediction` for each window of the batch.
pub fn backward<F: NdFloat>(
    params: &LstmParams<F>,
    cache: &ForwardCache<F>,
    loss_grad: ArrayView1<'_, F>,
) -> Result<LstmGrads<F>, ForecastError> {
    if cache.generation != params.generation || cache.z.ncols() != params.input_size + params.hidden {
        return Err(ForecastError::StaleCache);
    }
    let batch = cache.batch;
    if loss_grad.len() != batch {
        return Err(ForecastError::ShapeMismatch(format!("{} loss gradients for a batch of {batch}", loss_grad.len())));
    }
    let h = params.hidden;
    let input = params.input_size;
    let one = F::one();
    let mut g = LstmGrads::zeros_like(params);

    g.head_w = cache.dropped.t().dot(&loss_grad);
    g.head_b = loss_grad.sum();
    let mut dh = loss_grad.insert_axis(Axis(1)).to_owned() * params.head_w.view().insert_axis(Axis(0));
    if let Some(m) = &cache.mask {
        dh *= m;
    }

    let recurrent_w = params.w.slice(s![input.., ..]);
    let mut dc = vec![F::zero(); batch * h];
    let mut da = Array2::<F>::zeros((cache.steps * batch, 4 * h));
    let gates = cache.gates.as_slice().expect("standard layout");
    let cells = cache.c.as_slice().expect("standard layout");
    let tanh_c = cache.tanh_c.as_slice().expect("standard layout");
    for t in (0..cache.steps).rev() {
        {
            let da_rows = &mut da.as_slice_mut().expect("standard layout")[t * batch * 4 * h..(t + 1) * batch * 4 * h];
            let dh_s = dh.as_slice().expect("standard layout");
            for r in 0..batch {
                let gr = &gates[(t * batch + r) * 4 * h..(t * batch + r + 1) * 4 * h];
                let dar = &mut da_rows[r * 4 * h..(r + 1) * 4 * h];
                let c_prev = &cells[(t * batch + r) * h..(t * batch + r + 1) * h];
                let tc = &tanh_c[(t * batch + r) * h..(t * batch + r + 1) * h];
                let dcr = &mut dc[r * h..(r + 1) * h];
                let dhr = &dh_s[r * h..(r + 1) * h];
                for j in 0..h {
                    let (i_g, f_g, o_g, g_g) = (gr[j], gr[h + j], gr[2 * h + j], gr[3 * h + j]);
                    let dht = dhr[j];
                    let tcv = tc[j];
                    let dct = dcr[j] + dht * o_g * (one - tcv * tcv);
                    dar[j] = dct * g_g * i_g * (one - i_g);
                    dar[h + j] = dct * c_prev[j] * f_g * (one - f_g);
                    dar[2 * h + j] = dht * tcv * o_g * (one - o_g);
                    dar[3 * h + j] = dct * i_g * (one - g_g * g_g);
                    dcr[j] = dct * f_g;
                }
            }
        }
        if t > 0 {
            general_mat_mul(one, &da.slice(s![t * batch..(t + 1) * batch, ..]), &recurrent_w.t(), F::zero(), &mut dh);
        }
    }
    general_mat_mul(one, &cache.z.t(), &da, F::zero(), &mut g.w);
    g.b = da.sum_axis(Axis(0));
    Ok(g)
}
