//! The three intent classifiers: a stacked LSTM, a stacked GRU and a single
//! 1D convolution with global average pooling. All end in a linear map to one
//! logit and a sigmoid.
//!
//! Backward passes are written out by hand per layer (backpropagation
//! through time for the recurrent stacks) and checked against central
//! differences in the tests.

mod conv;
mod gru;
mod head;
mod lstm;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{COORDS_PER_FRAME, DEFAULT_SEQ_LEN};
use crate::error::{Error, Result};
use crate::numeric::{mean_over_time, Matrix, Scalar, Tensor3};

pub use conv::Conv1dParams;
pub use gru::{gru_cell, GruGates, GruLayer};
pub use head::{dropout_apply, HeadParameters};
pub use lstm::{lstm_cell, LstmGates, LstmLayer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Lstm,
    Gru,
    Cnn1d,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Lstm, ModelKind::Gru, ModelKind::Cnn1d];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lstm => "lstm",
            ModelKind::Gru => "gru",
            ModelKind::Cnn1d => "cnn1d",
        }
    }

    /// Byte used for the kind in checkpoint files.
    pub fn code(self) -> u8 {
        match self {
            ModelKind::Lstm => 1,
            ModelKind::Gru => 2,
            ModelKind::Cnn1d => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(ModelKind::Lstm),
            2 => Ok(ModelKind::Gru),
            3 => Ok(ModelKind::Cnn1d),
            other => Err(Error::InvalidKind(format!("kind byte {other}"))),
        }
    }

    pub fn is_recurrent(self) -> bool {
        !matches!(self, ModelKind::Cnn1d)
    }

    fn gates(self) -> usize {
        match self {
            ModelKind::Lstm => 4,
            ModelKind::Gru => 3,
            ModelKind::Cnn1d => 0,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lstm" => Ok(ModelKind::Lstm),
            "gru" => Ok(ModelKind::Gru),
            "cnn1d" | "cnn" => Ok(ModelKind::Cnn1d),
            other => Err(Error::InvalidKind(other.to_string())),
        }
    }
}

/// Architecture hyperparameters. For `Cnn1d`, `hidden` is the number of
/// output channels and `layers` is ignored; for the recurrent kinds `kernel`
/// is ignored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub input_size: usize,
    pub hidden: usize,
    pub layers: usize,
    pub kernel: usize,
    pub dropout_p: f32,
    pub seq_len: usize,
}

impl ModelConfig {
    /// 66 inputs, 50 hidden units, two recurrent layers, kernel 3, dropout
    /// 0.5, 15-frame windows.
    pub fn standard(kind: ModelKind) -> Self {
        ModelConfig {
            kind,
            input_size: COORDS_PER_FRAME,
            hidden: 50,
            layers: 2,
            kernel: 3,
            dropout_p: 0.5,
            seq_len: DEFAULT_SEQ_LEN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("input_size", self.input_size),
            ("hidden", self.hidden),
            ("layers", self.layers),
            ("kernel", self.kernel),
            ("seq_len", self.seq_len),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::InvalidConfig(format!(
                "dropout_p must lie in [0, 1), got {}",
                self.dropout_p
            )));
        }
        if self.kind == ModelKind::Cnn1d && self.seq_len < self.kernel {
            return Err(Error::SequenceTooShort {
                seq_len: self.seq_len,
                kernel: self.kernel,
            });
        }
        Ok(())
    }

    /// Time length of the convolution output.
    pub fn conv_output_len(&self) -> Result<usize> {
        if self.seq_len < self.kernel {
            return Err(Error::SequenceTooShort {
                seq_len: self.seq_len,
                kernel: self.kernel,
            });
        }
        Ok(self.seq_len - self.kernel + 1)
    }
}

/// Parameter count of the feature extractor alone (recurrent stack or conv layer).
pub fn count_backbone_params(config: &ModelConfig) -> usize {
    let h = config.hidden;
    match config.kind {
        ModelKind::Lstm | ModelKind::Gru => {
            let gates = config.kind.gates();
            (0..config.layers)
                .map(|l| {
                    let input = if l == 0 { config.input_size } else { h };
                    gates * ((input + h) * h + 2 * h)
                })
                .sum()
        }
        ModelKind::Cnn1d => h * config.input_size * config.kernel + h,
    }
}

/// Total trainable parameters, head included.
pub fn count_params(config: &ModelConfig) -> Result<usize> {
    config.validate()?;
    Ok(count_backbone_params(config) + config.hidden + 1)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Backbone<T = f32> {
    Lstm(Vec<LstmLayer<T>>),
    Gru(Vec<GruLayer<T>>),
    Cnn1d(Conv1dParams<T>),
}

/// Hidden state per step plus, when kept, the per-step trace.
pub(crate) type LayerOutput<T, S> = (Vec<Matrix<T>>, Vec<S>);

/// `h` and, for LSTM, the cell state `c`; each `[batch, hidden]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrentState<T = f32> {
    pub h: Matrix<T>,
    pub c: Option<Matrix<T>>,
}

impl<T: Scalar> RecurrentState<T> {
    pub fn zeros(kind: ModelKind, batch: usize, hidden: usize) -> Self {
        RecurrentState {
            h: Matrix::zeros(batch, hidden),
            c: (kind == ModelKind::Lstm).then(|| Matrix::zeros(batch, hidden)),
        }
    }
}

/// A named view into one parameter tensor.
pub struct NamedTensor<'a, T> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [T],
}

/// Whether a forward pass samples dropout.
pub enum Mode<'a> {
    Eval,
    Train(&'a mut dyn RngCore),
}

enum Trace<T> {
    Lstm(Vec<Vec<lstm::LstmStep<T>>>),
    Gru(Vec<Vec<gru::GruStep<T>>>),
    Cnn1d(conv::ConvTrace<T>),
}

/// Intermediate values of a training forward pass, consumed by
/// [`Model::backward`].
pub struct ForwardCache<T> {
    trace: Trace<T>,
    /// Head input after dropout.
    head_in: Matrix<T>,
    mask: Option<Matrix<T>>,
    seq_len: usize,
    pub probs: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model<T = f32> {
    pub config: ModelConfig,
    pub backbone: Backbone<T>,
    pub head: HeadParameters<T>,
}

impl<T: Scalar> Model<T> {
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let h = config.hidden;
        let backbone = match config.kind {
            ModelKind::Lstm => Backbone::Lstm(
                (0..config.layers)
                    .map(|l| LstmLayer::zeros(if l == 0 { config.input_size } else { h }, h))
                    .collect(),
            ),
            ModelKind::Gru => Backbone::Gru(
                (0..config.layers)
                    .map(|l| GruLayer::zeros(if l == 0 { config.input_size } else { h }, h))
                    .collect(),
            ),
            ModelKind::Cnn1d => {
                Backbone::Cnn1d(Conv1dParams::zeros(config.input_size, h, config.kernel))
            }
        };
        Ok(Model {
            config,
            backbone,
            head: HeadParameters::zeros(h),
        })
    }

    /// Uniform initialization: `±1/sqrt(hidden)` for recurrent weights,
    /// biases and the head; `±1/sqrt(in_channels * kernel)` for the
    /// convolution. Deterministic in `seed`.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden_bound = 1.0 / (config.hidden as f64).sqrt();
        let conv_bound = 1.0 / ((config.input_size * config.kernel) as f64).sqrt();
        let backbone_bound = if config.kind == ModelKind::Cnn1d {
            conv_bound
        } else {
            hidden_bound
        };
        let n_backbone = count_backbone_params(&config);
        let mut seen = 0usize;
        for slice in model.param_slices_mut() {
            for v in slice.iter_mut() {
                let bound = if seen < n_backbone {
                    backbone_bound
                } else {
                    hidden_bound
                };
                *v = T::from_f64_lossy(rng.random_range(-bound..bound));
                seen += 1;
            }
        }
        Ok(model)
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    /// Parameter tensors in checkpoint order with their logical shapes.
    pub fn tensors(&self) -> Vec<NamedTensor<'_, T>> {
        let mut v: Vec<NamedTensor<'_, T>> = Vec::new();
        match &self.backbone {
            Backbone::Lstm(layers) => {
                for (l, p) in layers.iter().enumerate() {
                    recurrent_tensors(&mut v, "lstm", l, &p.w, &p.b_input, &p.b_hidden);
                }
            }
            Backbone::Gru(layers) => {
                for (l, p) in layers.iter().enumerate() {
                    recurrent_tensors(&mut v, "gru", l, &p.w, &p.b_input, &p.b_hidden);
                }
            }
            Backbone::Cnn1d(p) => {
                v.push(NamedTensor {
                    name: "conv.w".into(),
                    shape: vec![p.out_channels(), p.in_channels(), p.kernel()],
                    data: p.w.as_slice(),
                });
                v.push(NamedTensor {
                    name: "conv.b".into(),
                    shape: vec![p.out_channels()],
                    data: &p.b,
                });
            }
        }
        v.push(NamedTensor {
            name: "head.w".into(),
            shape: vec![1, self.head.w.len()],
            data: &self.head.w,
        });
        v.push(NamedTensor {
            name: "head.b".into(),
            shape: vec![1],
            data: std::slice::from_ref(&self.head.b),
        });
        v
    }

    /// Mutable parameter slices in the same order as [`Model::tensors`].
    pub fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v: Vec<&mut [T]> = Vec::new();
        match &mut self.backbone {
            Backbone::Lstm(layers) => {
                for p in layers {
                    v.push(p.w.as_mut_slice());
                    v.push(&mut p.b_input);
                    v.push(&mut p.b_hidden);
                }
            }
            Backbone::Gru(layers) => {
                for p in layers {
                    v.push(p.w.as_mut_slice());
                    v.push(&mut p.b_input);
                    v.push(&mut p.b_hidden);
                }
            }
            Backbone::Cnn1d(p) => {
                v.push(p.w.as_mut_slice());
                v.push(&mut p.b);
            }
        }
        v.push(&mut self.head.w);
        v.push(std::slice::from_mut(&mut self.head.b));
        v
    }

    pub fn flatten(&self) -> Vec<T> {
        self.tensors()
            .iter()
            .flat_map(|t| t.data.iter().copied())
            .collect()
    }

    pub fn assign_flat(&mut self, values: &[T]) -> Result<()> {
        let n = self.num_params();
        if values.len() != n {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n,
            });
        }
        let mut offset = 0;
        for slice in self.param_slices_mut() {
            let len = slice.len();
            slice.copy_from_slice(&values[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }

    /// Rebuilds a model from `(name, shape, data)` tensors, which must match
    /// the layout [`Model::zeros`] produces for `config` exactly.
    pub fn from_tensors(
        config: ModelConfig,
        tensors: Vec<(String, Vec<usize>, Vec<T>)>,
    ) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let expected: Vec<(String, Vec<usize>)> = model
            .tensors()
            .into_iter()
            .map(|t| (t.name, t.shape))
            .collect();
        if expected.len() != tensors.len() {
            return Err(Error::shape(format!(
                "{} tensors given, config needs {}",
                tensors.len(),
                expected.len()
            )));
        }
        for ((name, shape), (got_name, got_shape, data)) in expected.iter().zip(&tensors) {
            if name != got_name
                || shape != got_shape
                || data.len() != shape.iter().product::<usize>()
            {
                return Err(Error::shape(format!(
                    "tensor {got_name} {got_shape:?} does not match expected {name} {shape:?}"
                )));
            }
        }
        for (slice, (_, _, data)) in model.param_slices_mut().into_iter().zip(&tensors) {
            slice.copy_from_slice(data);
        }
        Ok(model)
    }

    pub fn cast<U: Scalar>(&self) -> Model<U> {
        let mut out = Model::<U>::zeros(self.config).expect("config already validated");
        let values: Vec<U> = self
            .flatten()
            .into_iter()
            .map(|v| U::from_f64_lossy(v.to_f64_lossy()))
            .collect();
        out.assign_flat(&values).expect("same layout");
        out
    }

    fn check_windows(&self, windows: &[&Matrix<T>]) -> Result<()> {
        if windows.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let want = (self.config.seq_len, self.config.input_size);
        for w in windows {
            if w.shape() != want {
                return Err(Error::shape(format!(
                    "window {:?}, expected {want:?}",
                    w.shape()
                )));
            }
        }
        Ok(())
    }

    /// Eval-mode crossing probabilities, one per window.
    pub fn predict(&self, windows: &[&Matrix<T>]) -> Result<Vec<T>> {
        Ok(self.forward(windows, Mode::Eval, false)?.probs)
    }

    /// Forward pass keeping what [`Model::backward`] needs.
    pub fn forward_train(&self, windows: &[&Matrix<T>], mode: Mode<'_>) -> Result<ForwardCache<T>> {
        self.forward(windows, mode, true)
    }

    fn forward(
        &self,
        windows: &[&Matrix<T>],
        mode: Mode<'_>,
        keep: bool,
    ) -> Result<ForwardCache<T>> {
        self.check_windows(windows)?;
        let batch = windows.len();
        let (features, trace) = match &self.backbone {
            Backbone::Lstm(layers) => {
                let mut xs = time_major(windows);
                let mut traces = Vec::new();
                for p in layers {
                    let (hs, tr) = lstm::layer_forward(p, &xs, keep)?;
                    traces.push(tr);
                    xs = hs;
                }
                (xs.pop().expect("seq_len >= 1"), Trace::Lstm(traces))
            }
            Backbone::Gru(layers) => {
                let mut xs = time_major(windows);
                let mut traces = Vec::new();
                for p in layers {
                    let (hs, tr) = gru::layer_forward(p, &xs, keep)?;
                    traces.push(tr);
                    xs = hs;
                }
                (xs.pop().expect("seq_len >= 1"), Trace::Gru(traces))
            }
            Backbone::Cnn1d(p) => {
                let (fmap, tr) = conv::feature_map(p, windows, keep)?;
                let pooled = mean_over_time(&fmap)?;
                let tr = tr.unwrap_or(conv::ConvTrace::empty());
                (pooled, Trace::Cnn1d(tr))
            }
        };
        let (head_in, mask) = match mode {
            Mode::Train(rng) if self.config.kind.is_recurrent() && self.config.dropout_p > 0.0 => {
                let mask =
                    head::dropout_mask(batch, self.config.hidden, self.config.dropout_p, rng);
                let dropped = crate::numeric::hadamard(&features, &mask)?;
                (dropped, Some(mask))
            }
            _ => (features, None),
        };
        let probs = self.head.probabilities(&head_in);
        Ok(ForwardCache {
            trace,
            head_in,
            mask,
            seq_len: self.config.seq_len,
            probs,
        })
    }

    /// Gradients of a scalar loss with respect to every parameter, given
    /// `dloss/dprob` for each window. Returned as a model-shaped container.
    pub fn backward(&self, cache: &ForwardCache<T>, dprobs: &[T]) -> Result<Model<T>> {
        if dprobs.len() != cache.probs.len() {
            return Err(Error::LengthMismatch {
                left: dprobs.len(),
                right: cache.probs.len(),
            });
        }
        let mut grad = Model::zeros(self.config)?;
        let one = T::one();
        let dlogit: Vec<T> = dprobs
            .iter()
            .zip(&cache.probs)
            .map(|(&d, &p)| d * p * (one - p))
            .collect();
        let mut dfeat = self.head.backward(&cache.head_in, &dlogit, &mut grad.head);
        if let Some(mask) = &cache.mask {
            dfeat = crate::numeric::hadamard(&dfeat, mask)?;
        }
        let batch = dfeat.rows();
        match (&self.backbone, &cache.trace, &mut grad.backbone) {
            (Backbone::Lstm(layers), Trace::Lstm(traces), Backbone::Lstm(grads)) => {
                let mut dh = top_gradient(dfeat, cache.seq_len);
                for l in (0..layers.len()).rev() {
                    dh = lstm::layer_backward(&layers[l], &traces[l], &dh, &mut grads[l], l > 0);
                }
            }
            (Backbone::Gru(layers), Trace::Gru(traces), Backbone::Gru(grads)) => {
                let mut dh = top_gradient(dfeat, cache.seq_len);
                for l in (0..layers.len()).rev() {
                    dh = gru::layer_backward(&layers[l], &traces[l], &dh, &mut grads[l], l > 0);
                }
            }
            (Backbone::Cnn1d(p), Trace::Cnn1d(trace), Backbone::Cnn1d(g)) => {
                conv::backward(p, trace, &dfeat, g);
            }
            _ => {
                return Err(Error::InvalidKind(
                    "cache does not belong to this model".into(),
                ))
            }
        }
        debug_assert_eq!(batch, cache.probs.len());
        Ok(grad)
    }
}

fn recurrent_tensors<'a, T>(
    v: &mut Vec<NamedTensor<'a, T>>,
    prefix: &str,
    layer: usize,
    w: &'a Matrix<T>,
    b_input: &'a [T],
    b_hidden: &'a [T],
) where
    T: Scalar,
{
    v.push(NamedTensor {
        name: format!("{prefix}.{layer}.w"),
        shape: vec![w.rows(), w.cols()],
        data: w.as_slice(),
    });
    v.push(NamedTensor {
        name: format!("{prefix}.{layer}.b_input"),
        shape: vec![b_input.len()],
        data: b_input,
    });
    v.push(NamedTensor {
        name: format!("{prefix}.{layer}.b_hidden"),
        shape: vec![b_hidden.len()],
        data: b_hidden,
    });
}

/// Regroups `[time, features]` windows into one `[batch, features]` matrix per step.
fn time_major<T: Scalar>(windows: &[&Matrix<T>]) -> Vec<Matrix<T>> {
    let (steps, width) = windows[0].shape();
    (0..steps)
        .map(|t| {
            let mut m = Matrix::zeros(windows.len(), width);
            for (b, w) in windows.iter().enumerate() {
                m.row_mut(b).copy_from_slice(w.row(t));
            }
            m
        })
        .collect()
}

/// Gradient reaching each hidden state of the top layer: only the last step
/// feeds the head.
fn top_gradient<T: Scalar>(dlast: Matrix<T>, seq_len: usize) -> Vec<Matrix<T>> {
    let (b, h) = dlast.shape();
    let mut v: Vec<Matrix<T>> = (0..seq_len - 1).map(|_| Matrix::zeros(b, h)).collect();
    v.push(dlast);
    v
}

/// Probabilities from a stacked LSTM or GRU: the last top-layer hidden state
/// goes through dropout (training only), the head and a sigmoid.
pub fn recurrent_forward<T: Scalar>(
    model: &Model<T>,
    windows: &[&Matrix<T>],
    mode: Mode<'_>,
) -> Result<Vec<T>> {
    if !model.kind().is_recurrent() {
        return Err(Error::InvalidKind(format!(
            "recurrent forward called on {}",
            model.kind()
        )));
    }
    Ok(model.forward(windows, mode, false)?.probs)
}

/// Probabilities from the convolutional model: valid correlation, ReLU,
/// average over time, head and sigmoid. Dropout never applies here.
pub fn conv1d_forward<T: Scalar>(model: &Model<T>, windows: &[&Matrix<T>]) -> Result<Vec<T>> {
    if model.kind() != ModelKind::Cnn1d {
        return Err(Error::InvalidKind(format!(
            "conv forward called on {}",
            model.kind()
        )));
    }
    Ok(model.forward(windows, Mode::Eval, false)?.probs)
}

/// Post-ReLU convolution features `[batch, out_channels, seq_len - k + 1]`.
pub fn conv1d_feature_map<T: Scalar>(
    params: &Conv1dParams<T>,
    windows: &[&Matrix<T>],
) -> Result<Tensor3<T>> {
    Ok(conv::feature_map(params, windows, false)?.0)
}

/// Top-layer hidden states for every step, laid out `[batch, seq_len, hidden]`.
pub fn recurrent_hidden_sequence<T: Scalar>(
    model: &Model<T>,
    windows: &[&Matrix<T>],
) -> Result<Tensor3<T>> {
    model.check_windows(windows)?;
    let mut xs = time_major(windows);
    match &model.backbone {
        Backbone::Lstm(layers) => {
            for p in layers {
                xs = lstm::layer_forward(p, &xs, false)?.0;
            }
        }
        Backbone::Gru(layers) => {
            for p in layers {
                xs = gru::layer_forward(p, &xs, false)?.0;
            }
        }
        Backbone::Cnn1d(_) => {
            return Err(Error::InvalidKind("cnn1d has no hidden sequence".into()))
        }
    }
    let (batch, steps, hidden) = (windows.len(), xs.len(), model.config.hidden);
    let mut data = Vec::with_capacity(batch * steps * hidden);
    for b in 0..batch {
        for h in &xs {
            data.extend_from_slice(h.row(b));
        }
    }
    Tensor3::from_vec(batch, steps, hidden, data)
}
