use crate::error::{Error, Result};
use crate::numeric::kernels::{gemm_nt, gemm_tn};
use crate::numeric::{Matrix, Scalar, Tensor3};

/// Kernel weights `[out, in, k]` stored flat as an `out x (in * k)` matrix
/// (kernel tap fastest), plus one bias per output channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv1dParams<T = f32> {
    pub w: Matrix<T>,
    pub b: Vec<T>,
    in_channels: usize,
    kernel: usize,
}

impl<T: Scalar> Conv1dParams<T> {
    pub fn zeros(in_channels: usize, out_channels: usize, kernel: usize) -> Self {
        Conv1dParams {
            w: Matrix::zeros(out_channels, in_channels * kernel),
            b: vec![T::zero(); out_channels],
            in_channels,
            kernel,
        }
    }

    pub fn from_parts(w: Matrix<T>, b: Vec<T>, in_channels: usize, kernel: usize) -> Result<Self> {
        if w.cols() != in_channels * kernel || b.len() != w.rows() {
            return Err(Error::shape(format!(
                "conv: w {:?} for {in_channels} channels, kernel {kernel}, {} biases",
                w.shape(),
                b.len()
            )));
        }
        Ok(Conv1dParams {
            w,
            b,
            in_channels,
            kernel,
        })
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.w.rows()
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    /// Weight for output channel `o`, input channel `c`, tap `i`.
    pub fn weight(&self, o: usize, c: usize, i: usize) -> T {
        self.w.get(o, c * self.kernel + i)
    }

    pub fn param_count(&self) -> usize {
        self.w.as_slice().len() + self.b.len()
    }

    pub fn output_len(&self, seq_len: usize) -> Result<usize> {
        if seq_len < self.kernel {
            return Err(Error::SequenceTooShort {
                seq_len,
                kernel: self.kernel,
            });
        }
        Ok(seq_len - self.kernel + 1)
    }
}

/// Unrolled receptive fields of one `time x channels` window:
/// `patches[t, c * k + i] = x[t + i, c]`.
fn patches<T: Scalar>(x: &Matrix<T>, kernel: usize, out_len: usize) -> Matrix<T> {
    let channels = x.cols();
    let mut p = Matrix::zeros(out_len, channels * kernel);
    for t in 0..out_len {
        let row = p.row_mut(t);
        for i in 0..kernel {
            for (c, &v) in x.row(t + i).iter().enumerate() {
                row[c * kernel + i] = v;
            }
        }
    }
    p
}

pub(crate) struct ConvTrace<T> {
    patches: Vec<Matrix<T>>,
    /// Pre-activation `[time, out]` per window.
    pre: Vec<Matrix<T>>,
}

impl<T> ConvTrace<T> {
    pub(crate) fn empty() -> Self {
        ConvTrace {
            patches: Vec::new(),
            pre: Vec::new(),
        }
    }
}

/// Valid (unpadded) cross-correlation over increasing time followed by
/// ReLU: `y[o, t] = relu(b[o] + sum_{c,i} w[o, c, i] * x[t + i, c])`.
/// Input windows are `time x channels`; the result is `[batch, out, time - k + 1]`.
pub(crate) fn feature_map<T: Scalar>(
    p: &Conv1dParams<T>,
    windows: &[&Matrix<T>],
    keep: bool,
) -> Result<(Tensor3<T>, Option<ConvTrace<T>>)> {
    let seq_len = windows.first().map_or(0, |w| w.rows());
    let out_len = p.output_len(seq_len)?;
    let out_ch = p.out_channels();
    let width = p.in_channels * p.kernel;
    let mut features = Tensor3::zeros(windows.len(), out_ch, out_len);
    let mut trace = ConvTrace {
        patches: Vec::new(),
        pre: Vec::new(),
    };
    for (b, x) in windows.iter().enumerate() {
        if x.shape() != (seq_len, p.in_channels) {
            return Err(Error::shape(format!(
                "conv input {:?}, expected [{seq_len}, {}]",
                x.shape(),
                p.in_channels
            )));
        }
        let patch = patches(x, p.kernel, out_len);
        let mut pre = Matrix::zeros(out_len, out_ch);
        for t in 0..out_len {
            pre.row_mut(t).copy_from_slice(&p.b);
        }
        gemm_nt(
            out_len,
            width,
            out_ch,
            patch.as_slice(),
            width,
            p.w.as_slice(),
            width,
            pre.as_mut_slice(),
            out_ch,
        );
        for t in 0..out_len {
            for o in 0..out_ch {
                let v = pre.get(t, o);
                features.set(b, o, t, if v > T::zero() { v } else { T::zero() });
            }
        }
        if keep {
            trace.patches.push(patch);
            trace.pre.push(pre);
        }
    }
    Ok((features, keep.then_some(trace)))
}

/// Backward through pooling, ReLU and the convolution, given the gradient
/// of the pooled `[batch, out]` features.
pub(crate) fn backward<T: Scalar>(
    p: &Conv1dParams<T>,
    trace: &ConvTrace<T>,
    dpooled: &Matrix<T>,
    grad: &mut Conv1dParams<T>,
) {
    let out_ch = p.out_channels();
    let width = p.in_channels * p.kernel;
    for (b, (patch, pre)) in trace.patches.iter().zip(&trace.pre).enumerate() {
        let out_len = pre.rows();
        let inv = T::one() / T::from_usize(out_len).unwrap();
        let mut dpre = Matrix::zeros(out_len, out_ch);
        for t in 0..out_len {
            for o in 0..out_ch {
                if pre.get(t, o) > T::zero() {
                    let d = dpooled.get(b, o) * inv;
                    dpre.set(t, o, d);
                    grad.b[o] += d;
                }
            }
        }
        gemm_tn(
            out_ch,
            out_len,
            width,
            dpre.as_slice(),
            out_ch,
            patch.as_slice(),
            width,
            grad.w.as_mut_slice(),
            width,
        );
    }
}
