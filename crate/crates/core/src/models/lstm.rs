use crate::error::{Error, Result};
use crate::numeric::kernels::{gemm_nn, gemm_nt, gemm_tn};
use crate::numeric::{hconcat, sigmoid_scalar, Matrix, Scalar};

use super::{LayerOutput, RecurrentState};

/// One LSTM layer. `w` maps `[h_{t-1} | x_t]` (hidden rows first) to the
/// four gate pre-activations, column blocks ordered forget, input,
/// candidate, output. The two bias vectors only ever enter as their sum.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmLayer<T = f32> {
    pub w: Matrix<T>,
    pub b_input: Vec<T>,
    pub b_hidden: Vec<T>,
    hidden: usize,
}

impl<T: Scalar> LstmLayer<T> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmLayer {
            w: Matrix::zeros(hidden + input, 4 * hidden),
            b_input: vec![T::zero(); 4 * hidden],
            b_hidden: vec![T::zero(); 4 * hidden],
            hidden,
        }
    }

    pub fn from_parts(w: Matrix<T>, b_input: Vec<T>, b_hidden: Vec<T>) -> Result<Self> {
        let hidden = w.cols() / 4;
        if w.cols() != 4 * hidden
            || w.rows() < hidden
            || b_input.len() != w.cols()
            || b_hidden.len() != w.cols()
        {
            return Err(Error::shape(format!(
                "lstm layer: w {:?}, biases {} / {}",
                w.shape(),
                b_input.len(),
                b_hidden.len()
            )));
        }
        Ok(LstmLayer {
            w,
            b_input,
            b_hidden,
            hidden,
        })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn input_size(&self) -> usize {
        self.w.rows() - self.hidden
    }

    pub fn param_count(&self) -> usize {
        self.w.as_slice().len() + self.b_input.len() + self.b_hidden.len()
    }

    fn bias_sum(&self) -> Vec<T> {
        self.b_input
            .iter()
            .zip(&self.b_hidden)
            .map(|(&a, &b)| a + b)
            .collect()
    }
}

/// Gate activations of one step, each `[batch, hidden]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmGates<T = f32> {
    pub forget: Matrix<T>,
    pub input: Matrix<T>,
    pub candidate: Matrix<T>,
    pub output: Matrix<T>,
}

/// Everything one step keeps for the backward pass.
#[derive(Clone, Debug)]
pub(crate) struct LstmStep<T> {
    concat: Matrix<T>,
    gates: LstmGates<T>,
    c_prev: Matrix<T>,
    tanh_c: Matrix<T>,
}

fn step<T: Scalar>(
    concat: &Matrix<T>,
    c_prev: &Matrix<T>,
    p: &LstmLayer<T>,
    bias: &[T],
) -> (LstmGates<T>, Matrix<T>, Matrix<T>, Matrix<T>) {
    let batch = concat.rows();
    let h = p.hidden;
    let g4 = 4 * h;
    let mut pre = Matrix::zeros(batch, g4);
    for r in 0..batch {
        pre.row_mut(r).copy_from_slice(bias);
    }
    gemm_nn(
        batch,
        concat.cols(),
        g4,
        concat.as_slice(),
        concat.cols(),
        p.w.as_slice(),
        g4,
        pre.as_mut_slice(),
        g4,
    );

    let mut forget = Matrix::zeros(batch, h);
    let mut input = Matrix::zeros(batch, h);
    let mut candidate = Matrix::zeros(batch, h);
    let mut output = Matrix::zeros(batch, h);
    let mut c = Matrix::zeros(batch, h);
    let mut tanh_c = Matrix::zeros(batch, h);
    let mut h_new = Matrix::zeros(batch, h);
    for r in 0..batch {
        let z = pre.row(r);
        for j in 0..h {
            let f = sigmoid_scalar(z[j]);
            let i = sigmoid_scalar(z[h + j]);
            let g = z[2 * h + j].tanh();
            let o = sigmoid_scalar(z[3 * h + j]);
            let cv = f * c_prev.get(r, j) + i * g;
            let tc = cv.tanh();
            forget.set(r, j, f);
            input.set(r, j, i);
            candidate.set(r, j, g);
            output.set(r, j, o);
            c.set(r, j, cv);
            tanh_c.set(r, j, tc);
            h_new.set(r, j, o * tc);
        }
    }
    (
        LstmGates {
            forget,
            input,
            candidate,
            output,
        },
        c,
        tanh_c,
        h_new,
    )
}

fn check_state<T: Scalar>(
    x: &Matrix<T>,
    state: &RecurrentState<T>,
    input: usize,
    hidden: usize,
) -> Result<()> {
    if x.cols() != input || state.h.shape() != (x.rows(), hidden) {
        return Err(Error::shape(format!(
            "lstm cell expects x [b, {input}] and h [b, {hidden}], got {:?} and {:?}",
            x.shape(),
            state.h.shape()
        )));
    }
    Ok(())
}

/// Advances one LSTM step:
/// `f, i, o = sigmoid(.)`, `C~ = tanh(.)`, `C_t = f*C_{t-1} + i*C~`,
/// `h_t = o * tanh(C_t)`, every pre-activation being
/// `[h_{t-1} | x_t] w + b_input + b_hidden`.
pub fn lstm_cell<T: Scalar>(
    x_t: &Matrix<T>,
    state: &RecurrentState<T>,
    p: &LstmLayer<T>,
) -> Result<(RecurrentState<T>, LstmGates<T>)> {
    check_state(x_t, state, p.input_size(), p.hidden)?;
    let c_prev = match &state.c {
        Some(c) if c.shape() == state.h.shape() => c.clone(),
        Some(c) => return Err(Error::shape(format!("cell state {:?}", c.shape()))),
        None => Matrix::zeros(x_t.rows(), p.hidden),
    };
    let concat = hconcat(&state.h, x_t)?;
    let (gates, c, _, h) = step(&concat, &c_prev, p, &p.bias_sum());
    Ok((RecurrentState { h, c: Some(c) }, gates))
}

/// Runs a layer over a sequence from zero state. Returns the hidden state
/// at every step and, if `keep`, the per-step trace for backpropagation.
pub(crate) fn layer_forward<T: Scalar>(
    p: &LstmLayer<T>,
    xs: &[Matrix<T>],
    keep: bool,
) -> Result<LayerOutput<T, LstmStep<T>>> {
    let batch = xs.first().map_or(0, Matrix::rows);
    let bias = p.bias_sum();
    let mut h = Matrix::zeros(batch, p.hidden);
    let mut c = Matrix::zeros(batch, p.hidden);
    let mut hs = Vec::with_capacity(xs.len());
    let mut trace = Vec::new();
    for x in xs {
        if x.cols() != p.input_size() || x.rows() != batch {
            return Err(Error::shape(format!(
                "lstm layer input {:?}, expected [{batch}, {}]",
                x.shape(),
                p.input_size()
            )));
        }
        let concat = hconcat(&h, x)?;
        let (gates, c_new, tanh_c, h_new) = step(&concat, &c, p, &bias);
        if keep {
            trace.push(LstmStep {
                concat,
                gates,
                c_prev: c,
                tanh_c,
            });
        }
        c = c_new;
        h = h_new;
        hs.push(h.clone());
    }
    Ok((hs, trace))
}

/// Backpropagation through time for one layer. `dh_ext[t]` is the gradient
/// reaching `h_t` from above. Accumulates parameter gradients into `grad`
/// and returns the gradient for each input step when `need_dx` is set.
pub(crate) fn layer_backward<T: Scalar>(
    p: &LstmLayer<T>,
    trace: &[LstmStep<T>],
    dh_ext: &[Matrix<T>],
    grad: &mut LstmLayer<T>,
    need_dx: bool,
) -> Vec<Matrix<T>> {
    let h = p.hidden;
    let g4 = 4 * h;
    let width = p.w.rows();
    let batch = trace.first().map_or(0, |s| s.concat.rows());
    let da_cols = if need_dx { width } else { h };
    let mut dh_next = Matrix::zeros(batch, h);
    let mut dc_next = Matrix::<T>::zeros(batch, h);
    let mut dxs = vec![Matrix::zeros(0, 0); if need_dx { trace.len() } else { 0 }];
    let one = T::one();

    for (t, s) in trace.iter().enumerate().rev() {
        let mut dz = Matrix::zeros(batch, g4);
        for r in 0..batch {
            for j in 0..h {
                let dh = dh_ext[t].get(r, j) + dh_next.get(r, j);
                let f = s.gates.forget.get(r, j);
                let i = s.gates.input.get(r, j);
                let g = s.gates.candidate.get(r, j);
                let o = s.gates.output.get(r, j);
                let tc = s.tanh_c.get(r, j);
                let d_o = dh * tc;
                let dc = dc_next.get(r, j) + dh * o * (one - tc * tc);
                let df = dc * s.c_prev.get(r, j);
                let di = dc * g;
                let dg = dc * i;
                dc_next.set(r, j, dc * f);
                let row = dz.row_mut(r);
                row[j] = df * f * (one - f);
                row[h + j] = di * i * (one - i);
                row[2 * h + j] = dg * (one - g * g);
                row[3 * h + j] = d_o * o * (one - o);
            }
        }
        gemm_tn(
            width,
            batch,
            g4,
            s.concat.as_slice(),
            width,
            dz.as_slice(),
            g4,
            grad.w.as_mut_slice(),
            g4,
        );
        for r in 0..batch {
            for (k, &v) in dz.row(r).iter().enumerate() {
                grad.b_input[k] += v;
                grad.b_hidden[k] += v;
            }
        }
        let mut da = Matrix::zeros(batch, da_cols);
        gemm_nt(
            batch,
            g4,
            da_cols,
            dz.as_slice(),
            g4,
            p.w.as_slice(),
            g4,
            da.as_mut_slice(),
            da_cols,
        );
        for r in 0..batch {
            dh_next.row_mut(r).copy_from_slice(&da.row(r)[..h]);
        }
        if need_dx {
            let mut dx = Matrix::zeros(batch, width - h);
            for r in 0..batch {
                dx.row_mut(r).copy_from_slice(&da.row(r)[h..]);
            }
            dxs[t] = dx;
        }
    }
    dxs
}
