use crate::error::{Error, Result};
use crate::numeric::kernels::{gemm_nn, gemm_nt, gemm_tn};
use crate::numeric::{hconcat, sigmoid_scalar, Matrix, Scalar};

use super::{LayerOutput, RecurrentState};

/// One GRU layer. `w` has `hidden + input` rows (hidden first) and three
/// column blocks ordered reset, update, candidate. The candidate block is
/// applied to `[r_t * h_{t-1} | x_t]`, the reset being taken before the
/// product.
#[derive(Clone, Debug, PartialEq)]
pub struct GruLayer<T = f32> {
    pub w: Matrix<T>,
    pub b_input: Vec<T>,
    pub b_hidden: Vec<T>,
    hidden: usize,
}

impl<T: Scalar> GruLayer<T> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        GruLayer {
            w: Matrix::zeros(hidden + input, 3 * hidden),
            b_input: vec![T::zero(); 3 * hidden],
            b_hidden: vec![T::zero(); 3 * hidden],
            hidden,
        }
    }

    pub fn from_parts(w: Matrix<T>, b_input: Vec<T>, b_hidden: Vec<T>) -> Result<Self> {
        let hidden = w.cols() / 3;
        if w.cols() != 3 * hidden
            || w.rows() < hidden
            || b_input.len() != w.cols()
            || b_hidden.len() != w.cols()
        {
            return Err(Error::shape(format!(
                "gru layer: w {:?}, biases {} / {}",
                w.shape(),
                b_input.len(),
                b_hidden.len()
            )));
        }
        Ok(GruLayer {
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

#[derive(Clone, Debug, PartialEq)]
pub struct GruGates<T = f32> {
    pub reset: Matrix<T>,
    pub update: Matrix<T>,
    pub candidate: Matrix<T>,
}

#[derive(Clone, Debug)]
pub(crate) struct GruStep<T> {
    concat: Matrix<T>,
    reset_concat: Matrix<T>,
    h_prev: Matrix<T>,
    gates: GruGates<T>,
}

fn step<T: Scalar>(
    h_prev: &Matrix<T>,
    x: &Matrix<T>,
    p: &GruLayer<T>,
    bias: &[T],
) -> Result<(GruStep<T>, Matrix<T>)> {
    let batch = x.rows();
    let h = p.hidden;
    let g3 = 3 * h;
    let width = p.w.rows();
    let concat = hconcat(h_prev, x)?;

    let mut rz = Matrix::zeros(batch, 2 * h);
    for r in 0..batch {
        rz.row_mut(r).copy_from_slice(&bias[..2 * h]);
    }
    gemm_nn(
        batch,
        width,
        2 * h,
        concat.as_slice(),
        width,
        p.w.as_slice(),
        g3,
        rz.as_mut_slice(),
        2 * h,
    );
    let mut reset = Matrix::zeros(batch, h);
    let mut update = Matrix::zeros(batch, h);
    let mut reset_concat = concat.clone();
    for r in 0..batch {
        for j in 0..h {
            let rv = sigmoid_scalar(rz.get(r, j));
            reset.set(r, j, rv);
            update.set(r, j, sigmoid_scalar(rz.get(r, h + j)));
            reset_concat.set(r, j, rv * h_prev.get(r, j));
        }
    }

    let mut cand = Matrix::zeros(batch, h);
    for r in 0..batch {
        cand.row_mut(r).copy_from_slice(&bias[2 * h..]);
    }
    gemm_nn(
        batch,
        width,
        h,
        reset_concat.as_slice(),
        width,
        &p.w.as_slice()[2 * h..],
        g3,
        cand.as_mut_slice(),
        h,
    );
    let one = T::one();
    let mut h_new = Matrix::zeros(batch, h);
    for r in 0..batch {
        for j in 0..h {
            let n = cand.get(r, j).tanh();
            cand.set(r, j, n);
            let z = update.get(r, j);
            h_new.set(r, j, (one - z) * n + z * h_prev.get(r, j));
        }
    }
    Ok((
        GruStep {
            concat,
            reset_concat,
            h_prev: h_prev.clone(),
            gates: GruGates {
                reset,
                update,
                candidate: cand,
            },
        },
        h_new,
    ))
}

/// Advances one GRU step:
/// `r, z = sigmoid([h_{t-1} | x_t] w + b)`,
/// `h~ = tanh([r * h_{t-1} | x_t] w_h + b_h)`,
/// `h_t = (1 - z) * h~ + z * h_{t-1}`.
pub fn gru_cell<T: Scalar>(
    x_t: &Matrix<T>,
    state: &RecurrentState<T>,
    p: &GruLayer<T>,
) -> Result<(RecurrentState<T>, GruGates<T>)> {
    if x_t.cols() != p.input_size() || state.h.shape() != (x_t.rows(), p.hidden) {
        return Err(Error::shape(format!(
            "gru cell expects x [b, {}] and h [b, {}], got {:?} and {:?}",
            p.input_size(),
            p.hidden,
            x_t.shape(),
            state.h.shape()
        )));
    }
    let (s, h) = step(&state.h, x_t, p, &p.bias_sum())?;
    Ok((RecurrentState { h, c: None }, s.gates))
}

pub(crate) fn layer_forward<T: Scalar>(
    p: &GruLayer<T>,
    xs: &[Matrix<T>],
    keep: bool,
) -> Result<LayerOutput<T, GruStep<T>>> {
    let batch = xs.first().map_or(0, Matrix::rows);
    let bias = p.bias_sum();
    let mut h = Matrix::zeros(batch, p.hidden);
    let mut hs = Vec::with_capacity(xs.len());
    let mut trace = Vec::new();
    for x in xs {
        if x.cols() != p.input_size() || x.rows() != batch {
            return Err(Error::shape(format!(
                "gru layer input {:?}, expected [{batch}, {}]",
                x.shape(),
                p.input_size()
            )));
        }
        let (s, h_new) = step(&h, x, p, &bias)?;
        if keep {
            trace.push(s);
        }
        h = h_new;
        hs.push(h.clone());
    }
    Ok((hs, trace))
}

pub(crate) fn layer_backward<T: Scalar>(
    p: &GruLayer<T>,
    trace: &[GruStep<T>],
    dh_ext: &[Matrix<T>],
    grad: &mut GruLayer<T>,
    need_dx: bool,
) -> Vec<Matrix<T>> {
    let h = p.hidden;
    let g3 = 3 * h;
    let width = p.w.rows();
    let batch = trace.first().map_or(0, |s| s.concat.rows());
    let da_cols = if need_dx { width } else { h };
    let one = T::one();
    let mut dh_next = Matrix::<T>::zeros(batch, h);
    let mut dxs = vec![Matrix::zeros(0, 0); if need_dx { trace.len() } else { 0 }];

    for (t, s) in trace.iter().enumerate().rev() {
        let g = &s.gates;
        let mut dh_prev = Matrix::zeros(batch, h);
        let mut dn_pre = Matrix::zeros(batch, h);
        let mut dz = Matrix::zeros(batch, h);
        for r in 0..batch {
            for j in 0..h {
                let dh = dh_ext[t].get(r, j) + dh_next.get(r, j);
                let z = g.update.get(r, j);
                let n = g.candidate.get(r, j);
                let hp = s.h_prev.get(r, j);
                dn_pre.set(r, j, dh * (one - z) * (one - n * n));
                dz.set(r, j, dh * (hp - n));
                dh_prev.set(r, j, dh * z);
            }
        }

        // candidate block
        gemm_tn(
            width,
            batch,
            h,
            s.reset_concat.as_slice(),
            width,
            dn_pre.as_slice(),
            h,
            &mut grad.w.as_mut_slice()[2 * h..],
            g3,
        );
        let mut da2 = Matrix::zeros(batch, da_cols);
        gemm_nt(
            batch,
            h,
            da_cols,
            dn_pre.as_slice(),
            h,
            &p.w.as_slice()[2 * h..],
            g3,
            da2.as_mut_slice(),
            da_cols,
        );

        // reset and update blocks
        let mut drz = Matrix::zeros(batch, 2 * h);
        for r in 0..batch {
            for j in 0..h {
                let d_rh = da2.get(r, j);
                let rv = g.reset.get(r, j);
                let hp = s.h_prev.get(r, j);
                let dr = d_rh * hp;
                dh_prev.set(r, j, dh_prev.get(r, j) + d_rh * rv);
                let z = g.update.get(r, j);
                drz.set(r, j, dr * rv * (one - rv));
                drz.set(r, h + j, dz.get(r, j) * z * (one - z));
            }
        }
        gemm_tn(
            width,
            batch,
            2 * h,
            s.concat.as_slice(),
            width,
            drz.as_slice(),
            2 * h,
            grad.w.as_mut_slice(),
            g3,
        );
        let mut da = Matrix::zeros(batch, da_cols);
        gemm_nt(
            batch,
            2 * h,
            da_cols,
            drz.as_slice(),
            2 * h,
            p.w.as_slice(),
            g3,
            da.as_mut_slice(),
            da_cols,
        );

        for r in 0..batch {
            for (k, &v) in drz.row(r).iter().enumerate() {
                grad.b_input[k] += v;
                grad.b_hidden[k] += v;
            }
            for (k, &v) in dn_pre.row(r).iter().enumerate() {
                grad.b_input[2 * h + k] += v;
                grad.b_hidden[2 * h + k] += v;
            }
            for j in 0..h {
                dh_prev.set(r, j, dh_prev.get(r, j) + da.get(r, j));
            }
        }
        dh_next = dh_prev;
        if need_dx {
            let mut dx = Matrix::zeros(batch, width - h);
            for r in 0..batch {
                for (k, dst) in dx.row_mut(r).iter_mut().enumerate() {
                    *dst = da.get(r, h + k) + da2.get(r, h + k);
                }
            }
            dxs[t] = dx;
        }
    }
    dxs
}
