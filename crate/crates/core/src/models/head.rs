use rand::{Rng, RngCore};

use crate::numeric::{sigmoid_scalar, Matrix, Scalar};

/// Linear map from the pooled or final hidden features to one logit.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadParameters<T = f32> {
    pub w: Vec<T>,
    pub b: T,
}

impl<T: Scalar> HeadParameters<T> {
    pub fn zeros(features: usize) -> Self {
        HeadParameters {
            w: vec![T::zero(); features],
            b: T::zero(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.w.len() + 1
    }

    pub(crate) fn probabilities(&self, features: &Matrix<T>) -> Vec<T> {
        (0..features.rows())
            .map(|r| {
                let logit = features
                    .row(r)
                    .iter()
                    .zip(&self.w)
                    .fold(self.b, |acc, (&x, &w)| acc + x * w);
                sigmoid_scalar(logit)
            })
            .collect()
    }

    /// Accumulates head gradients from `dlogit` and returns the gradient
    /// with respect to the input features.
    pub(crate) fn backward(
        &self,
        features: &Matrix<T>,
        dlogit: &[T],
        grad: &mut HeadParameters<T>,
    ) -> Matrix<T> {
        let mut dfeat = Matrix::zeros(features.rows(), features.cols());
        for (r, &d) in dlogit.iter().enumerate() {
            grad.b += d;
            for (j, (&x, dst)) in features.row(r).iter().zip(dfeat.row_mut(r)).enumerate() {
                grad.w[j] += d * x;
                *dst = d * self.w[j];
            }
        }
        dfeat
    }
}

/// Inverted dropout mask: each entry is 0 with probability `p`, otherwise
/// `1 / (1 - p)`.
pub(crate) fn dropout_mask<T: Scalar>(
    rows: usize,
    cols: usize,
    p: f32,
    rng: &mut dyn RngCore,
) -> Matrix<T> {
    let keep = T::one() / T::from_f32(1.0 - p).unwrap();
    let data = (0..rows * cols)
        .map(|_| {
            if rng.random::<f32>() < p {
                T::zero()
            } else {
                keep
            }
        })
        .collect();
    Matrix::from_vec(rows, cols, data).expect("mask shape")
}

/// Applies dropout with probability `p` when `training`, identity otherwise.
pub fn dropout_apply<T: Scalar>(
    h: &Matrix<T>,
    p: f32,
    training: bool,
    rng: &mut dyn RngCore,
) -> Matrix<T> {
    if !training || p == 0.0 {
        return h.clone();
    }
    let mask = dropout_mask(h.rows(), h.cols(), p, rng);
    crate::numeric::hadamard(h, &mask).expect("same shape")
}
