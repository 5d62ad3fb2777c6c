use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::Model;
use crate::numeric::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::InvalidConfig(format!("unknown optimizer {other:?}"))),
        }
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Plain SGD or Adam with bias-corrected moments. Moment buffers are
/// allocated on the first step.
#[derive(Clone, Debug)]
pub struct Optimizer<T = f32> {
    kind: OptimizerKind,
    lr: f64,
    step: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(kind: OptimizerKind, lr: f64) -> Self {
        Optimizer {
            kind,
            lr,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut Model<T>, grads: &Model<T>) -> Result<()> {
        if params.config != grads.config {
            return Err(Error::shape("gradient belongs to a different model config"));
        }
        let grad_tensors = grads.tensors();
        if grad_tensors
            .iter()
            .any(|t| t.data.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFiniteGradient);
        }
        let mut slices = params.param_slices_mut();
        if slices.len() != grad_tensors.len()
            || slices
                .iter()
                .zip(&grad_tensors)
                .any(|(p, g)| p.len() != g.data.len())
        {
            return Err(Error::shape("parameter and gradient layouts differ"));
        }
        self.step += 1;
        let lr = T::from_f64_lossy(self.lr);
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in slices.iter_mut().zip(&grad_tensors) {
                    for (w, &gv) in p.iter_mut().zip(g.data) {
                        *w -= lr * gv;
                    }
                }
            }
            OptimizerKind::Adam => {
                if self.m.is_empty() {
                    self.m = grad_tensors
                        .iter()
                        .map(|g| vec![T::zero(); g.data.len()])
                        .collect();
                    self.v = self.m.clone();
                }
                let t = self.step as i32;
                let b1 = T::from_f64_lossy(ADAM_BETA1);
                let b2 = T::from_f64_lossy(ADAM_BETA2);
                let c1 = T::from_f64_lossy(1.0 - ADAM_BETA1.powi(t));
                let c2 = T::from_f64_lossy(1.0 - ADAM_BETA2.powi(t));
                let eps = T::from_f64_lossy(ADAM_EPS);
                let one = T::one();
                for (k, (p, g)) in slices.iter_mut().zip(&grad_tensors).enumerate() {
                    let (m, v) = (&mut self.m[k], &mut self.v[k]);
                    for (i, (w, &gv)) in p.iter_mut().zip(g.data).enumerate() {
                        m[i] = b1 * m[i] + (one - b1) * gv;
                        v[i] = b2 * v[i] + (one - b2) * gv * gv;
                        let m_hat = m[i] / c1;
                        let v_hat = v[i] / c2;
                        *w -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}
