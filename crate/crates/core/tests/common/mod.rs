//! Reference implementations used as test oracles. They are deliberately
//! naive scalar loops that share no code with the library kernels.
#![allow(dead_code)]

use std::sync::Mutex;

use intentseq_core::dataset::{build_windows, Window};
use intentseq_core::synthgen::{generate_videos, root_x, CorpusParams};
use intentseq_core::{Matrix, Model, ModelKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Serializes CPU-heavy tests so timing-sensitive checks are not skewed.
pub static HEAVY: Mutex<()> = Mutex::new(());

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `sum_k h_k w[k][col] + sum_k x_k w[H + k][col] + b[col]` in f64.
fn affine(h: &[f64], x: &[f64], w: &Matrix<f32>, b: &[f64], col: usize) -> f64 {
    let mut acc = b[col];
    for (k, hk) in h.iter().enumerate() {
        acc += hk * f64::from(w.get(k, col));
    }
    for (k, xk) in x.iter().enumerate() {
        acc += xk * f64::from(w.get(h.len() + k, col));
    }
    acc
}

/// One LSTM step for a single sample. Gate columns are laid out
/// `[forget | input | candidate | output]`, each `H` wide.
pub fn lstm_step(
    x: &[f64],
    h: &[f64],
    c: &[f64],
    w: &Matrix<f32>,
    b: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = h.len();
    let mut h_new = vec![0.0; n];
    let mut c_new = vec![0.0; n];
    for j in 0..n {
        let f = sigmoid(affine(h, x, w, b, j));
        let i = sigmoid(affine(h, x, w, b, n + j));
        let g = affine(h, x, w, b, 2 * n + j).tanh();
        let o = sigmoid(affine(h, x, w, b, 3 * n + j));
        c_new[j] = f * c[j] + i * g;
        h_new[j] = o * c_new[j].tanh();
    }
    (h_new, c_new)
}

/// One GRU step for a single sample, columns `[reset | update | candidate]`.
/// The reset gate scales the previous state before the candidate's affine map.
pub fn gru_step(x: &[f64], h: &[f64], w: &Matrix<f32>, b: &[f64]) -> Vec<f64> {
    let n = h.len();
    let r: Vec<f64> = (0..n).map(|j| sigmoid(affine(h, x, w, b, j))).collect();
    let z: Vec<f64> = (0..n).map(|j| sigmoid(affine(h, x, w, b, n + j))).collect();
    let rh: Vec<f64> = h.iter().zip(&r).map(|(a, b)| a * b).collect();
    (0..n)
        .map(|j| {
            let cand = affine(&rh, x, w, b, 2 * n + j).tanh();
            (1.0 - z[j]) * cand + z[j] * h[j]
        })
        .collect()
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counting half.
pub fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Area under the ROC curve built by sweeping a threshold over every
/// distinct score (trapezoid rule between successive operating points).
pub fn threshold_sweep_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let neg = labels.len() as f64 - pos;
    let mut cuts: Vec<f64> = scores.to_vec();
    cuts.sort_by(|a, b| b.partial_cmp(a).unwrap());
    cuts.dedup();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let (mut tp, mut fp) = (0.0, 0.0);
    let (mut prev_tpr, mut prev_fpr) = (0.0, 0.0);
    let mut area = 0.0;
    let mut k = 0;
    for cut in cuts {
        while k < order.len() && scores[order[k]] >= cut {
            if labels[order[k]] == 1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            k += 1;
        }
        let (tpr, fpr) = (tp / pos, fp / neg);
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    area
}

/// Labels after a reversal at `idx`, written out element by element.
pub fn relabel_by_hand(labels: &[u8], idx: usize) -> Vec<u8> {
    let mut out = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if i < idx {
            out.push(l);
        } else {
            out.push(0);
        }
    }
    out
}

/// Mean lateral speed of the hip centre over a window.
pub fn window_speed(w: &Window) -> f64 {
    let f = &w.features;
    let first = root_x(f.row(0).try_into().unwrap());
    let last = root_x(f.row(f.rows() - 1).try_into().unwrap());
    f64::from(last - first).abs() / (f.rows() - 1) as f64
}

pub fn corpus_windows(params: &CorpusParams, seq_len: usize) -> Vec<Window> {
    generate_videos(params)
        .unwrap()
        .iter()
        .flat_map(|(_, v)| build_windows(v, seq_len))
        .collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f32> {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-1.0f32..1.0))
        .collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub fn random_windows64(
    rng: &mut ChaCha8Rng,
    n: usize,
    rows: usize,
    cols: usize,
) -> Vec<Matrix<f64>> {
    (0..n)
        .map(|_| random_matrix(rng, rows, cols).cast::<f64>())
        .collect()
}

pub fn is_all_zero(model: &Model<f32>) -> bool {
    model.flatten().iter().all(|&v| v == 0.0)
}

pub const KINDS: [ModelKind; 3] = ModelKind::ALL;
