//! Per-pedestrian streaming prediction and single-window latency measurement.

use std::hint::black_box;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::COORDS_PER_FRAME;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::numeric::Matrix;
use crate::training::DEFAULT_THRESHOLD;

/// Ring buffer of the latest `seq_len` frames for one tracked pedestrian.
///
/// Once the buffer is full every push scores the buffered window and returns
/// the probability that the *next* frame shows crossing intent, matching the
/// labeling of offline windows.
pub struct StreamState {
    model: Arc<Model<f32>>,
    seq_len: usize,
    ring: Vec<f32>,
    /// Slot the next frame is written to.
    head: usize,
    buffered: usize,
    frames_seen: u64,
    window: Matrix<f32>,
}

impl StreamState {
    pub fn new(model: Arc<Model<f32>>) -> Self {
        let seq_len = model.config.seq_len;
        let width = model.config.input_size;
        StreamState {
            model,
            seq_len,
            ring: vec![0.0; seq_len * width],
            head: 0,
            buffered: 0,
            frames_seen: 0,
            window: Matrix::zeros(seq_len, width),
        }
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    pub fn buffered(&self) -> usize {
        self.buffered
    }

    pub fn reset(&mut self) {
        self.head = 0;
        self.buffered = 0;
        self.frames_seen = 0;
    }

    /// Appends one frame, evicting the oldest once `seq_len` are held.
    /// Returns `None` during warmup.
    pub fn push(&mut self, frame: &[f32]) -> Result<Option<f32>> {
        let width = self.model.config.input_size;
        if frame.len() != width {
            return Err(Error::WrongDimension {
                expected: width,
                got: frame.len(),
            });
        }
        self.ring[self.head * width..(self.head + 1) * width].copy_from_slice(frame);
        self.head = (self.head + 1) % self.seq_len;
        self.buffered = (self.buffered + 1).min(self.seq_len);
        self.frames_seen += 1;
        if self.buffered < self.seq_len {
            return Ok(None);
        }
        // oldest frame sits at `head` once the ring is full
        let dst = self.window.as_mut_slice();
        let split = self.head * width;
        let tail = self.ring.len() - split;
        dst[..tail].copy_from_slice(&self.ring[split..]);
        dst[tail..].copy_from_slice(&self.ring[..split]);
        let p = self.model.predict(&[&self.window])?;
        Ok(Some(p[0]))
    }
}

/// Free-function form of [`StreamState::push`].
pub fn stream_push(state: &mut StreamState, frame: &[f32]) -> Result<Option<f32>> {
    state.push(frame)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamPrediction {
    pub frame_index: usize,
    pub probability: f32,
    pub label_predicted: u8,
}

/// Replays a recorded frame sequence through a fresh stream. `frame_index`
/// is the index of the frame that completed the window.
pub fn replay(
    model: Arc<Model<f32>>,
    frames: &[[f32; COORDS_PER_FRAME]],
) -> Result<Vec<StreamPrediction>> {
    let mut state = StreamState::new(model);
    let mut out = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        if let Some(p) = state.push(f)? {
            out.push(StreamPrediction {
                frame_index: i,
                probability: p,
                label_predicted: u8::from(f64::from(p) > DEFAULT_THRESHOLD),
            });
        }
    }
    Ok(out)
}

pub const PREDICTIONS_HEADER: &str = "frame_index,probability,label_predicted";

pub fn predictions_csv(preds: &[StreamPrediction]) -> String {
    let mut s = String::from(PREDICTIONS_HEADER);
    s.push('\n');
    for p in preds {
        s.push_str(&format!(
            "{},{},{}\n",
            p.frame_index, p.probability, p.label_predicted
        ));
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatencyStats {
    pub reps: usize,
    pub mean: Duration,
    pub p50: Duration,
    pub p99: Duration,
}

pub const MIN_BENCH_REPS: usize = 100;

/// Times `reps` eval-mode forward passes over single random windows.
/// A warmup of `reps / 10` (at least 10) passes runs first and is not
/// recorded.
pub fn bench_latency(model: &Model<f32>, reps: usize, seed: u64) -> Result<LatencyStats> {
    if reps < MIN_BENCH_REPS {
        return Err(Error::InvalidConfig(format!(
            "bench needs at least {MIN_BENCH_REPS} reps, got {reps}"
        )));
    }
    let (seq_len, width) = (model.config.seq_len, model.config.input_size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<Matrix<f32>> = (0..16)
        .map(|_| {
            let data = (0..seq_len * width).map(|_| rng.random::<f32>()).collect();
            Matrix::from_vec(seq_len, width, data).expect("window shape")
        })
        .collect();

    for w in pool.iter().cycle().take((reps / 10).max(10)) {
        black_box(model.predict(&[black_box(w)])?);
    }
    let mut samples = Vec::with_capacity(reps);
    for w in pool.iter().cycle().take(reps) {
        let start = Instant::now();
        black_box(model.predict(&[black_box(w)])?);
        samples.push(start.elapsed());
    }
    samples.sort_unstable();
    let total: Duration = samples.iter().sum();
    let pct = |q: f64| samples[((q * (reps - 1) as f64).round() as usize).min(reps - 1)];
    Ok(LatencyStats {
        reps,
        mean: total / reps as u32,
        p50: pct(0.50),
        p99: pct(0.99),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ModelConfig, ModelKind};

    fn small(kind: ModelKind) -> Arc<Model<f32>> {
        let cfg = ModelConfig {
            hidden: 4,
            ..ModelConfig::standard(kind)
        };
        Arc::new(Model::init(cfg, 3).unwrap())
    }

    fn frame(v: f32) -> Vec<f32> {
        (0..COORDS_PER_FRAME).map(|i| v + i as f32 * 1e-3).collect()
    }

    #[test]
    fn warmup_then_one_prediction_per_frame() {
        let mut s = StreamState::new(small(ModelKind::Gru));
        let emitted: Vec<usize> = (1..=20)
            .filter_map(|n| s.push(&frame(n as f32 * 0.01)).unwrap().map(|_| n))
            .collect();
        assert_eq!(emitted, (15..=20).collect::<Vec<_>>());

        let mut s = StreamState::new(small(ModelKind::Gru));
        let n = (0..14)
            .filter(|&i| s.push(&frame(i as f32)).unwrap().is_some())
            .count();
        assert_eq!(n, 0);
        assert_eq!(s.buffered(), 14);
    }

    #[test]
    fn same_window_same_probability() {
        let model = small(ModelKind::Lstm);
        let mut a = StreamState::new(model.clone());
        let mut b = StreamState::new(model);
        // b sees unrelated frames first; the last 15 agree
        for i in 0..7 {
            b.push(&frame(5.0 + i as f32)).unwrap();
        }
        let mut pa = None;
        let mut pb = None;
        for i in 0..15 {
            pa = a.push(&frame(i as f32 * 0.1)).unwrap();
            pb = b.push(&frame(i as f32 * 0.1)).unwrap();
        }
        assert_eq!(pa.unwrap().to_bits(), pb.unwrap().to_bits());
    }

    #[test]
    fn rejects_wrong_width() {
        let mut s = StreamState::new(small(ModelKind::Cnn1d));
        assert!(matches!(
            s.push(&[0.0; 10]),
            Err(Error::WrongDimension {
                expected: 66,
                got: 10
            })
        ));
    }

    #[test]
    fn bench_order_statistics() {
        let stats = bench_latency(&small(ModelKind::Cnn1d), 200, 1).unwrap();
        assert_eq!(stats.reps, 200);
        assert!(stats.p50 <= stats.p99);
        assert!(bench_latency(&small(ModelKind::Cnn1d), 50, 1).is_err());
    }
}
