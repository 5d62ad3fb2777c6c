mod common;

use std::sync::Arc;

use intentseq_core::dataset::{apply_backtrack_relabel, build_windows, COORDS_PER_FRAME};
use intentseq_core::inference::StreamState;
use intentseq_core::training::{accuracy, roc_auc};
use intentseq_core::{LabeledVideo, Model, ModelConfig, ModelKind};
use proptest::prelude::*;

use common::{pairwise_auc, relabel_by_hand, threshold_sweep_auc};

fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (2usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec((0u8..12).prop_map(|v| f64::from(v) / 4.0), n),
            prop::collection::vec(0u8..2, n),
        )
            .prop_filter("both classes", |(_, y)| y.contains(&0) && y.contains(&1))
    })
}

proptest! {
    #[test]
    fn auc_matches_pairwise_counting((p, y) in scored_labels()) {
        prop_assert_eq!(roc_auc(&p, &y).unwrap(), pairwise_auc(&p, &y));
    }

    #[test]
    fn auc_matches_threshold_sweep((p, y) in scored_labels()) {
        prop_assert!((roc_auc(&p, &y).unwrap() - threshold_sweep_auc(&p, &y)).abs() < 1e-12);
    }

    #[test]
    fn auc_flips_with_scores((p, y) in scored_labels()) {
        let neg: Vec<f64> = p.iter().map(|v| -v).collect();
        let a = roc_auc(&p, &y).unwrap();
        prop_assert!((a + roc_auc(&neg, &y).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn accuracy_in_unit_interval((p, y) in scored_labels()) {
        let a = accuracy(&p, &y, 0.5).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn window_count_law(n in 0usize..80, seq_len in 1usize..25) {
        let video = LabeledVideo::from_parts("v", vec![[0.5; COORDS_PER_FRAME]; n], &vec![0; n]).unwrap();
        let windows = build_windows(&video, seq_len);
        prop_assert_eq!(windows.len(), n.saturating_sub(seq_len));
        for (k, w) in windows.iter().enumerate() {
            prop_assert_eq!(w.source.start, k);
            prop_assert_eq!(w.features.shape(), (seq_len, COORDS_PER_FRAME));
        }
    }

    #[test]
    fn relabel_matches_rule(labels in prop::collection::vec(0u8..2, 1..100), pick in 0.0f64..1.0) {
        let idx = ((labels.len() as f64) * pick) as usize;
        let video = LabeledVideo::from_parts("v", vec![[0.0; COORDS_PER_FRAME]; labels.len()], &labels).unwrap();
        let out = apply_backtrack_relabel(video, idx).unwrap();
        prop_assert_eq!(out.labels(), relabel_by_hand(&labels, idx));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stream_count_law(n in 0usize..40) {
        let model = Arc::new(Model::<f32>::init(ModelConfig::standard(ModelKind::Cnn1d), 0).unwrap());
        let mut state = StreamState::new(model);
        let mut emitted = 0;
        for k in 0..n {
            let frame = [k as f32 / 40.0; COORDS_PER_FRAME];
            if state.push(&frame).unwrap().is_some() {
                emitted += 1;
            }
            prop_assert!(state.buffered() <= 15);
        }
        prop_assert_eq!(emitted, (n + 1).saturating_sub(15));
    }
}
