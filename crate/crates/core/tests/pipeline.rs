mod common;

use std::fs;
use std::sync::Arc;

use intentseq_core::dataset::{
    build_windows, class_balance_stats, load_corpus_dir, load_video_csv, read_landmark_rows,
    split_dataset, SplitSpec,
};
use intentseq_core::inference::{predictions_csv, replay, PREDICTIONS_HEADER};
use intentseq_core::synthgen::{generate_corpus, CorpusParams, Difficulty, MANIFEST_HEADER};
use intentseq_core::training::{
    evaluate, load_checkpoint, save_checkpoint, train, write_metrics_csv, TrainConfig,
};
use intentseq_core::{ModelConfig, ModelKind};

fn small_corpus(difficulty: Difficulty) -> (tempfile::TempDir, CorpusParams) {
    let dir = tempfile::tempdir().unwrap();
    let params = CorpusParams {
        n_videos: 8,
        frames: 90,
        seed: 3,
        difficulty,
    };
    generate_corpus(&params, dir.path()).unwrap();
    (dir, params)
}

#[test]
fn corpus_files_round_trip() {
    for difficulty in [Difficulty::Easy, Difficulty::Hard] {
        let (dir, params) = small_corpus(difficulty);
        let videos = load_corpus_dir(dir.path()).unwrap();
        assert_eq!(videos.len(), params.n_videos);
        for v in &videos {
            assert_eq!(v.len(), params.frames);
            for f in &v.frames {
                assert!(f.label <= 1);
                assert!(f.coords.iter().all(|c| (0.0..=1.0).contains(c)));
            }
        }
        let manifest = fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
        assert!(manifest.starts_with(MANIFEST_HEADER));
        assert_eq!(manifest.lines().count(), params.n_videos + 1);
    }
}

#[test]
fn easy_corpus_is_not_single_class() {
    let (dir, _) = small_corpus(Difficulty::Easy);
    let windows: Vec<_> = load_corpus_dir(dir.path())
        .unwrap()
        .iter()
        .flat_map(|v| build_windows(v, 15))
        .collect();
    let balance = class_balance_stats(&windows);
    assert!(balance.positive > 0 && balance.negative > 0);
}

#[test]
fn replay_ignores_label_column() {
    let (dir, _) = small_corpus(Difficulty::Hard);
    let path = dir.path().join("video_1.csv");
    let rows = read_landmark_rows(&path, false).unwrap();
    let video = load_video_csv(&path, "video_1").unwrap();
    assert_eq!(rows.coords.len(), video.len());
    let model =
        Arc::new(intentseq_core::Model::init(ModelConfig::standard(ModelKind::Gru), 1).unwrap());
    let preds = replay(model, &rows.coords).unwrap();
    assert_eq!(preds.len(), video.len() - 14);
    assert_eq!(preds[0].frame_index, 14);
    let csv = predictions_csv(&preds);
    assert!(csv.starts_with(PREDICTIONS_HEADER));
    assert_eq!(csv.lines().count(), preds.len() + 1);
}

#[test]
fn train_save_evaluate() {
    let _guard = common::HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let (dir, _) = small_corpus(Difficulty::Easy);
    let windows: Vec<_> = load_corpus_dir(dir.path())
        .unwrap()
        .iter()
        .flat_map(|v| build_windows(v, 15))
        .collect();
    let spec = SplitSpec {
        seed: 5,
        ..SplitSpec::default()
    };
    let split = split_dataset(windows, &spec).unwrap();
    let cfg = TrainConfig {
        epochs: 3,
        ..TrainConfig::default()
    };
    let out = train(
        &split.train,
        &split.val,
        &ModelConfig::standard(ModelKind::Cnn1d),
        &cfg,
    )
    .unwrap();
    assert_eq!(out.history.len(), 3);
    let best = out
        .history
        .iter()
        .map(|r| r.val_auc)
        .fold(f64::MIN, f64::max);
    assert_eq!(out.checkpoint.best_val_auc, best);

    let ckpt_path = dir.path().join("m.ckpt");
    save_checkpoint(&out.checkpoint, &ckpt_path).unwrap();
    let metrics_path = dir.path().join("m.csv");
    write_metrics_csv(&out.history, &metrics_path).unwrap();
    assert_eq!(
        fs::read_to_string(&metrics_path).unwrap().lines().count(),
        4
    );

    let loaded = load_checkpoint(&ckpt_path).unwrap();
    let report = evaluate(&loaded, &split.test).unwrap();
    assert_eq!(report.windows, split.test.len());
    assert!((0.0..=1.0).contains(&report.accuracy));
    assert!(report.to_string().contains("CNN1D"));
}
