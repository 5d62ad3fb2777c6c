//! Landmark CSV ingestion, backtrack relabeling, sliding windows and
//! train/validation/test splitting.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Pose keypoints per frame.
pub const NUM_LANDMARKS: usize = 33;
/// Values per frame: (x, y) for each keypoint, depth is never stored.
pub const COORDS_PER_FRAME: usize = NUM_LANDMARKS * 2;
pub const DEFAULT_SEQ_LEN: usize = 15;
pub const DEFAULT_FPS: f32 = 30.0;

pub type Coords = [f32; COORDS_PER_FRAME];

#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkFrame {
    pub frame_index: usize,
    /// `x0, y0, x1, y1, ..., x32, y32` in normalized image coordinates.
    pub coords: Coords,
    pub label: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVideo {
    pub video_id: String,
    pub fps: f32,
    pub frames: Vec<LandmarkFrame>,
}

impl LabeledVideo {
    /// Builds a video from per-frame coordinates and labels, numbering frames from zero.
    pub fn from_parts(
        video_id: impl Into<String>,
        coords: Vec<Coords>,
        labels: &[u8],
    ) -> Result<Self> {
        if coords.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: coords.len(),
                right: labels.len(),
            });
        }
        let frames = coords
            .into_iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (coords, &label))| {
                if label > 1 {
                    return Err(Error::NonBinaryLabel {
                        row: i,
                        value: label.to_string(),
                    });
                }
                Ok(LandmarkFrame {
                    frame_index: i,
                    coords,
                    label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledVideo {
            video_id: video_id.into(),
            fps: DEFAULT_FPS,
            frames,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.frames.iter().map(|f| f.label).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WindowSource {
    pub video_id: String,
    pub start: usize,
}

/// `seq_len` consecutive frames and the label of the frame right after them.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    /// Rows are frames `start..start + seq_len`, columns the 66 coordinates.
    pub features: Matrix<f32>,
    pub target: u8,
    pub source: WindowSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Granularity {
    Window,
    Video,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    /// Fraction of what remains after the test split.
    pub val_fraction: f64,
    pub seed: u64,
    pub granularity: Granularity,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.10,
            val_fraction: 0.20,
            seed: 0,
            granularity: Granularity::Window,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Split {
    pub train: Vec<Window>,
    pub val: Vec<Window>,
    pub test: Vec<Window>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassBalance {
    pub positive: usize,
    pub negative: usize,
    pub positive_fraction: f64,
}

fn parse_label(raw: &str, row: usize) -> Result<u8> {
    let v: f64 = raw.trim().parse().map_err(|_| Error::MalformedRow {
        row,
        reason: format!("label {raw:?} is not numeric"),
    })?;
    if v == 0.0 {
        Ok(0)
    } else if v == 1.0 {
        Ok(1)
    } else {
        Err(Error::NonBinaryLabel {
            row,
            value: raw.to_string(),
        })
    }
}

fn parse_coords(record: &csv::StringRecord, row: usize) -> Result<Coords> {
    let mut coords = [0.0f32; COORDS_PER_FRAME];
    for (i, (dst, raw)) in coords.iter_mut().zip(record.iter()).enumerate() {
        let v: f32 = raw.trim().parse().map_err(|_| Error::MalformedRow {
            row,
            reason: format!("field {i} ({raw:?}) is not a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::MalformedRow {
                row,
                reason: format!("field {i} is not finite"),
            });
        }
        *dst = v;
    }
    Ok(coords)
}

/// Rows of a landmark CSV. `labels` is `None` when the file has no label column.
pub struct LandmarkRows {
    pub coords: Vec<Coords>,
    pub labels: Option<Vec<u8>>,
}

/// Reads a landmark CSV whose label column may be absent (replay input).
/// When present the label is validated exactly as in [`load_video_csv`].
pub fn read_landmark_rows(path: &Path, require_label: bool) -> Result<LandmarkRows> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut with_label: Option<bool> = None;
    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let n = record.len();
        let has_label = match n {
            n if n == COORDS_PER_FRAME + 1 => true,
            n if n == COORDS_PER_FRAME && !require_label => false,
            _ => {
                return Err(Error::MalformedRow {
                    row,
                    reason: format!(
                        "expected {} fields, found {n}",
                        COORDS_PER_FRAME + usize::from(require_label)
                    ),
                })
            }
        };
        if *with_label.get_or_insert(has_label) != has_label {
            return Err(Error::MalformedRow {
                row,
                reason: "label column present on some rows only".into(),
            });
        }
        coords.push(parse_coords(&record, row)?);
        if has_label {
            labels.push(parse_label(&record[COORDS_PER_FRAME], row)?);
        }
    }
    if coords.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(LandmarkRows {
        coords,
        labels: with_label.unwrap_or(false).then_some(labels),
    })
}

/// Loads one labeled video: a header row, then 66 coordinates and a 0/1
/// label per frame.
pub fn load_video_csv(path: &Path, video_id: &str) -> Result<LabeledVideo> {
    let rows = read_landmark_rows(path, true)?;
    let labels = rows.labels.expect("labels required");
    LabeledVideo::from_parts(video_id, rows.coords, &labels)
}

pub fn csv_header() -> String {
    let mut cols: Vec<String> = (0..NUM_LANDMARKS)
        .flat_map(|k| [format!("x{k}"), format!("y{k}")])
        .collect();
    cols.push("label".into());
    cols.join(",")
}

/// Writes a video in the landmark CSV format. Coordinates use the shortest
/// representation that parses back to the same `f32`.
pub fn write_video_csv(video: &LabeledVideo, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(video.len() * COORDS_PER_FRAME * 10);
    out.push_str(&csv_header());
    out.push('\n');
    for frame in &video.frames {
        for v in &frame.coords {
            out.push_str(&v.to_string());
            out.push(',');
        }
        out.push_str(if frame.label == 1 { "1" } else { "0" });
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Every `.csv` in `dir` except `manifest.csv`, sorted by file name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let is_csv = path.extension().is_some_and(|e| e == "csv");
        let is_manifest = path.file_stem().is_some_and(|s| s == "manifest");
        if is_csv && !is_manifest {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every video in a corpus directory; the file stem becomes the video id.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<LabeledVideo>> {
    let files = corpus_files(dir)?;
    if files.is_empty() {
        return Err(Error::EmptyDataset);
    }
    files
        .par_iter()
        .map(|path| {
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            load_video_csv(path, &id)
        })
        .collect()
}

/// Reads a `video_id,reversal_index` table.
pub fn load_reversal_table(path: &Path) -> Result<HashMap<String, usize>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut table = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(Error::MalformedRow {
                row,
                reason: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let idx = record[1].trim().parse().map_err(|_| Error::MalformedRow {
            row,
            reason: format!("reversal index {:?} is not an ordinal", &record[1]),
        })?;
        table.insert(record[0].trim().to_string(), idx);
    }
    Ok(table)
}

/// Clears the crossing label on every frame from `reversal_index` onward.
pub fn apply_backtrack_relabel(
    mut video: LabeledVideo,
    reversal_index: usize,
) -> Result<LabeledVideo> {
    if reversal_index >= video.frames.len() {
        return Err(Error::IndexOutOfRange {
            index: reversal_index,
            len: video.frames.len(),
        });
    }
    for frame in &mut video.frames[reversal_index..] {
        frame.label = 0;
    }
    Ok(video)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowOptions {
    pub seq_len: usize,
    /// Per-window z-scoring of each coordinate over time.
    pub standardize: bool,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            seq_len: DEFAULT_SEQ_LEN,
            standardize: false,
        }
    }
}

/// Copies frames `start..start + seq_len` into a `seq_len x 66` matrix.
pub fn window_features<'a>(
    frames: impl Iterator<Item = &'a Coords>,
    seq_len: usize,
) -> Matrix<f32> {
    let mut data = Vec::with_capacity(seq_len * COORDS_PER_FRAME);
    for c in frames.take(seq_len) {
        data.extend_from_slice(c);
    }
    Matrix::from_vec(data.len() / COORDS_PER_FRAME, COORDS_PER_FRAME, data).expect("whole frames")
}

/// Rescales every column to zero mean and unit variance over the window.
/// Constant columns become zero.
pub fn standardize_window(features: &mut Matrix<f32>) {
    let (rows, cols) = features.shape();
    if rows == 0 {
        return;
    }
    let n = rows as f32;
    for c in 0..cols {
        let mean = (0..rows).map(|r| features.get(r, c)).sum::<f32>() / n;
        let var = (0..rows)
            .map(|r| (features.get(r, c) - mean).powi(2))
            .sum::<f32>()
            / n;
        let scale = if var > 1e-12 { var.sqrt().recip() } else { 0.0 };
        for r in 0..rows {
            let v = features.get(r, c);
            features.set(r, c, (v - mean) * scale);
        }
    }
}

/// Sliding windows of `seq_len` frames; window `k` covers frames
/// `k..k + seq_len` and is labeled with frame `k + seq_len`. Videos with
/// `seq_len` or fewer frames (and `seq_len == 0`) yield nothing.
pub fn build_windows(video: &LabeledVideo, seq_len: usize) -> Vec<Window> {
    build_windows_with(
        video,
        &WindowOptions {
            seq_len,
            standardize: false,
        },
    )
}

pub fn build_windows_with(video: &LabeledVideo, opts: &WindowOptions) -> Vec<Window> {
    let seq_len = opts.seq_len;
    let n = video.frames.len();
    if seq_len == 0 || n <= seq_len {
        return Vec::new();
    }
    (0..n - seq_len)
        .map(|k| {
            let mut features =
                window_features(video.frames[k..].iter().map(|f| &f.coords), seq_len);
            if opts.standardize {
                standardize_window(&mut features);
            }
            Window {
                features,
                target: video.frames[k + seq_len].label,
                source: WindowSource {
                    video_id: video.video_id.clone(),
                    start: k,
                },
            }
        })
        .collect()
}

fn partition_sizes(n: usize, spec: &SplitSpec) -> (usize, usize) {
    let test = (spec.test_fraction * n as f64).round() as usize;
    let val = (spec.val_fraction * (n - test.min(n)) as f64).round() as usize;
    (test.min(n), val)
}

/// Shuffles with `spec.seed` and cuts test, then validation, then train.
///
/// With [`Granularity::Video`] the rounding rules apply to the number of
/// videos and every window of a video lands in the same partition.
pub fn split_dataset(windows: Vec<Window>, spec: &SplitSpec) -> Result<Split> {
    if windows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for (name, f) in [
        ("test_fraction", spec.test_fraction),
        ("val_fraction", spec.val_fraction),
    ] {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "{name} must lie in (0, 1), got {f}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // group index: one per window, or one per video in first-seen order
    let (groups, n_groups) = match spec.granularity {
        Granularity::Window => ((0..windows.len()).collect::<Vec<_>>(), windows.len()),
        Granularity::Video => {
            let mut ids: HashMap<&str, usize> = HashMap::new();
            let groups: Vec<usize> = windows
                .iter()
                .map(|w| {
                    let next = ids.len();
                    *ids.entry(w.source.video_id.as_str()).or_insert(next)
                })
                .collect();
            let n = ids.len();
            (groups, n)
        }
    };

    let mut order: Vec<usize> = (0..n_groups).collect();
    order.shuffle(&mut rng);
    let (n_test, n_val) = partition_sizes(n_groups, spec);
    // 0 = train, 1 = val, 2 = test
    let mut assignment = vec![0u8; n_groups];
    for (rank, &g) in order.iter().enumerate() {
        assignment[g] = if rank < n_test {
            2
        } else if rank < n_test + n_val {
            1
        } else {
            0
        };
    }

    let mut split = Split::default();
    match spec.granularity {
        Granularity::Window => {
            let mut slots: Vec<Option<Window>> = windows.into_iter().map(Some).collect();
            for &g in &order {
                let w = slots[g].take().expect("each window used once");
                match assignment[g] {
                    2 => split.test.push(w),
                    1 => split.val.push(w),
                    _ => split.train.push(w),
                }
            }
        }
        Granularity::Video => {
            for (w, g) in windows.into_iter().zip(groups) {
                match assignment[g] {
                    2 => split.test.push(w),
                    1 => split.val.push(w),
                    _ => split.train.push(w),
                }
            }
        }
    }
    if split.train.is_empty() || split.val.is_empty() || split.test.is_empty() {
        return Err(Error::DegenerateSplit {
            train: split.train.len(),
            val: split.val.len(),
            test: split.test.len(),
        });
    }
    Ok(split)
}

pub fn class_balance_stats(windows: &[Window]) -> ClassBalance {
    let positive = windows.iter().filter(|w| w.target == 1).count();
    let negative = windows.len() - positive;
    let positive_fraction = if windows.is_empty() {
        0.0
    } else {
        positive as f64 / windows.len() as f64
    };
    ClassBalance {
        positive,
        negative,
        positive_fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn video_with_labels(labels: &[u8]) -> LabeledVideo {
        let coords = (0..labels.len())
            .map(|i| {
                let mut c = [0.0f32; COORDS_PER_FRAME];
                c[0] = i as f32;
                c
            })
            .collect();
        LabeledVideo::from_parts("v", coords, labels).unwrap()
    }

    fn write_rows(rows: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{}", csv_header()).unwrap();
        for r in rows {
            writeln!(f, "{r}").unwrap();
        }
        f
    }

    fn row(label: &str) -> String {
        let mut fields: Vec<String> = (0..COORDS_PER_FRAME)
            .map(|i| format!("0.{}", i + 1))
            .collect();
        fields.push(label.into());
        fields.join(",")
    }

    #[test]
    fn header_shape() {
        let h = csv_header();
        assert!(h.starts_with("x0,y0,x1,y1,"));
        assert!(h.ends_with("x32,y32,label"));
        assert_eq!(h.split(',').count(), 67);
    }

    #[test]
    fn loads_300_rows() {
        let rows: Vec<String> = (0..300)
            .map(|i| row(if i > 150 { "1" } else { "0" }))
            .collect();
        let f = write_rows(&rows);
        let v = load_video_csv(f.path(), "clip").unwrap();
        assert_eq!(v.len(), 300);
        assert_eq!(v.frames[299].frame_index, 299);
        assert_eq!(v.frames[151].label, 1);
        assert_eq!(v.video_id, "clip");
    }

    #[test]
    fn loads_single_row() {
        let f = write_rows(&[row("1")]);
        let v = load_video_csv(f.path(), "one").unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.frames[0].coords[0], 0.1);
    }

    #[test]
    fn rejects_label_two() {
        let f = write_rows(&[row("0"), row("2")]);
        match load_video_csv(f.path(), "bad") {
            Err(Error::NonBinaryLabel { row, value }) => {
                assert_eq!(row, 3);
                assert_eq!(value, "2");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_fractional_label() {
        let f = write_rows(&[row("0.5")]);
        assert!(matches!(
            load_video_csv(f.path(), "bad"),
            Err(Error::NonBinaryLabel { .. })
        ));
    }

    #[test]
    fn malformed_rows() {
        let f = write_rows(&["0.1,0.2,1".into()]);
        assert!(matches!(
            load_video_csv(f.path(), "bad"),
            Err(Error::MalformedRow { row: 2, .. })
        ));
        let mut r = row("1");
        r.replace_range(0..3, "abc");
        let f = write_rows(&[r]);
        assert!(matches!(
            load_video_csv(f.path(), "bad"),
            Err(Error::MalformedRow { .. })
        ));
    }

    #[test]
    fn empty_file() {
        let f = write_rows(&[]);
        assert!(matches!(
            load_video_csv(f.path(), "e"),
            Err(Error::EmptyFile)
        ));
    }

    #[test]
    fn accepts_crlf() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "{}\r\n{}\r\n{}\r\n", csv_header(), row("0"), row("1")).unwrap();
        let v = load_video_csv(f.path(), "crlf").unwrap();
        assert_eq!(v.labels(), vec![0, 1]);
    }

    #[test]
    fn replay_rows_without_label() {
        let rows: Vec<String> = (0..3)
            .map(|_| {
                (0..COORDS_PER_FRAME)
                    .map(|_| "0.5")
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        let f = write_rows(&rows);
        let r = read_landmark_rows(f.path(), false).unwrap();
        assert_eq!(r.coords.len(), 3);
        assert!(r.labels.is_none());
        assert!(read_landmark_rows(f.path(), true).is_err());
    }

    #[test]
    fn relabel_examples() {
        let v = apply_backtrack_relabel(video_with_labels(&[0, 0, 1, 1, 1]), 3).unwrap();
        assert_eq!(v.labels(), vec![0, 0, 1, 0, 0]);
        let v = apply_backtrack_relabel(video_with_labels(&[0, 0, 0]), 1).unwrap();
        assert_eq!(v.labels(), vec![0, 0, 0]);
        let v = apply_backtrack_relabel(video_with_labels(&[1, 1, 1, 1]), 0).unwrap();
        assert_eq!(v.labels(), vec![0, 0, 0, 0]);
        assert!(matches!(
            apply_backtrack_relabel(video_with_labels(&[1, 1]), 2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn window_counts_at_boundaries() {
        assert_eq!(build_windows(&video_with_labels(&[0; 300]), 15).len(), 285);
        assert!(build_windows(&video_with_labels(&[0; 15]), 15).is_empty());
        let mut labels = [0u8; 16];
        labels[15] = 1;
        let w = build_windows(&video_with_labels(&labels), 15);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].target, 1);
        assert_eq!(w[0].features.shape(), (15, 66));
        assert_eq!(w[0].source.start, 0);
    }

    #[test]
    fn standardized_windows_have_zero_mean() {
        let v = video_with_labels(&[0; 20]);
        let w = build_windows_with(
            &v,
            &WindowOptions {
                seq_len: 5,
                standardize: true,
            },
        );
        let col0: f32 = (0..5).map(|r| w[3].features.get(r, 0)).sum();
        assert!(col0.abs() < 1e-5);
        // constant column
        assert_eq!(w[3].features.get(2, 1), 0.0);
    }

    fn numbered_windows(n: usize) -> Vec<Window> {
        (0..n)
            .map(|k| Window {
                features: Matrix::zeros(1, 1),
                target: (k % 2) as u8,
                source: WindowSource {
                    video_id: format!("v{}", k / 4),
                    start: k,
                },
            })
            .collect()
    }

    #[test]
    fn split_sizes_ten_windows() {
        let s = split_dataset(numbered_windows(10), &SplitSpec::default()).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (7, 2, 1));
    }

    #[test]
    fn split_full_scale_test_count() {
        let spec = SplitSpec {
            test_fraction: 1823.0 / 17408.0,
            ..SplitSpec::default()
        };
        let s = split_dataset(numbered_windows(17_408), &spec).unwrap();
        assert_eq!(s.test.len(), 1823);
        assert_eq!(s.train.len() + s.val.len(), 15_585);
    }

    #[test]
    fn split_is_deterministic() {
        let spec = SplitSpec {
            seed: 99,
            ..SplitSpec::default()
        };
        let a = split_dataset(numbered_windows(50), &spec).unwrap();
        let b = split_dataset(numbered_windows(50), &spec).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.val, b.val);
        assert_eq!(a.test, b.test);
    }

    #[test]
    fn split_errors() {
        assert!(matches!(
            split_dataset(Vec::new(), &SplitSpec::default()),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            split_dataset(numbered_windows(2), &SplitSpec::default()),
            Err(Error::DegenerateSplit { .. })
        ));
        let bad = SplitSpec {
            test_fraction: 1.0,
            ..SplitSpec::default()
        };
        assert!(split_dataset(numbered_windows(20), &bad).is_err());
    }

    #[test]
    fn video_split_keeps_videos_whole() {
        let spec = SplitSpec {
            granularity: Granularity::Video,
            seed: 5,
            ..SplitSpec::default()
        };
        // 40 windows in 10 videos: 1 test video, round(0.2 * 9) = 2 val videos
        let s = split_dataset(numbered_windows(40), &spec).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (28, 8, 4));
        let ids = |ws: &[Window]| {
            let mut v: Vec<String> = ws.iter().map(|w| w.source.video_id.clone()).collect();
            v.sort();
            v.dedup();
            v
        };
        for id in ids(&s.test) {
            assert!(!ids(&s.train).contains(&id));
            assert!(!ids(&s.val).contains(&id));
        }
    }

    #[test]
    fn class_balance_examples() {
        let mut ws = numbered_windows(5);
        for (w, t) in ws.iter_mut().zip([1, 1, 0, 0, 0]) {
            w.target = t;
        }
        let b = class_balance_stats(&ws);
        assert_eq!((b.positive, b.negative, b.positive_fraction), (2, 3, 0.4));

        let b = class_balance_stats(&[]);
        assert_eq!((b.positive, b.negative, b.positive_fraction), (0, 0, 0.0));

        for w in &mut ws {
            w.target = 1;
        }
        let b = class_balance_stats(&ws);
        assert_eq!((b.positive, b.negative, b.positive_fraction), (5, 0, 1.0));
    }

    #[test]
    fn reversal_table() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "video_id,reversal_index\nvideo_3,120\nvideo_7,5").unwrap();
        let t = load_reversal_table(f.path()).unwrap();
        assert_eq!(t["video_3"], 120);
        assert_eq!(t["video_7"], 5);
    }
}
