//! Deterministic kinematic generator of labeled 33-landmark pedestrian clips.
//!
//! A clip is a sequence of regimes (idle, approach, cross, backtrack). The
//! root (hip centre) moves laterally at each regime's speed, limbs swing
//! sinusoidally while walking, and every coordinate gets seeded Gaussian
//! jitter. Frames inside a cross regime are labeled 1; when a backtrack
//! follows a crossing, everything from the backtrack start on is relabeled 0.

use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::dataset::{
    apply_backtrack_relabel, write_video_csv, Coords, LabeledVideo, COORDS_PER_FRAME, NUM_LANDMARKS,
};
use crate::error::{Error, Result};
use crate::training::write_atomic;

pub const LEFT_HIP: usize = 23;
pub const RIGHT_HIP: usize = 24;
const ROOT: (f64, f64) = (0.5, 0.6);
/// Walking speed (units/frame) at which the gait reaches full amplitude.
const FULL_GAIT_SPEED: f64 = 0.003;

/// Root x position of a frame: the midpoint of the two hips.
pub fn root_x(coords: &Coords) -> f32 {
    0.5 * (coords[2 * LEFT_HIP] + coords[2 * RIGHT_HIP])
}

/// A standing pose in normalized image coordinates with the hip centre at
/// (0.5, 0.6), plus per-landmark gait swing weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonTemplate {
    pub base: [(f64, f64); NUM_LANDMARKS],
    /// `(landmark, weight)`; positive weights swing in phase, negative in
    /// antiphase.
    pub swing: Vec<(usize, f64)>,
}

impl SkeletonTemplate {
    /// The 33-point body topology used by common pose extractors
    /// (face 0-10, arms and hands 11-22, hips 23-24, legs and feet 25-32).
    pub fn standing() -> Self {
        let offsets: [(f64, f64); NUM_LANDMARKS] = [
            (0.0, -0.36),
            (0.008, -0.375),
            (0.014, -0.376),
            (0.02, -0.375),
            (-0.008, -0.375),
            (-0.014, -0.376),
            (-0.02, -0.375),
            (0.03, -0.37),
            (-0.03, -0.37),
            (0.01, -0.345),
            (-0.01, -0.345),
            (0.05, -0.28),
            (-0.05, -0.28),
            (0.06, -0.16),
            (-0.06, -0.16),
            (0.065, -0.05),
            (-0.065, -0.05),
            (0.068, -0.03),
            (-0.068, -0.03),
            (0.064, -0.025),
            (-0.064, -0.025),
            (0.058, -0.035),
            (-0.058, -0.035),
            (0.035, 0.0),
            (-0.035, 0.0),
            (0.04, 0.13),
            (-0.04, 0.13),
            (0.04, 0.26),
            (-0.04, 0.26),
            (0.035, 0.275),
            (-0.035, 0.275),
            (0.05, 0.285),
            (-0.05, 0.285),
        ];
        let mut base = [(0.0, 0.0); NUM_LANDMARKS];
        for (dst, (dx, dy)) in base.iter_mut().zip(offsets) {
            *dst = (ROOT.0 + dx, ROOT.1 + dy);
        }
        // arms swing against the leg on the same side
        let swing = vec![
            (13, 0.5),
            (15, 1.0),
            (17, 1.0),
            (19, 1.0),
            (21, 1.0),
            (14, -0.5),
            (16, -1.0),
            (18, -1.0),
            (20, -1.0),
            (22, -1.0),
            (25, -0.5),
            (27, -1.0),
            (29, -1.0),
            (31, -1.0),
            (26, 0.5),
            (28, 1.0),
            (30, 1.0),
            (32, 1.0),
        ];
        SkeletonTemplate { base, swing }
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .base
            .iter()
            .any(|&(x, y)| !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y))
        {
            return Err(Error::InvalidScript(
                "template coordinates must lie in [0, 1]".into(),
            ));
        }
        if self.swing.iter().any(|&(i, _)| i >= NUM_LANDMARKS) {
            return Err(Error::InvalidScript("swing landmark out of range".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Idle,
    Approach,
    Cross,
    Backtrack,
}

impl Regime {
    fn as_str(self) -> &'static str {
        match self {
            Regime::Idle => "idle",
            Regime::Approach => "approach",
            Regime::Cross => "cross",
            Regime::Backtrack => "backtrack",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub regime: Regime,
    pub duration: usize,
    /// Lateral speed magnitude in normalized units per frame. Approach and
    /// cross move along the script direction, backtrack against it.
    pub velocity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::LeftToRight => 1.0,
            Direction::RightToLeft => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioScript {
    pub segments: Vec<Segment>,
    pub jitter_sigma: f64,
    pub gait_amplitude: f64,
    /// Gait cycles per frame.
    pub gait_frequency: f64,
    pub seed: u64,
    pub start_x: f64,
    pub direction: Direction,
}

impl ScenarioScript {
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidScript("no segments".into()));
        }
        if self.segments.iter().any(|s| s.duration == 0) {
            return Err(Error::InvalidScript(
                "segment durations must be at least 1".into(),
            ));
        }
        if self
            .segments
            .iter()
            .any(|s| !(s.velocity.is_finite() && s.velocity >= 0.0))
        {
            return Err(Error::InvalidScript(
                "velocities must be finite and non-negative".into(),
            ));
        }
        let fastest_approach = self
            .segments
            .iter()
            .filter(|s| s.regime == Regime::Approach)
            .map(|s| s.velocity)
            .fold(0.0, f64::max);
        if self
            .segments
            .iter()
            .any(|s| s.regime == Regime::Cross && s.velocity < fastest_approach)
        {
            return Err(Error::InvalidScript(
                "cross speed below approach speed".into(),
            ));
        }
        for (name, v) in [
            ("jitter_sigma", self.jitter_sigma),
            ("gait_amplitude", self.gait_amplitude),
            ("gait_frequency", self.gait_frequency),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidScript(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.start_x) {
            return Err(Error::InvalidScript("start_x must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn total_frames(&self) -> usize {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// `regime:duration@speed` per segment, joined by `|`.
    pub fn summary(&self) -> String {
        let dir = match self.direction {
            Direction::LeftToRight => "ltr",
            Direction::RightToLeft => "rtl",
        };
        let segs: Vec<String> = self
            .segments
            .iter()
            .map(|s| format!("{}:{}@{:.5}", s.regime.as_str(), s.duration, s.velocity))
            .collect();
        format!("{dir} {}", segs.join("|"))
    }

    /// Regime of every frame, in order.
    fn regimes(&self) -> impl Iterator<Item = &Segment> {
        self.segments
            .iter()
            .flat_map(|s| std::iter::repeat_n(s, s.duration))
    }
}

/// Renders the first `frames` frames of a script.
pub fn generate_video(
    video_id: &str,
    script: &ScenarioScript,
    template: &SkeletonTemplate,
    frames: usize,
) -> Result<LabeledVideo> {
    script.validate()?;
    template.validate()?;
    if script.total_frames() < frames {
        return Err(Error::InvalidScript(format!(
            "segments cover {} frames, {frames} requested",
            script.total_frames()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(script.seed);
    let jitter =
        Normal::new(0.0, script.jitter_sigma).map_err(|e| Error::InvalidScript(e.to_string()))?;
    let dir = script.direction.sign();
    let mut x = script.start_x;
    let mut phase = 0.0f64;
    let mut coords = Vec::with_capacity(frames);
    let mut labels = Vec::with_capacity(frames);

    for seg in script.regimes().take(frames) {
        let step = match seg.regime {
            Regime::Idle => 0.0,
            Regime::Approach | Regime::Cross => dir * seg.velocity,
            Regime::Backtrack => -dir * seg.velocity,
        };
        x += step;
        let gait = if seg.regime == Regime::Idle || seg.velocity == 0.0 {
            0.0
        } else {
            phase += TAU * script.gait_frequency;
            (seg.velocity / FULL_GAIT_SPEED).min(1.0)
        };
        let swing = script.gait_amplitude * gait * phase.sin();
        // walking direction decides which way "forward" is
        let facing = step.signum();

        let mut frame = [0.0f32; COORDS_PER_FRAME];
        for (k, &(bx, by)) in template.base.iter().enumerate() {
            frame[2 * k] = (bx - ROOT.0 + x) as f32;
            frame[2 * k + 1] = by as f32;
        }
        for &(k, w) in &template.swing {
            frame[2 * k] += (facing * w * swing) as f32;
            // the forward foot lifts slightly
            if k >= 27 {
                frame[2 * k + 1] -= (0.25 * (w * swing).max(0.0)) as f32;
            }
        }
        for v in frame.iter_mut() {
            let noisy = f64::from(*v) + jitter.sample(&mut rng);
            *v = noisy.clamp(0.0, 1.0) as f32;
        }
        coords.push(frame);
        labels.push(u8::from(seg.regime == Regime::Cross));
    }

    let mut video = LabeledVideo::from_parts(video_id, coords, &labels)?;
    if let Some(idx) = backtrack_start(script) {
        if idx < frames {
            video = apply_backtrack_relabel(video, idx)?;
        }
    }
    Ok(video)
}

/// First frame of the first backtrack segment that follows a cross segment.
pub fn backtrack_start(script: &ScenarioScript) -> Option<usize> {
    let mut start = 0;
    let mut crossed = false;
    for s in &script.segments {
        match s.regime {
            Regime::Cross => crossed = true,
            Regime::Backtrack if crossed => return Some(start),
            _ => {}
        }
        start += s.duration;
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Difficulty {
    /// Crossing and non-crossing speeds are far apart.
    Easy,
    /// Overlapping speeds, heavier jitter, frequent backtracking.
    Hard,
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "easy",
            Difficulty::Hard => "hard",
        })
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "hard" => Ok(Difficulty::Hard),
            other => Err(Error::InvalidConfig(format!(
                "unknown difficulty {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Ranges {
    approach: (f64, f64),
    cross: (f64, f64),
    jitter: f64,
}

impl Difficulty {
    fn ranges(self) -> Ranges {
        match self {
            Difficulty::Easy => Ranges {
                approach: (0.0002, 0.0006),
                cross: (0.0024, 0.003),
                jitter: 0.002,
            },
            Difficulty::Hard => Ranges {
                approach: (0.0005, 0.0024),
                cross: (0.0012, 0.003),
                jitter: 0.006,
            },
        }
    }
}

/// What a clip does. Assigned round-robin by video index so the mix is
/// exact for any corpus size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Plot {
    Stand,
    Hesitate,
    Cross,
    CrossThenBacktrack,
}

fn plot_for(index: usize, difficulty: Difficulty) -> Plot {
    match difficulty {
        // half the clips cross
        Difficulty::Easy => match index % 4 {
            0 | 2 => Plot::Cross,
            1 => Plot::Hesitate,
            _ => Plot::Stand,
        },
        // 3 in 10 clips backtrack
        Difficulty::Hard => match index % 10 {
            0 | 4 | 7 => Plot::CrossThenBacktrack,
            1 | 3 | 6 | 9 => Plot::Cross,
            2 | 8 => Plot::Hesitate,
            _ => Plot::Stand,
        },
    }
}

/// Draws a script of exactly `frames` frames for video `index`.
pub fn random_script(
    index: usize,
    frames: usize,
    difficulty: Difficulty,
    seed: u64,
) -> ScenarioScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let r = difficulty.ranges();
    let direction = if rng.random_bool(0.5) {
        Direction::LeftToRight
    } else {
        Direction::RightToLeft
    };
    let approach_v = rng.random_range(r.approach.0..=r.approach.1);
    let cross_v = rng.random_range(r.cross.0.max(approach_v)..=r.cross.1);
    let scale = |d: usize| ((d * frames) / 300).max(1);
    let mut segs = Vec::new();
    let mut push = |regime, duration: usize, velocity| {
        if duration > 0 {
            segs.push(Segment {
                regime,
                duration,
                velocity,
            });
        }
    };
    let idle0 = scale(rng.random_range(0..=40));
    let approach_d = scale(rng.random_range(40..=100));
    match plot_for(index, difficulty) {
        Plot::Stand => push(Regime::Idle, frames, 0.0),
        Plot::Hesitate => {
            push(Regime::Idle, idle0, 0.0);
            push(Regime::Approach, approach_d, approach_v);
            push(Regime::Idle, frames.saturating_sub(idle0 + approach_d), 0.0);
        }
        Plot::Cross => {
            push(Regime::Idle, idle0, 0.0);
            push(Regime::Approach, approach_d, approach_v);
            push(
                Regime::Cross,
                frames.saturating_sub(idle0 + approach_d),
                cross_v,
            );
        }
        Plot::CrossThenBacktrack => {
            let cross_d = scale(rng.random_range(40..=90));
            let back_v = rng.random_range(r.cross.0..=r.cross.1);
            push(Regime::Idle, idle0, 0.0);
            push(Regime::Approach, approach_d, approach_v);
            push(Regime::Cross, cross_d, cross_v);
            push(
                Regime::Backtrack,
                frames.saturating_sub(idle0 + approach_d + cross_d),
                back_v,
            );
        }
    }
    // short clips may not fit every segment; pad with idle
    let covered: usize = segs.iter().map(|s| s.duration).sum();
    if covered < frames {
        segs.push(Segment {
            regime: Regime::Idle,
            duration: frames - covered,
            velocity: 0.0,
        });
    }
    let start_x = match direction {
        Direction::LeftToRight => rng.random_range(0.08..0.12),
        Direction::RightToLeft => rng.random_range(0.88..0.92),
    };
    ScenarioScript {
        segments: segs,
        jitter_sigma: r.jitter,
        gait_amplitude: 0.03,
        gait_frequency: 1.0 / 30.0,
        seed: rng.random(),
        start_x,
        direction,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub video_id: String,
    pub script: String,
    pub positive_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
    /// Share of frames labeled 1 across the corpus.
    pub positive_fraction: f64,
}

pub const MANIFEST_HEADER: &str = "video_id,script,positive_fraction";

impl CorpusManifest {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(MANIFEST_HEADER);
        s.push('\n');
        for e in &self.entries {
            s.push_str(&format!(
                "{},{},{}\n",
                e.video_id, e.script, e.positive_fraction
            ));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusParams {
    pub n_videos: usize,
    pub frames: usize,
    pub seed: u64,
    pub difficulty: Difficulty,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            n_videos: 60,
            frames: 300,
            seed: 0,
            difficulty: Difficulty::Easy,
        }
    }
}

/// Generates the corpus in memory, one independent RNG stream per video.
pub fn generate_videos(params: &CorpusParams) -> Result<Vec<(ScenarioScript, LabeledVideo)>> {
    let template = SkeletonTemplate::standing();
    (0..params.n_videos)
        .into_par_iter()
        .map(|k| {
            let script = random_script(k, params.frames, params.difficulty, params.seed);
            let video = generate_video(&format!("video_{k}"), &script, &template, params.frames)?;
            Ok((script, video))
        })
        .collect()
}

/// Writes `video_<k>.csv` for each clip plus `manifest.csv` into `out_dir`.
pub fn generate_corpus(params: &CorpusParams, out_dir: &Path) -> Result<CorpusManifest> {
    fs::create_dir_all(out_dir)?;
    let videos = generate_videos(params)?;
    videos
        .par_iter()
        .try_for_each(|(_, v)| write_video_csv(v, &out_dir.join(format!("{}.csv", v.video_id))))?;
    let mut positives = 0usize;
    let mut total = 0usize;
    let entries = videos
        .iter()
        .map(|(script, v)| {
            let pos = v.frames.iter().filter(|f| f.label == 1).count();
            positives += pos;
            total += v.len();
            ManifestEntry {
                video_id: v.video_id.clone(),
                script: script.summary(),
                positive_fraction: if v.is_empty() {
                    0.0
                } else {
                    pos as f64 / v.len() as f64
                },
            }
        })
        .collect();
    let manifest = CorpusManifest {
        entries,
        positive_fraction: if total == 0 {
            0.0
        } else {
            positives as f64 / total as f64
        },
    };
    write_atomic(&out_dir.join("manifest.csv"), manifest.to_csv().as_bytes())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn script(segments: Vec<Segment>) -> ScenarioScript {
        ScenarioScript {
            segments,
            jitter_sigma: 0.001,
            gait_amplitude: 0.03,
            gait_frequency: 1.0 / 30.0,
            seed: 9,
            start_x: 0.2,
            direction: Direction::LeftToRight,
        }
    }

    fn seg(regime: Regime, duration: usize, velocity: f64) -> Segment {
        Segment {
            regime,
            duration,
            velocity,
        }
    }

    #[test]
    fn template_is_in_unit_square() {
        SkeletonTemplate::standing().validate().unwrap();
    }

    #[test]
    fn idle_only() {
        let v = generate_video(
            "v",
            &script(vec![seg(Regime::Idle, 100, 0.0)]),
            &SkeletonTemplate::standing(),
            100,
        )
        .unwrap();
        assert!(v.labels().iter().all(|&l| l == 0));
        let xs: Vec<f32> = v.frames.iter().map(|f| root_x(&f.coords)).collect();
        for x in xs {
            assert!((x - 0.2).abs() < 0.01, "{x}");
        }
    }

    #[test]
    fn labels_switch_at_cross_start() {
        let s = script(vec![
            seg(Regime::Approach, 40, 0.0005),
            seg(Regime::Cross, 60, 0.003),
        ]);
        let v = generate_video("v", &s, &SkeletonTemplate::standing(), 100).unwrap();
        let labels = v.labels();
        assert!(labels[..40].iter().all(|&l| l == 0));
        assert!(labels[40..].iter().all(|&l| l == 1));
    }

    #[test]
    fn backtrack_relabels_from_its_start() {
        let s = script(vec![
            seg(Regime::Approach, 30, 0.0005),
            seg(Regime::Cross, 30, 0.003),
            seg(Regime::Backtrack, 20, 0.003),
            seg(Regime::Cross, 20, 0.003),
        ]);
        let v = generate_video("v", &s, &SkeletonTemplate::standing(), 100).unwrap();
        let labels = v.labels();
        assert!(labels[30..60].iter().all(|&l| l == 1));
        assert!(labels[60..].iter().all(|&l| l == 0));
        assert_eq!(backtrack_start(&s), Some(60));
    }

    #[test]
    fn invalid_scripts() {
        let t = SkeletonTemplate::standing();
        let short = script(vec![seg(Regime::Idle, 10, 0.0)]);
        assert!(matches!(
            generate_video("v", &short, &t, 11),
            Err(Error::InvalidScript(_))
        ));
        let zero = script(vec![seg(Regime::Idle, 0, 0.0)]);
        assert!(generate_video("v", &zero, &t, 0).is_err());
        let slow_cross = script(vec![
            seg(Regime::Approach, 10, 0.002),
            seg(Regime::Cross, 10, 0.001),
        ]);
        assert!(generate_video("v", &slow_cross, &t, 20).is_err());
    }

    #[test]
    fn random_scripts_cover_requested_frames() {
        for difficulty in [Difficulty::Easy, Difficulty::Hard] {
            for k in 0..20 {
                for frames in [16, 100, 300] {
                    let s = random_script(k, frames, difficulty, 4);
                    s.validate().unwrap();
                    assert_eq!(s.total_frames(), frames, "{}", s.summary());
                }
            }
        }
    }

    #[test]
    fn hard_mode_backtracks_often_enough() {
        let n = (0..60)
            .filter(|&k| backtrack_start(&random_script(k, 300, Difficulty::Hard, 1)).is_some())
            .count();
        assert!(n * 5 >= 60, "{n}");
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let params = CorpusParams {
            n_videos: 3,
            frames: 40,
            seed: 17,
            difficulty: Difficulty::Hard,
        };
        let ma = generate_corpus(&params, a.path()).unwrap();
        let mb = generate_corpus(&params, b.path()).unwrap();
        assert_eq!(ma, mb);
        for name in ["video_0.csv", "video_2.csv", "manifest.csv"] {
            assert_eq!(
                fs::read(a.path().join(name)).unwrap(),
                fs::read(b.path().join(name)).unwrap()
            );
        }
    }
}
