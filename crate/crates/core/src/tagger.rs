//! Motion tagging: discrete translation/rotation classes, F1 and MAE
//! metrics, trajectory similarity and the DSL round-trip filter.
//!
//! Net motion is measured by body-frame odometry: each step's displacement
//! is expressed in the orientation the track has at the end of that step,
//! and step rotations are decomposed into intrinsic Euler increments before
//! being summed. For compiler output this inverts the integration exactly,
//! so tagging a compiled program recovers its values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::compiler::{compile_camera, segmentize, BoxTrack, Trajectory, FRAME_COUNT};
use crate::dsl::{angle_values, ModValue, ModifierKey, MotionProgram, MotionTag, PrimitiveKind, Role};
use crate::kinematics::{euler_angles, wrap_degrees, Pose, Vec3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TagError {
    #[error("frame range {0}..={1} is empty or out of bounds")]
    EmptyRange(usize, usize),
    #[error("inputs differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Anything with one pose per frame.
pub trait MotionTrack {
    fn frame_count(&self) -> usize;
    fn pose_at(&self, frame: usize) -> Pose;

    /// Net (yaw, pitch, roll) in degrees over `a..=b`, summed from
    /// per-step intrinsic Euler increments and not wrapped.
    fn net_rotation_raw(&self, a: usize, b: usize) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for k in a + 1..=b {
            let step = self.pose_at(k - 1).orientation.inverse() * self.pose_at(k).orientation;
            let (y, p, r) = euler_angles(&step);
            acc[0] += y;
            acc[1] += p;
            acc[2] += r;
        }
        acc
    }
}

impl MotionTrack for Trajectory {
    fn frame_count(&self) -> usize {
        self.poses().len()
    }

    fn pose_at(&self, frame: usize) -> Pose {
        self.poses()[frame]
    }
}

impl MotionTrack for BoxTrack {
    fn frame_count(&self) -> usize {
        self.centers().len()
    }

    fn pose_at(&self, frame: usize) -> Pose {
        self.pose(frame)
    }

    /// Boxes carry cumulative heading and pitch; roll is always zero.
    fn net_rotation_raw(&self, a: usize, b: usize) -> [f64; 3] {
        let (ya, yb) = (self.yaw_pitch()[a], self.yaw_pitch()[b]);
        [yb[0] - ya[0], yb[1] - ya[1], 0.0]
    }
}

fn check_range<T: MotionTrack + ?Sized>(t: &T, (a, b): (usize, usize)) -> Result<(), TagError> {
    if a < b && b < t.frame_count() {
        Ok(())
    } else {
        Err(TagError::EmptyRange(a, b))
    }
}

/// Net displacement over `range` in the path-local frame.
pub fn net_translation<T: MotionTrack + ?Sized>(t: &T, range: (usize, usize)) -> Result<Vec3, TagError> {
    check_range(t, range)?;
    let mut acc = Vec3::zeros();
    for k in range.0 + 1..=range.1 {
        let (prev, cur) = (t.pose_at(k - 1), t.pose_at(k));
        acc += cur.orientation.inverse() * (cur.position - prev.position);
    }
    Ok(acc)
}

/// Net intrinsic (yaw, pitch, roll) over `range`, wrapped to (-180, 180].
pub fn net_rotation<T: MotionTrack + ?Sized>(t: &T, range: (usize, usize)) -> Result<[f64; 3], TagError> {
    check_range(t, range)?;
    Ok(t.net_rotation_raw(range.0, range.1).map(wrap_degrees))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Coarse,
    Fine,
}

/// Per-axis translation level. Fine levels are -3..=3 (far, plain, near
/// toward the negative side, no motion, then positive); coarse levels are
/// the signs. Negative means left, down and in (forward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TranslationClass {
    pub granularity: Granularity,
    pub levels: [i8; 3],
}

/// Magnitude bins: thresholds halfway between the compiler's level sizes.
pub const NEAR_THRESHOLD: f64 = 0.25;
pub const PLAIN_THRESHOLD: f64 = 0.75;
pub const FAR_THRESHOLD: f64 = 1.5;

const TRANSLATION_KEYS: [ModifierKey; 3] = [ModifierKey::TX, ModifierKey::TY, ModifierKey::TZ];

pub fn fine_level(d: f64) -> i8 {
    let m = d.abs();
    let bin = if m < NEAR_THRESHOLD {
        0
    } else if m < PLAIN_THRESHOLD {
        1
    } else if m < FAR_THRESHOLD {
        2
    } else {
        3
    };
    if d < 0.0 { -bin } else { bin }
}

pub fn coarse_level(d: f64) -> i8 {
    if d.abs() < NEAR_THRESHOLD {
        0
    } else if d < 0.0 {
        -1
    } else {
        1
    }
}

impl TranslationClass {
    pub fn from_displacement(d: &Vec3, granularity: Granularity) -> Self {
        let f = match granularity {
            Granularity::Coarse => coarse_level,
            Granularity::Fine => fine_level,
        };
        Self { granularity, levels: [f(d.x), f(d.y), f(d.z)] }
    }

    /// Sign projection of a fine class.
    pub fn coarse(&self) -> Self {
        Self { granularity: Granularity::Coarse, levels: self.levels.map(i8::signum) }
    }

    /// Every class at `granularity`: 27 coarse, 343 fine.
    pub fn all(granularity: Granularity) -> Vec<Self> {
        let r: Vec<i8> = match granularity {
            Granularity::Coarse => (-1..=1).collect(),
            Granularity::Fine => (-3..=3).collect(),
        };
        let mut out = Vec::with_capacity(r.len().pow(3));
        for &x in &r {
            for &y in &r {
                for &z in &r {
                    out.push(Self { granularity, levels: [x, y, z] });
                }
            }
        }
        out
    }

    /// DSL level tokens (`t_x`, `t_y`, `t_z` values) of a fine class.
    pub fn tokens(&self) -> [&'static str; 3] {
        let fine = match self.granularity {
            Granularity::Fine => self.levels,
            Granularity::Coarse => self.levels.map(|l| l * 2),
        };
        std::array::from_fn(|i| {
            TRANSLATION_KEYS[i].spec().allowed[(fine[i] + 3) as usize]
                .as_sym()
                .expect("level table holds tokens")
        })
    }

    /// Class of a free_form tag's translation levels.
    pub fn of_tag(tag: &MotionTag) -> Self {
        let levels = TRANSLATION_KEYS.map(|k| {
            let v = tag.get(k).expect("free_form key");
            let pos = k.spec().allowed.iter().position(|a| *a == v).expect("table value");
            pos as i8 - 3
        });
        Self { granularity: Granularity::Fine, levels }
    }
}

impl fmt::Display for TranslationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.granularity {
            Granularity::Fine => {
                let [x, y, z] = self.tokens();
                write!(f, "{x}/{y}/{z}")
            }
            Granularity::Coarse => {
                let s = |l: i8| match l {
                    -1 => '-',
                    0 => '0',
                    _ => '+',
                };
                write!(f, "{}{}{}", s(self.levels[0]), s(self.levels[1]), s(self.levels[2]))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationMode {
    CameraFine,
    Object,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationClass {
    /// Bin index 0..12 for yaw, pitch, roll.
    CameraFine([u8; 3]),
    /// Level -2..=2 for yaw and pitch.
    Object([i8; 2]),
}

pub const CAMERA_BIN_DEG: f64 = 30.0;
pub const CAMERA_BINS: u8 = 12;
pub const OBJECT_SMALL_DEG: f64 = 15.0;
pub const OBJECT_LARGE_DEG: f64 = 60.0;
const GIMBAL_TOL_DEG: f64 = 1e-3;

pub fn camera_bin(theta: f64) -> u8 {
    ((theta + 180.0) / CAMERA_BIN_DEG + 1e-9).floor().clamp(0.0, f64::from(CAMERA_BINS - 1)) as u8
}

pub fn object_level(theta: f64) -> i8 {
    let m = theta.abs();
    let level = if m < OBJECT_SMALL_DEG {
        0
    } else if m < OBJECT_LARGE_DEG {
        1
    } else {
        2
    };
    if theta < 0.0 { -level } else { level }
}

impl RotationClass {
    pub fn from_angles(angles: &[f64; 3], mode: RotationMode) -> Self {
        match mode {
            RotationMode::CameraFine => RotationClass::CameraFine(angles.map(camera_bin)),
            RotationMode::Object => RotationClass::Object([object_level(angles[0]), object_level(angles[1])]),
        }
    }

    /// Every class for `mode`: 1728 camera, 25 object.
    pub fn all(mode: RotationMode) -> Vec<Self> {
        let mut out = Vec::new();
        match mode {
            RotationMode::CameraFine => {
                for y in 0..CAMERA_BINS {
                    for p in 0..CAMERA_BINS {
                        for r in 0..CAMERA_BINS {
                            out.push(RotationClass::CameraFine([y, p, r]));
                        }
                    }
                }
            }
            RotationMode::Object => {
                for y in -2..=2 {
                    for p in -2..=2 {
                        out.push(RotationClass::Object([y, p]));
                    }
                }
            }
        }
        out
    }

    /// Class of a free_form tag's written angles.
    pub fn of_tag(tag: &MotionTag, mode: RotationMode) -> Self {
        let a = [ModifierKey::Yaw, ModifierKey::Pitch, ModifierKey::Roll].map(|k| f64::from(tag.int(k)));
        Self::from_angles(&a, mode)
    }
}

impl fmt::Display for RotationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationClass::CameraFine([y, p, r]) => write!(f, "yaw{y}/pitch{p}/roll{r}"),
            RotationClass::Object([y, p]) => write!(f, "yaw{y:+}/pitch{p:+}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationTag {
    pub class: RotationClass,
    pub angles: [f64; 3],
    /// Pitch is within 1e-3° of ±90°, where yaw and roll are ambiguous.
    pub gimbal_warning: bool,
}

pub fn tag_translation<T: MotionTrack + ?Sized>(
    t: &T,
    granularity: Granularity,
    range: (usize, usize),
) -> Result<TranslationClass, TagError> {
    Ok(TranslationClass::from_displacement(&net_translation(t, range)?, granularity))
}

pub fn tag_rotation<T: MotionTrack + ?Sized>(
    t: &T,
    mode: RotationMode,
    range: (usize, usize),
) -> Result<RotationTag, TagError> {
    let angles = net_rotation(t, range)?;
    Ok(RotationTag {
        class: RotationClass::from_angles(&angles, mode),
        angles,
        gimbal_warning: (angles[1].abs() - 90.0).abs() < GIMBAL_TOL_DEG,
    })
}

/// Frame ranges of a track's segments.
pub fn segment_ranges(bounds: &[usize]) -> Vec<(usize, usize)> {
    bounds.windows(2).map(|w| (w[0], w[1])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScore {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F1Report {
    pub classes: Vec<ClassScore>,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub samples: usize,
}

impl F1Report {
    /// Aligned text table for terminals.
    pub fn to_table(&self) -> String {
        let width = self.classes.iter().map(|c| c.label.len()).max().unwrap_or(5).max(5);
        let mut out = format!(
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>7}\n",
            "class", "precision", "recall", "f1", "support"
        );
        for c in &self.classes {
            out.push_str(&format!(
                "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>7}\n",
                c.label, c.precision, c.recall, c.f1, c.support
            ));
        }
        out.push_str(&format!("macro-F1 {:.4}  micro-F1 {:.4}  n={}\n", self.macro_f1, self.micro_f1, self.samples));
        out
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 { 0.0 } else { num as f64 / den as f64 }
}

/// Per-class precision/recall/F1 over single-label predictions. Macro-F1
/// averages classes that occur in the reference; micro-F1 pools all
/// samples, which for single-label data equals accuracy.
pub fn f1_report<L: Ord + fmt::Display>(predicted: &[L], reference: &[L]) -> Result<F1Report, TagError> {
    if predicted.len() != reference.len() || predicted.is_empty() {
        return Err(TagError::LengthMismatch(predicted.len(), reference.len()));
    }
    #[derive(Default)]
    struct Counts {
        tp: usize,
        fp: usize,
        fneg: usize,
    }
    let mut counts: BTreeMap<&L, Counts> = BTreeMap::new();
    let mut correct = 0;
    for (p, r) in predicted.iter().zip(reference) {
        if p == r {
            counts.entry(r).or_default().tp += 1;
            correct += 1;
        } else {
            counts.entry(p).or_default().fp += 1;
            counts.entry(r).or_default().fneg += 1;
        }
    }
    let in_reference: BTreeSet<&L> = reference.iter().collect();
    let mut classes = Vec::new();
    let mut macro_sum = 0.0;
    for (label, c) in &counts {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fneg);
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        if in_reference.contains(label) {
            macro_sum += f1;
        }
        classes.push(ClassScore { label: label.to_string(), precision, recall, f1, support: c.tp + c.fneg });
    }
    Ok(F1Report {
        classes,
        macro_f1: macro_sum / in_reference.len() as f64,
        micro_f1: ratio(correct, predicted.len()),
        samples: predicted.len(),
    })
}

/// Mean absolute net-angle difference per axis (degrees, wrapped) over
/// paired tracks, measured across each track's full length.
pub fn rotation_mae<T: MotionTrack>(predicted: &[T], reference: &[T]) -> Result<[f64; 3], TagError> {
    if predicted.len() != reference.len() || predicted.is_empty() {
        return Err(TagError::LengthMismatch(predicted.len(), reference.len()));
    }
    let mut acc = [0.0; 3];
    for (p, r) in predicted.iter().zip(reference) {
        let a = net_rotation(p, (0, p.frame_count() - 1))?;
        let b = net_rotation(r, (0, r.frame_count() - 1))?;
        for i in 0..3 {
            acc[i] += wrap_degrees(a[i] - b[i]).abs();
        }
    }
    Ok(acc.map(|s| s / predicted.len() as f64))
}

pub const ROTATION_SCALE_DEG: f64 = 30.0;

/// Similarity in [0, 1]: the mean of a position term and an orientation
/// term, each an exponential decay of the mean per-frame error. Positions
/// are normalized by the shorter path length (at least 1), which keeps the
/// score symmetric.
pub fn traj_similarity<T: MotionTrack + ?Sized>(a: &T, b: &T) -> Result<f64, TagError> {
    let n = a.frame_count();
    if n != b.frame_count() || n == 0 {
        return Err(TagError::LengthMismatch(n, b.frame_count()));
    }
    let path = |t: &T| (1..n).map(|k| (t.pose_at(k).position - t.pose_at(k - 1).position).norm()).sum::<f64>();
    let scale = path(a).min(path(b)).max(1.0);
    let (mut pos, mut ang) = (0.0, 0.0);
    for k in 0..n {
        let (pa, pb) = (a.pose_at(k), b.pose_at(k));
        pos += (pa.position - pb.position).norm();
        ang += pa.orientation.angle_to(&pb.orientation).to_degrees();
    }
    let (pos, ang) = (pos / n as f64, ang / n as f64);
    Ok(0.5 * (-pos / scale).exp() + 0.5 * (-ang / ROTATION_SCALE_DEG).exp())
}

pub const DEFAULT_FILTER_THRESHOLD: f64 = 0.85;
const STATIC_PATH: f64 = 0.25;
const STATIC_ROTATION_DEG: f64 = 15.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FilterOutcome {
    Accepted { program: MotionProgram, score: f64 },
    Rejected { reason: RejectReason, score: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Static,
    Score,
    Malformed,
}

fn nearest_angle(theta: f64) -> i32 {
    let t = wrap_degrees(theta);
    angle_values()
        .into_iter()
        .min_by(|a, b| (f64::from(*a) - t).abs().total_cmp(&(f64::from(*b) - t).abs()))
        .expect("angle table is non-empty")
}

/// Rebuilds a free_form camera tag from measured motion over `range`.
fn describe_segment(t: &Trajectory, range: (usize, usize)) -> Result<MotionTag, TagError> {
    let class = tag_translation(t, Granularity::Fine, range)?;
    let angles = net_rotation(t, range)?;
    let mut tag = MotionTag::new(PrimitiveKind::FreeForm);
    for (key, token) in TRANSLATION_KEYS.iter().zip(class.tokens()) {
        tag.assign(*key, key.spec().lookup(token).expect("level token")).expect("free_form key");
    }
    for (key, a) in [ModifierKey::Yaw, ModifierKey::Pitch, ModifierKey::Roll].into_iter().zip(angles) {
        tag.assign(key, ModValue::Int(nearest_angle(a))).expect("angle in table");
    }
    Ok(tag)
}

/// Describes a camera trajectory as a free_form program and keeps it when
/// the recompiled program reproduces the input. Segmentations with one to
/// four tags are tried; the best score wins, ties going to fewer tags.
pub fn dsl_round_trip_filter(t: &Trajectory, threshold: f64) -> FilterOutcome {
    if t.frame_count() != FRAME_COUNT {
        return FilterOutcome::Rejected { reason: RejectReason::Malformed, score: None };
    }
    let input = t.anchored();
    let whole = (0, FRAME_COUNT - 1);
    let rotation = input.net_rotation_raw(whole.0, whole.1);
    if input.path_length() < STATIC_PATH && rotation.iter().all(|a| a.abs() < STATIC_ROTATION_DEG - 1e-9) {
        return FilterOutcome::Rejected { reason: RejectReason::Static, score: None };
    }
    let mut best: Option<(MotionProgram, f64)> = None;
    for count in 1..=crate::dsl::MAX_TAGS {
        let tags = match segment_ranges(&segmentize(count))
            .into_iter()
            .map(|r| describe_segment(&input, r))
            .collect::<Result<Vec<_>, _>>()
        {
            Ok(tags) => tags,
            Err(_) => continue,
        };
        let Ok(program) = MotionProgram::new(Role::Camera, tags) else { continue };
        let Ok(rebuilt) = compile_camera(&program, None, 0) else { continue };
        let Ok(score) = traj_similarity(&input, &rebuilt) else { continue };
        if best.as_ref().is_none_or(|(_, s)| score > s + 1e-12) {
            best = Some((program, score));
        }
    }
    match best {
        Some((program, score)) if score >= threshold => FilterOutcome::Accepted { program, score },
        Some((_, score)) => FilterOutcome::Rejected { reason: RejectReason::Score, score: Some(score) },
        None => FilterOutcome::Rejected { reason: RejectReason::Malformed, score: None },
    }
}

/// Classes of one segment of a track.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentTags {
    pub frames: (usize, usize),
    /// Net displacement in the segment's entry frame.
    pub displacement: [f64; 3],
    pub coarse: TranslationClass,
    pub fine: TranslationClass,
    pub rotation: RotationTag,
    /// Display labels of the three classes, in that order.
    pub labels: [String; 3],
}

/// Tags every segment of `t` delimited by `bounds`.
pub fn tag_segments<T: MotionTrack + ?Sized>(
    t: &T,
    bounds: &[usize],
    mode: RotationMode,
) -> Result<Vec<SegmentTags>, TagError> {
    segment_ranges(bounds)
        .into_iter()
        .map(|range| {
            let d = net_translation(t, range)?;
            let coarse = TranslationClass::from_displacement(&d, Granularity::Coarse);
            let fine = TranslationClass::from_displacement(&d, Granularity::Fine);
            let rotation = tag_rotation(t, mode, range)?;
            let labels = [coarse.to_string(), fine.to_string(), rotation.class.to_string()];
            Ok(SegmentTags { frames: range, displacement: d.into(), coarse, fine, rotation, labels })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TagReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub camera: Option<Vec<SegmentTags>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub object: Option<Vec<SegmentTags>>,
}

impl TagReport {
    pub fn for_trajectory(t: &Trajectory) -> Result<Self, TagError> {
        Ok(Self { camera: Some(tag_segments(t, t.segment_bounds(), RotationMode::CameraFine)?), object: None })
    }

    pub fn for_scene(scene: &crate::compiler::SceneMotion) -> Result<Self, TagError> {
        let object = tag_segments(&scene.object, scene.object.segment_bounds(), RotationMode::Object)?;
        Ok(Self { object: Some(object), ..Self::for_trajectory(&scene.camera)? })
    }
}

/// Tagging scores of predicted camera tracks against references.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub pairs: usize,
    pub segments: usize,
    pub coarse: F1Report,
    pub fine: F1Report,
    pub rotation: F1Report,
    /// Degrees per axis over whole tracks.
    pub rotation_mae: [f64; 3],
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (name, r) in [("coarse translation", &self.coarse), ("fine translation", &self.fine), ("rotation", &self.rotation)]
        {
            out.push_str(&format!("== {name}\n{}\n", r.to_table()));
        }
        let [y, p, r] = self.rotation_mae;
        out.push_str(&format!("rotation MAE (deg)  yaw {y:.4}  pitch {p:.4}  roll {r:.4}\n"));
        out.push_str(&format!("pairs {}  segments {}\n", self.pairs, self.segments));
        out
    }
}

/// Compares predicted and reference camera tracks segment by segment,
/// using each reference's segmentation for both.
pub fn evaluate(predicted: &[Trajectory], reference: &[Trajectory]) -> Result<EvalReport, TagError> {
    if predicted.len() != reference.len() || predicted.is_empty() {
        return Err(TagError::LengthMismatch(predicted.len(), reference.len()));
    }
    let (mut pred, mut refs) = (Vec::new(), Vec::new());
    for (p, r) in predicted.iter().zip(reference) {
        if p.frame_count() != r.frame_count() {
            return Err(TagError::LengthMismatch(p.frame_count(), r.frame_count()));
        }
        pred.extend(tag_segments(p, r.segment_bounds(), RotationMode::CameraFine)?);
        refs.extend(tag_segments(r, r.segment_bounds(), RotationMode::CameraFine)?);
    }
    let column = |tags: &[SegmentTags], i: usize| tags.iter().map(|t| t.labels[i].clone()).collect::<Vec<_>>();
    Ok(EvalReport {
        pairs: predicted.len(),
        segments: refs.len(),
        coarse: f1_report(&column(&pred, 0), &column(&refs, 0))?,
        fine: f1_report(&column(&pred, 1), &column(&refs, 1))?,
        rotation: f1_report(&column(&pred, 2), &column(&refs, 2))?,
        rotation_mae: rotation_mae(predicted, reference)?,
    })
}
