//! Procedural text and motion corpus.
//!
//! Record `i` is a pure function of `(config, i)`: its generator is the
//! ChaCha8 stream `i` under the corpus seed, so ranges can be generated in
//! parallel or resumed without replaying earlier records.
//!
//! Segment counts and sub-corpus assignment use additive-recurrence
//! (Weyl) sequences instead of independent draws. Each record still only
//! depends on its own index, but the realized mix tracks the configured
//! weights far more closely than i.i.d. sampling at a few thousand records.

mod caption;
mod paraphrase;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compiler::{compile_scene, CompileConfig, CompileError, SceneMotion};
use crate::dsl::{keys_for, ModValue, ModifierKey, MotionProgram, MotionTag, PrimitiveKind, Role};
use crate::rng::{derive_seed, stream_rng};
use crate::tagger::{
    object_level, tag_rotation, tag_translation, Granularity, RotationClass, RotationMode,
    TranslationClass,
};

pub use caption::{caption, CaptionStyle};
pub use paraphrase::{ParaphraseError, Paraphraser, RemoteParaphraser, RuleParaphraser};

pub const CORPUS_VERSION: &str = "1";

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid sampling config: {0}")]
    Config(String),
    #[error("record {index}: {source}")]
    Compile { index: u64, source: CompileError },
    #[error("record {index}: write failed: {source}")]
    Io { index: u64, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubCorpus {
    FreeformCam,
    FreeformCamPara,
    Bbox,
    BboxPara,
}

impl SubCorpus {
    pub const ALL: [SubCorpus; 4] =
        [SubCorpus::FreeformCam, SubCorpus::FreeformCamPara, SubCorpus::Bbox, SubCorpus::BboxPara];

    pub fn as_str(self) -> &'static str {
        match self {
            SubCorpus::FreeformCam => "freeform_cam",
            SubCorpus::FreeformCamPara => "freeform_cam_para",
            SubCorpus::Bbox => "bbox",
            SubCorpus::BboxPara => "bbox_para",
        }
    }

    pub fn paraphrased(self) -> bool {
        matches!(self, SubCorpus::FreeformCamPara | SubCorpus::BboxPara)
    }

    pub fn with_object(self) -> bool {
        matches!(self, SubCorpus::Bbox | SubCorpus::BboxPara)
    }
}

/// Value weights per modifier key, keyed by key name then value token.
/// Keys absent from the table always take their default.
pub type KeyWeights = BTreeMap<String, BTreeMap<String, f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub seed: u64,
    pub record_count: usize,
    /// Weights for 1, 2 and 3-4 tags; the last bucket splits evenly.
    pub segment_count_weights: [f64; 3],
    pub sub_corpus_weights: BTreeMap<SubCorpus, f64>,
    pub primitive_weights: BTreeMap<PrimitiveKind, f64>,
    pub camera_weights: KeyWeights,
    pub object_weights: KeyWeights,
}

fn table(entries: &[(&str, &[(&str, f64)])]) -> KeyWeights {
    entries
        .iter()
        .map(|(k, vs)| (k.to_string(), vs.iter().map(|(v, w)| (v.to_string(), *w)).collect()))
        .collect()
}

impl Default for SamplingConfig {
    fn default() -> Self {
        let camera = table(&[
            ("t_x", &[("no", 0.55), ("left", 0.1), ("right", 0.1), ("near_left", 0.05), ("near_right", 0.05), ("far_left", 0.075), ("far_right", 0.075)]),
            ("t_y", &[("no", 0.6), ("up", 0.1), ("down", 0.1), ("near_up", 0.05), ("near_down", 0.05), ("far_up", 0.05), ("far_down", 0.05)]),
            ("t_z", &[("no", 0.4), ("in", 0.15), ("out", 0.15), ("near_in", 0.05), ("near_out", 0.05), ("far_in", 0.1), ("far_out", 0.1)]),
            ("yaw", &[("0", 0.6), ("15", 0.05), ("-15", 0.05), ("30", 0.05), ("-30", 0.05), ("45", 0.05), ("-45", 0.05), ("90", 0.05), ("-90", 0.05)]),
            ("pitch", &[("0", 0.7), ("15", 0.05), ("-15", 0.05), ("30", 0.05), ("-30", 0.05), ("45", 0.05), ("-45", 0.05)]),
            ("roll", &[("0", 0.85), ("15", 0.05), ("-15", 0.05), ("30", 0.025), ("-30", 0.025)]),
            ("ease", &[("linear", 0.6), ("in", 0.1), ("out", 0.1), ("in_out", 0.1), ("out_in", 0.1)]),
            ("jitter", &[("none", 0.8), ("low", 0.15), ("high", 0.05)]),
            ("dutch", &[("0", 0.8), ("15", 0.05), ("-15", 0.05), ("30", 0.05), ("-30", 0.05)]),
            ("ver", &[("none", 0.6), ("aerial", 0.2), ("low-angle", 0.2)]),
            ("object", &[("none", 0.8), ("left", 0.1), ("right", 0.1)]),
            ("plane_axis", &[("y", 0.7), ("x", 0.2), ("z", 0.1)]),
            ("deg", &[("30", 0.1), ("45", 0.1), ("60", 0.1), ("90", 0.25), ("180", 0.2), ("270", 0.05), ("360", 0.2)]),
            ("dir", &[("cw", 0.5), ("ccw", 0.5)]),
            ("spiral", &[("no", 0.7), ("in_0.3", 0.1), ("out_0.3", 0.1), ("in_0.1", 0.05), ("out_0.1", 0.05)]),
            ("follow_style", &[("hard", 0.5), ("soft", 0.3), ("lazy", 0.2)]),
            ("follow_axis", &[("full", 0.7), ("x", 0.1), ("y", 0.1), ("z", 0.1)]),
            ("amp", &[("no", 0.8), ("all_1.5", 0.05), ("all_0.5", 0.05), ("x_1.5", 0.05), ("y_0.8", 0.05)]),
            ("dolly", &[("no", 0.7), ("in_0.3", 0.1), ("out_0.3", 0.1), ("in_0.5", 0.05), ("out_0.5", 0.05)]),
            ("mirror_axis", &[("no", 0.9), ("x", 0.05), ("y", 0.05)]),
            ("dont_look", &[("none", 0.9), ("dont_look", 0.1)]),
            ("lead", &[("none", 0.85), ("lead", 0.15)]),
            ("rot_axis", &[("full", 0.5), ("pan", 0.3), ("tilt", 0.2)]),
            ("push", &[("no", 0.7), ("in_0.3", 0.1), ("out_0.3", 0.1), ("in_0.5", 0.05), ("out_0.5", 0.05)]),
            ("local_offset", &[("no", 0.8), ("x_0.1", 0.05), ("x_-0.1", 0.05), ("y_0.1", 0.05), ("y_-0.1", 0.05)]),
            ("world_move_1", &[("none", 0.7), ("truck_right_1.0", 0.05), ("truck_left_1.0", 0.05), ("pedestal_up_0.5", 0.05), ("pedestal_down_0.5", 0.05), ("goes_in_1.0", 0.05), ("goes_out_1.0", 0.05)]),
            ("world_move_2", &[("none", 0.8), ("truck_right_0.5", 0.05), ("truck_left_0.5", 0.05), ("pedestal_up_0.5", 0.05), ("goes_in_0.5", 0.05)]),
        ]);
        // Object turns stay clear of the 15 and 60 degree class edges.
        let object = table(&[
            ("t_x", &[("no", 0.6), ("left", 0.1), ("right", 0.1), ("near_left", 0.05), ("near_right", 0.05), ("far_left", 0.05), ("far_right", 0.05)]),
            ("t_y", &[("no", 0.8), ("up", 0.05), ("down", 0.05), ("near_up", 0.05), ("near_down", 0.05)]),
            ("t_z", &[("no", 0.4), ("in", 0.2), ("out", 0.1), ("near_in", 0.05), ("near_out", 0.05), ("far_in", 0.15), ("far_out", 0.05)]),
            ("yaw", &[("0", 0.6), ("30", 0.1), ("-30", 0.1), ("90", 0.1), ("-90", 0.1)]),
            ("pitch", &[("0", 0.85), ("30", 0.05), ("-30", 0.05), ("90", 0.025), ("-90", 0.025)]),
        ]);
        Self {
            seed: 0,
            record_count: 10_000,
            segment_count_weights: [0.35, 0.30, 0.35],
            sub_corpus_weights: SubCorpus::ALL.into_iter().map(|s| (s, 0.25)).collect(),
            primitive_weights: [
                (PrimitiveKind::FreeForm, 0.4),
                (PrimitiveKind::OrbitTrack, 0.2),
                (PrimitiveKind::TailTrack, 0.2),
                (PrimitiveKind::RotationTrack, 0.2),
            ]
            .into_iter()
            .collect(),
            camera_weights: camera,
            object_weights: object,
        }
    }
}

impl SamplingConfig {
    /// Stable hash of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Marginal probability of each value of `key`, aligned with the
    /// key's value table. Keys without weights are certain to take their
    /// default.
    pub fn marginal(&self, role: Role, key: ModifierKey) -> Vec<(ModValue, f64)> {
        let weights = match role {
            Role::Camera => &self.camera_weights,
            Role::Object => &self.object_weights,
        };
        let spec = key.spec();
        match weights.get(key.as_str()) {
            None => vec![(spec.default, 1.0)],
            Some(map) => {
                let total: f64 = map.values().sum();
                map.iter().map(|(v, w)| (spec.lookup(v).expect("validated token"), w / total)).collect()
            }
        }
    }

    /// Expected coarse translation class frequencies of camera free_form
    /// tags: the product of per-axis sign marginals.
    pub fn expected_coarse_translation(&self) -> BTreeMap<String, f64> {
        let axes = [ModifierKey::TX, ModifierKey::TY, ModifierKey::TZ].map(|k| {
            let mut signs = [0.0; 3];
            for (v, p) in self.marginal(Role::Camera, k) {
                let m = crate::compiler::level_magnitude(v.as_sym().expect("level token"));
                let slot = if m < 0.0 { 0 } else if m > 0.0 { 2 } else { 1 };
                signs[slot] += p;
            }
            signs
        });
        let mut out = BTreeMap::new();
        for class in TranslationClass::all(Granularity::Coarse) {
            let [x, y, z] = class.levels.map(|l| (l + 1) as usize);
            let p = axes[0][x] * axes[1][y] * axes[2][z];
            if p > 0.0 {
                out.insert(class.to_string(), p);
            }
        }
        out
    }

    /// Expected object rotation class frequencies per object tag.
    pub fn expected_object_rotation(&self) -> BTreeMap<String, f64> {
        let levels = [ModifierKey::Yaw, ModifierKey::Pitch].map(|k| {
            let mut out = [0.0; 5];
            for (v, p) in self.marginal(Role::Object, k) {
                out[(object_level(f64::from(v.as_int().expect("angle"))) + 2) as usize] += p;
            }
            out
        });
        let mut out = BTreeMap::new();
        for y in -2i8..=2 {
            for p in -2i8..=2 {
                let prob = levels[0][(y + 2) as usize] * levels[1][(p + 2) as usize];
                if prob > 0.0 {
                    out.insert(RotationClass::Object([y, p]).to_string(), prob);
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: String| Err(CorpusError::Config(m));
        let positive = |ws: &mut dyn Iterator<Item = f64>| {
            let ws: Vec<f64> = ws.collect();
            ws.iter().all(|w| w.is_finite() && *w >= 0.0) && ws.iter().sum::<f64>() > 0.0
        };
        if !positive(&mut self.segment_count_weights.iter().copied()) {
            return bad("segment_count_weights must be non-negative with a positive sum".into());
        }
        if !positive(&mut self.sub_corpus_weights.values().copied()) {
            return bad("sub_corpus_weights must be non-negative with a positive sum".into());
        }
        if !positive(&mut self.primitive_weights.values().copied()) {
            return bad("primitive_weights must be non-negative with a positive sum".into());
        }
        for (role, weights) in [(Role::Camera, &self.camera_weights), (Role::Object, &self.object_weights)] {
            for (key, values) in weights {
                let Some(k) = ModifierKey::from_name(key) else {
                    return bad(format!("unknown modifier key `{key}`"));
                };
                if role == Role::Object && !k.allowed_for_object() {
                    return bad(format!("`{key}` is not an object key"));
                }
                for token in values.keys() {
                    if k.spec().lookup(token).is_none() {
                        return bad(format!("`{token}` is not a value of `{key}`"));
                    }
                }
                if !positive(&mut values.values().copied()) {
                    return bad(format!("weights for `{key}` must be non-negative with a positive sum"));
                }
            }
        }
        Ok(())
    }
}

struct KeyDraw {
    key: ModifierKey,
    values: Vec<ModValue>,
    dist: WeightedIndex<f64>,
}

fn compile_weights(weights: &KeyWeights) -> Vec<KeyDraw> {
    weights
        .iter()
        .map(|(key, values)| {
            let key = ModifierKey::from_name(key).expect("validated key");
            KeyDraw {
                key,
                values: values.keys().map(|t| key.spec().lookup(t).expect("validated token")).collect(),
                dist: WeightedIndex::new(values.values().copied()).expect("validated weights"),
            }
        })
        .collect()
}

/// Pre-built weighted tables for a config.
pub struct Sampler {
    config: SamplingConfig,
    camera: Vec<KeyDraw>,
    object: Vec<KeyDraw>,
    primitives: (Vec<PrimitiveKind>, WeightedIndex<f64>),
}

fn weyl(offset_seed: u64, alpha: f64, index: u64) -> f64 {
    let offset = (offset_seed >> 11) as f64 / (1u64 << 53) as f64;
    (offset + alpha * index as f64).fract()
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SILVER: f64 = std::f64::consts::SQRT_2 - 1.0;
const BRONZE: f64 = 0.732_050_807_568_877_2;

fn pick_cumulative(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w / total;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

impl Sampler {
    pub fn new(config: &SamplingConfig) -> Result<Self, CorpusError> {
        config.validate()?;
        let kinds: Vec<PrimitiveKind> = config.primitive_weights.keys().copied().collect();
        let dist = WeightedIndex::new(config.primitive_weights.values().copied())
            .map_err(|e| CorpusError::Config(e.to_string()))?;
        Ok(Self {
            config: config.clone(),
            camera: compile_weights(&config.camera_weights),
            object: compile_weights(&config.object_weights),
            primitives: (kinds, dist),
        })
    }

    pub fn config(&self) -> &SamplingConfig {
        &self.config
    }

    /// Tag count for quantile `u` of the segment-count distribution.
    pub fn tag_count(&self, u: f64, rng: &mut ChaCha8Rng) -> usize {
        match pick_cumulative(&self.config.segment_count_weights, u) {
            0 => 1,
            1 => 2,
            _ => {
                if rng.random_bool(0.5) {
                    3
                } else {
                    4
                }
            }
        }
    }

    fn sample_tag(&self, role: Role, primitive: PrimitiveKind, rng: &mut ChaCha8Rng) -> MotionTag {
        let draws = match role {
            Role::Camera => &self.camera,
            Role::Object => &self.object,
        };
        let mut tag = MotionTag::new(primitive);
        let applicable: Vec<ModifierKey> = keys_for(primitive).collect();
        for d in draws.iter().filter(|d| applicable.contains(&d.key)) {
            let value = d.values[d.dist.sample(rng)];
            tag.assign(d.key, value).expect("validated value");
        }
        tag
    }

    /// Samples a program with a given tag-count quantile. `free_only`
    /// restricts camera tags to free_form.
    pub fn sample_with(&self, role: Role, rng: &mut ChaCha8Rng, count_u: f64, free_only: bool) -> MotionProgram {
        let n = self.tag_count(count_u, rng);
        let tags = (0..n)
            .map(|_| {
                let primitive = if role == Role::Object || free_only {
                    PrimitiveKind::FreeForm
                } else {
                    self.primitives.0[self.primitives.1.sample(rng)]
                };
                self.sample_tag(role, primitive, rng)
            })
            .collect();
        MotionProgram::new(role, tags).expect("sampled programs are grammar-valid")
    }

    pub fn sample(&self, role: Role, rng: &mut ChaCha8Rng) -> MotionProgram {
        let u = rng.random::<f64>();
        self.sample_with(role, rng, u, false)
    }
}

/// Draws one program from `config` with an i.i.d. tag count.
pub fn sample_program(role: Role, config: &SamplingConfig, rng: &mut ChaCha8Rng) -> Result<MotionProgram, CorpusError> {
    Ok(Sampler::new(config)?.sample(role, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParaphraseStatus {
    None,
    Ok,
    Unavailable,
}

mod program_text {
    use super::*;

    pub fn serialize<S: serde::Serializer>(p: &MotionProgram, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&p.to_dsl(false))
    }

    pub fn parse<'de, D: serde::Deserializer<'de>>(d: D, role: Role) -> Result<MotionProgram, D::Error> {
        let text = String::deserialize(d)?;
        crate::dsl::parse_program(&text, role).map_err(serde::de::Error::custom)
    }

    pub mod object {
        pub use super::serialize;
        pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<super::MotionProgram, D::Error> {
            super::parse(d, super::Role::Object)
        }
    }

    pub mod camera {
        pub use super::serialize;
        pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<super::MotionProgram, D::Error> {
            super::parse(d, super::Role::Camera)
        }
    }
}

/// One line of the corpus. Field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub index: u64,
    pub seed: u64,
    pub sub_corpus: SubCorpus,
    #[serde(with = "program_text::object")]
    pub program_obj: MotionProgram,
    #[serde(with = "program_text::camera")]
    pub program_cam: MotionProgram,
    pub caption_obj: String,
    pub caption_cam: String,
    /// Template captions before paraphrasing, for paraphrased records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_obj: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_cam: Option<String>,
    pub paraphrase: ParaphraseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneMotion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene_path: Option<String>,
}

const PARAPHRASE_STREAM: u64 = 0x7061_7261;

/// Builds record `index` of the corpus described by `sampler`.
pub fn make_record(
    sampler: &Sampler,
    index: u64,
    paraphraser: &dyn Paraphraser,
) -> Result<DatasetRecord, CorpusError> {
    let config = sampler.config();
    let mut rng = stream_rng(config.seed, index);
    let seed = derive_seed(config.seed, &[index]);
    let subs: Vec<SubCorpus> = config.sub_corpus_weights.keys().copied().collect();
    let sub_w: Vec<f64> = config.sub_corpus_weights.values().copied().collect();
    let sub_corpus = subs[pick_cumulative(&sub_w, weyl(derive_seed(config.seed, &[1]), SILVER, index))];

    let cam_u = weyl(derive_seed(config.seed, &[2]), GOLDEN, index);
    let program_cam = sampler.sample_with(Role::Camera, &mut rng, cam_u, !sub_corpus.with_object());
    let program_obj = if sub_corpus.with_object() {
        let obj_u = weyl(derive_seed(config.seed, &[3]), BRONZE, index);
        sampler.sample_with(Role::Object, &mut rng, obj_u, true)
    } else {
        MotionProgram::static_program(Role::Object)
    };

    let scene = compile_scene(&program_obj, &program_cam, &CompileConfig::default(), seed)
        .map_err(|source| CorpusError::Compile { index, source })?;

    let cam_style = if sub_corpus.with_object() { CaptionStyle::CameraRelative } else { CaptionStyle::CameraFree };
    let template_cam = caption(&program_cam, cam_style);
    let template_obj = caption(&program_obj, CaptionStyle::Object);
    let (caption_obj, caption_cam, status, templates) = if sub_corpus.paraphrased() {
        let para = |text: &str, field: u64| paraphraser.paraphrase(text, derive_seed(seed, &[PARAPHRASE_STREAM, field]));
        match (para(&template_obj, 0), para(&template_cam, 1)) {
            (Ok(o), Ok(c)) => (o, c, ParaphraseStatus::Ok, Some((template_obj, template_cam))),
            _ => (template_obj.clone(), template_cam.clone(), ParaphraseStatus::Unavailable, Some((template_obj, template_cam))),
        }
    } else {
        (template_obj, template_cam, ParaphraseStatus::None, None)
    };
    let (template_obj, template_cam) = templates.map_or((None, None), |(o, c)| (Some(o), Some(c)));

    Ok(DatasetRecord {
        id: format!("{}-{index:08}", sub_corpus.as_str()),
        index,
        seed,
        sub_corpus,
        program_obj,
        program_cam,
        caption_obj,
        caption_cam,
        template_obj,
        template_cam,
        paraphrase: status,
        scene: Some(scene),
        scene_path: None,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub record_count: usize,
    pub sub_corpus_counts: BTreeMap<String, usize>,
    /// Camera programs by tag count.
    pub segment_counts: BTreeMap<String, usize>,
    pub paraphrase: BTreeMap<String, usize>,
    /// Class histograms measured by the tagger on compiled trajectories.
    pub histograms: BTreeMap<String, BTreeMap<String, usize>>,
    /// Class frequencies implied by the sampling weights.
    pub expected: BTreeMap<String, BTreeMap<String, f64>>,
}

pub const HIST_CAMERA_COARSE: &str = "camera_translation_coarse";
pub const HIST_CAMERA_FINE: &str = "camera_translation_fine";
pub const HIST_CAMERA_PRIMITIVE: &str = "camera_primitive";
pub const HIST_OBJECT_ROTATION: &str = "object_rotation";

impl Manifest {
    fn new(config: &SamplingConfig) -> Self {
        let mut expected = BTreeMap::new();
        expected.insert(HIST_CAMERA_COARSE.to_string(), config.expected_coarse_translation());
        expected.insert(HIST_OBJECT_ROTATION.to_string(), config.expected_object_rotation());
        Self {
            version: CORPUS_VERSION.into(),
            config_hash: config.hash(),
            seed: config.seed,
            record_count: 0,
            expected,
            ..Default::default()
        }
    }

    fn bump(&mut self, hist: &str, label: String) {
        *self.histograms.entry(hist.to_string()).or_default().entry(label).or_default() += 1;
    }

    /// Adds one record's statistics.
    pub fn add(&mut self, r: &DatasetRecord, scene: &SceneMotion) {
        self.record_count += 1;
        *self.sub_corpus_counts.entry(r.sub_corpus.as_str().into()).or_default() += 1;
        *self.segment_counts.entry(r.program_cam.tags().len().to_string()).or_default() += 1;
        let status = match r.paraphrase {
            ParaphraseStatus::None => "none",
            ParaphraseStatus::Ok => "ok",
            ParaphraseStatus::Unavailable => "unavailable",
        };
        *self.paraphrase.entry(status.into()).or_default() += 1;
        let bounds = scene.camera.segment_bounds();
        for (tag, w) in r.program_cam.tags().iter().zip(bounds.windows(2)) {
            self.bump(HIST_CAMERA_PRIMITIVE, tag.primitive().to_string());
            if tag.primitive() == PrimitiveKind::FreeForm {
                let range = (w[0], w[1]);
                let coarse = tag_translation(&scene.camera, Granularity::Coarse, range).expect("valid range");
                let fine = tag_translation(&scene.camera, Granularity::Fine, range).expect("valid range");
                self.bump(HIST_CAMERA_COARSE, coarse.to_string());
                self.bump(HIST_CAMERA_FINE, fine.to_string());
            }
        }
        if r.sub_corpus.with_object() {
            for w in scene.object.segment_bounds().windows(2) {
                let class = tag_rotation(&scene.object, RotationMode::Object, (w[0], w[1])).expect("valid range");
                self.bump(HIST_OBJECT_ROTATION, class.class.to_string());
            }
        }
    }

    /// Observed relative frequencies of one histogram.
    pub fn frequencies(&self, hist: &str) -> BTreeMap<String, f64> {
        let Some(h) = self.histograms.get(hist) else { return BTreeMap::new() };
        let total: usize = h.values().sum();
        h.iter().map(|(k, v)| (k.clone(), *v as f64 / total.max(1) as f64)).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct GenerateOptions {
    /// First record to write; earlier records only feed the manifest.
    pub start: usize,
    /// Write scenes as `<dir>/<id>.json` instead of embedding them.
    pub traj_dir: Option<PathBuf>,
}

const CHUNK: usize = 512;

/// Generates `config.record_count` records, writing JSONL lines for
/// indices `opts.start..` to `sink` in index order, and returns the
/// manifest over the whole corpus.
pub fn generate_corpus(
    config: &SamplingConfig,
    opts: &GenerateOptions,
    paraphraser: &dyn Paraphraser,
    sink: &mut dyn Write,
) -> Result<Manifest, CorpusError> {
    let sampler = Sampler::new(config)?;
    let mut manifest = Manifest::new(config);
    if let Some(dir) = &opts.traj_dir {
        std::fs::create_dir_all(dir).map_err(|source| CorpusError::Io { index: opts.start as u64, source })?;
    }
    let indices: Vec<u64> = (0..config.record_count as u64).collect();
    for chunk in indices.chunks(CHUNK) {
        let built: Vec<Result<(DatasetRecord, SceneMotion), CorpusError>> = chunk
            .par_iter()
            .map(|&i| {
                let mut r = make_record(&sampler, i, paraphraser)?;
                let scene = r.scene.clone().expect("fresh records embed their scene");
                if let Some(dir) = &opts.traj_dir {
                    let path = dir.join(format!("{}.json", r.id));
                    r.scene = None;
                    r.scene_path = Some(path.to_string_lossy().into_owned());
                }
                Ok((r, scene))
            })
            .collect();
        for item in built {
            let (record, scene) = item?;
            manifest.add(&record, &scene);
            if (record.index as usize) < opts.start {
                continue;
            }
            let io = |source| CorpusError::Io { index: record.index, source };
            if let Some(path) = &record.scene_path {
                let json = serde_json::to_vec(&scene).expect("scene serializes");
                std::fs::write(path, json).map_err(io)?;
            }
            let line = serde_json::to_string(&record).expect("record serializes");
            sink.write_all(line.as_bytes()).map_err(io)?;
            sink.write_all(b"\n").map_err(io)?;
        }
    }
    sink.flush().map_err(|source| CorpusError::Io { index: config.record_count as u64, source })?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;

    fn forced_forward() -> SamplingConfig {
        let mut c = SamplingConfig {
            segment_count_weights: [1.0, 0.0, 0.0],
            primitive_weights: [(PrimitiveKind::FreeForm, 1.0)].into_iter().collect(),
            ..Default::default()
        };
        c.camera_weights = table(&[("t_z", &[("in", 1.0)])]);
        c
    }

    #[test]
    fn degenerate_distribution() {
        let p = sample_program(Role::Camera, &forced_forward(), &mut stream_rng(1, 0)).unwrap();
        assert_eq!(p.to_dsl(false), "free_form t_z_in");
    }

    #[test]
    fn samples_round_trip_through_text() {
        let sampler = Sampler::new(&SamplingConfig::default()).unwrap();
        let mut rng = stream_rng(5, 0);
        for role in [Role::Camera, Role::Object] {
            for _ in 0..500 {
                let p = sampler.sample(role, &mut rng);
                assert_eq!(parse_program(&p.to_dsl(false), role).unwrap(), p);
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SamplingConfig::default();
        c.object_weights.insert("roll".into(), [("0".to_string(), 1.0)].into_iter().collect());
        assert!(matches!(c.validate(), Err(CorpusError::Config(_))));
        let mut c = SamplingConfig::default();
        c.camera_weights.insert("deg".into(), [("999".to_string(), 1.0)].into_iter().collect());
        assert!(c.validate().is_err());
        assert!(SamplingConfig { segment_count_weights: [0.0; 3], ..Default::default() }.validate().is_err());
    }

    #[test]
    fn expected_histograms_sum_to_one() {
        let c = SamplingConfig::default();
        assert!((c.expected_coarse_translation().values().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((c.expected_object_rotation().values().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus() {
        let c = SamplingConfig { record_count: 0, ..Default::default() };
        let mut out = Vec::new();
        let m = generate_corpus(&c, &GenerateOptions::default(), &RuleParaphraser::default(), &mut out).unwrap();
        assert!(out.is_empty());
        assert_eq!(m.record_count, 0);
        assert_eq!(m.config_hash.len(), 64);
    }

    #[test]
    fn records_are_self_consistent() {
        let sampler = Sampler::new(&SamplingConfig::default()).unwrap();
        for i in 0..40 {
            let r = make_record(&sampler, i, &RuleParaphraser::default()).unwrap();
            let again = compile_scene(&r.program_obj, &r.program_cam, &CompileConfig::default(), r.seed).unwrap();
            assert_eq!(r.scene.as_ref().unwrap(), &again);
            let line = serde_json::to_string(&r).unwrap();
            let back: DatasetRecord = serde_json::from_str(&line).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn paraphrase_failure_keeps_template() {
        struct Down;
        impl Paraphraser for Down {
            fn paraphrase(&self, _: &str, _: u64) -> Result<String, ParaphraseError> {
                Err(ParaphraseError::BackendUnavailable("down".into()))
            }
        }
        let config = SamplingConfig {
            sub_corpus_weights: [(SubCorpus::BboxPara, 1.0)].into_iter().collect(),
            ..Default::default()
        };
        let r = make_record(&Sampler::new(&config).unwrap(), 0, &Down).unwrap();
        assert_eq!(r.paraphrase, ParaphraseStatus::Unavailable);
        assert_eq!(Some(&r.caption_cam), r.template_cam.as_ref());
    }
}
