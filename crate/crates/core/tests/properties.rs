//! Property tests for the invariants each module promises.

use std::collections::BTreeMap;

use cinemotion_core::compiler::{compile_camera, compile_object, compile_scene, CompileConfig};
use cinemotion_core::corpus::{Sampler, SamplingConfig};
use cinemotion_core::dsl::{keys_for, parse_program, MotionProgram, PrimitiveKind, Role};
use cinemotion_core::kinematics::{
    compose_local_rotation, ease, jitter_offsets, look_at, EasingKind, JitterKind, Pose, Quat, Vec3,
};
use cinemotion_core::render::{project_point, unproject, CameraIntrinsics, Projection};
use cinemotion_core::rng::stream_rng;
use cinemotion_core::tagger::{
    net_translation, segment_ranges, tag_rotation, tag_translation, traj_similarity, Granularity, RotationClass,
    RotationMode, TranslationClass,
};
use cinemotion_core::BoxTrack;
use proptest::prelude::*;

fn forced(mut config: SamplingConfig, role: Role, pairs: &[(&str, &str)]) -> SamplingConfig {
    let table = match role {
        Role::Camera => &mut config.camera_weights,
        Role::Object => &mut config.object_weights,
    };
    for (key, value) in pairs {
        table.insert(key.to_string(), BTreeMap::from([(value.to_string(), 1.0)]));
    }
    config
}

fn only(primitive: PrimitiveKind) -> SamplingConfig {
    SamplingConfig { primitive_weights: BTreeMap::from([(primitive, 1.0)]), ..Default::default() }
}

fn sample(config: &SamplingConfig, role: Role, seed: u64) -> MotionProgram {
    Sampler::new(config).unwrap().sample(role, &mut stream_rng(seed, 0))
}

fn still_object() -> BoxTrack {
    let cfg = CompileConfig::default();
    BoxTrack::stationary(Vec3::from(cfg.object_start), Vec3::from(cfg.object_extents)).unwrap()
}

fn moving_object(seed: u64) -> BoxTrack {
    let p = sample(&SamplingConfig::default(), Role::Object, seed);
    let cfg = CompileConfig::default();
    compile_object(&p, Vec3::from(cfg.object_start), Vec3::from(cfg.object_extents), seed).unwrap()
}

const TOKENS: &[&str] = &[
    "free_form", "orbit_track", "tail_track", "rotation_track", "|", "t_x_left", "t_z_far_in", "yaw_30", "yaw_31",
    "deg_360", "deg_999", "dir_ccw", "ease_in", "jitter_low", "spiral_in_0.3", "dolly_", "_", "t_", "world_move_1_goes_in_1.0",
    "rot_axis_pan", "amp_all_1.5", "dont_look", "lead_lead", "pitch_-90", "ver_low-angle", "", " ", "\t", "ä",
];

fn token_soup() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(TOKENS), 0..12).prop_map(|ts| ts.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parser_is_total(text in prop_oneof![any::<String>(), token_soup()], camera in any::<bool>()) {
        let role = if camera { Role::Camera } else { Role::Object };
        match parse_program(&text, role) {
            Ok(p) => {
                prop_assert!(p.validate().is_ok());
                prop_assert_eq!(parse_program(&p.to_dsl(false), role).unwrap(), p);
            }
            Err(e) => prop_assert!(!e.kind.code().is_empty()),
        }
    }

    #[test]
    fn defaults_are_complete(seed in any::<u64>()) {
        let p = sample(&SamplingConfig::default(), Role::Camera, seed);
        for tag in p.tags() {
            for key in keys_for(tag.primitive()) {
                prop_assert!(tag.get(key).is_some());
            }
        }
    }

    #[test]
    fn look_at_points_at_target(
        eye in prop::array::uniform3(-10.0f64..10.0),
        target in prop::array::uniform3(-10.0f64..10.0),
        roll in -45.0f64..45.0,
    ) {
        let (eye, target) = (Vec3::from(eye), Vec3::from(target));
        prop_assume!((target - eye).norm() > 1e-3);
        let dir = (target - eye).normalize();
        prop_assume!(dir.y.abs() < 0.999);
        let q = look_at(&eye, &target, &Vec3::y(), roll).unwrap();
        prop_assert!((q * Vec3::new(0.0, 0.0, -1.0) - dir).norm() < 1e-9);
    }

    #[test]
    fn jitter_is_pinned(seed in any::<u64>(), n in 3usize..40, high in any::<bool>()) {
        let kind = if high { JitterKind::High } else { JitterKind::Low };
        let j = jitter_offsets(kind, seed, n);
        prop_assert_eq!(j[0], Vec3::zeros());
        prop_assert_eq!(j[n - 1], Vec3::zeros());
    }

    #[test]
    fn compile_is_deterministic(seed in any::<u64>()) {
        let cam = sample(&SamplingConfig::default(), Role::Camera, seed);
        let obj = sample(&SamplingConfig::default(), Role::Object, seed ^ 1);
        let a = compile_scene(&obj, &cam, &CompileConfig::default(), seed).unwrap();
        let b = compile_scene(&obj, &cam, &CompileConfig::default(), seed).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn no_teleports(seed in any::<u64>()) {
        let config = forced(SamplingConfig::default(), Role::Camera, &[("jitter", "none")]);
        let cam = sample(&config, Role::Camera, seed);
        // A tracking camera inherits its subject's speed profile, so the bound
        // is about the camera's own motion.
        let obj = still_object();
        let t = compile_camera(&cam, Some(&obj), seed).unwrap();
        let pos: Vec<Vec3> = t.positions().collect();
        for (a, b) in segment_ranges(t.segment_bounds()) {
            let mut steps: Vec<f64> = (a + 1..=b).map(|k| (pos[k] - pos[k - 1]).norm()).collect();
            let max = steps.iter().cloned().fold(0.0, f64::max);
            steps.sort_by(|x, y| x.total_cmp(y));
            let median = steps[steps.len() / 2];
            prop_assert!(max <= 3.0 * median + 1e-9, "{cam}: segment {a}..{b} max {max} median {median}");
        }
    }

    #[test]
    fn orbit_radius_and_closure(seed in any::<u64>()) {
        let config = forced(only(PrimitiveKind::OrbitTrack), Role::Camera, &[("spiral", "no"), ("ver", "none"), ("jitter", "none")]);
        let config = SamplingConfig { segment_count_weights: [1.0, 0.0, 0.0], ..config };
        let cam = sample(&config, Role::Camera, seed);
        let obj = still_object();
        let t = compile_camera(&cam, Some(&obj), seed).unwrap();
        let c = obj.centers()[0];
        let r0 = (t.poses()[0].position - c).norm();
        for p in t.positions() {
            prop_assert!(((p - c).norm() - r0).abs() < 1e-6, "{cam}");
        }
        if cam.tags()[0].int(cinemotion_core::ModifierKey::Deg) == 360 {
            prop_assert!((t.poses()[20].position - t.poses()[0].position).norm() < 1e-6, "{cam}");
        }
    }

    #[test]
    fn hard_tail_keeps_offset(seed in any::<u64>()) {
        let config = forced(
            only(PrimitiveKind::TailTrack),
            Role::Camera,
            &[("follow_style", "hard"), ("follow_axis", "full"), ("amp", "no"), ("dolly", "no"), ("jitter", "none"),
              ("mirror_axis", "no"), ("lead", "none"), ("ver", "none")],
        );
        let cam = sample(&config, Role::Camera, seed);
        let obj = moving_object(seed);
        let t = compile_camera(&cam, Some(&obj), seed).unwrap();
        let offset = t.poses()[0].position - obj.centers()[0];
        for k in 0..21 {
            prop_assert!((t.poses()[k].position - obj.centers()[k] - offset).norm() < 1e-9, "{cam} frame {k}");
        }
    }

    #[test]
    fn rotation_track_frames_center(seed in any::<u64>()) {
        let config = forced(
            only(PrimitiveKind::RotationTrack),
            Role::Camera,
            &[("rot_axis", "full"), ("local_offset", "no"), ("object", "none"), ("jitter", "none")],
        );
        let cam = sample(&config, Role::Camera, seed);
        let obj = moving_object(seed);
        let t = compile_camera(&cam, Some(&obj), seed).unwrap();
        for (k, pose) in t.poses().iter().enumerate() {
            let to = (obj.centers()[k] - pose.position).normalize();
            let angle = pose.forward().dot(&to).clamp(-1.0, 1.0).acos();
            prop_assert!(angle < 1e-6, "{cam} frame {k}: {angle}");
        }
    }

    #[test]
    fn free_form_net_effect(seed in any::<u64>()) {
        let config = forced(
            only(PrimitiveKind::FreeForm),
            Role::Camera,
            &[("yaw", "0"), ("pitch", "0"), ("roll", "0"), ("ease", "linear"), ("jitter", "none")],
        );
        let cam = sample(&config, Role::Camera, seed);
        let t = compile_camera(&cam, None, seed).unwrap();
        for (tag, range) in cam.tags().iter().zip(segment_ranges(t.segment_bounds())) {
            let d = net_translation(&t, range).unwrap();
            let want = [cinemotion_core::ModifierKey::TX, cinemotion_core::ModifierKey::TY, cinemotion_core::ModifierKey::TZ]
                .map(|k| cinemotion_core::compiler::level_magnitude(tag.sym(k)));
            prop_assert!((d - Vec3::from(want)).norm() < 1e-9, "{cam}");
        }
    }

    #[test]
    fn tagger_round_trip(seed in any::<u64>(), camera in any::<bool>()) {
        let role = if camera { Role::Camera } else { Role::Object };
        let pinned: &[(&str, &str)] = if camera { &[("ease", "linear"), ("jitter", "none")] } else { &[] };
        let config = forced(only(PrimitiveKind::FreeForm), role, pinned);
        let p = sample(&config, role, seed);
        let cfg = CompileConfig::default();
        let (ranges, fine, rot): (Vec<_>, Vec<TranslationClass>, Vec<RotationClass>) = if camera {
            let t = compile_camera(&p, None, seed).unwrap();
            let ranges = segment_ranges(t.segment_bounds());
            let fine = ranges.iter().map(|r| tag_translation(&t, Granularity::Fine, *r).unwrap()).collect();
            let rot = ranges.iter().map(|r| tag_rotation(&t, RotationMode::CameraFine, *r).unwrap().class).collect();
            (ranges, fine, rot)
        } else {
            let b = compile_object(&p, Vec3::from(cfg.object_start), Vec3::from(cfg.object_extents), seed).unwrap();
            let ranges = segment_ranges(b.segment_bounds());
            let fine = ranges.iter().map(|r| tag_translation(&b, Granularity::Fine, *r).unwrap()).collect();
            let rot = ranges.iter().map(|r| tag_rotation(&b, RotationMode::Object, *r).unwrap().class).collect();
            (ranges, fine, rot)
        };
        prop_assert_eq!(ranges.len(), p.tags().len());
        let mode = if camera { RotationMode::CameraFine } else { RotationMode::Object };
        for (i, tag) in p.tags().iter().enumerate() {
            prop_assert_eq!(fine[i], TranslationClass::of_tag(tag), "{}", p);
            prop_assert_eq!(rot[i], RotationClass::of_tag(tag, mode), "{}", p);
        }
    }

    #[test]
    fn coarse_agrees_with_fine(d in prop::array::uniform3(-4.0f64..4.0)) {
        let d = Vec3::from(d);
        let fine = TranslationClass::from_displacement(&d, Granularity::Fine);
        prop_assert_eq!(fine.coarse(), TranslationClass::from_displacement(&d, Granularity::Coarse));
    }

    #[test]
    fn similarity_is_symmetric(a in any::<u64>(), b in any::<u64>()) {
        let ta = compile_camera(&sample(&only(PrimitiveKind::FreeForm), Role::Camera, a), None, a).unwrap();
        let tb = compile_camera(&sample(&only(PrimitiveKind::FreeForm), Role::Camera, b), None, b).unwrap();
        prop_assert!((traj_similarity(&ta, &ta).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((traj_similarity(&ta, &tb).unwrap() - traj_similarity(&tb, &ta).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn unprojection_inverts_projection(
        p in prop::array::uniform3(-5.0f64..5.0),
        yaw in -180.0f64..180.0,
        pitch in -60.0f64..60.0,
    ) {
        let cam = Pose::new(Vec3::new(0.3, -0.2, 1.0), cinemotion_core::kinematics::euler_rotation(yaw, pitch, 0.0));
        let k = CameraIntrinsics::default();
        let p = Vec3::from(p);
        if let Projection::Pixel(px) = project_point(&p, &cam, &k) {
            let depth = -cam.to_local(&p).z;
            prop_assert!((unproject(px, depth, &cam, &k) - p).norm() < 1e-6);
        }
    }
}

#[test]
fn grammar_closure_over_ten_thousand_samples() {
    let sampler = Sampler::new(&SamplingConfig::default()).unwrap();
    let mut rng = stream_rng(2024, 0);
    for i in 0..10_000 {
        let role = if i % 2 == 0 { Role::Camera } else { Role::Object };
        let p = sampler.sample(role, &mut rng);
        assert_eq!(parse_program(&p.to_dsl(false), role).unwrap(), p);
        let explicit = parse_program(&p.to_dsl(true), role).unwrap();
        assert_eq!(explicit.tags().len(), p.tags().len());
        for (x, y) in explicit.tags().iter().zip(p.tags()) {
            assert_eq!(x.primitive(), y.primitive());
            for key in keys_for(y.primitive()) {
                assert_eq!(x.get(key), y.get(key), "{key:?} in {}", p.to_dsl(false));
            }
        }
    }
}

#[test]
fn easing_is_monotone_with_exact_endpoints() {
    for kind in [EasingKind::Linear, EasingKind::In, EasingKind::Out, EasingKind::InOut, EasingKind::OutIn] {
        assert_eq!(ease(kind, 0.0).unwrap(), 0.0);
        assert_eq!(ease(kind, 1.0).unwrap(), 1.0);
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = ease(kind, f64::from(i) / 1000.0).unwrap();
            assert!(v >= prev, "{kind:?} at {i}");
            prev = v;
        }
    }
}

#[test]
fn long_rotation_chains_stay_unit() {
    let mut q = Quat::identity();
    let mut rng = stream_rng(8, 0);
    use rand::Rng;
    for _ in 0..10_000 {
        q = compose_local_rotation(&q, rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
        assert!((q.quaternion().norm() - 1.0).abs() < 1e-9);
    }
}
