use cinemotion_core::compiler::compile_camera;
use cinemotion_core::corpus::{Sampler, SamplingConfig};
use cinemotion_core::dsl::{PrimitiveKind, Role};
use cinemotion_core::kinematics::Pose;
use cinemotion_core::rng::stream_rng;
use cinemotion_core::tagger::{dsl_round_trip_filter, FilterOutcome, RejectReason, DEFAULT_FILTER_THRESHOLD};
use cinemotion_core::{MotionProgram, Quat, Trajectory, Vec3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn free_form_linear() -> Sampler {
    let mut c = SamplingConfig {
        primitive_weights: [(PrimitiveKind::FreeForm, 1.0)].into_iter().collect(),
        ..Default::default()
    };
    for (key, value) in [("ease", "linear"), ("jitter", "none")] {
        c.camera_weights.insert(key.into(), [(value.to_string(), 1.0)].into_iter().collect());
    }
    Sampler::new(&c).unwrap()
}

/// Moving programs drawn in order from a fixed stream.
fn moving_programs(count: usize) -> Vec<MotionProgram> {
    let sampler = free_form_linear();
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        let p = sampler.sample(Role::Camera, &mut stream_rng(41, i));
        i += 1;
        if !p.is_static() {
            out.push(p);
        }
    }
    out
}

/// Gaussian noise on every pose: positions in world units, orientations as
/// a rotation vector in radians.
fn corrupt(t: &Trajectory, sigma: f64, rng: &mut impl Rng) -> Trajectory {
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut draw = || Vec3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng));
    let poses = t
        .poses()
        .iter()
        .map(|p| Pose { position: p.position + draw(), orientation: p.orientation * Quat::from_scaled_axis(draw()) })
        .collect();
    Trajectory::new(poses, t.segment_bounds().to_vec()).unwrap()
}

#[test]
fn compiled_programs_pass_and_reproduce() {
    for (i, p) in moving_programs(1000).iter().enumerate() {
        let t = compile_camera(p, None, i as u64).unwrap();
        match dsl_round_trip_filter(&t, DEFAULT_FILTER_THRESHOLD) {
            FilterOutcome::Accepted { program, score } => {
                assert!(score >= 0.95, "{p}: score {score}");
                let back = compile_camera(&program, None, 0).unwrap();
                for (x, y) in back.poses().iter().zip(t.poses()) {
                    assert!((x.position - y.position).norm() < 1e-9, "{p} came back as {program}");
                    assert!(x.orientation.angle_to(&y.orientation) < 1e-9, "{p} came back as {program}");
                }
            }
            other => panic!("{p}: {other:?}"),
        }
    }
}

#[test]
fn static_is_rejected() {
    let t = Trajectory::static_identity();
    assert_eq!(
        dsl_round_trip_filter(&t, DEFAULT_FILTER_THRESHOLD),
        FilterOutcome::Rejected { reason: RejectReason::Static, score: None }
    );
}

#[test]
fn heavy_noise_is_rejected() {
    let programs = moving_programs(1000);
    let mut rng = stream_rng(43, 0);
    let rejected = programs
        .iter()
        .filter(|p| {
            let t = corrupt(&compile_camera(p, None, 0).unwrap(), 1.0, &mut rng);
            !matches!(dsl_round_trip_filter(&t, DEFAULT_FILTER_THRESHOLD), FilterOutcome::Accepted { .. })
        })
        .count();
    assert!(rejected >= 950, "rejected {rejected} of 1000");
}

#[test]
fn light_noise_keeps_high_similarity() {
    let mut rng = stream_rng(47, 0);
    for p in moving_programs(100) {
        let t = compile_camera(&p, None, 0).unwrap();
        let noisy = corrupt(&t, 0.01, &mut rng);
        assert!(
            matches!(dsl_round_trip_filter(&noisy, DEFAULT_FILTER_THRESHOLD), FilterOutcome::Accepted { .. }),
            "{p}"
        );
    }
}
