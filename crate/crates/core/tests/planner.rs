//! The planner must never hand back an invalid program, whatever the
//! remote model replies.

use cinemotion_core::compiler::CompileConfig;
use cinemotion_core::corpus::{Sampler, SamplingConfig};
use cinemotion_core::llm::{ChatRequest, RemoteBackendConfig, TransportError};
use cinemotion_core::planner::{PlanError, PlanRequest, Planner};
use cinemotion_core::rng::stream_rng;
use cinemotion_core::{compile_scene, parse_program, MotionProgram, Role};
use rand::seq::IndexedRandom;
use rand::Rng;

const WORDS: &[&str] = &[
    "free_form", "orbit_track", "tail_track", "rotation_track", "|", "t_x_left", "t_y_far_up", "t_z_", "yaw_30",
    "yaw_33", "pitch_-90", "roll_15", "deg_360", "deg_999", "dir_ccw", "dir_up", "ease_in_out", "jitter_high",
    "spiral_in_0.3", "dolly_out_0.5", "world_move_1_goes_in_1.0", "world_move_3_x", "lead_lead", "object:", "camera:",
    "```", "```dsl", "\n", " ", "Sure! Here is the program:", "null", "{\"program\": 1}", "ä", "\u{0}", "🎥",
];

/// A sampled program, sometimes wrapped the way chat models wrap code.
fn near_valid(rng: &mut impl Rng) -> String {
    let sampler = Sampler::new(&SamplingConfig::default()).unwrap();
    let seed = rng.random();
    let obj = sampler.sample(Role::Object, &mut stream_rng(seed, 0)).to_dsl(false);
    let cam = sampler.sample(Role::Camera, &mut stream_rng(seed, 1)).to_dsl(false);
    match rng.random_range(0..5) {
        0 => cam,
        1 => format!("```dsl\n{obj}\n```"),
        2 => format!("object: {obj}\ncamera: {cam}"),
        3 => format!("Sure! {cam} {}", WORDS.choose(rng).unwrap()),
        _ => cam.replacen('_', "", rng.random_range(0..2)),
    }
}

fn fuzz_reply(rng: &mut impl Rng) -> String {
    match rng.random_range(0..7) {
        5 | 6 => near_valid(rng),
        0 => (0..rng.random_range(0..40)).map(|_| rng.random::<char>()).collect(),
        1 => String::from_utf8_lossy(&(0..rng.random_range(0..64)).map(|_| rng.random::<u8>()).collect::<Vec<_>>()).into_owned(),
        2 => "x".repeat(rng.random_range(0..5000)),
        _ => (0..rng.random_range(0..16)).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" "),
    }
}

fn fuzz_result(rng: &mut impl Rng) -> Result<String, TransportError> {
    match rng.random_range(0..20) {
        0 => Err(TransportError::Timeout),
        1 => Err(TransportError::BadReply("garbled".into())),
        _ => Ok(fuzz_reply(rng)),
    }
}

fn assert_sound(p: &MotionProgram) {
    p.validate().unwrap();
    let role = p.role();
    assert_eq!(&parse_program(&p.to_dsl(false), role).unwrap(), p);
}

/// Runs `count` plan and refine calls against fuzzed replies; returns how
/// many came back as programs.
fn fuzz_planner(count: usize, seed: u64) -> usize {
    let obj = parse_program("free_form t_x_right", Role::Object).unwrap();
    let cam = parse_program("orbit_track deg_180", Role::Camera).unwrap();
    let mut successes = 0;
    for i in 0..count {
        let mut rng = stream_rng(seed, i as u64);
        let replies: Vec<_> = (0..4).map(|_| fuzz_result(&mut rng)).collect();
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let transport = move |_: &ChatRequest| {
            let n = calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            replies[n % replies.len()].clone()
        };
        let planner = Planner::with_remote(transport, RemoteBackendConfig::default());
        if i % 2 == 0 {
            match planner.plan(&PlanRequest::remote("a dog runs left while the camera circles it")) {
                Ok(plan) => {
                    assert_sound(&plan.object);
                    assert_sound(&plan.camera);
                    compile_scene(&plan.object, &plan.camera, &CompileConfig::default(), 0).unwrap();
                    successes += 1;
                }
                Err(PlanError::PlanRejected(_) | PlanError::BackendUnavailable(_) | PlanError::Timeout) => {}
                Err(e) => panic!("unexpected {e:?}"),
            }
        } else {
            let r = planner.refine(&obj, &cam, "do something unusual with it");
            assert_sound(&r.object);
            assert_sound(&r.camera);
            if r.noop {
                assert_eq!((&r.object, &r.camera), (&obj, &cam));
                assert!(r.diff.is_empty());
            } else {
                successes += 1;
            }
        }
    }
    successes
}

#[test]
fn fuzzed_replies_never_yield_invalid_programs() {
    let ok = fuzz_planner(10_000, 99);
    eprintln!("{ok} of 10000 calls produced a program");
    assert!(ok > 0);
}
