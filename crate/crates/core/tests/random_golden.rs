//! Pins the first two seconds of the seed-42 random-mode trajectory as
//! canonical pose JSON, one line per tick.
//! Regenerate with `BLESS=1 cargo test -p alter3-core --test random_golden`.

use std::path::Path;

use alter3_core::canonical::pose_json;
use alter3_core::{ActuationMode, BodyState, Pose};
use rand_chacha::rand_core::{RngCore, SeedableRng};

fn trajectory() -> Vec<Pose> {
    let mut body = BodyState::neutral(ActuationMode::Random, 42);
    (0..16)
        .map(|_| {
            body.tick(0.125).unwrap();
            *body.current()
        })
        .collect()
}

#[test]
fn seed_42_trajectory() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/random_seed42.jsonl");
    let actual: String = trajectory().iter().map(|p| pose_json(p) + "\n").collect();
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, &actual).unwrap();
    }
    assert_eq!(actual, std::fs::read_to_string(&path).unwrap());
}

/// Recomputes the trajectory from the raw ChaCha8 stream: one fresh target per
/// axis per tick, then a step of at most `rate * dt` toward it.
#[test]
fn matches_direct_recomputation() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let mut pose = [0.5f64; 43];
    for expected in trajectory() {
        for value in pose.iter_mut() {
            let target = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            let gap = target - *value;
            *value = if gap.abs() <= 0.125 { target } else { *value + 0.125 * gap.signum() };
        }
        assert_eq!(expected.values(), &pose[..]);
    }
}
