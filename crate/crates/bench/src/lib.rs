//! Shared fixtures for the benchmarks.

use avatar_contest::contest::{AwardSetting, ContestantState, EffortRule, ScenarioConfig};
use avatar_contest::skeleton::{generate_synthetic, MotionKind, MotionProfile};

/// Four users, 60 fps, 300 frames, 120 fps budget, pool of 100.
pub fn default_scenario(seed: u64) -> ScenarioConfig {
    let users = MotionKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let seq = generate_synthetic(&MotionProfile::preset(k), 300, 60, 17, seed + i as u64)
                .expect("valid profile");
            ContestantState::new(i, seq).expect("non-empty effort set")
        })
        .collect();
    ScenarioConfig::new(
        users,
        120,
        AwardSetting::equal_split(100.0, 4).expect("valid split"),
        EffortRule::default(),
    )
    .expect("valid scenario")
}
