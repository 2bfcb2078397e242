//! Contest-driven allocation of skeleton upload rates for avatar rendering,
//! with an award-setting optimizer learned by Q-learning.

pub mod contest;
pub mod dqn;
pub mod oracle;
pub mod seeds;
pub mod skeleton;

pub use contest::{
    simulate_contest, AwardSetting, ContestError, ContestOutcome, ContestantState, EffortRule,
    PopulationModel, ScenarioConfig, SelectionMode,
};
pub use dqn::{DqnConfig, DqnError, Environment, Mlp, RewardMode};
pub use skeleton::{
    downsampling_loss, Keypoint3, MotionKind, MotionProfile, SkeletonError, SkeletonFrame,
    SkeletonSequence,
};
