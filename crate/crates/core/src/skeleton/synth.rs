//! Deterministic synthetic motion: a standing base pose with sinusoidal
//! oscillation on a chosen subset of joints.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use super::{Keypoint3, Result, SkeletonError, SkeletonFrame, SkeletonSequence};

pub const JOINT_NAMES: [&str; 17] = [
    "nose",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
];

// Meters, hip-centered, y up. Roughly a 1.7 m adult.
const BASE_POSE: [[f64; 3]; 17] = [
    [0.00, 0.70, 0.08],
    [0.03, 0.73, 0.07],
    [-0.03, 0.73, 0.07],
    [0.07, 0.71, 0.00],
    [-0.07, 0.71, 0.00],
    [0.18, 0.50, 0.00],
    [-0.18, 0.50, 0.00],
    [0.22, 0.22, 0.00],
    [-0.22, 0.22, 0.00],
    [0.24, -0.02, 0.03],
    [-0.24, -0.02, 0.03],
    [0.10, 0.00, 0.00],
    [-0.10, 0.00, 0.00],
    [0.11, -0.45, 0.02],
    [-0.11, -0.45, 0.02],
    [0.11, -0.88, 0.00],
    [-0.11, -0.88, 0.00],
];

/// Elbows and wrists.
const ARM_JOINTS: [usize; 4] = [7, 8, 9, 10];

/// Neutral pose with `k` joints; layouts wider than 17 repeat the table.
pub fn base_pose(k: usize) -> Vec<Keypoint3> {
    (0..k)
        .map(|j| {
            let [x, y, z] = BASE_POSE[j % BASE_POSE.len()];
            Keypoint3::new(x, y, z)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    Run,
    Dance,
    Wave,
    Stand,
}

impl MotionKind {
    pub const ALL: [MotionKind; 4] = [
        MotionKind::Run,
        MotionKind::Dance,
        MotionKind::Wave,
        MotionKind::Stand,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MotionKind::Run => "run",
            MotionKind::Dance => "dance",
            MotionKind::Wave => "wave",
            MotionKind::Stand => "stand",
        }
    }
}

impl fmt::Display for MotionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MotionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "run" => Ok(MotionKind::Run),
            "dance" => Ok(MotionKind::Dance),
            "wave" => Ok(MotionKind::Wave),
            "stand" => Ok(MotionKind::Stand),
            other => Err(format!("unknown motion kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionProfile {
    pub kind: MotionKind,
    /// Peak displacement in meters.
    pub amplitude: f64,
    /// Oscillation frequency in hertz.
    pub temporal_frequency: f64,
    pub active_joints: Vec<usize>,
}

impl MotionProfile {
    pub fn new(
        kind: MotionKind,
        amplitude: f64,
        temporal_frequency: f64,
        active_joints: Vec<usize>,
    ) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(SkeletonError::InvalidProfile(
                "amplitude must be finite and >= 0",
            ));
        }
        if !(temporal_frequency > 0.0 && temporal_frequency.is_finite()) {
            return Err(SkeletonError::InvalidProfile(
                "temporal frequency must be > 0",
            ));
        }
        if active_joints.is_empty() {
            return Err(SkeletonError::InvalidProfile("no active joints"));
        }
        Ok(Self {
            kind,
            amplitude,
            temporal_frequency,
            active_joints,
        })
    }

    /// Default parameters for each motion kind. Ordered so that run moves
    /// the most, then dance, wave and stand.
    pub fn preset(kind: MotionKind) -> Self {
        let all: Vec<usize> = (0..BASE_POSE.len()).collect();
        let (amplitude, temporal_frequency, active_joints) = match kind {
            MotionKind::Run => (0.25, 2.0, all),
            MotionKind::Dance => (0.18, 1.5, all),
            MotionKind::Wave => (0.10, 1.0, ARM_JOINTS.to_vec()),
            MotionKind::Stand => (0.005, 0.5, all),
        };
        Self {
            kind,
            amplitude,
            temporal_frequency,
            active_joints,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// Generates `frames` frames of `joints` keypoints at `rate` fps.
///
/// Joint `j` at frame `i` sits at `base_j + A * sin(2*pi*w*i/M + phi_j) * u_j`
/// where the phase `phi_j` and unit direction `u_j` come from `seed` alone, so
/// the same seed gives the same phases to every profile.
pub fn generate_synthetic(
    profile: &MotionProfile,
    frames: usize,
    rate: u32,
    joints: usize,
    seed: u64,
) -> Result<SkeletonSequence> {
    if frames == 0 {
        return Err(SkeletonError::NoFrames);
    }
    if joints == 0 {
        return Err(SkeletonError::NoJoints);
    }
    if rate == 0 {
        return Err(SkeletonError::ZeroRate);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oscillators: Vec<(f64, [f64; 3])> = (0..joints)
        .map(|_| {
            let phase = rng.random::<f64>() * TAU;
            let dir: [f64; 3] = UnitSphere.sample(&mut rng);
            (phase, dir)
        })
        .collect();

    let base = base_pose(joints);
    let mut active = vec![false; joints];
    for &j in &profile.active_joints {
        if j < joints {
            active[j] = true;
        }
    }

    let omega = TAU * profile.temporal_frequency / rate as f64;
    let out = (0..frames)
        .map(|i| {
            let keypoints = base
                .iter()
                .zip(&oscillators)
                .zip(&active)
                .map(|((p, (phase, u)), &on)| {
                    if !on {
                        return *p;
                    }
                    let s = profile.amplitude * (omega * i as f64 + phase).sin();
                    Keypoint3::new(p.x + s * u[0], p.y + s * u[1], p.z + s * u[2])
                })
                .collect();
            SkeletonFrame::new(keypoints)
        })
        .collect();

    SkeletonSequence::new(out, rate, profile.kind.as_str())
}
