//! 3D skeleton keypoint trajectories: the semantic signal each user uploads.
//!
//! A [`SkeletonSequence`] is `T` frames of `k` keypoints captured at a native
//! rate `M`. Uploading at a lower rate `f` (a divisor of `M`) leaves the
//! renderer with gaps it has to fill; [`downsample_render`] models that
//! reconstruction and [`downsampling_loss`] scores the damage.

mod codec;
mod io;
mod synth;

pub use codec::{compression_ratio, decode_frame, encode_frame, QuantizationBounds};
pub use io::{load_sequence, save_sequence, SequenceFormat};
pub use synth::{base_pose, generate_synthetic, MotionKind, MotionProfile, JOINT_NAMES};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Joint count of the 17-keypoint body layout used throughout.
pub const DEFAULT_JOINTS: usize = 17;

#[derive(Debug, Error)]
pub enum SkeletonError {
    #[error("sequence must contain at least one frame")]
    NoFrames,
    #[error("frames must contain at least one joint")]
    NoJoints,
    #[error("native rate must be at least 1 fps")]
    ZeroRate,
    #[error("frame {frame} has {found} joints, expected {expected}")]
    InconsistentJointCount {
        frame: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite coordinate at frame {frame}, joint {joint}")]
    NonFinite { frame: usize, joint: usize },
    #[error("upload rate {rate} is not a divisor of native rate {native}")]
    InvalidRate { rate: u32, native: u32 },
    #[error("motion difference needs at least two frames, got {0}")]
    TooShort(usize),
    #[error("malformed record at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("frame {0} is missing")]
    MissingFrame(usize),
    #[error("duplicate entry for frame {frame}, joint {joint}")]
    DuplicateEntry { frame: usize, joint: usize },
    #[error("payload has {found} bytes, expected {expected}")]
    PayloadLength { expected: usize, found: usize },
    #[error("invalid quantization bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("invalid motion profile: {0}")]
    InvalidProfile(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = SkeletonError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Keypoint3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Keypoint3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Squared Euclidean distance.
    pub fn distance_sq(&self, other: &Keypoint3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn distance(&self, other: &Keypoint3) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn lerp(&self, other: &Keypoint3, t: f64) -> Keypoint3 {
        Keypoint3 {
            x: self.x + (other.x - self.x) * t,
            y: self.y + (other.y - self.y) * t,
            z: self.z + (other.z - self.z) * t,
        }
    }

    pub fn translated(&self, offset: &Keypoint3) -> Keypoint3 {
        Keypoint3::new(self.x + offset.x, self.y + offset.y, self.z + offset.z)
    }
}

/// One captured pose; joint `j` is `keypoints[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonFrame {
    pub keypoints: Vec<Keypoint3>,
}

impl SkeletonFrame {
    pub fn new(keypoints: Vec<Keypoint3>) -> Self {
        Self { keypoints }
    }

    pub fn joint_count(&self) -> usize {
        self.keypoints.len()
    }
}

/// A validated keypoint trajectory at a fixed native rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonSequence {
    frames: Vec<SkeletonFrame>,
    native_rate: u32,
    user_label: String,
}

impl SkeletonSequence {
    pub fn new(
        frames: Vec<SkeletonFrame>,
        native_rate: u32,
        user_label: impl Into<String>,
    ) -> Result<Self> {
        if native_rate == 0 {
            return Err(SkeletonError::ZeroRate);
        }
        let first = frames.first().ok_or(SkeletonError::NoFrames)?;
        let k = first.joint_count();
        if k == 0 {
            return Err(SkeletonError::NoJoints);
        }
        for (i, frame) in frames.iter().enumerate() {
            if frame.joint_count() != k {
                return Err(SkeletonError::InconsistentJointCount {
                    frame: i + 1,
                    expected: k,
                    found: frame.joint_count(),
                });
            }
            if let Some(j) = frame.keypoints.iter().position(|p| !p.is_finite()) {
                return Err(SkeletonError::NonFinite {
                    frame: i + 1,
                    joint: j + 1,
                });
            }
        }
        Ok(Self {
            frames,
            native_rate,
            user_label: user_label.into(),
        })
    }

    pub fn frames(&self) -> &[SkeletonFrame] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn joint_count(&self) -> usize {
        self.frames[0].joint_count()
    }

    pub fn native_rate(&self) -> u32 {
        self.native_rate
    }

    pub fn user_label(&self) -> &str {
        &self.user_label
    }

    pub fn set_user_label(&mut self, label: impl Into<String>) {
        self.user_label = label.into();
    }

    /// Admissible upload rates: the divisors of the native rate.
    pub fn effort_set(&self) -> Vec<u32> {
        divisors(self.native_rate)
    }

    /// Same sequence with every keypoint shifted by `offset`.
    pub fn translated(&self, offset: Keypoint3) -> SkeletonSequence {
        let frames = self
            .frames
            .iter()
            .map(|f| {
                SkeletonFrame::new(f.keypoints.iter().map(|p| p.translated(&offset)).collect())
            })
            .collect();
        SkeletonSequence {
            frames,
            native_rate: self.native_rate,
            user_label: self.user_label.clone(),
        }
    }
}

/// Sorted divisors of `m`. Empty for `m == 0`.
pub fn divisors(m: u32) -> Vec<u32> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u32;
    while (d as u64) * (d as u64) <= m as u64 {
        if m.is_multiple_of(d) {
            small.push(d);
            if d != m / d {
                large.push(m / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// How the renderer fills frames between uploads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reconstruction {
    /// Hold the last uploaded frame until the next one arrives.
    #[default]
    Hold,
    /// Interpolate linearly between consecutive uploads; frames after the
    /// final upload are held.
    Linear,
}

fn upload_stride(seq: &SkeletonSequence, rate: u32) -> Result<usize> {
    let native = seq.native_rate();
    if rate == 0 || !native.is_multiple_of(rate) {
        return Err(SkeletonError::InvalidRate { rate, native });
    }
    Ok((native / rate) as usize)
}

/// Renders `seq` as seen by a server receiving uploads at `rate` fps, using
/// zero-order hold.
///
/// Uploads happen at frames `0, M/f, 2M/f, ...` (0-based), so the first frame
/// is always available.
pub fn downsample_render(seq: &SkeletonSequence, rate: u32) -> Result<SkeletonSequence> {
    downsample_render_with(seq, rate, Reconstruction::Hold)
}

pub fn downsample_render_with(
    seq: &SkeletonSequence,
    rate: u32,
    reconstruction: Reconstruction,
) -> Result<SkeletonSequence> {
    let stride = upload_stride(seq, rate)?;
    let frames = seq.frames();
    let rendered = (0..frames.len())
        .map(|i| rendered_frame(frames, i, stride, reconstruction))
        .collect();
    Ok(SkeletonSequence {
        frames: rendered,
        native_rate: seq.native_rate,
        user_label: seq.user_label.clone(),
    })
}

fn rendered_frame(
    frames: &[SkeletonFrame],
    i: usize,
    stride: usize,
    reconstruction: Reconstruction,
) -> SkeletonFrame {
    let last = (i / stride) * stride;
    let next = last + stride;
    match reconstruction {
        Reconstruction::Linear if i != last && next < frames.len() => {
            let t = (i - last) as f64 / stride as f64;
            let a = &frames[last].keypoints;
            let b = &frames[next].keypoints;
            SkeletonFrame::new(a.iter().zip(b).map(|(p, q)| p.lerp(q, t)).collect())
        }
        _ => frames[last].clone(),
    }
}

/// Root-mean (over frames) of the summed squared keypoint error between the
/// captured sequence and its hold-rendered version at `rate` fps.
pub fn downsampling_loss(seq: &SkeletonSequence, rate: u32) -> Result<f64> {
    downsampling_loss_with(seq, rate, Reconstruction::Hold)
}

pub fn downsampling_loss_with(
    seq: &SkeletonSequence,
    rate: u32,
    reconstruction: Reconstruction,
) -> Result<f64> {
    let rendered = downsample_render_with(seq, rate, reconstruction)?;
    let sum: f64 = seq
        .frames()
        .iter()
        .zip(rendered.frames())
        .map(|(orig, rend)| {
            orig.keypoints
                .iter()
                .zip(&rend.keypoints)
                .map(|(p, q)| p.distance_sq(q))
                .sum::<f64>()
        })
        .sum();
    Ok((sum / seq.frame_count() as f64).sqrt())
}

/// Per-step movement: element `i` is the summed joint displacement between
/// frames `i` and `i + 1`.
pub fn motion_difference(seq: &SkeletonSequence) -> Result<Vec<f64>> {
    if seq.frame_count() < 2 {
        return Err(SkeletonError::TooShort(seq.frame_count()));
    }
    Ok(seq
        .frames()
        .windows(2)
        .map(|w| {
            w[0].keypoints
                .iter()
                .zip(&w[1].keypoints)
                .map(|(p, q)| p.distance(q))
                .sum()
        })
        .collect())
}
