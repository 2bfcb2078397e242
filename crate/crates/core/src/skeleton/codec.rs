//! One-byte-per-axis frame payload.

use serde::{Deserialize, Serialize};

use super::{Keypoint3, Result, SkeletonError, SkeletonFrame};

/// Per-axis clamp range, in meters, shared by encoder and decoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationBounds {
    lo: f64,
    hi: f64,
}

impl QuantizationBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SkeletonError::InvalidBounds { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Width of one quantization level.
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / 255.0
    }

    fn quantize(&self, v: f64) -> u8 {
        let c = v.clamp(self.lo, self.hi);
        (255.0 * (c - self.lo) / (self.hi - self.lo)).round() as u8
    }

    fn dequantize(&self, b: u8) -> f64 {
        self.lo + b as f64 * (self.hi - self.lo) / 255.0
    }
}

impl Default for QuantizationBounds {
    fn default() -> Self {
        Self { lo: -2.0, hi: 2.0 }
    }
}

/// Encodes a frame as `3k` bytes, joint-major, x then y then z.
pub fn encode_frame(frame: &SkeletonFrame, bounds: &QuantizationBounds) -> Vec<u8> {
    frame
        .keypoints
        .iter()
        .flat_map(|p| {
            [
                bounds.quantize(p.x),
                bounds.quantize(p.y),
                bounds.quantize(p.z),
            ]
        })
        .collect()
}

pub fn decode_frame(
    bytes: &[u8],
    joints: usize,
    bounds: &QuantizationBounds,
) -> Result<SkeletonFrame> {
    let expected = joints * 3;
    if bytes.len() != expected {
        return Err(SkeletonError::PayloadLength {
            expected,
            found: bytes.len(),
        });
    }
    let keypoints = bytes
        .chunks_exact(3)
        .map(|c| {
            Keypoint3::new(
                bounds.dequantize(c[0]),
                bounds.dequantize(c[1]),
                bounds.dequantize(c[2]),
            )
        })
        .collect();
    Ok(SkeletonFrame::new(keypoints))
}

/// Raw image bytes per frame divided by payload bytes per frame.
pub fn compression_ratio(width: u32, height: u32, bits_per_px: u32, joints: usize) -> f64 {
    let image_bytes = width as f64 * height as f64 * bits_per_px as f64 / 8.0;
    image_bytes / (joints as f64 * 3.0)
}
