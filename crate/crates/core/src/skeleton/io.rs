//! CSV and JSON sequence files.
//!
//! CSV: header `frame,joint,x,y,z`, 1-based indices, one row per keypoint.
//! The table carries no rate, so the caller supplies it.
//!
//! JSON: `{"native_rate": M, "user_label": "...", "frames": [[[x,y,z], ...], ...]}`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Keypoint3, Result, SkeletonError, SkeletonFrame, SkeletonSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceFormat {
    Csv,
    Json,
}

impl SequenceFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            SequenceFormat::Csv => "csv",
            SequenceFormat::Json => "json",
        }
    }
}

impl FromStr for SequenceFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(SequenceFormat::Csv),
            "json" => Ok(SequenceFormat::Json),
            other => Err(format!("unknown sequence format `{other}`")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonSequence {
    native_rate: u32,
    user_label: String,
    frames: Vec<Vec<[f64; 3]>>,
}

/// Reads a sequence. For CSV input `native_rate` sets the rate; JSON carries
/// its own and ignores it.
pub fn load_sequence<R: Read>(
    source: R,
    format: SequenceFormat,
    native_rate: u32,
) -> Result<SkeletonSequence> {
    match format {
        SequenceFormat::Csv => read_csv(source, native_rate),
        SequenceFormat::Json => read_json(source),
    }
}

pub fn save_sequence<W: Write>(
    seq: &SkeletonSequence,
    format: SequenceFormat,
    sink: W,
) -> Result<()> {
    match format {
        SequenceFormat::Csv => write_csv(seq, sink),
        SequenceFormat::Json => write_json(seq, sink),
    }
}

fn write_csv<W: Write>(seq: &SkeletonSequence, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["frame", "joint", "x", "y", "z"])
        .map_err(csv_io)?;
    for (i, frame) in seq.frames().iter().enumerate() {
        for (j, p) in frame.keypoints.iter().enumerate() {
            w.write_record(&[
                (i + 1).to_string(),
                (j + 1).to_string(),
                p.x.to_string(),
                p.y.to_string(),
                p.z.to_string(),
            ])
            .map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> SkeletonError {
    SkeletonError::Io(std::io::Error::other(e))
}

fn read_csv<R: Read>(source: R, native_rate: u32) -> Result<SkeletonSequence> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = reader.headers().map_err(|e| SkeletonError::Malformed {
        line: 1,
        reason: e.to_string(),
    })?;
    let expected = ["frame", "joint", "x", "y", "z"];
    if header.iter().ne(expected.iter().copied()) {
        return Err(SkeletonError::Malformed {
            line: 1,
            reason: format!("expected header `{}`", expected.join(",")),
        });
    }

    let mut cells: BTreeMap<usize, BTreeMap<usize, Keypoint3>> = BTreeMap::new();
    for (n, record) in reader.records().enumerate() {
        let line = n + 2;
        let record = record.map_err(|e| SkeletonError::Malformed {
            line,
            reason: e.to_string(),
        })?;
        if record.len() != 5 {
            return Err(SkeletonError::Malformed {
                line,
                reason: format!("expected 5 fields, found {}", record.len()),
            });
        }
        let index = |i: usize, what: &str| -> Result<usize> {
            match record[i].parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(SkeletonError::Malformed {
                    line,
                    reason: format!("{what} must be a positive integer, got `{}`", &record[i]),
                }),
            }
        };
        let coord = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|_| SkeletonError::Malformed {
                    line,
                    reason: format!("bad coordinate `{}`", &record[i]),
                })
        };
        let frame = index(0, "frame")?;
        let joint = index(1, "joint")?;
        let p = Keypoint3::new(coord(2)?, coord(3)?, coord(4)?);
        if !p.is_finite() {
            return Err(SkeletonError::NonFinite { frame, joint });
        }
        if cells.entry(frame).or_default().insert(joint, p).is_some() {
            return Err(SkeletonError::DuplicateEntry { frame, joint });
        }
    }

    let joints = cells
        .values()
        .filter_map(|row| row.keys().next_back().copied())
        .max()
        .ok_or(SkeletonError::NoFrames)?;
    let mut frames = Vec::with_capacity(cells.len());
    for (expected_frame, (frame, row)) in (1..).zip(cells) {
        if frame != expected_frame {
            return Err(SkeletonError::MissingFrame(expected_frame));
        }
        // joints are keyed 1..=k, so a full row has exactly k entries
        if row.len() != joints {
            return Err(SkeletonError::InconsistentJointCount {
                frame,
                expected: joints,
                found: row.len(),
            });
        }
        frames.push(SkeletonFrame::new(row.into_values().collect()));
    }
    SkeletonSequence::new(frames, native_rate, "")
}

fn write_json<W: Write>(seq: &SkeletonSequence, sink: W) -> Result<()> {
    let doc = JsonSequence {
        native_rate: seq.native_rate(),
        user_label: seq.user_label().to_string(),
        frames: seq
            .frames()
            .iter()
            .map(|f| f.keypoints.iter().map(|p| [p.x, p.y, p.z]).collect())
            .collect(),
    };
    serde_json::to_writer(sink, &doc)?;
    Ok(())
}

fn read_json<R: Read>(source: R) -> Result<SkeletonSequence> {
    let doc: JsonSequence = serde_json::from_reader(source)?;
    let frames = doc
        .frames
        .into_iter()
        .map(|f| {
            SkeletonFrame::new(
                f.into_iter()
                    .map(|[x, y, z]| Keypoint3::new(x, y, z))
                    .collect(),
            )
        })
        .collect();
    SkeletonSequence::new(frames, doc.native_rate, doc.user_label)
}
