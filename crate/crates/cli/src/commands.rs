use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use avatar_contest::contest::{simulate_with_awards, AwardSetting};
use avatar_contest::dqn::{
    evaluate_policy, load_checkpoint, train, write_checkpoint, write_history_csv, Environment,
    EpisodeRecord,
};
use avatar_contest::oracle::{
    average_baseline, exhaustive_award_search, exhaustive_effort_search, write_ledger_csv,
    LedgerEntry,
};
use avatar_contest::skeleton::{
    compression_ratio, decode_frame, encode_frame, load_sequence, save_sequence, SequenceFormat,
    SkeletonSequence,
};
use serde::Serialize;

use crate::config::{check_awards, invalid, ConfigError, RunConfig};
use crate::output::{join, write_atomic};

pub const CONTEST_FILE: &str = "contest.csv";
pub const POLICY_FILE: &str = "policy.bin";
pub const HISTORY_FILE: &str = "history.csv";
pub const COMPARE_FILE: &str = "compare.csv";
pub const COMPARE_SUMMARY_FILE: &str = "compare.json";
pub const LEDGER_FILE: &str = "ledger.csv";
pub const SEARCH_SUMMARY_FILE: &str = "search.json";
pub const CODEC_REPORT_FILE: &str = "codec.json";

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

/// Writes one synthetic sequence file per user.
pub fn cmd_gen(cfg: &RunConfig, format: SequenceFormat) -> anyhow::Result<Vec<PathBuf>> {
    (0..cfg.scenario.users)
        .map(|i| {
            let seq = cfg.sequence(i)?;
            let path = cfg
                .out
                .join(format!("{}.{}", seq.user_label(), format.extension()));
            write_atomic(&path, |w| Ok(save_sequence(&seq, format, w)?))?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserRow {
    pub user: usize,
    pub profile: String,
    pub capability: f64,
    pub effort: u32,
    pub loss: f64,
    pub rank: usize,
    pub prize: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContestReport {
    pub awards: Vec<f64>,
    pub rows: Vec<UserRow>,
    pub total_loss: f64,
    pub effort_sum: u32,
    pub feasible: bool,
}

/// Runs one contest under `awards` (the configured setting when `None`).
pub fn cmd_contest(cfg: &RunConfig, awards: Option<Vec<f64>>) -> anyhow::Result<ContestReport> {
    if let Some(a) = &awards {
        check_awards(a, cfg.scenario.pool, cfg.scenario.users)?;
    }
    let scenario = cfg.scenario_config()?;
    let setting = match awards {
        Some(a) => AwardSetting::sorted(a)?,
        None => scenario.awards.clone(),
    };
    let outcome = simulate_with_awards(&scenario, &setting, &scenario.population()?)?;
    let rows: Vec<UserRow> = scenario
        .contestants
        .iter()
        .enumerate()
        .map(|(n, c)| UserRow {
            user: n + 1,
            profile: cfg.scenario.profiles[n].to_string(),
            capability: c.capability,
            effort: outcome.efforts[n],
            loss: outcome.per_user_loss[n],
            rank: outcome.rank_of(n).expect("every user is ranked"),
            prize: outcome.prizes_assigned[n],
        })
        .collect();
    write_atomic(&cfg.out.join(CONTEST_FILE), |w| {
        let mut csv = csv::Writer::from_writer(w);
        for r in &rows {
            csv.serialize(r)?;
        }
        csv.flush()?;
        Ok(())
    })?;
    Ok(ContestReport {
        awards: setting.prizes().to_vec(),
        rows,
        total_loss: outcome.total_loss,
        effort_sum: outcome.effort_sum(),
        feasible: outcome.feasible,
    })
}

fn environment(cfg: &RunConfig) -> anyhow::Result<Environment> {
    let dqn = cfg.dqn_config();
    Ok(Environment::new(
        cfg.scenario_config()?,
        dqn.reward_mode,
        dqn.reward_scale,
    )?)
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub policy_path: PathBuf,
    pub history_path: PathBuf,
    pub history: Vec<EpisodeRecord>,
    pub updates: usize,
}

pub fn cmd_train(cfg: &RunConfig) -> anyhow::Result<TrainReport> {
    let env = environment(cfg)?;
    let out = train(&env, &cfg.dqn_config())?;
    let policy_path = cfg.out.join(POLICY_FILE);
    let history_path = cfg.out.join(HISTORY_FILE);
    write_atomic(&policy_path, |w| Ok(write_checkpoint(&out.policy, w)?))?;
    write_atomic(&history_path, |w| Ok(write_history_csv(&out.history, w)?))?;
    Ok(TrainReport {
        policy_path,
        history_path,
        history: out.history,
        updates: out.updates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub method: String,
    pub total_loss: f64,
    pub effort_sum: u32,
    pub efforts: String,
    pub awards: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub baseline_loss: f64,
    pub dqn_loss: f64,
    pub floor_loss: f64,
    /// `(baseline - dqn) / baseline`, in percent.
    pub reduction_percent: f64,
    #[serde(skip)]
    pub rows: Vec<CompareRow>,
}

/// Average split, trained policy and social optimum side by side.
pub fn cmd_compare(cfg: &RunConfig, policy: Option<&Path>) -> anyhow::Result<CompareReport> {
    let policy_path = policy.map_or_else(|| cfg.out.join(POLICY_FILE), Path::to_path_buf);
    if !policy_path.exists() {
        bail!(
            "policy file {} not found; run `train` first",
            policy_path.display()
        );
    }
    let net = load_checkpoint(&policy_path)
        .with_context(|| format!("loading {}", policy_path.display()))?;
    let env = environment(cfg)?;
    if net.input_dim() != env.feature_count() || net.output_dim() != env.action_count() {
        bail!(
            "policy shape {:?} does not fit a {}-user scenario",
            net.layer_sizes(),
            cfg.scenario.users
        );
    }
    let scenario = env.scenario();
    let baseline = average_baseline(scenario)?;
    let eval = evaluate_policy(&net, &env, cfg.dqn.steps_per_episode)?;
    let floor = exhaustive_effort_search(scenario, cfg.search.effort_cap)?;

    let rows = vec![
        CompareRow {
            method: "average_baseline".into(),
            total_loss: baseline.total_loss,
            effort_sum: baseline.effort_sum(),
            efforts: join(&baseline.efforts),
            awards: String::new(),
        },
        CompareRow {
            method: "dqn".into(),
            total_loss: eval.best_outcome.total_loss,
            effort_sum: eval.best_outcome.effort_sum(),
            efforts: join(&eval.best_outcome.efforts),
            awards: join(&eval.best_state.awards),
        },
        CompareRow {
            method: "social_optimum".into(),
            total_loss: floor.total_loss,
            effort_sum: floor.efforts.iter().sum(),
            efforts: join(&floor.efforts),
            awards: String::new(),
        },
    ];
    let reduction_percent = if baseline.total_loss > 0.0 {
        100.0 * (baseline.total_loss - eval.best_outcome.total_loss) / baseline.total_loss
    } else {
        0.0
    };
    let report = CompareReport {
        baseline_loss: baseline.total_loss,
        dqn_loss: eval.best_outcome.total_loss,
        floor_loss: floor.total_loss,
        reduction_percent,
        rows,
    };
    write_atomic(&cfg.out.join(COMPARE_FILE), |w| {
        let mut csv = csv::Writer::from_writer(w);
        for r in &report.rows {
            csv.serialize(r)?;
        }
        csv.flush()?;
        Ok(())
    })?;
    write_json(&cfg.out.join(COMPARE_SUMMARY_FILE), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub step: f64,
    pub evaluated: usize,
    pub feasible: usize,
    pub best_awards: Option<Vec<f64>>,
    pub best_efforts: Option<Vec<u32>>,
    pub best_loss: Option<f64>,
    pub floor_loss: f64,
    pub floor_efforts: Vec<u32>,
    #[serde(skip)]
    pub ledger: Vec<LedgerEntry>,
}

pub fn cmd_search(cfg: &RunConfig, step: Option<f64>) -> anyhow::Result<SearchReport> {
    let step = step.unwrap_or(cfg.search.step);
    if step.is_nan() || step <= 0.0 {
        return Err(ConfigError::Invalid("search step must be positive".into()).into());
    }
    let scenario = cfg.scenario_config()?;
    let result = exhaustive_award_search(&scenario, step).map_err(|e| match e {
        avatar_contest::oracle::OracleError::InvalidStep { .. } => {
            anyhow::Error::new(ConfigError::Invalid(e.to_string()))
        }
        other => other.into(),
    })?;
    let floor = exhaustive_effort_search(&scenario, cfg.search.effort_cap)?;
    write_atomic(&cfg.out.join(LEDGER_FILE), |w| {
        Ok(write_ledger_csv(&result.ledger, w)?)
    })?;
    let report = SearchReport {
        step,
        evaluated: result.evaluated_count,
        feasible: result.feasible_count(),
        best_awards: result.best.as_ref().map(|b| b.awards.clone()),
        best_efforts: result.best.as_ref().map(|b| b.efforts.clone()),
        best_loss: result.best.as_ref().map(|b| b.total_loss),
        floor_loss: floor.total_loss,
        floor_efforts: floor.efforts,
        ledger: result.ledger,
    };
    write_json(&cfg.out.join(SEARCH_SUMMARY_FILE), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodecDirection {
    Encode,
    Decode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodecReport {
    pub direction: String,
    pub output: PathBuf,
    pub frames: usize,
    pub joints: usize,
    pub bytes_per_frame: usize,
    pub compression_ratio: f64,
    /// Decoding and re-encoding reproduces the payload byte for byte.
    pub stable: bool,
    /// Largest coordinate error introduced by quantization; only known when
    /// encoding.
    pub max_abs_error: Option<f64>,
}

fn format_of(path: &Path) -> anyhow::Result<SequenceFormat> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default();
    ext.parse().map_err(|_| {
        anyhow::Error::new(ConfigError::Invalid(format!(
            "cannot tell the format of {} from its extension",
            path.display()
        )))
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sequence")
        .to_string()
}

/// Streams a sequence through the keypoint codec, or decodes a payload file
/// back to CSV. Without an input, user 1's synthetic sequence is encoded.
pub fn cmd_codec(
    cfg: &RunConfig,
    input: Option<&Path>,
    direction: CodecDirection,
) -> anyhow::Result<CodecReport> {
    let bounds = cfg.bounds();
    let c = &cfg.codec;
    match direction {
        CodecDirection::Encode => {
            let (seq, name) = match input {
                Some(p) => {
                    let format = format_of(p)?;
                    let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                    (
                        load_sequence(BufReader::new(file), format, cfg.scenario.native_rate)?,
                        stem(p),
                    )
                }
                None => {
                    let seq = cfg.sequence(0)?;
                    let name = seq.user_label().to_string();
                    (seq, name)
                }
            };
            let payloads: Vec<Vec<u8>> = seq
                .frames()
                .iter()
                .map(|f| encode_frame(f, &bounds))
                .collect();
            let mut stable = true;
            let mut max_abs_error: f64 = 0.0;
            for (frame, bytes) in seq.frames().iter().zip(&payloads) {
                let back = decode_frame(bytes, seq.joint_count(), &bounds)?;
                stable &= encode_frame(&back, &bounds) == *bytes;
                for (a, b) in frame.keypoints.iter().zip(&back.keypoints) {
                    max_abs_error = max_abs_error
                        .max((a.x - b.x).abs())
                        .max((a.y - b.y).abs())
                        .max((a.z - b.z).abs());
                }
            }
            let output = cfg.out.join(format!("{name}.payload"));
            write_atomic(&output, |w| {
                for p in &payloads {
                    w.write_all(p)?;
                }
                Ok(())
            })?;
            let report = CodecReport {
                direction: "encode".into(),
                output,
                frames: seq.frame_count(),
                joints: seq.joint_count(),
                bytes_per_frame: payloads.first().map_or(0, Vec::len),
                compression_ratio: compression_ratio(
                    c.image_width,
                    c.image_height,
                    c.bits_per_pixel,
                    seq.joint_count(),
                ),
                stable,
                max_abs_error: Some(max_abs_error),
            };
            write_json(&cfg.out.join(CODEC_REPORT_FILE), &report)?;
            Ok(report)
        }
        CodecDirection::Decode => {
            let Some(p) = input else {
                return invalid("decoding needs an input payload file").map_err(Into::into);
            };
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            let joints = cfg.scenario.joints;
            let width = 3 * joints;
            if bytes.is_empty() || bytes.len() % width != 0 {
                bail!(
                    "payload of {} bytes is not a whole number of {width}-byte frames",
                    bytes.len()
                );
            }
            let frames = bytes
                .chunks_exact(width)
                .map(|b| decode_frame(b, joints, &bounds))
                .collect::<Result<Vec<_>, _>>()?;
            let stable = frames
                .iter()
                .zip(bytes.chunks_exact(width))
                .all(|(f, b)| encode_frame(f, &bounds) == b);
            let seq = SkeletonSequence::new(frames, cfg.scenario.native_rate, stem(p))?;
            let output = cfg.out.join(format!("{}.csv", stem(p)));
            write_atomic(&output, |w| {
                Ok(save_sequence(&seq, SequenceFormat::Csv, w)?)
            })?;
            Ok(CodecReport {
                direction: "decode".into(),
                output,
                frames: seq.frame_count(),
                joints,
                bytes_per_frame: width,
                compression_ratio: compression_ratio(
                    c.image_width,
                    c.image_height,
                    c.bits_per_pixel,
                    joints,
                ),
                stable,
                max_abs_error: None,
            })
        }
    }
}
