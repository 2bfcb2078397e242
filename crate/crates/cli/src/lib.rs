//! Command-line harness: config loading, subcommands and report files.

pub mod commands;
pub mod config;
mod output;

use std::path::PathBuf;

use avatar_contest::skeleton::SequenceFormat;
use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_codec, cmd_compare, cmd_contest, cmd_gen, cmd_search, cmd_train, CodecDirection,
};
pub use config::{ConfigError, RunConfig};
pub use output::write_atomic;

#[derive(Debug, Parser)]
#[command(
    name = "avatar-contest",
    version,
    about = "Contest-based allocation of avatar skeleton upload rates"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one synthetic skeleton sequence per user.
    Gen {
        #[arg(long, default_value = "csv")]
        format: SequenceFormat,
    },
    /// Run a single contest and report each user's effort, loss and prize.
    Contest {
        /// Comma-separated prizes, e.g. `50,50,0,0`.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        awards: Option<Vec<f64>>,
    },
    /// Train the award-setting Q-network.
    Train,
    /// Compare the average split, a trained policy and the social optimum.
    Compare {
        /// Defaults to `policy.bin` in the output directory.
        #[arg(long)]
        policy: Option<PathBuf>,
    },
    /// Encode a sequence into quantized payloads, or decode a payload file.
    Codec {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        decode: bool,
    },
    /// Simulate every award setting on a lattice.
    Search {
        #[arg(long)]
        step: Option<f64>,
    },
}

pub fn resolve_config(global: &GlobalArgs) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &global.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = resolve_config(&cli.global)?;
    match cli.command {
        Command::Gen { format } => {
            for p in cmd_gen(&cfg, format)? {
                println!("{}", p.display());
            }
        }
        Command::Contest { awards } => {
            let r = cmd_contest(&cfg, awards)?;
            println!("awards {:?}", r.awards);
            println!("user  profile  effort  loss        rank  prize");
            for row in &r.rows {
                println!(
                    "{:<5} {:<8} {:>6}  {:<10.6}  {:>4}  {}",
                    row.user, row.profile, row.effort, row.loss, row.rank, row.prize
                );
            }
            println!(
                "total loss {:.6}, effort {} of {} fps{}",
                r.total_loss,
                r.effort_sum,
                cfg.scenario.budget,
                if r.feasible { "" } else { " (over budget)" }
            );
        }
        Command::Train => {
            let r = cmd_train(&cfg)?;
            if let Some(last) = r.history.last() {
                println!(
                    "{} episodes, {} updates; last episode mean reward {:.4}, total loss {:.6}",
                    r.history.len(),
                    r.updates,
                    last.mean_reward,
                    last.total_loss
                );
            }
            println!("{}\n{}", r.policy_path.display(), r.history_path.display());
        }
        Command::Compare { policy } => {
            let r = cmd_compare(&cfg, policy.as_deref())?;
            for row in &r.rows {
                println!(
                    "{:<17} {:.6}  [{}]",
                    row.method, row.total_loss, row.efforts
                );
            }
            println!("reduction vs average: {:.3}%", r.reduction_percent);
        }
        Command::Codec { input, decode } => {
            let dir = if decode {
                CodecDirection::Decode
            } else {
                CodecDirection::Encode
            };
            let r = cmd_codec(&cfg, input.as_deref(), dir)?;
            println!("{} frames, {} bytes/frame", r.frames, r.bytes_per_frame);
            println!("compression ratio {:.1}", r.compression_ratio);
            if let Some(e) = r.max_abs_error {
                println!("max quantization error {e:.6}");
            }
            println!("{}", r.output.display());
        }
        Command::Search { step } => {
            let r = cmd_search(&cfg, step)?;
            println!(
                "{} settings evaluated, {} within budget",
                r.evaluated, r.feasible
            );
            match (&r.best_awards, r.best_loss) {
                (Some(a), Some(l)) => println!("best {a:?} with total loss {l:.6}"),
                _ => println!("no award setting keeps total effort within budget"),
            }
            println!("social optimum {:.6}", r.floor_loss);
        }
    }
    Ok(())
}

/// 2 for configuration mistakes, 1 for anything that failed at run time.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<ConfigError>()) {
        2
    } else {
        1
    }
}
