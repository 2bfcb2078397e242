use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use avatar_contest::skeleton::{load_sequence, SequenceFormat};
use avatar_contest_cli::{
    cmd_codec, cmd_compare, cmd_contest, cmd_gen, cmd_search, cmd_train, CodecDirection, RunConfig,
};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avatar-contest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config_in(dir: &Path) -> RunConfig {
    RunConfig {
        out: dir.to_path_buf(),
        ..RunConfig::default()
    }
}

fn quick_dqn(cfg: &mut RunConfig) {
    cfg.dqn.episodes = 6;
    cfg.dqn.steps_per_episode = 15;
    cfg.dqn.batch_size = 8;
    cfg.dqn.buffer_capacity = 100;
}

fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(
        actual, expected,
        "{name} drifted; rerun with UPDATE_GOLDEN=1 if intended"
    );
}

#[test]
fn gen_writes_one_file_per_user() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path());
    let files = cmd_gen(&cfg, SequenceFormat::Csv).unwrap();
    assert_eq!(files.len(), 4);
    for f in &files {
        let seq = load_sequence(fs::File::open(f).unwrap(), SequenceFormat::Csv, 60).unwrap();
        assert_eq!(seq.frame_count(), 300);
        assert_eq!(seq.joint_count(), 17);
        assert_eq!(seq.native_rate(), 60);
    }
    assert!(files[0].ends_with("user1_run.csv"));

    let again = tempfile::tempdir().unwrap();
    let files2 = cmd_gen(&config_in(again.path()), SequenceFormat::Csv).unwrap();
    assert_eq!(fs::read(&files[0]).unwrap(), fs::read(&files2[0]).unwrap());

    let other = tempfile::tempdir().unwrap();
    let reseeded = RunConfig {
        seed: 42,
        ..config_in(other.path())
    };
    let files3 = cmd_gen(&reseeded, SequenceFormat::Json).unwrap();
    let seq = load_sequence(fs::File::open(&files3[0]).unwrap(), SequenceFormat::Json, 0).unwrap();
    assert_eq!((seq.frame_count(), seq.joint_count()), (300, 17));
    let base = load_sequence(fs::File::open(&files[0]).unwrap(), SequenceFormat::Csv, 60).unwrap();
    assert_ne!(seq.frames(), base.frames());
}

#[test]
fn contest_report_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path());
    let r = cmd_contest(&cfg, Some(vec![50.0, 50.0, 0.0, 0.0])).unwrap();
    assert!(r.feasible);
    golden(
        "contest_50_50_0_0.csv",
        &fs::read_to_string(dir.path().join("contest.csv")).unwrap(),
    );
}

#[test]
fn search_ledger_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path());
    let r = cmd_search(&cfg, Some(25.0)).unwrap();
    assert_eq!(r.evaluated, 5);
    golden(
        "ledger_step25.csv",
        &fs::read_to_string(dir.path().join("ledger.csv")).unwrap(),
    );
}

#[test]
fn contest_rejects_awards_off_the_pool() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_contest(&config_in(dir.path()), Some(vec![60.0, 50.0])).unwrap_err();
    assert_eq!(avatar_contest_cli::exit_code(&err), 2);
}

#[test]
fn codec_reports_51_bytes_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path());
    let enc = cmd_codec(&cfg, None, CodecDirection::Encode).unwrap();
    assert_eq!(enc.bytes_per_frame, 51);
    assert_eq!(enc.frames, 300);
    assert!(enc.stable);
    assert!((enc.compression_ratio - 161_618.823_529_411_77).abs() < 1e-6);
    assert_eq!(fs::metadata(&enc.output).unwrap().len(), 300 * 51);

    let dec = cmd_codec(&cfg, Some(&enc.output), CodecDirection::Decode).unwrap();
    assert!(dec.stable);
    assert_eq!(dec.frames, 300);
    let enc2 = cmd_codec(
        &config_in(&dir.path().join("again")),
        Some(&dec.output),
        CodecDirection::Encode,
    )
    .unwrap();
    assert_eq!(
        fs::read(&enc.output).unwrap(),
        fs::read(&enc2.output).unwrap()
    );

    let bad = dir.path().join("bad.payload");
    fs::write(&bad, [0u8; 50]).unwrap();
    assert!(cmd_codec(&cfg, Some(&bad), CodecDirection::Decode).is_err());
}

#[test]
fn train_writes_history_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut ca = config_in(a.path());
    quick_dqn(&mut ca);
    let mut cb = ca.clone();
    cb.out = b.path().to_path_buf();
    let ra = cmd_train(&ca).unwrap();
    cmd_train(&cb).unwrap();
    let history = fs::read_to_string(&ra.history_path).unwrap();
    assert_eq!(history.lines().count(), 1 + 6);
    assert!(history.starts_with("episode,mean_reward,total_loss,epsilon\n"));
    assert_eq!(
        fs::read(a.path().join("history.csv")).unwrap(),
        fs::read(b.path().join("history.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.path().join("policy.bin")).unwrap(),
        fs::read(b.path().join("policy.bin")).unwrap()
    );

    let cmp = cmd_compare(&ca, None).unwrap();
    assert_eq!(cmp.rows.len(), 3);
    assert!(cmp.floor_loss <= cmp.dqn_loss && cmp.floor_loss <= cmp.baseline_loss);
    let csv = fs::read_to_string(a.path().join("compare.csv")).unwrap();
    assert!(csv.starts_with("method,total_loss,effort_sum,efforts,awards\n"));
}

#[test]
fn compare_needs_a_policy() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_compare(&config_in(dir.path()), None).unwrap_err();
    assert!(err.to_string().contains("policy"));
    assert_eq!(avatar_contest_cli::exit_code(&err), 1);
}

#[test]
fn single_user_compare_rows_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config_in(dir.path());
    cfg.scenario.users = 1;
    cfg.scenario.profiles.truncate(1);
    cfg.scenario.budget = 1;
    quick_dqn(&mut cfg);
    cmd_train(&cfg).unwrap();
    let r = cmd_compare(&cfg, None).unwrap();
    assert_eq!(r.baseline_loss, r.dqn_loss);
    assert_eq!(r.dqn_loss, r.floor_loss);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let ok = bin(&["contest", "--awards", "25,25,25,25", "--out", out]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(String::from_utf8_lossy(&ok.stdout).contains("total loss"));

    let cfg_path = dir.path().join("typo.toml");
    fs::write(&cfg_path, "[scenario]\nbudgit = 10\n").unwrap();
    let bad = bin(&[
        "contest",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("budgit"));

    let off_pool = bin(&["contest", "--awards", "10,0,0,0", "--out", out]);
    assert_eq!(off_pool.status.code(), Some(2));

    let missing = bin(&[
        "compare",
        "--out",
        dir.path().join("empty").to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(1));

    let usage = bin(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(2));

    let codec = bin(&["codec", "--out", out, "--seed", "3"]);
    assert_eq!(codec.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&codec.stdout).contains("51 bytes/frame"));
}
