//! Acceptance criterion 10: two identical `track` invocations with the same
//! seed produce byte-identical NTXY files.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

fn pftrack() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pftrack"))
}

fn scene(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(name)
}

#[test]
fn criterion_10_cli_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let frames_dir = dir.path().join("frames");

    let synth = pftrack()
        .arg("synth")
        .arg(scene("linear_single.scene"))
        .arg("--out")
        .arg(&frames_dir)
        .output()
        .unwrap();
    assert!(synth.status.success(), "synth failed: {}", String::from_utf8_lossy(&synth.stderr));

    let mut outputs = Vec::new();
    for run in 0..2 {
        let out_dir = dir.path().join(format!("run{run}"));
        let track = pftrack()
            .arg("track")
            .arg(&frames_dir)
            .arg("--out")
            .arg(&out_dir)
            .arg("--seed")
            .arg("42")
            .output()
            .unwrap();
        assert!(
            track.status.success(),
            "track failed: {}",
            String::from_utf8_lossy(&track.stderr)
        );
        outputs.push(std::fs::read(out_dir.join("trajectories.ntxy")).unwrap());
    }
    assert!(!outputs[0].is_empty(), "tracker produced no records");
    assert_eq!(outputs[0], outputs[1], "NTXY outputs must be byte-identical");

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60));
    println!("acceptance criterion 10 (cmd_track determinism): PASS ({elapsed:.2?})");
}
