//! Implementations of the synth / track / eval / sweep subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pftrack_core::eval::{self, EvalConfig};
use pftrack_core::scene_io::{
    load_sequence, parse_ntxy, parse_scene_spec, write_ntxy_file, write_sequence,
    TrajectoryRecord, DEFAULT_FRAME_PATTERN,
};
use pftrack_core::tracker::{self, TimingReport, TrackerConfig};
use pftrack_core::{Error, Result};

use crate::config_file::{parse_config, snapshot};
use crate::manifest::Manifest;

/// Loads the tracker config: defaults, then the file, then flag overrides.
pub fn load_tracker_config(
    config_path: Option<&Path>,
    particles: Option<usize>,
    seed: Option<u64>,
) -> Result<TrackerConfig> {
    let mut config = match config_path {
        Some(path) => parse_config(&fs::read_to_string(path)?)?,
        None => TrackerConfig::default(),
    };
    if let Some(m) = particles {
        config.particles = m;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    Ok(config)
}

pub fn cmd_synth(spec_path: &Path, out_dir: &Path) -> Result<()> {
    let text = fs::read_to_string(spec_path)?;
    let spec = parse_scene_spec(&text)?;
    let (frames, gt) = spec.generate()?;
    fs::create_dir_all(out_dir)?;
    write_sequence(out_dir, DEFAULT_FRAME_PATTERN, &frames)?;
    let gt_path = out_dir.join("ground_truth.ntxy");
    write_ntxy_file(&gt, &gt_path)?;

    let mut manifest = Manifest::new("synth");
    manifest.push("input.spec", spec_path.display());
    manifest.push("output.frames", out_dir.display());
    manifest.push("output.ground_truth", gt_path.display());
    manifest.push("seed", spec.seed);
    manifest.push("frames", frames.len());
    manifest.push("actors", spec.actors.len());
    manifest.write_to(&out_dir.join("manifest.txt"))?;

    println!(
        "synth: {} frames ({}x{}), {} actors, ground truth {} records -> {}",
        frames.len(),
        spec.width,
        spec.height,
        spec.actors.len(),
        gt.len(),
        out_dir.display()
    );
    Ok(())
}

fn timing_csv(timing: &TimingReport) -> String {
    let mut text = String::from("frame,millis,object_count,blob_count\n");
    for row in &timing.rows {
        writeln!(text, "{},{:.3},{},{}", row.frame, row.millis, row.object_count, row.blob_count)
            .expect("string write");
    }
    text
}

pub fn cmd_track(
    frames_dir: &Path,
    out_dir: &Path,
    config_path: Option<&Path>,
    particles: Option<usize>,
    seed: Option<u64>,
) -> Result<()> {
    let config = load_tracker_config(config_path, particles, seed)?;
    let frames = load_sequence(frames_dir, DEFAULT_FRAME_PATTERN)?;
    if frames.is_empty() {
        return Err(Error::MissingFrameIndex { index: 0 });
    }
    let (records, timing) = tracker::run(&frames, &config)?;

    fs::create_dir_all(out_dir)?;
    let ntxy_path = out_dir.join("trajectories.ntxy");
    write_ntxy_file(&records, &ntxy_path)?;
    let timing_path = out_dir.join("timing.csv");
    fs::write(&timing_path, timing_csv(&timing))?;

    let mut manifest = Manifest::new("track");
    manifest.push("input.frames", frames_dir.display());
    manifest.push("output.trajectories", ntxy_path.display());
    manifest.push("output.timing", timing_path.display());
    manifest.push("seed", config.seed);
    manifest.extend(snapshot(&config).into_iter().map(|(k, v)| (format!("config.{k}"), v)));
    manifest.push("total_millis", format!("{:.3}", timing.total_millis));
    manifest.push("mean_frame_millis", format!("{:.3}", timing.mean_frame_millis));
    manifest.write_to(&out_dir.join("manifest.txt"))?;

    let ids: std::collections::BTreeSet<u32> = records.iter().map(|r| r.n).collect();
    println!(
        "track: {} frames, {} objects, {} records, mean {:.2} ms/frame -> {}",
        frames.len(),
        ids.len(),
        records.len(),
        timing.mean_frame_millis,
        out_dir.display()
    );
    Ok(())
}

fn read_ntxy(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    parse_ntxy(&fs::read(path)?)
}

pub fn cmd_eval(gt_path: &Path, sys_path: &Path, threshold: f64, out_dir: &Path) -> Result<()> {
    let eval_config = EvalConfig { distance_threshold: threshold, ..EvalConfig::default() };
    eval_config.validate()?;
    let gt = read_ntxy(gt_path)?;
    let sys = read_ntxy(sys_path)?;
    let mapping = eval::match_identities(&gt, &sys);
    let report = eval::accuracy(&gt, &sys, &mapping, eval_config.distance_threshold)?;

    let mut csv = String::from("gt_id,sys_id,gt_frames,correct_frames,accuracy,error_rate\n");
    for row in &report.per_object {
        let sys_id = row.sys_id.map(|s| s.to_string()).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{:.6},{:.6}",
            row.gt_id,
            sys_id,
            row.gt_frames,
            row.correct_frames,
            row.accuracy,
            1.0 - row.accuracy
        )
        .expect("string write");
        println!(
            "object {} -> {}: {}/{} frames correct, accuracy {:.2}%",
            row.gt_id,
            row.sys_id.map(|s| s.to_string()).unwrap_or_else(|| "unmatched".to_string()),
            row.correct_frames,
            row.gt_frames,
            row.accuracy * 100.0
        );
    }
    writeln!(csv, "aggregate,,,,{:.6},{:.6}", report.aggregate, report.error_rate)
        .expect("string write");
    println!(
        "aggregate: accuracy {:.2}%, error rate {:.2}%",
        report.aggregate * 100.0,
        report.error_rate * 100.0
    );

    fs::create_dir_all(out_dir)?;
    let report_path = out_dir.join("report.csv");
    fs::write(&report_path, csv)?;

    let mut manifest = Manifest::new("eval");
    manifest.push("input.gt", gt_path.display());
    manifest.push("input.sys", sys_path.display());
    manifest.push("output.report", report_path.display());
    manifest.push("threshold", threshold);
    manifest.write_to(&out_dir.join("manifest.txt"))?;
    Ok(())
}

pub fn cmd_sweep(
    frames_dir: &Path,
    gt_path: &Path,
    out_dir: &Path,
    config_path: Option<&Path>,
    m_list: &[usize],
    seed: Option<u64>,
    threshold: f64,
) -> Result<()> {
    let config = load_tracker_config(config_path, None, seed)?;
    let eval_config = EvalConfig { distance_threshold: threshold, ..EvalConfig::default() };
    let frames = load_sequence(frames_dir, DEFAULT_FRAME_PATTERN)?;
    if frames.is_empty() {
        return Err(Error::MissingFrameIndex { index: 0 });
    }
    let gt = read_ntxy(gt_path)?;
    let rows = eval::sweep_particles(&frames, &gt, &config, &eval_config, m_list)?;

    fs::create_dir_all(out_dir)?;
    let mut csv = String::from("m,mean_frame_millis,accuracy,error_rate\n");
    for row in &rows {
        writeln!(
            csv,
            "{},{:.3},{:.6},{:.6}",
            row.m, row.mean_frame_millis, row.accuracy, row.error_rate
        )
        .expect("string write");
        println!(
            "m = {:>4}: {:.2} ms/frame, accuracy {:.2}%, error rate {:.2}%",
            row.m,
            row.mean_frame_millis,
            row.accuracy * 100.0,
            row.error_rate * 100.0
        );
    }
    let sweep_path = out_dir.join("sweep.csv");
    fs::write(&sweep_path, csv)?;

    let mut manifest = Manifest::new("sweep");
    manifest.push("input.frames", frames_dir.display());
    manifest.push("input.gt", gt_path.display());
    manifest.push("output.sweep", sweep_path.display());
    manifest.push("threshold", threshold);
    manifest.push(
        "m_list",
        m_list.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","),
    );
    manifest.extend(snapshot(&config).into_iter().map(|(k, v)| (format!("config.{k}"), v)));

    // Cost-benefit needs at least two rows; the sweep CSV above still stands.
    let ratios = eval::cost_benefit(&rows)?;
    let mut cb_csv = String::from("m,ratio\n");
    for (m, ratio) in &ratios {
        match ratio {
            Some(r) => writeln!(cb_csv, "{m},{r:.6}").expect("string write"),
            None => writeln!(cb_csv, "{m},").expect("string write"),
        }
    }
    let cb_path = out_dir.join("cost_benefit.csv");
    fs::write(&cb_path, cb_csv)?;
    manifest.push("output.cost_benefit", cb_path.display());
    manifest.write_to(&out_dir.join("manifest.txt"))?;

    // Report the knee when the ratio peaks strictly inside the sweep.
    let valued: Vec<(usize, f64)> =
        ratios.iter().filter_map(|(m, r)| r.map(|v| (*m, v))).collect();
    if valued.len() >= 3 {
        let (best_idx, _) = valued
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).expect("finite ratios"))
            .expect("non-empty");
        if best_idx > 0 && best_idx + 1 < valued.len() {
            println!("cost-benefit knee at m = {}", valued[best_idx].0);
        }
    }

    Ok(())
}
