//! Ground-truth comparison, accuracy and error rate, identity matching,
//! particle-count sweeps, and cost-benefit analysis.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scene_io::{Frame, TrajectoryRecord};
use crate::tracker::{self, TrackerConfig};

/// Identity-matching strategy marker; greedy mean-distance is the only
/// implemented strategy and is deterministic at small object counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchingStrategy {
    #[default]
    GreedyMeanDistance,
}

/// Evaluation settings; the 25-pixel default also absorbs ground-truth
/// reference-point offsets (head vs center of mass).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub distance_threshold: f64,
    pub matching: MatchingStrategy,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { distance_threshold: 25.0, matching: MatchingStrategy::default() }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.distance_threshold <= 0.0 {
            return Err(Error::Config {
                key: "threshold".to_string(),
                reason: format!("must be > 0, got {}", self.distance_threshold),
            });
        }
        Ok(())
    }
}

/// One row of a particle-count sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    pub mean_frame_millis: f64,
    pub accuracy: f64,
    pub error_rate: f64,
}

/// Euclidean position error between a ground-truth and a system coordinate.
pub fn position_error(gt: (f64, f64), sys: (f64, f64)) -> f64 {
    let dx = gt.0 - sys.0;
    let dy = gt.1 - sys.1;
    (dx * dx + dy * dy).sqrt()
}

/// A frame counts as correctly tracked iff the error is strictly below the
/// threshold.
pub fn frame_correct(error: f64, threshold: f64) -> bool {
    error < threshold
}

fn tracks_by_id(records: &[TrajectoryRecord]) -> BTreeMap<u32, BTreeMap<u32, (f64, f64)>> {
    let mut tracks: BTreeMap<u32, BTreeMap<u32, (f64, f64)>> = BTreeMap::new();
    for r in records {
        tracks.entry(r.n).or_default().insert(r.t, (r.x, r.y));
    }
    tracks
}

/// Greedy identity assignment minimizing mean positional distance over
/// temporally overlapping frames. Each sys id is used at most once;
/// ground-truth ids without any overlapping sys track stay unmatched.
pub fn match_identities(
    gt: &[TrajectoryRecord],
    sys: &[TrajectoryRecord],
) -> BTreeMap<u32, u32> {
    let gt_tracks = tracks_by_id(gt);
    let sys_tracks = tracks_by_id(sys);

    let mut candidates: Vec<(f64, u32, u32)> = Vec::new();
    for (&g, g_points) in &gt_tracks {
        for (&s, s_points) in &sys_tracks {
            let mut total = 0.0;
            let mut count = 0usize;
            for (t, &g_pos) in g_points {
                if let Some(&s_pos) = s_points.get(t) {
                    total += position_error(g_pos, s_pos);
                    count += 1;
                }
            }
            if count > 0 {
                candidates.push((total / count as f64, g, s));
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).expect("finite distances").then_with(|| (a.1, a.2).cmp(&(b.1, b.2)))
    });

    let mut mapping = BTreeMap::new();
    let mut used_sys = Vec::new();
    for (_, g, s) in candidates {
        if !mapping.contains_key(&g) && !used_sys.contains(&s) {
            mapping.insert(g, s);
            used_sys.push(s);
        }
    }
    mapping
}

/// Per-object accuracy line of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectAccuracy {
    pub gt_id: u32,
    pub sys_id: Option<u32>,
    pub gt_frames: usize,
    pub correct_frames: usize,
    pub accuracy: f64,
}

/// Full accuracy report: per-object rows plus the aggregate over mapped ids
/// weighted by ground-truth frame counts.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub per_object: Vec<ObjectAccuracy>,
    pub aggregate: f64,
    pub error_rate: f64,
}

/// Fraction of correctly tracked ground-truth frames over mapped objects.
/// Ground-truth frames where the mapped system track has no record count as
/// incorrect. Empty ground truth is an error (undefined metric).
pub fn accuracy(
    gt: &[TrajectoryRecord],
    sys: &[TrajectoryRecord],
    mapping: &BTreeMap<u32, u32>,
    threshold: f64,
) -> Result<AccuracyReport> {
    if gt.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let gt_tracks = tracks_by_id(gt);
    let sys_tracks = tracks_by_id(sys);

    let mut per_object = Vec::new();
    let mut total_frames = 0usize;
    let mut total_correct = 0usize;
    for (&g, g_points) in &gt_tracks {
        let sys_id = mapping.get(&g).copied();
        let mut correct = 0usize;
        if let Some(s) = sys_id {
            let s_points = &sys_tracks[&s];
            for (t, &g_pos) in g_points {
                if let Some(&s_pos) = s_points.get(t) {
                    if frame_correct(position_error(g_pos, s_pos), threshold) {
                        correct += 1;
                    }
                }
            }
            total_frames += g_points.len();
            total_correct += correct;
        }
        per_object.push(ObjectAccuracy {
            gt_id: g,
            sys_id,
            gt_frames: g_points.len(),
            correct_frames: correct,
            accuracy: if g_points.is_empty() { 0.0 } else { correct as f64 / g_points.len() as f64 },
        });
    }
    let aggregate =
        if total_frames > 0 { total_correct as f64 / total_frames as f64 } else { 0.0 };
    Ok(AccuracyReport { per_object, aggregate, error_rate: 1.0 - aggregate })
}

/// One full tracker run per particle count, collecting mean frame time and
/// accuracy. Every run restarts from the same base seed, so a fixed seed
/// gives identical accuracy columns across repeated sweeps.
pub fn sweep_particles(
    frames: &[Frame],
    gt: &[TrajectoryRecord],
    config: &TrackerConfig,
    eval_config: &EvalConfig,
    m_values: &[usize],
) -> Result<Vec<SweepRow>> {
    if m_values.is_empty() {
        return Err(Error::Config {
            key: "m-list".to_string(),
            reason: "needs at least one particle count".to_string(),
        });
    }
    eval_config.validate()?;
    let mut rows = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let run_config = TrackerConfig { particles: m, ..config.clone() };
        let (records, timing) = tracker::run(frames, &run_config)?;
        let mapping = match_identities(gt, &records);
        let report = accuracy(gt, &records, &mapping, eval_config.distance_threshold)?;
        rows.push(SweepRow {
            m,
            mean_frame_millis: timing.mean_frame_millis,
            accuracy: report.aggregate,
            error_rate: report.error_rate,
        });
    }
    Ok(rows)
}

/// Cost-benefit ratios for rows after the first: cumulative accuracy gain
/// over cumulative time increase, each column normalized to [0, 1] by its
/// maximum absolute cumulative value over the sweep. A zero time increase
/// leaves the ratio absent.
pub fn cost_benefit(rows: &[SweepRow]) -> Result<Vec<(usize, Option<f64>)>> {
    if rows.len() < 2 {
        return Err(Error::InsufficientSweepRows { got: rows.len() });
    }
    let cum_acc: Vec<f64> = rows[1..].iter().map(|r| r.accuracy - rows[0].accuracy).collect();
    let cum_time: Vec<f64> =
        rows[1..].iter().map(|r| r.mean_frame_millis - rows[0].mean_frame_millis).collect();
    let acc_denom = cum_acc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let time_denom = cum_time.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut out = Vec::with_capacity(rows.len() - 1);
    for (i, row) in rows[1..].iter().enumerate() {
        let norm_acc = if acc_denom > 0.0 { cum_acc[i] / acc_denom } else { 0.0 };
        let norm_time = if time_denom > 0.0 { cum_time[i] / time_denom } else { 0.0 };
        let ratio = if norm_time != 0.0 { Some(norm_acc / norm_time) } else { None };
        out.push((row.m, ratio));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pftrack_oracles::{oracle_assignment, OracleTrack};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn position_error_basics() {
        assert_eq!(position_error((10.0, 10.0), (13.0, 14.0)), 5.0);
        assert_eq!(position_error((3.0, 4.0), (3.0, 4.0)), 0.0);
        assert_eq!(position_error((1.0, 2.0), (5.0, 9.0)), position_error((5.0, 9.0), (1.0, 2.0)));
    }

    #[test]
    fn position_error_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let p = |r: &mut ChaCha8Rng| (r.random_range(-50.0..50.0), r.random_range(-50.0..50.0));
            let (a, b, c) = (p(&mut rng), p(&mut rng), p(&mut rng));
            assert!(position_error(a, c) <= position_error(a, b) + position_error(b, c) + 1e-12);
        }
    }

    #[test]
    fn frame_correct_is_strict() {
        assert!(frame_correct(5.0, 25.0));
        assert!(!frame_correct(25.0, 25.0));
        assert!(frame_correct(0.0, 0.001));
    }

    fn track(n: u32, ts: std::ops::Range<u32>, x0: f64, y: f64) -> Vec<TrajectoryRecord> {
        ts.map(|t| TrajectoryRecord::new(n, t, x0 + t as f64, y)).collect()
    }

    #[test]
    fn identical_record_sets_map_identically() {
        let mut gt = track(0, 0..5, 0.0, 0.0);
        gt.extend(track(1, 0..5, 100.0, 50.0));
        let mapping = match_identities(&gt, &gt);
        assert_eq!(mapping.get(&0), Some(&0));
        assert_eq!(mapping.get(&1), Some(&1));
    }

    #[test]
    fn permuted_ids_are_recovered() {
        let mut gt = track(0, 0..5, 0.0, 0.0);
        gt.extend(track(1, 0..5, 100.0, 50.0));
        gt.extend(track(2, 0..5, 0.0, 90.0));
        let mut sys = track(5, 0..5, 100.0, 50.0);
        sys.extend(track(6, 0..5, 0.0, 90.0));
        sys.extend(track(7, 0..5, 0.0, 0.0));
        let mapping = match_identities(&gt, &sys);
        assert_eq!(mapping.get(&0), Some(&7));
        assert_eq!(mapping.get(&1), Some(&5));
        assert_eq!(mapping.get(&2), Some(&6));
    }

    #[test]
    fn non_overlapping_gt_stays_unmatched() {
        let gt = track(0, 0..5, 0.0, 0.0);
        let sys = track(0, 10..15, 0.0, 0.0);
        assert!(match_identities(&gt, &sys).is_empty());
    }

    #[test]
    fn greedy_matches_exhaustive_oracle_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for case in 0..200 {
            let n_gt = rng.random_range(1..=4usize);
            let n_sys = rng.random_range(1..=4usize);
            // Well-separated anchor positions keep the optimum unambiguous.
            let mut anchors: Vec<(f64, f64)> = Vec::new();
            for i in 0..n_gt.max(n_sys) {
                anchors.push((200.0 * i as f64, 150.0 * ((i * 7) % 3) as f64));
            }
            let mut gt: Vec<TrajectoryRecord> = Vec::new();
            for (i, anchor) in anchors.iter().enumerate().take(n_gt) {
                for t in 0..6u32 {
                    gt.push(TrajectoryRecord::new(i as u32, t, anchor.0 + t as f64, anchor.1));
                }
            }
            let mut sys_ids: Vec<usize> = (0..n_sys).collect();
            for i in (1..sys_ids.len()).rev() {
                let j = rng.random_range(0..=i);
                sys_ids.swap(i, j);
            }
            let mut sys: Vec<TrajectoryRecord> = Vec::new();
            for (slot, &anchor) in sys_ids.iter().enumerate() {
                let jitter = rng.random_range(-2.0..2.0);
                for t in 0..6u32 {
                    sys.push(TrajectoryRecord::new(
                        slot as u32 + 10,
                        t,
                        anchors[anchor].0 + t as f64 + jitter,
                        anchors[anchor].1,
                    ));
                }
            }

            let greedy = match_identities(&gt, &sys);
            let to_oracle = |records: &[TrajectoryRecord]| -> Vec<OracleTrack> {
                let mut map: BTreeMap<u32, Vec<(u32, f64, f64)>> = BTreeMap::new();
                for r in records {
                    map.entry(r.n).or_default().push((r.t, r.x, r.y));
                }
                map.into_iter().map(|(id, points)| OracleTrack { id, points }).collect()
            };
            let optimal = oracle_assignment(&to_oracle(&gt), &to_oracle(&sys)).unwrap();
            let greedy_pairs: Vec<(u32, u32)> = greedy.into_iter().collect();
            assert_eq!(greedy_pairs, optimal, "case {case}");
        }
    }

    #[test]
    fn accuracy_counts_thresholded_frames() {
        let gt = track(0, 0..10, 0.0, 0.0);
        let mut sys = track(0, 0..10, 0.0, 0.0);
        sys[3].x += 30.0; // one frame pushed beyond the 25 px threshold
        let mapping = match_identities(&gt, &sys);
        let report = accuracy(&gt, &sys, &mapping, 25.0).unwrap();
        assert_eq!(report.aggregate, 0.9);
        assert!((report.error_rate - 0.1).abs() < 1e-12);
    }

    #[test]
    fn exact_tracks_score_one() {
        let gt = track(0, 0..10, 0.0, 0.0);
        let mapping = match_identities(&gt, &gt);
        let report = accuracy(&gt, &gt, &mapping, 25.0).unwrap();
        assert_eq!(report.aggregate, 1.0);
        assert_eq!(report.error_rate, 0.0);
    }

    #[test]
    fn missing_sys_frames_count_as_incorrect() {
        let gt = track(0, 0..10, 0.0, 0.0);
        let sys = track(0, 0..5, 0.0, 0.0); // second half missing
        let mapping = match_identities(&gt, &sys);
        let report = accuracy(&gt, &sys, &mapping, 25.0).unwrap();
        assert_eq!(report.aggregate, 0.5);
    }

    #[test]
    fn empty_ground_truth_is_an_error() {
        assert!(matches!(
            accuracy(&[], &track(0, 0..5, 0.0, 0.0), &BTreeMap::new(), 25.0),
            Err(Error::EmptyGroundTruth)
        ));
    }

    #[test]
    fn accuracy_error_rate_complement() {
        let gt = track(0, 0..7, 0.0, 0.0);
        let mut sys = track(0, 0..7, 0.0, 0.0);
        sys[0].x += 100.0;
        sys[4].x += 100.0;
        let mapping = match_identities(&gt, &sys);
        let report = accuracy(&gt, &sys, &mapping, 25.0).unwrap();
        assert_eq!(report.aggregate + report.error_rate, 1.0);
        assert!((0.0..=1.0).contains(&report.aggregate));
    }

    #[test]
    fn sweep_single_m_yields_single_deterministic_row() {
        let spec = crate::scene_io::SceneSpec {
            width: 48,
            height: 48,
            background_color: (90, 90, 90),
            duration: 12,
            actors: vec![crate::scene_io::Actor {
                color: (230, 30, 30),
                start: (10.0, 24.0),
                velocity: (1.0, 0.0),
                size: (8, 8),
                enter_frame: 1,
                exit_frame: 12,
            }],
            seed: 0,
        };
        let (frames, gt) = spec.generate().unwrap();
        let config = TrackerConfig { min_area: 30, seed: 5, ..TrackerConfig::default() };
        let rows =
            sweep_particles(&frames, &gt, &config, &EvalConfig::default(), &[40]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].m, 40);
        assert!((rows[0].error_rate - (1.0 - rows[0].accuracy)).abs() < 1e-12);

        let again =
            sweep_particles(&frames, &gt, &config, &EvalConfig::default(), &[40]).unwrap();
        assert_eq!(rows[0].accuracy, again[0].accuracy, "seeded sweeps repeat exactly");
    }

    fn row(m: usize, millis: f64, acc: f64) -> SweepRow {
        SweepRow { m, mean_frame_millis: millis, accuracy: acc, error_rate: 1.0 - acc }
    }

    #[test]
    fn cost_benefit_decreases_past_an_accuracy_plateau() {
        let rows = vec![
            row(20, 1.0, 0.5),
            row(50, 2.0, 0.9),
            row(90, 3.0, 0.95),
            row(130, 4.0, 0.95),
            row(170, 5.0, 0.95),
        ];
        let ratios = cost_benefit(&rows).unwrap();
        let values: Vec<f64> = ratios.iter().map(|(_, r)| r.unwrap()).collect();
        // Plateau from m = 90 on: ratios strictly decrease afterwards.
        assert!(values[2] < values[1]);
        assert!(values[3] < values[2]);
    }

    #[test]
    fn cost_benefit_constant_accuracy_gives_equal_ratios() {
        let rows = vec![row(20, 1.0, 0.8), row(50, 2.0, 0.8), row(90, 3.0, 0.8)];
        let ratios = cost_benefit(&rows).unwrap();
        assert!(ratios.iter().all(|(_, r)| *r == Some(0.0)));
    }

    #[test]
    fn cost_benefit_edge_cases() {
        let rows = vec![row(20, 1.0, 0.5), row(50, 2.0, 0.9)];
        let ratios = cost_benefit(&rows).unwrap();
        assert_eq!(ratios.len(), 1);
        assert_eq!(ratios[0].0, 50);
        assert_eq!(ratios[0].1, Some(1.0));

        assert!(matches!(
            cost_benefit(&rows[..1]),
            Err(Error::InsufficientSweepRows { got: 1 })
        ));

        // Zero time increase leaves the ratio absent.
        let flat = vec![row(20, 1.0, 0.5), row(50, 1.0, 0.9)];
        let ratios = cost_benefit(&flat).unwrap();
        assert_eq!(ratios[0].1, None);
    }
}
