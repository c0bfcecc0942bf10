//! Per-frame pipeline orchestration: background update, subtraction, blob
//! extraction, per-object particle filtering, data association, and timing.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::appearance::{BinnedFrame, HistogramConfig};
use crate::background::{extract_blobs, BackgroundModel};
use crate::data_association::{associate_frame, AssociationOutcome, OcclusionQueue, TrackedObject};
use crate::error::{Error, Result};
use crate::particle_filter::{ArmaCoeffs, NoiseParams, PfOutput};
use crate::scene_io::{Frame, TrajectoryRecord};

/// All tunables of the pipeline with their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Background learning rate in (0, 1].
    pub alpha: f64,
    /// Foreground threshold on the max absolute channel difference (0-255).
    pub fg_threshold: f64,
    /// Minimum blob area in pixels.
    pub min_area: usize,
    /// Particles per tracked object (M).
    pub particles: usize,
    pub arma_a: f64,
    pub arma_b: f64,
    pub arma_c: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_scale: f64,
    /// Added to sigma_x and sigma_y once per occluded frame.
    pub noise_increment: f64,
    /// Likelihood threshold T_l in [0, 1].
    pub likelihood_threshold: f64,
    /// Association gate: object rectangle scaled by this factor.
    pub gate_factor: f64,
    /// Occlusion frames an object survives before being dropped.
    pub max_occluded_frames: u32,
    pub n_h: u32,
    pub n_s: u32,
    pub n_v: u32,
    pub sat_threshold: f64,
    pub val_threshold: f64,
    /// Base RNG seed; each object derives its own stream from its id.
    pub seed: u64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            fg_threshold: 30.0,
            min_area: 50,
            particles: 100,
            arma_a: 2.0,
            arma_b: -1.0,
            arma_c: 1.0,
            sigma_x: 1.0,
            sigma_y: 0.5,
            sigma_scale: 0.02,
            noise_increment: 1.0,
            likelihood_threshold: 0.6,
            gate_factor: 1.5,
            max_occluded_frames: 30,
            n_h: 10,
            n_s: 10,
            n_v: 10,
            sat_threshold: 0.1,
            val_threshold: 0.2,
            seed: 0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |cond: bool, key: &str, reason: String| {
            if cond {
                Ok(())
            } else {
                Err(Error::Config { key: key.to_string(), reason })
            }
        };
        check(
            self.alpha > 0.0 && self.alpha <= 1.0,
            "alpha",
            format!("must be in (0, 1], got {}", self.alpha),
        )?;
        check(
            self.fg_threshold >= 0.0 && self.fg_threshold <= 255.0,
            "fg_threshold",
            format!("must be in [0, 255], got {}", self.fg_threshold),
        )?;
        check(self.particles >= 1, "particles", format!("must be >= 1, got {}", self.particles))?;
        check(self.sigma_x > 0.0, "sigma_x", format!("must be > 0, got {}", self.sigma_x))?;
        check(self.sigma_y > 0.0, "sigma_y", format!("must be > 0, got {}", self.sigma_y))?;
        check(
            self.sigma_scale >= 0.0,
            "sigma_scale",
            format!("must be >= 0, got {}", self.sigma_scale),
        )?;
        check(
            self.noise_increment >= 0.0,
            "noise_increment",
            format!("must be >= 0, got {}", self.noise_increment),
        )?;
        check(
            (0.0..=1.0).contains(&self.likelihood_threshold),
            "likelihood_threshold",
            format!("must be in [0, 1], got {}", self.likelihood_threshold),
        )?;
        check(
            self.gate_factor > 0.0,
            "gate_factor",
            format!("must be > 0, got {}", self.gate_factor),
        )?;
        self.histogram_config().validate()?;
        Ok(())
    }

    pub fn histogram_config(&self) -> HistogramConfig {
        HistogramConfig {
            n_h: self.n_h,
            n_s: self.n_s,
            n_v: self.n_v,
            sat_threshold: self.sat_threshold,
            val_threshold: self.val_threshold,
        }
    }

    pub fn arma(&self) -> ArmaCoeffs {
        ArmaCoeffs { a: self.arma_a, b: self.arma_b, c: self.arma_c }
    }

    pub fn base_noise(&self) -> NoiseParams {
        NoiseParams {
            sigma_x: self.sigma_x,
            sigma_y: self.sigma_y,
            sigma_scale: self.sigma_scale,
        }
    }
}

/// Timing row for one processed frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTiming {
    pub frame: u32,
    /// Wall-clock milliseconds of the frame's tracking work (decode I/O is
    /// outside this measurement).
    pub millis: f64,
    /// Active objects after the frame.
    pub object_count: usize,
    pub blob_count: usize,
}

/// Aggregate timing over a run.
#[derive(Debug, Clone, Default)]
pub struct TimingReport {
    pub rows: Vec<FrameTiming>,
    pub total_millis: f64,
    pub mean_frame_millis: f64,
}

impl TimingReport {
    fn from_rows(rows: Vec<FrameTiming>) -> Self {
        let total: f64 = rows.iter().map(|r| r.millis).sum();
        let mean = if rows.is_empty() { 0.0 } else { total / rows.len() as f64 };
        Self { rows, total_millis: total, mean_frame_millis: mean }
    }
}

/// Summary of one processed frame.
#[derive(Debug, Clone, Default)]
pub struct FrameOutcome {
    pub blob_count: usize,
    pub association: AssociationOutcome,
}

/// Mutable run state: background model, active objects, occlusion queue,
/// retired objects (dropped but keeping their trajectories), and timing.
#[derive(Debug)]
pub struct TrackerState {
    pub config: TrackerConfig,
    pub background: Option<BackgroundModel>,
    pub objects: Vec<TrackedObject>,
    pub queue: OcclusionQueue,
    pub retired: Vec<TrackedObject>,
    pub next_id: u32,
    pub timings: Vec<FrameTiming>,
}

impl TrackerState {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            background: None,
            objects: Vec::new(),
            queue: OcclusionQueue::new(),
            retired: Vec::new(),
            next_id: 0,
            timings: Vec::new(),
        })
    }

    /// Processes one frame: update background, subtract, extract blobs; when
    /// there is nothing to do (no blobs, no active objects) the frame ends
    /// there, otherwise every active object runs its filter iteration and
    /// the association pass resolves the frame.
    pub fn process_frame(&mut self, frame: &Frame) -> Result<FrameOutcome> {
        let start = Instant::now();
        if self.background.is_none() {
            self.background =
                Some(BackgroundModel::new(frame.width(), frame.height(), self.config.alpha)?);
        }
        let background = self.background.as_mut().expect("created above");
        background.update(frame)?;
        let mask = background.subtract(frame, self.config.fg_threshold)?;
        let blobs = extract_blobs(&mask, self.config.min_area);

        let mut outcome = FrameOutcome { blob_count: blobs.len(), ..Default::default() };
        if !(blobs.is_empty() && self.objects.is_empty()) {
            let binned = BinnedFrame::new(frame, &self.config.histogram_config())?;
            let mut pf_outputs: BTreeMap<u32, PfOutput> = BTreeMap::new();
            for object in self.objects.iter_mut() {
                pf_outputs.insert(object.id, object.pf_step(&binned, &self.config)?);
            }
            let (association, dropped) = associate_frame(
                &mut self.objects,
                &mut self.queue,
                &blobs,
                &pf_outputs,
                &binned,
                frame.index(),
                &self.config,
                &mut self.next_id,
            )?;
            outcome.association = association;
            self.retired.extend(dropped);
        }

        self.timings.push(FrameTiming {
            frame: frame.index(),
            millis: start.elapsed().as_secs_f64() * 1e3,
            object_count: self.objects.len(),
            blob_count: outcome.blob_count,
        });
        Ok(outcome)
    }

    /// All trajectory records produced so far (active and retired objects),
    /// sorted by (n, t).
    pub fn trajectories(&self) -> Vec<TrajectoryRecord> {
        let mut records: Vec<TrajectoryRecord> = self
            .objects
            .iter()
            .chain(&self.retired)
            .flat_map(|o| o.trajectory.iter().copied())
            .collect();
        records.sort_by_key(|a| (a.n, a.t));
        records
    }

    pub fn timing_report(&self) -> TimingReport {
        TimingReport::from_rows(self.timings.clone())
    }
}

/// Folds the whole frame sequence through the pipeline; deterministic for a
/// fixed config seed. Frames must share dimensions and come in ascending
/// index order.
pub fn run(frames: &[Frame], config: &TrackerConfig) -> Result<(Vec<TrajectoryRecord>, TimingReport)> {
    let mut state = TrackerState::new(config.clone())?;
    for frame in frames {
        state.process_frame(frame)?;
    }
    Ok((state.trajectories(), state.timing_report()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene_io::{Actor, SceneSpec};

    const BG: (u8, u8, u8) = (90, 90, 90);

    fn single_actor_scene(duration: u32) -> SceneSpec {
        SceneSpec {
            width: 64,
            height: 64,
            background_color: BG,
            duration,
            actors: vec![Actor {
                color: (230, 30, 30),
                start: (12.0, 32.0),
                velocity: (1.0, 0.0),
                size: (10, 10),
                enter_frame: 1,
                exit_frame: duration.min(40),
            }],
            seed: 0,
        }
    }

    #[test]
    fn all_background_frames_track_nothing() {
        let spec = SceneSpec {
            width: 32,
            height: 32,
            background_color: BG,
            duration: 4,
            actors: Vec::new(),
            seed: 0,
        };
        let (frames, _) = spec.generate().unwrap();
        let (records, timing) = run(&frames, &TrackerConfig::default()).unwrap();
        assert!(records.is_empty());
        assert_eq!(timing.rows.len(), 4);
        assert!(timing.rows.iter().all(|r| r.object_count == 0 && r.blob_count == 0));
    }

    #[test]
    fn first_frame_seeds_background_quietly() {
        let (frames, _) = single_actor_scene(3).generate().unwrap();
        let mut state = TrackerState::new(TrackerConfig::default()).unwrap();
        let outcome = state.process_frame(&frames[0]).unwrap();
        // Frame 0 is pure background: seeding leaves nothing foreground.
        assert_eq!(outcome.blob_count, 0);
        assert!(state.objects.is_empty());
        // The actor enters at frame 1 and becomes an object.
        let outcome = state.process_frame(&frames[1]).unwrap();
        assert_eq!(outcome.blob_count, 1);
        assert_eq!(outcome.association.new_objects, vec![0]);
    }

    #[test]
    fn single_actor_trajectory_covers_every_active_frame() {
        let (frames, _) = single_actor_scene(40).generate().unwrap();
        let (records, _) = run(&frames, &TrackerConfig::default()).unwrap();
        let object_records: Vec<_> = records.iter().filter(|r| r.n == 0).collect();
        let times: Vec<u32> = object_records.iter().map(|r| r.t).collect();
        let expected: Vec<u32> = (1..40).collect();
        assert_eq!(times, expected, "gap-free trajectory from first detection");
        assert_eq!(records.len(), object_records.len(), "exactly one id");
    }

    #[test]
    fn run_is_deterministic_for_a_fixed_seed() {
        let (frames, _) = single_actor_scene(20).generate().unwrap();
        let config = TrackerConfig { seed: 99, ..TrackerConfig::default() };
        let (a, _) = run(&frames, &config).unwrap();
        let (b, _) = run(&frames, &config).unwrap();
        assert_eq!(
            crate::scene_io::format_ntxy(&a),
            crate::scene_io::format_ntxy(&b),
            "byte-identical NTXY output"
        );
    }

    #[test]
    fn three_visible_actors_append_three_records_per_frame() {
        let spec = SceneSpec {
            width: 96,
            height: 96,
            background_color: BG,
            duration: 10,
            actors: [(20.0, 20.0), (60.0, 30.0), (30.0, 70.0)]
                .iter()
                .enumerate()
                .map(|(i, &start)| Actor {
                    color: [(230, 30, 30), (40, 40, 230), (30, 200, 40)][i],
                    start,
                    velocity: (0.5, 0.0),
                    size: (10, 10),
                    enter_frame: 1,
                    exit_frame: 10,
                })
                .collect(),
            seed: 0,
        };
        let (frames, _) = spec.generate().unwrap();
        let (records, _) = run(&frames, &TrackerConfig::default()).unwrap();
        for t in 1..10u32 {
            let count = records.iter().filter(|r| r.t == t).count();
            assert_eq!(count, 3, "frame {t}");
        }
    }

    #[test]
    fn ids_increase_and_object_count_only_drops_by_staleness() {
        let (frames, _) = single_actor_scene(40).generate().unwrap();
        let mut state = TrackerState::new(TrackerConfig::default()).unwrap();
        let mut last_count = 0usize;
        for frame in &frames {
            let outcome = state.process_frame(frame).unwrap();
            let count = state.objects.len();
            assert!(
                count >= last_count || !outcome.association.dropped.is_empty(),
                "object count decreased without a drop"
            );
            last_count = count;
        }
        let ids: Vec<u32> = state.objects.iter().map(|o| o.id).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(ids, sorted, "ids unique and ascending");
    }

    #[test]
    fn rejects_dimension_change_mid_run() {
        let (frames, _) = single_actor_scene(3).generate().unwrap();
        let mut state = TrackerState::new(TrackerConfig::default()).unwrap();
        state.process_frame(&frames[0]).unwrap();
        let other = Frame::filled(32, 32, 1, BG).unwrap();
        assert!(matches!(
            state.process_frame(&other),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn config_validation_names_offending_keys() {
        let mut config = TrackerConfig { particles: 0, ..TrackerConfig::default() };
        match config.validate().unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "particles"),
            other => panic!("unexpected error: {other}"),
        }
        config.particles = 10;
        config.alpha = 0.0;
        match config.validate().unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "alpha"),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn defaults_match_documented_values() {
        let config = TrackerConfig::default();
        assert_eq!(config.alpha, 0.01);
        assert_eq!(config.fg_threshold, 30.0);
        assert_eq!(config.min_area, 50);
        assert_eq!(config.particles, 100);
        assert_eq!((config.arma_a, config.arma_b, config.arma_c), (2.0, -1.0, 1.0));
        assert_eq!((config.sigma_x, config.sigma_y, config.sigma_scale), (1.0, 0.5, 0.02));
        assert_eq!(config.noise_increment, 1.0);
        assert_eq!(config.likelihood_threshold, 0.6);
        assert_eq!(config.gate_factor, 1.5);
        assert_eq!(config.max_occluded_frames, 30);
        assert_eq!((config.n_h, config.n_s, config.n_v), (10, 10, 10));
        assert_eq!((config.sat_threshold, config.val_threshold), (0.1, 0.2));
    }
}
