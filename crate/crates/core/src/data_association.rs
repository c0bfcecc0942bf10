//! Validates particle-filter outputs against detected blobs, manages the
//! occlusion queue with adaptive noise, drops stale objects, and initializes
//! new ones.
//!
//! Per frame the passes run in order: gated blob association over objects in
//! ascending id, likelihood-based resolution for everything unassociated,
//! global recovery of occluded objects from remaining blobs, stale dropping,
//! and new-object initialization. Every input blob is consumed exactly once.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::appearance::{similarity, BinnedFrame, Histogram, PixelRect};
use crate::background::Blob;
use crate::error::Result;
use crate::particle_filter::{
    init_particles, pf_step, Kinematics, NoiseParams, ObjectState, Particle, PfOutput,
};
use crate::scene_io::TrajectoryRecord;
use crate::tracker::TrackerConfig;

/// Tracking status; `Occluded` iff the object sits in the occlusion queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tracked,
    Occluded,
}

/// One tracked target: committed state, particle set, frozen reference
/// histogram, adaptive noise, and its append-only trajectory.
#[derive(Debug, Clone)]
pub struct TrackedObject {
    pub id: u32,
    pub state: ObjectState,
    /// Rectangle size captured at initialization; the appearance region is
    /// base_size scaled by the state's scale.
    pub base_size: (f64, f64),
    /// Reference histogram q', frozen at initialization.
    pub reference: Histogram,
    pub particles: Vec<Particle>,
    pub kinematics: Kinematics,
    pub noise: NoiseParams,
    pub status: TrackStatus,
    /// Consecutive occluded frames; 0 whenever status is Tracked.
    pub occluded_frames: u32,
    pub trajectory: Vec<TrajectoryRecord>,
    rng: ChaCha8Rng,
}

impl TrackedObject {
    /// Runs one particle-filter iteration with this object's RNG stream.
    /// Does not commit the candidate state; association decides.
    pub fn pf_step(&mut self, frame: &BinnedFrame, config: &TrackerConfig) -> Result<PfOutput> {
        pf_step(
            &mut self.particles,
            &self.kinematics,
            &config.arma(),
            &self.noise,
            self.base_size,
            &self.reference,
            frame,
            &mut self.rng,
        )
    }

    fn commit(&mut self, state: ObjectState, frame_width: u32, frame_height: u32) {
        // Scale clamps to the same band association updates use; unbounded
        // commits let the ARMA extrapolation run the scale into degenerate
        // one-pixel appearance windows.
        let clamped = ObjectState {
            x: state.x.clamp(0.0, (frame_width - 1) as f64),
            y: state.y.clamp(0.0, (frame_height - 1) as f64),
            scale: state.scale.clamp(0.5, 2.0),
        };
        self.kinematics.shift(clamped);
        self.state = clamped;
    }

    fn reset_adaptive(&mut self, config: &TrackerConfig) {
        self.noise = config.base_noise();
        self.occluded_frames = 0;
        self.status = TrackStatus::Tracked;
    }
}

/// Ordered ids of occluded objects, in order of occlusion onset.
#[derive(Debug, Clone, Default)]
pub struct OcclusionQueue {
    ids: VecDeque<u32>,
}

impl OcclusionQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, id: u32) {
        if !self.contains(id) {
            self.ids.push_back(id);
        }
    }

    pub fn remove(&mut self, id: u32) {
        self.ids.retain(|&i| i != id);
    }

    pub fn contains(&self, id: u32) -> bool {
        self.ids.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Ids in occlusion-onset order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.ids.iter().copied()
    }
}

/// Structured result of one association pass; each id appears in at most one
/// list, bucketed by the pass that resolved it.
#[derive(Debug, Clone, Default)]
pub struct AssociationOutcome {
    /// Objects updated from a gated blob match (with the consumed blob).
    pub associated: Vec<(u32, Blob)>,
    /// Objects that kept tracking on their filter candidate (L >= T_l).
    pub pf_confirmed: Vec<u32>,
    /// Objects pushed to the occlusion queue this frame.
    pub newly_occluded: Vec<u32>,
    /// Occluded objects recovered by the global blob-recovery pass.
    pub recovered: Vec<u32>,
    /// Objects dropped after exceeding the occlusion limit.
    pub dropped: Vec<u32>,
    /// Ids of objects initialized from leftover blobs.
    pub new_objects: Vec<u32>,
}

/// Gate test: true iff the blob centroid lies inside the object's rectangle
/// scaled by `gate_factor`, edges inclusive.
pub fn is_within_range(blob: &Blob, object: &TrackedObject, gate_factor: f64) -> bool {
    let half_w = object.base_size.0 * object.state.scale * gate_factor / 2.0;
    let half_h = object.base_size.1 * object.state.scale * gate_factor / 2.0;
    (blob.centroid.0 - object.state.x).abs() <= half_w
        && (blob.centroid.1 - object.state.y).abs() <= half_h
}

fn scale_from_bbox(bbox: (u32, u32, u32, u32), base_size: (f64, f64)) -> f64 {
    let ratio = (bbox.2 as f64 / base_size.0 + bbox.3 as f64 / base_size.1) / 2.0;
    ratio.clamp(0.5, 2.0)
}

/// Gated association: among in-gate unconsumed blobs the one with the best
/// similarity >= T_l updates the object (state to blob centroid, scale from
/// the bbox, kinematics shift, adaptive parameters reset). Returns the index
/// of the consumed blob.
pub fn try_associate_object(
    object: &mut TrackedObject,
    blobs: &[Blob],
    consumed: &mut [bool],
    blob_histograms: &[Histogram],
    config: &TrackerConfig,
) -> Result<Option<usize>> {
    let mut best: Option<(usize, f64)> = None;
    for (i, blob) in blobs.iter().enumerate() {
        if consumed[i] || !is_within_range(blob, object, config.gate_factor) {
            continue;
        }
        let pi = similarity(&object.reference, &blob_histograms[i])?;
        if pi >= config.likelihood_threshold && best.is_none_or(|(_, b)| pi > b) {
            best = Some((i, pi));
        }
    }
    let Some((index, _)) = best else {
        return Ok(None);
    };
    let blob = &blobs[index];
    consumed[index] = true;
    let new_state = ObjectState {
        x: blob.centroid.0,
        y: blob.centroid.1,
        scale: scale_from_bbox(blob.bbox, object.base_size),
    };
    object.kinematics.shift(new_state);
    object.state = new_state;
    object.reset_adaptive(config);
    Ok(Some(index))
}

/// Resolution for an object the gated pass left unassociated: a confident
/// filter candidate (L >= T_l) keeps tracking; otherwise the object goes (or
/// stays) occluded with inflated noise, its last committed state persisting.
pub fn resolve_unassociated(
    object: &mut TrackedObject,
    pf: &PfOutput,
    queue: &mut OcclusionQueue,
    config: &TrackerConfig,
    frame_width: u32,
    frame_height: u32,
) -> TrackStatus {
    if pf.likelihood >= config.likelihood_threshold {
        object.commit(pf.state, frame_width, frame_height);
        if object.status == TrackStatus::Occluded {
            queue.remove(object.id);
        }
        object.reset_adaptive(config);
        TrackStatus::Tracked
    } else {
        object.status = TrackStatus::Occluded;
        queue.push(object.id);
        inflate_noise(object, config.noise_increment);
        object.occluded_frames += 1;
        TrackStatus::Occluded
    }
}

/// Widens the transition noise once per occluded frame.
pub fn inflate_noise(object: &mut TrackedObject, increment: f64) {
    object.noise.inflate(increment);
}

/// Global recovery pass: each unconsumed blob, in deterministic order, goes
/// to the occluded object with the highest similarity >= T_l (ties to the
/// earlier-queued object). Distance is ignored; inflated noise means
/// position confidence is lost.
pub fn try_recover(
    objects: &mut [TrackedObject],
    queue: &mut OcclusionQueue,
    blobs: &[Blob],
    consumed: &mut [bool],
    blob_histograms: &[Histogram],
    config: &TrackerConfig,
) -> Result<Vec<u32>> {
    let mut recovered = Vec::new();
    for (i, blob) in blobs.iter().enumerate() {
        if consumed[i] {
            continue;
        }
        let mut best: Option<(u32, f64)> = None;
        for id in queue.iter() {
            let object = objects.iter().find(|o| o.id == id).expect("queued id is active");
            let pi = similarity(&object.reference, &blob_histograms[i])?;
            if pi >= config.likelihood_threshold && best.is_none_or(|(_, b)| pi > b) {
                best = Some((id, pi));
            }
        }
        let Some((id, _)) = best else {
            continue;
        };
        let object = objects.iter_mut().find(|o| o.id == id).expect("queued id is active");
        let new_state =
            ObjectState { x: blob.centroid.0, y: blob.centroid.1, scale: object.state.scale };
        // Motion history is meaningless after occlusion: restart at rest.
        object.kinematics.restart(new_state);
        object.state = new_state;
        object.reset_adaptive(config);
        queue.remove(id);
        consumed[i] = true;
        recovered.push(id);
    }
    Ok(recovered)
}

/// Removes objects whose occlusion counter strictly exceeds the limit.
/// Returns the removed objects; their trajectories stay in the run output.
pub fn drop_stale(
    objects: &mut Vec<TrackedObject>,
    queue: &mut OcclusionQueue,
    max_occluded_frames: u32,
) -> Vec<TrackedObject> {
    let mut dropped = Vec::new();
    let mut i = 0;
    while i < objects.len() {
        if objects[i].occluded_frames > max_occluded_frames {
            let object = objects.remove(i);
            queue.remove(object.id);
            dropped.push(object);
        } else {
            i += 1;
        }
    }
    dropped
}

/// Initializes a new tracked object from an unconsumed blob: state at the
/// blob centroid with scale 1, base size from the bbox, reference histogram
/// over the blob region, particles at the state, RNG stream derived from the
/// run seed and the object id.
pub fn init_object(
    blob: &Blob,
    frame: &BinnedFrame,
    config: &TrackerConfig,
    id: u32,
) -> Result<TrackedObject> {
    let state = ObjectState { x: blob.centroid.0, y: blob.centroid.1, scale: 1.0 };
    let reference = frame.histogram(PixelRect::from_bbox(blob.bbox))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(id as u64);
    Ok(TrackedObject {
        id,
        state,
        base_size: (blob.bbox.2 as f64, blob.bbox.3 as f64),
        reference,
        particles: init_particles(state, config.particles)?,
        kinematics: Kinematics::stationary(state),
        noise: config.base_noise(),
        status: TrackStatus::Tracked,
        occluded_frames: 0,
        trajectory: Vec::new(),
        rng,
    })
}

/// One full association pass over a frame. `pf_outputs` must hold the
/// completed pf_step result for every active object. Appends one trajectory
/// record per Tracked object and returns the outcome plus dropped objects.
#[allow(clippy::too_many_arguments)]
pub fn associate_frame(
    objects: &mut Vec<TrackedObject>,
    queue: &mut OcclusionQueue,
    blobs: &[Blob],
    pf_outputs: &BTreeMap<u32, PfOutput>,
    frame: &BinnedFrame,
    frame_index: u32,
    config: &TrackerConfig,
    next_id: &mut u32,
) -> Result<(AssociationOutcome, Vec<TrackedObject>)> {
    let mut outcome = AssociationOutcome::default();
    let mut consumed = vec![false; blobs.len()];
    let blob_histograms: Vec<Histogram> = blobs
        .iter()
        .map(|b| frame.histogram(PixelRect::from_bbox(b.bbox)))
        .collect::<Result<_>>()?;

    // Gated association, ascending id.
    let mut resolved: BTreeSet<u32> = BTreeSet::new();
    for object in objects.iter_mut() {
        let was_occluded = object.status == TrackStatus::Occluded;
        if let Some(index) =
            try_associate_object(object, blobs, &mut consumed, &blob_histograms, config)?
        {
            if was_occluded {
                queue.remove(object.id);
            }
            outcome.associated.push((object.id, blobs[index].clone()));
            resolved.insert(object.id);
        }
    }

    // Likelihood resolution for everything still unresolved.
    for object in objects.iter_mut() {
        if resolved.contains(&object.id) {
            continue;
        }
        let pf = pf_outputs
            .get(&object.id)
            .expect("every active object completed pf_step this frame");
        let was_occluded = object.status == TrackStatus::Occluded;
        match resolve_unassociated(object, pf, queue, config, frame.width(), frame.height()) {
            TrackStatus::Tracked => outcome.pf_confirmed.push(object.id),
            TrackStatus::Occluded => {
                if !was_occluded {
                    outcome.newly_occluded.push(object.id);
                }
            }
        }
    }

    // Global recovery over the remaining blobs.
    outcome.recovered =
        try_recover(objects, queue, blobs, &mut consumed, &blob_histograms, config)?;

    // Stale dropping.
    let dropped = drop_stale(objects, queue, config.max_occluded_frames);
    outcome.dropped = dropped.iter().map(|o| o.id).collect();

    // Leftover blobs become new objects.
    for (i, blob) in blobs.iter().enumerate() {
        if consumed[i] {
            continue;
        }
        let object = init_object(blob, frame, config, *next_id)?;
        outcome.new_objects.push(object.id);
        objects.push(object);
        *next_id += 1;
        consumed[i] = true;
    }

    assert!(consumed.iter().all(|&c| c), "every input blob must be consumed exactly once");

    for object in objects.iter_mut() {
        if object.status == TrackStatus::Tracked {
            object.trajectory.push(TrajectoryRecord::new(
                object.id,
                frame_index,
                object.state.x,
                object.state.y,
            ));
        }
    }

    Ok((outcome, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{extract_blobs, BackgroundModel};
    use crate::scene_io::{Actor, Frame, SceneSpec};
    use crate::tracker::TrackerConfig;

    const BG: (u8, u8, u8) = (90, 90, 90);
    const RED: (u8, u8, u8) = (230, 30, 30);
    const BLUE: (u8, u8, u8) = (40, 40, 230);

    #[allow(clippy::type_complexity)]
    fn frame_with_squares(squares: &[((f64, f64), (u8, u8, u8))]) -> Frame {
        let spec = SceneSpec {
            width: 96,
            height: 96,
            background_color: BG,
            duration: 1,
            actors: squares
                .iter()
                .map(|&(center, color)| Actor {
                    color,
                    start: center,
                    velocity: (0.0, 0.0),
                    size: (10, 10),
                    enter_frame: 0,
                    exit_frame: 1,
                })
                .collect(),
            seed: 0,
        };
        spec.generate().unwrap().0.remove(0)
    }

    fn blobs_of(frame: &Frame, config: &TrackerConfig) -> Vec<Blob> {
        let mut model = BackgroundModel::new(frame.width(), frame.height(), config.alpha).unwrap();
        model.update(&Frame::filled(frame.width(), frame.height(), 0, BG).unwrap()).unwrap();
        let mask = model.subtract(frame, config.fg_threshold).unwrap();
        extract_blobs(&mask, config.min_area)
    }

    fn binned(frame: &Frame, config: &TrackerConfig) -> BinnedFrame {
        BinnedFrame::new(frame, &config.histogram_config()).unwrap()
    }

    fn object_on_square(center: (f64, f64), color: (u8, u8, u8), id: u32) -> TrackedObject {
        let config = TrackerConfig::default();
        let frame = frame_with_squares(&[(center, color)]);
        let blobs = blobs_of(&frame, &config);
        assert_eq!(blobs.len(), 1);
        init_object(&blobs[0], &binned(&frame, &config), &config, id).unwrap()
    }

    #[test]
    fn gate_test_edges_inclusive() {
        let object = object_on_square((50.0, 50.0), RED, 0);
        let config = TrackerConfig::default();
        let blob_at = |x: f64, y: f64| Blob { centroid: (x, y), bbox: (0, 0, 1, 1), area: 1 };

        assert!(is_within_range(&blob_at(object.state.x, object.state.y), &object, config.gate_factor));
        // Gate half-extent: 10 * 1.0 * 1.5 / 2 = 7.5, edge inclusive.
        assert!(is_within_range(&blob_at(object.state.x + 7.5, object.state.y), &object, config.gate_factor));
        assert!(!is_within_range(&blob_at(object.state.x + 7.51, object.state.y), &object, config.gate_factor));
        assert!(!is_within_range(&blob_at(object.state.x + 37.5, object.state.y), &object, config.gate_factor));
    }

    #[test]
    fn associates_own_colored_blob_in_gate() {
        let config = TrackerConfig::default();
        let mut object = object_on_square((50.0, 50.0), RED, 0);
        // Next frame: the square moved 3 px right.
        let frame = frame_with_squares(&[((53.0, 50.0), RED)]);
        let blobs = blobs_of(&frame, &config);
        let hists: Vec<Histogram> = blobs
            .iter()
            .map(|b| binned(&frame, &config).histogram(PixelRect::from_bbox(b.bbox)).unwrap())
            .collect();
        let mut consumed = vec![false; blobs.len()];
        let hit = try_associate_object(&mut object, &blobs, &mut consumed, &hists, &config).unwrap();
        assert_eq!(hit, Some(0));
        assert!(consumed[0]);
        assert!((object.state.x - blobs[0].centroid.0).abs() < 1e-9);
        assert_eq!(object.status, TrackStatus::Tracked);
        assert_eq!(object.occluded_frames, 0);
    }

    #[test]
    fn rejects_disjoint_colored_blob_in_gate() {
        let config = TrackerConfig::default();
        let mut object = object_on_square((50.0, 50.0), RED, 0);
        let frame = frame_with_squares(&[((53.0, 50.0), BLUE)]);
        let blobs = blobs_of(&frame, &config);
        let hists: Vec<Histogram> = blobs
            .iter()
            .map(|b| binned(&frame, &config).histogram(PixelRect::from_bbox(b.bbox)).unwrap())
            .collect();
        let mut consumed = vec![false; blobs.len()];
        let hit = try_associate_object(&mut object, &blobs, &mut consumed, &hists, &config).unwrap();
        assert_eq!(hit, None);
        assert!(!consumed[0]);
    }

    #[test]
    fn resolution_commits_confident_candidates() {
        let config = TrackerConfig::default();
        let mut object = object_on_square((50.0, 50.0), RED, 0);
        let mut queue = OcclusionQueue::new();
        let pf = PfOutput { state: ObjectState::new(52.0, 50.5, 1.0), likelihood: 0.8 };
        let status = resolve_unassociated(&mut object, &pf, &mut queue, &config, 96, 96);
        assert_eq!(status, TrackStatus::Tracked);
        assert_eq!(object.state.x, 52.0);
        assert!(queue.is_empty());

        // Boundary: L exactly at the threshold still tracks.
        let pf = PfOutput { state: ObjectState::new(53.0, 50.5, 1.0), likelihood: 0.6 };
        assert_eq!(
            resolve_unassociated(&mut object, &pf, &mut queue, &config, 96, 96),
            TrackStatus::Tracked
        );
    }

    #[test]
    fn resolution_queues_low_likelihood_objects() {
        let config = TrackerConfig::default();
        let mut object = object_on_square((50.0, 50.0), RED, 0);
        let before = object.state;
        let mut queue = OcclusionQueue::new();
        let pf = PfOutput { state: ObjectState::new(70.0, 70.0, 1.0), likelihood: 0.3 };
        let status = resolve_unassociated(&mut object, &pf, &mut queue, &config, 96, 96);
        assert_eq!(status, TrackStatus::Occluded);
        assert_eq!(object.state, before, "occluded state must not move");
        assert!(queue.contains(0));
        assert_eq!(object.occluded_frames, 1);
        assert_eq!(object.noise.sigma_x, 2.0);
        assert_eq!(object.noise.sigma_y, 1.5);
    }

    #[test]
    fn noise_inflates_per_occluded_frame_and_resets() {
        let config = TrackerConfig::default();
        let mut object = object_on_square((50.0, 50.0), RED, 0);
        object.status = TrackStatus::Occluded;
        inflate_noise(&mut object, config.noise_increment);
        assert_eq!((object.noise.sigma_x, object.noise.sigma_y), (2.0, 1.5));
        inflate_noise(&mut object, config.noise_increment);
        assert_eq!((object.noise.sigma_x, object.noise.sigma_y), (3.0, 2.5));
        object.reset_adaptive(&config);
        assert_eq!((object.noise.sigma_x, object.noise.sigma_y), (1.0, 0.5));
    }

    #[test]
    fn recovery_matches_reappearing_blob_anywhere() {
        let config = TrackerConfig::default();
        let mut objects = vec![object_on_square((20.0, 20.0), RED, 0)];
        let mut queue = OcclusionQueue::new();
        objects[0].status = TrackStatus::Occluded;
        objects[0].occluded_frames = 3;
        objects[0].noise.inflate(3.0);
        queue.push(0);

        // The red square reappears far from the object's frozen state.
        let frame = frame_with_squares(&[((80.0, 80.0), RED)]);
        let blobs = blobs_of(&frame, &config);
        let hists: Vec<Histogram> = blobs
            .iter()
            .map(|b| binned(&frame, &config).histogram(PixelRect::from_bbox(b.bbox)).unwrap())
            .collect();
        let mut consumed = vec![false; blobs.len()];
        let recovered =
            try_recover(&mut objects, &mut queue, &blobs, &mut consumed, &hists, &config).unwrap();
        assert_eq!(recovered, vec![0]);
        assert!(queue.is_empty());
        assert_eq!(objects[0].status, TrackStatus::Tracked);
        assert_eq!(objects[0].occluded_frames, 0);
        assert_eq!((objects[0].noise.sigma_x, objects[0].noise.sigma_y), (1.0, 0.5));
        assert!((objects[0].state.x - blobs[0].centroid.0).abs() < 1e-9);
    }

    #[test]
    fn recovery_ignores_disjoint_colors() {
        let config = TrackerConfig::default();
        let mut objects = vec![object_on_square((20.0, 20.0), RED, 0)];
        let mut queue = OcclusionQueue::new();
        objects[0].status = TrackStatus::Occluded;
        queue.push(0);

        let frame = frame_with_squares(&[((80.0, 80.0), BLUE)]);
        let blobs = blobs_of(&frame, &config);
        let hists: Vec<Histogram> = blobs
            .iter()
            .map(|b| binned(&frame, &config).histogram(PixelRect::from_bbox(b.bbox)).unwrap())
            .collect();
        let mut consumed = vec![false; blobs.len()];
        let recovered =
            try_recover(&mut objects, &mut queue, &blobs, &mut consumed, &hists, &config).unwrap();
        assert!(recovered.is_empty());
        assert!(queue.contains(0));
        assert!(!consumed[0]);
    }

    #[test]
    fn recovery_tie_goes_to_earlier_queued_object() {
        let config = TrackerConfig::default();
        // Two identical red objects; object 1 occluded first.
        let mut objects =
            vec![object_on_square((20.0, 20.0), RED, 0), object_on_square((20.0, 20.0), RED, 1)];
        for object in objects.iter_mut() {
            object.status = TrackStatus::Occluded;
        }
        let mut queue = OcclusionQueue::new();
        queue.push(1);
        queue.push(0);

        let frame = frame_with_squares(&[((60.0, 60.0), RED)]);
        let blobs = blobs_of(&frame, &config);
        let hists: Vec<Histogram> = blobs
            .iter()
            .map(|b| binned(&frame, &config).histogram(PixelRect::from_bbox(b.bbox)).unwrap())
            .collect();
        let mut consumed = vec![false; blobs.len()];
        let recovered =
            try_recover(&mut objects, &mut queue, &blobs, &mut consumed, &hists, &config).unwrap();
        assert_eq!(recovered, vec![1], "earlier-queued object wins the tie");
    }

    #[test]
    fn stale_objects_drop_on_strict_excess() {
        let config = TrackerConfig::default();
        let mut objects = vec![object_on_square((20.0, 20.0), RED, 0)];
        let mut queue = OcclusionQueue::new();
        objects[0].status = TrackStatus::Occluded;
        objects[0].occluded_frames = config.max_occluded_frames; // exactly at the limit
        queue.push(0);
        assert!(drop_stale(&mut objects, &mut queue, config.max_occluded_frames).is_empty());
        assert_eq!(objects.len(), 1);

        objects[0].occluded_frames = config.max_occluded_frames + 1;
        let dropped = drop_stale(&mut objects, &mut queue, config.max_occluded_frames);
        assert_eq!(dropped.len(), 1);
        assert!(objects.is_empty());
        assert!(queue.is_empty());

        assert!(drop_stale(&mut objects, &mut queue, config.max_occluded_frames).is_empty());
    }

    #[test]
    fn init_object_freezes_a_pure_reference() {
        let object = object_on_square((50.0, 50.0), RED, 3);
        assert_eq!(object.id, 3);
        assert_eq!(object.state.scale, 1.0);
        assert_eq!(object.base_size, (10.0, 10.0));
        assert_eq!(object.status, TrackStatus::Tracked);
        // Uniform saturated red: all mass in one joint bin.
        let nonzero: Vec<(usize, f64)> = object
            .reference
            .bins()
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, b)| b > 0.0)
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].1, 1.0);
    }

    #[test]
    fn associate_frame_initializes_each_separated_actor() {
        let config = TrackerConfig::default();
        let frame = frame_with_squares(&[((20.0, 20.0), RED), ((50.0, 50.0), BLUE), ((80.0, 20.0), (30, 200, 40))]);
        let blobs = blobs_of(&frame, &config);
        assert_eq!(blobs.len(), 3);
        let binned_frame = binned(&frame, &config);
        let mut objects = Vec::new();
        let mut queue = OcclusionQueue::new();
        let mut next_id = 0;
        let (outcome, dropped) = associate_frame(
            &mut objects,
            &mut queue,
            &blobs,
            &BTreeMap::new(),
            &binned_frame,
            0,
            &config,
            &mut next_id,
        )
        .unwrap();
        assert_eq!(outcome.new_objects, vec![0, 1, 2]);
        assert!(dropped.is_empty());
        assert_eq!(objects.len(), 3);
        assert_eq!(next_id, 3);
        // Every new object got its first trajectory record at this frame.
        for object in &objects {
            assert_eq!(object.trajectory.len(), 1);
            assert_eq!(object.trajectory[0].t, 0);
        }
    }

    #[test]
    fn associate_frame_keeps_tracking_separated_actors() {
        let config = TrackerConfig::default();
        let frame0 = frame_with_squares(&[((20.0, 20.0), RED), ((60.0, 60.0), BLUE)]);
        let blobs0 = blobs_of(&frame0, &config);
        let binned0 = binned(&frame0, &config);
        let mut objects = Vec::new();
        let mut queue = OcclusionQueue::new();
        let mut next_id = 0;
        associate_frame(
            &mut objects,
            &mut queue,
            &blobs0,
            &BTreeMap::new(),
            &binned0,
            0,
            &config,
            &mut next_id,
        )
        .unwrap();

        // Both actors move 2 px right; run pf then associate.
        let frame1 = frame_with_squares(&[((22.0, 20.0), RED), ((62.0, 60.0), BLUE)]);
        let blobs1 = blobs_of(&frame1, &config);
        let binned1 = binned(&frame1, &config);
        let mut pf_outputs = BTreeMap::new();
        for object in objects.iter_mut() {
            pf_outputs.insert(object.id, object.pf_step(&binned1, &config).unwrap());
        }
        let (outcome, _) = associate_frame(
            &mut objects,
            &mut queue,
            &blobs1,
            &pf_outputs,
            &binned1,
            1,
            &config,
            &mut next_id,
        )
        .unwrap();
        assert_eq!(outcome.associated.len(), 2);
        assert!(outcome.new_objects.is_empty());
        assert!(outcome.newly_occluded.is_empty());
        assert!(queue.is_empty());
        for object in &objects {
            assert_eq!(object.trajectory.len(), 2);
            assert_eq!(object.status, TrackStatus::Tracked);
        }
    }

    #[test]
    fn status_and_queue_stay_coherent_across_frames() {
        let config = TrackerConfig::default();
        // Object initialized on a red square that then disappears.
        let frame0 = frame_with_squares(&[((48.0, 48.0), RED)]);
        let blobs0 = blobs_of(&frame0, &config);
        let binned0 = binned(&frame0, &config);
        let mut objects = Vec::new();
        let mut queue = OcclusionQueue::new();
        let mut next_id = 0;
        associate_frame(
            &mut objects,
            &mut queue,
            &blobs0,
            &BTreeMap::new(),
            &binned0,
            0,
            &config,
            &mut next_id,
        )
        .unwrap();

        let empty = frame_with_squares(&[]);
        let binned_empty = binned(&empty, &config);
        for t in 1..4u32 {
            let mut pf_outputs = BTreeMap::new();
            for object in objects.iter_mut() {
                pf_outputs.insert(object.id, object.pf_step(&binned_empty, &config).unwrap());
            }
            let (outcome, _) = associate_frame(
                &mut objects,
                &mut queue,
                &[],
                &pf_outputs,
                &binned_empty,
                t,
                &config,
                &mut next_id,
            )
            .unwrap();
            if t == 1 {
                assert_eq!(outcome.newly_occluded, vec![0]);
            }
            for object in &objects {
                assert_eq!(object.status == TrackStatus::Occluded, queue.contains(object.id));
            }
        }
        assert_eq!(objects[0].occluded_frames, 3);
        assert_eq!(objects[0].noise.sigma_x, 4.0);
        // Trajectory stayed silent while occluded.
        assert_eq!(objects[0].trajectory.len(), 1);
    }
}
