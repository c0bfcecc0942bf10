//! One bootstrap (SIR) particle-filter iteration per tracked object per
//! frame: predict under the second-order ARMA transition, measure by
//! appearance similarity, select the best particle, resample.
//!
//! Particles are drawn from the predicted prior, so weights are proportional
//! to the appearance likelihood alone; no importance-ratio correction exists
//! anywhere in this module. The s-vectors of the transition derive from the
//! object's committed states (identical for all particles); per-particle
//! diversity comes only from the noise term.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::appearance::{similarity, BinnedFrame, Histogram, PixelRect};
use crate::error::{Error, Result};

/// Object configuration: image position plus a dimensionless scale
/// multiplier applied to the object's base size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectState {
    pub x: f64,
    pub y: f64,
    pub scale: f64,
}

impl ObjectState {
    pub fn new(x: f64, y: f64, scale: f64) -> Self {
        Self { x, y, scale }
    }

    fn offset_from(&self, origin: &ObjectState) -> (f64, f64, f64) {
        (self.x - origin.x, self.y - origin.y, self.scale - origin.scale)
    }
}

/// One hypothesis of the object state with its measured weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub state: ObjectState,
    /// Normalized weight after [`normalize_weights`].
    pub weight: f64,
    /// Raw appearance similarity from [`measure`]; survives normalization so
    /// the best raw score can serve as the likelihood L.
    pub raw_score: f64,
}

/// Committed object states anchoring the ARMA s-vectors: s_t = current -
/// origin, s_{t-1} = previous - origin, per component (x, y, scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub origin: ObjectState,
    pub current: ObjectState,
    pub previous: ObjectState,
}

impl Kinematics {
    /// All three anchors at the same state (a freshly initialized object).
    pub fn stationary(state: ObjectState) -> Self {
        Self { origin: state, current: state, previous: state }
    }

    /// Commits a new state: previous takes the old current.
    pub fn shift(&mut self, new_state: ObjectState) {
        self.previous = self.current;
        self.current = new_state;
    }

    /// Restarts at a state with zero velocity (previous = current = state);
    /// used after occlusion recovery where motion history is meaningless.
    pub fn restart(&mut self, state: ObjectState) {
        self.previous = state;
        self.current = state;
    }

    pub fn s_t(&self) -> (f64, f64, f64) {
        self.current.offset_from(&self.origin)
    }

    pub fn s_prev(&self) -> (f64, f64, f64) {
        self.previous.offset_from(&self.origin)
    }
}

/// Transition noise standard deviations; x and y inflate during occlusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_scale: f64,
}

impl NoiseParams {
    /// Widens the x/y search region by `increment` pixels of deviation.
    pub fn inflate(&mut self, increment: f64) {
        self.sigma_x += increment;
        self.sigma_y += increment;
    }
}

/// Second-order ARMA coefficients for the transition model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmaCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for ArmaCoeffs {
    fn default() -> Self {
        Self { a: 2.0, b: -1.0, c: 1.0 }
    }
}

/// Result of one filter iteration: the best particle's state and its raw
/// similarity L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfOutput {
    pub state: ObjectState,
    pub likelihood: f64,
}

/// M particles at the given state with uniform weight 1/M.
pub fn init_particles(state: ObjectState, m_count: usize) -> Result<Vec<Particle>> {
    if m_count == 0 {
        return Err(Error::EmptyParticleSet);
    }
    let weight = 1.0 / m_count as f64;
    Ok(vec![Particle { state, weight, raw_score: 0.0 }; m_count])
}

/// Samples one transitioned state: origin + A*s_t + B*s_{t-1} + C*w, with w
/// a per-axis Gaussian draw. Scale is clamped to >= 0.1.
pub fn transition(
    kin: &Kinematics,
    arma: &ArmaCoeffs,
    noise: &NoiseParams,
    rng: &mut impl Rng,
) -> ObjectState {
    let s_t = kin.s_t();
    let s_prev = kin.s_prev();
    // Always draw all three axes so RNG streams stay aligned regardless of C.
    let wx: f64 = rng.sample::<f64, _>(StandardNormal) * noise.sigma_x;
    let wy: f64 = rng.sample::<f64, _>(StandardNormal) * noise.sigma_y;
    let ws: f64 = rng.sample::<f64, _>(StandardNormal) * noise.sigma_scale;
    let offset = (
        arma.a * s_t.0 + arma.b * s_prev.0 + arma.c * wx,
        arma.a * s_t.1 + arma.b * s_prev.1 + arma.c * wy,
        arma.a * s_t.2 + arma.b * s_prev.2 + arma.c * ws,
    );
    ObjectState {
        x: kin.origin.x + offset.0,
        y: kin.origin.y + offset.1,
        scale: (kin.origin.scale + offset.2).max(0.1),
    }
}

/// Appearance region for a state: base size scaled by the state's scale,
/// centered at its position.
pub fn object_region(state: &ObjectState, base_size: (f64, f64)) -> PixelRect {
    PixelRect::centered(state.x, state.y, base_size.0 * state.scale, base_size.1 * state.scale)
}

/// Moves every particle through the transition and computes its candidate
/// histogram over the frame. Particles whose region falls fully off-frame
/// get `None` (their weight is forced to 0 at measurement).
pub fn predict(
    particles: &mut [Particle],
    kin: &Kinematics,
    arma: &ArmaCoeffs,
    noise: &NoiseParams,
    base_size: (f64, f64),
    frame: &BinnedFrame,
    rng: &mut impl Rng,
) -> Vec<Option<Histogram>> {
    let mut histograms = Vec::with_capacity(particles.len());
    for particle in particles.iter_mut() {
        particle.state = transition(kin, arma, noise, rng);
        histograms.push(frame.histogram(object_region(&particle.state, base_size)).ok());
    }
    histograms
}

/// Weights each particle by the raw similarity of its candidate histogram to
/// the reference; stored un-normalized so the best raw score survives as L.
pub fn measure(
    particles: &mut [Particle],
    histograms: &[Option<Histogram>],
    reference: &Histogram,
) -> Result<()> {
    debug_assert_eq!(particles.len(), histograms.len());
    for (particle, hist) in particles.iter_mut().zip(histograms) {
        let score = match hist {
            Some(h) => similarity(reference, h)?,
            None => 0.0,
        };
        particle.weight = score;
        particle.raw_score = score;
    }
    Ok(())
}

/// Divides weights by their sum; an all-zero set becomes uniform 1/M (the
/// object will then be flagged occluded downstream).
pub fn normalize_weights(particles: &mut [Particle]) {
    let total: f64 = particles.iter().map(|p| p.weight).sum();
    if total > 0.0 {
        for p in particles.iter_mut() {
            p.weight /= total;
        }
    } else if !particles.is_empty() {
        let uniform = 1.0 / particles.len() as f64;
        for p in particles.iter_mut() {
            p.weight = uniform;
        }
    }
}

/// The particle with maximal raw similarity; ties break to the lowest index.
pub fn select_best(particles: &[Particle]) -> Result<(ObjectState, f64)> {
    let mut best: Option<&Particle> = None;
    for p in particles {
        if best.is_none_or(|b| p.raw_score > b.raw_score) {
            best = Some(p);
        }
    }
    best.map(|p| (p.state, p.raw_score)).ok_or(Error::EmptyParticleSet)
}

/// Systematic resampling proportional to normalized weights; output weights
/// reset to 1/M.
pub fn resample(particles: &mut Vec<Particle>, rng: &mut impl Rng) {
    let m = particles.len();
    if m == 0 {
        return;
    }
    let step = 1.0 / m as f64;
    let start: f64 = rng.random::<f64>() * step;
    let mut resampled = Vec::with_capacity(m);
    let mut cumulative = particles[0].weight;
    let mut idx = 0usize;
    for i in 0..m {
        let position = start + i as f64 * step;
        while cumulative < position && idx + 1 < m {
            idx += 1;
            cumulative += particles[idx].weight;
        }
        let mut p = particles[idx];
        p.weight = step;
        resampled.push(p);
    }
    *particles = resampled;
}

/// One full iteration: predict, measure, normalize, select, resample.
///
/// Returns the candidate state and its raw similarity L without committing
/// anything; data association decides whether the candidate becomes the
/// object's next state.
#[allow(clippy::too_many_arguments)]
pub fn pf_step(
    particles: &mut Vec<Particle>,
    kin: &Kinematics,
    arma: &ArmaCoeffs,
    noise: &NoiseParams,
    base_size: (f64, f64),
    reference: &Histogram,
    frame: &BinnedFrame,
    rng: &mut impl Rng,
) -> Result<PfOutput> {
    let histograms = predict(particles, kin, arma, noise, base_size, frame, rng);
    measure(particles, &histograms, reference)?;
    normalize_weights(particles);
    let (state, likelihood) = select_best(particles)?;
    resample(particles, rng);
    Ok(PfOutput { state, likelihood })
}
