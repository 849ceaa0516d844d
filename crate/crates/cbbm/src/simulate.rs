//! Event-driven exact simulation of the catalytic branching system.
//!
//! Particles diffuse as Brownian motions and branch into two at the origin
//! when the local time there crosses an Exp(β) threshold. Between checkpoints
//! each particle is advanced in one shot by the exact samplers; there is no
//! time grid anywhere. At every checkpoint each survivor's residual
//! threshold is resampled Exp(β), which is exact because the exponential
//! clock is memoryless in local time: conditional on survival, the residual
//! level is again Exp(β) independent of the path.

use rand::RngExt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::IntervalSet;
use crate::rng::{mix64, StreamKey, StreamRng};
use crate::sampling::{
    sample_first_passage, sample_no_hit_position, sample_threshold, sample_window_from_origin,
    FirstPassage, SampleError, WindowOutcome,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("branching intensity beta must be positive and finite, got {0}")]
    BadBeta(f64),
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("checkpoints must be strictly increasing, inside (0, horizon], ending at the horizon")]
    BadCheckpoints,
    #[error("max_particles must be at least 1")]
    BadParticleCap,
    #[error("replicate_count must be at least 1")]
    BadReplicateCount,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("replicate {replicate}: {source}")]
    Sampler { replicate: u64, source: SampleError },
    #[error("lineage depth exceeded 127 generations")]
    LineageOverflow,
}

/// Model parameters: branching intensity β and the initial position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub x0: f64,
}

impl ModelParams {
    pub fn new(beta: f64, x0: f64) -> Result<Self, ConfigError> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(ConfigError::BadBeta(beta));
        }
        Ok(Self { beta, x0 })
    }
}

/// Which side of the origin a counting window tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowSide {
    /// `base + drift·t`
    Plus,
    /// `-base - drift·t`
    Minus,
}

/// A moving counting window: the base set shifted by `drift·t` at
/// observation time `t`, optionally reflected through the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingWindow {
    pub base: IntervalSet,
    pub drift: f64,
    pub side: WindowSide,
}

impl CountingWindow {
    pub fn new(base: IntervalSet, drift: f64, side: WindowSide) -> Self {
        Self { base, drift, side }
    }

    /// Membership of a position at observation time `time`.
    #[inline]
    pub fn contains(&self, x: f64, time: f64) -> bool {
        match self.side {
            WindowSide::Plus => self.base.contains(x - self.drift * time),
            WindowSide::Minus => self.base.contains(-x - self.drift * time),
        }
    }
}

/// Full simulation configuration; the unit of reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Final observation time; always the last checkpoint.
    pub horizon: f64,
    /// Strictly increasing observation times in (0, horizon].
    pub checkpoints: Vec<f64>,
    pub windows: Vec<CountingWindow>,
    pub max_particles: usize,
    pub replicate_count: usize,
    pub base_seed: u64,
    /// Keep the raw position vector of the horizon snapshot in each record.
    pub record_horizon_positions: bool,
    /// Keep a per-replicate birth/branch event log (debug scale only).
    pub log_events: bool,
}

impl SimConfig {
    /// Configuration with a single checkpoint at the horizon and the
    /// documented defaults for everything else.
    pub fn new(params: ModelParams, horizon: f64) -> Self {
        Self {
            params,
            horizon,
            checkpoints: vec![horizon],
            windows: Vec::new(),
            max_particles: 1_000_000,
            replicate_count: 10_000,
            base_seed: 42,
            record_horizon_positions: false,
            log_events: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        ModelParams::new(self.params.beta, self.params.x0)?;
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(ConfigError::BadHorizon(self.horizon));
        }
        let cps = &self.checkpoints;
        let sorted = cps.windows(2).all(|w| w[0] < w[1]);
        if cps.is_empty()
            || !sorted
            || cps[0] <= 0.0
            || *cps.last().unwrap() != self.horizon
        {
            return Err(ConfigError::BadCheckpoints);
        }
        if self.max_particles < 1 {
            return Err(ConfigError::BadParticleCap);
        }
        if self.replicate_count < 1 {
            return Err(ConfigError::BadReplicateCount);
        }
        Ok(())
    }
}

/// Ulam–Harris lineage label: the sequence of child indices (1 or 2) leading
/// from the initial particle. Stored as a bit path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UlamHarris {
    path: u128,
    depth: u8,
}

impl UlamHarris {
    pub fn root() -> Self {
        Self { path: 0, depth: 0 }
    }

    /// Extends the label by one child index in {1, 2}.
    pub fn child(&self, index: u8) -> Result<Self, SimError> {
        debug_assert!(index == 1 || index == 2);
        if self.depth >= 127 {
            return Err(SimError::LineageOverflow);
        }
        Ok(Self {
            path: self.path | (u128::from(index - 1) << self.depth),
            depth: self.depth + 1,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    /// Child indices from the root down.
    pub fn indices(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.depth).map(move |d| ((self.path >> d) & 1) as u8 + 1)
    }
}

impl std::fmt::Display for UlamHarris {
    /// Root prints as "0"; descendants append dotted child indices.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "0")?;
        for i in self.indices() {
            write!(f, ".{i}")?;
        }
        Ok(())
    }
}

/// A live particle as seen from outside the engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    pub id: UlamHarris,
    pub position: f64,
    pub birth_time: f64,
}

/// Outcome of advancing one particle across a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdvanceOutcome {
    /// No branch: the exact position at the window end.
    AtTime { position: f64 },
    /// The particle's local time crossed its threshold at `time` (absolute);
    /// it is replaced there by two children at the origin.
    Branch { time: f64 },
}

/// Advances a particle from `(from, position)` to time `to` against a fresh
/// local-time threshold. Off the origin this is first-passage → either a
/// zero-avoiding endpoint or an origin window over the remainder; at the
/// origin the window sampler applies directly. A surviving origin outcome
/// gets a uniform random sign (the conditional law is symmetric).
pub fn advance_particle(
    position: f64,
    from: f64,
    to: f64,
    threshold: f64,
    rng: &mut StreamRng,
) -> Result<AdvanceOutcome, SampleError> {
    debug_assert!(threshold > 0.0);
    let window = to - from;
    if window <= 0.0 {
        return Ok(AdvanceOutcome::AtTime { position });
    }
    if position != 0.0 {
        match sample_first_passage(position, window, rng) {
            FirstPassage::NoHit => {
                let endpoint = sample_no_hit_position(position, window, rng)?;
                Ok(AdvanceOutcome::AtTime { position: endpoint })
            }
            FirstPassage::Hit { elapsed } => {
                let remaining = window - elapsed;
                if remaining <= 0.0 {
                    return Ok(AdvanceOutcome::AtTime { position: 0.0 });
                }
                origin_phase(from + elapsed, remaining, threshold, rng)
            }
        }
    } else {
        origin_phase(from, window, threshold, rng)
    }
}

fn origin_phase(
    start: f64,
    window: f64,
    threshold: f64,
    rng: &mut StreamRng,
) -> Result<AdvanceOutcome, SampleError> {
    match sample_window_from_origin(window, threshold, rng)? {
        WindowOutcome::Survived { abs_position } => {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Ok(AdvanceOutcome::AtTime { position: sign * abs_position })
        }
        WindowOutcome::Branched { elapsed } => Ok(AdvanceOutcome::Branch { time: start + elapsed }),
    }
}

/// All particle positions at one observation time plus derived observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub positions: Vec<f64>,
    pub count_total: u64,
    /// M_t = e^{-β²t/2} Σ_u e^{-β|X_u|}.
    pub martingale: f64,
    pub rightmost: Option<f64>,
    pub leftmost: Option<f64>,
}

impl Snapshot {
    pub fn from_positions(time: f64, positions: Vec<f64>, beta: f64) -> Self {
        let weight = (-0.5 * beta * beta * time).exp();
        let sum: f64 = positions.iter().map(|&x| (-beta * x.abs()).exp()).sum();
        let rightmost = positions.iter().copied().fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |m| m.max(x)))
        });
        let leftmost = positions.iter().copied().fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |m| m.min(x)))
        });
        Snapshot {
            time,
            count_total: positions.len() as u64,
            martingale: weight * sum,
            rightmost,
            leftmost,
            positions,
        }
    }
}

/// Number of snapshot positions inside the window realised at `time`.
pub fn observe_counts(snapshot: &Snapshot, window: &CountingWindow, time: f64) -> u64 {
    debug_assert_eq!(snapshot.time, time);
    snapshot.positions.iter().filter(|&&x| window.contains(x, time)).count() as u64
}

/// Per-checkpoint digest of a snapshot kept in replicate records. The raw
/// position vector is retained only at the horizon and only on request; the
/// three largest positions are always kept for order-statistics checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub time: f64,
    pub count_total: u64,
    pub martingale: f64,
    pub rightmost: f64,
    pub leftmost: f64,
    /// Up to three largest positions, descending.
    pub top_positions: Vec<f64>,
    /// One count per configured window, in declaration order.
    pub window_counts: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
}

/// Birth/branch events for debugging; only recorded when
/// `SimConfig::log_events` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Birth { time: f64, label: String, position: f64 },
    Branch { time: f64, parent: String, position: f64 },
}

/// Everything recorded about one replicate: the unit of statistical
/// aggregation, keyed by its derived seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub seed: u64,
    pub checkpoints: Vec<CheckpointSummary>,
    /// Set when the particle cap was hit; data for completed checkpoints is
    /// retained but the replicate is excluded from statistics by default.
    pub aborted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<Event>>,
}

impl ReplicateRecord {
    pub fn at_time(&self, time: f64) -> Option<&CheckpointSummary> {
        self.checkpoints.iter().find(|c| c.time == time)
    }

    pub fn horizon(&self) -> Option<&CheckpointSummary> {
        self.checkpoints.last()
    }
}

struct Particle {
    state: ParticleState,
    key: StreamKey,
    rng: StreamRng,
}

/// Runs one replicate to the horizon. Deterministic given `(config, seed)`;
/// every particle draws from the stream derived from its lineage.
pub fn run_replicate(config: &SimConfig, seed: u64) -> Result<ReplicateRecord, SimError> {
    let beta = config.params.beta;
    let root_key = StreamKey::root(seed).child(0);
    let mut events = config.log_events.then(Vec::new);
    if let Some(ev) = events.as_mut() {
        ev.push(Event::Birth {
            time: 0.0,
            label: UlamHarris::root().to_string(),
            position: config.params.x0,
        });
    }

    let mut live = vec![Particle {
        state: ParticleState {
            id: UlamHarris::root(),
            position: config.params.x0,
            birth_time: 0.0,
        },
        key: root_key,
        rng: root_key.rng(),
    }];
    let mut summaries = Vec::with_capacity(config.checkpoints.len());
    let mut aborted = false;
    let mut window_start = 0.0;

    'checkpoints: for &cp in &config.checkpoints {
        // Work stack of (particle, resume time). Survivors resume from the
        // window start, children from their branch time.
        let mut stack: Vec<(Particle, f64)> =
            std::mem::take(&mut live).into_iter().map(|p| (p, window_start)).collect();

        while let Some((mut particle, from)) = stack.pop() {
            let threshold = sample_threshold(beta, &mut particle.rng);
            let advanced =
                advance_particle(particle.state.position, from, cp, threshold, &mut particle.rng)
                    .map_err(|source| SimError::Sampler { replicate: seed, source })?;
            match advanced {
                AdvanceOutcome::AtTime { position } => {
                    particle.state.position = position;
                    live.push(particle);
                }
                AdvanceOutcome::Branch { time } => {
                    if live.len() + stack.len() + 2 > config.max_particles {
                        aborted = true;
                        break 'checkpoints;
                    }
                    if let Some(ev) = events.as_mut() {
                        ev.push(Event::Branch {
                            time,
                            parent: particle.state.id.to_string(),
                            position: 0.0,
                        });
                    }
                    for index in [1u8, 2u8] {
                        let id = particle.state.id.child(index)?;
                        let key = particle.key.child(u64::from(index));
                        if let Some(ev) = events.as_mut() {
                            ev.push(Event::Birth { time, label: id.to_string(), position: 0.0 });
                        }
                        stack.push((
                            Particle {
                                state: ParticleState { id, position: 0.0, birth_time: time },
                                key,
                                rng: key.rng(),
                            },
                            time,
                        ));
                    }
                }
            }
        }

        let positions: Vec<f64> = live.iter().map(|p| p.state.position).collect();
        let snapshot = Snapshot::from_positions(cp, positions, beta);
        let window_counts =
            config.windows.iter().map(|w| observe_counts(&snapshot, w, cp)).collect();
        let mut top = snapshot.positions.clone();
        top.sort_by(|a, b| b.partial_cmp(a).unwrap());
        top.truncate(3);
        let keep_positions = config.record_horizon_positions && cp == config.horizon;
        summaries.push(CheckpointSummary {
            time: cp,
            count_total: snapshot.count_total,
            martingale: snapshot.martingale,
            rightmost: snapshot.rightmost.expect("population never dies out"),
            leftmost: snapshot.leftmost.expect("population never dies out"),
            top_positions: top,
            window_counts,
            positions: keep_positions.then_some(snapshot.positions),
        });
        window_start = cp;
    }

    Ok(ReplicateRecord { seed, checkpoints: summaries, aborted, events })
}

/// Derived per-replicate seed; pure in `(base_seed, index)`.
pub fn replicate_seed(base_seed: u64, index: u64) -> u64 {
    mix64(mix64(base_seed) ^ mix64(index.wrapping_add(0x51ED2701)))
}

/// Runs all replicates of the configuration in parallel. Results are
/// collected in replicate order, so output is independent of the execution
/// schedule and of the degree of parallelism.
pub fn run_ensemble(config: &SimConfig) -> Result<Vec<ReplicateRecord>, SimError> {
    config.validate()?;
    use rayon::prelude::*;
    (0..config.replicate_count as u64)
        .into_par_iter()
        .map(|i| run_replicate(config, replicate_seed(config.base_seed, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SimConfig {
        let params = ModelParams::new(1.0, 0.0).unwrap();
        let mut config = SimConfig::new(params, 1.0);
        config.checkpoints = vec![0.5, 1.0];
        config.replicate_count = 4;
        config
    }

    #[test]
    fn config_validation() {
        let params = ModelParams::new(1.0, 0.0).unwrap();
        let mut c = SimConfig::new(params, 2.0);
        assert!(c.validate().is_ok());
        c.checkpoints = vec![1.0, 1.0, 2.0];
        assert!(matches!(c.validate(), Err(ConfigError::BadCheckpoints)));
        c.checkpoints = vec![1.0];
        assert!(matches!(c.validate(), Err(ConfigError::BadCheckpoints)));
        c.checkpoints = vec![-1.0, 2.0];
        assert!(matches!(c.validate(), Err(ConfigError::BadCheckpoints)));
        c.checkpoints = vec![2.0];
        c.max_particles = 0;
        assert!(matches!(c.validate(), Err(ConfigError::BadParticleCap)));
        assert!(ModelParams::new(0.0, 1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn ulam_harris_labels() {
        let root = UlamHarris::root();
        assert_eq!(root.to_string(), "0");
        let c = root.child(1).unwrap().child(2).unwrap().child(1).unwrap();
        assert_eq!(c.to_string(), "0.1.2.1");
        assert_eq!(c.depth(), 3);
        let siblings = (root.child(1).unwrap(), root.child(2).unwrap());
        assert_ne!(siblings.0, siblings.1);
    }

    #[test]
    fn replicate_is_deterministic() {
        let config = small_config();
        let a = run_replicate(&config, 9).unwrap();
        let b = run_replicate(&config, 9).unwrap();
        assert_eq!(a, b);
        let c = run_replicate(&config, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ensemble_matches_sequential_runs() {
        let config = small_config();
        let ensemble = run_ensemble(&config).unwrap();
        assert_eq!(ensemble.len(), 4);
        for (i, record) in ensemble.iter().enumerate() {
            let seed = replicate_seed(config.base_seed, i as u64);
            assert_eq!(record.seed, seed);
            assert_eq!(*record, run_replicate(&config, seed).unwrap());
        }
    }

    #[test]
    fn population_never_shrinks_and_snapshot_is_consistent() {
        let mut config = small_config();
        config.checkpoints = vec![0.25, 0.5, 1.0, 2.0];
        config.horizon = 2.0;
        for i in 0..40 {
            let record = run_replicate(&config, 1000 + i).unwrap();
            assert!(!record.aborted);
            let counts: Vec<u64> = record.checkpoints.iter().map(|c| c.count_total).collect();
            assert!(counts.windows(2).all(|w| w[0] <= w[1]), "counts {counts:?}");
            for cp in &record.checkpoints {
                assert!(cp.rightmost >= cp.leftmost);
                assert!(cp.martingale > 0.0);
                assert!(!cp.top_positions.is_empty());
                assert!((cp.top_positions[0] - cp.rightmost).abs() == 0.0);
            }
        }
    }

    #[test]
    fn branch_events_happen_at_origin_with_two_children() {
        let mut config = small_config();
        config.horizon = 3.0;
        config.checkpoints = vec![3.0];
        config.log_events = true;
        let mut seen_branch = false;
        for i in 0..20 {
            let record = run_replicate(&config, 77 + i).unwrap();
            let events = record.events.as_ref().unwrap();
            for e in events {
                match e {
                    Event::Birth { label, position, .. } => {
                        if label != "0" {
                            assert_eq!(*position, 0.0, "child {label} born off-origin");
                        }
                    }
                    Event::Branch { position, .. } => {
                        seen_branch = true;
                        assert_eq!(*position, 0.0, "branch away from the catalyst");
                    }
                }
            }
            // Every branch is followed by exactly two births of its children
            // at the branch time.
            let mut idx = 0;
            while idx < events.len() {
                if let Event::Branch { parent, time, .. } = &events[idx] {
                    for k in 1..=2 {
                        match &events[idx + k] {
                            Event::Birth { label, time: bt, .. } => {
                                assert!(label.starts_with(parent.as_str()));
                                assert_eq!(bt, time);
                            }
                            other => panic!("expected birth after branch, got {other:?}"),
                        }
                    }
                    idx += 3;
                } else {
                    idx += 1;
                }
            }
        }
        assert!(seen_branch, "no branch occurred across 20 replicates at t=3");
    }

    #[test]
    fn particle_cap_aborts_and_keeps_partial_data() {
        let mut config = small_config();
        config.horizon = 6.0;
        config.checkpoints = vec![1.0, 6.0];
        config.max_particles = 4;
        let mut hit = 0;
        for i in 0..10 {
            let r = run_replicate(&config, 555 + i).unwrap();
            if r.aborted {
                hit += 1;
                assert!(r.checkpoints.len() < 2);
            }
        }
        assert!(hit > 0, "cap of 4 never reached at t=6");
    }

    #[test]
    fn window_membership() {
        let plus = CountingWindow::new(IntervalSet::half_line(0.0), 0.5, WindowSide::Plus);
        assert!(plus.contains(2.0, 4.0));
        assert!(!plus.contains(1.9, 4.0));
        let minus = CountingWindow::new(IntervalSet::half_line(0.0), 0.5, WindowSide::Minus);
        assert!(minus.contains(-2.0, 4.0));
        assert!(!minus.contains(-1.9, 4.0));
        assert!(!minus.contains(2.5, 4.0));
        // Full-line window with zero drift counts everything.
        let all = CountingWindow::new(IntervalSet::half_line(-1e12), 0.0, WindowSide::Plus);
        let snap = Snapshot::from_positions(1.0, vec![-3.0, 0.0, 2.0], 1.0);
        assert_eq!(observe_counts(&snap, &all, 1.0), 3);
        // Empty base counts nothing.
        let none = CountingWindow::new(IntervalSet::empty(), 0.5, WindowSide::Plus);
        assert_eq!(observe_counts(&snap, &none, 1.0), 0);
        // Hand-checkable shifted window.
        let crit = CountingWindow::new(IntervalSet::half_line(0.0), 0.5, WindowSide::Plus);
        let snap = Snapshot::from_positions(2.0, vec![0.9, 1.0, 3.0], 1.0);
        assert_eq!(observe_counts(&snap, &crit, 2.0), 2);
    }

    #[test]
    fn martingale_value_is_the_weighted_sum() {
        let snap = Snapshot::from_positions(2.0, vec![0.0, -1.0, 2.0], 1.0);
        let want = (-1.0f64).exp() * (1.0 + (-1.0f64).exp() + (-2.0f64).exp());
        assert!((snap.martingale - want).abs() < 1e-15);
    }
}
