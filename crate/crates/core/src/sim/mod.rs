//! Seeded Monte Carlo estimation of coverage probability under
//! threshold-based and random on/off control.
//!
//! One trial draws Poisson numbers of BSs (per tier) and users on a
//! rectangular region, associates every user to its weighted-nearest BS,
//! turns off BSs at or below their tier's user-count threshold (counts
//! come from the original association only; reassociated users never
//! retrigger evaluation), reassociates orphaned users to the nearest
//! active BS, and tests each user's SINR against the target.
//!
//! Every random quantity is a counter-based function of
//! (master seed, trial, purpose, indices) — see [`rng`] — so estimates are
//! bit-identical across runs and worker counts. Trials aggregate by
//! integer sums, which makes the reduction order-insensitive.

pub mod rng;
pub mod stats;

mod engine;

pub use engine::{estimate, estimate_sweep, EstimateMode};

use std::fmt;

use crate::model::{NetworkSpec, SpecError};
use rng::{link_fading, Stream, StreamKind};

// ---------------------------------------------------------------------------
// Region
// ---------------------------------------------------------------------------

/// Edge treatment of the finite simulation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Wrap-around distances; every point is measured. The cleanest finite
    /// proxy for the infinite-plane model.
    Torus,
    /// Plain distances; only users at least `margin` from every edge are
    /// measured, replicating a plain-grid setup literally.
    InnerWindow { margin: f64 },
}

/// Rectangular simulation region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub width: f64,
    pub height: f64,
    pub boundary: Boundary,
}

impl Region {
    pub fn torus(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            boundary: Boundary::Torus,
        }
    }

    pub fn inner_window(width: f64, height: f64, margin: f64) -> Self {
        Self {
            width,
            height,
            boundary: Boundary::InnerWindow { margin },
        }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(SimError::InvalidRegion("region sides must be > 0"));
        }
        if let Boundary::InnerWindow { margin } = self.boundary {
            if !(margin >= 0.0) || margin >= 0.5 * self.width.min(self.height) {
                return Err(SimError::InvalidRegion(
                    "margin must be in [0, min(width, height)/2)",
                ));
            }
        }
        Ok(())
    }

    /// Squared distance honoring the boundary mode.
    #[inline]
    pub fn dist_sq(&self, ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
        let mut dx = (ax - bx).abs();
        let mut dy = (ay - by).abs();
        if matches!(self.boundary, Boundary::Torus) {
            if dx > 0.5 * self.width {
                dx = self.width - dx;
            }
            if dy > 0.5 * self.height {
                dy = self.height - dy;
            }
        }
        dx * dx + dy * dy
    }

    /// Whether a point's coverage indicator counts toward the estimate.
    #[inline]
    pub fn is_measured(&self, x: f64, y: f64) -> bool {
        match self.boundary {
            Boundary::Torus => true,
            Boundary::InnerWindow { margin } => {
                x >= margin && x <= self.width - margin && y >= margin && y <= self.height - margin
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Policies and modes
// ---------------------------------------------------------------------------

/// On/off control applied to one realization.
#[derive(Debug, Clone, PartialEq)]
pub enum OnOffPolicy {
    /// Per-tier user-count thresholds: a BS sleeps when its original
    /// association count is at or below its tier's threshold.
    Threshold(Vec<u32>),
    /// Independent Bernoulli operation with probability `q`; BSs that end
    /// up with no users sleep as well.
    Random { q: f64 },
}

impl OnOffPolicy {
    fn check(&self, tiers: usize) -> Result<(), SimError> {
        match self {
            OnOffPolicy::Threshold(t) if t.len() != tiers => Err(SimError::PolicyMismatch {
                policy_tiers: t.len(),
                spec_tiers: tiers,
            }),
            OnOffPolicy::Random { q } if !(*q > 0.0 && *q <= 1.0) => {
                Err(SimError::InvalidRegion("random policy requires 0 < q <= 1"))
            }
            _ => Ok(()),
        }
    }
}

/// Noise regime for indicator evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum SinrMode {
    /// σ² = 0; transmit powers cancel out of every indicator.
    Sir,
    /// Finite noise with cell-edge power control: tier i transmits
    /// `beta * base_powers[i]`, and σ² comes from the scenario.
    Sinr { base_powers: Vec<f64>, beta: f64 },
}

// ---------------------------------------------------------------------------
// Realization types
// ---------------------------------------------------------------------------

/// One sampled realization of the point processes.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub bs_x: Vec<f64>,
    pub bs_y: Vec<f64>,
    /// Tier index of each BS, aligned with `bs_x`/`bs_y`.
    pub bs_tier: Vec<u32>,
    pub user_x: Vec<f64>,
    pub user_y: Vec<f64>,
    pub master_seed: u64,
    pub trial: u64,
}

impl Snapshot {
    pub fn bs_count(&self) -> usize {
        self.bs_x.len()
    }

    pub fn user_count(&self) -> usize {
        self.user_x.len()
    }
}

/// Serving assignments and on/off state for one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    /// Per-user serving BS index; always an active BS after on/off.
    pub serving: Vec<u32>,
    /// Per-user association order: 1 + the number of BSs strictly
    /// weighted-closer than the serving one.
    pub order: Vec<u32>,
    /// Per-BS user count from the original (pre-on/off) association.
    /// On/off never re-evaluates these.
    pub user_count: Vec<u32>,
    /// Per-BS on/off state.
    pub active: Vec<bool>,
}

/// Monte Carlo coverage estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageEstimate {
    /// Mean of per-trial covered fractions.
    pub mean: f64,
    /// Sample standard deviation of per-trial fractions over √(used trials).
    pub std_error: f64,
    /// Trials requested.
    pub trials: u32,
    /// Trials that produced a measurement.
    pub used_trials: u32,
    /// Total measured user indicators across used trials.
    pub per_user_samples: u64,
    /// Trials discarded (empty tier, no active BS, or no measured user).
    pub discarded: u32,
}

/// Why a trial was discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscardReason {
    EmptyTier(u32),
    NoActiveBs,
    NoMeasuredUsers,
}

/// Simulation-level failure.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    InvalidSpec(SpecError),
    InvalidRegion(&'static str),
    PolicyMismatch {
        policy_tiers: usize,
        spec_tiers: usize,
    },
    /// More than 10% of trials were discarded for some policy.
    ExcessiveDiscards {
        discarded: u32,
        trials: u32,
    },
    Analytic(crate::analytic::AnalyticError),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidSpec(e) => write!(f, "{e}"),
            Self::InvalidRegion(msg) => write!(f, "invalid region/policy: {msg}"),
            Self::PolicyMismatch {
                policy_tiers,
                spec_tiers,
            } => write!(
                f,
                "policy has {policy_tiers} tier thresholds but the scenario has {spec_tiers} tiers"
            ),
            Self::ExcessiveDiscards { discarded, trials } => write!(
                f,
                "{discarded} of {trials} trials discarded (> 10%); results would be biased"
            ),
            Self::Analytic(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SimError {}

impl From<SpecError> for SimError {
    fn from(e: SpecError) -> Self {
        Self::InvalidSpec(e)
    }
}

impl From<crate::analytic::AnalyticError> for SimError {
    fn from(e: crate::analytic::AnalyticError) -> Self {
        Self::Analytic(e)
    }
}

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

/// Draw one realization: per tier, a Poisson(λᵢ·area) number of BSs placed
/// uniformly, then Poisson(λᵤ·area) users. A tier drawing zero BSs
/// discards the trial.
pub fn sample_snapshot(
    spec: &NetworkSpec,
    region: &Region,
    master_seed: u64,
    trial: u64,
) -> Result<Snapshot, DiscardReason> {
    let area = region.area();
    let mut bs_x = Vec::new();
    let mut bs_y = Vec::new();
    let mut bs_tier = Vec::new();
    for (t, tier) in spec.tiers.iter().enumerate() {
        let mut s = Stream::new(master_seed, trial, StreamKind::BsLayout(t as u32));
        let count = s.next_poisson(tier.bs_density * area);
        if count == 0 {
            return Err(DiscardReason::EmptyTier(t as u32));
        }
        for _ in 0..count {
            bs_x.push(s.next_f64() * region.width);
            bs_y.push(s.next_f64() * region.height);
            bs_tier.push(t as u32);
        }
    }
    let mut s = Stream::new(master_seed, trial, StreamKind::UserLayout);
    let users = s.next_poisson(spec.user_density * area);
    let mut user_x = Vec::with_capacity(users as usize);
    let mut user_y = Vec::with_capacity(users as usize);
    for _ in 0..users {
        user_x.push(s.next_f64() * region.width);
        user_y.push(s.next_f64() * region.height);
    }
    Ok(Snapshot {
        bs_x,
        bs_y,
        bs_tier,
        user_x,
        user_y,
        master_seed,
        trial,
    })
}

/// Inverse squared association weights 1/wᵢ² = P_{t,i}^{−2/α} per tier.
pub(crate) fn inv_weight_sq(spec: &NetworkSpec) -> Vec<f64> {
    spec.tiers
        .iter()
        .map(|t| t.tx_power.powf(-2.0 / spec.pathloss_exponent))
        .collect()
}

/// Associate every user with its weighted-nearest BS (all BSs on) and
/// tally per-BS user counts. Weighted distance compares d/wᵢ with
/// wᵢ = P_{t,i}^{1/α}; for a single tier this is plain nearest-BS
/// association.
pub fn associate(snapshot: &Snapshot, spec: &NetworkSpec, region: &Region) -> Association {
    let inv_w2 = inv_weight_sq(spec);
    let bs_w: Vec<f64> = snapshot
        .bs_tier
        .iter()
        .map(|&t| inv_w2[t as usize])
        .collect();
    let n_bs = snapshot.bs_count();
    let mut serving = Vec::with_capacity(snapshot.user_count());
    let mut user_count = vec![0u32; n_bs];
    for u in 0..snapshot.user_count() {
        let (ux, uy) = (snapshot.user_x[u], snapshot.user_y[u]);
        let mut best = f64::INFINITY;
        let mut best_b = 0u32;
        for b in 0..n_bs {
            let dw2 = region.dist_sq(ux, uy, snapshot.bs_x[b], snapshot.bs_y[b]) * bs_w[b];
            if dw2 < best {
                best = dw2;
                best_b = b as u32;
            }
        }
        serving.push(best_b);
        user_count[best_b as usize] += 1;
    }
    Association {
        order: vec![1; serving.len()],
        serving,
        user_count,
        active: vec![true; n_bs],
    }
}

/// Apply an on/off policy in a single pass: the original association's
/// user counts decide which BSs sleep, orphaned users reassociate to the
/// weighted-nearest active BS, and counts are not re-evaluated.
///
/// Random policies draw one uniform per BS from the trial's
/// [`StreamKind::RandomOnOff`] stream; zero-user BSs sleep regardless.
pub fn apply_onoff(
    snapshot: &Snapshot,
    assoc: &Association,
    spec: &NetworkSpec,
    region: &Region,
    policy: &OnOffPolicy,
) -> Result<Association, DiscardReason> {
    let active = active_flags(snapshot, &assoc.user_count, policy);
    if !active.iter().any(|&a| a) {
        return Err(DiscardReason::NoActiveBs);
    }
    let inv_w2 = inv_weight_sq(spec);
    let bs_w: Vec<f64> = snapshot
        .bs_tier
        .iter()
        .map(|&t| inv_w2[t as usize])
        .collect();
    let mut serving = assoc.serving.clone();
    let mut order = vec![1u32; serving.len()];
    for u in 0..serving.len() {
        let (ux, uy) = (snapshot.user_x[u], snapshot.user_y[u]);
        if !active[serving[u] as usize] {
            // Rescan for the nearest active BS.
            let mut best = f64::INFINITY;
            let mut best_b = u32::MAX;
            for b in 0..snapshot.bs_count() {
                if !active[b] {
                    continue;
                }
                let dw2 = region.dist_sq(ux, uy, snapshot.bs_x[b], snapshot.bs_y[b]) * bs_w[b];
                if dw2 < best {
                    best = dw2;
                    best_b = b as u32;
                }
            }
            serving[u] = best_b;
        }
        // Association order: 1 + number of strictly weighted-closer BSs
        // (they are necessarily asleep).
        let s = serving[u] as usize;
        let dw2_s = region.dist_sq(ux, uy, snapshot.bs_x[s], snapshot.bs_y[s]) * bs_w[s];
        let mut closer = 0u32;
        for b in 0..snapshot.bs_count() {
            let dw2 = region.dist_sq(ux, uy, snapshot.bs_x[b], snapshot.bs_y[b]) * bs_w[b];
            if dw2 < dw2_s {
                closer += 1;
            }
        }
        order[u] = closer + 1;
    }
    Ok(Association {
        serving,
        order,
        user_count: assoc.user_count.clone(),
        active,
    })
}

/// Per-BS on/off flags for a policy, given the original user counts.
pub(crate) fn active_flags(
    snapshot: &Snapshot,
    user_count: &[u32],
    policy: &OnOffPolicy,
) -> Vec<bool> {
    match policy {
        OnOffPolicy::Threshold(thetas) => snapshot
            .bs_tier
            .iter()
            .zip(user_count)
            .map(|(&t, &c)| c > thetas[t as usize])
            .collect(),
        OnOffPolicy::Random { q } => {
            let mut s = Stream::new(
                snapshot.master_seed,
                snapshot.trial,
                StreamKind::RandomOnOff,
            );
            user_count
                .iter()
                .map(|&c| s.next_f64() < *q && c > 0)
                .collect()
        }
    }
}

/// Per-user coverage indicators for one realization.
///
/// Signal is P·h·d^{−α} from the serving BS; interference sums the same
/// expression over every other active BS in the region, with fresh
/// unit-mean exponential fading per link recomputed from the trial's
/// counter-based stream. In `Sinr` mode tier powers are
/// `beta · base_powers[tier]` against the scenario's σ²; in `Sir` mode the
/// scenario powers are used and noise is zero (any common power scale
/// cancels).
///
/// Indicators are produced for every user; [`Region::is_measured`] decides
/// which ones an estimate aggregates.
pub fn evaluate_coverage(
    snapshot: &Snapshot,
    assoc: &Association,
    spec: &NetworkSpec,
    region: &Region,
    mode: &SinrMode,
) -> Vec<bool> {
    let (powers, _beta, noise) = effective_powers(spec, mode);
    let bs_p: Vec<f64> = snapshot
        .bs_tier
        .iter()
        .map(|&t| powers[t as usize])
        .collect();
    let half_alpha = 0.5 * spec.pathloss_exponent;
    let alpha4 = spec.pathloss_exponent == 4.0;
    let mut covered = Vec::with_capacity(snapshot.user_count());
    for u in 0..snapshot.user_count() {
        let (ux, uy) = (snapshot.user_x[u], snapshot.user_y[u]);
        let s = assoc.serving[u] as usize;
        let mut interference = 0.0;
        let mut signal = 0.0;
        for b in 0..snapshot.bs_count() {
            if !assoc.active[b] && b != s {
                continue;
            }
            let d2 = region.dist_sq(ux, uy, snapshot.bs_x[b], snapshot.bs_y[b]);
            let gain = if alpha4 {
                1.0 / (d2 * d2)
            } else {
                d2.powf(-half_alpha)
            };
            let h = link_fading(snapshot.master_seed, snapshot.trial, u as u32, b as u32);
            let rx = bs_p[b] * h * gain;
            if b == s {
                signal = rx;
            } else {
                interference += rx;
            }
        }
        covered.push(signal > spec.target_sinr * (interference + noise));
    }
    covered
}

/// Tier powers, β, and noise for an evaluation mode.
pub(crate) fn effective_powers(spec: &NetworkSpec, mode: &SinrMode) -> (Vec<f64>, f64, f64) {
    match mode {
        SinrMode::Sir => (spec.tiers.iter().map(|t| t.tx_power).collect(), 1.0, 0.0),
        SinrMode::Sinr { base_powers, beta } => (
            base_powers.iter().map(|p| beta * p).collect(),
            *beta,
            spec.noise_power,
        ),
    }
}

// ---------------------------------------------------------------------------
// Empirical distance-order sampling
// ---------------------------------------------------------------------------

/// One probe of the n-th weighted-nearest BS from a uniformly random
/// point: its true (unweighted) distance, its tier, and the tier census
/// of the n−1 strictly closer BSs.
#[derive(Debug, Clone)]
pub struct NthNeighborSample {
    pub distance: f64,
    pub tier: u32,
    pub nearer_tier_counts: Vec<u32>,
}

/// Sample the distance to the n-th weighted-nearest BS over independent
/// realizations, one probe point per snapshot. Snapshots with fewer than
/// n BSs are skipped (and vanishing at sane densities).
pub fn empirical_nth_distance(
    spec: &NetworkSpec,
    region: &Region,
    n: u32,
    samples: u32,
    master_seed: u64,
) -> Vec<NthNeighborSample> {
    let inv_w2 = inv_weight_sq(spec);
    let tiers = spec.tiers.len();
    let mut out = Vec::with_capacity(samples as usize);
    for trial in 0..samples as u64 {
        let snap = match sample_snapshot(spec, region, master_seed, trial) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if snap.bs_count() < n as usize {
            continue;
        }
        let mut s = Stream::new(master_seed, trial, StreamKind::Probe);
        let px = s.next_f64() * region.width;
        let py = s.next_f64() * region.height;
        // (weighted d², true d², tier) per BS, partially selected to rank n.
        let mut ranked: Vec<(f64, f64, u32)> = (0..snap.bs_count())
            .map(|b| {
                let d2 = region.dist_sq(px, py, snap.bs_x[b], snap.bs_y[b]);
                (d2 * inv_w2[snap.bs_tier[b] as usize], d2, snap.bs_tier[b])
            })
            .collect();
        let k = (n - 1) as usize;
        ranked.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0));
        let nth = ranked[k];
        let mut nearer = vec![0u32; tiers];
        for e in &ranked[..k] {
            nearer[e.2 as usize] += 1;
        }
        out.push(NthNeighborSample {
            distance: nth.1.sqrt(),
            tier: nth.2,
            nearer_tier_counts: nearer,
        });
    }
    out
}
