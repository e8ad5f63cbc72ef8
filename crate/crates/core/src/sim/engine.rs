//! Trial execution and sweep aggregation.
//!
//! A sweep evaluates many policies against the same realizations. Within
//! a trial, per-user interference sums and serving assignments are
//! carried from one policy to the next by applying only the BSs whose
//! on/off state flips; fading is a pure function of (trial, user, BS), so
//! nothing per-link is stored. Sweeps ordered so that consecutive
//! policies differ little (ascending thresholds, snake grids) pay roughly
//! two full interference passes per trial instead of one per policy.
//!
//! Trials run in parallel; each is self-contained and aggregation sums
//! per-trial integers in trial order, so the estimate is bit-identical
//! for any worker count.

use rayon::prelude::*;

use crate::analytic::{activity_probs, AnalyticError};
use crate::model::{derive_ratios, NetworkSpec, OccupancyModel};

use super::rng::link_fading;
use super::{
    active_flags, inv_weight_sq, sample_snapshot, CoverageEstimate, OnOffPolicy, Region, SimError,
    Snapshot,
};

/// Fraction of discarded trials beyond which an estimate aborts.
const DISCARD_LIMIT: f64 = 0.10;

/// Noise regime for whole estimates. In `Sinr` mode the scenario's tier
/// powers are the pre-control base powers; each policy's boost
/// β = p_active^{−α/2} comes from the analytic activity probability of
/// that policy (a population quantity, not the per-trial fraction).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    Sir,
    Sinr,
}

/// Analytic network-wide active probability of a policy, used for power
/// control: the q-weighted activity of each tier at its weighted load.
fn policy_active_probability(
    spec: &NetworkSpec,
    policy: &OnOffPolicy,
) -> Result<f64, AnalyticError> {
    let ratios = derive_ratios(spec);
    let mut total = 0.0;
    for (i, (&q, &gbar)) in ratios
        .tier_probs
        .iter()
        .zip(&ratios.weighted_ratios)
        .enumerate()
    {
        total += match policy {
            OnOffPolicy::Threshold(thetas) => {
                q * activity_probs(thetas[i], gbar, OccupancyModel::ExactGamma)?.active
            }
            OnOffPolicy::Random { q: op } => {
                op * q * activity_probs(0, gbar / op, OccupancyModel::ExactGamma)?.active
            }
        };
    }
    Ok(total)
}

/// Per-policy outcome of one trial.
#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    covered: u64,
    measured: u64,
    discarded: bool,
}

const DISCARDED: TrialOutcome = TrialOutcome {
    covered: 0,
    measured: 0,
    discarded: true,
};

/// Monte Carlo estimate for a single policy.
pub fn estimate(
    spec: &NetworkSpec,
    region: &Region,
    policy: &OnOffPolicy,
    mode: EstimateMode,
    trials: u32,
    master_seed: u64,
) -> Result<CoverageEstimate, SimError> {
    Ok(estimate_sweep(
        spec,
        region,
        std::slice::from_ref(policy),
        mode,
        trials,
        master_seed,
    )?
    .pop()
    .expect("one policy in, one estimate out"))
}

/// Monte Carlo estimates for a sequence of policies sharing realizations.
///
/// Results are independent of the policy order (each trial's state is
/// rebuilt exactly through flips), but orders with small successive
/// changes run fastest.
pub fn estimate_sweep(
    spec: &NetworkSpec,
    region: &Region,
    policies: &[OnOffPolicy],
    mode: EstimateMode,
    trials: u32,
    master_seed: u64,
) -> Result<Vec<CoverageEstimate>, SimError> {
    spec.validate()?;
    region.validate()?;
    if trials == 0 {
        return Err(SimError::InvalidRegion("trials must be >= 1"));
    }
    if policies.is_empty() {
        return Err(SimError::InvalidRegion("at least one policy is required"));
    }
    for p in policies {
        p.check(spec.tier_count())?;
    }
    let betas: Vec<f64> = match mode {
        EstimateMode::Sir => vec![1.0; policies.len()],
        EstimateMode::Sinr => policies
            .iter()
            .map(|p| {
                policy_active_probability(spec, p).map(|pa| pa.powf(-spec.pathloss_exponent / 2.0))
            })
            .collect::<Result<_, _>>()?,
    };

    let per_trial: Vec<Vec<TrialOutcome>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| run_trial(spec, region, policies, &betas, mode, master_seed, trial))
        .collect();

    let mut out = Vec::with_capacity(policies.len());
    for pi in 0..policies.len() {
        let mut fractions: Vec<f64> = Vec::with_capacity(trials as usize);
        let mut samples = 0u64;
        let mut discarded = 0u32;
        for t in &per_trial {
            let o = t[pi];
            if o.discarded || o.measured == 0 {
                discarded += 1;
            } else {
                fractions.push(o.covered as f64 / o.measured as f64);
                samples += o.measured;
            }
        }
        if (discarded as f64) > DISCARD_LIMIT * trials as f64 {
            return Err(SimError::ExcessiveDiscards { discarded, trials });
        }
        let used = fractions.len() as u32;
        let mean = fractions.iter().sum::<f64>() / used as f64;
        let var = fractions
            .iter()
            .map(|f| (f - mean) * (f - mean))
            .sum::<f64>()
            / (used.max(2) - 1) as f64;
        out.push(CoverageEstimate {
            mean,
            std_error: (var / used as f64).sqrt(),
            trials,
            used_trials: used,
            per_user_samples: samples,
            discarded,
        });
    }
    Ok(out)
}

/// Flat per-BS data for the hot loops.
struct BsField {
    x: Vec<f64>,
    y: Vec<f64>,
    /// 1/wᵢ² of the BS's tier (weighted-distance factor).
    inv_w2: Vec<f64>,
    /// Base transmit power of the BS's tier.
    power: Vec<f64>,
}

impl BsField {
    fn build(snapshot: &Snapshot, spec: &NetworkSpec) -> Self {
        let inv_w2_tier = inv_weight_sq(spec);
        let p_tier: Vec<f64> = spec.tiers.iter().map(|t| t.tx_power).collect();
        Self {
            x: snapshot.bs_x.clone(),
            y: snapshot.bs_y.clone(),
            inv_w2: snapshot
                .bs_tier
                .iter()
                .map(|&t| inv_w2_tier[t as usize])
                .collect(),
            power: snapshot
                .bs_tier
                .iter()
                .map(|&t| p_tier[t as usize])
                .collect(),
        }
    }
}

fn run_trial(
    spec: &NetworkSpec,
    region: &Region,
    policies: &[OnOffPolicy],
    betas: &[f64],
    mode: EstimateMode,
    master_seed: u64,
    trial: u64,
) -> Vec<TrialOutcome> {
    let snapshot = match sample_snapshot(spec, region, master_seed, trial) {
        Ok(s) => s,
        Err(_) => return vec![DISCARDED; policies.len()],
    };
    let bs = BsField::build(&snapshot, spec);
    let n_bs = snapshot.bs_count();
    let n_users = snapshot.user_count();
    let half_alpha = 0.5 * spec.pathloss_exponent;
    let alpha4 = spec.pathloss_exponent == 4.0;
    let noise = match mode {
        EstimateMode::Sir => 0.0,
        EstimateMode::Sinr => spec.noise_power,
    };

    // Original association: per-BS user counts (never re-evaluated).
    let mut user_count = vec![0u32; n_bs];
    for u in 0..n_users {
        let (ux, uy) = (snapshot.user_x[u], snapshot.user_y[u]);
        let mut best = f64::INFINITY;
        let mut best_b = 0usize;
        for b in 0..n_bs {
            let dw2 = region.dist_sq(ux, uy, bs.x[b], bs.y[b]) * bs.inv_w2[b];
            if dw2 < best {
                best = dw2;
                best_b = b;
            }
        }
        user_count[best_b] += 1;
    }

    let measured: Vec<bool> = (0..n_users)
        .map(|u| region.is_measured(snapshot.user_x[u], snapshot.user_y[u]))
        .collect();

    // Rolling state: per-BS activity, per-user interference over active
    // BSs (serving included), and the weighted-nearest active BS.
    let mut active = vec![false; n_bs];
    let mut interference = vec![0.0f64; n_users];
    let mut serving = vec![u32::MAX; n_users];
    let mut serving_dw2 = vec![f64::INFINITY; n_users];

    let gain = |d2: f64| -> f64 {
        if alpha4 {
            1.0 / (d2 * d2)
        } else {
            d2.powf(-half_alpha)
        }
    };

    let mut outcomes = Vec::with_capacity(policies.len());
    for (pi, policy) in policies.iter().enumerate() {
        let next_active = active_flags(&snapshot, &user_count, policy);

        for b in 0..n_bs {
            if next_active[b] == active[b] {
                continue;
            }
            let (bx, by, w2, p) = (bs.x[b], bs.y[b], bs.inv_w2[b], bs.power[b]);
            if next_active[b] {
                for u in 0..n_users {
                    let d2 = region.dist_sq(snapshot.user_x[u], snapshot.user_y[u], bx, by);
                    let h = link_fading(master_seed, trial, u as u32, b as u32);
                    interference[u] += p * h * gain(d2);
                    let dw2 = d2 * w2;
                    if dw2 < serving_dw2[u] {
                        serving_dw2[u] = dw2;
                        serving[u] = b as u32;
                    }
                }
            } else {
                for u in 0..n_users {
                    let d2 = region.dist_sq(snapshot.user_x[u], snapshot.user_y[u], bx, by);
                    let h = link_fading(master_seed, trial, u as u32, b as u32);
                    interference[u] -= p * h * gain(d2);
                    if serving[u] == b as u32 {
                        serving[u] = u32::MAX;
                        serving_dw2[u] = f64::INFINITY;
                    }
                }
            }
        }
        active = next_active;

        if !active.iter().any(|&a| a) {
            outcomes.push(DISCARDED);
            continue;
        }

        // Reassociate users whose serving BS disappeared (or who never
        // had one because an earlier policy turned everything off).
        for u in 0..n_users {
            if serving[u] != u32::MAX {
                continue;
            }
            let (ux, uy) = (snapshot.user_x[u], snapshot.user_y[u]);
            let mut best = f64::INFINITY;
            let mut best_b = u32::MAX;
            for b in 0..n_bs {
                if !active[b] {
                    continue;
                }
                let dw2 = region.dist_sq(ux, uy, bs.x[b], bs.y[b]) * bs.inv_w2[b];
                if dw2 < best {
                    best = dw2;
                    best_b = b as u32;
                }
            }
            serving[u] = best_b;
            serving_dw2[u] = best;
        }

        // Indicators. In Sinr mode signal and interference share the
        // policy's power boost while noise does not.
        let beta = betas[pi];
        let target = spec.target_sinr;
        let mut covered = 0u64;
        let mut total = 0u64;
        for u in 0..n_users {
            if !measured[u] {
                continue;
            }
            let b = serving[u] as usize;
            let d2 = region.dist_sq(snapshot.user_x[u], snapshot.user_y[u], bs.x[b], bs.y[b]);
            let h = link_fading(master_seed, trial, u as u32, b as u32);
            let signal = bs.power[b] * h * gain(d2);
            let other = interference[u] - signal;
            let ok = match mode {
                EstimateMode::Sir => signal > target * other,
                EstimateMode::Sinr => beta * signal > target * (beta * other + noise),
            };
            covered += ok as u64;
            total += 1;
        }
        outcomes.push(TrialOutcome {
            covered,
            measured: total,
            discarded: false,
        });
    }
    outcomes
}
