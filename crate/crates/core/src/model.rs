//! Shared domain vocabulary: scenario specifications, occupancy-model
//! selection, and the dimensionless ratios both the analytic formulas and
//! the simulator work in.
//!
//! Everything is in linear SI units (watts, per-m² densities, linear SINR);
//! the CLI converts dB-friendly inputs at the boundary.

use std::fmt;

/// Shape parameter of the gamma-distributed cell size model behind the
/// exact occupancy distribution.
pub const CELL_SHAPE: f64 = 3.575;

/// One network tier: base-station density, (post-power-control) transmit
/// power and the user-count threshold at or below which a BS sleeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierSpec {
    /// BS density λᵢ in BSs per m².
    pub bs_density: f64,
    /// Transmit power P_{t,i} in watts.
    pub tx_power: f64,
    /// User-count threshold θᵢ: a BS with at most this many associated
    /// users turns off.
    pub threshold: u32,
}

impl TierSpec {
    pub fn new(bs_density: f64, tx_power: f64, threshold: u32) -> Self {
        Self {
            bs_density,
            tx_power,
            threshold,
        }
    }
}

/// Full scenario: tiers, user density, propagation and target SINR.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    /// Tiers, length K ≥ 1. A single tier is the homogeneous case.
    pub tiers: Vec<TierSpec>,
    /// User density λᵤ in users per m².
    pub user_density: f64,
    /// Path-loss exponent α > 2.
    pub pathloss_exponent: f64,
    /// Additive noise power σ² in watts; 0 selects the
    /// interference-limited (SIR) regime.
    pub noise_power: f64,
    /// Target SINR T, linear.
    pub target_sinr: f64,
}

/// A scenario field failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub field: &'static str,
    pub message: &'static str,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario: {}: {}", self.field, self.message)
    }
}

impl std::error::Error for SpecError {}

impl NetworkSpec {
    /// Single-tier convenience constructor.
    pub fn homogeneous(
        bs_density: f64,
        user_density: f64,
        tx_power: f64,
        threshold: u32,
        pathloss_exponent: f64,
        noise_power: f64,
        target_sinr: f64,
    ) -> Self {
        Self {
            tiers: vec![TierSpec::new(bs_density, tx_power, threshold)],
            user_density,
            pathloss_exponent,
            noise_power,
            target_sinr,
        }
    }

    pub fn tier_count(&self) -> usize {
        self.tiers.len()
    }

    /// Mean users per BS of the first tier; the γ of the single-tier case.
    pub fn users_per_bs(&self) -> f64 {
        self.user_density / self.tiers[0].bs_density
    }

    /// Check all invariants, naming the first offending field.
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.tiers.is_empty() {
            return Err(SpecError {
                field: "tiers",
                message: "at least one tier is required",
            });
        }
        for t in &self.tiers {
            if !(t.bs_density > 0.0) {
                return Err(SpecError {
                    field: "bs_density",
                    message: "must be > 0",
                });
            }
            if !(t.tx_power > 0.0) {
                return Err(SpecError {
                    field: "tx_power",
                    message: "must be > 0",
                });
            }
        }
        if !(self.user_density > 0.0) {
            return Err(SpecError {
                field: "user_density",
                message: "must be > 0",
            });
        }
        if !(self.pathloss_exponent > 2.0) {
            return Err(SpecError {
                field: "pathloss_exponent",
                message: "must be > 2",
            });
        }
        if !(self.noise_power >= 0.0) {
            return Err(SpecError {
                field: "noise_power",
                message: "must be >= 0",
            });
        }
        if !(self.target_sinr > 0.0) {
            return Err(SpecError {
                field: "target_sinr",
                message: "must be > 0 (linear)",
            });
        }
        Ok(())
    }
}

/// Occupancy distribution used for BS user counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccupancyModel {
    /// Gamma-cell-size distribution with shape [`CELL_SHAPE`]; the exact
    /// model for Voronoi cells of a planar Poisson layout.
    ExactGamma,
    /// Poisson(γ) approximation (typical cell of area 1/λ_b).
    PoissonApprox,
    /// Normal(γ, γ) approximation with continuity correction; CDF-only,
    /// used inside the threshold-derivative diagnostic.
    NormalApprox,
}

/// Dimensionless quantities derived from a scenario: per-tier association
/// weights and probabilities, weighted densities, and mean users per BS.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedRatios {
    /// γ = λᵤ/λ_b of tier 1 (the single-tier mean users per BS).
    pub gamma: f64,
    /// Association weights wᵢ = P_{t,i}^{1/α}.
    pub weights: Vec<f64>,
    /// Tier association probabilities qᵢ, summing to 1.
    pub tier_probs: Vec<f64>,
    /// Weighted densities λ̄ᵢ = λᵢ/qᵢ.
    pub weighted_densities: Vec<f64>,
    /// Weighted mean users per BS γ̄ᵢ = λᵤ/λ̄ᵢ.
    pub weighted_ratios: Vec<f64>,
}

/// Compute the per-tier weights, association probabilities and weighted
/// densities: wᵢ = P_{t,i}^{1/α}, qᵢ = λᵢwᵢ²/Σⱼλⱼwⱼ², λ̄ᵢ = λᵢ/qᵢ,
/// γ̄ᵢ = λᵤ qᵢ/λᵢ.
pub fn derive_ratios(spec: &NetworkSpec) -> DerivedRatios {
    let alpha = spec.pathloss_exponent;
    let weights: Vec<f64> = spec
        .tiers
        .iter()
        .map(|t| t.tx_power.powf(1.0 / alpha))
        .collect();
    let mass: f64 = spec
        .tiers
        .iter()
        .zip(&weights)
        .map(|(t, w)| t.bs_density * w * w)
        .sum();
    let tier_probs: Vec<f64> = spec
        .tiers
        .iter()
        .zip(&weights)
        .map(|(t, w)| t.bs_density * w * w / mass)
        .collect();
    let weighted_densities: Vec<f64> = spec
        .tiers
        .iter()
        .zip(&tier_probs)
        .map(|(t, q)| t.bs_density / q)
        .collect();
    let weighted_ratios: Vec<f64> = weighted_densities
        .iter()
        .map(|l| spec.user_density / l)
        .collect();
    DerivedRatios {
        gamma: spec.user_density / spec.tiers[0].bs_density,
        weights,
        tier_probs,
        weighted_densities,
        weighted_ratios,
    }
}

/// Power-control state: the pre-control base power and the boost β that
/// keeps cell-edge SNR level as BSs switch off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerControl {
    /// Initial transmit power P_T in watts, before on/off control.
    pub base_power: f64,
    /// Boost ratio β ≥ 1; active BSs transmit β·P_T.
    pub beta: f64,
}

impl PowerControl {
    /// β = p_active^{−α/2}: thinning to active probability `p_active`
    /// grows cells by 1/p_active, so the edge distance grows by
    /// 1/√p_active and the power must rise by that to the α-th power.
    pub fn from_active_probability(base_power: f64, p_active: f64, alpha: f64) -> Self {
        Self {
            base_power,
            beta: p_active.powf(-alpha / 2.0),
        }
    }

    /// Effective transmit power β·P_T.
    pub fn effective_power(&self) -> f64 {
        self.beta * self.base_power
    }
}

/// Base transmit power calibrated so a cell-edge user (5th percentile of
/// the nearest-BS distance CDF) sees an SNR 10 dB above the target:
/// P_T = 10·T · d_e^α · σ² with d_e = √(−ln 0.05/(πλ_b)).
pub fn cell_edge_base_power(
    bs_density: f64,
    alpha: f64,
    noise_power: f64,
    target_sinr: f64,
) -> f64 {
    let d_edge = (-(0.05f64.ln()) / (std::f64::consts::PI * bs_density)).sqrt();
    10.0 * target_sinr * d_edge.powf(alpha) * noise_power
}
