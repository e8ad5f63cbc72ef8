//! Coverage-maximizing user-count thresholds: the closed-form rounding
//! rule, exhaustive search, a HetNet coordinate ascent, and the
//! normal-approximation derivative used as a diagnostic.

use std::fmt;

use crate::analytic::{coverage_hetnet_sir, coverage_homnet_sir, rho, AnalyticError};
use crate::model::{derive_ratios, NetworkSpec, OccupancyModel};

/// How a threshold result was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    ClosedForm,
    Exhaustive,
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ClosedForm => "closed_form",
            Self::Exhaustive => "exhaustive",
        })
    }
}

/// Result of a threshold optimization: one threshold per tier, the
/// coverage it achieves, the method, and an optional derivative trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub thresholds: Vec<u32>,
    pub achieved_coverage: f64,
    pub method: SearchMethod,
    pub derivative_trace: Option<Vec<(u32, f64)>>,
}

/// Closed-form optimal threshold: the integer nearest the mean users per
/// BS, θ_opt = ⌊γ + 0.5⌋ (half-integers round up).
pub fn optimal_threshold_closed(gamma: f64) -> u32 {
    (gamma + 0.5).floor().max(0.0) as u32
}

/// Exhaustive argmax of the overall interference-limited coverage over
/// θ ∈ {0, …, θ_max}; ties break toward the smaller threshold.
pub fn optimal_threshold_search(
    target_sinr: f64,
    gamma: f64,
    alpha: f64,
    theta_max: u32,
    model: OccupancyModel,
) -> Result<ThresholdResult, AnalyticError> {
    let mut best = (0u32, f64::MIN);
    for theta in 0..=theta_max {
        let v = coverage_homnet_sir(target_sinr, gamma, theta, alpha, model)?;
        if v > best.1 {
            best = (theta, v);
        }
    }
    Ok(ThresholdResult {
        thresholds: vec![best.0],
        achieved_coverage: best.1,
        method: SearchMethod::Exhaustive,
        derivative_trace: None,
    })
}

/// The derivative estimate and a flag warning that the normal
/// approximation behind it is shaky for small mean loads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEstimate {
    pub value: f64,
    /// Set when γ < 5, where Normal(γ, γ) is a poor stand-in for the
    /// occupancy distribution.
    pub low_gamma: bool,
}

/// Derivative of the overall coverage with respect to a continuous
/// threshold, under the normal occupancy approximation:
///
///   dP_c/dθ ≈ −(e^{−((θ−γ)²+¼)/(2γ)} / ((1+p̃_a ρ)² √(2πγ))) · ρ/(1+ρ)
///             · (e^{(θ−γ)/(2γ)}(1+p̃_a ρ) − e^{−(θ−γ)/(2γ)}(1+p̃₁ ρ)).
///
/// Positive below the optimum and negative above it, with the sign change
/// bracketing ⌊γ + 0.5⌋.
pub fn coverage_derivative_approx(
    target_sinr: f64,
    gamma: f64,
    theta: f64,
    alpha: f64,
) -> Result<DerivativeEstimate, AnalyticError> {
    if !(gamma > 0.0) {
        return Err(AnalyticError::Domain(
            "coverage_derivative_approx requires gamma > 0",
        ));
    }
    let r = rho(target_sinr, alpha)?;
    let sd = gamma.sqrt();
    let p_active = 1.0 - crate::specialfn::normal_cdf((theta + 0.5 - gamma) / sd);
    let p_nearest = 1.0 - crate::specialfn::normal_cdf((theta - 0.5 - gamma) / sd);
    let dev = theta - gamma;
    let envelope = (-(dev * dev + 0.25) / (2.0 * gamma)).exp()
        / ((1.0 + p_active * r).powi(2) * (2.0 * std::f64::consts::PI * gamma).sqrt());
    let bracket = (dev / (2.0 * gamma)).exp() * (1.0 + p_active * r)
        - (-dev / (2.0 * gamma)).exp() * (1.0 + p_nearest * r);
    Ok(DerivativeEstimate {
        value: -envelope * r / (1.0 + r) * bracket,
        low_gamma: gamma < 5.0,
    })
}

/// Derivative trace over integer thresholds, for diagnostic reports.
pub fn derivative_trace(
    target_sinr: f64,
    gamma: f64,
    alpha: f64,
    theta_max: u32,
) -> Result<Vec<(u32, f64)>, AnalyticError> {
    (0..=theta_max)
        .map(|t| {
            coverage_derivative_approx(target_sinr, gamma, t as f64, alpha).map(|d| (t, d.value))
        })
        .collect()
}

/// Per-tier optimal thresholds for a K-tier scenario.
///
/// Closed form: θᵢ = ⌊γ̄ᵢ + 0.5⌋, each tier independent of the others.
pub fn optimal_thresholds_hetnet_closed(spec: &NetworkSpec) -> Vec<u32> {
    derive_ratios(spec)
        .weighted_ratios
        .iter()
        .map(|&g| optimal_threshold_closed(g))
        .collect()
}

/// Exhaustive per-tier optimization of the K-tier overall coverage by
/// coordinate ascent from all-zero thresholds: sweep one tier's threshold
/// over {0, …, θ_max} holding the others fixed, repeat until no single
/// coordinate improves. Ties break toward the smaller threshold.
pub fn optimal_thresholds_hetnet(
    spec: &NetworkSpec,
    theta_max: u32,
    model: OccupancyModel,
) -> Result<ThresholdResult, AnalyticError> {
    let mut work = spec.clone();
    for tier in &mut work.tiers {
        tier.threshold = 0;
    }
    let mut best = coverage_hetnet_sir(&work, model)?;
    loop {
        let mut improved = false;
        for i in 0..work.tiers.len() {
            let (mut tier_best, original) = (best, work.tiers[i].threshold);
            let mut tier_arg = original;
            for theta in 0..=theta_max {
                work.tiers[i].threshold = theta;
                let v = coverage_hetnet_sir(&work, model)?;
                if v > tier_best {
                    tier_best = v;
                    tier_arg = theta;
                }
            }
            work.tiers[i].threshold = tier_arg;
            if tier_arg != original {
                best = tier_best;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(ThresholdResult {
        thresholds: work.tiers.iter().map(|t| t.threshold).collect(),
        achieved_coverage: best,
        method: SearchMethod::Exhaustive,
        derivative_trace: None,
    })
}

/// Closed-form result packaged with the coverage it achieves on the same
/// evaluation path as the exhaustive search.
pub fn threshold_closed_result(
    target_sinr: f64,
    gamma: f64,
    alpha: f64,
    model: OccupancyModel,
) -> Result<ThresholdResult, AnalyticError> {
    let theta = optimal_threshold_closed(gamma);
    Ok(ThresholdResult {
        thresholds: vec![theta],
        achieved_coverage: coverage_homnet_sir(target_sinr, gamma, theta, alpha, model)?,
        method: SearchMethod::ClosedForm,
        derivative_trace: None,
    })
}
