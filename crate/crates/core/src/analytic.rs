//! Closed-form and integral coverage expressions for single-tier and
//! K-tier networks under user-count threshold on/off control, plus the
//! probability building blocks they stand on.
//!
//! Conventions: all SINR/SNR quantities are linear, densities are per m²,
//! and `gamma` is the mean number of users per BS (λᵤ/λ_b, or its
//! weighted per-tier analog γ̄ᵢ in the K-tier case). The K-tier overall
//! coverage reduces to a convex combination of single-tier expressions
//! evaluated at the weighted densities λ̄ᵢ = λᵢ/qᵢ.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use crate::model::{derive_ratios, DerivedRatios, NetworkSpec, OccupancyModel, CELL_SHAPE};
use crate::specialfn::{
    integrate, ln_gamma, normal_cdf, parabolic_cylinder_d_scaled, QuadratureSpec, SpecialFnError,
};

/// Errors from analytic coverage evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticError {
    /// A numerical kernel failed (quadrature non-convergence, precision
    /// loss in the parabolic cylinder recurrence, ...).
    SpecialFn(SpecialFnError),
    /// PMF query against the CDF-only normal approximation.
    PmfUnsupported,
    /// Invalid argument.
    Domain(&'static str),
    /// A computed probability left [0, 1] by more than numerical noise.
    ProbabilityOutOfRange { what: &'static str, value: f64 },
}

impl fmt::Display for AnalyticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SpecialFn(e) => write!(f, "{e}"),
            Self::PmfUnsupported => {
                write!(f, "the normal approximation is CDF-only; no PMF is defined")
            }
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
            Self::ProbabilityOutOfRange { what, value } => {
                write!(f, "{what} = {value} is outside [0, 1]")
            }
        }
    }
}

impl std::error::Error for AnalyticError {}

impl From<SpecialFnError> for AnalyticError {
    fn from(e: SpecialFnError) -> Self {
        Self::SpecialFn(e)
    }
}

// ---------------------------------------------------------------------------
// Occupancy and activity probabilities
// ---------------------------------------------------------------------------

/// P(a typical BS serves exactly m users), for mean load `gamma`.
///
/// `ExactGamma` uses the gamma-cell-size law with shape [`CELL_SHAPE`];
/// `PoissonApprox` uses Poisson(γ). The normal approximation has no PMF
/// and is rejected.
pub fn occupancy_pmf(m: u32, gamma: f64, model: OccupancyModel) -> Result<f64, AnalyticError> {
    if !(gamma > 0.0) {
        return Err(AnalyticError::Domain("occupancy_pmf requires gamma > 0"));
    }
    match model {
        OccupancyModel::ExactGamma => Ok(occupancy_pmf_with_shape(m, gamma, CELL_SHAPE)),
        OccupancyModel::PoissonApprox => {
            let m = m as f64;
            Ok((m * gamma.ln() - gamma - ln_gamma(m + 1.0)).exp())
        }
        OccupancyModel::NormalApprox => Err(AnalyticError::PmfUnsupported),
    }
}

/// Gamma-cell occupancy PMF with an explicit shape parameter; production
/// code always passes [`CELL_SHAPE`], tests may probe sensitivity.
pub(crate) fn occupancy_pmf_with_shape(m: u32, gamma: f64, shape: f64) -> f64 {
    let m = m as f64;
    (ln_gamma(m + shape)
        - ln_gamma(shape)
        - ln_gamma(m + 1.0)
        - m * (shape / gamma).ln_1p()
        - shape * (gamma / shape).ln_1p())
    .exp()
}

/// The probabilities that drive the order-of-association distribution.
///
/// `active` is the probability a BS stays on (serves more than θ users),
/// `nearest` the probability a user is served by its (weighted-)nearest
/// BS, and `non_nearest` its complement. For K-tier networks the same
/// struct carries the tier-averaged values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityProbs {
    pub active: f64,
    pub nearest: f64,
    pub non_nearest: f64,
}

/// Activity and nearest-service probabilities for threshold θ and mean
/// load γ: p_a = P(N > θ) and p_1꜀ = Σ_{m=1}^{θ} m·P(N = m)/γ, the mean
/// fraction of users whose cell goes idle.
///
/// Under `NormalApprox` both tails use Normal(γ, γ) with continuity
/// correction: p_a ≈ 1 − F(θ + ½) and p₁ ≈ 1 − F(θ − ½).
pub fn activity_probs(
    theta: u32,
    gamma: f64,
    model: OccupancyModel,
) -> Result<ActivityProbs, AnalyticError> {
    if !(gamma > 0.0) {
        return Err(AnalyticError::Domain("activity_probs requires gamma > 0"));
    }
    if model == OccupancyModel::NormalApprox {
        let sd = gamma.sqrt();
        let active = 1.0 - normal_cdf((theta as f64 + 0.5 - gamma) / sd);
        let nearest = 1.0 - normal_cdf((theta as f64 - 0.5 - gamma) / sd);
        return Ok(ActivityProbs {
            active,
            nearest,
            non_nearest: 1.0 - nearest,
        });
    }
    let mut cdf = 0.0;
    let mut load_below = 0.0;
    for m in 0..=theta {
        let p = occupancy_pmf(m, gamma, model)?;
        cdf += p;
        load_below += m as f64 * p;
    }
    let non_nearest = load_below / gamma;
    if non_nearest > 1.0 + 1e-9 {
        return Err(AnalyticError::ProbabilityOutOfRange {
            what: "non_nearest",
            value: non_nearest,
        });
    }
    let non_nearest = non_nearest.min(1.0);
    Ok(ActivityProbs {
        active: (1.0 - cdf).clamp(0.0, 1.0),
        nearest: 1.0 - non_nearest,
        non_nearest,
    })
}

/// P(a user is served by its n-th weighted-nearest BS): the nearest with
/// probability p₁, otherwise a geometric number of sleeping BSs precede
/// the serving one.
pub fn order_pmf(n: u32, probs: &ActivityProbs) -> Result<f64, AnalyticError> {
    if n == 0 {
        return Err(AnalyticError::Domain("order_pmf requires n >= 1"));
    }
    Ok(match n {
        1 => probs.nearest,
        _ => probs.non_nearest * (1.0 - probs.active).powi(n as i32 - 2) * probs.active,
    })
}

// ---------------------------------------------------------------------------
// The interference integral rho
// ---------------------------------------------------------------------------

/// Memoized values of the interference integral ρ(T, α).
///
/// Reads race freely; a duplicated compute stores the identical value, so
/// results do not depend on interleaving.
#[derive(Default)]
pub struct RhoCache {
    map: RwLock<HashMap<(u64, u64), f64>>,
}

impl RhoCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, target_sinr: f64, alpha: f64) -> Result<f64, AnalyticError> {
        let key = (target_sinr.to_bits(), alpha.to_bits());
        if let Some(&v) = self.map.read().expect("rho cache poisoned").get(&key) {
            return Ok(v);
        }
        let v = rho_uncached(target_sinr, alpha)?;
        self.map.write().expect("rho cache poisoned").insert(key, v);
        Ok(v)
    }
}

fn rho_quadrature_spec() -> QuadratureSpec {
    QuadratureSpec {
        absolute_tolerance: 1e-13,
        relative_tolerance: 1e-12,
        max_subdivisions: 400,
    }
}

fn rho_uncached(target_sinr: f64, alpha: f64) -> Result<f64, AnalyticError> {
    if !(target_sinr > 0.0) {
        return Err(AnalyticError::Domain("rho requires target_sinr > 0"));
    }
    if !(alpha > 2.0) {
        return Err(AnalyticError::Domain("rho requires alpha > 2"));
    }
    let lower = target_sinr.powf(-2.0 / alpha);
    let half_alpha = alpha / 2.0;
    let integral = integrate(
        move |u| 1.0 / (1.0 + u.powf(half_alpha)),
        lower,
        f64::INFINITY,
        &rho_quadrature_spec(),
    )?;
    Ok(target_sinr.powf(2.0 / alpha) * integral)
}

/// Interference integral ρ(T, α) = T^{2/α} ∫_{T^{−2/α}}^∞ du/(1 + u^{α/2});
/// at α = 4 this equals √T (π/2 − arctan(1/√T)). Values are memoized
/// process-wide.
pub fn rho(target_sinr: f64, alpha: f64) -> Result<f64, AnalyticError> {
    static CACHE: OnceLock<RhoCache> = OnceLock::new();
    CACHE.get_or_init(RhoCache::new).get(target_sinr, alpha)
}

/// Closed form of ρ at α = 4.
pub fn rho_alpha4(target_sinr: f64) -> f64 {
    let s = target_sinr.sqrt();
    s * (std::f64::consts::FRAC_PI_2 - (1.0 / s).atan())
}

// ---------------------------------------------------------------------------
// Coverage conditioned on the association order
// ---------------------------------------------------------------------------

/// Noise regime for the conditional coverage expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrMode {
    /// Interference-limited: σ² = 0, transmit power drops out.
    Sir,
    /// Finite linear SNR = P_t/σ² referred to unit distance.
    Snr(f64),
}

/// P(SINR > T | served by the n-th nearest BS) for a single-tier layout
/// of density λ thinned to activity `p_active`:
///
///   ((πλ)ⁿ/Γ(n)) ∫₀^∞ e^{−πλv(1+p_a ρ) − T v^{α/2}/SNR} v^{n−1} dv.
///
/// In SIR mode the integral collapses to (1 + p_a ρ)^{−n}.
pub fn coverage_cond_n(
    target_sinr: f64,
    alpha: f64,
    bs_density: f64,
    p_active: f64,
    snr: SnrMode,
    n: u32,
) -> Result<f64, AnalyticError> {
    if n == 0 {
        return Err(AnalyticError::Domain("coverage_cond_n requires n >= 1"));
    }
    let r = rho(target_sinr, alpha)?;
    let shrink = 1.0 + p_active * r;
    let snr = match snr {
        SnrMode::Sir => return Ok(shrink.powi(-(n as i32))),
        SnrMode::Snr(s) => s,
    };
    if !(snr > 0.0) {
        return Err(AnalyticError::Domain("coverage_cond_n requires SNR > 0"));
    }
    // Substituting s = πλ(1+p_a ρ)v reduces the prefactor to (1+p_a ρ)^{−n}
    // and leaves a unit-scale gamma-like integrand, evaluated in log space.
    let scale = std::f64::consts::PI * bs_density * shrink;
    let noise_coeff = target_sinr / snr;
    let nm1 = (n - 1) as f64;
    let lg = ln_gamma(n as f64);
    let spec = QuadratureSpec {
        absolute_tolerance: 1e-300,
        relative_tolerance: 1e-10,
        max_subdivisions: 400,
    };
    let integral = integrate(
        move |s| {
            if s <= 0.0 {
                return 0.0;
            }
            let v = s / scale;
            (nm1 * s.ln() - s - noise_coeff * v.powf(alpha / 2.0) - lg).exp()
        },
        0.0,
        f64::INFINITY,
        &spec,
    )?;
    Ok(shrink.powi(-(n as i32)) * integral)
}

/// α = 4 closed form of [`coverage_cond_n`] through the parabolic
/// cylinder function. Applying the Gaussian-integral identity
/// ∫₀^∞ xᵐ e^{−a²x²+bx} dx = (2a²)^{−(m+1)/2} m! e^{b²/(8a²)} D₋ₘ₋₁(−b/(a√2))
/// to the conditional coverage integral with a² = T/SNR and
/// b = −πλκ(T) gives
///
///   (πλ)ⁿ (2T/SNR)^{−n/2} e^{z²/4} D₋ₙ(z),  z = πλκ(T)/√(2T/SNR),
///
/// with κ(T) = 1 + p_a √T (π/2 − arctan(1/√T)); the Γ(n) factors cancel.
/// The e^{z²/4}D₋ₙ product is evaluated jointly to stay in range.
pub fn coverage_cond_n_alpha4(
    target_sinr: f64,
    bs_density: f64,
    p_active: f64,
    snr: f64,
    n: u32,
) -> Result<f64, AnalyticError> {
    if n == 0 {
        return Err(AnalyticError::Domain(
            "coverage_cond_n_alpha4 requires n >= 1",
        ));
    }
    if !(snr > 0.0) {
        return Err(AnalyticError::Domain(
            "coverage_cond_n_alpha4 requires SNR > 0",
        ));
    }
    let kappa = 1.0 + p_active * rho_alpha4(target_sinr);
    let ratio = 2.0 * target_sinr / snr;
    let z = std::f64::consts::PI * bs_density * kappa / ratio.sqrt();
    let scaled_d = parabolic_cylinder_d_scaled(n, z)?;
    let log_pref = n as f64 * ((std::f64::consts::PI * bs_density).ln() - 0.5 * ratio.ln());
    Ok((log_pref + scaled_d.ln()).exp())
}

// ---------------------------------------------------------------------------
// Overall coverage
// ---------------------------------------------------------------------------

/// Overall interference-limited coverage of a single-tier network under
/// threshold control:
///
///   P_c = (1 + p₁ ρ) / ((1 + ρ)(1 + p_a ρ)),
///
/// the closed form of the order-weighted geometric series.
pub fn coverage_homnet_sir(
    target_sinr: f64,
    gamma: f64,
    theta: u32,
    alpha: f64,
    model: OccupancyModel,
) -> Result<f64, AnalyticError> {
    let probs = activity_probs(theta, gamma, model)?;
    let r = rho(target_sinr, alpha)?;
    Ok(overall_from_probs(&probs, r))
}

fn overall_from_probs(probs: &ActivityProbs, rho: f64) -> f64 {
    (1.0 + probs.nearest * rho) / ((1.0 + rho) * (1.0 + probs.active * rho))
}

/// Interference-limited coverage of the random on/off baseline operating
/// each BS independently with probability `q` (empty BSs sleep too):
/// P_c = 1/(1 + p_a(0, γ/q) ρ).
pub fn coverage_random(
    target_sinr: f64,
    gamma: f64,
    q: f64,
    alpha: f64,
    model: OccupancyModel,
) -> Result<f64, AnalyticError> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(AnalyticError::Domain("coverage_random requires 0 < q <= 1"));
    }
    let probs = activity_probs(0, gamma / q, model)?;
    let r = rho(target_sinr, alpha)?;
    Ok(1.0 / (1.0 + probs.active * r))
}

/// Tier-averaged activity probabilities of a K-tier scenario: per-tier
/// values at (θᵢ, γ̄ᵢ), combined with the association weights qᵢ.
pub fn hetnet_activity_probs(
    spec: &NetworkSpec,
    model: OccupancyModel,
) -> Result<(ActivityProbs, DerivedRatios), AnalyticError> {
    let ratios = derive_ratios(spec);
    let mut active = 0.0;
    let mut non_nearest = 0.0;
    for (tier, (&q, &gbar)) in spec
        .tiers
        .iter()
        .zip(ratios.tier_probs.iter().zip(&ratios.weighted_ratios))
    {
        let p = activity_probs(tier.threshold, gbar, model)?;
        active += q * p.active;
        non_nearest += q * p.non_nearest;
    }
    Ok((
        ActivityProbs {
            active,
            nearest: 1.0 - non_nearest,
            non_nearest,
        },
        ratios,
    ))
}

/// Overall interference-limited coverage of a K-tier network: the
/// single-tier closed form evaluated on the tier-averaged probabilities.
pub fn coverage_hetnet_sir(
    spec: &NetworkSpec,
    model: OccupancyModel,
) -> Result<f64, AnalyticError> {
    let (probs, _) = hetnet_activity_probs(spec, model)?;
    let r = rho(spec.target_sinr, spec.pathloss_exponent)?;
    Ok(overall_from_probs(&probs, r))
}

/// K-tier coverage conditioned on association order n: the q-weighted
/// combination of single-tier expressions at the weighted densities λ̄ᵢ,
/// all thinned by the tier-averaged activity probability. With α = 4 and
/// finite SNR each term uses the parabolic-cylinder form.
pub fn coverage_hetnet_cond_n(
    spec: &NetworkSpec,
    snr: SnrMode,
    n: u32,
    model: OccupancyModel,
) -> Result<f64, AnalyticError> {
    let (probs, ratios) = hetnet_activity_probs(spec, model)?;
    let mut total = 0.0;
    for (&q, &lbar) in ratios.tier_probs.iter().zip(&ratios.weighted_densities) {
        let term = match snr {
            SnrMode::Snr(s) if spec.pathloss_exponent == 4.0 => {
                coverage_cond_n_alpha4(spec.target_sinr, lbar, probs.active, s, n)?
            }
            _ => coverage_cond_n(
                spec.target_sinr,
                spec.pathloss_exponent,
                lbar,
                probs.active,
                snr,
                n,
            )?,
        };
        total += q * term;
    }
    Ok(total)
}

/// PDF of the distance to the n-th nearest point of a rate-λ planar
/// Poisson process: f(r) = e^{−λπr²} · 2(λπr²)ⁿ/(r Γ(n)). With λ = λ̄ᵢ
/// this is also the K-tier distance law conditioned on the n-th nearest
/// BS belonging to tier i.
pub fn nth_distance_pdf(r: f64, n: u32, density: f64) -> Result<f64, AnalyticError> {
    if n == 0 {
        return Err(AnalyticError::Domain("nth_distance_pdf requires n >= 1"));
    }
    if !(r > 0.0) || !(density > 0.0) {
        return Err(AnalyticError::Domain(
            "nth_distance_pdf requires r > 0 and density > 0",
        ));
    }
    let mass = density * std::f64::consts::PI * r * r;
    Ok((n as f64 * mass.ln() - mass - ln_gamma(n as f64)).exp() * 2.0 / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TierSpec;

    const GAMMA: f64 = 10.0;

    // -- occupancy ----------------------------------------------------------

    #[test]
    fn occupancy_exact_gamma_at_zero() {
        // (1 + 10/3.575)^{-3.575}
        let p = occupancy_pmf(0, GAMMA, OccupancyModel::ExactGamma).unwrap();
        let direct = (1.0 + GAMMA / CELL_SHAPE).powf(-CELL_SHAPE);
        assert!((p - direct).abs() < 1e-15);
        assert!((p - 8.48e-3).abs() < 1e-5);
    }

    #[test]
    fn occupancy_poisson_at_zero() {
        let p = occupancy_pmf(0, GAMMA, OccupancyModel::PoissonApprox).unwrap();
        assert!((p - (-GAMMA).exp()).abs() < 1e-18);
        assert!((p - 4.54e-5).abs() < 1e-7);
    }

    #[test]
    fn occupancy_pmfs_normalize() {
        for model in [OccupancyModel::ExactGamma, OccupancyModel::PoissonApprox] {
            let total: f64 = (0..500)
                .map(|m| occupancy_pmf(m, GAMMA, model).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "{model:?} sums to {total}");
        }
    }

    #[test]
    fn occupancy_shape_sensitivity() {
        // The gamma-cell family stays a mean-gamma distribution for any
        // shape; 3.575 is the production constant, not a structural need.
        for shape in [2.0, CELL_SHAPE, 5.0] {
            let total: f64 = (0..800)
                .map(|m| occupancy_pmf_with_shape(m, GAMMA, shape))
                .sum();
            let mean: f64 = (0..800)
                .map(|m| m as f64 * occupancy_pmf_with_shape(m, GAMMA, shape))
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "shape {shape}: total {total}");
            assert!((mean - GAMMA).abs() < 1e-7, "shape {shape}: mean {mean}");
        }
    }

    #[test]
    fn occupancy_exact_gamma_has_mean_gamma() {
        let mean: f64 = (0..2000)
            .map(|m| m as f64 * occupancy_pmf(m, GAMMA, OccupancyModel::ExactGamma).unwrap())
            .sum();
        assert!((mean - GAMMA).abs() < 1e-9, "mean {mean}");
    }

    #[test]
    fn occupancy_normal_pmf_rejected() {
        assert_eq!(
            occupancy_pmf(3, GAMMA, OccupancyModel::NormalApprox),
            Err(AnalyticError::PmfUnsupported)
        );
    }

    // -- activity probabilities ----------------------------------------------

    #[test]
    fn activity_theta_zero() {
        let p = activity_probs(0, GAMMA, OccupancyModel::ExactGamma).unwrap();
        assert_eq!(p.non_nearest, 0.0);
        assert_eq!(p.nearest, 1.0);
        assert!((p.active - 0.9915195881707257).abs() < 1e-12);
    }

    #[test]
    fn activity_poisson_identity() {
        // p̃₁(θ, γ) = p̃_a(θ, γ) + P̃(N = θ | γ)
        for theta in [1u32, 5, 10, 15] {
            let p = activity_probs(theta, GAMMA, OccupancyModel::PoissonApprox).unwrap();
            let pmf = occupancy_pmf(theta, GAMMA, OccupancyModel::PoissonApprox).unwrap();
            assert!(
                (p.nearest - (p.active + pmf)).abs() < 1e-12,
                "theta={theta}"
            );
        }
    }

    #[test]
    fn activity_ordering_invariant() {
        // 0 <= p_a <= p_1 <= 1 across models and thresholds.
        for model in [
            OccupancyModel::ExactGamma,
            OccupancyModel::PoissonApprox,
            OccupancyModel::NormalApprox,
        ] {
            for theta in 0..=25u32 {
                for &g in &[2.0, 8.0, 10.0, 20.0] {
                    let p = activity_probs(theta, g, model).unwrap();
                    assert!(p.active >= 0.0 && p.nearest <= 1.0);
                    assert!(
                        p.active <= p.nearest + 1e-12,
                        "{model:?} theta={theta} g={g}: {p:?}"
                    );
                    assert!((p.nearest + p.non_nearest - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn activity_normal_uses_continuity_correction() {
        let p = activity_probs(10, GAMMA, OccupancyModel::NormalApprox).unwrap();
        let sd = GAMMA.sqrt();
        assert!((p.active - (1.0 - normal_cdf(0.5 / sd))).abs() < 1e-15);
        assert!((p.nearest - (1.0 - normal_cdf(-0.5 / sd))).abs() < 1e-15);
    }

    // -- order pmf -----------------------------------------------------------

    #[test]
    fn order_pmf_geometric_series_sums_to_one() {
        let probs = ActivityProbs {
            active: 0.7,
            nearest: 0.8,
            non_nearest: 0.2,
        };
        let total: f64 = (1..400).map(|n| order_pmf(n, &probs).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn order_pmf_direct_values() {
        let probs = ActivityProbs {
            active: 0.5,
            nearest: 0.8,
            non_nearest: 0.2,
        };
        assert!((order_pmf(3, &probs).unwrap() - 0.05).abs() < 1e-15);
        let all_on = ActivityProbs {
            active: 1.0,
            nearest: 0.8,
            non_nearest: 0.2,
        };
        assert!((order_pmf(2, &all_on).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(order_pmf(3, &all_on).unwrap(), 0.0);
        assert!(order_pmf(0, &probs).is_err());
    }

    // -- rho ------------------------------------------------------------------

    #[test]
    fn rho_alpha4_closed_form_agreement() {
        for &t in &[0.1, 0.5, 1.0, 2.0, 10.0, 31.62] {
            let quad = rho(t, 4.0).unwrap();
            let closed = rho_alpha4(t);
            assert!(
                (quad - closed).abs() < 1e-10,
                "rho({t}, 4): {quad} vs {closed}"
            );
        }
        assert!((rho_alpha4(1.0) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn rho_vanishes_at_small_t_and_grows_in_t() {
        assert!(rho(1e-9, 4.0).unwrap() < 1e-4);
        let mut prev = 0.0;
        for i in 1..=30 {
            let t = i as f64 * 0.5;
            let r = rho(t, 4.0).unwrap();
            assert!(r > prev, "rho must increase in T");
            prev = r;
        }
    }

    #[test]
    fn rho_other_alphas() {
        // alpha = 3 has an integrable endpoint singularity after the
        // infinite-interval substitution; alpha = 6 is smooth.
        for &alpha in &[3.0, 3.5, 6.0] {
            let r = rho(1.0, alpha).unwrap();
            assert!(r.is_finite() && r > 0.0, "rho(1, {alpha}) = {r}");
        }
        // Spot value: alpha = 6, T = 1: closed form
        // T^{1/3} * int_{1}^inf du/(1+u^3) = (ln 2)/3 + pi/(3 sqrt 3) ... check numerically
        let direct = integrate(
            |u| 1.0 / (1.0 + u.powi(3)),
            1.0,
            f64::INFINITY,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((rho(1.0, 6.0).unwrap() - direct).abs() < 1e-9);
    }

    // -- conditional coverage --------------------------------------------------

    #[test]
    fn cond_n_sir_closed_form() {
        // n=1, full activity, T=1, alpha=4: 1/(1 + pi/4)
        let v = coverage_cond_n(1.0, 4.0, 1e-4, 1.0, SnrMode::Sir, 1).unwrap();
        assert!((v - 1.0 / (1.0 + std::f64::consts::FRAC_PI_4)).abs() < 1e-12);
        assert!((v - 0.56010).abs() < 1e-5);
    }

    #[test]
    fn cond_n_quadrature_approaches_sir_limit() {
        let sir = coverage_cond_n(1.0, 4.0, 1e-4, 0.9, SnrMode::Sir, 2).unwrap();
        let big = coverage_cond_n(1.0, 4.0, 1e-4, 0.9, SnrMode::Snr(1e14), 2).unwrap();
        assert!((sir - big).abs() < 1e-6, "{sir} vs {big}");
    }

    #[test]
    fn alpha4_closed_form_matches_quadrature() {
        // Grid over T, n at a finite SNR comparable to the calibrated
        // experiment scale.
        let bs_density = 1e-4;
        let snr = 9.0e8;
        for &t in &[0.5, 1.0, 2.0] {
            for n in 1..=5u32 {
                for &pa in &[0.6, 1.0] {
                    let quad =
                        coverage_cond_n(t, 4.0, bs_density, pa, SnrMode::Snr(snr), n).unwrap();
                    let closed = coverage_cond_n_alpha4(t, bs_density, pa, snr, n).unwrap();
                    assert!(
                        (quad - closed).abs() < 1e-6,
                        "T={t} n={n} pa={pa}: {quad} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn alpha4_n1_reduces_to_gaussian_tail_form() {
        // For n=1 the parabolic cylinder special case
        // D_{-1}(z) = e^{z^2/4} sqrt(2 pi) Q(z) reduces the closed form to
        // pi lambda sqrt(SNR/(2T)) sqrt(2 pi) e^{z^2/2} Q(z); cross-check
        // against that explicit evaluation at a modest z where the bare
        // tail is representable.
        let (t, lb, pa, snr) = (1.0, 1e-4, 0.95, 1e9);
        let kappa = 1.0 + pa * rho_alpha4(t);
        let z = std::f64::consts::PI * lb * kappa / (2.0 * t / snr).sqrt();
        let q_tail = normal_cdf(-z);
        let direct = std::f64::consts::PI
            * lb
            * (snr / (2.0 * t)).sqrt()
            * (2.0 * std::f64::consts::PI).sqrt()
            * (z * z / 2.0).exp()
            * q_tail;
        let got = coverage_cond_n_alpha4(t, lb, pa, snr, 1).unwrap();
        assert!((got - direct).abs() / direct < 1e-9, "{got} vs {direct}");
        // And the SNR -> infinity limit is the SIR geometric form 1/kappa.
        let sir = coverage_cond_n_alpha4(t, lb, pa, 1e18, 1).unwrap();
        assert!((sir - 1.0 / kappa).abs() < 1e-6, "{sir} vs {}", 1.0 / kappa);
    }

    #[test]
    fn alpha4_kappa_without_interference() {
        // p_a = 0 removes the interference inflation; the n=1 value then
        // exceeds any p_a > 0 value.
        let base = coverage_cond_n_alpha4(1.0, 1e-4, 0.0, 1e9, 1).unwrap();
        let loaded = coverage_cond_n_alpha4(1.0, 1e-4, 1.0, 1e9, 1).unwrap();
        assert!(base > loaded);
    }

    // -- overall coverage -------------------------------------------------------

    #[test]
    fn homnet_sir_all_on_collapses() {
        // theta irrelevant when p1 = pa = 1: value is 1/(1+rho).
        let r = rho_alpha4(1.0);
        let probs = ActivityProbs {
            active: 1.0,
            nearest: 1.0,
            non_nearest: 0.0,
        };
        assert!((overall_from_probs(&probs, r) - 1.0 / (1.0 + r)).abs() < 1e-15);
    }

    #[test]
    fn homnet_sir_frozen_value() {
        let v = coverage_homnet_sir(1.0, GAMMA, 0, 4.0, OccupancyModel::ExactGamma).unwrap();
        assert!((v - 0.5622).abs() < 1e-4, "{v}");
        assert!((v - 0.562196450049).abs() < 1e-10);
    }

    #[test]
    fn homnet_sir_equals_order_weighted_series() {
        // 500-term partial sum of (1 + p_a rho)^{-n} p_n.
        let r = rho_alpha4(1.0);
        for theta in [0u32, 5, 10, 19] {
            let probs = activity_probs(theta, GAMMA, OccupancyModel::ExactGamma).unwrap();
            let mut series = 0.0;
            for n in 1..=500u32 {
                series +=
                    (1.0 + probs.active * r).powi(-(n as i32)) * order_pmf(n, &probs).unwrap();
            }
            let closed =
                coverage_homnet_sir(1.0, GAMMA, theta, 4.0, OccupancyModel::ExactGamma).unwrap();
            assert!(
                (closed - series).abs() < 1e-9,
                "theta={theta}: {closed} vs {series}"
            );
        }
    }

    #[test]
    fn homnet_sir_monotone_decreasing_in_t() {
        let mut prev = 1.0;
        for i in 1..=20 {
            let t = i as f64 * 0.5;
            let v = coverage_homnet_sir(t, GAMMA, 10, 4.0, OccupancyModel::ExactGamma).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    // -- random baseline -----------------------------------------------------------

    #[test]
    fn random_q_one_equals_threshold_zero() {
        let a = coverage_random(1.0, GAMMA, 1.0, 4.0, OccupancyModel::ExactGamma).unwrap();
        let b = coverage_homnet_sir(1.0, GAMMA, 0, 4.0, OccupancyModel::ExactGamma).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn random_small_q_limit() {
        // q -> 0: almost every surviving BS is loaded, coverage -> 1/(1+rho).
        let v = coverage_random(1.0, GAMMA, 1e-4, 4.0, OccupancyModel::ExactGamma).unwrap();
        assert!((v - 1.0 / (1.0 + rho_alpha4(1.0))).abs() < 1e-9);
    }

    #[test]
    fn random_near_constant_over_q() {
        let vals: Vec<f64> = (0..=14)
            .map(|i| {
                coverage_random(
                    1.0,
                    GAMMA,
                    0.3 + 0.05 * i as f64,
                    4.0,
                    OccupancyModel::ExactGamma,
                )
                .unwrap()
            })
            .collect();
        let spread = vals.iter().cloned().fold(f64::MIN, f64::max)
            - vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.01, "spread {spread}");
    }

    #[test]
    fn random_rejects_zero_q() {
        assert!(coverage_random(1.0, GAMMA, 0.0, 4.0, OccupancyModel::ExactGamma).is_err());
    }

    // -- K-tier ------------------------------------------------------------------

    fn hetnet_spec(theta1: u32, theta2: u32) -> NetworkSpec {
        // Self-consistent two-tier scenario: P1 = 10 P2, user density such
        // that the tier-1 weighted load is exactly 10.
        let q1 = 1.0 / (1.0 + 10.0f64.sqrt());
        NetworkSpec {
            tiers: vec![
                TierSpec::new(1e-4, 10.0, theta1),
                TierSpec::new(1e-3, 1.0, theta2),
            ],
            user_density: 10.0 * 1e-4 / q1,
            pathloss_exponent: 4.0,
            noise_power: 0.0,
            target_sinr: 1.0,
        }
    }

    #[test]
    fn hetnet_single_tier_bit_identical_to_homnet() {
        let spec = NetworkSpec::homogeneous(1e-4, 1e-3, 1.0, 7, 4.0, 0.0, 1.0);
        let het = coverage_hetnet_sir(&spec, OccupancyModel::ExactGamma).unwrap();
        let hom = coverage_homnet_sir(1.0, 10.0, 7, 4.0, OccupancyModel::ExactGamma).unwrap();
        assert_eq!(het, hom);
    }

    #[test]
    fn hetnet_gamma_only_dependence() {
        // Doubling both densities leaves the SIR coverage bit-identical.
        let a = NetworkSpec::homogeneous(1e-4, 1e-3, 1.0, 7, 4.0, 0.0, 1.0);
        let b = NetworkSpec::homogeneous(2e-4, 2e-3, 1.0, 7, 4.0, 0.0, 1.0);
        assert_eq!(
            coverage_hetnet_sir(&a, OccupancyModel::ExactGamma).unwrap(),
            coverage_hetnet_sir(&b, OccupancyModel::ExactGamma).unwrap()
        );
    }

    #[test]
    fn hetnet_identical_tiers_merge() {
        // Two equal tiers behave as one tier at twice the density (the
        // load per BS halves).
        let two = NetworkSpec {
            tiers: vec![TierSpec::new(1e-4, 1.0, 5), TierSpec::new(1e-4, 1.0, 5)],
            user_density: 1e-3,
            pathloss_exponent: 4.0,
            noise_power: 0.0,
            target_sinr: 1.0,
        };
        let merged = coverage_homnet_sir(1.0, 5.0, 5, 4.0, OccupancyModel::ExactGamma).unwrap();
        let split = coverage_hetnet_sir(&two, OccupancyModel::ExactGamma).unwrap();
        assert!((split - merged).abs() < 1e-14);
    }

    #[test]
    fn hetnet_all_thresholds_zero() {
        let spec = hetnet_spec(0, 0);
        let (probs, _) = hetnet_activity_probs(&spec, OccupancyModel::ExactGamma).unwrap();
        assert_eq!(probs.nearest, 1.0);
        let v = coverage_hetnet_sir(&spec, OccupancyModel::ExactGamma).unwrap();
        assert!((v - 1.0 / (1.0 + probs.active * rho_alpha4(1.0))).abs() < 1e-14);
    }

    #[test]
    fn hetnet_averages_in_convex_hull() {
        let spec = hetnet_spec(10, 3);
        let ratios = derive_ratios(&spec);
        let (avg, _) = hetnet_activity_probs(&spec, OccupancyModel::ExactGamma).unwrap();
        let per: Vec<ActivityProbs> = spec
            .tiers
            .iter()
            .zip(&ratios.weighted_ratios)
            .map(|(t, &g)| activity_probs(t.threshold, g, OccupancyModel::ExactGamma).unwrap())
            .collect();
        let lo = per.iter().map(|p| p.active).fold(f64::MAX, f64::min);
        let hi = per.iter().map(|p| p.active).fold(f64::MIN, f64::max);
        assert!(avg.active >= lo - 1e-15 && avg.active <= hi + 1e-15);
    }

    #[test]
    fn hetnet_cond_n_reduces_and_bounds() {
        // K = 1 reduces to the single-tier conditional coverage.
        let single = NetworkSpec::homogeneous(1e-4, 1e-3, 1.0, 4, 4.0, 0.0, 1.0);
        let het =
            coverage_hetnet_cond_n(&single, SnrMode::Sir, 3, OccupancyModel::ExactGamma).unwrap();
        let probs = activity_probs(4, 10.0, OccupancyModel::ExactGamma).unwrap();
        let hom = coverage_cond_n(1.0, 4.0, 1e-4, probs.active, SnrMode::Sir, 3).unwrap();
        assert_eq!(het, hom);

        // SIR limit is tier-independent: equals (1 + p_a_avr rho)^{-n}.
        let spec = hetnet_spec(10, 3);
        let (avg, _) = hetnet_activity_probs(&spec, OccupancyModel::ExactGamma).unwrap();
        let v = coverage_hetnet_cond_n(&spec, SnrMode::Sir, 2, OccupancyModel::ExactGamma).unwrap();
        let expect = (1.0 + avg.active * rho_alpha4(1.0)).powi(-2);
        assert!((v - expect).abs() < 1e-12);

        // Finite SNR: a convex combination lies between the per-tier values.
        let snr = SnrMode::Snr(1e9);
        let v = coverage_hetnet_cond_n(&spec, snr, 2, OccupancyModel::ExactGamma).unwrap();
        let ratios = derive_ratios(&spec);
        let per: Vec<f64> = ratios
            .weighted_densities
            .iter()
            .map(|&l| coverage_cond_n_alpha4(1.0, l, avg.active, 1e9, 2).unwrap())
            .collect();
        let lo = per.iter().cloned().fold(f64::MAX, f64::min);
        let hi = per.iter().cloned().fold(f64::MIN, f64::max);
        assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
    }

    // -- nth distance pdf ------------------------------------------------------------

    #[test]
    fn nth_distance_nearest_neighbor_form() {
        let (r, lb) = (50.0, 1e-4);
        let got = nth_distance_pdf(r, 1, lb).unwrap();
        let direct =
            2.0 * std::f64::consts::PI * lb * r * (-lb * std::f64::consts::PI * r * r).exp();
        assert!((got - direct).abs() < 1e-15);
        assert!((got - 0.01432).abs() < 1e-5);
    }

    #[test]
    fn nth_distance_pdf_normalizes() {
        let spec = QuadratureSpec {
            absolute_tolerance: 1e-12,
            relative_tolerance: 1e-10,
            max_subdivisions: 400,
        };
        for n in 1..=6u32 {
            let total = integrate(
                |r| nth_distance_pdf(r, n, 1e-4).unwrap(),
                1e-9,
                f64::INFINITY,
                &spec,
            )
            .unwrap();
            assert!((total - 1.0).abs() < 1e-8, "n={n}: {total}");
        }
    }

    #[test]
    fn nth_distance_ccdf_matches_upper_gamma() {
        use crate::specialfn::regularized_upper_gamma;
        let (lb, n) = (1e-4, 4u32);
        for &r in &[30.0, 80.0, 150.0] {
            let mass = lb * std::f64::consts::PI * r * r;
            let ccdf_direct: f64 = (0..n)
                .map(|k| {
                    (-mass).exp() * mass.powi(k as i32) / (1..=k).map(|j| j as f64).product::<f64>()
                })
                .sum();
            let q = regularized_upper_gamma(n, mass).unwrap();
            assert!((ccdf_direct - q).abs() < 1e-12);
        }
    }
}
