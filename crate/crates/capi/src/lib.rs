//! C ABI for the cellcov coverage toolkit.
//!
//! Scenarios are built behind an opaque handle; every entry point returns
//! a [`CcStatus`] code and writes results through out-pointers, so the
//! surface binds cleanly from C, Python (ctypes/cffi), Julia, or Go. The
//! generated header lands in `include/cellcov.h` at build time.
//!
//! Thread safety: a `CcScenario` may be shared across threads for
//! read-only calls; mutation (`cc_scenario_add_tier`,
//! `cc_scenario_set_threshold`) must be externally serialized.

use std::os::raw::c_char;

use cellcov::analytic::{coverage_hetnet_sir, coverage_random, rho, AnalyticError};
use cellcov::model::{derive_ratios, NetworkSpec, OccupancyModel, TierSpec};
use cellcov::optimize::{optimal_thresholds_hetnet, optimal_thresholds_hetnet_closed};
use cellcov::sim::{estimate, EstimateMode, OnOffPolicy, Region, SimError};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = -1,
    /// An argument violated a documented precondition.
    InvalidArgument = -2,
    /// Numerical evaluation failed (quadrature or recurrence trouble).
    EvaluationFailed = -3,
    /// The Monte Carlo run aborted (too many discarded trials).
    SimulationAborted = -4,
}

/// Occupancy distribution selector, mirroring the library's models.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcOccupancyModel {
    /// Gamma-distributed cell sizes (shape 3.575); the accurate choice.
    ExactGamma = 0,
    /// Poisson approximation of the per-BS user count.
    PoissonApprox = 1,
    /// Normal approximation with continuity correction (CDF-only).
    NormalApprox = 2,
}

impl From<CcOccupancyModel> for OccupancyModel {
    fn from(m: CcOccupancyModel) -> Self {
        match m {
            CcOccupancyModel::ExactGamma => OccupancyModel::ExactGamma,
            CcOccupancyModel::PoissonApprox => OccupancyModel::PoissonApprox,
            CcOccupancyModel::NormalApprox => OccupancyModel::NormalApprox,
        }
    }
}

/// Opaque scenario handle: tiers, user density, propagation, target SINR.
pub struct CcScenario {
    spec: NetworkSpec,
}

fn status_of_analytic(e: &AnalyticError) -> CcStatus {
    match e {
        AnalyticError::Domain(_) | AnalyticError::PmfUnsupported => CcStatus::InvalidArgument,
        _ => CcStatus::EvaluationFailed,
    }
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Short static description of a status code; do not free.
#[no_mangle]
pub extern "C" fn cc_status_message(status: CcStatus) -> *const c_char {
    let msg: &'static str = match status {
        CcStatus::Ok => "ok\0",
        CcStatus::NullPointer => "null pointer argument\0",
        CcStatus::InvalidArgument => "invalid argument\0",
        CcStatus::EvaluationFailed => "numerical evaluation failed\0",
        CcStatus::SimulationAborted => "simulation aborted (excessive discards)\0",
    };
    msg.as_ptr() as *const c_char
}

/// Create a scenario with no tiers yet. Densities are per m², powers in
/// watts, the SINR target is linear, and `noise_power` 0 selects the
/// interference-limited regime. Returns null if a value is not finite.
/// Free with [`cc_scenario_free`].
#[no_mangle]
pub extern "C" fn cc_scenario_new(
    user_density: f64,
    pathloss_exponent: f64,
    noise_power: f64,
    target_sinr: f64,
) -> *mut CcScenario {
    if !(user_density.is_finite()
        && pathloss_exponent.is_finite()
        && noise_power.is_finite()
        && target_sinr.is_finite())
    {
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(CcScenario {
        spec: NetworkSpec {
            tiers: Vec::new(),
            user_density,
            pathloss_exponent,
            noise_power,
            target_sinr,
        },
    }))
}

/// Destroy a scenario created by [`cc_scenario_new`].
///
/// # Safety
/// `scenario` must be a pointer from `cc_scenario_new` not yet freed, or
/// null (a no-op).
#[no_mangle]
pub unsafe extern "C" fn cc_scenario_free(scenario: *mut CcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Append one tier (BS density per m², transmit power in watts, and its
/// user-count sleep threshold).
///
/// # Safety
/// `scenario` must be a valid handle with no concurrent access.
#[no_mangle]
pub unsafe extern "C" fn cc_scenario_add_tier(
    scenario: *mut CcScenario,
    bs_density: f64,
    tx_power: f64,
    threshold: u32,
) -> CcStatus {
    let Some(s) = scenario.as_mut() else {
        return CcStatus::NullPointer;
    };
    // NaN fails these, by construction.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(bs_density > 0.0) || !(tx_power > 0.0) {
        return CcStatus::InvalidArgument;
    }
    s.spec
        .tiers
        .push(TierSpec::new(bs_density, tx_power, threshold));
    CcStatus::Ok
}

/// Set one tier's user-count threshold.
///
/// # Safety
/// `scenario` must be a valid handle with no concurrent access.
#[no_mangle]
pub unsafe extern "C" fn cc_scenario_set_threshold(
    scenario: *mut CcScenario,
    tier_index: usize,
    threshold: u32,
) -> CcStatus {
    let Some(s) = scenario.as_mut() else {
        return CcStatus::NullPointer;
    };
    match s.spec.tiers.get_mut(tier_index) {
        Some(t) => {
            t.threshold = threshold;
            CcStatus::Ok
        }
        None => CcStatus::InvalidArgument,
    }
}

/// # Safety
/// `scenario` must be null or a live handle; the returned borrow is only
/// used within the calling entry point.
unsafe fn checked_spec<'a>(scenario: *const CcScenario) -> Result<&'a NetworkSpec, CcStatus> {
    let s = scenario.as_ref().ok_or(CcStatus::NullPointer)?;
    s.spec.validate().map_err(|_| CcStatus::InvalidArgument)?;
    Ok(&s.spec)
}

/// Interference integral ρ(T, α).
///
/// # Safety
/// `out` must point to writable memory for one f64.
#[no_mangle]
pub unsafe extern "C" fn cc_rho(
    target_sinr: f64,
    pathloss_exponent: f64,
    out: *mut f64,
) -> CcStatus {
    if out.is_null() {
        return CcStatus::NullPointer;
    }
    match rho(target_sinr, pathloss_exponent) {
        Ok(v) => {
            *out = v;
            CcStatus::Ok
        }
        Err(e) => status_of_analytic(&e),
    }
}

/// Overall interference-limited coverage probability of the scenario
/// under its per-tier thresholds (single-tier scenarios use the same
/// closed form).
///
/// # Safety
/// `scenario` must be a valid handle; `out` must point to one f64.
#[no_mangle]
pub unsafe extern "C" fn cc_coverage_sir(
    scenario: *const CcScenario,
    model: CcOccupancyModel,
    out: *mut f64,
) -> CcStatus {
    if out.is_null() {
        return CcStatus::NullPointer;
    }
    let spec = match checked_spec(scenario) {
        Ok(s) => s,
        Err(st) => return st,
    };
    match coverage_hetnet_sir(spec, model.into()) {
        Ok(v) => {
            *out = v;
            CcStatus::Ok
        }
        Err(e) => status_of_analytic(&e),
    }
}

/// Interference-limited coverage of the random on/off baseline operating
/// each BS with probability `q`; single-tier scenarios only.
///
/// # Safety
/// `scenario` must be a valid handle; `out` must point to one f64.
#[no_mangle]
pub unsafe extern "C" fn cc_coverage_random(
    scenario: *const CcScenario,
    q: f64,
    model: CcOccupancyModel,
    out: *mut f64,
) -> CcStatus {
    if out.is_null() {
        return CcStatus::NullPointer;
    }
    let spec = match checked_spec(scenario) {
        Ok(s) => s,
        Err(st) => return st,
    };
    if spec.tier_count() != 1 {
        return CcStatus::InvalidArgument;
    }
    match coverage_random(
        spec.target_sinr,
        spec.users_per_bs(),
        q,
        spec.pathloss_exponent,
        model.into(),
    ) {
        Ok(v) => {
            *out = v;
            CcStatus::Ok
        }
        Err(e) => status_of_analytic(&e),
    }
}

/// Closed-form coverage-maximizing thresholds: out[i] = ⌊γ̄ᵢ + 0.5⌋.
/// `out_len` must equal the tier count.
///
/// # Safety
/// `scenario` must be a valid handle; `out` must point to `out_len` u32s.
#[no_mangle]
pub unsafe extern "C" fn cc_optimal_thresholds_closed(
    scenario: *const CcScenario,
    out: *mut u32,
    out_len: usize,
) -> CcStatus {
    if out.is_null() {
        return CcStatus::NullPointer;
    }
    let spec = match checked_spec(scenario) {
        Ok(s) => s,
        Err(st) => return st,
    };
    if out_len != spec.tier_count() {
        return CcStatus::InvalidArgument;
    }
    let thetas = optimal_thresholds_hetnet_closed(spec);
    std::ptr::copy_nonoverlapping(thetas.as_ptr(), out, out_len);
    CcStatus::Ok
}

/// Exhaustive coverage-maximizing thresholds by per-tier coordinate
/// ascent over 0..=theta_max; also reports the achieved coverage.
///
/// # Safety
/// `scenario` must be a valid handle; `out` must point to `out_len` u32s
/// and `out_coverage` to one f64.
#[no_mangle]
pub unsafe extern "C" fn cc_optimal_thresholds_search(
    scenario: *const CcScenario,
    theta_max: u32,
    model: CcOccupancyModel,
    out: *mut u32,
    out_len: usize,
    out_coverage: *mut f64,
) -> CcStatus {
    if out.is_null() || out_coverage.is_null() {
        return CcStatus::NullPointer;
    }
    let spec = match checked_spec(scenario) {
        Ok(s) => s,
        Err(st) => return st,
    };
    if out_len != spec.tier_count() {
        return CcStatus::InvalidArgument;
    }
    match optimal_thresholds_hetnet(spec, theta_max, model.into()) {
        Ok(r) => {
            std::ptr::copy_nonoverlapping(r.thresholds.as_ptr(), out, out_len);
            *out_coverage = r.achieved_coverage;
            CcStatus::Ok
        }
        Err(e) => status_of_analytic(&e),
    }
}

/// Per-tier weighted mean loads γ̄ᵢ = λᵤ qᵢ/λᵢ — the quantities the
/// closed-form threshold rule rounds. `out_len` must equal the tier count.
///
/// # Safety
/// `scenario` must be a valid handle; `out` must point to `out_len` f64s.
#[no_mangle]
pub unsafe extern "C" fn cc_weighted_loads(
    scenario: *const CcScenario,
    out: *mut f64,
    out_len: usize,
) -> CcStatus {
    if out.is_null() {
        return CcStatus::NullPointer;
    }
    let spec = match checked_spec(scenario) {
        Ok(s) => s,
        Err(st) => return st,
    };
    if out_len != spec.tier_count() {
        return CcStatus::InvalidArgument;
    }
    let ratios = derive_ratios(spec);
    std::ptr::copy_nonoverlapping(ratios.weighted_ratios.as_ptr(), out, out_len);
    CcStatus::Ok
}

/// Seeded Monte Carlo estimate of the interference-limited coverage on a
/// `width` x `height` torus under the scenario's thresholds. Identical
/// (seed, trials) inputs produce identical results for any worker count.
///
/// # Safety
/// `scenario` must be a valid handle; `out_mean` and `out_stderr` must
/// each point to one f64.
#[no_mangle]
pub unsafe extern "C" fn cc_estimate_sir(
    scenario: *const CcScenario,
    width: f64,
    height: f64,
    trials: u32,
    master_seed: u64,
    out_mean: *mut f64,
    out_stderr: *mut f64,
) -> CcStatus {
    if out_mean.is_null() || out_stderr.is_null() {
        return CcStatus::NullPointer;
    }
    let spec = match checked_spec(scenario) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let region = Region::torus(width, height);
    let policy = OnOffPolicy::Threshold(spec.tiers.iter().map(|t| t.threshold).collect());
    match estimate(
        spec,
        &region,
        &policy,
        EstimateMode::Sir,
        trials,
        master_seed,
    ) {
        Ok(e) => {
            *out_mean = e.mean;
            *out_stderr = e.std_error;
            CcStatus::Ok
        }
        Err(SimError::ExcessiveDiscards { .. }) => CcStatus::SimulationAborted,
        Err(_) => CcStatus::InvalidArgument,
    }
}
