//! Parabolic cylinder function D₋ₙ(z) for nonpositive integer order.
//!
//! The α = 4 coverage expressions only ever need small negative orders, so
//! the evaluation is anchored on the two closed forms
//!
//!   D₀(z)  = e^{−z²/4}
//!   D₋₁(z) = e^{z²/4} √(2π) Q(z),   Q = standard normal tail,
//!
//! and extended by the three-term recurrence
//! D_{v+1}(z) − z D_v(z) + v D_{v−1}(z) = 0 in whichever direction is
//! numerically stable. D₋ₙ is the minimal solution for growing n when
//! z > 0, so large 2z√n demands the backward (Miller) sweep normalized on
//! D₀ and validated against the D₋₁ closed form; otherwise the plain
//! forward sweep from the anchors is accurate.
//!
//! Internally everything is computed as the scaled value
//! e^{z²/4} D₋ₙ(z), which stays representable where the bare function
//! underflows.

use super::quad::{integrate, QuadratureSpec};
use super::{erfcx, ln_gamma, normal_cdf, SpecialFnError};

const SQRT_HALF_PI: f64 = 1.253_314_137_315_500_3;

/// Forward/backward crossover: forward recurrence loses about e^{2z√n}
/// of precision, so it is only used while that factor stays near 1e6.
const FORWARD_LIMIT: f64 = 14.0;

/// Relative residual allowed between the Miller-normalized D₋₁ and its
/// closed form before the result is declared untrustworthy.
const RESIDUAL_LIMIT: f64 = 1e-8;

/// Orders beyond this are cross-checked against the integral
/// representation by quadrature.
const QUADRATURE_CHECK_ORDER: u32 = 50;

/// Scaled anchor e^{z²/4} D₋₁(z) = e^{z²/2} √(2π) Q(z).
fn scaled_d_minus_one(z: f64) -> f64 {
    if z >= 0.0 {
        SQRT_HALF_PI * erfcx(z * std::f64::consts::FRAC_1_SQRT_2)
    } else {
        // Q(z) = Φ(-z); the e^{z²/2} factor overflows for z below about
        // -38, far outside the coverage formulas' reach.
        (z * z / 2.0).exp() * (2.0 * SQRT_HALF_PI) * normal_cdf(-z)
    }
}

/// Forward sweep from the anchors: stable when 2z√n is small or z ≤ 0.
fn scaled_forward(n: u32, z: f64) -> f64 {
    let mut prev = 1.0; // e^{z²/4} D₀
    let mut cur = scaled_d_minus_one(z);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        // D_{-(k+1)} = (D_{-(k-1)} - z D_{-k}) / k
        let next = (prev - z * cur) / k as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Miller backward sweep for z > 0: recur toward lower order from trial
/// values far above n, normalize on D₀ = 1 (scaled), and report the
/// relative residual against the D₋₁ closed form.
fn scaled_miller(n: u32, z: f64) -> (f64, f64) {
    // Start high enough that the trial seed's contamination decays by
    // ~1e18: the solution ratio grows like e^{2z(√N0 − √n)}.
    let start = ((n as f64).sqrt() + 20.0 / z).powi(2).ceil() as u32 + 10;
    let mut above = 0.0_f64; // trial value at order -(k+1)
    let mut at = 1e-280_f64; // trial value at order -k
    let mut kept = 0.0_f64;
    for k in (1..=start).rev() {
        // D_{-(k-1)} = z D_{-k} + k D_{-(k+1)}
        let below = z * at + k as f64 * above;
        if k == n {
            kept = at;
        }
        above = at;
        at = below;
        if at > 1e250 {
            above *= 1e-250;
            at *= 1e-250;
            kept *= 1e-250;
        }
    }
    // `at` is now the trial D₀, `above` the trial D₋₁.
    let scale = 1.0 / at;
    let d1 = scaled_d_minus_one(z);
    let residual = (above * scale - d1).abs() / d1;
    (kept * scale, residual)
}

/// Scaled value e^{z²/4} D₋ₙ(z); the workhorse behind both the public
/// function and the α = 4 coverage formula, which needs exactly this
/// scaling to avoid underflow.
pub(crate) fn parabolic_cylinder_d_scaled(n: u32, z: f64) -> Result<f64, SpecialFnError> {
    if n > 200 {
        return Err(SpecialFnError::Domain(
            "parabolic cylinder order must satisfy |order| <= 200",
        ));
    }
    if !z.is_finite() {
        return Err(SpecialFnError::Domain(
            "parabolic cylinder argument must be finite",
        ));
    }
    if n == 0 {
        return Ok(1.0);
    }
    if n == 1 {
        return Ok(scaled_d_minus_one(z));
    }
    let value = if z <= 0.0 || 2.0 * z * (n as f64).sqrt() <= FORWARD_LIMIT {
        scaled_forward(n, z)
    } else {
        let (value, residual) = scaled_miller(n, z);
        if residual > RESIDUAL_LIMIT {
            return Err(SpecialFnError::PrecisionLoss { residual });
        }
        value
    };
    if n > QUADRATURE_CHECK_ORDER {
        let reference = scaled_integral(n, z)?;
        let rel = (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
        if rel > 1e-6 {
            return Err(SpecialFnError::PrecisionLoss { residual: rel });
        }
    }
    Ok(value)
}

/// Integral representation, scaled:
/// e^{z²/4} D₋ₙ(z) = (1/Γ(n)) ∫₀^∞ t^{n−1} e^{−t²/2 − zt} dt,
/// evaluated in log space so large orders stay in range.
pub(crate) fn scaled_integral(n: u32, z: f64) -> Result<f64, SpecialFnError> {
    let lg = ln_gamma(n as f64);
    let nm1 = (n - 1) as f64;
    let spec = QuadratureSpec {
        absolute_tolerance: 1e-300,
        relative_tolerance: 1e-10,
        max_subdivisions: 400,
    };
    integrate(
        move |t| {
            if t <= 0.0 {
                return 0.0;
            }
            (nm1 * t.ln() - 0.5 * t * t - z * t - lg).exp()
        },
        0.0,
        f64::INFINITY,
        &spec,
    )
}

/// Parabolic cylinder function D_v(z) for v ∈ {0, −1, −2, …, −200}.
pub fn parabolic_cylinder_d(order: i32, z: f64) -> Result<f64, SpecialFnError> {
    if order > 0 {
        return Err(SpecialFnError::Domain(
            "parabolic cylinder order must be a nonpositive integer",
        ));
    }
    let n = order.unsigned_abs();
    Ok((-z * z / 4.0).exp() * parabolic_cylinder_d_scaled(n, z)?)
}
