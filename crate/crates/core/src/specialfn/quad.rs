//! Adaptive Gauss quadrature on finite and semi-infinite intervals.
//!
//! Each segment is scored by comparing embedded 7-point and 15-point
//! Gauss-Legendre rules; the worst segment is bisected until the summed
//! error bound meets the tolerance or the subdivision budget runs out.
//! Nodes and weights are derived once at startup by Newton iteration on
//! the Legendre polynomials, so no tabulated constants are needed.
//!
//! A semi-infinite upper limit is handled by the substitution
//! t = (x − a)/(1 + x − a), mapping [a, ∞) onto [0, 1); the Gauss nodes
//! are interior points, so the t = 1 endpoint is never evaluated.

use std::sync::OnceLock;

use super::SpecialFnError;

/// Tolerances and budget for all integral evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub absolute_tolerance: f64,
    pub relative_tolerance: f64,
    pub max_subdivisions: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            absolute_tolerance: 1e-10,
            relative_tolerance: 1e-8,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureSpec {
    /// Check the invariants: positive tolerances, at least one subdivision.
    pub fn validate(&self) -> Result<(), SpecialFnError> {
        if !(self.absolute_tolerance > 0.0) || !(self.relative_tolerance > 0.0) {
            return Err(SpecialFnError::Domain("quadrature tolerances must be > 0"));
        }
        if self.max_subdivisions < 1 {
            return Err(SpecialFnError::Domain("max_subdivisions must be >= 1"));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] for a given point count,
/// computed by Newton iteration: node k starts from the Chebyshev guess
/// cos(pi (k - 1/4)/(n + 1/2)) and converges in a handful of steps.
fn gauss_rule(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = pj;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Nodes and weights of one Gauss-Legendre rule.
type GaussRule = (Vec<f64>, Vec<f64>);

fn rules() -> &'static (GaussRule, GaussRule) {
    static RULES: OnceLock<(GaussRule, GaussRule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_rule(7), gauss_rule(15)))
}

/// One segment's 15-point estimate and the |G15 - G7| error score.
fn eval_segment<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let ((n7, w7), (n15, w15)) = rules();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut g7 = 0.0;
    for (x, w) in n7.iter().zip(w7) {
        g7 += w * f(c + h * x);
    }
    let mut g15 = 0.0;
    for (x, w) in n15.iter().zip(w15) {
        g15 += w * f(c + h * x);
    }
    (h * g15, (h * (g15 - g7)).abs())
}

fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64, SpecialFnError> {
    let mut segments: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (val, err) = eval_segment(&f, a, b);
    segments.push((a, b, val, err));

    for _ in 0..spec.max_subdivisions {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let total_err: f64 = segments.iter().map(|s| s.3).sum();
        let tol = spec
            .absolute_tolerance
            .max(spec.relative_tolerance * total.abs());
        if total_err <= tol {
            return Ok(total);
        }
        // Bisect the worst-scoring segment.
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("segment list is never empty");
        let (sa, sb, _, _) = segments.swap_remove(worst);
        let mid = 0.5 * (sa + sb);
        let (lv, le) = eval_segment(&f, sa, mid);
        let (rv, re) = eval_segment(&f, mid, sb);
        segments.push((sa, mid, lv, le));
        segments.push((mid, sb, rv, re));
    }

    let total: f64 = segments.iter().map(|s| s.2).sum();
    let total_err: f64 = segments.iter().map(|s| s.3).sum();
    let tol = spec
        .absolute_tolerance
        .max(spec.relative_tolerance * total.abs());
    if total_err <= tol {
        Ok(total)
    } else {
        Err(SpecialFnError::NonConvergence {
            estimate: total,
            error_bound: total_err,
            requested: tol,
        })
    }
}

/// Integrate `f` from `a` to `b`, where `b` may be `f64::INFINITY`.
///
/// The integrand must be finite on the open interval; integrable endpoint
/// behavior is tolerated because no node lands on an endpoint.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64, SpecialFnError> {
    spec.validate()?;
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(SpecialFnError::Domain(
            "integration bounds must be finite (upper may be +infinity)",
        ));
    }
    if b.is_infinite() {
        if b < 0.0 {
            return Err(SpecialFnError::Domain("lower-infinite bounds unsupported"));
        }
        // x = a + t/(1-t), dx = dt/(1-t)^2. The nodes are interior, but
        // deep subdivision can round a node onto t = 1; an integrable
        // integrand contributes nothing there.
        return adaptive(
            move |t| {
                let om = 1.0 - t;
                if om <= 0.0 {
                    return 0.0;
                }
                f(a + t / om) / (om * om)
            },
            0.0,
            1.0,
            spec,
        );
    }
    if a == b {
        return Ok(0.0);
    }
    adaptive(f, a, b, spec)
}
