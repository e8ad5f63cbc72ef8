//! Distribution-comparison statistics for validating realizations against
//! the analytic laws: Kolmogorov-Smirnov distance, chi-square goodness of
//! fit (even degrees of freedom), and simple histograms.

use crate::specialfn::regularized_upper_gamma;

/// Kolmogorov-Smirnov statistic of `samples` against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    assert!(!samples.is_empty(), "ks_statistic needs samples");
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Pearson chi-square statistic over observed counts vs expected
/// probabilities (which must sum to ~1). Categories with zero expectation
/// must have zero observations.
pub fn chi_square_statistic(observed: &[u64], expected_probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected_probs.len());
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        let e = p * total as f64;
        if e > 0.0 {
            let d = o as f64 - e;
            stat += d * d / e;
        } else {
            assert_eq!(o, 0, "observation in a zero-probability category");
        }
    }
    stat
}

/// Survival p-value of a chi-square statistic with even `df`:
/// P(X² ≥ stat) = Q(df/2, stat/2). Odd degrees of freedom would need a
/// half-integer gamma, which this crate deliberately does not carry;
/// callers arrange even df.
pub fn chi_square_pvalue(stat: f64, df: u32) -> f64 {
    assert!(
        df >= 2 && df.is_multiple_of(2),
        "chi_square_pvalue requires even df >= 2"
    );
    regularized_upper_gamma(df / 2, 0.5 * stat).expect("valid order and argument")
}

/// Total variation distance between an observed histogram over
/// {0, 1, ..., len-1} and expected probabilities.
pub fn total_variation(observed: &[u64], expected_probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let mut tv = 0.0;
    let mut seen = 0.0;
    for (&o, &p) in observed.iter().zip(expected_probs) {
        tv += (o as f64 / total as f64 - p).abs();
        seen += p;
    }
    // Mass the expected law puts beyond the histogram range.
    0.5 * (tv + (1.0 - seen).max(0.0))
}

/// Equal-width histogram; returns (bin center, empirical density) rows.
pub fn histogram(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    assert!(bins > 0 && hi > lo);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        if x >= lo && x < hi {
            counts[((x - lo) / width) as usize] += 1;
        }
    }
    let norm = samples.len() as f64 * width;
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (lo + (i as f64 + 0.5) * width, c as f64 / norm))
        .collect()
}
