//! Fisher's method for combining p-values.
//!
//! For `K` independent p-values the statistic `-2 * sum(ln p_k)` is
//! chi-squared with `2K` degrees of freedom. With an even number of degrees of
//! freedom the survival function has the closed form
//!
//! ```text
//! S(x; 2K) = exp(-x/2) * sum_{j=0}^{K-1} (x/2)^j / j!
//! ```
//!
//! which is evaluated here term by term in log space.

use crate::error::{Error, Result};

/// `P(chi2_{2k} >= x)` for `k >= 1` and `x >= 0`.
pub fn chi2_sf_even(x: f64, k: usize) -> f64 {
    assert!(k >= 1, "degrees of freedom must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    let half = x / 2.0;
    let ln_half = half.ln();
    let mut ln_fact = 0.0;
    let mut sum = 0.0;
    for j in 0..k {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        sum += (j as f64 * ln_half - ln_fact - half).exp();
    }
    sum.min(1.0)
}

/// `-2 * sum(ln p_k)`.
pub fn fisher_statistic(pvalues: &[f64]) -> Result<f64> {
    if pvalues.is_empty() {
        return Err(Error::invalid("Fisher's method needs at least one p-value"));
    }
    let mut stat = 0.0;
    for (k, &p) in pvalues.iter().enumerate() {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::invalid(format!(
                "p-value {k} is {p}, must lie in (0, 1]"
            )));
        }
        stat -= 2.0 * p.ln();
    }
    Ok(stat)
}

/// Combined p-value `P(chi2_{2K} >= -2 * sum(ln p_k))`.
///
/// Only valid as a p-value when the inputs are independent.
pub fn fisher_combine(pvalues: &[f64]) -> Result<f64> {
    let stat = fisher_statistic(pvalues)?;
    Ok(chi2_sf_even(stat, pvalues.len()))
}
