//! Node impurity and the impurity decrease of a binary split.

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

/// `1 - sum p_j^2` for a probability vector.
pub fn gini_impurity(proportions: &[f64]) -> Result<f64> {
    if proportions.is_empty() || proportions.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution(format!("{proportions:?}")));
    }
    let total: f64 = proportions.iter().sum();
    if (total - 1.0).abs() > TOL {
        return Err(Error::InvalidDistribution(format!("proportions sum to {total}")));
    }
    Ok(1.0 - proportions.iter().map(|p| p * p).sum::<f64>())
}

/// Gini impurity of raw class counts; zero for an empty node.
pub(crate) fn gini_from_counts(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

/// `i_parent - (p_left i_left + p_right i_right)`.
pub fn gini_gain(i_parent: f64, i_left: f64, i_right: f64, p_left: f64, p_right: f64) -> Result<f64> {
    if p_left < 0.0 || p_right < 0.0 || (p_left + p_right - 1.0).abs() > TOL {
        return Err(Error::InvalidWeights(format!("p_left {p_left} + p_right {p_right} != 1")));
    }
    for i in [i_parent, i_left, i_right] {
        if !(0.0..1.0).contains(&i) {
            return Err(Error::InvalidWeights(format!("impurity {i} outside [0, 1)")));
        }
    }
    Ok(i_parent - (p_left * i_left + p_right * i_right))
}
