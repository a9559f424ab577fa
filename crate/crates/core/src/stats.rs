//! Small order statistics shared by several extractors.

pub fn mean(values: &[f32]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64
}

pub fn mean_f64(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance.
pub fn variance_f64(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean_f64(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

/// Lower-middle order statistic; for odd counts the true median. Reorders `values`.
pub fn lower_median(values: &mut [f32]) -> f32 {
    assert!(!values.is_empty(), "median of empty slice");
    let mid = (values.len() - 1) / 2;
    *values.select_nth_unstable_by(mid, f32::total_cmp).1
}

/// Shannon entropy (natural log) of a probability vector; `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_median_picks_lower_middle() {
        assert_eq!(lower_median(&mut [4.0, 1.0, 3.0, 2.0]), 2.0);
        assert_eq!(lower_median(&mut [5.0, 1.0, 3.0]), 3.0);
        assert_eq!(lower_median(&mut [7.0]), 7.0);
    }

    proptest::proptest! {
        #[test]
        fn odd_median_is_an_element(mut v in proptest::collection::vec(-1e3f32..1e3, 1..40usize)) {
            if v.len() % 2 == 0 { v.pop(); }
            let orig = v.clone();
            let m = lower_median(&mut v);
            proptest::prop_assert!(orig.contains(&m));
            let below = orig.iter().filter(|&&x| x < m).count();
            let above = orig.iter().filter(|&&x| x > m).count();
            proptest::prop_assert!(below <= orig.len() / 2 && above <= orig.len() / 2);
        }
    }
}
