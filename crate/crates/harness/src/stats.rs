use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square statistic and its upper-tail p-value.
pub fn chi_square(observed: &[u64], probabilities: &[f64]) -> (f64, f64) {
    assert_eq!(observed.len(), probabilities.len());
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probabilities)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = (observed.len() - 1).max(1) as f64;
    let p_value = ChiSquared::new(dof).expect("positive dof").sf(stat);
    (stat, p_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_and_gross_misfit() {
        let (stat, p) = chi_square(&[50, 50], &[0.5, 0.5]);
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let (_, p) = chi_square(&[90, 10], &[0.5, 0.5]);
        assert!(p < 1e-10);
    }
}
