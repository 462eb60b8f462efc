//! Seasonal-naive baseline: repeat the value observed one season earlier.

use crate::features::{SplitSpec, TargetSeries};
use crate::{Error, Result};

pub const DEFAULT_SEASON: usize = 168;

/// Predicts test period j as the actual value at global period
/// train_periods + j - m. For m smaller than the test horizon this uses
/// actual history that extends into the test prefix (for m = 1 this is
/// the lag-1 naive forecast).
pub fn seasonal_naive(target: &TargetSeries, spec: &SplitSpec, season: usize) -> Result<Vec<f64>> {
    spec.validate_for(target.values.len())?;
    if season < 1 {
        return Err(Error::Config("season length must be >= 1".into()));
    }
    if spec.train_periods < season {
        return Err(Error::Shape(format!(
            "training history ({}) shorter than season length ({season})",
            spec.train_periods
        )));
    }
    Ok((0..spec.test_periods)
        .map(|j| target.values[spec.train_periods + j - season])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: Vec<f64>) -> TargetSeries {
        TargetSeries { app_id: "a".into(), values }
    }

    #[test]
    fn periodic_series_is_predicted_exactly() {
        let values: Vec<f64> = (0..672).map(|t| ((t % 168) as f64).sin().abs() * 100.0).collect();
        let target = series(values.clone());
        let spec = SplitSpec::default();
        let forecast = seasonal_naive(&target, &spec, 168).unwrap();
        for (j, v) in forecast.iter().enumerate() {
            assert_eq!(*v, values[504 + j]);
        }
    }

    #[test]
    fn lag_one_uses_previous_actual() {
        let values: Vec<f64> = (0..10).map(|t| t as f64).collect();
        let target = series(values);
        let spec = SplitSpec { train_periods: 7, test_periods: 3 };
        let forecast = seasonal_naive(&target, &spec, 1).unwrap();
        assert_eq!(forecast, vec![6.0, 7.0, 8.0]);
    }

    #[test]
    fn first_test_period_index_arithmetic() {
        let values: Vec<f64> = (0..672).map(|t| t as f64).collect();
        let target = series(values);
        let spec = SplitSpec::default();
        let forecast = seasonal_naive(&target, &spec, 168).unwrap();
        assert_eq!(forecast[0], 336.0);
    }

    #[test]
    fn train_shorter_than_season_is_error() {
        let target = series((0..200).map(|t| t as f64).collect());
        let spec = SplitSpec { train_periods: 100, test_periods: 100 };
        assert!(seasonal_naive(&target, &spec, 168).is_err());
    }
}
