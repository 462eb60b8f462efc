//! Additive Holt-Winters (triple exponential smoothing) baseline.
//!
//! Level/trend are initialized from the first two seasons, seasonal
//! components from the first season's deviations; the recurrences then
//! run from the second season onward:
//! ```text
//! l_t = alpha (y_t - s_{t-m}) + (1 - alpha)(l_{t-1} + b_{t-1})
//! b_t = beta (l_t - l_{t-1}) + (1 - beta) b_{t-1}
//! s_t = gamma (y_t - l_t) + (1 - gamma) s_{t-m}
//! ```
//! The h-step forecast is l + h b + the matching seasonal, clamped at 0.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HwModel {
    pub level: f64,
    pub trend: f64,
    /// The last m seasonal components, in forecast order: `seasonals[(h-1) % m]`
    /// is applied to the h-step-ahead forecast.
    pub seasonals: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl HwModel {
    pub fn season_len(&self) -> usize {
        self.seasonals.len()
    }

    /// Forecasts `horizon` periods past the end of the fitted series.
    pub fn forecast(&self, horizon: usize) -> Vec<f64> {
        let m = self.season_len();
        (1..=horizon)
            .map(|h| (self.level + h as f64 * self.trend + self.seasonals[(h - 1) % m]).max(0.0))
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("slicecast-hw v1\n");
        s.push_str(&format!("{} {} {} {}\n", self.season_len(), self.alpha, self.beta, self.gamma));
        s.push_str(&format!("{} {}\n", self.level, self.trend));
        s.push_str(
            &self.seasonals.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
        );
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<HwModel> {
        let bad = |msg: &str| Error::Model(msg.to_string());
        let mut lines = text.lines();
        if lines.next() != Some("slicecast-hw v1") {
            return Err(bad("expected header `slicecast-hw v1`"));
        }
        let head: Vec<f64> = lines
            .next()
            .ok_or_else(|| bad("missing parameter line"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad parameter line")))
            .collect::<Result<_>>()?;
        let [m, alpha, beta, gamma] = head[..] else {
            return Err(bad("parameter line must be `m alpha beta gamma`"));
        };
        let state: Vec<f64> = lines
            .next()
            .ok_or_else(|| bad("missing state line"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad state line")))
            .collect::<Result<_>>()?;
        let [level, trend] = state[..] else {
            return Err(bad("state line must be `level trend`"));
        };
        let seasonals: Vec<f64> = lines
            .next()
            .ok_or_else(|| bad("missing seasonal line"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad seasonal line")))
            .collect::<Result<_>>()?;
        if seasonals.len() != m as usize {
            return Err(bad("seasonal count inconsistent with m"));
        }
        Ok(HwModel { level, trend, seasonals, alpha, beta, gamma })
    }
}

/// Fits an additive Holt-Winters model on a training series.
pub fn holt_winters_fit(train: &[f64], m: usize, alpha: f64, beta: f64, gamma: f64) -> Result<HwModel> {
    if m < 2 {
        return Err(Error::Config("season length must be >= 2".into()));
    }
    for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Config(format!("{name} must be in [0, 1], got {v}")));
        }
    }
    let t_len = train.len();
    if t_len < 2 * m {
        return Err(Error::Shape(format!(
            "training series of {t_len} periods is too short for season length {m} (need >= {})",
            2 * m
        )));
    }

    let season1_mean = train[..m].iter().sum::<f64>() / m as f64;
    let season2_mean = train[m..2 * m].iter().sum::<f64>() / m as f64;
    let mut level = season1_mean;
    let mut trend = (season2_mean - season1_mean) / m as f64;
    // seasonal state indexed by t; first season seeds s_0..s_{m-1}
    let mut seasonals: Vec<f64> = train[..m].iter().map(|y| y - season1_mean).collect();

    for t in m..t_len {
        let y = train[t];
        let s_prev = seasonals[t - m];
        let level_prev = level;
        level = alpha * (y - s_prev) + (1.0 - alpha) * (level_prev + trend);
        trend = beta * (level - level_prev) + (1.0 - beta) * trend;
        seasonals.push(gamma * (y - level) + (1.0 - gamma) * s_prev);
    }
    let ring = seasonals[t_len - m..].to_vec();
    Ok(HwModel { level, trend, seasonals: ring, alpha, beta, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_forecasts_constant() {
        let train = vec![7.5; 60];
        let model = holt_winters_fit(&train, 12, 0.3, 0.1, 0.2).unwrap();
        assert!((model.level - 7.5).abs() < 1e-9);
        assert!(model.trend.abs() < 1e-9);
        for s in &model.seasonals {
            assert!(s.abs() < 1e-9);
        }
        for v in model.forecast(24) {
            assert!((v - 7.5).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_series_with_zero_seasonals_is_exact() {
        // Forecast formula check on a hand-built state: level a + b(T-1),
        // trend b, zero seasonals => h-step forecast a + b(T-1+h).
        let (a, b, t_last) = (5.0, 0.25, 99.0);
        let model = HwModel {
            level: a + b * t_last,
            trend: b,
            seasonals: vec![0.0; 4],
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.0,
        };
        for (h, v) in model.forecast(10).iter().enumerate() {
            let expected = a + b * (t_last + (h + 1) as f64);
            assert!((v - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn deterministic_daily_season_is_learned() {
        // m = 24 seasonal, no noise, no trend: one-week forecast error well
        // under 1% of the amplitude.
        let m = 24;
        let pattern: Vec<f64> =
            (0..m).map(|h| 100.0 + 50.0 * (h as f64 * std::f64::consts::TAU / m as f64).sin()).collect();
        let train: Vec<f64> = (0..504).map(|t| pattern[t % m]).collect();
        let model = holt_winters_fit(&train, m, 0.2, 0.05, 0.3).unwrap();
        let forecast = model.forecast(168);
        let amplitude = 100.0; // max - min of the pattern
        let mse: f64 = forecast
            .iter()
            .enumerate()
            .map(|(h, v)| {
                let actual = pattern[(504 + h) % m];
                (v - actual).powi(2)
            })
            .sum::<f64>()
            / 168.0;
        let rmse = mse.sqrt();
        assert!(rmse < 0.01 * amplitude, "rmse {rmse}");
    }

    #[test]
    fn short_training_series_is_error() {
        assert!(holt_winters_fit(&[1.0; 40], 24, 0.2, 0.1, 0.1).is_err());
        assert!(holt_winters_fit(&[1.0; 48], 24, 0.2, 0.1, 0.1).is_ok());
    }

    #[test]
    fn forecast_clamps_at_zero() {
        let model = HwModel {
            level: 1.0,
            trend: -2.0,
            seasonals: vec![0.0; 2],
            alpha: 0.5,
            beta: 0.5,
            gamma: 0.5,
        };
        let f = model.forecast(3);
        assert_eq!(f, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn model_text_round_trip() {
        let model = HwModel {
            level: 123.456,
            trend: -0.75,
            seasonals: vec![1.5, -2.25, 0.75],
            alpha: 0.2,
            beta: 0.05,
            gamma: 0.3,
        };
        assert_eq!(HwModel::from_text(&model.to_text()).unwrap(), model);
    }
}
