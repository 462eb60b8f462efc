//! Synthetic crowd-sourced trace generator.
//!
//! Produces traces with the qualitative structure of real mobile demand:
//! daily and weekly seasonality with morning and evening peaks, and
//! day-to-day peak magnitudes that vary irregularly. Generation is a pure
//! function of the config, seed included: per-user and per-app random
//! substreams are derived with splitmix64 and consumed by independent
//! ChaCha8 generators, so users can be generated in any order (or in
//! parallel) with identical output after canonical sorting.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::trace::{TileCoord, TimePeriod, Trace, TraceRecord};
use crate::{Error, Result};

pub const HOURS_PER_WEEK: u32 = 168;
/// Uplink volume as a fraction of downlink.
pub const UPLINK_FRACTION: f64 = 0.1;
/// Probability a user spends a period at their home tile.
pub const HOME_STAY_PROB: f64 = 0.8;
pub const SECONDARY_TILES: usize = 3;

/// Demand shape of one app: mean rate, seasonal multipliers, and the
/// spread of per-day peak magnitudes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppProfile {
    pub app_id: String,
    /// Mean bytes per subscribed user per hour, before seasonal weighting.
    pub base_rate: f64,
    /// 24 hour-of-day multipliers, mean 1.
    pub diurnal_weights: Vec<f64>,
    /// 7 day-of-week multipliers, mean 1.
    pub weekly_weights: Vec<f64>,
    /// Log-normal sigma of the per-(app, day) peak multiplier.
    pub peak_irregularity: f64,
    /// Fraction of the population subscribed to this app.
    pub user_fraction: f64,
}

impl AppProfile {
    pub fn validate(&self) -> Result<()> {
        let check_weights = |w: &[f64], len: usize, name: &str| -> Result<()> {
            if w.len() != len {
                return Err(Error::Config(format!(
                    "app {}: {} must have {} entries, got {}",
                    self.app_id, name, len, w.len()
                )));
            }
            if w.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::Config(format!("app {}: {} must be non-negative", self.app_id, name)));
            }
            let mean = w.iter().sum::<f64>() / len as f64;
            if (mean - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "app {}: {} must have mean 1 (got {})",
                    self.app_id, name, mean
                )));
            }
            Ok(())
        };
        check_weights(&self.diurnal_weights, 24, "diurnal_weights")?;
        check_weights(&self.weekly_weights, 7, "weekly_weights")?;
        if self.app_id.is_empty() {
            return Err(Error::Config("app_id must be non-empty".into()));
        }
        if !(self.base_rate.is_finite() && self.base_rate >= 0.0) {
            return Err(Error::Config(format!("app {}: base_rate must be non-negative", self.app_id)));
        }
        if !(self.peak_irregularity.is_finite() && self.peak_irregularity >= 0.0) {
            return Err(Error::Config(format!("app {}: peak_irregularity must be non-negative", self.app_id)));
        }
        if !(0.0..=1.0).contains(&self.user_fraction) {
            return Err(Error::Config(format!("app {}: user_fraction must be in [0,1]", self.app_id)));
        }
        Ok(())
    }
}

/// Normalizes a weight vector to mean 1. Panics if the sum is zero.
pub fn normalize_weights(raw: &[f64]) -> Vec<f64> {
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    assert!(mean > 0.0, "weights must have a positive sum");
    raw.iter().map(|w| w / mean).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_users: usize,
    pub n_cells: usize,
    pub grid_width: u32,
    pub grid_height: u32,
    #[serde(default = "default_weeks")]
    pub weeks: u32,
    pub apps: Vec<AppProfile>,
    /// Coefficient of variation of per-user-hour demand.
    #[serde(default)]
    pub noise_cv: f64,
    pub seed: u64,
}

fn default_weeks() -> u32 {
    4
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users < 1 {
            return Err(Error::Config("n_users must be >= 1".into()));
        }
        if self.n_cells < 1 {
            return Err(Error::Config("n_cells must be >= 1".into()));
        }
        if self.weeks < 1 {
            return Err(Error::Config("weeks must be >= 1".into()));
        }
        if self.grid_width < 1 || self.grid_height < 1 {
            return Err(Error::Config("grid dimensions must be >= 1".into()));
        }
        if self.apps.is_empty() {
            return Err(Error::Config("at least one app profile is required".into()));
        }
        if !(self.noise_cv.is_finite() && self.noise_cv >= 0.0) {
            return Err(Error::Config("noise_cv must be non-negative".into()));
        }
        for app in &self.apps {
            app.validate()?;
        }
        Ok(())
    }

    pub fn duration_periods(&self) -> u32 {
        self.weeks * HOURS_PER_WEEK
    }
}

/// Three app profiles with morning/evening diurnal peaks and a weekend
/// bump, loosely shaped like video, social, and streaming demand.
pub fn default_profiles() -> Vec<AppProfile> {
    let evening_heavy = normalize_weights(&[
        0.3, 0.2, 0.15, 0.1, 0.1, 0.15, 0.3, 0.6, 1.0, 1.1, 1.0, 1.0, 1.1, 1.0, 0.9, 0.9, 1.0, 1.2,
        1.5, 1.9, 2.2, 2.1, 1.4, 0.7,
    ]);
    let commute_peaks = normalize_weights(&[
        0.2, 0.15, 0.1, 0.1, 0.15, 0.4, 0.9, 1.6, 1.8, 1.2, 1.0, 1.0, 1.2, 1.1, 1.0, 1.0, 1.2, 1.7,
        1.9, 1.5, 1.2, 1.0, 0.7, 0.4,
    ]);
    let night_streaming = normalize_weights(&[
        0.5, 0.3, 0.2, 0.1, 0.1, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.8, 0.8, 0.9, 1.0, 1.3,
        1.8, 2.4, 2.8, 2.6, 1.9, 1.0,
    ]);
    let weekday_heavy = normalize_weights(&[1.05, 1.05, 1.05, 1.05, 1.0, 0.9, 0.9]);
    let weekend_heavy = normalize_weights(&[0.9, 0.9, 0.9, 0.95, 1.05, 1.2, 1.1]);
    let flat_week = normalize_weights(&[1.0, 1.0, 1.0, 1.0, 1.05, 1.0, 0.95]);
    vec![
        AppProfile {
            app_id: "video".into(),
            base_rate: 6.0e6,
            diurnal_weights: evening_heavy,
            weekly_weights: weekend_heavy.clone(),
            peak_irregularity: 0.25,
            user_fraction: 0.9,
        },
        AppProfile {
            app_id: "social".into(),
            base_rate: 2.0e6,
            diurnal_weights: commute_peaks,
            weekly_weights: weekday_heavy,
            peak_irregularity: 0.15,
            user_fraction: 0.95,
        },
        AppProfile {
            app_id: "streaming".into(),
            base_rate: 8.0e6,
            diurnal_weights: night_streaming,
            weekly_weights: flat_week,
            peak_irregularity: 0.2,
            user_fraction: 0.6,
        },
    ]
}

/// A ready-to-run default config: desk-scale, three apps, four weeks.
pub fn default_config(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        n_users: 50,
        n_cells: 9,
        grid_width: 24,
        grid_height: 24,
        weeks: 4,
        apps: default_profiles(),
        noise_cv: 0.3,
        seed,
    }
}

/// Expected bytes/user/hour for an app at a given period.
///
/// Deterministic seasonal core: base rate scaled by the hour-of-day and
/// day-of-week weights and the caller-supplied per-day multiplier.
pub fn demand_intensity(profile: &AppProfile, period: TimePeriod, day_multiplier: f64) -> f64 {
    let hour = (period.0 % 24) as usize;
    let dow = ((period.0 / 24) % 7) as usize;
    profile.base_rate * profile.diurnal_weights[hour] * profile.weekly_weights[dow] * day_multiplier
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives an independent substream from the master seed and a stream tag.
fn substream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag.wrapping_add(index.wrapping_mul(0x5851_f42d_4c95_7f2d)))))
}

const STREAM_USER: u64 = 0x75_73_65_72; // "user"
const STREAM_PEAK: u64 = 0x70_65_61_6b; // "peak"

/// Draws from a log-normal with the given mean and coefficient of variation.
fn lognormal_with_mean_cv<R: Rng>(rng: &mut R, mean: f64, cv: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let sigma2 = (1.0 + cv * cv).ln();
    let mu = mean.ln() - sigma2 / 2.0;
    let normal = Normal::new(mu, sigma2.sqrt()).expect("finite lognormal params");
    normal.sample(rng).exp()
}

/// Mean-1 log-normal multiplier with spread sigma.
fn peak_multiplier<R: Rng>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    let normal = Normal::new(-sigma * sigma / 2.0, sigma).expect("finite peak params");
    normal.sample(rng).exp()
}

/// Maps a tile to its cell. Cells partition the grid into contiguous
/// rectangles: n_cells = rows x cols with rows the largest divisor
/// not exceeding sqrt(n_cells).
pub fn cell_of_tile(tile: TileCoord, grid_w: u32, grid_h: u32, n_cells: usize) -> usize {
    let mut rows = (n_cells as f64).sqrt().floor() as usize;
    while rows > 1 && n_cells % rows != 0 {
        rows -= 1;
    }
    let cols = n_cells / rows;
    let cy = ((tile.y as u64 * rows as u64) / grid_h as u64) as usize;
    let cx = ((tile.x as u64 * cols as u64) / grid_w as u64) as usize;
    cy.min(rows - 1) * cols + cx.min(cols - 1)
}

/// Generates a full synthetic trace. Pure function of the config: the
/// same config (seed included) yields a bit-identical trace.
pub fn generate_trace(config: &GeneratorConfig) -> Result<Trace> {
    config.validate()?;
    let duration = config.duration_periods();
    let n_days = (duration / 24) as usize;

    // One multiplier per (app, day); this is what makes peak magnitudes
    // inconsistent across days.
    let day_multipliers: Vec<Vec<f64>> = config
        .apps
        .iter()
        .enumerate()
        .map(|(app_idx, app)| {
            let mut rng = substream(config.seed, STREAM_PEAK, app_idx as u64);
            (0..n_days).map(|_| peak_multiplier(&mut rng, app.peak_irregularity)).collect()
        })
        .collect();

    let mut records = Vec::new();
    for user_idx in 0..config.n_users {
        let mut rng = substream(config.seed, STREAM_USER, user_idx as u64);
        let user_id = format!("u{user_idx:05}");
        let home = TileCoord {
            x: rng.gen_range(0..config.grid_width),
            y: rng.gen_range(0..config.grid_height),
        };
        let secondary: Vec<TileCoord> = (0..SECONDARY_TILES)
            .map(|_| TileCoord {
                x: rng.gen_range(0..config.grid_width),
                y: rng.gen_range(0..config.grid_height),
            })
            .collect();
        let subscribed: Vec<bool> = config.apps.iter().map(|a| rng.gen::<f64>() < a.user_fraction).collect();

        for period in 0..duration {
            let tile = if rng.gen::<f64>() < HOME_STAY_PROB {
                home
            } else {
                secondary[rng.gen_range(0..SECONDARY_TILES)]
            };
            let cell_idx = cell_of_tile(tile, config.grid_width, config.grid_height, config.n_cells);
            let cell_id = format!("c{cell_idx:03}");
            let day = (period / 24) as usize;
            for (app_idx, app) in config.apps.iter().enumerate() {
                if !subscribed[app_idx] {
                    continue;
                }
                let mean = demand_intensity(app, TimePeriod(period), day_multipliers[app_idx][day]);
                let dl = if config.noise_cv == 0.0 {
                    mean.round()
                } else {
                    lognormal_with_mean_cv(&mut rng, mean, config.noise_cv).round()
                };
                let dl_bytes = dl.max(0.0) as u64;
                let ul_bytes = (dl_bytes as f64 * UPLINK_FRACTION).round() as u64;
                records.push(TraceRecord {
                    period: TimePeriod(period),
                    user_id: user_id.clone(),
                    cell_id: cell_id.clone(),
                    tile,
                    app_id: app.app_id.clone(),
                    dl_bytes,
                    ul_bytes,
                });
            }
        }
    }
    Ok(Trace::from_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::write_trace;

    fn flat_profile(app_id: &str, base_rate: f64, user_fraction: f64) -> AppProfile {
        AppProfile {
            app_id: app_id.into(),
            base_rate,
            diurnal_weights: vec![1.0; 24],
            weekly_weights: vec![1.0; 7],
            peak_irregularity: 0.0,
            user_fraction,
        }
    }

    fn small_config(seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            n_users: 10,
            n_cells: 4,
            grid_width: 8,
            grid_height: 8,
            weeks: 1,
            apps: vec![flat_profile("a1", 1000.0, 1.0)],
            noise_cv: 0.0,
            seed,
        }
    }

    #[test]
    fn intensity_flat_profile() {
        let p = flat_profile("a", 1000.0, 1.0);
        for period in [0, 13, 100, 500] {
            assert_eq!(demand_intensity(&p, TimePeriod(period), 1.0), 1000.0);
        }
    }

    #[test]
    fn intensity_hour_weight() {
        let mut diurnal = vec![1.0; 24];
        diurnal[8] = 2.0;
        let diurnal = normalize_weights(&diurnal);
        let scale = diurnal[8];
        let p = AppProfile {
            app_id: "a".into(),
            base_rate: 1000.0,
            diurnal_weights: diurnal,
            weekly_weights: vec![1.0; 7],
            peak_irregularity: 0.0,
            user_fraction: 1.0,
        };
        let got = demand_intensity(&p, TimePeriod(8 + 48), 1.0);
        assert!((got - 1000.0 * scale).abs() < 1e-9);
    }

    #[test]
    fn intensity_zero_day() {
        let mut weekly = vec![7.0 / 6.0; 7];
        weekly[6] = 0.0;
        let p = AppProfile {
            app_id: "a".into(),
            base_rate: 1000.0,
            diurnal_weights: vec![1.0; 24],
            weekly_weights: weekly,
            peak_irregularity: 0.0,
            user_fraction: 1.0,
        };
        for hour in 0..24 {
            assert_eq!(demand_intensity(&p, TimePeriod(6 * 24 + hour), 1.0), 0.0);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = small_config(42);
        let t1 = generate_trace(&cfg).unwrap();
        let t2 = generate_trace(&cfg).unwrap();
        let mut b1 = Vec::new();
        let mut b2 = Vec::new();
        write_trace(&t1, &mut b1).unwrap();
        write_trace(&t2, &mut b2).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn degenerate_noise_gives_exact_base_rate() {
        let cfg = small_config(7);
        let t = generate_trace(&cfg).unwrap();
        assert!(!t.records().is_empty());
        for r in t.records() {
            assert_eq!(r.dl_bytes, 1000);
            assert_eq!(r.ul_bytes, 100);
        }
    }

    #[test]
    fn seasonality_recovered_exactly_without_noise() {
        let mut diurnal = vec![1.0; 24];
        diurnal[20] = 3.0;
        let cfg = GeneratorConfig {
            n_users: 5,
            n_cells: 2,
            grid_width: 4,
            grid_height: 4,
            weeks: 1,
            apps: vec![AppProfile {
                app_id: "a1".into(),
                base_rate: 1000.0,
                diurnal_weights: normalize_weights(&diurnal),
                weekly_weights: vec![1.0; 7],
                peak_irregularity: 0.0,
                user_fraction: 1.0,
            }],
            noise_cv: 0.0,
            seed: 3,
        };
        let t = generate_trace(&cfg).unwrap();
        let mut per_period = vec![0u64; cfg.duration_periods() as usize];
        for r in t.records() {
            per_period[r.period.0 as usize] += r.dl_bytes;
        }
        for (period, &total) in per_period.iter().enumerate() {
            let expected = 5.0
                * demand_intensity(&cfg.apps[0], TimePeriod(period as u32), 1.0).round();
            assert_eq!(total as f64, expected, "period {period}");
        }
    }

    #[test]
    fn monte_carlo_mean_within_five_percent() {
        let cfg = GeneratorConfig {
            n_users: 100,
            n_cells: 4,
            grid_width: 8,
            grid_height: 8,
            weeks: 4,
            apps: vec![flat_profile("a1", 10_000.0, 1.0)],
            noise_cv: 0.1,
            seed: 11,
        };
        let t = generate_trace(&cfg).unwrap();
        assert!(t.records().len() >= 100 * 672);
        let duration = cfg.duration_periods() as usize;
        let mut per_period = vec![0.0f64; duration];
        for r in t.records() {
            per_period[r.period.0 as usize] += r.dl_bytes as f64;
        }
        let expected = 100.0 * 10_000.0;
        let mean = per_period.iter().sum::<f64>() / duration as f64;
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "mean {mean} vs expected {expected}"
        );
    }

    fn autocorr(series: &[f64], lag: usize) -> f64 {
        let n = series.len();
        let mean = series.iter().sum::<f64>() / n as f64;
        let var: f64 = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        let cov: f64 = (lag..n).map(|t| (series[t] - mean) * (series[t - lag] - mean)).sum();
        cov / var
    }

    #[test]
    fn weekly_autocorrelation_dominates() {
        let cfg = default_config(123);
        let t = generate_trace(&cfg).unwrap();
        let duration = cfg.duration_periods() as usize;
        for app in &cfg.apps {
            let mut series = vec![0.0f64; duration];
            for r in t.records() {
                if r.app_id == app.app_id {
                    series[r.period.0 as usize] += (r.dl_bytes + r.ul_bytes) as f64;
                }
            }
            let ac168 = autocorr(&series, 168);
            let ac100 = autocorr(&series, 100);
            assert!(ac168 > ac100, "app {}: ac168={ac168} ac100={ac100}", app.app_id);
        }
    }

    #[test]
    fn generated_records_satisfy_invariants() {
        let cfg = default_config(5);
        let t = generate_trace(&cfg).unwrap();
        let duration = cfg.duration_periods();
        for r in t.records() {
            assert!(r.period.0 < duration);
            assert!(r.tile.x < cfg.grid_width && r.tile.y < cfg.grid_height);
            assert!(!r.user_id.is_empty() && !r.cell_id.is_empty() && !r.app_id.is_empty());
        }
        assert!(t.meta().n_cells <= cfg.n_cells);
        assert_eq!(t.meta().n_apps, cfg.apps.len());
        assert_eq!(t.meta().duration_periods, duration);
    }

    #[test]
    fn cell_partition_covers_grid() {
        for n_cells in [1usize, 2, 3, 4, 9, 10, 12] {
            let mut seen = std::collections::BTreeSet::new();
            for x in 0..24 {
                for y in 0..24 {
                    let c = cell_of_tile(TileCoord { x, y }, 24, 24, n_cells);
                    assert!(c < n_cells, "n_cells={n_cells}");
                    seen.insert(c);
                }
            }
            assert_eq!(seen.len(), n_cells, "n_cells={n_cells}");
        }
    }
}
