//! Stakeholder-specific feature matrices, targets, split, and scaling.
//!
//! The operator sees per-cell aggregate demand and user counts but no app
//! identities; a vertical sees only its own app's demand, users, and
//! history at (aggregated) tile granularity; the joint view concatenates
//! both. All builders are order-independent in the input records.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::trace::{Trace, TraceRecord};
use crate::{Error, Result};

/// Which byte counters make up "demand".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DemandMode {
    /// Downlink only.
    #[serde(rename = "dl")]
    Dl,
    /// Downlink plus uplink (the slice carries both). Default.
    #[default]
    #[serde(rename = "dl+ul")]
    DlUl,
}

impl DemandMode {
    pub fn bytes_of(&self, r: &TraceRecord) -> u64 {
        match self {
            DemandMode::Dl => r.dl_bytes,
            DemandMode::DlUl => r.dl_bytes + r.ul_bytes,
        }
    }
}

impl FromStr for DemandMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dl" => Ok(DemandMode::Dl),
            "dl+ul" | "dlul" => Ok(DemandMode::DlUl),
            other => Err(Error::Config(format!("unknown demand mode `{other}` (expected dl or dl+ul)"))),
        }
    }
}

impl fmt::Display for DemandMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemandMode::Dl => write!(f, "dl"),
            DemandMode::DlUl => write!(f, "dl+ul"),
        }
    }
}

/// The stakeholder whose data a forecast is based on.
/// Report ordering is Mno < Vertical < Joint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViewKind {
    #[serde(rename = "mno")]
    Mno,
    #[serde(rename = "vertical")]
    Vertical,
    #[serde(rename = "joint")]
    Joint,
}

impl FromStr for ViewKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mno" => Ok(ViewKind::Mno),
            "vertical" => Ok(ViewKind::Vertical),
            "joint" => Ok(ViewKind::Joint),
            other => Err(Error::Config(format!("unknown view `{other}` (expected mno, vertical, or joint)"))),
        }
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViewKind::Mno => write!(f, "mno"),
            ViewKind::Vertical => write!(f, "vertical"),
            ViewKind::Joint => write!(f, "joint"),
        }
    }
}

/// A stakeholder view selector; vertical and joint views are app-specific.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StakeholderView {
    pub kind: ViewKind,
    pub app_id: Option<String>,
}

impl StakeholderView {
    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.app_id) {
            (ViewKind::Mno, _) => Ok(()),
            (_, Some(_)) => Ok(()),
            (kind, None) => Err(Error::Config(format!("view {kind} requires an app id"))),
        }
    }
}

/// T x F matrix of named feature columns, one row per period.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub column_names: Vec<String>,
    /// Row-major, `values.len()` = T, each row has F entries.
    pub values: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_names.iter().position(|c| c == name)?;
        Some(self.values.iter().map(|row| row[idx]).collect())
    }
}

/// Network-wide per-period demand of one app; the forecast target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSeries {
    pub app_id: String,
    pub values: Vec<f64>,
}

/// Train/test split along the time axis; no shuffling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_periods: usize,
    pub test_periods: usize,
}

impl Default for SplitSpec {
    /// Three weeks of training, one week of test.
    fn default() -> Self {
        SplitSpec { train_periods: 504, test_periods: 168 }
    }
}

impl SplitSpec {
    pub fn total(&self) -> usize {
        self.train_periods + self.test_periods
    }

    pub fn validate_for(&self, total_periods: usize) -> Result<()> {
        if self.train_periods < 1 || self.test_periods < 1 {
            return Err(Error::Config("split parts must both be >= 1".into()));
        }
        if self.total() != total_periods {
            return Err(Error::Shape(format!(
                "split {}:{} does not cover {} periods",
                self.train_periods, self.test_periods, total_periods
            )));
        }
        Ok(())
    }
}

impl FromStr for SplitSpec {
    type Err = Error;
    /// Parses "504:168".
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("bad split `{s}` (expected TRAIN:TEST)")))?;
        let train_periods =
            a.parse().map_err(|e| Error::Config(format!("bad split train part `{a}`: {e}")))?;
        let test_periods =
            b.parse().map_err(|e| Error::Config(format!("bad split test part `{b}`: {e}")))?;
        Ok(SplitSpec { train_periods, test_periods })
    }
}

fn sorted_apps(trace: &Trace) -> Vec<String> {
    let set: BTreeSet<&str> = trace.records().iter().map(|r| r.app_id.as_str()).collect();
    set.into_iter().map(String::from).collect()
}

fn require_app(trace: &Trace, app: &str) -> Result<()> {
    if trace.records().iter().any(|r| r.app_id == app) {
        Ok(())
    } else {
        Err(Error::UnknownApp(app.to_string()))
    }
}

/// Per-cell demand and distinct-user-count columns, one pair per cell.
///
/// App identities never appear: the operator cannot see which apps its
/// users run. Columns are `cell_<id>_demand`, `cell_<id>_users` with
/// cells in sorted id order; F = 2 x n_cells.
pub fn mno_features(trace: &Trace, mode: DemandMode) -> FeatureMatrix {
    let duration = trace.duration() as usize;
    let cells: Vec<String> = {
        let set: BTreeSet<&str> = trace.records().iter().map(|r| r.cell_id.as_str()).collect();
        set.into_iter().map(String::from).collect()
    };
    let cell_idx: BTreeMap<&str, usize> =
        cells.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();

    let mut demand = vec![vec![0.0f64; cells.len()]; duration];
    let mut users: Vec<Vec<BTreeSet<&str>>> = vec![vec![BTreeSet::new(); cells.len()]; duration];
    for r in trace.records() {
        let t = r.period.0 as usize;
        let c = cell_idx[r.cell_id.as_str()];
        demand[t][c] += mode.bytes_of(r) as f64;
        users[t][c].insert(r.user_id.as_str());
    }

    let mut column_names = Vec::with_capacity(2 * cells.len());
    for c in &cells {
        column_names.push(format!("cell_{c}_demand"));
        column_names.push(format!("cell_{c}_users"));
    }
    let values = (0..duration)
        .map(|t| {
            let mut row = Vec::with_capacity(2 * cells.len());
            for c in 0..cells.len() {
                row.push(demand[t][c]);
                row.push(users[t][c].len() as f64);
            }
            row
        })
        .collect();
    FeatureMatrix { column_names, values }
}

/// Per-super-tile demand and user counts for one app, plus a cumulative
/// traffic-history column.
///
/// `agg` x `agg` grid tiles form one super-tile; grid dimensions are
/// taken from the largest tile coordinates observed in the trace.
/// `history[t]` is the app's total demand from period 0 through t-1.
/// F = 2 x n_supertiles + 1.
pub fn vertical_features(trace: &Trace, app: &str, agg: u32, mode: DemandMode) -> Result<FeatureMatrix> {
    if agg < 1 {
        return Err(Error::Config("tile aggregation factor must be >= 1".into()));
    }
    require_app(trace, app)?;
    let duration = trace.duration() as usize;
    let (grid_w, grid_h) = trace
        .records()
        .iter()
        .fold((0u32, 0u32), |(w, h), r| (w.max(r.tile.x + 1), h.max(r.tile.y + 1)));
    let sw = grid_w.div_ceil(agg).max(1) as usize;
    let sh = grid_h.div_ceil(agg).max(1) as usize;
    let n_super = sw * sh;

    let mut demand = vec![vec![0.0f64; n_super]; duration];
    let mut users: Vec<Vec<BTreeSet<&str>>> = vec![vec![BTreeSet::new(); n_super]; duration];
    let mut app_total = vec![0.0f64; duration];
    for r in trace.records() {
        if r.app_id != app {
            continue;
        }
        let t = r.period.0 as usize;
        let s = (r.tile.y / agg) as usize * sw + (r.tile.x / agg) as usize;
        demand[t][s] += mode.bytes_of(r) as f64;
        users[t][s].insert(r.user_id.as_str());
        app_total[t] += mode.bytes_of(r) as f64;
    }

    let mut column_names = Vec::with_capacity(2 * n_super + 1);
    for s in 0..n_super {
        column_names.push(format!("tile_{s}_demand"));
        column_names.push(format!("tile_{s}_users"));
    }
    column_names.push("history".to_string());

    let mut cumulative = 0.0;
    let values = (0..duration)
        .map(|t| {
            let mut row = Vec::with_capacity(2 * n_super + 1);
            for s in 0..n_super {
                row.push(demand[t][s]);
                row.push(users[t][s].len() as f64);
            }
            row.push(cumulative);
            cumulative += app_total[t];
            row
        })
        .collect();
    Ok(FeatureMatrix { column_names, values })
}

/// Column-wise concatenation, operator columns first.
pub fn joint_features(mno: &FeatureMatrix, vert: &FeatureMatrix) -> Result<FeatureMatrix> {
    if mno.n_rows() != vert.n_rows() {
        return Err(Error::Shape(format!(
            "row-count mismatch: {} vs {}",
            mno.n_rows(),
            vert.n_rows()
        )));
    }
    let column_names = mno
        .column_names
        .iter()
        .chain(vert.column_names.iter())
        .cloned()
        .collect();
    let values = mno
        .values
        .iter()
        .zip(&vert.values)
        .map(|(a, b)| a.iter().chain(b.iter()).copied().collect())
        .collect();
    Ok(FeatureMatrix { column_names, values })
}

/// Network-wide per-period demand of one app.
pub fn target_series(trace: &Trace, app: &str, mode: DemandMode) -> Result<TargetSeries> {
    require_app(trace, app)?;
    let mut values = vec![0.0f64; trace.duration() as usize];
    for r in trace.records() {
        if r.app_id == app {
            values[r.period.0 as usize] += mode.bytes_of(r) as f64;
        }
    }
    Ok(TargetSeries { app_id: app.to_string(), values })
}

/// The sorted distinct app ids of a trace, and the top-k by total demand.
pub fn apps_by_traffic(trace: &Trace, mode: DemandMode) -> Vec<(String, u64)> {
    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    for r in trace.records() {
        *totals.entry(r.app_id.as_str()).or_insert(0) += mode.bytes_of(r);
    }
    let mut out: Vec<(String, u64)> = totals.into_iter().map(|(a, v)| (a.to_string(), v)).collect();
    // descending by traffic, app id breaks ties
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

pub fn app_ids(trace: &Trace) -> Vec<String> {
    sorted_apps(trace)
}

/// Time-ordered split of features and target into train and test parts.
pub fn split(
    features: &FeatureMatrix,
    target: &TargetSeries,
    spec: &SplitSpec,
) -> Result<(FeatureMatrix, Vec<f64>, FeatureMatrix, Vec<f64>)> {
    let t_total = features.n_rows();
    if target.values.len() != t_total {
        return Err(Error::Shape(format!(
            "feature rows {} vs target length {}",
            t_total,
            target.values.len()
        )));
    }
    spec.validate_for(t_total)?;
    let k = spec.train_periods;
    let train = FeatureMatrix {
        column_names: features.column_names.clone(),
        values: features.values[..k].to_vec(),
    };
    let test = FeatureMatrix {
        column_names: features.column_names.clone(),
        values: features.values[k..].to_vec(),
    };
    Ok((train, target.values[..k].to_vec(), test, target.values[k..].to_vec()))
}

/// Per-column affine transform (x - mean) / std, fit on training data
/// only. Population standard deviation; constant columns map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    pub fn fit(train: &FeatureMatrix) -> Result<Scaler> {
        Self::fit_columns(&train.values)
    }

    pub fn fit_columns(rows: &[Vec<f64>]) -> Result<Scaler> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Shape("cannot fit scaler on an empty matrix".into()));
        }
        let f = rows[0].len();
        let mut means = vec![0.0f64; f];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut vars = vec![0.0f64; f];
        for row in rows {
            for ((var, v), m) in vars.iter_mut().zip(row).zip(&means) {
                *var += (v - m) * (v - m);
            }
        }
        let stds = vars.iter().map(|v| (v / n as f64).sqrt()).collect();
        Ok(Scaler { means, stds })
    }

    /// Fits a single-column scaler over a vector (used for the target).
    pub fn fit_vector(values: &[f64]) -> Result<Scaler> {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Self::fit_columns(&rows)
    }

    pub fn apply(&self, m: &FeatureMatrix) -> FeatureMatrix {
        FeatureMatrix {
            column_names: m.column_names.clone(),
            values: m.values.iter().map(|row| self.apply_row(row)).collect(),
        }
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (&m, &s))| if s == 0.0 { 0.0 } else { (v - m) / s })
            .collect()
    }

    pub fn apply_scalar(&self, v: f64) -> f64 {
        if self.stds[0] == 0.0 {
            0.0
        } else {
            (v - self.means[0]) / self.stds[0]
        }
    }

    pub fn inverse_scalar(&self, v: f64) -> f64 {
        v * self.stds[0] + self.means[0]
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (&m, &s))| v * s + m)
            .collect()
    }
}
