//! Provisioning metrics and scenario comparison.
//!
//! Three metrics score a per-app forecast against the actual demand over
//! the test window: the RMSE of the prediction, the unused capability
//! `w` (over-provisioned capacity summed over periods), and the scale-up
//! count `u` (periods where actual demand strictly exceeds the forecast,
//! so the slice must be expanded). `u_frac = u/n` and `w_frac = w / sum(y)`
//! are the normalized forms reports use.

use serde::{Deserialize, Serialize};

use crate::features::{SplitSpec, ViewKind};
use crate::{Error, Result};

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::Shape("metric inputs must be non-empty".into()));
    }
    if y.len() != yhat.len() {
        return Err(Error::Shape(format!("length mismatch: {} vs {}", y.len(), yhat.len())));
    }
    Ok(())
}

/// Root mean squared prediction error: sqrt((1/n) sum (y_j - yhat_j)^2).
pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let n = y.len() as f64;
    let sum: f64 = y.iter().zip(yhat).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok((sum / n).sqrt())
}

/// Unused capability: w = sum_j max(0, yhat_j - y_j).
pub fn unused_capability(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, p)| (p - a).max(0.0)).sum())
}

/// Scale-up events: u = sum_j 1{y_j > yhat_j}. Strict inequality; a tie
/// is not a scale-up.
pub fn scale_up_count(y: &[f64], yhat: &[f64]) -> Result<usize> {
    check_pair(y, yhat)?;
    Ok(y.iter().zip(yhat).filter(|(a, p)| a > p).count())
}

/// Metrics for one (app, scenario) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalEntry {
    pub app_id: String,
    pub view: ViewKind,
    pub n: usize,
    pub rmse: f64,
    pub w: f64,
    /// w / sum(y); absent when the actual total is zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_frac: Option<f64>,
    pub u: usize,
    pub u_frac: f64,
}

/// Computes all metrics for one forecast.
pub fn evaluate(app_id: &str, view: ViewKind, y: &[f64], yhat: &[f64]) -> Result<EvalEntry> {
    let rmse = rmse(y, yhat)?;
    let w = unused_capability(y, yhat)?;
    let u = scale_up_count(y, yhat)?;
    let n = y.len();
    let total: f64 = y.iter().sum();
    let w_frac = if total > 0.0 { Some(w / total) } else { None };
    Ok(EvalEntry {
        app_id: app_id.to_string(),
        view,
        n,
        rmse,
        w,
        w_frac,
        u,
        u_frac: u as f64 / n as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub split: SplitSpec,
    pub engine: String,
    pub seed: u64,
    pub demand_mode: String,
    /// (app, view, stage, message) for pipeline stages that failed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<FailureNote>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureNote {
    pub app_id: String,
    pub view: ViewKind,
    pub stage: String,
    pub message: String,
}

/// One entry per (app, scenario) pair; pairs are unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub meta: ReportMeta,
    pub entries: Vec<EvalEntry>,
}

impl EvalReport {
    /// Sorts entries by (app, view) with view order mno < vertical < joint
    /// and checks pair uniqueness.
    pub fn finalize(mut self) -> Result<EvalReport> {
        self.entries
            .sort_by(|a, b| (&a.app_id, a.view).cmp(&(&b.app_id, b.view)));
        for pair in self.entries.windows(2) {
            if pair[0].app_id == pair[1].app_id && pair[0].view == pair[1].view {
                return Err(Error::Shape(format!(
                    "duplicate (app, view) pair: ({}, {})",
                    pair[0].app_id, pair[0].view
                )));
            }
        }
        Ok(self)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Emits the comparison table and the (w, u) scatter data.
///
/// Table CSV: `app,view,n,rmse,w,w_frac,u,u_frac`, one row per (app, view),
/// sorted by app then view. Scatter CSV: `app,view,w,u`.
pub fn compare_scenarios(report: &EvalReport) -> Result<(String, String)> {
    if report.entries.is_empty() {
        return Err(Error::Shape("report has no entries".into()));
    }
    let mut entries = report.entries.clone();
    entries.sort_by(|a, b| (&a.app_id, a.view).cmp(&(&b.app_id, b.view)));

    let mut table = String::from("app,view,n,rmse,w,w_frac,u,u_frac\n");
    let mut scatter = String::from("app,view,w,u\n");
    for e in &entries {
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.app_id,
            e.view,
            e.n,
            e.rmse,
            e.w,
            fmt_opt(e.w_frac),
            e.u,
            e.u_frac
        ));
        scatter.push_str(&format!("{},{},{},{}\n", e.app_id, e.view, e.w, e.u));
    }
    Ok((table, scatter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const Y: [f64; 3] = [4.0, 4.0, 4.0];
    const YHAT: [f64; 3] = [5.0, 3.0, 6.0];

    #[test]
    fn rmse_identity_and_hand_case() {
        let v = vec![1.0, 2.0, 3.0];
        assert_eq!(rmse(&v, &v).unwrap(), 0.0);
        let got = rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap();
        assert!((got - (4.0f64 / 3.0).sqrt()).abs() < 1e-9);
        assert!((got - 1.1547005).abs() < 1e-6);
    }

    #[test]
    fn unused_capability_hand_cases() {
        assert_eq!(unused_capability(&[5.0, 5.0], &[4.0, 5.0]).unwrap(), 0.0);
        assert_eq!(unused_capability(&Y, &YHAT).unwrap(), 3.0);
        // adding c to an already over-provisioned forecast adds n*c
        let y = [1.0, 2.0, 3.0];
        let yhat = [2.0, 3.0, 4.0];
        let w0 = unused_capability(&y, &yhat).unwrap();
        let bumped: Vec<f64> = yhat.iter().map(|v| v + 0.5).collect();
        let w1 = unused_capability(&y, &bumped).unwrap();
        assert!((w1 - (w0 + 3.0 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn scale_up_hand_cases_and_tie_convention() {
        assert_eq!(scale_up_count(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0);
        assert_eq!(scale_up_count(&Y, &YHAT).unwrap(), 1);
        assert_eq!(scale_up_count(&[3.0], &[4.0]).unwrap(), 0);
    }

    #[test]
    fn evaluate_combines_metrics() {
        let e = evaluate("app", ViewKind::Mno, &Y, &YHAT).unwrap();
        assert!((e.rmse - 2.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(e.w, 3.0);
        assert_eq!(e.u, 1);
        assert!((e.u_frac - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(e.w_frac, Some(0.25));
    }

    #[test]
    fn evaluate_perfect_forecast() {
        let y = vec![2.0, 4.0];
        let e = evaluate("app", ViewKind::Joint, &y, &y).unwrap();
        assert_eq!((e.rmse, e.w, e.u), (0.0, 0.0, 0));
    }

    #[test]
    fn evaluate_zero_actual_total_has_no_w_frac() {
        let e = evaluate("app", ViewKind::Mno, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(e.w_frac, None);
        let json = serde_json::to_string(&e).unwrap();
        assert!(!json.contains("w_frac"));
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmse(&[], &[]).is_err());
        assert!(evaluate("a", ViewKind::Mno, &[1.0], &[1.0, 2.0]).is_err());
    }

    fn report_with(entries: Vec<EvalEntry>) -> EvalReport {
        EvalReport {
            meta: ReportMeta {
                split: SplitSpec::default(),
                engine: "lstm".into(),
                seed: 0,
                demand_mode: "dl+ul".into(),
                failures: vec![],
            },
            entries,
        }
    }

    #[test]
    fn compare_cardinality_ordering_and_schema() {
        let mut entries = Vec::new();
        for app in ["b_app", "a_app", "c_app"] {
            for view in [ViewKind::Joint, ViewKind::Mno, ViewKind::Vertical] {
                entries.push(evaluate(app, view, &Y, &YHAT).unwrap());
            }
        }
        let report = report_with(entries).finalize().unwrap();
        let (table, scatter) = compare_scenarios(&report).unwrap();
        let rows: Vec<&str> = table.lines().collect();
        assert_eq!(rows.len(), 10); // header + 9
        assert_eq!(rows[0], "app,view,n,rmse,w,w_frac,u,u_frac");
        assert!(rows[1].starts_with("a_app,mno,"));
        assert!(rows[2].starts_with("a_app,vertical,"));
        assert!(rows[3].starts_with("a_app,joint,"));
        assert!(rows[4].starts_with("b_app,mno,"));
        assert_eq!(scatter.lines().next().unwrap(), "app,view,w,u");
        assert_eq!(scatter.lines().count(), 10);
    }

    #[test]
    fn duplicate_pairs_rejected() {
        let e = evaluate("a", ViewKind::Mno, &Y, &YHAT).unwrap();
        let report = report_with(vec![e.clone(), e]);
        assert!(report.finalize().is_err());
    }

    fn brute_force(y: &[f64], yhat: &[f64]) -> (f64, f64, usize) {
        let mut sq = 0.0;
        let mut w = 0.0;
        let mut u = 0;
        for j in 0..y.len() {
            let d = y[j] - yhat[j];
            sq += d * d;
            if yhat[j] - y[j] > 0.0 {
                w += yhat[j] - y[j];
            }
            if y[j] > yhat[j] {
                u += 1;
            }
        }
        ((sq / y.len() as f64).sqrt(), w, u)
    }

    proptest! {
        #[test]
        fn metrics_match_brute_force(
            pair in proptest::collection::vec((0.0f64..1e6, 0.0f64..1e6), 1..200)
        ) {
            let y: Vec<f64> = pair.iter().map(|p| p.0).collect();
            let yhat: Vec<f64> = pair.iter().map(|p| p.1).collect();
            let (r, w, u) = brute_force(&y, &yhat);
            prop_assert!((rmse(&y, &yhat).unwrap() - r).abs() <= 1e-9 * r.max(1.0));
            prop_assert!((unused_capability(&y, &yhat).unwrap() - w).abs() <= 1e-9 * w.max(1.0));
            prop_assert_eq!(scale_up_count(&y, &yhat).unwrap(), u);
        }

        #[test]
        fn decomposition_identity(
            pair in proptest::collection::vec((0.0f64..1e6, 0.0f64..1e6), 1..100)
        ) {
            let y: Vec<f64> = pair.iter().map(|p| p.0).collect();
            let yhat: Vec<f64> = pair.iter().map(|p| p.1).collect();
            let w = unused_capability(&y, &yhat).unwrap();
            let under: f64 = y.iter().zip(&yhat).map(|(a, p)| (a - p).max(0.0)).sum();
            let net: f64 = yhat.iter().zip(&y).map(|(p, a)| p - a).sum();
            prop_assert!((net - (w - under)).abs() <= 1e-6);
            if scale_up_count(&y, &yhat).unwrap() == 0 {
                prop_assert!((net - w).abs() <= 1e-6);
            }
        }

        #[test]
        fn positive_scale_invariance(
            pair in proptest::collection::vec((0.0f64..1e3, 0.0f64..1e3), 1..100),
            c in 0.001f64..1000.0
        ) {
            let y: Vec<f64> = pair.iter().map(|p| p.0).collect();
            let yhat: Vec<f64> = pair.iter().map(|p| p.1).collect();
            let cy: Vec<f64> = y.iter().map(|v| c * v).collect();
            let cyhat: Vec<f64> = yhat.iter().map(|v| c * v).collect();
            prop_assert_eq!(
                scale_up_count(&y, &yhat).unwrap(),
                scale_up_count(&cy, &cyhat).unwrap()
            );
            let r = rmse(&y, &yhat).unwrap();
            let rc = rmse(&cy, &cyhat).unwrap();
            prop_assert!((rc - c * r).abs() <= 1e-9 * rc.max(1.0));
            let w = unused_capability(&y, &yhat).unwrap();
            let wc = unused_capability(&cy, &cyhat).unwrap();
            prop_assert!((wc - c * w).abs() <= 1e-9 * wc.max(1.0));
        }

        #[test]
        fn raising_a_forecast_is_monotone(
            pair in proptest::collection::vec((0.0f64..1e3, 0.0f64..1e3), 1..50),
            j in 0usize..50,
            delta in 0.0f64..100.0
        ) {
            let j = j % pair.len();
            let y: Vec<f64> = pair.iter().map(|p| p.0).collect();
            let mut yhat: Vec<f64> = pair.iter().map(|p| p.1).collect();
            let u0 = scale_up_count(&y, &yhat).unwrap();
            let w0 = unused_capability(&y, &yhat).unwrap();
            yhat[j] += delta;
            prop_assert!(scale_up_count(&y, &yhat).unwrap() <= u0);
            prop_assert!(unused_capability(&y, &yhat).unwrap() >= w0 - 1e-12);
        }
    }
}
