//! Dispersive decay: `r(t) = ‖φₜ‖_{W^{1,∞}} (1 + t^{3/2})` should stay
//! bounded above and below on a localized run.

use serde::Serialize;

use crate::dynamics::RunReport;

#[derive(Debug, Clone, Serialize)]
pub struct DispersiveSeries {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub window: (f64, f64),
    /// `max r / min r` over samples inside the window.
    pub ratio: f64,
    pub warning: Option<String>,
}

pub fn dispersive_ratio(report: &RunReport, window: (f64, f64)) -> DispersiveSeries {
    let t: Vec<f64> = report.samples.iter().map(|s| s.t).collect();
    let r: Vec<f64> = report
        .samples
        .iter()
        .map(|s| s.w1inf * (1.0 + s.t.max(0.0).powf(1.5)))
        .collect();
    let eps = 1e-9 * window.1.abs().max(1.0);
    let inside: Vec<f64> = t
        .iter()
        .zip(&r)
        .filter(|(t, _)| **t >= window.0 - eps && **t <= window.1 + eps)
        .map(|(_, r)| *r)
        .collect();
    let max = inside.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = inside.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if inside.is_empty() || min <= 0.0 { f64::NAN } else { max / min };
    let mut warning = None;
    if report.truncation_suspect {
        warning = Some("trajectory reached the box boundary; ratio may reflect truncation".into());
    } else if inside.is_empty() {
        warning = Some("no samples inside the requested window".into());
    }
    DispersiveSeries {
        t,
        r,
        window,
        ratio,
        warning,
    }
}
