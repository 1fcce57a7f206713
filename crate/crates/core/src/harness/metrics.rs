//! Summary statistics of a run log.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::harness::log::RunLog;
use crate::math::{angle_between, Vec5};

/// Tolerance used to decide that an actuator sits on a position limit.
pub const SATURATION_TOL: f64 = 1e-6;

const PAIRS: [(&str, &str, &str); 8] = [
    ("u_c", "u_c", "u_c_cmd"),
    ("w_c", "w_c", "w_c_cmd"),
    ("psi_dot", "psi_dot", "psi_dot_cmd"),
    ("u_ref", "u", "u_ref"),
    ("w_ref", "w", "w_ref"),
    ("p_ref", "p", "p_ref"),
    ("q_ref", "q", "q_ref"),
    ("r_ref", "r", "r_ref"),
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackingError {
    pub rms: f64,
    pub max: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rows: usize,
    pub duration: f64,
    pub tracking: BTreeMap<String, TrackingError>,
    /// Angle between commanded and achieved pseudo-control rates per row.
    #[serde(skip)]
    pub angle: Vec<f64>,
    pub angle_max: f64,
    pub angle_rms: f64,
    /// Seconds spent on a position limit, per actuator column.
    pub saturation: BTreeMap<String, f64>,
    /// Integral of the hedge norm over the run.
    pub pch_activity: f64,
    pub alloc_c_min: f64,
}

fn rows_of(log: &RunLog, name: &str) -> Vec<f64> {
    log.column(name).unwrap_or_else(|| vec![0.0; log.rows.len()])
}

fn vec5(log: &RunLog, prefix: &str) -> Vec<Vec5> {
    let cols: Vec<Vec<f64>> = ["l", "m", "n", "x", "z"]
        .iter()
        .map(|n| rows_of(log, &format!("{prefix}_{n}")))
        .collect();
    (0..log.rows.len())
        .map(|i| Vec5::from_fn(|k, _| cols[k][i]))
        .collect()
}

fn tracking(actual: &[f64], target: &[f64]) -> TrackingError {
    if actual.is_empty() {
        return TrackingError::default();
    }
    let (sum, max) = actual.iter().zip(target).fold((0.0, 0.0_f64), |(s, m), (a, b)| {
        let e = a - b;
        (s + e * e, m.max(e.abs()))
    });
    TrackingError {
        rms: (sum / actual.len() as f64).sqrt(),
        max,
    }
}

/// Computes tracking, allocation and saturation statistics. Missing
/// columns are treated as zero so partial logs still summarize.
pub fn compute_metrics(log: &RunLog) -> Metrics {
    let n = log.rows.len();
    let t = rows_of(log, "t");
    let dt = if n > 1 {
        t[1] - t[0]
    } else {
        1.0 / log.manifest.controller_rate_hz
    };

    let tracking = PAIRS
        .iter()
        .map(|(key, a, b)| (key.to_string(), tracking(&rows_of(log, a), &rows_of(log, b))))
        .collect();

    let cmd = vec5(log, "nu_dot_cmd");
    let ach = vec5(log, "nu_dot_ach");
    let angle: Vec<f64> = cmd.iter().zip(&ach).map(|(a, b)| angle_between(a, b)).collect();
    let angle_max = angle.iter().copied().fold(0.0, f64::max);
    let angle_rms = if n > 0 {
        (angle.iter().map(|a| a * a).sum::<f64>() / n as f64).sqrt()
    } else {
        0.0
    };

    let lim = &log.manifest.limits;
    let mut saturation = BTreeMap::new();
    let groups = [
        ("omega", 4, lim.rotor_speed),
        ("gamma", 4, lim.tilt),
        ("eta", 3, lim.surface),
    ];
    for (prefix, count, [lo, hi]) in groups {
        for i in 1..=count {
            let name = format!("{prefix}_{i}");
            let at_limit = rows_of(log, &name)
                .iter()
                .filter(|&&x| x <= lo + SATURATION_TOL || x >= hi - SATURATION_TOL)
                .count();
            saturation.insert(name, at_limit as f64 * dt);
        }
    }

    let pch_activity = vec5(log, "nu_dot_hedge").iter().map(|h| h.norm() * dt).sum();
    let alloc_c_min = rows_of(log, "alloc_c").into_iter().fold(f64::INFINITY, f64::min);

    Metrics {
        rows: n,
        duration: n as f64 * dt,
        tracking,
        angle,
        angle_max,
        angle_rms,
        saturation,
        pch_activity,
        alloc_c_min: if n > 0 { alloc_c_min } else { 1.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::log::{Column, LimitSummary, Manifest, RunStatus, FORMAT_VERSION};

    fn synthetic(names: &[&str], rows: Vec<Vec<f64>>) -> RunLog {
        RunLog {
            manifest: Manifest {
                format_version: FORMAT_VERSION,
                scenario: "synthetic".into(),
                seed: 0,
                config_hash: String::new(),
                controller_rate_hz: 10.0,
                plant_rate_hz: 10.0,
                rows: rows.len(),
                status: RunStatus::Completed,
                limits: LimitSummary {
                    rotor_speed: [0.0, 100.0],
                    tilt: [-1.0, 1.0],
                    surface: [-0.5, 0.5],
                },
                columns: names
                    .iter()
                    .map(|n| Column {
                        name: n.to_string(),
                        unit: "-".into(),
                    })
                    .collect(),
            },
            rows,
        }
    }

    #[test]
    fn perfect_tracking_has_zero_error() {
        let log = synthetic(
            &["t", "u_c", "u_c_cmd"],
            (0..10).map(|i| vec![i as f64 * 0.1, 3.0, 3.0]).collect(),
        );
        let m = compute_metrics(&log);
        assert_eq!(m.tracking["u_c"], TrackingError::default());
        assert_eq!(m.angle_max, 0.0);
    }

    #[test]
    fn opposite_rates_give_half_turn() {
        let log = synthetic(
            &["t", "nu_dot_cmd_x", "nu_dot_ach_x"],
            vec![vec![0.0, 1.0, -2.0], vec![0.1, 1.0, 1.0]],
        );
        let m = compute_metrics(&log);
        assert!((m.angle[0] - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(m.angle[1], 0.0);
    }

    #[test]
    fn saturation_time_counts_rows_on_limits() {
        let log = synthetic(
            &["t", "omega_1", "gamma_2"],
            vec![vec![0.0, 100.0, 0.0], vec![0.1, 50.0, -1.0], vec![0.2, 0.0, -1.0]],
        );
        let m = compute_metrics(&log);
        assert!((m.saturation["omega_1"] - 0.2).abs() < 1e-12);
        assert!((m.saturation["gamma_2"] - 0.2).abs() < 1e-12);
        assert_eq!(m.saturation["eta_3"], 0.0);
    }

    #[test]
    fn hedge_integral() {
        let log = synthetic(
            &["t", "nu_dot_hedge_l", "nu_dot_hedge_m"],
            vec![vec![0.0, 3.0, 4.0], vec![0.1, 0.0, 0.0]],
        );
        assert!((compute_metrics(&log).pch_activity - 0.5).abs() < 1e-12);
    }
}
