//! Least-squares fits of sweep data: the saturating exponential
//! Δθ(p) = k₁ + k₂·e^{−k₃p} and ordinary linear fits against n.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::sweep::{SeriesKey, SweepRow};
use crate::channels::ChannelKind;
use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 6;
pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-10;
/// Damping beyond which no downhill step exists at working precision.
const MAX_DAMPING: f64 = 1e16;
/// Tolerance used when deciding whether a p value lies inside the window.
const WINDOW_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn model(&self, p: f64) -> f64 {
        model(&Vector3::new(self.k1, self.k2, self.k3), p)
    }
}

fn model(k: &Vector3<f64>, p: f64) -> f64 {
    k[0] + k[1] * (-k[2] * p).exp()
}

fn sum_sq_residuals(k: &Vector3<f64>, p: &[f64], y: &[f64]) -> f64 {
    p.iter()
        .zip(y)
        .map(|(&p, &y)| (y - model(k, p)).powi(2))
        .sum()
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len().is_multiple_of(2) {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    }
}

/// Fits k₁ + k₂·e^{−k₃p} to the points with `window.0 ≤ p ≤ window.1`
/// by Levenberg–Marquardt with the analytic Jacobian.
///
/// A run that exhausts the iteration budget is returned with
/// `converged = false`.
pub fn fit_saturating_exponential(p: &[f64], y: &[f64], window: (f64, f64)) -> Result<FitResult> {
    if p.len() != y.len() {
        return Err(Error::DimensionMismatch {
            op: "fit",
            left: (p.len(), 1),
            right: (y.len(), 1),
        });
    }
    let (ps, ys): (Vec<f64>, Vec<f64>) = p
        .iter()
        .zip(y)
        .filter(|(&p, _)| p >= window.0 - WINDOW_SLACK && p <= window.1 + WINDOW_SLACK)
        .map(|(&p, &y)| (p, y))
        .unzip();
    if ps.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            got: ps.len(),
            need: MIN_FIT_POINTS,
        });
    }
    let y_max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y_min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    if y_max - y_min <= f64::EPSILON * y_max.abs().max(1.0) {
        return Err(Error::DegenerateSeries);
    }
    let positive: Vec<f64> = ps.iter().copied().filter(|&p| p > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::DegenerateSeries);
    }

    let mut k = Vector3::new(y_max, y_min - y_max, 2.0 / median(positive));
    let mut cost = sum_sq_residuals(&k, &ps, &ys);
    let mut damping = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&p, &y) in ps.iter().zip(&ys) {
            let e = (-k[2] * p).exp();
            let row = Vector3::new(1.0, e, -k[1] * p * e);
            let r = y - model(&k, p);
            jtj += row * row.transpose();
            jtr += row * r;
        }

        let mut accepted = None;
        while damping <= MAX_DAMPING {
            let mut lhs = jtj;
            for i in 0..3 {
                lhs[(i, i)] += damping * jtj[(i, i)].max(f64::MIN_POSITIVE);
            }
            let Some(step) = lhs.lu().solve(&jtr) else {
                damping *= 10.0;
                continue;
            };
            let trial = k + step;
            let trial_cost = sum_sq_residuals(&trial, &ps, &ys);
            if trial_cost.is_finite() && trial_cost <= cost {
                accepted = Some((step, trial, trial_cost));
                damping = (damping / 10.0).max(1e-12);
                break;
            }
            damping *= 10.0;
        }

        let Some((step, trial, trial_cost)) = accepted else {
            // No downhill direction left at working precision.
            converged = true;
            break;
        };
        k = trial;
        cost = trial_cost;
        let relative = (0..3)
            .map(|i| step[i].abs() / k[i].abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if relative < STEP_TOLERANCE || cost == 0.0 {
            converged = true;
            break;
        }
    }

    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    Ok(FitResult {
        k1: k[0],
        k2: k[1],
        k3: k[2],
        r_squared: 1.0 - cost / ss_tot,
        window,
        iterations,
        converged,
    })
}

/// Fits one (channel, n, θ) series of sweep rows.
pub fn fit_exponential(rows: &[SweepRow], window: (f64, f64)) -> Result<FitResult> {
    let Some(first) = rows.first() else {
        return Err(Error::TooFewPoints {
            got: 0,
            need: MIN_FIT_POINTS,
        });
    };
    let key = first.series_key();
    if rows.iter().any(|r| r.series_key() != key) {
        return Err(Error::MixedSeries);
    }
    let p: Vec<f64> = rows.iter().map(|r| r.p).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.delta_theta).collect();
    fit_saturating_exponential(&p, &y, window)
}

/// Splits rows into series, keeping first-seen order.
pub fn group_series(rows: &[SweepRow]) -> Vec<(SeriesKey, Vec<SweepRow>)> {
    let mut groups: Vec<(SeriesKey, Vec<SweepRow>)> = Vec::new();
    for row in rows {
        let key = row.series_key();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row.clone()),
            None => groups.push((key, vec![row.clone()])),
        }
    }
    groups
}

/// Serialized form of one fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub channel: ChannelKind,
    pub n: usize,
    pub theta_actual: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub r_squared: f64,
    pub window: [f64; 2],
    pub converged: bool,
}

impl FitRecord {
    pub fn new(key: SeriesKey, fit: &FitResult) -> Self {
        Self {
            channel: key.channel,
            n: key.n,
            theta_actual: key.theta_actual,
            k1: fit.k1,
            k2: fit.k2,
            k3: fit.k3,
            r_squared: fit.r_squared,
            window: [fit.window.0, fit.window.1],
            converged: fit.converged,
        }
    }
}

/// Fits every series in `rows`.
pub fn fit_all(rows: &[SweepRow], window: (f64, f64)) -> Vec<(SeriesKey, Result<FitResult>)> {
    group_series(rows)
        .into_iter()
        .map(|(key, members)| (key, fit_exponential(&members, window)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares; a perfect fit (including a constant series) has R² = 1.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let len = x.len() as f64;
    let mx = x.iter().sum::<f64>() / len;
    let my = y.iter().sum::<f64>() / len;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Linear dependence of θ̄ and Δθ on n for one (channel, θ, p) group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NSweepSummary {
    pub channel: ChannelKind,
    pub theta_actual: f64,
    pub p: f64,
    pub n_values: Vec<usize>,
    pub theta_bar: LinearFit,
    pub delta_theta: LinearFit,
}

type NSweepGroup<'a> = ((ChannelKind, f64, f64), Vec<&'a SweepRow>);

pub fn n_sweep_summary(rows: &[SweepRow]) -> Result<Vec<NSweepSummary>> {
    let mut groups: Vec<NSweepGroup> = Vec::new();
    for row in rows {
        let key = (row.channel, row.theta_actual, row.p);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }
    if groups.is_empty() {
        return Err(Error::TooFewQubitCounts(0));
    }
    groups
        .into_iter()
        .map(|((channel, theta_actual, p), mut members)| {
            members.sort_by_key(|r| r.n);
            let mut n_values: Vec<usize> = members.iter().map(|r| r.n).collect();
            n_values.dedup();
            if n_values.len() < 3 {
                return Err(Error::TooFewQubitCounts(n_values.len()));
            }
            let x: Vec<f64> = members.iter().map(|r| r.n as f64).collect();
            let tb: Vec<f64> = members.iter().map(|r| r.theta_bar).collect();
            let dt: Vec<f64> = members.iter().map(|r| r.delta_theta).collect();
            Ok(NSweepSummary {
                channel,
                theta_actual,
                p,
                n_values,
                theta_bar: linear_fit(&x, &tb),
                delta_theta: linear_fit(&x, &dt),
            })
        })
        .collect()
}
