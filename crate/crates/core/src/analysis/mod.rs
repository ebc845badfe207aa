//! Error metrics, the sign-balance indicator dN, stencil-size sweeps,
//! convergence fits and the IMEX accuracy indicator.

mod extrema;
mod imex;
mod sweep;

pub use extrema::{local_maxima, local_minima, prominent_extrema, slope_sign_changes, Extremum, ExtremumKind};
pub use imex::{imex_indicator, imex_stencil_size, ImexReport, IMEX_INFLATION};
pub use sweep::{
    region_sweep, stencil_sweep, write_sweep_csv, Sweep, SweepOutcome, SweepRecord, SWEEP_CSV_HEADER,
};

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::nodegen::NodeSet;
use crate::pde::SolutionField;
use crate::point::Point;
use crate::weights::DiffWeights;

/// Pointwise signed errors over interior nodes and their aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    /// Interior node indices, in the order of the signed arrays.
    pub interior: Vec<usize>,
    /// `u_hat - u`.
    pub e_poiss_signed: Vec<f64>,
    /// Discrete operator applied to exact samples, minus `f`.
    pub e_lap_signed: Vec<f64>,
    pub e_poiss_max: f64,
    pub e_poiss_avg: f64,
    pub e_lap_max: f64,
    pub e_lap_avg: f64,
    pub dn_poiss: f64,
    pub dn_lap: f64,
    pub n_int: usize,
}

/// `(#positive - #negative) / len`; exact zeros count in neither class.
pub fn sign_balance(errors: &[f64]) -> f64 {
    if errors.is_empty() {
        return 0.0;
    }
    let pos = errors.iter().filter(|&&e| e > 0.0).count() as f64;
    let neg = errors.iter().filter(|&&e| e < 0.0).count() as f64;
    (pos - neg) / errors.len() as f64
}

/// `(max |e|, mean |e|)`.
pub fn max_and_mean_abs(errors: &[f64]) -> (f64, f64) {
    if errors.is_empty() {
        return (0.0, 0.0);
    }
    let max = errors.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let mean = errors.iter().map(|e| e.abs()).sum::<f64>() / errors.len() as f64;
    (max, mean)
}

pub fn error_report(
    u_hat: &SolutionField,
    exact_u: &dyn Fn(&Point) -> f64,
    rhs_f: &dyn Fn(&Point) -> f64,
    op_weights: &DiffWeights,
    nodes: &NodeSet,
) -> Result<ErrorReport> {
    if u_hat.values.len() != nodes.len() {
        return input("solution length differs from node count");
    }
    let interior = nodes.interior_indices();
    let exact: Vec<f64> = nodes.positions.iter().map(exact_u).collect();
    let mut e_poiss = Vec::with_capacity(interior.len());
    let mut e_lap = Vec::with_capacity(interior.len());
    for &i in &interior {
        let x = &nodes.positions[i];
        e_poiss.push(u_hat.values[i] - exact[i]);
        let row = match op_weights.row_for(i) {
            Some(r) => r,
            None => return input(format!("no operator weights for interior node {i}")),
        };
        e_lap.push(row.apply(&exact) - rhs_f(x));
    }
    let (e_poiss_max, e_poiss_avg) = max_and_mean_abs(&e_poiss);
    let (e_lap_max, e_lap_avg) = max_and_mean_abs(&e_lap);
    Ok(ErrorReport {
        n_int: interior.len(),
        dn_poiss: sign_balance(&e_poiss),
        dn_lap: sign_balance(&e_lap),
        interior,
        e_poiss_signed: e_poiss,
        e_lap_signed: e_lap,
        e_poiss_max,
        e_poiss_avg,
        e_lap_max,
        e_lap_avg,
    })
}

/// Least-squares line through `(log h, log e)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub h_values: Vec<f64>,
    pub e_values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_convergence(h: &[f64], e: &[f64]) -> Result<ConvergenceFit> {
    if h.len() != e.len() {
        return input("h and e lists differ in length");
    }
    if h.len() < 3 {
        return input("a convergence fit needs at least 3 points");
    }
    if h.iter().chain(e).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return input("convergence data must be strictly positive");
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return input("h values must not all be equal");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ConvergenceFit { h_values: h.to_vec(), e_values: e.to_vec(), slope, intercept, r_squared })
}
