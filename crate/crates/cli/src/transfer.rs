//! `transfer`: the truncated multiplier over a `(lambda, n)` grid with tail bounds.

use std::f64::consts::PI;

use acfkit::hilbert::hilbert_multiplier;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferConfig {
    pub seed: u64,
    pub tol: Option<f64>,
    pub lambdas: Vec<f64>,
    pub ns: Vec<f64>,
    pub quad_points: usize,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            seed: 0,
            tol: None,
            lambdas: vec![-1.0, 0.0, 1.0],
            ns: vec![10.0, 100.0, 1000.0],
            quad_points: acfkit::hilbert::DEFAULT_GAUSS_ORDER,
        }
    }
}

/// Default slack added to the tail bounds.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub lambda: f64,
    pub n: f64,
    pub multiplier: Complex64,
    pub modulus: f64,
    /// `|m_n(lambda) + i sgn(lambda)|`; absent when `lambda = 0`.
    pub deviation: Option<f64>,
    /// `2 / (|lambda| n)`.
    pub stated_bound: Option<f64>,
    /// `(2/pi)(1/X + 1/X^2 + x)` with `X = |lambda| n`, `x = |lambda| / n`.
    pub valid_bound: Option<f64>,
    /// Whether `|lambda| n >= 10`, where the stated bound is asserted.
    pub checked: bool,
    pub within_stated: Option<bool>,
    pub within_valid: Option<bool>,
    pub no_limit: bool,
}

#[derive(Debug, Serialize)]
pub struct TransferResult {
    pub tolerance: f64,
    pub rows: Vec<Row>,
    pub failures: usize,
}

pub fn stated_bound(lambda: f64, n: f64) -> f64 {
    2.0 / (lambda.abs() * n)
}

pub fn valid_bound(lambda: f64, n: f64) -> f64 {
    let big = lambda.abs() * n;
    let small = lambda.abs() / n;
    2.0 / PI * (1.0 / big + 1.0 / (big * big) + small)
}

pub fn row(lambda: f64, n: f64, quad_points: usize, tol: f64) -> Row {
    let m = hilbert_multiplier(lambda, n, quad_points).value();
    if lambda == 0.0 {
        return Row {
            lambda,
            n,
            multiplier: m,
            modulus: m.norm(),
            deviation: None,
            stated_bound: None,
            valid_bound: None,
            checked: false,
            within_stated: None,
            within_valid: None,
            no_limit: true,
        };
    }
    let deviation = (m + Complex64::new(0.0, lambda.signum())).norm();
    let stated = stated_bound(lambda, n);
    let valid = valid_bound(lambda, n);
    Row {
        lambda,
        n,
        multiplier: m,
        modulus: m.norm(),
        deviation: Some(deviation),
        stated_bound: Some(stated),
        valid_bound: Some(valid),
        checked: lambda.abs() * n >= 10.0,
        within_stated: Some(deviation <= stated + tol),
        within_valid: Some(deviation <= valid + tol),
        no_limit: false,
    }
}

pub fn run(cfg: &TransferConfig) -> Result<TransferResult, CliError> {
    if cfg.quad_points == 0 {
        return Err(CliError::Config("quad_points must be at least 1".into()));
    }
    if cfg.ns.iter().any(|n| !(*n > 0.0) || !n.is_finite()) || cfg.lambdas.iter().any(|l| !l.is_finite()) {
        return Err(CliError::Config("lambdas must be finite and ns positive".into()));
    }
    let tolerance = cfg.tol.unwrap_or(DEFAULT_TOL);
    let rows: Vec<Row> = cfg
        .lambdas
        .iter()
        .flat_map(|&lambda| cfg.ns.iter().map(move |&n| (lambda, n)))
        .map(|(lambda, n)| row(lambda, n, cfg.quad_points, tolerance))
        .collect();
    let failures = rows.iter().filter(|r| r.checked && r.within_stated == Some(false)).count();
    Ok(TransferResult { tolerance, rows, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rows() {
        let result = run(&TransferConfig::default()).unwrap();
        assert_eq!(result.failures, 0);
        assert_eq!(result.rows.len(), 9);
        let zero = result.rows.iter().find(|r| r.lambda == 0.0).unwrap();
        assert!(zero.no_limit && zero.multiplier == Complex64::new(0.0, 0.0));
        let r = result.rows.iter().find(|r| r.lambda == 1.0 && r.n == 1000.0).unwrap();
        assert!(r.deviation.unwrap() <= 0.01);
        let mirror = result.rows.iter().find(|r| r.lambda == -1.0 && r.n == 1000.0).unwrap();
        assert_eq!(mirror.multiplier, -r.multiplier);
    }

    #[test]
    fn valid_bound_covers_large_frequencies() {
        for lambda in [2.5, 10.0] {
            for n in [10.0, 100.0, 1000.0] {
                let r = row(lambda, n, 8, 1e-6);
                assert_eq!(r.within_valid, Some(true));
            }
        }
    }
}
