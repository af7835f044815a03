//! `estimate`: lower bounds for the operator constants by witness search,
//! optionally followed by the block-sign consistency checks.

use acfkit::estimator::{
    block_sign_consistency, estimate_constant, upper_proxy, ConsistencyReport, ConstantKind, EstimateReport,
    InstanceParams, SearchParams,
};
use acfkit::{NormedSpaceSpec, Order};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_TOL: f64 = 1e-9;

/// Unset search fields fall back to the defaults for the chosen constant.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateConfig {
    pub seed: u64,
    pub tol: Option<f64>,
    pub constant: ConstantKind,
    pub p: f64,
    pub space: NormedSpaceSpec,
    pub budget: usize,
    pub torus_dim: Option<usize>,
    pub degree: Option<i64>,
    pub ascent_steps: Option<usize>,
    pub order: Option<Order>,
    pub weights: Option<Vec<i64>>,
    pub truncation: Option<f64>,
    pub check_consistency: bool,
    pub consistency_instances: usize,
    pub eps_samples: usize,
    pub instance: InstanceParams,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            seed: 0,
            tol: None,
            constant: ConstantKind::Conjugate,
            p: 2.0,
            space: NormedSpaceSpec::scalar(),
            budget: 1000,
            torus_dim: None,
            degree: None,
            ascent_steps: None,
            order: None,
            weights: None,
            truncation: None,
            check_consistency: false,
            consistency_instances: 100,
            eps_samples: 1,
            instance: InstanceParams::default(),
        }
    }
}

impl EstimateConfig {
    pub fn search(&self) -> SearchParams {
        let mut s = SearchParams::default_for(self.constant);
        if let Some(v) = self.torus_dim {
            s.torus_dim = v;
            if self.weights.is_none() && s.weights.len() < v {
                s.weights = (0..v as u32).map(|i| 3i64.pow(i)).collect();
            }
        }
        if let Some(v) = self.degree {
            s.degree = v;
        }
        if let Some(v) = self.ascent_steps {
            s.ascent_steps = v;
        }
        if let Some(v) = &self.order {
            s.order = v.clone();
        }
        if let Some(v) = &self.weights {
            s.weights = v.clone();
        }
        if let Some(v) = self.truncation {
            s.truncation = v;
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct EstimateResult {
    pub estimate: EstimateReport,
    pub upper_proxy: f64,
    pub consistency: Option<ConsistencyReport>,
}

impl EstimateResult {
    pub fn passed(&self) -> bool {
        self.consistency.as_ref().is_none_or(|c| c.violations.is_empty())
    }

    pub fn csv(&self) -> String {
        format!("{}\n{}\n", EstimateReport::CSV_HEADER, self.estimate.csv_row())
    }
}

pub fn run(cfg: &EstimateConfig) -> Result<EstimateResult, CliError> {
    let err = |e: acfkit::Error| CliError::Config(e.to_string());
    let estimate =
        estimate_constant(cfg.constant, cfg.space, cfg.p, cfg.budget, cfg.seed, &cfg.search()).map_err(err)?;
    let consistency = if cfg.check_consistency {
        Some(
            block_sign_consistency(
                cfg.space,
                cfg.p,
                cfg.eps_samples,
                cfg.consistency_instances,
                cfg.seed,
                cfg.tol.unwrap_or(DEFAULT_TOL),
                &cfg.instance,
            )
            .map_err(err)?,
        )
    } else {
        None
    };
    Ok(EstimateResult { upper_proxy: upper_proxy(&cfg.space, cfg.p), estimate, consistency })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_reach_search_params() {
        let cfg = EstimateConfig { torus_dim: Some(3), degree: Some(4), ..Default::default() };
        let s = cfg.search();
        assert_eq!((s.torus_dim, s.degree, s.weights.clone()), (3, 4, vec![1, 3, 9]));
        assert_eq!(s.ascent_steps, SearchParams::default_for(ConstantKind::Conjugate).ascent_steps);
    }

    #[test]
    fn small_run_with_consistency() {
        let cfg = EstimateConfig {
            budget: 20,
            degree: Some(4),
            check_consistency: true,
            consistency_instances: 5,
            p: 4.0,
            ..Default::default()
        };
        let result = run(&cfg).unwrap();
        assert!(result.passed());
        assert_eq!(result.estimate.evaluations, 20);
        assert!(result.csv().starts_with("kind,p,d,q,lower_bound,budget,seed\nconjugate,4,"));
    }

    #[test]
    fn invalid_exponent_is_a_config_error() {
        let cfg = EstimateConfig { p: 1.0, ..Default::default() };
        assert!(matches!(run(&cfg), Err(CliError::Config(_))));
    }
}
