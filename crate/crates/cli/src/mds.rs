//! `mds`: realize a dyadic martingale difference sequence on the torus and
//! check distribution, block spectrum, and the martingale property.

use std::path::Path;

use acfkit::martingales::{
    block_spectrum_check, distribution_check, fitting_truncation, martingale_property_check, random_mds,
    realize_on_torus, DyadicMDS, DEFAULT_TRUNCATION,
};
use acfkit::NormedSpaceSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MdsConfig {
    pub seed: u64,
    pub tol: Option<f64>,
    /// Source sequence; a random one is drawn from `seed` when unset.
    pub mds: Option<String>,
    /// Sequence compared against the realization of the source.
    pub against: Option<String>,
    pub n: usize,
    pub space: NormedSpaceSpec,
    pub truncation: usize,
    pub write_mds: Option<String>,
}

impl Default for MdsConfig {
    fn default() -> Self {
        MdsConfig {
            seed: 0,
            tol: None,
            mds: None,
            against: None,
            n: 6,
            space: NormedSpaceSpec::scalar(),
            truncation: DEFAULT_TRUNCATION,
            write_mds: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MdsCheck {
    pub name: &'static str,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct MdsResult {
    pub n: usize,
    pub space: NormedSpaceSpec,
    pub source: String,
    pub truncation_requested: usize,
    pub truncation_used: usize,
    pub approximant_terms: Vec<usize>,
    pub checks: Vec<MdsCheck>,
}

impl MdsResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn load(path: &str) -> Result<DyadicMDS, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

pub fn run(cfg: &MdsConfig) -> Result<(MdsResult, DyadicMDS), CliError> {
    let err = |e: acfkit::Error| CliError::Config(e.to_string());
    let (mds, source) = match &cfg.mds {
        Some(path) => (load(path)?, path.clone()),
        None => {
            if cfg.n == 0 {
                return Err(CliError::Config("n must be at least 1".into()));
            }
            (random_mds(cfg.n, cfg.space, cfg.seed), "random".to_string())
        }
    };
    if cfg.truncation == 0 {
        return Err(CliError::Config("truncation must be at least 1".into()));
    }
    let truncation = fitting_truncation(mds.len(), cfg.truncation);
    let realized = realize_on_torus(&mds, truncation).map_err(err)?;
    let reference = match &cfg.against {
        Some(path) => load(path)?,
        None => mds.clone(),
    };
    let checks = vec![
        MdsCheck { name: "distribution", passed: distribution_check(&reference, &realized).map_err(err)? },
        MdsCheck { name: "block_spectrum", passed: block_spectrum_check(&realized) },
        MdsCheck { name: "martingale_property", passed: martingale_property_check(&realized) },
    ];
    let result = MdsResult {
        n: mds.len(),
        space: *mds.space(),
        source,
        truncation_requested: cfg.truncation,
        truncation_used: truncation,
        approximant_terms: realized.approximants().iter().map(|a| a.len()).collect(),
        checks,
    };
    Ok((result, mds))
}

pub fn write_mds(path: &str, mds: &DyadicMDS) -> Result<(), CliError> {
    let path = Path::new(path);
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name =
        path.file_name().and_then(|n| n.to_str()).ok_or_else(|| CliError::Config("bad write_mds path".into()))?;
    let mut text = serde_json::to_string_pretty(mds).expect("sequences serialize");
    text.push('\n');
    crate::report::write_atomic(dir, name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_source_passes() {
        let (result, mds) = run(&MdsConfig { n: 4, truncation: 5, ..Default::default() }).unwrap();
        assert!(result.passed());
        assert_eq!(mds.len(), 4);
        assert_eq!(result.approximant_terms.len(), 4);
    }

    #[test]
    fn large_n_lowers_truncation() {
        let (result, _) = run(&MdsConfig { n: 9, ..Default::default() }).unwrap();
        assert!(result.truncation_used < result.truncation_requested);
        assert!(result.passed());
    }
}
