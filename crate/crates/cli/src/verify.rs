//! `verify`: exact identities, separation, Parseval, the truncated multiplier
//! against an independent quadrature, and transference along an orbit.

use acfkit::conjugation::composition_residual;
use acfkit::hilbert::{
    hilbert_multiplier, orbit_samples, transferred_truncated, truncated_hilbert_line, DEFAULT_GAUSS_ORDER,
};
use acfkit::orders::{separating_homomorphism, verify_separation};
use acfkit::rng::substream;
use acfkit::torus::{lp_norm, random_block_poly, random_poly};
use acfkit::{Index, NormedSpaceSpec, Order, QuadratureSpec, SignSequence, TorusPoint, TrigPolynomial, VectorValue};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Overrides every check's tolerance when set.
    pub tol: Option<f64>,
    pub composition_instances: usize,
    pub separation_sets: usize,
    pub parseval_instances: usize,
    pub transference_truncation: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            tol: None,
            composition_instances: 200,
            separation_sets: 100,
            parseval_instances: 50,
            transference_truncation: 50.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub tolerance: f64,
    pub residual: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    fn new(name: &'static str, default_tol: f64, override_tol: Option<f64>, residual: f64, note: String) -> Self {
        let tolerance = override_tol.unwrap_or(default_tol);
        Check { name, tolerance, residual, passed: residual <= tolerance, note }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyResult {
    pub checks: Vec<Check>,
}

fn err(e: acfkit::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Mismatches of `eps_{n(J)} = sgn_twist(J) sgn_revlex(J)` over `[-3, 3]^4` and all 16 sign patterns.
fn block_sign_identity() -> (f64, String) {
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for bits in 0..16u64 {
        let eps = SignSequence::from_bits(bits, 4);
        let twist = Order::twist(eps.clone());
        for code in 0..7i64.pow(4) {
            let j = Index::new((0..4).map(|i| (code / 7i64.pow(i)) % 7 - 3).collect());
            if j.is_zero() {
                continue;
            }
            checked += 1;
            let product = twist.sgn(&j).unwrap_or(0) * Order::RevLex.sgn(&j).unwrap_or(0);
            if product != eps.get(j.last_nonzero()) {
                mismatches += 1;
            }
        }
    }
    (mismatches as f64, format!("{checked} (eps, J) pairs, {mismatches} mismatches"))
}

fn random_space(rng: &mut impl Rng) -> NormedSpaceSpec {
    let q = [1.0, 2.0, f64::INFINITY][rng.gen_range(0..3)];
    NormedSpaceSpec::new(rng.gen_range(1..=3), q).expect("valid space")
}

fn composition(cfg: &VerifyConfig) -> Result<(f64, String), CliError> {
    let mut rng = substream(cfg.seed, "verify.composition");
    let mut worst = 0.0f64;
    let mut sides = [0usize; 2];
    for _ in 0..cfg.composition_instances {
        let blocks = rng.gen_range(1..=4);
        let space = random_space(&mut rng);
        let f = random_block_poly(blocks, space, rng.gen_range(1..=3), rng.gen_range(1..=4), rng.gen());
        let eps = SignSequence::from_bits(rng.gen(), blocks);
        let (plus, minus) = composition_residual(&eps, &f).map_err(err)?;
        worst = worst.max(plus.min(minus));
        sides[usize::from(minus <= plus)] += 1;
    }
    let consistent = sides[0] == 0 || sides[1] == 0;
    let note =
        format!("{} instances; vanishing side: -h on {}, +h on {}", cfg.composition_instances, sides[1], sides[0]);
    Ok((if consistent { worst } else { f64::INFINITY }, note))
}

fn separation(cfg: &VerifyConfig) -> Result<(f64, String), CliError> {
    let mut rng = substream(cfg.seed, "verify.separation");
    let mut failures = 0usize;
    for _ in 0..cfg.separation_sets {
        let size = rng.gen_range(1..=20);
        let support = rng.gen_range(1..=5);
        let set: Vec<Index> =
            (0..size).map(|_| Index::new((0..support).map(|_| rng.gen_range(-8..=8)).collect())).collect();
        let order = if rng.gen::<bool>() { Order::RevLex } else { Order::twist(SignSequence::from_bits(rng.gen(), 5)) };
        let w = separating_homomorphism(&set, &order).map_err(err)?;
        if !verify_separation(&set, &w, &order) {
            failures += 1;
        }
    }
    Ok((failures as f64, format!("{} sets, {failures} failures", cfg.separation_sets)))
}

fn parseval(cfg: &VerifyConfig) -> Result<(f64, String), CliError> {
    let mut rng = substream(cfg.seed, "verify.parseval");
    let mut worst = 0.0f64;
    for _ in 0..cfg.parseval_instances {
        let m = rng.gen_range(1..=3);
        let degree = rng.gen_range(1..=4);
        let space = NormedSpaceSpec::new(rng.gen_range(1..=2), 2.0).expect("valid space");
        let f = random_poly(m, space, degree, rng.gen_range(1..=16), rng.gen());
        let quad = QuadratureSpec::Grid { points_per_axis: 2 * degree as usize + 1 };
        let grid = lp_norm(&f, 2.0, &quad).map_err(err)?;
        let coeffs = f.terms().map(|(_, a)| a.coords().iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>().sqrt();
        worst = worst.max((grid - coeffs).abs());
    }
    Ok((worst, format!("{} random polynomials", cfg.parseval_instances)))
}

/// Adaptive Simpson quadrature, independent of the panel rule in the library.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `m_n(lambda)` from the defining integral, by adaptive Simpson.
pub fn multiplier_oracle(lambda: f64, n: f64) -> Complex64 {
    let x = lambda.abs();
    let sinc = |u: f64| u.sin() / u;
    let integral = adaptive_simpson(&sinc, x / n, x * n, 1e-13);
    Complex64::new(0.0, -2.0 / std::f64::consts::PI * lambda.signum() * integral)
}

fn multiplier() -> (f64, String) {
    let value = hilbert_multiplier(1.0, 100.0, DEFAULT_GAUSS_ORDER).value();
    let oracle = multiplier_oracle(1.0, 100.0);
    ((value - oracle).norm(), format!("m_100(1) = {:.12}i, oracle {:.12}i", value.im, oracle.im))
}

/// Largest gap between the transferred operator at `x` and the line
/// transform of the orbit samples at `tau = 0`, over single characters
/// with frequency 1 and 2 along the orbit.
pub fn transference_gap(n: f64) -> Result<f64, acfkit::Error> {
    let weights = vec![1, 3];
    let x = TorusPoint::new(vec![0.4, -1.1])?;
    let a = VectorValue::new(vec![Complex64::new(0.6, -0.3), Complex64::new(-1.0, 0.25)]);
    let space = NormedSpaceSpec::new(2, 2.0)?;
    let step = 0.25 / n;
    let mut worst = 0.0f64;
    for j in [Index::new(vec![1]), Index::new(vec![-1, 1])] {
        let f = TrigPolynomial::from_terms(2, space, [(j, a.clone())])?;
        let torus_side = transferred_truncated(&weights, &f, n)?.eval(&x)?;
        let line = truncated_hilbert_line(&orbit_samples(&f, &weights, &x, n, step)?, n)?;
        let at_zero = line.at(0.0).ok_or(acfkit::Error::InsufficientSamples)?;
        worst = worst.max((&torus_side - at_zero).max_modulus());
    }
    Ok(worst)
}

pub fn run(cfg: &VerifyConfig) -> Result<VerifyResult, CliError> {
    let t = cfg.tol;
    let (identity, identity_note) = block_sign_identity();
    let (comp, comp_note) = composition(cfg)?;
    let (sep, sep_note) = separation(cfg)?;
    let (pars, pars_note) = parseval(cfg)?;
    let (mult, mult_note) = multiplier();
    let transfer = transference_gap(cfg.transference_truncation).map_err(err)?;
    let checks = vec![
        Check::new("block_sign_identity", 0.0, t, identity, identity_note),
        Check::new("composition_residual", 1e-12, t, comp, comp_note),
        Check::new("separation", 0.0, t, sep, sep_note),
        Check::new("parseval", 1e-10, t, pars, pars_note),
        Check::new("multiplier_oracle", 1e-6, t, mult, mult_note),
        Check::new(
            "transference",
            1e-4,
            t,
            transfer,
            format!("frequencies 1 and 2 along the orbit, n = {}", cfg.transference_truncation),
        ),
    ];
    Ok(VerifyResult { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_agrees_with_library() {
        for (lambda, n) in [(1.0, 100.0), (-2.5, 10.0), (10.0, 1000.0)] {
            let lib = hilbert_multiplier(lambda, n, DEFAULT_GAUSS_ORDER).value();
            assert!((lib - multiplier_oracle(lambda, n)).norm() < 1e-8);
        }
        assert!((multiplier_oracle(1.0, 100.0).im + 0.988).abs() < 1e-3);
    }

    #[test]
    fn default_suite_passes() {
        let result = run(&VerifyConfig::default()).unwrap();
        for c in &result.checks {
            assert!(c.passed, "{c:?}");
        }
    }
}
