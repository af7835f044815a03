//! Vector-valued trigonometric polynomials on `T^m` and their `L^p` norms
//! with respect to normalized Haar measure.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Index, TorusPoint};
use crate::rng::substream;
use crate::space::{NormedSpaceSpec, VectorValue};

/// Tolerance used when comparing polynomials coefficientwise.
pub const COEFF_TOL: f64 = 1e-12;

/// `f = sum_J a_J chi_J` on `T^m` with coefficients in `C^d`.
///
/// Only nonzero coefficients are stored, and every index satisfies
/// `n(J) <= torus_dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct TrigPolynomial {
    torus_dim: usize,
    space: NormedSpaceSpec,
    coeffs: BTreeMap<Index, VectorValue>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    index: Index,
    value: VectorValue,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    torus_dim: usize,
    space: NormedSpaceSpec,
    coeffs: Vec<TermRepr>,
}

impl TryFrom<PolyRepr> for TrigPolynomial {
    type Error = Error;

    fn try_from(r: PolyRepr) -> Result<Self> {
        TrigPolynomial::from_terms(r.torus_dim, r.space, r.coeffs.into_iter().map(|t| (t.index, t.value)))
    }
}

impl From<TrigPolynomial> for PolyRepr {
    fn from(p: TrigPolynomial) -> Self {
        PolyRepr {
            torus_dim: p.torus_dim,
            space: p.space,
            coeffs: p.coeffs.into_iter().map(|(index, value)| TermRepr { index, value }).collect(),
        }
    }
}

impl TrigPolynomial {
    pub fn zero(torus_dim: usize, space: NormedSpaceSpec) -> Self {
        TrigPolynomial { torus_dim, space, coeffs: BTreeMap::new() }
    }

    /// Builds a polynomial from terms, summing repeated indices.
    pub fn from_terms(
        torus_dim: usize,
        space: NormedSpaceSpec,
        terms: impl IntoIterator<Item = (Index, VectorValue)>,
    ) -> Result<Self> {
        let mut p = TrigPolynomial::zero(torus_dim, space);
        for (j, v) in terms {
            p.add_term(j, &v)?;
        }
        Ok(p)
    }

    /// Scalar polynomial (`d = 1, q = 2`) from complex coefficients.
    pub fn scalar(torus_dim: usize, terms: impl IntoIterator<Item = (Index, Complex64)>) -> Result<Self> {
        Self::from_terms(
            torus_dim,
            NormedSpaceSpec::scalar(),
            terms.into_iter().map(|(j, z)| (j, VectorValue::scalar(z))),
        )
    }

    /// Constant polynomial `a`.
    pub fn constant(torus_dim: usize, space: NormedSpaceSpec, a: VectorValue) -> Result<Self> {
        Self::from_terms(torus_dim, space, [(Index::zero(), a)])
    }

    pub fn add_term(&mut self, j: Index, v: &VectorValue) -> Result<()> {
        self.space.check(v)?;
        if j.last_nonzero() > self.torus_dim {
            return Err(Error::DimensionMismatch { expected: self.torus_dim, got: j.last_nonzero() });
        }
        let entry = self.coeffs.entry(j.clone()).or_insert_with(|| VectorValue::zeros(v.dim()));
        entry.add_scaled(v, Complex64::new(1.0, 0.0));
        if entry.is_zero() {
            self.coeffs.remove(&j);
        }
        Ok(())
    }

    pub fn torus_dim(&self) -> usize {
        self.torus_dim
    }

    pub fn space(&self) -> &NormedSpaceSpec {
        &self.space
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Index, &VectorValue)> {
        self.coeffs.iter()
    }

    pub fn spectrum(&self) -> impl Iterator<Item = &Index> {
        self.coeffs.keys()
    }

    pub fn coeff(&self, j: &Index) -> Option<&VectorValue> {
        self.coeffs.get(j)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|j_n|` over the spectrum.
    pub fn max_degree(&self) -> i64 {
        self.coeffs.keys().map(Index::max_abs).max().unwrap_or(0)
    }

    pub fn has_mean(&self) -> bool {
        self.coeffs.contains_key(&Index::zero())
    }

    /// Same coefficients viewed on a torus of another dimension.
    pub fn with_torus_dim(&self, torus_dim: usize) -> Result<Self> {
        TrigPolynomial::from_terms(torus_dim, self.space, self.coeffs.clone())
    }

    /// Applies `a_J -> g(J, a_J)` to every coefficient; zero results are dropped.
    pub fn try_map_coeffs(
        &self,
        mut g: impl FnMut(&Index, &VectorValue) -> Result<Option<VectorValue>>,
    ) -> Result<Self> {
        let mut out = TrigPolynomial::zero(self.torus_dim, self.space);
        for (j, a) in &self.coeffs {
            if let Some(v) = g(j, a)? {
                if !v.is_zero() {
                    out.coeffs.insert(j.clone(), v);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.try_map_coeffs(|_, a| Ok(Some(a.scale(c)))).expect("infallible")
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::InvalidSpace(format!("cannot add {} and {}", self.space, other.space)));
        }
        let mut out = self.with_torus_dim(self.torus_dim.max(other.torus_dim))?;
        for (j, v) in &other.coeffs {
            out.add_term(j.clone(), v)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// `max_J max_i |a_J[i] - b_J[i]|`, with missing coefficients read as zero.
    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        let keys: BTreeSet<&Index> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        let zero = VectorValue::zeros(self.space.dim());
        keys.into_iter()
            .map(|j| {
                let a = self.coeffs.get(j).unwrap_or(&zero);
                let b = other.coeffs.get(j).unwrap_or(&zero);
                (a - b).max_modulus()
            })
            .fold(0.0, f64::max)
    }

    /// Coefficientwise equality up to [`COEFF_TOL`].
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.space == other.space && self.max_coeff_distance(other) <= COEFF_TOL
    }

    /// `x -> f(x + x0)`, i.e. `a_J -> a_J chi_J(x0)`.
    pub fn translate(&self, x0: &TorusPoint) -> Result<Self> {
        self.try_map_coeffs(|j, a| Ok(Some(a.scale(j.eval_character(x0)?))))
    }

    /// `f(theta)`.
    pub fn eval(&self, theta: &TorusPoint) -> Result<VectorValue> {
        if theta.dim() != self.torus_dim {
            return Err(Error::DimensionMismatch { expected: self.torus_dim, got: theta.dim() });
        }
        Ok(VectorValue::new(self.eval_angles(theta.angles())))
    }

    /// Unchecked evaluation; `angles` must cover the torus dimension.
    pub(crate) fn eval_angles(&self, angles: &[f64]) -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.space.dim()];
        for (j, a) in &self.coeffs {
            let chi = j.character_phase(angles).map_or(Complex64::new(1.0, 0.0), |t| Complex64::from_polar(1.0, t));
            for (s, c) in acc.iter_mut().zip(a.coords()) {
                *s += c * chi;
            }
        }
        acc
    }
}

/// How the Haar integral over `T^m` is discretized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureSpec {
    /// Equispaced tensor grid `theta_k = -pi + 2 pi k / N` on every axis.
    Grid { points_per_axis: usize },
    /// Uniform samples drawn from a seeded stream.
    MonteCarlo { samples: usize, seed: u64 },
}

impl QuadratureSpec {
    pub const MONTE_CARLO_SAMPLES: usize = 1 << 14;

    /// Exact grid `2 * maxdeg + 2` up to four torus dimensions, Monte Carlo beyond.
    pub fn default_for(f: &TrigPolynomial) -> Self {
        if f.torus_dim() <= 4 {
            QuadratureSpec::Grid { points_per_axis: 2 * f.max_degree() as usize + 2 }
        } else {
            QuadratureSpec::MonteCarlo { samples: Self::MONTE_CARLO_SAMPLES, seed: 0 }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            QuadratureSpec::Grid { points_per_axis: 0 } => {
                Err(Error::InvalidQuadrature("points_per_axis must be at least 1".into()))
            }
            QuadratureSpec::MonteCarlo { samples: 0, .. } => {
                Err(Error::InvalidQuadrature("samples must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Grid node angles `-pi + 2 pi k / n`.
pub fn grid_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect()
}

/// All `theta` of the tensor grid, flattened with the first axis fastest.
pub(crate) fn for_each_grid_node(torus_dim: usize, n: usize, node: usize, out: &mut [f64], axis: &[f64]) {
    let mut rest = node;
    for slot in out.iter_mut().take(torus_dim) {
        *slot = axis[rest % n];
        rest /= n;
    }
}

/// Sum with Neumaier compensation; the result depends only on input order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Result of an `L^p` norm computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormReport {
    pub value: f64,
    /// Grid with `points_per_axis <= 2 * maxdeg`.
    pub aliasing_risk: bool,
    /// Delta-method standard error of the Monte Carlo estimate.
    pub std_error: Option<f64>,
}

/// `(int ||f||_X^p dtheta / (2 pi)^m)^{1/p}`.
pub fn lp_norm(f: &TrigPolynomial, p: f64, quad: &QuadratureSpec) -> Result<f64> {
    lp_norm_report(f, p, quad).map(|r| r.value)
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p <= 1.0 || p.is_infinite() {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

pub fn lp_norm_report(f: &TrigPolynomial, p: f64, quad: &QuadratureSpec) -> Result<NormReport> {
    check_exponent(p)?;
    quad.validate()?;
    if f.is_empty() {
        return Ok(NormReport { value: 0.0, aliasing_risk: false, std_error: None });
    }
    let m = f.torus_dim();
    let space = *f.space();
    let powered = |angles: &[f64]| space.norm(&f.eval_angles(angles)).powf(p);

    match *quad {
        QuadratureSpec::Grid { points_per_axis: n } => {
            let axis = grid_angles(n);
            let total = n
                .checked_pow(m as u32)
                .ok_or_else(|| Error::InvalidQuadrature(format!("grid {n}^{m} is too large")))?;
            // characters factor over axes: chi_J(theta) = prod_n e^{i j_n theta_n}
            let deg = f.max_degree();
            let width = (2 * deg + 1) as usize;
            let phases: Vec<Complex64> = axis
                .iter()
                .flat_map(|&t| (-deg..=deg).map(move |j| Complex64::from_polar(1.0, j as f64 * t)))
                .collect();
            let terms: Vec<(&[i64], &[Complex64])> = f.terms().map(|(j, a)| (j.entries(), a.coords())).collect();
            let values: Vec<f64> = (0..total)
                .into_par_iter()
                .with_min_len(64)
                .map_init(
                    || (vec![0usize; m], vec![Complex64::new(0.0, 0.0); space.dim()]),
                    |(digits, acc), node| {
                        let mut rest = node;
                        for d in digits.iter_mut() {
                            *d = rest % n;
                            rest /= n;
                        }
                        acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                        for (entries, coords) in &terms {
                            let mut chi = Complex64::new(1.0, 0.0);
                            for (axis_node, &jn) in digits.iter().zip(entries.iter()) {
                                if jn != 0 {
                                    chi *= phases[axis_node * width + (jn + deg) as usize];
                                }
                            }
                            for (slot, c) in acc.iter_mut().zip(coords.iter()) {
                                *slot += c * chi;
                            }
                        }
                        space.norm(acc).powf(p)
                    },
                )
                .collect();
            let mean = compensated_sum(values) / total as f64;
            Ok(NormReport {
                value: mean.powf(1.0 / p),
                aliasing_risk: (n as i64) <= 2 * f.max_degree(),
                std_error: None,
            })
        }
        QuadratureSpec::MonteCarlo { samples, seed } => {
            let mut rng = substream(seed, "lp_norm.monte_carlo");
            let points: Vec<f64> = (0..samples * m).map(|_| rng.gen_range(-PI..PI)).collect();
            let values: Vec<f64> = points.par_chunks(m.max(1)).with_min_len(64).map(powered).collect();
            let count = values.len() as f64;
            let mean = compensated_sum(values.iter().copied()) / count;
            let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (count - 1.0).max(1.0);
            let se_mean = (var / count).sqrt();
            let value = mean.powf(1.0 / p);
            let std_error = if mean > 0.0 { se_mean * value / (p * mean) } else { 0.0 };
            Ok(NormReport { value, aliasing_risk: false, std_error: Some(std_error) })
        }
    }
}

/// Doubles the grid from `start` until the relative change drops below
/// `rel_tol` or `max_points` is reached. Returns `(value, points_used, last_rel_change)`.
pub fn lp_norm_refined(
    f: &TrigPolynomial,
    p: f64,
    start: usize,
    rel_tol: f64,
    max_points: usize,
) -> Result<(f64, usize, f64)> {
    let mut n = start.max(1);
    let mut value = lp_norm(f, p, &QuadratureSpec::Grid { points_per_axis: n })?;
    loop {
        let next_n = 2 * n;
        if next_n > max_points {
            return Ok((value, n, f64::NAN));
        }
        let next = lp_norm(f, p, &QuadratureSpec::Grid { points_per_axis: next_n })?;
        let change = if next == 0.0 { 0.0 } else { ((next - value) / next).abs() };
        if change < rel_tol {
            return Ok((next, next_n, change));
        }
        value = next;
        n = next_n;
    }
}

fn random_coeff(rng: &mut impl Rng, dim: usize) -> VectorValue {
    VectorValue::new((0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
}

/// Seeded sparse polynomial with `sparsity` distinct indices in `[-D, D]^m`
/// (capped at the size of the box) and coordinates uniform in the unit square.
pub fn random_poly(
    torus_dim: usize,
    space: NormedSpaceSpec,
    max_degree: i64,
    sparsity: usize,
    seed: u64,
) -> TrigPolynomial {
    let mut rng = substream(seed, "random_poly");
    let box_size = (2 * max_degree.max(0) as u128 + 1).saturating_pow(torus_dim as u32);
    let target = (sparsity as u128).min(box_size) as usize;
    let mut picked = BTreeSet::new();
    let mut order = Vec::with_capacity(target);
    while picked.len() < target {
        let j = Index::new((0..torus_dim).map(|_| rng.gen_range(-max_degree..=max_degree)).collect());
        if picked.insert(j.clone()) {
            order.push(j);
        }
    }
    let terms: Vec<(Index, VectorValue)> =
        order.into_iter().map(|j| (j, random_coeff(&mut rng, space.dim()))).collect();
    TrigPolynomial::from_terms(torus_dim, space, terms).expect("indices lie in the torus")
}

/// Seeded zero-mean polynomial whose block `k` (indices with `n(J) = k`)
/// holds up to `terms_per_block` terms, for `k = 1..=blocks`.
pub fn random_block_poly(
    blocks: usize,
    space: NormedSpaceSpec,
    max_degree: i64,
    terms_per_block: usize,
    seed: u64,
) -> TrigPolynomial {
    assert!(max_degree >= 1);
    let mut rng = substream(seed, "random_block_poly");
    let mut f = TrigPolynomial::zero(blocks, space);
    for k in 1..=blocks {
        let box_size = (2 * max_degree as u128 + 1).saturating_pow(k as u32 - 1) * 2 * max_degree as u128;
        let target = (terms_per_block as u128).min(box_size) as usize;
        let mut picked = BTreeSet::new();
        while picked.len() < target {
            let mut v: Vec<i64> = (1..k).map(|_| rng.gen_range(-max_degree..=max_degree)).collect();
            let mut last = rng.gen_range(1..=max_degree);
            if rng.gen::<bool>() {
                last = -last;
            }
            v.push(last);
            let j = Index::new(v);
            if picked.insert(j.clone()) {
                let a = random_coeff(&mut rng, space.dim());
                f.add_term(j, &a).expect("index lies in the torus");
            }
        }
    }
    f
}
