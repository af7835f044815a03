//! Finite-dimensional complex `l_q` spaces standing in for the Banach space `X`.

use std::fmt;
use std::ops::{Add, Index as IndexOp, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C^d` with the `l_q` norm, `1 <= q <= inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormedSpaceSpec {
    dim: usize,
    q: f64,
}

impl NormedSpaceSpec {
    pub fn new(dim: usize, q: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        if q.is_nan() || q < 1.0 {
            return Err(Error::InvalidSpace(format!("q = {q} is not in [1, inf]")));
        }
        Ok(NormedSpaceSpec { dim, q })
    }

    /// The scalar field `C` (d = 1, q = 2).
    pub fn scalar() -> Self {
        NormedSpaceSpec { dim: 1, q: 2.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The space whose norm is dual to this one (`q' = q / (q - 1)`).
    pub fn dual(&self) -> Self {
        NormedSpaceSpec { dim: self.dim, q: conjugate_exponent(self.q) }
    }

    pub fn vector_norm(&self, v: &VectorValue) -> Result<f64> {
        self.check(v)?;
        Ok(self.norm(v.coords()))
    }

    pub(crate) fn check(&self, v: &VectorValue) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.dim() });
        }
        Ok(())
    }

    /// Unchecked `l_q` norm of a coordinate slice.
    pub fn norm(&self, v: &[Complex64]) -> f64 {
        lq_norm(v, self.q)
    }

    /// Unit-norm functional `phi` in the dual space with `sum phi_i conj(x_i) = ||x||_q`.
    /// Returns zeros for `x = 0`.
    pub fn norming_functional(&self, x: &[Complex64]) -> Vec<Complex64> {
        norming(x, self.q)
    }
}

pub fn conjugate_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

fn phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z / r
    }
}

pub(crate) fn lq_norm(v: &[Complex64], q: f64) -> f64 {
    if q == 2.0 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    } else if q == 1.0 {
        v.iter().map(|z| z.norm()).sum()
    } else if q.is_infinite() {
        v.iter().map(|z| z.norm()).fold(0.0, f64::max)
    } else {
        let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        scale * v.iter().map(|z| (z.norm() / scale).powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn norming(x: &[Complex64], q: f64) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let n = lq_norm(x, q);
    if n == 0.0 {
        return vec![zero; x.len()];
    }
    if q.is_infinite() {
        // first coordinate attaining the maximum
        let mut best = 0;
        for (i, z) in x.iter().enumerate() {
            if z.norm() > x[best].norm() {
                best = i;
            }
        }
        let mut out = vec![zero; x.len()];
        out[best] = phase(x[best]);
        return out;
    }
    if q == 1.0 {
        return x.iter().map(|z| phase(*z)).collect();
    }
    x.iter().map(|z| phase(*z) * (z.norm() / n).powf(q - 1.0)).collect()
}

impl fmt::Display for NormedSpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_infinite() {
            write!(f, "d={},q=inf", self.dim)
        } else {
            write!(f, "d={},q={}", self.dim, self.q)
        }
    }
}

/// Parses `d=<int>,q=<rational|inf>`, e.g. `d=2,q=3/2`.
impl FromStr for NormedSpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut dim = None;
        let mut q = None;
        for part in s.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value in space spec, got {part:?}")))?;
            match key.trim() {
                "d" => dim = Some(value.trim().parse::<usize>().map_err(|e| Error::Parse(format!("d: {e}")))?),
                "q" => q = Some(parse_exponent(value.trim())?),
                other => return Err(Error::Parse(format!("unknown space key {other:?}"))),
            }
        }
        match (dim, q) {
            (Some(d), Some(q)) => NormedSpaceSpec::new(d, q),
            _ => Err(Error::Parse(format!("space spec {s:?} needs both d and q"))),
        }
    }
}

/// Parses a finite decimal, a rational `a/b`, or `inf`.
pub fn parse_exponent(s: &str) -> Result<f64> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    let bad = |_| Error::Parse(format!("bad exponent {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(bad)?;
        let b: f64 = b.trim().parse().map_err(bad)?;
        return Ok(a / b);
    }
    s.parse().map_err(bad)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Int(u64),
    Float(f64),
    Text(String),
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    d: usize,
    q: ExponentRepr,
}

impl Serialize for NormedSpaceSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let q = if self.q.is_infinite() {
            ExponentRepr::Text("inf".into())
        } else if self.q.fract() == 0.0 && self.q < 1e15 {
            ExponentRepr::Int(self.q as u64)
        } else {
            ExponentRepr::Float(self.q)
        };
        SpaceRepr { d: self.dim, q }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NormedSpaceSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SpaceRepr::deserialize(d)?;
        let q = match repr.q {
            ExponentRepr::Int(q) => q as f64,
            ExponentRepr::Float(q) => q,
            ExponentRepr::Text(t) => parse_exponent(&t).map_err(de::Error::custom)?,
        };
        NormedSpaceSpec::new(repr.d, q).map_err(de::Error::custom)
    }
}

/// Coordinates of a vector in `C^d`, serialized as `[[re, im], ...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorValue(Vec<Complex64>);

impl VectorValue {
    pub fn new(coords: Vec<Complex64>) -> Self {
        VectorValue(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        VectorValue(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn scalar(z: Complex64) -> Self {
        VectorValue(vec![z])
    }

    pub fn from_real(values: &[f64]) -> Self {
        VectorValue(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scale(&self, c: Complex64) -> VectorValue {
        VectorValue(self.0.iter().map(|z| z * c).collect())
    }

    pub fn scale_real(&self, c: f64) -> VectorValue {
        VectorValue(self.0.iter().map(|z| z * c).collect())
    }

    /// Largest coordinate modulus.
    pub fn max_modulus(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn add_scaled(&mut self, other: &VectorValue, c: Complex64) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b * c;
        }
    }
}

impl IndexOp<usize> for VectorValue {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl Add for &VectorValue {
    type Output = VectorValue;

    fn add(self, rhs: &VectorValue) -> VectorValue {
        VectorValue(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &VectorValue {
    type Output = VectorValue;

    fn sub(self, rhs: &VectorValue) -> VectorValue {
        VectorValue(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &VectorValue {
    type Output = VectorValue;

    fn neg(self) -> VectorValue {
        VectorValue(self.0.iter().map(|a| -a).collect())
    }
}
