//! Multi-indices of the weak direct product of countably many copies of `Z`
//! and the torus characters they name.
//!
//! An [`Index`] `J = (j_1, j_2, ...)` has finitely many nonzero entries and is
//! stored in canonical form, without trailing zeros. Coordinates are 1-based
//! throughout, matching the usual `theta_1, theta_2, ...` labelling of the
//! torus.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finitely supported integer sequence, canonical (no trailing zeros).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<i64>", into = "Vec<i64>")]
pub struct Index(Vec<i64>);

impl Index {
    pub fn new(mut entries: Vec<i64>) -> Self {
        while entries.last() == Some(&0) {
            entries.pop();
        }
        Index(entries)
    }

    pub fn zero() -> Self {
        Index(Vec::new())
    }

    /// Unit vector `e_n` (1-based).
    pub fn unit(n: usize, value: i64) -> Self {
        assert!(n >= 1, "coordinates are 1-based");
        let mut v = vec![0; n];
        v[n - 1] = value;
        Index::new(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    /// Coordinate `j_n` (1-based); zero beyond the stored support.
    pub fn coord(&self, n: usize) -> i64 {
        if n == 0 {
            return 0;
        }
        self.0.get(n - 1).copied().unwrap_or(0)
    }

    /// `n(J)`: position of the last nonzero coordinate, 0 for the zero index.
    pub fn last_nonzero(&self) -> usize {
        self.0.len()
    }

    /// Membership in `Z^n = { J : n(J) <= n }`.
    pub fn in_block(&self, n: usize) -> bool {
        self.last_nonzero() <= n
    }

    /// Last nonzero coordinate `j_{n(J)}`, or 0.
    pub fn leading(&self) -> i64 {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|j| j.abs()).max().unwrap_or(0)
    }

    /// `chi_J(theta) = prod_n exp(i j_n theta_n)`.
    pub fn eval_character(&self, theta: &TorusPoint) -> Result<Complex64> {
        if theta.dim() < self.last_nonzero() {
            return Err(Error::DimensionMismatch { expected: self.last_nonzero(), got: theta.dim() });
        }
        Ok(self
            .character_phase(theta.angles())
            .map_or(Complex64::new(1.0, 0.0), |phase| Complex64::from_polar(1.0, phase)))
    }

    /// `sum_n j_n theta_n` over the support, `None` for the zero index.
    /// Callers must ensure `angles` covers the support.
    pub(crate) fn character_phase(&self, angles: &[f64]) -> Option<f64> {
        if self.is_zero() {
            return None;
        }
        Some(self.0.iter().zip(angles).map(|(&j, &t)| j as f64 * t).sum())
    }
}

impl From<Vec<i64>> for Index {
    fn from(v: Vec<i64>) -> Self {
        Index::new(v)
    }
}

impl From<Index> for Vec<i64> {
    fn from(j: Index) -> Self {
        j.0
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, ")")
    }
}

impl Add for &Index {
    type Output = Index;

    fn add(self, rhs: &Index) -> Index {
        let len = self.0.len().max(rhs.0.len());
        Index::new((1..=len).map(|n| self.coord(n) + rhs.coord(n)).collect())
    }
}

impl Sub for &Index {
    type Output = Index;

    fn sub(self, rhs: &Index) -> Index {
        self + &(-rhs)
    }
}

impl Neg for &Index {
    type Output = Index;

    fn neg(self) -> Index {
        Index(self.0.iter().map(|j| -j).collect())
    }
}

/// A point of the finite torus `T^m`, angles in `[-pi, pi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = angles.iter().find(|a| !(-PI..PI).contains(*a)) {
            return Err(Error::AngleOutOfRange(bad));
        }
        Ok(TorusPoint(angles))
    }

    /// Reduces arbitrary real angles into `[-pi, pi)`.
    pub fn wrapped(angles: impl IntoIterator<Item = f64>) -> Self {
        TorusPoint(angles.into_iter().map(wrap_angle).collect())
    }

    pub fn zero(dim: usize) -> Self {
        TorusPoint(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }
}

pub fn wrap_angle(t: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = (t + PI).rem_euclid(two_pi) - PI;
    // rem_euclid can round up to exactly two_pi
    if r >= PI {
        -PI
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn last_nonzero_examples() {
        assert_eq!(Index::zero().last_nonzero(), 0);
        assert_eq!(Index::new(vec![1, -2]).last_nonzero(), 2);
        assert_eq!(Index::new(vec![0, 0, 7]).last_nonzero(), 3);
        assert_eq!(Index::new(vec![0, 0, 0]).last_nonzero(), 0);
    }

    #[test]
    fn block_membership() {
        assert!(Index::zero().in_block(0));
        assert!(!Index::new(vec![1, -2]).in_block(1));
        assert!(Index::new(vec![1, -2]).in_block(2));
    }

    #[test]
    fn character_values() {
        let any = TorusPoint::new(vec![0.3, -1.1]).unwrap();
        assert_eq!(Index::zero().eval_character(&any).unwrap(), Complex64::new(1.0, 0.0));

        let v = Index::new(vec![1]).eval_character(&TorusPoint::new(vec![PI / 2.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 1.0, epsilon = 1e-15);

        // e^{i pi} * e^{-i pi}, computed factor by factor
        let theta = [PI / 2.0, -PI];
        let oracle = Complex64::new(0.0, 2.0 * theta[0]).exp() * Complex64::new(0.0, -theta[1]).exp();
        let v = Index::new(vec![2, -1]).eval_character(&TorusPoint::new(theta.to_vec()).unwrap()).unwrap();
        assert_abs_diff_eq!(v.re, oracle.re, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, oracle.im, epsilon = 1e-12);
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn character_dimension_mismatch() {
        let err = Index::new(vec![0, 1]).eval_character(&TorusPoint::zero(1)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn serde_is_canonical() {
        let j: Index = serde_json::from_str("[1,-2,0,0]").unwrap();
        assert_eq!(serde_json::to_string(&j).unwrap(), "[1,-2]");
        let z: Index = serde_json::from_str("[0]").unwrap();
        assert_eq!(serde_json::to_string(&z).unwrap(), "[]");
    }

    #[test]
    fn addition_cancels_trailing() {
        let a = Index::new(vec![1, 2]);
        let b = Index::new(vec![3, -2]);
        assert_eq!(&a + &b, Index::new(vec![4]));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn torus_point_rejects_pi() {
        assert!(TorusPoint::new(vec![PI]).is_err());
        assert_eq!(TorusPoint::wrapped([PI]).angles(), &[-PI]);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
    }
}
