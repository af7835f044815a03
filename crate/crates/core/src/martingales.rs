//! Dyadic martingale difference sequences and their realization on the torus.
//!
//! A [`DyadicMDS`] is `d_1 = 0`, `d_k = v_k(r_1, ..., r_{k-1}) r_k` for
//! Rademacher `r_k`. On `T^N` the Rademachers become `s_1 = 1` and
//! `s_k(theta) = sgn(theta_{k-1})`, and `d'_k = v_k(s_1, ..., s_{k-1}) s_k`.
//! Because `s_1` is constant, the Rademacher side is enumerated with `r_1 = 1`
//! as well: atoms are the sign patterns of `(r_2, ..., r_n)`.
//!
//! `d'_k` depends on `theta_1, ..., theta_{k-1}`, so its polynomial
//! approximant has spectrum in `Z^{k-1} \ Z^{k-2}`; block `k - 1` is where
//! [`block_spectrum_check`] looks for it.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Index, TorusPoint};
use crate::rng::substream;
use crate::space::{NormedSpaceSpec, VectorValue};
use crate::torus::TrigPolynomial;

/// Default number of harmonics in the sign-function series.
pub const DEFAULT_TRUNCATION: usize = 31;

/// Exact enumeration is used up to this length; longer sequences are
/// sampled.
pub const ENUMERATION_CAP: usize = 12;

/// Largest number of polynomial terms [`realize_on_torus`] will expand.
pub const EXPANSION_CAP: u128 = 4_000_000;

/// `d_1 = 0`, `d_k = v_k(r_1..r_{k-1}) r_k` for `k = 2..=n`.
///
/// `tables[k - 2][bits]` holds `v_k` at the sign pattern whose `i`-th sign
/// (1-based) is `-1` exactly when bit `i - 1` of `bits` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicMDS {
    space: NormedSpaceSpec,
    tables: Vec<Vec<VectorValue>>,
}

impl DyadicMDS {
    pub fn new(space: NormedSpaceSpec, tables: Vec<Vec<VectorValue>>) -> Result<Self> {
        for (i, table) in tables.iter().enumerate() {
            let k = i + 2;
            if table.len() != 1 << (k - 1) {
                return Err(Error::MalformedMds(format!(
                    "v_{k} has {} entries, expected {}",
                    table.len(),
                    1usize << (k - 1)
                )));
            }
            for v in table {
                space.check(v)?;
            }
        }
        Ok(DyadicMDS { space, tables })
    }

    pub fn zero(n: usize, space: NormedSpaceSpec) -> Self {
        let tables = (2..=n.max(1)).map(|k| vec![VectorValue::zeros(space.dim()); 1 << (k - 1)]).collect();
        DyadicMDS { space, tables }
    }

    /// Length `n` (number of differences, including `d_1 = 0`).
    pub fn len(&self) -> usize {
        self.tables.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn space(&self) -> &NormedSpaceSpec {
        &self.space
    }

    /// `v_k` at a pattern encoded as bits.
    pub fn v(&self, k: usize, bits: usize) -> &VectorValue {
        &self.tables[k - 2][bits]
    }

    pub fn table_mut(&mut self, k: usize) -> &mut [VectorValue] {
        &mut self.tables[k - 2]
    }

    /// `(d_1, ..., d_n)` on the atom whose bit `i - 2` is set when `r_i = -1`
    /// (`i = 2..=n`, with `r_1 = 1`).
    pub fn values_at(&self, atom: usize) -> Vec<VectorValue> {
        let mut out = vec![VectorValue::zeros(self.space.dim())];
        for k in 2..=self.len() {
            let pattern = (atom & ((1 << (k - 2)) - 1)) << 1;
            let r_k = if atom >> (k - 2) & 1 == 1 { -1.0 } else { 1.0 };
            out.push(self.v(k, pattern).scale_real(r_k));
        }
        out
    }
}

/// Seeded MDS with table coordinates uniform in the unit square.
pub fn random_mds(n: usize, space: NormedSpaceSpec, seed: u64) -> DyadicMDS {
    let mut rng = substream(seed, "random_mds");
    let tables = (2..=n.max(1))
        .map(|k| {
            (0..1usize << (k - 1))
                .map(|_| {
                    VectorValue::new(
                        (0..space.dim())
                            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();
    DyadicMDS { space, tables }
}

fn pattern_to_bits(pattern: &[i8]) -> Result<usize> {
    pattern.iter().enumerate().try_fold(0usize, |bits, (i, s)| match s {
        1 => Ok(bits),
        -1 => Ok(bits | 1 << i),
        other => Err(Error::MalformedMds(format!("sign pattern entry {other} is not -1 or 1"))),
    })
}

fn bits_to_pattern(bits: usize, len: usize) -> Vec<i8> {
    (0..len).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect()
}

struct Tables<'a>(&'a [Vec<VectorValue>]);

impl Serialize for Tables<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (i, table) in self.0.iter().enumerate() {
            let k = i + 2;
            let entries: Vec<(Vec<i8>, &VectorValue)> =
                table.iter().enumerate().map(|(bits, v)| (bits_to_pattern(bits, k - 1), v)).collect();
            map.serialize_entry(&k.to_string(), &entries)?;
        }
        map.end()
    }
}

impl Serialize for DyadicMDS {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            n: usize,
            space: NormedSpaceSpec,
            tables: Tables<'a>,
        }
        Repr { n: self.len(), space: self.space, tables: Tables(&self.tables) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DyadicMDS {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            n: usize,
            space: NormedSpaceSpec,
            #[serde(default)]
            tables: BTreeMap<String, Vec<(Vec<i8>, VectorValue)>>,
        }
        let repr = Repr::deserialize(d)?;
        parse_tables(repr.n, repr.space, repr.tables).map_err(de::Error::custom)
    }
}

fn parse_tables(
    n: usize,
    space: NormedSpaceSpec,
    raw: BTreeMap<String, Vec<(Vec<i8>, VectorValue)>>,
) -> Result<DyadicMDS> {
    if n == 0 {
        return Err(Error::MalformedMds("n must be at least 1".into()));
    }
    let mut by_k = BTreeMap::new();
    for (key, entries) in raw {
        let k: usize = key.parse().map_err(|_| Error::MalformedMds(format!("table key {key:?} is not an integer")))?;
        if !(2..=n).contains(&k) {
            return Err(Error::MalformedMds(format!("table key {k} outside 2..={n}")));
        }
        by_k.insert(k, entries);
    }
    let mut tables = Vec::with_capacity(n - 1);
    for k in 2..=n {
        let entries = by_k.remove(&k).ok_or_else(|| Error::MalformedMds(format!("missing table for v_{k}")))?;
        let mut slots: Vec<Option<VectorValue>> = vec![None; 1 << (k - 1)];
        for (pattern, value) in entries {
            if pattern.len() != k - 1 {
                return Err(Error::MalformedMds(format!("v_{k} pattern {pattern:?} must have length {}", k - 1)));
            }
            let bits = pattern_to_bits(&pattern)?;
            if slots[bits].replace(value).is_some() {
                return Err(Error::MalformedMds(format!("v_{k} pattern {pattern:?} given twice")));
            }
        }
        let table = slots
            .into_iter()
            .enumerate()
            .map(|(bits, v)| {
                v.ok_or_else(|| Error::MalformedMds(format!("v_{k} misses pattern {:?}", bits_to_pattern(bits, k - 1))))
            })
            .collect::<Result<Vec<_>>>()?;
        tables.push(table);
    }
    DyadicMDS::new(space, tables)
}

/// `(4/pi) sum_{h odd <= M} sin(h theta) / h`, the truncated Fourier series of
/// `sgn` on `[-pi, pi)`. Coefficients are `-2i/(pi h)` at `h` and `2i/(pi h)` at `-h`.
pub fn sign_fourier(truncation: usize) -> TrigPolynomial {
    TrigPolynomial::scalar(1, sign_fourier_terms(truncation).into_iter().map(|(h, c)| (Index::new(vec![h]), c)))
        .expect("one-dimensional indices")
}

fn sign_fourier_terms(truncation: usize) -> Vec<(i64, Complex64)> {
    let mut terms = Vec::new();
    for h in (1..=truncation as i64).step_by(2) {
        let c = 2.0 / (PI * h as f64);
        terms.push((-h, Complex64::new(0.0, c)));
        terms.push((h, Complex64::new(0.0, -c)));
    }
    terms
}

/// `sgn` as used for the torus Rademachers: `+1` on `[0, pi)`, `-1` on `[-pi, 0)`.
fn sign_of(theta: f64) -> f64 {
    if theta < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Torus realization of a dyadic MDS.
#[derive(Clone, Debug)]
pub struct TorusMDS {
    source: DyadicMDS,
    truncation: usize,
    approximants: Vec<TrigPolynomial>,
}

impl TorusMDS {
    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn space(&self) -> &NormedSpaceSpec {
        self.source.space()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn torus_dim(&self) -> usize {
        (self.len() - 1).max(1)
    }

    /// Polynomial approximant of `d'_k` (1-based).
    pub fn approximant(&self, k: usize) -> &TrigPolynomial {
        &self.approximants[k - 1]
    }

    pub fn approximants(&self) -> &[TrigPolynomial] {
        &self.approximants
    }

    /// Exact step-function value `d'_k(theta) = v_k(s_1..s_{k-1}) s_k`.
    pub fn eval_exact(&self, k: usize, theta: &TorusPoint) -> Result<VectorValue> {
        if k == 1 {
            return Ok(VectorValue::zeros(self.space().dim()));
        }
        if theta.dim() < k - 1 {
            return Err(Error::DimensionMismatch { expected: k - 1, got: theta.dim() });
        }
        let a = theta.angles();
        // s_1 = 1 leaves bit 0 clear; s_{i+1} = sgn(theta_i) for i = 1..k-2
        let mut bits = 0usize;
        for i in 1..=k - 2 {
            if sign_of(a[i - 1]) < 0.0 {
                bits |= 1 << i;
            }
        }
        Ok(self.source.v(k, bits).scale_real(sign_of(a[k - 2])))
    }

    /// Sum of the approximants with signs `eps_k` on `d'_k`.
    pub fn signed_sum(&self, eps: &crate::orders::SignSequence) -> Result<TrigPolynomial> {
        let mut total = TrigPolynomial::zero(self.torus_dim(), *self.space());
        for (k0, d) in self.approximants.iter().enumerate() {
            total = total.add(&d.scale(Complex64::new(eps.get(k0 + 1) as f64, 0.0)))?;
        }
        Ok(total)
    }
}

/// Number of terms in the expanded approximants for length `n` and truncation `M`:
/// `sum_k (M+1) (M+2)^{k-2}` in the worst case (every Walsh coefficient nonzero).
pub fn expansion_size(n: usize, truncation: usize) -> u128 {
    let h = (truncation as u128).div_ceil(2) * 2;
    (2..=n).map(|k| h * (h + 1).saturating_pow(k as u32 - 2)).fold(0u128, u128::saturating_add)
}

/// Largest odd truncation `<= preferred` whose expansion fits [`EXPANSION_CAP`].
pub fn fitting_truncation(n: usize, preferred: usize) -> usize {
    let mut m = preferred.max(1) | 1;
    while m > 1 && expansion_size(n, m) > EXPANSION_CAP {
        m -= 2;
    }
    m
}

/// In-place Walsh-Hadamard transform normalized to give `c_A = 2^{-r} sum_sigma v(sigma) prod_{i in A} sigma_i`
/// with `sigma_i = -1` encoded as a set bit.
fn walsh_coefficients(values: &[VectorValue]) -> Vec<VectorValue> {
    let mut c: Vec<VectorValue> = values.to_vec();
    let len = c.len();
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (c[i].clone(), c[i + h].clone());
                c[i] = &a + &b;
                c[i + h] = &a - &b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / len as f64;
    c.into_iter().map(|v| v.scale_real(scale)).collect()
}

/// Builds the exact evaluators and the polynomial approximants of `d'_k`,
/// with `sgn` replaced by [`sign_fourier`] of the given truncation.
pub fn realize_on_torus(mds: &DyadicMDS, truncation: usize) -> Result<TorusMDS> {
    let n = mds.len();
    let size = expansion_size(n, truncation);
    if size > EXPANSION_CAP {
        return Err(Error::MalformedMds(format!(
            "expansion of {size} terms exceeds the cap of {EXPANSION_CAP}; lower the truncation"
        )));
    }
    let space = *mds.space();
    let torus_dim = (n - 1).max(1);
    let series = sign_fourier_terms(truncation);
    let mut approximants = vec![TrigPolynomial::zero(torus_dim, space)];

    for k in 2..=n {
        let inner = k - 2;
        // v_k with s_1 = 1: table entries whose bit 0 is clear, re-indexed by sigma bits
        let restricted: Vec<VectorValue> = (0..1usize << inner).map(|sigma| mds.v(k, sigma << 1).clone()).collect();
        let walsh = walsh_coefficients(&restricted);

        let mut terms: Vec<(Index, VectorValue)> = Vec::new();
        for (subset, coeff) in walsh.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            // coordinates carrying a sign factor: members of the subset, then k-1
            let mut coords: Vec<usize> = (0..inner).filter(|i| subset >> i & 1 == 1).map(|i| i + 1).collect();
            coords.push(k - 1);
            let mut stack: Vec<(Vec<i64>, Complex64)> = vec![(vec![0; k - 1], Complex64::new(1.0, 0.0))];
            for &coord in &coords {
                stack = stack
                    .into_iter()
                    .flat_map(|(entries, c)| {
                        series.iter().map(move |&(h, sc)| {
                            let mut e = entries.clone();
                            e[coord - 1] = h;
                            (e, c * sc)
                        })
                    })
                    .collect();
            }
            terms.extend(stack.into_iter().map(|(e, c)| (Index::new(e), coeff.scale(c))));
        }
        approximants.push(TrigPolynomial::from_terms(torus_dim, space, terms)?);
    }
    Ok(TorusMDS { source: mds.clone(), truncation, approximants })
}

/// Representative point of the sign cell `bits` (bit `i - 1` set means `theta_i < 0`).
fn cell_point(bits: usize, dim: usize) -> TorusPoint {
    TorusPoint::new((0..dim).map(|i| if bits >> i & 1 == 1 { -PI / 2.0 } else { PI / 2.0 }).collect())
        .expect("angles lie in [-pi, pi)")
}

type Tuple = Vec<(u64, u64)>;

fn canonical_tuple(values: &[VectorValue]) -> Tuple {
    values.iter().flat_map(|v| v.coords().iter().map(|z| ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits()))).collect()
}

fn torus_values(t: &TorusMDS, theta: &TorusPoint) -> Result<Vec<VectorValue>> {
    (1..=t.len()).map(|k| t.eval_exact(k, theta)).collect()
}

/// Compares the joint law of `(d_k)` over the Rademacher atoms with the joint
/// law of the exact `(d'_k)` over the torus sign cells, as multisets of value
/// tuples. Both sides put equal mass on `2^{n-1}` atoms.
///
/// Beyond [`ENUMERATION_CAP`] a fixed-seed sample of atoms is compared under
/// the coupling `r_i <-> s_i`.
pub fn distribution_check(mds: &DyadicMDS, t: &TorusMDS) -> Result<bool> {
    if mds.len() != t.len() {
        return Err(Error::LengthMismatch(mds.len(), t.len()));
    }
    if mds.space() != t.space() {
        return Err(Error::InvalidSpace(format!("{} vs {}", mds.space(), t.space())));
    }
    let n = mds.len();
    let dim = t.torus_dim();
    if n > ENUMERATION_CAP {
        let mut rng = substream(0, "distribution_check.sample");
        let atoms: Vec<usize> = (0..4096).map(|_| rng.gen_range(0..1usize << (n - 1))).collect();
        return atoms
            .par_iter()
            .try_fold(
                || true,
                |ok, &atom| -> Result<bool> {
                    let lhs = canonical_tuple(&mds.values_at(atom));
                    let rhs = canonical_tuple(&torus_values(t, &cell_point(atom, dim))?);
                    Ok(ok && lhs == rhs)
                },
            )
            .try_reduce(|| true, |a, b| Ok(a && b));
    }
    let atoms = 1usize << (n - 1);
    let mut lhs: Vec<Tuple> = (0..atoms).into_par_iter().map(|a| canonical_tuple(&mds.values_at(a))).collect();
    let mut rhs: Vec<Tuple> = (0..atoms)
        .into_par_iter()
        .map(|cell| torus_values(t, &cell_point(cell, dim)).map(|v| canonical_tuple(&v)))
        .collect::<Result<_>>()?;
    lhs.sort_unstable();
    rhs.sort_unstable();
    Ok(lhs == rhs)
}

/// Every approximant `d'_k` has spectrum in `Z^{k-1} \ Z^{k-2}`, and `d'_1 = 0`.
pub fn block_spectrum_check(t: &TorusMDS) -> bool {
    t.approximants().iter().enumerate().all(|(k0, d)| {
        let k = k0 + 1;
        if k == 1 {
            d.is_empty()
        } else {
            d.spectrum().all(|j| j.last_nonzero() == k - 1)
        }
    })
}

/// Conditional expectation of each exact `d'_k` given the sign cell of
/// `theta_1..theta_{k-2}` vanishes: the two refining cells cancel exactly.
pub fn martingale_property_check(t: &TorusMDS) -> bool {
    let dim = t.torus_dim();
    let n = t.len().min(ENUMERATION_CAP);
    (2..=n).all(|k| {
        (0..1usize << (k - 2)).into_par_iter().all(|cell| {
            let plus = t.eval_exact(k, &cell_point(cell, dim));
            let minus = t.eval_exact(k, &cell_point(cell | 1 << (k - 2), dim));
            match (plus, minus) {
                (Ok(a), Ok(b)) => (&a + &b).is_zero(),
                _ => false,
            }
        })
    })
}
