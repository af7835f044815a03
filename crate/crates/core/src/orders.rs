//! Orders on the weak direct product `Z^inf*` and their signum functions.
//!
//! Three families are representable: the reversed lexicographic order
//! (sign of the last nonzero coordinate), its sign-twisted variants `P(eps)`,
//! and orders induced by an integer homomorphism `psi(J) = sum j_n w_n`.
//! All sign decisions use exact integer arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::Index;

/// Sign sequence `(eps_n)` in `{-1, +1}`, implicitly `+1` past its stored length.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignSequence(Vec<i8>);

impl SignSequence {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::Parse(format!("sign entries must be -1 or 1, got {bad}")));
        }
        Ok(SignSequence(signs))
    }

    pub fn all_positive() -> Self {
        SignSequence(Vec::new())
    }

    pub fn constant(sign: i8, len: usize) -> Self {
        assert!(sign == 1 || sign == -1);
        SignSequence(vec![sign; len])
    }

    /// Pattern of length `len` whose bit `k` (0-based) set means `eps_{k+1} = -1`.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        SignSequence((0..len).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect())
    }

    /// `eps_n` (1-based). `eps_0` is taken as `+1`, which only matters for the
    /// zero index, where every signum vanishes anyway.
    pub fn get(&self, n: usize) -> i8 {
        if n == 0 {
            return 1;
        }
        self.0.get(n - 1).copied().unwrap_or(1)
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }
}

impl TryFrom<Vec<i8>> for SignSequence {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        SignSequence::new(v)
    }
}

impl From<SignSequence> for Vec<i8> {
    fn from(s: SignSequence) -> Self {
        s.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum OrderRepr {
    Revlex,
    Twist { eps: SignSequence },
    Hom { w: Vec<i64> },
}

/// An order `P` on `Z^inf*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "OrderRepr", into = "OrderRepr")]
pub enum Order {
    RevLex,
    SignTwisted(SignSequence),
    /// Homomorphism-induced order. Weights are nonzero.
    Homomorphism(Vec<i64>),
}

impl TryFrom<OrderRepr> for Order {
    type Error = Error;

    fn try_from(r: OrderRepr) -> Result<Self> {
        match r {
            OrderRepr::Revlex => Ok(Order::RevLex),
            OrderRepr::Twist { eps } => Ok(Order::SignTwisted(eps)),
            OrderRepr::Hom { w } => Order::homomorphism(w),
        }
    }
}

impl From<Order> for OrderRepr {
    fn from(o: Order) -> Self {
        match o {
            Order::RevLex => OrderRepr::Revlex,
            Order::SignTwisted(eps) => OrderRepr::Twist { eps },
            Order::Homomorphism(w) => OrderRepr::Hom { w },
        }
    }
}

impl Order {
    pub fn homomorphism(weights: Vec<i64>) -> Result<Self> {
        if let Some(pos) = weights.iter().position(|w| *w == 0) {
            return Err(Error::ZeroWeight(pos + 1));
        }
        Ok(Order::Homomorphism(weights))
    }

    /// The twisted order `P(eps)`.
    pub fn twist(eps: SignSequence) -> Self {
        Order::SignTwisted(eps)
    }

    /// `sgn_P(chi_J)` in `{-1, 0, 1}`.
    pub fn sgn(&self, j: &Index) -> Result<i8> {
        match self {
            Order::RevLex => Ok(j.leading().signum() as i8),
            Order::SignTwisted(eps) => Ok(eps.get(j.last_nonzero()) * j.leading().signum() as i8),
            Order::Homomorphism(w) => {
                let value = psi(w, j)?;
                if value == 0 && !j.is_zero() {
                    return Err(Error::DegenerateOrder(j.clone()));
                }
                Ok(value.signum() as i8)
            }
        }
    }
}

/// Exact `psi(J) = sum_n j_n w_n`.
pub fn psi(weights: &[i64], j: &Index) -> Result<i128> {
    if weights.len() < j.last_nonzero() {
        return Err(Error::WeightsTooShort { weights: weights.len(), index: j.clone() });
    }
    Ok(j.entries().iter().zip(weights).map(|(&a, &b)| a as i128 * b as i128).sum())
}

/// Integer weights `w` with `sgn(sum j_n w_n) = sgn_P(chi_J)` for every `J` in `set`.
///
/// With `B` the largest absolute coordinate in `set`, `|w_1| = 1` and
/// `|w_{k+1}| = 1 + B * sum_{i<=k} |w_i|`, so the last nonzero coordinate of
/// each `J` dominates `psi(J)`. The sign of `w_k` is `eps_k` for a twisted
/// order. Weights grow roughly like `(B+1)^k`; construction fails with
/// [`Error::Overflow`] instead of wrapping.
pub fn separating_homomorphism(set: &[Index], order: &Order) -> Result<Vec<i64>> {
    let eps = match order {
        Order::RevLex => SignSequence::all_positive(),
        Order::SignTwisted(eps) => eps.clone(),
        Order::Homomorphism(_) => return Err(Error::UnsupportedOrder),
    };
    let len = set.iter().map(Index::last_nonzero).max().unwrap_or(0).max(1);
    let bound = set.iter().map(Index::max_abs).max().unwrap_or(0);

    let mut weights = Vec::with_capacity(len);
    let mut abs_sum: i64 = 0;
    for k in 1..=len {
        let magnitude = if k == 1 {
            1
        } else {
            bound.checked_mul(abs_sum).and_then(|x| x.checked_add(1)).ok_or(Error::Overflow)?
        };
        abs_sum = abs_sum.checked_add(magnitude).ok_or(Error::Overflow)?;
        weights.push(eps.get(k) as i64 * magnitude);
    }
    Ok(weights)
}

/// Checks `sgn_P(chi_J) = sgn(psi(J))` on every element of `set`.
/// Weights that fail to cover some `J` make the check fail.
pub fn verify_separation(set: &[Index], weights: &[i64], order: &Order) -> bool {
    set.iter().all(|j| match (psi(weights, j), order.sgn(j)) {
        (Ok(value), Ok(s)) => value.signum() as i8 == s,
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(v: &[i64]) -> Index {
        Index::new(v.to_vec())
    }

    #[test]
    fn signum_examples() {
        assert_eq!(Order::RevLex.sgn(&Index::zero()).unwrap(), 0);
        assert_eq!(Order::RevLex.sgn(&idx(&[1, -2])).unwrap(), -1);
        let tw = Order::twist(SignSequence::new(vec![-1, 1]).unwrap());
        assert_eq!(tw.sgn(&idx(&[7])).unwrap(), -1);
        let hom = Order::homomorphism(vec![1, 6]).unwrap();
        // 5*1 + (-1)*6 = -1
        assert_eq!(5i128 - 6, -1);
        assert_eq!(hom.sgn(&idx(&[5, -1])).unwrap(), -1);
    }

    #[test]
    fn twist_examples() {
        let plus = Order::twist(SignSequence::all_positive());
        let minus = Order::twist(SignSequence::constant(-1, 6));
        for v in [vec![1], vec![0, -3], vec![2, 0, 1], vec![-1, -1, -1, 5]] {
            let j = Index::new(v);
            assert_eq!(plus.sgn(&j).unwrap(), Order::RevLex.sgn(&j).unwrap());
            assert_eq!(minus.sgn(&j).unwrap(), -Order::RevLex.sgn(&j).unwrap());
        }
        let tw = Order::twist(SignSequence::new(vec![-1, 1, -1]).unwrap());
        assert_eq!(tw.sgn(&idx(&[0, -4])).unwrap(), -1);
    }

    #[test]
    fn homomorphism_errors() {
        assert_eq!(Order::homomorphism(vec![1, 0]).unwrap_err(), Error::ZeroWeight(2));
        let hom = Order::homomorphism(vec![1, 2]).unwrap();
        assert!(matches!(hom.sgn(&idx(&[0, 0, 1])), Err(Error::WeightsTooShort { .. })));
        assert_eq!(hom.sgn(&idx(&[2, -1])), Err(Error::DegenerateOrder(idx(&[2, -1]))));
        assert_eq!(hom.sgn(&Index::zero()).unwrap(), 0);
    }

    #[test]
    fn separation_examples() {
        assert_eq!(separating_homomorphism(&[Index::zero()], &Order::RevLex).unwrap(), vec![1]);
        assert_eq!(separating_homomorphism(&[], &Order::RevLex).unwrap(), vec![1]);

        let set = vec![idx(&[1, 0]), idx(&[0, 1]), idx(&[5, -1]), idx(&[-3, 2])];
        let w = separating_homomorphism(&set, &Order::RevLex).unwrap();
        assert_eq!(w, vec![1, 6]);
        let values: Vec<i128> = set.iter().map(|j| psi(&w, j).unwrap()).collect();
        assert_eq!(values, vec![1, 6, -1, 9]);
        // exhaustive sign comparison against the rev-lex rule
        for j in &set {
            assert_eq!(psi(&w, j).unwrap().signum() as i64, j.leading().signum());
        }
        assert!(verify_separation(&set, &w, &Order::RevLex));

        let single = vec![idx(&[0, 0, 2])];
        let w = separating_homomorphism(&single, &Order::RevLex).unwrap();
        assert!(psi(&w, &single[0]).unwrap() > 0);
    }

    #[test]
    fn verify_examples() {
        assert!(!verify_separation(&[idx(&[1])], &[-1], &Order::RevLex));
        assert!(verify_separation(&[], &[5], &Order::RevLex));
        assert!(!verify_separation(&[idx(&[0, 1])], &[1], &Order::RevLex));
    }

    #[test]
    fn separation_rejects_homomorphism_order() {
        let hom = Order::homomorphism(vec![1]).unwrap();
        assert_eq!(separating_homomorphism(&[idx(&[1])], &hom), Err(Error::UnsupportedOrder));
    }

    #[test]
    fn separation_overflow_is_reported() {
        let big = vec![Index::new(vec![1 << 20; 8])];
        assert_eq!(separating_homomorphism(&big, &Order::RevLex), Err(Error::Overflow));
    }

    #[test]
    fn order_json() {
        let cases = [
            (Order::RevLex, r#"{"kind":"revlex"}"#),
            (Order::twist(SignSequence::new(vec![-1, 1, 1]).unwrap()), r#"{"kind":"twist","eps":[-1,1,1]}"#),
            (Order::homomorphism(vec![1, 6]).unwrap(), r#"{"kind":"hom","w":[1,6]}"#),
        ];
        for (order, text) in cases {
            assert_eq!(serde_json::to_string(&order).unwrap(), text);
            assert_eq!(serde_json::from_str::<Order>(text).unwrap(), order);
        }
        assert!(serde_json::from_str::<Order>(r#"{"kind":"hom","w":[1,0]}"#).is_err());
        assert!(serde_json::from_str::<Order>(r#"{"kind":"twist","eps":[2]}"#).is_err());
    }
}
