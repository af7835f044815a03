//! Fourier multipliers on trigonometric polynomials: the conjugate-function
//! operator `T_P`, the block martingale transform, and the composition
//! identity relating the two.
//!
//! Every operator here acts diagonally in the character basis, so it is
//! described by a symbol `J -> m(J)` and applied coefficientwise.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index::Index;
use crate::orders::{Order, SignSequence};
use crate::torus::TrigPolynomial;

/// A diagonal operator `a_J -> m(J) a_J` on trigonometric polynomials.
pub trait SpectralMultiplier: Sync {
    fn symbol(&self, j: &Index) -> Result<Complex64>;

    fn apply(&self, f: &TrigPolynomial) -> Result<TrigPolynomial> {
        f.try_map_coeffs(|j, a| {
            let m = self.symbol(j)?;
            Ok((m != Complex64::new(0.0, 0.0)).then(|| a.scale(m)))
        })
    }
}

/// Symbol `-i sgn_P(J)` of the conjugate-function operator.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugateSymbol(pub Order);

impl SpectralMultiplier for ConjugateSymbol {
    fn symbol(&self, j: &Index) -> Result<Complex64> {
        Ok(Complex64::new(0.0, -(self.0.sgn(j)? as f64)))
    }
}

/// Symbol `eps_{n(J)}` of the martingale transform on block-structured input.
/// The zero index has no block and is rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleSymbol(pub SignSequence);

impl SpectralMultiplier for MartingaleSymbol {
    fn symbol(&self, j: &Index) -> Result<Complex64> {
        if j.is_zero() {
            return Err(Error::NonZeroMean);
        }
        Ok(Complex64::new(self.0.get(j.last_nonzero()) as f64, 0.0))
    }
}

/// `T_P(sum a_J chi_J) = -i sum sgn_P(J) a_J chi_J`.
pub fn conjugate(order: &Order, f: &TrigPolynomial) -> Result<TrigPolynomial> {
    ConjugateSymbol(order.clone()).apply(f)
}

/// Splits a zero-mean polynomial into blocks `Z^k \ Z^{k-1}`, `k = 1..=torus_dim`.
pub fn split_blocks(f: &TrigPolynomial) -> Result<Vec<TrigPolynomial>> {
    if f.has_mean() {
        return Err(Error::NonZeroMean);
    }
    let mut blocks = vec![TrigPolynomial::zero(f.torus_dim(), *f.space()); f.torus_dim()];
    for (j, a) in f.terms() {
        blocks[j.last_nonzero() - 1].add_term(j.clone(), a)?;
    }
    Ok(blocks)
}

/// `sum_k eps_k block_k`, where block `k` (1-based) must have spectrum in
/// `Z^k \ Z^{k-1}`.
pub fn martingale_transform(eps: &SignSequence, blocks: &[TrigPolynomial]) -> Result<TrigPolynomial> {
    let Some(first) = blocks.first() else {
        return Err(Error::MalformedMds("no blocks given".into()));
    };
    let torus_dim = blocks.iter().map(TrigPolynomial::torus_dim).max().unwrap_or(0).max(blocks.len());
    let mut out = TrigPolynomial::zero(torus_dim, *first.space());
    for (k0, block) in blocks.iter().enumerate() {
        let k = k0 + 1;
        if let Some(bad) = block.spectrum().find(|j| j.last_nonzero() != k) {
            return Err(Error::BlockViolation { block: k, index: bad.clone() });
        }
        let sign = Complex64::new(eps.get(k) as f64, 0.0);
        out = out.add(&block.scale(sign))?;
    }
    Ok(out)
}

/// Coefficient distances of `T_P(T_{P(eps)} f)` to `+h` and to `-h`, where
/// `h = sum_k eps_k f_k` is the block-signed sum of `f`.
///
/// A direct computation from the symbol `-i sgn` gives
/// `T_P T_{P(eps)} (a chi_J) = -eps_{n(J)} a chi_J`, so it is the second
/// distance that vanishes.
pub fn composition_residual(eps: &SignSequence, f: &TrigPolynomial) -> Result<(f64, f64)> {
    if f.has_mean() {
        return Err(Error::NonZeroMean);
    }
    let g = conjugate(&Order::RevLex, &conjugate(&Order::twist(eps.clone()), f)?)?;
    let h = martingale_transform(eps, &split_blocks(f)?)?;
    Ok((g.max_coeff_distance(&h), g.max_coeff_distance(&h.neg())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{NormedSpaceSpec, VectorValue};
    use crate::torus::random_block_poly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vec2(a: Complex64, b: Complex64) -> VectorValue {
        VectorValue::new(vec![a, b])
    }

    fn space2() -> NormedSpaceSpec {
        NormedSpaceSpec::new(2, 2.0).unwrap()
    }

    #[test]
    fn conjugate_examples() {
        let a = vec2(c(1.0, 2.0), c(0.5, -1.0));
        let b = vec2(c(-3.0, 0.0), c(0.0, 1.0));

        let f = TrigPolynomial::from_terms(1, space2(), [(Index::new(vec![3]), a.clone())]).unwrap();
        let expected = TrigPolynomial::from_terms(1, space2(), [(Index::new(vec![3]), a.scale(c(0.0, -1.0)))]).unwrap();
        assert!(conjugate(&Order::RevLex, &f).unwrap().approx_eq(&expected));

        let constant = TrigPolynomial::constant(1, space2(), a.clone()).unwrap();
        assert!(conjugate(&Order::RevLex, &constant).unwrap().is_empty());

        let f = TrigPolynomial::from_terms(
            1,
            space2(),
            [(Index::new(vec![1]), a.clone()), (Index::new(vec![-1]), b.clone())],
        )
        .unwrap();
        // coefficientwise: -i * (+1) * a, -i * (-1) * b
        let expected = TrigPolynomial::from_terms(
            1,
            space2(),
            [(Index::new(vec![1]), a.scale(c(0.0, -1.0))), (Index::new(vec![-1]), b.scale(c(0.0, 1.0)))],
        )
        .unwrap();
        assert!(conjugate(&Order::RevLex, &f).unwrap().approx_eq(&expected));
    }

    #[test]
    fn conjugate_rejects_degenerate_homomorphism() {
        let f = TrigPolynomial::scalar(2, [(Index::new(vec![2, -1]), c(1.0, 0.0))]).unwrap();
        let hom = Order::homomorphism(vec![1, 2]).unwrap();
        assert!(matches!(conjugate(&hom, &f), Err(Error::DegenerateOrder(_))));
    }

    #[test]
    fn martingale_transform_examples() {
        let f = random_block_poly(2, space2(), 2, 3, 4);
        let blocks = split_blocks(&f).unwrap();
        let same = martingale_transform(&SignSequence::all_positive(), &blocks).unwrap();
        assert!(same.approx_eq(&f));

        let single = martingale_transform(&SignSequence::new(vec![-1]).unwrap(), &blocks[..1]).unwrap();
        assert!(single.approx_eq(&blocks[0].neg()));

        let mixed = martingale_transform(&SignSequence::new(vec![1, -1]).unwrap(), &blocks).unwrap();
        for (j, a) in f.terms() {
            let expected = if j.last_nonzero() == 1 { a.clone() } else { -a };
            assert_eq!(mixed.coeff(j).unwrap(), &expected);
        }
    }

    #[test]
    fn martingale_transform_checks_blocks() {
        let wrong = TrigPolynomial::scalar(2, [(Index::new(vec![0, 1]), c(1.0, 0.0))]).unwrap();
        let err = martingale_transform(&SignSequence::all_positive(), &[wrong]).unwrap_err();
        assert!(matches!(err, Error::BlockViolation { block: 1, .. }));
    }

    #[test]
    fn composition_residual_examples() {
        let eps = SignSequence::new(vec![1, -1, -1]).unwrap();
        let a = vec2(c(0.3, 0.1), c(-1.0, 2.0));
        for j in [vec![2], vec![1, -3], vec![0, 0, 1]] {
            let f = TrigPolynomial::from_terms(3, space2(), [(Index::new(j), a.clone())]).unwrap();
            let (plus, minus) = composition_residual(&eps, &f).unwrap();
            assert_eq!(minus, 0.0);
            assert!(plus > 0.0);
        }

        let f = random_block_poly(3, space2(), 2, 3, 1);
        let (_, minus) = composition_residual(&SignSequence::constant(-1, 3), &f).unwrap();
        assert_eq!(minus, 0.0);
        // with eps = -1 everywhere the composite is +f
        let g =
            conjugate(&Order::RevLex, &conjugate(&Order::twist(SignSequence::constant(-1, 3)), &f).unwrap()).unwrap();
        assert!(g.approx_eq(&f));

        let zero = TrigPolynomial::zero(2, space2());
        assert_eq!(composition_residual(&eps, &zero).unwrap(), (0.0, 0.0));

        let with_mean = TrigPolynomial::constant(1, space2(), a).unwrap();
        assert_eq!(composition_residual(&eps, &with_mean), Err(Error::NonZeroMean));
    }
}
