//! Truncated Hilbert transform on the line and its transfer to the torus.
//!
//! For a character with frequency `lambda = psi(J)`, the truncated kernel
//! `(1/pi) 1_{1/n <= |t| <= n} / t` acts as multiplication by
//!
//! ```text
//! m_n(lambda) = -(2i/pi) int_{1/n}^{n} sin(lambda s) / s ds
//!             = -(2i/pi) sgn(lambda) int_{|lambda|/n}^{|lambda| n} sin(u)/u du,
//! ```
//!
//! which tends to `-i sgn(lambda)` as `n` grows. The transferred operator is
//! therefore diagonal in the character basis. [`truncated_hilbert_line`]
//! evaluates the convolution directly on sampled data so the reduction can be
//! cross-checked.
//!
//! Note that `|m_n(lambda)|` is not bounded by 1 in general: its supremum
//! over `lambda` approaches `(2/pi) Si(pi) ~ 1.179`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use crate::conjugation::SpectralMultiplier;
use crate::error::{Error, Result};
use crate::index::{Index, TorusPoint};
use crate::orders::psi;
use crate::quadrature::sine_integral_between;
use crate::space::VectorValue;
use crate::torus::TrigPolynomial;

/// Gauss-Legendre points per panel used unless a caller asks otherwise.
pub const DEFAULT_GAUSS_ORDER: usize = 8;

/// `(2/pi) Si(pi)`, the supremum of `|m_n(lambda)|` over all `lambda` and `n`.
pub const MULTIPLIER_SUP: f64 = 1.178_979_744_472_167_3;

/// Value of the truncated Hilbert multiplier at one frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiplierValue(Complex64);

impl MultiplierValue {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    /// `|m + i sgn(lambda)|`.
    pub fn deviation_from_limit(&self, lambda: f64) -> f64 {
        (self.0 + Complex64::new(0.0, lambda.signum() * (lambda != 0.0) as i32 as f64)).norm()
    }
}

/// `m_n(lambda)`; zero for `lambda = 0` or `n <= 1` (empty truncation range).
pub fn hilbert_multiplier(lambda: f64, n: f64, quad_points: usize) -> MultiplierValue {
    if lambda == 0.0 || n <= 1.0 {
        return MultiplierValue(Complex64::new(0.0, 0.0));
    }
    let a = lambda.abs();
    let integral = sine_integral_between(a / n, a * n, quad_points);
    MultiplierValue(Complex64::new(0.0, -2.0 / PI * lambda.signum() * integral))
}

/// Per-run memo of `m_n(lambda)` keyed by the exact bit patterns of `(|lambda|, n)`.
#[derive(Debug)]
pub struct MultiplierCache {
    quad_points: usize,
    values: RwLock<HashMap<(u64, u64), Complex64>>,
}

impl MultiplierCache {
    pub fn new(quad_points: usize) -> Self {
        MultiplierCache { quad_points, values: RwLock::new(HashMap::new()) }
    }

    pub fn get(&self, lambda: f64, n: f64) -> Complex64 {
        let key = (lambda.abs().to_bits(), n.to_bits());
        let cached = self.values.read().expect("cache lock").get(&key).copied();
        let v = cached.unwrap_or_else(|| {
            let v = hilbert_multiplier(lambda.abs(), n, self.quad_points).value();
            self.values.write().expect("cache lock").insert(key, v);
            v
        });
        if lambda < 0.0 {
            Complex64::new(v.re, -v.im)
        } else {
            v
        }
    }
}

impl Default for MultiplierCache {
    fn default() -> Self {
        MultiplierCache::new(DEFAULT_GAUSS_ORDER)
    }
}

/// Symbol `J -> m_n(psi(J))` of the transferred truncated Hilbert transform.
#[derive(Clone, Debug)]
pub struct TransferredSymbol {
    pub weights: Vec<i64>,
    pub truncation: f64,
    cache: Arc<MultiplierCache>,
}

impl TransferredSymbol {
    pub fn new(weights: Vec<i64>, truncation: f64) -> Self {
        Self::with_cache(weights, truncation, Arc::new(MultiplierCache::default()))
    }

    pub fn with_cache(weights: Vec<i64>, truncation: f64, cache: Arc<MultiplierCache>) -> Self {
        TransferredSymbol { weights, truncation, cache }
    }
}

impl SpectralMultiplier for TransferredSymbol {
    fn symbol(&self, j: &Index) -> Result<Complex64> {
        if j.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let lambda = psi(&self.weights, j)?;
        if lambda == 0 {
            return Err(Error::DegenerateOrder(j.clone()));
        }
        Ok(self.cache.get(lambda as f64, self.truncation))
    }
}

/// `a_J -> m_n(psi(J)) a_J`, the transferred truncated Hilbert transform
/// along the orbit `t -> phi(t)` dual to `psi`.
pub fn transferred_truncated(weights: &[i64], f: &TrigPolynomial, n: f64) -> Result<TrigPolynomial> {
    TransferredSymbol::new(weights.to_vec(), n).apply(f)
}

/// Uniform samples `values[k] = f(start + k * step)` of a vector-valued function.
#[derive(Clone, Debug, PartialEq)]
pub struct LineSamples {
    pub start: f64,
    pub step: f64,
    pub values: Vec<VectorValue>,
}

impl LineSamples {
    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    /// Sample nearest to `t`, if it lies within half a step.
    pub fn at(&self, t: f64) -> Option<&VectorValue> {
        let k = ((t - self.start) / self.step).round();
        if k < 0.0 || (self.point(k as usize) - t).abs() > 0.5 * self.step {
            return None;
        }
        self.values.get(k as usize)
    }
}

/// Antiderivatives of the quadratic Lagrange basis on nodes `t = 0, 1, 2`.
fn quadratic_basis_integrals(a: f64, b: f64) -> [f64; 3] {
    let l0 = |t: f64| (t * t * t / 3.0 - 1.5 * t * t + 2.0 * t) / 2.0;
    let l1 = |t: f64| -(t * t * t / 3.0 - t * t);
    let l2 = |t: f64| (t * t * t / 3.0 - t * t / 2.0) / 2.0;
    [l0(b) - l0(a), l1(b) - l1(a), l2(b) - l2(a)]
}

/// Quadrature weights (in units of the step) for `int_{lo}^{hi} g(s) ds`
/// using node values `g(k h)`, `k = first..=first + weights.len() - 1`.
fn line_weights(first: usize, last: usize, lo_gap: f64, hi_gap: f64) -> Vec<f64> {
    let count = last - first + 1;
    let intervals = count - 1;
    let mut w = vec![0.0; count];

    // composite Simpson, with a 3/8 panel at the end for an odd interval count
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals.saturating_sub(3) };
    if intervals == 1 {
        w[0] += 0.5;
        w[1] += 0.5;
    } else {
        for i in (0..simpson_end).step_by(2) {
            w[i] += 1.0 / 3.0;
            w[i + 1] += 4.0 / 3.0;
            w[i + 2] += 1.0 / 3.0;
        }
        if simpson_end < intervals {
            let s = simpson_end;
            w[s] += 3.0 / 8.0;
            w[s + 1] += 9.0 / 8.0;
            w[s + 2] += 9.0 / 8.0;
            w[s + 3] += 3.0 / 8.0;
        }
    }

    // partial end intervals, integrating the interpolant through the
    // three nearest nodes (two when only two exist)
    let mut end_piece = |gap: f64, nodes: [usize; 3]| {
        if gap <= 0.0 {
            return;
        }
        if count >= 3 {
            let q = quadratic_basis_integrals(-gap, 0.0);
            for (node, qi) in nodes.iter().zip(q) {
                w[*node] += qi;
            }
        } else {
            // linear through t = 0, 1
            let a = -gap;
            w[nodes[0]] += -a + a * a / 2.0;
            w[nodes[1]] += -(a * a) / 2.0;
        }
    };
    end_piece(lo_gap, [0, 1, 2.min(count - 1)]);
    end_piece(hi_gap, [count - 1, count.saturating_sub(2), count.saturating_sub(3)]);
    w
}

/// `H_n f(t) = (1/pi) int_{1/n <= |s| <= n} f(t - s) / s ds` on sampled data.
///
/// The odd kernel is folded into `int_{1/n}^{n} (f(t-s) - f(t+s)) / s ds`,
/// whose integrand is smooth, and integrated with composite Simpson weights
/// plus interpolated end pieces. Output is produced at every sample `t`
/// whose window `[t - n, t + n]` is covered.
pub fn truncated_hilbert_line(samples: &LineSamples, n: f64) -> Result<LineSamples> {
    let h = samples.step;
    let cutoff = 1.0 / n;
    if !(h > 0.0) || h >= cutoff {
        return Err(Error::UnresolvedCutoff { step: h, cutoff });
    }
    let dim = samples.values.first().map(VectorValue::dim).ok_or(Error::InsufficientSamples)?;
    let first = (cutoff / h - 1e-9).ceil() as usize;
    let last = (n / h + 1e-9).floor() as usize;
    if last <= first {
        return Err(Error::InsufficientSamples);
    }
    let lo_gap = first as f64 - cutoff / h;
    let hi_gap = n / h - last as f64;
    let weights = line_weights(first, last, lo_gap.max(0.0), hi_gap.max(0.0));

    let len = samples.values.len();
    if len < 2 * last + 1 {
        return Err(Error::InsufficientSamples);
    }
    let scale = h / PI;
    let values = (last..len - last)
        .map(|i| {
            let mut acc = vec![Complex64::new(0.0, 0.0); dim];
            for (offset, w) in weights.iter().enumerate() {
                let k = first + offset;
                let s = k as f64 * h;
                let c = w / s;
                let (minus, plus) = (&samples.values[i - k], &samples.values[i + k]);
                for (slot, (a, b)) in acc.iter_mut().zip(minus.coords().iter().zip(plus.coords())) {
                    *slot += (a - b) * c;
                }
            }
            VectorValue::new(acc.into_iter().map(|z| z * scale).collect())
        })
        .collect();
    Ok(LineSamples { start: samples.point(last), step: h, values })
}

/// Samples `tau -> f(x + phi(tau))` at `tau = k * step`, `|k| <= ceil(half_width / step)`,
/// where `phi(tau)_n = w_n tau` is the orbit dual to `psi`.
pub fn orbit_samples(
    f: &TrigPolynomial,
    weights: &[i64],
    x: &TorusPoint,
    half_width: f64,
    step: f64,
) -> Result<LineSamples> {
    if weights.len() < f.torus_dim() {
        return Err(Error::DimensionMismatch { expected: f.torus_dim(), got: weights.len() });
    }
    if x.dim() != f.torus_dim() {
        return Err(Error::DimensionMismatch { expected: f.torus_dim(), got: x.dim() });
    }
    let k_max = (half_width / step).ceil() as i64;
    let values = (-k_max..=k_max)
        .map(|k| {
            let tau = k as f64 * step;
            let point = TorusPoint::wrapped(x.angles().iter().zip(weights).map(|(xn, w)| xn + *w as f64 * tau));
            f.eval(&point)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LineSamples { start: -(k_max as f64) * step, step, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugation::conjugate;
    use crate::orders::Order;
    use crate::space::NormedSpaceSpec;
    use approx::assert_abs_diff_eq;

    /// Adaptive Simpson on `[a, b]`, independent of the panel rule.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
            let m = 0.5 * (a + b);
            let fm = f(m);
            (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
        }
        #[allow(clippy::too_many_arguments)]
        fn recurse(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            fa: f64,
            b: f64,
            fb: f64,
            m: f64,
            fm: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let (lm, flm, left) = simpson(f, a, fa, m, fm);
            let (rm, frm, right) = simpson(f, m, fm, b, fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
        let (fa, fb) = (f(a), f(b));
        let (m, fm, whole) = simpson(f, a, fa, b, fb);
        recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
    }

    #[test]
    fn multiplier_matches_adaptive_oracle() {
        let oracle_integral = adaptive_simpson(&|s: f64| s.sin() / s, 0.01, 100.0, 1e-12);
        let oracle = -2.0 / PI * oracle_integral;
        let m = hilbert_multiplier(1.0, 100.0, DEFAULT_GAUSS_ORDER).value();
        assert_abs_diff_eq!(m.re, 0.0);
        assert_abs_diff_eq!(m.im, oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(m.im, -0.988, epsilon = 5e-4);
    }

    #[test]
    fn multiplier_basic_properties() {
        assert_eq!(hilbert_multiplier(0.0, 10.0, 8).value(), Complex64::new(0.0, 0.0));
        for (lambda, n) in [(1.0, 10.0), (2.5, 100.0), (0.3, 7.0), (40.0, 3.0)] {
            let a = hilbert_multiplier(lambda, n, 8).value();
            let b = hilbert_multiplier(-lambda, n, 8).value();
            assert_abs_diff_eq!(a.im, -b.im, epsilon = 1e-15);
            assert_abs_diff_eq!(a.re, 0.0);
        }
    }

    #[test]
    fn multiplier_scaling_law() {
        // u = lambda s: m at (2, 50) integrates sin u / u over [2/50, 100]
        let m = hilbert_multiplier(2.0, 50.0, 8).value().im;
        let direct = -2.0 / PI * adaptive_simpson(&|u: f64| u.sin() / u, 2.0 / 50.0, 100.0, 1e-12);
        assert_abs_diff_eq!(m, direct, epsilon = 1e-9);
        // lambda = 1 with an asymmetric range [2/50, 100] is the same integral
        let via_unit = -2.0 / PI * sine_integral_between(2.0 / 50.0, 100.0, 8);
        assert_abs_diff_eq!(m, via_unit, epsilon = 1e-12);
    }

    #[test]
    fn multiplier_sup_is_attained_near_pi() {
        let peak = hilbert_multiplier(PI / 1e3, 1e3, 8).value().norm();
        assert!(peak > 1.17 && peak <= MULTIPLIER_SUP + 1e-9);
    }

    #[test]
    fn cache_returns_same_values() {
        let cache = MultiplierCache::default();
        let a = cache.get(3.0, 20.0);
        let b = cache.get(3.0, 20.0);
        assert_eq!(a, b);
        assert_eq!(a, hilbert_multiplier(3.0, 20.0, DEFAULT_GAUSS_ORDER).value());
    }

    #[test]
    fn transferred_examples() {
        let space = NormedSpaceSpec::scalar();
        let a = Complex64::new(0.7, -0.2);
        let f = TrigPolynomial::scalar(2, [(Index::new(vec![1, 1]), a)]).unwrap();
        let w = vec![1, 2];
        let limit = conjugate(&Order::homomorphism(w.clone()).unwrap(), &f).unwrap();
        let near = transferred_truncated(&w, &f, 1e5).unwrap();
        assert!(near.max_coeff_distance(&limit) < 1e-4);

        let constant = TrigPolynomial::constant(2, space, VectorValue::scalar(a)).unwrap();
        for n in [2.0, 10.0, 1e3] {
            assert!(transferred_truncated(&w, &constant, n).unwrap().is_empty());
        }

        let degenerate = TrigPolynomial::scalar(2, [(Index::new(vec![2, -1]), a)]).unwrap();
        assert!(matches!(transferred_truncated(&w, &degenerate, 10.0), Err(Error::DegenerateOrder(_))));
    }

    fn exp_samples(lambda: f64, half_width: f64, step: f64) -> LineSamples {
        let k = (half_width / step).ceil() as i64;
        LineSamples {
            start: -(k as f64) * step,
            step,
            values: (-k..=k)
                .map(|i| VectorValue::scalar(Complex64::new(0.0, lambda * i as f64 * step).exp()))
                .collect(),
        }
    }

    #[test]
    fn line_transform_of_constant_vanishes() {
        let s = LineSamples { start: 0.0, step: 0.05, values: vec![VectorValue::from_real(&[1.0, -2.0]); 500] };
        let out = truncated_hilbert_line(&s, 10.0).unwrap();
        assert!(!out.values.is_empty());
        for v in &out.values {
            assert!(v.max_modulus() < 1e-12);
        }
    }

    #[test]
    fn line_transform_matches_multiplier() {
        let n = 100.0;
        let s = exp_samples(1.0, 101.0, 0.002);
        let out = truncated_hilbert_line(&s, n).unwrap();
        let at_zero = out.at(0.0).unwrap()[0];
        let m = hilbert_multiplier(1.0, n, 8).value();
        assert!((at_zero - m).norm() < 1e-6, "{at_zero} vs {m}");
        assert_abs_diff_eq!(at_zero.im, -0.988, epsilon = 5e-4);
    }

    #[test]
    fn line_transform_is_linear() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mk = |rng: &mut rand_chacha::ChaCha8Rng| LineSamples {
            start: 0.0,
            step: 0.05,
            values: (0..400)
                .map(|_| VectorValue::new(vec![Complex64::new(rng.gen(), rng.gen()), Complex64::new(rng.gen(), 0.0)]))
                .collect(),
        };
        let (a, b) = (mk(&mut rng), mk(&mut rng));
        let c = Complex64::new(0.3, -1.7);
        let combo = LineSamples {
            start: 0.0,
            step: 0.05,
            values: a.values.iter().zip(&b.values).map(|(x, y)| &x.scale(c) + y).collect(),
        };
        let (ha, hb, hc) = (
            truncated_hilbert_line(&a, 5.0).unwrap(),
            truncated_hilbert_line(&b, 5.0).unwrap(),
            truncated_hilbert_line(&combo, 5.0).unwrap(),
        );
        for ((x, y), z) in ha.values.iter().zip(&hb.values).zip(&hc.values) {
            assert!((&(&x.scale(c) + y) - z).max_modulus() < 1e-10);
        }
    }

    #[test]
    fn line_transform_rejects_coarse_step() {
        let s = exp_samples(1.0, 20.0, 0.1);
        assert!(matches!(truncated_hilbert_line(&s, 10.0), Err(Error::UnresolvedCutoff { .. })));
        let short = exp_samples(1.0, 5.0, 0.01);
        assert_eq!(truncated_hilbert_line(&short, 10.0), Err(Error::InsufficientSamples));
    }

    #[test]
    fn orbit_sampling_follows_psi() {
        let f = TrigPolynomial::scalar(2, [(Index::new(vec![1, -1]), Complex64::new(1.0, 0.0))]).unwrap();
        let w = vec![3, 1];
        let x = TorusPoint::new(vec![0.2, -0.4]).unwrap();
        let s = orbit_samples(&f, &w, &x, 1.0, 0.25).unwrap();
        let chi_x = Index::new(vec![1, -1]).eval_character(&x).unwrap();
        for (k, v) in s.values.iter().enumerate() {
            let tau = s.point(k);
            let expected = chi_x * Complex64::new(0.0, 2.0 * tau).exp();
            assert!((v[0] - expected).norm() < 1e-12);
        }
    }
}
