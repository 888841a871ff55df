//! Scalar calculus on truncated power series.
//!
//! The higher-order product, chain, reciprocal and quotient rules are
//! evaluated here as literal sums over labeled subsets and set partitions of
//! the increments `{η₁, …, ηₙ}`. With all increments equal the functional
//! differentials collapse to ordinary derivatives at a point, which lets the
//! sums be checked exactly against power-series multiplication and long
//! division.

use crate::combinatorics::{enumerate_partitions, IndexSubset, PartitionTable, MAX_GROUND};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Truncated formal power series `Σ_{k≤N} cₖ xᵏ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> PowerSeries<S> {
    /// Series of order `coeffs.len() - 1`. An empty vector is the zero
    /// series of order 0.
    pub fn new(mut coeffs: Vec<S>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(S::zero());
        }
        PowerSeries { coeffs }
    }

    /// Pads with zeros (or truncates) to the given order.
    pub fn with_order(mut coeffs: Vec<S>, order: usize) -> Self {
        coeffs.resize(order + 1, S::zero());
        PowerSeries { coeffs }
    }

    pub fn constant(c: S, order: usize) -> Self {
        Self::with_order(vec![c], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    /// Value at the expansion point.
    pub fn at_zero(&self) -> S {
        self.coeffs[0].clone()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_orders(self, other)?;
        Ok(PowerSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn scale(&self, c: &S) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }
}

fn check_orders<S: Scalar>(a: &PowerSeries<S>, b: &PowerSeries<S>) -> Result<()> {
    if a.order() != b.order() {
        return Err(Error::OrderMismatch(a.order(), b.order()));
    }
    Ok(())
}

/// Cauchy product truncated at the common order.
pub fn series_mul<S: Scalar>(a: &PowerSeries<S>, b: &PowerSeries<S>) -> Result<PowerSeries<S>> {
    check_orders(a, b)?;
    let n = a.order();
    let coeffs = (0..=n)
        .map(|k| {
            (0..=k).fold(S::zero(), |acc, j| {
                acc + a.coeffs[j].clone() * b.coeffs[k - j].clone()
            })
        })
        .collect();
    Ok(PowerSeries { coeffs })
}

/// Long division `h = f / g`: `hₖ = (fₖ − Σ_{j<k} hⱼ g_{k−j}) / g₀`.
pub fn series_div<S: Scalar>(f: &PowerSeries<S>, g: &PowerSeries<S>) -> Result<PowerSeries<S>> {
    check_orders(f, g)?;
    let g0 = g.coeffs[0].clone();
    if g0.is_zero() {
        return Err(Error::ZeroConstantTerm);
    }
    let mut h: Vec<S> = Vec::with_capacity(f.coeffs.len());
    for k in 0..f.coeffs.len() {
        let mut acc = f.coeffs[k].clone();
        for (j, hj) in h.iter().enumerate() {
            acc -= hj.clone() * g.coeffs[k - j].clone();
        }
        h.push(acc / g0.clone());
    }
    Ok(PowerSeries { coeffs: h })
}

/// `d[k]` is the k-th derivative of a function at a fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeVector<S>(pub Vec<S>);

impl<S: Scalar> DerivativeVector<S> {
    pub fn new(d: Vec<S>) -> Self {
        DerivativeVector(d)
    }

    /// `d[k] = k!·cₖ`.
    pub fn from_series(s: &PowerSeries<S>) -> Self {
        let mut fact = S::one();
        let d = s
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= S::from_u64(k as u64);
                }
                c.clone() * fact.clone()
            })
            .collect();
        DerivativeVector(d)
    }

    /// `cₖ = d[k]/k!`.
    pub fn to_series(&self) -> PowerSeries<S> {
        let mut fact = S::one();
        let coeffs = self
            .0
            .iter()
            .enumerate()
            .map(|(k, d)| {
                if k > 0 {
                    fact *= S::from_u64(k as u64);
                }
                d.clone() / fact.clone()
            })
            .collect();
        PowerSeries::new(coeffs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }
}

fn need<S>(v: &DerivativeVector<S>, n: usize) -> Result<()> {
    if v.0.len() < n + 1 {
        return Err(Error::LengthMismatch {
            len: v.0.len(),
            needed: n + 1,
        });
    }
    if n > MAX_GROUND {
        return Err(Error::OrderExceeded {
            order: n,
            max: MAX_GROUND,
        });
    }
    Ok(())
}

/// `Σ_{Φ⊆{η₁..ηₙ}} δ^{|Φ|}f · δ^{n−|Φ|}g`, one term per labeled subset.
pub fn leibniz_subset_sum<S: Scalar>(
    f: &DerivativeVector<S>,
    g: &DerivativeVector<S>,
    n: usize,
) -> Result<S> {
    need(f, n)?;
    need(g, n)?;
    let mut acc = S::zero();
    for mask in 0u32..1 << n {
        let k = mask.count_ones() as usize;
        acc += f.0[k].clone() * g.0[n - k].clone();
    }
    Ok(acc)
}

/// `Σ_k C(n,k) f⁽ᵏ⁾ g⁽ⁿ⁻ᵏ⁾`.
pub fn leibniz_binomial<S: Scalar>(
    f: &DerivativeVector<S>,
    g: &DerivativeVector<S>,
    n: usize,
) -> Result<S> {
    need(f, n)?;
    need(g, n)?;
    let mut acc = S::zero();
    let mut c = S::one();
    for k in 0..=n {
        acc += c.clone() * f.0[k].clone() * g.0[n - k].clone();
        c = c * S::from_u64((n - k) as u64) / S::from_u64(k as u64 + 1);
    }
    Ok(acc)
}

/// n-th differential of a product by the labeled subset sum, cross-checked
/// against the binomial form.
pub fn leibniz_nth<S: Scalar>(
    f: &DerivativeVector<S>,
    g: &DerivativeVector<S>,
    n: usize,
) -> Result<S> {
    let labeled = leibniz_subset_sum(f, g, n)?;
    let collapsed = leibniz_binomial(f, g, n)?;
    if !labeled.close_to(&collapsed) {
        return Err(Error::LeibnizMismatch(n));
    }
    Ok(labeled)
}

/// `Σ_π outer(|π|) · ∏_{ω∈π} g[|ω|]` over every set partition of `n`
/// labeled increments.
fn partition_sum<S: Scalar>(table: &PartitionTable, outer: &[S], g: &[S]) -> S {
    let mut acc = S::zero();
    for blocks in table.partitions() {
        let mut term = outer[blocks.len()].clone();
        for &b in blocks {
            term *= g[b.count_ones() as usize].clone();
        }
        acc += term;
    }
    acc
}

/// Chain rule for `f∘g`: `Σ_π f^{(|π|)}(g(y)) ∏_{ω∈π} g^{(|ω|)}(y)`.
///
/// `f_at_g[k]` holds the k-th derivative of the outer function evaluated at
/// `g(y)`.
pub fn faadibruno_nth<S: Scalar>(
    f_at_g: &DerivativeVector<S>,
    g: &DerivativeVector<S>,
    n: usize,
) -> Result<S> {
    need(f_at_g, n)?;
    need(g, n)?;
    Ok(partition_sum(&PartitionTable::new(n), &f_at_g.0, &g.0))
}

/// `(−1)ᵏ k! / g₀ᵏ⁺¹` for `k = 0..=n`: derivatives of `1/x` at `x = g₀`.
pub fn reciprocal_prefactors<S: Scalar>(g0: &S, n: usize) -> Result<Vec<S>> {
    if g0.is_zero() {
        return Err(Error::ZeroConstantTerm);
    }
    let inv = S::one() / g0.clone();
    let mut out = Vec::with_capacity(n + 1);
    let mut c = inv.clone();
    for k in 0..=n {
        out.push(c.clone());
        c = -c * S::from_u64(k as u64 + 1) * inv.clone();
    }
    Ok(out)
}

/// n-th differential of `1/g`.
pub fn reciprocal_nth<S: Scalar>(g: &DerivativeVector<S>, n: usize) -> Result<S> {
    need(g, n)?;
    let prefactors = reciprocal_prefactors(&g.0[0], n)?;
    Ok(partition_sum(&PartitionTable::new(n), &prefactors, &g.0))
}

/// Quotient rule: `Σ_{Π⊆Ξ} [Σ_{π of Π} (−1)^{|π|}|π|!/g₀^{|π|+1} ∏ g^{(|ω|)}] f^{(n−|Π|)}`.
///
/// The bracket depends only on `|Π|` when all increments coincide, so it is
/// evaluated once per subset size and reused across the `2ⁿ` subsets.
pub fn quotient_nth<S: Scalar>(
    f: &DerivativeVector<S>,
    g: &DerivativeVector<S>,
    n: usize,
) -> Result<S> {
    need(f, n)?;
    need(g, n)?;
    let prefactors = reciprocal_prefactors(&g.0[0], n)?;
    let inner: Vec<S> = (0..=n)
        .map(|k| partition_sum(&PartitionTable::new(k), &prefactors, &g.0))
        .collect();
    let mut acc = S::zero();
    for mask in 0u32..1 << n {
        let k = mask.count_ones() as usize;
        acc += inner[k].clone() * f.0[n - k].clone();
    }
    Ok(acc)
}

/// Literal quotient rule: partitions of every subset are enumerated
/// afresh. Returns the value and the number of `(Π, π)` terms evaluated.
pub fn quotient_nth_literal<S: Scalar>(
    f: &DerivativeVector<S>,
    g: &DerivativeVector<S>,
    n: usize,
) -> Result<(S, u64)> {
    need(f, n)?;
    need(g, n)?;
    let prefactors = reciprocal_prefactors(&g.0[0], n)?;
    let mut acc = S::zero();
    let mut terms = 0u64;
    for mask in 0u32..1 << n {
        let subset = IndexSubset::from_mask(mask);
        let mut inner = S::zero();
        for pi in enumerate_partitions(&subset) {
            terms += 1;
            let mut term = prefactors[pi.len()].clone();
            for block in pi.blocks() {
                term *= g.0[block.len()].clone();
            }
            inner += term;
        }
        acc += inner * f.0[n - subset.len()].clone();
    }
    Ok((acc, terms))
}

/// Forward difference `(Ψ(ψ+εξ) − Ψ(ψ))/ε`.
pub fn finite_difference_differential<F>(
    functional: F,
    psi: &PowerSeries<f64>,
    xi: &PowerSeries<f64>,
    eps: f64,
) -> Result<f64>
where
    F: Fn(&PowerSeries<f64>) -> f64,
{
    let shifted = psi.add(&xi.scale(&eps))?;
    Ok((functional(&shifted) - functional(psi)) / eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| q(x, 1)).collect()
    }

    fn series(v: &[i64], order: usize) -> PowerSeries<Rational> {
        PowerSeries::with_order(ints(v), order)
    }

    fn dv(v: &[i64], len: usize) -> DerivativeVector<Rational> {
        let mut d = ints(v);
        d.resize(len, Rational::from_i64(0));
        DerivativeVector(d)
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(
            series_mul(&series(&[1, 1], 2), &series(&[1, -1], 2)).unwrap(),
            series(&[1, 0, -1], 2)
        );
        assert_eq!(
            series_mul(&series(&[1, 1, 1], 2), &series(&[1], 2)).unwrap(),
            series(&[1, 1, 1], 2)
        );
        assert_eq!(
            series_mul(&series(&[1; 6], 5), &series(&[1, -1], 5)).unwrap(),
            series(&[1], 5)
        );
        assert_eq!(
            series_mul(&series(&[1], 2), &series(&[1], 3)),
            Err(Error::OrderMismatch(2, 3))
        );
    }

    #[test]
    fn division_examples() {
        assert_eq!(
            series_div(&series(&[1], 5), &series(&[1, -1], 5)).unwrap(),
            series(&[1; 6], 5)
        );
        let g = series(&[3, -2, 7, 1], 3);
        assert_eq!(series_div(&g, &g).unwrap(), series(&[1], 3));
        assert_eq!(
            series_div(&series(&[1, 0, -1], 3), &series(&[1, -1], 3)).unwrap(),
            series(&[1, 1], 3)
        );
        assert_eq!(
            series_div(&series(&[1], 3), &series(&[0, 1], 3)),
            Err(Error::ZeroConstantTerm)
        );
    }

    #[test]
    fn derivative_vector_round_trip() {
        let s = PowerSeries::new(vec![q(1, 2), q(-1, 3), q(5, 7), q(2, 1)]);
        let d = DerivativeVector::from_series(&s);
        assert_eq!(d.0[3], q(12, 1));
        assert_eq!(d.to_series(), s);
    }

    #[test]
    fn leibniz_examples() {
        let f = dv(&[3], 1);
        let g = dv(&[5], 1);
        assert_eq!(leibniz_nth(&f, &g, 0).unwrap(), q(15, 1));
        let x = dv(&[0, 1], 3);
        assert_eq!(leibniz_nth(&x, &x, 2).unwrap(), q(2, 1));
        let e = dv(&[1, 1, 1, 1], 4);
        assert_eq!(leibniz_nth(&e, &e, 3).unwrap(), q(8, 1));
        assert!(matches!(
            leibniz_nth(&dv(&[1], 2), &e, 3),
            Err(Error::LengthMismatch { len: 2, needed: 4 })
        ));
    }

    // exp(x²) = Σ x^{2k}/k!, so the n-th derivative at 0 is n!/(n/2)! for even n
    fn exp_x2_derivative(n: usize) -> Rational {
        if n % 2 == 1 {
            return q(0, 1);
        }
        Rational::factorial(n) / Rational::factorial(n / 2)
    }

    #[test]
    fn chain_rule_examples() {
        // f = exp evaluated at g(0) = 0, so every derivative is 1
        let f = dv(&[1; 9], 9);
        let g = dv(&[0, 0, 2], 9);
        assert_eq!(faadibruno_nth(&f, &g, 2).unwrap(), q(2, 1));
        assert_eq!(faadibruno_nth(&f, &g, 4).unwrap(), q(12, 1));
        for n in 0..=8 {
            assert_eq!(
                faadibruno_nth(&f, &g, n).unwrap(),
                exp_x2_derivative(n),
                "n = {n}"
            );
        }
        let f1 = dv(&[4, 7], 2);
        let g1 = dv(&[2, 3], 2);
        assert_eq!(faadibruno_nth(&f1, &g1, 1).unwrap(), q(21, 1));
    }

    #[test]
    fn reciprocal_examples() {
        let g = dv(&[2, 5], 3);
        assert_eq!(reciprocal_nth(&g, 0).unwrap(), q(1, 2));
        let one_minus_x = dv(&[1, -1], 9);
        for n in 0..=8 {
            let oracle = series_div(&series(&[1], 8), &series(&[1, -1], 8)).unwrap();
            let expected = oracle.coeff(n) * Rational::factorial(n);
            assert_eq!(reciprocal_nth(&one_minus_x, n).unwrap(), expected);
            assert_eq!(expected, Rational::factorial(n));
        }
        assert_eq!(reciprocal_nth(&dv(&[1, 1], 4), 3).unwrap(), q(-6, 1));
        assert_eq!(
            reciprocal_nth(&dv(&[0, 1], 4), 3),
            Err(Error::ZeroConstantTerm)
        );
    }

    #[test]
    fn quotient_examples() {
        let g = dv(&[3, -1, 4, 1, -5, 9, 2, -6, 5], 9);
        for n in 0..=8 {
            let expected = if n == 0 { q(1, 1) } else { q(0, 1) };
            assert_eq!(quotient_nth(&g, &g, n).unwrap(), expected);
            let one = dv(&[1], 9);
            assert_eq!(
                quotient_nth(&one, &g, n).unwrap(),
                reciprocal_nth(&g, n).unwrap()
            );
        }
        // sin-like numerator over 1 − x
        let sin = PowerSeries::new(vec![
            q(0, 1),
            q(1, 1),
            q(0, 1),
            q(-1, 6),
            q(0, 1),
            q(1, 120),
            q(0, 1),
            q(-1, 5040),
            q(0, 1),
        ]);
        let den = series(&[1, -1], 8);
        let oracle = series_div(&sin, &den).unwrap();
        let fd = DerivativeVector::from_series(&sin);
        let gd = DerivativeVector::from_series(&den);
        for n in 0..=8 {
            assert_eq!(
                quotient_nth(&fd, &gd, n).unwrap(),
                oracle.coeff(n) * Rational::factorial(n)
            );
        }
    }

    #[test]
    fn literal_quotient_matches_memoized_and_counts_terms() {
        let f = dv(&[2, -1, 3, 0, 5, 1, -2], 7);
        let g = dv(&[-3, 2, 1, 1, -4, 2, 6], 7);
        let bells = [1u64, 1, 2, 5, 15, 52, 203, 877];
        for n in 0..=6 {
            let (v, terms) = quotient_nth_literal(&f, &g, n).unwrap();
            assert_eq!(v, quotient_nth(&f, &g, n).unwrap());
            assert_eq!(terms, bells[n + 1]);
        }
    }

    fn square_at_zero(s: &PowerSeries<f64>) -> f64 {
        s.at_zero() * s.at_zero()
    }

    #[test]
    fn finite_difference_examples() {
        let psi = PowerSeries::new(vec![2.0, 0.5, -1.0]);
        let xi = PowerSeries::new(vec![1.0, 3.0, 2.0]);
        for eps in [1.0, 0.1, 1e-3] {
            let v = finite_difference_differential(|s| s.at_zero(), &psi, &xi, eps).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
        let v = finite_difference_differential(square_at_zero, &psi, &xi, 1e-6).unwrap();
        assert!((v - 4.0).abs() < 1e-5);
        let err = |eps: f64| {
            (finite_difference_differential(square_at_zero, &psi, &xi, eps).unwrap() - 4.0).abs()
        };
        let ratio = err(1e-3) / err(5e-4);
        assert!((ratio - 2.0).abs() < 1e-3, "ratio = {ratio}");
    }

    fn rational_poly(max_len: usize) -> impl Strategy<Value = Vec<Rational>> {
        prop::collection::vec((-12i64..=12, 1i64..=4), 1..=max_len).prop_map(|v| {
            v.into_iter()
                .map(|(n, d)| q(n.clamp(-3 * d, 3 * d), d))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn quotient_matches_long_division(f in rational_poly(9), mut g in rational_poly(9)) {
            if g[0] == q(0, 1) {
                g[0] = q(1, 1);
            }
            let fs = PowerSeries::with_order(f, 8);
            let gs = PowerSeries::with_order(g, 8);
            let h = series_div(&fs, &gs).unwrap();
            let fd = DerivativeVector::from_series(&fs);
            let gd = DerivativeVector::from_series(&gs);
            for n in 0..=8 {
                prop_assert_eq!(quotient_nth(&fd, &gd, n).unwrap(), h.coeff(n) * Rational::factorial(n));
            }
        }

        #[test]
        fn reciprocal_is_chain_rule_of_inverse(mut g in rational_poly(9)) {
            if g[0] == q(0, 1) {
                g[0] = q(-2, 3);
            }
            let gd = DerivativeVector::from_series(&PowerSeries::with_order(g, 8));
            let outer = DerivativeVector(reciprocal_prefactors(&gd.0[0], 8).unwrap());
            for n in 0..=8 {
                prop_assert_eq!(reciprocal_nth(&gd, n).unwrap(), faadibruno_nth(&outer, &gd, n).unwrap());
            }
        }

        #[test]
        fn leibniz_matches_cauchy_product(f in rational_poly(9), g in rational_poly(9)) {
            let fs = PowerSeries::with_order(f, 8);
            let gs = PowerSeries::with_order(g, 8);
            let prod = series_mul(&fs, &gs).unwrap();
            let fd = DerivativeVector::from_series(&fs);
            let gd = DerivativeVector::from_series(&gs);
            for n in 0..=8 {
                let v = leibniz_nth(&fd, &gd, n).unwrap();
                prop_assert_eq!(&v, &leibniz_binomial(&fd, &gd, n).unwrap());
                prop_assert_eq!(v, prod.coeff(n) * Rational::factorial(n));
            }
        }

        #[test]
        fn product_then_quotient_recovers_numerator(f in rational_poly(7), mut g in rational_poly(7)) {
            if g[0] == q(0, 1) {
                g[0] = q(1, 2);
            }
            let fd = DerivativeVector::from_series(&PowerSeries::with_order(f, 6));
            let gd = DerivativeVector::from_series(&PowerSeries::with_order(g, 6));
            let prod = DerivativeVector((0..=6).map(|n| leibniz_nth(&fd, &gd, n).unwrap()).collect());
            for n in 0..=6 {
                prop_assert_eq!(quotient_nth(&prod, &gd, n).unwrap(), fd.0[n].clone());
            }
        }
    }
}
