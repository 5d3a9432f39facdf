//! Truncated power series in `z` whose coefficients are polynomials in `u`.
//!
//! Used to expand the marked-permutation generating function `F(z, u)`, the
//! cyclic-bond generating function `H(z, u) = F(z, u - 1)`, and
//! `CK(z) = H(z, 0)`. Rational factors such as `1 / (1 - z(u-1))` are
//! expanded as truncated geometric series, so everything stays in the
//! integer polynomial ring.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::IntPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("geometric expansion needs a series without constant term")]
    NonzeroConstant,
}

/// `sum_{n=0..=order} coeffs[n](u) z^n`, with everything above `z^order`
/// discarded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UPolySeries {
    order: usize,
    coeffs: Vec<IntPoly>,
}

impl UPolySeries {
    pub fn zero(order: usize) -> Self {
        UPolySeries { order, coeffs: vec![IntPoly::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        Self::monomial(order, IntPoly::one(), 0)
    }

    /// `c(u) z^k`; zero if `k` lies beyond the truncation.
    pub fn monomial(order: usize, c: IntPoly, k: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    /// Pads with zeros or drops terms above `order`.
    pub fn from_coeffs(order: usize, mut coeffs: Vec<IntPoly>) -> Self {
        coeffs.resize(order + 1, IntPoly::zero());
        UPolySeries { order, coeffs }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[IntPoly] {
        &self.coeffs
    }

    /// Coefficient of `z^n`.
    pub fn coeff(&self, n: usize) -> &IntPoly {
        &self.coeffs[n]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(IntPoly::is_zero)
    }

    /// Re-truncates to a lower order.
    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order, "cannot raise truncation order {} to {order}", self.order);
        UPolySeries { order, coeffs: self.coeffs[..=order].to_vec() }
    }

    fn check(&self, other: &Self) -> Result<(), SeriesError> {
        if self.order != other.order {
            return Err(SeriesError::OrderMismatch { left: self.order, right: other.order });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(UPolySeries { order: self.order, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(UPolySeries { order: self.order, coeffs })
    }

    /// Cauchy product modulo `z^(order+1)`.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check(other)?;
        let mut out = Self::zero(self.order);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=self.order - i].iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i + j] += &(a * b);
                }
            }
        }
        Ok(out)
    }

    /// Multiplies every coefficient by the polynomial `c(u)`.
    pub fn scale(&self, c: &IntPoly) -> Self {
        UPolySeries { order: self.order, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn scale_int(&self, c: &BigInt) -> Self {
        UPolySeries { order: self.order, coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect() }
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut out = Self::zero(self.order);
        for n in k..=self.order {
            out.coeffs[n] = self.coeffs[n - k].clone();
        }
        out
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one(self.order);
        for _ in 0..e {
            acc = acc.mul(self).expect("same order");
        }
        acc
    }

    /// `1 / (1 - self)` for a series without constant term.
    pub fn geometric(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let mut acc = Self::one(self.order);
        let mut power = Self::one(self.order);
        // self has z-valuation >= 1, so self^j vanishes for j > order.
        for _ in 0..self.order {
            power = power.mul(self)?;
            acc = acc.add(&power)?;
        }
        Ok(acc)
    }

    /// Applies `f` to each coefficient polynomial.
    pub fn map_coeffs(&self, f: impl Fn(&IntPoly) -> IntPoly) -> Self {
        UPolySeries { order: self.order, coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Each coefficient evaluated at `u = 0`.
    pub fn constant_terms(&self) -> Vec<BigInt> {
        self.coeffs.iter().map(IntPoly::eval_at_zero).collect()
    }
}

fn factorial(m: usize) -> BigInt {
    (1..=m).map(BigInt::from).product()
}

/// Ordinary runs: `z + sum_{k>=2} 2 z^k u^(k-1)`, built term by term.
pub fn run_factor(order: usize) -> UPolySeries {
    let mut coeffs = vec![IntPoly::zero(), IntPoly::one()];
    coeffs.extend((2..=order).map(|k| IntPoly::monomial(2, k - 1)));
    UPolySeries::from_coeffs(order, coeffs)
}

/// The wrapping last run: `z + sum_{k>=2} 2k z^k u^(k-1)`.
pub fn last_run_factor(order: usize) -> UPolySeries {
    let mut coeffs = vec![IntPoly::zero(), IntPoly::one()];
    coeffs.extend((2..=order).map(|k| IntPoly::monomial(2 * k as i64, k - 1)));
    UPolySeries::from_coeffs(order, coeffs)
}

/// Marked-permutation generating function
/// `F(z, u) = -2 z^2 u + sum_{m>=1} m! R^(m-1) L`.
///
/// `R^(m-1)` has z-valuation `m - 1` and `L` valuation 1, so terms with
/// `m > order` vanish; the sum is cut at `m = order + 1` and is exact.
pub fn series_f(order: usize) -> UPolySeries {
    let r = run_factor(order);
    let l = last_run_factor(order);
    let mut total = UPolySeries::monomial(order, IntPoly::monomial(-2, 1), 2);
    let mut r_power = UPolySeries::one(order);
    for m in 1..=order + 1 {
        let term = r_power.mul(&l).expect("same order").scale_int(&factorial(m));
        total = total.add(&term).expect("same order");
        r_power = r_power.mul(&r).expect("same order");
    }
    total
}

/// `H(z, u) = F(z, u - 1)`: substitution in every coefficient.
pub fn series_h(order: usize) -> UPolySeries {
    let minus_one = -BigInt::one();
    series_f(order).map_coeffs(|c| c.translate(&minus_one))
}

/// `H(z, u)` from the closed form
/// `-2z^2 w + sum m! z^(m-1) ((1+zw)/(1-zw))^(m-1) (z + 2z(2zw - (zw)^2)/(1-zw)^2)`
/// with `w = u - 1`, expanding each denominator geometrically.
pub fn series_h_closed_form(order: usize) -> UPolySeries {
    let w = IntPoly::from_i64s(&[-1, 1]);
    let zw = UPolySeries::monomial(order, w.clone(), 1);
    let inv = zw.geometric().expect("zw has no constant term");
    let one = UPolySeries::one(order);
    let z = UPolySeries::monomial(order, IntPoly::one(), 1);

    let ratio = one.add(&zw).and_then(|s| s.mul(&inv)).expect("same order");
    let numer = zw.scale_int(&BigInt::from(2)).sub(&zw.mul(&zw).expect("same order")).expect("same order");
    let last = z
        .add(
            &z.scale_int(&BigInt::from(2))
                .mul(&numer)
                .and_then(|s| s.mul(&inv))
                .and_then(|s| s.mul(&inv))
                .expect("same order"),
        )
        .expect("same order");

    let mut total = UPolySeries::monomial(order, w.scale(&BigInt::from(-2)), 2);
    let mut ratio_power = UPolySeries::one(order);
    for m in 1..=order + 1 {
        let term = ratio_power.shift(m - 1).mul(&last).expect("same order").scale_int(&factorial(m));
        total = total.add(&term).expect("same order");
        ratio_power = ratio_power.mul(&ratio).expect("same order");
    }
    total
}

/// Coefficients of `CK(z) = H(z, 0)`, indexed by `n = 0..=order`.
pub fn series_ck(order: usize) -> Vec<BigInt> {
    series_h(order).constant_terms()
}

/// The closed form
/// `2z^2 + sum m! z^(m-1) ((1-z)/(1+z))^(m-1) z (1-2z-z^2)^e / (1+z)^2`
/// for a chosen exponent `e`. With `e = 1` it equals `H(z, 0)`; the form with
/// `e = 2` does not.
pub fn series_ck_printed(order: usize, exponent: u32) -> Vec<BigInt> {
    let c = |v: i64| IntPoly::constant(v);
    let z = UPolySeries::monomial(order, IntPoly::one(), 1);
    let one = UPolySeries::one(order);
    let inv_one_plus_z = z.scale_int(&BigInt::from(-1)).geometric().expect("no constant term");
    let ratio = one.sub(&z).and_then(|s| s.mul(&inv_one_plus_z)).expect("same order");

    let quad = UPolySeries::from_coeffs(order, vec![c(1), c(-2), c(-1)]);
    let last = z
        .mul(&quad.pow(exponent as usize))
        .and_then(|s| s.mul(&inv_one_plus_z))
        .and_then(|s| s.mul(&inv_one_plus_z))
        .expect("same order");

    let mut total = UPolySeries::monomial(order, c(2), 2);
    let mut ratio_power = UPolySeries::one(order);
    for m in 1..=order + 1 {
        let term = ratio_power.shift(m - 1).mul(&last).expect("same order").scale_int(&factorial(m));
        total = total.add(&term).expect("same order");
        ratio_power = ratio_power.mul(&ratio).expect("same order");
    }
    total.constant_terms()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn ring_basics() {
        let z = UPolySeries::monomial(1, IntPoly::one(), 1);
        assert!(z.mul(&z).unwrap().is_zero());
        let s = UPolySeries::from_coeffs(4, vec![p(&[1]), p(&[0, 3]), p(&[2])]);
        assert!(s.mul(&UPolySeries::zero(4)).unwrap().is_zero());
        assert_eq!(
            s.add(&UPolySeries::zero(3)),
            Err(SeriesError::OrderMismatch { left: 4, right: 3 })
        );

        let n = 6;
        let one_minus_z = UPolySeries::from_coeffs(n, vec![p(&[1]), p(&[-1])]);
        let geo = UPolySeries::from_coeffs(n, vec![p(&[1]); n + 1]);
        assert_eq!(one_minus_z.mul(&geo).unwrap(), UPolySeries::one(n));
        assert_eq!(UPolySeries::one(3).geometric(), Err(SeriesError::NonzeroConstant));
    }

    #[test]
    fn run_factors() {
        let r = run_factor(4);
        assert_eq!(r.coeffs()[..4], [p(&[]), p(&[1]), p(&[0, 2]), p(&[0, 0, 2])]);
        let l = last_run_factor(4);
        assert_eq!(l.coeff(1), &p(&[1]));
        assert_eq!(l.coeff(2), &p(&[0, 4]));
        assert_eq!(l.coeff(3), &p(&[0, 0, 6]));
    }

    #[test]
    fn marked_series_low_orders() {
        let f = series_f(3);
        assert!(f.coeff(0).is_zero());
        assert_eq!(f.coeff(1), &p(&[1]));
        assert_eq!(f.coeff(2), &p(&[2, 2]));
        assert_eq!(f.coeff(3), &p(&[6, 12, 6]));
    }

    #[test]
    fn cyclic_series_low_orders() {
        let h = series_h(5);
        assert_eq!(h.coeff(1), &p(&[1]));
        assert_eq!(h.coeff(2), &p(&[0, 2]));
        assert_eq!(h.coeff(3), &p(&[0, 0, 6]));
        assert_eq!(h.coeff(5).eval_at_zero(), 10.into());
    }

    #[test]
    fn two_constructions_agree() {
        for n in 1..=12 {
            assert_eq!(series_h(n), series_h_closed_form(n), "order {n}");
        }
    }

    #[test]
    fn cylindrical_king_coefficients() {
        assert_eq!(series_ck(9)[1..], ints(&[1, 0, 0, 0, 10, 60, 462, 3920, 36954])[..]);
        assert_eq!(series_ck(10)[10], 382740.into());
        assert_eq!(series_ck_printed(9, 1), series_ck(9));
        assert_eq!(series_ck_printed(1, 1)[1], 1.into());
        // The squared factor already disagrees with |CK_2| = 0.
        assert_eq!(series_ck_printed(4, 2)[2], (-2).into());
    }

    #[test]
    fn truncation_is_stable() {
        for n in 1..=9 {
            assert_eq!(series_f(n + 3).truncate(n), series_f(n));
            assert_eq!(series_h(n + 3).truncate(n), series_h(n));
            assert_eq!(series_ck(n + 3)[..=n], series_ck(n)[..]);
        }
    }

    #[test]
    fn serde_roundtrip() {
        let h = series_h(6);
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(serde_json::from_str::<UPolySeries>(&json).unwrap(), h);
    }
}
