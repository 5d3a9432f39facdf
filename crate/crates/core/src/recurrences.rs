//! Exact recursions linking bond and cyclic-bond polynomials, their
//! specializations at `t = 0`, and the king / cylindrical-king ratio table.
//!
//! Polynomial sequences are passed as slices indexed from order 0, so
//! `bs[k]` is `B_k(t)` with `B_0 = 1`. Every division that must be exact goes
//! through [`IntPoly::div_exact_scalar`] or [`exact_div`]; a remainder is
//! reported as an error rather than rounded.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{CountRow, Oracle, OracleError};
use crate::poly::{Binomial, IntPoly, PolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecurrenceError {
    #[error("need terms for orders 0..={needed}, got {got}")]
    TooFewTerms { needed: usize, got: usize },
    #[error("order {n} is below the minimum {min} for this identity")]
    OrderTooSmall { n: usize, min: usize },
    #[error("{value} is not divisible by {divisor} ({context})")]
    NotDivisible { value: BigInt, divisor: BigInt, context: &'static str },
    #[error("polynomial division failed ({context}): {source}")]
    Poly { context: &'static str, source: PolyError },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn poly_err(context: &'static str) -> impl Fn(PolyError) -> RecurrenceError {
    move |source| RecurrenceError::Poly { context, source }
}

/// Integer division that fails instead of truncating.
pub fn exact_div(value: &BigInt, divisor: &BigInt, context: &'static str) -> Result<BigInt, RecurrenceError> {
    let fail = || RecurrenceError::NotDivisible { value: value.clone(), divisor: divisor.clone(), context };
    if divisor.is_zero() {
        return Err(fail());
    }
    let (q, r) = value.div_rem(divisor);
    if !r.is_zero() {
        return Err(fail());
    }
    Ok(q)
}

fn big(n: usize) -> BigInt {
    BigInt::from(n)
}

/// `(t - 1)^i`
fn tm1(i: usize) -> IntPoly {
    IntPoly::pow_binomial(Binomial::TMinusOne, i)
}

fn one_minus_t() -> IntPoly {
    IntPoly::pow_binomial(Binomial::OneMinusT, 1)
}

/// Order `n` encoded by a slice holding orders `0..=n`, with `n >= min`.
fn order_of<T>(terms: &[T], min: usize) -> Result<usize, RecurrenceError> {
    let n = terms.len().checked_sub(1).ok_or(RecurrenceError::TooFewTerms { needed: min, got: 0 })?;
    if n < min {
        return Err(RecurrenceError::OrderTooSmall { n, min });
    }
    Ok(n)
}

/// Bond polynomials restricted to a fixed extreme value.
///
/// * `b1` sums `t^bnd` over permutations starting with `n`,
/// * `b2` over those ending with `n`,
/// * `x = b1 + b2`,
/// * `cz` sums `t^cbnd` over permutations ending with `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntermediatePolys {
    pub n: usize,
    pub b1: IntPoly,
    pub b2: IntPoly,
    pub x: IntPoly,
    pub cz: IntPoly,
}

/// Builds the intermediate polynomials for order `n = bs.len() - 1` from
/// `B_0..B_n`.
///
/// `b1`/`b2` come from the one-step recursion `B^j_k = B_{k-1} + (t-1) B^j_{k-1}`
/// with `B^j_1 = 1`; `x` comes from the closed form
/// `2 * sum_{i=1..n} (t-1)^{i-1} B_{n-i}`; `cz` for `n >= 3` comes from
/// `CZ_n = (B_{n-1} - X_{n-1}) + t X_{n-1}`. The small orders take the
/// directly enumerated values `CZ_1 = 1` and `CZ_2 = t^2`.
pub fn intermediates(bs: &[IntPoly]) -> Result<IntermediatePolys, RecurrenceError> {
    let n = order_of(bs, 1)?;
    let mut b1 = vec![IntPoly::zero(), IntPoly::one()];
    let mut b2 = b1.clone();
    for k in 2..=n {
        let next1 = &bs[k - 1] + &(&tm1(1) * &b1[k - 1]);
        let next2 = &bs[k - 1] + &(&tm1(1) * &b2[k - 1]);
        b1.push(next1);
        b2.push(next2);
    }
    let x = closed_form_x(bs, n);
    let cz = match n {
        1 => IntPoly::one(),
        2 => IntPoly::monomial(1, 2),
        _ => {
            let prev_x = &b1[n - 1] + &b2[n - 1];
            &(&bs[n - 1] - &prev_x) + &prev_x.shift_up(1)
        }
    };
    Ok(IntermediatePolys { n, b1: b1.swap_remove(n), b2: b2.swap_remove(n), x, cz })
}

/// `X_n = 2 * sum_{i=1..n} (t-1)^{i-1} B_{n-i}`
fn closed_form_x(bs: &[IntPoly], n: usize) -> IntPoly {
    let mut acc = IntPoly::zero();
    for i in 1..=n {
        acc += &(&tm1(i - 1) * &bs[n - i]);
    }
    acc.scale(&big(2))
}

/// `CB_{n+1}` from `B_0..B_n` (`n >= 2`):
/// `(n+1) B_n + 2(n+1) sum_{i=1..n} (t-1)^i B_{n-i}`.
pub fn cb_from_b(bs: &[IntPoly]) -> Result<IntPoly, RecurrenceError> {
    let n = order_of(bs, 2)?;
    let mut sum = IntPoly::zero();
    for i in 1..=n {
        sum += &(&tm1(i) * &bs[n - i]);
    }
    Ok(&bs[n].scale(&big(n + 1)) + &sum.scale(&big(2 * (n + 1))))
}

/// `B_n` from `CB_n` (`n >= 1`): `CB_n + (1-t) CB_n' / n`. The division by
/// `n` must be exact.
pub fn b_from_cb(n: usize, cb: &IntPoly) -> Result<IntPoly, RecurrenceError> {
    if n == 0 {
        return Err(RecurrenceError::OrderTooSmall { n, min: 1 });
    }
    let correction = (&one_minus_t() * &cb.derivative())
        .div_exact_scalar(&big(n))
        .map_err(poly_err("(1-t) CB_n' / n"))?;
    Ok(cb + &correction)
}

/// `(1-t) CB_k' / k`, zero for `k = 0` where the derivative vanishes.
fn derivative_term(k: usize, cb: &IntPoly) -> Result<IntPoly, RecurrenceError> {
    if k == 0 {
        debug_assert!(cb.derivative().is_zero());
        return Ok(IntPoly::zero());
    }
    (&one_minus_t() * &cb.derivative())
        .div_exact_scalar(&big(k))
        .map_err(poly_err("(1-t) CB_k' / k"))
}

/// `CB_{n+1}` from `CB_0..CB_n` alone (`n >= 2`).
///
/// Obtained by replacing each `B_k` in [`cb_from_b`] with
/// `CB_k + (1-t) CB_k' / k`, so each derivative term carries its own `1/k`:
///
/// `(n+1) [CB_n + 2 sum (t-1)^i CB_{n-i}]
///   + (n+1) (1-t) [CB_n'/n + 2 sum (t-1)^i CB_{n-i}'/(n-i)]`.
///
/// Every `1/k` division is exact.
pub fn cb_self_recursion(cbs: &[IntPoly]) -> Result<IntPoly, RecurrenceError> {
    let n = order_of(cbs, 2)?;
    let mut plain = cbs[n].clone();
    let mut deriv = derivative_term(n, &cbs[n])?;
    for i in 1..=n {
        let w = tm1(i);
        plain += &(&w * &cbs[n - i]).scale(&big(2));
        deriv += &(&w * &derivative_term(n - i, &cbs[n - i])?).scale(&big(2));
    }
    Ok((&plain + &deriv).scale(&big(n + 1)))
}

/// The variant with a single `(n+1)/n` factor in front of the whole
/// derivative bracket. It agrees with [`cb_self_recursion`] at `n = 2` and
/// breaks from `n = 3` on, usually by failing the divisibility by `n`.
pub fn cb_self_recursion_printed(cbs: &[IntPoly]) -> Result<IntPoly, RecurrenceError> {
    let n = order_of(cbs, 2)?;
    let mut plain = cbs[n].clone();
    let mut deriv = cbs[n].derivative();
    for i in 1..=n {
        let w = tm1(i);
        plain += &(&w * &cbs[n - i]).scale(&big(2));
        deriv += &(&w * &cbs[n - i].derivative()).scale(&big(2));
    }
    let deriv = (&one_minus_t() * &deriv)
        .scale(&big(n + 1))
        .div_exact_scalar(&big(n))
        .map_err(poly_err("(n+1)/n (1-t) [..]'"))?;
    Ok(&plain.scale(&big(n + 1)) + &deriv)
}

/// `|CK_{n+1}|` from `|K_0|..|K_n|` (`n >= 2`).
pub fn ck_from_k(kings: &[BigInt]) -> Result<BigInt, RecurrenceError> {
    let n = order_of(kings, 2)?;
    let alternating: BigInt = (1..=n).map(|i| sign(i) * &kings[n - i]).sum();
    Ok(big(n + 1) * &kings[n] + big(2 * (n + 1)) * alternating)
}

/// `|K_n| = |CK_n| + |CB_{1,n}| / n`, with exact division.
pub fn k_from_ck_cb1(n: usize, ck: &BigInt, cb1: &BigInt) -> Result<BigInt, RecurrenceError> {
    if n == 0 {
        return Err(RecurrenceError::OrderTooSmall { n, min: 1 });
    }
    Ok(ck + exact_div(cb1, &big(n), "|CB_1,n| / n")?)
}

/// `|CK_{n+1}|` from `|CK_0..n|` and `|CB_{1,0..n}|` (`n >= 2`): the constant
/// term of [`cb_self_recursion`], using `CB_k'(0) = |CB_{1,k}|`.
pub fn ck_self_recursion(ck: &[BigInt], cb1: &[BigInt]) -> Result<BigInt, RecurrenceError> {
    let n = order_of(ck, 2)?;
    if cb1.len() != ck.len() {
        return Err(RecurrenceError::TooFewTerms { needed: n, got: cb1.len().saturating_sub(1) });
    }
    let plain: BigInt = &ck[n] + big(2) * (1..=n).map(|i| sign(i) * &ck[n - i]).sum::<BigInt>();
    let mut deriv = exact_div(&cb1[n], &big(n), "|CB_1,n| / n")?;
    for i in 1..n {
        deriv += big(2) * sign(i) * exact_div(&cb1[n - i], &big(n - i), "|CB_1,k| / k")?;
    }
    Ok(big(n + 1) * (plain + deriv))
}

/// The single-factor variant matching [`cb_self_recursion_printed`].
pub fn ck_self_recursion_printed(ck: &[BigInt], cb1: &[BigInt]) -> Result<BigInt, RecurrenceError> {
    let n = order_of(ck, 2)?;
    if cb1.len() != ck.len() {
        return Err(RecurrenceError::TooFewTerms { needed: n, got: cb1.len().saturating_sub(1) });
    }
    let plain: BigInt = &ck[n] + big(2) * (1..=n).map(|i| sign(i) * &ck[n - i]).sum::<BigInt>();
    let bracket: BigInt = &cb1[n] + big(2) * (1..=n).map(|i| sign(i) * &cb1[n - i]).sum::<BigInt>();
    let deriv = exact_div(&(big(n + 1) * bracket), &big(n), "(n+1)/n (..)")?;
    Ok(big(n + 1) * plain + deriv)
}

fn sign(i: usize) -> BigInt {
    if i.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ARow {
    pub n: usize,
    #[serde(with = "crate::serde_dec")]
    pub a_n: BigInt,
    /// `|K_n| - |A_n|`
    #[serde(with = "crate::serde_dec")]
    pub implied_ck: BigInt,
}

/// `|A_n| = 2|K_{n-1}| + |A_{n-2}|` for `n = 5..=kings.len()-1`, seeded with
/// `|A_3|` and `|A_4|`. Rows start at `n = 3`.
pub fn a_recursion_table(kings: &[BigInt], a3: &BigInt, a4: &BigInt) -> Result<Vec<ARow>, RecurrenceError> {
    let max_n = order_of(kings, 4)?;
    let mut a = vec![BigInt::zero(); max_n + 1];
    a[3] = a3.clone();
    a[4] = a4.clone();
    for n in 5..=max_n {
        a[n] = big(2) * &kings[n - 1] + &a[n - 2];
    }
    Ok((3..=max_n)
        .map(|n| ARow { n, a_n: a[n].clone(), implied_ck: &kings[n] - &a[n] })
        .collect())
}

/// `|CK_n| / |K_n|` together with the right-hand side
/// `1 - 2|K_{n-1}|/|K_n| - |K_{n-2}|/|K_n| + |CK_{n-2}|/|K_n|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioRow {
    pub n: usize,
    #[serde(with = "crate::serde_dec")]
    pub ratio: BigRational,
    pub decimal: String,
    #[serde(with = "crate::serde_dec::opt")]
    pub decomposition: Option<BigRational>,
}

impl RatioRow {
    pub fn identity_holds(&self) -> bool {
        self.decomposition.as_ref().is_none_or(|d| *d == self.ratio)
    }
}

/// Ratio rows from a contiguous count table starting at `n = 1`. Orders with
/// no kings (`n = 2, 3`) are skipped.
pub fn ratio_rows(rows: &[CountRow]) -> Vec<RatioRow> {
    let kings = |n: usize| -> BigInt {
        if n == 0 { BigInt::one() } else { BigInt::from(rows[n - 1].kings.clone()) }
    };
    let cyl = |n: usize| -> BigInt {
        if n == 0 { BigInt::one() } else { BigInt::from(rows[n - 1].cyl_kings.clone()) }
    };
    rows.iter()
        .filter(|r| !r.kings.is_zero())
        .map(|r| {
            let n = r.n;
            let kn = kings(n);
            let ratio = BigRational::new(cyl(n), kn.clone());
            let decomposition = (n >= 3).then(|| {
                BigRational::one() - BigRational::new(big(2) * kings(n - 1), kn.clone())
                    - BigRational::new(kings(n - 2), kn.clone())
                    + BigRational::new(cyl(n - 2), kn.clone())
            });
            RatioRow { n, decimal: to_decimal(&ratio, 6), ratio, decomposition }
        })
        .collect()
}

/// [`ratio_rows`] over backtracking counts for `1..=max_n`.
pub fn ratio_table(oracle: &Oracle, max_n: usize) -> Result<Vec<RatioRow>, RecurrenceError> {
    Ok(ratio_rows(&oracle.count_table(max_n)?))
}

/// Fixed-point rendering rounded half away from zero.
pub fn to_decimal(r: &BigRational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = r * BigRational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let (int, frac) = rounded.abs().div_rem(&scale);
    let sign = if rounded.is_negative() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{frac:0>width$}", width = digits as usize)
}

/// `BigUint` to `BigInt` for a whole column.
pub fn signed(v: &[BigUint]) -> Vec<BigInt> {
    v.iter().map(|x| BigInt::from(x.clone())).collect()
}
