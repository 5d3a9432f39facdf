//! Dense univariate polynomials with arbitrary-precision integer coefficients.
//!
//! Coefficients are stored lowest degree first and always normalized: no
//! trailing zero, and the zero polynomial is the empty vector.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("coefficient {coefficient} of exponent {exponent} is not divisible by {divisor}")]
    NotDivisible { exponent: usize, coefficient: BigInt, divisor: BigInt },
    #[error("division by zero")]
    ZeroDivisor,
}

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

/// The two linear bases that appear raised to powers in the bond recursions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binomial {
    /// `t - 1`
    TMinusOne,
    /// `1 - t`
    OneMinusT,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_coeffs(vec![c.into()])
    }

    /// `c * x^k`
    pub fn monomial(c: impl Into<BigInt>, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c.into();
        Self::from_coeffs(coeffs)
    }

    /// The variable itself.
    pub fn x() -> Self {
        Self::monomial(1, 1)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `x^k`, zero above the degree.
    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        IntPoly { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiplication by `x^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        IntPoly { coeffs }
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    /// Coefficient-wise exact division. Fails on the lowest exponent whose
    /// coefficient is not a multiple of `divisor`.
    pub fn div_exact_scalar(&self, divisor: &BigInt) -> Result<Self, PolyError> {
        if divisor.is_zero() {
            return Err(PolyError::ZeroDivisor);
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (exponent, c) in self.coeffs.iter().enumerate() {
            let (q, r) = c.div_rem(divisor);
            if !r.is_zero() {
                return Err(PolyError::NotDivisible {
                    exponent,
                    coefficient: c.clone(),
                    divisor: divisor.clone(),
                });
            }
            coeffs.push(q);
        }
        Ok(IntPoly { coeffs })
    }

    pub fn eval_at_zero(&self) -> BigInt {
        self.coeff(0)
    }

    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// `base^i` for one of the linear bases `t - 1`, `1 - t`.
    pub fn pow_binomial(base: Binomial, i: usize) -> Self {
        let b = match base {
            Binomial::TMinusOne => Self::from_i64s(&[-1, 1]),
            Binomial::OneMinusT => Self::from_i64s(&[1, -1]),
        };
        b.pow(i)
    }

    pub fn pow(&self, mut e: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Composition `p(x + c)`, computed by Horner's scheme.
    pub fn translate(&self, c: &BigInt) -> Self {
        let shift = Self::from_coeffs(vec![c.clone(), BigInt::one()]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, a| &(&acc * &shift) + &Self::constant(a.clone()))
    }

    /// Human-readable form, descending exponents: `2*t^2 + 4*t`.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let term = match k {
                0 => format!("{}", c.abs()),
                1 => format!("{}*{var}", c.abs()),
                _ => format!("{}*{var}^{k}", c.abs()),
            };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            out.push_str(&term);
        }
        out
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("t"))
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPoly({})", self.render("t"))
    }
}

impl<'a> Add<&'a IntPoly> for &'a IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let (long, short) =
            if self.coeffs.len() >= rhs.coeffs.len() { (self, rhs) } else { (rhs, self) };
        let mut coeffs = long.coeffs.clone();
        for (a, b) in coeffs.iter_mut().zip(&short.coeffs) {
            *a += b;
        }
        IntPoly::from_coeffs(coeffs)
    }
}

impl Add for IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: IntPoly) -> IntPoly {
        &self + &rhs
    }
}

impl AddAssign<&IntPoly> for IntPoly {
    fn add_assign(&mut self, rhs: &IntPoly) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), BigInt::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl<'a> Sub<&'a IntPoly> for &'a IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        self + &(-rhs)
    }
}

impl Sub for IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: IntPoly) -> IntPoly {
        &self - &rhs
    }
}

impl<'a> Mul<&'a IntPoly> for &'a IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        IntPoly::from_coeffs(coeffs)
    }
}

impl Mul for IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: IntPoly) -> IntPoly {
        &self * &rhs
    }
}

/// Serialized as the coefficient list (lowest degree first) of decimal
/// strings, so JSON consumers never see a lossy number.
impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.coeffs.iter().map(|c| c.to_string()))
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        let coeffs = raw
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntPoly::from_coeffs(coeffs))
    }
}
