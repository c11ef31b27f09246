//! Integer-coefficient univariate polynomials in the acceptance probability p.
//!
//! Coefficients fit in i128 comfortably: for an ordered graph on n <= 20
//! vertices every coefficient of the expectation polynomial is bounded in
//! magnitude by n * 4^n < 2^45.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::rat::Rat;

/// Dense polynomial; `coeffs[t]` multiplies `p^t`. Trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectationPolynomial {
    coeffs: Vec<i128>,
}

impl ExpectationPolynomial {
    pub fn new(mut coeffs: Vec<i128>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        ExpectationPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        ExpectationPolynomial { coeffs: alloc::vec![0] }
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, p: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * p + Rat::from_integer(BigInt::from(c));
        }
        acc
    }

    pub fn eval_f64(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * p + c as f64;
        }
        acc
    }

    pub fn derivative(&self) -> ExpectationPolynomial {
        if self.coeffs.len() <= 1 {
            return ExpectationPolynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(t, &c)| c * t as i128)
            .collect();
        ExpectationPolynomial::new(coeffs)
    }

    pub fn add(&self, other: &ExpectationPolynomial) -> ExpectationPolynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = alloc::vec![0i128; n];
        for (t, c) in coeffs.iter_mut().enumerate() {
            if t < self.coeffs.len() {
                *c += self.coeffs[t];
            }
            if t < other.coeffs.len() {
                *c += other.coeffs[t];
            }
        }
        ExpectationPolynomial::new(coeffs)
    }

    /// Sign of the exact value at `p`, avoiding rational reduction overhead.
    pub fn sign_at(&self, p: &Rat) -> i32 {
        let v = self.eval(p);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }
}
