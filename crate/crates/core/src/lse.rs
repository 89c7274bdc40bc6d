//! Streaming log-sum-exp accumulation.
//!
//! All sums in this crate are sums of positive terms given by their logarithms, so a
//! running maximum plus a rescaled partial sum loses nothing but rounding.

use crate::scalar::Scalar;

/// `ln Σ exp(wᵢ)` accumulated one term at a time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogSumExp<T> {
    max: T,
    scaled: T,
}

impl<T: Scalar> Default for LogSumExp<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> LogSumExp<T> {
    pub fn new() -> Self {
        Self { max: T::neg_infinity(), scaled: T::zero() }
    }

    #[inline]
    pub fn push(&mut self, w: T) {
        if w == T::neg_infinity() {
            return;
        }
        if w <= self.max {
            self.scaled = self.scaled + (w - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - w).exp() + T::one();
            self.max = w;
        }
    }

    /// Merges another accumulator; order of merging is the caller's reduction order.
    pub fn merge(&mut self, other: &Self) {
        if other.max == T::neg_infinity() {
            return;
        }
        if self.max == T::neg_infinity() {
            *self = *other;
            return;
        }
        if other.max <= self.max {
            self.scaled = self.scaled + other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.max == T::neg_infinity()
    }

    /// The log of the accumulated sum; `-inf` for an empty sum.
    pub fn value(&self) -> T {
        if self.is_empty() {
            T::neg_infinity()
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `ln Σ exp(wᵢ)` over a slice.
pub fn log_sum_exp<T: Scalar>(ws: &[T]) -> T {
    let mut acc = LogSumExp::new();
    for &w in ws {
        acc.push(w);
    }
    acc.value()
}
