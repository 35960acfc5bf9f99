use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, Signed, ToPrimitive};

/// Numeric type the fuzzy evaluation runs on: `f32`, `f64`, or an exact
/// rational. Membership degrees are count ratios, so a rational scalar keeps
/// every identity of the evaluation exact.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug {
    fn from_ratio(num: usize, den: usize) -> Self;

    /// Nearest representable value; rationals approximate with a bounded
    /// denominator.
    fn from_f64(v: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Slack allowed on sums that should equal one.
    fn tolerance() -> Self;

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }
}

impl Scalar for f64 {
    fn from_ratio(num: usize, den: usize) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn from_ratio(num: usize, den: usize) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v as f32)
    }
    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
    fn tolerance() -> Self {
        1e-5
    }
}

impl Scalar for Ratio<i64> {
    fn from_ratio(num: usize, den: usize) -> Self {
        Ratio::new(num as i64, den as i64)
    }
    fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        // Decimal weights (0.25, 1/6 ≈ 0.1666…) round to a denominator of 10^9.
        const DEN: i64 = 1_000_000_000;
        Some(Ratio::new((v * DEN as f64).round() as i64, DEN))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn tolerance() -> Self {
        Ratio::from_integer(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!(<f64 as Scalar>::from_ratio(7, 10), 0.7);
        assert_eq!(<Ratio<i64> as Scalar>::from_ratio(7, 10), Ratio::new(7, 10));
        assert_eq!(<Ratio<i64> as Scalar>::from_f64(0.25), Some(Ratio::new(1, 4)));
        assert!(Ratio::new(1, 3).approx_eq(&Ratio::new(2, 6)));
        assert!(!Ratio::new(1, 3).approx_eq(&Ratio::new(1, 4)));
    }
}
