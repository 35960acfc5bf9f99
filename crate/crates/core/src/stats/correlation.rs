use num_traits::Float;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

fn check_pair(x: usize, y: usize, min: usize) -> Result<()> {
    if x != y {
        return Err(Error::LengthMismatch { left: x, right: y });
    }
    if x < min {
        return Err(Error::TooFewObservations { needed: min, got: x });
    }
    Ok(())
}

fn mean<T: Float>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &b| a + b) / T::from(v.len()).expect("length fits the scalar")
}

/// Product-moment correlation. `None` when either side has zero variance.
pub fn pearson<T: Float>(x: &[T], y: &[T]) -> Result<Option<T>> {
    check_pair(x.len(), y.len(), 2)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Ok(None);
    }
    // sqrt of the product keeps perfectly (anti)monotone inputs at exactly ±1
    let r = sxy / (sxx * syy).sqrt();
    Ok(Some(r.max(-T::one()).min(T::one())))
}

/// Fractional ranks (1-based), ties receive the average of their positions.
pub fn average_ranks<T: Float>(v: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![T::zero(); v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        // positions i..=j share rank (i+1 + j+1) / 2
        let r = T::from(i + j + 2).unwrap() / T::from(2).unwrap();
        for &idx in &order[i..=j] {
            ranks[idx] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Spearman<T> {
    pub rho: Option<T>,
    /// Two-sided, from the t approximation with n − 2 degrees of freedom.
    pub p_value: Option<T>,
    pub n: usize,
}

impl<T: Float> Spearman<T> {
    pub fn stars(&self) -> &'static str {
        self.p_value.and_then(|p| p.to_f64()).map_or("", significance_stars)
    }
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

pub fn spearman<T: Float>(x: &[T], y: &[T]) -> Result<Spearman<T>> {
    check_pair(x.len(), y.len(), 3)?;
    let n = x.len();
    let rho = pearson(&average_ranks(x), &average_ranks(y))?;
    let p_value = rho.map(|r| {
        let r64 = r.to_f64().unwrap();
        let df = (n - 2) as f64;
        let denom = 1.0 - r64 * r64;
        if denom <= 0.0 {
            return T::zero();
        }
        let t = r64 * (df / denom).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        T::from((2.0 * dist.sf(t.abs())).min(1.0)).unwrap()
    });
    Ok(Spearman { rho, p_value, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_basics() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), Some(1.0));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), Some(-1.0));
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[3.0, 2.0, 1.0]).unwrap(), None);
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
        assert!(pearson::<f64>(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn pearson_against_covariance_formula() {
        // cov = 0.1 * sum of products computed by hand:
        // x - 2.5 = (-1.5,-0.5,0.5,1.5); y - 3.75 = (-1.75,0.25,1.25,0.25)
        // sxy = 2.625+(-0.125)+0.625+0.375 = 3.5; sxx = 5; syy = 4.75
        let expected = 3.5 / (5.0f64.sqrt() * 4.75f64.sqrt());
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 5.0, 4.0]).unwrap().unwrap();
        assert!((r - expected).abs() < 1e-15);
        assert!((r - 0.7181848464596079).abs() < 1e-12);
    }

    #[test]
    fn pearson_f32() {
        let r = pearson(&[1.0f32, 2.0, 3.0, 4.0], &[2.0, 4.0, 5.0, 4.0])
            .unwrap()
            .unwrap();
        assert!((r - 0.718_184_8).abs() < 1e-5);
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn spearman_monotone() {
        let s = spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(s.rho, Some(1.0));
        assert_eq!(s.p_value, Some(0.0));
        assert_eq!(s.stars(), "***");
        let s = spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.rho, Some(-1.0));
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap().rho, None);
        assert!(spearman(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn stars_thresholds() {
        assert_eq!(significance_stars(0.0005), "***");
        assert_eq!(significance_stars(0.005), "**");
        assert_eq!(significance_stars(0.03), "*");
        assert_eq!(significance_stars(0.05), "");
    }
}
