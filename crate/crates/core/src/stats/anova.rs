use num_traits::Float;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anova<T> {
    pub f: T,
    pub p_value: T,
    pub df_between: usize,
    pub df_within: usize,
    /// Within-group mean square, reused by Tukey HSD.
    pub ms_within: T,
}

pub(crate) fn check_groups<T>(groups: &[Vec<T>]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: groups.len(),
        });
    }
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: g.len(),
        });
    }
    Ok(())
}

pub(crate) fn group_mean<T: Float>(g: &[T]) -> T {
    g.iter().fold(T::zero(), |a, &b| a + b) / T::from(g.len()).unwrap()
}

/// One-way analysis of variance.
pub fn one_way_anova<T: Float>(groups: &[Vec<T>]) -> Result<Anova<T>> {
    check_groups(groups)?;
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    let grand = groups.iter().flatten().fold(T::zero(), |a, &b| a + b) / T::from(n).unwrap();

    let mut ss_between = T::zero();
    let mut ss_within = T::zero();
    for g in groups {
        let m = group_mean(g);
        let d = m - grand;
        ss_between = ss_between + T::from(g.len()).unwrap() * d * d;
        ss_within = g.iter().fold(ss_within, |acc, &x| acc + (x - m) * (x - m));
    }
    let df_between = k - 1;
    let df_within = n - k;
    let ms_between = ss_between / T::from(df_between).unwrap();
    let ms_within = ss_within / T::from(df_within).unwrap();

    // Floating-point noise in identical groups must not register as signal.
    let scale = groups
        .iter()
        .flatten()
        .fold(T::zero(), |a, &b| a.max(b.abs()))
        .max(T::one());
    let tiny = T::epsilon() * T::from(64).unwrap() * scale * scale * T::from(n).unwrap();
    let (f, p_value) = if ss_between <= tiny {
        (T::zero(), T::one())
    } else if ss_within <= tiny {
        (T::infinity(), T::zero())
    } else {
        let f = ms_between / ms_within;
        let dist = FisherSnedecor::new(df_between as f64, df_within as f64).expect("positive df");
        let p = dist.sf(f.to_f64().unwrap());
        (f, T::from(p).unwrap())
    };
    Ok(Anova {
        f,
        p_value,
        df_between,
        df_within,
        ms_within,
    })
}
