//! Empirical distribution functions and goodness-of-fit tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Fewest values accepted by [`distribution_test`].
pub const MIN_SAMPLES: usize = 100;

/// Right-continuous empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    /// Fails on an empty sample or NaN values.
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("ECDF of an empty sample"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("ECDF input contains NaN"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// `sup_x |F_n(x) - cdf(x)|` for a continuous `cdf`, exact over the sample.
    pub fn sup_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                ((i + 1) as f64 / n - f).max(f - i as f64 / n)
            })
            .fold(0.0, f64::max)
    }
}

/// Two-sample KS distance `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &Ecdf, b: &Ecdf) -> f64 {
    let mut d: f64 = 0.0;
    for &x in a.values().iter().chain(b.values()) {
        d = d.max((a.eval(x) - b.eval(x)).abs());
    }
    d
}

/// Asymptotic Kolmogorov p-value of distance `d` on `n` values, with the
/// `sqrt(n) + 0.12 + 0.11 / sqrt(n)` small-sample correction.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub stat_name: String,
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom after bin merging (chi-square only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof: Option<usize>,
}

/// Merges adjacent bins until every expected count is at least 5.
/// Returns `(observed, expected)` per merged bin.
pub fn merge_bins(observed: &[u64], expected: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &ex) in observed.iter().zip(expected) {
        o += ob as f64;
        e += ex;
        if e >= 5.0 {
            obs.push(o);
            exp.push(e);
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match (obs.last_mut(), exp.last_mut()) {
            (Some(lo), Some(le)) => {
                *lo += o;
                *le += e;
            }
            _ => {
                obs.push(o);
                exp.push(e);
            }
        }
    }
    (obs, exp)
}

/// Pearson chi-square of category counts against probabilities `pmf`.
pub fn chi_square_test(counts: &[u64], pmf: &[f64]) -> Result<TestOutcome> {
    if counts.len() > pmf.len() && counts[pmf.len()..].iter().any(|&c| c > 0) {
        return Err(Error::domain("observed a category outside the reference support"));
    }
    let total: u64 = counts.iter().sum();
    let expected: Vec<f64> = pmf.iter().map(|p| p * total as f64).collect();
    let mut padded = counts.to_vec();
    padded.resize(pmf.len(), 0);
    let (obs, exp) = merge_bins(&padded, &expected);
    let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = obs.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(f64::NAN)
    };
    Ok(TestOutcome { stat_name: "chi_square".into(), statistic: stat, p_value, dof: Some(dof) })
}

/// Reference law for [`distribution_test`].
pub enum Reference<'a> {
    /// Probabilities of the values `0, 1, 2, ...`.
    Pmf(&'a [f64]),
    /// A continuous CDF.
    Cdf(&'a dyn Fn(f64) -> f64),
}

/// Chi-square for pmf references (values must be nonnegative integers), KS
/// for CDF references.
pub fn distribution_test(values: &[f64], reference: Reference<'_>) -> Result<TestOutcome> {
    if values.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: values.len() });
    }
    match reference {
        Reference::Pmf(pmf) => {
            let mut counts = vec![0u64; pmf.len()];
            for &v in values {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::domain(format!("value {v} is not a category index")));
                }
                let k = v as usize;
                if k >= counts.len() {
                    counts.resize(k + 1, 0);
                }
                counts[k] += 1;
            }
            chi_square_test(&counts, pmf)
        }
        Reference::Cdf(cdf) => {
            let ecdf = Ecdf::new(values)?;
            let d = ecdf.sup_distance(cdf);
            Ok(TestOutcome {
                stat_name: "ks".into(),
                statistic: d,
                p_value: kolmogorov_p_value(d, values.len()),
                dof: None,
            })
        }
    }
}
