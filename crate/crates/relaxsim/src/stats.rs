//! Summary statistics and the regression test used by the scaling experiments.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::statistics::Statistics;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for fewer than two values.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let sd = if values.len() > 1 { values.std_dev() } else { 0.0 };
        Self {
            count: values.len(),
            mean: values.mean(),
            sd,
            min: values.min(),
            max: values.max(),
        }
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sd / (self.count as f64).sqrt()
        }
    }
}

/// Ordinary least squares fit of `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub t: f64,
    /// One-sided p-value for `slope > 0`.
    pub p_positive: f64,
    pub n: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let mx = x.mean();
    let my = y.mean();
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let df = (n - 2) as f64;
    let slope_se = (rss / df / sxx).sqrt();
    let (t, p_positive) = if slope_se == 0.0 {
        let t = if slope > 0.0 { f64::INFINITY } else { 0.0 };
        (t, if slope > 0.0 { 0.0 } else { 1.0 })
    } else {
        let t = slope / slope_se;
        let dist = StudentsT::new(0.0, 1.0, df).ok()?;
        (t, 1.0 - dist.cdf(t))
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_se,
        t,
        p_positive,
        n,
    })
}
