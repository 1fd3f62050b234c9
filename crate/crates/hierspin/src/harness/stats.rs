//! Small statistics toolkit: means with standard errors, Kolmogorov-Smirnov
//! distances and (partial) correlations.

use crate::error::{Error, Result};
use crate::table::{num, Table};

/// Sample mean and `std / sqrt(n)`.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// `sup |F_n - F|` for a continuous reference CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// 1% critical value of the one-sample KS distance, large-sample form.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

pub fn ks_critical_1pct_two(n: usize, m: usize) -> f64 {
    1.63 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Correlation of `x` and `y` after removing their linear dependence on `z`.
pub fn partial_correlation(x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let rxy = correlation(x, y);
    let rxz = correlation(x, z);
    let ryz = correlation(y, z);
    (rxy - rxz * ryz) / ((1.0 - rxz * rxz) * (1.0 - ryz * ryz)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatRow {
    pub n: usize,
    pub statistic: String,
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: usize,
}

/// Rows keyed by `(N, statistic)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StatTable {
    pub rows: Vec<StatRow>,
}

impl StatTable {
    pub fn push_samples(&mut self, n: usize, statistic: &str, samples: &[f64]) {
        let (estimate, stderr) = mean_stderr(samples);
        self.rows.push(StatRow {
            n,
            statistic: statistic.to_string(),
            estimate,
            stderr,
            replicas: samples.len(),
        });
    }

    pub fn get(&self, n: usize, statistic: &str) -> Option<&StatRow> {
        self.rows.iter().find(|r| r.n == n && r.statistic == statistic)
    }

    /// Estimates of one statistic in row order.
    pub fn series(&self, statistic: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.statistic == statistic)
            .map(|r| r.estimate)
            .collect()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new("stat", &["N", "statistic", "estimate", "stderr", "replicas"]);
        for r in &self.rows {
            t.push(vec![
                r.n.to_string(),
                r.statistic.clone(),
                num(r.estimate),
                num(r.stderr),
                r.replicas.to_string(),
            ]);
        }
        t
    }
}

pub(crate) fn require(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::InsufficientData(format!("{what}: {n} samples, need at least {min}")));
    }
    Ok(())
}
