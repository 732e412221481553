//! Two-sample t-tests with Bonferroni correction for bot vs human metrics.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agents::AgentType;
use crate::centrality::MetricRecord;
use crate::error::{Error, Result};

const CF_MAX_ITER: usize = 300;
const CF_EPS: f64 = 1e-14;
const CF_TINY: f64 = 1e-300;

/// Size, mean and unbiased variance of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    n: usize,
    mean: f64,
    variance: f64,
}

impl SampleSummary {
    pub fn new(n: usize, mean: f64, variance: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Input(format!("sample needs n >= 2, got {n}")));
        }
        if !mean.is_finite() || !variance.is_finite() || variance < 0.0 {
            return Err(Error::Input(format!(
                "sample mean and variance must be finite with variance >= 0 (got {mean}, {variance})"
            )));
        }
        Ok(SampleSummary { n, mean, variance })
    }

    /// Two-pass mean and `n - 1` variance.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::Input(format!("sample needs n >= 2, got {n}")));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Self::new(n, mean, ss / (n - 1) as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestVariant {
    /// Pooled variance, `n_a + n_b - 2` degrees of freedom.
    #[default]
    Student,
    /// Unequal variances with Welch–Satterthwaite degrees of freedom.
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TStatistic {
    pub t: f64,
    pub df: f64,
}

/// t statistic for `mean(a) - mean(b)`.
///
/// When the standard error is zero the statistic is `0` for equal means and a
/// [`Error::DegenerateVariance`] otherwise.
pub fn two_sample_t(
    a: &SampleSummary,
    b: &SampleSummary,
    variant: TestVariant,
) -> Result<TStatistic> {
    let (na, nb) = (a.n as f64, b.n as f64);
    let (se2, df) = match variant {
        TestVariant::Student => {
            let df = na + nb - 2.0;
            let pooled = ((na - 1.0) * a.variance + (nb - 1.0) * b.variance) / df;
            (pooled * (1.0 / na + 1.0 / nb), df)
        }
        TestVariant::Welch => {
            let (qa, qb) = (a.variance / na, b.variance / nb);
            let se2 = qa + qb;
            let denom = qa * qa / (na - 1.0) + qb * qb / (nb - 1.0);
            let df = if denom > 0.0 {
                se2 * se2 / denom
            } else {
                na + nb - 2.0
            };
            (se2, df)
        }
    };
    let diff = a.mean - b.mean;
    if se2 == 0.0 {
        if diff == 0.0 {
            return Ok(TStatistic { t: 0.0, df });
        }
        return Err(Error::DegenerateVariance(format!(
            "zero variance in both groups but means differ ({} vs {})",
            a.mean, b.mean
        )));
    }
    Ok(TStatistic {
        t: diff / se2.sqrt(),
        df,
    })
}

/// Two-tailed p-value of Student's t distribution with `df` degrees of freedom.
///
/// Evaluated as `I_x(df/2, 1/2)` with `x = df / (df + t²)`.
pub fn t_p_value(t: f64, df: f64) -> Result<f64> {
    if !df.is_finite() || df <= 0.0 {
        return Err(Error::Input(format!(
            "degrees of freedom must be positive and finite, got {df}"
        )));
    }
    if t.is_nan() {
        return Err(Error::Input("t statistic is NaN".into()));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let t2 = t * t;
    let x = df / (df + t2);
    let y = t2 / (df + t2);
    let p = incomplete_beta(x, y, 0.5 * df, 0.5)?;
    Ok(p.clamp(0.0, 1.0))
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || a.is_nan() || b.is_nan() || a <= 0.0 || b <= 0.0 {
        return Err(Error::Input(format!(
            "I_x(a, b) needs 0 <= x <= 1 and a, b > 0 (got x={x}, a={a}, b={b})"
        )));
    }
    incomplete_beta(x, 1.0 - x, a, b)
}

/// `y` is `1 - x`, passed separately so callers can supply it without cancellation.
fn incomplete_beta(x: f64, y: f64, a: f64, b: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    // logs via ln_1p of the complement near 1, where it is exact to rounding
    let ln_x = if x > 0.5 { (-y).ln_1p() } else { x.ln() };
    let ln_y = if y > 0.5 { (-x).ln_1p() } else { y.ln() };
    let ln_front = a * ln_x + b * ln_y - ln_beta(a, b);
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_continued_fraction(x, a, b)? / a)
    } else {
        Ok(1.0 - front * beta_continued_fraction(y, b, a)? / b)
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> Result<f64> {
    let tiny = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / tiny(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / tiny(1.0 + even * d);
        c = tiny(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / tiny(1.0 + odd * d);
        c = tiny(1.0 + odd / c);
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::SpecialFunction { a, b, x })
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// Tail of Stirling's series: `lnΓ(x) - [(x - ½)ln x - x + ½ln 2π]`, for `x >= 10`.
fn stirling_correction(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)))
}

/// `ln B(a, b)`. When one argument is large, `lnΓ(a+b) - lnΓ(a)` is formed
/// directly from Stirling's series to avoid cancelling two huge logs.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big < 10.0 {
        return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    }
    let ratio = (big - 0.5) * (small / big).ln_1p() + small * (big + small).ln() - small
        + stirling_correction(big + small)
        - stirling_correction(big);
    ln_gamma(small) - ratio
}

/// Bonferroni-corrected p-value `min(1, p * m)`. `m = 0` is treated as 1.
pub fn bonferroni(p: f64, m: u32) -> f64 {
    (p * m.max(1) as f64).min(1.0)
}

/// Node metric compared between the two agent groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Betweenness,
    Eigenvector,
    TotalDegree,
}

impl Metric {
    pub const ALL: [Metric; 3] = [
        Metric::Betweenness,
        Metric::Eigenvector,
        Metric::TotalDegree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Betweenness => "Betweenness Centrality",
            Metric::Eigenvector => "Eigenvector Centrality",
            Metric::TotalDegree => "Total Degree Centrality",
        }
    }

    pub fn value(self, record: &MetricRecord) -> f64 {
        match self {
            Metric::Betweenness => record.betweenness,
            Metric::Eigenvector => record.eigenvector,
            Metric::TotalDegree => record.total_degree,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of the bot vs human comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub metric: String,
    pub t_statistic: f64,
    pub df: f64,
    pub p_value: f64,
    pub corrected_p: f64,
    pub significant: bool,
    pub bonferroni_m: u32,
    pub alpha: f64,
}

/// Test each metric for a difference between bots (first group) and humans.
///
/// A metric that is constant within both groups is reported as
/// [`Error::DegenerateVariance`], whether or not the two constants agree.
pub fn compare_bots_humans(
    records: &[MetricRecord],
    metrics: &[Metric],
    m: u32,
    alpha: f64,
    variant: TestVariant,
) -> Result<Vec<TestResult>> {
    if metrics.is_empty() {
        return Err(Error::Input("no metrics to compare".into()));
    }
    metrics
        .iter()
        .map(|&metric| compare_metric(records, metric, m, alpha, variant))
        .collect()
}

/// Single-metric form of [`compare_bots_humans`].
pub fn compare_metric(
    records: &[MetricRecord],
    metric: Metric,
    m: u32,
    alpha: f64,
    variant: TestVariant,
) -> Result<TestResult> {
    let values = |kind: AgentType| -> Vec<f64> {
        records
            .iter()
            .filter(|r| r.agent_type == kind)
            .map(|r| metric.value(r))
            .collect()
    };
    let (bots, humans) = (values(AgentType::Bot), values(AgentType::Human));
    for (group, v) in [("bot", &bots), ("human", &humans)] {
        if v.len() < 2 {
            return Err(Error::InsufficientSample {
                group: group.into(),
                n: v.len(),
            });
        }
    }
    let a = SampleSummary::from_values(&bots)?;
    let b = SampleSummary::from_values(&humans)?;
    if a.variance == 0.0 && b.variance == 0.0 {
        return Err(Error::DegenerateVariance(format!(
            "{metric} is constant within both groups"
        )));
    }
    let stat = two_sample_t(&a, &b, variant)?;
    let p_value = t_p_value(stat.t, stat.df)?;
    let corrected_p = bonferroni(p_value, m);
    Ok(TestResult {
        metric: metric.name().to_string(),
        t_statistic: stat.t,
        df: stat.df,
        p_value,
        corrected_p,
        significant: corrected_p < alpha,
        bonferroni_m: m,
        alpha,
    })
}
