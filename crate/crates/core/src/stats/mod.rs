//! Hypothesis tests and interval estimates for comparing models across
//! datasets.

mod special;

pub use special::{ln_gamma, regularized_incomplete_beta, student_t_cdf, student_t_quantile};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("paired columns differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("all pairs are tied")]
    AllTies,
    #[error("zero variance")]
    ZeroVariance,
    #[error("non-finite input")]
    NonFinite,
}

/// Default two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

/// Two aligned columns of per-dataset values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub keys: Vec<String>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PairedSample {
    pub fn new(keys: Vec<String>, a: Vec<f64>, b: Vec<f64>) -> Result<Self, StatsError> {
        if a.len() != b.len() || keys.len() != a.len() {
            return Err(StatsError::LengthMismatch(a.len(), b.len()));
        }
        if a.len() < 2 {
            return Err(StatsError::TooFew { needed: 2, got: a.len() });
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        Ok(PairedSample { keys, a, b })
    }

    /// Pairs keyed by position.
    pub fn unkeyed(a: Vec<f64>, b: Vec<f64>) -> Result<Self, StatsError> {
        let keys = (0..a.len()).map(|i| i.to_string()).collect();
        Self::new(keys, a, b)
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn differences(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(x, y)| x - y).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sides {
    /// Alternative: the first sample's mean is greater.
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    /// Pairs with `a > b`.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// `wins / (wins + losses)`.
    pub fraction: f64,
    pub ci: (f64, f64),
    pub z: f64,
}

/// Wilson score interval for `wins` successes out of `n`.
pub fn wilson_interval(wins: usize, n: usize, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = wins as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Sign test of `a` against `b` with a Wilson interval on the fraction of
/// wins. Ties are dropped.
pub fn sign_test_wilson(paired: &PairedSample, z: f64) -> Result<SignTest, StatsError> {
    let wins = paired.a.iter().zip(&paired.b).filter(|(x, y)| x > y).count();
    let losses = paired.a.iter().zip(&paired.b).filter(|(x, y)| x < y).count();
    let ties = paired.len() - wins - losses;
    let n = wins + losses;
    if n == 0 {
        return Err(StatsError::AllTies);
    }
    Ok(SignTest { wins, losses, ties, fraction: wins as f64 / n as f64, ci: wilson_interval(wins, n, z), z })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub sides: Sides,
}

fn p_value(t: f64, df: f64, sides: Sides) -> f64 {
    match sides {
        Sides::Two => 2.0 * student_t_cdf(-t.abs(), df),
        Sides::One => student_t_cdf(-t, df),
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Paired t-test on `a − b`, df = n − 1.
pub fn paired_t_test(paired: &PairedSample, sides: Sides) -> Result<TTest, StatsError> {
    let d = paired.differences();
    let v = sample_var(&d);
    if v == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let n = d.len() as f64;
    let t = mean(&d) / (v / n).sqrt();
    let df = n - 1.0;
    Ok(TTest { t, df, p: p_value(t, df, sides), sides })
}

/// Welch two-sample t-test of mean(a) against mean(b) with
/// Welch–Satterthwaite degrees of freedom.
pub fn welch_t_test(a: &[f64], b: &[f64], sides: Sides) -> Result<TTest, StatsError> {
    for x in [a, b] {
        if x.len() < 2 {
            return Err(StatsError::TooFew { needed: 2, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }
    let (va, vb) = (sample_var(a) / a.len() as f64, sample_var(b) / b.len() as f64);
    if va + vb == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    Ok(TTest { t, df, p: p_value(t, df, sides), sides })
}

/// Type-7 (linear interpolation) sample quantile.
pub fn quantile(values: &[f64], q: f64) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::TooFew { needed: 1, got: 0 });
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Notch {
    pub median: f64,
    pub half_width: f64,
}

impl Notch {
    pub fn lower(&self) -> f64 {
        self.median - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.median + self.half_width
    }
}

/// Median ± 1.57·IQR/√N.
pub fn notch_interval(values: &[f64]) -> Result<Notch, StatsError> {
    let median = quantile(values, 0.5)?;
    let iqr = quantile(values, 0.75)? - quantile(values, 0.25)?;
    Ok(Notch { median, half_width: 1.57 * iqr / (values.len() as f64).sqrt() })
}

/// Ordinary least squares fit of `y` on `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub n: usize,
    pub slope: f64,
    pub intercept: f64,
    /// Zero when either variable is constant.
    pub r2: f64,
    pub slope_se: f64,
}

impl Regression {
    /// Two-sided confidence interval for the slope at `level` (e.g. 0.95).
    pub fn slope_ci(&self, level: f64) -> (f64, f64) {
        if self.n < 3 || !self.slope_se.is_finite() {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let q = student_t_quantile(0.5 + level / 2.0, (self.n - 2) as f64);
        (self.slope - q * self.slope_se, self.slope + q * self.slope_se)
    }
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<Regression, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFew { needed: 2, got: x.len() });
    }
    let n = x.len();
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Ok(Regression { n, slope: 0.0, intercept: my, r2: 0.0, slope_se: f64::INFINITY });
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 0.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    let rss = (syy - slope * sxy).max(0.0);
    let slope_se = if n > 2 { (rss / (n - 2) as f64 / sxx).sqrt() } else { f64::INFINITY };
    Ok(Regression { n, slope, intercept: my - slope * mx, r2, slope_se })
}

/// Uniform JSON record for any test or interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub test: String,
    pub statistic: Option<f64>,
    pub p: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub n: usize,
    pub parameters: serde_json::Value,
}

impl TestRecord {
    pub fn sign(t: &SignTest) -> Self {
        TestRecord {
            test: "sign_test_wilson".into(),
            statistic: Some(t.fraction),
            p: None,
            ci: Some(t.ci),
            n: t.wins + t.losses,
            parameters: serde_json::json!({ "wins": t.wins, "losses": t.losses, "ties": t.ties, "z": t.z }),
        }
    }

    pub fn t_test(name: &str, t: &TTest, n: usize) -> Self {
        TestRecord {
            test: name.into(),
            statistic: Some(t.t),
            p: Some(t.p),
            ci: None,
            n,
            parameters: serde_json::json!({ "df": t.df, "sides": t.sides }),
        }
    }

    pub fn notch(n: &Notch, count: usize) -> Self {
        TestRecord {
            test: "notch_interval".into(),
            statistic: Some(n.median),
            p: None,
            ci: Some((n.lower(), n.upper())),
            n: count,
            parameters: serde_json::json!({ "half_width": n.half_width }),
        }
    }
}
