//! Reference implementations used to check the library. They share no code
//! with it and favor directness over speed.

use std::f64::consts::FRAC_PI_2;

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Left tail mass of Student's t with `df` degrees of freedom below `t <= 0`,
/// up to the normalizing constant. Uses t = sqrt(df)·tan(θ) and
/// θ = −π/2 + v², which leaves a smooth integrand in v.
fn t_left_kernel(t: f64, df: f64) -> f64 {
    let theta = (t / df.sqrt()).atan();
    let v_max = (theta + FRAC_PI_2).max(0.0).sqrt();
    simpson(|v| (v * v).sin().powf(df - 1.0) * 2.0 * v, 0.0, v_max, 200_000)
}

/// Student-t CDF by quadrature.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    let half = t_left_kernel(0.0, df);
    let left = t_left_kernel(-t.abs(), df) / (2.0 * half);
    if t <= 0.0 {
        left
    } else {
        1.0 - left
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance (n − 1 denominator), two-pass.
pub fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// `(t, df, p)` of the paired t-test of a against b.
pub fn paired_t(a: &[f64], b: &[f64], two_sided: bool) -> (f64, f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let t = mean(&d) / (var(&d) / n).sqrt();
    let df = n - 1.0;
    let p = if two_sided { 2.0 * t_cdf(-t.abs(), df) } else { 1.0 - t_cdf(t, df) };
    (t, df, p)
}

/// `(t, df, p)` of Welch's test of mean(a) against mean(b).
pub fn welch_t(a: &[f64], b: &[f64], two_sided: bool) -> (f64, f64, f64) {
    let (va, vb) = (var(a) / a.len() as f64, var(b) / b.len() as f64);
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let df = (va + vb).powi(2)
        / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    let p = if two_sided { 2.0 * t_cdf(-t.abs(), df) } else { 1.0 - t_cdf(t, df) };
    (t, df, p)
}

/// Wilson interval by inverting the score test: the set of p with
/// |p̂ − p| / sqrt(p(1 − p)/n) <= z, found by bisection.
pub fn wilson(wins: usize, n: usize, z: f64) -> (f64, f64) {
    let ph = wins as f64 / n as f64;
    let score = |p: f64| (ph - p).abs() / (p * (1.0 - p) / n as f64).sqrt() - z;
    let bisect = |mut lo: f64, mut hi: f64, inside_at_hi: bool| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let inside = score(mid) <= 0.0;
            if inside == inside_at_hi {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let lower = if wins == 0 { 0.0 } else { bisect(0.0, ph, true) };
    let upper = if wins == n { 1.0 } else { bisect(ph, 1.0, false) };
    (lower, upper)
}

/// Type-7 quantile as the piecewise-linear curve through
/// `(i / (n − 1), x_(i))`.
pub fn quantile7(values: &[f64], q: f64) -> f64 {
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    if x.len() == 1 {
        return x[0];
    }
    let step = 1.0 / (x.len() - 1) as f64;
    for i in 0..x.len() - 1 {
        let (q0, q1) = (i as f64 * step, (i + 1) as f64 * step);
        if q <= q1 || i == x.len() - 2 {
            return x[i] + (x[i + 1] - x[i]) * (q - q0) / (q1 - q0);
        }
    }
    unreachable!()
}

/// `(lower, upper)` notch around the median, ±1.57·IQR/√N.
pub fn notch(values: &[f64]) -> (f64, f64) {
    let med = quantile7(values, 0.5);
    let h = 1.57 * (quantile7(values, 0.75) - quantile7(values, 0.25)) / (values.len() as f64).sqrt();
    (med - h, med + h)
}

/// Mann–Whitney AUC by direct pair counting.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut credit, mut pairs) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    credit += 1.0;
                } else if scores[i] == scores[j] {
                    credit += 0.5;
                }
            }
        }
    }
    credit / pairs
}
