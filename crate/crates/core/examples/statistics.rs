//! The interval estimates and tests used to compare models across
//! datasets.
//!
//! `cargo run --example statistics`

use mtscreen::stats::{notch_interval, ols, paired_t_test, welch_t_test, wilson_interval, PairedSample, Sides, Z_95};

fn main() {
    let (lo, hi) = wilson_interval(14, 20, Z_95);
    println!("14 wins of 20: Wilson 95% CI [{lo:.4}, {hi:.4}]");

    let multitask = vec![0.91, 0.84, 0.88, 0.79, 0.93, 0.86];
    let single = vec![0.87, 0.85, 0.82, 0.75, 0.90, 0.80];
    let paired = PairedSample::unkeyed(multitask.clone(), single.clone()).unwrap();
    let t = paired_t_test(&paired, Sides::Two).unwrap();
    println!("paired t = {:.3}, df = {}, p = {:.4}", t.t, t.df, t.p);

    let w = welch_t_test(&multitask, &single, Sides::One).unwrap();
    println!("Welch t = {:.3}, df = {:.2}, one-sided p = {:.4}", w.t, w.df, w.p);

    let n = notch_interval(&multitask).unwrap();
    println!("median {:.3}, notch [{:.3}, {:.3}]", n.median, n.lower(), n.upper());

    let fit = ols(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.1, 0.35, 0.42, 0.7, 0.8]).unwrap();
    let (a, b) = fit.slope_ci(0.95);
    println!("slope {:.3} (95% CI [{a:.3}, {b:.3}]), r² {:.3}", fit.slope, fit.r2);
}
