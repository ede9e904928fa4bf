//! Seeded finite-shot sampling of exact dataset values.
//!
//! Joint-number populations sharing a prefix (`P1_0`, `m2_P1_1`, ...) are
//! drawn as one multinomial, with any missing probability mass as an extra
//! unrecorded outcome. Parity-like expectations in [-1, 1] are drawn as
//! binomial counts of the `+1` outcome.

use std::collections::BTreeMap;

use qmem::program::Dataset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// Split a `m{k}_` measurement prefix off a column name.
fn split_prefix(name: &str) -> (&str, &str) {
    if let Some(rest) = name.strip_prefix('m') {
        if let Some((k, _)) = rest.split_once('_') {
            if !k.is_empty() && k.chars().all(|c| c.is_ascii_digit()) {
                return name.split_at(k.len() + 2);
            }
        }
    }
    ("", name)
}

fn population_prefix(name: &str) -> Option<&str> {
    let (prefix, base) = split_prefix(name);
    let (n, m) = base.strip_prefix('P')?.split_once('_')?;
    let digits = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_digit());
    (digits(n) && digits(m)).then_some(prefix)
}

fn is_expectation(name: &str) -> bool {
    matches!(
        split_prefix(name).1,
        "parity_a" | "parity_b" | "parity_a_scaled" | "parity_b_scaled" | "overlap" | "overlap_scaled"
    )
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    let p = p.clamp(0.0, 1.0);
    Binomial::new(n, p).expect("probability clamped to [0, 1]").sample(rng)
}

/// Multinomial counts by sequential conditional binomials.
fn multinomial(rng: &mut ChaCha8Rng, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for &p in probs {
        let p = p.max(0.0);
        let k = if left == 0 || mass <= 0.0 { 0 } else { binomial(rng, left, (p / mass).min(1.0)) };
        out.push(k);
        left -= k;
        mass -= p;
    }
    out
}

/// Replace exact values with `shots`-sample estimates, row by row.
pub fn sample(ds: &Dataset, shots: u64, seed: u64) -> Dataset {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut expectations = Vec::new();
    for (i, c) in ds.columns.iter().enumerate() {
        if let Some(prefix) = population_prefix(c) {
            groups.entry(prefix).or_default().push(i);
        } else if is_expectation(c) {
            expectations.push(i);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ds.clone();
    let n = shots.max(1);
    for row in &mut out.rows {
        for cols in groups.values() {
            let probs: Vec<f64> = cols.iter().map(|&i| row[i]).collect();
            let counts = multinomial(&mut rng, n, &probs);
            for (&i, k) in cols.iter().zip(counts) {
                row[i] = k as f64 / n as f64;
            }
        }
        for &i in &expectations {
            let plus = binomial(&mut rng, n, (1.0 + row[i]) / 2.0);
            row[i] = 2.0 * plus as f64 / n as f64 - 1.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds() -> Dataset {
        let mut d = Dataset::new(vec!["t".into(), "P1_0".into(), "P0_1".into(), "parity_a".into(), "m2_P1_1".into()]);
        d.push(vec![0.5, 0.3, 0.7, -0.2, 1.0]);
        d.push(vec![1.0, 0.0, 0.9, 1.0, 0.25]);
        d
    }

    #[test]
    fn column_classes() {
        assert_eq!(population_prefix("P1_0"), Some(""));
        assert_eq!(population_prefix("m2_P10_3"), Some("m2_"));
        assert_eq!(population_prefix("P_sum"), None);
        assert_eq!(population_prefix("P20_plus_P02"), None);
        assert!(is_expectation("parity_a"));
        assert!(is_expectation("m3_overlap_scaled"));
        assert!(!is_expectation("overlap_ideal"));
        assert!(!is_expectation("t"));
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let a = sample(&ds(), 1000, 7);
        let b = sample(&ds(), 1000, 7);
        assert_eq!(a, b);
        assert_ne!(a, sample(&ds(), 1000, 8));
    }

    #[test]
    fn counts_respect_shots_and_certain_outcomes() {
        let s = sample(&ds(), 1000, 1);
        let r0 = &s.rows[0];
        assert_eq!(r0[0], 0.5);
        assert!((r0[1] + r0[2] - 1.0).abs() < 1e-12);
        assert_eq!(r0[4], 1.0);
        let r1 = &s.rows[1];
        assert_eq!(r1[1], 0.0);
        assert_eq!(r1[3], 1.0);
        assert!(r1[2] <= 1.0);
        for v in r0.iter().chain(r1) {
            assert!((v * 1000.0 - (v * 1000.0).round()).abs() < 1e-9);
        }
    }

    #[test]
    fn sample_means_converge() {
        let mut d = Dataset::new(vec!["P0_0".into(), "P1_1".into(), "parity_b".into()]);
        for _ in 0..200 {
            d.push(vec![0.25, 0.75, 0.4]);
        }
        let s = sample(&d, 500, 3);
        let mean = |i: usize| s.rows.iter().map(|r| r[i]).sum::<f64>() / 200.0;
        assert!((mean(0) - 0.25).abs() < 0.01);
        assert!((mean(2) - 0.4).abs() < 0.02);
    }
}
