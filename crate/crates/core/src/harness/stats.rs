//! Mean/SEM summaries and McNemar's paired test.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, PartialEq)]
pub struct SemSummary {
    pub mean: f64,
    /// Sample standard deviation over sqrt(n); 0 when n == 1.
    pub sem: f64,
    pub n: usize,
    /// Set when n == 1 and the SEM is therefore meaningless.
    pub degenerate: bool,
}

pub fn mean_sem(values: &[f64]) -> SemSummary {
    assert!(!values.is_empty(), "mean_sem needs at least one value");
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return SemSummary { mean, sem: 0.0, n, degenerate: true };
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    SemSummary { mean, sem: var.sqrt() / (n as f64).sqrt(), n, degenerate: false }
}

/// Discordant-pair cutoff below which the exact binomial p-value replaces
/// the chi-squared approximation.
const EXACT_CUTOFF: usize = 25;

pub const SIGNIFICANCE_THRESHOLDS: [f64; 3] = [0.05, 0.01, 0.001];

#[derive(Debug, Clone, PartialEq)]
pub struct McNemarResult {
    /// Pairs where the first method succeeded and the second failed.
    pub b: usize,
    /// Pairs where the second method succeeded and the first failed.
    pub c: usize,
    /// Continuity-corrected chi-squared statistic; absent on the exact path.
    pub statistic: Option<f64>,
    pub p_value: f64,
    /// Whether the exact binomial path was taken (b + c < 25).
    pub exact: bool,
    /// No discordant pairs at all: p is 1 by convention.
    pub zero_discordant: bool,
    pub significant_at: Vec<(f64, bool)>,
}

/// McNemar's test on paired boolean outcomes. The statistic uses the
/// continuity correction (|b-c|-1)^2/(b+c); with fewer than 25 discordant
/// pairs the two-sided exact binomial replaces the asymptotic p-value.
pub fn mcnemar(pairs: &[(bool, bool)]) -> McNemarResult {
    let b = pairs.iter().filter(|(x, y)| *x && !*y).count();
    let c = pairs.iter().filter(|(x, y)| !*x && *y).count();
    let discordant = b + c;
    let (statistic, p_value, exact) = if discordant == 0 {
        (None, 1.0, false)
    } else if discordant < EXACT_CUTOFF {
        (None, exact_binomial_two_sided(b.max(c), discordant), true)
    } else {
        let num = (b.abs_diff(c) as f64 - 1.0).max(0.0);
        let stat = num * num / discordant as f64;
        let chi = ChiSquared::new(1.0).expect("1 degree of freedom");
        (Some(stat), chi.sf(stat), false)
    };
    McNemarResult {
        b,
        c,
        statistic,
        p_value,
        exact,
        zero_discordant: discordant == 0,
        significant_at: SIGNIFICANCE_THRESHOLDS.iter().map(|&t| (t, p_value < t)).collect(),
    }
}

/// Two-sided exact binomial p-value: 2 * P(X >= k | n, 1/2), capped at 1.
/// n < 64 here, so the binomial sums stay exact in u128 over 2^n.
fn exact_binomial_two_sided(k: usize, n: usize) -> f64 {
    debug_assert!(n < 64);
    let mut tail: u128 = 0;
    for i in k..=n {
        tail += binomial(n, i);
    }
    let p = 2.0 * tail as f64 / (1u128 << n) as f64;
    p.min(1.0)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sem_fixture() {
        let s = mean_sem(&[10.0, 20.0, 30.0]);
        assert!((s.mean - 20.0).abs() < 1e-12);
        assert!((s.sem - 5.773502691896258).abs() < 1e-9);
        assert!(!s.degenerate);
    }

    #[test]
    fn sem_single_repetition_is_flagged() {
        let s = mean_sem(&[42.0]);
        assert_eq!(s.sem, 0.0);
        assert!(s.degenerate);
    }

    #[test]
    fn mcnemar_symmetric_counts_are_insignificant() {
        // 30 discordant pairs split evenly: statistic at the continuity
        // floor, p close to 1.
        let mut pairs = vec![(true, false); 15];
        pairs.extend(vec![(false, true); 15]);
        pairs.extend(vec![(true, true); 10]);
        let r = mcnemar(&pairs);
        assert_eq!((r.b, r.c), (15, 15));
        assert!(r.statistic.unwrap() <= 1.0 / 30.0 + 1e-12);
        assert!(r.p_value > 0.5);
        assert!(r.significant_at.iter().all(|(_, sig)| !sig));
    }

    #[test]
    fn mcnemar_large_discordance() {
        // b=59, c=6: statistic (|59-6|-1)^2/65 = 2704/65, p far below 0.001.
        let mut pairs = vec![(true, false); 59];
        pairs.extend(vec![(false, true); 6]);
        let r = mcnemar(&pairs);
        let stat = r.statistic.unwrap();
        assert!((stat - 2704.0 / 65.0).abs() < 1e-12);
        assert!(r.p_value < 0.001);
        assert!(r.significant_at.iter().all(|(_, sig)| *sig));
    }

    #[test]
    fn mcnemar_exact_small_sample_path() {
        // b+c = 10 with b = 9: two-sided exact p = 2 * 11/1024.
        let mut pairs = vec![(true, false); 9];
        pairs.push((false, true));
        let r = mcnemar(&pairs);
        assert!(r.exact);
        assert!(r.statistic.is_none());
        assert!((r.p_value - 22.0 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn mcnemar_zero_discordant() {
        let r = mcnemar(&[(true, true), (false, false)]);
        assert!(r.zero_discordant);
        assert_eq!(r.p_value, 1.0);
    }
}
