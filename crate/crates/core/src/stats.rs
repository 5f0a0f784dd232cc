//! Goodness-of-fit helpers used by the verification harnesses.

use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the KS statistic `d` for `n` samples.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square statistic and p-value for counts against equal expected cells.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).expect("at least two cells");
    (stat, 1.0 - dist.cdf(stat))
}

/// Index of the cell containing `s` in the partition of the 2-simplex into
/// `k^2` congruent triangles (upward and downward) of equal area.
pub fn triangle_cell(s: &[f64], k: usize) -> usize {
    debug_assert_eq!(s.len(), 3);
    let x = s[0] * k as f64;
    let y = s[1] * k as f64;
    let i = (x.floor() as usize).min(k - 1);
    let j = (y.floor() as usize).min(k - 1 - i);
    let upward = (x - i as f64) + (y - j as f64) < 1.0 || i + j == k - 1;
    // Row i holds 2(k - i) - 1 cells: k - i upward and k - i - 1 downward.
    let row_start: usize = (0..i).map(|r| 2 * (k - r) - 1).sum();
    row_start + 2 * j + usize::from(!upward)
}

/// One-sided upper confidence bound on a binomial proportion (Clopper-Pearson).
pub fn binomial_upper_bound(successes: u64, trials: u64, confidence: f64) -> f64 {
    if successes >= trials {
        return 1.0;
    }
    let alpha = 1.0 - confidence;
    let (mut lo, mut hi) = (successes as f64 / trials as f64, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let cdf = Binomial::new(mid, trials)
            .expect("valid binomial")
            .cdf(successes);
        if cdf > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_cells_cover_every_index() {
        let k = 5;
        let mut seen = vec![false; k * k];
        for a in 0..200 {
            for b in 0..(200 - a) {
                let x = (a as f64 + 0.3) / 200.5;
                let y = (b as f64 + 0.3) / 200.5;
                let s = [x, y, 1.0 - x - y];
                if s[2] >= 0.0 {
                    seen[triangle_cell(&s, k)] = true;
                }
            }
        }
        assert!(seen.iter().all(|&v| v));
    }

    #[test]
    fn binomial_bound_zero_successes() {
        // 1 - 0.01^(1/n)
        let ub = binomial_upper_bound(0, 100, 0.99);
        assert!((ub - (1.0 - 0.01f64.powf(0.01))).abs() < 1e-6);
    }

    #[test]
    fn ks_p_value_bounds() {
        assert!(ks_p_value(0.0, 100) > 0.99);
        assert!(ks_p_value(0.5, 100) < 1e-6);
    }
}
