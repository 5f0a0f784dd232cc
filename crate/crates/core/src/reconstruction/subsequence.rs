use serde::Serialize;

/// Streaming greedy choice of an increasing index function `theta`. In block
/// `j` an index `n` is admitted when `a_n <= 2^-j b_n`; the block closes once
/// its admitted `b`-mass exceeds 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsequenceExtractor {
    block: u32,
    block_mass: f64,
    scanned_in_block: usize,
    budget: usize,
    admitted: Vec<usize>,
    sum_a: f64,
    sum_b: f64,
    sup_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsequenceReport {
    pub admitted: Vec<usize>,
    pub completed_blocks: u32,
    pub sum_a: f64,
    pub sum_b: f64,
    /// `sum_{j < completed} 2^-j (1 + sup b)`, the bound on `sum_a`.
    pub a_bound: f64,
    /// Set when `budget` indices were scanned in one block without closing it.
    pub stalled: bool,
}

impl SubsequenceExtractor {
    pub fn new(budget: usize) -> Self {
        Self {
            block: 0,
            block_mass: 0.0,
            scanned_in_block: 0,
            budget,
            admitted: Vec::new(),
            sum_a: 0.0,
            sum_b: 0.0,
            sup_b: 0.0,
        }
    }

    /// Offers index `n`; returns whether it was admitted.
    pub fn push(&mut self, n: usize, a: f64, b: f64) -> bool {
        self.scanned_in_block += 1;
        self.sup_b = self.sup_b.max(b);
        let admit = a <= 0.5f64.powi(self.block as i32) * b;
        if admit {
            self.admitted.push(n);
            self.sum_a += a;
            self.sum_b += b;
            self.block_mass += b;
            if self.block_mass > 1.0 {
                self.block += 1;
                self.block_mass = 0.0;
                self.scanned_in_block = 0;
            }
        }
        admit
    }

    pub fn stalled(&self) -> bool {
        self.scanned_in_block >= self.budget
    }

    pub fn report(&self) -> SubsequenceReport {
        let a_bound = (0..self.block + 1)
            .map(|j| 0.5f64.powi(j as i32) * (1.0 + self.sup_b))
            .sum();
        SubsequenceReport {
            admitted: self.admitted.clone(),
            completed_blocks: self.block,
            sum_a: self.sum_a,
            sum_b: self.sum_b,
            a_bound,
            stalled: self.stalled(),
        }
    }
}

/// Runs the extractor over finite prefixes, stopping early on a stall.
pub fn extract_subsequence(a: &[f64], b: &[f64], budget: usize) -> SubsequenceReport {
    let mut ex = SubsequenceExtractor::new(budget);
    for (n, (&an, &bn)) in a.iter().zip(b).enumerate() {
        ex.push(n, an, bn);
        if ex.stalled() {
            break;
        }
    }
    ex.report()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_a_admits_everything() {
        let r = extract_subsequence(&[0.0; 50], &[1.0; 50], 10);
        assert_eq!(r.admitted, (0..50).collect::<Vec<_>>());
        assert!(!r.stalled);
    }

    #[test]
    fn harmonic_a_is_sparse() {
        let n = 10_000;
        let a: Vec<f64> = (0..n).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let r = extract_subsequence(&a, &vec![1.0; n], n);
        // Block j admits two indices with n + 1 >= 2^j.
        assert_eq!(&r.admitted[..8], &[0, 1, 2, 3, 4, 5, 7, 8]);
        assert!(r.completed_blocks >= 5);
        let first_five: f64 = r.admitted[..10].iter().map(|&i| a[i]).sum();
        let bound: f64 = (0..5).map(|j| 0.5f64.powi(j) * 2.0).sum();
        assert!(first_five <= bound);
    }

    #[test]
    fn violated_precondition_stalls() {
        let r = extract_subsequence(&[1.0; 100], &[1.0; 100], 20);
        assert_eq!(r.admitted, vec![0, 1]);
        assert!(r.stalled);
    }

    proptest! {
        #[test]
        fn admitted_a_mass_is_bounded(a in proptest::collection::vec(0.0f64..1.0, 1..300), scale in 0.0f64..1.0) {
            let b: Vec<f64> = a.iter().map(|_| 1.0).collect();
            let a: Vec<f64> = a.iter().map(|v| v * scale).collect();
            let r = extract_subsequence(&a, &b, usize::MAX);
            prop_assert!(r.sum_a <= r.a_bound + 1e-12);
            prop_assert!(r.admitted.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
