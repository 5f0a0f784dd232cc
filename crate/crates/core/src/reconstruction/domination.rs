use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::influence::TailDescriptor;
use crate::rng::Streams;
use crate::simplex::Estimate;

/// A bound sequence `delta_0, delta_1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DeltaSequence {
    /// `delta_n = value` for every `n`.
    Constant(f64),
    /// Listed values, the last one repeated forever.
    Values(Vec<f64>),
    /// `delta_n = c / (n + 1)`.
    Harmonic(f64),
}

impl DeltaSequence {
    pub fn get(&self, n: usize) -> f64 {
        match self {
            DeltaSequence::Constant(v) => *v,
            DeltaSequence::Values(v) => v.get(n).or(v.last()).copied().unwrap_or(0.0),
            DeltaSequence::Harmonic(c) => c / (n as f64 + 1.0),
        }
    }

    /// The descriptor of the tail, used for the recurrence classification.
    pub fn tail(&self) -> TailDescriptor {
        match self {
            DeltaSequence::Constant(v) => TailDescriptor::Constant { value: *v },
            DeltaSequence::Values(v) => match v.last() {
                Some(&last) if last > 0.0 => TailDescriptor::Constant { value: last },
                _ => TailDescriptor::EventuallyZero { from: v.len() },
            },
            DeltaSequence::Harmonic(c) => TailDescriptor::Harmonic { c: *c },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Recurrence {
    Transient,
    NullRecurrent,
    PositiveRecurrent,
    Undetermined,
}

/// Markov chain on the non-negative integers started at 0 that climbs from
/// `i` to `i+1` with probability `1 - r_i` and falls back to 0 with
/// probability `r_i`, where `r_i = 2 delta_i` (or `delta_i` when doubling is off).
#[derive(Debug, Clone, PartialEq)]
pub struct DominationChain {
    deltas: DeltaSequence,
    doubled: bool,
}

impl DominationChain {
    pub fn new(deltas: DeltaSequence) -> Self {
        Self {
            deltas,
            doubled: true,
        }
    }

    /// Reset probability `delta_i` instead of `2 delta_i`, for binary alphabets.
    pub fn without_doubling(deltas: DeltaSequence) -> Self {
        Self {
            deltas,
            doubled: false,
        }
    }

    pub fn deltas(&self) -> &DeltaSequence {
        &self.deltas
    }

    pub fn is_doubled(&self) -> bool {
        self.doubled
    }

    fn factor(&self) -> f64 {
        if self.doubled {
            2.0
        } else {
            1.0
        }
    }

    /// Reset probabilities `r_0..r_{m-1}`.
    fn resets(&self, m: usize) -> Result<Vec<f64>> {
        (0..m)
            .map(|i| {
                let d = self.deltas.get(i);
                let r = self.factor() * d;
                if d.is_nan() || d < 0.0 {
                    Err(Error::InvalidCoefficient { index: i, value: d })
                } else if r >= 1.0 {
                    Err(Error::DegenerateDelta { index: i, value: r })
                } else {
                    Ok(r)
                }
            })
            .collect()
    }

    /// Law of `Z_m` on `{0, ..., m}` by forward recursion.
    pub fn distribution(&self, m: usize) -> Result<Vec<f64>> {
        let r = self.resets(m)?;
        let mut v = vec![0.0; m + 1];
        v[0] = 1.0;
        for t in 0..m {
            // Support of Z_t is {0..t}; update from the top down in place.
            let mut reset = 0.0;
            for i in (0..=t).rev() {
                let mass = v[i];
                reset += mass * r[i];
                v[i + 1] = mass * (1.0 - r[i]);
            }
            v[0] = reset;
        }
        Ok(v)
    }

    /// `P[Z_m = 0]`.
    pub fn p0(&self, m: usize) -> Result<f64> {
        Ok(self.distribution(m)?[0])
    }

    /// `P[Z_m >= k]` for `k = 0..=max_k`.
    pub fn survival(&self, m: usize, max_k: usize) -> Result<Vec<f64>> {
        let v = self.distribution(m)?;
        Ok((0..=max_k)
            .map(|k| v.iter().skip(k).sum::<f64>().min(1.0))
            .collect())
    }

    /// Monte Carlo estimate of `P[Z_m = 0]`.
    pub fn simulate_p0(&self, m: usize, trials: u64, streams: &Streams) -> Result<Estimate> {
        let r = self.resets(m)?;
        let hits: Vec<u64> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = streams.rng(t);
                let mut z = 0usize;
                for _ in 0..m {
                    z = if rng.random::<f64>() < r[z] { 0 } else { z + 1 };
                }
                u64::from(z == 0)
            })
            .collect();
        Estimate::from_counts(hits.iter().sum(), trials)
    }

    /// Classification from `nu(k) = prod_{n<=k} (1 - r_n)`: transient when
    /// `nu` has a positive limit, positive recurrent when it is summable.
    pub fn classify(&self) -> Recurrence {
        classify_tail(&self.deltas.tail(), self.factor())
    }
}

/// Recurrence of the chain whose reset probabilities are `factor * delta_n`,
/// from a tail descriptor of `delta`.
pub fn classify_tail(tail: &TailDescriptor, factor: f64) -> Recurrence {
    match *tail {
        TailDescriptor::Constant { value } if value <= 0.0 => Recurrence::Transient,
        TailDescriptor::Constant { .. } => Recurrence::PositiveRecurrent,
        TailDescriptor::EventuallyZero { .. } | TailDescriptor::Geometric { .. } => {
            Recurrence::Transient
        }
        TailDescriptor::Harmonic { c } => harmonic(factor * c),
        TailDescriptor::PowerLaw { constant, exponent } => {
            if constant <= 0.0 || exponent > 1.0 {
                Recurrence::Transient
            } else if exponent < 1.0 {
                Recurrence::PositiveRecurrent
            } else {
                harmonic(factor * constant)
            }
        }
    }
}

/// `nu(k) ~ k^(-c)` when `r_n ~ c / n`.
fn harmonic(c: f64) -> Recurrence {
    if c <= 0.0 {
        Recurrence::Transient
    } else if c <= 1.0 {
        Recurrence::NullRecurrent
    } else {
        Recurrence::PositiveRecurrent
    }
}

/// `P[Z_m = 0]` for the doubled chain.
pub fn domination_p0(deltas: &DeltaSequence, m: usize) -> Result<f64> {
    DominationChain::new(deltas.clone()).p0(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_delta_climbs() {
        let c = DominationChain::new(DeltaSequence::Constant(0.0));
        assert_eq!(c.p0(0).unwrap(), 1.0);
        for m in 1..20 {
            assert_eq!(c.p0(m).unwrap(), 0.0);
        }
        assert_eq!(c.classify(), Recurrence::Transient);
    }

    #[test]
    fn constant_delta_converges_to_stationary_mass() {
        let c = DominationChain::new(DeltaSequence::Constant(0.1));
        // Stationary mass at 0 is 1 / sum_k 0.8^k.
        assert!((c.p0(1000).unwrap() - 0.2).abs() < 1e-9);
        assert_eq!(c.classify(), Recurrence::PositiveRecurrent);
    }

    #[test]
    fn harmonic_quarter_is_null_recurrent() {
        let c = DominationChain::new(DeltaSequence::Harmonic(0.25));
        assert_eq!(c.classify(), Recurrence::NullRecurrent);
        let p = c.p0(10_000).unwrap();
        assert!(p < 0.05, "{p}");
        assert!(c.p0(100).unwrap() > p);
    }

    #[test]
    fn degenerate_delta_is_rejected() {
        let c = DominationChain::new(DeltaSequence::Values(vec![0.1, 0.5]));
        assert_eq!(c.p0(5).unwrap_err().code(), "DEGENERATE_DELTA");
        let c = DominationChain::without_doubling(DeltaSequence::Values(vec![0.1, 0.5]));
        assert!(c.p0(5).is_ok());
    }

    #[test]
    fn first_steps_by_hand() {
        let c = DominationChain::new(DeltaSequence::Values(vec![0.1, 0.2, 0.0]));
        let v = c.distribution(2).unwrap();
        // Z_1: 0 w.p. 0.2, 1 w.p. 0.8. Z_2 = 0 w.p. 0.2*0.2 + 0.8*0.4.
        assert!((v[0] - (0.04 + 0.32)).abs() < 1e-15);
        assert!((v[1] - 0.2 * 0.8).abs() < 1e-15);
        assert!((v[2] - 0.8 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn simulation_matches_recursion() {
        let c = DominationChain::new(DeltaSequence::Constant(0.1));
        let e = c.simulate_p0(10, 200_000, &Streams::new(1)).unwrap();
        assert!(e.within(c.p0(10).unwrap(), 4.0));
    }

    proptest! {
        #[test]
        fn distribution_is_a_law(d in proptest::collection::vec(0.0f64..0.49, 1..8), m in 0usize..40) {
            let v = DominationChain::new(DeltaSequence::Values(d)).distribution(m).unwrap();
            prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(v.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn larger_delta_gives_more_mass_at_zero(d in 0.0f64..0.45, extra in 0.0f64..0.04, m in 1usize..60) {
            let lo = DominationChain::new(DeltaSequence::Constant(d)).p0(m).unwrap();
            let hi = DominationChain::new(DeltaSequence::Constant(d + extra)).p0(m).unwrap();
            prop_assert!(hi >= lo - 1e-12);
        }
    }
}
