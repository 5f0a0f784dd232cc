//! Fixtures shared by the benchmarks.

use couplage_core::simplex::sample_uniform_simplex;
use couplage_core::{Alphabet, ProbVec, Streams};

/// `count` reproducible pairs of laws drawn uniformly from the simplex on `n` symbols.
pub fn random_pairs(n: usize, count: u64, seed: u64) -> Vec<(ProbVec, ProbVec)> {
    let alphabet = Alphabet::indexed(n).expect("n >= 1");
    let streams = Streams::new(seed);
    (0..count)
        .map(|i| {
            let mut rng = streams.rng(i);
            let p = sample_uniform_simplex(&mut rng, &alphabet);
            let q = sample_uniform_simplex(&mut rng, &alphabet);
            (
                ProbVec::new(alphabet.clone(), p.coords().to_vec()).expect("simplex point"),
                ProbVec::new(alphabet.clone(), q.coords().to_vec()).expect("simplex point"),
            )
        })
        .collect()
}
