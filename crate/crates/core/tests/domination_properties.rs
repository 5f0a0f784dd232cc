use couplage_core::reconstruction::{DeltaSequence, DominationChain};
use couplage_core::Streams;
use proptest::prelude::*;

proptest! {
    #[test]
    fn law_of_z_is_a_distribution(d in proptest::collection::vec(0.0f64..0.49, 1..8), m in 0usize..60) {
        let chain = DominationChain::new(DeltaSequence::Values(d));
        let law = chain.distribution(m).unwrap();
        prop_assert_eq!(law.len(), m + 1);
        prop_assert!(law.iter().all(|&p| p >= 0.0));
        prop_assert!((law.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn larger_delta_means_more_mass_at_zero(a in 0.0f64..0.49, b in 0.0f64..0.49, m in 1usize..200) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let p_lo = DominationChain::new(DeltaSequence::Constant(lo)).p0(m).unwrap();
        let p_hi = DominationChain::new(DeltaSequence::Constant(hi)).p0(m).unwrap();
        prop_assert!(p_lo <= p_hi + 1e-12);
    }

    #[test]
    fn survival_is_non_increasing(c in 0.0f64..0.98, m in 1usize..100) {
        let chain = DominationChain::new(DeltaSequence::Harmonic(c / 2.0));
        let s = chain.survival(m, 30).unwrap();
        prop_assert!((s[0] - 1.0).abs() <= 1e-12);
        prop_assert!(s.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}

#[test]
fn simulation_matches_recursion_for_a_finite_memory_bound() {
    let chain = DominationChain::new(DeltaSequence::Values(vec![0.3, 0.2, 0.05, 0.0]));
    for m in [5usize, 30] {
        let exact = chain.p0(m).unwrap();
        let mc = chain
            .simulate_p0(m, 100_000, &Streams::new(m as u64))
            .unwrap();
        assert!(mc.within(exact, 4.0), "m={m}: {mc:?} vs {exact}");
    }
}
