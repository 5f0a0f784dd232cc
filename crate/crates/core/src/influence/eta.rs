use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::influence::coefficients_at;
use crate::process::{rwrs, stationary_word_law, ContextKernel, EtaForm, Lift, MAX_WORDS};
use crate::rng::Streams;
use crate::simplex::{tv_raw, Estimate};

/// Exact average influence at distance `n`.
///
/// Lifted kernels are enumerated over words `z` of length `n` and over the
/// state of an independent stationary past. The plain and renewed scenery
/// walks use their closed form. The misread walk has no evaluator.
pub fn eta_n_exact(k: &ContextKernel, n: usize) -> Result<f64> {
    if let Some(lift) = k.lift() {
        return lift_eta(lift, n);
    }
    if !k.has_evaluator() {
        return Err(Error::NoEvaluator);
    }
    match k.closed_form(n).and_then(|c| c.eta) {
        Some(EtaForm::Exact(v)) => Ok(v),
        _ => Err(Error::Intractable(format!("no exact eta for {}", k.id()))),
    }
}

fn lift_eta(lift: &Lift, n: usize) -> Result<f64> {
    let n_symbols = lift.n_symbols();
    if n_symbols
        .checked_pow(n as u32)
        .is_none_or(|c| c > MAX_WORDS)
    {
        return Err(Error::Intractable(format!("{n_symbols}^{n} words")));
    }
    let states = lift.states();
    let pi = lift.stationary();
    // mass[s]: joint mass of (z, current state) under the stationary law;
    // runs[s]: state reached from the independent past state s.
    struct Frame {
        mass: Vec<f64>,
        runs: Vec<usize>,
    }
    fn visit(lift: &Lift, pi: &[f64], frame: &Frame, depth: usize, n: usize, acc: &mut f64) {
        let pz: f64 = frame.mass.iter().sum();
        if pz <= 0.0 {
            return;
        }
        if depth == n {
            let belief: Vec<f64> = frame.mass.iter().map(|m| m / pz).collect();
            let cond = lift.predictive(&belief);
            let gap: f64 = frame
                .runs
                .iter()
                .zip(pi)
                .map(|(&s, &w)| w * tv_raw(&cond, lift.emission(s)))
                .sum();
            *acc += pz * gap;
            return;
        }
        for a in 0..lift.n_symbols() {
            let mut mass = vec![0.0; frame.mass.len()];
            for (s, &m) in frame.mass.iter().enumerate() {
                if m > 0.0 {
                    mass[lift.step(s, a)] += m * lift.emission(s)[a];
                }
            }
            let runs = frame.runs.iter().map(|&s| lift.step(s, a)).collect();
            visit(lift, pi, &Frame { mass, runs }, depth + 1, n, acc);
        }
    }
    let root = Frame {
        mass: pi.to_vec(),
        runs: (0..states).collect(),
    };
    let mut acc = 0.0;
    visit(lift, pi, &root, 0, n, &mut acc);
    Ok(acc)
}

/// Average influence of the plain or renewed scenery walk by enumerating
/// every context of positive probability with the kernel, and completing
/// each step left open by the context with a uniform color from the past.
pub fn scenery_eta_enumerated(k: &ContextKernel, n: usize) -> Result<f64> {
    let renewal = k
        .scenery_renewal()
        .ok_or_else(|| Error::NotApplicable(format!("{} is not a scenery walk", k.id())))?;
    if 4usize
        .checked_pow(n as u32)
        .is_none_or(|c| c > 4 * MAX_WORDS)
    {
        return Err(Error::Intractable(format!("4^{n} contexts")));
    }
    fn visit(
        k: &ContextKernel,
        renewal: Option<f64>,
        z: &mut Vec<usize>,
        p: f64,
        n: usize,
        acc: &mut f64,
    ) {
        let law = k.eval_raw(z).expect("scenery walks have an evaluator");
        if z.len() == n {
            let st = rwrs::statuses(z);
            let open: Vec<usize> = (0..2).filter(|&i| st[i].is_none()).collect();
            let combos = 1usize << open.len();
            let mut gap = 0.0;
            for c in 0..combos {
                let mut full = st;
                for (bit, &i) in open.iter().enumerate() {
                    full[i] = Some(if c >> bit & 1 == 1 { 1 } else { -1 });
                }
                gap += tv_raw(&law, &rwrs::law_from(full, renewal));
            }
            *acc += p * gap / combos as f64;
            return;
        }
        for (a, &pa) in law.iter().enumerate() {
            if pa > 0.0 {
                z.push(a);
                visit(k, renewal, z, p * pa, n, acc);
                z.pop();
            }
        }
    }
    if n == 0 {
        let mut acc = 0.0;
        visit(k, renewal, &mut Vec::new(), 1.0, 0, &mut acc);
        return Ok(acc);
    }
    // Split on the first symbol; partial sums are added in symbol order.
    let parts: Vec<f64> = (0..4usize)
        .into_par_iter()
        .map(|a| {
            let mut acc = 0.0;
            let p0 = k.eval_raw(&[]).expect("evaluator")[a];
            visit(k, renewal, &mut vec![a], p0, n, &mut acc);
            acc
        })
        .collect();
    Ok(parts.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaMcOptions {
    /// Initial truncation depth of the independent past.
    pub depth: usize,
    /// Depth at which widening stops.
    pub max_depth: usize,
    /// Scenery walks extend the past per trial until both next steps are
    /// fixed, up to this depth.
    pub scenery_max_depth: usize,
}

impl Default for EtaMcOptions {
    fn default() -> Self {
        Self {
            depth: 64,
            max_depth: 4096,
            scenery_max_depth: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaMcResult {
    pub estimate: Estimate,
    /// Truncation depth used for the reported estimate.
    pub depth: usize,
    /// Whether the estimates at `depth / 2` and `depth` agreed within 2 sigma.
    pub converged: bool,
}

/// Monte Carlo average influence: for each trial an independent stationary
/// window `Y` of length `n` and an independent past `X` truncated at a
/// finite depth, averaging `||p(.|Y) - p(.|XY)||`.
pub fn eta_n_mc(
    k: &ContextKernel,
    n: usize,
    trials: u64,
    streams: &Streams,
    opts: &EtaMcOptions,
) -> Result<EtaMcResult> {
    if !k.has_evaluator() {
        return Err(Error::NoEvaluator);
    }
    if trials == 0 {
        return Err(Error::EmptySample);
    }
    let streams = streams.domain(0x657461 ^ n as u64);
    if let Some(renewal) = k.scenery_renewal() {
        let samples: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = streams.rng(i);
                let y = k.sample_path(n, &mut rng).into_symbols();
                let base = k.eval_raw(&y).expect("evaluator");
                let mut past = rwrs::BackwardPast::new(renewal);
                let mut older: Vec<usize> = Vec::new();
                let mut depth = opts.depth;
                loop {
                    while older.len() < depth {
                        older.push(past.older(&mut rng));
                    }
                    let mut ctx: Vec<usize> = older.iter().rev().copied().collect();
                    ctx.extend_from_slice(&y);
                    let st = rwrs::statuses(&ctx);
                    if (st[0].is_some() && st[1].is_some()) || depth >= opts.scenery_max_depth {
                        let full = k.eval_raw(&ctx).expect("evaluator");
                        return tv_raw(&base, &full);
                    }
                    depth *= 2;
                }
            })
            .collect();
        return Ok(EtaMcResult {
            estimate: Estimate::from_samples(&samples)?,
            depth: opts.scenery_max_depth,
            converged: true,
        });
    }
    let mut depth = opts.depth.max(1);
    loop {
        let pairs: Vec<(f64, f64)> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = streams.rng(i);
                let y = k.sample_path(n, &mut rng).into_symbols();
                let x = k.sample_path(2 * depth, &mut rng).into_symbols();
                let base = k.eval_raw(&y).expect("evaluator");
                let splice = |past: &[usize]| {
                    let mut ctx = past.to_vec();
                    ctx.extend_from_slice(&y);
                    tv_raw(&base, &k.eval_raw(&ctx).expect("evaluator"))
                };
                (splice(&x[depth..]), splice(&x))
            })
            .collect();
        let short: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let long: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (es, el) = (
            Estimate::from_samples(&short)?,
            Estimate::from_samples(&long)?,
        );
        let sigma = (es.std_error.powi(2) + el.std_error.powi(2)).sqrt();
        let converged = (es.point_estimate - el.point_estimate).abs() <= 2.0 * sigma;
        if converged || 2 * depth >= opts.max_depth {
            return Ok(EtaMcResult {
                estimate: el,
                depth: 2 * depth,
                converged,
            });
        }
        depth *= 2;
    }
}

/// Tail law of the context length under the stationary law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContextLengthBound {
    pub n: usize,
    /// `P[l >= n + 1]`.
    pub bound: f64,
    /// `sum_{j <= terms} P[l >= j + 1]`, a lower bound on the expected context length.
    pub expected_length_partial: f64,
    pub terms: usize,
    /// Whether the summed tail fell below 1e-15.
    pub expected_length_converged: bool,
}

/// `P[l >= n + 1]` for the context length `l` of a stationary past, which
/// bounds the average influence at distance `n` from above.
pub fn vlmc_eta_bound(k: &ContextKernel, n: usize) -> Result<ContextLengthBound> {
    let lift = k
        .lift()
        .ok_or_else(|| Error::Intractable(format!("no finite lift for {}", k.id())))?;
    const MAX_TERMS: usize = 100_000;
    // Joint mass of (image set of the last j symbols, current state).
    let mut level: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    level.insert((0..lift.states()).collect(), lift.stationary().to_vec());
    let mut tails = Vec::new();
    let mut sum = 0.0;
    let mut converged = false;
    for j in 0..MAX_TERMS {
        let tail: f64 = level
            .iter()
            .filter(|(set, _)| !constant_emission(lift, set))
            .map(|(_, m)| m.iter().sum::<f64>())
            .sum();
        tails.push(tail);
        sum += tail;
        if j >= n && tail < 1e-15 {
            converged = true;
            break;
        }
        let mut next: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
        for (set, mass) in &level {
            for a in 0..lift.n_symbols() {
                let img = lift.image_step(set, a);
                let slot = next.entry(img).or_insert_with(|| vec![0.0; lift.states()]);
                for (s, &m) in mass.iter().enumerate() {
                    if m > 0.0 {
                        slot[lift.step(s, a)] += m * lift.emission(s)[a];
                    }
                }
            }
        }
        if next.len() > super::MAX_IMAGE_SETS {
            return Err(Error::Intractable("context length law".into()));
        }
        level = next;
    }
    Ok(ContextLengthBound {
        n,
        bound: tails.get(n).copied().unwrap_or(0.0),
        expected_length_partial: sum,
        terms: tails.len(),
        expected_length_converged: converged,
    })
}

fn constant_emission(lift: &Lift, set: &[usize]) -> bool {
    let first = lift.emission(set[0]);
    set.iter().all(|&s| lift.emission(s) == first)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorCheck {
    pub gamma0: f64,
    pub floor: f64,
    pub contexts: usize,
    pub violations: usize,
}

/// `(1 - gamma_0) * min_a P[X_0 = a]` over symbols of positive probability.
pub fn gamma0_floor(k: &ContextKernel) -> Result<f64> {
    let (gamma0, marginal) = floor_inputs(k)?;
    Ok((1.0 - gamma0)
        * marginal
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min))
}

fn floor_inputs(k: &ContextKernel) -> Result<(f64, Vec<f64>)> {
    let gamma0 = coefficients_at(k, 0)?.gamma;
    if gamma0 >= 1.0 {
        return Err(Error::NoFloor);
    }
    let marginal = stationary_word_law(k, 1)?.probs().to_vec();
    Ok((gamma0, marginal))
}

/// Checks `p(a|z) >= (1 - gamma_0) P[X_0 = a]` for every symbol on
/// `contexts` sampled stationary contexts of lengths `0..max_len`.
pub fn verify_gamma0_floor(
    k: &ContextKernel,
    contexts: usize,
    max_len: usize,
    streams: &Streams,
) -> Result<FloorCheck> {
    let (gamma0, marginal) = floor_inputs(k)?;
    let floor = gamma0_floor(k)?;
    let streams = streams.domain(0x666c6f6f72);
    let violations: usize = (0..contexts as u64)
        .into_par_iter()
        .map(|i| {
            use rand::Rng;
            let mut rng = streams.rng(i);
            let len = rng.random_range(0..max_len.max(1));
            let z = k.sample_path(len, &mut rng).into_symbols();
            let p = k.eval_raw(&z).expect("evaluator");
            p.iter()
                .zip(&marginal)
                .filter(|(&pa, &ma)| pa < (1.0 - gamma0) * ma - 1e-15)
                .count()
        })
        .sum();
    Ok(FloorCheck {
        gamma0,
        floor,
        contexts,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{misread_rwrs, parity_chain, renewed_rwrs, rwrs};
    use crate::simplex::{Alphabet, ProbVec};

    #[test]
    fn iid_has_no_influence() {
        let a = Alphabet::indexed(2).unwrap();
        let k = ContextKernel::iid(ProbVec::new(a, vec![0.3, 0.7]).unwrap()).unwrap();
        assert_eq!(eta_n_exact(&k, 3).unwrap(), 0.0);
        let mc = eta_n_mc(&k, 3, 100, &Streams::new(1), &EtaMcOptions::default()).unwrap();
        assert_eq!(mc.estimate.point_estimate, 0.0);
        assert_eq!(vlmc_eta_bound(&k, 1).unwrap().bound, 0.0);
        assert!((gamma0_floor(&k).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn parity_eta_at_zero_by_hand() {
        // marginal (7/15, 8/15); states emit 0 w.p. 2/3 (mass 2/5) and 1/3 (mass 3/5).
        let v = 0.4 * (2.0 / 3.0 - 7.0 / 15.0) + 0.6 * (7.0 / 15.0 - 1.0 / 3.0);
        assert!((eta_n_exact(&parity_chain(), 0).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn parity_eta_within_geometric_bound() {
        let k = parity_chain();
        for n in 0..=12 {
            let e = eta_n_exact(&k, n).unwrap();
            assert!(e <= (2.0f64 / 3.0).powi(n as i32 + 1), "n={n}: {e}");
            assert!(e <= vlmc_eta_bound(&k, n).unwrap().bound + 1e-15);
        }
    }

    #[test]
    fn parity_context_length_tail_is_run_of_ones() {
        let k = parity_chain();
        let law = stationary_word_law(&k, 4).unwrap();
        let all_ones = law.probs()[law.probs().len() - 1];
        let b = vlmc_eta_bound(&k, 4).unwrap();
        assert!((b.bound - all_ones).abs() < 1e-12);
        assert!(b.expected_length_converged);
    }

    #[test]
    fn scenery_enumeration_matches_closed_form() {
        for n in 0..=6 {
            let e = scenery_eta_enumerated(&rwrs(), n).unwrap();
            assert!(
                (e - eta_n_exact(&rwrs(), n).unwrap()).abs() < 1e-12,
                "n={n}"
            );
        }
        let k = renewed_rwrs(0.2).unwrap();
        for n in 0..=5 {
            let e = scenery_eta_enumerated(&k, n).unwrap();
            assert!((e - 0.6 * eta_n_exact(&rwrs(), n).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn floors_and_errors() {
        let k = parity_chain();
        let f = gamma0_floor(&k).unwrap();
        assert!((f - 0.5 * 7.0 / 15.0).abs() < 1e-12);
        assert_eq!(gamma0_floor(&rwrs()).unwrap_err().code(), "NO_FLOOR");
        let m = misread_rwrs(0.2).unwrap();
        assert_eq!(
            eta_n_mc(&m, 2, 10, &Streams::new(0), &EtaMcOptions::default())
                .unwrap_err()
                .code(),
            "NO_EVALUATOR"
        );
        let chk = verify_gamma0_floor(&k, 2000, 20, &Streams::new(4)).unwrap();
        assert_eq!(chk.violations, 0);
    }
}
