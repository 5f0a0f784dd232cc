use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::influence::TailDescriptor;
use crate::process::{stationary_word_law, ContextKernel, StationaryLaw};
use crate::reconstruction::context::Context;
use crate::reconstruction::pair::generate_pair;
use crate::reconstruction::priming::{cell_measure, in_cell};
use crate::rng::Streams;
use crate::simplex::{classify_raw, Estimate};

/// Largest number of blocks a schedule may hold.
pub const MAX_BLOCKS: usize = 10_000_000;
/// Largest block length searched for.
pub const MAX_BLOCK_LENGTH: usize = 100_000;

/// Certified bound on `sum_{n >= l} eta_n`.
pub fn certified_tail(tail: &TailDescriptor, l: usize) -> Result<f64> {
    let lf = l as f64;
    match *tail {
        TailDescriptor::Constant { value } if value <= 0.0 => Ok(0.0),
        TailDescriptor::Harmonic { c } if c <= 0.0 => Ok(0.0),
        TailDescriptor::Constant { .. } | TailDescriptor::Harmonic { .. } => {
            Err(Error::HprimeFails)
        }
        TailDescriptor::EventuallyZero { from } if l >= from => Ok(0.0),
        TailDescriptor::EventuallyZero { .. } => Ok(f64::INFINITY),
        TailDescriptor::Geometric { constant, ratio } => {
            Ok(constant * ratio.powf(lf) / (1.0 - ratio))
        }
        TailDescriptor::PowerLaw { constant, exponent } => {
            if constant <= 0.0 {
                Ok(0.0)
            } else if exponent <= 1.0 {
                Err(Error::HprimeFails)
            } else if l < 2 {
                Ok(f64::INFINITY)
            } else {
                // sum_{n>=l} C n^-e <= integral from l-1.
                Ok(constant * (lf - 1.0).powf(1.0 - exponent) / (exponent - 1.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleLevel {
    pub m: usize,
    /// Block length `L_m`.
    pub length: usize,
    /// Number of blocks `M_m = ceil(1 / beta_{L_m})`.
    pub count: usize,
    pub epsilon: f64,
    pub beta: f64,
    /// Certified `sum_{n >= L_m} eta_n`.
    pub tail_bound: f64,
}

/// Splitting of the negative times into consecutive blocks `J_k = [t_k, t_{k-1} - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub levels: Vec<ScheduleLevel>,
}

/// One block of the flattened schedule, `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Block {
    pub k: usize,
    pub length: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub level: usize,
    /// `t_k`, the first time of the block.
    pub start: i64,
    /// `t_{k-1} - 1`, the last time of the block.
    pub end: i64,
}

/// Smallest `L_m >= 1` with a certified tail at most `1/m`, for `m = 1..=m_max`,
/// and `M_m = ceil(1 / beta(L_m))`.
pub fn build_schedule(
    eta_tail: Option<TailDescriptor>,
    beta: impl Fn(usize) -> f64,
    m_max: usize,
) -> Result<Schedule> {
    let tail = eta_tail.ok_or_else(|| {
        Error::NotApplicable("no certified tail for the average influences".into())
    })?;
    certified_tail(&tail, MAX_BLOCK_LENGTH)?;
    let mut levels = Vec::with_capacity(m_max);
    let mut total = 0usize;
    let mut length = 1;
    for m in 1..=m_max {
        let epsilon = 1.0 / m as f64;
        while certified_tail(&tail, length)? > epsilon {
            length += 1;
            if length > MAX_BLOCK_LENGTH {
                return Err(Error::Intractable(format!(
                    "no block length up to {MAX_BLOCK_LENGTH} for m={m}"
                )));
            }
        }
        let b = beta(length);
        if !(b > 0.0 && b <= 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "beta",
                value: b,
            });
        }
        let count = (1.0 / b).ceil();
        total = total.saturating_add(count as usize);
        if count > MAX_BLOCKS as f64 || total > MAX_BLOCKS {
            return Err(Error::Intractable(format!("more than {MAX_BLOCKS} blocks")));
        }
        levels.push(ScheduleLevel {
            m,
            length,
            count: count as usize,
            epsilon,
            beta: b,
            tail_bound: certified_tail(&tail, length)?,
        });
    }
    Ok(Schedule { levels })
}

impl Schedule {
    pub fn block_count(&self) -> usize {
        self.levels.iter().map(|l| l.count).sum()
    }

    /// The first `k_max` blocks, `k = 1..=k_max`.
    pub fn blocks(&self, k_max: usize) -> Result<Vec<Block>> {
        if k_max > self.block_count() {
            return Err(Error::ParamOutOfRange {
                name: "K",
                value: k_max as f64,
            });
        }
        let mut out = Vec::with_capacity(k_max);
        let mut t = 0i64;
        'outer: for lv in &self.levels {
            for _ in 0..lv.count {
                if out.len() == k_max {
                    break 'outer;
                }
                let start = t - lv.length as i64;
                out.push(Block {
                    k: out.len() + 1,
                    length: lv.length,
                    epsilon: lv.epsilon,
                    beta: lv.beta,
                    level: lv.m,
                    start,
                    end: t - 1,
                });
                t = start;
            }
        }
        Ok(out)
    }

    /// Cut times `t_0 = 0, ..., t_K`.
    pub fn cut_times(&self, k_max: usize) -> Result<Vec<i64>> {
        let mut out = vec![0];
        out.extend(self.blocks(k_max)?.iter().map(|b| b.start));
        Ok(out)
    }

    /// Exact check that the first `k_max` intervals tile `[t_K, -1]`.
    pub fn tiles(&self, k_max: usize) -> Result<bool> {
        let blocks = self.blocks(k_max)?;
        let mut next_end = -1i64;
        for b in &blocks {
            if b.end != next_end || b.end - b.start + 1 != b.length as i64 {
                return Ok(false);
            }
            next_end = b.start - 1;
        }
        let covered: i64 = blocks.iter().map(|b| b.length as i64).sum();
        Ok(blocks.last().map_or(0, |b| -b.start) == covered)
    }

    /// `sum_{n >= L_m} eta_n <= epsilon_m` on every level.
    pub fn certified(&self) -> bool {
        self.levels.iter().all(|l| l.tail_bound <= l.epsilon)
    }
}

/// Stationary word laws by length, computed once.
#[derive(Debug, Default)]
pub struct WordLaws {
    laws: BTreeMap<usize, StationaryLaw>,
}

impl WordLaws {
    pub fn for_schedule(k: &ContextKernel, blocks: &[Block]) -> Result<Self> {
        let mut laws = BTreeMap::new();
        for b in blocks {
            if let std::collections::btree_map::Entry::Vacant(e) = laws.entry(b.length) {
                e.insert(stationary_word_law(k, b.length)?);
            }
        }
        Ok(Self { laws })
    }

    fn sample<R: Rng + ?Sized>(&self, length: usize, rng: &mut R) -> Vec<usize> {
        let law = &self.laws[&length];
        let n = law.alphabet().len();
        let u: f64 = rng.random::<f64>() * law.total();
        let mut acc = 0.0;
        let mut code = law.probs().len() - 1;
        for (i, &p) in law.probs().iter().enumerate() {
            acc += p;
            if u < acc {
                code = i;
                break;
            }
        }
        let mut word = vec![0; length];
        for slot in word.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        word
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockOutcome {
    pub k: usize,
    pub hit: bool,
    /// `X^k_0 != X_0`, on a hit.
    pub mismatch_at_zero: Option<bool>,
    /// `X^k_{t_k:0} != X_{t_k:0}`, on a hit.
    pub path_mismatch: Option<bool>,
    /// `X^k_0`, on a hit.
    pub value: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessiveRun {
    pub truth: usize,
    pub blocks: Vec<BlockOutcome>,
    pub expected_hits: f64,
}

impl SuccessiveRun {
    /// `X^k_0` on the latest hit among the first `k_max` blocks.
    pub fn estimate(&self, k_max: usize) -> Result<usize> {
        let upto = k_max.min(self.blocks.len());
        self.blocks[..upto]
            .iter()
            .rev()
            .find_map(|b| b.value)
            .ok_or(Error::NoHit {
                blocks: upto,
                expected: self.expected_hits,
            })
    }
}

/// Runs the approximations `X^k` seeded with `X^k_{J_k} = Y_k` for the first
/// `k_max` blocks, on one stationary path and innovation sequence. Cells use
/// the common threshold `q` so every `B_y` has measure `beta_{l_k}`.
pub fn successive_approximation<R: Rng + ?Sized>(
    k: &ContextKernel,
    schedule: &Schedule,
    k_max: usize,
    q: f64,
    depth: usize,
    laws: &WordLaws,
    rng: &mut R,
) -> Result<SuccessiveRun> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::ParamOutOfRange {
            name: "q",
            value: q,
        });
    }
    let blocks = schedule.blocks(k_max)?;
    let deepest = blocks.last().map_or(-1, |b| b.start);
    let pair = generate_pair(k, deepest, depth, rng)?;
    let idx = |t: i64| (t - deepest) as usize;
    let truth = *pair.x.last().expect("non-empty path");
    let mut outcomes = Vec::with_capacity(blocks.len());
    for b in &blocks {
        let y = laws.sample(b.length, rng);
        let i0 = idx(b.start);
        let hit = (0..b.length).all(|j| in_cell(y[j], q, &pair.u[i0 + j]));
        if !hit {
            outcomes.push(BlockOutcome {
                k: b.k,
                hit,
                mismatch_at_zero: None,
                path_mismatch: None,
                value: None,
            });
            continue;
        }
        let mut ctx = Context::empty(k, depth)?;
        let mut path_mismatch = false;
        for (j, &a) in y.iter().enumerate() {
            ctx.push(a);
            path_mismatch |= a != pair.x[i0 + j];
        }
        let mut last = *y.last().expect("non-empty block");
        for i in idx(b.end + 1)..pair.len() {
            last = classify_raw(&pair.u[i], &ctx.law());
            ctx.push(last);
            path_mismatch |= last != pair.x[i];
        }
        outcomes.push(BlockOutcome {
            k: b.k,
            hit,
            mismatch_at_zero: Some(last != truth),
            path_mismatch: Some(path_mismatch),
            value: Some(last),
        });
    }
    Ok(SuccessiveRun {
        truth,
        expected_hits: blocks.iter().map(|b| b.beta).sum(),
        blocks: outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    pub m: usize,
    pub length: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub blocks: usize,
    /// Hit frequency pooled over the blocks of the level and the replicas.
    pub hit_rate: Estimate,
    pub hits: u64,
    /// `P[X^k_0 != X_0 | hit]` pooled over the level.
    pub conditional_mismatch: Option<Estimate>,
    /// `P[X^k_{t_k:0} != X_{t_k:0} | hit]` pooled over the level.
    pub conditional_path_mismatch: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessiveReport {
    pub replicas: u64,
    pub levels: Vec<LevelStats>,
    /// `(K, P[estimate = X_0])`, a replica without any hit counting as wrong.
    pub accuracy: Vec<(usize, Estimate)>,
}

/// Replicated successive approximations, summarized per level and per `K`.
pub fn successive_experiment(
    k: &ContextKernel,
    schedule: &Schedule,
    k_list: &[usize],
    q: f64,
    replicas: u64,
    depth: usize,
    streams: &Streams,
) -> Result<SuccessiveReport> {
    let k_max = *k_list.iter().max().ok_or(Error::EmptySample)?;
    if replicas == 0 {
        return Err(Error::EmptySample);
    }
    let blocks = schedule.blocks(k_max)?;
    let laws = WordLaws::for_schedule(k, &blocks)?;
    let runs: Vec<SuccessiveRun> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.rng(r);
            successive_approximation(k, schedule, k_max, q, depth, &laws, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut levels = Vec::new();
    for lv in &schedule.levels {
        let in_level: Vec<usize> = blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.level == lv.m)
            .map(|(i, _)| i)
            .collect();
        if in_level.is_empty() {
            continue;
        }
        let mut hits = 0u64;
        let mut mismatches = 0u64;
        let mut path_mismatches = 0u64;
        for run in &runs {
            for &i in &in_level {
                let o = &run.blocks[i];
                if o.hit {
                    hits += 1;
                    mismatches += u64::from(o.mismatch_at_zero == Some(true));
                    path_mismatches += u64::from(o.path_mismatch == Some(true));
                }
            }
        }
        let draws = replicas * in_level.len() as u64;
        levels.push(LevelStats {
            m: lv.m,
            length: lv.length,
            epsilon: lv.epsilon,
            beta: lv.beta,
            blocks: in_level.len(),
            hit_rate: Estimate::from_counts(hits, draws)?,
            hits,
            conditional_mismatch: Estimate::from_counts(mismatches, hits).ok(),
            conditional_path_mismatch: Estimate::from_counts(path_mismatches, hits).ok(),
        });
    }
    let accuracy = k_list
        .iter()
        .map(|&kk| {
            let right = runs
                .iter()
                .filter(|r| r.estimate(kk).is_ok_and(|v| v == r.truth))
                .count() as u64;
            Ok((kk, Estimate::from_counts(right, replicas)?))
        })
        .collect::<Result<_>>()?;
    Ok(SuccessiveReport {
        replicas,
        levels,
        accuracy,
    })
}

/// `beta_l = (q / (q + N - 1))^l` for the common threshold `q`.
pub fn common_beta(q: f64, n_symbols: usize) -> impl Fn(usize) -> f64 {
    let c = cell_measure(q, n_symbols);
    move |l| c.powi(l as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{parity_chain, rwrs};

    fn parity_schedule(m_max: usize) -> Schedule {
        let k = parity_chain();
        build_schedule(k.eta_tail(), common_beta(0.25, 2), m_max).unwrap()
    }

    #[test]
    fn parity_lengths_by_hand() {
        // Tail bound 2 (2/3)^L.
        let s = parity_schedule(5);
        let lengths: Vec<usize> = s.levels.iter().map(|l| l.length).collect();
        assert_eq!(lengths, vec![2, 4, 5, 6, 6]);
        assert_eq!(s.levels[0].count, 25);
        assert!(s.certified());
        let k = s.block_count();
        assert!(s.tiles(k).unwrap());
        let cuts = s.cut_times(3).unwrap();
        assert_eq!(cuts, vec![0, -2, -4, -6]);
    }

    #[test]
    fn zero_eta_gives_unit_blocks() {
        let s =
            build_schedule(Some(TailDescriptor::EventuallyZero { from: 0 }), |_| 0.5, 3).unwrap();
        assert!(s.levels.iter().all(|l| l.length == 1 && l.count == 2));
        assert!(s.tiles(6).unwrap());
    }

    #[test]
    fn rwrs_schedule_is_refused() {
        let err = build_schedule(rwrs().eta_tail(), |_| 0.5, 2).unwrap_err();
        assert_eq!(err.code(), "HPRIME_FAILS");
    }

    #[test]
    fn no_hit_is_reported() {
        let run = SuccessiveRun {
            truth: 0,
            blocks: vec![BlockOutcome {
                k: 1,
                hit: false,
                mismatch_at_zero: None,
                path_mismatch: None,
                value: None,
            }],
            expected_hits: 0.04,
        };
        assert_eq!(run.estimate(1).unwrap_err().code(), "NO_HIT");
    }

    #[test]
    fn parity_hits_and_errors_are_plausible() {
        let k = parity_chain();
        let s = parity_schedule(2);
        let rep = successive_experiment(&k, &s, &[10, 25], 0.25, 800, 8, &Streams::new(6)).unwrap();
        let lv = &rep.levels[0];
        let sigma = (lv.beta * (1.0 - lv.beta) / (rep.replicas * lv.blocks as u64) as f64).sqrt();
        assert!((lv.hit_rate.point_estimate - lv.beta).abs() <= 4.0 * sigma);
        let cm = lv.conditional_mismatch.unwrap();
        assert!(cm.point_estimate <= 3.0 * lv.epsilon + 4.0 * cm.std_error);
    }
}
