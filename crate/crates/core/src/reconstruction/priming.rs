use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::process::{ContextKernel, Word};
use crate::reconstruction::context::Context;
use crate::rng::{StreamRng, Streams};
use crate::simplex::{classify_raw, fill_uniform, Estimate};
use crate::stats::binomial_upper_bound;

/// Smallest acceptance rate tolerated by the rejection samplers.
pub const MIN_ACCEPTANCE: f64 = 1e-6;
/// Attempts made before a low acceptance rate is declared starved.
pub const STARVATION_CHECK: u64 = 10_000_000;
/// Confidence of the one-sided bound used by the calibration.
pub const CALIBRATION_CONFIDENCE: f64 = 0.99;
/// Finest grid point `2^-MAX_GRID` tried by the calibration.
pub const MAX_GRID: i32 = 60;

/// Innovation cells `B_m = {y : y_{x_m} <= q_m y_k for all k != x_m}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimingSet {
    pub word: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub n_symbols: usize,
}

/// `mu(B) = q / (q + N - 1)` for one cell under the uniform law on the simplex.
pub fn cell_measure(q: f64, n_symbols: usize) -> f64 {
    q / (q + n_symbols as f64 - 1.0)
}

pub fn build_priming_set(x: &Word, thresholds: &[f64]) -> Result<PrimingSet> {
    if thresholds.len() != x.len() || x.is_empty() {
        return Err(Error::ParamOutOfRange {
            name: "thresholds",
            value: thresholds.len() as f64,
        });
    }
    for &q in thresholds {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "q",
                value: q,
            });
        }
    }
    Ok(PrimingSet {
        word: x.symbols().to_vec(),
        thresholds: thresholds.to_vec(),
        n_symbols: x.alphabet().len(),
    })
}

impl PrimingSet {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// `beta = prod_m q_m / (q_m + N - 1)`.
    pub fn beta(&self) -> f64 {
        self.thresholds
            .iter()
            .map(|&q| cell_measure(q, self.n_symbols))
            .product()
    }

    /// Whether `y` lies in the cell of position `m`.
    pub fn cell_contains(&self, m: usize, y: &[f64]) -> bool {
        in_cell(self.word[m], self.thresholds[m], y)
    }

    /// Whether the block `u_1, ..., u_l` lies in `B_1 x ... x B_l`.
    pub fn contains(&self, block: &[Vec<f64>]) -> bool {
        block.len() == self.len()
            && block
                .iter()
                .enumerate()
                .all(|(m, y)| self.cell_contains(m, y))
    }
}

/// `y_a / q <= min_{k != a} y_k`.
pub(crate) fn in_cell(a: usize, q: f64, y: &[f64]) -> bool {
    let ya = y[a];
    y.iter().enumerate().all(|(k, &yk)| k == a || ya <= q * yk)
}

/// Monte Carlo frequency of one cell.
pub fn cell_frequency(
    a: usize,
    q: f64,
    n_symbols: usize,
    draws: u64,
    streams: &Streams,
) -> Result<Estimate> {
    let hits: u64 = (0..draws.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = streams.rng(c);
            let mut y = vec![0.0; n_symbols];
            let n = CHUNK.min(draws - c * CHUNK);
            (0..n)
                .filter(|_| {
                    fill_uniform(&mut rng, &mut y);
                    in_cell(a, q, &y)
                })
                .count() as u64
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Estimate::from_counts(hits, draws)
}

const CHUNK: u64 = 4096;

/// Kernels for which every symbol has positive probability after every past.
/// The renewed and misread walks qualify through their floor `q/2`.
pub fn satisfies_priming(k: &ContextKernel) -> bool {
    match (k.lift(), k.scenery_q()) {
        (Some(lift), _) => (0..lift.states()).all(|s| lift.emission(s).iter().all(|&p| p > 0.0)),
        (None, Some(_)) => true,
        (None, None) => false,
    }
}

/// Outcome of one rejection-sampling attempt on `C_{m}`: the innovations
/// `U_1..U_m` fall in their cells and `X_1..X_m` spell the word.
struct Attempt {
    /// Number of leading positions whose cell and symbol both matched.
    matched: usize,
    /// `P_{j-1}(x_j)` for the positions that were reached.
    probs: Vec<f64>,
    /// Whether `X_1..X_l` equals the word, given all cells were hit.
    spelled: bool,
    /// Whether every `U_j` fell in its cell.
    in_block: bool,
}

/// Draws the innovation block first and only runs the process when needed.
/// With `stop_on_symbol`, the run stops at the first position where `X`
/// leaves the word (used for `C_m`); otherwise only cell membership stops it.
fn attempt(
    k: &ContextKernel,
    word: &[usize],
    thresholds: &[f64],
    upto: usize,
    stop_on_symbol: bool,
    depth: usize,
    rng: &mut StreamRng,
) -> Result<Attempt> {
    let n = k.alphabet().len();
    let mut block = vec![vec![0.0; n]; upto];
    for (m, y) in block.iter_mut().enumerate() {
        fill_uniform(rng, y);
        if m < thresholds.len() && !in_cell(word[m], thresholds[m], y) {
            return Ok(Attempt {
                matched: 0,
                probs: Vec::new(),
                spelled: false,
                in_block: false,
            });
        }
    }
    let mut ctx = Context::stationary(k, depth, rng)?;
    let mut probs = Vec::with_capacity(upto + 1);
    let mut matched = 0;
    let mut spelled = true;
    for (m, y) in block.iter().enumerate() {
        let p = ctx.law();
        probs.push(p[word[m]]);
        let a = classify_raw(y, &p);
        if a != word[m] {
            spelled = false;
            if stop_on_symbol {
                break;
            }
        } else if spelled {
            matched += 1;
        }
        ctx.push(a);
    }
    if matched == upto && upto < word.len() {
        probs.push(ctx.law()[word[upto]]);
    }
    Ok(Attempt {
        matched,
        probs,
        spelled,
        in_block: true,
    })
}

fn starved(accepted: u64, attempts: u64) -> Option<Error> {
    let rate = accepted as f64 / attempts as f64;
    (attempts >= STARVATION_CHECK && rate < MIN_ACCEPTANCE)
        .then_some(Error::CalibrationStarved { rate, attempts })
}

/// Rejection sampler run in parallel chunks of `CHUNK` attempts. Chunks are
/// replayed in order and the count stops at the attempt that reaches the
/// target, so the result does not depend on scheduling.
fn collect_accepted<T: Send>(
    target: u64,
    streams: &Streams,
    draw: impl Fn(&mut StreamRng) -> Result<Option<T>> + Sync,
) -> Result<(Vec<T>, u64)> {
    const BATCH: u64 = 32;
    let mut accepted = Vec::new();
    let mut attempts = 0u64;
    let mut chunk = 0u64;
    while (accepted.len() as u64) < target {
        let results: Vec<Result<Vec<(u64, T)>>> = (chunk..chunk + BATCH)
            .into_par_iter()
            .map(|c| {
                let mut rng = streams.rng(c);
                let mut out = Vec::new();
                for i in 0..CHUNK {
                    if let Some(v) = draw(&mut rng)? {
                        out.push((i, v));
                    }
                }
                Ok(out)
            })
            .collect();
        for r in results {
            for (i, v) in r? {
                accepted.push(v);
                if accepted.len() as u64 == target {
                    return Ok((accepted, attempts + i + 1));
                }
            }
            attempts += CHUNK;
            if let Some(e) = starved(accepted.len() as u64, attempts) {
                return Err(e);
            }
        }
        chunk += BATCH;
    }
    Ok((accepted, attempts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub thresholds: Vec<f64>,
    /// Per position: the one-sided bound on `P[P_{m-1}(x_m) <= q_m | C_{m-1}]`.
    pub upper_bounds: Vec<f64>,
    /// Per position: acceptance rate of `C_{m-1}`.
    pub acceptance: Vec<f64>,
}

/// For each position `m`, the largest `q = 2^-j` with
/// `P[P_{m-1}(x_m) <= q | C_{m-1}] < epsilon / l` at one-sided 99% confidence,
/// estimated from `trials` accepted samples of `C_{m-1}`.
pub fn calibrate_thresholds(
    k: &ContextKernel,
    x: &Word,
    epsilon: f64,
    trials: u64,
    depth: usize,
    streams: &Streams,
) -> Result<Calibration> {
    x.alphabet().ensure_same(k.alphabet())?;
    if !satisfies_priming(k) {
        return Err(Error::PrimingViolated);
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ParamOutOfRange {
            name: "epsilon",
            value: epsilon,
        });
    }
    if trials == 0 {
        return Err(Error::EmptySample);
    }
    let word = x.symbols();
    let l = word.len();
    let level = epsilon / l as f64;
    let mut thresholds: Vec<f64> = Vec::with_capacity(l);
    let mut upper_bounds = Vec::with_capacity(l);
    let mut acceptance = Vec::with_capacity(l);
    for m in 0..l {
        let sub = streams.domain(m as u64);
        let (values, attempts) = collect_accepted(trials, &sub, |rng| {
            let a = attempt(k, word, &thresholds, m, true, depth, rng)?;
            Ok((a.in_block && a.matched == m).then(|| a.probs[m]))
        })?;
        acceptance.push(trials as f64 / attempts as f64);
        let mut chosen = None;
        for j in 0..=MAX_GRID {
            let q = 2f64.powi(-j);
            let below = values.iter().filter(|&&p| p <= q).count() as u64;
            let ub = binomial_upper_bound(below, trials, CALIBRATION_CONFIDENCE);
            if ub < level {
                chosen = Some((q, ub));
                break;
            }
        }
        let (q, ub) = chosen.ok_or(Error::PrimingViolated)?;
        thresholds.push(q);
        upper_bounds.push(ub);
    }
    Ok(Calibration {
        thresholds,
        upper_bounds,
        acceptance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockAccuracy {
    /// `P[X_{1:l} = x | U_{1:l} in B_x]`.
    pub accuracy: Estimate,
    /// `P[U_{1:l} in B_x]`.
    pub acceptance: Estimate,
    pub beta: f64,
}

/// Rejection-sampling estimate of the conditional block accuracy from
/// `trials` accepted blocks.
pub fn conditional_block_accuracy(
    k: &ContextKernel,
    set: &PrimingSet,
    trials: u64,
    depth: usize,
    streams: &Streams,
) -> Result<BlockAccuracy> {
    if set.n_symbols != k.alphabet().len() {
        return Err(Error::AlphabetMismatch);
    }
    if trials == 0 {
        return Err(Error::EmptySample);
    }
    let (spelled, attempts) = collect_accepted(trials, streams, |rng| {
        let a = attempt(k, &set.word, &set.thresholds, set.len(), false, depth, rng)?;
        Ok(a.in_block.then_some(a.spelled))
    })?;
    let hits = spelled.iter().filter(|&&s| s).count() as u64;
    Ok(BlockAccuracy {
        accuracy: Estimate::from_counts(hits, trials)?,
        acceptance: Estimate::from_counts(trials, attempts)?,
        beta: set.beta(),
    })
}
