use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::process::ContextKernel;
use crate::reconstruction::context::Context;
use crate::reconstruction::domination::DominationChain;
use crate::rng::Streams;
use crate::simplex::{barycentric_raw, classify_raw, fill_uniform, Estimate};

/// A stationary path `X_{T:0}` with its governing innovations `U_{T:0}`.
/// Index `i` holds time `T + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPath {
    pub horizon: i64,
    pub x: Vec<usize>,
    pub u: Vec<Vec<f64>>,
    /// `P_{n-1}`, the law used to encode `U_n`.
    pub laws: Vec<Vec<f64>>,
}

impl CoupledPath {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The sub-path on `[t, 0]` for a horizon `t` with `horizon <= t < 0`.
    pub fn suffix(&self, t: i64) -> Result<CoupledPath> {
        check_horizon(t)?;
        if t < self.horizon {
            return Err(Error::ParamOutOfRange {
                name: "T",
                value: t as f64,
            });
        }
        let start = (t - self.horizon) as usize;
        Ok(CoupledPath {
            horizon: t,
            x: self.x[start..].to_vec(),
            u: self.u[start..].to_vec(),
            laws: self.laws[start..].to_vec(),
        })
    }
}

fn check_horizon(t: i64) -> Result<()> {
    if t >= 0 {
        Err(Error::ParamOutOfRange {
            name: "T",
            value: t as f64,
        })
    } else {
        Ok(())
    }
}

/// Stationary `X` on `[T, 0]` with `U_n = f_{X_n}(W_n, P_{n-1})` for fresh
/// uniform `W_n`, so that `classify(U_n, P_{n-1}) = X_n`. Lifted kernels carry
/// their exact state; other kernels see their past through a window of
/// `depth` symbols.
pub fn generate_pair<R: Rng + ?Sized>(
    k: &ContextKernel,
    horizon: i64,
    depth: usize,
    rng: &mut R,
) -> Result<CoupledPath> {
    check_horizon(horizon)?;
    let len = (1 - horizon) as usize;
    let n = k.alphabet().len();
    let mut w = vec![0.0; n];
    let mut x = Vec::with_capacity(len);
    let mut u = Vec::with_capacity(len);
    let mut laws = Vec::with_capacity(len);
    let mut emit = |p: &[f64], a: usize, rng: &mut R| loop {
        fill_uniform(rng, &mut w);
        let v = barycentric_raw(a, p, &w);
        // Rounding can move a point across a cell boundary; redraw it.
        if classify_raw(&v, p) == a {
            return v;
        }
    };
    match k.lift() {
        Some(lift) => {
            let mut s = lift.sample_state(rng);
            for _ in 0..len {
                let p = lift.emission(s);
                let a = lift.sample_symbol(s, rng);
                u.push(emit(p, a, rng));
                laws.push(p.to_vec());
                x.push(a);
                s = lift.step(s, a);
            }
        }
        None => {
            if !k.has_evaluator() {
                return Err(Error::NoEvaluator);
            }
            let path = k.sample_path(depth + len, rng).into_symbols();
            for i in 0..len {
                let p = k.eval_raw(&path[i..depth + i])?;
                let a = path[depth + i];
                u.push(emit(&p, a, rng));
                laws.push(p);
                x.push(a);
            }
        }
    }
    Ok(CoupledPath {
        horizon,
        x,
        u,
        laws,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionTrace {
    pub horizon: i64,
    pub a0: usize,
    /// `X^T_n` for `n` in `[T, 0]`; the entry at `T` is the seed `a0`.
    pub reconstructed: Vec<usize>,
    /// `L^T_n` for `n` in `[T, 0]`, counting agreements after `T` only.
    pub run_lengths: Vec<usize>,
    pub mismatch_at_zero: bool,
}

/// `X^T_n = a0` for `n <= T`, then `X^T_n = classify(U_n, p(.|X^T_{<n}))`.
pub fn reconstruct(
    k: &ContextKernel,
    pair: &CoupledPath,
    a0: usize,
    depth: usize,
) -> Result<ReconstructionTrace> {
    check_horizon(pair.horizon)?;
    let mut ctx = Context::constant(k, a0, depth)?;
    let len = pair.len();
    let mut reconstructed = Vec::with_capacity(len);
    let mut run_lengths = Vec::with_capacity(len);
    reconstructed.push(a0);
    run_lengths.push(0);
    for i in 1..len {
        let a = classify_raw(&pair.u[i], &ctx.law());
        ctx.push(a);
        reconstructed.push(a);
        let run = if a == pair.x[i] {
            run_lengths[i - 1] + 1
        } else {
            0
        };
        run_lengths.push(run);
    }
    Ok(ReconstructionTrace {
        horizon: pair.horizon,
        a0,
        mismatch_at_zero: reconstructed[len - 1] != pair.x[len - 1],
        reconstructed,
        run_lengths,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionRow {
    pub horizon: i64,
    pub a0: usize,
    pub replicas: u64,
    pub mismatch: Estimate,
    /// `P[Z_{-T} = 0]` for the supplied chain.
    pub bound_p0: f64,
    /// Empirical `P[L^T_0 >= k]` for `k = 0..=max_k`.
    pub run_survival: Vec<f64>,
    /// `P[Z_{-T} >= k]`.
    pub chain_survival: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSetup {
    pub horizons: Vec<i64>,
    /// Seed symbols `a0`.
    pub seeds: Vec<usize>,
    pub replicas: u64,
    pub depth: usize,
    /// Largest run length `k` in the survival columns.
    pub max_k: usize,
}

/// Mismatch rates at time 0 for every horizon and seed symbol. Each replica
/// draws one pair on the deepest horizon and reconstructs every shallower
/// horizon from its suffix.
pub fn reconstruction_experiment(
    k: &ContextKernel,
    chain: &DominationChain,
    setup: &ExperimentSetup,
    streams: &Streams,
) -> Result<Vec<ReconstructionRow>> {
    let ExperimentSetup {
        horizons,
        seeds,
        replicas,
        depth,
        max_k,
    } = setup;
    let (replicas, depth, max_k) = (*replicas, *depth, *max_k);
    let deepest = *horizons.iter().min().ok_or(Error::EmptySample)?;
    for &t in horizons {
        check_horizon(t)?;
    }
    for &a in seeds {
        k.alphabet().check_symbol(a)?;
    }
    if replicas == 0 {
        return Err(Error::EmptySample);
    }
    let cells = horizons.len() * seeds.len();
    // Per replica: for each (horizon, seed), mismatch flag and L^T_0.
    let outcomes: Vec<Vec<(bool, usize)>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.rng(r);
            let pair = generate_pair(k, deepest, depth, &mut rng)?;
            let mut out = Vec::with_capacity(cells);
            for &t in horizons {
                let sub = pair.suffix(t)?;
                for &a in seeds {
                    let tr = reconstruct(k, &sub, a, depth)?;
                    out.push((tr.mismatch_at_zero, *tr.run_lengths.last().unwrap()));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(cells);
    for (hi, &t) in horizons.iter().enumerate() {
        let m = (-t) as usize;
        let bound_p0 = chain.p0(m)?;
        let chain_survival = chain.survival(m, max_k)?;
        for (si, &a) in seeds.iter().enumerate() {
            let c = hi * seeds.len() + si;
            let mismatches = outcomes.iter().filter(|o| o[c].0).count() as u64;
            let run_survival = (0..=max_k)
                .map(|j| outcomes.iter().filter(|o| o[c].1 >= j).count() as f64 / replicas as f64)
                .collect();
            rows.push(ReconstructionRow {
                horizon: t,
                a0: a,
                replicas,
                mismatch: Estimate::from_counts(mismatches, replicas)?,
                bound_p0,
                run_survival,
                chain_survival: chain_survival.clone(),
            });
        }
    }
    Ok(rows)
}
