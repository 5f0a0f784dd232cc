use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::process::tree::ContextTree;

/// Residual (L1) at which stationary power iteration stops.
pub const STATIONARY_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 10_000_000;

/// A deterministic finite-state representation of a kernel: the state is a
/// function of the past, each state emits the next symbol with a fixed law,
/// and the emitted symbol moves the state deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    n_symbols: usize,
    emission: Vec<Vec<f64>>,
    next: Vec<usize>,
    constant_past: Vec<usize>,
    stationary: Vec<f64>,
}

impl Lift {
    /// `next[s * n_symbols + a]` is the state after emitting `a` from `s`;
    /// `constant_past[a]` is the state reached by the infinite past `...aaa`.
    pub fn new(
        n_symbols: usize,
        emission: Vec<Vec<f64>>,
        next: Vec<usize>,
        constant_past: Vec<usize>,
    ) -> Result<Self> {
        let states = emission.len();
        if states == 0
            || next.len() != states * n_symbols
            || constant_past.len() != n_symbols
            || next.iter().chain(&constant_past).any(|&s| s >= states)
            || emission.iter().any(|e| e.len() != n_symbols)
        {
            return Err(Error::InvalidSpec("inconsistent lift tables".into()));
        }
        let mut lift = Self {
            n_symbols,
            emission,
            next,
            constant_past,
            stationary: Vec::new(),
        };
        lift.stationary = lift.power_iteration()?;
        Ok(lift)
    }

    fn power_iteration(&self) -> Result<Vec<f64>> {
        let s = self.states();
        let mut pi = vec![1.0 / s as f64; s];
        let mut nxt = vec![0.0; s];
        for _ in 0..MAX_ITERATIONS {
            self.push_forward(&pi, &mut nxt);
            let residual: f64 = pi.iter().zip(&nxt).map(|(a, b)| (a - b).abs()).sum();
            if residual < STATIONARY_TOL {
                let total: f64 = nxt.iter().sum();
                return Ok(nxt.into_iter().map(|v| v / total).collect());
            }
            // Lazy step (P + I) / 2 removes periodicity.
            for (p, n) in pi.iter_mut().zip(&nxt) {
                *p = 0.5 * (*p + n);
            }
        }
        Err(Error::Intractable(
            "stationary power iteration did not converge".into(),
        ))
    }

    fn push_forward(&self, from: &[f64], to: &mut [f64]) {
        to.iter_mut().for_each(|v| *v = 0.0);
        for (s, &mass) in from.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (a, &e) in self.emission[s].iter().enumerate() {
                to[self.next[s * self.n_symbols + a]] += mass * e;
            }
        }
    }

    /// Finite-state lift of a context tree by closing its leaves under
    /// one-symbol extension. Fails with `INTRACTABLE` beyond `max_states`.
    pub fn from_tree(tree: &ContextTree, n_symbols: usize, max_states: usize) -> Result<Self> {
        let mut states = tree.leaf_paths();
        loop {
            if states.len() > max_states {
                return Err(Error::Intractable(format!(
                    "context tree lift exceeds {max_states} states"
                )));
            }
            let index: HashMap<&[usize], usize> = states
                .iter()
                .enumerate()
                .map(|(i, w)| (w.as_slice(), i))
                .collect();
            let mut next = vec![usize::MAX; states.len() * n_symbols];
            let mut split = vec![false; states.len()];
            let mut cand = Vec::new();
            for (i, w) in states.iter().enumerate() {
                for a in 0..n_symbols {
                    cand.clear();
                    cand.push(a);
                    cand.extend_from_slice(w);
                    match (0..=cand.len()).find_map(|l| index.get(&cand[..l])) {
                        Some(&j) => next[i * n_symbols + a] = j,
                        None => split[i] = true,
                    }
                }
            }
            if split.iter().any(|&s| s) {
                let mut refined = Vec::with_capacity(states.len() * 2);
                for (w, s) in states.iter().zip(&split) {
                    if *s {
                        for b in 0..n_symbols {
                            let mut c = w.clone();
                            c.push(b);
                            refined.push(c);
                        }
                    } else {
                        refined.push(w.clone());
                    }
                }
                states = refined;
                continue;
            }
            let emission = states
                .iter()
                .map(|w| {
                    tree.lookup_rev(w)
                        .expect("lift states extend tree leaves")
                        .entries()
                        .to_vec()
                })
                .collect();
            let constant_past = (0..n_symbols)
                .map(|a| {
                    states
                        .iter()
                        .position(|w| w.iter().all(|&b| b == a))
                        .expect("complete prefix code")
                })
                .collect();
            return Self::new(n_symbols, emission, next, constant_past);
        }
    }

    pub fn states(&self) -> usize {
        self.emission.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn emission(&self, state: usize) -> &[f64] {
        &self.emission[state]
    }

    pub fn step(&self, state: usize, symbol: usize) -> usize {
        self.next[state * self.n_symbols + symbol]
    }

    pub fn constant_past(&self, symbol: usize) -> usize {
        self.constant_past[symbol]
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// State-to-state transition matrix.
    pub fn transition_matrix(&self) -> Vec<Vec<f64>> {
        let s = self.states();
        let mut m = vec![vec![0.0; s]; s];
        for (i, row) in m.iter_mut().enumerate() {
            for (a, &e) in self.emission[i].iter().enumerate() {
                row[self.step(i, a)] += e;
            }
        }
        m
    }

    pub fn run(&self, mut state: usize, word: &[usize]) -> usize {
        for &a in word {
            state = self.step(state, a);
        }
        state
    }

    /// Posterior over states after observing `word` from the stationary
    /// start, with the probability of the word. `None` if it has probability 0.
    pub fn filter(&self, word: &[usize]) -> Option<(Vec<f64>, f64)> {
        let mut belief = self.stationary.clone();
        let mut nxt = vec![0.0; self.states()];
        let mut prob = 1.0;
        for &a in word {
            nxt.iter_mut().for_each(|v| *v = 0.0);
            let mut total = 0.0;
            for (s, &b) in belief.iter().enumerate() {
                let m = b * self.emission[s][a];
                if m > 0.0 {
                    nxt[self.step(s, a)] += m;
                    total += m;
                }
            }
            if total <= 0.0 {
                return None;
            }
            prob *= total;
            nxt.iter_mut().for_each(|v| *v /= total);
            std::mem::swap(&mut belief, &mut nxt);
        }
        Some((belief, prob))
    }

    /// Law of the next symbol under a state distribution.
    pub fn predictive(&self, belief: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_symbols];
        for (s, &b) in belief.iter().enumerate() {
            if b > 0.0 {
                for (o, &e) in out.iter_mut().zip(&self.emission[s]) {
                    *o += b * e;
                }
            }
        }
        out
    }

    /// Stationary one-symbol marginal.
    pub fn marginal(&self) -> Vec<f64> {
        self.predictive(&self.stationary)
    }

    /// Conditional law of the next symbol given the finite context `word`,
    /// falling back to the marginal when the context has probability 0.
    pub fn conditional(&self, word: &[usize]) -> Vec<f64> {
        match self.filter(word) {
            Some((belief, _)) => self.predictive(&belief),
            None => self.marginal(),
        }
    }

    /// States reachable as `run(s, word)` over all starting states, sorted and deduplicated.
    pub fn image(&self, word: &[usize]) -> Vec<usize> {
        let mut set: Vec<usize> = (0..self.states()).collect();
        for &a in word {
            set = self.image_step(&set, a);
        }
        set
    }

    pub(crate) fn image_step(&self, set: &[usize], a: usize) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&s| self.step(s, a)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.stationary, rng)
    }

    pub fn sample_symbol<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        sample_index(&self.emission[state], rng)
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(law: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in law.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}
