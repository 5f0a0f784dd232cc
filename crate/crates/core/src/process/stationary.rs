use crate::error::{Error, Result};
use crate::process::word::for_each_word;
use crate::process::{ContextKernel, MemoryKind, Word};
use crate::simplex::Alphabet;

/// Largest number of words enumerated for a stationary law.
pub const MAX_WORDS: usize = 10_000_000;

/// Stationary probabilities of all words of one length, indexed by the
/// base-N code of the word (oldest symbol most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryLaw {
    alphabet: Alphabet,
    order: usize,
    probs: Vec<f64>,
}

impl StationaryLaw {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn code(&self, symbols: &[usize]) -> usize {
        let n = self.alphabet.len();
        symbols.iter().fold(0, |acc, &a| acc * n + a)
    }

    pub fn get(&self, z: &Word) -> Result<f64> {
        z.alphabet().ensure_same(&self.alphabet)?;
        if z.len() != self.order {
            return Err(Error::InvalidSpec(format!(
                "word of length {} against a law of order {}",
                z.len(),
                self.order
            )));
        }
        Ok(self.probs[self.code(z.symbols())])
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Law of the last `order - 1` symbols.
    pub fn drop_oldest(&self) -> StationaryLaw {
        assert!(self.order > 0);
        let n = self.alphabet.len();
        let stride = self.probs.len() / n;
        let probs = (0..stride)
            .map(|r| (0..n).map(|a| self.probs[a * stride + r]).sum())
            .collect();
        StationaryLaw {
            alphabet: self.alphabet.clone(),
            order: self.order - 1,
            probs,
        }
    }

    /// Law of the first `order - 1` symbols.
    pub fn drop_newest(&self) -> StationaryLaw {
        assert!(self.order > 0);
        let n = self.alphabet.len();
        let probs = self.probs.chunks(n).map(|c| c.iter().sum()).collect();
        StationaryLaw {
            alphabet: self.alphabet.clone(),
            order: self.order - 1,
            probs,
        }
    }

    /// `(word, probability)` pairs in code order.
    pub fn iter(&self) -> impl Iterator<Item = (Word, f64)> + '_ {
        let n = self.alphabet.len();
        let order = self.order;
        self.probs.iter().enumerate().map(move |(code, &p)| {
            let mut symbols = vec![0; order];
            let mut c = code;
            for slot in symbols.iter_mut().rev() {
                *slot = c % n;
                c /= n;
            }
            (Word::from_raw(self.alphabet.clone(), symbols), p)
        })
    }
}

fn word_count(n_symbols: usize, n: usize) -> Result<usize> {
    n_symbols
        .checked_pow(n as u32)
        .filter(|&c| c <= MAX_WORDS)
        .ok_or_else(|| Error::Intractable(format!("{n_symbols}^{n} words")))
}

/// Exact stationary law of the words of length `n`.
pub fn stationary_word_law(k: &ContextKernel, n: usize) -> Result<StationaryLaw> {
    let n_symbols = k.alphabet().len();
    let count = word_count(n_symbols, n)?;
    let mut probs = vec![0.0; count];
    if let Some(lift) = k.lift() {
        // Depth-first over words, carrying the joint mass of (word, state).
        let states = lift.states();
        let mut stack: Vec<Vec<f64>> = vec![lift.stationary().to_vec()];
        fn visit(
            lift: &crate::process::Lift,
            depth: usize,
            n: usize,
            states: usize,
            stack: &mut Vec<Vec<f64>>,
            code: usize,
            probs: &mut [f64],
        ) {
            if depth == n {
                probs[code] = stack.last().expect("nonempty").iter().sum();
                return;
            }
            let k = lift.n_symbols();
            for a in 0..k {
                let mut nxt = vec![0.0; states];
                let mass = stack.last().expect("nonempty");
                for (s, &m) in mass.iter().enumerate() {
                    if m > 0.0 {
                        nxt[lift.step(s, a)] += m * lift.emission(s)[a];
                    }
                }
                stack.push(nxt);
                visit(lift, depth + 1, n, states, stack, code * k + a, probs);
                stack.pop();
            }
        }
        visit(lift, 0, n, states, &mut stack, 0, &mut probs);
    } else {
        if !k.has_evaluator() {
            return Err(Error::NoEvaluator);
        }
        let mut code = 0;
        let mut err = None;
        for_each_word(n_symbols, n, |w| {
            if err.is_some() {
                return;
            }
            let mut p = 1.0;
            for i in 0..w.len() {
                if p == 0.0 {
                    break;
                }
                match k.eval_raw(&w[..i]) {
                    Ok(law) => p *= law[w[i]],
                    Err(e) => err = Some(e),
                }
            }
            probs[code] = p;
            code += 1;
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(StationaryLaw {
        alphabet: k.alphabet().clone(),
        order: n,
        probs,
    })
}

/// Context length of a finite word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextLength {
    Finite(usize),
    /// The whole word does not determine the next-symbol law.
    Unbounded,
}

/// Number of most recent symbols of `z` that determine the next-symbol law
/// whatever the older past.
pub fn vlmc_context_length(k: &ContextKernel, z: &Word) -> Result<ContextLength> {
    if k.memory_kind() == MemoryKind::Analytic {
        return Err(Error::NotApplicable(format!(
            "{} has no context tree",
            k.id()
        )));
    }
    z.alphabet().ensure_same(k.alphabet())?;
    let lift = k.lift().expect("finite and variable kernels carry a lift");
    let sym = z.symbols();
    for len in 0..=sym.len() {
        let image = lift.image(&sym[sym.len() - len..]);
        let first = lift.emission(image[0]);
        if image.iter().all(|&s| lift.emission(s) == first) {
            return Ok(ContextLength::Finite(len));
        }
    }
    Ok(ContextLength::Unbounded)
}
