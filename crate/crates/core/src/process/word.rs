use crate::error::Result;
use crate::simplex::Alphabet;

/// A finite word over an alphabet, stored oldest symbol first so that the
/// most recent symbol is last.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: Alphabet,
    symbols: Vec<usize>,
}

impl Word {
    pub fn new(alphabet: Alphabet, symbols: Vec<usize>) -> Result<Self> {
        for &s in &symbols {
            alphabet.check_symbol(s)?;
        }
        Ok(Self { alphabet, symbols })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            symbols: Vec::new(),
        }
    }

    pub fn from_labels<S: AsRef<str>>(alphabet: Alphabet, labels: &[S]) -> Result<Self> {
        let symbols = labels
            .iter()
            .map(|l| alphabet.index_of(l.as_ref()))
            .collect::<Result<_>>()?;
        Ok(Self { alphabet, symbols })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Most recent symbol.
    pub fn last(&self) -> Option<usize> {
        self.symbols.last().copied()
    }

    /// The concatenation `self other`, with `other` more recent.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        self.alphabet.ensure_same(&other.alphabet)?;
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Ok(Word {
            alphabet: self.alphabet.clone(),
            symbols,
        })
    }

    /// The last `k` symbols (the whole word if it is shorter).
    pub fn suffix(&self, k: usize) -> Word {
        let start = self.symbols.len().saturating_sub(k);
        Word {
            alphabet: self.alphabet.clone(),
            symbols: self.symbols[start..].to_vec(),
        }
    }

    pub fn push(&mut self, symbol: usize) -> Result<()> {
        self.alphabet.check_symbol(symbol)?;
        self.symbols.push(symbol);
        Ok(())
    }

    pub fn labels(&self) -> Vec<&str> {
        self.symbols
            .iter()
            .map(|&s| self.alphabet.label(s))
            .collect()
    }

    pub(crate) fn from_raw(alphabet: Alphabet, symbols: Vec<usize>) -> Self {
        Self { alphabet, symbols }
    }

    pub fn into_symbols(self) -> Vec<usize> {
        self.symbols
    }
}

/// Calls `f` on every word of length `n` over `n_symbols` symbols, in
/// lexicographic order with the oldest symbol most significant.
pub(crate) fn for_each_word(n_symbols: usize, n: usize, mut f: impl FnMut(&[usize])) {
    let mut w = vec![0usize; n];
    loop {
        f(&w);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            w[i] += 1;
            if w[i] < n_symbols {
                break;
            }
            w[i] = 0;
        }
    }
}
