use crate::error::{Error, Result};
use crate::simplex::Alphabet;

/// Absolute tolerance on the normalization of probability vectors and simplex points.
pub const NORMALIZATION_TOL: f64 = 1e-12;

fn validate(entries: &[f64], n: usize) -> std::result::Result<(), String> {
    if entries.len() != n {
        return Err(format!("expected {n} entries, got {}", entries.len()));
    }
    let mut sum = 0.0;
    for (i, &v) in entries.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(format!("entry {i} = {v} is not a nonnegative number"));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(format!("entries sum to {sum}"));
    }
    Ok(())
}

/// A probability law on an [`Alphabet`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVec {
    alphabet: Alphabet,
    entries: Vec<f64>,
}

impl ProbVec {
    /// Inputs that are not normalized within [`NORMALIZATION_TOL`] are rejected, never rescaled.
    pub fn new(alphabet: Alphabet, entries: Vec<f64>) -> Result<Self> {
        validate(&entries, alphabet.len()).map_err(Error::InvalidProbVec)?;
        Ok(Self { alphabet, entries })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        Self {
            alphabet,
            entries: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(alphabet: Alphabet, symbol: usize) -> Result<Self> {
        alphabet.check_symbol(symbol)?;
        let mut entries = vec![0.0; alphabet.len()];
        entries[symbol] = 1.0;
        Ok(Self { alphabet, entries })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, symbol: usize) -> f64 {
        self.entries[symbol]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, _)| i)
    }

    /// Draw a symbol by inversion of the cumulative law.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in self.entries.iter().enumerate() {
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

    pub(crate) fn from_raw(alphabet: Alphabet, entries: Vec<f64>) -> Self {
        debug_assert!(validate(&entries, alphabet.len()).is_ok(), "{entries:?}");
        Self { alphabet, entries }
    }
}

/// A point of the standard simplex `S` over an [`Alphabet`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    alphabet: Alphabet,
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(alphabet: Alphabet, coords: Vec<f64>) -> Result<Self> {
        validate(&coords, alphabet.len()).map_err(Error::InvalidSimplexPoint)?;
        Ok(Self { alphabet, coords })
    }

    /// Vertex `E_a`.
    pub fn vertex(alphabet: Alphabet, symbol: usize) -> Result<Self> {
        alphabet.check_symbol(symbol)?;
        let mut coords = vec![0.0; alphabet.len()];
        coords[symbol] = 1.0;
        Ok(Self { alphabet, coords })
    }

    /// The point `G(p)`.
    pub fn from_prob(p: &ProbVec) -> Self {
        Self {
            alphabet: p.alphabet.clone(),
            coords: p.entries.clone(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn get(&self, symbol: usize) -> f64 {
        self.coords[symbol]
    }

    pub(crate) fn from_raw(alphabet: Alphabet, coords: Vec<f64>) -> Self {
        Self { alphabet, coords }
    }
}
