use serde::Serialize;

use crate::error::{Error, Result};

/// Certified asymptotic behavior of a coefficient sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailDescriptor {
    /// `value_n = value` for every `n`.
    Constant { value: f64 },
    /// `value_n = c / (n + 1)` for every `n`.
    Harmonic { c: f64 },
    /// `value_n <= constant * ratio^n` with `ratio < 1`.
    Geometric { constant: f64, ratio: f64 },
    /// `value_n ~ constant * n^(-exponent)`.
    PowerLaw { constant: f64, exponent: f64 },
    /// `value_n = 0` for `n >= from`.
    EventuallyZero { from: usize },
}

impl TailDescriptor {
    /// Exact value at `n` when the descriptor pins one down.
    pub fn exact_value(&self, n: usize) -> Option<f64> {
        match *self {
            TailDescriptor::Constant { value } => Some(value),
            TailDescriptor::Harmonic { c } => Some(c / (n as f64 + 1.0)),
            TailDescriptor::EventuallyZero { from } if n >= from => Some(0.0),
            _ => None,
        }
    }

    /// The descriptor of `factor * value_n`.
    pub fn scaled(&self, factor: f64) -> TailDescriptor {
        match *self {
            TailDescriptor::Constant { value } => TailDescriptor::Constant {
                value: factor * value,
            },
            TailDescriptor::Harmonic { c } => TailDescriptor::Harmonic { c: factor * c },
            TailDescriptor::Geometric { constant, ratio } => TailDescriptor::Geometric {
                constant: factor * constant,
                ratio,
            },
            TailDescriptor::PowerLaw { constant, exponent } => TailDescriptor::PowerLaw {
                constant: factor * constant,
                exponent,
            },
            TailDescriptor::EventuallyZero { from } => TailDescriptor::EventuallyZero { from },
        }
    }

    fn describe(&self) -> String {
        match *self {
            TailDescriptor::Constant { value } => format!("constant {value}"),
            TailDescriptor::Harmonic { c } => format!("{c}/(n+1)"),
            TailDescriptor::Geometric { constant, ratio } => {
                format!("bounded by {constant}*{ratio}^n")
            }
            TailDescriptor::PowerLaw { constant, exponent } => {
                format!("asymptotic to {constant}*n^-{exponent}")
            }
            TailDescriptor::EventuallyZero { from } => format!("zero from n={from}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Undetermined { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    /// Partial sums at `k = 10^j - 1` and at the last index.
    pub partial_sums: Vec<(usize, f64)>,
    pub k: usize,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub evidence: Option<String>,
}

fn validate(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidCoefficient { index, value });
        }
    }
    Ok(())
}

fn checkpoints(sums: impl Iterator<Item = f64>, last: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut next = 0usize;
    for (k, s) in sums.enumerate() {
        if k == next || k == last {
            out.push((k, s));
            if k == next {
                next = (next + 1) * 10 - 1;
            }
        }
    }
    out
}

/// Divergence of `sum_k prod_{n<=k} (1 - eps_n)`, using `values[0..=K]`.
pub fn check_h(
    name: &str,
    values: &[f64],
    tail: Option<TailDescriptor>,
) -> Result<ConditionReport> {
    validate(values)?;
    let k = values.len().saturating_sub(1);
    let mut prod = 1.0;
    let mut sum = 0.0;
    let sums = values.iter().map(|&e| {
        prod *= 1.0 - e;
        sum += prod;
        sum
    });
    let partial_sums = checkpoints(sums, k);
    // A factor equal to 1 kills every later product: the series is finite.
    if let Some(i) = values.iter().position(|&e| e == 1.0) {
        return Ok(ConditionReport {
            condition: name.to_string(),
            partial_sums,
            k,
            verdict: Verdict::Fails,
            evidence: Some(format!("factor 1 - eps_{i} = 0")),
        });
    }
    let verdict = match tail {
        None => Verdict::Undetermined { k },
        Some(t) => match t {
            TailDescriptor::Constant { value } => {
                if value == 0.0 {
                    Verdict::Holds
                } else {
                    Verdict::Fails
                }
            }
            TailDescriptor::Harmonic { c } => {
                if c <= 1.0 {
                    Verdict::Holds
                } else {
                    Verdict::Fails
                }
            }
            TailDescriptor::Geometric { ratio, .. } if ratio < 1.0 => Verdict::Holds,
            TailDescriptor::Geometric { .. } => Verdict::Undetermined { k },
            TailDescriptor::PowerLaw { constant, exponent } => {
                if exponent > 1.0 || constant == 0.0 {
                    Verdict::Holds
                } else if exponent < 1.0 {
                    Verdict::Fails
                } else if constant <= 1.0 {
                    Verdict::Holds
                } else {
                    Verdict::Fails
                }
            }
            TailDescriptor::EventuallyZero { .. } => Verdict::Holds,
        },
    };
    Ok(ConditionReport {
        condition: name.to_string(),
        partial_sums,
        k,
        verdict,
        evidence: tail.map(|t| t.describe()),
    })
}

/// Summability of `eta_n`, using `values[0..=K]`.
pub fn check_hprime(values: &[f64], tail: Option<TailDescriptor>) -> Result<ConditionReport> {
    validate(values)?;
    let k = values.len().saturating_sub(1);
    let mut sum = 0.0;
    let partial_sums = checkpoints(
        values.iter().map(|&e| {
            sum += e;
            sum
        }),
        k,
    );
    let verdict = match tail {
        None => Verdict::Undetermined { k },
        Some(t) => match t {
            TailDescriptor::Constant { value: 0.0 } => Verdict::Holds,
            TailDescriptor::Constant { .. } => Verdict::Fails,
            TailDescriptor::Harmonic { c: 0.0 } => Verdict::Holds,
            TailDescriptor::Harmonic { .. } => Verdict::Fails,
            TailDescriptor::Geometric { ratio, .. } if ratio < 1.0 => Verdict::Holds,
            TailDescriptor::Geometric { .. } => Verdict::Undetermined { k },
            TailDescriptor::PowerLaw { constant, exponent } => {
                if exponent > 1.0 || constant == 0.0 {
                    Verdict::Holds
                } else {
                    Verdict::Fails
                }
            }
            TailDescriptor::EventuallyZero { .. } => Verdict::Holds,
        },
    };
    Ok(ConditionReport {
        condition: "H'(eta)".to_string(),
        partial_sums,
        k,
        verdict,
        evidence: tail.map(|t| t.describe()),
    })
}
