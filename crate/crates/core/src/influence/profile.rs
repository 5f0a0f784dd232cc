use serde::Serialize;

use crate::error::Result;
use crate::influence::{coefficients, eta_n_exact, eta_n_mc, Coefficients, EtaMcOptions, Mode};
use crate::process::{ContextKernel, EtaForm};
use crate::rng::Streams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfluenceRecord {
    pub n: usize,
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub eta: f64,
    pub mode: Mode,
    /// Standard error of `eta` when it was estimated.
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceProfile {
    pub process: String,
    pub records: Vec<InfluenceRecord>,
}

/// Monte Carlo settings used when no exact `eta` is available.
#[derive(Debug, Clone, Copy)]
pub struct McSettings {
    pub trials: u64,
    pub streams: Streams,
    pub options: EtaMcOptions,
}

fn weakest(a: Mode, b: Mode) -> Mode {
    let rank = |m: Mode| match m {
        Mode::Exact => 0,
        Mode::ClosedForm => 1,
        Mode::Mc => 2,
    };
    if rank(a) >= rank(b) {
        a
    } else {
        b
    }
}

/// Coefficients for `n` in `n_min..=n_max`. `eta` is exact when possible,
/// otherwise estimated with `mc`, otherwise the provider's closed form.
pub fn influence_profile(
    k: &ContextKernel,
    n_min: usize,
    n_max: usize,
    mc: Option<&McSettings>,
) -> Result<InfluenceProfile> {
    let coefs: Vec<Coefficients> = if k.lift().is_some() {
        coefficients(k, n_max)?.split_off(n_min)
    } else {
        (n_min..=n_max)
            .map(|n| crate::influence::coefficients_at(k, n))
            .collect::<Result<_>>()?
    };
    let mut records = Vec::with_capacity(coefs.len());
    for c in coefs {
        let (eta, eta_mode, std_error) = match eta_n_exact(k, c.n) {
            Ok(v) => {
                let mode = if k.lift().is_some() {
                    Mode::Exact
                } else {
                    Mode::ClosedForm
                };
                (v, mode, None)
            }
            Err(e) => match (mc, k.has_evaluator()) {
                (Some(s), true) => {
                    let r = eta_n_mc(k, c.n, s.trials, &s.streams, &s.options)?;
                    (
                        r.estimate.point_estimate,
                        Mode::Mc,
                        Some(r.estimate.std_error),
                    )
                }
                _ => match k.closed_form(c.n).and_then(|f| f.eta) {
                    Some(EtaForm::Exact(v)) | Some(EtaForm::LowerBound(v)) => {
                        (v, Mode::ClosedForm, None)
                    }
                    _ => return Err(e),
                },
            },
        };
        records.push(InfluenceRecord {
            n: c.n,
            gamma: c.gamma,
            delta: c.delta,
            alpha: c.alpha,
            eta,
            mode: weakest(c.mode, eta_mode),
            std_error,
        });
    }
    Ok(InfluenceProfile {
        process: k.id().to_string(),
        records,
    })
}

/// A failed relation between coefficients at one distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub n: usize,
    pub relation: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl InfluenceProfile {
    /// Rows `n,gamma,delta,alpha,eta,mode,std_error` with a header line.
    pub fn to_csv(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from("n,gamma,delta,alpha,eta,mode,std_error\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n,
                fmt(r.gamma),
                fmt(r.delta),
                fmt(r.alpha),
                fmt(r.eta),
                r.mode.as_str(),
                r.std_error.map(&fmt).unwrap_or_default()
            ));
        }
        out
    }

    /// Checks `delta <= gamma`, `delta <= alpha`, `eta <= delta` at every
    /// distance, and that each sequence is non-increasing, allowing 4 standard
    /// errors on estimated values and 1e-12 otherwise.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |n, relation, lhs: f64, rhs: f64, slack: f64| {
            if lhs > rhs + slack {
                out.push(Violation {
                    n,
                    relation,
                    lhs,
                    rhs,
                });
            }
        };
        const EPS: f64 = 1e-12;
        for r in &self.records {
            let se = 4.0 * r.std_error.unwrap_or(0.0) + EPS;
            check(r.n, "delta<=gamma", r.delta, r.gamma, EPS);
            check(r.n, "delta<=alpha", r.delta, r.alpha, EPS);
            check(r.n, "eta<=delta", r.eta, r.delta, se);
        }
        for w in self.records.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let se = 4.0 * (a.std_error.unwrap_or(0.0) + b.std_error.unwrap_or(0.0)) + EPS;
            check(b.n, "gamma non-increasing", b.gamma, a.gamma, EPS);
            check(b.n, "delta non-increasing", b.delta, a.delta, EPS);
            check(b.n, "alpha non-increasing", b.alpha, a.alpha, EPS);
            check(b.n, "eta non-increasing", b.eta, a.eta, se);
        }
        out
    }
}
