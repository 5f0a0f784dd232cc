use serde::Serialize;

use crate::error::{Error, Result};
use crate::process::{for_each_word, rwrs, ContextKernel, Lift, MAX_WORDS};
use crate::simplex::tv_raw;

/// Largest number of distinct image sets kept per distance.
pub const MAX_IMAGE_SETS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    ClosedForm,
    Mc,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::ClosedForm => "closed_form",
            Mode::Mc => "mc",
        }
    }
}

/// Pointwise influence coefficients at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub n: usize,
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub mode: Mode,
}

/// Running sup/inf over groups of laws sharing a context.
struct Extrema {
    delta: f64,
    min_ratio: f64,
    min_overlap: f64,
}

impl Extrema {
    fn new() -> Self {
        Self {
            delta: 0.0,
            min_ratio: 1.0,
            min_overlap: 1.0,
        }
    }

    /// All laws `p(.|xz)` for one context `z` and varying pasts `x`.
    fn add_group(&mut self, laws: &[&[f64]]) {
        let n = laws[0].len();
        for (i, p) in laws.iter().enumerate() {
            for q in &laws[i + 1..] {
                self.delta = self.delta.max(tv_raw(p, q));
            }
            for q in laws {
                for a in 0..n {
                    if q[a] > 0.0 {
                        self.min_ratio = self.min_ratio.min(p[a] / q[a]);
                    }
                }
            }
        }
        let overlap: f64 = (0..n)
            .map(|a| laws.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min))
            .sum();
        self.min_overlap = self.min_overlap.min(overlap);
    }

    fn finish(&self, n: usize) -> Coefficients {
        Coefficients {
            n,
            gamma: 1.0 - self.min_ratio,
            delta: self.delta,
            alpha: (1.0 - self.min_overlap).max(0.0),
            mode: Mode::Exact,
        }
    }
}

fn distinct_emissions<'a>(lift: &'a Lift, set: &[usize]) -> Vec<&'a [f64]> {
    let mut out: Vec<&[f64]> = Vec::new();
    for &s in set {
        let e = lift.emission(s);
        if !out.contains(&e) {
            out.push(e);
        }
    }
    out
}

fn lift_coefficients(lift: &Lift, n_max: usize) -> Result<Vec<Coefficients>> {
    let mut level: Vec<Vec<usize>> = vec![(0..lift.states()).collect()];
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut ext = Extrema::new();
        for set in &level {
            ext.add_group(&distinct_emissions(lift, set));
        }
        out.push(ext.finish(n));
        if n == n_max {
            break;
        }
        let mut next: Vec<Vec<usize>> = level
            .iter()
            .flat_map(|set| (0..lift.n_symbols()).map(move |a| lift.image_step(set, a)))
            .collect();
        next.sort_unstable();
        next.dedup();
        if next.len() > MAX_IMAGE_SETS {
            return Err(Error::Intractable(format!(
                "{} distinct pasts classes at distance {}",
                next.len(),
                n + 1
            )));
        }
        level = next;
    }
    Ok(out)
}

fn scenery_coefficients(renewal: Option<f64>, n: usize) -> Result<Coefficients> {
    if 4usize.checked_pow(n as u32).is_none_or(|c| c > MAX_WORDS) {
        return Err(Error::Intractable(format!("4^{n} contexts")));
    }
    let mut ext = Extrema::new();
    for_each_word(4, n, |z| {
        let laws = rwrs::extension_laws(z, renewal);
        let refs: Vec<&[f64]> = laws.iter().map(|l| l.as_slice()).collect();
        ext.add_group(&refs);
    });
    Ok(ext.finish(n))
}

fn closed_form_coefficients(k: &ContextKernel, n: usize) -> Result<Coefficients> {
    let cf = k
        .closed_form(n)
        .ok_or_else(|| Error::NotApplicable(format!("no closed form for {} at n={n}", k.id())))?;
    match (cf.gamma, cf.delta, cf.alpha) {
        (Some(gamma), Some(delta), Some(alpha)) => Ok(Coefficients {
            n,
            gamma,
            delta,
            alpha,
            mode: Mode::ClosedForm,
        }),
        _ => Err(Error::NotApplicable(format!(
            "incomplete closed form for {} at n={n}",
            k.id()
        ))),
    }
}

/// `gamma_n`, `delta_n`, `alpha_n` for `n = 0..=n_max`. Lifted kernels are
/// enumerated over classes of pasts, the scenery walks over all contexts of
/// length `n` with every realizable past, and the misread walk falls back on
/// its closed form.
pub fn coefficients(k: &ContextKernel, n_max: usize) -> Result<Vec<Coefficients>> {
    if let Some(lift) = k.lift() {
        return lift_coefficients(lift, n_max);
    }
    (0..=n_max).map(|n| coefficients_at(k, n)).collect()
}

pub fn coefficients_at(k: &ContextKernel, n: usize) -> Result<Coefficients> {
    if let Some(lift) = k.lift() {
        return Ok(lift_coefficients(lift, n)?[n]);
    }
    match k.scenery_renewal() {
        Some(renewal) => scenery_coefficients(renewal, n),
        None => closed_form_coefficients(k, n),
    }
}

/// Sup of the total variation between laws given pasts that agree on the last `n` symbols.
pub fn delta_n(k: &ContextKernel, n: usize) -> Result<f64> {
    Ok(coefficients_at(k, n)?.delta)
}

/// One minus the inf of the likelihood ratio between such laws.
pub fn gamma_n(k: &ContextKernel, n: usize) -> Result<f64> {
    Ok(coefficients_at(k, n)?.gamma)
}

/// One minus the inf over contexts of the common mass of all such laws.
pub fn alpha_n(k: &ContextKernel, n: usize) -> Result<f64> {
    Ok(coefficients_at(k, n)?.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{misread_rwrs, parity_chain, renewed_rwrs, rwrs};
    use crate::simplex::{Alphabet, ProbVec};

    #[test]
    fn parity_is_flat() {
        for c in coefficients(&parity_chain(), 10).unwrap() {
            assert!((c.gamma - 0.5).abs() < 1e-12);
            assert!((c.delta - 1.0 / 3.0).abs() < 1e-12);
            assert!((c.alpha - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn iid_is_zero() {
        let a = Alphabet::indexed(3).unwrap();
        let k = ContextKernel::iid(ProbVec::new(a, vec![0.2, 0.3, 0.5]).unwrap()).unwrap();
        for c in coefficients(&k, 3).unwrap() {
            assert_eq!((c.gamma, c.delta, c.alpha), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn markov_order_two_vanishes_from_two() {
        let a = Alphabet::indexed(2).unwrap();
        let m = vec![
            vec![0.9, 0.1],
            vec![0.8, 0.2],
            vec![0.3, 0.7],
            vec![0.4, 0.6],
        ];
        let k = ContextKernel::markov(a, 2, m).unwrap();
        let c = coefficients(&k, 3).unwrap();
        // n=1: contexts ending in 0 compare rows 0 and 2, ending in 1 rows 1 and 3.
        assert!((c[1].delta - 0.6).abs() < 1e-12);
        assert_eq!(c[2].delta, 0.0);
        assert_eq!(c[3].gamma, 0.0);
    }

    #[test]
    fn scenery_walk_values_from_two_on() {
        for n in 2..=5 {
            let c = coefficients_at(&rwrs(), n).unwrap();
            assert_eq!((c.gamma, c.delta, c.alpha), (1.0, 0.5, 0.5));
        }
        // With at most one symbol both next steps can be fixed by the past.
        for n in 0..=1 {
            let c = coefficients_at(&rwrs(), n).unwrap();
            assert_eq!((c.gamma, c.delta, c.alpha), (1.0, 1.0, 1.0));
        }
        let q = 0.2;
        let c = coefficients_at(&renewed_rwrs(q).unwrap(), 4).unwrap();
        assert!((c.delta - (1.0 - 2.0 * q) / 2.0).abs() < 1e-12);
        assert!((c.alpha - (0.5 - q)).abs() < 1e-12);
        assert!((c.gamma - (1.0 - 2.0 * q) / (1.0 - q)).abs() < 1e-12);
    }

    #[test]
    fn misread_uses_closed_form() {
        let k = misread_rwrs(0.2).unwrap();
        let c = coefficients_at(&k, 1).unwrap();
        assert_eq!(c.mode, Mode::ClosedForm);
        assert!((c.alpha - 0.6).abs() < 1e-15);
        assert_eq!(coefficients_at(&k, 0).unwrap_err().code(), "NOT_APPLICABLE");
    }
}
