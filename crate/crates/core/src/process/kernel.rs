use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::influence::TailDescriptor;
use crate::process::lift::Lift;
use crate::process::rwrs::{self, RenewedTrace};
use crate::process::tree::ContextTree;
use crate::process::Word;
use crate::simplex::{Alphabet, ProbVec};

/// Largest number of lift states built from a context tree.
pub const MAX_LIFT_STATES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryKind {
    Finite(usize),
    Variable,
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Lifted,
    Rwrs { renewal: Option<f64> },
    Misread { q: f64 },
}

/// How a provider's `eta` value relates to the true average influence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaForm {
    Exact(f64),
    UpperBound(f64),
    LowerBound(f64),
}

impl EtaForm {
    pub fn value(self) -> f64 {
        match self {
            EtaForm::Exact(v) | EtaForm::UpperBound(v) | EtaForm::LowerBound(v) => v,
        }
    }
}

/// Closed-form influence coefficients at one distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub eta: Option<EtaForm>,
}

/// Conditional law of the present symbol given the past.
#[derive(Debug, Clone)]
pub struct ContextKernel {
    id: String,
    alphabet: Alphabet,
    memory: MemoryKind,
    model: Model,
    lift: Option<Arc<Lift>>,
    tree: Option<Arc<ContextTree>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    /// Steps discarded before recording when no exact stationary start exists.
    pub burn_in: usize,
    /// Half-width of the simulated scenery window; defaults to twice the path length.
    pub scenery_half_width: Option<usize>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            burn_in: 1000,
            scenery_half_width: None,
        }
    }
}

fn lifted(
    id: &str,
    alphabet: Alphabet,
    memory: MemoryKind,
    lift: Lift,
    tree: Option<ContextTree>,
) -> ContextKernel {
    ContextKernel {
        id: id.to_string(),
        alphabet,
        memory,
        model: Model::Lifted,
        lift: Some(Arc::new(lift)),
        tree: tree.map(Arc::new),
    }
}

impl ContextKernel {
    pub fn iid(law: ProbVec) -> Result<Self> {
        let alphabet = law.alphabet().clone();
        let n = alphabet.len();
        let lift = Lift::new(n, vec![law.entries().to_vec()], vec![0; n], vec![0; n])?;
        Ok(lifted(
            "iid",
            alphabet,
            MemoryKind::Finite(0),
            lift,
            Some(ContextTree::Leaf(law)),
        ))
    }

    /// Markov chain of order `order`; row `r` of `matrix` is the law after the
    /// context whose base-N digits (oldest most significant) spell `r`.
    pub fn markov(alphabet: Alphabet, order: usize, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = alphabet.len();
        let rows = n
            .checked_pow(order as u32)
            .filter(|&r| r <= MAX_LIFT_STATES)
            .ok_or_else(|| Error::Intractable(format!("{n}^{order} contexts")))?;
        if matrix.len() != rows {
            return Err(Error::InvalidSpec(format!(
                "order {order} chain needs {rows} rows, got {}",
                matrix.len()
            )));
        }
        let tree = ContextTree::full(&alphabet, order, &mut |ctx| {
            let r = ctx.iter().fold(0, |acc, &a| acc * n + a);
            ProbVec::new(alphabet.clone(), matrix[r].clone())
        })?;
        let lift = Lift::from_tree(&tree, n, MAX_LIFT_STATES)?;
        Ok(lifted(
            "markov",
            alphabet,
            MemoryKind::Finite(order),
            lift,
            Some(tree),
        ))
    }

    pub fn vlmc(alphabet: Alphabet, tree: ContextTree) -> Result<Self> {
        let lift = Lift::from_tree(&tree, alphabet.len(), MAX_LIFT_STATES)?;
        Ok(lifted(
            "vlmc",
            alphabet,
            MemoryKind::Variable,
            lift,
            Some(tree),
        ))
    }

    /// Binary chain whose probability of a 0 is 2/3 when the run of 1s since
    /// the last 0 has even length (or the past holds no 0), and 1/3 otherwise.
    pub fn parity_chain() -> Self {
        let alphabet = Alphabet::new(["0", "1"]).expect("binary");
        // State 0: even run of 1s. State 1: odd run.
        let lift = Lift::new(
            2,
            vec![vec![2.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 2.0 / 3.0]],
            vec![1, 1, 1, 0],
            vec![1, 0],
        )
        .expect("valid parity lift");
        lifted("parity", alphabet, MemoryKind::Variable, lift, None)
    }

    pub fn rwrs() -> Self {
        Self {
            id: "rwrs".into(),
            alphabet: rwrs::rwrs_alphabet(),
            memory: MemoryKind::Analytic,
            model: Model::Rwrs { renewal: None },
            lift: None,
            tree: None,
        }
    }

    pub fn renewed_rwrs(q: f64) -> Result<Self> {
        rwrs::check_q(q)?;
        Ok(Self {
            id: "renewed_rwrs".into(),
            alphabet: rwrs::rwrs_alphabet(),
            memory: MemoryKind::Analytic,
            model: Model::Rwrs { renewal: Some(q) },
            lift: None,
            tree: None,
        })
    }

    pub fn misread_rwrs(q: f64) -> Result<Self> {
        rwrs::check_q(q)?;
        Ok(Self {
            id: "misread_rwrs".into(),
            alphabet: rwrs::rwrs_alphabet(),
            memory: MemoryKind::Analytic,
            model: Model::Misread { q },
            lift: None,
            tree: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn memory_kind(&self) -> MemoryKind {
        self.memory
    }

    pub fn lift(&self) -> Option<&Lift> {
        self.lift.as_deref()
    }

    pub fn context_tree(&self) -> Option<&ContextTree> {
        self.tree.as_deref()
    }

    pub fn has_evaluator(&self) -> bool {
        !matches!(self.model, Model::Misread { .. })
    }

    /// Renewal or misreading probability of the scenery variants.
    pub fn scenery_q(&self) -> Option<f64> {
        match self.model {
            Model::Rwrs { renewal } => renewal,
            Model::Misread { q } => Some(q),
            Model::Lifted => None,
        }
    }

    pub fn is_scenery_walk(&self) -> bool {
        !matches!(self.model, Model::Lifted)
    }

    /// `Some(renewal)` for the plain and renewed scenery walks.
    pub(crate) fn scenery_renewal(&self) -> Option<Option<f64>> {
        match self.model {
            Model::Rwrs { renewal } => Some(renewal),
            _ => None,
        }
    }

    /// `p(.|z)` for a context given oldest first, without alphabet checks.
    pub(crate) fn eval_raw(&self, z: &[usize]) -> Result<Vec<f64>> {
        match &self.model {
            Model::Lifted => {
                let lift = self.lift.as_deref().expect("lifted model has a lift");
                let image = lift.image(z);
                let first = lift.emission(image[0]);
                if image.iter().all(|&s| lift.emission(s) == first) {
                    return Ok(first.to_vec());
                }
                let mut p = lift.conditional(z);
                let total: f64 = p.iter().sum();
                p.iter_mut().for_each(|v| *v /= total);
                Ok(p)
            }
            Model::Rwrs { renewal } => Ok(rwrs::law(z, *renewal).to_vec()),
            Model::Misread { .. } => Err(Error::NoEvaluator),
        }
    }

    pub fn eval(&self, z: &Word) -> Result<ProbVec> {
        z.alphabet().ensure_same(&self.alphabet)?;
        let p = self.eval_raw(z.symbols())?;
        Ok(ProbVec::from_raw(self.alphabet.clone(), p))
    }

    /// Closed-form coefficients at distance `n`, where known.
    pub fn closed_form(&self, n: usize) -> Option<ClosedForm> {
        match (&self.model, self.id.as_str()) {
            (Model::Lifted, "parity") => Some(ClosedForm {
                gamma: Some(0.5),
                delta: Some(1.0 / 3.0),
                alpha: Some(1.0 / 3.0),
                eta: Some(EtaForm::UpperBound((2.0f64 / 3.0).powi(n as i32 + 1))),
            }),
            (Model::Lifted, "iid") => Some(ClosedForm {
                gamma: Some(0.0),
                delta: Some(0.0),
                alpha: Some(0.0),
                eta: Some(EtaForm::Exact(0.0)),
            }),
            (Model::Lifted, _) => None,
            (Model::Rwrs { renewal: None }, _) => Some(ClosedForm {
                gamma: Some(1.0),
                delta: Some(0.5),
                alpha: Some(0.5),
                eta: Some(EtaForm::Exact(rwrs::rwrs_eta_closed_form(n))),
            }),
            (Model::Rwrs { renewal: Some(q) }, _) => Some(ClosedForm {
                gamma: None,
                delta: None,
                alpha: None,
                eta: Some(EtaForm::Exact(
                    (1.0 - 2.0 * q) * rwrs::rwrs_eta_closed_form(n),
                )),
            }),
            (Model::Misread { q }, _) => {
                if n == 0 {
                    return None;
                }
                Some(ClosedForm {
                    gamma: Some(q / (1.0 - q)),
                    delta: Some((1.0 - 2.0 * q) / 4.0),
                    alpha: Some(1.0 - 2.0 * q),
                    eta: Some(EtaForm::LowerBound(
                        (1.0 - 2.0 * q) * rwrs::rwrs_eta_closed_form(n),
                    )),
                })
            }
        }
    }

    /// Certified tail behavior of the average influence sequence.
    pub fn eta_tail(&self) -> Option<TailDescriptor> {
        match (&self.model, self.memory) {
            (Model::Lifted, _) if self.id == "parity" => Some(TailDescriptor::Geometric {
                constant: 2.0 / 3.0,
                ratio: 2.0 / 3.0,
            }),
            (Model::Lifted, MemoryKind::Finite(m)) => {
                Some(TailDescriptor::EventuallyZero { from: m })
            }
            (Model::Lifted, _) => self
                .tree
                .as_ref()
                .map(|t| TailDescriptor::EventuallyZero { from: t.depth() }),
            // eta_n decays like n^{-1/2} for all three scenery walks.
            (Model::Rwrs { .. }, _) | (Model::Misread { .. }, _) => {
                Some(TailDescriptor::PowerLaw {
                    constant: 0.5,
                    exponent: 0.5,
                })
            }
        }
    }

    /// Certified tail of the total-variation influence sequence.
    pub fn delta_tail(&self) -> Option<TailDescriptor> {
        match (&self.model, self.memory) {
            (Model::Lifted, _) if self.id == "parity" => {
                Some(TailDescriptor::Constant { value: 1.0 / 3.0 })
            }
            (Model::Lifted, MemoryKind::Finite(m)) => {
                Some(TailDescriptor::EventuallyZero { from: m })
            }
            (Model::Lifted, _) => self
                .tree
                .as_ref()
                .map(|t| TailDescriptor::EventuallyZero { from: t.depth() }),
            (Model::Rwrs { renewal: None }, _) => Some(TailDescriptor::Constant { value: 0.5 }),
            (Model::Rwrs { renewal: Some(q) }, _) => Some(TailDescriptor::Constant {
                value: (1.0 - 2.0 * q) / 2.0,
            }),
            (Model::Misread { q }, _) => Some(TailDescriptor::Constant {
                value: (1.0 - 2.0 * q) / 4.0,
            }),
        }
    }

    pub fn sample_path<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Word {
        self.sample_path_with(len, rng, &SampleOptions::default())
    }

    pub fn sample_path_with<R: Rng + ?Sized>(
        &self,
        len: usize,
        rng: &mut R,
        opts: &SampleOptions,
    ) -> Word {
        let half_width = opts.scenery_half_width.unwrap_or(2 * len);
        let symbols = match &self.model {
            Model::Lifted => {
                let lift = self.lift.as_deref().expect("lifted model has a lift");
                let mut s = lift.sample_state(rng);
                (0..len)
                    .map(|_| {
                        let a = lift.sample_symbol(s, rng);
                        s = lift.step(s, a);
                        a
                    })
                    .collect()
            }
            Model::Rwrs { renewal: None } => rwrs::sample_rwrs(len, half_width, None, rng),
            Model::Rwrs { renewal: Some(q) } => {
                rwrs::sample_renewed(len, *q, half_width, rng).symbols()
            }
            Model::Misread { q } => rwrs::sample_rwrs(len, half_width, Some(*q), rng),
        };
        Word::from_raw(self.alphabet.clone(), symbols)
    }

    /// Path of the renewed-scenery walk with its governing sequence.
    pub fn sample_renewed_trace<R: Rng + ?Sized>(
        &self,
        len: usize,
        rng: &mut R,
    ) -> Result<RenewedTrace> {
        match self.model {
            Model::Rwrs { renewal: Some(q) } => Ok(rwrs::sample_renewed(len, q, 2 * len, rng)),
            _ => Err(Error::NotApplicable(format!(
                "{} has no renewal structure",
                self.id
            ))),
        }
    }
}

/// `p(.|z)`, the law of the next symbol after the finite context `z`.
pub fn eval_kernel(k: &ContextKernel, z: &Word) -> Result<ProbVec> {
    k.eval(z)
}

pub fn parity_chain() -> ContextKernel {
    ContextKernel::parity_chain()
}

pub fn rwrs() -> ContextKernel {
    ContextKernel::rwrs()
}

pub fn misread_rwrs(q: f64) -> Result<ContextKernel> {
    ContextKernel::misread_rwrs(q)
}

pub fn renewed_rwrs(q: f64) -> Result<ContextKernel> {
    ContextKernel::renewed_rwrs(q)
}

pub fn sample_path<R: Rng + ?Sized>(k: &ContextKernel, len: usize, rng: &mut R) -> Word {
    k.sample_path(len, rng)
}
