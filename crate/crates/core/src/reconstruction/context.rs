use rand::Rng;

use crate::error::{Error, Result};
use crate::process::ContextKernel;

/// Depth at which infinite pasts are truncated for kernels without a lift.
pub const DEFAULT_DEPTH: usize = 64;

/// Incremental evaluator of `p(.|past)` as symbols are appended.
#[derive(Debug, Clone)]
pub(crate) enum Context<'a> {
    /// Exact: the set of lift states compatible with the past and the
    /// posterior over them.
    Lift {
        kernel: &'a ContextKernel,
        image: Vec<usize>,
        belief: Vec<f64>,
    },
    /// The last `depth` symbols, evaluated through the kernel.
    Window {
        kernel: &'a ContextKernel,
        symbols: Vec<usize>,
        depth: usize,
    },
}

impl<'a> Context<'a> {
    fn check(kernel: &ContextKernel) -> Result<()> {
        if kernel.has_evaluator() {
            Ok(())
        } else {
            Err(Error::NoEvaluator)
        }
    }

    /// A past sampled from the stationary law.
    pub(crate) fn stationary<R: Rng + ?Sized>(
        kernel: &'a ContextKernel,
        depth: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Self::check(kernel)?;
        Ok(match kernel.lift() {
            Some(lift) => Self::point(kernel, lift.sample_state(rng)),
            None => Context::Window {
                kernel,
                symbols: kernel.sample_path(depth, rng).into_symbols(),
                depth,
            },
        })
    }

    /// The constant past `... a a a`.
    pub(crate) fn constant(kernel: &'a ContextKernel, a: usize, depth: usize) -> Result<Self> {
        Self::check(kernel)?;
        kernel.alphabet().check_symbol(a)?;
        Ok(match kernel.lift() {
            Some(lift) => Self::point(kernel, lift.constant_past(a)),
            None => Context::Window {
                kernel,
                symbols: vec![a; depth],
                depth,
            },
        })
    }

    /// No past at all: the law given a finite context only.
    pub(crate) fn empty(kernel: &'a ContextKernel, depth: usize) -> Result<Self> {
        Self::check(kernel)?;
        Ok(match kernel.lift() {
            Some(lift) => Context::Lift {
                kernel,
                image: (0..lift.states()).collect(),
                belief: lift.stationary().to_vec(),
            },
            None => Context::Window {
                kernel,
                symbols: Vec::new(),
                depth,
            },
        })
    }

    fn point(kernel: &'a ContextKernel, state: usize) -> Self {
        let lift = kernel.lift().expect("lifted kernel");
        let mut belief = vec![0.0; lift.states()];
        belief[state] = 1.0;
        Context::Lift {
            kernel,
            image: vec![state],
            belief,
        }
    }

    /// Law of the next symbol.
    pub(crate) fn law(&self) -> Vec<f64> {
        match self {
            Context::Lift {
                kernel,
                image,
                belief,
            } => {
                let lift = kernel.lift().expect("lifted kernel");
                let first = lift.emission(image[0]);
                if image.iter().all(|&s| lift.emission(s) == first) {
                    return first.to_vec();
                }
                let mut p = lift.predictive(belief);
                let total: f64 = p.iter().sum();
                p.iter_mut().for_each(|v| *v /= total);
                p
            }
            Context::Window {
                kernel,
                symbols,
                depth,
            } => {
                let start = symbols.len().saturating_sub(*depth);
                kernel
                    .eval_raw(&symbols[start..])
                    .expect("kernel has an evaluator")
            }
        }
    }

    pub(crate) fn push(&mut self, a: usize) {
        match self {
            Context::Lift {
                kernel,
                image,
                belief,
            } => {
                let lift = kernel.lift().expect("lifted kernel");
                *image = lift.image_step(image, a);
                let mut next = vec![0.0; belief.len()];
                let mut total = 0.0;
                for (s, &b) in belief.iter().enumerate() {
                    let m = b * lift.emission(s)[a];
                    if m > 0.0 {
                        next[lift.step(s, a)] += m;
                        total += m;
                    }
                }
                if total > 0.0 {
                    next.iter_mut().for_each(|v| *v /= total);
                    *belief = next;
                } else {
                    // A symbol of probability 0: keep the posterior on the image.
                    let w = 1.0 / image.len() as f64;
                    belief.iter_mut().for_each(|v| *v = 0.0);
                    image.iter().for_each(|&s| belief[s] = w);
                }
            }
            Context::Window { symbols, depth, .. } => {
                symbols.push(a);
                if symbols.len() > 4 * *depth + 64 {
                    let drop = symbols.len() - *depth;
                    symbols.drain(..drop);
                }
            }
        }
    }
}
