use serde::{Deserialize, Serialize};
use serde_json::json;

use couplage_core::influence::{coefficients, TailDescriptor};
use couplage_core::process::{ContextKernel, MemoryKind, ProcessSpec};
use couplage_core::reconstruction::{
    reconstruction_experiment, DeltaSequence, DominationChain, ExperimentSetup, ReconstructionRow,
    DEFAULT_DEPTH,
};
use couplage_core::{Error, Streams};

use super::SIGMA_K;
use crate::config::{build_kernel, Envelope};
use crate::report::{fmt_num, Csv, Header};
use crate::{CliError, CommonArgs, Format, Report, Result};

pub const SCHEMA: &str = "reconstruct/1";
pub const COLUMNS: [&str; 7] = [
    "T",
    "a0",
    "replicas",
    "mismatch_rate",
    "bound_p0",
    "std_error",
    "pass",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSymbols {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    pub process: ProcessSpec,
    #[serde(rename = "T_list")]
    pub t_list: Vec<i64>,
    pub replicas: u64,
    /// Seed symbol(s) of the constant past; defaults to the first symbol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<SeedSymbols>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// Upper bound on `delta_n`; defaults to the exact coefficients of a
    /// lifted kernel or a constant certified tail.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaSequence>,
    #[serde(default = "default_max_k")]
    pub max_k: usize,
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

fn default_max_k() -> usize {
    20
}

/// The bound sequence used when the config gives none.
pub fn default_delta(k: &ContextKernel, n_max: usize) -> Result<DeltaSequence> {
    if k.lift().is_some() {
        let cap = match k.memory_kind() {
            MemoryKind::Finite(m) => n_max.min(m),
            _ => n_max,
        };
        let values = coefficients(k, cap)?.iter().map(|c| c.delta).collect();
        return Ok(DeltaSequence::Values(values));
    }
    match k.delta_tail() {
        Some(TailDescriptor::Constant { value }) => Ok(DeltaSequence::Constant(value)),
        _ => Err(Error::NotApplicable(format!("no delta bound known for {}", k.id())).into()),
    }
}

/// Rejects a supplied bound that the exact coefficients of a lifted kernel exceed.
pub fn check_bound(k: &ContextKernel, bound: &DeltaSequence, n_max: usize) -> Result<()> {
    if k.lift().is_none() {
        return Ok(());
    }
    let DeltaSequence::Values(exact) = default_delta(k, n_max)? else {
        unreachable!("lifted kernels get listed values");
    };
    for n in 0..=n_max {
        let d = exact.get(n).or(exact.last()).copied().unwrap_or(0.0);
        if d > bound.get(n) + 1e-12 {
            return Err(CliError::Config(format!(
                "delta bound {} at n={n} is below the exact delta {d}",
                bound.get(n)
            )));
        }
    }
    Ok(())
}

pub fn passes(row: &ReconstructionRow) -> bool {
    row.mismatch.point_estimate <= row.bound_p0 + SIGMA_K * row.mismatch.std_error
}

pub fn run(env: &Envelope, args: &CommonArgs) -> Result<Report> {
    let cfg: ReconstructConfig = env.body()?;
    let seed = env.require_seed()?;
    let kernel = build_kernel(&cfg.process)?;
    let alphabet = kernel.alphabet();
    let seeds = match &cfg.a0 {
        None => vec![0],
        Some(SeedSymbols::One(l)) => vec![alphabet.index_of(l)?],
        Some(SeedSymbols::Many(ls)) => ls
            .iter()
            .map(|l| alphabet.index_of(l))
            .collect::<couplage_core::Result<_>>()?,
    };
    let n_max = cfg
        .t_list
        .iter()
        .map(|t| t.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let delta = match &cfg.delta {
        Some(d) => {
            check_bound(&kernel, d, n_max)?;
            d.clone()
        }
        None => default_delta(&kernel, n_max)?,
    };
    let chain = DominationChain::new(delta.clone());
    let setup = ExperimentSetup {
        horizons: cfg.t_list.clone(),
        seeds,
        replicas: cfg.replicas,
        depth: cfg.depth,
        max_k: cfg.max_k,
    };
    let rows = reconstruction_experiment(&kernel, &chain, &setup, &Streams::new(seed))?;
    let passed = rows.iter().all(passes);
    let offending = rows
        .iter()
        .filter(|r| !passes(r))
        .map(|r| serde_json::to_value(r).expect("row serializes"))
        .collect();
    let header = Header::new(SCHEMA, Some(seed), env.echo(&cfg));
    let text = match args.format {
        Format::Csv => {
            let mut csv = Csv::new(&header, &COLUMNS);
            for r in &rows {
                csv.row(&[
                    r.horizon.to_string(),
                    alphabet.label(r.a0).to_string(),
                    r.replicas.to_string(),
                    fmt_num(r.mismatch.point_estimate),
                    fmt_num(r.bound_p0),
                    fmt_num(r.mismatch.std_error),
                    passes(r).to_string(),
                ]);
            }
            csv.finish()
        }
        Format::Json => header.json(json!({
            "passed": passed,
            "delta": delta,
            "recurrence": chain.classify(),
            "rows": rows,
        })),
    };
    Ok(Report {
        files: vec![(args.out.clone(), text)],
        passed,
        offending,
    })
}
