use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use couplage_core::process::{ProcessSpec, Word};
use couplage_core::reconstruction::{
    build_priming_set, build_schedule, calibrate_thresholds, cell_frequency, cell_measure,
    common_beta, conditional_block_accuracy, successive_experiment, DEFAULT_DEPTH,
};
use couplage_core::{Estimate, Streams};

use super::SIGMA_K;
use crate::config::{build_kernel, Envelope};
use crate::report::Header;
use crate::{CommonArgs, Report, Result};

pub const SCHEMA: &str = "prime/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeConfig {
    pub process: ProcessSpec,
    /// The target block, oldest symbol first.
    pub word: Vec<String>,
    pub epsilon: f64,
    /// Accepted samples per position during calibration.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Accepted blocks in the accuracy estimate.
    #[serde(default = "default_accuracy_trials")]
    pub accuracy_trials: u64,
    /// Uniform draws per distinct cell in the cell-measure check.
    #[serde(default = "default_cell_draws")]
    pub cell_draws: u64,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub m_max: usize,
    #[serde(rename = "K_list")]
    pub k_list: Vec<usize>,
    pub replicas: u64,
    /// Common cell threshold of the successive approximation.
    pub q: f64,
}

fn default_trials() -> u64 {
    2000
}

fn default_accuracy_trials() -> u64 {
    20_000
}

fn default_cell_draws() -> u64 {
    100_000
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

/// One named pass/fail check of the diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub std_error: f64,
    pub pass: bool,
}

impl Check {
    fn at_least(name: String, e: &Estimate, target: f64) -> Self {
        Self {
            name,
            value: e.point_estimate,
            target,
            std_error: e.std_error,
            pass: e.point_estimate >= target - SIGMA_K * e.std_error,
        }
    }

    fn at_most(name: String, e: &Estimate, target: f64) -> Self {
        Self {
            name,
            value: e.point_estimate,
            target,
            std_error: e.std_error,
            pass: e.point_estimate <= target + SIGMA_K * e.std_error,
        }
    }

    fn near(name: String, e: &Estimate, target: f64) -> Self {
        Self {
            name,
            value: e.point_estimate,
            target,
            std_error: e.std_error,
            pass: e.within(target, SIGMA_K),
        }
    }
}

pub fn run(env: &Envelope, args: &CommonArgs) -> Result<Report> {
    let cfg: PrimeConfig = env.body()?;
    let seed = env.require_seed()?;
    let kernel = build_kernel(&cfg.process)?;
    let n = kernel.alphabet().len();
    let streams = Streams::new(seed);
    // Refuse a schedule before any sampling when eta is not summable.
    let schedule = match &cfg.schedule {
        Some(s) => Some(build_schedule(
            kernel.eta_tail(),
            common_beta(s.q, n),
            s.m_max,
        )?),
        None => None,
    };
    let word = Word::from_labels(kernel.alphabet().clone(), &cfg.word)?;
    let calibration = calibrate_thresholds(
        &kernel,
        &word,
        cfg.epsilon,
        cfg.trials,
        cfg.depth,
        &streams.domain(1),
    )?;
    let set = build_priming_set(&word, &calibration.thresholds)?;
    let accuracy = conditional_block_accuracy(
        &kernel,
        &set,
        cfg.accuracy_trials,
        cfg.depth,
        &streams.domain(2),
    )?;
    let mut checks = vec![
        Check::at_least(
            "block_accuracy".into(),
            &accuracy.accuracy,
            1.0 - cfg.epsilon,
        ),
        Check::near(
            "acceptance_rate".into(),
            &accuracy.acceptance,
            accuracy.beta,
        ),
    ];
    let cells: BTreeSet<(usize, u64)> = set
        .word
        .iter()
        .zip(&set.thresholds)
        .map(|(&a, &q)| (a, q.to_bits()))
        .collect();
    let cell_streams = streams.domain(3);
    for (i, &(a, bits)) in cells.iter().enumerate() {
        let q = f64::from_bits(bits);
        let e = cell_frequency(a, q, n, cfg.cell_draws, &cell_streams.domain(i as u64))?;
        checks.push(Check::near(
            format!("cell_measure[{}, q={}]", kernel.alphabet().label(a), q),
            &e,
            cell_measure(q, n),
        ));
    }
    let mut successive = Value::Null;
    if let (Some(sc), Some(schedule)) = (&cfg.schedule, &schedule) {
        let rep = successive_experiment(
            &kernel,
            schedule,
            &sc.k_list,
            sc.q,
            sc.replicas,
            cfg.depth,
            &streams.domain(4),
        )?;
        for lv in &rep.levels {
            checks.push(Check::near(
                format!("hit_rate[m={}]", lv.m),
                &lv.hit_rate,
                lv.beta,
            ));
            if let Some(e) = &lv.conditional_mismatch {
                checks.push(Check::at_most(
                    format!("mismatch_given_hit[m={}]", lv.m),
                    e,
                    3.0 * lv.epsilon,
                ));
            }
        }
        successive = json!({ "schedule": schedule, "report": rep });
    }
    let passed = checks.iter().all(|c| c.pass);
    let offending = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| serde_json::to_value(c).expect("check serializes"))
        .collect();
    let header = Header::new(SCHEMA, Some(seed), env.echo(&cfg));
    let text = header.json(json!({
        "passed": passed,
        "calibration": calibration,
        "priming_set": set,
        "beta": set.beta(),
        "accuracy": accuracy,
        "checks": checks,
        "successive": successive,
    }));
    Ok(Report {
        files: vec![(args.out.clone(), text)],
        passed,
        offending,
    })
}
