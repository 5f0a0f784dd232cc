use serde::{Deserialize, Serialize};
use serde_json::json;

use couplage_core::influence::{
    check_h, check_hprime, influence_profile, ConditionReport, EtaMcOptions, InfluenceProfile,
    McSettings,
};
use couplage_core::process::{ContextKernel, ProcessSpec};
use couplage_core::Streams;

use crate::config::{build_kernel, Envelope};
use crate::report::{fmt_num, Header};
use crate::{sibling, CommonArgs, Format, Report, Result};

pub const SCHEMA: &str = "influence/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfluenceConfig {
    pub process: ProcessSpec,
    #[serde(default)]
    pub n_min: usize,
    pub n_max: usize,
    /// Monte Carlo fallback for `eta` when no exact value exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub trials: u64,
    #[serde(default = "default_depth")]
    pub depth: usize,
}

fn default_depth() -> usize {
    EtaMcOptions::default().depth
}

#[derive(Debug, Clone, Serialize)]
pub struct Conditions {
    pub h_gamma: ConditionReport,
    pub h_two_delta: ConditionReport,
    pub hprime_eta: ConditionReport,
}

/// `H(gamma)`, `H(2 delta)` and `H'(eta)` over the profile's values.
pub fn conditions(k: &ContextKernel, profile: &InfluenceProfile) -> Result<Conditions> {
    let gamma: Vec<f64> = profile.records.iter().map(|r| r.gamma).collect();
    let two_delta: Vec<f64> = profile
        .records
        .iter()
        .map(|r| (2.0 * r.delta).min(1.0))
        .collect();
    let eta: Vec<f64> = profile.records.iter().map(|r| r.eta).collect();
    Ok(Conditions {
        h_gamma: check_h("H(gamma)", &gamma, None)?,
        h_two_delta: check_h(
            "H(2delta)",
            &two_delta,
            k.delta_tail().map(|t| t.scaled(2.0)),
        )?,
        hprime_eta: check_hprime(&eta, k.eta_tail())?,
    })
}

pub fn run(env: &Envelope, args: &CommonArgs) -> Result<Report> {
    let cfg: InfluenceConfig = env.body()?;
    let kernel = build_kernel(&cfg.process)?;
    let mc = match &cfg.mc {
        Some(m) => Some(McSettings {
            trials: m.trials,
            streams: Streams::new(env.require_seed()?),
            options: EtaMcOptions {
                depth: m.depth,
                ..EtaMcOptions::default()
            },
        }),
        None => None,
    };
    let profile = influence_profile(&kernel, cfg.n_min, cfg.n_max, mc.as_ref())?;
    let conds = conditions(&kernel, &profile)?;
    let violations = profile.violations();
    let passed = violations.is_empty();
    let offending = violations
        .iter()
        .map(|v| serde_json::to_value(v).expect("violation serializes"))
        .collect();
    let seed = mc.as_ref().and(env.seed);
    let header = Header::new(SCHEMA, seed, env.echo(&cfg));
    let body = json!({
        "process": profile.process,
        "passed": passed,
        "conditions": conds,
        "violations": violations,
    });
    let files = match args.format {
        Format::Csv => {
            let mut csv = header.csv_line();
            csv.push_str(&profile.to_csv(fmt_num));
            let cond_header = Header::new("influence-conditions/1", seed, env.echo(&cfg));
            vec![
                (args.out.clone(), csv),
                (
                    sibling(&args.out, "conditions.json"),
                    cond_header.json(body),
                ),
            ]
        }
        Format::Json => {
            let mut body = body;
            body["records"] = serde_json::to_value(&profile.records).expect("records serialize");
            vec![(args.out.clone(), header.json(body))]
        }
    };
    Ok(Report {
        files,
        passed,
        offending,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use couplage_core::influence::Verdict;
    use couplage_core::process::{parity_chain, rwrs};

    #[test]
    fn parity_conditions() {
        let k = parity_chain();
        let p = influence_profile(&k, 0, 10, None).unwrap();
        let c = conditions(&k, &p).unwrap();
        assert_eq!(c.hprime_eta.verdict, Verdict::Holds);
        assert_eq!(c.h_two_delta.verdict, Verdict::Fails);
    }

    #[test]
    fn rwrs_hprime_fails() {
        let k = rwrs();
        let p = influence_profile(&k, 0, 10, None).unwrap();
        assert_eq!(
            conditions(&k, &p).unwrap().hprime_eta.verdict,
            Verdict::Fails
        );
    }
}
