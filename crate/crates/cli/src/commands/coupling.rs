use serde::{Deserialize, Serialize};
use serde_json::json;

use couplage_core::simplex::{
    mismatch_exact, mismatch_mc, near_optimal_pair, sample_uniform_simplex, total_variation,
};
use couplage_core::{Alphabet, ProbVec, Streams};

use super::{EXACT_TOL, SIGMA_K};
use crate::config::Envelope;
use crate::report::{fmt_num, opt_num, Csv, Header};
use crate::{CommonArgs, Format, Report, Result};

pub const SCHEMA: &str = "coupling-verify/1";
pub const COLUMNS: [&str; 9] = [
    "N",
    "pair_id",
    "tv",
    "mismatch_exact",
    "mismatch_mc",
    "sigma",
    "ratio",
    "expected_ratio",
    "pass",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(default = "default_sizes")]
    pub alphabet_sizes: Vec<usize>,
    #[serde(default = "default_pairs")]
    pub pairs: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// `null` skips the near-optimal family.
    #[serde(default = "default_epsilon")]
    pub near_optimal_epsilon: Option<f64>,
}

fn default_sizes() -> Vec<usize> {
    vec![2, 3, 5]
}

fn default_pairs() -> u64 {
    100
}

fn default_trials() -> u64 {
    1_000_000
}

fn default_epsilon() -> Option<f64> {
    Some(0.01)
}

#[derive(Debug, Clone, Serialize)]
pub struct PairRow {
    pub n: usize,
    pub pair_id: String,
    pub tv: f64,
    pub mismatch_exact: f64,
    pub mismatch_mc: f64,
    /// `sqrt(e(1-e)/trials)` at the exact value `e`.
    pub sigma: f64,
    pub ratio: Option<f64>,
    pub expected_ratio: Option<f64>,
    pub pass: bool,
}

fn check_pair(
    n: usize,
    pair_id: String,
    p: &ProbVec,
    q: &ProbVec,
    trials: u64,
    streams: &Streams,
    expected_ratio: Option<f64>,
) -> Result<PairRow> {
    let tv = total_variation(p, q)?;
    let exact = mismatch_exact(p, q)?;
    let mc = mismatch_mc(p, q, trials, streams)?.point_estimate;
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    let ratio = (tv > 0.0).then(|| exact / tv);
    let mut pass = (mc - exact).abs() <= SIGMA_K * sigma + EXACT_TOL;
    pass &= exact <= 2.0 * tv + EXACT_TOL;
    if n == 2 {
        pass &= (exact - tv).abs() <= EXACT_TOL;
    }
    if let Some(e) = expected_ratio {
        pass &= ratio.is_some_and(|r| (r - e).abs() <= EXACT_TOL);
    }
    Ok(PairRow {
        n,
        pair_id,
        tv,
        mismatch_exact: exact,
        mismatch_mc: mc,
        sigma,
        ratio,
        expected_ratio,
        pass,
    })
}

/// Random pair `i` on `n` symbols, drawn uniformly from the simplex.
pub fn random_pair(alphabet: &Alphabet, streams: &Streams, i: u64) -> Result<(ProbVec, ProbVec)> {
    let mut rng = streams.rng(i);
    let p = sample_uniform_simplex(&mut rng, alphabet);
    let q = sample_uniform_simplex(&mut rng, alphabet);
    Ok((
        ProbVec::new(alphabet.clone(), p.coords().to_vec())?,
        ProbVec::new(alphabet.clone(), q.coords().to_vec())?,
    ))
}

pub fn rows(cfg: &CouplingConfig, seed: u64) -> Result<Vec<PairRow>> {
    let root = Streams::new(seed);
    let mut rows = Vec::new();
    for &n in &cfg.alphabet_sizes {
        let alphabet = Alphabet::indexed(n)?;
        let pairs = root.domain(n as u64);
        let mc_root = root.domain(1_000_000 + n as u64);
        for i in 0..cfg.pairs {
            let (p, q) = random_pair(&alphabet, &pairs, i)?;
            let mc = mc_root.domain(i);
            rows.push(check_pair(
                n,
                format!("random-{i}"),
                &p,
                &q,
                cfg.trials,
                &mc,
                None,
            )?);
        }
        if let Some(eps) = cfg.near_optimal_epsilon.filter(|_| n >= 3) {
            let (p, q) = near_optimal_pair(eps, &alphabet)?;
            let mc = mc_root.domain(u64::MAX);
            let expected = 2.0 / (1.0 + eps);
            rows.push(check_pair(
                n,
                "near-optimal".into(),
                &p,
                &q,
                cfg.trials,
                &mc,
                Some(expected),
            )?);
        }
    }
    Ok(rows)
}

pub fn run(env: &Envelope, args: &CommonArgs) -> Result<Report> {
    let cfg: CouplingConfig = env.body()?;
    let seed = env.require_seed()?;
    let rows = rows(&cfg, seed)?;
    let header = Header::new(SCHEMA, Some(seed), env.echo(&cfg));
    let passed = rows.iter().all(|r| r.pass);
    let offending = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| serde_json::to_value(r).expect("row serializes"))
        .collect();
    let text = match args.format {
        Format::Csv => {
            let mut csv = Csv::new(&header, &COLUMNS);
            for r in &rows {
                csv.row(&[
                    r.n.to_string(),
                    r.pair_id.clone(),
                    fmt_num(r.tv),
                    fmt_num(r.mismatch_exact),
                    fmt_num(r.mismatch_mc),
                    fmt_num(r.sigma),
                    opt_num(r.ratio),
                    opt_num(r.expected_ratio),
                    r.pass.to_string(),
                ]);
            }
            csv.finish()
        }
        Format::Json => header.json(json!({ "passed": passed, "rows": rows })),
    };
    Ok(Report {
        files: vec![(args.out.clone(), text)],
        passed,
        offending,
    })
}
