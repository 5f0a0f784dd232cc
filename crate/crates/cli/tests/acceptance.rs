//! Acceptance suite: one line per criterion, non-zero exit if any is red.
//!
//! Run with `cargo test -p couplage-cli --test acceptance`; pass substrings
//! such as `C07` to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use couplage_core::influence::{
    coefficients, coefficients_at, eta_n_exact, gamma0_floor, influence_profile,
    scenery_eta_enumerated, verify_gamma0_floor,
};
use couplage_core::process::{
    misread_rwrs, parity_chain, renewed_rwrs, rwrs, ContextKernel, ProcessSpec, Word,
};
use couplage_core::reconstruction::{
    build_priming_set, calibrate_thresholds, cell_frequency, conditional_block_accuracy,
    reconstruction_experiment, DeltaSequence, DominationChain, ExperimentSetup,
};
use couplage_core::simplex::{
    classify, mismatch_exact, mismatch_mc, near_optimal_pair, sample_uniform_simplex,
    uniform_minus_one,
};
use couplage_core::{Alphabet, Error, Estimate, ProbVec, Streams};

/// Standard errors allowed on every Monte Carlo comparison.
const K_SIGMA: f64 = 4.0;
/// Tolerance between closed forms.
const TOL: f64 = 1e-12;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (&'static str, &'static str, fn() -> Verdict);

fn main() {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [Criterion; 14] = [
        ("C01", "binary equality", c01_binary_equality),
        ("C02", "closed form vs Monte Carlo", c02_closed_form_vs_mc),
        ("C03", "coupling bound", c03_coupling_bound),
        ("C04", "near-optimal family", c04_near_optimal),
        ("C05", "uniform-minus-one family", c05_uniform_minus_one),
        ("C06", "cell-measure law", c06_cell_measure_law),
        ("C07", "zoo coefficients", c07_zoo_coefficients),
        ("C08", "eta checks", c08_eta),
        ("C09", "coefficient inequalities", c09_inequalities),
        ("C10", "domination chain", c10_domination),
        ("C11", "reconstruction bound", c11_reconstruction),
        ("C12", "priming block", c12_priming),
        ("C13", "positive floor", c13_floor),
        ("C14", "determinism across thread counts", c14_determinism),
    ];
    let mut red = 0;
    let mut ran = 0;
    for (id, name, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|s| id.contains(s.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let tag = if v.pass { "PASS" } else { "FAIL" };
        red += usize::from(!v.pass);
        println!(
            "{tag} {id} {name} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - red);
    if red > 0 {
        std::process::exit(1);
    }
}

// Independent oracles.

fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn random_pv(alphabet: &Alphabet, rng: &mut couplage_core::rng::StreamRng) -> ProbVec {
    let s = sample_uniform_simplex(rng, alphabet);
    ProbVec::new(alphabet.clone(), s.coords().to_vec()).unwrap()
}

fn bernoulli_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// `P[Z_m = 0]` for the chain resetting to 0 w.p. `2 delta_i` at height `i`.
fn p0_oracle(delta: impl Fn(usize) -> f64, m: usize) -> f64 {
    let mut law = vec![1.0];
    for _ in 0..m {
        let mut next = vec![0.0; law.len() + 1];
        for (i, &w) in law.iter().enumerate() {
            let r = 2.0 * delta(i);
            next[0] += w * r;
            next[i + 1] += w * (1.0 - r);
        }
        law = next;
    }
    law[0]
}

/// Half the probability that a simple walk of `m` steps never goes below 0,
/// by enumerating all `2^m` step sequences.
fn ballot_oracle(n: usize) -> f64 {
    let m = n.saturating_sub(1);
    let ok = (0u32..1 << m)
        .filter(|bits| {
            let mut s = 0i32;
            (0..m).all(|i| {
                s += if bits >> i & 1 == 1 { 1 } else { -1 };
                s >= 0
            })
        })
        .count();
    0.5 * ok as f64 / (1u64 << m) as f64
}

/// Order-3 binary chain with `p(1 | s1 s2 s3) = 1/2 + a s3 + b s2 + c s1`
/// in the +-1 encoding, oldest symbol first.
fn order3_markov(a: f64, b: f64, c: f64) -> ContextKernel {
    let sg = |bit: usize| if bit == 1 { 1.0 } else { -1.0 };
    let matrix = (0..8)
        .map(|r| {
            let p1 = 0.5 + a * sg(r & 1) + b * sg(r >> 1 & 1) + c * sg(r >> 2 & 1);
            vec![1.0 - p1, p1]
        })
        .collect();
    ContextKernel::markov(Alphabet::new(["0", "1"]).unwrap(), 3, matrix).unwrap()
}

/// Depth-2 binary VLMC: context "1" is a leaf, context "0" splits once more.
fn vlmc() -> ContextKernel {
    ProcessSpec::from_json(
        r#"{"process": "vlmc", "params": {"alphabet": ["0", "1"], "tree": {"children": {
            "1": {"probs": [0.3, 0.7]},
            "0": {"children": {"0": {"probs": [0.8, 0.2]}, "1": {"probs": [0.5, 0.5]}}}
        }}}}"#,
    )
    .unwrap()
    .build()
    .unwrap()
}

// Criteria.

fn c01_binary_equality() -> Verdict {
    let a = Alphabet::indexed(2).unwrap();
    let s = Streams::new(101);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let mut rng = s.rng(i);
        let (p, q) = (random_pv(&a, &mut rng), random_pv(&a, &mut rng));
        let e = mismatch_exact(&p, &q).unwrap();
        worst = worst.max((e - tv(p.entries(), q.entries())).abs());
    }
    verdict(
        worst <= TOL,
        format!("1000 pairs, max |exact - tv| = {worst:.2e} (tol 1e-12)"),
    )
}

fn c02_closed_form_vs_mc() -> Verdict {
    let trials = 1_000_000;
    let s = Streams::new(102);
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for n in [2usize, 3, 5] {
        let a = Alphabet::indexed(n).unwrap();
        let pairs = s.domain(n as u64);
        for i in 0..100 {
            let mut rng = pairs.rng(i);
            let (p, q) = (random_pv(&a, &mut rng), random_pv(&a, &mut rng));
            let e = mismatch_exact(&p, &q).unwrap();
            let mc = mismatch_mc(&p, &q, trials, &pairs.domain(1000 + i)).unwrap();
            let z =
                (mc.point_estimate - e).abs() / bernoulli_sigma(e, trials).max(f64::MIN_POSITIVE);
            worst = worst.max(z);
            if z > K_SIGMA {
                bad.push(format!("N={n} pair {i}: z={z:.2}"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("300 pairs x 1e6 trials, max |z| = {worst:.2} (limit 4) {bad:?}"),
    )
}

fn c03_coupling_bound() -> Verdict {
    let s = Streams::new(103);
    let mut violations = 0;
    let mut max_ratio = 0.0f64;
    for n in [2usize, 3, 5, 8] {
        let a = Alphabet::indexed(n).unwrap();
        let pairs = s.domain(n as u64);
        for i in 0..10_000 {
            let mut rng = pairs.rng(i);
            let (p, q) = (random_pv(&a, &mut rng), random_pv(&a, &mut rng));
            let e = mismatch_exact(&p, &q).unwrap();
            let d = tv(p.entries(), q.entries());
            violations += usize::from(e > 2.0 * d + TOL);
            if d > 0.0 {
                max_ratio = max_ratio.max(e / d);
            }
        }
    }
    verdict(
        violations == 0,
        format!("40000 pairs, {violations} violations of exact <= 2 tv, max ratio {max_ratio:.6}"),
    )
}

fn c04_near_optimal() -> Verdict {
    let eps = 0.01;
    let a = Alphabet::indexed(3).unwrap();
    let (p, q) = near_optimal_pair(eps, &a).unwrap();
    let target = 2.0 / (1.0 + eps);
    let d = tv(p.entries(), q.entries());
    let e = mismatch_exact(&p, &q).unwrap();
    let ratio = e / d;
    let trials = 1_000_000;
    let mc = mismatch_mc(&p, &q, trials, &Streams::new(104)).unwrap();
    let sigma = bernoulli_sigma(target * d, trials);
    let mc_ratio = mc.point_estimate / d;
    let closed_ok = (ratio - target).abs() <= TOL;
    let mc_ok = (mc.point_estimate - target * d).abs() <= K_SIGMA * sigma;
    verdict(
        closed_ok && mc_ok,
        format!(
            "ratio {ratio:.12} vs 2/(1+eps) = {target:.12}; MC ratio {mc_ratio:.5}, |z| = {:.2}",
            (mc.point_estimate - target * d).abs() / sigma
        ),
    )
}

fn c05_uniform_minus_one() -> Verdict {
    let a = Alphabet::indexed(3).unwrap();
    let p = uniform_minus_one(&a, 0).unwrap();
    let q = uniform_minus_one(&a, 1).unwrap();
    let e = mismatch_exact(&p, &q).unwrap();
    let ratio = e / tv(p.entries(), q.entries());
    let ok = (e - 2.0 / 3.0).abs() <= TOL && (ratio - 4.0 / 3.0).abs() <= TOL;
    verdict(
        ok,
        format!("mismatch {e:.12} (2/3), ratio {ratio:.12} (4/3)"),
    )
}

fn c06_cell_measure_law() -> Verdict {
    let draws = 1_000_000u64;
    let s = Streams::new(106);
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for n in [2usize, 3, 5] {
        let a = Alphabet::indexed(n).unwrap();
        let laws = s.domain(n as u64);
        for i in 0..20 {
            let p = random_pv(&a, &mut laws.rng(i));
            let draws_s = laws.domain(1000 + i);
            let mut counts = vec![0u64; n];
            for t in 0..draws {
                let u = sample_uniform_simplex(&mut draws_s.rng(t), &a);
                counts[classify(&u, &p).unwrap()] += 1;
            }
            for (sym, &c) in counts.iter().enumerate() {
                let e = Estimate::from_counts(c, draws).unwrap();
                let sigma = bernoulli_sigma(p.get(sym), draws);
                let z = (e.point_estimate - p.get(sym)).abs() / sigma.max(f64::MIN_POSITIVE);
                worst = worst.max(z);
                if z > K_SIGMA {
                    bad.push(format!("N={n} law {i} symbol {sym}: z={z:.2}"));
                }
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("60 laws x 1e6 draws, max |z| = {worst:.2} {bad:?}"),
    )
}

fn c07_zoo_coefficients() -> Verdict {
    let mut fails = Vec::new();
    let mut expect = |what: &str, n: usize, got: (f64, f64, f64), want: (f64, f64, f64)| {
        let off = (got.0 - want.0)
            .abs()
            .max((got.1 - want.1).abs())
            .max((got.2 - want.2).abs());
        if off > TOL {
            fails.push(format!("{what} n={n}: got {got:?}"));
        }
    };
    let triple = |k: &ContextKernel, n| {
        let c = coefficients_at(k, n).unwrap();
        (c.gamma, c.delta, c.alpha)
    };
    let parity = parity_chain();
    for c in coefficients(&parity, 10).unwrap() {
        expect(
            "parity",
            c.n,
            (c.gamma, c.delta, c.alpha),
            (0.5, 1.0 / 3.0, 1.0 / 3.0),
        );
    }
    let walk = rwrs();
    for n in 0..=8 {
        expect("rwrs", n, triple(&walk, n), (1.0, 0.5, 0.5));
    }
    let misread = misread_rwrs(0.2).unwrap();
    for n in 1..=8 {
        expect(
            "misread_rwrs(0.2)",
            n,
            triple(&misread, n),
            (0.25, 0.15, 0.6),
        );
    }
    let detail = if fails.is_empty() {
        "parity n<=10, rwrs n<=8, misread_rwrs(0.2) n in 1..=8 all match".to_string()
    } else {
        format!("mismatches: {fails:?}")
    };
    verdict(fails.is_empty(), detail)
}

fn c08_eta() -> Verdict {
    let mut fails = Vec::new();
    let parity = parity_chain();
    for n in 0..=12 {
        let e = eta_n_exact(&parity, n).unwrap();
        if e > (2.0f64 / 3.0).powi(n as i32 + 1) {
            fails.push(format!("parity n={n}: {e}"));
        }
    }
    let walk = rwrs();
    for n in 0..=12 {
        let oracle = ballot_oracle(n);
        let enumerated = scenery_eta_enumerated(&walk, n).unwrap();
        let closed = eta_n_exact(&walk, n).unwrap();
        if (enumerated - oracle).abs() > TOL || (closed - oracle).abs() > TOL {
            fails.push(format!(
                "rwrs n={n}: enum {enumerated} closed {closed} oracle {oracle}"
            ));
        }
    }
    let q = 0.2;
    let renewed = renewed_rwrs(q).unwrap();
    for n in 0..=12 {
        let e = scenery_eta_enumerated(&renewed, n).unwrap();
        let want = (1.0 - 2.0 * q) * ballot_oracle(n);
        if (e - want).abs() > TOL {
            fails.push(format!("renewed n={n}: {e} vs {want}"));
        }
    }
    verdict(
        fails.is_empty(),
        format!("parity n<=12, rwrs ballot n<=12, renewed_rwrs(0.2) n<=12 {fails:?}"),
    )
}

fn c09_inequalities() -> Verdict {
    let zoo: Vec<(ContextKernel, usize, usize)> = vec![
        (parity_chain(), 0, 12),
        (rwrs(), 0, 8),
        (renewed_rwrs(0.2).unwrap(), 0, 8),
        (misread_rwrs(0.2).unwrap(), 1, 8),
        (
            ContextKernel::iid(
                ProbVec::new(Alphabet::indexed(3).unwrap(), vec![0.5, 0.3, 0.2]).unwrap(),
            )
            .unwrap(),
            0,
            6,
        ),
        (order3_markov(0.12, 0.07, 0.04), 0, 8),
        (vlmc(), 0, 8),
    ];
    let mut fails = Vec::new();
    let mut rows = 0;
    for (k, lo, hi) in &zoo {
        let profile = influence_profile(k, *lo, *hi, None).unwrap();
        for r in &profile.records {
            rows += 1;
            let slack = K_SIGMA * r.std_error.unwrap_or(0.0) + TOL;
            if r.delta > r.gamma + TOL {
                fails.push(format!(
                    "{} n={}: delta {} > gamma {}",
                    k.id(),
                    r.n,
                    r.delta,
                    r.gamma
                ));
            }
            if r.delta > r.alpha + TOL {
                fails.push(format!(
                    "{} n={}: delta {} > alpha {}",
                    k.id(),
                    r.n,
                    r.delta,
                    r.alpha
                ));
            }
            if r.eta > r.delta + slack {
                fails.push(format!(
                    "{} n={}: eta {} > delta {}",
                    k.id(),
                    r.n,
                    r.eta,
                    r.delta
                ));
            }
        }
    }
    verdict(
        fails.is_empty(),
        format!("{rows} rows over {} processes {fails:?}", zoo.len()),
    )
}

fn c10_domination() -> Verdict {
    let chain = DominationChain::new(DeltaSequence::Constant(0.1));
    // The reset probability 0.2 is also the stationary mass at 0.
    let p = chain.p0(1000).unwrap();
    let stationary_ok = (p - 0.2).abs() <= 1e-9;
    let mut mc_ok = true;
    let mut parts = vec![format!("P[Z_1000=0] = {p:.12}")];
    for m in [10usize, 100] {
        let exact = chain.p0(m).unwrap();
        let oracle = p0_oracle(|_| 0.1, m);
        let mc = chain
            .simulate_p0(m, 100_000, &Streams::new(110 + m as u64))
            .unwrap();
        let z = (mc.point_estimate - exact).abs() / bernoulli_sigma(exact, mc.trials);
        mc_ok &= (exact - oracle).abs() <= TOL && z <= K_SIGMA;
        parts.push(format!("m={m}: MC |z| = {z:.2}"));
    }
    verdict(stationary_ok && mc_ok, parts.join(", "))
}

fn c11_reconstruction() -> Verdict {
    let k = order3_markov(0.12, 0.07, 0.04);
    let deltas: Vec<f64> = coefficients(&k, 3)
        .unwrap()
        .iter()
        .map(|c| c.delta)
        .collect();
    let chain = DominationChain::new(DeltaSequence::Values(deltas.clone()));
    let horizons = vec![-10i64, -40, -160];
    let setup = ExperimentSetup {
        horizons: horizons.clone(),
        seeds: vec![0, 1],
        replicas: 100_000,
        depth: 64,
        max_k: 10,
    };
    let rows = reconstruction_experiment(&k, &chain, &setup, &Streams::new(111)).unwrap();
    let delta_at = |n: usize| deltas.get(n).copied().unwrap_or(0.0);
    let mut fails = Vec::new();
    let mut summary = Vec::new();
    for r in &rows {
        let oracle = p0_oracle(delta_at, r.horizon.unsigned_abs() as usize);
        if (r.bound_p0 - oracle).abs() > TOL {
            fails.push(format!(
                "T={} bound {} vs oracle {oracle}",
                r.horizon, r.bound_p0
            ));
        }
        if r.mismatch.point_estimate > r.bound_p0 + K_SIGMA * r.mismatch.std_error {
            fails.push(format!("T={} a0={} rate above bound", r.horizon, r.a0));
        }
        summary.push(format!(
            "T={} a0={} rate {:.2e} bound {:.3e}",
            r.horizon, r.a0, r.mismatch.point_estimate, r.bound_p0
        ));
    }
    let combined =
        |a: &Estimate, b: &Estimate| K_SIGMA * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    for seed in 0..2 {
        let by_t: Vec<&Estimate> = rows
            .iter()
            .filter(|r| r.a0 == seed)
            .map(|r| &r.mismatch)
            .collect();
        for w in by_t.windows(2) {
            if w[1].point_estimate > w[0].point_estimate + combined(w[0], w[1]) {
                fails.push(format!("a0={seed}: rate increases with |T|"));
            }
        }
    }
    for t in &horizons {
        let pair: Vec<&Estimate> = rows
            .iter()
            .filter(|r| r.horizon == *t)
            .map(|r| &r.mismatch)
            .collect();
        if (pair[0].point_estimate - pair[1].point_estimate).abs() > combined(pair[0], pair[1]) {
            fails.push(format!("T={t}: rates differ between a0"));
        }
    }
    verdict(
        fails.is_empty(),
        format!("delta {deltas:.3?}; {}; {fails:?}", summary.join("; ")),
    )
}

fn c12_priming() -> Verdict {
    let k = parity_chain();
    let eps = 0.2;
    let word = Word::from_labels(k.alphabet().clone(), &["1", "0", "1"]).unwrap();
    let s = Streams::new(112);
    let cal = calibrate_thresholds(&k, &word, eps, 2000, 64, &s.domain(1)).unwrap();
    let set = build_priming_set(&word, &cal.thresholds).unwrap();
    let acc = conditional_block_accuracy(&k, &set, 20_000, 64, &s.domain(2)).unwrap();
    let n = 2.0;
    let beta: f64 = cal.thresholds.iter().map(|q| q / (q + n - 1.0)).product();
    let acc_ok = acc.accuracy.point_estimate >= 1.0 - eps - K_SIGMA * acc.accuracy.std_error;
    let beta_ok = (set.beta() - beta).abs() <= TOL && acc.acceptance.within(beta, K_SIGMA);
    let mut cell_ok = true;
    let mut cells = Vec::new();
    for (i, (&a, &q)) in set.word.iter().zip(&set.thresholds).enumerate() {
        let f = cell_frequency(a, q, 2, 100_000, &s.domain(10 + i as u64)).unwrap();
        let want = q / (q + n - 1.0);
        cell_ok &= f.within(want, K_SIGMA);
        cells.push(format!("{:.4}/{want:.4}", f.point_estimate));
    }
    verdict(
        acc_ok && beta_ok && cell_ok,
        format!(
            "q {:?}, accuracy {:.4} (>= 0.8), acceptance {:.5} vs beta {beta:.5}, cells {cells:?}",
            cal.thresholds, acc.accuracy.point_estimate, acc.acceptance.point_estimate
        ),
    )
}

fn c13_floor() -> Verdict {
    let parity = parity_chain();
    let check = verify_gamma0_floor(&parity, 10_000, 32, &Streams::new(113)).unwrap();
    // gamma_0 = 1/2; the lift states carry mass (2/5, 3/5), so P[X_0 = 0] = 7/15.
    let floor_ok = (check.floor - 0.5 * 7.0 / 15.0).abs() <= TOL;
    let rwrs_ok = matches!(gamma0_floor(&rwrs()), Err(Error::NoFloor));
    verdict(
        check.violations == 0 && floor_ok && rwrs_ok,
        format!(
            "parity: {} contexts, {} violations, floor {:.6}; rwrs NO_FLOOR: {rwrs_ok}",
            check.contexts, check.violations, check.floor
        ),
    )
}

fn c14_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        (
            "coupling-verify",
            r#"{"alphabet_sizes":[2,3,5],"pairs":8,"trials":50000}"#,
        ),
        (
            "influence",
            r#"{"process":{"process":"renewed_rwrs","params":{"q":0.2}},"n_max":4,"mc":{"trials":2000}}"#,
        ),
        (
            "reconstruct",
            r#"{"process":{"process":"parity"},"T_list":[-5,-20],"replicas":5000,"a0":["0","1"]}"#,
        ),
        (
            "prime",
            r#"{"process":{"process":"parity"},"word":["1","0","1"],"epsilon":0.2,"trials":500,"accuracy_trials":2000,"cell_draws":5000,"schedule":{"m_max":2,"K_list":[1,4],"replicas":300,"q":0.5}}"#,
        ),
    ];
    let mut fails = Vec::new();
    for (cmd, cfg) in configs {
        let cfg_path = dir.path().join(format!("{cmd}.json"));
        std::fs::write(&cfg_path, cfg).unwrap();
        let mut outputs = Vec::new();
        for threads in [1, 8] {
            let out = dir.path().join(format!("{cmd}-{threads}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_couplage"))
                .args([
                    cmd,
                    "--seed",
                    "2024",
                    "--threads",
                    &threads.to_string(),
                    "--format",
                    "csv",
                ])
                .arg("--config")
                .arg(&cfg_path)
                .arg("--out")
                .arg(&out)
                .status()
                .unwrap();
            if status.code() != Some(0) {
                fails.push(format!("{cmd} threads={threads}: exit {status}"));
            }
            outputs.push(read_outputs(&out));
        }
        if outputs[0] != outputs[1] {
            fails.push(format!("{cmd}: reports differ"));
        }
    }
    verdict(
        fails.is_empty(),
        format!("4 commands at 1 vs 8 threads {fails:?}"),
    )
}

/// The report and, when present, its conditions sidecar.
fn read_outputs(out: &Path) -> Vec<Vec<u8>> {
    let side = couplage_cli::sibling(out, "conditions.json");
    let mut files = vec![std::fs::read(out).unwrap_or_default()];
    if side.exists() {
        files.push(std::fs::read(side).unwrap());
    }
    files
}
