//! Random walk in random scenery over the alphabet {-1,1}², in three
//! flavors: the plain walk, colors misread with probability `q`, and a
//! scenery whose color at the walker's site is renewed with probability `q`.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::process::Word;
use crate::simplex::Alphabet;

/// Symbol labels `(step, color)` in alphabet order.
pub const RWRS_LABELS: [&str; 4] = ["(-1,-1)", "(-1,+1)", "(+1,-1)", "(+1,+1)"];

pub fn rwrs_alphabet() -> Alphabet {
    Alphabet::new(RWRS_LABELS).expect("four distinct labels")
}

pub fn encode(step: i8, color: i8) -> usize {
    2 * usize::from(step > 0) + usize::from(color > 0)
}

pub fn step_of(symbol: usize) -> i8 {
    if symbol >= 2 {
        1
    } else {
        -1
    }
}

pub fn color_of(symbol: usize) -> i8 {
    if symbol % 2 == 1 {
        1
    } else {
        -1
    }
}

/// Color the next symbol must carry if its step is `step`: the color seen at
/// the latest earlier time at the same site, if that time lies within `z`.
pub(crate) fn resolve(z: &[usize], step: i8) -> Option<i8> {
    let mut sum = step as i64;
    for idx in (1..z.len()).rev() {
        sum += step_of(z[idx]) as i64;
        if sum == 0 {
            return Some(color_of(z[idx - 1]));
        }
    }
    None
}

/// Resolution of both possible next steps (-1 then +1) inside `z`.
pub(crate) fn statuses(z: &[usize]) -> [Option<i8>; 2] {
    [resolve(z, -1), resolve(z, 1)]
}

/// Level the walk read backwards from the oldest symbol of `z` must reach
/// for the past to fix the color seen after `step`.
pub(crate) fn target(z: &[usize], step: i8) -> i64 {
    -(step as i64 + z.iter().map(|&s| step_of(s) as i64).sum::<i64>())
}

/// Law of the next symbol when the color following each step is either
/// fixed or uniform (`None`); `renewal` is the probability that a fixed
/// color has been redrawn.
pub(crate) fn law_from(status: [Option<i8>; 2], renewal: Option<f64>) -> [f64; 4] {
    let (same, other) = match renewal {
        None => (0.5, 0.0),
        Some(q) => ((1.0 - q) / 2.0, q / 2.0),
    };
    let mut out = [0.0; 4];
    for (step, st) in [-1i8, 1].into_iter().zip(status) {
        match st {
            Some(c) => {
                out[encode(step, c)] = same;
                out[encode(step, -c)] = other;
            }
            None => {
                out[encode(step, -1)] = 0.25;
                out[encode(step, 1)] = 0.25;
            }
        }
    }
    out
}

/// Conditional law of the next symbol given `z`.
pub(crate) fn law(z: &[usize], renewal: Option<f64>) -> [f64; 4] {
    law_from(statuses(z), renewal)
}

/// Every law `p(.|xz)` an infinite past `x` can produce. A step left open by
/// `z` is fixed by the past with either color, or stays open if the
/// backward walk can avoid its target level forever.
pub(crate) fn extension_laws(z: &[usize], renewal: Option<f64>) -> Vec<[f64; 4]> {
    let st = statuses(z);
    let open: Vec<usize> = (0..2).filter(|&i| st[i].is_none()).collect();
    let targets: Vec<i64> = open
        .iter()
        .map(|&i| target(z, if i == 0 { -1 } else { 1 }))
        .collect();
    let realizable = |hit: &[bool]| -> bool {
        for (t, h) in targets.iter().zip(hit) {
            if *t == 0 && !h {
                return false;
            }
        }
        if targets.len() == 2 {
            let (t0, t1) = (targets[0], targets[1]);
            if t0 != 0 && t1 != 0 {
                if t0.signum() != t1.signum() {
                    return hit[0] || hit[1];
                }
                let (near, far) = if t0.abs() < t1.abs() { (0, 1) } else { (1, 0) };
                return !hit[far] || hit[near];
            }
        }
        true
    };
    let options = [Some(-1i8), Some(1), None];
    let mut out = Vec::new();
    let combos = 3usize.pow(open.len() as u32);
    for c in 0..combos {
        let mut status = st;
        let mut hit = Vec::with_capacity(open.len());
        let mut code = c;
        for &i in &open {
            let o = options[code % 3];
            code /= 3;
            status[i] = o;
            hit.push(o.is_some());
        }
        if realizable(&hit) {
            out.push(law_from(status, renewal));
        }
    }
    out
}

/// Generates an independent stationary past backwards in time, most recent
/// symbol first.
pub(crate) struct BackwardPast {
    renewal: Option<f64>,
    pos: i64,
    colors: HashMap<i64, i8>,
}

impl BackwardPast {
    pub(crate) fn new(renewal: Option<f64>) -> Self {
        Self {
            renewal,
            pos: 0,
            colors: HashMap::new(),
        }
    }

    pub(crate) fn older<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let color = match self.colors.get(&self.pos) {
            None => sign(rng),
            Some(&later) => match self.renewal {
                Some(q) if rng.random::<f64>() < q => -later,
                _ => later,
            },
        };
        self.colors.insert(self.pos, color);
        let step = sign(rng);
        self.pos -= step as i64;
        encode(step, color)
    }
}

pub(crate) fn admissible_raw(z: &[usize]) -> bool {
    let mut seen: HashMap<i64, i8> = HashMap::new();
    let mut pos = 0i64;
    for &s in z {
        pos += step_of(s) as i64;
        let c = color_of(s);
        if *seen.entry(pos).or_insert(c) != c {
            return false;
        }
    }
    true
}

/// Whether `z` can be observed: equal walk positions carry equal colors.
pub fn rwrs_admissible(z: &Word) -> Result<bool> {
    z.alphabet().ensure_same(&rwrs_alphabet())?;
    Ok(admissible_raw(z.symbols()))
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

/// Scenery on the sites `[-half_width, half_width]`.
struct Scenery {
    half_width: i64,
    colors: Vec<i8>,
}

impl Scenery {
    fn random<R: Rng + ?Sized>(half_width: usize, rng: &mut R) -> Self {
        Self {
            half_width: half_width as i64,
            colors: (0..2 * half_width + 1).map(|_| sign(rng)).collect(),
        }
    }

    fn at(&mut self, site: i64) -> &mut i8 {
        let i = site + self.half_width;
        assert!(
            i >= 0 && (i as usize) < self.colors.len(),
            "walk left the scenery window"
        );
        &mut self.colors[i as usize]
    }
}

/// Stationary path of length `len` of the walk in random scenery. Each
/// color is flipped independently with probability `misread` when present.
pub(crate) fn sample_rwrs<R: Rng + ?Sized>(
    len: usize,
    half_width: usize,
    misread: Option<f64>,
    rng: &mut R,
) -> Vec<usize> {
    let mut scenery = Scenery::random(half_width.max(len), rng);
    let mut pos = 0i64;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let step = sign(rng);
        pos += step as i64;
        let mut color = *scenery.at(pos);
        if let Some(q) = misread {
            if rng.random::<f64>() < q {
                color = -color;
            }
        }
        out.push(encode(step, color));
    }
    out
}

/// A path of the walk in renewed scenery with its governing sequence
/// `(step, renewal flag, drawn color)`.
#[derive(Debug, Clone)]
pub struct RenewedTrace {
    pub q: f64,
    pub steps: Vec<i8>,
    pub colors: Vec<i8>,
    pub renewed: Vec<bool>,
    pub kappa: Vec<i8>,
    /// Walk position after each step; the walk starts at site 0.
    pub positions: Vec<i64>,
    half_width: i64,
    final_scenery: Vec<i8>,
}

impl RenewedTrace {
    pub fn symbols(&self) -> Vec<usize> {
        self.steps
            .iter()
            .zip(&self.colors)
            .map(|(&x, &y)| encode(x, y))
            .collect()
    }

    /// True color at site `positions[last] + s` after the final step.
    pub fn final_color(&self, s: i64) -> i8 {
        let site = self.positions.last().copied().unwrap_or(0) + s;
        self.final_scenery[(site + self.half_width) as usize]
    }

    /// Color at offset `s` from the walker after step `n` (0-based), read off
    /// the governing sequence alone: `kappa` at the latest renewal time at
    /// that site. `None` when the site has not been renewed by then.
    pub fn recover(&self, n: usize, s: i64) -> Option<i8> {
        let target = self.positions[n] + s;
        (0..=n)
            .rev()
            .find(|&k| self.renewed[k] && self.positions[k] == target)
            .map(|k| self.kappa[k])
    }
}

pub(crate) fn sample_renewed<R: Rng + ?Sized>(
    len: usize,
    q: f64,
    half_width: usize,
    rng: &mut R,
) -> RenewedTrace {
    let hw = half_width.max(len);
    let mut scenery = Scenery::random(hw, rng);
    let keep = (1.0 - 2.0 * q) / (1.0 - q);
    let mut trace = RenewedTrace {
        q,
        steps: Vec::with_capacity(len),
        colors: Vec::with_capacity(len),
        renewed: Vec::with_capacity(len),
        kappa: Vec::with_capacity(len),
        positions: Vec::with_capacity(len),
        half_width: hw as i64,
        final_scenery: Vec::new(),
    };
    let mut pos = 0i64;
    for _ in 0..len {
        let step = sign(rng);
        pos += step as i64;
        let site = scenery.at(pos);
        let flipped = rng.random::<f64>() < q;
        if flipped {
            *site = -*site;
        }
        let color = *site;
        let beta = rng.random::<f64>() < keep;
        let v = sign(rng);
        let renewed = !(beta && !flipped);
        trace.steps.push(step);
        trace.colors.push(color);
        trace.renewed.push(renewed);
        trace.kappa.push(if renewed { color } else { v });
        trace.positions.push(pos);
    }
    trace.final_scenery = scenery.colors;
    trace
}

/// `P[a walk of m steps from 0 never goes below 0]`, by the ballot-number
/// recursion on the distribution of the current height.
pub fn walk_stays_nonnegative(m: usize) -> f64 {
    let mut dist = vec![1.0f64];
    for _ in 0..m {
        let mut nxt = vec![0.0; dist.len() + 1];
        for (h, &p) in dist.iter().enumerate() {
            nxt[h + 1] += 0.5 * p;
            if h > 0 {
                nxt[h - 1] += 0.5 * p;
            }
        }
        dist = nxt;
    }
    dist.iter().sum()
}

/// Average influence at distance `n` for the plain walk, by the closed form
/// `(1/2) P[walk of n-1 steps stays >= 0]`.
pub fn rwrs_eta_closed_form(n: usize) -> f64 {
    0.5 * walk_stays_nonnegative(n.saturating_sub(1))
}

/// Same quantity by enumerating all step words of length `n`: for each word,
/// every step value the next symbol could take whose site was not visited
/// within the window contributes `1/4`.
pub fn rwrs_eta_enumerated(n: usize) -> Result<f64> {
    if n > 24 {
        return Err(Error::Intractable(format!(
            "sign word enumeration limited to n <= 24, got {n}"
        )));
    }
    let mut total = 0u64;
    for bits in 0u32..(1u32 << n) {
        let word: Vec<usize> = (0..n)
            .map(|i| encode(if bits >> i & 1 == 1 { 1 } else { -1 }, 1))
            .collect();
        total += [-1i8, 1]
            .iter()
            .filter(|&&s| resolve(&word, s).is_none())
            .count() as u64;
    }
    Ok(0.25 * total as f64 / (1u64 << n) as f64)
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 0.5 {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name: "q",
            value: q,
        })
    }
}
