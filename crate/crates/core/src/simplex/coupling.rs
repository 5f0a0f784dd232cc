//! The simplex coupling `g(s, p)` of all laws on a finite alphabet.
//!
//! A point `U` uniform on the simplex is turned into a symbol with law `p` by
//! picking the cell `S_a(p)` that contains it. Cells are characterized by the
//! ratio test `s(a)/p(a) = min_b s(b)/p(b)` with the conventions `r/0 = inf`
//! (r > 0) and `0/0 = 0`.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::Streams;
use crate::simplex::{Alphabet, MismatchEstimate, ProbVec, SimplexPoint};

/// Total-variation distance `(1/2) sum |p(a) - q(a)|`.
pub fn total_variation(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    p.alphabet().ensure_same(q.alphabet())?;
    Ok(tv_raw(p.entries(), q.entries()))
}

pub(crate) fn tv_raw(p: &[f64], q: &[f64]) -> f64 {
    let tv: f64 = p.iter().zip(q).map(|(a, b)| (a - b).max(0.0)).sum();
    tv.clamp(0.0, 1.0)
}

/// Fill `out` with a uniform point of the simplex, built from normalized
/// i.i.d. exponentials.
pub(crate) fn fill_uniform<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut sum = 0.0;
    for c in out.iter_mut() {
        let e: f64 = Exp1.sample(rng);
        *c = e;
        sum += e;
    }
    for c in out.iter_mut() {
        *c /= sum;
    }
}

/// A point drawn uniformly on the simplex over `alphabet`.
pub fn sample_uniform_simplex<R: Rng + ?Sized>(rng: &mut R, alphabet: &Alphabet) -> SimplexPoint {
    let mut coords = vec![0.0; alphabet.len()];
    fill_uniform(rng, &mut coords);
    SimplexPoint::from_raw(alphabet.clone(), coords)
}

/// The affine map `f_a(., p)`: fixes `E_b` for `b != a` and sends `E_a` to `G(p)`.
pub fn barycentric_map(a: usize, p: &ProbVec, s: &SimplexPoint) -> Result<SimplexPoint> {
    p.alphabet().ensure_same(s.alphabet())?;
    p.alphabet().check_symbol(a)?;
    Ok(SimplexPoint::from_raw(
        s.alphabet().clone(),
        barycentric_raw(a, p.entries(), s.coords()),
    ))
}

pub(crate) fn barycentric_raw(a: usize, p: &[f64], s: &[f64]) -> Vec<f64> {
    let sa = s[a];
    s.iter()
        .zip(p)
        .enumerate()
        .map(|(b, (&sb, &pb))| if b == a { sa * pb } else { sb + sa * pb })
        .collect()
}

/// `s(b)/p(b)` under the zero conventions, kept as a fraction.
#[derive(Debug, Clone, Copy)]
enum Ratio {
    Finite { num: f64, den: f64 },
    Infinite,
}

impl Ratio {
    fn of(s: f64, p: f64) -> Self {
        if p > 0.0 {
            Ratio::Finite { num: s, den: p }
        } else if s > 0.0 {
            Ratio::Infinite
        } else {
            // 0/0 = 0
            Ratio::Finite { num: 0.0, den: 1.0 }
        }
    }

    fn cmp(self, other: Ratio) -> Ordering {
        match (self, other) {
            (Ratio::Infinite, Ratio::Infinite) => Ordering::Equal,
            (Ratio::Infinite, _) => Ordering::Greater,
            (_, Ratio::Infinite) => Ordering::Less,
            (Ratio::Finite { num: n1, den: d1 }, Ratio::Finite { num: n2, den: d2 }) => {
                (n1 * d2).partial_cmp(&(n2 * d1)).unwrap_or(Ordering::Equal)
            }
        }
    }
}

pub(crate) fn classify_raw(s: &[f64], p: &[f64]) -> usize {
    let mut best = 0;
    let mut best_ratio = Ratio::of(s[0], p[0]);
    for b in 1..s.len() {
        let r = Ratio::of(s[b], p[b]);
        if r.cmp(best_ratio) == Ordering::Less {
            best = b;
            best_ratio = r;
        }
    }
    best
}

/// `g(s, p)`: the order-minimal symbol attaining `min_b s(b)/p(b)`.
pub fn classify(s: &SimplexPoint, p: &ProbVec) -> Result<usize> {
    s.alphabet().ensure_same(p.alphabet())?;
    Ok(classify_raw(s.coords(), p.entries()))
}

/// `U = f_x(w, p)`, a uniform point with `classify(U, p) = x` when `w` is
/// uniform and `x ~ p` independently.
pub fn encode_innovation(x: usize, w: &SimplexPoint, p: &ProbVec) -> Result<SimplexPoint> {
    w.alphabet().ensure_same(p.alphabet())?;
    p.alphabet().check_symbol(x)?;
    if p.get(x) <= 0.0 {
        return Err(Error::ZeroProbabilitySymbol(x));
    }
    Ok(SimplexPoint::from_raw(
        w.alphabet().clone(),
        barycentric_raw(x, p.entries(), w.coords()),
    ))
}

pub(crate) fn mismatch_raw(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for a in 0..p.len() {
        let pa = p[a];
        if pa <= 0.0 {
            continue;
        }
        let qa = q[a];
        let r: f64 = (0..p.len()).map(|b| (q[b] * pa - p[b] * qa).max(0.0)).sum();
        let den = qa + r;
        if den > 0.0 {
            total += pa * r / den;
        }
        // den == 0 with pa > 0 forces p = q = point mass at a: no mismatch.
    }
    total.clamp(0.0, 1.0)
}

/// Closed form of `P[g(U,p) != g(U,q)]` for `U` uniform on the simplex:
/// `sum_a p(a) r(a) / (q(a) + r(a))` with `r(a) = sum_b [q(b)p(a) - p(b)q(a)]_+`.
pub fn mismatch_exact(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    p.alphabet().ensure_same(q.alphabet())?;
    Ok(mismatch_raw(p.entries(), q.entries()))
}

/// Monte Carlo estimate of the mismatch probability; trial `i` draws from
/// stream `i` of `streams`, so the result does not depend on the thread count.
pub fn mismatch_mc(
    p: &ProbVec,
    q: &ProbVec,
    trials: u64,
    streams: &Streams,
) -> Result<MismatchEstimate> {
    p.alphabet().ensure_same(q.alphabet())?;
    if trials == 0 {
        return Err(Error::EmptySample);
    }
    let (pe, qe) = (p.entries(), q.entries());
    let n = pe.len();
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, i| {
                let mut rng = streams.rng(i);
                fill_uniform(&mut rng, buf);
                u64::from(classify_raw(buf, pe) != classify_raw(buf, qe))
            },
        )
        .sum();
    MismatchEstimate::from_counts(hits, trials)
}

/// `p = (1-eps, eps, 0, ...)`, `q = (1-eps, 0, eps, 0, ...)`, whose mismatch
/// to total-variation ratio is `2/(1+eps)`.
pub fn near_optimal_pair(epsilon: f64, alphabet: &Alphabet) -> Result<(ProbVec, ProbVec)> {
    if alphabet.len() < 3 {
        return Err(Error::AlphabetTooSmall {
            size: alphabet.len(),
            needed: 3,
        });
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::ParamOutOfRange {
            name: "epsilon",
            value: epsilon,
        });
    }
    let mut p = vec![0.0; alphabet.len()];
    let mut q = p.clone();
    p[0] = 1.0 - epsilon;
    q[0] = 1.0 - epsilon;
    p[1] = epsilon;
    q[2] = epsilon;
    Ok((
        ProbVec::new(alphabet.clone(), p)?,
        ProbVec::new(alphabet.clone(), q)?,
    ))
}

/// Uniform law on `A \ {excluded}`.
pub fn uniform_minus_one(alphabet: &Alphabet, excluded: usize) -> Result<ProbVec> {
    alphabet.check_symbol(excluded)?;
    let n = alphabet.len();
    let entries = (0..n)
        .map(|a| {
            if a == excluded {
                0.0
            } else {
                1.0 / (n - 1) as f64
            }
        })
        .collect();
    ProbVec::new(alphabet.clone(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn abc() -> Alphabet {
        Alphabet::new(["a", "b", "c"]).unwrap()
    }

    fn pv(a: &Alphabet, v: &[f64]) -> ProbVec {
        ProbVec::new(a.clone(), v.to_vec()).unwrap()
    }

    fn sp(a: &Alphabet, v: &[f64]) -> SimplexPoint {
        SimplexPoint::new(a.clone(), v.to_vec()).unwrap()
    }

    #[test]
    fn total_variation_examples() {
        let a2 = Alphabet::indexed(2).unwrap();
        let a3 = abc();
        assert_eq!(
            total_variation(&pv(&a2, &[0.3, 0.7]), &pv(&a2, &[0.3, 0.7])).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            total_variation(&pv(&a2, &[0.6, 0.4]), &pv(&a2, &[0.5, 0.5])).unwrap(),
            0.1,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            total_variation(&pv(&a3, &[0.8, 0.2, 0.0]), &pv(&a3, &[0.8, 0.0, 0.2])).unwrap(),
            0.2,
            epsilon = 1e-15
        );
        assert_eq!(
            total_variation(&pv(&a2, &[0.5, 0.5]), &ProbVec::uniform(a3)).unwrap_err(),
            Error::AlphabetMismatch
        );
    }

    #[test]
    fn barycentric_map_fixes_vertices_and_sends_e_a_to_p() {
        let a = abc();
        let p = pv(&a, &[0.5, 0.3, 0.2]);
        let ea = SimplexPoint::vertex(a.clone(), 0).unwrap();
        assert_eq!(barycentric_map(0, &p, &ea).unwrap().coords(), p.entries());
        let eb = SimplexPoint::vertex(a.clone(), 1).unwrap();
        assert_eq!(barycentric_map(0, &p, &eb).unwrap(), eb);
        let delta = ProbVec::point_mass(a.clone(), 2).unwrap();
        let s = sp(&a, &[0.2, 0.3, 0.5]);
        assert_eq!(barycentric_map(2, &delta, &s).unwrap(), s);
        assert_eq!(
            barycentric_map(5, &p, &s).unwrap_err().code(),
            "UNKNOWN_SYMBOL"
        );
    }

    #[test]
    fn classify_examples() {
        let a = abc();
        let p = pv(&a, &[0.5, 0.3, 0.2]);
        assert_eq!(classify(&sp(&a, &[0.2, 0.3, 0.5]), &p).unwrap(), 0);
        let u = ProbVec::uniform(a.clone());
        assert_eq!(classify(&sp(&a, &[0.25, 0.25, 0.5]), &u).unwrap(), 0);
        assert_eq!(classify(&sp(&a, &[0.5, 0.25, 0.25]), &u).unwrap(), 1);
        let delta = ProbVec::point_mass(a.clone(), 1).unwrap();
        assert_eq!(classify(&sp(&a, &[0.2, 0.3, 0.5]), &delta).unwrap(), 1);
    }

    #[test]
    fn classify_zero_conventions() {
        let a = abc();
        // p(c) = 0 and s(c) = 0: ratio 0/0 = 0 is minimal.
        let p = pv(&a, &[0.5, 0.5, 0.0]);
        assert_eq!(classify(&sp(&a, &[0.5, 0.5, 0.0]), &p).unwrap(), 2);
        // p(c) = 0 and s(c) > 0: infinite ratio is never chosen.
        assert_eq!(classify(&sp(&a, &[0.1, 0.2, 0.7]), &p).unwrap(), 0);
    }

    // Brute-force membership of s in S_a(p) = Conv({G(p)} u {E_b : b != a}):
    // the barycentric weights are s(a)/p(a) on G(p) and s(b) - p(b) s(a)/p(a)
    // on E_b, and membership holds iff all weights are >= 0.
    fn in_cell_by_hull(s: &[f64], p: &[f64], a: usize) -> bool {
        if p[a] <= 0.0 {
            return false;
        }
        let t = s[a] / p[a];
        (0..s.len()).all(|b| b == a || s[b] - p[b] * t >= -1e-15)
    }

    #[test]
    fn classify_agrees_with_convex_hull_membership() {
        let a = abc();
        let p = [0.5, 0.3, 0.2];
        let s = [0.2, 0.3, 0.5];
        assert!(in_cell_by_hull(&s, &p, 0));
        assert!(!in_cell_by_hull(&s, &p, 1));
        assert!(!in_cell_by_hull(&s, &p, 2));
        let mut rng = Streams::new(1).rng(0);
        let pp = pv(&a, &p);
        for _ in 0..2000 {
            let u = sample_uniform_simplex(&mut rng, &a);
            let g = classify(&u, &pp).unwrap();
            assert!(in_cell_by_hull(u.coords(), &p, g));
        }
    }

    #[test]
    fn encode_innovation_round_trip_and_identity() {
        let a = abc();
        let p = pv(&a, &[0.5, 0.3, 0.2]);
        let mut rng = Streams::new(2).rng(0);
        for x in 0..3 {
            let w = sample_uniform_simplex(&mut rng, &a);
            let u = encode_innovation(x, &w, &p).unwrap();
            assert_eq!(classify(&u, &p).unwrap(), x);
        }
        let delta = ProbVec::point_mass(a.clone(), 1).unwrap();
        let w = sample_uniform_simplex(&mut rng, &a);
        assert_eq!(encode_innovation(1, &w, &delta).unwrap(), w);
        assert_eq!(
            encode_innovation(2, &w, &delta).unwrap_err().code(),
            "ZERO_PROBABILITY_SYMBOL"
        );
    }

    #[test]
    fn mismatch_exact_examples() {
        let a2 = Alphabet::indexed(2).unwrap();
        assert_abs_diff_eq!(
            mismatch_exact(&pv(&a2, &[0.6, 0.4]), &pv(&a2, &[0.5, 0.5])).unwrap(),
            0.1,
            epsilon = 1e-15
        );
        let a = abc();
        let p = pv(&a, &[0.2, 0.3, 0.5]);
        assert_eq!(mismatch_exact(&p, &p).unwrap(), 0.0);
        // 0.8 * 0.16 / 0.96 + 0.2 * 0.2 / 0.2
        let v = mismatch_exact(&pv(&a, &[0.8, 0.2, 0.0]), &pv(&a, &[0.8, 0.0, 0.2])).unwrap();
        assert_abs_diff_eq!(v, 0.8 * 0.16 / 0.96 + 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        let d = ProbVec::point_mass(a.clone(), 0).unwrap();
        assert_eq!(mismatch_exact(&d, &d).unwrap(), 0.0);
    }

    #[test]
    fn mismatch_mc_is_zero_for_equal_laws() {
        let a = abc();
        let p = pv(&a, &[0.2, 0.3, 0.5]);
        let e = mismatch_mc(&p, &p, 1000, &Streams::new(3)).unwrap();
        assert_eq!(e.point_estimate, 0.0);
        assert_eq!(
            mismatch_mc(&p, &p, 0, &Streams::new(3)).unwrap_err().code(),
            "EMPTY_SAMPLE"
        );
    }

    #[test]
    fn near_optimal_pair_ratio() {
        let a = abc();
        for eps in [0.01, 0.3, 1.0] {
            let (p, q) = near_optimal_pair(eps, &a).unwrap();
            let ratio = mismatch_exact(&p, &q).unwrap() / total_variation(&p, &q).unwrap();
            assert_abs_diff_eq!(ratio, 2.0 / (1.0 + eps), epsilon = 1e-12);
        }
        let a2 = Alphabet::indexed(2).unwrap();
        assert_eq!(
            near_optimal_pair(0.1, &a2).unwrap_err().code(),
            "ALPHABET_TOO_SMALL"
        );
        assert_eq!(
            near_optimal_pair(0.0, &a).unwrap_err().code(),
            "PARAM_OUT_OF_RANGE"
        );
    }

    #[test]
    fn uniform_minus_one_family() {
        let a = abc();
        let p = uniform_minus_one(&a, 0).unwrap();
        let q = uniform_minus_one(&a, 1).unwrap();
        assert_abs_diff_eq!(mismatch_exact(&p, &q).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(total_variation(&p, &q).unwrap(), 0.5, epsilon = 1e-12);
    }
}
