//! Random instance generators and independent oracles shared by the
//! integration tests. Nothing here calls into the code under test except
//! to build values.

#![allow(dead_code)]

use locc_areas::diagram::StepProfile;
use locc_areas::{make_schmidt, Rational, SchmidtVector};
use rand::seq::index::sample;
use rand::Rng;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn sv(v: &[(i64, i64)]) -> SchmidtVector {
    make_schmidt(&v.iter().map(|&(n, d)| r(n, d)).collect::<Vec<_>>()).unwrap()
}

/// A random composition of `den` into `len` positive parts.
pub fn composition<R: Rng>(rng: &mut R, len: usize, den: i64) -> Vec<i64> {
    let mut cuts: Vec<i64> = sample(rng, (den - 1) as usize, len - 1)
        .into_iter()
        .map(|c| c as i64 + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(den);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let part = c - prev;
            prev = c;
            part
        })
        .collect()
}

/// Random Schmidt vector with at most `max_len` terms and a common
/// denominator of at most `max_den`.
pub fn random_state<R: Rng>(rng: &mut R, max_len: usize, max_den: i64) -> SchmidtVector {
    let len = rng.gen_range(1..=max_len);
    let den = rng.gen_range(len as i64..=max_den);
    let parts = composition(rng, len, den);
    make_schmidt(&parts.iter().map(|&p| r(p, den)).collect::<Vec<_>>()).unwrap()
}

/// Random vector majorizing `state`: a few transfers of area from a smaller
/// coefficient to a larger one, each of which can only concentrate the
/// distribution further.
pub fn random_reachable<R: Rng>(rng: &mut R, state: &SchmidtVector) -> SchmidtVector {
    let mut v = state.lambdas().to_vec();
    let steps = rng.gen_range(0..=3);
    for _ in 0..steps {
        let n = v.len();
        if n < 2 {
            break;
        }
        let rich = rng.gen_range(0..n - 1);
        let poor = rng.gen_range(rich + 1..n);
        if v[poor].is_zero() {
            continue;
        }
        let grain = rng.gen_range(1..=12);
        let k = rng.gen_range(1..=grain);
        let amount = &v[poor] * r(k, grain);
        v[rich] = &v[rich] + &amount;
        v[poor] = &v[poor] - &amount;
        v.sort_by(|a, b| b.cmp(a));
    }
    make_schmidt(&v).unwrap()
}

/// Either a reachable target or an unconstrained random one.
pub fn random_pair<R: Rng>(
    rng: &mut R,
    max_len: usize,
    max_den: i64,
) -> (SchmidtVector, SchmidtVector) {
    let a = random_state(rng, max_len, max_den);
    let b = if rng.gen_bool(0.5) {
        random_reachable(rng, &a)
    } else {
        random_state(rng, max_len, max_den)
    };
    (a, b)
}

pub fn profile_of(v: &SchmidtVector, len: usize) -> StepProfile {
    StepProfile::new(v.padded(len)).unwrap()
}

/// Majorization through prefix sums: `Σ_{i≤p} b_i ≥ Σ_{i≤p} a_i` for all p.
pub fn prefix_oracle(a: &SchmidtVector, b: &SchmidtVector) -> bool {
    let n = a.len().max(b.len());
    let (a, b) = (a.padded(n), b.padded(n));
    let mut sa = Rational::zero();
    let mut sb = Rational::zero();
    for i in 0..n {
        sa += &a[i];
        sb += &b[i];
        if sb < sa {
            return false;
        }
    }
    true
}

/// `Σ_m (λ_m − λ_{m+1}) · m · log2 m`, written out directly.
pub fn emax_oracle(state: &SchmidtVector) -> f64 {
    let l = state.to_f64();
    (0..l.len())
        .map(|k| {
            let next = l.get(k + 1).copied().unwrap_or(0.0);
            let m = (k + 1) as f64;
            (l[k] - next) * m * m.log2()
        })
        .sum()
}

/// Best m-state probability by exhaustive search: every non-increasing
/// profile on the grid of multiples of `1/G` (G = common denominator times
/// lcm(1..=m)) that the start can reach by moving area upwards, scored by
/// `(P_m − P_{m+1}) · m`. Only usable for small instances.
pub fn max_prob_bruteforce(state: &SchmidtVector, m: usize) -> Rational {
    use num_integer::Integer;
    use num_traits::ToPrimitive;
    let n = state.len().max(m);
    let den = state
        .lambdas()
        .iter()
        .fold(1i64, |acc, l| acc.lcm(&l.denom().to_i64().unwrap()));
    let g = den * (1..=m as i64).fold(1, |acc, k| acc.lcm(&k));
    let start: Vec<i64> = state
        .padded(n)
        .iter()
        .map(|l| (l * Rational::from_integer(g)).numer().to_i64().unwrap())
        .collect();
    let mut suffix = vec![0i64; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] + start[k];
    }

    fn walk(prefix: &mut Vec<i64>, left: i64, n: usize, m: usize, suffix: &[i64], best: &mut i64) {
        let k = prefix.len();
        if k == n {
            if left != 0 {
                return;
            }
            let mut tail = 0;
            for i in (0..n).rev() {
                tail += prefix[i];
                if tail > suffix[i] {
                    return;
                }
            }
            let next = if m < n { prefix[m] } else { 0 };
            *best = (*best).max((prefix[m - 1] - next) * m as i64);
            return;
        }
        let cap = prefix.last().copied().unwrap_or(left).min(left);
        // the remaining columns cannot hold more than (n − k) · cap
        for v in (0..=cap).rev() {
            if v * ((n - k) as i64) < left {
                break;
            }
            // reaching column k needs Σ_{i≥k} ≤ start suffix; the rest sums to `left`
            if left > suffix[k] {
                return;
            }
            prefix.push(v);
            walk(prefix, left - v, n, m, suffix, best);
            prefix.pop();
        }
    }

    let mut best = 0i64;
    walk(&mut Vec::with_capacity(n), g, n, m, &suffix, &mut best);
    Rational::new(best, g)
}
