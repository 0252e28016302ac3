#![allow(dead_code)]

use nodelim::tline::LineFamily;
use nodelim::{Domain, Factor};
use rand::Rng;

/// Uniform-ish point from the set description: cube coordinates in [0,1],
/// simplex coordinates sorted so that 1 >= x_1 >= ... >= x_k >= 0.
pub fn sample_inside<R: Rng>(domain: &Domain, rng: &mut R) -> Vec<f64> {
    let mut x = Vec::with_capacity(domain.dim());
    for f in domain.factors() {
        match *f {
            Factor::Cube(k) => x.extend((0..k).map(|_| rng.random::<f64>())),
            Factor::Simplex(k) => {
                let mut v: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
                v.sort_by(|a, b| b.total_cmp(a));
                x.extend(v);
            }
        }
    }
    x
}

/// Membership in the set description, independent of the constraint matrix.
pub fn in_set(domain: &Domain, x: &[f64]) -> bool {
    let mut off = 0;
    for f in domain.factors() {
        let k = f.dim();
        let v = &x[off..off + k];
        let ok = match f {
            Factor::Cube(_) => v.iter().all(|&c| (0.0..=1.0).contains(&c)),
            Factor::Simplex(_) => {
                v[0] <= 1.0 && v[k - 1] >= 0.0 && v.windows(2).all(|w| w[0] >= w[1])
            }
        };
        if !ok {
            return false;
        }
        off += k;
    }
    true
}

pub fn supported_domains() -> Vec<Domain> {
    ["C1", "C2", "C3", "C4", "T2", "T3", "T4", "T2xC1", "T2xC2", "T3xC1", "T2xT2"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

/// All multi-indices of total degree <= p in d variables.
pub fn monomial_exponents(d: usize, p: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(i: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e as u32;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, p, &mut cur, &mut out);
    out
}

pub fn monomial(x: &[f64], alpha: &[u32]) -> f64 {
    x.iter().zip(alpha).map(|(v, &e)| v.powi(e as i32)).product()
}

/// Exact minimizer of the upper envelope over t >= 0: a convex piecewise
/// linear function attains its minimum at 0 or at a pairwise intersection.
pub fn brute_force_min(family: &LineFamily) -> Option<(f64, f64)> {
    let lines = &family.lines;
    if lines.iter().all(|l| l.alpha < 0.0) {
        return None;
    }
    let mut best = (0.0, family.envelope(0.0));
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            if a.alpha == b.alpha {
                continue;
            }
            let t = (b.beta - a.beta) / (a.alpha - b.alpha);
            if t > 0.0 && t.is_finite() {
                let v = family.envelope(t);
                if v < best.1 {
                    best = (t, v);
                }
            }
        }
    }
    Some(best)
}
