//! Orthonormal polynomial bases of total degree `<= p` on product domains.
//!
//! Cube factors use tensor products of shifted Legendre polynomials. Simplex
//! factors use the collapsed-coordinate (Koornwinder) construction applied
//! recursively: on `T_k`, with `x_1 = xi` and `x' = xi * eta`, `eta` in
//! `T_{k-1}`,
//!
//! ```text
//! phi_{a,beta}(x) = q_a^{(2|beta| + k - 1)}(x_1) * x_1^{|beta|} * psi_beta(x' / x_1)
//! ```
//!
//! where `q_a^{(c)}` is orthonormal on `[0,1]` for the weight `xi^c` and
//! `psi_beta` is the basis of `T_{k-1}`. Every factor is evaluated in
//! homogeneous form (`s^n P_n(y / s)`), so no division by `x_1` is needed and
//! the formulas stay polynomial on the closed simplex.
//!
//! Functions are ordered by total degree and then reverse-lexicographically
//! on their multi-index, so the constant always comes first.

use nalgebra::{DMatrix, DVector};

use crate::dual::{Dual, MAX_DIM};
use crate::geometry::{Domain, Factor};

/// Jacobi polynomials `P_n^{(0,c)}(2y/s - 1)` scaled by `sqrt(2n + c + 1) s^n`,
/// for `n = 0..=max_deg`.
fn scaled_jacobi(max_deg: usize, c: f64, y: Dual, s: Dual) -> Vec<Dual> {
    let mut h = Vec::with_capacity(max_deg + 1);
    h.push(Dual::constant(1.0));
    if max_deg >= 1 {
        // t s = 2y - s
        let ts = y.scale(2.0) - s;
        // P_1 = ((c + 2) t - c) / 2
        h.push((ts.scale(c + 2.0) - s.scale(c)).scale(0.5));
    }
    let s2 = s * s;
    for n in 1..max_deg {
        let nf = n as f64;
        let ab = c; // alpha + beta with alpha = 0
        let k2 = 2.0 * nf + ab;
        let denom = 2.0 * (nf + 1.0) * (nf + ab + 1.0) * k2;
        let ts = y.scale(2.0) - s;
        let lin = (ts.scale((k2 + 2.0) * k2) - s.scale(c * c)).scale(k2 + 1.0);
        let prev = s2 * h[n - 1];
        let next = (lin * h[n]).scale(1.0 / denom)
            - prev.scale(2.0 * nf * (nf + c) * (k2 + 2.0) / denom);
        h.push(next);
    }
    for (n, v) in h.iter_mut().enumerate() {
        *v = v.scale((2.0 * n as f64 + c + 1.0).sqrt());
    }
    h
}

/// Multi-indices (with their total degree) of a factor, in the order its
/// evaluator produces values.
fn factor_indices(factor: Factor, p: usize) -> Vec<Vec<u32>> {
    match factor {
        Factor::Cube(k) => cube_indices(k, p),
        Factor::Simplex(k) => simplex_indices(k, p),
    }
}

fn cube_indices(k: usize, p: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for a in 0..=p {
        for rest in cube_indices(k - 1, p - a) {
            let mut idx = vec![a as u32];
            idx.extend(rest);
            out.push(idx);
        }
    }
    out
}

fn simplex_indices(k: usize, p: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for beta in simplex_indices(k - 1, p) {
        let m: u32 = beta.iter().sum();
        for a in 0..=(p as u32 - m) {
            let mut idx = vec![a];
            idx.extend(beta.iter().copied());
            out.push(idx);
        }
    }
    out
}

fn eval_cube(k: usize, xs: &[Dual], p: usize, indices: &[Vec<u32>]) -> Vec<Dual> {
    let one = Dual::constant(1.0);
    let legendre: Vec<Vec<Dual>> = (0..k).map(|i| scaled_jacobi(p, 0.0, xs[i], one)).collect();
    indices
        .iter()
        .map(|idx| {
            idx.iter()
                .enumerate()
                .fold(one, |acc, (i, &a)| acc * legendre[i][a as usize])
        })
        .collect()
}

/// Homogeneous simplex basis `s^{deg} phi(x / s)` in `simplex_indices` order.
fn eval_simplex(k: usize, xs: &[Dual], s: Dual, p: usize) -> Vec<Dual> {
    if k == 0 {
        return vec![Dual::constant(1.0)];
    }
    let lower = eval_simplex(k - 1, &xs[1..], xs[0], p);
    let lower_deg: Vec<usize> = simplex_indices(k - 1, p)
        .iter()
        .map(|b| b.iter().sum::<u32>() as usize)
        .collect();
    // one Jacobi table per |beta|
    let tables: Vec<Vec<Dual>> = (0..=p)
        .map(|m| scaled_jacobi(p - m, (2 * m + k - 1) as f64, xs[0], s))
        .collect();
    let mut out = Vec::new();
    for (psi, &m) in lower.iter().zip(&lower_deg) {
        for a in 0..=(p - m) {
            out.push(tables[m][a] * *psi);
        }
    }
    out
}

/// Orthonormal basis of `P_p^d` on a domain.
#[derive(Debug, Clone)]
pub struct Basis {
    domain: Domain,
    degree: usize,
    factor_indices: Vec<Vec<Vec<u32>>>,
    /// For every basis function, its position in each factor's list.
    terms: Vec<Vec<usize>>,
    multi_indices: Vec<Vec<u32>>,
}

impl Basis {
    pub fn new(domain: &Domain, degree: usize) -> Self {
        assert!(domain.dim() <= MAX_DIM, "dimension above {MAX_DIM} unsupported");
        let factor_indices: Vec<Vec<Vec<u32>>> = domain
            .factors()
            .iter()
            .map(|&f| factor_indices(f, degree))
            .collect();
        let mut combos: Vec<(Vec<u32>, Vec<usize>)> = vec![(vec![], vec![])];
        for list in &factor_indices {
            let mut next = Vec::new();
            for (idx, pos) in &combos {
                let used: u32 = idx.iter().sum();
                for (j, local) in list.iter().enumerate() {
                    if used + local.iter().sum::<u32>() <= degree as u32 {
                        let mut i2 = idx.clone();
                        i2.extend(local.iter().copied());
                        let mut p2 = pos.clone();
                        p2.push(j);
                        next.push((i2, p2));
                    }
                }
            }
            combos = next;
        }
        combos.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        let (multi_indices, terms) = combos.into_iter().unzip();
        Basis {
            domain: domain.clone(),
            degree,
            factor_indices,
            terms,
            multi_indices,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn size(&self) -> usize {
        self.terms.len()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Multi-indices labelling the basis functions, in evaluation order.
    pub fn multi_indices(&self) -> &[Vec<u32>] {
        &self.multi_indices
    }

    pub(crate) fn eval_duals(&self, x: &[f64]) -> Vec<Dual> {
        let d = self.dim();
        assert_eq!(x.len(), d);
        let xs: Vec<Dual> = x.iter().enumerate().map(|(i, &v)| Dual::variable(v, i)).collect();
        let mut offset = 0;
        let mut factor_vals = Vec::with_capacity(self.factor_indices.len());
        for (f, idx) in self.domain.factors().iter().zip(&self.factor_indices) {
            let k = f.dim();
            let local = &xs[offset..offset + k];
            let vals = match f {
                Factor::Cube(_) => eval_cube(k, local, self.degree, idx),
                Factor::Simplex(_) => eval_simplex(k, local, Dual::constant(1.0), self.degree),
            };
            debug_assert_eq!(vals.len(), idx.len());
            factor_vals.push(vals);
            offset += k;
        }
        self.terms
            .iter()
            .map(|pos| {
                pos.iter()
                    .enumerate()
                    .fold(Dual::constant(1.0), |acc, (f, &j)| acc * factor_vals[f][j])
            })
            .collect()
    }

    /// `Phi(x)`, the vector of all basis functions at `x`.
    pub fn eval(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.size(), self.eval_duals(x).into_iter().map(|v| v.v))
    }

    /// `M x d` matrix whose row `i` is the gradient of basis function `i`.
    pub fn eval_gradient(&self, x: &[f64]) -> DMatrix<f64> {
        let vals = self.eval_duals(x);
        DMatrix::from_fn(self.size(), self.dim(), |i, j| vals[i].g[j])
    }

    /// Exact moments `int phi_i`: `sqrt(vol)` for the constant, zero otherwise.
    pub fn moment_vector(&self) -> DVector<f64> {
        let mut b = DVector::zeros(self.size());
        b[0] = self.domain.volume().sqrt();
        b
    }
}

/// Exact integral of the monomial `x^alpha` over the domain.
pub fn monomial_moment(domain: &Domain, alpha: &[u32]) -> f64 {
    assert_eq!(alpha.len(), domain.dim());
    let mut offset = 0;
    let mut total = 1.0;
    for f in domain.factors() {
        let k = f.dim();
        let a = &alpha[offset..offset + k];
        total *= match f {
            Factor::Cube(_) => a.iter().map(|&ai| 1.0 / (ai as f64 + 1.0)).product(),
            Factor::Simplex(_) => (0..k)
                .map(|i| {
                    let tail: u32 = a[i..].iter().sum();
                    1.0 / (tail as f64 + (k - i) as f64)
                })
                .product::<f64>(),
        };
        offset += k;
    }
    total
}

/// `C(n, k)` as a float-free integer.
pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
