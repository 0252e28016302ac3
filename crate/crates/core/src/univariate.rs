//! Gauss rules on `[0,1]` for the weight `xi^m`.
//!
//! Nodes and weights come from the Golub-Welsch eigenproblem for the Jacobi
//! weight `(1 + t)^m` on `[-1,1]`, then are mapped affinely to `[0,1]`. Nodes
//! are polished with a few Newton steps on the three-term recurrence, and the
//! weights are recomputed from the Christoffel numbers at the polished nodes.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

/// A one-dimensional Gauss rule for `int_0^1 f(xi) xi^m dxi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub weight_exponent: u32,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Polynomial degree of exactness, `2q - 1`.
    pub fn degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    /// `sum_k f(x_k) w_k`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).sum()
    }
}

/// Number of points needed for exactness of degree `p`.
pub fn points_for_degree(p: usize) -> usize {
    p / 2 + 1
}

/// Orthonormal recurrence for weight `xi^m` on `[0,1]`: returns the diagonal
/// `a_n` and off-diagonal `b_n` of the Jacobi matrix.
fn recurrence(q: usize, m: f64) -> (Vec<f64>, Vec<f64>) {
    // Jacobi (alpha, beta) = (0, m) on [-1, 1], mapped by t = 2 xi - 1
    let diag: Vec<f64> = (0..q)
        .map(|n| {
            let n = n as f64;
            let s = 2.0 * n + m;
            let a = if n == 0.0 { m / (m + 2.0) } else { m * m / (s * (s + 2.0)) };
            (a + 1.0) / 2.0
        })
        .collect();
    let off: Vec<f64> = (1..q)
        .map(|n| {
            let n = n as f64;
            let s = 2.0 * n + m;
            let b2 = 4.0 * n * n * (n + m) * (n + m) / (s * s * (s + 1.0) * (s - 1.0));
            b2.sqrt() / 2.0
        })
        .collect();
    (diag, off)
}

/// Orthonormal polynomial values `p_{q-1}(x)`, `p_q(x)` and `p_q'(x)` from the
/// recurrence, with `p_0 = 1/sqrt(mu_0)`.
fn orthonormal_tail(x: f64, diag: &[f64], off: &[f64], b_last: f64, mu0: f64) -> (f64, f64, f64) {
    let q = diag.len();
    let mut p_prev = 0.0;
    let mut p = 1.0 / mu0.sqrt();
    let mut dp_prev = 0.0;
    let mut dp = 0.0;
    for n in 0..q {
        let b_n = if n + 1 < q { off[n] } else { b_last };
        let b_nm1 = if n == 0 { 0.0 } else { off[n - 1] };
        let p_next = ((x - diag[n]) * p - b_nm1 * p_prev) / b_n;
        let dp_next = (p + (x - diag[n]) * dp - b_nm1 * dp_prev) / b_n;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p_prev, p, dp)
}

/// The `q`-point Gauss rule on `[0,1]` for the weight `xi^m`.
pub fn gauss_rule_01(q: usize, m: u32) -> Result<Rule1D> {
    assert!(q >= 1, "a Gauss rule needs at least one point");
    let mf = m as f64;
    let (diag, off) = recurrence(q + 1, mf);
    let (diag, b_last) = (&diag[..q], off[q - 1]);
    let off = &off[..q - 1];
    let mu0 = 1.0 / (mf + 1.0);

    let jac = DMatrix::from_fn(q, q, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::try_new(jac, f64::EPSILON, 10_000).ok_or(Error::ConvergenceFailure)?;
    let mut pairs: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Newton polish on p_q and Christoffel weights w = -b_q / (p_q'(x) p_{q+1}(x)),
    // written here as 1 / sum_{n<q} p_n(x)^2.
    for (x, w) in pairs.iter_mut() {
        for _ in 0..3 {
            let (_, p, dp) = orthonormal_tail(*x, diag, off, b_last, mu0);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            *x -= step;
            if step.abs() <= 1e-17 {
                break;
            }
        }
        let mut p_prev = 0.0;
        let mut p = 1.0 / mu0.sqrt();
        let mut sum = p * p;
        for n in 0..q - 1 {
            let b_nm1 = if n == 0 { 0.0 } else { off[n - 1] };
            let next = ((*x - diag[n]) * p - b_nm1 * p_prev) / off[n];
            p_prev = p;
            p = next;
            sum += p * p;
        }
        *w = 1.0 / sum;
    }
    if pairs.iter().any(|&(x, w)| !(x > 0.0 && x < 1.0 && w > 0.0)) {
        return Err(Error::ConvergenceFailure);
    }
    Ok(Rule1D {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        weight_exponent: m,
    })
}
