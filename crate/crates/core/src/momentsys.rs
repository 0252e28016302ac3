//! The moment equations `f(z) = Phi(x) w - b`, their Jacobian, and the LQ
//! factorization used to split Newton steps into a minimum-norm part and a
//! null-space part.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{Domain, PackedVector};
use crate::orthobasis::Basis;
use crate::{Error, Result};

/// Relative pivot size below which the Jacobian is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MomentSystem {
    basis: Basis,
    moments: DVector<f64>,
}

impl MomentSystem {
    pub fn new(domain: &Domain, degree: usize) -> Self {
        let basis = Basis::new(domain, degree);
        let moments = basis.moment_vector();
        MomentSystem { basis, moments }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn domain(&self) -> &Domain {
        self.basis.domain()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    /// Number of equations `M`.
    pub fn num_equations(&self) -> usize {
        self.basis.size()
    }

    pub fn moments(&self) -> &DVector<f64> {
        &self.moments
    }

    /// `sum_k Phi(x_k) w_k - b`.
    pub fn residual(&self, z: &PackedVector) -> DVector<f64> {
        let mut r = -self.moments.clone();
        for k in 0..z.num_nodes() {
            r += self.basis.eval(z.node(k)) * z.weight(k);
        }
        r
    }

    /// Residual and the `M x N` Jacobian in one pass over the nodes.
    pub fn residual_and_jacobian(&self, z: &PackedVector) -> (DVector<f64>, DMatrix<f64>) {
        let m = self.num_equations();
        let d = z.dim();
        let mut r = -self.moments.clone();
        let mut jac = DMatrix::zeros(m, z.len());
        for k in 0..z.num_nodes() {
            let w = z.weight(k);
            let vals = self.basis.eval_duals(z.node(k));
            let base = k * (d + 1);
            for (i, v) in vals.iter().enumerate() {
                r[i] += v.v * w;
                for j in 0..d {
                    jac[(i, base + j)] = w * v.g[j];
                }
                jac[(i, base + d)] = v.v;
            }
        }
        (r, jac)
    }

    pub fn jacobian(&self, z: &PackedVector) -> DMatrix<f64> {
        self.residual_and_jacobian(z).1
    }
}

/// `J = L Q` with `L` lower triangular and `Q` having orthonormal rows. In
/// the full form, `Qhat` completes `Q` to an orthogonal matrix and its rows
/// span `Null(J)`.
#[derive(Debug, Clone)]
pub struct LqFactors {
    pub l: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub qhat: Option<DMatrix<f64>>,
}

/// Householder QR of `J^T`, kept in compact form.
struct Householder {
    /// Reflector vectors below the diagonal, `R` on and above it.
    packed: DMatrix<f64>,
    tau: Vec<f64>,
}

impl Householder {
    fn new(jt: DMatrix<f64>) -> Self {
        let (n, m) = jt.shape();
        let mut a = jt;
        let mut tau = vec![0.0; m];
        for j in 0..m {
            let norm = (j..n).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let x0 = a[(j, j)];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            // v = x - alpha e1, normalized so v_0 = 1
            let v0 = x0 - alpha;
            for i in j + 1..n {
                a[(i, j)] /= v0;
            }
            tau[j] = -v0 / alpha;
            a[(j, j)] = alpha;
            for c in j + 1..m {
                let mut s = a[(j, c)];
                for i in j + 1..n {
                    s += a[(i, j)] * a[(i, c)];
                }
                s *= tau[j];
                a[(j, c)] -= s;
                for i in j + 1..n {
                    let vij = a[(i, j)];
                    a[(i, c)] -= s * vij;
                }
            }
        }
        Householder { packed: a, tau }
    }

    /// Applies `H_1 H_2 ... H_m` to the columns of `x` (forms `Q_full x`).
    fn apply_q(&self, x: &mut DMatrix<f64>) {
        let (n, m) = self.packed.shape();
        for j in (0..m).rev() {
            if self.tau[j] == 0.0 {
                continue;
            }
            for c in 0..x.ncols() {
                let mut s = x[(j, c)];
                for i in j + 1..n {
                    s += self.packed[(i, j)] * x[(i, c)];
                }
                s *= self.tau[j];
                x[(j, c)] -= s;
                for i in j + 1..n {
                    x[(i, c)] -= s * self.packed[(i, j)];
                }
            }
        }
    }
}

fn factor(jac: &DMatrix<f64>, full: bool) -> Result<LqFactors> {
    let (m, n) = jac.shape();
    assert!(m <= n, "LQ needs at least as many unknowns as equations");
    let hh = Householder::new(jac.transpose());
    let l = DMatrix::from_fn(m, m, |i, j| if j <= i { hh.packed[(j, i)] } else { 0.0 });
    let max = (0..m).map(|i| l[(i, i)].abs()).fold(0.0, f64::max);
    for i in 0..m {
        let pivot = l[(i, i)].abs();
        if pivot.is_nan() || pivot < RANK_TOL * max || max == 0.0 {
            return Err(Error::RankDeficient { pivot, max });
        }
    }
    let cols = if full { n } else { m };
    let mut qfull = DMatrix::from_fn(n, cols, |i, j| if i == j { 1.0 } else { 0.0 });
    hh.apply_q(&mut qfull);
    let q = qfull.columns(0, m).transpose();
    let qhat = full.then(|| qfull.columns(m, n - m).transpose());
    Ok(LqFactors { l, q, qhat })
}

/// Economy LQ: `L` is `M x M`, `Q` is `M x N`.
pub fn factor_economy(jac: &DMatrix<f64>) -> Result<LqFactors> {
    factor(jac, false)
}

/// Full LQ, additionally returning the `(N - M) x N` null-space basis.
pub fn factor_full(jac: &DMatrix<f64>) -> Result<LqFactors> {
    factor(jac, true)
}

/// `dz_f = -Q^T L^{-1} f` (minimum-norm solution of `J dz = -f`) and
/// `dz_g = -(I - Q^T Q) g` (projection of `-g` onto `Null(J)`).
pub fn newton_components(
    factors: &LqFactors,
    f: &DVector<f64>,
    g: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let y = factors
        .l
        .solve_lower_triangular(f)
        .expect("L has nonzero diagonal after the rank check");
    let dz_f = -factors.q.tr_mul(&y);
    let qg = &factors.q * g;
    let dz_g = factors.q.tr_mul(&qg) - g;
    (dz_f, dz_g)
}
