//! Cubature rules, packing to and from the unknown vector of the moment
//! equations, and exactness checks.

use nalgebra::DVector;

use crate::geometry::{Domain, PackedVector};
use crate::orthobasis::{binomial, Basis};
use crate::{Error, Result};

fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Relative residual below which a rule counts as solving the moment
/// equations.
pub const VERIFY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CubatureRule {
    domain: Domain,
    degree: usize,
    /// Row-major `n x d`.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CubatureRule {
    pub fn new(domain: Domain, degree: usize, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let d = domain.dim();
        if nodes.len() != weights.len() * d {
            return Err(Error::DimensionMismatch {
                expected: weights.len() * d,
                got: nodes.len(),
            });
        }
        Ok(CubatureRule {
            domain,
            degree,
            nodes,
            weights,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn num_nodes(&self) -> usize {
        self.weights.len()
    }

    pub fn node(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.nodes[k * d..(k + 1) * d]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks(self.dim())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_sum(&self) -> f64 {
        neumaier_sum(self.weights.iter().copied())
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }

    /// `sum_k f(x_k) w_k`, with compensated summation so that large tensor
    /// rules keep their accuracy.
    pub fn apply<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        neumaier_sum(self.nodes().zip(&self.weights).map(|(x, &w)| f(x) * w))
    }

    pub fn pack(&self) -> PackedVector {
        let d = self.dim();
        let data: Vec<f64> = self
            .nodes()
            .zip(&self.weights)
            .flat_map(|(x, &w)| x.iter().copied().chain(std::iter::once(w)))
            .collect();
        PackedVector::new(DVector::from_vec(data), d).expect("packed length is a multiple of d + 1")
    }

    /// Inverse of [`CubatureRule::pack`]. Does not check positivity or
    /// feasibility.
    pub fn unpack(z: &DVector<f64>, domain: &Domain, degree: usize) -> Result<Self> {
        let packed = PackedVector::new(z.clone(), domain.dim())?;
        Ok(Self::from_packed(&packed, domain, degree))
    }

    pub fn from_packed(z: &PackedVector, domain: &Domain, degree: usize) -> Self {
        let n = z.num_nodes();
        let nodes = (0..n).flat_map(|k| z.node(k).iter().copied()).collect();
        let weights = (0..n).map(|k| z.weight(k)).collect();
        CubatureRule {
            domain: domain.clone(),
            degree,
            nodes,
            weights,
        }
    }

    /// Checks the moment equations against `basis` and the positivity and
    /// interiority of the rule.
    pub fn verify(&self, basis: &Basis) -> VerifyReport {
        assert_eq!(basis.domain(), &self.domain, "basis and rule domains differ");
        let mut r = -basis.moment_vector();
        for (x, &w) in self.nodes().zip(&self.weights) {
            r += basis.eval(x) * w;
        }
        let c = self.domain.constraints();
        let min_weight = self.weights.iter().copied().fold(f64::INFINITY, f64::min);
        let min_slack = self.nodes().map(|x| c.min_slack(x)).fold(f64::INFINITY, f64::min);
        VerifyReport {
            residual_norm: r.norm(),
            moment_norm: self.domain.volume().sqrt(),
            min_weight,
            min_slack,
            weight_sum_error: self.weight_sum() - self.domain.volume(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyReport {
    /// `||Phi(x) w - b||_2`.
    pub residual_norm: f64,
    /// `||b||_2 = sqrt(vol)`.
    pub moment_norm: f64,
    pub min_weight: f64,
    pub min_slack: f64,
    pub weight_sum_error: f64,
}

impl VerifyReport {
    pub fn relative_residual(&self) -> f64 {
        self.residual_norm / self.moment_norm
    }

    pub fn max_weight_violation(&self) -> f64 {
        (-self.min_weight).max(0.0)
    }

    pub fn max_constraint_violation(&self) -> f64 {
        (-self.min_slack).max(0.0)
    }

    /// Positive weights and interior nodes.
    pub fn is_pi(&self) -> bool {
        self.min_weight > 0.0 && self.min_slack > 0.0
    }

    pub fn is_exact(&self) -> bool {
        self.relative_residual() <= VERIFY_TOL
    }

    pub fn passes(&self) -> bool {
        self.is_pi() && self.is_exact()
    }
}

/// `ceil(dim P_p^d / (d + 1))`.
pub fn optimal_node_count(degree: usize, d: usize) -> usize {
    binomial(degree + d, d).div_ceil(d + 1)
}

pub fn efficiency(n_opt: usize, n: usize) -> f64 {
    n_opt as f64 / n as f64
}
