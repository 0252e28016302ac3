//! Integration domains, their half-space descriptions, and the logarithmic
//! barrier on packed node/weight vectors.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// An atomic factor of a product domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    /// The unit cube `[0,1]^k`.
    Cube(usize),
    /// The ordered simplex `0 <= x_k <= ... <= x_1 <= 1`.
    Simplex(usize),
}

impl Factor {
    pub fn dim(self) -> usize {
        match self {
            Factor::Cube(k) | Factor::Simplex(k) => k,
        }
    }

    pub fn volume(self) -> f64 {
        match self {
            Factor::Cube(_) => 1.0,
            Factor::Simplex(k) => 1.0 / (1..=k).map(|i| i as f64).product::<f64>(),
        }
    }

    /// Row-normalized constraints of this factor in its own coordinates.
    fn constraint_rows(self) -> Vec<(Vec<f64>, f64)> {
        let mut rows = Vec::new();
        match self {
            Factor::Cube(k) => {
                for i in 0..k {
                    let mut lo = vec![0.0; k];
                    lo[i] = -1.0;
                    rows.push((lo, 0.0));
                    let mut hi = vec![0.0; k];
                    hi[i] = 1.0;
                    rows.push((hi, 1.0));
                }
            }
            Factor::Simplex(k) => {
                let mut top = vec![0.0; k];
                top[0] = 1.0;
                rows.push((top, 1.0));
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..k - 1 {
                    let mut r = vec![0.0; k];
                    r[i] = -s;
                    r[i + 1] = s;
                    rows.push((r, 0.0));
                }
                let mut bottom = vec![0.0; k];
                bottom[k - 1] = -1.0;
                rows.push((bottom, 0.0));
            }
        }
        rows
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Cube(k) => write!(f, "C{k}"),
            Factor::Simplex(k) => write!(f, "T{k}"),
        }
    }
}

/// A Cartesian product of cubes and ordered simplices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain {
    factors: Vec<Factor>,
}

impl Domain {
    /// Adjacent cube factors are merged, so `C1xC1` and `C2` are the same
    /// domain.
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|f| f.dim() == 0) {
            return Err(Error::InvalidDomain(format!("{factors:?}")));
        }
        let mut merged: Vec<Factor> = Vec::with_capacity(factors.len());
        for f in factors {
            match (merged.last_mut(), f) {
                (Some(Factor::Cube(a)), Factor::Cube(b)) => *a += b,
                _ => merged.push(f),
            }
        }
        Ok(Domain { factors: merged })
    }

    pub fn cube(k: usize) -> Self {
        Domain::new(vec![Factor::Cube(k)]).expect("cube dimension must be positive")
    }

    pub fn simplex(k: usize) -> Self {
        Domain::new(vec![Factor::Simplex(k)]).expect("simplex dimension must be positive")
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }

    pub fn volume(&self) -> f64 {
        self.factors.iter().map(|f| f.volume()).product()
    }

    /// Canonical label, e.g. `T2xC1`.
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Product of `self` and `other`, with `self`'s coordinates first.
    pub fn product(&self, other: &Domain) -> Domain {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Domain::new(factors).expect("factors of valid domains are valid")
    }

    /// Half-space description `A x <= b` with unit-norm rows, factors stacked
    /// block-diagonally in order.
    pub fn constraints(&self) -> LinearConstraints {
        let d = self.dim();
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut offset = 0;
        for f in &self.factors {
            for (local, b) in f.constraint_rows() {
                let mut r = vec![0.0; d];
                r[offset..offset + f.dim()].copy_from_slice(&local);
                rows.push((r, b));
            }
            offset += f.dim();
        }
        let a = DMatrix::from_fn(rows.len(), d, |i, j| rows[i].0[j]);
        let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
        LinearConstraints { a, b }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDomain(s.to_string());
        let factors = s
            .trim()
            .to_ascii_uppercase()
            .split('X')
            .map(|tok| {
                let (kind, digits) = tok.split_at(tok.len().min(1));
                let k: usize = digits.parse().map_err(|_| bad())?;
                match kind {
                    "C" => Ok(Factor::Cube(k)),
                    "T" => Ok(Factor::Simplex(k)),
                    _ => Err(bad()),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Domain::new(factors).map_err(|_| bad())
    }
}

/// `A x <= b` with unit-norm rows, so slacks are Euclidean distances to the
/// supporting hyperplanes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraints {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LinearConstraints {
    pub fn num_rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// `b_l - a_l^T x` for row `l`.
    #[inline]
    pub fn slack(&self, l: usize, x: &[f64]) -> f64 {
        let mut s = self.b[l];
        for (j, xj) in x.iter().enumerate() {
            s -= self.a[(l, j)] * xj;
        }
        s
    }

    /// `a_l^T v` for row `l`.
    #[inline]
    pub fn row_dot(&self, l: usize, v: &[f64]) -> f64 {
        v.iter().enumerate().map(|(j, vj)| self.a[(l, j)] * vj).sum()
    }

    pub fn min_slack(&self, x: &[f64]) -> f64 {
        (0..self.num_rows())
            .map(|l| self.slack(l, x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.min_slack(x) >= 0.0
    }
}

/// Nodes and weights packed as `[x_1, w_1, x_2, w_2, ...]`, each block of
/// length `d + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedVector {
    z: DVector<f64>,
    dim: usize,
}

impl PackedVector {
    pub fn new(z: DVector<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || !z.len().is_multiple_of(dim + 1) {
            return Err(Error::DimensionMismatch {
                expected: dim + 1,
                got: z.len(),
            });
        }
        Ok(PackedVector { z, dim })
    }

    pub fn from_slice(z: &[f64], dim: usize) -> Result<Self> {
        Self::new(DVector::from_column_slice(z), dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.z.len() / (self.dim + 1)
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.z
    }

    pub fn block(&self, k: usize) -> &[f64] {
        let s = self.dim + 1;
        &self.z.as_slice()[k * s..(k + 1) * s]
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.block(k)[..self.dim]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.z[k * (self.dim + 1) + self.dim]
    }

    /// Index of weight `k` in the packed vector.
    pub fn weight_index(&self, k: usize) -> usize {
        k * (self.dim + 1) + self.dim
    }

    /// `self + alpha * dz`.
    pub fn shifted(&self, dz: &DVector<f64>, alpha: f64) -> PackedVector {
        PackedVector {
            z: &self.z + dz * alpha,
            dim: self.dim,
        }
    }

    /// Drops node `k`'s block.
    pub fn without_node(&self, k: usize) -> PackedVector {
        let s = self.dim + 1;
        let n = self.num_nodes();
        let data: Vec<f64> = (0..n)
            .filter(|&j| j != k)
            .flat_map(|j| self.block(j).iter().copied())
            .collect();
        debug_assert_eq!(data.len(), (n - 1) * s);
        PackedVector {
            z: DVector::from_vec(data),
            dim: self.dim,
        }
    }
}

/// Gradient of the barrier
/// `sum_j [ sum_l log(1/(b_l - a_l^T x_j)) + log(1/w_j) ]`, with node `skip`
/// left out of the sum.
pub fn barrier_gradient(
    z: &PackedVector,
    constraints: &LinearConstraints,
    skip: Option<usize>,
) -> Result<DVector<f64>> {
    let d = z.dim();
    let mut g = DVector::zeros(z.len());
    for j in 0..z.num_nodes() {
        if Some(j) == skip {
            continue;
        }
        let x = z.node(j);
        let base = j * (d + 1);
        for l in 0..constraints.num_rows() {
            let s = constraints.slack(l, x);
            if s <= 0.0 {
                return Err(Error::BoundaryContact { node: j, slack: s });
            }
            for i in 0..d {
                g[base + i] += constraints.a[(l, i)] / s;
            }
        }
        let w = z.weight(j);
        if w <= 0.0 {
            return Err(Error::BoundaryContact { node: j, slack: w });
        }
        g[base + d] = -1.0 / w;
    }
    Ok(g)
}

/// Smallest face distance or weight over all nodes. Positive iff every node
/// is strictly inside and every weight strictly positive.
pub fn boundary_margin(z: &PackedVector, constraints: &LinearConstraints) -> f64 {
    margin_excluding(z, constraints, None)
}

pub(crate) fn margin_excluding(
    z: &PackedVector,
    constraints: &LinearConstraints,
    skip: Option<usize>,
) -> f64 {
    (0..z.num_nodes())
        .filter(|&j| Some(j) != skip)
        .map(|j| constraints.min_slack(z.node(j)).min(z.weight(j)))
        .fold(f64::INFINITY, f64::min)
}
