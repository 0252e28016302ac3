//! Min-max of a family of straight lines `m_k(t) = beta_k + t alpha_k` over
//! `t >= 0`, used to pick the barrier step length.

use nalgebra::DVector;

use crate::geometry::{LinearConstraints, PackedVector};
use crate::{Error, Result};

/// Largest admissible step parameter.
pub const T_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub beta: f64,
    pub alpha: f64,
}

impl Line {
    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        self.beta + t * self.alpha
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LineFamily {
    pub lines: Vec<Line>,
}

impl LineFamily {
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        LineFamily {
            lines: pairs.iter().map(|&(beta, alpha)| Line { beta, alpha }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Upper envelope `max_k m_k(t)`.
    pub fn envelope(&self, t: f64) -> f64 {
        self.lines.iter().map(|l| l.at(t)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Constraint lines for the update `z + dz_f + t dz_g`. A line value `<= 0`
/// means the corresponding face or weight constraint holds. Node `skip`
/// contributes no lines.
pub fn build_family(
    z: &PackedVector,
    dz_f: &DVector<f64>,
    dz_g: &DVector<f64>,
    constraints: &LinearConstraints,
    skip: Option<usize>,
) -> LineFamily {
    let d = z.dim();
    let n = z.num_nodes();
    let mut lines = Vec::with_capacity(n * (constraints.num_rows() + 1));
    let mut shifted = vec![0.0; d];
    for j in 0..n {
        if Some(j) == skip {
            continue;
        }
        let base = j * (d + 1);
        let x = z.node(j);
        for i in 0..d {
            shifted[i] = x[i] + dz_f[base + i];
        }
        let dxg = &dz_g.as_slice()[base..base + d];
        for l in 0..constraints.num_rows() {
            lines.push(Line {
                beta: -constraints.slack(l, &shifted),
                alpha: constraints.row_dot(l, dxg),
            });
        }
        lines.push(Line {
            beta: -(z.weight(j) + dz_f[base + d]),
            alpha: -dz_g[base + d],
        });
    }
    LineFamily { lines }
}

/// Result of [`minmax_t`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMax {
    pub t: f64,
    pub value: f64,
    /// Number of envelope segments walked.
    pub steps: usize,
}

/// Minimizes `max_k m_k(t)` over `t >= 0` by walking the upper envelope from
/// `t = 0` until its leading line has nonnegative slope.
pub fn minmax_t(family: &LineFamily) -> Result<MinMax> {
    let lines = &family.lines;
    assert!(!lines.is_empty(), "empty line family");
    let better = |a: &Line, b: &Line| a.beta > b.beta || (a.beta == b.beta && a.alpha > b.alpha);
    let mut k = 0;
    for (j, l) in lines.iter().enumerate() {
        if better(l, &lines[k]) {
            k = j;
        }
    }
    let mut t = 0.0;
    let mut steps = 0;
    while lines[k].alpha < 0.0 {
        let lead = lines[k];
        let mut next: Option<(usize, f64)> = None;
        for (j, l) in lines.iter().enumerate() {
            if l.alpha <= lead.alpha {
                continue;
            }
            let tj = ((l.beta - lead.beta) / (lead.alpha - l.alpha)).max(t);
            let take = match next {
                None => true,
                Some((i, ti)) => tj < ti || (tj == ti && l.alpha > lines[i].alpha),
            };
            if take {
                next = Some((j, tj));
            }
        }
        match next {
            Some((j, tj)) if tj <= T_MAX => {
                t = tj;
                k = j;
                steps += 1;
            }
            _ => return Err(Error::Unbounded),
        }
    }
    Ok(MinMax {
        t,
        value: family.envelope(t),
        steps,
    })
}
