//! Node elimination: repeatedly drive one weight to zero along the tangent
//! space of the solution manifold (predictor), drop that node, and return to
//! the manifold with the corrector.

use log::{debug, info};
use nalgebra::DVector;

use crate::corrector::{correct, CorrectorConfig, CorrectorStatus};
use crate::geometry::{barrier_gradient, boundary_margin, LinearConstraints, PackedVector};
use crate::momentsys::{factor_full, MomentSystem};
use crate::rules::{optimal_node_count, CubatureRule};
use crate::tline::{build_family, minmax_t};
use crate::{Error, Result};

/// Relative column norm below which a weight is treated as not movable
/// within the tangent space.
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EliminatorConfig {
    pub corrector: CorrectorConfig,
    /// Corrector runs per step; `None` means `min(n, 16)`.
    pub max_candidates: Option<usize>,
}

impl EliminatorConfig {
    fn candidates_for(&self, n: usize) -> usize {
        self.max_candidates.unwrap_or(16).min(n)
    }
}

/// A predicted point on the tangent space with weight `node` set to zero.
#[derive(Debug, Clone)]
pub struct PredictorCandidate {
    pub node: usize,
    pub dz: DVector<f64>,
    pub t: f64,
    pub predicted_z: PackedVector,
    /// The predicted point satisfies every constraint except node's own.
    pub feasible: bool,
    pub step_norm: f64,
}

/// Predictors for every node of `z` whose weight can be moved in the
/// tangent space. Nodes whose weight column in the null-space basis
/// vanishes are skipped.
pub fn predictors(
    sys: &MomentSystem,
    z: &PackedVector,
    constraints: &LinearConstraints,
) -> Result<Vec<PredictorCandidate>> {
    let jac = sys.jacobian(z);
    let fac = factor_full(&jac)?;
    let qhat = fac.qhat.expect("full factorization carries the null-space basis");
    let d = z.dim();
    let n = z.num_nodes();

    let g_all = barrier_gradient(z, constraints, None)?;
    let ghat_all = &qhat * &g_all;
    let max_col = (0..qhat.ncols())
        .map(|c| qhat.column(c).norm())
        .fold(0.0, f64::max);

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let wk = z.weight_index(k);
        let m = qhat.column(wk).into_owned();
        let m2 = m.norm_squared();
        if m2.sqrt() <= DEGENERATE_TOL * max_col {
            debug!("{}", Error::DegenerateDirection { node: k });
            continue;
        }
        // barrier gradient without node k
        let base = k * (d + 1);
        let mut ghat = ghat_all.clone();
        for i in 0..=d {
            ghat -= qhat.column(base + i) * g_all[base + i];
        }
        let dy_f = &m * (-z.weight(k) / m2);
        let dy_g = &m * (m.dot(&ghat) / m2) - &ghat;
        let dz_f = qhat.tr_mul(&dy_f);
        let dz_g = qhat.tr_mul(&dy_g);

        let family = build_family(z, &dz_f, &dz_g, constraints, Some(k));
        let (t, value) = match minmax_t(&family) {
            Ok(r) => (r.t, r.value),
            Err(_) => (0.0, family.envelope(0.0)),
        };
        let dz = dz_f + dz_g * t;
        let predicted_z = z.shifted(&dz, 1.0);
        out.push(PredictorCandidate {
            node: k,
            step_norm: dz.norm(),
            dz,
            t,
            predicted_z,
            feasible: value < 0.0,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ReachedOptimal,
    NoFeasiblePredictor,
    AllCandidatesFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationStep {
    pub n_before: usize,
    pub feasible_predictors: usize,
    pub candidates_tried: usize,
    pub winner: Option<usize>,
    pub corrector_iterations: usize,
    pub margin: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct EliminationReport {
    pub steps: Vec<EliminationStep>,
    pub final_rule: CubatureRule,
    pub stop_reason: StopReason,
}

impl EliminationReport {
    /// Number of nodes removed.
    pub fn eliminated(&self) -> usize {
        self.steps.iter().filter(|s| s.winner.is_some()).count()
    }
}

/// Runs node elimination on a verified seed rule until the optimal node
/// count is reached or no candidate survives correction.
pub fn eliminate(
    sys: &MomentSystem,
    seed: &CubatureRule,
    config: &EliminatorConfig,
) -> EliminationReport {
    let domain = sys.domain().clone();
    let degree = sys.degree();
    let constraints = domain.constraints();
    let m = sys.num_equations();
    let n_opt = optimal_node_count(degree, domain.dim());
    let mut z = seed.pack();
    let mut steps = Vec::new();

    let stop_reason = loop {
        let n = z.num_nodes();
        if n <= n_opt || z.len() <= m {
            break StopReason::ReachedOptimal;
        }
        let step_no = steps.len() + 1;
        let mut cands = match predictors(sys, &z, &constraints) {
            Ok(c) => c,
            Err(e) => {
                info!("step={step_no} n={n} predictor_error=\"{e}\"");
                break StopReason::NoFeasiblePredictor;
            }
        };
        cands.retain(|c| c.feasible);
        cands.sort_by(|a, b| a.step_norm.total_cmp(&b.step_norm).then(a.node.cmp(&b.node)));
        let feasible = cands.len();
        if cands.is_empty() {
            steps.push(EliminationStep {
                n_before: n,
                feasible_predictors: 0,
                candidates_tried: 0,
                winner: None,
                corrector_iterations: 0,
                margin: boundary_margin(&z, &constraints),
                residual: sys.residual(&z).norm(),
            });
            break StopReason::NoFeasiblePredictor;
        }

        let budget = config.candidates_for(n);
        let mut best: Option<(f64, usize, PackedVector, usize, f64)> = None;
        let mut tried = 0;
        for cand in cands.iter().take(budget) {
            tried += 1;
            let start = cand.predicted_z.without_node(cand.node);
            let out = correct(sys, &start, &constraints, &config.corrector, None);
            let margin = boundary_margin(&out.z, &constraints);
            info!(
                "step={step_no} n={n} candidate={} status={:?} iterations={} residual={:.3e} margin={:.3e}",
                cand.node, out.status, out.iterations, out.final_residual, margin
            );
            if out.status != CorrectorStatus::Converged {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bm, bk, ..)) => margin > *bm || (margin == *bm && cand.node < *bk),
            };
            if better {
                best = Some((margin, cand.node, out.z, out.iterations, out.final_residual));
            }
        }

        match best {
            Some((margin, node, next, iterations, residual)) => {
                steps.push(EliminationStep {
                    n_before: n,
                    feasible_predictors: feasible,
                    candidates_tried: tried,
                    winner: Some(node),
                    corrector_iterations: iterations,
                    margin,
                    residual,
                });
                info!("step={step_no} n={} removed={node} margin={margin:.3e}", n - 1);
                z = next;
            }
            None => {
                steps.push(EliminationStep {
                    n_before: n,
                    feasible_predictors: feasible,
                    candidates_tried: tried,
                    winner: None,
                    corrector_iterations: 0,
                    margin: boundary_margin(&z, &constraints),
                    residual: sys.residual(&z).norm(),
                });
                break StopReason::AllCandidatesFailed;
            }
        }
    };

    EliminationReport {
        steps,
        final_rule: CubatureRule::from_packed(&z, &domain, degree),
        stop_reason,
    }
}
