//! Initial rules from one-dimensional Gauss rules: tensor products across
//! Cartesian factors and Duffy lifting `C_1 x T_d -> T_{d+1}`, optionally
//! with node elimination after every intermediate construction.

use log::info;

use crate::eliminator::{eliminate, EliminationReport, EliminatorConfig};
use crate::geometry::{Domain, Factor};
use crate::momentsys::MomentSystem;
use crate::rules::{optimal_node_count, CubatureRule};
use crate::univariate::{gauss_rule_01, points_for_degree, Rule1D};
use crate::{Error, Result};

/// Product rule on `a.domain() x b.domain()`: all node pairs, weights
/// multiplied.
pub fn tensor_product(a: &CubatureRule, b: &CubatureRule) -> CubatureRule {
    let domain = a.domain().product(b.domain());
    let mut nodes = Vec::with_capacity(a.num_nodes() * b.num_nodes() * domain.dim());
    let mut weights = Vec::with_capacity(a.num_nodes() * b.num_nodes());
    for (x, &wx) in a.nodes().zip(a.weights()) {
        for (y, &wy) in b.nodes().zip(b.weights()) {
            nodes.extend_from_slice(x);
            nodes.extend_from_slice(y);
            weights.push(wx * wy);
        }
    }
    let degree = a.degree().min(b.degree());
    CubatureRule::new(domain, degree, nodes, weights).expect("tensor product shapes agree")
}

/// Lifts a rule on `T_d` to `T_{d+1}` through `(xi, eta) -> (xi, xi * eta)`.
/// `xi_rule` must carry the Jacobian weight `xi^d`.
pub fn duffy_lift(xi_rule: &Rule1D, inner: &CubatureRule) -> Result<CubatureRule> {
    let d = inner.dim();
    let simplex_like = matches!(inner.domain().factors(), [Factor::Simplex(_)] | [Factor::Cube(1)]);
    assert!(simplex_like, "Duffy lifting needs a simplex rule, got {}", inner.domain());
    if xi_rule.weight_exponent as usize != d {
        return Err(Error::WeightExponentMismatch {
            expected: d as u32,
            got: xi_rule.weight_exponent,
        });
    }
    let mut nodes = Vec::with_capacity(xi_rule.len() * inner.num_nodes() * (d + 1));
    let mut weights = Vec::with_capacity(xi_rule.len() * inner.num_nodes());
    for (&xi, &wx) in xi_rule.nodes.iter().zip(&xi_rule.weights) {
        for (eta, &wy) in inner.nodes().zip(inner.weights()) {
            nodes.push(xi);
            nodes.extend(eta.iter().map(|e| xi * e));
            weights.push(wx * wy);
        }
    }
    let degree = xi_rule.degree().min(inner.degree());
    CubatureRule::new(Domain::simplex(d + 1), degree, nodes, weights)
}

/// Gauss-Legendre rule of degree `>= p` on `[0,1]`, as a rule on `domain`
/// (which must be one-dimensional).
fn interval_rule(p: usize, domain: Domain) -> Result<CubatureRule> {
    let r = gauss_rule_01(points_for_degree(p), 0)?;
    CubatureRule::new(domain, r.degree(), r.nodes, r.weights)
}

/// Rounds even degrees up to the next odd one.
pub fn odd_degree(p: usize) -> usize {
    if p.is_multiple_of(2) {
        p + 1
    } else {
        p
    }
}

/// Node count of the plain tensor/Duffy seed: `(floor(p/2) + 1)^d`.
pub fn naive_seed_count(domain: &Domain, p: usize) -> usize {
    points_for_degree(odd_degree(p)).pow(domain.dim() as u32)
}

/// One construction step of a seed plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedStep {
    /// Gauss-Legendre rule on the interval.
    Interval,
    /// Tensor the current rule with the interval rule.
    TensorWithInterval,
    /// Lift the current simplex rule one dimension.
    DuffyLift,
    /// Tensor the current rule with a separately built rule on `Domain`.
    TensorPair(Domain),
    Eliminate,
}

/// Ordered construction steps for `target`, following the incremental
/// scheme: cubes grow one interval at a time, simplices by Duffy lifting,
/// and further factors are tensored on. With `eliminate_intermediate`, an
/// elimination pass follows every construction except the last.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedPlan {
    pub target: Domain,
    pub steps: Vec<SeedStep>,
}

impl SeedPlan {
    pub fn new(target: &Domain, eliminate_intermediate: bool) -> Self {
        let mut steps = Vec::new();
        let mut first = true;
        for f in target.factors() {
            let mut factor_steps = factor_steps(*f);
            if first {
                first = false;
            } else {
                // tensor on the factor, built separately unless it is a cube,
                // which is added one interval at a time
                factor_steps = match f {
                    Factor::Cube(k) => vec![SeedStep::TensorWithInterval; *k],
                    Factor::Simplex(_) => vec![SeedStep::TensorPair(Domain::new(vec![*f]).unwrap())],
                };
            }
            steps.extend(factor_steps);
        }
        if eliminate_intermediate {
            let mut with_ne = Vec::with_capacity(2 * steps.len());
            let last = steps.len() - 1;
            for (i, s) in steps.into_iter().enumerate() {
                let construct = !matches!(s, SeedStep::Interval);
                with_ne.push(s);
                if construct && i != last {
                    with_ne.push(SeedStep::Eliminate);
                }
            }
            steps = with_ne;
        }
        SeedPlan {
            target: target.clone(),
            steps,
        }
    }
}

fn factor_steps(f: Factor) -> Vec<SeedStep> {
    let mut steps = vec![SeedStep::Interval];
    match f {
        Factor::Cube(k) => steps.extend(std::iter::repeat_n(SeedStep::TensorWithInterval, k - 1)),
        Factor::Simplex(k) => steps.extend(std::iter::repeat_n(SeedStep::DuffyLift, k - 1)),
    }
    steps
}

/// Builds a seed of degree `p` on `target` by executing its [`SeedPlan`].
/// Intermediate eliminations use `config`.
pub fn build_seed(
    target: &Domain,
    p: usize,
    eliminate_intermediate: bool,
    config: &EliminatorConfig,
) -> Result<CubatureRule> {
    let p = odd_degree(p);
    let plan = SeedPlan::new(target, eliminate_intermediate);
    let first_is_simplex = matches!(target.factors()[0], Factor::Simplex(_));
    let mut rule: Option<CubatureRule> = None;
    for step in &plan.steps {
        let next = match step {
            SeedStep::Interval => {
                let dom = if first_is_simplex { Domain::simplex(1) } else { Domain::cube(1) };
                interval_rule(p, dom)?
            }
            SeedStep::TensorWithInterval => {
                tensor_product(rule.as_ref().unwrap(), &interval_rule(p, Domain::cube(1))?)
            }
            SeedStep::DuffyLift => {
                let inner = rule.as_ref().unwrap();
                let xi = gauss_rule_01(points_for_degree(p), inner.dim() as u32)?;
                duffy_lift(&xi, inner)?
            }
            SeedStep::TensorPair(dom) => {
                let other = build_seed(dom, p, eliminate_intermediate, config)?;
                let other = if eliminate_intermediate {
                    run_elimination(other, p, config).final_rule
                } else {
                    other
                };
                tensor_product(rule.as_ref().unwrap(), &other)
            }
            SeedStep::Eliminate => run_elimination(rule.take().unwrap(), p, config).final_rule,
        };
        rule = Some(next.with_degree(p));
    }
    let rule = rule.expect("a plan has at least one step");
    debug_assert_eq!(rule.domain(), target);
    Ok(rule)
}

fn run_elimination(seed: CubatureRule, p: usize, config: &EliminatorConfig) -> EliminationReport {
    let sys = MomentSystem::new(seed.domain(), p);
    let report = eliminate(&sys, &seed, config);
    info!(
        "intermediate domain={} n_seed={} n_final={} stop={:?}",
        seed.domain(),
        seed.num_nodes(),
        report.final_rule.num_nodes(),
        report.stop_reason
    );
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateOptions {
    pub intermediate_ne: bool,
    pub eliminator: EliminatorConfig,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            intermediate_ne: true,
            eliminator: EliminatorConfig::default(),
        }
    }
}

/// Output of the full pipeline.
#[derive(Debug, Clone)]
pub struct Generated {
    pub degree: usize,
    /// Node count of the plain tensor/Duffy seed.
    pub n_tp: usize,
    /// The seed elimination actually started from.
    pub seed: CubatureRule,
    pub report: EliminationReport,
    pub rule: CubatureRule,
    pub n_opt: usize,
}

impl Generated {
    pub fn n_elim(&self) -> usize {
        self.rule.num_nodes()
    }

    pub fn efficiency(&self) -> f64 {
        crate::rules::efficiency(self.n_opt, self.n_elim())
    }
}

/// Seed construction followed by node elimination on `domain` at degree `p`
/// (rounded up to odd).
pub fn generate(domain: &Domain, p: usize, options: &GenerateOptions) -> Result<Generated> {
    let p = odd_degree(p);
    let seed = build_seed(domain, p, options.intermediate_ne, &options.eliminator)?;
    let report = run_elimination(seed.clone(), p, &options.eliminator);
    Ok(Generated {
        degree: p,
        n_tp: naive_seed_count(domain, p),
        seed,
        rule: report.final_rule.clone(),
        report,
        n_opt: optimal_node_count(p, domain.dim()),
    })
}
