//! Least-squares Newton corrector with barrier-steered steps.
//!
//! Each iteration takes the minimum-norm Newton step `dz_f` towards the
//! solution manifold plus `t` times the projected negative barrier gradient
//! `dz_g`, with `t` chosen by [`minmax_t`] to push the nearest constraint as
//! far away as possible. If even the best `t` leaves some constraint
//! violated, `dz_f` is damped and `t` is re-selected.

use crate::geometry::{barrier_gradient, margin_excluding, LinearConstraints, PackedVector};
use crate::momentsys::{factor_economy, newton_components, MomentSystem};
use crate::tline::{build_family, minmax_t};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectorConfig {
    /// Stop once `||f(z)||_2 <= tol`.
    pub tol: f64,
    pub max_iters: usize,
    pub damping_factor: f64,
    pub max_damping_steps: usize,
    /// When false, `t` is fixed to zero (plain Gauss-Newton with damping).
    pub barrier: bool,
}

impl Default for CorrectorConfig {
    fn default() -> Self {
        CorrectorConfig {
            tol: 1e-14,
            max_iters: 15,
            damping_factor: 0.5,
            max_damping_steps: 20,
            barrier: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectorStatus {
    Converged,
    Infeasible,
    Stalled,
    RankDeficient,
}

#[derive(Debug, Clone)]
pub struct CorrectorOutcome {
    pub status: CorrectorStatus,
    pub z: PackedVector,
    pub iterations: usize,
    pub final_residual: f64,
}

impl CorrectorOutcome {
    pub fn converged(&self) -> bool {
        self.status == CorrectorStatus::Converged
    }
}

/// Maps `z0` onto a nearby solution of the moment equations while keeping
/// every node (other than `skip`) strictly inside and every weight positive.
pub fn correct(
    sys: &MomentSystem,
    z0: &PackedVector,
    constraints: &LinearConstraints,
    config: &CorrectorConfig,
    skip: Option<usize>,
) -> CorrectorOutcome {
    let mut z = z0.clone();
    let mut iterations = 0;
    loop {
        let (f, jac) = sys.residual_and_jacobian(&z);
        let res = f.norm();
        let it = iterations;
        let done = |status| CorrectorOutcome {
            status,
            z: z.clone(),
            iterations: it,
            final_residual: res,
        };
        if res <= config.tol {
            if margin_excluding(&z, constraints, skip) > 0.0 {
                return done(CorrectorStatus::Converged);
            }
            return done(CorrectorStatus::Infeasible);
        }
        if iterations >= config.max_iters || !res.is_finite() {
            return done(CorrectorStatus::Stalled);
        }
        let g = match barrier_gradient(&z, constraints, skip) {
            Ok(g) => g,
            Err(_) => return done(CorrectorStatus::Infeasible),
        };
        let factors = match factor_economy(&jac) {
            Ok(fac) => fac,
            Err(Error::RankDeficient { .. }) => return done(CorrectorStatus::RankDeficient),
            Err(e) => unreachable!("unexpected factorization error {e}"),
        };
        let (mut dz_f, dz_g) = newton_components(&factors, &f, &g);

        let mut accepted = None;
        for _ in 0..=config.max_damping_steps {
            let family = build_family(&z, &dz_f, &dz_g, constraints, skip);
            let t = if config.barrier {
                minmax_t(&family).map(|r| r.t).unwrap_or(0.0)
            } else {
                0.0
            };
            if family.envelope(t) < 0.0 {
                accepted = Some(z.shifted(&dz_f, 1.0).shifted(&dz_g, t));
                break;
            }
            dz_f *= config.damping_factor;
        }
        iterations += 1;
        match accepted {
            Some(next) => z = next,
            None => return done(CorrectorStatus::Infeasible),
        }
    }
}
