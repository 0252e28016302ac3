//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line with the measured quantities.

mod common;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use common::*;
use nalgebra::{DMatrix, DVector};
use nodelim::cli::{run_experiment_with_rules, ExperimentConfig, ExperimentRow, Family};
use nodelim::momentsys::{factor_economy, factor_full, newton_components, MomentSystem};
use nodelim::orthobasis::monomial_moment;
use nodelim::seeds::{build_seed, naive_seed_count};
use nodelim::tline::{minmax_t, LineFamily, T_MAX};
use nodelim::{generate, Basis, CubatureRule, Domain, GenerateOptions, Generated, PackedVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Cache = Mutex<HashMap<(String, usize), Arc<(Generated, Duration)>>>;

/// Pipeline runs shared between criteria, with their wall time.
fn generated(label: &str, p: usize) -> Arc<(Generated, Duration)> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry((label.to_string(), p))
        .or_insert_with(|| {
            let domain: Domain = label.parse().unwrap();
            let start = Instant::now();
            let g = generate(&domain, p, &GenerateOptions::default()).unwrap();
            Arc::new((g, start.elapsed()))
        })
        .clone()
}

fn report(criterion: &str, pass: bool, detail: String) {
    println!("criterion {criterion}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

struct RuleCheck {
    nodes: usize,
    rel_residual: f64,
    min_weight: f64,
    min_slack: f64,
    secs: f64,
}

impl RuleCheck {
    fn pi_exact(&self) -> bool {
        self.rel_residual <= 1e-12 && self.min_weight > 0.0 && self.min_slack > 0.0
    }
}

fn check(label: &str, p: usize) -> RuleCheck {
    let run = generated(label, p);
    let (g, time) = (&run.0, run.1);
    let r = g.rule.verify(&Basis::new(g.rule.domain(), p));
    RuleCheck {
        nodes: g.n_elim(),
        rel_residual: r.relative_residual(),
        min_weight: r.min_weight,
        min_slack: r.min_slack,
        secs: time.as_secs_f64(),
    }
}

fn summary(label: &str, degrees: &[usize], checks: &[RuleCheck]) -> String {
    degrees
        .iter()
        .zip(checks)
        .map(|(p, c)| {
            format!(
                "{label}/{p}: n={} res={:.1e} minw={:.1e} slack={:.1e} t={:.1}s",
                c.nodes, c.rel_residual, c.min_weight, c.min_slack, c.secs
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[test]
fn criterion_1_triangle_optimal_rules() {
    let degrees = [3, 5, 7, 9];
    let want = [4, 7, 12, 19];
    let checks: Vec<_> = degrees.iter().map(|&p| check("T2", p)).collect();
    let pass = checks.iter().zip(want).all(|(c, n)| c.nodes == n && c.pi_exact());
    report("1", pass, summary("T2", &degrees, &checks));
}

#[test]
fn criterion_2_triangle_higher_degrees() {
    let degrees = [11, 13, 15];
    let bound = [29, 40, 49];
    let checks: Vec<_> = degrees.iter().map(|&p| check("T2", p)).collect();
    let pass = checks
        .iter()
        .zip(bound)
        .all(|(c, b)| c.nodes <= b && c.pi_exact() && c.secs < 60.0);
    report("2", pass, summary("T2", &degrees, &checks));
}

/// Barycentric coordinates on the ordered triangle with vertices
/// (0,0), (1,0), (1,1).
fn to_bary(x: &[f64]) -> [f64; 3] {
    [1.0 - x[0], x[0] - x[1], x[1]]
}

fn from_bary(l: [f64; 3]) -> [f64; 2] {
    [l[1] + l[2], l[2]]
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// The classical symmetric 7-point degree-5 rule on the ordered triangle.
fn radon_rule() -> Vec<([f64; 2], f64)> {
    let s = 15f64.sqrt();
    let mut out = vec![(from_bary([1.0 / 3.0; 3]), 9.0 / 80.0)];
    for (a, w) in [((6.0 - s) / 21.0, (155.0 - s) / 2400.0), ((6.0 + s) / 21.0, (155.0 + s) / 2400.0)] {
        let b = 1.0 - 2.0 * a;
        for l in [[a, a, b], [a, b, a], [b, a, a]] {
            out.push((from_bary(l), w));
        }
    }
    out
}

/// Largest node/weight distance of a greedy one-to-one matching.
fn multiset_distance(a: &[([f64; 2], f64)], b: &[([f64; 2], f64)]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for (x, w) in a {
        let dist = |(y, v): &([f64; 2], f64)| ((x[0] - y[0]).abs().max((x[1] - y[1]).abs())).max((w - v).abs());
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, e)| (j, dist(e)))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[test]
fn criterion_3_degree_five_matches_analytic_rule() {
    let run = generated("T2", 5);
    let rule = &run.0.rule;
    let sys = MomentSystem::new(rule.domain(), 5);
    let residual = sys.residual(&rule.pack()).norm() / sys.moments().norm();
    let nodes: Vec<([f64; 2], f64)> = rule.nodes().zip(rule.weights()).map(|(x, &w)| ([x[0], x[1]], w)).collect();
    // symmetric when every vertex permutation maps the rule onto itself
    let asym = PERMS
        .iter()
        .map(|p| {
            let image: Vec<_> = nodes
                .iter()
                .map(|(x, w)| {
                    let l = to_bary(x);
                    (from_bary([l[p[0]], l[p[1]], l[p[2]]]), *w)
                })
                .collect();
            multiset_distance(&image, &nodes)
        })
        .fold(0.0, f64::max);
    let symmetric = asym <= 1e-8;
    let diff = multiset_distance(&nodes, &radon_rule());
    let pass = rule.num_nodes() == 7 && residual <= 1e-13 && (!symmetric || diff <= 1e-8);
    report(
        "3",
        pass,
        format!(
            "n={} residual={residual:.2e} symmetric={symmetric} (asymmetry {asym:.1e}) max diff to analytic rule={diff:.2e}",
            rule.num_nodes()
        ),
    );
}

#[test]
fn criterion_4_tetrahedron() {
    let c5 = check("T3", 5);
    let c7 = check("T3", 7);
    let pass = c5.nodes == 14 && c7.nodes <= 33 && c5.pi_exact() && c7.pi_exact() && c5.secs + c7.secs < 300.0;
    report("4", pass, summary("T3", &[5, 7], &[c5, c7]));
}

#[test]
fn criterion_5_four_dimensional() {
    let mut parts = Vec::new();
    let mut pass = true;
    for label in ["T4", "T2xT2"] {
        let c3 = check(label, 3);
        let c5 = check(label, 5);
        pass &= c3.nodes <= 9 && c5.nodes <= 28 && c3.pi_exact() && c5.pi_exact() && c5.secs < 1800.0;
        parts.push(summary(label, &[3, 5], &[c3, c5]));
    }
    report("5", pass, parts.join("; "));
}

#[test]
fn criterion_6_seed_counts() {
    let expected: &[(&str, &[(usize, usize)])] = &[
        ("T2", &[(3, 4), (5, 9), (7, 16), (9, 25), (11, 36), (13, 49), (15, 64)]),
        ("T3", &[(5, 27), (7, 64), (9, 125)]),
        ("T4", &[(3, 16), (5, 81)]),
        ("T2xT2", &[(3, 16), (5, 81)]),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (label, rows) in expected {
        let domain: Domain = label.parse().unwrap();
        let mut got = Vec::new();
        for &(p, n) in rows.iter() {
            let seed = build_seed(&domain, p, false, &Default::default()).unwrap();
            let ok = seed.num_nodes() == n && naive_seed_count(&domain, p) == n && seed.verify(&Basis::new(&domain, p)).passes();
            pass &= ok;
            got.push(seed.num_nodes().to_string());
        }
        detail.push(format!("{label} {{{}}}", got.join(",")));
    }
    report("6", pass, detail.join(" "));
}

fn gram_max_deviation() -> f64 {
    let mut worst = 0.0f64;
    for domain in supported_domains() {
        let p = 15;
        let basis = Basis::new(&domain, p);
        let rule = build_seed(&domain, 2 * p + 1, false, &Default::default()).unwrap();
        let m = basis.size();
        let mut b = DMatrix::zeros(m, rule.num_nodes());
        for (k, (x, w)) in rule.nodes().zip(rule.weights()).enumerate() {
            b.set_column(k, &(basis.eval(x) * w.sqrt()));
        }
        worst = worst.max((&b * b.transpose() - DMatrix::identity(m, m)).amax());
    }
    worst
}

fn jacobian_fd_max(r: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for (label, p, n) in [("T2", 5, 9), ("T3", 3, 8), ("T2xT2", 2, 5)] {
        let domain: Domain = label.parse().unwrap();
        let sys = MomentSystem::new(&domain, p);
        for _ in 0..100 {
            let mut z = Vec::new();
            for _ in 0..n {
                z.extend(sample_inside(&domain, r));
                z.push(r.random_range(0.01..1.0));
            }
            let z = PackedVector::from_slice(&z, domain.dim()).unwrap();
            let jac = sys.jacobian(&z);
            let h = 1e-6;
            let mut fd = DMatrix::zeros(jac.nrows(), jac.ncols());
            for j in 0..z.len() {
                let mut e = DVector::zeros(z.len());
                e[j] = h;
                fd.set_column(j, &((sys.residual(&z.shifted(&e, 1.0)) - sys.residual(&z.shifted(&e, -1.0))) / (2.0 * h)));
            }
            worst = worst.max((&fd - &jac).norm() / jac.norm());
        }
    }
    worst
}

/// Returns (families agreeing with the oracle, families checked).
fn minmax_agreement(r: &mut ChaCha8Rng) -> (usize, usize) {
    let mut agree = 0;
    for _ in 0..1000 {
        let n = r.random_range(1..30);
        let pairs: Vec<(f64, f64)> = (0..n).map(|_| (r.random_range(-2.0..0.5), r.random_range(-1.0..1.0))).collect();
        let family = LineFamily::from_pairs(&pairs);
        let got = minmax_t(&family);
        let ok = match brute_force_min(&family) {
            None => got.is_err(),
            Some((t, _)) if t > T_MAX => got.is_err(),
            Some((_, v)) => got.is_ok_and(|g| {
                let grid_ok = (0..=1000).all(|i| family.envelope(g.t.max(1.0) * 2.0 * i as f64 / 1000.0) >= g.value - 1e-12);
                (g.value - v).abs() <= 1e-12 * (1.0 + v.abs()) && grid_ok
            }),
        };
        agree += ok as usize;
    }
    (agree, 1000)
}

fn lq_max_residual(r: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let m = r.random_range(2..40);
        let n = m + r.random_range(1..30);
        let jac = DMatrix::from_fn(m, n, |_, _| r.random_range(-1.0..1.0));
        let s = jac.norm();
        let eco = factor_economy(&jac).unwrap();
        let qhat = factor_full(&jac).unwrap().qhat.unwrap();
        let f = DVector::from_fn(m, |_, _| r.random_range(-1.0..1.0));
        let g = DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0));
        let (dz_f, dz_g) = newton_components(&eco, &f, &g);
        for v in [
            (&eco.l * &eco.q - &jac).norm() / s,
            (&eco.q * eco.q.transpose() - DMatrix::identity(m, m)).amax(),
            (&jac * qhat.transpose()).norm() / s,
            (&qhat * qhat.transpose() - DMatrix::identity(n - m, n - m)).amax(),
            (&jac * &dz_f + &f).norm() / (s * dz_f.norm() + f.norm()),
            (&jac * &dz_g).norm() / (s * g.norm()),
            (&dz_g + qhat.transpose() * (&qhat * &g)).norm() / g.norm(),
        ] {
            worst = worst.max(v);
        }
    }
    worst
}

fn exactness_max(r: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    for (label, p) in [("T2", 3), ("T2", 5), ("T2", 7), ("T2", 9), ("T3", 5), ("T4", 3), ("T2xT2", 3)] {
        let run = generated(label, p);
        let rule = &run.0.rule;
        let exps = monomial_exponents(rule.dim(), p);
        let moments: Vec<f64> = exps.iter().map(|a| monomial_moment(rule.domain(), a)).collect();
        for _ in 0..200 {
            let c: Vec<f64> = (0..exps.len()).map(|_| r.random_range(-1.0..1.0)).collect();
            let exact: f64 = c.iter().zip(&moments).map(|(c, m)| c * m).sum();
            let scale: f64 = c.iter().zip(&moments).map(|(c, m)| (c * m).abs()).sum();
            let got = rule.apply(|x| c.iter().zip(&exps).map(|(c, a)| c * monomial(x, a)).sum());
            worst = worst.max((got - exact).abs() / scale);
        }
    }
    worst
}

#[test]
fn criterion_7_property_suite() {
    let mut r = ChaCha8Rng::seed_from_u64(7);
    let gram = gram_max_deviation();
    let jac = jacobian_fd_max(&mut r);
    let (agree, total) = minmax_agreement(&mut r);
    let lq = lq_max_residual(&mut r);
    let exact = exactness_max(&mut r);
    let pass = gram <= 1e-10 && jac <= 1e-6 && agree == total && lq <= 1e-11 && exact <= 1e-11;
    report(
        "7",
        pass,
        format!(
            "gram(p<=15)={gram:.1e} jacobian_fd={jac:.1e} minmax={agree}/{total} lq={lq:.1e} exactness={exact:.1e}"
        ),
    );
}

/// Nodes a family needs to reach `level`, interpolating log(error) linearly
/// in the node count between consecutive degrees. `None` outside the range
/// the family covers.
fn nodes_for_level(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    if curve.first()?.1 <= level {
        return Some(curve[0].0);
    }
    curve.windows(2).find_map(|w| {
        let ((n0, e0), (n1, e1)) = (w[0], w[1]);
        (e0 > level && e1 <= level).then(|| n0 + (n1 - n0) * (e0.ln() - level.ln()) / (e0.ln() - e1.ln()))
    })
}

fn curve(rows: &[ExperimentRow], family: Family) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.family == family)
        .map(|r| (r.n_points as f64, r.max_rel_error))
        .collect()
}

struct ExperimentVerdict {
    decreasing: bool,
    levels: usize,
    fewer_nodes: bool,
    detail: String,
}

fn experiment(label: &str, degrees: &[usize]) -> ExperimentVerdict {
    let domain: Domain = label.parse().unwrap();
    let tensor: Vec<CubatureRule> = degrees
        .iter()
        .map(|&p| build_seed(&domain, p, false, &Default::default()).unwrap())
        .collect();
    let elim: Vec<CubatureRule> = degrees.iter().map(|&p| generated(label, p).0.rule.clone()).collect();
    let config = ExperimentConfig::new(domain, degrees.to_vec());
    let rows = run_experiment_with_rules(&config, &[(Family::Tensor, tensor), (Family::Eliminated, elim)]).unwrap();
    for r in &rows {
        println!(
            "  {label} {:>10} p={:<2} n={:<4} max_abs={:.3e} max_rel={:.3e}",
            r.family, r.degree, r.n_points, r.max_abs_error, r.max_rel_error
        );
    }
    let t = curve(&rows, Family::Tensor);
    let e = curve(&rows, Family::Eliminated);
    // error decreases with degree, allowing 10x noise
    let decreasing = [&t, &e].iter().all(|c| c.windows(2).all(|w| w[1].1 <= 10.0 * w[0].1) && c.last().unwrap().1 < c[0].1);
    // matched levels: every measured error of either family that is <= 1e-4
    // and inside both families' ranges
    let lo = t.last().unwrap().1.max(e.last().unwrap().1);
    let levels: Vec<f64> = t.iter().chain(&e).map(|p| p.1).filter(|&l| l <= 1e-4 && l >= lo).collect();
    let mut fewer = true;
    let mut cmp = Vec::new();
    for &l in &levels {
        let (ne, nt) = (nodes_for_level(&e, l).unwrap(), nodes_for_level(&t, l).unwrap());
        fewer &= ne < nt;
        cmp.push(format!("{l:.1e}: {ne:.0} vs {nt:.0}"));
    }
    let smallest = e.last().unwrap().1.min(t.last().unwrap().1);
    ExperimentVerdict {
        decreasing,
        levels: levels.len(),
        fewer_nodes: fewer,
        detail: format!(
            "{label} p<={}: decreasing={decreasing} smallest rel. error={smallest:.1e} matched levels<=1e-4: [{}]",
            degrees.last().unwrap(),
            cmp.join(", ")
        ),
    }
}

#[test]
fn criterion_8_experiment_reproduction() {
    // T3 elimination beyond degree 9 costs many minutes per degree
    let t2 = experiment("T2", &[3, 5, 7, 9, 11, 13, 15, 17, 19]);
    let t3 = experiment("T3", &[3, 5, 7, 9]);
    let pass = [&t2, &t3].iter().all(|v| v.decreasing && v.levels > 0 && v.fewer_nodes);
    report("8", pass, format!("{}; {}", t2.detail, t3.detail));
}
