//! Rule files, the exponential test-integral experiment, and the command
//! implementations behind the `nodelim` binary.
//!
//! Rule file layout (text, one record per line):
//!
//! ```text
//! # nodelim cubature rule
//! format 1
//! domain T2
//! dim 2
//! degree 5
//! nodes 7
//! status complete
//! 6.6666666666666663e-1 3.3333333333333331e-1 1.1249999999999999e-1
//! ...
//! ```
//!
//! Body lines hold the `d` coordinates followed by the weight, written with 17
//! significant digits so that every value reads back bit-exactly. `status` is
//! `partial` when the rule did not pass verification when it was written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::Domain;
use crate::orthobasis::Basis;
use crate::rules::{efficiency, optimal_node_count, CubatureRule, VerifyReport};
use crate::seeds::{build_seed, generate, naive_seed_count, odd_degree, GenerateOptions};

pub const FORMAT_VERSION: u32 = 1;

/// Errors of the command layer, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("infeasible rule: {0}")]
    Infeasible(String),
    #[error("inexact rule: {0}")]
    Inexact(String),
    #[error("pipeline failure: {0}")]
    Pipeline(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Infeasible(_) | CliError::Inexact(_) => 3,
            CliError::Pipeline(_) | CliError::Io(_) => 4,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::InvalidDomain(_) => CliError::Usage(e.to_string()),
            crate::Error::Parse(_) => CliError::Parse(e.to_string()),
            _ => CliError::Pipeline(e.to_string()),
        }
    }
}

/// A rule plus the file-level status flag.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleFile {
    pub rule: CubatureRule,
    pub complete: bool,
}

pub fn format_rule(rule: &CubatureRule, complete: bool) -> String {
    let mut s = String::new();
    writeln!(s, "# nodelim cubature rule").unwrap();
    writeln!(s, "format {FORMAT_VERSION}").unwrap();
    writeln!(s, "domain {}", rule.domain()).unwrap();
    writeln!(s, "dim {}", rule.dim()).unwrap();
    writeln!(s, "degree {}", rule.degree()).unwrap();
    writeln!(s, "nodes {}", rule.num_nodes()).unwrap();
    writeln!(s, "status {}", if complete { "complete" } else { "partial" }).unwrap();
    for (x, w) in rule.nodes().zip(rule.weights()) {
        let mut line = String::new();
        for v in x.iter().chain(std::iter::once(w)) {
            if !line.is_empty() {
                line.push(' ');
            }
            write!(line, "{v:.16e}").unwrap();
        }
        writeln!(s, "{line}").unwrap();
    }
    s
}

pub fn parse_rule(text: &str) -> Result<RuleFile, CliError> {
    let perr = |m: String| CliError::Parse(m);
    let mut header: BTreeMap<&str, &str> = BTreeMap::new();
    let mut body: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = line.split_whitespace().next().unwrap();
        if first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && first.parse::<f64>().is_err() {
            if !body.is_empty() {
                return Err(perr(format!("line {}: header after body", lineno + 1)));
            }
            let mut parts = line.splitn(2, char::is_whitespace);
            let key = parts.next().unwrap();
            let value = parts.next().unwrap_or("").trim();
            header.insert(key, value);
        } else {
            let row = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| perr(format!("line {}: {e}", lineno + 1)))?;
            body.push(row);
        }
    }
    let get = |k: &str| header.get(k).copied().ok_or_else(|| perr(format!("missing header `{k}`")));
    let num = |k: &str| -> Result<usize, CliError> {
        get(k)?.parse().map_err(|_| perr(format!("header `{k}` is not an integer")))
    };
    let version = num("format")?;
    if version != FORMAT_VERSION as usize {
        return Err(perr(format!("unsupported format version {version}")));
    }
    let domain: Domain = get("domain")?.parse().map_err(|e: crate::Error| perr(e.to_string()))?;
    let dim = num("dim")?;
    if dim != domain.dim() {
        return Err(perr(format!("dim {dim} does not match domain {domain}")));
    }
    let degree = num("degree")?;
    let n = num("nodes")?;
    if n != body.len() {
        return Err(perr(format!("header declares {n} nodes, body has {}", body.len())));
    }
    let complete = match header.get("status").copied().unwrap_or("complete") {
        "complete" => true,
        "partial" => false,
        other => return Err(perr(format!("unknown status `{other}`"))),
    };
    let mut nodes = Vec::with_capacity(n * dim);
    let mut weights = Vec::with_capacity(n);
    for (i, row) in body.iter().enumerate() {
        if row.len() != dim + 1 {
            return Err(perr(format!("node {} has {} values, expected {}", i + 1, row.len(), dim + 1)));
        }
        nodes.extend_from_slice(&row[..dim]);
        weights.push(row[dim]);
    }
    let rule = CubatureRule::new(domain, degree, nodes, weights)?;
    Ok(RuleFile { rule, complete })
}

pub fn write_rule(path: &Path, rule: &CubatureRule, complete: bool) -> Result<(), CliError> {
    std::fs::write(path, format_rule(rule, complete))?;
    Ok(())
}

pub fn read_rule(path: &Path) -> Result<RuleFile, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse_rule(&text)
}

/// Default file name for a generated rule.
pub fn default_rule_path(domain: &Domain, degree: usize) -> PathBuf {
    PathBuf::from(format!("{}_p{}.rule", domain, degree))
}

/// One row of the node-count tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub degree: usize,
    pub n_tp: usize,
    pub n_elim: usize,
    pub n_opt: usize,
}

impl TableRow {
    pub fn new(domain: &Domain, degree: usize, n_elim: usize) -> Self {
        TableRow {
            degree,
            n_tp: naive_seed_count(domain, degree),
            n_elim,
            n_opt: optimal_node_count(degree, domain.dim()),
        }
    }

    pub fn i_opt(&self) -> f64 {
        efficiency(self.n_opt, self.n_elim)
    }
}

/// Renders rows transposed: one line per quantity, one column per degree.
pub fn format_table(rows: &[TableRow]) -> String {
    let mut s = String::new();
    let line = |s: &mut String, name: &str, cells: Vec<String>| {
        write!(s, "{name:<8}").unwrap();
        for c in cells {
            write!(s, " {c:>6}").unwrap();
        }
        s.push('\n');
    };
    line(&mut s, "degree", rows.iter().map(|r| r.degree.to_string()).collect());
    line(&mut s, "n_tp", rows.iter().map(|r| r.n_tp.to_string()).collect());
    line(&mut s, "n_elim", rows.iter().map(|r| r.n_elim.to_string()).collect());
    line(&mut s, "n_opt", rows.iter().map(|r| r.n_opt.to_string()).collect());
    line(&mut s, "i_opt", rows.iter().map(|r| format!("{:.2}", r.i_opt())).collect());
    s
}

/// `(exp(u) - 1) / u` with the removable singularity at zero handled by a
/// Taylor series for `|u| < 1e-6`.
pub fn exp_integrand(u: f64) -> f64 {
    if u.abs() < 1e-6 {
        1.0 + u * (1.0 / 2.0 + u * (1.0 / 6.0 + u * (1.0 / 24.0 + u * (1.0 / 120.0 + u / 720.0))))
    } else {
        u.exp_m1() / u
    }
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(ai, xi)| ai * xi).sum()
}

/// `sum_k w_k (exp(a.x_k) - 1) / (a.x_k)`.
pub fn integrate_exp(rule: &CubatureRule, a: &[f64]) -> f64 {
    rule.apply(|x| exp_integrand(dot(a, x)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub degrees: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Half-width of the box the `a`-vectors are drawn from, before the
    /// `1/sqrt(d)` scaling.
    pub amplitude: f64,
}

impl ExperimentConfig {
    pub fn new(domain: Domain, degrees: Vec<usize>) -> Self {
        ExperimentConfig {
            domain,
            degrees,
            samples: 1000,
            seed: 0,
            amplitude: 25.0,
        }
    }
}

/// `samples` vectors uniform on `[-amplitude, amplitude]^d / sqrt(d)`.
pub fn sample_vectors(dim: usize, samples: usize, seed: u64, amplitude: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (dim as f64).sqrt();
    (0..samples)
        .map(|_| {
            (0..dim)
                .map(|_| rng.random_range(-amplitude..=amplitude) * scale)
                .collect()
        })
        .collect()
}

/// Degree at which reference evaluation gives up.
pub const REFERENCE_MAX_DEGREE: usize = 200;
/// Relative agreement required between consecutive reference degrees.
pub const REFERENCE_TOL: f64 = 1e-13;

/// High-order plain tensor/Duffy rules, built lazily per degree.
#[derive(Debug, Default)]
pub struct ReferenceRules {
    domain: Option<Domain>,
    rules: BTreeMap<usize, CubatureRule>,
}

impl ReferenceRules {
    pub fn new(domain: &Domain) -> Self {
        ReferenceRules {
            domain: Some(domain.clone()),
            rules: BTreeMap::new(),
        }
    }

    fn rule(&mut self, degree: usize) -> Result<&CubatureRule, crate::Error> {
        let domain = self.domain.as_ref().expect("reference rules need a domain");
        Ok(match self.rules.entry(degree) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(build_seed(domain, degree, false, &Default::default())?)
            }
        })
    }

    /// Integral of `(exp(a.x) - 1)/(a.x)` by tensor/Duffy rules of increasing
    /// degree, starting at `start_degree` and stepping by 10 until two
    /// consecutive values agree to [`REFERENCE_TOL`].
    pub fn value(&mut self, a: &[f64], start_degree: usize) -> Result<f64, crate::Error> {
        let mut degree = odd_degree(start_degree);
        let mut prev = integrate_exp(self.rule(degree)?, a);
        loop {
            let next_degree = degree + 10;
            if next_degree > REFERENCE_MAX_DEGREE {
                return Err(crate::Error::NoConvergence { degree });
            }
            let next = integrate_exp(self.rule(next_degree)?, a);
            if (next - prev).abs() <= REFERENCE_TOL * next.abs() {
                return Ok(next);
            }
            prev = next;
            degree = next_degree;
        }
    }
}

/// Reference value for a single `a` with the default starting degree for
/// rules up to degree `p_max`.
pub fn reference_value(domain: &Domain, a: &[f64], p_max: usize) -> Result<f64, crate::Error> {
    ReferenceRules::new(domain).value(a, 2 * p_max + 20)
}

/// A family of rules compared in the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    /// Plain tensor-product / Duffy rules.
    Tensor,
    /// Rules after node elimination.
    Eliminated,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Tensor => "tensor",
            Family::Eliminated => "eliminated",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub family: Family,
    pub degree: usize,
    pub n_points: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    /// Largest reference magnitude over the samples.
    pub max_reference: f64,
}

/// Max errors of each family and degree on the shared sample of `a`-vectors.
pub fn run_experiment_with_rules(
    config: &ExperimentConfig,
    families: &[(Family, Vec<CubatureRule>)],
) -> Result<Vec<ExperimentRow>, crate::Error> {
    let d = config.domain.dim();
    let avecs = sample_vectors(d, config.samples, config.seed, config.amplitude);
    let p_max = families
        .iter()
        .flat_map(|(_, rules)| rules.iter().map(|r| r.degree()))
        .max()
        .unwrap_or(1);
    let mut refs = ReferenceRules::new(&config.domain);
    let reference: Vec<f64> = avecs
        .iter()
        .map(|a| refs.value(a, 2 * p_max + 20))
        .collect::<Result<_, _>>()?;
    let max_reference = reference.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let mut rows = Vec::new();
    for (family, rules) in families {
        for rule in rules {
            let (mut abs, mut rel) = (0.0f64, 0.0f64);
            for (a, r) in avecs.iter().zip(&reference) {
                let err = (integrate_exp(rule, a) - r).abs();
                abs = abs.max(err);
                rel = rel.max(err / r.abs());
            }
            rows.push(ExperimentRow {
                family: *family,
                degree: rule.degree(),
                n_points: rule.num_nodes(),
                max_abs_error: abs,
                max_rel_error: rel,
                max_reference,
            });
        }
    }
    Ok(rows)
}

/// Builds both families for every configured degree and runs the experiment.
pub fn run_experiment(
    config: &ExperimentConfig,
    options: &GenerateOptions,
) -> Result<Vec<ExperimentRow>, crate::Error> {
    let mut tensor = Vec::new();
    let mut elim = Vec::new();
    for &p in &config.degrees {
        let p = odd_degree(p);
        tensor.push(build_seed(&config.domain, p, false, &options.eliminator)?);
        elim.push(generate(&config.domain, p, options)?.rule);
    }
    run_experiment_with_rules(config, &[(Family::Tensor, tensor), (Family::Eliminated, elim)])
}

pub fn format_csv(rows: &[ExperimentRow]) -> String {
    let mut s = String::from("family,degree,n_points,max_abs_error,max_rel_error,max_reference\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{:.6e},{:.6e},{:.6e}",
            r.family, r.degree, r.n_points, r.max_abs_error, r.max_rel_error, r.max_reference
        )
        .unwrap();
    }
    s
}

/// Exit status of `verify`, from a report.
pub fn check_report(report: &VerifyReport) -> Result<(), CliError> {
    if !report.is_pi() {
        return Err(CliError::Infeasible(format!(
            "min weight {:e}, min slack {:e}",
            report.min_weight, report.min_slack
        )));
    }
    if !report.is_exact() {
        return Err(CliError::Inexact(format!(
            "relative residual {:e}",
            report.relative_residual()
        )));
    }
    Ok(())
}

pub fn format_report(report: &VerifyReport) -> String {
    format!(
        "residual_norm {:.6e}\nrelative_residual {:.6e}\nmin_weight {:.6e}\nmin_slack {:.6e}\nweight_sum_minus_volume {:.6e}\n",
        report.residual_norm,
        report.relative_residual(),
        report.min_weight,
        report.min_slack,
        report.weight_sum_error
    )
}

/// `generate`: seed, eliminate, write the rule, and return the table row.
/// The rule is written even when it fails verification, marked `partial`.
pub fn cmd_generate(
    domain: &Domain,
    degree: usize,
    options: &GenerateOptions,
    out: &Path,
) -> Result<(TableRow, crate::seeds::Generated), CliError> {
    let generated = generate(domain, degree, options)?;
    let report = generated.rule.verify(&Basis::new(domain, generated.degree));
    write_rule(out, &generated.rule, report.passes())?;
    if !report.passes() {
        return Err(CliError::Pipeline(format!(
            "final rule failed verification (relative residual {:e}, min weight {:e}, min slack {:e})",
            report.relative_residual(),
            report.min_weight,
            report.min_slack
        )));
    }
    let row = TableRow::new(domain, generated.degree, generated.n_elim());
    Ok((row, generated))
}

/// `verify`: reads a rule file and checks it against its own degree.
pub fn cmd_verify(path: &Path) -> Result<(VerifyReport, String), CliError> {
    let file = read_rule(path)?;
    let basis = Basis::new(file.rule.domain(), file.rule.degree());
    let report = file.rule.verify(&basis);
    let text = format_report(&report);
    check_report(&report).map(|_| (report, text.clone()))
}

/// `seed`: writes the rule elimination would start from.
pub fn cmd_seed(
    domain: &Domain,
    degree: usize,
    options: &GenerateOptions,
    out: &Path,
) -> Result<CubatureRule, CliError> {
    let seed = build_seed(domain, degree, options.intermediate_ne, &options.eliminator)?;
    let report = seed.verify(&Basis::new(domain, seed.degree()));
    write_rule(out, &seed, report.passes())?;
    Ok(seed)
}

/// `tables`: one row per degree, reusing rule files found in `dir` and
/// generating (and saving) the missing ones.
pub fn cmd_tables(
    domain: &Domain,
    degrees: &[usize],
    options: &GenerateOptions,
    dir: &Path,
) -> Result<Vec<TableRow>, CliError> {
    let mut rows = Vec::new();
    for &p in degrees {
        let p = odd_degree(p);
        let path = dir.join(default_rule_path(domain, p));
        let n_elim = if path.exists() {
            let file = read_rule(&path)?;
            if file.rule.domain() != domain || file.rule.degree() != p {
                return Err(CliError::Parse(format!("{} holds a different rule", path.display())));
            }
            file.rule.num_nodes()
        } else {
            cmd_generate(domain, p, options, &path)?.0.n_elim
        };
        rows.push(TableRow::new(domain, p, n_elim));
    }
    Ok(rows)
}
