use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nodelim::cli::{self, CliError, ExperimentConfig};
use nodelim::{Domain, EliminatorConfig, GenerateOptions};

#[derive(Parser)]
#[command(name = "nodelim", version, about = "Positive-interior cubature by node elimination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PipelineArgs {
    /// Corrector residual tolerance.
    #[arg(long, default_value_t = 1e-14)]
    tol: f64,
    /// Candidates passed to the corrector per elimination step (default min(n, 16)).
    #[arg(long)]
    max_candidates: Option<usize>,
    /// Skip node elimination on intermediate factor rules.
    #[arg(long)]
    no_intermediate_ne: bool,
}

impl PipelineArgs {
    fn options(&self) -> GenerateOptions {
        let mut eliminator = EliminatorConfig::default();
        eliminator.corrector.tol = self.tol;
        eliminator.max_candidates = self.max_candidates;
        GenerateOptions {
            intermediate_ne: !self.no_intermediate_ne,
            eliminator,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a rule and write it to a file.
    Generate {
        #[arg(long)]
        domain: Domain,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Write the seed rule elimination starts from.
    Seed {
        #[arg(long)]
        domain: Domain,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Check a rule file for exactness and positivity.
    Verify { file: PathBuf },
    /// Node-count table over several degrees, reusing rule files in --dir.
    Tables {
        #[arg(long)]
        domain: Domain,
        #[arg(long, value_delimiter = ',', required = true)]
        degree: Vec<usize>,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Max error on random exponential integrands, as CSV.
    Experiment {
        #[arg(long)]
        domain: Domain,
        #[arg(long, value_delimiter = ',', required = true)]
        degree: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate { domain, degree, out, pipeline } => {
            let out = out.unwrap_or_else(|| cli::default_rule_path(&domain, degree));
            let (row, generated) = cli::cmd_generate(&domain, degree, &pipeline.options(), &out)?;
            print!("{}", cli::format_table(&[row]));
            println!("stop    {:?}", generated.report.stop_reason);
            println!("wrote   {}", out.display());
        }
        Command::Seed { domain, degree, out, pipeline } => {
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{domain}_p{degree}.seed.rule")));
            let seed = cli::cmd_seed(&domain, degree, &pipeline.options(), &out)?;
            println!("nodes {}\nwrote {}", seed.num_nodes(), out.display());
        }
        Command::Verify { file } => match cli::cmd_verify(&file) {
            Ok((_, text)) => print!("{text}"),
            Err(e) => {
                if let Ok(f) = cli::read_rule(&file) {
                    let basis = nodelim::Basis::new(f.rule.domain(), f.rule.degree());
                    print!("{}", cli::format_report(&f.rule.verify(&basis)));
                }
                return Err(e);
            }
        },
        Command::Tables { domain, degree, dir, pipeline } => {
            let rows = cli::cmd_tables(&domain, &degree, &pipeline.options(), &dir)?;
            println!("{domain}");
            print!("{}", cli::format_table(&rows));
        }
        Command::Experiment { domain, degree, samples, seed, out, pipeline } => {
            let mut config = ExperimentConfig::new(domain, degree);
            config.samples = samples;
            config.seed = seed;
            let rows = cli::run_experiment(&config, &pipeline.options())?;
            let csv = cli::format_csv(&rows);
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(parsed.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
