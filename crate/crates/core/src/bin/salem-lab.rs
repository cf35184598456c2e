use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use salem_patterns::experiment::{run_experiment, ExperimentConfig, Stage};

/// Run a configuration experiment and write its reports.
#[derive(Parser, Debug)]
#[command(name = "salem-lab", version)]
struct Args {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: PathBuf,
    /// Last stage to run: construct, conditions, decompose, scan, mixed, patterns, nu_mass.
    #[arg(long, default_value = "nu_mass")]
    stage: String,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed_override: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("salem-lab: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: &Args) -> salem_patterns::Result<()> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| salem_patterns::Error::Io(e.to_string()))?;
    }
    let text = std::fs::read_to_string(&args.config)?;
    let mut config = ExperimentConfig::parse(&text)?;
    if let Some(seed) = args.seed_override {
        config.seed = seed;
    }
    let stage: Stage = args.stage.parse()?;
    let out = args.out.clone().unwrap_or_else(|| config.out_dir.clone());
    let report = run_experiment(&config, stage, &out)?;
    println!("wrote {}", out.join("report.txt").display());
    if let Some(s) = &report.scan {
        match s.certified_scale {
            Some(l) => println!("certified scale {l}"),
            None => println!("no scale certified"),
        }
    }
    if let Some(p) = &report.patterns {
        println!("pattern_found = {} ({} certified triples)", p.pattern_found, p.certified);
    }
    if let Some(n) = &report.nu_mass {
        println!("nu_mass limit estimate {:.6e}", n.limit_estimate);
    }
    Ok(())
}
