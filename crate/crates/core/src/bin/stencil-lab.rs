use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stencil_lab::bench::{self, ExperimentConfig, Generator, RunOptions, Status};
use stencil_lab::geometry::{Domain, Shape};
use stencil_lab::nodegen::{quality, write_csv};

/// Caps the worker threads used for weight computation and quality probes.
const THREADS_ENV: &str = "STENCIL_LAB_THREADS";

/// Exit status when a reproduction ran but some of its checks failed.
const CHECKS_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "stencil-lab", version, about = "PHS RBF-FD stencil-size experiments")]
struct Cli {
    /// Suppress progress output on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML or JSON config (or a run manifest).
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write every assembled system as MatrixMarket.
        #[arg(long)]
        dump_system: bool,
    },
    /// Run a named reproduction preset and check its results.
    Repro {
        preset: String,
        #[arg(long, default_value = "repro")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dump_system: bool,
    },
    /// List the reproduction presets.
    Presets,
    /// Generate a node set and write it as CSV.
    Nodes {
        /// A named domain (disc, ball, ...) or a JSON shape description.
        #[arg(long)]
        domain: String,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_parser = parse_generator, default_value = "advancing_front")]
        generator: Generator,
    },
}

fn parse_generator(s: &str) -> Result<Generator, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown generator '{s}' (advancing_front, halton, polar)"))
}

fn parse_domain(s: &str) -> stencil_lab::Result<Domain> {
    if s.trim_start().starts_with('{') {
        let shape: Shape = serde_json::from_str(s).map_err(|e| stencil_lab::Error::Parse(e.to_string()))?;
        Domain::new(shape)
    } else {
        Domain::named(s)
    }
}

fn init_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
        if n == 0 {
            return Err(format!("{THREADS_ENV} must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> stencil_lab::Result<ExitCode> {
    let verbose = !cli.quiet;
    match cli.command {
        Command::Run { config, out, dump_system } => {
            let mut c = ExperimentConfig::load(&config)?;
            if let Some(o) = out {
                c.output = o;
            }
            let outcome = bench::run(&c, &RunOptions { dump_system, verbose })?;
            println!("wrote {} to {}", outcome.manifest.artifacts.join(", "), c.output.display());
            if !outcome.manifest.failures.is_empty() {
                println!("{} stencil size(s) failed; see the manifest", outcome.manifest.failures.len());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Repro { preset, out, seed, dump_system } => {
            let summary = bench::repro(&preset, &out, seed, &RunOptions { dump_system, verbose })?;
            for c in &summary.checks {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Info => "INFO",
                };
                println!("{tag} {}: {}", c.name, c.detail);
            }
            println!("results in {}", out.join(&summary.preset).display());
            Ok(if summary.passed() { ExitCode::SUCCESS } else { ExitCode::from(CHECKS_FAILED) })
        }
        Command::Presets => {
            for name in bench::PRESETS {
                let p = bench::preset(name, None)?;
                println!("{name:<10} {}", p.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Nodes { domain, h, out, seed, generator } => {
            let d = parse_domain(&domain)?;
            let nodes = bench::config::generate_nodes(&d, generator, h, seed)?;
            let mut w = BufWriter::new(File::create(&out)?);
            write_csv(&nodes, &mut w)?;
            w.flush()?;
            let q = quality(&nodes, &d, if d.dim() == 3 { 40 } else { 200 })?;
            println!(
                "{} nodes ({} boundary), delta = {:.4e}, rho = {:.4e}, gamma = {:.3}",
                nodes.len(),
                nodes.boundary_indices().len(),
                q.delta,
                q.rho,
                q.gamma
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
