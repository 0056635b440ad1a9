use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use spikenorm::decompose::Decomposition;
use spikenorm::experiments::{run_named, EXPERIMENTS};
use spikenorm::{
    alexiewicz_norm, decompose, discrepancy_norm, from_grid, gamma_for, l2_norm, lif, lif_discrete,
    snn_error_bound, snn_forward, to_grid, BetaMode, DiscreteLifConfig, GammaPolicy, Leak,
    LifConfig, ResetMode, SnnNetwork, SpikeTrain,
};

/// Spike-train norms, leaky integrate-and-fire quantization and bound experiments.
#[derive(Parser)]
#[command(name = "spikenorm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Alex,
    Disc,
    L2,
}

#[derive(Subcommand)]
enum Command {
    /// Print a norm of a spike train.
    Norm {
        #[arg(long)]
        alpha: Leak,
        #[arg(long, value_enum, default_value = "alex")]
        kind: NormKind,
        input: PathBuf,
    },
    /// Run a single neuron and print its output train.
    Lif {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        alpha: Leak,
        #[arg(long, default_value = "mod")]
        reset: ResetMode,
        /// Simulate on a uniform time grid instead of event by event.
        #[arg(long)]
        discrete: bool,
        #[arg(long, requires = "discrete")]
        dt: Option<f64>,
        #[arg(long, requires = "discrete", default_value = "exact")]
        beta: BetaMode,
        input: PathBuf,
    },
    /// Propagate input trains through a feed-forward network.
    Snn {
        #[arg(long)]
        net: PathBuf,
        inputs: PathBuf,
    },
    /// Split a train into quantized part, residual and unit-norm trains.
    Decompose {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value = "0")]
        alpha: Leak,
        input: PathBuf,
    },
    /// Print the per-output perturbation bound of a network.
    Bound {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, default_value = "safe")]
        gamma: GammaPolicy,
        /// Comma-separated input perturbation norms.
        #[arg(long, value_delimiter = ',', required = true)]
        nu_norms: Vec<f64>,
    },
    /// Run a randomized experiment and write CSV rows and a JSON summary.
    Experiment {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENTS))]
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Also render (alpha, lambda) surfaces as SVG heatmaps.
        #[arg(long)]
        svg: bool,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Norm { alpha, kind, input } => {
            let train: SpikeTrain = read_json(&input)?;
            let value = match kind {
                NormKind::Alex => alexiewicz_norm(&train, alpha),
                NormKind::Disc => discrepancy_norm(&train, alpha),
                NormKind::L2 => l2_norm(&train, alpha)?,
            };
            println!("{value:?}");
        }
        Command::Lif {
            theta,
            alpha,
            reset,
            discrete,
            dt,
            beta,
            input,
        } => {
            let train: SpikeTrain = read_json(&input)?;
            let neuron = LifConfig::new(theta, alpha, reset)?;
            let out = if discrete {
                let dt = dt.unwrap_or(1.0);
                let cfg = DiscreteLifConfig::new(neuron, dt, beta)?;
                from_grid(&lif_discrete(&to_grid(&train, dt)?, &cfg)?, dt)
            } else {
                lif(&train, &neuron)
            };
            print_json(&out)?;
        }
        Command::Snn { net, inputs } => {
            let network: SnnNetwork = read_json(&net)?;
            let trains: Vec<SpikeTrain> = read_json(&inputs)?;
            print_json(&snn_forward(&trains, &network)?)?;
        }
        Command::Decompose {
            theta,
            alpha,
            input,
        } => {
            let train: SpikeTrain = read_json(&input)?;
            let d: Decomposition = decompose(&train, &LifConfig::quantizer(theta, alpha)?)?;
            print_json(&d)?;
        }
        Command::Bound {
            net,
            gamma,
            nu_norms,
        } => {
            let network: SnnNetwork = read_json(&net)?;
            let neuron = network.neuron();
            let g = gamma_for(neuron.alpha, gamma);
            print_json(&snn_error_bound(&nu_norms, &network, g, neuron.theta)?)?;
        }
        Command::Experiment {
            name,
            seed,
            trials,
            out,
            svg,
        } => {
            let report = run_named(&name, seed, trials)?;
            let written = spikenorm::io::write_report(&report, &out, svg)
                .with_context(|| format!("cannot write results to {}", out.display()))?;
            for path in &written {
                println!("wrote {}", path.display());
            }
            for check in &report.checks {
                let status = if check.passed { "PASS" } else { "FAIL" };
                println!("{status} {}: {}", check.name, check.detail);
            }
            let failed = report.failed_records().count();
            let asserted = report.records.iter().filter(|r| r.pass.is_some()).count();
            println!("{failed} of {asserted} asserted rows failed");
            if !report.all_passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
