use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ris_secrecy::cli::{self, Command, Overrides};

#[derive(Parser)]
#[command(
    name = "ris-secrecy",
    version,
    about = "Secrecy rates of RIS-assisted mm-Wave links"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides `monte_carlo.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides `monte_carlo.trials`.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads, a positive count or `auto`.
    #[arg(long, global = true, default_value = "auto")]
    threads: String,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Ergodic secrecy rate over a parameter sweep.
    ErgodicSweep,
    /// Secrecy-rate grid over Bob positions plus threshold contours.
    SecrecyMap,
    /// Monte Carlo ergodic rate against the closed-form lower bound.
    BoundCheck,
    /// Monte Carlo E|g_E^H g_B|^2 against eta(N).
    EtaCheck,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::ErgodicSweep => Command::ErgodicSweep,
            Cmd::SecrecyMap => Command::SecrecyMap,
            Cmd::BoundCheck => Command::BoundCheck,
            Cmd::EtaCheck => Command::EtaCheck,
        }
    }
}

fn configure_threads(spec: &str) -> Result<(), String> {
    if spec == "auto" {
        return Ok(());
    }
    let n: usize =
        spec.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            format!("--threads expects a positive integer or `auto`, got `{spec}`")
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if let Err(msg) = configure_threads(&args.threads) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let overrides = Overrides {
        seed: args.seed,
        trials: args.trials,
        output_dir: args.out,
    };
    let result = cli::load_config(args.config.as_deref())
        .and_then(|cfg| cli::run(args.command.into(), cfg, &overrides));
    match result {
        Ok(manifest) => {
            println!(
                "{}: wrote {} in {:.2} s (config {})",
                manifest.subcommand,
                manifest.outputs.join(", "),
                manifest.duration_secs,
                &manifest.config_hash[..12]
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
