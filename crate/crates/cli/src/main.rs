//! `casimir`: sweeps of the exact sphere-in-sphere Casimir energy and its
//! asymptotic approximations, written as CSV/JSON with a run manifest.

mod commands;
mod config;
mod error;
mod grid;
mod output;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::Outcome;
use error::CliResult;
use output::Run;

#[derive(Parser)]
#[command(name = "casimir", version, about = "Casimir energies of a sphere inside a spherical cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact energy over an offset sweep, with the full-PFA ratio.
    Energy(WithConfig<commands::energy::EnergyFlags>),
    /// Force over the full PFA from an energy sweep.
    Force(WithConfig<commands::force::ForceFlags>),
    /// Casimir-Polder multipole energy, optionally against the exact one.
    Cp(WithConfig<commands::cp::CpFlags>),
    /// Full proximity-force energy and force over a gap sweep.
    Pfa(WithConfig<commands::pfa::PfaFlags>),
    /// Fit a registered ansatz to a CSV; writes JSON.
    Fit(WithConfig<commands::fit::FitFlags>),
}

#[derive(Args)]
struct WithConfig<F: Args> {
    /// JSON config (flat flags object or a run manifest); flags override it.
    #[arg(long)]
    config: Option<String>,
    #[command(flatten)]
    flags: F,
}

trait HasOut {
    fn out(&self) -> &str;
}

macro_rules! has_out {
    ($($t:ty),*) => {$(impl HasOut for $t { fn out(&self) -> &str { &self.out } })*};
}
has_out!(
    commands::energy::EnergyParams,
    commands::force::ForceParams,
    commands::cp::CpParams,
    commands::pfa::PfaParams,
    commands::fit::FitParams
);

fn execute<F, P>(
    name: &'static str,
    args: WithConfig<F>,
    run: fn(&P) -> CliResult<(Vec<u8>, Outcome)>,
) -> CliResult<Outcome>
where
    F: Args + Serialize + Default,
    P: DeserializeOwned + Serialize + HasOut,
{
    let file = args.config.as_deref().map(config::load).transpose()?;
    let params: P = config::resolve(&args.flags, file)?;
    let started = Run::start(name, &params);
    let (bytes, outcome) = run(&params)?;
    let status = match &outcome {
        Outcome::Ok => "ok",
        Outcome::Partial(_) => "convergence_failure",
    };
    started.finish(params.out(), &bytes, status)?;
    Ok(outcome)
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Energy(a) => execute("energy", a, commands::energy::run),
        Command::Force(a) => execute("force", a, commands::force::run),
        Command::Cp(a) => execute("cp", a, commands::cp::run),
        Command::Pfa(a) => execute("pfa", a, commands::pfa::run),
        Command::Fit(a) => execute("fit", a, commands::fit::run),
    };
    let code = match result {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::Partial(msg)) => {
            eprintln!("casimir: convergence: {msg}");
            3
        }
        Err(e) => {
            eprintln!("casimir: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
