use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kerrgate_cli::{run, CliError, Experiment, RunConfig};

const CONFIG_KEYS: &str = "\
Config (JSON, every key optional): g_plus_mhz, g_minus_mhz, kappa_mhz, gamma_mhz,
transit_rate_mhz, atom_lifetime_ns, mean_atoms, detunings {probe_mhz, pump_mhz,
atom_cavity_mhz}, n_max, phase_sign, exact_oracle, seed, angles {phi_a_deg,
phi_b_deg, delta_deg}. Grids are {min, max, points}.";

#[derive(Parser)]
#[command(name = "kerrgate", version, about = "Cavity-QED phase-gate model runner", after_help = CONFIG_KEYS)]
struct Cli {
    #[command(subcommand)]
    experiment: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weak-field transmission and phase vs probe detuning.
    /// Keys: response.omega_mhz. Writes response.csv.
    Response(Common),
    /// Resonant transmission vs σ₊ drive from the master equation.
    /// Keys: saturation.drive_mhz, n_max. Writes saturation.csv.
    Saturation(Common),
    /// Probe phase vs pump photon number, with the Δ slope fit.
    /// Keys: detunings, kerr.{pump, probe, m_pump, slope_max_m}. Writes kerr.csv, kerr_slope.json.
    Kerr(Common),
    /// Gate truth table; optional Δ extraction from gate.slope_csv.
    /// Keys: angles, gate.{slope_csv, slope_max_m}. Writes truth_table.txt, gate.json.
    Gate(Common),
    /// Maximal CHSH value of the gate output for the ++ input.
    /// Keys: angles. Writes chsh.json.
    Chsh(Common),
    /// Least-squares atom-number fit to measured or synthetic spectra.
    /// Keys: fit.{data_csv, mode, initial_guess, omega_mhz, sigma_transmission, sigma_phase_deg}, seed.
    Fit(Common),
    /// CHSH value vs coherence damping.
    /// Keys: angles, damping.{family, d}. Writes damping.csv.
    Damping(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file; reference parameters when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Sign applied to reported probe phases: +1 or -1.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_sign)]
    phase_sign: Option<i8>,
    /// Also report the exact reduced-state slope relation.
    #[arg(long)]
    exact_oracle: bool,
}

fn parse_sign(s: &str) -> Result<i8, String> {
    match s {
        "+1" | "1" => Ok(1),
        "-1" => Ok(-1),
        _ => Err(format!("expected +1 or -1, got {s}")),
    }
}

fn execute(experiment: Experiment, c: Common) -> Result<PathBuf, CliError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(n) = c.n_max {
        cfg.n_max = n;
    }
    if let Some(s) = c.phase_sign {
        cfg.phase_sign = s;
    }
    cfg.exact_oracle |= c.exact_oracle;
    run(experiment, &cfg, &c.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.experiment {
        Command::Response(c) => (Experiment::Response, c),
        Command::Saturation(c) => (Experiment::Saturation, c),
        Command::Kerr(c) => (Experiment::Kerr, c),
        Command::Gate(c) => (Experiment::Gate, c),
        Command::Chsh(c) => (Experiment::Chsh, c),
        Command::Fit(c) => (Experiment::Fit, c),
        Command::Damping(c) => (Experiment::Damping, c),
    };
    match execute(experiment, common) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("kerrgate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
