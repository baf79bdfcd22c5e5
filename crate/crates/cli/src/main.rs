//! `paramp`: design, simulate, and calibrate impedance-transformed
//! parametric amplifiers from a single JSON configuration.
//!
//! Exit codes: 0 success, 2 domain or validation error, 3 I/O error.
//! Failures print a one-line machine-readable JSON object to stderr:
//! `{"error":{"kind":"...","message":"..."}}`.

// Validation uses `!(x > 0.0)` so NaN inputs are rejected together with
// out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use paramp_core::{Error, Result};

use crate::config::ProjectConfig;

#[derive(Parser)]
#[command(
    name = "paramp",
    version,
    about = "Design, simulation, and calibration workflows for \
             impedance-transformed Josephson parametric amplifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Project configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override a config value by dotted path, e.g. --set taper.f_cutoff=4e9.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Where to write output files (default: config output_dir, then `.`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<(ProjectConfig, PathBuf)> {
        let config = ProjectConfig::load(&self.config, &self.set)?;
        let out_dir = commands::resolve_out_dir(&self.out_dir, &config);
        Ok((config, out_dir))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the Klopfenstein CPW taper profile.
    DesignTaper(ConfigArgs),
    /// Cascade the taper and export S-parameters (Touchstone + dB CSV).
    SimulateSparams(ConfigArgs),
    /// Sweep parametric gain in the lumped and embedded models.
    Gain(ConfigArgs),
    /// Sweep the resonant frequency against flux bias.
    TuneCurve(ConfigArgs),
    /// Extract parameters from measurement data.
    Fit {
        #[command(subcommand)]
        what: FitCommand,
    },
    /// Noise-chain arithmetic: SNR improvement, noise temperature,
    /// quantum limit, photon power.
    Noise(NoiseArgs),
}

#[derive(Subcommand)]
enum FitCommand {
    /// Fit the flux-tuning curve (CSV: bias,freq_hz[,sigma_hz]); the
    /// config's resonator section provides the initial guess.
    Tuning {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Initial guess for the bias-to-flux scale.
        #[arg(long, default_value_t = 1.0)]
        bias_scale: f64,
        /// Initial guess for the bias-to-flux offset (flux quanta).
        #[arg(long, default_value_t = 0.0)]
        bias_offset: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a single-port reflection resonance (CSV: freq_hz,re_s11,im_s11).
    Resonance {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Photon-number calibration from Stark shift and dephasing
    /// (CSV: power_dbm,delta_ac_hz,gamma_phi_hz).
    Stark {
        #[arg(long)]
        data: PathBuf,
        /// Readout resonator linewidth (Hz).
        #[arg(long)]
        kappa_r_hz: f64,
        /// Readout resonator frequency (Hz); adds the device-plane power
        /// per row when given.
        #[arg(long)]
        resonator_freq_hz: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a constant line attenuation (CSV: p_source_dbm,p_device_dbm).
    Attenuation {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the 1-dB compression point (CSV: p_in_dbm,gain_db).
    Compression {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct NoiseArgs {
    /// First-stage noise temperature (K), for the SNR-improvement direction.
    #[arg(long)]
    t_first: Option<f64>,
    /// Second-stage noise temperature (K), or the low end of its range.
    #[arg(long)]
    t_second: Option<f64>,
    /// High end of the second-stage temperature range (K).
    #[arg(long)]
    t_second_max: Option<f64>,
    /// First-stage gain (dB).
    #[arg(long)]
    gain_db: Option<f64>,
    /// Measured SNR improvement (dB), for the noise-temperature direction.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Report the half-photon quantum-limit temperature at this frequency (Hz).
    #[arg(long)]
    quantum_limit_hz: Option<f64>,
    /// Resonator frequency (Hz) for the photon-power calculation.
    #[arg(long)]
    photon_freq_hz: Option<f64>,
    /// Resonator linewidth (Hz) for the photon-power calculation.
    #[arg(long)]
    photon_kappa_hz: Option<f64>,
    /// Intracavity photon number for the photon-power calculation.
    #[arg(long)]
    photon_nbar: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DesignTaper(args) => {
            let (config, out_dir) = args.load()?;
            commands::design_taper(&config, &out_dir)
        }
        Command::SimulateSparams(args) => {
            let (config, out_dir) = args.load()?;
            commands::simulate_sparams(&config, &out_dir)
        }
        Command::Gain(args) => {
            let (config, out_dir) = args.load()?;
            commands::gain(&config, &out_dir)
        }
        Command::TuneCurve(args) => {
            let (config, out_dir) = args.load()?;
            commands::tune_curve(&config, &out_dir)
        }
        Command::Fit { what } => match what {
            FitCommand::Tuning {
                data,
                config,
                set,
                bias_scale,
                bias_offset,
                out,
            } => {
                let config = ProjectConfig::load(&config, &set)?;
                commands::fit_tuning(&config, &data, bias_scale, bias_offset, &out)
            }
            FitCommand::Resonance { data, out } => commands::fit_resonance(&data, &out),
            FitCommand::Stark {
                data,
                kappa_r_hz,
                resonator_freq_hz,
                out,
            } => commands::fit_stark(&data, kappa_r_hz, resonator_freq_hz, &out),
            FitCommand::Attenuation { data, out } => commands::fit_attenuation(&data, &out),
            FitCommand::Compression { data, out } => commands::fit_compression(&data, &out),
        },
        Command::Noise(args) => {
            let request = commands::NoiseRequest {
                t_first: args.t_first,
                t_second: args.t_second,
                t_second_max: args.t_second_max,
                gain_db: args.gain_db,
                snr_db: args.snr_db,
                quantum_limit_hz: args.quantum_limit_hz,
                photon_freq_hz: args.photon_freq_hz,
                photon_kappa_hz: args.photon_kappa_hz,
                photon_nbar: args.photon_nbar,
            };
            commands::noise(&request, &args.out)
        }
    }
}

/// Honor PARAMP_THREADS as a cap on the worker pool.
#[cfg(feature = "parallel")]
fn init_thread_pool() -> Result<()> {
    if let Ok(raw) = std::env::var("PARAMP_THREADS") {
        let threads: usize = raw.parse().map_err(|_| {
            Error::InvalidSpec(format!(
                "PARAMP_THREADS must be a positive integer, got {raw:?}"
            ))
        })?;
        if threads == 0 {
            return Err(Error::InvalidSpec(
                "PARAMP_THREADS must be a positive integer".into(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidSpec(format!("thread pool setup failed: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn init_thread_pool() -> Result<()> {
    Ok(())
}

fn error_json(err: &Error) -> String {
    serde_json::json!({
        "error": {
            "kind": err.kind(),
            "message": err.to_string(),
        }
    })
    .to_string()
}

fn main() {
    let cli = Cli::parse();
    let outcome = init_thread_pool().and_then(|()| run(cli));
    if let Err(err) = outcome {
        eprintln!("{}", error_json(&err));
        std::process::exit(if err.is_io() { 3 } else { 2 });
    }
}
