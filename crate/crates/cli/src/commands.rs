//! Implementations of the CLI subcommands. Design/simulate/sweep commands
//! write their artifacts into the output directory; fit and noise commands
//! print a JSON report to stdout (and optionally to a file).

use std::path::{Path, PathBuf};

use paramp_core::calibrate::{self, FitResult, TuningCurveGuess};
use paramp_core::network::{environment_impedance, taper_sparams, FrequencyGrid};
use paramp_core::noise::{
    noise_temperature_interval, photon_flux_power, quantum_limit_temperature, snr_improvement,
    watts_to_dbm, NoiseChain,
};
use paramp_core::paramp::{
    embedded_gain_profile, gain_bandwidth, pump_amplitude_for_peak_gain, pump_strength_for_gain,
    resonant_frequency, rwa_gain_profile, EnvironmentModel, GainProfile,
};
use paramp_core::taper::{impedance_profile, ripple_parameter, TaperProfile};
use paramp_core::{Error, Result};
use serde::Serialize;

use crate::config::{EnvironmentConfig, ProjectConfig};
use crate::output::{sig12, sig12_opt, to_json_bytes, write_atomic};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn resolve_out_dir(flag: &Option<PathBuf>, config: &ProjectConfig) -> PathBuf {
    flag.clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn build_profile(
    config: &ProjectConfig,
) -> Result<(paramp_core::taper::TaperDesignSpec, TaperProfile)> {
    let spec = config.taper_spec()?;
    let profile = impedance_profile(&spec, config.simulation.profile_samples)?;
    Ok((spec, profile))
}

#[derive(Serialize)]
struct TaperSummary {
    ripple_a: f64,
    gamma0: f64,
    gamma_max: f64,
    length_m: f64,
    f_cutoff_hz: f64,
    eps_eff: f64,
    n_samples: usize,
    impedance_source_end_ohm: f64,
    impedance_load_end_ohm: f64,
    width_source_end_m: f64,
    width_load_end_m: f64,
}

pub fn design_taper(config: &ProjectConfig, out_dir: &Path) -> Result<()> {
    let spec = config.taper_spec()?;
    let ripple = ripple_parameter(&spec)?;
    let profile = impedance_profile(&spec, config.simulation.profile_samples)?;

    let mut csv = Vec::new();
    profile.write_csv(&mut csv)?;
    write_atomic(&out_dir.join("taper_profile.csv"), &csv)?;

    let first = profile.samples.first().expect("profile has samples");
    let last = profile.samples.last().expect("profile has samples");
    let summary = TaperSummary {
        ripple_a: sig12(ripple),
        gamma0: sig12(profile.gamma0),
        gamma_max: sig12(spec.gamma_max),
        length_m: sig12(profile.length),
        f_cutoff_hz: sig12(spec.f_cutoff),
        eps_eff: sig12(spec.eps_eff),
        n_samples: profile.samples.len(),
        impedance_source_end_ohm: sig12(first.impedance),
        impedance_load_end_ohm: sig12(last.impedance),
        width_source_end_m: sig12(first.width),
        width_load_end_m: sig12(last.width),
    };
    write_atomic(
        &out_dir.join("taper_summary.json"),
        &to_json_bytes(&summary)?,
    )
}

pub fn simulate_sparams(config: &ProjectConfig, out_dir: &Path) -> Result<()> {
    let (spec, profile) = build_profile(config)?;
    let grid = config.frequency_grid.to_grid()?;
    let port_refs = config.simulation.port_refs.unwrap_or((50.0, spec.z_load));
    let s = taper_sparams(
        &profile,
        &grid,
        config.simulation.n_segments,
        spec.eps_eff,
        port_refs,
    )?;

    let mut touchstone = Vec::new();
    s.write_touchstone(&mut touchstone)?;
    write_atomic(&out_dir.join("sparams.s2p"), &touchstone)?;

    let mut csv = Vec::new();
    s.write_db_csv(&mut csv)?;
    write_atomic(&out_dir.join("sparams_db.csv"), &csv)
}

#[derive(Serialize)]
struct GainModelReport {
    peak_gain_db: f64,
    peak_frequency_hz: f64,
    bandwidth_15db_hz: Option<f64>,
    bandwidth_20db_hz: Option<f64>,
    pump_amplitude: f64,
}

#[derive(Serialize)]
struct GainReport {
    pump_frequency_hz: f64,
    resonant_frequency_hz: f64,
    kappa_hz: f64,
    lambda_hz: f64,
    rwa: GainModelReport,
    embedded: GainModelReport,
}

fn model_report(profile: &GainProfile, pump_amplitude: f64) -> GainModelReport {
    GainModelReport {
        peak_gain_db: sig12(profile.peak_gain_db()),
        peak_frequency_hz: sig12(profile.peak_frequency()),
        bandwidth_15db_hz: sig12_opt(gain_bandwidth(profile, 15.0).ok()),
        bandwidth_20db_hz: sig12_opt(gain_bandwidth(profile, 20.0).ok()),
        pump_amplitude: sig12(pump_amplitude),
    }
}

pub fn gain(config: &ProjectConfig, out_dir: &Path) -> Result<()> {
    let resonator = config.resonator()?;
    if !(resonator.pump_frequency > 0.0) {
        return Err(Error::InvalidSpec(
            "gain sweeps need resonator.pump_frequency > 0".into(),
        ));
    }
    let grid = config.frequency_grid.to_grid()?;
    if grid.is_empty() {
        return Err(Error::InvalidSpec("gain sweep grid is empty".into()));
    }
    let f_stop = *grid.points().last().expect("nonempty");
    let f_start = grid.points()[0];
    if f_stop >= resonator.pump_frequency {
        return Err(Error::InvalidSpec(format!(
            "sweep extends to {f_stop} Hz at or above the pump ({} Hz); \
             the idler frequency must stay positive",
            resonator.pump_frequency
        )));
    }

    // environment and the constant impedance the lumped model references
    let (env, kappa_ref_ohm) = match config.environment()? {
        EnvironmentConfig::Constant { impedance } => {
            (EnvironmentModel::constant(impedance)?, impedance)
        }
        EnvironmentConfig::Taper { termination } => {
            let (spec, profile) = build_profile(config)?;
            // cover both the signal band and its pump-image band
            let lo = f_start.min(resonator.pump_frequency - f_stop) * 0.999;
            let hi = f_stop.max(resonator.pump_frequency - f_start) * 1.001;
            let table_grid = FrequencyGrid::linspace(lo, hi, 4 * grid.len() + 1)?;
            let table = environment_impedance(&profile, &table_grid, termination, spec.eps_eff)?;
            (EnvironmentModel::tabulated(table)?, spec.z_load)
        }
    };

    let omega0 = resonant_frequency(&resonator)?;
    let kappa = 1.0 / (resonator.capacitance * kappa_ref_ohm);
    let half_pump = resonator.pump_frequency / 2.0;
    let delta = TWO_PI * half_pump - omega0;

    let (eps_embedded, lambda) = match config.gain.target_peak_db {
        Some(target_db) => {
            let eps = pump_amplitude_for_peak_gain(&resonator, &env, &grid, target_db)?;
            let lambda = pump_strength_for_gain(10f64.powf(target_db / 10.0), kappa)?;
            (eps, lambda)
        }
        None => (
            resonator.pump_amplitude,
            resonator.pump_amplitude * omega0 / 4.0,
        ),
    };

    let rwa_profile = rwa_gain_profile(&grid, half_pump, kappa, lambda, delta)?;
    let embedded_profile = embedded_gain_profile(
        &resonator.with_pump(resonator.pump_frequency, eps_embedded),
        &env,
        &grid,
    )?;

    let mut csv = Vec::new();
    rwa_profile.write_csv(&mut csv)?;
    write_atomic(&out_dir.join("gain_rwa.csv"), &csv)?;
    let mut csv = Vec::new();
    embedded_profile.write_csv(&mut csv)?;
    write_atomic(&out_dir.join("gain_embedded.csv"), &csv)?;

    let report = GainReport {
        pump_frequency_hz: sig12(resonator.pump_frequency),
        resonant_frequency_hz: sig12(omega0 / TWO_PI),
        kappa_hz: sig12(kappa / TWO_PI),
        lambda_hz: sig12(lambda / TWO_PI),
        rwa: model_report(&rwa_profile, 4.0 * lambda / omega0),
        embedded: model_report(&embedded_profile, eps_embedded),
    };
    write_atomic(&out_dir.join("gain_report.json"), &to_json_bytes(&report)?)
}

#[derive(Serialize)]
struct TuneCurveSummary {
    rows_written: usize,
    rows_skipped_divergent: usize,
    f_min_hz: Option<f64>,
    f_max_hz: Option<f64>,
    tunable_span_hz: Option<f64>,
}

pub fn tune_curve(config: &ProjectConfig, out_dir: &Path) -> Result<()> {
    let resonator = config.resonator()?;
    let tc = config.tune_curve;
    if tc.points < 2 {
        return Err(Error::InvalidSpec(format!(
            "tune_curve.points must be at least 2, got {}",
            tc.points
        )));
    }
    let mut csv = String::from("bias,freq_hz\n");
    let mut written = 0usize;
    let mut skipped = 0usize;
    let mut f_min = f64::INFINITY;
    let mut f_max = f64::NEG_INFINITY;
    for i in 0..tc.points {
        let phi =
            tc.start_phi0 + (tc.stop_phi0 - tc.start_phi0) * i as f64 / (tc.points - 1) as f64;
        match resonant_frequency(&resonator.with_flux_bias(phi)) {
            Ok(omega) => {
                let f = omega / TWO_PI;
                f_min = f_min.min(f);
                f_max = f_max.max(f);
                csv.push_str(&format!(
                    "{},{}\n",
                    paramp_core::format_sig12(phi),
                    paramp_core::format_sig12(f)
                ));
                written += 1;
            }
            Err(Error::DivergentInductance(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    write_atomic(&out_dir.join("tune_curve.csv"), csv.as_bytes())?;
    let summary = TuneCurveSummary {
        rows_written: written,
        rows_skipped_divergent: skipped,
        f_min_hz: (written > 0).then(|| sig12(f_min)),
        f_max_hz: (written > 0).then(|| sig12(f_max)),
        tunable_span_hz: (written > 0).then(|| sig12(f_max - f_min)),
    };
    write_atomic(
        &out_dir.join("tune_curve_summary.json"),
        &to_json_bytes(&summary)?,
    )
}

/// Round every parameter of a fit result for JSON emission.
fn rounded_fit(mut fit: FitResult) -> FitResult {
    for p in &mut fit.params {
        p.value = sig12(p.value);
    }
    fit.residual_norm = sig12(fit.residual_norm);
    fit
}

pub fn emit_report<T: Serialize>(report: &T, out: &Option<PathBuf>) -> Result<()> {
    let bytes = to_json_bytes(report)?;
    let mut stdout = std::io::stdout().lock();
    std::io::Write::write_all(&mut stdout, &bytes)?;
    if let Some(path) = out {
        write_atomic(path, &bytes)?;
    }
    Ok(())
}

pub fn fit_tuning(
    config: &ProjectConfig,
    data: &Path,
    bias_scale: f64,
    bias_offset: f64,
    out: &Option<PathBuf>,
) -> Result<()> {
    let resonator = config.resonator()?;
    let rows = calibrate::read_flux_sweep_csv(open(data)?)?;
    let guess = TuningCurveGuess {
        josephson_inductance: resonator.josephson_inductance,
        capacitance: resonator.capacitance,
        geometric_inductance: resonator.geometric_inductance,
        bias_scale,
        bias_offset,
        asymmetry: resonator.asymmetry,
    };
    let fit = calibrate::fit_tuning_curve(&rows, &guess)?;
    emit_report(&rounded_fit(fit), out)
}

pub fn fit_resonance(data: &Path, out: &Option<PathBuf>) -> Result<()> {
    let (freqs, trace) = calibrate::read_reflection_csv(open(data)?)?;
    let fit = calibrate::fit_reflection_resonance(&freqs, &trace)?;
    emit_report(&rounded_fit(fit), out)
}

#[derive(Serialize)]
struct StarkRowReport {
    power_dbm: f64,
    chi_hz: f64,
    n_bar: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_device_dbm: Option<f64>,
}

#[derive(Serialize)]
struct StarkReport {
    rows: Vec<StarkRowReport>,
    mean_chi_hz: f64,
}

pub fn fit_stark(
    data: &Path,
    kappa_r_hz: f64,
    resonator_freq_hz: Option<f64>,
    out: &Option<PathBuf>,
) -> Result<()> {
    let rows = calibrate::read_stark_csv(open(data)?)?;
    if rows.len() < 3 {
        return Err(Error::DegenerateData(format!(
            "Stark calibration needs at least 3 rows, got {}",
            rows.len()
        )));
    }
    let kappa_r = TWO_PI * kappa_r_hz;
    let mut reports = Vec::with_capacity(rows.len());
    let mut chi_sum = 0.0;
    for row in &rows {
        let (chi, n_bar) =
            calibrate::chi_nbar_from_stark_dephasing(row.delta_ac, row.gamma_phi, kappa_r)?;
        chi_sum += chi;
        let p_device_dbm = match resonator_freq_hz {
            Some(f_r) => Some(sig12(watts_to_dbm(photon_flux_power(
                TWO_PI * f_r,
                kappa_r,
                n_bar,
            )?))),
            None => None,
        };
        reports.push(StarkRowReport {
            power_dbm: sig12(row.power_dbm),
            chi_hz: sig12(chi / TWO_PI),
            n_bar: sig12(n_bar),
            p_device_dbm,
        });
    }
    let report = StarkReport {
        mean_chi_hz: sig12(chi_sum / rows.len() as f64 / TWO_PI),
        rows: reports,
    };
    emit_report(&report, out)
}

pub fn fit_attenuation(data: &Path, out: &Option<PathBuf>) -> Result<()> {
    let pairs = calibrate::read_attenuation_csv(open(data)?)?;
    let fit = calibrate::fit_attenuation(&pairs)?;
    emit_report(&rounded_fit(fit), out)
}

#[derive(Serialize)]
struct CompressionReport {
    p1db_dbm: f64,
    small_signal_gain_db: f64,
    non_monotonic: bool,
}

pub fn fit_compression(data: &Path, out: &Option<PathBuf>) -> Result<()> {
    let rows = calibrate::read_gain_power_csv(open(data)?)?;
    let result = calibrate::compression_point(&rows)?;
    let report = CompressionReport {
        p1db_dbm: sig12(result.p1db_dbm),
        small_signal_gain_db: sig12(result.small_signal_gain_db),
        non_monotonic: result.non_monotonic,
    };
    emit_report(&report, out)
}

#[derive(Debug, Clone, Copy)]
pub struct NoiseRequest {
    pub t_first: Option<f64>,
    pub t_second: Option<f64>,
    pub t_second_max: Option<f64>,
    pub gain_db: Option<f64>,
    pub snr_db: Option<f64>,
    pub quantum_limit_hz: Option<f64>,
    pub photon_freq_hz: Option<f64>,
    pub photon_kappa_hz: Option<f64>,
    pub photon_nbar: Option<f64>,
}

#[derive(Serialize)]
struct SnrReport {
    snr_improvement: f64,
    snr_improvement_db: f64,
}

#[derive(Serialize)]
struct NoiseTemperatureReport {
    t_first_stage_k_min: f64,
    t_first_stage_k_max: f64,
}

#[derive(Serialize)]
struct PhotonPowerReport {
    power_w: f64,
    power_dbm: f64,
}

#[derive(Serialize)]
struct NoiseReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    snr: Option<SnrReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_temperature: Option<NoiseTemperatureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantum_limit_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    photon_power: Option<PhotonPowerReport>,
}

pub fn noise(req: &NoiseRequest, out: &Option<PathBuf>) -> Result<()> {
    let mut report = NoiseReport {
        snr: None,
        noise_temperature: None,
        quantum_limit_k: None,
        photon_power: None,
    };

    if let (Some(t_first), Some(t_second), Some(gain_db)) = (req.t_first, req.t_second, req.gain_db)
    {
        let chain = NoiseChain {
            t_first_stage: t_first,
            t_second_stage: t_second,
            gain: 10f64.powf(gain_db / 10.0),
        };
        let snr = snr_improvement(&chain)?;
        report.snr = Some(SnrReport {
            snr_improvement: sig12(snr),
            snr_improvement_db: sig12(10.0 * snr.log10()),
        });
    }
    if let (Some(snr_db), Some(t_second), Some(gain_db)) = (req.snr_db, req.t_second, req.gain_db) {
        let snr = 10f64.powf(snr_db / 10.0);
        let gain = 10f64.powf(gain_db / 10.0);
        let t_hi = req.t_second_max.unwrap_or(t_second);
        let (t_min, t_max) = noise_temperature_interval(snr, (t_second, t_hi), gain)?;
        report.noise_temperature = Some(NoiseTemperatureReport {
            t_first_stage_k_min: sig12(t_min.min(t_max)),
            t_first_stage_k_max: sig12(t_min.max(t_max)),
        });
    }
    if let Some(f) = req.quantum_limit_hz {
        report.quantum_limit_k = Some(sig12(quantum_limit_temperature(f)?));
    }
    if let (Some(f_r), Some(kappa_hz), Some(n_bar)) =
        (req.photon_freq_hz, req.photon_kappa_hz, req.photon_nbar)
    {
        let p = photon_flux_power(TWO_PI * f_r, TWO_PI * kappa_hz, n_bar)?;
        report.photon_power = Some(PhotonPowerReport {
            power_w: sig12(p),
            power_dbm: sig12(watts_to_dbm(p)),
        });
    }

    if report.snr.is_none()
        && report.noise_temperature.is_none()
        && report.quantum_limit_k.is_none()
        && report.photon_power.is_none()
    {
        return Err(Error::InvalidSpec(
            "no noise computation requested; supply --t-first/--t-second/--gain-db, \
             --snr-db/--t-second/--gain-db, --quantum-limit-hz, or the photon flags"
                .into(),
        ));
    }
    emit_report(&report, out)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(Error::from)
}
