//! Parameter extraction from measured or synthetic data: tuning-curve and
//! reflection-resonance fits, Stark/dephasing photon-number calibration,
//! attenuation lines, and 1-dB compression points.
//!
//! Fits run a damped Gauss-Newton with numerically differenced Jacobians
//! ([`crate::optimize`]); frequencies are handled in GHz internally to keep
//! the normal equations well conditioned, and every fitted parameter is
//! scaled by its initial guess.

use num_complex::Complex64;
use serde::Serialize;

use crate::optimize::{levenberg_marquardt, FitOptions};
use crate::{Error, Result};

/// Correlation-scaled normal matrices worse conditioned than this flag the
/// data as unable to identify the parameters.
const DEGENERATE_CONDITION: f64 = 1e10;

/// One row of a flux sweep: coil bias (arbitrary units) and measured
/// resonant frequency (Hz), with an optional 1-sigma uncertainty (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSweepRow {
    pub bias: f64,
    pub freq_hz: f64,
    pub sigma_hz: Option<f64>,
}

/// One row of a Stark-shift / dephasing power calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkRow {
    pub power_dbm: f64,
    /// ac Stark shift (rad/s).
    pub delta_ac: f64,
    /// Measurement-induced dephasing rate (rad/s).
    pub gamma_phi: f64,
}

/// Named fitted parameter with its unit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitParam {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

/// Outcome of a fit, serializable as the `fit` subcommands' JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: Vec<FitParam>,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }
}

/// Initial guess for [`fit_tuning_curve`]. The capacitance is *held fixed*:
/// the tuning relation depends on C only through the products C*L_J and
/// C*L_geo, so a flux sweep alone cannot set its absolute scale; the
/// inductances are resolved against the supplied value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuningCurveGuess {
    /// Zero-flux effective SQUID inductance (H).
    pub josephson_inductance: f64,
    /// Resonator capacitance (F), treated as known.
    pub capacitance: f64,
    /// Geometric series inductance (H).
    pub geometric_inductance: f64,
    /// Bias-to-flux scale a in Phi_e/Phi0 = a * bias + b.
    pub bias_scale: f64,
    /// Bias-to-flux offset b (units of Phi0).
    pub bias_offset: f64,
    /// SQUID asymmetry d in [0, 1).
    pub asymmetry: f64,
}

/// Fit the flux-tuning relation
/// f(bias) = (2 pi)^-1 [C (L_J / sqrt(cos^2 F + d^2 sin^2 F) + L_geo)]^-1/2,
/// F = pi (a bias + b), for {L_J, L_geo, a, b, d} at fixed C.
///
/// The asymmetry is optimized as q = d^2 so its Jacobian column stays
/// finite at d = 0. Sweeps that span too little of a flux period leave the
/// parameters unidentifiable and are rejected as `DegenerateData`.
pub fn fit_tuning_curve(data: &[FluxSweepRow], guess: &TuningCurveGuess) -> Result<FitResult> {
    if data.len() < 6 {
        return Err(Error::DegenerateData(format!(
            "tuning-curve fit needs at least 6 rows, got {}",
            data.len()
        )));
    }
    if !(guess.josephson_inductance > 0.0) || !(guess.capacitance > 0.0) {
        return Err(Error::InvalidSpec(
            "initial inductance and capacitance must be positive".into(),
        ));
    }
    if guess.bias_scale == 0.0 {
        return Err(Error::InvalidSpec(
            "bias scale guess must be nonzero".into(),
        ));
    }

    let lj_scale = guess.josephson_inductance;
    let a_scale = guess.bias_scale;
    let c_fixed = guess.capacitance;
    // x = [L_J/lj_scale, L_geo/lj_scale, a/a_scale, b, q = d^2]
    let initial = [
        1.0,
        guess.geometric_inductance / lj_scale,
        1.0,
        guess.bias_offset,
        guess.asymmetry * guess.asymmetry,
    ];
    let model_ghz = |x: &[f64], bias: f64| -> Option<f64> {
        let (lj, lgeo, a, b, q) = (x[0] * lj_scale, x[1] * lj_scale, x[2] * a_scale, x[3], x[4]);
        if lj <= 0.0 {
            return None;
        }
        let f = std::f64::consts::PI * (a * bias + b);
        let (sin, cos) = f.sin_cos();
        let gsq = cos * cos + q * sin * sin;
        if gsq <= 1e-12 {
            return None;
        }
        let inductance = lj / gsq.sqrt() + lgeo;
        if inductance <= 0.0 {
            return None;
        }
        Some(1.0 / (2.0 * std::f64::consts::PI * (c_fixed * inductance).sqrt()) / 1e9)
    };
    let residuals = |x: &[f64]| -> Option<Vec<f64>> {
        data.iter()
            .map(|row| {
                let weight = match row.sigma_hz {
                    Some(s) if s > 0.0 => 1e9 / s,
                    _ => 1.0,
                };
                Some((model_ghz(x, row.bias)? - row.freq_hz / 1e9) * weight)
            })
            .collect()
    };

    let outcome = levenberg_marquardt(&residuals, &initial, &FitOptions::default())?;
    if !outcome.condition.is_finite() || outcome.condition > DEGENERATE_CONDITION {
        return Err(Error::DegenerateData(format!(
            "flux sweep does not identify the parameters (scaled normal-matrix \
             condition {:.2e}); sweep more than half a flux period",
            outcome.condition
        )));
    }
    if !outcome.converged {
        return Err(Error::NonConvergence(format!(
            "tuning-curve fit stalled after {} iterations (|grad| = {:.2e})",
            outcome.iterations, outcome.gradient_norm
        )));
    }
    let x = &outcome.params;
    Ok(FitResult {
        params: vec![
            FitParam {
                name: "josephson_inductance".into(),
                value: x[0] * lj_scale,
                unit: "H".into(),
            },
            FitParam {
                name: "capacitance".into(),
                value: c_fixed,
                unit: "F".into(),
            },
            FitParam {
                name: "geometric_inductance".into(),
                value: x[1] * lj_scale,
                unit: "H".into(),
            },
            FitParam {
                name: "bias_scale".into(),
                value: x[2] * a_scale,
                unit: "Phi0/bias".into(),
            },
            FitParam {
                name: "bias_offset".into(),
                value: x[3],
                unit: "Phi0".into(),
            },
            FitParam {
                name: "asymmetry".into(),
                value: x[4].max(0.0).sqrt(),
                unit: "1".into(),
            },
        ],
        residual_norm: outcome.residual_norm,
        converged: outcome.converged,
        iterations: outcome.iterations,
    })
}

/// Single-port reflection model
/// S11(f) = 1 - k_ext / (i (f - f_r) + (k_ext + k_int) / 2),
/// all arguments in the same frequency unit.
pub fn reflection_model(f: f64, f_r: f64, k_ext: f64, k_int: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) - k_ext / (Complex64::new(0.0, f - f_r) + (k_ext + k_int) / 2.0)
}

/// Fit a complex reflection trace for {f_r, kappa_ext, kappa_int} (Hz).
///
/// Initialization comes from the data itself: the resonance is located at
/// the sharpest phase swing, the total linewidth from the dip width (or a
/// tenth of the span for phase-only traces), and both the under- and
/// over-coupled branches are tried.
pub fn fit_reflection_resonance(freqs: &[f64], trace: &[Complex64]) -> Result<FitResult> {
    if freqs.len() != trace.len() {
        return Err(Error::InvalidSpec(format!(
            "{} frequencies vs {} trace points",
            freqs.len(),
            trace.len()
        )));
    }
    if freqs.len() < 8 {
        return Err(Error::DegenerateData(format!(
            "reflection fit needs at least 8 points, got {}",
            freqs.len()
        )));
    }
    let span = freqs[freqs.len() - 1] - freqs[0];
    if !(span > 0.0) {
        return Err(Error::PoorFit("trace has zero frequency span".into()));
    }

    // locate the resonance at the largest phase step between neighbors
    let mut fr0 = freqs[freqs.len() / 2];
    let mut best_step = -1.0;
    for i in 1..trace.len() {
        let mut dphi = (trace[i] * trace[i - 1].conj()).arg().abs();
        if !dphi.is_finite() {
            dphi = 0.0;
        }
        if dphi > best_step {
            best_step = dphi;
            fr0 = 0.5 * (freqs[i] + freqs[i - 1]);
        }
    }
    // linewidth guess from the dip half-width where the magnitude recovers
    let mags: Vec<f64> = trace.iter().map(|s| s.norm()).collect();
    let min_mag = mags.iter().cloned().fold(f64::MAX, f64::min);
    let max_mag = mags.iter().cloned().fold(f64::MIN, f64::max);
    let kt0 = if max_mag - min_mag > 0.05 {
        let half_level = 0.5 * (min_mag + max_mag);
        let below: usize = mags.iter().filter(|&&m| m < half_level).count();
        (below.max(1) as f64) * span / (freqs.len() - 1) as f64
    } else {
        span / 10.0
    };

    let data_norm = trace.iter().map(|s| s.norm_sqr()).sum::<f64>().sqrt();
    let residuals_for = |scale_fr: f64, scale_k: f64| {
        move |x: &[f64]| -> Option<Vec<f64>> {
            let (f_r, k_ext, k_int) = (x[0] * scale_fr, x[1] * scale_k, x[2] * scale_k);
            if k_ext <= 0.0 {
                return None;
            }
            let mut out = Vec::with_capacity(2 * freqs.len());
            for (f, s) in freqs.iter().zip(trace) {
                let diff = reflection_model(*f, f_r, k_ext, k_int) - s;
                out.push(diff.re);
                out.push(diff.im);
            }
            Some(out)
        }
    };

    let mut best: Option<crate::optimize::FitOutcome> = None;
    for branch_sign in [-1.0, 1.0] {
        let ke0 = 0.5 * kt0 * (1.0 + branch_sign * min_mag.clamp(0.0, 1.0));
        let ki0 = (kt0 - ke0).max(0.0);
        let f = residuals_for(fr0, kt0);
        let Ok(outcome) =
            levenberg_marquardt(&f, &[1.0, ke0 / kt0, ki0 / kt0], &FitOptions::default())
        else {
            continue;
        };
        if best
            .as_ref()
            .is_none_or(|b| outcome.residual_norm < b.residual_norm)
        {
            best = Some(outcome);
        }
    }
    let outcome = best.ok_or_else(|| {
        Error::NonConvergence("no reflection-fit branch produced a valid start".into())
    })?;
    if !outcome.converged {
        return Err(Error::NonConvergence(format!(
            "reflection fit stalled after {} iterations",
            outcome.iterations
        )));
    }
    if outcome.residual_norm > 0.10 * data_norm {
        return Err(Error::PoorFit(format!(
            "relative residual {:.1}% exceeds 10%",
            100.0 * outcome.residual_norm / data_norm
        )));
    }
    let (f_r, k_ext, k_int) = (
        outcome.params[0] * fr0,
        outcome.params[1] * kt0,
        outcome.params[2] * kt0,
    );
    Ok(FitResult {
        params: vec![
            FitParam {
                name: "resonant_frequency".into(),
                value: f_r,
                unit: "Hz".into(),
            },
            FitParam {
                name: "kappa_ext".into(),
                value: k_ext,
                unit: "Hz".into(),
            },
            FitParam {
                name: "kappa_int".into(),
                value: k_int,
                unit: "Hz".into(),
            },
            FitParam {
                name: "kappa_total".into(),
                value: k_ext + k_int,
                unit: "Hz".into(),
            },
        ],
        residual_norm: outcome.residual_norm,
        converged: outcome.converged,
        iterations: outcome.iterations,
    })
}

/// Invert the dispersive-readout relations Delta_ac = 2 chi n and
/// Gamma_phi = 8 chi^2 n / kappa_r for (chi, n). All rates in rad/s.
pub fn chi_nbar_from_stark_dephasing(
    delta_ac: f64,
    gamma_phi: f64,
    kappa_r: f64,
) -> Result<(f64, f64)> {
    if !(delta_ac > 0.0) || !(gamma_phi > 0.0) || !(kappa_r > 0.0) {
        return Err(Error::DomainError(format!(
            "Stark shift, dephasing, and linewidth must all be positive \
             (got {delta_ac}, {gamma_phi}, {kappa_r})"
        )));
    }
    let chi = gamma_phi * kappa_r / (4.0 * delta_ac);
    let n_bar = delta_ac / (2.0 * chi);
    Ok((chi, n_bar))
}

/// Least-squares constant attenuation A (dB) with unit slope:
/// P_device = P_source - A.
pub fn fit_attenuation(pairs: &[(f64, f64)]) -> Result<FitResult> {
    if pairs.len() < 2 {
        return Err(Error::DegenerateData(format!(
            "attenuation fit needs at least 2 pairs, got {}",
            pairs.len()
        )));
    }
    let attenuation = pairs.iter().map(|(src, dev)| src - dev).sum::<f64>() / pairs.len() as f64;
    let residual_norm = pairs
        .iter()
        .map(|(src, dev)| {
            let r = dev - (src - attenuation);
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(FitResult {
        params: vec![FitParam {
            name: "attenuation".into(),
            value: attenuation,
            unit: "dB".into(),
        }],
        residual_norm,
        converged: true,
        iterations: 1,
    })
}

/// Result of a 1-dB compression extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompressionResult {
    /// Input power where the gain first drops 1 dB below small signal (dBm).
    pub p1db_dbm: f64,
    /// Small-signal gain: mean over the leading plateau (dB).
    pub small_signal_gain_db: f64,
    /// Gain rose more than 0.25 dB above the plateau mid-sweep.
    pub non_monotonic: bool,
}

/// Extract the 1-dB compression point from (input power dBm, gain dB)
/// samples. The small-signal gain is the mean over the leading contiguous
/// run of points within 0.1 dB of the lowest-power point; the crossing of
/// gain = G0 - 1 dB is linearly interpolated.
pub fn compression_point(gain_vs_power: &[(f64, f64)]) -> Result<CompressionResult> {
    if gain_vs_power.len() < 4 {
        return Err(Error::DegenerateData(format!(
            "compression extraction needs at least 4 points, got {}",
            gain_vs_power.len()
        )));
    }
    let mut points = gain_vs_power.to_vec();
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let first_gain = points[0].1;
    let plateau_len = points
        .iter()
        .take_while(|(_, g)| (g - first_gain).abs() <= 0.1)
        .count();
    let g0 = points[..plateau_len].iter().map(|(_, g)| g).sum::<f64>() / plateau_len as f64;
    let non_monotonic = points.iter().any(|(_, g)| *g > g0 + 0.25);
    let target = g0 - 1.0;

    for pair in points.windows(2) {
        let ((p0, g0p), (p1, g1p)) = (pair[0], pair[1]);
        if g0p >= target && g1p < target {
            let t = (g0p - target) / (g0p - g1p);
            return Ok(CompressionResult {
                p1db_dbm: p0 + t * (p1 - p0),
                small_signal_gain_db: g0,
                non_monotonic,
            });
        }
    }
    Err(Error::NoCompression(format!(
        "gain never drops 1 dB below the {g0:.2} dB small-signal level"
    )))
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

fn csv_reader<R: std::io::Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::ParseError(format!("missing CSV column {name:?}")))
}

fn parse_field(record: &csv::StringRecord, idx: usize, line: u64) -> Result<f64> {
    record
        .get(idx)
        .ok_or_else(|| Error::ParseError(format!("row {line}: missing field {idx}")))?
        .parse::<f64>()
        .map_err(|e| Error::ParseError(format!("row {line}: {e}")))
}

/// Read a flux sweep `bias,freq_hz[,sigma_hz]`.
pub fn read_flux_sweep_csv<R: std::io::Read>(reader: R) -> Result<Vec<FluxSweepRow>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::ParseError(e.to_string()))?
        .clone();
    let bias_idx = column_index(&headers, "bias")?;
    let freq_idx = column_index(&headers, "freq_hz")?;
    let sigma_idx = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("sigma_hz"));
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::ParseError(e.to_string()))?;
        let line = line as u64 + 2;
        rows.push(FluxSweepRow {
            bias: parse_field(&record, bias_idx, line)?,
            freq_hz: parse_field(&record, freq_idx, line)?,
            sigma_hz: match sigma_idx {
                Some(idx) => Some(parse_field(&record, idx, line)?),
                None => None,
            },
        });
    }
    Ok(rows)
}

/// Read a complex reflection trace `freq_hz,re_s11,im_s11`.
pub fn read_reflection_csv<R: std::io::Read>(reader: R) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut rdr = csv_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::ParseError(e.to_string()))?
        .clone();
    let f_idx = column_index(&headers, "freq_hz")?;
    let re_idx = column_index(&headers, "re_s11")?;
    let im_idx = column_index(&headers, "im_s11")?;
    let mut freqs = Vec::new();
    let mut trace = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::ParseError(e.to_string()))?;
        let line = line as u64 + 2;
        freqs.push(parse_field(&record, f_idx, line)?);
        trace.push(Complex64::new(
            parse_field(&record, re_idx, line)?,
            parse_field(&record, im_idx, line)?,
        ));
    }
    Ok((freqs, trace))
}

/// Read a Stark/dephasing table `power_dbm,delta_ac_hz,gamma_phi_hz`;
/// the Hz columns are converted to rad/s.
pub fn read_stark_csv<R: std::io::Read>(reader: R) -> Result<Vec<StarkRow>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::ParseError(e.to_string()))?
        .clone();
    let p_idx = column_index(&headers, "power_dbm")?;
    let d_idx = column_index(&headers, "delta_ac_hz")?;
    let g_idx = column_index(&headers, "gamma_phi_hz")?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::ParseError(e.to_string()))?;
        let line = line as u64 + 2;
        rows.push(StarkRow {
            power_dbm: parse_field(&record, p_idx, line)?,
            delta_ac: two_pi * parse_field(&record, d_idx, line)?,
            gamma_phi: two_pi * parse_field(&record, g_idx, line)?,
        });
    }
    Ok(rows)
}

/// Read attenuation-calibration pairs `p_source_dbm,p_device_dbm`.
pub fn read_attenuation_csv<R: std::io::Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::ParseError(e.to_string()))?
        .clone();
    let src_idx = column_index(&headers, "p_source_dbm")?;
    let dev_idx = column_index(&headers, "p_device_dbm")?;
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::ParseError(e.to_string()))?;
        let line = line as u64 + 2;
        rows.push((
            parse_field(&record, src_idx, line)?,
            parse_field(&record, dev_idx, line)?,
        ));
    }
    Ok(rows)
}

/// Read a gain compression sweep `p_in_dbm,gain_db`.
pub fn read_gain_power_csv<R: std::io::Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::ParseError(e.to_string()))?
        .clone();
    let p_idx = column_index(&headers, "p_in_dbm")?;
    let g_idx = column_index(&headers, "gain_db")?;
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::ParseError(e.to_string()))?;
        let line = line as u64 + 2;
        rows.push((
            parse_field(&record, p_idx, line)?,
            parse_field(&record, g_idx, line)?,
        ));
    }
    Ok(rows)
}
