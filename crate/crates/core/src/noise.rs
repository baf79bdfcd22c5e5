//! Noise-temperature and SNR arithmetic for a two-stage amplification chain
//! (parametric preamplifier followed by a HEMT), plus quantum-limit
//! references and intracavity photon power.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, BOLTZMANN, HBAR, PLANCK};

/// Two-stage chain: first-stage and second-stage noise temperatures (K) and
/// the first stage's power gain (linear ratio).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseChain {
    pub t_first_stage: f64,
    pub t_second_stage: f64,
    pub gain: f64,
}

impl NoiseChain {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_first_stage >= 0.0) || !(self.t_second_stage >= 0.0) {
            return Err(Error::DomainError(format!(
                "noise temperatures must be nonnegative ({}, {})",
                self.t_first_stage, self.t_second_stage
            )));
        }
        if !(self.gain >= 1.0) {
            return Err(Error::DomainError(format!(
                "first-stage gain must be at least 1, got {}",
                self.gain
            )));
        }
        Ok(())
    }
}

/// SNR improvement from switching the first stage on:
/// (T_first / T_second + 1 / G)^-1.
pub fn snr_improvement(chain: &NoiseChain) -> Result<f64> {
    chain.validate()?;
    if !(chain.t_second_stage > 0.0) {
        return Err(Error::DomainError(
            "second-stage noise temperature must be positive".into(),
        ));
    }
    let denom = chain.t_first_stage / chain.t_second_stage + 1.0 / chain.gain;
    if denom == 0.0 {
        return Err(Error::DivisionDomain(
            "zero first-stage temperature with infinite gain".into(),
        ));
    }
    Ok(1.0 / denom)
}

/// First-stage noise temperature from a measured SNR improvement:
/// T_first = T_second (1 / snr - 1 / G). Exact inverse of
/// [`snr_improvement`].
pub fn noise_temperature_from_snr(snr: f64, t_second: f64, gain: f64) -> Result<f64> {
    if !(snr > 0.0) || !(t_second > 0.0) || !(gain >= 1.0) {
        return Err(Error::DomainError(format!(
            "need snr > 0, t_second > 0, gain >= 1 (got {snr}, {t_second}, {gain})"
        )));
    }
    let inv = 1.0 / snr - 1.0 / gain;
    if inv <= 0.0 {
        return Err(Error::Unphysical(format!(
            "snr {snr} at gain {gain} implies a nonpositive noise temperature"
        )));
    }
    Ok(t_second * inv)
}

/// Noise-temperature interval for a second-stage temperature known only as
/// a range; returns (T at t_second_range.0, T at t_second_range.1).
pub fn noise_temperature_interval(
    snr: f64,
    t_second_range: (f64, f64),
    gain: f64,
) -> Result<(f64, f64)> {
    Ok((
        noise_temperature_from_snr(snr, t_second_range.0, gain)?,
        noise_temperature_from_snr(snr, t_second_range.1, gain)?,
    ))
}

/// Half-photon added-noise reference: T_q = h f / (2 k_B).
pub fn quantum_limit_temperature(f: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::DomainError(format!(
            "frequency must be positive, got {f}"
        )));
    }
    Ok(PLANCK * f / (2.0 * BOLTZMANN))
}

/// Power leaving a resonator at photon occupation n_bar:
/// P = hbar omega_r kappa_r n_bar (angular frequencies in rad/s).
pub fn photon_flux_power(omega_r: f64, kappa_r: f64, n_bar: f64) -> Result<f64> {
    if !(omega_r > 0.0) || !(kappa_r > 0.0) || !(n_bar >= 0.0) {
        return Err(Error::DomainError(format!(
            "need omega_r > 0, kappa_r > 0, n_bar >= 0 (got {omega_r}, {kappa_r}, {n_bar})"
        )));
    }
    Ok(HBAR * omega_r * kappa_r * n_bar)
}

/// Power in dBm: 10 log10(P / 1 mW).
pub fn watts_to_dbm(p_watts: f64) -> f64 {
    10.0 * (p_watts / 1e-3).log10()
}

/// Power in watts from dBm.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    1e-3 * 10f64.powf(p_dbm / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    #[test]
    fn snr_reference_value() {
        let chain = NoiseChain {
            t_first_stage: 0.3,
            t_second_stage: 2.6,
            gain: 100.0,
        };
        // (0.3/2.6 + 0.01)^-1 at high precision
        assert_relative_eq!(
            snr_improvement(&chain).unwrap(),
            7.975460122699387,
            max_relative = 1e-14
        );
    }

    #[test]
    fn snr_limits() {
        // huge gain: improvement approaches T_second / T_first
        let chain = NoiseChain {
            t_first_stage: 0.3,
            t_second_stage: 2.6,
            gain: 1e15,
        };
        assert_relative_eq!(
            snr_improvement(&chain).unwrap(),
            2.6 / 0.3,
            max_relative = 1e-6
        );
        // zero first-stage noise: improvement equals the gain
        let chain = NoiseChain {
            t_first_stage: 0.0,
            t_second_stage: 2.6,
            gain: 250.0,
        };
        assert_relative_eq!(
            snr_improvement(&chain).unwrap(),
            250.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn noise_temperature_inversion() {
        let t = noise_temperature_from_snr(7.975460122699387, 2.6, 100.0).unwrap();
        assert_relative_eq!(t, 0.3, max_relative = 1e-12);
        // snr exceeding the gain is unphysical
        assert!(matches!(
            noise_temperature_from_snr(101.0, 2.6, 100.0),
            Err(Error::Unphysical(_))
        ));
    }

    #[test]
    fn snr_roundtrip_randomized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let chain = NoiseChain {
                t_first_stage: rng.gen_range(0.05..2.0),
                t_second_stage: rng.gen_range(1.0..6.0),
                gain: rng.gen_range(2.0..1e4),
            };
            let snr = snr_improvement(&chain).unwrap();
            let t = noise_temperature_from_snr(snr, chain.t_second_stage, chain.gain).unwrap();
            assert_relative_eq!(t, chain.t_first_stage, max_relative = 1e-12);
        }
    }

    #[test]
    fn snr_monotonicity() {
        let base = NoiseChain {
            t_first_stage: 0.4,
            t_second_stage: 2.6,
            gain: 50.0,
        };
        let more_gain = NoiseChain {
            gain: 200.0,
            ..base
        };
        let colder = NoiseChain {
            t_first_stage: 0.2,
            ..base
        };
        let s0 = snr_improvement(&base).unwrap();
        assert!(snr_improvement(&more_gain).unwrap() > s0);
        assert!(snr_improvement(&colder).unwrap() > s0);
    }

    #[test]
    fn quantum_limit_reference_values() {
        // h f / 2 k_B with exact SI constants
        assert_abs_diff_eq!(
            quantum_limit_temperature(6.633e9).unwrap(),
            0.15916689652819073,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            quantum_limit_temperature(4.166e9).unwrap(),
            0.09996823321821839,
            epsilon = 1e-12
        );
        // linear in frequency
        assert_relative_eq!(
            quantum_limit_temperature(2.0 * 6.633e9).unwrap(),
            2.0 * quantum_limit_temperature(6.633e9).unwrap(),
            max_relative = 1e-15
        );
        assert!(quantum_limit_temperature(0.0).is_err());
    }

    #[test]
    fn photon_power_reference_value() {
        let omega_r = 2.0 * std::f64::consts::PI * 6.633e9;
        let kappa_r = 2.0 * std::f64::consts::PI * 309e3;
        let p = photon_flux_power(omega_r, kappa_r, 1.0).unwrap();
        // hbar omega kappa at 50-digit precision
        assert_relative_eq!(p, 8.533051652305938e-18, max_relative = 1e-12);
        assert_relative_eq!(watts_to_dbm(p), -140.6889562548613, max_relative = 1e-12);
        // linearity and the empty cavity
        assert_eq!(photon_flux_power(omega_r, kappa_r, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            photon_flux_power(omega_r, kappa_r, 10.0).unwrap(),
            10.0 * p,
            max_relative = 1e-15
        );
    }

    #[test]
    fn dbm_roundtrip() {
        for &p in &[1e-21, 8.533e-18, 1e-3, 2.5] {
            assert_relative_eq!(dbm_to_watts(watts_to_dbm(p)), p, max_relative = 1e-12);
        }
    }

    #[test]
    fn interval_ordering() {
        let (lo, hi) = noise_temperature_interval(5.0, (2.3, 2.9), 100.0).unwrap();
        assert!(lo < hi);
        assert_relative_eq!(lo / 2.3, hi / 2.9, max_relative = 1e-14);
    }
}
