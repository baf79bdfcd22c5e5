//! Klopfenstein impedance-taper synthesis realized as a coplanar waveguide.
//!
//! The taper minimizes length for a given maximum in-band reflection and is
//! high-pass in reflection: above the cutoff frequency (where the electrical
//! length beta*L first equals the ripple parameter A) the input reflection
//! stays at or below the design ripple. The classic profile carries small
//! impedance steps at both ends, each contributing about half the ripple;
//! those steps are retained here because only this form matches the analytic
//! reflection expression used as a cross-check.
//!
//! The CPW realization is quasi-static conformal mapping with zero metal
//! thickness on an infinitely thick substrate:
//! Z0 = 30 pi / sqrt(eps_eff) * K(k') / K(k), k = w / (w + 2 s).
//! The default eps_eff = (eps_r + 1) / 2 underestimates industrial
//! calculators by up to ~15%; it is exposed as a calibration knob.

use serde::{Deserialize, Serialize};

use crate::special::{bessel_i1_over_x, ellipk_modulus, integrate};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Absolute tolerance of the profile quadrature.
const PHI_QUAD_TOL: f64 = 1e-10;
/// Relative impedance tolerance of the width inversion.
const WIDTH_SOLVE_TOL: f64 = 1e-6;
/// Width bracket used when sampling a profile (1 nm .. 10 cm).
const DEFAULT_WIDTH_BRACKET: (f64, f64) = (1e-9, 0.1);

/// Inputs of a Klopfenstein CPW taper design. Impedances in ohms,
/// frequencies in Hz, lengths in meters; `gamma_max` is the maximum in-band
/// reflection magnitude (e.g. 0.3162 for -10 dB).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaperDesignSpec {
    pub z_source: f64,
    pub z_load: f64,
    pub gamma_max: f64,
    pub f_cutoff: f64,
    pub eps_eff: f64,
    pub gap: f64,
    pub substrate_eps_r: f64,
}

impl TaperDesignSpec {
    /// Quasi-static default effective permittivity for a CPW on a thick
    /// substrate: the field shares air and dielectric half-spaces equally.
    pub fn default_eps_eff(substrate_eps_r: f64) -> f64 {
        0.5 * (substrate_eps_r + 1.0)
    }

    /// Log-ratio reflection coefficient of the full impedance step,
    /// gamma0 = ln(z_load / z_source) / 2.
    pub fn gamma0(&self) -> f64 {
        0.5 * (self.z_load / self.z_source).ln()
    }

    /// Physical taper length: beta * L = A at the cutoff frequency.
    pub fn length(&self) -> Result<f64> {
        let a = ripple_parameter(self)?;
        Ok(a * SPEED_OF_LIGHT / (2.0 * std::f64::consts::PI * self.f_cutoff * self.eps_eff.sqrt()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z_source > 0.0) || !(self.z_load > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "impedances must be positive (z_source = {}, z_load = {})",
                self.z_source, self.z_load
            )));
        }
        if self.z_source == self.z_load {
            return Err(Error::InvalidSpec(
                "z_source equals z_load; nothing to transform".into(),
            ));
        }
        if !(self.gamma_max > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "gamma_max must be positive, got {}",
                self.gamma_max
            )));
        }
        if !(self.f_cutoff > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "f_cutoff must be positive, got {}",
                self.f_cutoff
            )));
        }
        if !(self.eps_eff > 1.0) {
            return Err(Error::InvalidSpec(format!(
                "eps_eff must exceed 1, got {}",
                self.eps_eff
            )));
        }
        if !(self.gap > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "gap must be positive, got {}",
                self.gap
            )));
        }
        if !(self.substrate_eps_r >= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "substrate_eps_r must be at least 1, got {}",
                self.substrate_eps_r
            )));
        }
        Ok(())
    }
}

/// One sampled point of the realized taper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    /// Position along the line (m), 0 at the source end.
    pub position: f64,
    /// Characteristic impedance at this position (ohm).
    pub impedance: f64,
    /// Center-trace width realizing that impedance (m).
    pub width: f64,
}

/// Sampled impedance/width profile of a synthesized taper.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaperProfile {
    pub samples: Vec<ProfileSample>,
    /// Physical length (m).
    pub length: f64,
    /// Ripple parameter A = acosh(|gamma0| / gamma_max).
    pub ripple: f64,
    /// Log-ratio reflection coefficient of the design.
    pub gamma0: f64,
}

impl TaperProfile {
    /// Impedance at an arbitrary position, log-linear between samples and
    /// clamped to the end samples outside [0, L].
    pub fn impedance_at(&self, position: f64) -> f64 {
        let s = &self.samples;
        if position <= s[0].position {
            return s[0].impedance;
        }
        if position >= s[s.len() - 1].position {
            return s[s.len() - 1].impedance;
        }
        let idx = s.partition_point(|p| p.position <= position);
        let (lo, hi) = (&s[idx - 1], &s[idx]);
        let t = (position - lo.position) / (hi.position - lo.position);
        (lo.impedance.ln() * (1.0 - t) + hi.impedance.ln() * t).exp()
    }

    /// CSV export, one row per sample: `z_m,impedance_ohm,width_m`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "z_m,impedance_ohm,width_m")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{}",
                crate::format_sig12(s.position),
                crate::format_sig12(s.impedance),
                crate::format_sig12(s.width)
            )?;
        }
        Ok(())
    }
}

/// Ripple parameter A = acosh(|gamma0| / gamma_max).
///
/// Fails with `DesignInfeasible` when the requested ripple already covers
/// the full impedance step (no taper needed).
pub fn ripple_parameter(spec: &TaperDesignSpec) -> Result<f64> {
    spec.validate()?;
    let g0 = spec.gamma0().abs();
    if spec.gamma_max >= g0 {
        return Err(Error::DesignInfeasible(format!(
            "gamma_max = {} is not below |gamma0| = {g0:.6}; a uniform line already meets the spec",
            spec.gamma_max
        )));
    }
    Ok((g0 / spec.gamma_max).acosh())
}

/// Klopfenstein profile integral
/// phi(x, A) = int_0^x I1(A sqrt(1 - y^2)) / (A sqrt(1 - y^2)) dy,
/// odd in x, defined on |x| <= 1; phi(1, A) = (cosh A - 1) / A^2.
pub fn klopfenstein_phi(x: f64, a: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::DomainError(format!(
            "phi argument must lie in [-1, 1], got {x}"
        )));
    }
    if a < 0.0 {
        return Err(Error::DomainError(format!(
            "ripple parameter must be nonnegative, got {a}"
        )));
    }
    // Integrate over |x| and restore the sign so oddness is exact.
    let integrand = |y: f64| bessel_i1_over_x(a * (1.0 - y * y).max(0.0).sqrt());
    Ok(x.signum() * integrate(&integrand, 0.0, x.abs(), PHI_QUAD_TOL))
}

/// Sample the Klopfenstein impedance profile uniformly over [0, L] and
/// realize every sample as a CPW width at the spec's fixed gap.
///
/// ln Z(z) = ln sqrt(Z1 Z2) + (gamma0 / cosh A) A^2 phi(2 z / L - 1, A);
/// the classic end-step discontinuities are retained, so the first and last
/// samples differ from z_source and z_load.
pub fn impedance_profile(spec: &TaperDesignSpec, n_samples: usize) -> Result<TaperProfile> {
    if n_samples < 2 {
        return Err(Error::InvalidSpec(format!(
            "profile needs at least 2 samples, got {n_samples}"
        )));
    }
    let a = ripple_parameter(spec)?;
    let gamma0 = spec.gamma0();
    let length = spec.length()?;
    let ln_mean = 0.5 * (spec.z_source * spec.z_load).ln();
    let scale = gamma0 / a.cosh() * a * a;

    let positions: Vec<f64> = (0..n_samples)
        .map(|i| length * i as f64 / (n_samples - 1) as f64)
        .collect();
    let samples = crate::exec::try_map_points(&positions, |&z| {
        let x = 2.0 * z / length - 1.0;
        let impedance = (ln_mean + scale * klopfenstein_phi(x, a)?).exp();
        let width =
            cpw_width_for_impedance(impedance, spec.gap, spec.eps_eff, DEFAULT_WIDTH_BRACKET)
                .map_err(|e| Error::WidthSolveFailure(format!("at z = {z:.6e} m: {e}")))?;
        Ok(ProfileSample {
            position: z,
            impedance,
            width,
        })
    })?;

    Ok(TaperProfile {
        samples,
        length,
        ripple: a,
        gamma0,
    })
}

/// Magnitude of the taper's input reflection from small-reflection theory:
/// |Gamma| = |gamma0| |cos(sqrt((beta L)^2 - A^2))| / cosh A above cutoff,
/// with cos -> cosh below cutoff. |Gamma(0)| = |gamma0|.
pub fn analytic_input_reflection(spec: &TaperDesignSpec, f: f64) -> Result<f64> {
    if f < 0.0 {
        return Err(Error::DomainError(format!(
            "frequency must be nonnegative, got {f}"
        )));
    }
    let a = ripple_parameter(spec)?;
    // By construction beta L = A at f_cutoff.
    let beta_l = a * f / spec.f_cutoff;
    let arg = beta_l * beta_l - a * a;
    let osc = if arg >= 0.0 {
        arg.sqrt().cos().abs()
    } else {
        (-arg).sqrt().cosh()
    };
    Ok(spec.gamma0().abs() * osc / a.cosh())
}

/// Quasi-static CPW characteristic impedance (ohm) for a center-trace width
/// and gap (m): Z0 = 30 pi / sqrt(eps_eff) * K(k') / K(k), k = w / (w + 2s).
pub fn cpw_impedance(width: f64, gap: f64, eps_eff: f64) -> Result<f64> {
    if !(width > 0.0) || !(gap > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "width and gap must be positive (width = {width}, gap = {gap})"
        )));
    }
    if !(eps_eff >= 1.0) {
        return Err(Error::InvalidGeometry(format!(
            "eps_eff must be at least 1, got {eps_eff}"
        )));
    }
    let k = width / (width + 2.0 * gap);
    let kp = ((1.0 - k) * (1.0 + k)).sqrt();
    Ok(30.0 * std::f64::consts::PI / eps_eff.sqrt() * ellipk_modulus(kp)? / ellipk_modulus(k)?)
}

/// Invert [`cpw_impedance`] for the width realizing `target_z` at a fixed
/// gap, by bisection over the supplied width bracket (impedance is strictly
/// decreasing in width).
pub fn cpw_width_for_impedance(
    target_z: f64,
    gap: f64,
    eps_eff: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    if !(target_z > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "target impedance must be positive, got {target_z}"
        )));
    }
    let (mut lo, mut hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    let z_at_lo = cpw_impedance(lo, gap, eps_eff)?;
    let z_at_hi = cpw_impedance(hi, gap, eps_eff)?;
    if target_z > z_at_lo || target_z < z_at_hi {
        return Err(Error::BracketError(format!(
            "target {target_z} ohm outside bracket range [{z_at_hi:.4}, {z_at_lo:.4}] ohm"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let z_mid = cpw_impedance(mid, gap, eps_eff)?;
        if ((z_mid - target_z) / target_z).abs() <= WIDTH_SOLVE_TOL {
            return Ok(mid);
        }
        if z_mid > target_z {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
