//! Linear two-port algebra for nonuniform transmission lines.
//!
//! A taper is discretized into uniform lossless segments whose ABCD matrices
//! cascade by matrix product. Conversions to S-parameters accept unequal
//! real reference impedances so that the low-impedance port can be
//! referenced to the design's load impedance, which is what a taper's
//! reflection spec means. Touchstone export renormalizes both ports to a
//! common 50-ohm reference.
//!
//! Everything here is dispersionless: beta = 2 pi f sqrt(eps_eff) / c with
//! the same eps_eff at every frequency.

use num_complex::Complex64;
use serde::Serialize;

use crate::taper::TaperProfile;
use crate::{Error, Result, SPEED_OF_LIGHT};

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Strictly increasing grid of positive frequencies (Hz). An empty grid is
/// representable so degenerate inputs can be diagnosed downstream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid(Vec<f64>);

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        for pair in points.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidSpec(format!(
                    "frequency grid must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        if let Some(&first) = points.first() {
            if !(first > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "frequencies must be positive, got {first}"
                )));
            }
        }
        Ok(FrequencyGrid(points))
    }

    /// `n` evenly spaced points over [start, stop]; n = 0 gives an empty
    /// grid, n = 1 gives just `start`.
    pub fn linspace(start: f64, stop: f64, n: usize) -> Result<Self> {
        let points = match n {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..n)
                .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                .collect(),
        };
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Single-frequency chain matrix [[A, B], [C, D]] of a two-port
/// (A, D dimensionless; B in ohm; C in siemens).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcdMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl AbcdMatrix {
    pub fn identity() -> Self {
        AbcdMatrix {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Uniform lossless line segment: A = D = cos(beta l), B = j Z0 sin(beta l),
    /// C = j sin(beta l) / Z0. The determinant is one in exact arithmetic.
    pub fn line_segment(z0: f64, beta_l: f64) -> Result<Self> {
        if !(z0 > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "segment impedance must be positive, got {z0}"
            )));
        }
        let (sin, cos) = beta_l.sin_cos();
        Ok(AbcdMatrix {
            a: Complex64::new(cos, 0.0),
            b: J * z0 * sin,
            c: J * sin / z0,
            d: Complex64::new(cos, 0.0),
        })
    }

    /// Matrix product `self * rhs`, i.e. `self` sits on the port-1 side.
    pub fn then(&self, rhs: &AbcdMatrix) -> AbcdMatrix {
        AbcdMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// The same two-port described from port 2 (valid for reciprocal
    /// networks with unit determinant): A and D swap.
    pub fn flipped(&self) -> AbcdMatrix {
        AbcdMatrix {
            a: self.d,
            b: self.b,
            c: self.c,
            d: self.a,
        }
    }

    /// Impedance looking into port 1 with port 2 terminated in `z_term`:
    /// Z_in = (A Z_t + B) / (C Z_t + D).
    pub fn input_impedance(&self, z_term: Complex64) -> Complex64 {
        (self.a * z_term + self.b) / (self.c * z_term + self.d)
    }

    /// Same look-in with the termination given as an admittance, which
    /// stays finite for open-circuit terminations:
    /// Z_in = (A + B Y_t) / (C + D Y_t).
    pub fn input_impedance_from_admittance(&self, y_term: Complex64) -> Complex64 {
        (self.a + self.b * y_term) / (self.c + self.d * y_term)
    }
}

/// Frequency-indexed chain matrices sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPortAbcd {
    grid: FrequencyGrid,
    matrices: Vec<AbcdMatrix>,
}

impl TwoPortAbcd {
    pub fn new(grid: FrequencyGrid, matrices: Vec<AbcdMatrix>) -> Result<Self> {
        if grid.len() != matrices.len() {
            return Err(Error::GridMismatch(format!(
                "{} grid points vs {} matrices",
                grid.len(),
                matrices.len()
            )));
        }
        Ok(TwoPortAbcd { grid, matrices })
    }

    /// Uniform lossless line evaluated on a grid.
    pub fn uniform_line(grid: &FrequencyGrid, z0: f64, length: f64, eps_eff: f64) -> Result<Self> {
        let mats = crate::exec::try_map_points(grid.points(), |&f| {
            AbcdMatrix::line_segment(z0, phase_constant(f, eps_eff) * length)
        })?;
        Self::new(grid.clone(), mats)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn matrices(&self) -> &[AbcdMatrix] {
        &self.matrices
    }
}

/// Phase constant (rad/m) of the dispersionless line model.
pub fn phase_constant(f: f64, eps_eff: f64) -> f64 {
    2.0 * std::f64::consts::PI * f * eps_eff.sqrt() / SPEED_OF_LIGHT
}

/// Single-frequency ABCD matrix of a taper profile discretized into
/// `n_segments` uniform segments sampled at their midpoints.
pub fn taper_abcd(profile: &TaperProfile, f: f64, n_segments: usize, eps_eff: f64) -> AbcdMatrix {
    let seg_len = profile.length / n_segments as f64;
    let beta_l = phase_constant(f, eps_eff) * seg_len;
    let mut m = AbcdMatrix::identity();
    for k in 0..n_segments {
        let z_mid = profile.impedance_at((k as f64 + 0.5) * seg_len);
        // impedance_at is positive by construction
        let seg = AbcdMatrix::line_segment(z_mid, beta_l).expect("profile impedance positive");
        m = m.then(&seg);
    }
    m
}

/// Cascade frequency-indexed two-ports in port order (first element on the
/// port-1 side). All chains must share an identical grid.
pub fn cascade(chain: &[TwoPortAbcd]) -> Result<TwoPortAbcd> {
    let first = chain
        .first()
        .ok_or_else(|| Error::InvalidSpec("cascade of an empty chain".into()))?;
    for (i, other) in chain.iter().enumerate().skip(1) {
        if other.grid.points() != first.grid.points() {
            return Err(Error::GridMismatch(format!(
                "chain element {i} uses a different frequency grid"
            )));
        }
    }
    let n = first.grid.len();
    let mats = (0..n)
        .map(|k| {
            chain[1..]
                .iter()
                .fold(chain[0].matrices[k], |acc, m| acc.then(&m.matrices[k]))
        })
        .collect();
    TwoPortAbcd::new(first.grid.clone(), mats)
}

/// Single-frequency 2x2 scattering matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMatrix {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
}

/// Frequency-indexed S-parameters with per-port real reference impedances.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub grid: FrequencyGrid,
    pub points: Vec<SMatrix>,
    /// (port-1 reference, port-2 reference), both real and positive (ohm).
    pub port_refs: (f64, f64),
}

/// ABCD to S conversion generalized to unequal real reference impedances.
pub fn abcd_to_s(m: &AbcdMatrix, z_ref1: f64, z_ref2: f64) -> Result<SMatrix> {
    if !(z_ref1 > 0.0) || !(z_ref2 > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "port references must be positive ({z_ref1}, {z_ref2})"
        )));
    }
    let den = m.a * z_ref2 + m.b + m.c * z_ref1 * z_ref2 + m.d * z_ref1;
    if den.norm() == 0.0 {
        return Err(Error::SingularConversion(
            "ABCD to S denominator vanished".into(),
        ));
    }
    let root = (z_ref1 * z_ref2).sqrt();
    Ok(SMatrix {
        s11: (m.a * z_ref2 + m.b - m.c * z_ref1 * z_ref2 - m.d * z_ref1) / den,
        s21: 2.0 * root / den,
        s12: 2.0 * m.determinant() * root / den,
        s22: (-m.a * z_ref2 + m.b - m.c * z_ref1 * z_ref2 + m.d * z_ref1) / den,
    })
}

/// Inverse of [`abcd_to_s`], again for real references.
pub fn s_to_abcd(s: &SMatrix, z_ref1: f64, z_ref2: f64) -> Result<AbcdMatrix> {
    if !(z_ref1 > 0.0) || !(z_ref2 > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "port references must be positive ({z_ref1}, {z_ref2})"
        )));
    }
    if s.s21.norm() == 0.0 {
        return Err(Error::SingularConversion(
            "S to ABCD requires nonzero transmission".into(),
        ));
    }
    let den = 2.0 * s.s21;
    let one = Complex64::new(1.0, 0.0);
    let root = (z_ref1 * z_ref2).sqrt();
    Ok(AbcdMatrix {
        a: (z_ref1 / z_ref2).sqrt() * ((one + s.s11) * (one - s.s22) + s.s12 * s.s21) / den,
        b: root * ((one + s.s11) * (one + s.s22) - s.s12 * s.s21) / den,
        c: ((one - s.s11) * (one - s.s22) - s.s12 * s.s21) / (root * den),
        d: (z_ref2 / z_ref1).sqrt() * ((one - s.s11) * (one + s.s22) + s.s12 * s.s21) / den,
    })
}

/// S-parameters of a discretized taper over a grid. Port 1 is the source
/// (first-sample) end; the classic end-step discontinuities enter through
/// the mismatch between the port references and the end segments.
pub fn taper_sparams(
    profile: &TaperProfile,
    grid: &FrequencyGrid,
    n_segments: usize,
    eps_eff: f64,
    port_refs: (f64, f64),
) -> Result<ScatteringData> {
    if n_segments < 10 {
        return Err(Error::InvalidSpec(format!(
            "taper cascade needs at least 10 segments, got {n_segments}"
        )));
    }
    let points = crate::exec::try_map_points(grid.points(), |&f| {
        abcd_to_s(
            &taper_abcd(profile, f, n_segments, eps_eff),
            port_refs.0,
            port_refs.1,
        )
    })?;
    Ok(ScatteringData {
        grid: grid.clone(),
        points,
        port_refs,
    })
}

/// Complex impedance tabulated on a frequency grid; linear interpolation
/// between points, error outside the tabulated range.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedImpedance {
    freqs: Vec<f64>,
    z: Vec<Complex64>,
}

impl TabulatedImpedance {
    pub fn new(grid: &FrequencyGrid, z: Vec<Complex64>) -> Result<Self> {
        if grid.len() != z.len() {
            return Err(Error::GridMismatch(format!(
                "{} grid points vs {} impedance samples",
                grid.len(),
                z.len()
            )));
        }
        Ok(TabulatedImpedance {
            freqs: grid.points().to_vec(),
            z,
        })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.z
    }

    pub fn min_freq(&self) -> Option<f64> {
        self.freqs.first().copied()
    }

    pub fn max_freq(&self) -> Option<f64> {
        self.freqs.last().copied()
    }

    /// Interpolated impedance at `f`, or None outside the table.
    pub fn sample(&self, f: f64) -> Option<Complex64> {
        let (first, last) = (*self.freqs.first()?, *self.freqs.last()?);
        if f < first || f > last {
            return None;
        }
        if f == first {
            return Some(self.z[0]);
        }
        let idx = self.freqs.partition_point(|&p| p < f);
        if self.freqs[idx] == f {
            return Some(self.z[idx]);
        }
        let (f0, f1) = (self.freqs[idx - 1], self.freqs[idx]);
        let t = (f - f0) / (f1 - f0);
        Some(self.z[idx - 1] * (1.0 - t) + self.z[idx] * t)
    }
}

/// Complex environment impedance seen from the taper's load (resonator) end
/// looking back through the taper into a real termination at the source end.
pub fn environment_impedance(
    profile: &TaperProfile,
    grid: &FrequencyGrid,
    termination: f64,
    eps_eff: f64,
) -> Result<TabulatedImpedance> {
    if !(termination > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "termination must be positive, got {termination}"
        )));
    }
    let n_segments = profile.samples.len().max(10);
    let z_term = Complex64::new(termination, 0.0);
    let z = crate::exec::map_points(grid.points(), |&f| {
        taper_abcd(profile, f, n_segments, eps_eff)
            .flipped()
            .input_impedance(z_term)
    });
    TabulatedImpedance::new(grid, z)
}

impl ScatteringData {
    /// Renormalize both ports to a single real reference via the ABCD form.
    pub fn renormalized(&self, z_ref: f64) -> Result<ScatteringData> {
        if self.port_refs == (z_ref, z_ref) {
            return Ok(self.clone());
        }
        let points = self
            .points
            .iter()
            .map(|s| {
                let m = s_to_abcd(s, self.port_refs.0, self.port_refs.1)?;
                abcd_to_s(&m, z_ref, z_ref)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScatteringData {
            grid: self.grid.clone(),
            points,
            port_refs: (z_ref, z_ref),
        })
    }

    /// Touchstone v1 two-port export, `# GHz S RI R 50`, renormalizing to a
    /// common 50-ohm reference. Refuses an empty grid.
    pub fn write_touchstone<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "refusing to write a Touchstone file with no frequency points",
            )));
        }
        let common = self.renormalized(50.0)?;
        writeln!(out, "# GHz S RI R 50")?;
        for (f, s) in common.grid.points().iter().zip(&common.points) {
            writeln!(
                out,
                "{} {} {} {} {} {} {} {} {}",
                crate::format_sig12(f / 1e9),
                crate::format_sig12(s.s11.re),
                crate::format_sig12(s.s11.im),
                crate::format_sig12(s.s21.re),
                crate::format_sig12(s.s21.im),
                crate::format_sig12(s.s12.re),
                crate::format_sig12(s.s12.im),
                crate::format_sig12(s.s22.re),
                crate::format_sig12(s.s22.im),
            )?;
        }
        Ok(())
    }

    /// CSV of reflection/transmission magnitudes in dB:
    /// `freq_hz,s11_db,s21_db`.
    pub fn write_db_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "refusing to write a CSV with no frequency points",
            )));
        }
        writeln!(out, "freq_hz,s11_db,s21_db")?;
        for (f, s) in self.grid.points().iter().zip(&self.points) {
            writeln!(
                out,
                "{},{},{}",
                crate::format_sig12(*f),
                crate::format_sig12(20.0 * s.s11.norm().log10()),
                crate::format_sig12(20.0 * s.s21.norm().log10()),
            )?;
        }
        Ok(())
    }
}

/// Parse a Touchstone v1 two-port file written by
/// [`ScatteringData::write_touchstone`] (GHz / S / RI option line).
pub fn read_touchstone<R: std::io::BufRead>(reader: R) -> Result<ScatteringData> {
    let mut z_ref = None;
    let mut freqs = Vec::new();
    let mut points = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let tokens: Vec<String> = rest.split_whitespace().map(str::to_uppercase).collect();
            if tokens.len() != 5 || tokens[0] != "GHZ" || tokens[1] != "S" || tokens[2] != "RI" {
                return Err(Error::ParseError(format!(
                    "unsupported Touchstone option line: {line}"
                )));
            }
            z_ref =
                Some(tokens[4].parse::<f64>().map_err(|_| {
                    Error::ParseError(format!("bad reference impedance in: {line}"))
                })?);
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::ParseError(format!("bad number {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != 9 {
            return Err(Error::ParseError(format!(
                "expected 9 columns per two-port row, got {}",
                vals.len()
            )));
        }
        freqs.push(vals[0] * 1e9);
        points.push(SMatrix {
            s11: Complex64::new(vals[1], vals[2]),
            s21: Complex64::new(vals[3], vals[4]),
            s12: Complex64::new(vals[5], vals[6]),
            s22: Complex64::new(vals[7], vals[8]),
        });
    }
    let z_ref = z_ref.ok_or_else(|| Error::ParseError("missing Touchstone option line".into()))?;
    Ok(ScatteringData {
        grid: FrequencyGrid::new(freqs)?,
        points,
        port_refs: (z_ref, z_ref),
    })
}
