//! Reflection response of a conductive patch over a grounded dielectric stack.
//!
//! The patch array is homogenized into a capacitive sheet (averaged-field grid
//! impedance of a periodic patch lattice) shunting the input impedance of the
//! grounded layer stack seen as a cascade of transmission lines. The resulting
//! surface impedance gives the reflection coefficient against the incident
//! medium. Tabulated curves from an external full-wave solver can replace the
//! surrogate through [`load_phase_table`].
//!
//! Time convention is `exp(+jωt)`; lossy permittivity is `ε'(1 − j tanδ)`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::em::{wrap_phase, Angle, Frequency, Polarization, EPS0, ETA0, MU0, TWO_PI};
use crate::error::{Error, Result};

const J: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Thickness in metres.
    pub thickness: f64,
    pub eps_r: f64,
    pub tan_delta: f64,
}

impl Layer {
    pub fn new(thickness: f64, eps_r: f64, tan_delta: f64) -> Result<Self> {
        let layer = Self { thickness, eps_r, tan_delta };
        layer.validate()?;
        Ok(layer)
    }

    fn validate(&self) -> Result<()> {
        if !(self.thickness.is_finite() && self.thickness > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "layer thickness must be positive, got {}",
                self.thickness
            )));
        }
        if !(self.eps_r.is_finite() && self.eps_r >= 1.0) {
            return Err(Error::InvalidInput(format!("eps_r must be >= 1, got {}", self.eps_r)));
        }
        if !(self.tan_delta.is_finite() && self.tan_delta >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "tan_delta must be >= 0, got {}",
                self.tan_delta
            )));
        }
        Ok(())
    }

    fn complex_permittivity(&self) -> Complex64 {
        Complex64::new(self.eps_r, -self.eps_r * self.tan_delta)
    }
}

/// Dielectric layers listed from the patch side down to the ground plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    layers: Vec<Layer>,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidInput("layer stack needs at least one layer".into()));
        }
        for layer in &layers {
            layer.validate()?;
        }
        Ok(Self { layers })
    }

    /// Printed paper sheet (0.1 mm, εr = 2, tanδ = 0.05) on 1.0 mm of MDF
    /// (εr = 2.5) over the copper ground, 1.1 mm in total.
    pub fn paper_on_mdf() -> Self {
        Self {
            layers: vec![
                Layer { thickness: 0.1e-3, eps_r: 2.0, tan_delta: 0.05 },
                Layer { thickness: 1.0e-3, eps_r: 2.5, tan_delta: 0.0 },
            ],
        }
    }

    /// Same geometry as [`paper_on_mdf`](Self::paper_on_mdf) with every loss
    /// tangent set to zero.
    pub fn lossless(&self) -> Self {
        Self {
            layers: self.layers.iter().map(|l| Layer { tan_delta: 0.0, ..*l }).collect(),
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Relative permittivity of the layer the patches sit on.
    pub fn top_eps_r(&self) -> f64 {
        self.layers[0].eps_r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchCell {
    pub pitch_x: f64,
    pub pitch_y: f64,
    /// Side of the square patch, `D_n`.
    pub patch_size: f64,
    pub stack: LayerStack,
}

impl PatchCell {
    pub fn new(pitch_x: f64, pitch_y: f64, patch_size: f64, stack: LayerStack) -> Result<Self> {
        let cell = Self { pitch_x, pitch_y, patch_size, stack };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pitch_x > 0.0 && self.pitch_y > 0.0) {
            return Err(Error::InvalidGeometry("pitches must be positive".into()));
        }
        if !(self.patch_size > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "patch size must be positive, got {}",
                self.patch_size
            )));
        }
        let limit = self.pitch_x.min(self.pitch_y);
        if self.patch_size >= limit {
            return Err(Error::InvalidGeometry(format!(
                "gap must be positive: patch {} m >= pitch {} m",
                self.patch_size, limit
            )));
        }
        Ok(())
    }

    /// Lattice period along the electric field, which sets the capacitive gap.
    pub fn period_along_field(&self, polarization: Polarization) -> f64 {
        match polarization {
            Polarization::Tm => self.pitch_x,
            Polarization::Te => self.pitch_y,
        }
    }
}

/// Wave impedance of the incident medium (free space) for a plane wave at
/// `theta_i`.
pub fn incident_wave_impedance(theta_i: Angle, polarization: Polarization) -> f64 {
    match polarization {
        Polarization::Te => ETA0 / theta_i.cos(),
        Polarization::Tm => ETA0 * theta_i.cos(),
    }
}

/// Shunt admittance of the homogenized patch grid. Zero when the patch
/// vanishes.
fn grid_admittance(
    cell: &PatchCell,
    f: Frequency,
    theta_i: Angle,
    polarization: Polarization,
) -> Result<Complex64> {
    cell.validate()?;
    let period = cell.period_along_field(polarization);
    let gap = period - cell.patch_size;
    let eps_eff = (cell.stack.top_eps_r() + 1.0) / 2.0;
    let k0 = f.wavenumber().k0();
    let k_eff = k0 * eps_eff.sqrt();
    let eta_eff = ETA0 / eps_eff.sqrt();
    // Grid parameter of the averaged-field patch model.
    let alpha = k_eff * period / PI * (1.0 / (PI * gap / (2.0 * period)).sin()).ln();
    let angular = match polarization {
        Polarization::Tm => 1.0,
        Polarization::Te => 1.0 - theta_i.sin().powi(2) / (2.0 * eps_eff),
    };
    Ok(J * (2.0 * alpha * angular / eta_eff))
}

/// Capacitive sheet impedance of the patch array (Ohm). Purely reactive; the
/// reactance magnitude grows without bound as the patch shrinks.
pub fn grid_impedance(
    cell: &PatchCell,
    f: Frequency,
    theta_i: Angle,
    polarization: Polarization,
) -> Result<Complex64> {
    let y = grid_admittance(cell, f, theta_i, polarization)?;
    Ok(Complex64::new(0.0, -1.0 / y.im))
}

/// Input impedance looking into the grounded stack from the patch plane.
pub fn slab_input_impedance(
    stack: &LayerStack,
    f: Frequency,
    theta_i: Angle,
    polarization: Polarization,
) -> Complex64 {
    let omega = f.angular();
    let k0 = f.wavenumber().k0();
    let sin2 = theta_i.sin().powi(2);
    // Short circuit at the ground plane, then walk up through each layer.
    let mut z = Complex64::new(0.0, 0.0);
    for layer in stack.layers.iter().rev() {
        let eps = layer.complex_permittivity();
        let kz = k0 * (eps - sin2).sqrt();
        let z_line = match polarization {
            Polarization::Te => omega * MU0 / kz,
            Polarization::Tm => kz / (omega * EPS0 * eps),
        };
        let (s, c) = ((kz * layer.thickness).sin(), (kz * layer.thickness).cos());
        z = z_line * (z * c + J * z_line * s) / (z_line * c + J * z * s);
    }
    z
}

/// Complex reflection coefficient of the patch-loaded grounded stack.
pub fn reflection_coefficient(
    cell: &PatchCell,
    f: Frequency,
    theta_i: Angle,
    polarization: Polarization,
) -> Result<Complex64> {
    let y_grid = grid_admittance(cell, f, theta_i, polarization)?;
    let z_slab = slab_input_impedance(&cell.stack, f, theta_i, polarization);
    let eta = incident_wave_impedance(theta_i, polarization);
    if z_slab == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(-1.0, 0.0));
    }
    // Γ = (Zs − η)/(Zs + η) written in admittance form so a vanishing patch
    // (zero grid admittance) stays finite.
    let y_surface = y_grid + z_slab.inv();
    let ey = eta * y_surface;
    Ok((1.0 - ey) / (1.0 + ey))
}

/// One tabulated point of a reflection curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    /// Patch size in metres.
    pub patch_size: f64,
    pub magnitude: f64,
    /// Unwrapped phase in radians.
    pub phase: f64,
}

impl PhaseSample {
    pub fn gamma(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

/// Reflection coefficient versus patch size at one frequency, with the phase
/// unwrapped onto a continuous branch anchored at the smallest patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCurve {
    samples: Vec<PhaseSample>,
    frequency: Frequency,
}

impl PhaseCurve {
    /// Builds a curve from `(patch_size, gamma)` pairs. Rows are 1-based in
    /// errors.
    pub fn from_gammas(points: &[(f64, Complex64)], frequency: Frequency) -> Result<Self> {
        let raw: Vec<(f64, f64, f64)> =
            points.iter().map(|&(d, g)| (d, g.norm(), g.arg())).collect();
        Self::from_polar(&raw, frequency)
    }

    /// Builds a curve from `(patch_size, |gamma|, phase_rad)` triples.
    pub fn from_polar(points: &[(f64, f64, f64)], frequency: Frequency) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TableInvalid {
                row: points.len(),
                reason: "a phase curve needs at least two samples".into(),
            });
        }
        let mut samples: Vec<PhaseSample> = Vec::with_capacity(points.len());
        for (i, &(patch_size, magnitude, phase)) in points.iter().enumerate() {
            let row = i + 1;
            if !(patch_size.is_finite() && patch_size > 0.0) {
                return Err(Error::TableInvalid {
                    row,
                    reason: format!("patch size must be positive, got {patch_size}"),
                });
            }
            if !(magnitude.is_finite() && magnitude >= 0.0) || magnitude > 1.0 + 1e-6 {
                return Err(Error::TableInvalid {
                    row,
                    reason: format!("|gamma| = {magnitude} outside [0, 1]"),
                });
            }
            if !phase.is_finite() {
                return Err(Error::TableInvalid { row, reason: "phase is not finite".into() });
            }
            let phase = match samples.last() {
                None => phase,
                Some(prev) => {
                    if patch_size <= prev.patch_size {
                        return Err(Error::TableInvalid {
                            row,
                            reason: "patch sizes must be strictly increasing".into(),
                        });
                    }
                    prev.phase + wrap_phase(phase - prev.phase)
                }
            };
            samples.push(PhaseSample { patch_size, magnitude, phase });
        }
        Ok(Self { samples, frequency })
    }

    pub fn samples(&self) -> &[PhaseSample] {
        &self.samples
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn size_range(&self) -> (f64, f64) {
        (self.samples[0].patch_size, self.samples[self.samples.len() - 1].patch_size)
    }

    /// `(min, max)` of the unwrapped phase.
    pub fn phase_range(&self) -> (f64, f64) {
        self.samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.phase), hi.max(s.phase))
        })
    }

    pub fn phase_span(&self) -> f64 {
        let (lo, hi) = self.phase_range();
        hi - lo
    }

    /// +1 for increasing, -1 for decreasing, `None` when not strictly monotone.
    pub fn phase_direction(&self) -> Option<f64> {
        let increasing = self.samples.windows(2).all(|w| w[1].phase > w[0].phase);
        let decreasing = self.samples.windows(2).all(|w| w[1].phase < w[0].phase);
        match (increasing, decreasing) {
            (true, _) => Some(1.0),
            (_, true) => Some(-1.0),
            _ => None,
        }
    }

    /// Linear interpolation of magnitude and unwrapped phase at `patch_size`.
    pub fn evaluate(&self, patch_size: f64) -> Result<Complex64> {
        let (min, max) = self.size_range();
        if !(patch_size >= min && patch_size <= max) {
            return Err(Error::InterpolationOutOfRange {
                size_mm: patch_size * 1e3,
                min_mm: min * 1e3,
                max_mm: max * 1e3,
            });
        }
        let i = self.samples.partition_point(|s| s.patch_size < patch_size);
        if i < self.samples.len() && self.samples[i].patch_size == patch_size {
            return Ok(self.samples[i].gamma());
        }
        let (a, b) = (&self.samples[i - 1], &self.samples[i]);
        let t = (patch_size - a.patch_size) / (b.patch_size - a.patch_size);
        let magnitude = a.magnitude + t * (b.magnitude - a.magnitude);
        let phase = a.phase + t * (b.phase - a.phase);
        Ok(Complex64::from_polar(magnitude, phase))
    }

    /// Patch size whose interpolated unwrapped phase equals `phase` exactly
    /// (no wrapping). `None` when `phase` lies outside the curve.
    pub fn size_for_unwrapped_phase(&self, phase: f64) -> Option<f64> {
        let direction = self.phase_direction()?;
        let (lo, hi) = self.phase_range();
        if !(phase >= lo && phase <= hi) {
            return None;
        }
        // Phase is strictly monotone, so exactly one bracket contains it.
        let key = |s: &PhaseSample| direction * s.phase;
        let target = direction * phase;
        let i = self.samples.partition_point(|s| key(s) < target);
        if i < self.samples.len() && self.samples[i].phase == phase {
            return Some(self.samples[i].patch_size);
        }
        let (a, b) = (&self.samples[i - 1], &self.samples[i]);
        let t = (phase - a.phase) / (b.phase - a.phase);
        Some(a.patch_size + t * (b.patch_size - a.patch_size))
    }

    /// Writes the curve in the phase-table text format.
    pub fn to_table_string(&self) -> String {
        let mut out = String::from("D_mm, gamma_abs, gamma_phase_deg\n");
        let _ = writeln!(out, "# frequency_hz = {}", self.frequency.hz());
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{}, {}, {}",
                s.patch_size * 1e3,
                s.magnitude,
                s.phase.to_degrees()
            );
        }
        out
    }

    pub fn export_table(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_table_string())?;
        Ok(())
    }
}

/// Sweeps the surrogate over patch size. Sample gaps (period minus patch) are
/// spaced geometrically so the steep resonance near small gaps stays resolved;
/// the two endpoints are exactly `d_min` and `d_max`.
#[allow(clippy::too_many_arguments)]
pub fn phase_curve(
    stack: &LayerStack,
    pitch_x: f64,
    pitch_y: f64,
    d_min: f64,
    d_max: f64,
    n_samples: usize,
    f: Frequency,
    polarization: Polarization,
) -> Result<PhaseCurve> {
    let limit = pitch_x.min(pitch_y);
    if n_samples < 2 {
        return Err(Error::InvalidInput("phase curve needs at least two samples".into()));
    }
    if !(d_min > 0.0 && d_min < d_max && d_max < limit) {
        return Err(Error::InvalidInput(format!(
            "patch range must satisfy 0 < d_min < d_max < min pitch, got [{d_min}, {d_max}] with pitch {limit}"
        )));
    }
    let period = match polarization {
        Polarization::Tm => pitch_x,
        Polarization::Te => pitch_y,
    };
    let gap_start = period - d_min;
    let gap_end = period - d_max;
    let ratio = gap_end / gap_start;
    let last = n_samples - 1;
    let mut points = Vec::with_capacity(n_samples);
    let mut prev = 0.0;
    for i in 0..n_samples {
        let d = match i {
            0 => d_min,
            i if i == last => d_max,
            i => period - gap_start * ratio.powf(i as f64 / last as f64),
        };
        if i > 0 && d <= prev {
            return Err(Error::InvalidInput(format!(
                "sample spacing collapsed below floating-point resolution near D = {d} m"
            )));
        }
        prev = d;
        let cell = PatchCell::new(pitch_x, pitch_y, d, stack.clone())?;
        points.push((d, reflection_coefficient(&cell, f, Angle::ZERO, polarization)?));
    }
    PhaseCurve::from_gammas(&points, f)
}

/// Patch size whose phase equals `target_phase` modulo 2π. When several
/// branches of the curve reach the target, the smallest patch wins.
pub fn solve_patch_size(target_phase: f64, curve: &PhaseCurve) -> Result<f64> {
    if curve.phase_direction().is_none() {
        return Err(Error::InvalidInput("phase curve is not strictly monotone".into()));
    }
    let (lo, hi) = curve.phase_range();
    let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    let first = ((lo - target_phase) / TWO_PI).ceil() as i64 - 1;
    let last = ((hi - target_phase) / TWO_PI).floor() as i64 + 1;
    let best = (first..=last)
        .filter_map(|k| {
            let phase = target_phase + TWO_PI * k as f64;
            let phase = if (phase - lo).abs() <= tol {
                lo
            } else if (phase - hi).abs() <= tol {
                hi
            } else {
                phase
            };
            curve.size_for_unwrapped_phase(phase)
        })
        .fold(None, |best: Option<f64>, d| Some(best.map_or(d, |b| b.min(d))));
    best.ok_or(Error::PhaseUnreachable {
        target_deg: target_phase.to_degrees(),
        lo_deg: lo.to_degrees(),
        hi_deg: hi.to_degrees(),
        cell: None,
    })
}

/// Parses the phase-table format: one header line, then
/// `D_mm, gamma_abs, gamma_phase_deg` rows; `#` starts a comment line.
/// `frequency` is attached to the curve; tables carry no frequency column.
pub fn parse_phase_table(text: &str, frequency: Frequency) -> Result<PhaseCurve> {
    let mut points = Vec::new();
    let mut header_seen = false;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::TableInvalid {
                row,
                reason: format!("expected 3 columns, found {}", fields.len()),
            });
        }
        let mut values = [0.0f64; 3];
        for (v, field) in values.iter_mut().zip(&fields) {
            *v = field.parse().map_err(|_| Error::TableInvalid {
                row,
                reason: format!("cannot parse '{field}' as a number"),
            })?;
        }
        points.push((values[0] * 1e-3, values[1], values[2].to_radians()));
        rows.push(row);
    }
    if !header_seen {
        return Err(Error::TableInvalid { row: 0, reason: "missing header line".into() });
    }
    // Re-map sample indices in curve errors back to file line numbers.
    PhaseCurve::from_polar(&points, frequency).map_err(|e| match e {
        Error::TableInvalid { row, reason } => Error::TableInvalid {
            row: rows.get(row.wrapping_sub(1)).copied().unwrap_or(row),
            reason,
        },
        other => other,
    })
}

pub fn load_phase_table(path: impl AsRef<Path>, frequency: Frequency) -> Result<PhaseCurve> {
    let text = fs::read_to_string(path)?;
    parse_phase_table(&text, frequency)
}

/// Anything that can report a cell's reflection coefficient for a given patch
/// size and frequency.
pub trait CellResponse {
    fn gamma(&self, patch_size: f64, f: Frequency) -> Result<Complex64>;
}

/// Tabulated data is frequency-flat: the curve's own samples are used at any
/// requested frequency.
impl CellResponse for PhaseCurve {
    fn gamma(&self, patch_size: f64, _f: Frequency) -> Result<Complex64> {
        self.evaluate(patch_size)
    }
}

/// Same reflection coefficient for every cell, e.g. `-1` for a metal plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformResponse(pub Complex64);

impl UniformResponse {
    pub fn pec() -> Self {
        Self(Complex64::new(-1.0, 0.0))
    }
}

impl CellResponse for UniformResponse {
    fn gamma(&self, _patch_size: f64, _f: Frequency) -> Result<Complex64> {
        Ok(self.0)
    }
}

/// Evaluates the analytical surrogate at every frequency (dispersive).
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateCell {
    pub stack: LayerStack,
    pub pitch_x: f64,
    pub pitch_y: f64,
    pub polarization: Polarization,
}

impl CellResponse for SurrogateCell {
    fn gamma(&self, patch_size: f64, f: Frequency) -> Result<Complex64> {
        let cell = PatchCell::new(self.pitch_x, self.pitch_y, patch_size, self.stack.clone())?;
        reflection_coefficient(&cell, f, Angle::ZERO, self.polarization)
    }
}

/// Transverse cell dimension of the printed design, 30 mm.
pub const DEFAULT_TRANSVERSE_PITCH: f64 = 30e-3;
/// Smallest patch in the default sweep, 1 mm.
pub const DEFAULT_D_MIN: f64 = 1e-3;
/// Narrowest gap in the default sweep, 10 nm.
pub const DEFAULT_MIN_GAP: f64 = 10e-9;
pub const DEFAULT_SAMPLES: usize = 801;

/// Default surrogate curve for a gradient-axis pitch: paper-on-MDF stack,
/// electric field along the gradient axis, gaps swept down to 10 nm.
pub fn default_surrogate_curve(stack: &LayerStack, pitch: f64, f: Frequency) -> Result<PhaseCurve> {
    phase_curve(
        stack,
        pitch,
        DEFAULT_TRANSVERSE_PITCH.max(pitch * 1.5),
        DEFAULT_D_MIN.min(pitch / 4.0),
        pitch - DEFAULT_MIN_GAP,
        DEFAULT_SAMPLES,
        f,
        Polarization::Tm,
    )
}
