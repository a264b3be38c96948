//! Phase-gradient supercell synthesis and the generalized Snell's law.
//!
//! A supercell of `n_cells` patches spans one period `P` of a linear phase
//! ramp. The ramp adds a tangential wavevector `varrho = 2π/P` to the
//! reflected wave, so `sin θ_r = sin θ_i + varrho/k0`. Phases decrease along
//! `+x`, which steers the +1 order toward positive angles.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::em::{wrap_phase, Angle, Frequency, Wavevector, TWO_PI};
use crate::error::{Error, Result};
use crate::unit_cell::PhaseCurve;

/// Tangential wavevector added by a linear phase ramp of period `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientLaw {
    /// `2π/P`, rad/m.
    pub varrho: f64,
    pub k0: Wavevector,
}

impl GradientLaw {
    pub fn new(period: f64, f: Frequency) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::InvalidInput(format!("period must be positive, got {period}")));
        }
        Ok(Self { varrho: TWO_PI / period, k0: f.wavenumber() })
    }

    /// `varrho / k0`, equal to `λ/P`.
    pub fn ratio(&self) -> f64 {
        self.varrho / self.k0.k0()
    }
}

/// Period that steers a normally incident wave to `theta_r`: `P = λ/sin θ_r`.
pub fn period_for_angle(f: Frequency, theta_r: Angle) -> Result<f64> {
    let theta = theta_r.radians();
    if theta == 0.0 {
        return Err(Error::SpecularNoGradient);
    }
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::InvalidAngle(format!(
            "steering angle must lie in (0, 90) deg, got {:.4} deg",
            theta_r.degrees()
        )));
    }
    Ok(f.wavelength() / theta.sin())
}

/// `varrho/k0 = λ/P` for a period `P` (metres).
pub fn parallel_wavevector_ratio(period: f64, f: Frequency) -> Result<f64> {
    if !(period > 0.0) {
        return Err(Error::InvalidInput(format!("period must be positive, got {period}")));
    }
    Ok(f.wavelength() / period)
}

/// Reflection angle of the +1 gradient order,
/// `θ_r = arcsin(sin θ_i + varrho/k0)`. An infinite period gives specular
/// reflection.
pub fn anomalous_angle(theta_i: Angle, period: f64, f: Frequency) -> Result<Angle> {
    if !theta_i.is_propagating() {
        return Err(Error::InvalidAngle(format!(
            "incidence angle must lie in [-90, 90] deg, got {:.4}",
            theta_i.degrees()
        )));
    }
    let s = theta_i.sin() + parallel_wavevector_ratio(period, f)?;
    if s.abs() > 1.0 {
        return Err(Error::EvanescentOrder { sin_theta: s });
    }
    Ok(Angle::from_radians(s.asin()))
}

/// Cell phases `Φ_n = wrap(-varrho · x_n)` sampled at cell centres
/// `x_n = (n + 1/2)·P/n_cells`.
pub fn phase_profile(n_cells: usize, period: f64) -> Result<Vec<f64>> {
    Ok(unwrapped_profile(n_cells, period)?.into_iter().map(wrap_phase).collect())
}

fn unwrapped_profile(n_cells: usize, period: f64) -> Result<Vec<f64>> {
    if n_cells < 2 {
        return Err(Error::InvalidInput(format!(
            "a phase gradient needs at least two cells, got {n_cells}"
        )));
    }
    if !(period > 0.0) {
        return Err(Error::InvalidInput(format!("period must be positive, got {period}")));
    }
    // -varrho * x_n with x_n = (n + 1/2) P / N reduces to -2π (n + 1/2) / N.
    Ok((0..n_cells).map(|n| -TWO_PI * (n as f64 + 0.5) / n_cells as f64).collect())
}

pub const PUBLISHED_MAPPING_NOTE: &str = "Five published sizes D1..D5 for ten cells; each size is \
assigned to two adjacent cells in ascending order (D1 D1 D2 D2 D3 D3 D4 D4 D5 D5). The mapping \
is an assumption; phases are unknown.";

/// One period of a phase-gradient surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SupercellSpec {
    n_cells: usize,
    pitch: f64,
    period: f64,
    /// Wrapped target phases in radians, if known.
    phases: Option<Vec<f64>>,
    /// Patch sizes in metres.
    patch_sizes: Vec<f64>,
    frequency: Frequency,
    mapping_note: String,
}

impl SupercellSpec {
    pub fn new(
        pitch: f64,
        phases: Option<Vec<f64>>,
        patch_sizes: Vec<f64>,
        frequency: Frequency,
        mapping_note: impl Into<String>,
    ) -> Result<Self> {
        let n_cells = patch_sizes.len();
        if n_cells < 2 {
            return Err(Error::InvalidInput(format!(
                "a supercell needs at least two cells, got {n_cells}"
            )));
        }
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(Error::InvalidInput(format!("pitch must be positive, got {pitch}")));
        }
        if let Some(p) = &phases {
            if p.len() != n_cells {
                return Err(Error::InvalidInput(format!(
                    "{} phases for {} cells",
                    p.len(),
                    n_cells
                )));
            }
            let step = wrap_phase(p[1] - p[0]);
            let uniform = p.windows(2).all(|w| (wrap_phase(w[1] - w[0]) - step).abs() < 1e-9);
            if !uniform {
                return Err(Error::InvalidInput("phase increments are not constant".into()));
            }
        }
        if patch_sizes.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidInput("patch sizes must be positive".into()));
        }
        Ok(Self {
            n_cells,
            pitch,
            period: n_cells as f64 * pitch,
            phases,
            patch_sizes,
            frequency,
            mapping_note: mapping_note.into(),
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn phases(&self) -> Option<&[f64]> {
        self.phases.as_deref()
    }

    pub fn patch_sizes(&self) -> &[f64] {
        &self.patch_sizes
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn mapping_note(&self) -> &str {
        &self.mapping_note
    }

    pub fn gradient(&self) -> GradientLaw {
        GradientLaw { varrho: TWO_PI / self.period, k0: self.frequency.wavenumber() }
    }

    /// Same design with every patch size replaced, e.g. for a uniform
    /// reference plate of equal aperture.
    pub fn with_patch_sizes(&self, patch_sizes: Vec<f64>) -> Result<Self> {
        Self::new(self.pitch, None, patch_sizes, self.frequency, self.mapping_note.clone())
    }

    pub fn to_document(&self) -> DesignDocument {
        DesignDocument {
            frequency_hz: self.frequency.hz(),
            n_cells: self.n_cells,
            pitch_mm: self.pitch * 1e3,
            period_mm: self.period * 1e3,
            phases_deg: self.phases.as_ref().map(|p| p.iter().map(|x| x.to_degrees()).collect()),
            patch_sizes_mm: self.patch_sizes.iter().map(|d| d * 1e3).collect(),
            mapping_note: self.mapping_note.clone(),
        }
    }

    pub fn from_document(doc: &DesignDocument) -> Result<Self> {
        if doc.patch_sizes_mm.len() != doc.n_cells {
            return Err(Error::InvalidInput(format!(
                "design lists {} patch sizes for n_cells = {}",
                doc.patch_sizes_mm.len(),
                doc.n_cells
            )));
        }
        let spec = Self::new(
            doc.pitch_mm * 1e-3,
            doc.phases_deg.as_ref().map(|p| p.iter().map(|x| x.to_radians()).collect()),
            doc.patch_sizes_mm.iter().map(|d| d * 1e-3).collect(),
            Frequency::new(doc.frequency_hz)?,
            doc.mapping_note.clone(),
        )?;
        if (spec.period * 1e3 - doc.period_mm).abs() > 1e-9 * doc.period_mm.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "period_mm {} disagrees with n_cells * pitch_mm = {}",
                doc.period_mm,
                spec.period * 1e3
            )));
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Design-export document (JSON). Lengths in millimetres, phases in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDocument {
    pub frequency_hz: f64,
    pub n_cells: usize,
    pub pitch_mm: f64,
    pub period_mm: f64,
    pub phases_deg: Option<Vec<f64>>,
    pub patch_sizes_mm: Vec<f64>,
    pub mapping_note: String,
}

/// Synthesizes a supercell steering a normally incident wave to `theta_r`.
///
/// The phase ramp is shifted by a global offset so that all targets sit
/// inside the curve's unwrapped phase range, centred within it.
pub fn design_supercell(
    f: Frequency,
    theta_r: Angle,
    n_cells: usize,
    phase_source: &PhaseCurve,
) -> Result<SupercellSpec> {
    let period = period_for_angle(f, theta_r)?;
    let ramp = unwrapped_profile(n_cells, period)?;
    if phase_source.phase_direction().is_none() {
        return Err(Error::InvalidInput("phase source is not strictly monotone".into()));
    }
    let (lo, hi) = phase_source.phase_range();
    let ramp_hi = ramp[0];
    let ramp_lo = ramp[n_cells - 1];
    let needed = ramp_hi - ramp_lo;
    let offset = 0.5 * (lo + hi) - 0.5 * (ramp_hi + ramp_lo);

    let mut phases = Vec::with_capacity(n_cells);
    let mut sizes = Vec::with_capacity(n_cells);
    for (cell, phi) in ramp.iter().enumerate() {
        let target = phi + offset;
        let unreachable = || Error::PhaseUnreachable {
            target_deg: wrap_phase(target).to_degrees(),
            lo_deg: lo.to_degrees(),
            hi_deg: hi.to_degrees(),
            cell: Some(cell),
        };
        if needed > hi - lo {
            return Err(unreachable());
        }
        let size = phase_source.size_for_unwrapped_phase(target).ok_or_else(unreachable)?;
        phases.push(wrap_phase(target));
        sizes.push(size);
    }
    let note = format!(
        "synthesized for {:.4} GHz, theta_r = {:.4} deg; global phase offset {:.4} deg",
        f.ghz(),
        theta_r.degrees(),
        offset.to_degrees()
    );
    SupercellSpec::new(period / n_cells as f64, Some(phases), sizes, f, note)
}

/// Published sizes D1..D5 in millimetres.
pub const PUBLISHED_SIZES_MM: [f64; 5] = [16.4, 19.1, 19.6, 20.1, 21.3];

/// The printed design: ten 12 mm cells over a 120 mm period at 5 GHz, with
/// each of the five published sizes on two adjacent cells. Phases unknown.
pub fn table2_reference_spec() -> SupercellSpec {
    let sizes = PUBLISHED_SIZES_MM.iter().flat_map(|d| [d * 1e-3, d * 1e-3]).collect();
    SupercellSpec::new(
        12e-3,
        None,
        sizes,
        Frequency::from_ghz(5.0).expect("5 GHz is positive"),
        PUBLISHED_MAPPING_NOTE,
    )
    .expect("published design is valid")
}
