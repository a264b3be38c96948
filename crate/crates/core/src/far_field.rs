//! Physical-optics aperture summation for a tiled supercell.
//!
//! Each cell is a uniformly illuminated strip of width `w_n` re-radiating with
//! its reflection coefficient `γ_n`. Along the gradient axis the scattered
//! field is
//!
//! ```text
//! E(θ) = Σ γ_n · w_n · sinc(k0 w_n u / 2) · exp(j k0 x_n u),   u = sin θ − sin θ_i
//! ```
//!
//! with `θ_i` measured on the mirror side, so a uniform aperture peaks at
//! `θ = θ_i`. The transverse dimension only contributes a constant factor and
//! is left out.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::em::{db10, db20, Angle, Frequency};
use crate::error::{Error, Result};
use crate::gradient::{anomalous_angle, SupercellSpec};
use crate::unit_cell::CellResponse;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApertureElement {
    /// Centre position along the gradient axis, metres.
    pub x: f64,
    pub width: f64,
    pub gamma: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApertureProfile {
    elements: Vec<ApertureElement>,
}

impl ApertureProfile {
    pub fn new(elements: Vec<ApertureElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidInput("aperture needs at least one element".into()));
        }
        for e in &elements {
            if !(e.width > 0.0 && e.width.is_finite() && e.x.is_finite()) {
                return Err(Error::InvalidGeometry(format!("bad element {e:?}")));
            }
        }
        for w in elements.windows(2) {
            let min_sep = 0.5 * (w[0].width + w[1].width);
            if w[1].x - w[0].x < min_sep * (1.0 - 1e-12) {
                return Err(Error::InvalidGeometry(format!(
                    "elements at x = {} and x = {} overlap or are unsorted",
                    w[0].x, w[1].x
                )));
            }
        }
        Ok(Self { elements })
    }

    /// `count` equal cells of `width` centred on the origin.
    pub fn uniform(count: usize, width: f64, gamma: Complex64) -> Result<Self> {
        let start = -0.5 * count as f64 * width;
        Self::new(
            (0..count)
                .map(|i| ApertureElement { x: start + (i as f64 + 0.5) * width, width, gamma })
                .collect(),
        )
    }

    pub fn elements(&self) -> &[ApertureElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Physical extent from the first element's left edge to the last one's
    /// right edge.
    pub fn length(&self) -> f64 {
        let first = &self.elements[0];
        let last = &self.elements[self.elements.len() - 1];
        (last.x + 0.5 * last.width) - (first.x - 0.5 * first.width)
    }

    /// Same geometry, every reflection coefficient replaced by `gamma`.
    pub fn with_uniform_gamma(&self, gamma: Complex64) -> Self {
        Self { elements: self.elements.iter().map(|e| ApertureElement { gamma, ..*e }).collect() }
    }

    /// Peak field of an equal-aperture, unit-magnitude uniform reflector:
    /// `Σ w_n`. No passive profile exceeds it.
    pub fn reference_peak(&self) -> f64 {
        self.elements.iter().map(|e| e.width).sum()
    }
}

/// Tiles `spec` `tiles` times along the gradient axis, centred on the origin,
/// with each cell's `γ` taken from `source` at the design frequency.
pub fn build_profile(
    spec: &SupercellSpec,
    source: &dyn CellResponse,
    tiles: usize,
) -> Result<ApertureProfile> {
    build_profile_at(spec, source, tiles, spec.frequency())
}

pub fn build_profile_at(
    spec: &SupercellSpec,
    source: &dyn CellResponse,
    tiles: usize,
    f: Frequency,
) -> Result<ApertureProfile> {
    if tiles == 0 {
        return Err(Error::InvalidInput("tiles must be at least 1".into()));
    }
    let gammas = spec
        .patch_sizes()
        .iter()
        .map(|&d| source.gamma(d, f))
        .collect::<Result<Vec<_>>>()?;
    let pitch = spec.pitch();
    let n = spec.n_cells();
    let start = -0.5 * (n * tiles) as f64 * pitch;
    let elements = (0..tiles)
        .flat_map(|t| (0..n).map(move |c| (t, c)))
        .map(|(t, c)| ApertureElement {
            x: start + t as f64 * spec.period() + (c as f64 + 0.5) * pitch,
            width: pitch,
            gamma: gammas[c],
        })
        .collect();
    ApertureProfile::new(elements)
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        u.sin() / u
    }
}

/// Scattered field at a single observation angle.
pub fn field_at(profile: &ApertureProfile, theta_i: Angle, theta: Angle, f: Frequency) -> Complex64 {
    field_at_u(profile, theta.sin() - theta_i.sin(), f.wavenumber().k0())
}

fn field_at_u(profile: &ApertureProfile, u: f64, k0: f64) -> Complex64 {
    profile
        .elements
        .iter()
        .map(|e| {
            e.gamma * (e.width * sinc(0.5 * k0 * e.width * u)) * Complex64::cis(k0 * e.x * u)
        })
        .sum()
}

/// Strictly increasing observation angles within `[-π/2, π/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid(Vec<Angle>);

impl AngleGrid {
    pub fn new(angles: Vec<Angle>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidInput("angle grid is empty".into()));
        }
        let in_range = angles.iter().all(|a| a.radians().abs() <= FRAC_PI_2 + 1e-12);
        let increasing = angles.windows(2).all(|w| w[1].radians() > w[0].radians());
        if !(in_range && increasing) {
            return Err(Error::InvalidInput(
                "angle grid must be strictly increasing within [-90, 90] deg".into(),
            ));
        }
        Ok(Self(angles))
    }

    /// `[-90°, 90°]` in steps of `step_deg`; the step must divide 180°
    /// into a whole number of intervals (to 1e-9).
    pub fn degrees(step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0 && step_deg <= 180.0) {
            return Err(Error::InvalidInput(format!("bad grid step {step_deg} deg")));
        }
        let intervals = (180.0 / step_deg).round();
        if ((180.0 / step_deg) - intervals).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("step {step_deg} deg does not divide 180 deg")));
        }
        let n = intervals as usize;
        Self::new(
            (0..=n)
                .map(|i| Angle::from_degrees(-90.0 + 180.0 * i as f64 / n as f64))
                .collect(),
        )
    }

    /// 0.1 degree steps over the visible half-space.
    pub fn default_grid() -> Self {
        Self::degrees(0.1).expect("0.1 deg divides 180 deg")
    }

    pub fn angles(&self) -> &[Angle] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AperturePattern {
    theta_grid: Vec<Angle>,
    amplitude: Vec<Complex64>,
    frequency: Frequency,
    theta_i: Angle,
    /// Equal-aperture uniform-reflector peak, used as 0 dB in exports.
    reference: f64,
}

impl AperturePattern {
    pub fn theta_grid(&self) -> &[Angle] {
        &self.theta_grid
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn theta_i(&self) -> Angle {
        self.theta_i
    }

    /// Builds a pattern from raw samples (test patterns, imported data).
    pub fn from_samples(
        grid: AngleGrid,
        amplitude: Vec<Complex64>,
        frequency: Frequency,
        theta_i: Angle,
    ) -> Result<Self> {
        if grid.0.len() != amplitude.len() {
            return Err(Error::InvalidInput("amplitude length differs from grid".into()));
        }
        let reference = amplitude.iter().map(|a| a.norm()).fold(0.0, f64::max);
        Ok(Self { theta_grid: grid.0, amplitude, frequency, theta_i, reference })
    }

    /// CSV with header `theta_deg, magnitude_db, phase_deg`. Magnitude is
    /// relative to the equal-aperture uniform reflector peak.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_deg, magnitude_db, phase_deg\n");
        for (theta, a) in self.theta_grid.iter().zip(&self.amplitude) {
            let mag = if a.norm() > 0.0 && self.reference > 0.0 {
                db20(a.norm() / self.reference).max(-300.0)
            } else {
                -300.0
            };
            let _ = writeln!(out, "{:.4}, {:.6}, {:.4}", theta.degrees(), mag, a.arg().to_degrees());
        }
        out
    }
}

pub fn scattered_pattern(
    profile: &ApertureProfile,
    theta_i: Angle,
    f: Frequency,
    grid: &AngleGrid,
) -> AperturePattern {
    let k0 = f.wavenumber().k0();
    let s_i = theta_i.sin();
    let amplitude = grid.0.iter().map(|t| field_at_u(profile, t.sin() - s_i, k0)).collect();
    AperturePattern {
        theta_grid: grid.0.clone(),
        amplitude,
        frequency: f,
        theta_i,
        reference: profile.reference_peak(),
    }
}

fn peak_index(p: &AperturePattern) -> usize {
    let mut best = 0;
    let mut best_mag = p.amplitude[0].norm();
    for (i, a) in p.amplitude.iter().enumerate().skip(1) {
        let m = a.norm();
        let tie = (m - best_mag).abs() <= 1e-12 * best_mag.max(m);
        if (!tie && m > best_mag)
            || (tie && p.theta_grid[i].radians().abs() < p.theta_grid[best].radians().abs())
        {
            best = i;
            best_mag = m;
        }
    }
    best
}

/// Grid angle with the largest `|E|`; ties go to the smaller `|θ|`.
pub fn peak_angle(p: &AperturePattern) -> Angle {
    p.theta_grid[peak_index(p)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Directivity {
    pub linear: f64,
    pub db: f64,
}

/// `max|E|²` over the mean of `|E|²` across the grid (line-aperture
/// convention: directions weighted uniformly in angle).
pub fn peak_directivity(p: &AperturePattern) -> Result<Directivity> {
    let powers: Vec<f64> = p.amplitude.iter().map(|a| a.norm_sqr()).collect();
    let mean = powers.iter().sum::<f64>() / powers.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::UndefinedDirectivity);
    }
    let linear = powers.iter().cloned().fold(0.0, f64::max) / mean;
    Ok(Directivity { linear, db: db10(linear) })
}

/// Width of the contiguous main-lobe region around the peak where
/// `|E|² ≥ max/2`, with linear interpolation at the edges.
pub fn half_power_beamwidth(p: &AperturePattern) -> Angle {
    let i = peak_index(p);
    let half = 0.5 * p.amplitude[i].norm_sqr();
    let power = |k: usize| p.amplitude[k].norm_sqr();
    let theta = |k: usize| p.theta_grid[k].radians();
    let crossing = |inside: usize, outside: usize| {
        let (a, b) = (power(inside), power(outside));
        let t = (a - half) / (a - b);
        theta(inside) + t * (theta(outside) - theta(inside))
    };
    let mut lo = i;
    while lo > 0 && power(lo - 1) >= half {
        lo -= 1;
    }
    let left = if lo > 0 { crossing(lo, lo - 1) } else { theta(0) };
    let mut hi = i;
    while hi + 1 < p.amplitude.len() && power(hi + 1) >= half {
        hi += 1;
    }
    let right = if hi + 1 < p.amplitude.len() { crossing(hi, hi + 1) } else { theta(hi) };
    Angle::from_radians(right - left)
}

/// Peak `|E|²`: grid maximum refined by dense sampling over the neighbouring
/// grid intervals.
fn refined_peak_power(profile: &ApertureProfile, theta_i: Angle, f: Frequency, grid: &AngleGrid) -> f64 {
    let pattern = scattered_pattern(profile, theta_i, f, grid);
    let i = peak_index(&pattern);
    let lo = grid.0[i.saturating_sub(1)].radians();
    let hi = grid.0[(i + 1).min(grid.0.len() - 1)].radians();
    const STEPS: usize = 400;
    (0..=STEPS)
        .map(|k| {
            let theta = Angle::from_radians(lo + (hi - lo) * k as f64 / STEPS as f64);
            field_at(profile, theta_i, theta, f).norm_sqr()
        })
        .fold(pattern.amplitude[i].norm_sqr(), f64::max)
}

/// Reflection efficiency against a PEC plate of equal aperture: the designed
/// pattern's peak `|E|²` over the plate's specular peak `|E|²`, per frequency.
pub fn efficiency_vs_pec(
    spec: &SupercellSpec,
    source: &dyn CellResponse,
    theta_i: Angle,
    f_grid: &[Frequency],
    tiles: usize,
) -> Result<Vec<f64>> {
    let grid = AngleGrid::default_grid();
    f_grid
        .iter()
        .map(|&f| {
            let profile = build_profile_at(spec, source, tiles, f)?;
            let pec = profile.with_uniform_gamma(Complex64::new(-1.0, 0.0));
            let design = refined_peak_power(&profile, theta_i, f, &grid);
            let reference = refined_peak_power(&pec, theta_i, f, &grid);
            Ok(design / reference)
        })
        .collect()
}

/// Predicted +1-order angle for a spec at frequency `f`, if it propagates.
pub fn predicted_peak(spec: &SupercellSpec, theta_i: Angle, f: Frequency) -> Option<Angle> {
    anomalous_angle(theta_i, spec.period(), f).ok()
}

/// CSV with header `freq_ghz, ratio, ratio_db`.
pub fn efficiency_csv(f_grid: &[Frequency], ratios: &[f64]) -> String {
    let mut out = String::from("freq_ghz, ratio, ratio_db\n");
    for (f, r) in f_grid.iter().zip(ratios) {
        let _ = writeln!(out, "{:.6}, {:.6}, {:.4}", f.ghz(), r, db10(*r));
    }
    out
}
