//! Physical constants, frequency/wavelength conversions and the angle
//! convention shared by every other module.
//!
//! Everything is SI internally. Degrees, GHz and millimetres only show up at
//! the I/O boundary (CLI, CSV, JSON).

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s), exact.
pub const C0: f64 = 299_792_458.0;

/// Permeability of free space (H/m).
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Permittivity of free space (F/m), derived so that `EPS0 * MU0 * C0^2 == 1`.
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);

/// Wave impedance of free space (Ohm).
pub const ETA0: f64 = MU0 * C0;

pub const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(hz: f64) -> Result<Self> {
        if hz.is_finite() && hz > 0.0 {
            Ok(Self(hz))
        } else {
            Err(Error::InvalidInput(format!(
                "frequency must be positive and finite, got {hz} Hz"
            )))
        }
    }

    pub fn from_ghz(ghz: f64) -> Result<Self> {
        Self::new(ghz * 1e9)
    }

    pub fn hz(self) -> f64 {
        self.0
    }

    pub fn ghz(self) -> f64 {
        self.0 * 1e-9
    }

    pub fn angular(self) -> f64 {
        TWO_PI * self.0
    }

    pub fn wavelength(self) -> f64 {
        C0 / self.0
    }

    pub fn wavenumber(self) -> Wavevector {
        Wavevector(TWO_PI * self.0 / C0)
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} GHz", self.ghz())
    }
}

/// Free-space wavenumber `k0 = 2π/λ` in rad/m.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavevector(f64);

impl Wavevector {
    pub fn k0(self) -> f64 {
        self.0
    }
}

/// Free-space wavelength in metres. Fails for a non-positive frequency.
pub fn wavelength(hz: f64) -> Result<f64> {
    Frequency::new(hz).map(Frequency::wavelength)
}

/// Free-space wavenumber. Fails for a non-positive frequency.
pub fn wavenumber(hz: f64) -> Result<Wavevector> {
    Frequency::new(hz).map(Frequency::wavenumber)
}

/// Angle from the surface normal, radians. Positive angles lie on the side the
/// phase gradient steers toward.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn from_radians(rad: f64) -> Self {
        Self(rad)
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    /// True when the direction is a propagating one, `|θ| ≤ π/2`.
    pub fn is_propagating(self) -> bool {
        self.0.abs() <= PI / 2.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} deg", self.degrees())
    }
}

/// Polarization relative to the plane of incidence (the plane containing the
/// surface normal and the gradient axis `x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// Electric field transverse to the plane of incidence (along `y`).
    Te,
    /// Magnetic field transverse; electric field lies along the gradient axis.
    #[default]
    Tm,
}

/// Wrap a phase to `(-π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut p = phase.rem_euclid(TWO_PI);
    if p > PI {
        p -= TWO_PI;
    }
    p
}

pub fn db10(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn db20(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}
