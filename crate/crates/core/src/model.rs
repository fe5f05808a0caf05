//! Units, tool and kinematic parameters, and the small value types shared by
//! the rest of the crate.
//!
//! Lengths are carried in mils, angles in radians and forces in lbf. Cutting
//! speed (SFM) and vibration frequency (kHz) are accepted at the boundary and
//! converted here.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Mils per foot divided by seconds per minute.
pub const MILS_PER_SECOND_PER_SFM: f64 = 12_000.0 / 60.0;

/// Cycles per second in one kHz.
pub const HZ_PER_KHZ: f64 = 1000.0;

/// Converts a cutting speed in surface feet per minute to mils per second.
pub fn sfm_to_mils_per_second(speed_sfm: f64) -> f64 {
    speed_sfm * MILS_PER_SECOND_PER_SFM
}

/// Spatial wavelength of the undulation cut by a tool vibrating at
/// `frequency_khz` while translating at `speed_sfm`: λ = V/ν, in mils.
pub fn wavelength(speed_sfm: f64, frequency_khz: f64) -> Result<f64> {
    if !(speed_sfm > 0.0 && speed_sfm.is_finite()) {
        return domain(format!("cutting speed must be positive, got {speed_sfm}"));
    }
    if !(frequency_khz > 0.0 && frequency_khz.is_finite()) {
        return domain(format!(
            "vibration frequency must be positive, got {frequency_khz}"
        ));
    }
    Ok(sfm_to_mils_per_second(speed_sfm) / (frequency_khz * HZ_PER_KHZ))
}

/// Frequency (kHz) that produces the wavelength `wavelength_mils` at `speed_sfm`.
pub fn frequency_for_wavelength(speed_sfm: f64, wavelength_mils: f64) -> Result<f64> {
    if !(speed_sfm > 0.0 && wavelength_mils > 0.0) {
        return domain("speed and wavelength must be positive");
    }
    Ok(sfm_to_mils_per_second(speed_sfm) / (wavelength_mils * HZ_PER_KHZ))
}

/// Rigid cutter profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToolGeometry {
    rake_angle: f64,
    relief_angle: f64,
    relief_length: f64,
    edge_radius: f64,
}

impl ToolGeometry {
    /// `relief_angle` is the angle of the relief face above the cut surface,
    /// measured behind the tip; it must lie strictly inside (0, π/2).
    pub fn new(
        rake_angle: f64,
        relief_angle: f64,
        relief_length: f64,
        edge_radius: f64,
    ) -> Result<Self> {
        if !rake_angle.is_finite() || rake_angle.abs() >= FRAC_PI_2 {
            return domain(format!("rake angle out of range: {rake_angle}"));
        }
        if !(relief_angle > 0.0 && relief_angle < FRAC_PI_2) {
            return domain(format!("relief angle must lie in (0, π/2), got {relief_angle}"));
        }
        if !(relief_length > 0.0 && relief_length.is_finite()) {
            return domain(format!("relief length must be positive, got {relief_length}"));
        }
        if !(edge_radius >= 0.0 && edge_radius.is_finite()) {
            return domain(format!("edge radius must be non-negative, got {edge_radius}"));
        }
        Ok(Self {
            rake_angle,
            relief_angle,
            relief_length,
            edge_radius,
        })
    }

    /// Same as [`ToolGeometry::new`] with angles given in degrees.
    pub fn from_degrees(
        rake_deg: f64,
        relief_deg: f64,
        relief_length: f64,
        edge_radius: f64,
    ) -> Result<Self> {
        Self::new(
            rake_deg.to_radians(),
            relief_deg.to_radians(),
            relief_length,
            edge_radius,
        )
    }

    pub fn rake_angle(&self) -> f64 {
        self.rake_angle
    }

    pub fn relief_angle(&self) -> f64 {
        self.relief_angle
    }

    pub fn relief_length(&self) -> f64 {
        self.relief_length
    }

    /// Reported only; the cutting edge is treated as a sharp vertex.
    pub fn edge_radius(&self) -> f64 {
        self.edge_radius
    }

    /// Horizontal extent of the relief face behind the tip.
    pub fn relief_run(&self) -> f64 {
        self.relief_length * self.relief_angle.cos()
    }

    /// Same tool with a different relief-face length.
    pub fn with_relief_length(&self, relief_length: f64) -> Result<Self> {
        Self::new(self.rake_angle, self.relief_angle, relief_length, self.edge_radius)
    }
}

/// How a quoted vibration amplitude is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeConvention {
    /// The quoted value is the half amplitude A of `A·sin(..)`.
    Half,
    /// The quoted value is the peak-to-valley excursion 2A.
    PeakToValley,
}

impl AmplitudeConvention {
    pub fn to_half_amplitude(self, quoted: f64) -> f64 {
        match self {
            Self::Half => quoted,
            Self::PeakToValley => quoted / 2.0,
        }
    }
}

/// Cutting and vibration parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    cutting_speed: f64,
    vibration_frequency: f64,
    amplitude: f64,
    nominal_feed: f64,
    start_phase: f64,
}

impl Kinematics {
    /// `amplitude` is interpreted according to `convention`; the stored value
    /// is always the half amplitude.
    pub fn new(
        cutting_speed_sfm: f64,
        vibration_frequency_khz: f64,
        amplitude: f64,
        convention: AmplitudeConvention,
        nominal_feed: f64,
    ) -> Result<Self> {
        wavelength(cutting_speed_sfm, vibration_frequency_khz)?;
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return domain(format!("vibration amplitude must be non-negative, got {amplitude}"));
        }
        if !(nominal_feed > 0.0 && nominal_feed.is_finite()) {
            return domain(format!("nominal feed must be positive, got {nominal_feed}"));
        }
        Ok(Self {
            cutting_speed: cutting_speed_sfm,
            vibration_frequency: vibration_frequency_khz,
            amplitude: convention.to_half_amplitude(amplitude),
            nominal_feed,
            start_phase: 0.0,
        })
    }

    /// Builds kinematics from a target wavelength instead of a frequency.
    pub fn from_wavelength(
        cutting_speed_sfm: f64,
        wavelength_mils: f64,
        amplitude: f64,
        convention: AmplitudeConvention,
        nominal_feed: f64,
    ) -> Result<Self> {
        let freq = frequency_for_wavelength(cutting_speed_sfm, wavelength_mils)?;
        Self::new(cutting_speed_sfm, freq, amplitude, convention, nominal_feed)
    }

    /// Sets the starting phase θ₀ of the tool oscillation.
    pub fn with_start_phase(mut self, theta0: f64) -> Result<Self> {
        if !theta0.is_finite() {
            return domain("start phase must be finite");
        }
        self.start_phase = theta0;
        Ok(self)
    }

    pub fn cutting_speed(&self) -> f64 {
        self.cutting_speed
    }

    pub fn vibration_frequency(&self) -> f64 {
        self.vibration_frequency
    }

    /// Half amplitude A.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn peak_to_valley(&self) -> f64 {
        2.0 * self.amplitude
    }

    pub fn nominal_feed(&self) -> f64 {
        self.nominal_feed
    }

    pub fn start_phase(&self) -> f64 {
        self.start_phase
    }

    pub fn wavelength(&self) -> f64 {
        sfm_to_mils_per_second(self.cutting_speed) / (self.vibration_frequency * HZ_PER_KHZ)
    }

    /// Steepest slope of the tip path, 2πA/λ.
    pub fn max_path_slope(&self) -> f64 {
        TAU * self.amplitude / self.wavelength()
    }
}

/// Physical unit attached to a [`Trace`] ordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Mils,
    Lbf,
    Radians,
    Dimensionless,
}

/// A sampled signal over the cut coordinate x (mils).
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    xs: Vec<f64>,
    values: Vec<f64>,
    unit: Unit,
}

impl Trace {
    /// Requires at least two points with strictly increasing, finite x.
    pub fn new(xs: Vec<f64>, values: Vec<f64>, unit: Unit) -> Result<Self> {
        if xs.len() != values.len() {
            return domain(format!(
                "trace has {} abscissae but {} values",
                xs.len(),
                values.len()
            ));
        }
        if xs.len() < 2 {
            return domain("trace needs at least two points");
        }
        if xs.iter().chain(&values).any(|v| !v.is_finite()) {
            return domain("trace contains non-finite values");
        }
        if let Some(w) = xs.windows(2).find(|w| w[1] <= w[0]) {
            return domain(format!("trace abscissae not strictly increasing at x = {}", w[1]));
        }
        Ok(Self { xs, values, unit })
    }

    pub fn from_points(points: &[(f64, f64)], unit: Unit) -> Result<Self> {
        let (xs, values) = points.iter().copied().unzip();
        Self::new(xs, values, unit)
    }

    /// Samples `f` at `n` uniform points on `[x0, x1)`.
    pub fn sample(x0: f64, x1: f64, n: usize, unit: Unit, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || x1 <= x0 {
            return domain("sampling needs n >= 2 and x1 > x0");
        }
        let step = (x1 - x0) / n as f64;
        let xs: Vec<f64> = (0..n).map(|i| x0 + i as f64 * step).collect();
        let values = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, values, unit)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.values.iter().copied())
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Linear interpolation at `x`; `None` outside the sampled range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.x_range();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let i = self.xs.partition_point(|&xi| xi <= x);
        if i == self.xs.len() {
            return Some(self.values[i - 1]);
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            xs: self.xs.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            unit: self.unit,
        }
    }
}

/// `a0 + a1·cos(2πx/λ) + a2·sin(2πx/λ)` with λ fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub wavelength: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub rms_residual: f64,
}

impl SinusoidFit {
    pub fn new(wavelength: f64, a0: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::Domain(format!("wavelength must be positive, got {wavelength}")));
        }
        Ok(Self {
            wavelength,
            a0,
            a1,
            a2,
            rms_residual: 0.0,
        })
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        evaluate_sinusoid(self, x)
    }

    /// Amplitude of the fundamental, √(a1² + a2²).
    pub fn amplitude(&self) -> f64 {
        self.a1.hypot(self.a2)
    }
}

pub fn evaluate_sinusoid(fit: &SinusoidFit, x: f64) -> f64 {
    let theta = TAU * x / fit.wavelength;
    fit.a0 + fit.a1 * theta.cos() + fit.a2 * theta.sin()
}
