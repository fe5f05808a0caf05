//! Sliding-line shear-plane model: a line leaves the tool tip at a fixed
//! angle φ and the shear-plane length is the distance to where it first
//! meets a sinusoidal free surface.
//!
//! Coordinates are in the tip frame: the mean free surface is y = 0, the tip
//! rides at y = −mean_depth, and the surface is `A·sin(2πx/λ + phase)`.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{domain, Error, Result};
use crate::model::{Trace, Unit};

/// Scan step used to bracket the first crossing, as a fraction of λ.
pub const SCAN_STEPS_PER_WAVELENGTH: f64 = 1e4;

/// Bisection stops once the bracket is narrower than this (mils).
pub const ROOT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavySurfaceSpec {
    mean_depth: f64,
    amplitude: f64,
    wavelength: f64,
    phase: f64,
}

impl WavySurfaceSpec {
    /// The tip must stay below the lowest point of the surface
    /// (`mean_depth > amplitude`).
    pub fn new(mean_depth: f64, amplitude: f64, wavelength: f64, phase: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return domain(format!("wavelength must be positive, got {wavelength}"));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return domain(format!("amplitude must be non-negative, got {amplitude}"));
        }
        if !(mean_depth > amplitude && mean_depth.is_finite()) {
            return domain(format!(
                "mean depth {mean_depth} must exceed the surface amplitude {amplitude}"
            ));
        }
        if !phase.is_finite() {
            return domain("phase must be finite");
        }
        Ok(Self {
            mean_depth,
            amplitude,
            wavelength,
            phase,
        })
    }

    pub fn mean_depth(&self) -> f64 {
        self.mean_depth
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Free-surface height at `x`.
    pub fn height(&self, x: f64) -> f64 {
        self.amplitude * (TAU * x / self.wavelength + self.phase).sin()
    }

    /// Depth of material directly above a tip at `x`.
    pub fn chip_thickness(&self, x: f64) -> f64 {
        self.mean_depth + self.height(x)
    }

    /// Steepest surface slope, 2πA/λ.
    pub fn max_slope(&self) -> f64 {
        TAU * self.amplitude / self.wavelength
    }

    /// Shear angle below which some tip positions see the line graze the
    /// surface, so the first crossing can jump to a later branch.
    pub fn multiple_root_angle(&self) -> f64 {
        self.max_slope().atan()
    }

    /// True when a line at `phi` can be tangent to the surface.
    pub fn has_multiple_roots(&self, phi: f64) -> bool {
        phi.tan() < self.max_slope()
    }
}

fn check_angle(phi: f64) -> Result<()> {
    if !(phi > 0.0 && phi <= FRAC_PI_2) {
        return domain(format!("shear angle must lie in (0, π/2], got {phi}"));
    }
    Ok(())
}

/// Shear-plane length under a flat surface, `depth / sin φ`.
pub fn shear_length_flat(depth: f64, phi: f64) -> Result<f64> {
    check_angle(phi)?;
    if !(depth > 0.0) {
        return domain(format!("depth must be positive, got {depth}"));
    }
    Ok(depth / phi.sin())
}

/// Smallest `x` in `[lo, hi]` where `f` changes from positive to
/// non-positive, located by a uniform scan of width `step` followed by
/// bisection.
fn first_crossing(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> Result<f64> {
    let mut a = lo;
    if f(a) <= 0.0 {
        return Ok(a);
    }
    while a < hi {
        let b = (a + step).min(hi);
        if f(b) <= 0.0 {
            return Ok(bisect(&f, a, b));
        }
        a = b;
    }
    Err(Error::SearchWindow { lo, hi })
}

/// Requires `f(a) > 0 >= f(b)`.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    while b - a > ROOT_TOLERANCE {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Abscissa of the first point ahead of the tip where the shear line meets
/// the surface.
pub fn shear_line_exit(surf: &WavySurfaceSpec, tip_x: f64, phi: f64) -> Result<f64> {
    check_angle(phi)?;
    if phi == FRAC_PI_2 {
        return Ok(tip_x);
    }
    let tan_phi = phi.tan();
    let depth = surf.mean_depth;
    let gap = |x: f64| surf.height(x) - (-depth + (x - tip_x) * tan_phi);
    // Below y = −A the line cannot touch the surface; above y = +A it is past it.
    let lo = tip_x + (depth - surf.amplitude) / tan_phi;
    let step = surf.wavelength / SCAN_STEPS_PER_WAVELENGTH;
    let hi = tip_x + (depth + surf.amplitude) / tan_phi + step;
    first_crossing(gap, lo, hi, step)
}

/// Length from the tip to the first crossing of the shear line with the
/// wavy surface.
pub fn shear_length_wavy(surf: &WavySurfaceSpec, tip_x: f64, phi: f64) -> Result<f64> {
    check_angle(phi)?;
    if phi == FRAC_PI_2 {
        return Ok(surf.chip_thickness(tip_x));
    }
    if surf.amplitude == 0.0 {
        return shear_length_flat(surf.mean_depth, phi);
    }
    let x_exit = shear_line_exit(surf, tip_x, phi)?;
    Ok((x_exit - tip_x) / phi.cos())
}

/// Shear-plane length at `n` uniform tip positions over one wavelength
/// starting at x = 0.
pub fn shear_length_series(surf: &WavySurfaceSpec, phi: f64, n: usize) -> Result<Trace> {
    if n < 16 {
        return domain(format!("series needs at least 16 samples, got {n}"));
    }
    check_angle(phi)?;
    let step = surf.wavelength / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    let lengths = xs
        .iter()
        .map(|&x| shear_length_wavy(surf, x, phi))
        .collect::<Result<Vec<_>>>()?;
    Trace::new(xs, lengths, Unit::Mils)
}

/// Local chip thickness at the same tip positions as [`shear_length_series`].
pub fn chip_thickness_series(surf: &WavySurfaceSpec, n: usize) -> Result<Trace> {
    Trace::sample(0.0, surf.wavelength, n, Unit::Mils, |x| surf.chip_thickness(x))
}
