//! Machined-surface generation by lower-envelope material removal.
//!
//! The workpiece free surface starts flat at y = 0 and the tool cuts below
//! it. At every step the tool footprint (tip vertex plus the straight relief
//! face trailing behind it) lowers the height field to its own lower
//! boundary. The tip path between sampled positions is taken as linear, so
//! the relief-face endpoint sweeps a continuous range of x and every grid
//! column behind the tool sees the exact envelope of the piecewise-linear
//! path.

use std::f64::consts::TAU;

use crate::error::{domain, Error, Result};
use crate::model::{Kinematics, ToolGeometry, Trace, Unit};

/// Finest allowed grid is λ/200.
pub const MIN_STEPS_PER_WAVELENGTH: f64 = 200.0;

/// Default grid is λ/1000.
pub const DEFAULT_STEPS_PER_WAVELENGTH: usize = 1000;

/// Vertical tip position y = −feed + A·sin(2πx/λ + θ₀).
pub fn tool_tip_path(kin: &Kinematics, x: f64) -> f64 {
    -kin.nominal_feed() + kin.amplitude() * (TAU * x / kin.wavelength() + kin.start_phase()).sin()
}

/// Single-valued height field y(x) on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceProfile {
    x0: f64,
    dx: f64,
    heights: Vec<f64>,
}

impl SurfaceProfile {
    pub fn new(x0: f64, dx: f64, heights: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) || !x0.is_finite() {
            return domain(format!("invalid grid origin/step ({x0}, {dx})"));
        }
        if heights.len() < 2 {
            return domain("surface needs at least two grid points");
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return domain("surface heights must be finite");
        }
        Ok(Self { x0, dx, heights })
    }

    /// Undisturbed free surface y = 0 with `n` grid points.
    pub fn flat(x0: f64, dx: f64, n: usize) -> Result<Self> {
        Self::new(x0, dx, vec![0.0; n])
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x_at(self.heights.len() - 1)
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.heights.len()).map(|i| self.x_at(i))
    }

    /// Piecewise-linear height at `x`; `None` outside the grid.
    pub fn height_at(&self, x: f64) -> Option<f64> {
        let u = (x - self.x0) / self.dx;
        let last = (self.heights.len() - 1) as f64;
        if !(u >= -1e-9 && u <= last + 1e-9) {
            return None;
        }
        let u = u.clamp(0.0, last);
        let i = (u.floor() as usize).min(self.heights.len() - 2);
        let t = u - i as f64;
        Some(self.heights[i] + t * (self.heights[i + 1] - self.heights[i]))
    }

    pub fn to_trace(&self) -> Result<Trace> {
        Trace::new(self.xs().collect(), self.heights.clone(), Unit::Mils)
    }
}

/// Tool outline placed at a tip position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToolFootprint {
    pub tip: (f64, f64),
    /// Far end of the relief face, behind and above the tip.
    pub relief_end: (f64, f64),
    /// End of a plotting-length stub of the rake face, ahead and above.
    pub rake_end: (f64, f64),
}

impl ToolFootprint {
    /// Height of the footprint's lower boundary at `x`, if `x` lies under the
    /// relief face or at the tip.
    pub fn lower_boundary(&self, x: f64) -> Option<f64> {
        let (tx, ty) = self.tip;
        let (ex, ey) = self.relief_end;
        if x > tx || x < ex {
            return None;
        }
        Some(ty + (tx - x) * (ey - ty) / (tx - ex))
    }
}

pub fn footprint_at(tool: &ToolGeometry, tip: (f64, f64)) -> ToolFootprint {
    let gamma = tool.relief_angle();
    let len = tool.relief_length();
    let relief_end = (tip.0 - len * gamma.cos(), tip.1 + len * gamma.sin());
    // The rake face leans back from vertical by the rake angle.
    let rake_dir = std::f64::consts::FRAC_PI_2 - tool.rake_angle();
    let rake_end = (tip.0 + len * rake_dir.cos(), tip.1 + len * rake_dir.sin());
    ToolFootprint {
        tip,
        relief_end,
        rake_end,
    }
}

/// Run-local surface state for a tool advancing one grid step at a time.
///
/// Tool position `k` sits over grid column `k`. Applying a position lowers
/// every column under its relief face, and the column where the relief-face
/// endpoint crossed since the previous position.
#[derive(Debug, Clone)]
pub struct SweepState {
    surface: SurfaceProfile,
    tan_gamma: f64,
    run: f64,
    /// Whole grid steps spanned by the relief face.
    span: usize,
    /// Fraction of a step between `span` steps and the relief endpoint.
    frac: f64,
    prev_tip: Option<(usize, f64)>,
}

impl SweepState {
    pub fn new(surface: SurfaceProfile, tool: &ToolGeometry) -> Self {
        let run = tool.relief_run();
        let ratio = run / surface.dx;
        let mut span = ratio.floor();
        let mut frac = ratio - span;
        // Snap near-integer spans so grids that divide the run exactly stay exact.
        if frac > 1.0 - 1e-9 {
            span += 1.0;
            frac = 0.0;
        } else if frac < 1e-9 {
            frac = 0.0;
        }
        Self {
            surface,
            tan_gamma: tool.relief_angle().tan(),
            run,
            span: span as usize,
            frac,
            prev_tip: None,
        }
    }

    pub fn surface(&self) -> &SurfaceProfile {
        &self.surface
    }

    pub fn into_surface(self) -> SurfaceProfile {
        self.surface
    }

    /// Removes material down to the tip at column `k` only.
    pub fn carve_tip(&mut self, k: usize, tip_y: f64) {
        let h = &mut self.surface.heights[k];
        *h = h.min(tip_y);
    }

    /// Applies the full footprint of a tip at column `k`, height `tip_y`.
    pub fn apply(&mut self, k: usize, tip_y: f64) {
        let dx = self.surface.dx;
        let lo = k.saturating_sub(self.span);
        for j in lo..=k {
            let relief = tip_y + (k - j) as f64 * dx * self.tan_gamma;
            let h = &mut self.surface.heights[j];
            if relief < *h {
                *h = relief;
            }
        }
        if let Some((pk, py)) = self.prev_tip {
            if pk + 1 == k && self.frac > 0.0 && k > self.span {
                // Relief endpoint crossed column k - span - 1 between the two positions.
                let j = k - self.span - 1;
                let y_end = py + self.frac * (tip_y - py);
                let relief = y_end + self.run * self.tan_gamma;
                let h = &mut self.surface.heights[j];
                if relief < *h {
                    *h = relief;
                }
            }
        }
        self.prev_tip = Some((k, tip_y));
    }
}

fn check_grid(kin: &Kinematics, extent: f64, dx: f64) -> Result<()> {
    let lambda = kin.wavelength();
    if !(extent > lambda) {
        return Err(Error::Config(format!(
            "cut extent {extent} must exceed one wavelength ({lambda})"
        )));
    }
    if !(dx > 0.0 && dx <= lambda / MIN_STEPS_PER_WAVELENGTH * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "grid step {dx} too coarse; must be at most λ/{MIN_STEPS_PER_WAVELENGTH} = {}",
            lambda / MIN_STEPS_PER_WAVELENGTH
        )));
    }
    Ok(())
}

/// Surface left after a single pass of the vibrating tool over a fresh flat
/// workpiece spanning `[0, extent]`.
pub fn machined_surface(
    tool: &ToolGeometry,
    kin: &Kinematics,
    extent: f64,
    dx: f64,
) -> Result<SurfaceProfile> {
    check_grid(kin, extent, dx)?;
    let n = (extent / dx + 1e-9).floor() as usize + 1;
    let surface = SurfaceProfile::flat(0.0, dx, n)?;
    Ok(resweep(surface, tool, kin))
}

/// Sweeps the tool over every column of `surface` once more.
pub fn resweep(surface: SurfaceProfile, tool: &ToolGeometry, kin: &Kinematics) -> SurfaceProfile {
    let mut state = SweepState::new(surface, tool);
    for k in 0..state.surface.len() {
        let y = tool_tip_path(kin, state.surface.x_at(k));
        state.apply(k, y);
    }
    state.into_surface()
}

/// Tip path sampled on the grid of `surface`.
pub fn tip_path_trace(kin: &Kinematics, surface: &SurfaceProfile) -> Result<Trace> {
    let xs: Vec<f64> = surface.xs().collect();
    let ys = xs.iter().map(|&x| tool_tip_path(kin, x)).collect();
    Trace::new(xs, ys, Unit::Mils)
}
