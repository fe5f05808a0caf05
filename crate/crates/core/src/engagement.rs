//! Relief-face / workpiece contact length and engagement loops.

use crate::error::{domain, Error, Result};
use crate::model::{Kinematics, ToolGeometry};
use crate::surface::{tool_tip_path, SurfaceProfile, SweepState, DEFAULT_STEPS_PER_WAVELENGTH};

/// Arc length of the relief face lying at or below `surface` for a tool tip
/// at `tip`, clamped to `[0, L_r]`.
///
/// The surface is treated as piecewise linear between grid points, so the
/// result is exact for the given height field.
pub fn contact_length(tool: &ToolGeometry, surface: &SurfaceProfile, tip: (f64, f64)) -> Result<f64> {
    let (tx, ty) = tip;
    let run = tool.relief_run();
    let tan_g = tool.relief_angle().tan();
    let tol = 1e-9 * surface.dx();
    if !tx.is_finite() || !ty.is_finite() {
        return domain("tip position must be finite");
    }
    if tx - run < surface.x0() - tol || tx > surface.x_end() + tol {
        return domain(format!(
            "tip x = {tx} outside usable surface range [{}, {}]",
            surface.x0() + run,
            surface.x_end()
        ));
    }
    let start = (tx - run).max(surface.x0());
    let end = tx.min(surface.x_end());
    // Rounding noise along a face lying exactly on the surface is not contact.
    let eps = 1e-12 * (1.0 + ty.abs());
    let gap = |x: f64| -> f64 {
        // Both lookups are inside the grid by construction.
        let h = surface.height_at(x).unwrap_or(0.0);
        h - (ty + (tx - x) * tan_g) - eps
    };

    let dx = surface.dx();
    let mut submerged = 0.0;
    let mut a = start;
    while a < end {
        let cell = ((a - surface.x0()) / dx).floor() + 1.0;
        let b = (surface.x0() + cell * dx).min(end);
        let b = if b <= a { end.min(a + dx) } else { b };
        let (ga, gb) = (gap(a), gap(b));
        submerged += match (ga > 0.0, gb > 0.0) {
            (true, true) => b - a,
            (false, false) => 0.0,
            (true, false) => (b - a) * ga / (ga - gb),
            (false, true) => (b - a) * gb / (gb - ga),
        };
        a = b;
    }
    let arc = submerged / tool.relief_angle().cos();
    Ok(arc.clamp(0.0, tool.relief_length()))
}

/// One recorded tool position of an engagement loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSample {
    pub x: f64,
    pub tool_y: f64,
    pub contact: f64,
}

/// Contact length against tool height over the post-transient cycles of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct EngagementLoop {
    samples: Vec<LoopSample>,
    wavelength: f64,
    tool: ToolGeometry,
}

impl EngagementLoop {
    pub fn new(samples: Vec<LoopSample>, wavelength: f64, tool: ToolGeometry) -> Result<Self> {
        if !(wavelength > 0.0) {
            return domain("loop wavelength must be positive");
        }
        if samples.windows(2).any(|w| w[1].x <= w[0].x) {
            return domain("loop samples must be ordered by x");
        }
        let lr = tool.relief_length();
        if samples
            .iter()
            .any(|s| !(s.contact >= 0.0 && s.contact <= lr * (1.0 + 1e-12)))
        {
            return domain("loop contact outside [0, L_r]");
        }
        Ok(Self {
            samples,
            wavelength,
            tool,
        })
    }

    pub fn samples(&self) -> &[LoopSample] {
        &self.samples
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn tool(&self) -> &ToolGeometry {
        &self.tool
    }

    pub fn max_contact(&self) -> f64 {
        self.samples.iter().map(|s| s.contact).fold(0.0, f64::max)
    }

    /// Samples split into consecutive full cycles. A loop spanning less than
    /// one wavelength is returned whole.
    pub fn cycles(&self) -> Vec<&[LoopSample]> {
        let Some(first) = self.samples.first() else {
            return Vec::new();
        };
        let span = self.samples[self.samples.len() - 1].x - first.x;
        if span < self.wavelength * (1.0 - 1e-6) {
            return vec![&self.samples[..]];
        }
        let mut out = Vec::new();
        let mut start = 0;
        let mut cycle = 1.0;
        for (i, s) in self.samples.iter().enumerate() {
            if s.x - first.x >= cycle * self.wavelength - 1e-9 * self.wavelength {
                out.push(&self.samples[start..i]);
                start = i;
                cycle += 1.0;
            }
        }
        // A trailing chunk counts only if it covers a whole cycle of samples.
        let per_cycle = out.first().map_or(0, |c| c.len());
        if self.samples.len() - start >= per_cycle && per_cycle > 0 {
            out.push(&self.samples[start..]);
        }
        out
    }
}

/// Grid and recording settings for [`engagement_loop`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopGrid {
    pub steps_per_wavelength: usize,
    pub cycles: usize,
}

impl Default for LoopGrid {
    fn default() -> Self {
        Self {
            steps_per_wavelength: DEFAULT_STEPS_PER_WAVELENGTH,
            cycles: 4,
        }
    }
}

/// Sweeps the tool along its path over a fresh workpiece, recording
/// `(x, tool_y, contact)` each step. Contact is measured before the current
/// position's relief face removes anything, against everything strictly
/// earlier positions (and this position's cutting edge) left behind.
///
/// The run starts one relief-face run ahead of x = 0 so that the surface
/// under the relief face is fully formed from x = 0 on; the first cycle
/// `[0, λ)` is then discarded and `cycles − 1` cycles are returned.
pub fn engagement_loop(tool: &ToolGeometry, kin: &Kinematics, grid: LoopGrid) -> Result<EngagementLoop> {
    if grid.cycles < 2 {
        return domain("engagement loop needs at least two cycles (the first is discarded)");
    }
    if (grid.steps_per_wavelength as f64) < crate::surface::MIN_STEPS_PER_WAVELENGTH {
        return Err(Error::Config(format!(
            "{} steps per wavelength is too coarse",
            grid.steps_per_wavelength
        )));
    }
    let lambda = kin.wavelength();
    let n_cycle = grid.steps_per_wavelength;
    let dx = lambda / n_cycle as f64;
    let lead = (tool.relief_run() / dx).ceil() as usize + 1;
    let total = lead + grid.cycles * n_cycle;
    let x0 = -(lead as f64) * dx;
    let mut state = SweepState::new(SurfaceProfile::flat(x0, dx, total)?, tool);

    let mut samples = Vec::with_capacity((grid.cycles - 1) * n_cycle);
    let record_from = lead + n_cycle;
    for k in 0..total {
        // Index arithmetic keeps cycle boundaries on exact grid columns.
        let x = (k as f64 - lead as f64) * dx;
        let y = tool_tip_path(kin, x);
        state.carve_tip(k, y);
        if k >= record_from {
            let contact = contact_length(tool, state.surface(), (state.surface().x_at(k), y))?;
            samples.push(LoopSample {
                x,
                tool_y: y,
                contact,
            });
        }
        state.apply(k, y);
    }
    EngagementLoop::new(samples, lambda, *tool)
}

fn shoelace(points: &[LoopSample]) -> f64 {
    let n = points.len();
    let mut twice = 0.0;
    for i in 0..n {
        let (p, q) = (points[i], points[(i + 1) % n]);
        twice += p.tool_y * q.contact - q.tool_y * p.contact;
    }
    0.5 * twice
}

fn check_nondegenerate(points: &[LoopSample]) -> Result<()> {
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for p in points {
        let q = (p.tool_y, p.contact);
        if !distinct.contains(&q) {
            distinct.push(q);
            if distinct.len() >= 3 {
                break;
            }
        }
    }
    if distinct.len() < 3 {
        return Err(Error::DegenerateLoop(format!(
            "only {} distinct points",
            distinct.len()
        )));
    }
    // All points on one line encloses nothing.
    let (ax, ay) = (points[0].tool_y, points[0].contact);
    let (mut bx, mut by) = (ax, ay);
    for p in points {
        if (p.tool_y - ax).abs() + (p.contact - ay).abs() > (bx - ax).abs() + (by - ay).abs() {
            bx = p.tool_y;
            by = p.contact;
        }
    }
    let scale = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
    let collinear = points.iter().all(|p| {
        ((bx - ax) * (p.contact - ay) - (by - ay) * (p.tool_y - ax)).abs() <= 1e-12 * scale * scale
    });
    if collinear {
        return Err(Error::DegenerateLoop("all points collinear".into()));
    }
    Ok(())
}

/// Signed shoelace area of each cycle in the (tool_y, contact) plane;
/// positive means counterclockwise.
pub fn cycle_areas(lp: &EngagementLoop) -> Result<Vec<f64>> {
    let cycles = lp.cycles();
    if cycles.is_empty() {
        return Err(Error::DegenerateLoop("loop has no samples".into()));
    }
    cycles
        .into_iter()
        .map(|c| {
            check_nondegenerate(c)?;
            Ok(shoelace(c))
        })
        .collect()
}

/// Mean signed area per cycle of the loop.
pub fn loop_orientation(lp: &EngagementLoop) -> Result<f64> {
    let areas = cycle_areas(lp)?;
    Ok(areas.iter().sum::<f64>() / areas.len() as f64)
}

/// Tool height at which contact first exceeds `threshold` after the top of
/// the stroke, averaged over cycles. `None` if contact never exceeds it.
pub fn downstroke_onset_height(lp: &EngagementLoop, threshold: f64) -> Option<f64> {
    let mut heights = Vec::new();
    for cycle in lp.cycles() {
        let top = cycle
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.tool_y.total_cmp(&b.1.tool_y))
            .map(|(i, _)| i)?;
        let n = cycle.len();
        if let Some(s) = (0..n).map(|i| cycle[(top + i) % n]).find(|s| s.contact > threshold) {
            heights.push(s.tool_y);
        }
    }
    if heights.is_empty() {
        None
    } else {
        Some(heights.iter().sum::<f64>() / heights.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AmplitudeConvention;

    fn tool(relief_deg: f64, lr: f64) -> ToolGeometry {
        ToolGeometry::from_degrees(10.0, relief_deg, lr, 0.7874).unwrap()
    }

    fn flat(y: f64) -> SurfaceProfile {
        SurfaceProfile::new(-200.0, 0.05, vec![y; 8001]).unwrap()
    }

    #[test]
    fn flat_surface_submerged_length() {
        let c = contact_length(&tool(30.0, 100.0), &flat(0.0), (50.0, -2.0)).unwrap();
        assert!((c - 4.0).abs() < 1e-9, "{c}");
    }

    #[test]
    fn flat_surface_saturates() {
        let c = contact_length(&tool(30.0, 10.0), &flat(0.0), (50.0, -10.0)).unwrap();
        assert!((c - 10.0).abs() < 1e-9, "{c}");
    }

    #[test]
    fn tip_above_surface_has_no_contact() {
        let c = contact_length(&tool(30.0, 10.0), &flat(0.0), (50.0, 0.5)).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn tip_outside_surface_rejected() {
        let t = tool(30.0, 10.0);
        assert!(matches!(contact_length(&t, &flat(0.0), (-195.0, -1.0)), Err(Error::Domain(_))));
        assert!(matches!(contact_length(&t, &flat(0.0), (300.0, -1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn steady_cut_has_no_contact() {
        let k = Kinematics::from_wavelength(2680.0, 80.0, 0.0, AmplitudeConvention::Half, 1.0).unwrap();
        let lp = engagement_loop(&tool(6.0, 30.0), &k, LoopGrid { steps_per_wavelength: 400, cycles: 3 }).unwrap();
        assert_eq!(lp.samples().len(), 800);
        let bad: Vec<_> = lp.samples().iter().filter(|s| s.contact != 0.0).take(5).collect();
        assert!(bad.is_empty(), "{bad:?}");
        assert!(matches!(loop_orientation(&lp), Err(Error::DegenerateLoop(_))));
    }

    #[test]
    fn needs_two_cycles() {
        let k = Kinematics::from_wavelength(2680.0, 80.0, 3.0, AmplitudeConvention::Half, 1.0).unwrap();
        let g = LoopGrid { steps_per_wavelength: 400, cycles: 1 };
        assert!(engagement_loop(&tool(6.0, 30.0), &k, g).is_err());
    }

    #[test]
    fn clockwise_square_is_negative() {
        let pts = [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)];
        let samples = pts
            .iter()
            .enumerate()
            .map(|(i, &(y, c))| LoopSample { x: i as f64, tool_y: y, contact: c })
            .collect();
        let lp = EngagementLoop::new(samples, 100.0, tool(6.0, 10.0)).unwrap();
        assert!((loop_orientation(&lp).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points_is_degenerate() {
        let samples = vec![
            LoopSample { x: 0.0, tool_y: 0.0, contact: 0.0 },
            LoopSample { x: 1.0, tool_y: 1.0, contact: 1.0 },
            LoopSample { x: 2.0, tool_y: 0.0, contact: 0.0 },
        ];
        let lp = EngagementLoop::new(samples, 100.0, tool(6.0, 10.0)).unwrap();
        assert!(matches!(loop_orientation(&lp), Err(Error::DegenerateLoop(_))));
    }
}
