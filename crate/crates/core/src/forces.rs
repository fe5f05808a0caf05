//! Merchant force decomposition, crushing-force extraction and the
//! wavelength summaries of crushing loops.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{Kinematics, Trace};
use crate::surface::tool_tip_path;

/// Cutting (`fx`) and thrust (`fy`) force at cut position `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub x: f64,
    pub fx: f64,
    pub fy: f64,
}

impl ForceSample {
    pub fn new(x: f64, fx: f64, fy: f64) -> Result<Self> {
        if !(x.is_finite() && fx.is_finite() && fy.is_finite()) {
            return domain("force sample must be finite");
        }
        Ok(Self { x, fx, fy })
    }
}

/// Splits force samples into cutting and thrust traces.
pub fn force_traces(samples: &[ForceSample]) -> Result<(Trace, Trace)> {
    let xs: Vec<f64> = samples.iter().map(|s| s.x).collect();
    let fx = Trace::new(xs.clone(), samples.iter().map(|s| s.fx).collect(), crate::model::Unit::Lbf)?;
    let fy = Trace::new(xs, samples.iter().map(|s| s.fy).collect(), crate::model::Unit::Lbf)?;
    Ok((fx, fy))
}

/// Shear stress, cutting width and shear angle for the Merchant prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MerchantInputs {
    tau: f64,
    width: f64,
    phi: f64,
}

impl MerchantInputs {
    pub fn new(tau: f64, width: f64, phi: f64) -> Result<Self> {
        if !(tau > 0.0 && width > 0.0) {
            return domain("shear stress and width must be positive");
        }
        if !(phi > 0.0 && phi < std::f64::consts::FRAC_PI_2) {
            return domain(format!("shear angle must lie in (0, π/2), got {phi}"));
        }
        Ok(Self { tau, width, phi })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Magnitude ‖R‖ and direction ψ = arctan(fy/fx) of the force resultant.
pub fn resultant(fx: f64, fy: f64) -> Result<(f64, f64)> {
    if fx == 0.0 && fy == 0.0 {
        return domain("resultant of a zero force is undefined");
    }
    Ok((fx.hypot(fy), fy.atan2(fx)))
}

/// Force along the shear plane, ‖R‖·cos(φ + ψ).
pub fn shear_force(fx: f64, fy: f64, phi: f64) -> Result<f64> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&phi) {
        return domain(format!("shear angle must lie in [0, π/2), got {phi}"));
    }
    let (r, psi) = resultant(fx, fy)?;
    Ok(r * (phi + psi).cos())
}

/// Merchant shear force τ·w·l for a shear plane of length `l`.
pub fn merchant_predict(inp: &MerchantInputs, l: f64) -> Result<f64> {
    if !(l >= 0.0) {
        return domain(format!("shear-plane length must be non-negative, got {l}"));
    }
    Ok(inp.tau * inp.width * l)
}

/// Crushing force: `crush − nocrush` at the crush trace's abscissae that fall
/// inside the nocrush range, the nocrush trace linearly interpolated.
pub fn crushing_force(crush: &Trace, nocrush: &Trace) -> Result<Trace> {
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    for (x, v) in crush.points() {
        if let Some(base) = nocrush.interpolate(x) {
            xs.push(x);
            vals.push(v - base);
        }
    }
    if xs.len() < 2 {
        let (a0, a1) = crush.x_range();
        let (b0, b1) = nocrush.x_range();
        return Err(Error::Alignment(format!(
            "traces [{a0}, {a1}] and [{b0}, {b1}] share fewer than two abscissae"
        )));
    }
    Trace::new(xs, vals, crush.unit())
}

/// One point of a force-vs-tool-height loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceLoopSample {
    pub x: f64,
    pub tool_y: f64,
    pub force: f64,
}

/// Pairs each sample of `force` with the tool height at that position.
pub fn force_loop(force: &Trace, kin: &Kinematics) -> Vec<ForceLoopSample> {
    force
        .points()
        .map(|(x, f)| ForceLoopSample {
            x,
            tool_y: tool_tip_path(kin, x),
            force: f,
        })
        .collect()
}

/// Trend of a per-wavelength maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Indeterminate,
}

impl std::fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Increasing => "increasing",
            Self::Decreasing => "decreasing",
            Self::Indeterminate => "indeterminate",
        })
    }
}

/// Classifies a sequence by the signs of its successive differences.
/// Differences no larger than `tolerance` in magnitude count as zero, and a
/// zero difference makes the sequence indeterminate.
pub fn classify(values: &[f64], tolerance: f64) -> Monotonicity {
    let mut up = true;
    let mut down = true;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        up &= d > tolerance;
        down &= d < -tolerance;
    }
    match (values.len() >= 2, up, down) {
        (true, true, false) => Monotonicity::Increasing,
        (true, false, true) => Monotonicity::Decreasing,
        _ => Monotonicity::Indeterminate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavelengthMaxima {
    /// `(wavelength, max ordinate)`, sorted by wavelength.
    pub entries: Vec<(f64, f64)>,
    pub trend: Monotonicity,
}

/// Relative tolerance on successive maxima treated as equal.
pub const TREND_TOLERANCE: f64 = 1e-6;

/// Maximum loop ordinate per wavelength with its trend.
pub fn max_force_vs_wavelength<L: AsRef<[f64]>>(loops: &[(f64, L)]) -> Result<WavelengthMaxima> {
    if loops.len() < 2 {
        return domain("need at least two wavelengths");
    }
    let mut entries = loops
        .iter()
        .map(|(lam, ord)| {
            let ord = ord.as_ref();
            if ord.is_empty() {
                return domain(format!("loop for wavelength {lam} is empty"));
            }
            Ok((*lam, ord.iter().copied().fold(f64::NEG_INFINITY, f64::max)))
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let maxima: Vec<f64> = entries.iter().map(|e| e.1).collect();
    let scale = maxima.iter().map(|m| m.abs()).fold(0.0, f64::max);
    let trend = classify(&maxima, TREND_TOLERANCE * scale);
    Ok(WavelengthMaxima { entries, trend })
}
