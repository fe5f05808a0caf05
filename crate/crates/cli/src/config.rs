//! Run configuration.
//!
//! The file is TOML written as flat dotted keys:
//!
//! ```toml
//! tool.relief_angle_deg = 6
//! tool.relief_length_mils = 100
//! kinematics.speed_sfm = 2680
//! kinematics.frequency_khz = 6.7
//! kinematics.amplitude_mils = 3
//! kinematics.amplitude_convention = "half"
//! kinematics.feed_mils = 6
//! ```
//!
//! Angles are degrees here and radians everywhere past this module, except
//! for the `_rad` keys which are already radians.

use std::path::{Path, PathBuf};

use pdamp_core::engagement::LoopGrid;
use pdamp_core::model::{AmplitudeConvention, Kinematics, ToolGeometry};
use pdamp_core::shearplane::WavySurfaceSpec;
use pdamp_core::surface::DEFAULT_STEPS_PER_WAVELENGTH;
use pdamp_core::{Error, Result};
use serde::Deserialize;

use crate::output::Format;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tool: Option<ToolSection>,
    pub kinematics: Option<KinematicsSection>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub sweep: SweepSection,
    pub shearplane: Option<ShearplaneSection>,
    #[serde(default)]
    pub io: IoSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolSection {
    #[serde(default)]
    pub rake_angle_deg: f64,
    pub relief_angle_deg: f64,
    pub relief_length_mils: f64,
    #[serde(default)]
    pub edge_radius_mils: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinematicsSection {
    pub speed_sfm: f64,
    pub frequency_khz: Option<f64>,
    pub wavelength_mils: Option<f64>,
    #[serde(default)]
    pub amplitude_mils: f64,
    pub amplitude_convention: Option<AmplitudeConvention>,
    pub feed_mils: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Surface grid spacing for `simulate`; defaults to λ/1000.
    pub dx_mils: Option<f64>,
    /// Simulated workpiece length for `simulate`; defaults to 5λ.
    pub extent_mils: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps_per_wavelength: usize,
    #[serde(default = "default_cycles")]
    pub cycles: usize,
}

fn default_steps() -> usize {
    DEFAULT_STEPS_PER_WAVELENGTH
}

fn default_cycles() -> usize {
    4
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            dx_mils: None,
            extent_mils: None,
            steps_per_wavelength: default_steps(),
            cycles: default_cycles(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub wavelengths_mils: Vec<f64>,
    #[serde(default)]
    pub relief_lengths_mils: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearplaneSection {
    pub mean_depth_mils: f64,
    #[serde(default)]
    pub amplitude_mils: f64,
    pub wavelength_mils: f64,
    #[serde(default)]
    pub phase_rad: f64,
    pub phi_rad: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    256
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub crush_csv: Option<PathBuf>,
    pub nocrush_csv: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.io.out_dir, &mut cfg.io.crush_csv, &mut cfg.io.nocrush_csv]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn tool(&self) -> Result<ToolGeometry> {
        let t = self
            .tool
            .as_ref()
            .ok_or_else(|| Error::Config("missing `tool.*` keys".into()))?;
        ToolGeometry::from_degrees(
            t.rake_angle_deg,
            t.relief_angle_deg,
            t.relief_length_mils,
            t.edge_radius_mils,
        )
        .map_err(config_if_domain)
    }

    fn kinematics_section(&self) -> Result<&KinematicsSection> {
        self.kinematics
            .as_ref()
            .ok_or_else(|| Error::Config("missing `kinematics.*` keys".into()))
    }

    fn convention(k: &KinematicsSection) -> Result<AmplitudeConvention> {
        match k.amplitude_convention {
            Some(c) => Ok(c),
            None if k.amplitude_mils == 0.0 => Ok(AmplitudeConvention::Half),
            None => Err(Error::Config(
                "`kinematics.amplitude_convention` must be \"half\" or \"peak-to-valley\" when the amplitude is nonzero".into(),
            )),
        }
    }

    /// Kinematics as configured. Exactly one of `frequency_khz` and
    /// `wavelength_mils` must be given.
    pub fn kinematics(&self) -> Result<Kinematics> {
        let k = self.kinematics_section()?;
        match (k.frequency_khz, k.wavelength_mils) {
            (Some(f), None) => Kinematics::new(
                k.speed_sfm,
                f,
                k.amplitude_mils,
                Self::convention(k)?,
                k.feed_mils,
            )
            .and_then(|kin| kin.with_start_phase(k.phase_rad))
            .map_err(config_if_domain),
            (None, Some(w)) => self.kinematics_at(w),
            _ => Err(Error::Config(
                "give exactly one of `kinematics.frequency_khz` and `kinematics.wavelength_mils`".into(),
            )),
        }
    }

    /// Configured kinematics with the frequency replaced to hit `wavelength`.
    pub fn kinematics_at(&self, wavelength: f64) -> Result<Kinematics> {
        let k = self.kinematics_section()?;
        Kinematics::from_wavelength(
            k.speed_sfm,
            wavelength,
            k.amplitude_mils,
            Self::convention(k)?,
            k.feed_mils,
        )
        .and_then(|kin| kin.with_start_phase(k.phase_rad))
        .map_err(config_if_domain)
    }

    pub fn loop_grid(&self) -> LoopGrid {
        LoopGrid {
            steps_per_wavelength: self.grid.steps_per_wavelength,
            cycles: self.grid.cycles,
        }
    }

    pub fn wavy_surface(&self) -> Result<(WavySurfaceSpec, &ShearplaneSection)> {
        let s = self
            .shearplane
            .as_ref()
            .ok_or_else(|| Error::Config("missing `shearplane.*` keys".into()))?;
        let surf = WavySurfaceSpec::new(s.mean_depth_mils, s.amplitude_mils, s.wavelength_mils, s.phase_rad)
            .map_err(config_if_domain)?;
        Ok((surf, s))
    }
}

/// Invalid values read from the config are configuration errors.
pub(crate) fn config_if_domain(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}
