use std::fs::File;
use std::path::{Path, PathBuf};

use pdamp_core::engagement::{engagement_loop, loop_orientation, EngagementLoop};
use pdamp_core::fit::{fit_linear, fit_sinusoid, phase_lead};
use pdamp_core::forces::{crushing_force, force_loop, force_traces, max_force_vs_wavelength};
use pdamp_core::io::{
    read_columns, read_forces, read_rows_json, write_fit_json, write_trends, write_trends_json, FitRecord, SummaryRow,
    TrendRecord, FORCE_LOOP_HEADER, LOOP_HEADER, SERIES_WITH_CHIP_HEADER, SUMMARY_HEADER,
    SURFACE_HEADER,
};
use pdamp_core::model::{Trace, Unit};
use pdamp_core::shearplane::{chip_thickness_series, shear_length_series};
use pdamp_core::surface::{machined_surface, tip_path_trace};
use pdamp_core::Error;
use rayon::prelude::*;

use crate::config::{config_if_domain, RunConfig};
use crate::output::{Format, Sink};

/// A failed command: process exit code plus message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: exit_code(&e), message: e.to_string() }
    }
}

/// 2 for configuration and file problems, 3 for unparsable input, 4 for
/// numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) => 2,
        Error::Parse { .. } => 3,
        _ => 4,
    }
}

pub type CmdResult = std::result::Result<(), Failure>;

pub struct Context {
    pub config: RunConfig,
    pub sink: Sink,
    pub workers: usize,
}

pub fn simulate(ctx: &Context) -> CmdResult {
    let tool = ctx.config.tool()?;
    let kin = ctx.config.kinematics()?;
    let lambda = kin.wavelength();
    let dx = ctx.config.grid.dx_mils.unwrap_or(lambda / 1000.0);
    let extent = ctx.config.grid.extent_mils.unwrap_or(5.0 * lambda);
    let surface = machined_surface(&tool, &kin, extent, dx).map_err(config_if_domain)?;
    let path = tip_path_trace(&kin, &surface)?;
    let s = ctx.sink.table(
        "surface",
        &SURFACE_HEADER,
        surface.xs().zip(surface.heights()).map(|(x, &y)| [x, y]),
    )?;
    let t = ctx.sink.table("tip_path", &["x", "tool_y"], path.points().map(|(x, y)| [x, y]))?;
    let lowest = surface.heights().iter().copied().fold(f64::INFINITY, f64::min);
    println!("wavelength {lambda} mils, {} columns, lowest surface point {lowest:.4}", surface.len());
    println!("wrote {} and {}", s.display(), t.display());
    Ok(())
}

pub fn contact_loop(ctx: &Context) -> CmdResult {
    let tool = ctx.config.tool()?;
    let kin = ctx.config.kinematics()?;
    let lp = engagement_loop(&tool, &kin, ctx.config.loop_grid()).map_err(config_if_domain)?;
    let path = write_loop(&ctx.sink, "loop", &lp)?;
    print!("wavelength {} mils, max contact {:.4} mils", kin.wavelength(), lp.max_contact());
    match loop_orientation(&lp) {
        Ok(area) => println!(", mean loop area {area:.4}"),
        Err(e) => println!(", {e}"),
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn write_loop(sink: &Sink, stem: &str, lp: &EngagementLoop) -> pdamp_core::Result<PathBuf> {
    sink.table(
        stem,
        &LOOP_HEADER,
        lp.samples().iter().map(|s| [s.x, s.tool_y, s.contact]),
    )
}

pub fn sweep(ctx: &Context, wavelengths: &[f64], relief_lengths: &[f64]) -> CmdResult {
    if wavelengths.is_empty() {
        return Err(Failure::usage("sweep needs at least one wavelength"));
    }
    if relief_lengths.is_empty() {
        return Err(Failure::usage("sweep needs at least one relief length"));
    }
    let base_tool = ctx.config.tool()?;
    let grid = ctx.config.loop_grid();
    let cells: Vec<(f64, f64)> = relief_lengths
        .iter()
        .flat_map(|&lr| wavelengths.iter().map(move |&w| (lr, w)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.workers)
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let results: Vec<pdamp_core::Result<EngagementLoop>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(lr, w)| {
                let tool = base_tool.with_relief_length(lr)?;
                let kin = ctx.config.kinematics_at(w)?;
                engagement_loop(&tool, &kin, grid)
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut first_failure: Option<Error> = None;
    let mut failed = 0;
    for (&(lr, w), res) in cells.iter().zip(results) {
        match res {
            Ok(lp) => {
                write_loop(&ctx.sink, &format!("loop_lr{lr}_wl{w}"), &lp)?;
                rows.push(SummaryRow { wavelength: w, relief_length: lr, max_contact: lp.max_contact() });
            }
            Err(e) => {
                eprintln!("cell relief_length={lr} wavelength={w} failed: {e}");
                failed += 1;
                first_failure.get_or_insert(e);
            }
        }
    }
    ctx.sink.table(
        "summary",
        &SUMMARY_HEADER,
        rows.iter().map(|r| [r.wavelength, r.relief_length, r.max_contact]),
    )?;

    let mut trends = Vec::new();
    for &lr in relief_lengths {
        let maxima: Vec<(f64, [f64; 1])> = rows
            .iter()
            .filter(|r| r.relief_length == lr)
            .map(|r| (r.wavelength, [r.max_contact]))
            .collect();
        let Ok(m) = max_force_vs_wavelength(&maxima) else {
            continue;
        };
        let values: Vec<String> = m.entries.iter().map(|(w, v)| format!("{w}:{v:.4}")).collect();
        println!("relief length {lr}: {} [{}]", m.trend, values.join(", "));
        trends.push(TrendRecord { relief_length: lr, trend: m.trend });
    }
    match ctx.sink.format() {
        Format::Csv => ctx.sink.file("trends.csv", |w| write_trends(w, &trends))?,
        Format::Json => ctx.sink.file("trends.json", |w| write_trends_json(w, &trends))?,
    };
    println!("{} of {} cells completed", cells.len() - failed, cells.len());
    match first_failure {
        None => Ok(()),
        Some(e) => Err(Failure {
            code: exit_code(&e),
            message: format!("{failed} sweep cell(s) failed; first: {e}"),
        }),
    }
}

pub fn shearplane(ctx: &Context, phis: Option<&[f64]>) -> CmdResult {
    let (surf, section) = ctx.config.wavy_surface()?;
    let phis = phis.unwrap_or(&section.phi_rad);
    if phis.is_empty() {
        return Err(Failure::usage("no shear angles given (`shearplane.phi_rad` or --phi)"));
    }
    let n = section.samples;
    let lambda = surf.wavelength();
    let chip = chip_thickness_series(&surf, n)?;
    let chip_fit = if surf.amplitude() > 0.0 { Some(fit_sinusoid(&chip, lambda)?) } else { None };
    let mut summary = Vec::new();
    for &phi in phis {
        let series = shear_length_series(&surf, phi, n).map_err(config_if_domain)?;
        ctx.sink.table(
            &format!("shear_phi{phi}"),
            &SERIES_WITH_CHIP_HEADER,
            series.points().zip(chip.values()).map(|((x, l), &c)| [x, l, c]),
        )?;
        let (lo, hi) = series
            .values()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let roots = if surf.has_multiple_roots(phi) { 1.0 } else { 0.0 };
        let lead = match &chip_fit {
            Some(cf) => Some(phase_lead(&fit_sinusoid(&series, lambda)?, cf)?),
            None => None,
        };
        match lead {
            Some(l) => println!("phi {phi}: length {lo:.4}..{hi:.4}, lead over chip thickness {l:.4} rad"),
            None => println!("phi {phi}: length {lo:.4}..{hi:.4}"),
        }
        let mut row = vec![phi, lo, hi, roots];
        row.extend(lead);
        summary.push(row);
    }
    if chip_fit.is_some() {
        ctx.sink.table(
            "shearplane_summary",
            &["phi", "min_length", "max_length", "multiple_roots", "phase_lead"],
            &summary,
        )?;
    } else {
        ctx.sink.table("shearplane_summary", &["phi", "min_length", "max_length", "multiple_roots"], &summary)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FitMode {
    Sinusoid,
    Linear,
}

pub struct FitArgs<'a> {
    pub input: &'a Path,
    pub mode: FitMode,
    pub wavelength: Option<f64>,
    pub x_column: &'a str,
    pub y_column: &'a str,
}

pub fn fit(ctx: &Context, args: &FitArgs) -> CmdResult {
    let names = [args.x_column, args.y_column];
    let file = open(args.input)?;
    let cols = if args.input.extension().is_some_and(|e| e == "json") {
        read_rows_json(file, &names)?
    } else {
        read_columns(file, &names)?
    };
    let (xs, ys) = (&cols[0], &cols[1]);
    let record = match args.mode {
        FitMode::Linear => {
            let f = fit_linear(xs, ys)?;
            println!("{}  error {:.2}", f.equation(), f.rms_error);
            FitRecord::from(&f)
        }
        FitMode::Sinusoid => {
            let lambda = args
                .wavelength
                .ok_or_else(|| Failure::usage("sinusoid fits need --wavelength"))?;
            let trace = Trace::new(xs.clone(), ys.clone(), Unit::Dimensionless)?;
            let f = fit_sinusoid(&trace, lambda)?;
            println!(
                "Y = {:.3} + {:.3} * cos(2πX/{lambda}) + {:.3} * sin(2πX/{lambda})  error {:.2}",
                f.a0, f.a1, f.a2, f.rms_residual
            );
            FitRecord::from(&f)
        }
    };
    let path = ctx.sink.file("fit.json", |w| write_fit_json(w, &record))?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn crush_extract(ctx: &Context, crush: Option<&Path>, nocrush: Option<&Path>) -> CmdResult {
    let pick = |arg: Option<&Path>, cfg: &Option<PathBuf>, key: &str| {
        arg.map(Path::to_path_buf)
            .or_else(|| cfg.clone())
            .ok_or_else(|| Failure::usage(format!("no {key} file (--{key} or `io.{key}_csv`)")))
    };
    let crush = pick(crush, &ctx.config.io.crush_csv, "crush")?;
    let nocrush = pick(nocrush, &ctx.config.io.nocrush_csv, "nocrush")?;
    let kin = ctx.config.kinematics()?;
    let thrust = |path: &Path| -> std::result::Result<Trace, Failure> {
        let samples = read_forces(open(path)?).map_err(|e| in_file(path, e))?;
        let (_, fy) = force_traces(&samples).map_err(|e| in_file(path, e))?;
        Ok(fy)
    };
    let force = crushing_force(&thrust(&crush)?, &thrust(&nocrush)?)?;
    let t = ctx.sink.table("crushing", &["x", "force"], force.points().map(|(x, f)| [x, f]))?;
    let lp = force_loop(&force, &kin);
    let l = ctx.sink.table("crush_loop", &FORCE_LOOP_HEADER, lp.iter().map(|s| [s.x, s.tool_y, s.force]))?;
    let peak = force.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("{} shared samples, peak crushing force {peak:.4}", force.len());
    println!("wrote {} and {}", t.display(), l.display());
    Ok(())
}

fn open(path: &Path) -> std::result::Result<File, Failure> {
    File::open(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, e: Error) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}
