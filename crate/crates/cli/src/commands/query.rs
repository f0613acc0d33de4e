//! `hfslab predict`, `classify` and `mg-offset`: level-table queries.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use hfslab_core::{
    air_to_vacuum, classify, mg_offset_mhz, predict, LevelDatabase, MG_REFERENCES,
};
use serde::Serialize;

use crate::commands::write_json;
use crate::error::{CmdError, CmdResult};
use crate::manifest::{RunContext, RunManifest};

fn load_db(path: &Path) -> CmdResult<LevelDatabase> {
    LevelDatabase::load(path)
        .map_err(|e| CmdError::Validation(format!("level table '{}': {e}", path.display())))
}

/// Predict observable lines in a wavelength window and write them as
/// `predictions.json`, strongest expected excitation first.
///
/// Candidates are all dipole-allowed level pairs whose Ritz wavelength
/// (vacuum, from the energy difference) falls inside the window, ranked by
/// the thermal population of the lower level. An empty result is not an
/// error.
#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Level table (TSV: energy_cm1, parity, twoJ, A_MHz, B_MHz, label).
    pub database: PathBuf,
    /// Window lower edge, vacuum nm.
    #[arg(long)]
    pub min_nm: f64,
    /// Window upper edge, vacuum nm.
    #[arg(long)]
    pub max_nm: f64,
    /// Boltzmann ranking temperature, K (default 2000).
    #[arg(long)]
    pub temperature_k: Option<f64>,
}

pub fn run_predict(ctx: &RunContext, args: &PredictArgs) -> CmdResult<()> {
    let db = load_db(&args.database)?;
    let lines = predict(&db, (args.min_nm, args.max_nm), args.temperature_k)?;
    let out = ctx.out_file("predictions.json");
    write_json(&out, &lines)?;
    println!(
        "{} predicted line{} in {}..{} nm -> {}",
        lines.len(),
        if lines.len() == 1 { "" } else { "s" },
        args.min_nm,
        args.max_nm,
        out.display()
    );
    for line in lines.iter().take(5) {
        println!(
            "  {:.4} nm vac  {} -> {}  (weight {:.3e})",
            line.vacuum_wavelength_nm, line.lower.label, line.upper.label, line.boltzmann_weight
        );
    }

    let mut manifest = RunManifest::new("predict");
    manifest.set("min_nm", args.min_nm);
    manifest.set("max_nm", args.max_nm);
    if let Some(t) = args.temperature_k {
        manifest.set("temperature_k", t);
    }
    manifest.input(&args.database);
    manifest.output(&out);
    ctx.write_manifest(&manifest)?;
    Ok(())
}

/// Which medium a measured wavelength is quoted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Medium {
    Vacuum,
    Air,
}

/// Identify a measured line against the level table and write candidate
/// assignments as `classifications.json`, best match first.
#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Level table (TSV: energy_cm1, parity, twoJ, A_MHz, B_MHz, label).
    pub database: PathBuf,
    /// Measured wavelength, nm.
    #[arg(long)]
    pub wavelength_nm: f64,
    /// Medium the wavelength is quoted in.
    #[arg(long, value_enum, default_value_t = Medium::Vacuum)]
    pub medium: Medium,
    /// Match tolerance, nm (about the wavemeter accuracy).
    #[arg(long, default_value_t = 0.01)]
    pub tolerance_nm: f64,
}

pub fn run_classify(ctx: &RunContext, args: &ClassifyArgs) -> CmdResult<()> {
    let db = load_db(&args.database)?;
    let vacuum_nm = match args.medium {
        Medium::Vacuum => args.wavelength_nm,
        Medium::Air => air_to_vacuum(args.wavelength_nm)?,
    };
    let matches = classify(&db, vacuum_nm, args.tolerance_nm)?;
    let out = ctx.out_file("classifications.json");
    write_json(&out, &matches)?;
    println!(
        "{} candidate{} for {} nm ({:?}) within {} nm -> {}",
        matches.len(),
        if matches.len() == 1 { "" } else { "s" },
        args.wavelength_nm,
        args.medium,
        args.tolerance_nm,
        out.display()
    );
    for m in matches.iter().take(5) {
        println!(
            "  {} -> {}  Ritz {:.4} nm vac, off by {:.4} nm",
            m.line.lower.label, m.line.upper.label, m.line.vacuum_wavelength_nm, m.deviation_nm
        );
    }

    let mut manifest = RunManifest::new("classify");
    manifest.set("wavelength_nm", args.wavelength_nm);
    manifest.set("medium", format!("{:?}", args.medium).to_lowercase());
    manifest.set("tolerance_nm", args.tolerance_nm);
    manifest.set("vacuum_nm", vacuum_nm);
    manifest.input(&args.database);
    manifest.output(&out);
    ctx.write_manifest(&manifest)?;
    Ok(())
}

/// One row of `offsets.json`.
#[derive(Debug, Serialize)]
struct OffsetRow {
    isotope: u32,
    /// The reference: 4th sub-harmonic of the isotope's resonance line,
    /// vacuum nm.
    fourth_subharmonic_nm: f64,
    /// Signed frequency offset of the queried line from that reference,
    /// MHz.
    offset_mhz: f64,
}

/// Frequency offsets of a line from the Mg+ sub-harmonic references,
/// written as `offsets.json`.
///
/// Useful when transferring an absolute calibration: the references are
/// the 4th sub-harmonics (near 1118.5 nm) of the Mg+ resonance lines of
/// the three stable isotopes.
#[derive(Debug, Args)]
pub struct MgOffsetArgs {
    /// Line wavelength, vacuum nm.
    #[arg(long)]
    pub wavelength_nm: f64,
    /// Restrict to one isotope (24, 25 or 26; default all three).
    #[arg(long)]
    pub isotope: Option<u32>,
}

pub fn run_mg_offset(ctx: &RunContext, args: &MgOffsetArgs) -> CmdResult<()> {
    if let Some(iso) = args.isotope {
        if hfslab_core::mg_reference(iso).is_none() {
            return Err(CmdError::Validation(format!(
                "no Mg+ reference for isotope {iso} (have 24, 25, 26)"
            )));
        }
    }
    let rows: Vec<OffsetRow> = MG_REFERENCES
        .iter()
        .filter(|r| args.isotope.is_none_or(|iso| r.isotope == iso))
        .map(|r| OffsetRow {
            isotope: r.isotope,
            fourth_subharmonic_nm: r.fourth_subharmonic_nm,
            offset_mhz: mg_offset_mhz(args.wavelength_nm, r),
        })
        .collect();
    let out = ctx.out_file("offsets.json");
    write_json(&out, &rows)?;
    println!("offsets of {} nm vac -> {}", args.wavelength_nm, out.display());
    for row in &rows {
        println!(
            "  {}Mg+ 4th sub-harmonic {:.4} nm: {:+.1} MHz",
            row.isotope, row.fourth_subharmonic_nm, row.offset_mhz
        );
    }

    let mut manifest = RunManifest::new("mg-offset");
    manifest.set("wavelength_nm", args.wavelength_nm);
    if let Some(iso) = args.isotope {
        manifest.set("isotope", iso);
    }
    manifest.output(&out);
    ctx.write_manifest(&manifest)?;
    Ok(())
}
