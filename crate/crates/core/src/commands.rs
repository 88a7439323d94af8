//! Command implementations shared by the CLI and the integration tests.
//!
//! Each command reads a validated [`RunConfig`], writes its tables into the
//! configured output directory and returns the computed data with a short
//! human-readable summary.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::analysis::{self, CouplingReport};
use crate::config::RunConfig;
use crate::emitter_modes::{CouplingSource, EmitterConfig};
use crate::error::{Error, Result};
use crate::output::OutputSink;
use crate::photon_grid::PhotonModeSet;
use crate::planar::{self, SweepPoint};
use crate::polariton::{HopfieldMatrix, PolaritonSolution, Spectrum};
use crate::quadrature::Tolerance;
use crate::spherical::{self, ResonancePeak, SamplingDensity, SphericalCavity};
use crate::units;

fn sink(config: &RunConfig, command: &str, timestamp: bool) -> OutputSink {
    let mut sink = OutputSink::new(&config.output.directory, command, timestamp);
    sink.extend_metadata(config.describe());
    sink
}

fn peak_rows(peaks: &[ResonancePeak]) -> Vec<Vec<f64>> {
    peaks
        .iter()
        .map(|p| {
            vec![
                units::to_ev(p.center),
                1e3 * units::to_ev(p.fwhm),
                p.peak_purcell,
                p.integrated_weight,
            ]
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ModesOutcome {
    pub radius: f64,
    pub peaks: Vec<ResonancePeak>,
    pub modes: usize,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Mode structure of a spherical cavity and its discretised photon modes.
pub fn cmd_modes(config: &RunConfig, timestamp: bool) -> Result<ModesOutcome> {
    let cavity = config.sphere()?;
    let window = config.window()?;
    let density = config.density()?;
    let mut out = sink(config, "modes", timestamp);
    out.push_metadata(
        "resolved_radius_nm",
        format!("{}", units::to_nm(cavity.inner_radius())),
    );

    let scan = cavity.scan(window, density)?;
    let rows: Vec<Vec<f64>> = scan.rows().iter().map(|r| r.to_vec()).collect();
    out.table("modes.csv", &["omega_ev", "purcell", "lambda_au"], &rows)?;

    let peaks = cavity.find_resonances(window, density)?;
    out.table(
        "peaks.csv",
        &[
            "center_ev",
            "fwhm_mev",
            "peak_purcell",
            "integrated_weight_au",
        ],
        &peak_rows(&peaks),
    )?;

    let modes = PhotonModeSet::discretize(&cavity, &EmitterConfig::cartesian(), window, density)?;
    let mode_rows: Vec<Vec<f64>> = modes.rows().iter().map(|r| r.to_vec()).collect();
    out.table_with(
        "modeset.csv",
        &[
            (
                "mode_spacing_mev".into(),
                format!("{}", 1e3 * units::to_ev(modes.spacing())),
            ),
            (
                "modes_per_point".into(),
                modes.modes_per_point().to_string(),
            ),
        ],
        &["omega_ev", "lambda_x", "lambda_y", "lambda_z"],
        &mode_rows,
    )?;
    out.gnuplot(
        "modes.gp",
        "modes.csv",
        "photon energy (eV)",
        &[(2, "Purcell factor")],
        true,
    )?;

    let mut summary = format!(
        "R = {:.4} nm, {} grid points, {} resonances\n",
        units::to_nm(cavity.inner_radius()),
        scan.omega.len(),
        peaks.len()
    );
    for p in &peaks {
        let _ = writeln!(
            summary,
            "  peak {:.4} eV  fwhm {:.2} meV  purcell {:.1}  weight {:.4e}",
            units::to_ev(p.center),
            1e3 * units::to_ev(p.fwhm),
            p.peak_purcell,
            p.integrated_weight
        );
    }
    Ok(ModesOutcome {
        radius: cavity.inner_radius(),
        peaks,
        modes: modes.len(),
        files: out.written().to_vec(),
        summary,
    })
}

#[derive(Debug, Clone)]
pub struct SpectrumOutcome {
    pub solution: PolaritonSolution,
    pub spectrum: Spectrum,
    pub rabi_splitting: Option<f64>,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Polariton excitations and the binned absorption spectrum.
pub fn cmd_spectrum(config: &RunConfig, timestamp: bool) -> Result<SpectrumOutcome> {
    let window = config.window()?;
    let density = config.density()?;
    let matter = config.matter_system()?;
    let mut out = sink(config, "spectrum", timestamp);

    let photons = match &config.geometry {
        crate::config::Geometry::Spherical(_) => {
            let cavity = config.sphere()?;
            out.push_metadata(
                "resolved_radius_nm",
                format!("{}", units::to_nm(cavity.inner_radius())),
            );
            discretize(&cavity, window, density)?
        }
        crate::config::Geometry::Planar(p) => discretize(&p.cavity()?, window, density)?,
    };
    let bin = units::ev(1e-3 * config.analysis.bin_width_mev);
    out.push_metadata("photon_modes", photons.len().to_string());
    out.push_metadata(
        "mode_spacing_mev",
        format!("{}", 1e3 * units::to_ev(photons.spacing())),
    );

    let solution = HopfieldMatrix::build(&matter, &photons)?.solve()?;
    let spectrum = solution.strength_function(window, bin)?;
    let rabi = analysis::extract_rabi_splitting_with(&spectrum, config.analysis.prominence);

    let rows: Vec<Vec<f64>> = solution.rows().iter().map(|r| r.to_vec()).collect();
    out.table(
        "excitations.csv",
        &["omega_ev", "oscillator_strength", "photonic_fraction"],
        &rows,
    )?;
    let bare = matter.total_oscillator_strength();
    let spec_rows: Vec<Vec<f64>> = spectrum.rows().iter().map(|r| r.to_vec()).collect();
    let rabi_text = match rabi {
        Some(r) => format!("{}", 1e3 * units::to_ev(r)),
        None => "none".into(),
    };
    out.table_with(
        "spectrum.csv",
        &[
            ("bare_oscillator_strength".into(), format!("{bare}")),
            (
                "strength_outside_window".into(),
                format!("{}", spectrum.outside),
            ),
            ("rabi_splitting_mev".into(), rabi_text.clone()),
        ],
        &["bin_center_ev", "strength"],
        &spec_rows,
    )?;
    out.gnuplot(
        "spectrum.gp",
        "spectrum.csv",
        "photon energy (eV)",
        &[(2, "oscillator strength")],
        false,
    )?;

    let summary = format!(
        "{} excitations from {} transitions and {} photon modes\nsum of oscillator strengths {:.10} (bare {:.10})\nRabi splitting: {}\n",
        solution.excitations().len(),
        matter.len(),
        photons.len(),
        solution.total_oscillator_strength(),
        bare,
        match rabi {
            Some(r) => format!("{:.3} meV", 1e3 * units::to_ev(r)),
            None => "none (fewer than two resolved peaks)".into(),
        },
    );
    Ok(SpectrumOutcome {
        solution,
        spectrum,
        rabi_splitting: rabi,
        files: out.written().to_vec(),
        summary,
    })
}

fn discretize(
    source: &dyn CouplingSource,
    window: (f64, f64),
    density: SamplingDensity,
) -> Result<PhotonModeSet> {
    PhotonModeSet::discretize(source, &EmitterConfig::cartesian(), window, density)
}

#[derive(Debug, Clone)]
pub struct PlanarOutcome {
    pub points: Vec<SweepPoint>,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Purcell factors of a symmetric planar cavity over a spacing sweep.
pub fn cmd_purcell_planar(config: &RunConfig, timestamp: bool) -> Result<PlanarOutcome> {
    let section = config.planar()?;
    let (top, bottom) = section.mirror_specs()?;
    if top != bottom {
        return Err(Error::Config(
            "geometry.planar: a spacing sweep needs identical top and bottom mirrors".into(),
        ));
    }
    let energy = section
        .energy_ev
        .ok_or_else(|| Error::Config("geometry.planar.energy_ev: required for a sweep".into()))?;
    let grid = section.sweep_points()?;
    let mirror = top.model()?;
    let tol = Tolerance::relative(1e-6);
    let points = planar::sweep_spacing(&mirror, units::ev(energy), &grid, tol)?;

    let mut out = sink(config, "purcell-planar", timestamp);
    out.push_metadata("quadrature_relative_tolerance", format!("{}", tol.relative));
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            vec![
                p.d_over_lambda,
                p.purcell.horizontal,
                p.purcell.vertical,
                p.purcell.horizontal_error,
                p.purcell.vertical_error,
            ]
        })
        .collect();
    out.table(
        "purcell_planar.csv",
        &[
            "d_over_lambda0",
            "horizontal",
            "vertical",
            "horizontal_error",
            "vertical_error",
        ],
        &rows,
    )?;
    out.gnuplot(
        "purcell_planar.gp",
        "purcell_planar.csv",
        "d / lambda0",
        &[(2, "horizontal"), (3, "vertical")],
        false,
    )?;

    let best = points
        .iter()
        .max_by(|a, b| a.purcell.horizontal.total_cmp(&b.purcell.horizontal));
    let mut summary = format!("{} sweep points at {energy} eV\n", points.len());
    if let Some(b) = best {
        let _ = writeln!(
            summary,
            "max horizontal Purcell {:.4} at d/lambda0 = {:.4}",
            b.purcell.horizontal, b.d_over_lambda
        );
    }
    Ok(PlanarOutcome {
        points,
        files: out.written().to_vec(),
        summary,
    })
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub radius: f64,
    pub peak: ResonancePeak,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Radius whose nearest resonance sits on the configured target.
pub fn cmd_tune_radius(config: &RunConfig, timestamp: bool) -> Result<TuneOutcome> {
    let section = config.spherical()?;
    let tune = config.tune_section()?;
    let options = config.tune_options()?;
    let shell = section.shell_model()?;
    let target = units::ev(tune.target_ev);
    let radius = spherical::tune_radius(
        &shell,
        target,
        (units::nm(tune.bracket_nm[0]), units::nm(tune.bracket_nm[1])),
        options,
    )?;
    let cavity = SphericalCavity::new(radius, shell)?;
    let peak = cavity
        .nearest_resonance(target, options.span, options.density)?
        .ok_or_else(|| Error::Numerical("tuned cavity lost its resonance".into()))?;

    let body = format!(
        "radius_nm = {:.6}\ncenter_ev = {:.6}\nfwhm_mev = {:.4}\npeak_purcell = {:.4}\nintegrated_weight_au = {:.6e}\n",
        units::to_nm(radius),
        units::to_ev(peak.center),
        1e3 * units::to_ev(peak.fwhm),
        peak.peak_purcell,
        peak.integrated_weight
    );
    let mut out = sink(config, "tune-radius", timestamp);
    out.text("tune_radius.txt", &body)?;
    Ok(TuneOutcome {
        radius,
        peak,
        files: out.written().to_vec(),
        summary: body,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeffRow {
    pub rings: usize,
    pub energy: f64,
    pub dipole: f64,
    pub radius: f64,
    pub report: CouplingReport,
}

#[derive(Debug, Clone)]
pub struct GeffOutcome {
    pub rows: Vec<GeffRow>,
    /// Ring counts whose cavity could not be tuned, with the reason.
    pub failures: Vec<(usize, String)>,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Re-tunes the cavity to every family member and reports its effective coupling.
pub fn cmd_geff(config: &RunConfig, timestamp: bool) -> Result<GeffOutcome> {
    let section = config.spherical()?;
    let family = config.family_section()?;
    let model = family.model();
    let axis = config.family_axis()?;
    let shell = section.shell_model()?;
    let options = match config.tune {
        Some(_) => config.tune_options()?,
        None => spherical::TuneOptions::default(),
    };
    let bracket = (
        units::nm(family.bracket_nm[0]),
        units::nm(family.bracket_nm[1]),
    );

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in &family.rings {
        let energy = model.energy(n);
        let dipole = model.dipole_magnitude(n);
        let attempt = (|| -> Result<GeffRow> {
            let radius = spherical::tune_radius(&shell, energy, bracket, options)?;
            let cavity = SphericalCavity::new(radius, shell.clone())?;
            let peak = cavity
                .nearest_resonance(energy, options.span, options.density)?
                .ok_or_else(|| Error::Numerical("tuned cavity lost its resonance".into()))?;
            let report = analysis::effective_coupling(&cavity, &peak, axis * dipole)?;
            Ok(GeffRow {
                rings: n,
                energy,
                dipole,
                radius,
                report,
            })
        })();
        match attempt {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((n, e.to_string())),
        }
    }

    let mut out = sink(config, "geff", timestamp);
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![
                r.rings as f64,
                units::to_ev(r.energy),
                r.dipole,
                units::to_nm(r.radius),
            ];
            v.extend_from_slice(&r.report.row());
            v
        })
        .collect();
    let failed: Vec<String> = failures.iter().map(|(n, _)| n.to_string()).collect();
    out.table_with(
        "geff.csv",
        &[(
            "failed_rings".into(),
            if failed.is_empty() {
                "none".into()
            } else {
                failed.join(" ")
            },
        )],
        &[
            "rings",
            "energy_ev",
            "dipole_au",
            "radius_nm",
            "omega_c_ev",
            "lambda_c_au",
            "g_eff_au",
            "purcell",
        ],
        &table,
    )?;
    out.gnuplot("geff.gp", "geff.csv", "rings", &[(7, "g_eff")], false)?;

    let mut summary = String::new();
    for r in &rows {
        let _ = writeln!(
            summary,
            "rings {}: eps {:.3} eV, |d| {:.2}, R {:.3} nm, g_eff {:.4e}",
            r.rings,
            units::to_ev(r.energy),
            r.dipole,
            units::to_nm(r.radius),
            r.report.g_eff
        );
    }
    for (n, e) in &failures {
        let _ = writeln!(summary, "rings {n}: failed: {e}");
    }
    Ok(GeffOutcome {
        rows,
        failures,
        files: out.written().to_vec(),
        summary,
    })
}
