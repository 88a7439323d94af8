//! Run configuration: a TOML document with strict key checking.
//!
//! ```toml
//! [geometry.spherical]
//! radius_nm = 140.0
//! shell = "gold"
//! damping_fraction = 1.0
//!
//! [grid]
//! window_ev = [5.0, 9.0]
//! points_per_mev = 10.0
//!
//! [matter]
//! preset = "benzene"
//! dipole = 3.0
//!
//! [output]
//! directory = "out"
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::materials::{DielectricModel, Tabulated};
use crate::matter::{AceneFamily, MatterSystem};
use crate::planar::{MirrorModel, PlanarCavity};
use crate::spherical::{SamplingDensity, SphericalCavity, TuneOptions};
use crate::units;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub grid: Option<GridSection>,
    pub matter: Option<MatterSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
    pub tune: Option<TuneSection>,
    pub family: Option<FamilySection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Geometry {
    Spherical(SphericalSection),
    Planar(PlanarSection),
}

/// Dielectric response of a shell or mirror.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MaterialSpec {
    Vacuum,
    Gold,
    Constant(f64),
    Drude {
        plasma_ev: f64,
        damping_ev: f64,
    },
    /// Path to an `energy (eV), Re eps, Im eps` table.
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MirrorSpec {
    /// Frequency-independent reflectivity.
    Ideal(f64),
    Material(MaterialSpec),
}

fn default_shell() -> MaterialSpec {
    MaterialSpec::Gold
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphericalSection {
    pub radius_nm: Option<f64>,
    #[serde(default = "default_shell")]
    pub shell: MaterialSpec,
    /// Scales the damping of Drude shells.
    #[serde(default = "one")]
    pub damping_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarSection {
    /// Shorthand for identical top and bottom mirrors.
    pub mirror: Option<MirrorSpec>,
    pub top: Option<MirrorSpec>,
    pub bottom: Option<MirrorSpec>,
    /// Emitter-to-mirror distances, nm.
    pub t_nm: Option<f64>,
    pub b_nm: Option<f64>,
    /// Emission energy for spacing sweeps.
    pub energy_ev: Option<f64>,
    pub sweep: Option<SweepSection>,
}

/// Grid of `d / lambda0` values, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

fn default_points_per_mev() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub window_ev: [f64; 2],
    #[serde(default = "default_points_per_mev")]
    pub points_per_mev: f64,
}

fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_replicate() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatterSection {
    pub file: Option<PathBuf>,
    pub preset: Option<String>,
    /// Dipole magnitude for presets, e bohr.
    pub dipole: Option<f64>,
    #[serde(default = "default_axis")]
    pub axis: [f64; 3],
    #[serde(default = "default_replicate")]
    pub replicate: usize,
}

fn default_bin_width() -> f64 {
    1.0
}

fn default_prominence() -> f64 {
    crate::analysis::DEFAULT_PROMINENCE
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_bin_width")]
    pub bin_width_mev: f64,
    /// Minimum peak prominence relative to the tallest bin.
    #[serde(default = "default_prominence")]
    pub prominence: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            bin_width_mev: default_bin_width(),
            prominence: default_prominence(),
        }
    }
}

fn default_tolerance_mev() -> f64 {
    1.0
}

fn default_span_ev() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneSection {
    pub target_ev: f64,
    pub bracket_nm: [f64; 2],
    #[serde(default = "default_tolerance_mev")]
    pub tolerance_mev: f64,
    /// Half-width of the window searched for the nearest resonance.
    #[serde(default = "default_span_ev")]
    pub span_ev: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    pub base_energy_ev: f64,
    pub energy_step_ev: f64,
    pub base_dipole: f64,
    pub dipole_step: f64,
    pub rings: Vec<usize>,
    pub bracket_nm: [f64; 2],
    #[serde(default = "default_axis")]
    pub axis: [f64; 3],
}

impl FamilySection {
    pub fn model(&self) -> AceneFamily {
        AceneFamily {
            base_energy_ev: self.base_energy_ev,
            energy_step_ev: self.energy_step_ev,
            base_dipole: self.base_dipole,
            dipole_step: self.dipole_step,
        }
    }
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_directory(),
        }
    }
}

fn config_error(field: &str, message: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {message}"))
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(config_error(
            field,
            format!("must be positive (got {value})"),
        ))
    }
}

fn ordered(field: &str, pair: [f64; 2]) -> Result<()> {
    positive(field, pair[0])?;
    if pair[1] > pair[0] && pair[1].is_finite() {
        Ok(())
    } else {
        Err(config_error(
            field,
            format!("needs lower < upper (got [{}, {}])", pair[0], pair[1]),
        ))
    }
}

fn axis(field: &str, a: [f64; 3]) -> Result<Vector3<f64>> {
    let v = Vector3::from(a);
    if v.norm() > 0.0 && v.iter().all(|x| x.is_finite()) {
        Ok(v.normalize())
    } else {
        Err(config_error(field, "must be a non-zero vector"))
    }
}

impl MaterialSpec {
    fn validate(&self, field: &str) -> Result<()> {
        match self {
            Self::Vacuum | Self::Gold => Ok(()),
            Self::Constant(eps) if *eps >= 1.0 => Ok(()),
            Self::Constant(eps) => Err(config_error(
                &format!("{field}.constant"),
                format!("must be >= 1 (got {eps})"),
            )),
            Self::Drude {
                plasma_ev,
                damping_ev,
            } => {
                positive(&format!("{field}.drude.plasma_ev"), *plasma_ev)?;
                if *damping_ev >= 0.0 {
                    Ok(())
                } else {
                    Err(config_error(
                        &format!("{field}.drude.damping_ev"),
                        "must be non-negative",
                    ))
                }
            }
            Self::Table(path) if path.is_file() => Ok(()),
            Self::Table(path) => Err(config_error(
                &format!("{field}.table"),
                format!("file {} does not exist", path.display()),
            )),
        }
    }

    /// Internal model with Drude damping scaled by `damping_fraction`.
    pub fn model(&self, damping_fraction: f64) -> Result<DielectricModel> {
        Ok(match self {
            Self::Vacuum => DielectricModel::Vacuum,
            Self::Gold => DielectricModel::gold_with_damping_fraction(damping_fraction),
            Self::Constant(eps) => DielectricModel::constant(*eps)?,
            Self::Drude {
                plasma_ev,
                damping_ev,
            } => DielectricModel::drude(
                units::ev(*plasma_ev),
                units::ev(damping_ev * damping_fraction),
            )?,
            Self::Table(path) => DielectricModel::Tabulated(Tabulated::load(path)?),
        })
    }

    fn rebase(&mut self, dir: &Path) {
        if let Self::Table(path) = self {
            *path = dir.join(&*path);
        }
    }

    fn describe(&self, damping_fraction: f64) -> String {
        match self {
            Self::Vacuum => "vacuum".into(),
            Self::Gold => format!(
                "drude(plasma_ev={}, damping_ev={})",
                crate::materials::GOLD_PLASMA_EV,
                crate::materials::GOLD_DAMPING_EV * damping_fraction
            ),
            Self::Constant(eps) => format!("constant({eps})"),
            Self::Drude {
                plasma_ev,
                damping_ev,
            } => format!(
                "drude(plasma_ev={plasma_ev}, damping_ev={})",
                damping_ev * damping_fraction
            ),
            Self::Table(path) => format!("table({})", path.display()),
        }
    }
}

impl MirrorSpec {
    fn validate(&self, field: &str) -> Result<()> {
        match self {
            Self::Ideal(r) if (0.0..=1.0).contains(r) => Ok(()),
            Self::Ideal(r) => Err(config_error(
                &format!("{field}.ideal"),
                format!("reflectivity must lie in [0, 1] (got {r})"),
            )),
            Self::Material(m) => m.validate(&format!("{field}.material")),
        }
    }

    pub fn model(&self) -> Result<MirrorModel> {
        match self {
            Self::Ideal(r) => MirrorModel::ideal(*r),
            Self::Material(m) => Ok(MirrorModel::Material(m.model(1.0)?)),
        }
    }

    fn describe(&self) -> String {
        match self {
            Self::Ideal(r) => format!("ideal({r})"),
            Self::Material(m) => m.describe(1.0),
        }
    }
}

impl SphericalSection {
    pub fn shell_model(&self) -> Result<DielectricModel> {
        self.shell.model(self.damping_fraction)
    }
}

impl PlanarSection {
    /// `(top, bottom)` mirror specs.
    pub fn mirror_specs(&self) -> Result<(&MirrorSpec, &MirrorSpec)> {
        match (&self.mirror, &self.top, &self.bottom) {
            (Some(m), None, None) => Ok((m, m)),
            (None, Some(t), Some(b)) => Ok((t, b)),
            _ => Err(config_error(
                "geometry.planar",
                "give either `mirror` or both `top` and `bottom`",
            )),
        }
    }

    pub fn cavity(&self) -> Result<PlanarCavity> {
        let (top, bottom) = self.mirror_specs()?;
        let t = self
            .t_nm
            .ok_or_else(|| config_error("geometry.planar.t_nm", "required"))?;
        let b = self
            .b_nm
            .ok_or_else(|| config_error("geometry.planar.b_nm", "required"))?;
        PlanarCavity::new(top.model()?, bottom.model()?, units::nm(t), units::nm(b))
    }

    /// `d / lambda0` grid of the sweep.
    pub fn sweep_points(&self) -> Result<Vec<f64>> {
        let s = self
            .sweep
            .ok_or_else(|| config_error("geometry.planar.sweep", "required for a spacing sweep"))?;
        if s.steps < 2 {
            return Ok(vec![s.start]);
        }
        Ok((0..s.steps)
            .map(|k| s.start + (s.stop - s.start) * k as f64 / (s.steps - 1) as f64)
            .collect())
    }
}

impl RunConfig {
    /// Parse and validate; relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: Self = toml::from_str(text)
            .map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        config.rebase(base_dir);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, dir).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn rebase(&mut self, dir: &Path) {
        match &mut self.geometry {
            Geometry::Spherical(s) => s.shell.rebase(dir),
            Geometry::Planar(p) => {
                for m in [&mut p.mirror, &mut p.top, &mut p.bottom]
                    .into_iter()
                    .flatten()
                {
                    if let MirrorSpec::Material(spec) = m {
                        spec.rebase(dir);
                    }
                }
            }
        }
        if let Some(file) = self.matter.as_mut().and_then(|m| m.file.as_mut()) {
            *file = dir.join(&*file);
        }
        self.output.directory = dir.join(&self.output.directory);
    }

    /// Checks every section present; commands check that the sections they need exist.
    pub fn validate(&self) -> Result<()> {
        match &self.geometry {
            Geometry::Spherical(s) => {
                if let Some(r) = s.radius_nm {
                    positive("geometry.spherical.radius_nm", r)?;
                }
                if !(s.damping_fraction >= 0.0) {
                    return Err(config_error(
                        "geometry.spherical.damping_fraction",
                        "must be non-negative",
                    ));
                }
                s.shell.validate("geometry.spherical.shell")?;
            }
            Geometry::Planar(p) => {
                let (top, bottom) = p.mirror_specs()?;
                let field = if p.mirror.is_some() { "mirror" } else { "top" };
                top.validate(&format!("geometry.planar.{field}"))?;
                bottom.validate("geometry.planar.bottom")?;
                for (name, v) in [
                    ("t_nm", p.t_nm),
                    ("b_nm", p.b_nm),
                    ("energy_ev", p.energy_ev),
                ] {
                    if let Some(v) = v {
                        positive(&format!("geometry.planar.{name}"), v)?;
                    }
                }
                if let Some(s) = p.sweep {
                    ordered("geometry.planar.sweep", [s.start, s.stop])?;
                    if s.steps == 0 {
                        return Err(config_error(
                            "geometry.planar.sweep.steps",
                            "must be at least 1",
                        ));
                    }
                }
            }
        }
        if let Some(g) = &self.grid {
            ordered("grid.window_ev", g.window_ev)?;
            positive("grid.points_per_mev", g.points_per_mev)?;
        }
        if let Some(m) = &self.matter {
            match (&m.file, &m.preset) {
                (Some(f), None) if f.is_file() => {}
                (Some(f), None) => {
                    return Err(config_error(
                        "matter.file",
                        format!("file {} does not exist", f.display()),
                    ))
                }
                (None, Some(p)) if p == "benzene" => {
                    let d = m
                        .dipole
                        .ok_or_else(|| config_error("matter.dipole", "required with a preset"))?;
                    positive("matter.dipole", d)?;
                }
                (None, Some(p)) => {
                    return Err(config_error(
                        "matter.preset",
                        format!("unknown preset '{p}' (known: benzene)"),
                    ))
                }
                _ => {
                    return Err(config_error(
                        "matter",
                        "give exactly one of `file` or `preset`",
                    ))
                }
            }
            axis("matter.axis", m.axis)?;
            if m.replicate < 1 {
                return Err(config_error("matter.replicate", "must be at least 1"));
            }
        }
        positive("analysis.bin_width_mev", self.analysis.bin_width_mev)?;
        if !(0.0..1.0).contains(&self.analysis.prominence) {
            return Err(config_error("analysis.prominence", "must lie in [0, 1)"));
        }
        if let Some(t) = &self.tune {
            positive("tune.target_ev", t.target_ev)?;
            ordered("tune.bracket_nm", t.bracket_nm)?;
            positive("tune.tolerance_mev", t.tolerance_mev)?;
            positive("tune.span_ev", t.span_ev)?;
        }
        if let Some(f) = &self.family {
            if f.rings.is_empty() || f.rings.contains(&0) {
                return Err(config_error(
                    "family.rings",
                    "needs one or more ring counts >= 1",
                ));
            }
            ordered("family.bracket_nm", f.bracket_nm)?;
            axis("family.axis", f.axis)?;
            let model = f.model();
            for &n in &f.rings {
                if !(model.energy(n) > 0.0) || model.dipole_magnitude(n) <= 0.0 {
                    return Err(config_error(
                        "family",
                        format!("member with {n} rings has a non-positive energy or dipole"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn spherical(&self) -> Result<&SphericalSection> {
        match &self.geometry {
            Geometry::Spherical(s) => Ok(s),
            Geometry::Planar(_) => Err(config_error(
                "geometry",
                "this command needs a spherical geometry",
            )),
        }
    }

    pub fn planar(&self) -> Result<&PlanarSection> {
        match &self.geometry {
            Geometry::Planar(p) => Ok(p),
            Geometry::Spherical(_) => Err(config_error(
                "geometry",
                "this command needs a planar geometry",
            )),
        }
    }

    pub fn grid(&self) -> Result<&GridSection> {
        self.grid
            .as_ref()
            .ok_or_else(|| config_error("grid", "section required"))
    }

    pub fn window(&self) -> Result<(f64, f64)> {
        let g = self.grid()?;
        Ok((units::ev(g.window_ev[0]), units::ev(g.window_ev[1])))
    }

    pub fn density(&self) -> Result<SamplingDensity> {
        SamplingDensity::per_mev(self.grid()?.points_per_mev)
    }

    pub fn tune_section(&self) -> Result<&TuneSection> {
        self.tune
            .as_ref()
            .ok_or_else(|| config_error("tune", "section required"))
    }

    pub fn family_section(&self) -> Result<&FamilySection> {
        self.family
            .as_ref()
            .ok_or_else(|| config_error("family", "section required"))
    }

    pub fn tune_options(&self) -> Result<TuneOptions> {
        let t = self.tune_section()?;
        Ok(TuneOptions {
            span: units::ev(t.span_ev),
            tolerance: units::ev(1e-3 * t.tolerance_mev),
            ..TuneOptions::default()
        })
    }

    /// Spherical cavity with the configured radius, or the radius tuned to `[tune]`.
    pub fn sphere(&self) -> Result<SphericalCavity> {
        let s = self.spherical()?;
        let shell = s.shell_model()?;
        let radius = match (s.radius_nm, &self.tune) {
            (Some(r), _) => units::nm(r),
            (None, Some(t)) => crate::spherical::tune_radius(
                &shell,
                units::ev(t.target_ev),
                (units::nm(t.bracket_nm[0]), units::nm(t.bracket_nm[1])),
                self.tune_options()?,
            )?,
            (None, None) => {
                return Err(config_error(
                    "geometry.spherical.radius_nm",
                    "required unless a [tune] section is given",
                ))
            }
        };
        SphericalCavity::new(radius, shell)
    }

    pub fn matter_system(&self) -> Result<MatterSystem> {
        let m = self
            .matter
            .as_ref()
            .ok_or_else(|| config_error("matter", "section required"))?;
        let base = match (&m.file, m.dipole) {
            (Some(f), _) => MatterSystem::load(f)?,
            (None, Some(d)) => MatterSystem::benzene(axis("matter.axis", m.axis)? * d)?,
            (None, None) => return Err(config_error("matter.dipole", "required with a preset")),
        };
        base.replicate(m.replicate)
    }

    pub fn family_axis(&self) -> Result<Vector3<f64>> {
        axis("family.axis", self.family_section()?.axis)
    }

    /// `key = value` lines describing the resolved configuration.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        match &self.geometry {
            Geometry::Spherical(s) => {
                push("geometry", "spherical".into());
                if let Some(r) = s.radius_nm {
                    push("radius_nm", format!("{r}"));
                }
                push("shell", s.shell.describe(s.damping_fraction));
                push("damping_fraction", format!("{}", s.damping_fraction));
            }
            Geometry::Planar(p) => {
                push("geometry", "planar".into());
                if let Ok((t, b)) = p.mirror_specs() {
                    push("top_mirror", t.describe());
                    push("bottom_mirror", b.describe());
                }
                for (k, v) in [
                    ("t_nm", p.t_nm),
                    ("b_nm", p.b_nm),
                    ("energy_ev", p.energy_ev),
                ] {
                    if let Some(v) = v {
                        push(k, format!("{v}"));
                    }
                }
                if let Some(s) = p.sweep {
                    push(
                        "sweep_d_over_lambda",
                        format!("{}..{} ({} points)", s.start, s.stop, s.steps),
                    );
                }
            }
        }
        if let Some(g) = &self.grid {
            push(
                "window_ev",
                format!("{}..{}", g.window_ev[0], g.window_ev[1]),
            );
            push("points_per_mev", format!("{}", g.points_per_mev));
        }
        if let Some(m) = &self.matter {
            match (&m.file, &m.preset) {
                (Some(f), _) => push("matter_file", f.display().to_string()),
                (_, Some(p)) => {
                    push("matter_preset", p.clone());
                    if let Some(d) = m.dipole {
                        push("dipole", format!("{d}"));
                    }
                }
                _ => {}
            }
            push("axis", format!("{:?}", m.axis));
            push("replicate", format!("{}", m.replicate));
        }
        push("bin_width_mev", format!("{}", self.analysis.bin_width_mev));
        push("prominence", format!("{}", self.analysis.prominence));
        if let Some(t) = &self.tune {
            push("tune_target_ev", format!("{}", t.target_ev));
            push(
                "tune_bracket_nm",
                format!("{}..{}", t.bracket_nm[0], t.bracket_nm[1]),
            );
            push("tune_tolerance_mev", format!("{}", t.tolerance_mev));
            push("tune_span_ev", format!("{}", t.span_ev));
        }
        if let Some(f) = &self.family {
            let mut rings = String::new();
            for (i, n) in f.rings.iter().enumerate() {
                let _ = write!(rings, "{}{n}", if i > 0 { " " } else { "" });
            }
            push(
                "family",
                format!(
                    "energy_ev = {} + ({})(n-1), dipole = {} + ({})(n-1)",
                    f.base_energy_ev, f.energy_step_ev, f.base_dipole, f.dipole_step
                ),
            );
            push("family_rings", rings);
            push(
                "family_bracket_nm",
                format!("{}..{}", f.bracket_nm[0], f.bracket_nm[1]),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, Path::new("."))
    }

    const SPHERE: &str = r#"
[geometry.spherical]
radius_nm = 140.0
shell = "gold"

[grid]
window_ev = [5.0, 9.0]
points_per_mev = 10.0

[matter]
preset = "benzene"
dipole = 3.0
"#;

    #[test]
    fn parses_spherical_example() {
        let c = parse(SPHERE).unwrap();
        let s = c.spherical().unwrap();
        assert_eq!(s.radius_nm, Some(140.0));
        assert_eq!(s.damping_fraction, 1.0);
        assert_eq!(c.analysis.bin_width_mev, 1.0);
        let m = c.matter_system().unwrap();
        assert!((m.transitions()[0].dipole.z - 3.0).abs() < 1e-15);
        assert!(c.planar().is_err());
    }

    #[test]
    fn material_variants() {
        let c = parse(
            "[geometry.spherical]\nradius_nm = 10\nshell = { drude = { plasma_ev = 8.5, damping_ev = 0.1 } }\ndamping_fraction = 0.5\n",
        )
        .unwrap();
        match c.spherical().unwrap().shell_model().unwrap() {
            DielectricModel::Drude { damping, .. } => {
                assert!((units::to_ev(damping) - 0.05).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        let c =
            parse("[geometry.planar]\nmirror = { ideal = 0.95 }\nt_nm = 50\nb_nm = 50\n").unwrap();
        assert!(c.planar().unwrap().cavity().is_ok());
        let c = parse("[geometry.planar]\ntop = { material = \"gold\" }\nbottom = { material = { constant = 2.0 } }\n").unwrap();
        assert!(c.planar().unwrap().mirror_specs().is_ok());
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = parse(&SPHERE.replace("radius_nm", "radius")).unwrap_err();
        assert!(
            matches!(err, Error::Config(ref m) if m.contains("radius")),
            "{err}"
        );
        assert!(parse(&format!("{SPHERE}\n[extra]\nx = 1\n")).is_err());
    }

    #[test]
    fn reports_field_paths() {
        let cases = [
            (
                SPHERE.replace("140.0", "-1.0"),
                "geometry.spherical.radius_nm",
            ),
            (SPHERE.replace("[5.0, 9.0]", "[9.0, 5.0]"), "grid.window_ev"),
            (SPHERE.replace("dipole = 3.0", ""), "matter.dipole"),
            (
                SPHERE.replace("\"benzene\"", "\"naphthalene\""),
                "matter.preset",
            ),
            (
                SPHERE.replace("shell = \"gold\"", "shell = { table = \"missing.csv\" }"),
                "geometry.spherical.shell.table",
            ),
        ];
        for (text, field) in cases {
            match parse(&text) {
                Err(Error::Config(m)) => assert!(m.starts_with(field), "{m}"),
                other => panic!("expected config error for {field}, got {other:?}"),
            }
        }
    }

    #[test]
    fn exactly_one_geometry() {
        let both =
            "[geometry.spherical]\nradius_nm = 1\n[geometry.planar]\nmirror = { ideal = 0.9 }\n";
        assert!(parse(both).is_err());
        assert!(parse("[grid]\nwindow_ev = [1, 2]\n").is_err());
        let mirrors = "[geometry.planar]\nmirror = { ideal = 0.9 }\ntop = { ideal = 0.5 }\n";
        assert!(parse(mirrors).is_err());
    }

    #[test]
    fn describe_lists_resolved_parameters() {
        let c = parse(SPHERE).unwrap();
        let keys: Vec<String> = c.describe().into_iter().map(|(k, _)| k).collect();
        for k in [
            "geometry",
            "radius_nm",
            "shell",
            "points_per_mev",
            "bin_width_mev",
            "dipole",
        ] {
            assert!(keys.iter().any(|x| x == k), "missing {k}");
        }
    }
}
