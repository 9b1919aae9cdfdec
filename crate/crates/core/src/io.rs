//! Run configuration (strict TOML) and deterministic output writers:
//! nodal fields as CSV or legacy-VTK structured points, the error table,
//! and a manifest enumerating everything a run wrote.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::driver::{ErrorReport, SolverConfig};
use crate::error::{DamError, Result};
use crate::grid::{BoundarySpec, FineMesh};

/// Number formatting used by every writer: 17 significant digits, enough
/// to round-trip any f64 bit pattern and keep reruns byte-identical.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    #[serde(default = "default_fine")]
    pub fine: [usize; 2],
    #[serde(default = "default_coarse")]
    pub coarse: [usize; 2],
    /// Height of the water column on each lateral side; 0 means dry.
    #[serde(default = "default_wet_left")]
    pub wet_left: f64,
    #[serde(default = "default_wet_right")]
    pub wet_right: f64,
    /// Piezometric heads; kept separate from the wet heights so unequal
    /// data can be expressed, but they default to the wet heights.
    pub head_left: Option<f64>,
    pub head_right: Option<f64>,
    /// Impose p = head - x2 on the top edge too (fully wetted setups).
    #[serde(default)]
    pub top_dirichlet: bool,
}

fn default_fine() -> [usize; 2] {
    [100, 100]
}
fn default_coarse() -> [usize; 2] {
    [10, 10]
}
fn default_wet_left() -> f64 {
    0.6
}
fn default_wet_right() -> f64 {
    0.4
}

impl Default for MeshSection {
    fn default() -> Self {
        Self {
            fine: default_fine(),
            coarse: default_coarse(),
            wet_left: default_wet_left(),
            wet_right: default_wet_right(),
            head_left: None,
            head_right: None,
            top_dirichlet: false,
        }
    }
}

impl MeshSection {
    pub fn boundary_spec(&self) -> Result<BoundarySpec> {
        for (name, v) in [("wet_left", self.wet_left), ("wet_right", self.wet_right)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(DamError::Config(format!(
                    "mesh.{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(BoundarySpec {
            wet_left: self.wet_left,
            wet_right: self.wet_right,
            head_left: self.head_left.unwrap_or(self.wet_left),
            head_right: self.head_right.unwrap_or(self.wet_right),
            top_dirichlet: self.top_dirichlet,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum CoefficientSection {
    Constant {
        value: f64,
    },
    HorizontalChannels {
        bands: Vec<[f64; 2]>,
        #[serde(default = "one")]
        background: f64,
        #[serde(default = "hundred")]
        contrast: f64,
    },
    VerticalChannels {
        bands: Vec<[f64; 2]>,
        #[serde(default = "one")]
        background: f64,
        #[serde(default = "hundred")]
        contrast: f64,
    },
    ChannelsAndInclusions {
        seed: u64,
        #[serde(default = "one")]
        background: f64,
        #[serde(default = "hundred")]
        contrast: f64,
    },
    File {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}
fn hundred() -> f64 {
    100.0
}

impl Default for CoefficientSection {
    fn default() -> Self {
        CoefficientSection::ChannelsAndInclusions {
            seed: 0,
            background: 1.0,
            contrast: 100.0,
        }
    }
}

impl CoefficientSection {
    pub fn build(&self, mesh: &FineMesh) -> Result<crate::permeability::PermeabilityField> {
        use crate::permeability::*;
        let full = |bands: &[[f64; 2]]| -> Vec<Band> {
            bands.iter().map(|b| Band::full(b[0], b[1])).collect()
        };
        match self {
            CoefficientSection::Constant { value } => {
                if *value <= 0.0 {
                    return Err(DamError::Config(format!(
                        "coefficient.value must be positive, got {value}"
                    )));
                }
                Ok(PermeabilityField::constant(mesh, *value))
            }
            CoefficientSection::HorizontalChannels {
                bands,
                background,
                contrast,
            } => gen_horizontal_channels(mesh, &full(bands), *background, *contrast),
            CoefficientSection::VerticalChannels {
                bands,
                background,
                contrast,
            } => gen_vertical_channels(mesh, &full(bands), *background, *contrast),
            CoefficientSection::ChannelsAndInclusions {
                seed,
                background,
                contrast,
            } => gen_channels_and_inclusions(
                mesh,
                *seed,
                &InclusionSpec::default(),
                *background,
                *contrast,
            ),
            CoefficientSection::File { path } => load_field(mesh, path),
        }
    }

    /// Short tag used in output file names.
    pub fn tag(&self) -> &'static str {
        match self {
            CoefficientSection::Constant { .. } => "constant",
            CoefficientSection::HorizontalChannels { .. } => "horizontal",
            CoefficientSection::VerticalChannels { .. } => "vertical",
            CoefficientSection::ChannelsAndInclusions { .. } => "mixed",
            CoefficientSection::File { .. } => "file",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "one")]
    pub g: f64,
    #[serde(default = "half")]
    pub omega1: f64,
    #[serde(default = "half")]
    pub omega2: f64,
    #[serde(default = "one")]
    pub lambda1: f64,
    #[serde(default = "one")]
    pub lambda2: f64,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_kfp")]
    pub fixed_point_iters: usize,
}

fn default_dt() -> f64 {
    0.05
}
fn half() -> f64 {
    0.5
}
fn default_tol() -> f64 {
    1e-4
}
fn default_max_steps() -> usize {
    10_000
}
fn default_kfp() -> usize {
    3
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            g: 1.0,
            omega1: 0.5,
            omega2: 0.5,
            lambda1: 1.0,
            lambda2: 1.0,
            tolerance: default_tol(),
            max_steps: default_max_steps(),
            fixed_point_iters: default_kfp(),
        }
    }
}

impl SolverSection {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            g: self.g,
            omega1: self.omega1,
            omega2: self.omega2,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            tolerance: self.tolerance,
            max_steps: self.max_steps,
            fixed_point_iters: self.fixed_point_iters,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmsfemSection {
    /// Enrichment counts swept by the `sweep` command.
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
}

fn default_levels() -> Vec<usize> {
    vec![1, 2, 4, 6, 8, 10]
}

impl Default for GmsfemSection {
    fn default() -> Self {
        Self {
            levels: default_levels(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum FieldFormat {
    Csv,
    Vtk,
}

impl Default for FieldFormat {
    fn default() -> Self {
        FieldFormat::Csv
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: FieldFormat,
    /// Also write θ and the coefficient, not just the pressure.
    #[serde(default)]
    pub fields: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            format: FieldFormat::Csv,
            fields: false,
        }
    }
}

/// Full run configuration; every section is optional and defaults to the
/// reference setup (100×100 fine, 10×10 coarse, heads 0.6/0.4, contrast 100).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub coefficient: CoefficientSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub gmsfem: GmsfemSection,
    #[serde(default)]
    pub output: OutputSection,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    toml::from_str(text).map_err(|e| DamError::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
        .map_err(|e| DamError::Config(format!("{}: {e}", path.display())))
}

/// Write a nodal field as CSV: one row per grid row j = 0..=ny, columns
/// i = 0..=nx, bottom row first.
pub fn write_field_csv(path: &Path, mesh: &FineMesh, field: &[f64]) -> Result<()> {
    let mut out = String::new();
    for j in 0..=mesh.ny {
        for i in 0..=mesh.nx {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(field[mesh.node_index(i, j)]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write a nodal field as an ASCII legacy-VTK structured-points dataset.
pub fn write_field_vtk(path: &Path, mesh: &FineMesh, name: &str, field: &[f64]) -> Result<()> {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "{name}");
    out.push_str("ASCII\nDATASET STRUCTURED_POINTS\n");
    let _ = writeln!(out, "DIMENSIONS {} {} 1", mesh.nx + 1, mesh.ny + 1);
    out.push_str("ORIGIN 0 0 0\n");
    let _ = writeln!(out, "SPACING {} {} 1", format_f64(mesh.hx), format_f64(mesh.hy));
    let _ = writeln!(out, "POINT_DATA {}", mesh.n_nodes());
    let _ = writeln!(out, "SCALARS {name} double 1");
    out.push_str("LOOKUP_TABLE default\n");
    for j in 0..=mesh.ny {
        for i in 0..=mesh.nx {
            let _ = writeln!(out, "{}", format_f64(field[mesh.node_index(i, j)]));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_field(
    path: &Path,
    mesh: &FineMesh,
    name: &str,
    field: &[f64],
    format: &FieldFormat,
) -> Result<()> {
    if field.len() != mesh.n_nodes() {
        return Err(DamError::InvalidArgument(format!(
            "field '{name}' has {} values, mesh has {} nodes",
            field.len(),
            mesh.n_nodes()
        )));
    }
    match format {
        FieldFormat::Csv => write_field_csv(path, mesh, field),
        FieldFormat::Vtk => write_field_vtk(path, mesh, name, field),
    }
}

/// Error table CSV: one row per enrichment level.
pub fn write_error_table(path: &Path, rows: &[ErrorReport]) -> Result<()> {
    let mut out =
        String::from("coarse_dim,levels,energy_error_percent,fine_steps,coarse_steps\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.coarse_dim,
            r.li,
            format_f64(r.energy_error_percent),
            r.fine_steps,
            r.coarse_steps
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Manifest of a finished run, written as TOML next to the outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub fine: [usize; 2],
    pub coarse: [usize; 2],
    pub coefficient: String,
    pub converged: bool,
    pub steps: usize,
    pub files: Vec<String>,
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let text = toml::to_string_pretty(manifest)
        .map_err(|e| DamError::Format(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}
