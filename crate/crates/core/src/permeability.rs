//! High-contrast piecewise-constant permeability fields on the fine mesh.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DamError, Result};
use crate::grid::FineMesh;

/// One value per fine element, row-major (element index order).
#[derive(Debug, Clone)]
pub struct PermeabilityField {
    pub values: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
}

impl PermeabilityField {
    pub fn constant(mesh: &FineMesh, kappa: f64) -> Self {
        Self {
            values: vec![kappa; mesh.n_elements()],
            nx: mesh.nx,
            ny: mesh.ny,
        }
    }

    #[inline]
    pub fn at(&self, element: usize) -> f64 {
        self.values[element]
    }

    /// Contrast η = max κ / min κ.
    pub fn contrast(&self) -> f64 {
        let max = self.values.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.values.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }
}

/// Axis-aligned band: a channel occupies `band` in one coordinate over
/// `extent` in the other.
#[derive(Debug, Clone, Copy)]
pub struct Band {
    pub band: (f64, f64),
    pub extent: (f64, f64),
}

impl Band {
    pub fn full(lo: f64, hi: f64) -> Self {
        Self {
            band: (lo, hi),
            extent: (0.0, 1.0),
        }
    }
}

fn centroid(mesh: &FineMesh, e: usize) -> (f64, f64) {
    let i = e % mesh.nx;
    let j = e / mesh.nx;
    (
        (i as f64 + 0.5) * mesh.hx,
        (j as f64 + 0.5) * mesh.hy,
    )
}

fn check_values(k_bg: f64, k_hi: f64) -> Result<()> {
    if k_bg <= 0.0 || k_hi <= 0.0 {
        return Err(DamError::InvalidArgument(format!(
            "permeability values must be positive (got {k_bg}, {k_hi})"
        )));
    }
    Ok(())
}

/// Horizontal channels: elements whose centroid lies in an x2-band over the
/// given x1-extent get the high value.
pub fn gen_horizontal_channels(
    mesh: &FineMesh,
    bands: &[Band],
    k_bg: f64,
    k_hi: f64,
) -> Result<PermeabilityField> {
    check_values(k_bg, k_hi)?;
    let mut field = PermeabilityField::constant(mesh, k_bg);
    for band in bands {
        let mut hit = false;
        for e in 0..mesh.n_elements() {
            let (cx, cy) = centroid(mesh, e);
            if cy >= band.band.0 && cy <= band.band.1 && cx >= band.extent.0 && cx <= band.extent.1
            {
                field.values[e] = k_hi;
                hit = true;
            }
        }
        if !hit {
            log::warn!("channel band {band:?} covers no element; skipped");
        }
    }
    Ok(field)
}

/// Vertical channels: the horizontal contract with the roles of x1 and x2
/// swapped.
pub fn gen_vertical_channels(
    mesh: &FineMesh,
    bands: &[Band],
    k_bg: f64,
    k_hi: f64,
) -> Result<PermeabilityField> {
    check_values(k_bg, k_hi)?;
    let mut field = PermeabilityField::constant(mesh, k_bg);
    for band in bands {
        let mut hit = false;
        for e in 0..mesh.n_elements() {
            let (cx, cy) = centroid(mesh, e);
            if cx >= band.band.0 && cx <= band.band.1 && cy >= band.extent.0 && cy <= band.extent.1
            {
                field.values[e] = k_hi;
                hit = true;
            }
        }
        if !hit {
            log::warn!("channel band {band:?} covers no element; skipped");
        }
    }
    Ok(field)
}

/// Parameters of the random channels-and-inclusions generator. The geometry
/// is intentionally not aligned with any coarse grid; the exact layout is a
/// choice of this artifact, not of any reference experiment.
#[derive(Debug, Clone, Copy)]
pub struct InclusionSpec {
    pub n_horizontal: usize,
    pub n_vertical: usize,
    pub channel_width: f64,
    pub n_inclusions: usize,
    pub inclusion_size: (f64, f64),
}

impl Default for InclusionSpec {
    fn default() -> Self {
        Self {
            n_horizontal: 3,
            n_vertical: 2,
            channel_width: 0.025,
            n_inclusions: 14,
            inclusion_size: (0.03, 0.09),
        }
    }
}

/// Mixture of long channels and isolated rectangular/elliptic inclusions,
/// deterministic for a given seed.
pub fn gen_channels_and_inclusions(
    mesh: &FineMesh,
    seed: u64,
    spec: &InclusionSpec,
    k_bg: f64,
    k_hi: f64,
) -> Result<PermeabilityField> {
    check_values(k_bg, k_hi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = PermeabilityField::constant(mesh, k_bg);
    let w = spec.channel_width;

    let mut bands = Vec::new();
    for _ in 0..spec.n_horizontal {
        let c: f64 = rng.gen_range(0.08..0.92);
        let lo: f64 = rng.gen_range(0.0..0.25);
        let hi: f64 = rng.gen_range(0.75..1.0);
        bands.push(((c - w / 2.0, c + w / 2.0), (lo, hi), true));
    }
    for _ in 0..spec.n_vertical {
        let c: f64 = rng.gen_range(0.08..0.92);
        let lo: f64 = rng.gen_range(0.0..0.25);
        let hi: f64 = rng.gen_range(0.75..1.0);
        bands.push(((c - w / 2.0, c + w / 2.0), (lo, hi), false));
    }

    #[allow(clippy::type_complexity)]
    let mut ellipses: Vec<(f64, f64, f64, f64, bool)> = Vec::new();
    for _ in 0..spec.n_inclusions {
        let cx: f64 = rng.gen_range(0.05..0.95);
        let cy: f64 = rng.gen_range(0.05..0.95);
        let rx: f64 = rng.gen_range(spec.inclusion_size.0..spec.inclusion_size.1);
        let ry: f64 = rng.gen_range(spec.inclusion_size.0..spec.inclusion_size.1);
        let elliptic: bool = rng.gen_bool(0.5);
        ellipses.push((cx, cy, rx, ry, elliptic));
    }

    for e in 0..mesh.n_elements() {
        let (cx, cy) = centroid(mesh, e);
        let mut inside = false;
        for &((blo, bhi), (elo, ehi), horizontal) in &bands {
            let (along, across) = if horizontal { (cx, cy) } else { (cy, cx) };
            if across >= blo && across <= bhi && along >= elo && along <= ehi {
                inside = true;
                break;
            }
        }
        if !inside {
            for &(ix, iy, rx, ry, elliptic) in &ellipses {
                let dx = (cx - ix) / rx;
                let dy = (cy - iy) / ry;
                if (elliptic && dx * dx + dy * dy <= 1.0)
                    || (!elliptic && dx.abs() <= 1.0 && dy.abs() <= 1.0)
                {
                    inside = true;
                    break;
                }
            }
        }
        if inside {
            field.values[e] = k_hi;
        }
    }
    Ok(field)
}

/// Save as row-major CSV: one line per element row j, values over i.
pub fn save_field(field: &PermeabilityField, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for j in 0..field.ny {
        let row: Vec<String> = (0..field.nx)
            .map(|i| format!("{:.16e}", field.values[j * field.nx + i]))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Load a CSV written by [`save_field`]; the value count must match the mesh
/// and all values must be positive.
pub fn load_field(mesh: &FineMesh, path: &Path) -> Result<PermeabilityField> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut values = Vec::with_capacity(mesh.n_elements());
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for tok in line.split(',') {
            let v: f64 = tok.trim().parse().map_err(|_| {
                DamError::Format(format!("line {}: invalid value {tok:?}", lineno + 1))
            })?;
            if v <= 0.0 {
                return Err(DamError::Format(format!(
                    "line {}: non-positive permeability {v}",
                    lineno + 1
                )));
            }
            values.push(v);
        }
    }
    if values.len() != mesh.n_elements() {
        return Err(DamError::Format(format!(
            "expected {} values, found {}",
            mesh.n_elements(),
            values.len()
        )));
    }
    Ok(PermeabilityField {
        values,
        nx: mesh.nx,
        ny: mesh.ny,
    })
}
