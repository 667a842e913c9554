//! Artifact I/O: CSV grids and traces, JSON metadata, and the generated
//! schema notes.
//!
//! All writers are deterministic — identical inputs produce byte-identical
//! files (floats are printed in shortest round-trip form, row order follows
//! the in-memory layout, metadata carries no timestamps) — so re-runs can be
//! diffed directly. All readers anchor failures to a file line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::laplace::BoundaryTrace;
use crate::solver::{FieldGrid, GridMeta};
use crate::transforms::{SampledBoundary, SampledInitial};

/// Render a field grid as CSV (`x,y,t,u,v`), x varying fastest, then y,
/// then t.
pub fn field_grid_csv(grid: &FieldGrid) -> String {
    let mut out = String::with_capacity(32 * grid.u.len() + 16);
    out.push_str("x,y,t,u,v\n");
    for (it, &t) in grid.t.iter().enumerate() {
        for (iy, &y) in grid.y.iter().enumerate() {
            for (ix, &x) in grid.x.iter().enumerate() {
                let (u, v) = grid.value(ix, iy, it);
                writeln!(out, "{x},{y},{t},{u},{v}").expect("string write");
            }
        }
    }
    out
}

/// Write `{stem}.csv` and `{stem}.meta.json` under `dir`; returns both paths.
pub fn save_field_grid(dir: &Path, stem: &str, grid: &FieldGrid) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let meta_path = dir.join(format!("{stem}.meta.json"));
    fs::write(&csv_path, field_grid_csv(grid))?;
    let mut meta = serde_json::to_string_pretty(&grid.meta)
        .map_err(|e| Error::Config(format!("metadata serialization: {e}")))?;
    meta.push('\n');
    fs::write(&meta_path, meta)?;
    Ok((csv_path, meta_path))
}

/// Read a field grid back from a CSV file and its metadata sidecar.
///
/// The node lists are reconstructed from the coordinate columns; every
/// (x, y, t) combination must appear exactly once.
pub fn read_field_grid(csv_path: &Path, meta_path: &Path) -> Result<FieldGrid> {
    let meta: GridMeta = serde_json::from_str(&fs::read_to_string(meta_path)?)
        .map_err(|e| Error::Config(format!("{}: {e}", meta_path.display())))?;
    let text = fs::read_to_string(csv_path)?;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 {
            expect_header(csv_path, line, "x,y,t,u,v")?;
            continue;
        }
        rows.push(parse_row::<5>(csv_path, ln + 1, line)?);
    }
    let x = distinct(rows.iter().map(|r| r[0]));
    let y = distinct(rows.iter().map(|r| r[1]));
    let t = distinct(rows.iter().map(|r| r[2]));
    let n = x.len() * y.len() * t.len();
    if rows.len() != n {
        return Err(Error::Config(format!(
            "{}: {} rows do not fill the {}x{}x{} node product",
            csv_path.display(),
            rows.len(),
            x.len(),
            y.len(),
            t.len()
        )));
    }
    let pos = |nodes: &[f64], v: f64| nodes.iter().position(|&n| n == v).expect("distinct node");
    let mut u = vec![f64::NAN; n];
    let mut v = vec![f64::NAN; n];
    for r in &rows {
        let i = (pos(&t, r[2]) * y.len() + pos(&y, r[1])) * x.len() + pos(&x, r[0]);
        u[i] = r[3];
        v[i] = r[4];
    }
    if u.iter().chain(v.iter()).any(|c| c.is_nan()) {
        return Err(Error::Config(format!(
            "{}: duplicate rows leave unfilled grid nodes",
            csv_path.display()
        )));
    }
    FieldGrid::new(x, y, t, u, v, meta)
}

/// Render a boundary trace as CSV (`k,t,re_u,im_u,re_v,im_v`).
pub fn boundary_trace_csv(trace: &BoundaryTrace) -> String {
    let mut out = String::with_capacity(48 * trace.t.len() + 24);
    out.push_str("k,t,re_u,im_u,re_v,im_v\n");
    let k = trace.k;
    for (i, &t) in trace.t.iter().enumerate() {
        let (u, v) = (trace.u[i], trace.v[i]);
        writeln!(out, "{k},{t},{},{},{},{}", u.re, u.im, v.re, v.im).expect("string write");
    }
    out
}

/// Write a boundary trace CSV file.
pub fn save_boundary_trace(path: &Path, trace: &BoundaryTrace) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, boundary_trace_csv(trace))?;
    Ok(())
}

/// Read boundary tractions sampled on a uniform (x, t) grid from CSV with
/// header `x,t,g1,g2`; rows ordered t-major (all x for t₀, then t₁, …),
/// the time column starting at 0.
pub fn read_sampled_boundary(path: &Path) -> Result<SampledBoundary> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 {
            expect_header(path, line, "x,t,g1,g2")?;
            continue;
        }
        rows.push(parse_row::<4>(path, ln + 1, line)?);
    }
    let x = distinct(rows.iter().map(|r| r[0]));
    let t = distinct(rows.iter().map(|r| r[1]));
    let (dx, _) = uniform_spacing(path, "x", &x)?;
    let (dt, t0) = uniform_spacing(path, "t", &t)?;
    if t0 != 0.0 {
        return Err(Error::Config(format!("{}: t column must start at 0, got {t0}", path.display())));
    }
    check_product_order(path, &rows, |r| (r[1], r[0]), &t, &x)?;
    let g1 = rows.iter().map(|r| r[2]).collect();
    let g2 = rows.iter().map(|r| r[3]).collect();
    Ok(SampledBoundary { x0: x[0], dx, nx: x.len(), dt, nt: t.len(), g1, g2 })
}

/// Read initial data sampled on a uniform (x, y) grid from CSV with header
/// `x,y,u0,u1,v0,v1`; rows ordered y-major, the y column starting at 0.
pub fn read_sampled_initial(path: &Path) -> Result<SampledInitial> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 {
            expect_header(path, line, "x,y,u0,u1,v0,v1")?;
            continue;
        }
        rows.push(parse_row::<6>(path, ln + 1, line)?);
    }
    let x = distinct(rows.iter().map(|r| r[0]));
    let y = distinct(rows.iter().map(|r| r[1]));
    let (dx, _) = uniform_spacing(path, "x", &x)?;
    let (dy, y0) = uniform_spacing(path, "y", &y)?;
    if y0 != 0.0 {
        return Err(Error::Config(format!("{}: y column must start at 0, got {y0}", path.display())));
    }
    check_product_order(path, &rows, |r| (r[1], r[0]), &y, &x)?;
    Ok(SampledInitial {
        x0: x[0],
        dx,
        nx: x.len(),
        dy,
        ny: y.len(),
        u0: rows.iter().map(|r| r[2]).collect(),
        u1: rows.iter().map(|r| r[3]).collect(),
        v0: rows.iter().map(|r| r[4]).collect(),
        v1: rows.iter().map(|r| r[5]).collect(),
    })
}

/// The invocation record emitted beside every artifact set: the full config
/// plus the subcommand, so the run can be reproduced exactly.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMetadata {
    pub schema_version: u32,
    pub command: String,
    pub code_version: String,
    pub config: RunConfig,
}

/// Write `run_metadata.json` under `dir`.
pub fn save_run_metadata(dir: &Path, command: &str, config: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let meta = RunMetadata {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
    };
    let path = dir.join("run_metadata.json");
    let mut text = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::Config(format!("metadata serialization: {e}")))?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

/// Read an invocation record back.
pub fn read_run_metadata(path: &Path) -> Result<RunMetadata> {
    let meta: RunMetadata = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    meta.config.validate()?;
    Ok(meta)
}

/// Column and unit notes written beside the artifacts (`OUTPUTS.md`).
///
/// Units: the density is normalized to 1, so stresses and moduli share one
/// unit, speeds are lengths per time, and displacements inherit the unit of
/// the applied traction divided by modulus.
pub const OUTPUT_NOTES: &str = "\
# Output files

All numeric files are CSV with a header row; floats are printed in shortest
round-trip decimal form. Runs are deterministic: the same config produces
byte-identical files. Units are the natural units of the equations with the
density normalized to 1 (moduli and stresses share one unit; wave speeds are
sqrt(modulus); displacements carry traction/modulus).

- `field.csv` / `oracle_field.csv` — displacement grid, columns `x,y,t,u,v`;
  x varies fastest, then y, then t. `u`, `v` are the horizontal and vertical
  (into the half-plane) displacements at (x, y, t).
- `*.meta.json` — grid provenance: truncations, trace source, normalization
  convention, the largest discarded imaginary residue against the field
  scale, and free-form notes.
- `trace_k*.csv` — surface displacement transforms, columns
  `k,t,re_u,im_u,re_v,im_v`: the complex x-Fourier transforms of u and v at
  y = 0 for the fixed wavenumber k of the file.
- `zeros_report.txt` — determinant zero ratios l/k per sheet and the
  Rayleigh-wave summary.
- `compare_report.txt` / `appendix_report.txt` — relative L2 agreement
  tables; see the per-line labels.
- `run_metadata.json` — schema version, subcommand, code version, and the
  exact config; feeding this config back reproduces the run.

Sampled inputs referenced by a config use the same conventions:
boundary tractions `x,t,g1,g2` (t-major rows, t from 0; sigma_xy = mu*g1,
sigma_yy = (lambda+2mu)*g2), initial data `x,y,u0,u1,v0,v1` (y-major rows,
y from 0; displacements u0,v0 and velocities u1,v1).
";

/// Write `OUTPUTS.md` under `dir`.
pub fn save_output_notes(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("OUTPUTS.md");
    fs::write(&path, OUTPUT_NOTES)?;
    Ok(path)
}

fn expect_header(path: &Path, line: &str, want: &str) -> Result<()> {
    if line.trim() != want {
        return Err(Error::Config(format!(
            "{}:1: expected header '{want}', got '{line}'",
            path.display()
        )));
    }
    Ok(())
}

fn parse_row<const N: usize>(path: &Path, line_no: usize, line: &str) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    let mut fields = line.split(',');
    for (i, slot) in out.iter_mut().enumerate() {
        let field = fields.next().ok_or_else(|| {
            Error::Config(format!("{}:{line_no}: expected {N} fields", path.display()))
        })?;
        *slot = field.trim().parse().map_err(|_| {
            Error::Config(format!(
                "{}:{line_no}: field {} is not a number: '{field}'",
                path.display(),
                i + 1
            ))
        })?;
    }
    if fields.next().is_some() {
        return Err(Error::Config(format!(
            "{}:{line_no}: more than {N} fields",
            path.display()
        )));
    }
    Ok(out)
}

/// Distinct values in order of first appearance.
fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.iter().any(|&o| o == v) {
            out.push(v);
        }
    }
    out
}

/// Require strictly increasing, uniformly spaced nodes; returns (step, first).
fn uniform_spacing(path: &Path, name: &str, nodes: &[f64]) -> Result<(f64, f64)> {
    if nodes.len() < 2 {
        return Err(Error::Config(format!(
            "{}: {name} column needs at least two distinct values",
            path.display()
        )));
    }
    let d = nodes[1] - nodes[0];
    if d <= 0.0 {
        return Err(Error::Config(format!(
            "{}: {name} column must increase",
            path.display()
        )));
    }
    let scale = nodes.last().unwrap().abs().max(nodes[0].abs()).max(1.0);
    for w in nodes.windows(2) {
        if ((w[1] - w[0]) - d).abs() > 1e-9 * scale {
            return Err(Error::Config(format!(
                "{}: {name} column is not uniformly spaced ({} vs {d})",
                path.display(),
                w[1] - w[0]
            )));
        }
    }
    Ok((d, nodes[0]))
}

/// Verify the rows enumerate the (outer, inner) node product in order.
fn check_product_order<const N: usize>(
    path: &Path,
    rows: &[[f64; N]],
    key: impl Fn(&[f64; N]) -> (f64, f64),
    outer: &[f64],
    inner: &[f64],
) -> Result<()> {
    if rows.len() != outer.len() * inner.len() {
        return Err(Error::Config(format!(
            "{}: {} rows do not fill the {}x{} grid",
            path.display(),
            rows.len(),
            outer.len(),
            inner.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        let want = (outer[i / inner.len()], inner[i % inner.len()]);
        if key(row) != want {
            return Err(Error::Config(format!(
                "{}:{}: rows must enumerate the grid inner-column-fastest; expected ({}, {})",
                path.display(),
                i + 2,
                want.0,
                want.1
            )));
        }
    }
    Ok(())
}
