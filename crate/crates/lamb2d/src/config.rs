//! Run configuration: a single schema-validated JSON document shared by all
//! subcommands.
//!
//! The document is strict — unknown keys are rejected anywhere in the tree,
//! parse errors are reported with line/column anchors, and every physical
//! invariant (material admissibility, sampled-array shapes, positive
//! truncations, CFL bound) is re-checked on load rather than trusted. The
//! same struct is embedded verbatim in the emitted run metadata so an output
//! directory always reconstructs its exact invocation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdtd::FdtdConfig;
use crate::material::Material;
use crate::solver::{Normalization, ProblemSpec, SolverOptions, TraceSource};
use crate::transforms::{BoundaryForcing, InitialData};

/// Current config/metadata schema version.
pub const SCHEMA_VERSION: u32 = 1;

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

/// The complete run description ingested by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Schema version of this document (currently only 1 is accepted).
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub material: MaterialConfig,
    #[serde(default)]
    pub problem: ProblemConfig,
    /// Output nodes for field evaluation (`solve`, `compare`, `oracle`).
    #[serde(default)]
    pub eval: EvalConfig,
    /// Quadrature truncations and densities.
    #[serde(default)]
    pub quad: QuadConfig,
    /// Finite-difference oracle setup (`oracle`, `compare`).
    #[serde(default)]
    pub oracle: Option<FdtdConfig>,
    /// Boundary-trace comparison setup (`appendix`).
    #[serde(default)]
    pub appendix: Option<AppendixConfig>,
    #[serde(default)]
    pub normalization: Normalization,
    /// Output directory; the CLI `--out` flag takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Lamé moduli (density is 1 throughout).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub lambda: f64,
    pub mu: f64,
}

/// Initial data and surface forcing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    pub initial: InitialData,
    pub forcing: BoundaryForcing,
}

/// Output node lists; each must be strictly increasing, y strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
}

/// Quadrature controls. Unset fields keep the solver defaults; `L_k`/`L_l`
/// set the truncations of both evaluation routes at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    /// Target relative quadrature accuracy. The panel integrands are
    /// analytic, so Gauss–Legendre error decays exponentially in panel
    /// density; the density multiplier scales as log₁₀(1/tol)/8 (1.0 at the
    /// default tol = 1e-8).
    pub tol: Option<f64>,
    /// Truncation of the spectral l-integrals.
    #[serde(rename = "L_l")]
    pub l_l: Option<f64>,
    /// Truncation of the outer k-integral.
    #[serde(rename = "L_k")]
    pub l_k: Option<f64>,
    /// Contour clearance above the determinant-zero certificate, in units
    /// of |k|.
    pub clearance: Option<f64>,
    /// Time step of the trace grid used by the grid route.
    pub s_step: Option<f64>,
    /// Surface-trace engine for the grid route.
    pub trace_source: Option<TraceSource>,
}

impl QuadConfig {
    /// Merge these controls into the solver defaults.
    pub fn solver_options(&self) -> SolverOptions {
        let mut o = SolverOptions::default();
        if let Some(c) = self.clearance {
            o.clearance = c;
        }
        if let Some(lk) = self.l_k {
            o.gamma_k_max = lk;
            o.grid_k_max = lk;
        }
        if let Some(ll) = self.l_l {
            o.gamma_l_max = ll;
            o.grid_l_max = ll;
        }
        if let Some(tol) = self.tol {
            o.refine = ((1.0 / tol).log10() / 8.0).clamp(0.4, 4.0);
        }
        if let Some(s) = self.s_step {
            o.s_step = s;
        }
        if let Some(src) = self.trace_source {
            o.trace_source = src;
        }
        o
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("quad.tol", self.tol),
            ("quad.L_l", self.l_l),
            ("quad.L_k", self.l_k),
            ("quad.clearance", self.clearance),
            ("quad.s_step", self.s_step),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("{name} must be finite and positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Wavenumbers and time grid for the boundary-trace comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppendixConfig {
    /// Output times, strictly increasing from 0.
    pub t_grid: Vec<f64>,
    /// Wavenumbers to compare at (each nonzero).
    pub k_list: Vec<f64>,
}

impl Default for AppendixConfig {
    fn default() -> Self {
        AppendixConfig {
            t_grid: (0..=200).map(|i| i as f64 * 0.01).collect(),
            k_list: vec![0.5, 1.0, 2.0],
        }
    }
}

impl RunConfig {
    /// Parse a JSON document, rejecting unknown keys, with line/column
    /// anchors on every syntax or schema error.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load a config file, optionally applying `key=value` overrides
    /// (dotted paths, values parsed as JSON with plain-string fallback).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if overrides.is_empty() {
            return Self::from_json(&text).map_err(|e| anchor(path, e));
        }
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?;
        for item in overrides {
            apply_override(&mut value, item)?;
        }
        let cfg: RunConfig = serde_json::from_value(value)
            .map_err(|e| Error::Config(format!("{} (after --override): {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Re-check every invariant the document encodes. Called on load; public
    /// so that programmatically built configs get the same scrutiny.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mat = self.material()?;
        self.problem()?.validate()?;
        self.quad.validate()?;
        for (name, nodes, need_positive) in [
            ("eval.x", &self.eval.x, false),
            ("eval.y", &self.eval.y, true),
            ("eval.t", &self.eval.t, false),
        ] {
            if nodes.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{name} contains a non-finite node")));
            }
            if nodes.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config(format!("{name} must be strictly increasing")));
            }
            if need_positive && nodes.first().is_some_and(|&v| v <= 0.0) {
                return Err(Error::Config(format!("{name} nodes must be positive")));
            }
        }
        if self.eval.t.first().is_some_and(|&t| t < 0.0) {
            return Err(Error::Config("eval.t nodes must be >= 0".into()));
        }
        if let Some(oracle) = &self.oracle {
            oracle.validate(&mat)?;
        }
        if let Some(app) = &self.appendix {
            if app.t_grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config("appendix.t_grid must be strictly increasing".into()));
            }
            if app.t_grid.first().is_some_and(|&t| t < 0.0) {
                return Err(Error::Config("appendix.t_grid must start at t >= 0".into()));
            }
            if app.k_list.iter().any(|&k| k == 0.0 || !k.is_finite()) {
                return Err(Error::Config("appendix.k_list entries must be finite and nonzero".into()));
            }
        }
        Ok(())
    }

    /// The validated material.
    pub fn material(&self) -> Result<Material> {
        Material::new(self.material.lambda, self.material.mu)
    }

    /// Assemble the solver-facing problem statement.
    pub fn problem(&self) -> Result<ProblemSpec> {
        Ok(ProblemSpec {
            material: self.material()?,
            initial: self.problem.initial.clone(),
            forcing: self.problem.forcing.clone(),
            normalization: self.normalization,
        })
    }

    /// Solver options with the `quad` section applied.
    pub fn solver_options(&self) -> SolverOptions {
        self.quad.solver_options()
    }
}

fn anchor(path: &Path, e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    }
}

/// Apply one `dotted.path=value` override to a parsed JSON tree. The value
/// text is parsed as JSON; if that fails it is taken as a bare string, so
/// `--override quad.trace_source=volterra` works without inner quotes.
fn apply_override(root: &mut serde_json::Value, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{item}' is not of the form key=value")))?;
    if key.is_empty() {
        return Err(Error::Config(format!("override '{item}' has an empty key")));
    }
    let value: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = node.as_object_mut().ok_or_else(|| {
            Error::Config(format!("override '{key}': '{}' is not an object", parts[..i].join(".")))
        })?;
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("split('.') yields at least one part");
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{ "material": { "lambda": 2.0, "mu": 1.0 } }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.schema_version, SCHEMA_VERSION);
        assert_eq!(cfg.problem.forcing, BoundaryForcing::None);
        assert_eq!(cfg.problem.initial, InitialData::Zero);
        assert_eq!(cfg.normalization, Normalization::FourierConsistent);
        assert!(cfg.oracle.is_none() && cfg.appendix.is_none());
        let opts = cfg.solver_options();
        assert_eq!(opts.refine, SolverOptions::default().refine);
    }

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        for bad in [
            r#"{ "material": { "lambda": 2, "mu": 1 }, "extra": 1 }"#,
            r#"{ "material": { "lambda": 2, "mu": 1, "rho": 1 } }"#,
            r#"{ "material": { "lambda": 2, "mu": 1 }, "quad": { "panels": 9 } }"#,
            r#"{ "material": { "lambda": 2, "mu": 1 }, "oracle": { "hh": 0.1 } }"#,
        ] {
            let err = RunConfig::from_json(bad).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{bad} gave {err:?}");
        }
    }

    #[test]
    fn parse_errors_carry_line_and_column() {
        let text = "{\n  \"material\": { \"lambda\": 2.0,\n     \"mu\": }\n}";
        let msg = RunConfig::from_json(text).unwrap_err().to_string();
        assert!(msg.contains("line 3"), "no line anchor in: {msg}");
    }

    #[test]
    fn physical_invariants_are_rechecked() {
        let bad = r#"{ "material": { "lambda": 2.0, "mu": -1.0 } }"#;
        assert!(RunConfig::from_json(bad).is_err());
        let bad_eval = r#"{ "material": { "lambda": 2, "mu": 1 },
                           "eval": { "x": [0.0], "y": [0.5, 0.25], "t": [1.0] } }"#;
        let msg = RunConfig::from_json(bad_eval).unwrap_err().to_string();
        assert!(msg.contains("eval.y"), "{msg}");
        let bad_cfl = r#"{ "material": { "lambda": 2, "mu": 1 },
                          "oracle": { "h": 0.015625, "dt": 0.01 } }"#;
        assert!(matches!(
            RunConfig::from_json(bad_cfl).unwrap_err(),
            Error::CflViolation { .. }
        ));
    }

    #[test]
    fn quad_section_maps_onto_solver_options() {
        let text = r#"{ "material": { "lambda": 2, "mu": 1 },
                       "quad": { "tol": 1e-16, "L_k": 20.0, "L_l": 80.0, "clearance": 0.5 } }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let o = cfg.solver_options();
        assert_eq!(o.clearance, 0.5);
        assert_eq!(o.gamma_k_max, 20.0);
        assert_eq!(o.grid_k_max, 20.0);
        assert_eq!(o.gamma_l_max, 80.0);
        assert_eq!(o.grid_l_max, 80.0);
        assert!((o.refine - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overrides_reach_nested_fields_and_revalidate() {
        let dir = std::env::temp_dir().join("lamb2d-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("override.json");
        std::fs::write(&path, MINIMAL).unwrap();

        let cfg = RunConfig::load(
            &path,
            &[
                "quad.L_k=12.5".into(),
                "normalization=raw-double-integral".into(),
                "eval.t=[0.0, 0.5, 1.0]".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.quad.l_k, Some(12.5));
        assert_eq!(cfg.normalization, Normalization::RawDoubleIntegral);
        assert_eq!(cfg.eval.t, vec![0.0, 0.5, 1.0]);

        let err = RunConfig::load(&path, &["material.mu=-3".into()]).unwrap_err();
        assert!(err.to_string().contains("mu"), "{err}");
        let err = RunConfig::load(&path, &["quad.bogus=1".into()]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn config_round_trips_through_json() {
        let text = r#"{
            "material": { "lambda": 2.0, "mu": 1.0 },
            "problem": {
                "forcing": { "NormalLineLoad": {
                    "sigma0": 1.0,
                    "profile": { "SmoothedHeaviside": { "tau": 0.05 } },
                    "mollify_eps": 0.1 } }
            },
            "eval": { "x": [-0.5, 0.5], "y": [0.25, 0.5], "t": [0.5, 1.0] },
            "quad": { "L_k": 40.0 },
            "oracle": { "h": 0.015625, "convergence_pair": true },
            "appendix": { "k_list": [1.0], "t_grid": [0.0, 1.0, 2.0] },
            "output": "runs/demo"
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let echoed = serde_json::to_string_pretty(&cfg).unwrap();
        let back = RunConfig::from_json(&echoed).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn appendix_defaults_cover_the_reference_comparison() {
        let app = AppendixConfig::default();
        assert_eq!(app.k_list, vec![0.5, 1.0, 2.0]);
        assert_eq!(app.t_grid.len(), 201);
        assert!((app.t_grid.last().unwrap() - 2.0).abs() < 1e-12);
    }
}
