//! Run configuration: a TOML file with `surface`, `chemistry`, `solver`,
//! `sweep`, `hysteresis` and `formula` tables. Angles are in degrees.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Value;
use wetlab_core::{Chemistry, Geometry, LineElement, SolverConfig, SurfaceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Solve,
    Sweep,
    Hysteresis,
    Formula,
    Validate,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Solve => "solve",
            Scenario::Sweep => "sweep",
            Scenario::Hysteresis => "hysteresis",
            Scenario::Formula => "formula",
            Scenario::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceConfig {
    /// flat | wave_y | wave_z | wave_yz
    pub geometry: String,
    pub amplitude: f64,
    pub eps: f64,
    /// Periods across the strip.
    pub periods: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self { geometry: "flat".into(), amplitude: 0.1, eps: 0.0625, periods: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChemistryConfig {
    /// uniform | stripes_y | stripes_z | checkerboard | pillars
    pub pattern: String,
    pub theta: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub fraction: f64,
}

impl Default for ChemistryConfig {
    fn default() -> Self {
        Self { pattern: "uniform".into(), theta: 60.0, theta_a: 60.0, theta_b: 120.0, fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub nodes_x: usize,
    pub nodes_y: usize,
    pub gradient_tol: f64,
    pub step_tol: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub fixed_point_tol: f64,
    pub max_outer: usize,
    pub strip_half_height: f64,
    /// projected | arclength
    pub line_element: String,
    pub seed_height: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            nodes_x: d.nodes_x,
            nodes_y: d.nodes_y,
            gradient_tol: d.gradient_tol,
            step_tol: d.step_tol,
            max_iterations: d.max_iterations,
            damping: d.damping,
            fixed_point_tol: d.fixed_point_tol,
            max_outer: d.max_outer,
            strip_half_height: d.strip_half_height,
            line_element: "projected".into(),
            seed_height: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { eps: vec![0.25, 0.125, 0.0625, 0.03125] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HysteresisConfig {
    pub offsets: usize,
    /// Pillar contact fraction for the trapped-air formula; skipped when absent.
    pub pillar_fraction: Option<f64>,
}

impl Default for HysteresisConfig {
    fn default() -> Self {
        Self { offsets: 64, pillar_fraction: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FormulaConfig {
    /// Height of the level contact line.
    pub line_height: f64,
    pub samples: usize,
}

impl Default for FormulaConfig {
    fn default() -> Self {
        Self { line_height: 0.0, samples: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub chemistry: ChemistryConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub hysteresis: HysteresisConfig,
    #[serde(default)]
    pub formula: FormulaConfig,
}

/// Parses `key=value`; the value is read as TOML and falls back to a bare string.
fn parse_override(item: &str) -> Result<(Vec<String>, Value)> {
    let (key, raw) = item.split_once('=').ok_or_else(|| anyhow!("override `{item}` is not key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        bail!("override `{item}` has an empty key");
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.trim().to_string()),
    };
    Ok((key.split('.').map(str::to_string).collect(), value))
}

fn apply_override(root: &mut toml::Table, path: &[String], value: Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty key");
    let mut table = root;
    for p in parents {
        let entry = table.entry(p.clone()).or_insert_with(|| Value::Table(Default::default()));
        table = entry.as_table_mut().ok_or_else(|| anyhow!("`{p}` is not a table"))?;
    }
    table.insert(last.clone(), value);
    Ok(())
}

impl RunConfig {
    /// Reads `path` (or starts from defaults) and applies `--set` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut root: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                text.parse().with_context(|| format!("parsing {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            let (key, value) = parse_override(item)?;
            apply_override(&mut root, &key, value)?;
        }
        let cfg: RunConfig = Value::Table(root).try_into().map_err(|e| anyhow!("invalid configuration: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let angle = |key: &str, v: f64| -> Result<()> {
            if !(v > 0.0 && v < 180.0) {
                bail!("{key} = {v} must lie in (0, 180) degrees");
            }
            Ok(())
        };
        let eps = |key: &str, v: f64| -> Result<()> {
            if !(v >= 1.0 / 64.0 && v <= 0.5) {
                bail!("{key} = {v} must lie in [1/64, 1/2]");
            }
            Ok(())
        };
        let s = &self.surface;
        if !(0.0..=0.25).contains(&s.amplitude) {
            bail!("surface.amplitude = {} must lie in [0, 0.25]", s.amplitude);
        }
        eps("surface.eps", s.eps)?;
        self.geometry()?;
        let c = &self.chemistry;
        angle("chemistry.theta", c.theta)?;
        angle("chemistry.theta_a", c.theta_a)?;
        angle("chemistry.theta_b", c.theta_b)?;
        if !(0.0..=1.0).contains(&c.fraction) {
            bail!("chemistry.fraction = {} must lie in [0, 1]", c.fraction);
        }
        self.chemistry()?;
        if s.periods == 0 {
            bail!("surface.periods must be at least 1");
        }
        self.surface_at(s.eps).context("chemistry")?;
        for (i, e) in self.sweep.eps.iter().enumerate() {
            eps(&format!("sweep.eps[{i}]"), *e)?;
        }
        if self.sweep.eps.len() < 3 || self.sweep.eps.windows(2).any(|w| !(w[1] < w[0])) {
            bail!("sweep.eps needs at least three strictly decreasing values");
        }
        if self.hysteresis.offsets < 8 {
            bail!("hysteresis.offsets = {} must be at least 8", self.hysteresis.offsets);
        }
        if let Some(f) = self.hysteresis.pillar_fraction {
            if !(0.0..=1.0).contains(&f) {
                bail!("hysteresis.pillar_fraction = {f} must lie in [0, 1]");
            }
        }
        if self.formula.samples < 16 {
            bail!("formula.samples = {} must be at least 16", self.formula.samples);
        }
        self.solver_config()?.validate().map_err(|e| anyhow!("{e}"))?;
        if !(self.solver.seed_height.abs() < self.solver.strip_half_height) {
            bail!(
                "solver.seed_height = {} must lie inside the strip (-{m}, {m})",
                self.solver.seed_height,
                m = self.solver.strip_half_height
            );
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let amplitude = self.surface.amplitude;
        Ok(match self.surface.geometry.as_str() {
            "flat" => Geometry::Flat,
            "wave_y" => Geometry::WaveY { amplitude },
            "wave_z" => Geometry::WaveZ { amplitude },
            "wave_yz" => Geometry::WaveYZ { amplitude },
            other => bail!("surface.geometry = {other:?} is not one of flat, wave_y, wave_z, wave_yz"),
        })
    }

    pub fn chemistry(&self) -> Result<Chemistry> {
        let c = &self.chemistry;
        let (a, b) = (c.theta_a.to_radians(), c.theta_b.to_radians());
        Ok(match c.pattern.as_str() {
            "uniform" => Chemistry::Uniform { theta: c.theta.to_radians() },
            "stripes_y" => Chemistry::StripesY { theta_a: a, theta_b: b, fraction: c.fraction },
            "stripes_z" => Chemistry::StripesZ { theta_a: a, theta_b: b, fraction: c.fraction },
            "checkerboard" => Chemistry::Checkerboard { theta_a: a, theta_b: b },
            "pillars" => Chemistry::Pillars { theta_top: a, theta_gap: b, fraction: c.fraction },
            other => bail!(
                "chemistry.pattern = {other:?} is not one of uniform, stripes_y, stripes_z, checkerboard, pillars"
            ),
        })
    }

    pub fn surface_at(&self, eps: f64) -> Result<SurfaceSpec> {
        SurfaceSpec::catalog(self.geometry()?, self.chemistry()?, eps)
            .and_then(|s| s.with_periods(self.surface.periods))
            .map_err(|e| anyhow!("{e}"))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        let line_element = match s.line_element.as_str() {
            "projected" => LineElement::Projected,
            "arclength" => LineElement::Arclength,
            other => bail!("solver.line_element = {other:?} is not one of projected, arclength"),
        };
        Ok(SolverConfig {
            nodes_x: s.nodes_x,
            nodes_y: s.nodes_y,
            gradient_tol: s.gradient_tol,
            step_tol: s.step_tol,
            max_iterations: s.max_iterations,
            damping: s.damping,
            fixed_point_tol: s.fixed_point_tol,
            max_outer: s.max_outer,
            strip_half_height: s.strip_half_height,
            line_element,
            ..SolverConfig::default()
        })
    }

    /// Canonical TOML of the effective configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
