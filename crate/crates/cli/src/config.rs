//! Run configuration: a JSON document whose every field has a default, merged
//! with command-line overrides. The resolved form is echoed into each report
//! and hashed for the cache key.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use zetaglue::cylinder::BoundaryCondition;
use zetaglue::dtn::DtnFamily;
use zetaglue::glue::{GeometryConfig, Identity, Tolerances};
use zetaglue::spectra::CrossSection;
use zetaglue::symbols::{SmoothingWeight, TrigPotential};
use zetaglue::zeta::RayShift;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Zeta,
    Logdet,
    Dtn,
    Symbols,
    Glue,
    PowerGlue,
    Adiabatic,
    Torsion,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Zeta => "zeta",
            Experiment::Logdet => "logdet",
            Experiment::Dtn => "dtn",
            Experiment::Symbols => "symbols",
            Experiment::Glue => "glue",
            Experiment::PowerGlue => "power-glue",
            Experiment::Adiabatic => "adiabatic",
            Experiment::Torsion => "torsion",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

/// The cut manifold `[0, a] x Y ∪ [0, b] x Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    pub cross_section: CrossSection,
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub form_grading: bool,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            cross_section: CrossSection::Point,
            a: 1.0,
            b: 1.0,
            t: 1.0,
            form_grading: false,
        }
    }
}

impl Geometry {
    pub fn to_config(&self) -> GeometryConfig {
        let mut cfg = GeometryConfig::new(self.cross_section.clone(), self.a, self.b);
        cfg.t = self.t;
        cfg.form_grading = self.form_grading;
        cfg
    }
}

/// `e^(i theta) t` added to the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Shift {
    pub theta: f64,
    pub t: f64,
}

impl Default for Shift {
    fn default() -> Self {
        Self { theta: 0.0, t: 0.0 }
    }
}

impl Shift {
    pub fn ray(&self) -> zetaglue::Result<RayShift> {
        RayShift::new(self.theta, self.t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numeric {
    /// Eigenvalue cutoff for listings and smoothing checks.
    pub cutoff: f64,
    pub tolerances: Tolerances,
    /// `None` selects the grid suited to the identity.
    pub r_grid: Option<Vec<f64>>,
    pub identity: Identity,
    pub exclude_kernel: bool,
}

impl Default for Numeric {
    fn default() -> Self {
        Self {
            cutoff: 400.0,
            tolerances: Tolerances::default(),
            r_grid: None,
            identity: Identity::CollarDtn,
            exclude_kernel: true,
        }
    }
}

/// `[0, length] x Y` for the `logdet` experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Cylinder {
    pub length: f64,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
    pub form_degree: Option<u32>,
}

impl Default for Cylinder {
    fn default() -> Self {
        Self {
            length: 1.0,
            bc_left: BoundaryCondition::Dirichlet,
            bc_right: BoundaryCondition::Dirichlet,
            form_degree: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Symbols {
    pub potential: TrigPotential,
    pub depth: usize,
    pub length: f64,
    pub t: f64,
    pub order: u32,
    pub weight: SmoothingWeight,
}

impl Default for Symbols {
    fn default() -> Self {
        Self {
            potential: TrigPotential::default(),
            depth: 4,
            length: 1.0,
            t: 1.0,
            order: 5,
            weight: SmoothingWeight::Frequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: String,
    pub format: Format,
    pub cache: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: ".".into(),
            format: Format::Both,
            cache: true,
        }
    }
}

/// Everything that determines a report. `output` is excluded from the echo
/// and from the cache key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default)]
    pub numeric: Numeric,
    #[serde(default)]
    pub shift: Shift,
    #[serde(default)]
    pub cylinder: Cylinder,
    #[serde(default = "default_family")]
    pub dtn: DtnFamily,
    #[serde(default)]
    pub symbols: Symbols,
    #[serde(default, skip_serializing)]
    pub output: Output,
}

fn default_family() -> DtnFamily {
    DtnFamily::q_cylinder(1.0)
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            geometry: Geometry::default(),
            numeric: Numeric::default(),
            shift: Shift::default(),
            cylinder: Cylinder::default(),
            dtn: default_family(),
            symbols: Symbols::default(),
            output: Output::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment.expect("experiment is set before running")
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let n = &self.numeric;
        if !(n.cutoff.is_finite() && n.cutoff >= 0.0) {
            bail!("cutoff must be a nonnegative number, got {}", n.cutoff);
        }
        let t = &n.tolerances;
        for (name, v) in [("exact", t.exact), ("fixed", t.fixed), ("limit", t.limit)] {
            if !(v.is_finite() && v > 0.0) {
                bail!("tolerance `{name}` must be positive, got {v}");
            }
        }
        if self.symbols.depth == 0 {
            bail!("symbol depth must be at least 1");
        }
        Ok(())
    }
}

/// Cross-section shorthands for the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Point,
    Circle,
    Linear,
}

impl Model {
    pub fn build(self, circumference: Option<f64>, holonomy: Option<f64>, offset: Option<f64>) -> CrossSection {
        match self {
            Model::Point => CrossSection::Point,
            Model::Circle => CrossSection::circle(circumference.unwrap_or(TAU), holonomy.unwrap_or(0.0)),
            Model::Linear => CrossSection::linear(offset.unwrap_or(0.25)),
        }
    }
}
