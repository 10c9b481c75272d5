//! TOML run configuration. Every field has a default, and the resolved
//! configuration (defaults included) is echoed into the run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::IoError;
use crate::field::{DeGiorgiGeometry, Grid, ScalarField};
use crate::params::ModelParams;
use crate::solver::SolverMode;
use crate::walkers::{AbsorptionMode, JumpDistribution, WeightRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[serde(alias = "Solve")]
    #[value(alias = "Solve")]
    Solve,
    #[serde(alias = "Walk")]
    #[value(alias = "Walk")]
    Walk,
    #[serde(alias = "Certify")]
    #[value(alias = "Certify")]
    Certify,
    #[serde(alias = "ValidatePME")]
    #[value(alias = "ValidatePME")]
    ValidatePme,
    #[serde(alias = "EpsSweep")]
    #[value(alias = "EpsSweep")]
    EpsSweep,
    #[serde(alias = "Constants")]
    #[value(alias = "Constants")]
    Constants,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Walk => "walk",
            Command::Certify => "certify",
            Command::ValidatePme => "validate-pme",
            Command::EpsSweep => "eps-sweep",
            Command::Constants => "constants",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Half width of the box; defaults to `params.domain_half_width`.
    pub half_width: Option<f64>,
    pub h: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { half_width: None, h: 0.05 }
    }
}

/// Initial density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `amplitude (1 - |x|^2 / radius^2)_+^power`; radius defaults to `R0`.
    Bump {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default = "two")]
        power: f64,
    },
    /// `amplitude exp(-|x|^2 / (2 width^2))`.
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
    },
    Zero,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Bump { amplitude: 1.0, radius: None, power: 2.0 }
    }
}

impl InitialCondition {
    pub fn sample(&self, grid: &Grid, params: &ModelParams) -> ScalarField {
        let dim = grid.dim();
        let r2 = |x: &[f64]| x[..dim].iter().map(|v| v * v).sum::<f64>();
        match *self {
            InitialCondition::Bump { amplitude, radius, power } => {
                let rad = radius.unwrap_or(params.r0);
                ScalarField::from_fn(grid.clone(), |x| {
                    let s = 1.0 - r2(x) / (rad * rad);
                    if s > 0.0 {
                        amplitude * s.powf(power)
                    } else {
                        0.0
                    }
                })
            }
            InitialCondition::Gaussian { amplitude, width } => {
                ScalarField::from_fn(grid.clone(), |x| amplitude * (-r2(x) / (2.0 * width * width)).exp())
            }
            InitialCondition::Zero => ScalarField::zeros(grid.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub mode: SolverMode,
    pub t_end: f64,
    /// Equally spaced snapshots ending at `t_end`.
    pub snapshots: usize,
    pub cfl_safety: f64,
    /// Constant drift per axis; empty means zero.
    pub drift: Vec<f64>,
    pub u_floor: f64,
    pub pme_m: f64,
    pub max_steps: usize,
    pub upwind_drift: bool,
    pub halt_below_max_fraction: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            mode: SolverMode::EinsteinDegenerate,
            t_end: 1.0,
            snapshots: 200,
            cfl_safety: 0.25,
            drift: Vec::new(),
            u_floor: 0.0,
            pme_m: 2.0,
            max_steps: 10_000_000,
            upwind_drift: false,
            halt_below_max_fraction: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WalkSource {
    /// Sample positions from the initial density.
    #[default]
    Field,
    /// All particles at the origin with the mass of the initial density
    /// (unit mass when that is zero).
    Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkerSection {
    pub particles: usize,
    pub tau_ref: f64,
    /// Defaults to `1000 tau_ref`.
    pub tau_max: Option<f64>,
    /// Defaults to `tau_ref / 10`.
    pub refresh_every: Option<f64>,
    pub law: JumpDistribution,
    pub absorption: AbsorptionMode,
    pub weight_rule: WeightRule,
    /// Defaults to `solver.t_end`.
    pub t_end: Option<f64>,
    pub source: WalkSource,
    /// Grid spacing of the histogram; defaults to `grid.h`.
    pub bin_h: Option<f64>,
}

impl Default for WalkerSection {
    fn default() -> Self {
        Self {
            particles: 100_000,
            tau_ref: 1e-2,
            tau_max: None,
            refresh_every: None,
            law: JumpDistribution::default(),
            absorption: AbsorptionMode::default(),
            weight_rule: WeightRule::default(),
            t_end: None,
            source: WalkSource::default(),
            bin_h: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// Time integrals over every solver step.
    #[default]
    Steps,
    /// Time integrals over snapshot intervals only.
    Snapshots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeGiorgiSection {
    pub n_max: usize,
    /// Defaults to `solver.t_end`.
    pub horizon: Option<f64>,
    pub quadrature: Quadrature,
}

impl Default for DeGiorgiSection {
    fn default() -> Self {
        Self { n_max: 8, horizon: None, quadrature: Quadrature::Steps }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Strictly decreasing regularizations.
    pub epsilons: Vec<f64>,
    /// Relative drop of `max u` (smallest eps) that defines the horizon.
    pub max_drop: f64,
    /// Lower bound on the horizon.
    pub min_horizon: f64,
    /// Give up looking for the drop after this time.
    pub max_horizon: f64,
    /// Also run `alpha = beta = 0` to the same horizon.
    pub contrast: bool,
    /// `theta` of the contrast run (only the analysis constants use it).
    pub contrast_theta: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-2, 1e-3, 1e-4],
            max_drop: 0.5,
            min_horizon: 0.0,
            max_horizon: 1e4,
            contrast: true,
            contrast_theta: 3.0,
        }
    }
}

/// Barenblatt validation: `nodes` nodes on `[-half_width, half_width]`,
/// started from the exact profile at `t_start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PmeSection {
    pub m: f64,
    pub nodes: usize,
    pub half_width: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Barenblatt constant `C`.
    pub constant: f64,
    pub snapshots: usize,
}

impl Default for PmeSection {
    fn default() -> Self {
        Self { m: 2.0, nodes: 401, half_width: 10.0, t_start: 1.0, t_end: 2.0, constant: 1.0, snapshots: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub params: ModelParams,
    pub grid: GridSection,
    pub initial: InitialCondition,
    pub solver: SolverSection,
    pub walkers: WalkerSection,
    pub degiorgi: DeGiorgiSection,
    pub sweep: SweepSection,
    pub pme: PmeSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 0,
            output_dir: PathBuf::from("fsplab-out"),
            params: ModelParams::default(),
            grid: GridSection::default(),
            initial: InitialCondition::default(),
            solver: SolverSection::default(),
            walkers: WalkerSection::default(),
            degiorgi: DeGiorgiSection::default(),
            sweep: SweepSection::default(),
            pme: PmeSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Result<Self, toml::de::Error>, IoError> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        Ok(Self::from_toml(&text))
    }

    /// The resolved configuration as a TOML value tree.
    pub fn to_toml_value(&self) -> toml::Value {
        toml::Value::try_from(self).expect("config serializes")
    }

    pub fn half_width(&self) -> f64 {
        self.grid.half_width.unwrap_or(self.params.domain_half_width)
    }

    pub fn build_grid(&self) -> Result<Grid, crate::error::FieldError> {
        Grid::centered_box(self.params.dim, self.half_width(), self.grid.h)
    }

    pub fn geometry(&self) -> DeGiorgiGeometry {
        DeGiorgiGeometry::new(self.params.r0, self.params.r, self.degiorgi.n_max)
    }

    pub fn drift(&self) -> Vec<f64> {
        if self.solver.drift.is_empty() {
            vec![0.0; self.params.dim]
        } else {
            self.solver.drift.clone()
        }
    }
}
