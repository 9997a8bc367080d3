//! Experiment configuration files.
//!
//! One TOML document with the sections `[grid]`, `[phi]`, `[mask]` and
//! `[experiment]`. Relative file paths are resolved against the directory
//! holding the configuration.

use std::path::{Path, PathBuf};

use fracorlicz::lab::LabParameters;
use fracorlicz::mask::DomainMask;
use fracorlicz::phi::{A2Plan, SampleBall};
use fracorlicz::spectral::io;
use fracorlicz::{Grid, PhiFunction, SpatialParam};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub phi: PhiSpec,
    #[serde(default)]
    pub mask: MaskSpec,
    pub experiment: ExperimentSpec,
    /// Directory used to resolve relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

/// A spatial parameter: a constant or a grid-field file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Constant(f64),
    File { file: PathBuf },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PhiSpec {
    Power {
        p: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    VariableExponent {
        #[serde(default = "one_param")]
        alpha: ParamSpec,
        exponent: ParamSpec,
    },
    LogPerturbed {
        exponent: ParamSpec,
    },
    DoublePhase {
        p: f64,
        q: f64,
        alpha: ParamSpec,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaskSpec {
    #[default]
    FullTorus,
    Ball {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    File {
        file: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PhiAudit,
    OpsVerify,
    IneqSweep,
    Solve,
    SDependence,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::PhiAudit => "phi-audit",
            Self::OpsVerify => "ops-verify",
            Self::IneqSweep => "ineq-sweep",
            Self::Solve => "solve",
            Self::SDependence => "s-dependence",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    /// Fractional order of the problem (`solve`).
    pub s: Option<f64>,
    /// Limit order (`s-dependence`).
    pub sigma: Option<f64>,
    /// Number of dyadic orders `σ + 2^{-n}` (`s-dependence`).
    #[serde(default = "default_count")]
    pub count: usize,
    /// Orders for the identity suite (`ops-verify`).
    pub orders: Option<Vec<f64>>,
    /// Orders for the oracle comparison (`ops-verify`); empty disables it.
    pub oracle_orders: Option<Vec<f64>>,
    #[serde(default = "default_identity_tol")]
    pub identity_tol: f64,
    #[serde(default = "default_oracle_tol")]
    pub oracle_tol: f64,
    /// Condition names for `phi-audit`, e.g. `"inc"`, `"dec:2"`, `"a0"`.
    pub conditions: Option<Vec<String>>,
    pub a_bounds: Option<[f64; 2]>,
    #[serde(default)]
    pub balls: Vec<SampleBall>,
    pub a2: Option<A2Plan>,
    pub lab: Option<LabParameters>,
    pub rhs: Option<RhsSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    /// Bound on the field recovery error of manufactured full-torus solves.
    #[serde(default = "default_recovery_tol")]
    pub recovery_tol: f64,
    /// Bound on `e_n / ‖u_σ‖` at the last order (`s-dependence`).
    #[serde(default = "default_final_tol")]
    pub final_tol: f64,
    /// Baseline file consumed by the run.
    pub baselines: Option<PathBuf>,
}

/// Right-hand side `F = f − D^s · 𝒇`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RhsSpec {
    /// `𝒇 = a(|D^s u*|) D^s u*` for a known `u*`.
    Manufactured {
        profile: Profile,
        #[serde(default = "one")]
        amplitude: f64,
        /// Bump radius; ignored by the unit mode.
        #[serde(default = "one")]
        width: f64,
    },
    /// `𝒇 = (A cos(k x₁) e^{-|x|²/(2w²)}, 0)`, `f = 0`.
    GaussianWave {
        amplitude: f64,
        width: f64,
        #[serde(default = "one")]
        frequency: f64,
    },
    Files {
        f: Option<PathBuf>,
        fvec: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `sin(2π x₁ / L)`.
    UnitMode,
    /// Smooth bump centred at the origin.
    Bump,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub max_iter: usize,
    pub energy_tol: f64,
    pub residual_tol: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = fracorlicz::solver::SolverConfig::default();
        Self { max_iter: d.max_iter, energy_tol: d.energy_tol, residual_tol: d.residual_tol }
    }
}

impl SolverSpec {
    pub fn to_config(self) -> fracorlicz::solver::SolverConfig {
        fracorlicz::solver::SolverConfig {
            max_iter: self.max_iter,
            energy_tol: self.energy_tol,
            residual_tol: self.residual_tol,
            ..Default::default()
        }
    }
}

fn one() -> f64 {
    1.0
}

fn one_param() -> ParamSpec {
    ParamSpec::Constant(1.0)
}

fn default_count() -> usize {
    6
}

fn default_identity_tol() -> f64 {
    1e-12
}

fn default_oracle_tol() -> f64 {
    2e-2
}

fn default_recovery_tol() -> f64 {
    1e-4
}

fn default_final_tol() -> f64 {
    1e-3
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        let e = &self.experiment;
        let need = |v: Option<f64>, what: &str| {
            v.map(|_| ()).ok_or_else(|| CliError::Config(format!("{} needs `{what}`", e.kind.name())))
        };
        match e.kind {
            ExperimentKind::Solve => {
                need(e.s, "s")?;
                self.rhs_spec()?;
            }
            ExperimentKind::SDependence => {
                need(e.sigma, "sigma")?;
                self.rhs_spec()?;
            }
            ExperimentKind::IneqSweep => {
                if !matches!(self.mask, MaskSpec::Ball { .. }) {
                    return Err(CliError::Config("ineq-sweep needs a ball mask".into()));
                }
            }
            ExperimentKind::PhiAudit | ExperimentKind::OpsVerify => {}
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(self.grid.dim, self.grid.n, self.grid.length)?)
    }

    pub fn rhs_spec(&self) -> Result<&RhsSpec, CliError> {
        self.experiment
            .rhs
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{} needs an [experiment.rhs] table", self.experiment.kind.name())))
    }

    fn param(&self, spec: &ParamSpec, grid: Grid) -> Result<SpatialParam, CliError> {
        match spec {
            ParamSpec::Constant(v) => Ok(SpatialParam::Constant(*v)),
            ParamSpec::File { file } => {
                let field = io::read_scalar(self.resolve(file))?;
                if *field.grid() != grid {
                    return Err(CliError::Config(format!("{} was written for another grid", file.display())));
                }
                Ok(SpatialParam::field(field.into_data()))
            }
        }
    }

    pub fn phi(&self) -> Result<PhiFunction, CliError> {
        let g = self.grid()?;
        let phi = match &self.phi {
            PhiSpec::Power { p, scale } => PhiFunction::power(*p, *scale)?,
            PhiSpec::VariableExponent { alpha, exponent } => {
                PhiFunction::variable_exponent(self.param(alpha, g)?, self.param(exponent, g)?)?
            }
            PhiSpec::LogPerturbed { exponent } => PhiFunction::log_perturbed(self.param(exponent, g)?)?,
            PhiSpec::DoublePhase { p, q, alpha } => PhiFunction::double_phase(*p, *q, self.param(alpha, g)?)?,
        };
        Ok(phi)
    }

    pub fn mask(&self) -> Result<DomainMask, CliError> {
        let g = self.grid()?;
        Ok(match &self.mask {
            MaskSpec::FullTorus => DomainMask::full_torus(g),
            MaskSpec::Ball { center, radius } => DomainMask::ball(g, *center, *radius)?,
            MaskSpec::File { file } => {
                let field = io::read_scalar(self.resolve(file))?;
                if *field.grid() != g {
                    return Err(CliError::Config(format!("{} was written for another grid", file.display())));
                }
                DomainMask::from_field(&field)?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLVE: &str = r#"
        [grid]
        dim = 1
        n = 64
        length = 6.283185307179586

        [phi]
        family = "power"
        p = 2.0
        scale = 0.5

        [experiment]
        kind = "solve"
        s = 0.5
        rhs = { kind = "manufactured", profile = "unit-mode" }
    "#;

    #[test]
    fn parses_sections_and_defaults() {
        let cfg = RunConfig::parse(SOLVE).unwrap();
        assert_eq!(cfg.experiment.kind, ExperimentKind::Solve);
        assert!(matches!(cfg.mask, MaskSpec::FullTorus));
        assert_eq!(cfg.experiment.count, 6);
        assert_eq!(cfg.experiment.solver.residual_tol, 1e-6);
        assert!(cfg.phi().unwrap().is_homogeneous());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::parse(&SOLVE.replace("s = 0.5", "")).is_err());
        assert!(RunConfig::parse(&SOLVE.replace("n = 64", "n = 60")).is_err());
        assert!(RunConfig::parse(&SOLVE.replace("kind = \"solve\"", "kind = \"ineq-sweep\"")).is_err());
        assert!(RunConfig::parse(&format!("{SOLVE}\nextra = 1\n")).is_err());
    }

    #[test]
    fn double_phase_with_constant_alpha() {
        let text = SOLVE.replace(
            "family = \"power\"\n        p = 2.0\n        scale = 0.5",
            "family = \"double-phase\"\n        p = 2.0\n        q = 4.0\n        alpha = 1.0",
        );
        let phi = RunConfig::parse(&text).unwrap().phi().unwrap();
        assert_eq!(phi.eval(0, 1.0).unwrap(), 2.0);
    }
}
