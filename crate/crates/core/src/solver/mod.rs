//! Variational solver for `−D^s · (a(x, |D^s u|) D^s u) = F` with `u = 0`
//! outside `Ω`, written as minimization of the convex energy
//! `E(u) = ∫ A(x, |D^s u|) − ⟨F, u⟩`.

mod checks;
mod dependence;
mod ncg;

use serde::{Deserialize, Serialize};

use crate::mask::DomainMask;
use crate::orlicz::{dual_pairing, DualPairRHS};
use crate::phi::{check_condition, ConditionId, PhiFunction, SamplingPlan, R_MIN};
use crate::spectral::{GridField, Spectral, VectorGridField};
use crate::{Error, Result};

pub use checks::{dual_bound_checks, monotonicity_check, DualBoundReport};
pub use dependence::{default_probes, DependenceExperiment, DependenceReport, DependenceRow};
pub use ncg::solve;

#[derive(Clone, Debug)]
pub struct DirichletProblem {
    s: f64,
    phi: PhiFunction,
    rhs: DualPairRHS,
    mask: DomainMask,
    spectral: Spectral,
    /// `f − D^s · 𝒇`, the L² representative of `F`.
    load: GridField,
}

impl DirichletProblem {
    /// Builds the problem after auditing `(Inc)_p`, `(Dec)_q` and `(A0)`.
    pub fn new(phi: PhiFunction, rhs: DualPairRHS, mask: DomainMask) -> Result<Self> {
        let s = rhs.s();
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Domain(format!("Dirichlet problems need s in (0, 1], got {s}")));
        }
        if rhs.grid() != mask.grid() {
            return Err(Error::GridMismatch("right-hand side and mask live on different grids".into()));
        }
        if let Some(n) = phi.cells() {
            if n != mask.grid().len() {
                return Err(Error::GridMismatch(format!("Φ-function covers {n} cells, grid has {}", mask.grid().len())));
            }
        }
        let g = phi.growth();
        let plan = SamplingPlan::for_phi(&phi);
        for id in [ConditionId::Inc(g.p()), ConditionId::Dec(g.q()), ConditionId::A0] {
            let rep = check_condition(&phi, id, &plan)?;
            if !rep.pass {
                return Err(Error::Config(format!("{} fails {id}: {:?}", phi.label(), rep.witness)));
            }
        }
        let spectral = Spectral::new(*mask.grid());
        let div = spectral.riesz_divergence(rhs.fvec(), s)?;
        let load = rhs.f().sub(&div);
        Ok(Self { s, phi, rhs, mask, spectral, load })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn phi(&self) -> &PhiFunction {
        &self.phi
    }

    pub fn rhs(&self) -> &DualPairRHS {
        &self.rhs
    }

    pub fn mask(&self) -> &DomainMask {
        &self.mask
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// `D^s u`.
    pub fn grad(&self, u: &GridField) -> Result<VectorGridField> {
        self.spectral.riesz_gradient(u, self.s)
    }

    /// Projection onto admissible fields. On the full torus this removes
    /// the mean and the Nyquist content, which the energy cannot see.
    pub fn project(&self, u: &GridField) -> Result<GridField> {
        if self.mask.is_full_torus() {
            self.spectral.project_resolved(u)
        } else {
            Ok(self.mask.project(u))
        }
    }

    fn check_admissible(&self, u: &GridField) -> Result<()> {
        self.mask.check(u)
    }

    /// `Σ A(x, |V(x)|) h^d`.
    fn stored_energy(&self, v: &VectorGridField) -> f64 {
        let vol = v.grid().cell_volume();
        (0..v.grid().len()).map(|x| self.phi.value(x, v.magnitude(x))).sum::<f64>() * vol
    }

    /// `a(x, |V|) V` with `|V|` floored at `R_MIN`.
    pub fn flux(&self, v: &VectorGridField) -> VectorGridField {
        let n = v.grid().len();
        let weights: Vec<f64> = (0..n).map(|x| self.phi.density(x, v.magnitude(x).max(R_MIN))).collect();
        let comps = v
            .components()
            .iter()
            .map(|c| c.iter().zip(&weights).map(|(a, w)| a * w).collect())
            .collect();
        VectorGridField::from_raw(*v.grid(), comps)
    }

    /// `E(u) = ∫ A(x, |D^s u|) − ⟨F, u⟩`.
    pub fn energy(&self, u: &GridField) -> Result<f64> {
        self.check_admissible(u)?;
        let du = self.grad(u)?;
        Ok(self.stored_energy(&du) - dual_pairing(&self.rhs, u, &self.spectral)?)
    }

    /// `Π[−D^s · (a(x, |D^s u|) D^s u) − (f − D^s · 𝒇)]`.
    pub fn energy_gradient(&self, u: &GridField) -> Result<GridField> {
        self.check_admissible(u)?;
        let du = self.grad(u)?;
        self.gradient_from(&du)
    }

    fn gradient_from(&self, du: &VectorGridField) -> Result<GridField> {
        let div = self.spectral.riesz_divergence(&self.flux(du), self.s)?;
        let raw = div.scaled(-1.0).sub(&self.load);
        self.project(&raw)
    }

    /// Same problem at another order, keeping `(f, 𝒇)`.
    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(self.phi.clone(), self.rhs.with_s(s), self.mask.clone())
    }

    /// Same data with a different right-hand side.
    pub fn with_rhs(&self, rhs: DualPairRHS) -> Result<Self> {
        Self::new(self.phi.clone(), rhs, self.mask.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialIterate {
    Zero,
    Supplied(GridField),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Stop once an accepted step lowers the energy by at most this much...
    pub energy_tol: f64,
    /// ...and the L² norm of the projected gradient is at most this.
    pub residual_tol: f64,
    /// Sufficient-decrease factor in `(0, 1/2]`.
    pub armijo: f64,
    /// Backtracking ratio in `(0, 1)`.
    pub backtrack: f64,
    /// Conjugate directions are reset to steepest descent this often.
    pub restart_every: usize,
    pub initial: InitialIterate,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            energy_tol: 1e-10,
            residual_tol: 1e-6,
            armijo: 1e-4,
            backtrack: 0.5,
            restart_every: 50,
            initial: InitialIterate::Zero,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.energy_tol > 0.0 && self.residual_tol > 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        if !(self.armijo > 0.0 && self.armijo <= 0.5) {
            return Err(Error::Config(format!("Armijo factor must lie in (0, 1/2], got {}", self.armijo)));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config(format!("backtracking ratio must lie in (0, 1), got {}", self.backtrack)));
        }
        if self.max_iter == 0 || self.restart_every == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// Energy of every accepted iterate, starting with the initial one.
    pub energy_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub step_history: Vec<f64>,
    pub energy: f64,
    /// L² norm of the projected energy gradient.
    pub residual: f64,
    /// `‖g‖_{L^{A'}}` of the same gradient, diagnostic only.
    pub dual_residual: f64,
    pub norm_u: f64,
    pub norm_grad_u: f64,
    pub converged: bool,
}
