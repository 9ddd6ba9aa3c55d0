//! Run configuration shared by the `convergence` and `solve` commands.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::Deserialize;

/// Which model problem to set up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    /// Manufactured solution `u = prod_d sin(pi x_d)` on the unit cube.
    Sinsin,
    /// Unit load `f = 1` on the unit cube; no exact solution.
    ConstantRhs,
    /// Unit load on the four-cell ring, refined adaptively toward the
    /// inner circle; hanging nodes and curved cells, no exact solution.
    CircleDemo,
}

impl Problem {
    pub fn has_exact_solution(self) -> bool {
        matches!(self, Problem::Sinsin)
    }

    /// Whether level-by-level refinement is uniform (a prerequisite for
    /// the multigrid solver).
    pub fn refines_uniformly(self) -> bool {
        !matches!(self, Problem::CircleDemo)
    }
}

/// How the linear system is solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    /// CSR matrix, Jacobi-preconditioned conjugate gradients.
    AssembledCg,
    /// Matrix-free operator, Jacobi-preconditioned conjugate gradients.
    MfCg,
    /// Matrix-free operator, V-cycle-preconditioned conjugate gradients.
    GmgCg,
}

/// Everything one run needs, deserializable from the JSON config file the
/// `solve` command takes. Unknown keys are rejected so typos surface as
/// errors instead of silently falling back to defaults.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "two")]
    pub dim: usize,
    #[serde(default = "one")]
    pub degree: usize,
    #[serde(default = "one")]
    pub mapping_degree: usize,
    #[serde(default)]
    pub min_level: usize,
    pub max_level: usize,
    pub problem: Problem,
    #[serde(default = "default_solver")]
    pub solver: Solver,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Where `convergence` writes its CSV table; stdout when absent.
    #[serde(default)]
    pub csv_out: Option<PathBuf>,
    /// Where `solve` writes the solution field; skipped when absent.
    #[serde(default)]
    pub vtk_out: Option<PathBuf>,
}

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

fn default_solver() -> Solver {
    Solver::AssembledCg
}

fn default_tolerance() -> f64 {
    1e-10
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dim == 2 || self.dim == 3) {
            return Err(format!("dim must be 2 or 3, got {}", self.dim));
        }
        let max = felab::fe::MAX_DEGREE;
        if !(1..=max).contains(&self.degree) {
            return Err(format!("degree must be in 1..={max}, got {}", self.degree));
        }
        if !(1..=max).contains(&self.mapping_degree) {
            return Err(format!(
                "mapping_degree must be in 1..={max}, got {}",
                self.mapping_degree
            ));
        }
        if self.min_level > self.max_level {
            return Err(format!(
                "min_level {} exceeds max_level {}",
                self.min_level, self.max_level
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.problem == Problem::CircleDemo && self.dim != 2 {
            return Err("the circle-demo problem is two-dimensional".into());
        }
        if self.solver == Solver::GmgCg && !self.problem.refines_uniformly() {
            return Err(
                "gmg-cg needs a globally refined mesh; circle-demo refines adaptively".into(),
            );
        }
        Ok(())
    }
}
