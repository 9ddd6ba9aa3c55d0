//! V-cycle recursion and its use as a CG preconditioner.

use crate::error::{Error, Result};
use crate::linalg::{cg_solve, Preconditioner, SolveInfo, SolverControl};
use crate::multigrid::hierarchy::{MGHierarchy, MGLevel};

impl<const D: usize> MGHierarchy<D> {
    /// One multigrid V-cycle for the finest-level system `A x = b`,
    /// overwriting `x` (the initial guess is taken as zero). Each level does
    /// one Chebyshev pre-smooth, a coarse-grid correction and one
    /// post-smooth; level 0 is solved by the configured coarse solver.
    pub fn v_cycle(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        let finest = self.levels.len() - 1;
        let n = self.levels[finest].n_dofs;
        if b.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: b.len(),
            });
        }
        if x.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: x.len(),
            });
        }
        self.v_cycle_level(finest, b, x)
    }

    fn v_cycle_level(&self, level: usize, b: &[f64], x: &mut [f64]) -> Result<()> {
        if level == 0 {
            return self.coarse_solve(b, x);
        }
        let lev = &self.levels[level];
        let n = lev.n_dofs;

        smooth(lev, b, x, true);

        let mut r = vec![0.0; n];
        lev.operator.apply(&mut r, x)?;
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }

        let nc = self.levels[level - 1].n_dofs;
        let mut r_coarse = vec![0.0; nc];
        self.restrict(level - 1, &r, &mut r_coarse)?;
        // the restricted defect leaks onto eliminated boundary rows; the
        // coarse problem treats them as identity, so zero them out
        self.levels[level - 1].constraints.set_zero(&mut r_coarse);

        let mut e_coarse = vec![0.0; nc];
        self.v_cycle_level(level - 1, &r_coarse, &mut e_coarse)?;

        let mut e = vec![0.0; n];
        self.prolongate(level - 1, &e_coarse, &mut e)?;
        lev.constraints.set_zero(&mut e);
        for (xi, ei) in x.iter_mut().zip(&e) {
            *xi += ei;
        }

        smooth(lev, b, x, false);
        Ok(())
    }
}

/// Applies the level smoother; `from_zero` marks a zero initial guess so the
/// first residual computation can be skipped. With single-precision storage
/// enabled, the correction is smoothed in f32 around a double-precision
/// residual, keeping `x` itself in f64.
fn smooth<const D: usize>(lev: &MGLevel<D>, b: &[f64], x: &mut [f64], from_zero: bool) {
    match &lev.single {
        Some((op32, sm32)) => {
            let r64: Vec<f64> = if from_zero {
                x.iter_mut().for_each(|v| *v = 0.0);
                b.to_vec()
            } else {
                let mut r = vec![0.0; b.len()];
                lev.operator
                    .apply(&mut r, x)
                    .expect("level vectors sized by the hierarchy");
                r.iter().zip(b).map(|(ax, bi)| bi - ax).collect()
            };
            let r32: Vec<f32> = r64.iter().map(|&v| v as f32).collect();
            let mut e32 = vec![0.0f32; b.len()];
            sm32.smooth_from_zero(
                |dst: &mut [f32], src: &[f32]| {
                    op32.apply(dst, src).expect("level vectors sized by the hierarchy")
                },
                &r32,
                &mut e32,
            );
            for (xi, &ei) in x.iter_mut().zip(&e32) {
                *xi += ei as f64;
            }
        }
        None => {
            let op = |dst: &mut [f64], src: &[f64]| {
                lev.operator
                    .apply(dst, src)
                    .expect("level vectors sized by the hierarchy")
            };
            if from_zero {
                lev.smoother.smooth_from_zero(op, b, x);
            } else {
                lev.smoother.smooth(op, b, x);
            }
        }
    }
}

/// Adapter exposing one V-cycle as a [`Preconditioner`] for [`cg_solve`].
pub struct MGPreconditioner<'a, const D: usize> {
    hierarchy: &'a MGHierarchy<D>,
}

impl<'a, const D: usize> MGPreconditioner<'a, D> {
    pub fn new(hierarchy: &'a MGHierarchy<D>) -> Self {
        Self { hierarchy }
    }
}

impl<const D: usize> Preconditioner for MGPreconditioner<'_, D> {
    fn apply(&self, dst: &mut [f64], src: &[f64]) {
        self.hierarchy
            .v_cycle(src, dst)
            .expect("preconditioner vectors sized by the solver");
    }
}

/// Conjugate gradients on the finest level with one V-cycle per iteration as
/// the preconditioner. `x` provides the initial guess and receives the
/// solution.
pub fn mg_preconditioned_cg<const D: usize>(
    hierarchy: &MGHierarchy<D>,
    x: &mut [f64],
    b: &[f64],
    control: SolverControl,
) -> Result<SolveInfo> {
    cg_solve(
        hierarchy.finest_operator(),
        &MGPreconditioner::new(hierarchy),
        x,
        b,
        control,
    )
}
