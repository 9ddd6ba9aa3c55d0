//! Affine constraints `x_i = Σ_j c_j x_j + b_i` on global DoFs.
//!
//! Hanging-node couplings and Dirichlet values share this one representation,
//! so assembly only ever deals with a single elimination mechanism.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::linalg::{DenseMatrix, SparseMatrix};

/// Right-hand side of one constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintLine {
    /// `(global index, coefficient)` pairs; sorted and duplicate-free after
    /// [`AffineConstraints::close`].
    pub entries: Vec<(usize, f64)>,
    pub inhomogeneity: f64,
}

/// A set of affine constraints with first-wins insertion semantics.
#[derive(Debug, Clone, Default)]
pub struct AffineConstraints {
    lines: BTreeMap<usize, ConstraintLine>,
    closed: bool,
}

impl AffineConstraints {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `dof = Σ entries + inhomogeneity`. If the DoF is already
    /// constrained the existing line is kept and `false` is returned.
    pub fn add_constraint(
        &mut self,
        dof: usize,
        entries: Vec<(usize, f64)>,
        inhomogeneity: f64,
    ) -> bool {
        assert!(!self.closed, "cannot add to closed constraints");
        if self.lines.contains_key(&dof) {
            return false;
        }
        self.lines.insert(
            dof,
            ConstraintLine {
                entries,
                inhomogeneity,
            },
        );
        true
    }

    /// Pins a DoF to a fixed value.
    pub fn add_boundary_value(&mut self, dof: usize, value: f64) -> bool {
        self.add_constraint(dof, Vec::new(), value)
    }

    /// Copies every line of `other` that does not collide with an existing
    /// one; the receiver keeps priority. The result must be closed again.
    pub fn merge(&mut self, other: &AffineConstraints) {
        assert!(!self.closed, "cannot merge into closed constraints");
        for (&dof, line) in &other.lines {
            self.lines.entry(dof).or_insert_with(|| line.clone());
        }
    }

    pub fn n_constraints(&self) -> usize {
        self.lines.len()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.lines.contains_key(&dof)
    }

    pub fn line(&self, dof: usize) -> Option<&ConstraintLine> {
        self.lines.get(&dof)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &ConstraintLine)> {
        self.lines.iter().map(|(&d, l)| (d, l))
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Resolves constraint chains until no right-hand side refers to a
    /// constrained DoF, then sorts and merges the coefficient lists.
    pub fn close(&mut self) {
        let mut pass = 0;
        loop {
            let mut changed = false;
            let dofs: Vec<usize> = self.lines.keys().copied().collect();
            for dof in dofs {
                let line = &self.lines[&dof];
                if !line
                    .entries
                    .iter()
                    .any(|&(d, _)| self.lines.contains_key(&d))
                {
                    continue;
                }
                let line = line.clone();
                let mut entries = Vec::with_capacity(line.entries.len());
                let mut inhomogeneity = line.inhomogeneity;
                for (d, c) in line.entries {
                    match self.lines.get(&d) {
                        Some(sub) => {
                            for &(d2, c2) in &sub.entries {
                                entries.push((d2, c * c2));
                            }
                            inhomogeneity += c * sub.inhomogeneity;
                        }
                        None => entries.push((d, c)),
                    }
                }
                self.lines.insert(
                    dof,
                    ConstraintLine {
                        entries,
                        inhomogeneity,
                    },
                );
                changed = true;
            }
            if !changed {
                break;
            }
            pass += 1;
            assert!(pass < 64, "constraint chains do not terminate; cyclic constraints?");
        }

        for line in self.lines.values_mut() {
            line.entries.sort_by_key(|&(d, _)| d);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(line.entries.len());
            for (d, c) in line.entries.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.0 == d => last.1 += c,
                    _ => merged.push((d, c)),
                }
            }
            line.entries = merged;
        }
        self.closed = true;
    }

    /// Overwrites every constrained entry of `x` with the value its
    /// constraint prescribes.
    pub fn distribute(&self, x: &mut [f64]) {
        assert!(self.closed, "constraints must be closed before use");
        for (&dof, line) in &self.lines {
            let mut value = line.inhomogeneity;
            for &(d, c) in &line.entries {
                value += c * x[d];
            }
            x[dof] = value;
        }
    }

    /// Zeroes every constrained entry; used on residual-like vectors whose
    /// constrained rows carry no information.
    pub fn set_zero(&self, x: &mut [f64]) {
        for &dof in self.lines.keys() {
            x[dof] = 0.0;
        }
    }

    /// Scatters a local right-hand-side contribution into the global
    /// vector, redirecting constrained rows to their masters.
    ///
    /// Inhomogeneities play no role here: eliminating them needs the cell
    /// matrix, which [`Self::distribute_local_to_global`] handles. This is
    /// the vector-only half used when the matrix is never formed.
    pub fn distribute_local_rhs(&self, local_rhs: &[f64], dofs: &[usize], rhs: &mut [f64]) {
        assert!(self.closed, "constraints must be closed before use");
        for (i, &dof) in dofs.iter().enumerate() {
            match self.lines.get(&dof) {
                Some(line) => {
                    for &(target, weight) in &line.entries {
                        rhs[target] += weight * local_rhs[i];
                    }
                }
                None => rhs[dof] += local_rhs[i],
            }
        }
    }

    /// The set of global matrix rows/columns a cell with the given DoFs
    /// touches after constraint resolution, sorted and duplicate-free.
    pub fn resolved_indices(&self, dofs: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(dofs.len());
        for &g in dofs {
            match self.lines.get(&g) {
                Some(line) => out.extend(line.entries.iter().map(|&(d, _)| d)),
                None => out.push(g),
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Scatters a local matrix and right-hand side into the global system,
    /// eliminating constrained rows and columns on the fly.
    ///
    /// Constrained diagonal entries receive the mean of the local diagonal as
    /// a positive placeholder so the global matrix stays invertible; the
    /// corresponding right-hand side entries are left untouched.
    pub fn distribute_local_to_global(
        &self,
        local_matrix: &DenseMatrix,
        local_rhs: &[f64],
        dofs: &[usize],
        matrix: &mut SparseMatrix,
        rhs: &mut [f64],
    ) -> Result<()> {
        assert!(self.closed, "constraints must be closed before use");
        let n = dofs.len();
        debug_assert_eq!(local_matrix.n_rows(), n);
        debug_assert_eq!(local_rhs.len(), n);

        let identity = |g: usize| ([(g, 1.0)], 0.0);
        let resolution = |i: usize| -> (&[(usize, f64)], f64, bool) {
            match self.lines.get(&dofs[i]) {
                Some(line) => (line.entries.as_slice(), line.inhomogeneity, true),
                None => (&[], 0.0, false),
            }
        };

        let mut placeholder = 0.0;
        for i in 0..n {
            placeholder += local_matrix[(i, i)];
        }
        placeholder /= n as f64;

        for i in 0..n {
            let (entries_i, _, constrained_i) = resolution(i);
            let id_i;
            let weights_i: &[(usize, f64)] = if constrained_i {
                entries_i
            } else {
                id_i = identity(dofs[i]).0;
                &id_i
            };

            for &(ti, wi) in weights_i {
                rhs[ti] += wi * local_rhs[i];
                for j in 0..n {
                    let a = local_matrix[(i, j)];
                    let (entries_j, inhom_j, constrained_j) = resolution(j);
                    if constrained_j {
                        for &(tj, wj) in entries_j {
                            matrix.add(ti, tj, wi * wj * a)?;
                        }
                        rhs[ti] -= wi * a * inhom_j;
                    } else {
                        matrix.add(ti, dofs[j], wi * a)?;
                    }
                }
            }
        }

        for (i, &g) in dofs.iter().enumerate() {
            let (_, _, constrained_i) = resolution(i);
            if constrained_i {
                matrix.add(g, g, placeholder)?;
            }
        }
        Ok(())
    }
}
