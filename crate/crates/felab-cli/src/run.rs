//! Mesh construction, solving, and report writing behind the CLI commands.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use felab::assembly::{
    assemble_laplace, assemble_rhs, build_sparsity, compute_error_norms, ErrorNorms, SineProduct,
    SineProductRhs,
};
use felab::dofs::{
    interpolate_boundary_values, make_hanging_node_constraints, AffineConstraints,
    ConstantFunction, DoFHandler, ScalarFunction,
};
use felab::fe::{FiniteElementQ, Quadrature};
use felab::geometry::Point;
use felab::linalg::{cg_solve, JacobiPrecondition, SolverControl, SparseMatrix};
use felab::mapping::{FEValues, MappingQ, UpdateFlags};
use felab::matrix_free::{build_matrix_free, LaplaceOperatorMF};
use felab::mesh::{hyper_cube, hyper_shell_2d, Triangulation};
use felab::multigrid::{build_hierarchy, mg_preconditioned_cg, MGOptions};
use felab::output::VtkDataSet;

use crate::config::{Problem, RunConfig, Solver};

pub const INNER_RADIUS: f64 = 0.5;
pub const OUTER_RADIUS: f64 = 1.0;

/// A failure, split by which exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// The request itself is unusable: bad flags, bad config file, an
    /// unsupported combination. Exit code 2.
    Config(String),
    /// The run was set up correctly but did not finish. Exit code 3.
    Run(felab::Error),
}

impl From<felab::Error> for CliError {
    fn from(e: felab::Error) -> Self {
        CliError::Run(e)
    }
}

pub type CliResult = Result<(), CliError>;

/// What a single solve reports back, independent of dimension.
pub struct Outcome {
    pub n_cells: usize,
    pub n_dofs: usize,
    pub iterations: usize,
    pub residual: f64,
    pub seconds: f64,
    pub errors: Option<ErrorNorms>,
}

struct Solved<const D: usize> {
    tri: Triangulation<D>,
    dh: DoFHandler<D>,
    solution: Vec<f64>,
    outcome: Outcome,
}

fn build_cube_mesh<const D: usize>(level: usize) -> Result<Triangulation<D>, felab::Error> {
    let mut tri = hyper_cube(0.0, 1.0, 1)?;
    tri.refine_global(level)?;
    Ok(tri)
}

/// Four coarse cells between circles of radius 0.5 and 1. Each step flags
/// the active cells whose centers lie nearest the inner circle (with a 1.5x
/// slack so symmetric ties refine together) and executes the refinement,
/// producing hanging nodes from the second step on.
pub fn build_circle_mesh(steps: usize) -> Result<Triangulation<2>, felab::Error> {
    let mut tri = hyper_shell_2d(Point::new([0.0, 0.0]), INNER_RADIUS, OUTER_RADIUS, 4)?;
    for _ in 0..steps {
        let distances: Vec<_> = tri
            .active_cells()
            .map(|cell| {
                let c = tri.cell(cell).center();
                let r = (c[0] * c[0] + c[1] * c[1]).sqrt();
                (cell, (r - INNER_RADIUS).abs())
            })
            .collect();
        let nearest = distances
            .iter()
            .map(|&(_, d)| d)
            .fold(f64::INFINITY, f64::min);
        for (cell, d) in distances {
            if d <= 1.5 * nearest {
                tri.set_refine_flag(cell)?;
            }
        }
        tri.execute_refinement()?;
    }
    Ok(tri)
}

fn build_mesh_2(problem: Problem, level: usize) -> Result<Triangulation<2>, felab::Error> {
    match problem {
        Problem::Sinsin | Problem::ConstantRhs => build_cube_mesh(level),
        Problem::CircleDemo => build_circle_mesh(level),
    }
}

fn dirichlet_ids(problem: Problem, dim: usize) -> Vec<u32> {
    match problem {
        Problem::Sinsin | Problem::ConstantRhs => (0..2 * dim as u32).collect(),
        Problem::CircleDemo => vec![0, 1],
    }
}

fn rhs_function<const D: usize>(problem: Problem) -> Box<dyn ScalarFunction<D>> {
    match problem {
        Problem::Sinsin => Box::new(SineProductRhs),
        Problem::ConstantRhs | Problem::CircleDemo => Box::new(ConstantFunction(1.0)),
    }
}

/// Assembles constraints, solves with the configured solver, and measures
/// errors when the problem has an exact solution.
fn solve_on<const D: usize>(cfg: &RunConfig, tri: Triangulation<D>) -> Result<Solved<D>, CliError> {
    let start = Instant::now();
    let fe = FiniteElementQ::<D>::new(cfg.degree);
    let mut dh = DoFHandler::new();
    dh.distribute_dofs(&tri, &fe)?;
    let n = dh.n_dofs()?;

    let hanging = make_hanging_node_constraints(&tri, &dh)?;
    let mut constraints = AffineConstraints::new();
    constraints.merge(&hanging);
    let ids = dirichlet_ids(cfg.problem, D);
    for &id in &ids {
        interpolate_boundary_values(&tri, &dh, id, &ConstantFunction(0.0), &mut constraints)?;
    }
    constraints.close();

    let mapping = MappingQ::new(cfg.mapping_degree);
    let f = rhs_function::<D>(cfg.problem);
    let control = SolverControl::new(10 * n + 100, cfg.tolerance);
    let mut solution = vec![0.0; n];

    let info = match cfg.solver {
        Solver::AssembledCg => {
            let pattern = build_sparsity(&dh, &constraints)?;
            let mut matrix = SparseMatrix::from_pattern(pattern);
            let mut rhs = vec![0.0; n];
            let flags = UpdateFlags::VALUES
                | UpdateFlags::GRADIENTS
                | UpdateFlags::JXW
                | UpdateFlags::QUADRATURE_POINTS;
            let mut fev = FEValues::new(
                FiniteElementQ::<D>::new(cfg.degree),
                mapping.clone(),
                Quadrature::gauss(cfg.degree + 1),
                flags,
            );
            assemble_laplace(&tri, &dh, &constraints, &mut fev, f.as_ref(), &mut matrix, &mut rhs)?;
            let precondition = JacobiPrecondition::new(&matrix.diagonal())?;
            cg_solve(&matrix, &precondition, &mut solution, &rhs, control)?
        }
        Solver::MfCg => {
            let data = build_matrix_free::<D, f64>(&tri, &dh, &constraints, &mapping, 4)?;
            let operator = LaplaceOperatorMF::new(data);
            let precondition = JacobiPrecondition::new(&operator.compute_diagonal())?;
            let rhs = assembled_rhs_vector(&tri, &dh, &constraints, cfg, f.as_ref())?;
            cg_solve(&operator, &precondition, &mut solution, &rhs, control)?
        }
        Solver::GmgCg => {
            let hierarchy = build_hierarchy(&tri, cfg.degree, &mapping, &ids, &MGOptions::default())
                .map_err(|e| match e {
                    felab::Error::NotGloballyRefined(msg) => CliError::Config(msg),
                    other => CliError::Run(other),
                })?;
            let top = hierarchy.n_levels() - 1;
            check_same_numbering(&dh, hierarchy.dof_handler_on_level(top))?;
            let rhs = assembled_rhs_vector(&tri, &dh, &constraints, cfg, f.as_ref())?;
            mg_preconditioned_cg(&hierarchy, &mut solution, &rhs, control)?
        }
    };
    constraints.distribute(&mut solution);

    let errors = if cfg.problem.has_exact_solution() {
        Some(compute_error_norms(
            &tri,
            &dh,
            &solution,
            &SineProduct,
            cfg.mapping_degree,
        )?)
    } else {
        None
    };

    let outcome = Outcome {
        n_cells: tri.n_active_cells(),
        n_dofs: n,
        iterations: info.iterations,
        residual: info.residual,
        seconds: start.elapsed().as_secs_f64(),
        errors,
    };
    Ok(Solved {
        tri,
        dh,
        solution,
        outcome,
    })
}

fn assembled_rhs_vector<const D: usize>(
    tri: &Triangulation<D>,
    dh: &DoFHandler<D>,
    constraints: &AffineConstraints,
    cfg: &RunConfig,
    f: &dyn ScalarFunction<D>,
) -> Result<Vec<f64>, felab::Error> {
    let mut rhs = vec![0.0; dh.n_dofs()?];
    let flags = UpdateFlags::VALUES | UpdateFlags::JXW | UpdateFlags::QUADRATURE_POINTS;
    let mut fev = FEValues::new(
        FiniteElementQ::<D>::new(dh.degree()),
        MappingQ::new(cfg.mapping_degree),
        Quadrature::gauss(dh.degree() + 1),
        flags,
    );
    assemble_rhs(tri, dh, constraints, &mut fev, f, &mut rhs)?;
    Ok(rhs)
}

/// The multigrid hierarchy enumerates its finest level itself; the solution
/// vector it produces is only usable with our active-cell handler if both
/// enumerations agree, which they do because a globally refined mesh's
/// active cells are exactly its finest level, visited in the same order.
/// Cheap to verify, so verify it.
fn check_same_numbering<const D: usize>(
    active: &DoFHandler<D>,
    level: &DoFHandler<D>,
) -> Result<(), CliError> {
    let consistent = active.n_dofs().ok() == level.n_dofs().ok()
        && active
            .cells()
            .map_err(CliError::from)?
            .iter()
            .zip(level.cells().map_err(CliError::from)?)
            .all(|(a, b)| {
                a == b && active.cell_dof_indices(*a).ok() == level.cell_dof_indices(*b).ok()
            });
    if consistent {
        Ok(())
    } else {
        Err(CliError::Run(felab::Error::InvalidInput(
            "multigrid level numbering does not match the active enumeration".into(),
        )))
    }
}

fn outcome_at(cfg: &RunConfig, level: usize) -> Result<Outcome, CliError> {
    match cfg.dim {
        2 => Ok(solve_on::<2>(cfg, build_mesh_2(cfg.problem, level)?)?.outcome),
        3 => Ok(solve_on::<3>(cfg, build_cube_mesh(level)?)?.outcome),
        other => Err(CliError::Config(format!("dim must be 2 or 3, got {other}"))),
    }
}

/// Runs the level loop and writes the CSV table.
pub fn convergence(cfg: &RunConfig) -> CliResult {
    if !cfg.problem.has_exact_solution() {
        return Err(CliError::Config(format!(
            "convergence needs an exact solution; problem {:?} has none",
            cfg.problem
        )));
    }
    let mut out: Box<dyn Write> = match &cfg.csv_out {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|e| {
            CliError::Config(format!("cannot create {}: {e}", path.display()))
        })?),
        None => Box::new(std::io::stdout()),
    };

    let io = |e: std::io::Error| CliError::Run(felab::Error::Io(e));
    writeln!(
        out,
        "level,n_cells,n_dofs,l2_error,l2_rate,h1_error,h1_rate,iterations,seconds"
    )
    .map_err(io)?;

    let mut previous: Option<ErrorNorms> = None;
    for level in cfg.min_level..=cfg.max_level {
        let o = outcome_at(cfg, level)?;
        let e = o.errors.expect("checked above: the problem has an exact solution");
        let (l2_rate, h1_rate) = match previous {
            Some(p) => (
                format!("{:.4}", (p.l2 / e.l2).log2()),
                format!("{:.4}", (p.h1_semi / e.h1_semi).log2()),
            ),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{:.8e},{},{:.8e},{},{},{:.3}",
            level, o.n_cells, o.n_dofs, e.l2, l2_rate, e.h1_semi, h1_rate, o.iterations, o.seconds
        )
        .map_err(io)?;
        previous = Some(e);
    }
    Ok(())
}

/// Builds the adaptively refined ring and writes it with per-cell levels.
pub fn demo_circle(steps: usize, out: &Path) -> CliResult {
    let tri = build_circle_mesh(steps)?;
    let (mut data, _) = VtkDataSet::from_triangulation(&tri)?;
    let levels: Vec<f64> = tri.active_cells().map(|c| c.level as f64).collect();
    data.add_cell_data("level", levels)?;
    data.save(out)?;
    println!(
        "wrote {} cells, {} points to {}",
        data.cells.len(),
        data.points.len(),
        out.display()
    );
    Ok(())
}

/// Reads the JSON config, runs one solve, prints the summary line.
pub fn solve_from_file(path: &Path) -> CliResult {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    cfg.validate().map_err(CliError::Config)?;
    match cfg.dim {
        2 => solve_and_report::<2>(&cfg, build_mesh_2(cfg.problem, cfg.max_level)?),
        3 => solve_and_report::<3>(&cfg, build_cube_mesh(cfg.max_level)?),
        other => Err(CliError::Config(format!("dim must be 2 or 3, got {other}"))),
    }
}

fn solve_and_report<const D: usize>(cfg: &RunConfig, tri: Triangulation<D>) -> CliResult {
    let solved = solve_on(cfg, tri)?;
    if let Some(path) = &cfg.vtk_out {
        write_solution_vtk(&solved, path)?;
    }
    println!(
        "n_dofs={} iterations={} residual={:.3e}",
        solved.outcome.n_dofs, solved.outcome.iterations, solved.outcome.residual
    );
    Ok(())
}

/// Samples the solution at cell corners and writes it as a point field,
/// along with each cell's refinement level.
fn write_solution_vtk<const D: usize>(s: &Solved<D>, path: &Path) -> CliResult {
    let (mut data, vertex_of_point) = VtkDataSet::from_triangulation(&s.tri)?;
    let mut point_of_vertex = HashMap::new();
    for (point, &vertex) in vertex_of_point.iter().enumerate() {
        point_of_vertex.insert(vertex, point);
    }

    let p = s.dh.degree();
    let mut field = vec![0.0; data.points.len()];
    for &cell in s.dh.cells()? {
        let dofs = s.dh.cell_dof_indices(cell)?;
        let vertices = s.tri.cell_vertex_indices(cell);
        for corner in 0..(1 << D) {
            // corner bits pick 0 or p along each axis of the local
            // lexicographic tensor numbering
            let mut local = 0;
            let mut stride = 1;
            for d in 0..D {
                if corner >> d & 1 == 1 {
                    local += p * stride;
                }
                stride *= p + 1;
            }
            field[point_of_vertex[&vertices[corner]]] = s.solution[dofs[local]];
        }
    }
    data.add_point_data("u", field)?;
    let levels: Vec<f64> = s.tri.active_cells().map(|c| c.level as f64).collect();
    data.add_cell_data("level", levels)?;
    data.save(path)?;
    println!("wrote solution to {}", path.display());
    Ok(())
}
