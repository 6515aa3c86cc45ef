//! Executing a [`crate::stencil::StencilProgram`] over a voxel grid,
//! solving the normal equations and un-staggering the result.

mod assemble;
mod cg;
mod field;
mod sparse;

use thiserror::Error;

use crate::cas::CasError;
use crate::pn::EquationSet;
use crate::problems::{ProblemError, ProblemSpec};
use crate::stencil::{compile_equations, StencilError, StencilProgram};

pub use assemble::{assemble, SparseSystem};
pub use cg::{cgnr, SolveOptions, SolveReport};
pub use field::{reconstruct_radiance, SolutionField};
pub use sparse::{dot, norm, CsrMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("coefficient evaluation failed: {0}")]
    Cas(#[from] CasError),
    #[error("{0}")]
    Mismatch(String),
    #[error("position {0:?} is outside the domain")]
    OutOfDomain([f64; 3]),
}

/// Normal-equation CG on an assembled system.
pub fn solve_normal_cg(sys: &SparseSystem, opts: &SolveOptions) -> (Vec<f64>, SolveReport) {
    cgnr(&sys.a, &sys.a.transpose(), &sys.q, opts)
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Stencil(#[from] StencilError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub program: StencilProgram,
    pub staggered: SolutionField,
    pub field: SolutionField,
    pub report: SolveReport,
    pub rows: usize,
    pub nnz: usize,
}

/// Compile, assemble, solve and un-stagger.
pub fn solve_problem(
    spec: &ProblemSpec,
    eqset: &EquationSet,
    opts: &SolveOptions,
) -> Result<Solution, PipelineError> {
    spec.check_admissible()?;
    let program = compile_equations(eqset)?;
    solve_program(spec, program, opts)
}

pub fn solve_program(
    spec: &ProblemSpec,
    program: StencilProgram,
    opts: &SolveOptions,
) -> Result<Solution, PipelineError> {
    spec.check_admissible()?;
    let sys = assemble(&program, spec, spec.bc)?;
    let (rows, nnz) = (sys.a.nrows, sys.a.nnz());
    let (u, report) = solve_normal_cg(&sys, opts);
    drop(sys);
    let staggered = SolutionField::new(
        spec.grid,
        program.order,
        program.unknowns.clone(),
        &program.placement,
        u,
    )?;
    let field = staggered.unstagger();
    Ok(Solution {
        program,
        staggered,
        field,
        report,
        rows,
        nnz,
    })
}
