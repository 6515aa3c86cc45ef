//! Shared fixtures for the benchmarks.

use pnstencil_core::pn::{build_pn, Dim};
use pnstencil_core::problems::{make_pointsource, ProblemSpec};
use pnstencil_core::solver::{assemble, SparseSystem};
use pnstencil_core::stencil::{compile_equations, StencilProgram};

pub fn program(order: i32) -> StencilProgram {
    compile_equations(&build_pn(order, Dim::Three).unwrap()).unwrap()
}

pub fn pointsource(res: usize) -> ProblemSpec {
    make_pointsource(res).unwrap()
}

pub fn system(order: i32, res: usize) -> SparseSystem {
    let spec = pointsource(res);
    assemble(&program(order), &spec, spec.bc).unwrap()
}
