use std::fs;
use std::path::{Path, PathBuf};

use pnstencil_core::cas::Axis;
use pnstencil_core::pn::{build_cda, build_pn, EquationSet};
use pnstencil_core::problems::{ProblemError, ProblemSpec};
use pnstencil_core::solver::{solve_program, PipelineError, SolveOptions, SolveReport};
use pnstencil_core::stencil::compile_equations;

use crate::artifacts::{FieldFile, Profile, SolveLog};
use crate::config::{EquationChoice, RunConfig};
use crate::CliError;

pub const EQUATIONS_FILE: &str = "equations.txt";
pub const STENCIL_FILE: &str = "stencil.txt";
pub const FIELD_FILE: &str = "field.pnfld";
pub const PROFILE_FILE: &str = "profile.csv";
pub const LOG_FILE: &str = "solve.log";

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub out: PathBuf,
    /// `None` when only dumps were requested.
    pub report: Option<SolveReport>,
    pub profile: Profile,
    pub rows: usize,
    pub nnz: usize,
}

impl RunSummary {
    pub fn converged(&self) -> bool {
        self.report.as_ref().is_none_or(|r| r.converged)
    }
}

pub fn equations_for(cfg: &RunConfig, spec: &ProblemSpec) -> Result<EquationSet, CliError> {
    Ok(match cfg.equations {
        EquationChoice::Pn => build_pn(cfg.order.unwrap_or(1), spec.grid.dim)?,
        EquationChoice::Diffusion => build_cda(spec.grid.dim),
    })
}

pub fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        primal_tol: Some(cfg.tol),
        jacobi: cfg.jacobi,
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(CliError::io(path))
}

/// Builds, compiles, assembles and solves, writing every artifact to
/// `cfg.out`. Nothing is written unless the configuration and the problem
/// pass validation. With a dump flag set the run prints the requested dumps
/// and stops before assembly.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let spec = cfg.problem()?;
    if let Err(e @ ProblemError::Vacuum { .. }) = spec.check_admissible() {
        return Err(CliError::Config(format!("{e} (set floor)")));
    }
    let eqset = equations_for(cfg, &spec)?;
    let program = compile_equations(&eqset)?;

    fs::create_dir_all(&cfg.out).map_err(CliError::io(&cfg.out))?;
    let eq_dump = eqset.dump();
    let stencil_dump = program.dump();
    write(&cfg.out.join(EQUATIONS_FILE), &eq_dump)?;
    write(&cfg.out.join(STENCIL_FILE), &stencil_dump)?;
    if cfg.dump_equations || cfg.dump_stencil {
        if cfg.dump_equations {
            print!("{eq_dump}");
        }
        if cfg.dump_stencil {
            print!("{stencil_dump}");
        }
        return Ok(RunSummary {
            out: cfg.out.clone(),
            report: None,
            profile: Profile::default(),
            rows: 0,
            nnz: 0,
        });
    }

    let solution = solve_program(&spec, program, &solve_options(cfg)).map_err(|e| match e {
        PipelineError::Problem(e) => CliError::Problem(e),
        PipelineError::Stencil(e) => CliError::Stencil(e),
        PipelineError::Solver(e) => CliError::Solver(e),
    })?;
    FieldFile::from_field(&solution.field).write(&cfg.out.join(FIELD_FILE))?;
    let profile = Profile::from_samples(&solution.field.profile(spec.center_voxel(), Axis::X));
    profile.write(&cfg.out.join(PROFILE_FILE))?;
    let g = spec.grid;
    let header = [
        ("problem", spec.name.clone()),
        ("equations", format!("{:?}", eqset.kind)),
        ("order", eqset.order.to_string()),
        ("dim", g.dim.count().to_string()),
        ("resolution", format!("{} {} {}", g.res[0], g.res[1], g.res[2])),
        ("bc", spec.bc.to_string()),
        ("floor", spec.floor.to_string()),
        ("rows", solution.rows.to_string()),
        ("nnz", solution.nnz.to_string()),
    ];
    write(&cfg.out.join(LOG_FILE), &SolveLog::render(&header, &solution.report))?;
    Ok(RunSummary {
        out: cfg.out.clone(),
        report: Some(solution.report),
        profile,
        rows: solution.rows,
        nnz: solution.nnz,
    })
}
