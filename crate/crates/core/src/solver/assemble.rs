use rayon::prelude::*;

use super::sparse::{merge_row, CsrMatrix};
use super::SolverError;
use crate::cas::{evaluate_with, Env, Expr, FieldSample, Param, Unknown};
use crate::problems::{Boundary, Grid, ProblemSpec};
use crate::stencil::{StencilProgram, SPACING};

const VOXEL_CHUNK: usize = 512;

/// `A u = Q` over a voxel grid. Row and column `voxel * U + k` belong to
/// unknown `k` of the voxel.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSystem {
    pub a: CsrMatrix,
    pub q: Vec<f64>,
    pub grid: Grid,
    pub unknowns: usize,
}

enum Coef {
    Const(f64),
    Varying(Expr),
}

impl Coef {
    fn new(e: &Expr, h: f64) -> Result<Self, SolverError> {
        let mut has_field = false;
        e.visit(&mut |x| has_field |= matches!(x, Expr::Field(_)));
        if has_field {
            Ok(Coef::Varying(e.clone()))
        } else {
            let env = VoxelEnv { spec: None, v: [0; 3], h };
            Ok(Coef::Const(evaluate_with(e, &env)?))
        }
    }

    fn eval(&self, env: &VoxelEnv) -> Result<f64, SolverError> {
        match self {
            Coef::Const(c) => Ok(*c),
            Coef::Varying(e) => Ok(evaluate_with(e, env)?),
        }
    }
}

/// Parameter samples around one voxel. Samples outside the domain take the
/// nearest voxel.
struct VoxelEnv<'a> {
    spec: Option<&'a ProblemSpec>,
    v: [usize; 3],
    h: f64,
}

impl Env for VoxelEnv<'_> {
    fn symbol(&self, name: &str) -> Option<f64> {
        (name == SPACING).then_some(self.h)
    }

    fn unknown(&self, _: &Unknown, _: [u8; 3]) -> Option<f64> {
        None
    }

    fn field(&self, f: &FieldSample, deriv: [u8; 3]) -> Option<f64> {
        let spec = self.spec?;
        if deriv != [0; 3] || f.pos.0.iter().any(|p| p % 2 != 0) {
            return None;
        }
        let d = f.pos.0.map(|p| p / 2);
        let i = spec.grid.index(spec.grid.clamped(self.v, d));
        Some(match f.param {
            Param::SigmaT => spec.sigma_t[i],
            Param::SigmaS => spec.sigma_s[i],
            Param::Phase(l) => spec.phase_coefficient(l),
            Param::Emission(k) => spec.emission_field(k).map_or(0.0, |q| q[i]),
        })
    }
}

/// Entries `(coefficient, voxel offset, target unknown)` and the RHS of
/// one row.
type RowPlan = (Vec<(Coef, [i32; 3], usize)>, Coef);

struct Block {
    row_len: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    q: Vec<f64>,
}

/// Evaluates every stencil row at every voxel and scatters the entries.
/// Entries that leave the domain are dropped (Dirichlet) or redirected to
/// the nearest voxel (Neumann). A staggered sample belongs to the voxel
/// whose center is half a cell below it, so the samples on the high faces
/// of the domain are unknowns while those on the low faces are not.
pub fn assemble(
    program: &StencilProgram,
    spec: &ProblemSpec,
    bc: Boundary,
) -> Result<SparseSystem, SolverError> {
    let grid = spec.grid;
    if grid.dim != program.dim {
        return Err(SolverError::Mismatch(format!(
            "{}D program on a {}D grid",
            program.dim.count(),
            grid.dim.count()
        )));
    }
    let u = program.unknown_count();
    let n = grid.voxels() * u;
    if n > u32::MAX as usize {
        return Err(SolverError::Mismatch(format!("{n} rows exceed the index range")));
    }
    if program.rows.len() != u || program.rows.iter().zip(&program.unknowns).any(|(r, k)| r.unknown != *k) {
        return Err(SolverError::Mismatch("stencil rows do not follow the unknown order".into()));
    }
    let rows: Vec<RowPlan> = program
        .rows
        .iter()
        .map(|r| {
            let entries = r
                .entries
                .iter()
                .map(|e| Ok((Coef::new(&e.coefficient, grid.h)?, e.voxel, e.target_index)))
                .collect::<Result<Vec<_>, SolverError>>()?;
            Ok((entries, Coef::new(&r.rhs, grid.h)?))
        })
        .collect::<Result<_, SolverError>>()?;

    let starts: Vec<usize> = (0..grid.voxels()).step_by(VOXEL_CHUNK).collect();
    let blocks: Vec<Block> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + VOXEL_CHUNK).min(grid.voxels());
            let mut b = Block {
                row_len: Vec::with_capacity((end - start) * u),
                cols: Vec::new(),
                vals: Vec::new(),
                q: Vec::with_capacity((end - start) * u),
            };
            let mut row: Vec<(u32, f64)> = Vec::new();
            for vi in start..end {
                let v = grid.coords(vi);
                let env = VoxelEnv {
                    spec: Some(spec),
                    v,
                    h: grid.h,
                };
                for (entries, rhs) in &rows {
                    row.clear();
                    for (coef, d, k) in entries {
                        let target = match bc {
                            Boundary::Dirichlet => match grid.offset(v, *d) {
                                Some(t) => t,
                                None => continue,
                            },
                            Boundary::Neumann => grid.clamped(v, *d),
                        };
                        let col = grid.index(target) * u + k;
                        row.push((col as u32, coef.eval(&env)?));
                    }
                    merge_row(&mut row);
                    b.row_len.push(row.len());
                    for &(c, x) in &row {
                        b.cols.push(c);
                        b.vals.push(x);
                    }
                    b.q.push(rhs.eval(&env)?);
                }
            }
            Ok(b)
        })
        .collect::<Result<_, SolverError>>()?;

    let nnz = blocks.iter().map(|b| b.cols.len()).sum();
    let mut a = CsrMatrix::empty(n, n);
    a.cols.reserve_exact(nnz);
    a.vals.reserve_exact(nnz);
    let mut q = Vec::with_capacity(n);
    let mut i = 0;
    for b in blocks {
        for len in b.row_len {
            a.row_ptr[i + 1] = a.row_ptr[i] + len;
            i += 1;
        }
        a.cols.extend_from_slice(&b.cols);
        a.vals.extend_from_slice(&b.vals);
        q.extend_from_slice(&b.q);
    }
    Ok(SparseSystem {
        a,
        q,
        grid,
        unknowns: u,
    })
}
