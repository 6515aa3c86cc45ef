use std::f64::consts::PI;

use super::SolverError;
use crate::cas::{Axis, HalfOffset};
use crate::problems::Grid;
use crate::sh::{real_sh, Direction, ShIndex};
use crate::stencil::StaggeredPlacement;

/// SH coefficients per voxel, voxel-major (x fastest) and unknown-minor.
/// `offsets[k]` is the home grid of unknown `k`; all zero once collocated.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionField {
    pub grid: Grid,
    pub order: i32,
    pub unknowns: Vec<ShIndex>,
    pub offsets: Vec<HalfOffset>,
    pub data: Vec<f64>,
}

impl SolutionField {
    pub fn new(
        grid: Grid,
        order: i32,
        unknowns: Vec<ShIndex>,
        placement: &StaggeredPlacement,
        data: Vec<f64>,
    ) -> Result<Self, SolverError> {
        if data.len() != grid.voxels() * unknowns.len() {
            return Err(SolverError::Mismatch(format!(
                "{} values for {} voxels x {} unknowns",
                data.len(),
                grid.voxels(),
                unknowns.len()
            )));
        }
        let offsets = unknowns
            .iter()
            .map(|i| placement.offset(*i).unwrap_or(HalfOffset::ZERO))
            .collect();
        Ok(Self {
            grid,
            order,
            unknowns,
            offsets,
            data,
        })
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_collocated(&self) -> bool {
        self.offsets.iter().all(|o| o.is_zero())
    }

    pub fn get(&self, voxel: usize, k: usize) -> f64 {
        self.data[voxel * self.unknowns.len() + k]
    }

    pub fn index_of(&self, i: ShIndex) -> Option<usize> {
        self.unknowns.iter().position(|k| *k == i)
    }

    /// One unknown over all voxels.
    pub fn component(&self, k: usize) -> Vec<f64> {
        let u = self.unknowns.len();
        self.data.iter().skip(k).step_by(u).copied().collect()
    }

    /// `√(4π) L^{0,0}` per voxel.
    pub fn fluence(&self) -> Vec<f64> {
        let k = self.index_of(ShIndex { l: 0, m: 0 }).unwrap_or(0);
        let s = (4.0 * PI).sqrt();
        self.component(k).into_iter().map(|x| s * x).collect()
    }

    /// Interpolates every staggered coefficient to voxel centers: the mean
    /// of the two straddling samples per staggered axis, extrapolated
    /// linearly from the first two samples at the low boundary.
    pub fn unstagger(&self) -> SolutionField {
        let u = self.unknowns.len();
        let mut data = self.data.clone();
        for k in 0..u {
            let off = self.offsets[k];
            if off.is_zero() {
                continue;
            }
            let mut comp = self.component(k);
            for axis in Axis::ALL {
                if off.0[axis.index()] == 1 {
                    comp = faces_to_centers(&self.grid, &comp, axis.index());
                }
            }
            for (v, x) in comp.into_iter().enumerate() {
                data[v * u + k] = x;
            }
        }
        SolutionField {
            grid: self.grid,
            order: self.order,
            unknowns: self.unknowns.clone(),
            offsets: vec![HalfOffset::ZERO; u],
            data,
        }
    }

    /// Coefficients at a world position by multilinear interpolation between
    /// voxel centers, constant within half a voxel of the boundary.
    pub fn coefficients_at(&self, x: [f64; 3]) -> Result<Vec<f64>, SolverError> {
        if !self.is_collocated() {
            return Err(SolverError::Mismatch("field is still staggered".into()));
        }
        let g = self.grid;
        let ext = g.extent();
        let active = g.dim.count();
        for k in 0..active {
            if !(0.0..=ext[k]).contains(&x[k]) {
                return Err(SolverError::OutOfDomain(x));
            }
        }
        let mut lo = [0usize; 3];
        let mut t = [0.0; 3];
        for k in 0..active {
            let s = (x[k] / g.h - 0.5).clamp(0.0, (g.res[k] - 1) as f64);
            lo[k] = (s.floor() as usize).min(g.res[k].saturating_sub(2));
            t[k] = s - lo[k] as f64;
        }
        let u = self.unknowns.len();
        let mut out = vec![0.0; u];
        for corner in 0..(1 << active) {
            let mut v = lo;
            let mut w = 1.0;
            for k in 0..active {
                let bit = (corner >> k) & 1;
                if bit == 1 {
                    v[k] = (v[k] + 1).min(g.res[k] - 1);
                    w *= t[k];
                } else {
                    w *= 1.0 - t[k];
                }
            }
            if w == 0.0 {
                continue;
            }
            let base = g.index(v) * u;
            for (o, c) in out.iter_mut().zip(&self.data[base..base + u]) {
                *o += w * c;
            }
        }
        Ok(out)
    }

    /// Fluence `√(4π) L^{0,0}` along +`axis` from the center of voxel
    /// `start`, one sample per voxel: `(r, value)` with `r = k h`.
    pub fn profile(&self, start: [usize; 3], axis: Axis) -> Vec<(f64, f64)> {
        let g = self.grid;
        let k0 = self.index_of(ShIndex { l: 0, m: 0 }).unwrap_or(0);
        let a = axis.index();
        let s = (4.0 * PI).sqrt();
        (start[a]..g.res[a])
            .map(|c| {
                let mut v = start;
                v[a] = c;
                let r = (c - start[a]) as f64 * g.h;
                (r, s * self.get(g.index(v), k0))
            })
            .collect()
    }
}

/// Face samples (`s[i]` at `i + ½`) to centers along `axis`.
fn faces_to_centers(g: &Grid, s: &[f64], axis: usize) -> Vec<f64> {
    let n = g.res[axis];
    let mut out = vec![0.0; s.len()];
    for (v, o) in out.iter_mut().enumerate() {
        let c = g.coords(v);
        let at = |i: usize| {
            let mut w = c;
            w[axis] = i;
            s[g.index(w)]
        };
        let i = c[axis];
        *o = if i > 0 {
            0.5 * (at(i - 1) + at(i))
        } else if n > 1 {
            1.5 * at(0) - 0.5 * at(1)
        } else {
            at(0)
        };
    }
    out
}

/// `Σ L^{l,m}(x) Y^{l,m}(ω)` from a collocated field.
pub fn reconstruct_radiance(
    field: &SolutionField,
    x: [f64; 3],
    dir: Direction,
) -> Result<f64, SolverError> {
    let c = field.coefficients_at(x)?;
    let mut acc = 0.0;
    for (i, v) in field.unknowns.iter().zip(c) {
        acc += v * real_sh(i.l, i.m, dir).map_err(|e| SolverError::Mismatch(e.to_string()))?;
    }
    Ok(acc)
}
