//! Benchmark problem setups and the Monte Carlo reference.

mod mc;
mod noise;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::pn::Dim;
use crate::sh::ShIndex;

pub use mc::{mc_fluence_oracle, shell_edges, McEstimate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
    #[error("unknown boundary condition '{0}'")]
    UnknownBoundary(String),
    #[error("{0}")]
    Invalid(String),
    #[error("sigma_t is {value} at voxel {voxel}; the system is singular without a positive floor")]
    Vacuum { voxel: usize, value: f64 },
}

/// Regular voxel grid with cubic cells of edge `h`. 2D grids have a single
/// layer along z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub dim: Dim,
    pub res: [usize; 3],
    pub h: f64,
}

impl Grid {
    pub fn new(dim: Dim, res: usize, extent: f64) -> Self {
        let res = match dim {
            Dim::Two => [res, res, 1],
            Dim::Three => [res; 3],
        };
        Self {
            dim,
            res,
            h: extent / res[0] as f64,
        }
    }

    pub fn voxels(&self) -> usize {
        self.res.iter().product()
    }

    pub fn extent(&self) -> [f64; 3] {
        let e = |k: usize| self.res[k] as f64 * self.h;
        match self.dim {
            Dim::Two => [e(0), e(1), 0.0],
            Dim::Three => [e(0), e(1), e(2)],
        }
    }

    /// Linear index, x fastest.
    pub fn index(&self, v: [usize; 3]) -> usize {
        v[0] + self.res[0] * (v[1] + self.res[1] * v[2])
    }

    pub fn coords(&self, i: usize) -> [usize; 3] {
        let x = i % self.res[0];
        let y = (i / self.res[0]) % self.res[1];
        let z = i / (self.res[0] * self.res[1]);
        [x, y, z]
    }

    /// World position of a voxel center. z is 0 in 2D.
    pub fn center(&self, v: [usize; 3]) -> [f64; 3] {
        let c = |k: usize| (v[k] as f64 + 0.5) * self.h;
        match self.dim {
            Dim::Two => [c(0), c(1), 0.0],
            Dim::Three => [c(0), c(1), c(2)],
        }
    }

    /// Voxel `v + d`, or `None` when it leaves the domain.
    pub fn offset(&self, v: [usize; 3], d: [i32; 3]) -> Option<[usize; 3]> {
        let mut out = [0; 3];
        for k in 0..3 {
            let c = v[k] as i64 + i64::from(d[k]);
            if c < 0 || c >= self.res[k] as i64 {
                return None;
            }
            out[k] = c as usize;
        }
        Some(out)
    }

    /// Voxel `v + d` clamped into the domain.
    pub fn clamped(&self, v: [usize; 3], d: [i32; 3]) -> [usize; 3] {
        let mut out = [0; 3];
        for k in 0..3 {
            let c = v[k] as i64 + i64::from(d[k]);
            out[k] = c.clamp(0, self.res[k] as i64 - 1) as usize;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Zero coefficients outside the domain.
    Dirichlet,
    /// Outside samples take the nearest in-domain coefficient.
    Neumann,
}

impl FromStr for Boundary {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "neumann" => Ok(Boundary::Neumann),
            other => Err(ProblemError::UnknownBoundary(other.to_string())),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
        })
    }
}

/// Medium and emission sampled at voxel centers.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub grid: Grid,
    pub sigma_t: Vec<f64>,
    pub sigma_s: Vec<f64>,
    /// Zonal phase coefficients `p^{l,0}`, constant in space; missing bands
    /// are zero.
    pub phase: Vec<f64>,
    pub emission: Vec<(ShIndex, Vec<f64>)>,
    pub bc: Boundary,
    /// Floor applied to sigma_t (0 when none was applied).
    pub floor: f64,
}

/// `p^{0,0}` of the normalized isotropic phase function.
pub fn isotropic_phase() -> Vec<f64> {
    vec![1.0 / (4.0 * PI).sqrt()]
}

impl ProblemSpec {
    pub fn homogeneous(name: &str, grid: Grid, sigma_t: f64, sigma_s: f64) -> Self {
        let n = grid.voxels();
        Self {
            name: name.to_string(),
            grid,
            sigma_t: vec![sigma_t; n],
            sigma_s: vec![sigma_s; n],
            phase: isotropic_phase(),
            emission: Vec::new(),
            bc: Boundary::Dirichlet,
            floor: 0.0,
        }
    }

    pub fn phase_coefficient(&self, l: i32) -> f64 {
        self.phase.get(l as usize).copied().unwrap_or(0.0)
    }

    pub fn emission_field(&self, i: ShIndex) -> Option<&[f64]> {
        self.emission
            .iter()
            .find(|(k, _)| *k == i)
            .map(|(_, v)| v.as_slice())
    }

    pub fn emission_mut(&mut self, i: ShIndex) -> &mut Vec<f64> {
        let n = self.grid.voxels();
        let pos = match self.emission.iter().position(|(k, _)| *k == i) {
            Some(p) => p,
            None => {
                self.emission.push((i, vec![0.0; n]));
                self.emission.len() - 1
            }
        };
        &mut self.emission[pos].1
    }

    /// Shape and physical consistency: field lengths, finiteness and
    /// `0 <= sigma_s <= sigma_t`.
    pub fn validate(&self) -> Result<(), ProblemError> {
        let n = self.grid.voxels();
        if n == 0 || !(self.grid.h > 0.0 && self.grid.h.is_finite()) {
            return Err(ProblemError::Invalid("empty grid".into()));
        }
        if self.sigma_t.len() != n || self.sigma_s.len() != n {
            return Err(ProblemError::Invalid("medium fields do not match the grid".into()));
        }
        if self.emission.iter().any(|(_, v)| v.len() != n) {
            return Err(ProblemError::Invalid("emission field does not match the grid".into()));
        }
        for (v, (&t, &s)) in self.sigma_t.iter().zip(&self.sigma_s).enumerate() {
            if !(t.is_finite() && s.is_finite()) || s < 0.0 || s > t {
                return Err(ProblemError::Invalid(format!(
                    "voxel {v}: need 0 <= sigma_s <= sigma_t, got sigma_s={s}, sigma_t={t}"
                )));
            }
        }
        if self
            .emission
            .iter()
            .any(|(_, q)| q.iter().any(|x| !x.is_finite()))
        {
            return Err(ProblemError::Invalid("emission is not finite".into()));
        }
        Ok(())
    }

    /// Solver admission: [`Self::validate`] plus strictly positive sigma_t.
    pub fn check_admissible(&self) -> Result<(), ProblemError> {
        self.validate()?;
        match self.sigma_t.iter().position(|&t| t <= 0.0) {
            Some(voxel) => Err(ProblemError::Vacuum {
                voxel,
                value: self.sigma_t[voxel],
            }),
            None => Ok(()),
        }
    }

    /// Total emitted power `∫∫ Q dω dV`.
    pub fn emitted_power(&self) -> f64 {
        let dv = self.grid.h.powi(self.grid.dim.count() as i32);
        self.emission_field(ShIndex { l: 0, m: 0 })
            .map(|q| q.iter().sum::<f64>() * (4.0 * PI).sqrt() * dv)
            .unwrap_or(0.0)
    }

    /// Voxel containing the emitter of the point-source problem, and the
    /// start of line profiles.
    pub fn center_voxel(&self) -> [usize; 3] {
        let r = self.grid.res;
        [r[0] / 2, r[1] / 2, r[2] / 2]
    }
}

/// `sigma_t = max(sigma_t, tau)`; sigma_s is untouched.
pub fn floor_sigma_t(spec: &ProblemSpec, tau: f64) -> ProblemSpec {
    let mut out = spec.clone();
    for t in &mut out.sigma_t {
        *t = t.max(tau);
    }
    out.floor = out.floor.max(tau);
    out
}

pub const CHECKERBOARD_RES: usize = 71;
pub const POINTSOURCE_RES: usize = 80;
pub const POINTSOURCE_EXTENT: f64 = 2.0;
pub const POINTSOURCE_SIGMA_T: f64 = 8.0;
pub const POINTSOURCE_ALBEDO: f64 = 0.9;

/// Whether unit block `(i, j)` of the 7×7 checkerboard is absorbing.
pub fn checkerboard_absorber(i: usize, j: usize) -> bool {
    (1..=5).contains(&i) && (1..=5).contains(&j) && (i + j).is_multiple_of(2) && (i, j) != (3, 3)
}

/// 7×7 lattice of unit blocks at `res`² voxels: absorbing blocks
/// (sigma_t = 10, sigma_s = 0) in a checkerboard over the inner 5×5, a unit
/// isotropic source in the center block, pure scattering (sigma_t =
/// sigma_s = 1) everywhere else.
pub fn make_checkerboard_with(res: usize) -> ProblemSpec {
    let grid = Grid::new(Dim::Two, res, 7.0);
    let mut spec = ProblemSpec::homogeneous("checkerboard", grid, 1.0, 1.0);
    let mut q = vec![0.0; grid.voxels()];
    for v in 0..grid.voxels() {
        let c = grid.center(grid.coords(v));
        let (i, j) = (c[0].floor() as usize, c[1].floor() as usize);
        if checkerboard_absorber(i, j) {
            spec.sigma_t[v] = 10.0;
            spec.sigma_s[v] = 0.0;
        }
        if (i, j) == (3, 3) {
            q[v] = 1.0 / (4.0 * PI).sqrt();
        }
    }
    spec.emission.push((ShIndex { l: 0, m: 0 }, q));
    spec
}

pub fn make_checkerboard() -> ProblemSpec {
    make_checkerboard_with(CHECKERBOARD_RES)
}

/// Homogeneous cube with a unit isotropic emitter in the voxel at
/// `res / 2` along each axis.
pub fn make_pointsource_with(res: usize, extent: f64) -> Result<ProblemSpec, ProblemError> {
    if res < 8 {
        return Err(ProblemError::Invalid(format!("point source needs res >= 8 (got {res})")));
    }
    let grid = Grid::new(Dim::Three, res, extent);
    let mut spec = ProblemSpec::homogeneous(
        "pointsource",
        grid,
        POINTSOURCE_SIGMA_T,
        POINTSOURCE_ALBEDO * POINTSOURCE_SIGMA_T,
    );
    let c = spec.center_voxel();
    let q = spec.emission_mut(ShIndex { l: 0, m: 0 });
    q[grid.index(c)] = 1.0 / (grid.h.powi(3) * (4.0 * PI).sqrt());
    Ok(spec)
}

pub fn make_pointsource(res: usize) -> Result<ProblemSpec, ProblemError> {
    make_pointsource_with(res, POINTSOURCE_EXTENT)
}

pub const HETEROGENEOUS_RES: usize = 32;
pub const HETEROGENEOUS_MAX_SIGMA_T: f64 = 20.0;
/// Target fraction of vacuum voxels.
pub const HETEROGENEOUS_VACUUM: f64 = 0.2;

/// Procedural cloud on the unit cube: fractal value noise thresholded so a
/// fixed fraction of voxels is vacuum, sigma_t in [0, 20], albedo 0.9, and a
/// Gaussian emitter near the x = 0 face.
pub fn make_heterogeneous_with(res: usize, seed: u64) -> ProblemSpec {
    let grid = Grid::new(Dim::Three, res, 1.0);
    let n = grid.voxels();
    let field = noise::ValueNoise::new(seed, 6);
    let density: Vec<f64> = (0..n)
        .map(|v| {
            let c = grid.center(grid.coords(v));
            field.fractal(c, 3)
        })
        .collect();
    let mut sorted = density.clone();
    sorted.sort_by(f64::total_cmp);
    let cut = sorted[((n as f64 * HETEROGENEOUS_VACUUM) as usize).min(n - 1)];
    let top = sorted[n - 1];
    let mut spec = ProblemSpec::homogeneous("heterogeneous", grid, 0.0, 0.0);
    for v in 0..n {
        let d = if top > cut {
            ((density[v] - cut) / (top - cut)).max(0.0)
        } else {
            0.0
        };
        spec.sigma_t[v] = HETEROGENEOUS_MAX_SIGMA_T * d;
        spec.sigma_s[v] = POINTSOURCE_ALBEDO * spec.sigma_t[v];
    }
    let q = spec.emission_mut(ShIndex { l: 0, m: 0 });
    let mut total = 0.0;
    for (v, qv) in q.iter_mut().enumerate() {
        let c = grid.center(grid.coords(v));
        let r2 = (c[0] - 0.15).powi(2) + (c[1] - 0.5).powi(2) + (c[2] - 0.5).powi(2);
        *qv = (-r2 / (2.0 * 0.08f64.powi(2))).exp();
        total += *qv;
    }
    // unit emitted power
    let norm = 1.0 / (total * grid.h.powi(3) * (4.0 * PI).sqrt());
    q.iter_mut().for_each(|x| *x *= norm);
    spec
}

pub fn make_heterogeneous(seed: u64) -> ProblemSpec {
    make_heterogeneous_with(HETEROGENEOUS_RES, seed)
}

pub const PROBLEMS: [&str; 3] = ["checkerboard", "pointsource", "heterogeneous"];

/// Builds a named problem. `res` overrides the default resolution.
pub fn make_problem(name: &str, res: Option<usize>, seed: u64) -> Result<ProblemSpec, ProblemError> {
    match name {
        "checkerboard" => Ok(make_checkerboard_with(res.unwrap_or(CHECKERBOARD_RES))),
        "pointsource" => make_pointsource(res.unwrap_or(POINTSOURCE_RES)),
        "heterogeneous" => Ok(make_heterogeneous_with(res.unwrap_or(HETEROGENEOUS_RES), seed)),
        other => Err(ProblemError::UnknownProblem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(spec: &ProblemSpec, x: f64, y: f64) -> f64 {
        let g = spec.grid;
        let v = [(x / g.h) as usize, (y / g.h) as usize, 0];
        spec.sigma_t[g.index(v)]
    }

    #[test]
    fn checkerboard_layout() {
        let s = make_checkerboard();
        assert_eq!(s.grid.res, [71, 71, 1]);
        assert_eq!(at(&s, 3.5, 3.5), 1.0);
        assert_eq!(at(&s, 1.5, 1.5), 10.0);
        assert_eq!(at(&s, 2.5, 1.5), 1.0);
        assert_eq!(at(&s, 0.5, 0.5), 1.0);
        // enumerate the mask: 12 absorbers
        let count = (0..7)
            .flat_map(|i| (0..7).map(move |j| (i, j)))
            .filter(|&(i, j)| checkerboard_absorber(i, j))
            .count();
        assert_eq!(count, 12);
        s.validate().unwrap();
    }

    #[test]
    fn checkerboard_is_mirror_symmetric() {
        let s = make_checkerboard();
        let g = s.grid;
        for v in 0..g.voxels() {
            let [x, y, z] = g.coords(v);
            let w = g.index([y, x, z]);
            assert_eq!(s.sigma_t[v], s.sigma_t[w]);
            assert_eq!(s.sigma_s[v], s.sigma_s[w]);
        }
    }

    #[test]
    fn pointsource_power() {
        let s = make_pointsource(16).unwrap();
        assert!((s.emitted_power() - 1.0).abs() < 1e-12);
        assert!(s.sigma_s.iter().all(|&x| (x - 7.2).abs() < 1e-15));
        assert_eq!(make_pointsource(80).unwrap().grid.res, [80; 3]);
        assert!(make_pointsource(4).is_err());
    }

    #[test]
    fn heterogeneous_is_seeded() {
        let a = make_heterogeneous_with(16, 7);
        let b = make_heterogeneous_with(16, 7);
        let c = make_heterogeneous_with(16, 8);
        assert_eq!(a, b);
        assert_ne!(a.sigma_t, c.sigma_t);
        let vac = a.sigma_t.iter().filter(|&&t| t == 0.0).count() as f64 / a.sigma_t.len() as f64;
        assert!((0.05..=0.40).contains(&vac), "{vac}");
        assert!(a.sigma_t.iter().all(|&t| (0.0..=20.0).contains(&t)));
        a.validate().unwrap();
        assert!(matches!(a.check_admissible(), Err(ProblemError::Vacuum { .. })));
        assert!((a.emitted_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn floor_rule() {
        let mut s = make_heterogeneous_with(8, 1);
        s.sigma_t[0] = 0.0;
        s.sigma_s[0] = 0.0;
        s.sigma_t[1] = 8.0;
        let f = floor_sigma_t(&s, 0.5);
        assert_eq!(f.sigma_t[0], 0.5);
        assert_eq!(f.sigma_t[1], 8.0);
        assert_eq!(f.sigma_s, s.sigma_s);
        assert_eq!(floor_sigma_t(&f, 0.5), f);
        f.check_admissible().unwrap();
    }

    #[test]
    fn grid_indexing() {
        let g = Grid::new(Dim::Three, 5, 1.0);
        for v in 0..g.voxels() {
            assert_eq!(g.index(g.coords(v)), v);
        }
        assert_eq!(g.offset([0, 0, 0], [-1, 0, 0]), None);
        assert_eq!(g.clamped([0, 4, 0], [-1, 1, 0]), [0, 4, 0]);
    }
}
