//! Staggered-grid discretization and compilation of an [`EquationSet`] into
//! a [`StencilProgram`].
//!
//! All positions are in doubled units relative to the center of a
//! hypothetical voxel, so a face center sits at offset 1 along its axis and
//! the neighbouring voxel center at offset 2.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;

use thiserror::Error;

use crate::cas::{
    expand_fold, factorize_canonical, render_row_source, unknown_name, Axis, CanonicalForm,
    CasError, Expr, FieldSample, HalfOffset, Unknown,
};
use crate::pn::{Dim, EquationKind, EquationSet};
use crate::sh::ShIndex;

/// Name of the grid-spacing symbol in compiled coefficients.
pub const SPACING: &str = "h";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StencilError {
    #[error("no staggered placement puts {from} and {to} half a cell apart along {axis} only")]
    Placement {
        from: ShIndex,
        to: ShIndex,
        axis: &'static str,
    },
    #[error("unknown {0} has no placement")]
    Unplaced(ShIndex),
    #[error("sample of {0} at {1} is not on its home grid")]
    OffGrid(ShIndex, HalfOffset),
    #[error(transparent)]
    Cas(#[from] CasError),
}

/// Home grid of every unknown, as an offset in `{0, 1}` per axis (doubled
/// units). Parameter fields always live at voxel centers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StaggeredPlacement {
    dim: Dim,
    offsets: BTreeMap<ShIndex, HalfOffset>,
}

impl StaggeredPlacement {
    /// Every unknown at the voxel center.
    pub fn collocated(unknowns: &[ShIndex], dim: Dim) -> Self {
        Self {
            dim,
            offsets: unknowns.iter().map(|i| (*i, HalfOffset::ZERO)).collect(),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn offset(&self, i: ShIndex) -> Option<HalfOffset> {
        self.offsets.get(&i).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ShIndex, HalfOffset)> + '_ {
        self.offsets.iter().map(|(i, o)| (*i, *o))
    }

    /// Distinct grids in use.
    pub fn grids(&self) -> BTreeSet<HalfOffset> {
        self.offsets.values().copied().collect()
    }

    pub fn is_staggered(&self) -> bool {
        self.offsets.values().any(|o| !o.is_zero())
    }
}

/// First-derivative couplings `(row, target, axis)` outside any other
/// derivative.
fn couplings(eqset: &EquationSet) -> Vec<(ShIndex, ShIndex, Axis)> {
    fn walk(e: &Expr, row: ShIndex, out: &mut Vec<(ShIndex, ShIndex, Axis)>) {
        match e {
            Expr::Deriv(a, c) => {
                if let Expr::Unknown(u) = c.as_ref() {
                    out.push((row, u.index, *a));
                }
            }
            _ => e.children().iter().for_each(|c| walk(c, row, out)),
        }
    }
    let mut out = Vec::new();
    for (row, e) in &eqset.equations {
        walk(e, *row, &mut out);
    }
    out
}

/// Two-colors the coupling graph per axis, seeded with `(0,0)` at the voxel
/// center, so that every derivative coupling spans exactly half a cell along
/// its own axis and nothing along the others.
pub fn assign_placement(eqset: &EquationSet) -> Result<StaggeredPlacement, StencilError> {
    let mut adj: BTreeMap<ShIndex, Vec<(ShIndex, Axis)>> = BTreeMap::new();
    for (a, b, axis) in couplings(eqset) {
        adj.entry(a).or_default().push((b, axis));
        adj.entry(b).or_default().push((a, axis));
    }
    let mut offsets: BTreeMap<ShIndex, HalfOffset> = BTreeMap::new();
    let seeds = std::iter::once(ShIndex { l: 0, m: 0 }).chain(eqset.unknowns().iter().copied());
    for seed in seeds {
        if offsets.contains_key(&seed) || eqset.unknown_index(seed).is_none() {
            continue;
        }
        offsets.insert(seed, HalfOffset::ZERO);
        let mut queue = VecDeque::from([seed]);
        while let Some(u) = queue.pop_front() {
            let ou = offsets[&u];
            for &(v, axis) in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                let mut want = ou;
                want.0[axis.index()] ^= 1;
                match offsets.get(&v) {
                    None => {
                        offsets.insert(v, want);
                        queue.push_back(v);
                    }
                    Some(&have) if have == want => {}
                    Some(_) => {
                        return Err(StencilError::Placement {
                            from: u,
                            to: v,
                            axis: axis.name(),
                        })
                    }
                }
            }
        }
    }
    Ok(StaggeredPlacement {
        dim: eqset.dim,
        offsets,
    })
}

/// One discretized equation, evaluated at the home location of its unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteRow {
    pub unknown: ShIndex,
    pub at: HalfOffset,
    pub expr: Expr,
}

struct Discretizer<'a> {
    placement: &'a StaggeredPlacement,
    inv_h: Expr,
}

impl Discretizer<'_> {
    fn disc(&self, e: &Expr, pos: HalfOffset) -> Result<Expr, StencilError> {
        Ok(match e {
            Expr::Deriv(a, c) => Expr::product([
                Expr::sum([
                    self.disc(c, pos.shifted(*a, 1))?,
                    -self.disc(c, pos.shifted(*a, -1))?,
                ]),
                self.inv_h.clone(),
            ]),
            Expr::Unknown(u) => {
                let home = self
                    .placement
                    .offset(u.index)
                    .ok_or(StencilError::Unplaced(u.index))?;
                let p = add(pos, u.pos);
                interpolate(home, p, &|q| Expr::Unknown(u.at(q)))
            }
            Expr::Field(f) => {
                let p = add(pos, f.pos);
                interpolate(HalfOffset::ZERO, p, &|q| {
                    Expr::Field(FieldSample {
                        param: f.param,
                        pos: q,
                    })
                })
            }
            Expr::Add(c) => Expr::sum(c.iter().map(|t| self.disc(t, pos)).collect::<Result<Vec<_>, _>>()?),
            Expr::Mul(c) => {
                Expr::product(c.iter().map(|t| self.disc(t, pos)).collect::<Result<Vec<_>, _>>()?)
            }
            Expr::Pow(b, k) => Expr::pow(self.disc(b, pos)?, *k),
            other => other.clone(),
        })
    }
}

fn add(a: HalfOffset, b: HalfOffset) -> HalfOffset {
    HalfOffset([a.0[0] + b.0[0], a.0[1] + b.0[1], a.0[2] + b.0[2]])
}

/// Averages over the nearest home-grid sites in every axis where `p` is off
/// the grid.
fn interpolate(home: HalfOffset, p: HalfOffset, leaf: &dyn Fn(HalfOffset) -> Expr) -> Expr {
    for axis in Axis::ALL {
        let k = axis.index();
        if (p.0[k] - home.0[k]).rem_euclid(2) == 1 {
            return Expr::product([
                Expr::num(0.5),
                Expr::sum([
                    interpolate(home, p.shifted(axis, 1), leaf),
                    interpolate(home, p.shifted(axis, -1), leaf),
                ]),
            ]);
        }
    }
    leaf(p)
}

/// Replaces every derivative by a centered two-point difference and every
/// off-grid sample by an average, evaluating each equation at the home
/// location of its own unknown.
pub fn discretize(
    eqset: &EquationSet,
    placement: &StaggeredPlacement,
) -> Result<Vec<DiscreteRow>, StencilError> {
    let d = Discretizer {
        placement,
        inv_h: Expr::pow(Expr::sym(SPACING), -1),
    };
    eqset
        .equations
        .iter()
        .map(|(i, e)| {
            let at = placement.offset(*i).ok_or(StencilError::Unplaced(*i))?;
            Ok(DiscreteRow {
                unknown: *i,
                at,
                expr: d.disc(e, at)?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StencilEntry {
    pub target: ShIndex,
    /// Position of the index into `StencilProgram::unknowns`.
    pub target_index: usize,
    /// Sample position in doubled units.
    pub pos: HalfOffset,
    /// Voxel holding the sample, relative to the row's voxel.
    pub voxel: [i32; 3],
    pub coefficient: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StencilRow {
    pub unknown: ShIndex,
    pub at: HalfOffset,
    pub entries: Vec<StencilEntry>,
    /// Right-hand side, i.e. the negated residual of the canonical form.
    pub rhs: Expr,
}

impl StencilRow {
    pub fn canonical(&self) -> CanonicalForm {
        CanonicalForm {
            entries: self
                .entries
                .iter()
                .map(|e| (Unknown::radiance(e.target).at(e.pos), e.coefficient.clone()))
                .collect(),
            residual: expand_fold(&-self.rhs.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StencilProgram {
    pub kind: EquationKind,
    pub order: i32,
    pub dim: Dim,
    pub unknowns: Vec<ShIndex>,
    pub placement: StaggeredPlacement,
    pub rows: Vec<StencilRow>,
}

/// Factorizes every discrete row into stencil entries plus right-hand side.
pub fn compile(
    eqset: &EquationSet,
    placement: &StaggeredPlacement,
    rows: &[DiscreteRow],
) -> Result<StencilProgram, StencilError> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let cf = factorize_canonical(&row.expr)?;
        let mut entries = Vec::with_capacity(cf.entries.len());
        for (u, coefficient) in cf.entries {
            let home = placement.offset(u.index).ok_or(StencilError::Unplaced(u.index))?;
            let target_index = eqset
                .unknown_index(u.index)
                .ok_or(StencilError::Unplaced(u.index))?;
            let mut voxel = [0; 3];
            for k in 0..3 {
                let d = u.pos.0[k] - home.0[k];
                if d.rem_euclid(2) != 0 {
                    return Err(StencilError::OffGrid(u.index, u.pos));
                }
                voxel[k] = d / 2;
            }
            entries.push(StencilEntry {
                target: u.index,
                target_index,
                pos: u.pos,
                voxel,
                coefficient,
            });
        }
        out.push(StencilRow {
            unknown: row.unknown,
            at: row.at,
            entries,
            rhs: expand_fold(&-cf.residual),
        });
    }
    Ok(StencilProgram {
        kind: eqset.kind,
        order: eqset.order,
        dim: eqset.dim,
        unknowns: eqset.unknowns().to_vec(),
        placement: placement.clone(),
        rows: out,
    })
}

/// Placement, discretization and compilation in one step.
pub fn compile_equations(eqset: &EquationSet) -> Result<StencilProgram, StencilError> {
    let placement = assign_placement(eqset)?;
    let rows = discretize(eqset, &placement)?;
    compile(eqset, &placement, &rows)
}

impl StencilProgram {
    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    /// Largest voxel offset of any entry, per axis.
    pub fn reach(&self) -> [i32; 3] {
        let mut r = [0; 3];
        for e in self.rows.iter().flat_map(|r| &r.entries) {
            for k in 0..3 {
                r[k] = r[k].max(e.voxel[k].abs());
            }
        }
        r
    }

    /// Text dump:
    ///
    /// ```text
    /// stencil <kind> order=<N> dim=<d> unknowns=<U>
    /// place <l,m> <offset>
    /// row <l,m> at <offset>
    ///   <name>@<offset> voxel <offset> : <coefficient>
    ///   rhs : <expr>
    /// ```
    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "stencil {:?} order={} dim={} unknowns={}",
            self.kind,
            self.order,
            self.dim.count(),
            self.unknowns.len()
        )
        .unwrap();
        for i in &self.unknowns {
            writeln!(s, "place {i} {}", self.placement.offset(*i).unwrap_or(HalfOffset::ZERO)).unwrap();
        }
        for row in &self.rows {
            writeln!(s, "row {} at {}", row.unknown, row.at).unwrap();
            for e in &row.entries {
                let u = Unknown::radiance(e.target).at(e.pos);
                writeln!(
                    s,
                    "  {}{} voxel {} : {}",
                    unknown_name(&u),
                    e.pos,
                    HalfOffset(e.voxel),
                    e.coefficient
                )
                .unwrap();
            }
            writeln!(s, "  rhs : {}", row.rhs).unwrap();
        }
        s
    }

    /// Straight-line Rust for every row: `row_<k>` fills `out` with the
    /// entry coefficients in order followed by the residual (the negated
    /// right-hand side).
    pub fn to_source(&self) -> String {
        let mut s = String::new();
        for (k, row) in self.rows.iter().enumerate() {
            writeln!(s, "// row {}", row.unknown).unwrap();
            s.push_str(&render_row_source(&format!("row_{k}"), &row.canonical()));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cas::{evaluate_with, Env, Param};
    use crate::pn::{build_cda, build_pn};

    fn at(x: i32, y: i32, z: i32) -> HalfOffset {
        HalfOffset([x, y, z])
    }

    #[test]
    fn p1_mac_layout() {
        let p = assign_placement(&build_pn(1, Dim::Three).unwrap()).unwrap();
        assert_eq!(p.offset(ShIndex { l: 0, m: 0 }), Some(at(0, 0, 0)));
        assert_eq!(p.offset(ShIndex { l: 1, m: 1 }), Some(at(1, 0, 0)));
        assert_eq!(p.offset(ShIndex { l: 1, m: -1 }), Some(at(0, 1, 0)));
        assert_eq!(p.offset(ShIndex { l: 1, m: 0 }), Some(at(0, 0, 1)));
    }

    #[test]
    fn two_dimensional_grids() {
        let p1 = assign_placement(&build_pn(1, Dim::Two).unwrap()).unwrap();
        assert_eq!(p1.grids().len(), 3);
        for n in 2..=5 {
            let p = assign_placement(&build_pn(n, Dim::Two).unwrap()).unwrap();
            assert_eq!(p.grids().len(), 4);
        }
    }

    #[test]
    fn placement_matches_parity_rule() {
        for n in 1..=6 {
            let p = assign_placement(&build_pn(n, Dim::Three).unwrap()).unwrap();
            assert!(p.grids().len() <= 8);
            for (i, o) in p.iter() {
                let px = i32::from(i.m != 0 && ((i.m.abs() % 2 == 1) != (i.m < 0)));
                let py = i32::from(i.m < 0);
                let pz = (i.l + i.m.abs()) % 2;
                assert_eq!(o, at(px, py, pz), "{i}");
            }
        }
    }

    #[test]
    fn derivative_couplings_straddle() {
        for n in 1..=5 {
            let set = build_pn(n, Dim::Three).unwrap();
            let p = assign_placement(&set).unwrap();
            for (a, b, axis) in couplings(&set) {
                let (oa, ob) = (p.offset(a).unwrap(), p.offset(b).unwrap());
                for k in 0..3 {
                    assert_eq!(oa.0[k] != ob.0[k], k == axis.index());
                }
            }
        }
    }

    #[test]
    fn staggered_difference() {
        let set = build_pn(1, Dim::Three).unwrap();
        let p = assign_placement(&set).unwrap();
        let d = Discretizer {
            placement: &p,
            inv_h: Expr::pow(Expr::sym(SPACING), -1),
        };
        let e = d
            .disc(&Expr::deriv(Axis::X, Expr::radiance(1, 1)), HalfOffset::ZERO)
            .unwrap();
        let u = |x| Expr::Unknown(Unknown::radiance(ShIndex { l: 1, m: 1 }).at(at(x, 0, 0)));
        let want = Expr::product([
            Expr::sum([u(1), -u(-1)]),
            Expr::pow(Expr::sym("h"), -1),
        ]);
        assert_eq!(expand_fold(&e), expand_fold(&want));
    }

    #[test]
    fn field_on_face_is_averaged() {
        let p = StaggeredPlacement::collocated(&[], Dim::Three);
        let d = Discretizer {
            placement: &p,
            inv_h: Expr::sym("h"),
        };
        let e = d.disc(&Expr::field(Param::SigmaT), at(1, 0, 0)).unwrap();
        let s = |x| Expr::Field(FieldSample { param: Param::SigmaT, pos: at(x, 0, 0) });
        assert_eq!(expand_fold(&e), expand_fold(&(0.5 * s(0) + 0.5 * s(2))));
    }

    struct Uniform {
        h: f64,
        sigma_t: f64,
    }

    impl Env for Uniform {
        fn symbol(&self, _: &str) -> Option<f64> {
            Some(self.h)
        }
        fn unknown(&self, _: &Unknown, _: [u8; 3]) -> Option<f64> {
            None
        }
        fn field(&self, f: &FieldSample, _: [u8; 3]) -> Option<f64> {
            Some(match f.param {
                Param::SigmaT => self.sigma_t,
                _ => 0.0,
            })
        }
    }

    #[test]
    fn cda_reduces_to_laplacian_pattern() {
        let set = build_cda(Dim::Two);
        let prog = compile_equations(&set).unwrap();
        let env = Uniform { h: 0.5, sigma_t: 2.0 };
        let scale = 1.0 / (3.0 * 2.0 * 0.25);
        let row = &prog.rows[0];
        assert_eq!(row.entries.len(), 5);
        for e in &row.entries {
            let w = evaluate_with(&e.coefficient, &env).unwrap();
            // the center also carries the absorption term sigma_t
            let w = if e.voxel == [0, 0, 0] { w - 2.0 } else { w };
            let want = if e.voxel == [0, 0, 0] { 4.0 } else { -1.0 };
            assert!((w - want * scale).abs() < 1e-12, "{:?} {w}", e.voxel);
        }
    }

    #[test]
    fn p1_center_row_has_seven_entries() {
        let prog = compile_equations(&build_pn(1, Dim::Three).unwrap()).unwrap();
        let row = &prog.rows[0];
        assert_eq!(row.entries.len(), 7);
        assert_eq!(prog.reach(), [1, 1, 1]);
    }

    #[test]
    fn compile_is_deterministic() {
        let set = build_pn(3, Dim::Three).unwrap();
        let a = compile_equations(&set).unwrap().dump();
        let b = compile_equations(&set).unwrap().dump();
        assert_eq!(a, b);
    }

    #[test]
    fn coefficients_never_reference_unknowns() {
        let prog = compile_equations(&build_pn(4, Dim::Three).unwrap()).unwrap();
        for e in prog.rows.iter().flat_map(|r| &r.entries) {
            assert!(!e.coefficient.contains_unknown());
            assert!(e.voxel.iter().all(|v| v.abs() <= 1));
        }
    }
}
