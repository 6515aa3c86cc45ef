//! Real-valued P_N moment equations and the classical diffusion equation as
//! expression trees.
//!
//! Each equation is stored as `LHS - RHS`, so the emission term sits in the
//! residual and canonical factorization reads off a matrix row plus its
//! right-hand side directly.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use thiserror::Error;

use crate::cas::{Axis, Expr, Param};
use crate::sh::{beta_x, beta_y, coupling, lambda, Coupling, ShError, ShIndex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PnError {
    #[error("truncation order must be at least 1 (got {0})")]
    InvalidOrder(i32),
    #[error("({l},{m}) is not an unknown of the {dim:?} system")]
    OutOfScope { l: i32, m: i32, dim: Dim },
    #[error(transparent)]
    Coupling(#[from] ShError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn count(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn axes(self) -> &'static [Axis] {
        match self {
            Dim::Two => &Axis::ALL[..2],
            Dim::Three => &Axis::ALL,
        }
    }

    /// Whether `(l, m)` is carried by the system. In 2D (z-independent
    /// fields) every moment with odd `l + m` vanishes.
    pub fn carries(self, l: i32, m: i32) -> bool {
        match self {
            Dim::Three => true,
            Dim::Two => (l + m).rem_euclid(2) == 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EquationKind {
    Pn,
    Diffusion,
}

#[derive(Clone, Debug)]
pub struct EquationSet {
    pub kind: EquationKind,
    pub order: i32,
    pub dim: Dim,
    pub equations: Vec<(ShIndex, Expr)>,
    unknowns: Vec<ShIndex>,
    index: HashMap<ShIndex, usize>,
}

impl EquationSet {
    fn new(kind: EquationKind, order: i32, dim: Dim, equations: Vec<(ShIndex, Expr)>) -> Self {
        let unknowns: Vec<ShIndex> = equations.iter().map(|(i, _)| *i).collect();
        let index = unknowns.iter().enumerate().map(|(k, i)| (*i, k)).collect();
        Self {
            kind,
            order,
            dim,
            equations,
            unknowns,
            index,
        }
    }

    /// Unknowns in row order.
    pub fn unknowns(&self) -> &[ShIndex] {
        &self.unknowns
    }

    pub fn unknown_index(&self, i: ShIndex) -> Option<usize> {
        self.index.get(&i).copied()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn equation(&self, i: ShIndex) -> Option<&Expr> {
        self.unknown_index(i).map(|k| &self.equations[k].1)
    }

    /// One `l,m: expression` line per equation.
    pub fn dump(&self) -> String {
        let mut s = format!(
            "# {:?} order={} dim={}\n",
            self.kind,
            self.order,
            self.dim.count()
        );
        for (i, e) in &self.equations {
            s.push_str(&format!("{i}: {e} = 0\n"));
        }
        s
    }
}

/// Number of unknowns per voxel.
pub fn unknown_count(order: i32, dim: Dim) -> usize {
    let n = order as usize;
    match dim {
        Dim::Three => (n + 1) * (n + 1),
        Dim::Two => (n + 1) * (n + 2) / 2,
    }
}

/// Position of `(l, m)` in the per-voxel unknown ordering.
pub fn sh_flat_index(l: i32, m: i32, dim: Dim) -> Result<usize, PnError> {
    if l < 0 || m.abs() > l || !dim.carries(l, m) {
        return Err(PnError::OutOfScope { l, m, dim });
    }
    Ok(match dim {
        Dim::Three => (l * (l + 1) + m) as usize,
        Dim::Two => (l * (l + 1) / 2 + (m + l) / 2) as usize,
    })
}

pub fn sh_from_flat_index(k: usize, dim: Dim) -> ShIndex {
    match dim {
        Dim::Three => ShIndex::from_flat(k),
        Dim::Two => {
            let mut l = (((8 * k + 1) as f64).sqrt() as i32 - 1) / 2;
            while (l + 1) * (l + 2) / 2 <= k as i32 {
                l += 1;
            }
            while l * (l + 1) / 2 > k as i32 {
                l -= 1;
            }
            let m = 2 * (k as i32 - l * (l + 1) / 2) - l;
            ShIndex { l, m }
        }
    }
}

struct Transport {
    order: i32,
    dim: Dim,
    terms: Vec<Expr>,
}

impl Transport {
    /// Adds `scale · κ(l', m') · ∂_axis L^{lt,mt}` unless the target is
    /// truncated away or the axis does not exist.
    fn term(&mut self, scale: f64, kappa: (Coupling, i32, i32), axis: Axis, lt: i32, mt: i32) -> Result<(), PnError> {
        if !self.dim.axes().contains(&axis) || ShIndex::checked(lt, mt, self.order).is_none() {
            return Ok(());
        }
        let w = scale * coupling(kappa.0, kappa.1, kappa.2)?;
        if w != 0.0 {
            self.terms
                .push(Expr::product([Expr::num(w), Expr::deriv(axis, Expr::radiance(lt, mt))]));
        }
        Ok(())
    }
}

/// Transport terms `∫ Y^{l,m} (ω·∇) L̂ dω` of the moment equation for `(l, m)`.
fn transport_terms(l: i32, m: i32, order: i32, dim: Dim) -> Result<Vec<Expr>, PnError> {
    use Coupling::*;
    let mut t = Transport {
        order,
        dim,
        terms: Vec::new(),
    };
    // The x/y signs below are those of a right-handed frame with the
    // Condon–Shortley phase in the complex basis.
    if m == 0 {
        let r = FRAC_1_SQRT_2;
        t.term(-r, (C, l - 1, -1), Axis::X, l - 1, 1)?;
        t.term(r, (D, l + 1, -1), Axis::X, l + 1, 1)?;
        t.term(-r, (C, l - 1, -1), Axis::Y, l - 1, -1)?;
        t.term(r, (D, l + 1, -1), Axis::Y, l + 1, -1)?;
        t.term(1.0, (A, l - 1, 0), Axis::Z, l - 1, 0)?;
        t.term(1.0, (B, l + 1, 0), Axis::Z, l + 1, 0)?;
    } else {
        // s = +1 for m < 0 (upper sign), -1 for m > 0 (lower sign)
        let s = if m < 0 { 1 } else { -1 };
        let sf = f64::from(s);
        let pm = s * m;
        let (bx, by) = (beta_x(m), beta_y(m));
        t.term(-0.5, (C, l - 1, pm - 1), Axis::X, l - 1, m - s)?;
        t.term(0.5, (D, l + 1, pm - 1), Axis::X, l + 1, m - s)?;
        t.term(0.5 * bx, (E, l - 1, pm + 1), Axis::X, l - 1, m + s)?;
        t.term(-0.5 * bx, (F, l + 1, pm + 1), Axis::X, l + 1, m + s)?;
        t.term(0.5 * sf, (C, l - 1, pm - 1), Axis::Y, l - 1, -m + s)?;
        t.term(-0.5 * sf, (D, l + 1, pm - 1), Axis::Y, l + 1, -m + s)?;
        t.term(0.5 * sf * by, (E, l - 1, pm + 1), Axis::Y, l - 1, -m - s)?;
        t.term(-0.5 * sf * by, (F, l + 1, pm + 1), Axis::Y, l + 1, -m - s)?;
        t.term(1.0, (A, l - 1, pm), Axis::Z, l - 1, m)?;
        t.term(1.0, (B, l + 1, pm), Axis::Z, l + 1, m)?;
    }
    Ok(t.terms)
}

/// The transport part of the `(l, m)` equation alone (no collision,
/// scattering or emission).
pub fn transport_expr(l: i32, m: i32, order: i32, dim: Dim) -> Result<Expr, PnError> {
    Ok(Expr::sum(transport_terms(l, m, order, dim)?))
}

/// Builds the real P_N system for truncation order `order`.
pub fn build_pn(order: i32, dim: Dim) -> Result<EquationSet, PnError> {
    if order < 1 {
        return Err(PnError::InvalidOrder(order));
    }
    let mut equations = Vec::new();
    for i in ShIndex::all(order).filter(|i| dim.carries(i.l, i.m)) {
        let (l, m) = (i.l, i.m);
        let u = Expr::radiance(l, m);
        let mut terms = transport_terms(l, m, order, dim)?;
        terms.push(Expr::product([Expr::field(Param::SigmaT), u.clone()]));
        terms.push(Expr::product([
            Expr::num(-lambda(l)),
            Expr::field(Param::SigmaS),
            Expr::field(Param::Phase(l)),
            u,
        ]));
        terms.push(-Expr::field(Param::Emission(i)));
        equations.push((i, Expr::sum(terms)));
    }
    Ok(EquationSet::new(EquationKind::Pn, order, dim, equations))
}

/// Classical diffusion, the collapsed P_1 system:
/// `-∇·((3σ_t)^{-1} ∇L^{0,0}) + (σ_t - λ_0 σ_s p^{0,0}) L^{0,0} = Q^{0,0}`.
pub fn build_cda(dim: Dim) -> EquationSet {
    let u = Expr::radiance(0, 0);
    let diffusivity = Expr::pow(Expr::product([Expr::num(3.0), Expr::field(Param::SigmaT)]), -1);
    let mut terms: Vec<Expr> = dim
        .axes()
        .iter()
        .map(|&a| {
            -Expr::deriv(
                a,
                Expr::product([diffusivity.clone(), Expr::deriv(a, u.clone())]),
            )
        })
        .collect();
    let absorption = Expr::sum([
        Expr::field(Param::SigmaT),
        Expr::product([
            Expr::num(-lambda(0)),
            Expr::field(Param::SigmaS),
            Expr::field(Param::Phase(0)),
        ]),
    ]);
    terms.push(Expr::product([absorption, u]));
    terms.push(-Expr::field(Param::Emission(ShIndex { l: 0, m: 0 })));
    EquationSet::new(
        EquationKind::Diffusion,
        0,
        dim,
        vec![(ShIndex { l: 0, m: 0 }, Expr::sum(terms))],
    )
}
