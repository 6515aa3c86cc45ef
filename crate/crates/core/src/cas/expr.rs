use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

use crate::sh::ShIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Position relative to the stencil-space origin (the row voxel's center) in
/// doubled units: `1` is half a cell. Staggered locations are exact integers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfOffset(pub [i32; 3]);

impl HalfOffset {
    pub const ZERO: HalfOffset = HalfOffset([0; 3]);

    pub fn shifted(self, axis: Axis, by: i32) -> Self {
        let mut p = self.0;
        p[axis.index()] += by;
        HalfOffset(p)
    }

    pub fn is_zero(self) -> bool {
        self.0 == [0; 3]
    }
}

impl fmt::Display for HalfOffset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// A sampled unknown coefficient field, e.g. `L^{l,m}` at a position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Unknown {
    pub field: Arc<str>,
    pub index: ShIndex,
    pub pos: HalfOffset,
}

impl Unknown {
    pub fn radiance(index: ShIndex) -> Self {
        Self {
            field: Arc::from("L"),
            index,
            pos: HalfOffset::ZERO,
        }
    }

    pub fn at(&self, pos: HalfOffset) -> Self {
        Self {
            pos,
            ..self.clone()
        }
    }
}

/// Medium parameter fields. All of them live at voxel centers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    SigmaT,
    SigmaS,
    /// Zonal phase function coefficient `p^{l,0}`.
    Phase(i32),
    /// Emission coefficient `Q^{l,m}`.
    Emission(ShIndex),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldSample {
    pub param: Param,
    pub pos: HalfOffset,
}

impl FieldSample {
    pub fn new(param: Param) -> Self {
        Self {
            param,
            pos: HalfOffset::ZERO,
        }
    }
}

/// Immutable expression tree.
#[derive(Clone, Debug)]
pub enum Expr {
    Num(f64),
    Sym(Arc<str>),
    Unknown(Unknown),
    Field(FieldSample),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, i32),
    Deriv(Axis, Box<Expr>),
    Delta(i32, i32),
}

impl Expr {
    pub fn num(v: f64) -> Self {
        // -0.0 and 0.0 must compare and hash equal
        Expr::Num(if v == 0.0 { 0.0 } else { v })
    }

    pub fn sym(name: &str) -> Self {
        Expr::Sym(Arc::from(name))
    }

    pub fn unknown(u: Unknown) -> Self {
        Expr::Unknown(u)
    }

    pub fn radiance(l: i32, m: i32) -> Self {
        Expr::Unknown(Unknown::radiance(ShIndex { l, m }))
    }

    pub fn field(param: Param) -> Self {
        Expr::Field(FieldSample::new(param))
    }

    pub fn deriv(axis: Axis, e: Expr) -> Self {
        Expr::Deriv(axis, Box::new(e))
    }

    pub fn pow(base: Expr, exp: i32) -> Self {
        match (base, exp) {
            (_, 0) => Expr::Num(1.0),
            (b, 1) => b,
            (Expr::Num(v), k) => Expr::num(v.powi(k)),
            (b, k) => Expr::Pow(Box::new(b), k),
        }
    }

    pub fn recip(self) -> Self {
        Expr::pow(self, -1)
    }

    /// Sum with flattening and numeric folding; collapses to a single child
    /// or a number when possible.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Self {
        let mut out = Vec::new();
        let mut constant = 0.0;
        for t in terms {
            match t {
                Expr::Add(children) => {
                    for c in children {
                        match c {
                            Expr::Num(v) => constant += v,
                            c => out.push(c),
                        }
                    }
                }
                Expr::Num(v) => constant += v,
                t => out.push(t),
            }
        }
        if constant != 0.0 {
            out.push(Expr::num(constant));
        }
        match out.len() {
            0 => Expr::Num(0.0),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }

    /// Product with flattening; numeric factors are folded into one leading
    /// coefficient and a zero coefficient annihilates the product.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Self {
        let mut out = Vec::new();
        let mut coef = 1.0;
        for f in factors {
            match f {
                Expr::Mul(children) => {
                    for c in children {
                        match c {
                            Expr::Num(v) => coef *= v,
                            c => out.push(c),
                        }
                    }
                }
                Expr::Num(v) => coef *= v,
                f => out.push(f),
            }
        }
        if coef == 0.0 {
            return Expr::Num(0.0);
        }
        if coef != 1.0 || out.is_empty() {
            out.insert(0, Expr::num(coef));
        }
        match out.len() {
            1 => out.pop().unwrap(),
            _ => Expr::Mul(out),
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn children(&self) -> &[Expr] {
        match self {
            Expr::Add(c) | Expr::Mul(c) => c,
            Expr::Pow(b, _) | Expr::Deriv(_, b) => std::slice::from_ref(b.as_ref()),
            _ => &[],
        }
    }

    /// Depth-first pre-order visit.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn contains_unknown(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Unknown(_)));
        found
    }

    pub fn contains_deriv(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Deriv(..)));
        found
    }

    /// All unknowns referenced anywhere in the tree.
    pub fn unknowns(&self) -> Vec<Unknown> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Unknown(u) = e {
                out.push(u.clone());
            }
        });
        out
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn rank(&self) -> u8 {
        match self {
            Expr::Num(_) => 0,
            Expr::Sym(_) => 1,
            Expr::Field(_) => 2,
            Expr::Unknown(_) => 3,
            Expr::Delta(..) => 4,
            Expr::Pow(..) => 5,
            Expr::Deriv(..) => 6,
            Expr::Mul(_) => 7,
            Expr::Add(_) => 8,
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        use Expr::*;
        match (self, other) {
            (Num(a), Num(b)) => a.total_cmp(b),
            (Sym(a), Sym(b)) => a.cmp(b),
            (Field(a), Field(b)) => a.cmp(b),
            (Unknown(a), Unknown(b)) => a.cmp(b),
            (Delta(a, b), Delta(c, d)) => (a, b).cmp(&(c, d)),
            (Pow(a, i), Pow(b, j)) => a.cmp(b).then(i.cmp(j)),
            (Deriv(a, x), Deriv(b, y)) => a.cmp(b).then_with(|| x.cmp(y)),
            (Mul(a), Mul(b)) | (Add(a), Add(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Expr::Num(v) => v.to_bits().hash(state),
            Expr::Sym(s) => s.hash(state),
            Expr::Unknown(u) => u.hash(state),
            Expr::Field(f) => f.hash(state),
            Expr::Add(c) | Expr::Mul(c) => c.hash(state),
            Expr::Pow(b, k) => {
                b.hash(state);
                k.hash(state);
            }
            Expr::Deriv(a, b) => {
                a.hash(state);
                b.hash(state);
            }
            Expr::Delta(i, j) => (i, j).hash(state),
        }
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::num(v)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum([self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}

impl ops::Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([Expr::num(self), rhs])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::Num(-1.0), self])
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::pretty(self))
    }
}
