//! Frontends that turn expression trees into text.
//!
//! The pretty-text form is the golden-file format and is read back by
//! [`super::parse`]. The source frontend emits Rust.

use std::fmt::Write;

use super::canonical::CanonicalForm;
use super::expr::{Expr, FieldSample, HalfOffset, Param, Unknown};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frontend {
    PrettyText,
    Source,
}

pub fn render(e: &Expr, frontend: Frontend) -> String {
    match frontend {
        Frontend::PrettyText => pretty(e),
        Frontend::Source => source(e),
    }
}

fn pos_suffix(p: HalfOffset) -> String {
    if p.is_zero() {
        String::new()
    } else {
        format!("@{p}")
    }
}

pub fn param_name(p: Param) -> String {
    match p {
        Param::SigmaT => "sigma_t".into(),
        Param::SigmaS => "sigma_s".into(),
        Param::Phase(l) => format!("p[{l},0]"),
        Param::Emission(i) => format!("Q[{},{}]", i.l, i.m),
    }
}

pub fn unknown_name(u: &Unknown) -> String {
    format!("{}[{},{}]", u.field, u.index.l, u.index.m)
}

fn field_text(f: &FieldSample) -> String {
    format!("{}{}", param_name(f.param), pos_suffix(f.pos))
}

/// Splits a leading negative coefficient off a term, returning the negated
/// term when there is one.
fn negated(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Num(v) if *v < 0.0 => Some(Expr::num(-v)),
        Expr::Mul(c) => match c.first() {
            Some(Expr::Num(v)) if *v < 0.0 => {
                let rest = c[1..].iter().cloned();
                Some(Expr::product(std::iter::once(Expr::num(-v)).chain(rest)))
            }
            _ => None,
        },
        _ => None,
    }
}

pub(crate) fn pretty(e: &Expr) -> String {
    match e {
        Expr::Num(v) => format!("{v}"),
        Expr::Sym(s) => s.to_string(),
        Expr::Unknown(u) => format!("{}{}", unknown_name(u), pos_suffix(u.pos)),
        Expr::Field(f) => field_text(f),
        Expr::Delta(i, j) => format!("delta({i},{j})"),
        Expr::Deriv(a, c) => format!("d{}({})", a.name(), pretty(c)),
        Expr::Pow(b, k) => format!("{}^{k}", pretty_atom(b)),
        Expr::Add(c) => {
            let mut s = String::new();
            for (i, t) in c.iter().enumerate() {
                match (i, negated(t)) {
                    (0, _) => s.push_str(&pretty(t)),
                    (_, Some(n)) => {
                        s.push_str(" - ");
                        s.push_str(&pretty_factor(&n));
                    }
                    (_, None) => {
                        s.push_str(" + ");
                        s.push_str(&pretty_factor(t));
                    }
                }
            }
            s
        }
        Expr::Mul(c) => {
            let mut parts = Vec::with_capacity(c.len());
            let mut prefix = "";
            for (i, f) in c.iter().enumerate() {
                if i == 0 && c.len() > 1 && f.as_num() == Some(-1.0) {
                    prefix = "-";
                    continue;
                }
                parts.push(pretty_factor(f));
            }
            format!("{prefix}{}", parts.join("*"))
        }
    }
}

fn pretty_factor(e: &Expr) -> String {
    match e {
        Expr::Add(_) => format!("({})", pretty(e)),
        _ => pretty(e),
    }
}

fn pretty_atom(e: &Expr) -> String {
    match e {
        Expr::Add(_) | Expr::Mul(_) | Expr::Pow(..) => format!("({})", pretty(e)),
        Expr::Num(v) if *v < 0.0 => format!("({})", pretty(e)),
        _ => pretty(e),
    }
}

fn source(e: &Expr) -> String {
    match e {
        Expr::Num(v) => format!("({v:?}_f64)"),
        Expr::Sym(s) => format!("sym({s:?})"),
        Expr::Unknown(u) => format!("unknown({:?}, {:?})", unknown_name(u), u.pos.0),
        Expr::Field(f) => format!("field({:?}, {:?})", param_name(f.param), f.pos.0),
        Expr::Delta(i, j) => format!("({:?}_f64)", f64::from(u8::from(i == j))),
        Expr::Deriv(a, c) => format!("d{}({})", a.name(), source(c)),
        Expr::Pow(b, k) => format!("{}.powi({k})", source(b)),
        Expr::Add(c) => format!(
            "({})",
            c.iter().map(source).collect::<Vec<_>>().join(" + ")
        ),
        Expr::Mul(c) => format!(
            "({})",
            c.iter().map(source).collect::<Vec<_>>().join(" * ")
        ),
    }
}

/// Emits a straight-line Rust routine computing every coefficient of a
/// canonical row, followed by the residual, into `out`.
///
/// ```text
/// pub fn NAME(field: &dyn Fn(&str, [i32; 3]) -> f64, sym: &dyn Fn(&str) -> f64, out: &mut [f64])
/// ```
pub fn render_row_source(name: &str, row: &CanonicalForm) -> String {
    let mut s = String::new();
    writeln!(s, "#[allow(unused_parens, clippy::all)]").unwrap();
    writeln!(
        s,
        "pub fn {name}(field: &dyn Fn(&str, [i32; 3]) -> f64, sym: &dyn Fn(&str) -> f64, out: &mut [f64]) {{"
    )
    .unwrap();
    writeln!(s, "    let _ = (&field, &sym);").unwrap();
    for (k, (u, c)) in row.entries.iter().enumerate() {
        writeln!(s, "    // {}{}", unknown_name(u), pos_suffix(u.pos)).unwrap();
        writeln!(s, "    out[{k}] = {};", source(c)).unwrap();
    }
    writeln!(s, "    out[{}] = {};", row.entries.len(), source(&row.residual)).unwrap();
    writeln!(s, "}}").unwrap();
    s
}
