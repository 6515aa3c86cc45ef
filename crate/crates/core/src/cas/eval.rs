use std::collections::HashMap;

use super::expr::{Expr, FieldSample, Unknown};
use super::passes::differentiate;
use super::CasError;

/// Supplies values for the leaves of an expression tree. `deriv` holds the
/// derivative order per axis requested for the leaf (all zero for a plain
/// sample).
pub trait Env {
    fn symbol(&self, name: &str) -> Option<f64>;
    fn unknown(&self, u: &Unknown, deriv: [u8; 3]) -> Option<f64>;
    fn field(&self, f: &FieldSample, deriv: [u8; 3]) -> Option<f64>;
}

/// Field values for unknowns and parameter samples.
pub trait Sampler {
    fn unknown(&self, u: &Unknown, deriv: [u8; 3]) -> Option<f64>;
    fn field(&self, f: &FieldSample, deriv: [u8; 3]) -> Option<f64>;
}

struct SplitEnv<'a> {
    bindings: &'a HashMap<String, f64>,
    sampler: &'a dyn Sampler,
}

impl Env for SplitEnv<'_> {
    fn symbol(&self, name: &str) -> Option<f64> {
        self.bindings.get(name).copied()
    }
    fn unknown(&self, u: &Unknown, deriv: [u8; 3]) -> Option<f64> {
        self.sampler.unknown(u, deriv)
    }
    fn field(&self, f: &FieldSample, deriv: [u8; 3]) -> Option<f64> {
        self.sampler.field(f, deriv)
    }
}

/// Evaluates `e` with symbol bindings and a field sampler.
pub fn evaluate(
    e: &Expr,
    bindings: &HashMap<String, f64>,
    sampler: &dyn Sampler,
) -> Result<f64, CasError> {
    evaluate_with(e, &SplitEnv { bindings, sampler })
}

pub fn evaluate_with<E: Env + ?Sized>(e: &Expr, env: &E) -> Result<f64, CasError> {
    Ok(match e {
        Expr::Num(v) => *v,
        Expr::Delta(i, j) => f64::from(u8::from(i == j)),
        Expr::Sym(s) => env
            .symbol(s)
            .ok_or_else(|| CasError::Unbound(s.to_string()))?,
        Expr::Unknown(u) => leaf_unknown(env, u, [0; 3])?,
        Expr::Field(f) => leaf_field(env, f, [0; 3])?,
        Expr::Add(c) => {
            let mut acc = 0.0;
            for t in c {
                acc += evaluate_with(t, env)?;
            }
            acc
        }
        Expr::Mul(c) => {
            let mut acc = 1.0;
            for t in c {
                acc *= evaluate_with(t, env)?;
            }
            acc
        }
        Expr::Pow(b, k) => evaluate_with(b, env)?.powi(*k),
        Expr::Deriv(axis, child) => {
            let mut orders = [0u8; 3];
            orders[axis.index()] += 1;
            let mut cur: &Expr = child;
            loop {
                match cur {
                    Expr::Deriv(a, c) => {
                        orders[a.index()] += 1;
                        cur = c;
                    }
                    Expr::Unknown(u) => return leaf_unknown(env, u, orders),
                    Expr::Field(f) => return leaf_field(env, f, orders),
                    _ => return evaluate_with(&differentiate(child, *axis), env),
                }
            }
        }
    })
}

fn leaf_unknown<E: Env + ?Sized>(env: &E, u: &Unknown, d: [u8; 3]) -> Result<f64, CasError> {
    env.unknown(u, d)
        .ok_or_else(|| CasError::Unbound(format!("{}[{}]@{}", u.field, u.index, u.pos)))
}

fn leaf_field<E: Env + ?Sized>(env: &E, f: &FieldSample, d: [u8; 3]) -> Result<f64, CasError> {
    env.field(f, d)
        .ok_or_else(|| CasError::Unbound(format!("{:?}@{}", f.param, f.pos)))
}

/// Table-backed environment, mostly for tests and small evaluations. Leaves
/// are looked up without derivatives.
#[derive(Clone, Debug, Default)]
pub struct MapEnv {
    pub symbols: HashMap<String, f64>,
    pub unknowns: HashMap<Unknown, f64>,
    pub fields: HashMap<FieldSample, f64>,
}

impl MapEnv {
    pub fn from_pairs(pairs: &[(&str, f64)]) -> Self {
        Self {
            symbols: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            ..Self::default()
        }
    }
}

impl Env for MapEnv {
    fn symbol(&self, name: &str) -> Option<f64> {
        self.symbols.get(name).copied()
    }
    fn unknown(&self, u: &Unknown, deriv: [u8; 3]) -> Option<f64> {
        (deriv == [0; 3]).then(|| self.unknowns.get(u).copied()).flatten()
    }
    fn field(&self, f: &FieldSample, deriv: [u8; 3]) -> Option<f64> {
        (deriv == [0; 3]).then(|| self.fields.get(f).copied()).flatten()
    }
}
