//! A small computer-algebra kernel: expression trees, the manipulation
//! passes the discretization pipeline needs, evaluation, and frontends.

mod canonical;
mod eval;
mod expr;
mod parse;
mod passes;
mod render;

use thiserror::Error;

pub use canonical::{factorize_canonical, CanonicalForm};
pub use eval::{evaluate, evaluate_with, Env, MapEnv, Sampler};
pub use expr::{Axis, Expr, FieldSample, HalfOffset, Param, Unknown};
pub use parse::parse;
pub use passes::{differentiate, expand_fold, rewrite, substitute};
pub use render::{param_name, render, render_row_source, unknown_name, Frontend};

#[cfg(test)]
pub(crate) use render::pretty;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CasError {
    #[error("unbound name '{0}'")]
    Unbound(String),
    #[error("expression is not linear in the unknowns: {0}")]
    Nonlinear(String),
    #[error("derivative of an unknown survives; discretize before factorizing")]
    UnresolvedDerivative,
    #[error("parse error: {0}")]
    Parse(String),
}
