use std::collections::BTreeMap;

use super::expr::{Expr, Unknown};
use super::passes::{expand_fold, expanded_terms};
use super::CasError;

/// A linear form `Σ coefficient·unknown + residual`. Coefficients and the
/// residual never reference unknowns; entries are sorted by unknown.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalForm {
    pub entries: Vec<(Unknown, Expr)>,
    pub residual: Expr,
}

impl CanonicalForm {
    pub fn to_expr(&self) -> Expr {
        let terms = self
            .entries
            .iter()
            .map(|(u, c)| Expr::product([c.clone(), Expr::Unknown(u.clone())]));
        Expr::sum(terms.chain(std::iter::once(self.residual.clone())))
    }

    pub fn coefficient(&self, u: &Unknown) -> Option<&Expr> {
        self.entries.iter().find(|(k, _)| k == u).map(|(_, c)| c)
    }
}

/// Collects the terms of a degree-one polynomial in the unknowns.
pub fn factorize_canonical(e: &Expr) -> Result<CanonicalForm, CasError> {
    let mut grouped: BTreeMap<Unknown, Vec<Expr>> = BTreeMap::new();
    let mut residual = Vec::new();
    for (coef, factors) in expanded_terms(e) {
        let mut key: Option<Unknown> = None;
        let mut rest = vec![Expr::num(coef)];
        for (base, k) in factors {
            match &base {
                Expr::Unknown(u) => {
                    if k != 1 || key.is_some() {
                        return Err(CasError::Nonlinear(format!("{}", e)));
                    }
                    key = Some(u.clone());
                }
                other if other.contains_unknown() => {
                    return Err(if other.contains_deriv() {
                        CasError::UnresolvedDerivative
                    } else {
                        CasError::Nonlinear(format!("{other}"))
                    });
                }
                _ => rest.push(Expr::pow(base, k)),
            }
        }
        let term = Expr::product(rest);
        match key {
            Some(u) => grouped.entry(u).or_default().push(term),
            None => residual.push(term),
        }
    }
    let entries = grouped
        .into_iter()
        .map(|(u, terms)| (u, expand_fold(&Expr::sum(terms))))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    Ok(CanonicalForm {
        entries,
        residual: expand_fold(&Expr::sum(residual)),
    })
}
