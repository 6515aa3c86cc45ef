//! Tree manipulation passes. Every pass is evaluation-preserving.

use std::collections::BTreeMap;

use super::expr::{Axis, Expr};

/// Rebuilds `e` bottom-up, replacing any subtree for which `f` returns
/// `Some`. Replacements are not visited again.
pub fn rewrite(e: &Expr, f: &mut impl FnMut(&Expr) -> Option<Expr>) -> Expr {
    if let Some(r) = f(e) {
        return r;
    }
    match e {
        Expr::Add(c) => Expr::Add(c.iter().map(|c| rewrite(c, f)).collect()),
        Expr::Mul(c) => Expr::Mul(c.iter().map(|c| rewrite(c, f)).collect()),
        Expr::Pow(b, k) => Expr::Pow(Box::new(rewrite(b, f)), *k),
        Expr::Deriv(a, b) => Expr::Deriv(*a, Box::new(rewrite(b, f))),
        leaf => leaf.clone(),
    }
}

/// Replaces every subtree structurally equal to `target` by `replacement`.
pub fn substitute(e: &Expr, target: &Expr, replacement: &Expr) -> Expr {
    rewrite(e, &mut |n| (n == target).then(|| replacement.clone()))
}

/// Product of atoms: base -> integer exponent.
type Monomial = BTreeMap<Expr, i32>;
/// Sum of monomials with numeric coefficients.
type Poly = BTreeMap<Monomial, f64>;

fn constant(v: f64) -> Poly {
    let mut p = Poly::new();
    if v != 0.0 {
        p.insert(Monomial::new(), v);
    }
    p
}

fn atom(e: Expr, exp: i32) -> Poly {
    let mut m = Monomial::new();
    m.insert(e, exp);
    let mut p = Poly::new();
    p.insert(m, 1.0);
    p
}

fn add_into(acc: &mut Poly, other: Poly, scale: f64) {
    for (m, c) in other {
        *acc.entry(m).or_insert(0.0) += scale * c;
    }
}

fn prune(mut p: Poly) -> Poly {
    p.retain(|_, c| *c != 0.0);
    p
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = a.clone();
    for (base, k) in b {
        let e = out.entry(base.clone()).or_insert(0);
        *e += k;
        if *e == 0 {
            out.remove(base);
        }
    }
    out
}

fn mul_polys(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            *out.entry(mul_monomials(ma, mb)).or_insert(0.0) += ca * cb;
        }
    }
    prune(out)
}

fn expand_poly(e: &Expr) -> Poly {
    match e {
        Expr::Num(v) => constant(*v),
        Expr::Delta(i, j) => constant(if i == j { 1.0 } else { 0.0 }),
        Expr::Sym(_) | Expr::Unknown(_) | Expr::Field(_) => atom(e.clone(), 1),
        Expr::Add(children) => {
            let mut acc = Poly::new();
            for c in children {
                add_into(&mut acc, expand_poly(c), 1.0);
            }
            prune(acc)
        }
        Expr::Mul(children) => {
            let mut acc = constant(1.0);
            for c in children {
                acc = mul_polys(&acc, &expand_poly(c));
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        Expr::Pow(base, k) => {
            let b = expand_poly(base);
            let k = *k;
            if k == 0 {
                return constant(1.0);
            }
            if b.is_empty() {
                return if k > 0 { Poly::new() } else { atom(Expr::Num(0.0), k) };
            }
            if b.len() == 1 {
                let (m, c) = b.into_iter().next().unwrap();
                let m = m.into_iter().map(|(base, e)| (base, e * k)).filter(|(_, e)| *e != 0).collect();
                let mut p = Poly::new();
                p.insert(m, c.powi(k));
                return p;
            }
            if k > 0 {
                let mut acc = b.clone();
                for _ in 1..k {
                    acc = mul_polys(&acc, &b);
                }
                acc
            } else {
                atom(poly_to_expr(&b), k)
            }
        }
        Expr::Deriv(axis, child) => {
            // ∂ is linear: distribute over sums and pull out numeric factors.
            let inner = expand_poly(child);
            let mut acc = Poly::new();
            for (m, c) in inner {
                if m.is_empty() {
                    continue;
                }
                let body = monomial_to_expr(&m, 1.0);
                add_into(&mut acc, atom(Expr::Deriv(*axis, Box::new(body)), 1), c);
            }
            prune(acc)
        }
    }
}

fn monomial_to_expr(m: &Monomial, coef: f64) -> Expr {
    let factors = m.iter().map(|(b, k)| Expr::pow(b.clone(), *k));
    Expr::product(std::iter::once(Expr::num(coef)).chain(factors))
}

fn poly_to_expr(p: &Poly) -> Expr {
    let terms: Vec<Expr> = p.iter().map(|(m, c)| monomial_to_expr(m, *c)).collect();
    match terms.len() {
        0 => Expr::Num(0.0),
        1 => terms.into_iter().next().unwrap(),
        _ => Expr::Add(terms),
    }
}

/// Distributes products over sums, folds numeric subtrees, merges powers of
/// equal bases and collects like terms. The result is a canonically ordered
/// sum of monomials.
pub fn expand_fold(e: &Expr) -> Expr {
    poly_to_expr(&expand_poly(e))
}

/// The terms of an expanded expression as `(coefficient, factors)` pairs.
pub(crate) fn expanded_terms(e: &Expr) -> Vec<(f64, Vec<(Expr, i32)>)> {
    expand_poly(e)
        .into_iter()
        .map(|(m, c)| (c, m.into_iter().collect()))
        .collect()
}

fn is_leaf_chain(e: &Expr) -> bool {
    match e {
        Expr::Unknown(_) | Expr::Field(_) => true,
        Expr::Deriv(_, c) => is_leaf_chain(c),
        _ => false,
    }
}

/// Symbolic partial derivative. Derivatives of unknowns and parameter fields
/// stay as `Deriv` nodes around the leaf; symbols are spatial constants.
pub fn differentiate(e: &Expr, axis: Axis) -> Expr {
    match e {
        Expr::Num(_) | Expr::Sym(_) | Expr::Delta(..) => Expr::Num(0.0),
        Expr::Unknown(_) | Expr::Field(_) => Expr::deriv(axis, e.clone()),
        Expr::Deriv(inner_axis, c) => {
            if is_leaf_chain(c) {
                Expr::deriv(axis, e.clone())
            } else {
                differentiate(&differentiate(c, *inner_axis), axis)
            }
        }
        Expr::Add(c) => Expr::sum(c.iter().map(|t| differentiate(t, axis))),
        Expr::Mul(c) => Expr::sum((0..c.len()).map(|i| {
            let d = differentiate(&c[i], axis);
            if d.is_zero() {
                return Expr::Num(0.0);
            }
            Expr::product(
                c.iter()
                    .enumerate()
                    .map(|(j, f)| if i == j { d.clone() } else { f.clone() }),
            )
        })),
        Expr::Pow(b, k) => {
            let d = differentiate(b, axis);
            if d.is_zero() {
                return Expr::Num(0.0);
            }
            Expr::product([Expr::num(f64::from(*k)), Expr::pow((**b).clone(), k - 1), d])
        }
    }
}
