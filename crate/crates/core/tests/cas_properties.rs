use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use pnstencil_core::cas::{
    evaluate_with, expand_fold, factorize_canonical, parse, substitute, Env, Expr, FieldSample,
    HalfOffset, Param, Unknown,
};
use pnstencil_core::sh::ShIndex;
use proptest::prelude::*;

#[derive(Debug)]
struct Bindings {
    syms: [f64; 3],
    seed: f64,
}

impl Env for Bindings {
    fn symbol(&self, name: &str) -> Option<f64> {
        match name {
            "x" => Some(self.syms[0]),
            "y" => Some(self.syms[1]),
            "z" => Some(self.syms[2]),
            _ => None,
        }
    }
    fn unknown(&self, u: &Unknown, d: [u8; 3]) -> Option<f64> {
        (d == [0; 3]).then(|| {
            let k = u.index.flat() as f64 + 0.3 * f64::from(u.pos.0[0]) - 0.2 * f64::from(u.pos.0[1]);
            1.0 + 0.5 * (k + self.seed).sin()
        })
    }
    fn field(&self, f: &FieldSample, d: [u8; 3]) -> Option<f64> {
        (d == [0; 3]).then(|| {
            let k = match f.param {
                Param::SigmaT => 1.0,
                Param::SigmaS => 2.0,
                Param::Phase(l) => 3.0 + f64::from(l),
                Param::Emission(i) => 10.0 + i.flat() as f64,
            } + 0.7 * f64::from(f.pos.0[0]);
            1.0 + 0.5 * (k * self.seed).cos()
        })
    }
}

fn unknown_leaf() -> impl Strategy<Value = Expr> {
    (0i32..3, -2i32..=2, -1i32..=1).prop_map(|(l, m, x)| {
        let m = m.clamp(-l, l);
        Expr::Unknown(Unknown::radiance(ShIndex { l, m }).at(HalfOffset([x, 0, 0])))
    })
}

fn param_leaf() -> impl Strategy<Value = Expr> {
    (0usize..3, -2i32..=2).prop_map(|(k, x)| {
        let param = [Param::SigmaT, Param::SigmaS, Param::Phase(1)][k];
        Expr::Field(FieldSample { param, pos: HalfOffset([2 * x, 0, 0]) })
    })
}

/// Trees without unknowns.
fn coefficient() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i32..=3).prop_map(|v| Expr::num(f64::from(v) * 0.5)),
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Expr::sym),
        param_leaf(),
        (0i32..2, 0i32..2).prop_map(|(i, j)| Expr::Delta(i, j)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::product),
            (inner, 1i32..=3).prop_map(|(b, k)| Expr::pow(b, k)),
        ]
    })
}

/// General trees, possibly nonlinear in the unknowns.
fn tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![coefficient(), unknown_leaf()];
    leaf.prop_recursive(3, 32, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::product),
            (inner, 1i32..=2).prop_map(|(b, k)| Expr::pow(b, k)),
        ]
    })
}

/// `Σ coefficient · unknown + residual`.
fn linear() -> impl Strategy<Value = Expr> {
    (prop::collection::vec((coefficient(), unknown_leaf()), 1..5), coefficient()).prop_map(
        |(terms, residual)| {
            Expr::sum(
                terms
                    .into_iter()
                    .map(|(c, u)| Expr::product([c, u]))
                    .chain(std::iter::once(residual)),
            )
        },
    )
}

fn bindings() -> impl Strategy<Value = Bindings> {
    ([0.5f64..2.0, 0.5f64..2.0, 0.5f64..2.0], 0.0f64..6.0).prop_map(|(syms, seed)| Bindings { syms, seed })
}

fn close(a: f64, b: f64) -> bool {
    close_at(a, b, a.abs())
}

fn close_at(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + scale)
}

/// Sum of the term magnitudes of an expanded sum; expanded polynomials
/// cancel, so their rounding error scales with this rather than the value.
fn magnitude(e: &Expr, env: &Bindings) -> f64 {
    match e {
        Expr::Add(terms) => terms.iter().map(|t| evaluate_with(t, env).unwrap().abs()).sum(),
        _ => evaluate_with(e, env).unwrap().abs(),
    }
}

fn hash_of(e: &Expr) -> u64 {
    let mut h = DefaultHasher::new();
    e.hash(&mut h);
    h.finish()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 256,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn expansion_preserves_value(e in tree(), envs in prop::collection::vec(bindings(), 20)) {
        let x = expand_fold(&e);
        for env in &envs {
            let (a, b) = (evaluate_with(&e, env).unwrap(), evaluate_with(&x, env).unwrap());
            let scale = a.abs().max(magnitude(&x, env));
            prop_assert!(close_at(a, b, scale), "{e} -> {x}: {a} vs {b}");
        }
    }

    #[test]
    fn expansion_is_idempotent(e in tree()) {
        let once = expand_fold(&e);
        let twice = expand_fold(&once);
        prop_assert_eq!(hash_of(&once), hash_of(&twice));
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn canonical_form_preserves_value(e in linear(), env in bindings()) {
        let cf = factorize_canonical(&e).unwrap();
        let a = evaluate_with(&e, &env).unwrap();
        let b = evaluate_with(&cf.to_expr(), &env).unwrap();
        prop_assert!(close(a, b), "{a} vs {b}");
        let mut keys: Vec<_> = cf.entries.iter().map(|(u, _)| u.clone()).collect();
        keys.dedup();
        prop_assert_eq!(keys.len(), cf.entries.len());
    }

    #[test]
    fn canonicalization_survives_rendering(e in linear()) {
        let cf = factorize_canonical(&e).unwrap();
        let text = cf.to_expr().to_string();
        let again = factorize_canonical(&parse(&text).unwrap()).unwrap();
        prop_assert_eq!(&again.entries, &cf.entries, "{}", text);
    }

    #[test]
    fn substitution_matches_rebinding(e in tree(), env in bindings(), v in 0.5f64..2.0) {
        let s = substitute(&e, &Expr::sym("x"), &Expr::num(v));
        let rebound = Bindings { syms: [v, env.syms[1], env.syms[2]], seed: env.seed };
        let (a, b) = (evaluate_with(&s, &env).unwrap(), evaluate_with(&e, &rebound).unwrap());
        prop_assert!(close(a, b));
    }

    #[test]
    fn equal_trees_hash_equal(e in tree()) {
        let c = e.clone();
        prop_assert_eq!(hash_of(&e), hash_of(&c));
    }
}
