//! Independent oracles shared by the integration tests and the acceptance
//! suite.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use pnstencil_core::cas::{evaluate_with, Env, FieldSample, Param, Unknown};
use pnstencil_core::pn::{transport_expr, Dim, EquationSet};
use pnstencil_core::sh::{complex_sh, coupling, real_sh, Coupling, Direction, ShIndex, SphereQuadrature};
use pnstencil_core::stencil::{compile_equations, SPACING};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `offset + amp · Π_k sin(w_k x_k + p_k)` with exact derivatives of any
/// order.
#[derive(Clone, Copy, Debug)]
pub struct SineProduct {
    pub offset: f64,
    pub amp: f64,
    pub w: [f64; 3],
    pub p: [f64; 3],
}

impl SineProduct {
    pub fn random(r: &mut ChaCha8Rng, offset: f64, amp: f64) -> Self {
        Self {
            offset,
            amp,
            w: [0; 3].map(|_| r.gen_range(0.5..3.0)),
            p: [0; 3].map(|_| r.gen_range(0.0..2.0 * PI)),
        }
    }

    pub fn eval(&self, x: [f64; 3], d: [u8; 3]) -> f64 {
        let mut v = self.amp;
        for k in 0..3 {
            let n = i32::from(d[k]);
            v *= self.w[k].powi(n) * (self.w[k] * x[k] + self.p[k] + f64::from(n) * FRAC_PI_2).sin();
        }
        if d == [0; 3] {
            v + self.offset
        } else {
            v
        }
    }
}

/// Smooth fields for every unknown and parameter, with derivatives.
pub struct Manufactured {
    pub unknowns: Vec<(ShIndex, SineProduct)>,
    pub sigma_t: SineProduct,
    pub sigma_s: SineProduct,
    pub phase: Vec<f64>,
    pub emission: Vec<(ShIndex, SineProduct)>,
}

impl Manufactured {
    pub fn new(unknowns: &[ShIndex], seed: u64) -> Self {
        let mut r = rng(seed);
        let unknowns = unknowns
            .iter()
            .map(|i| {
                let offset = r.gen_range(-1.0..1.0);
                (*i, SineProduct::random(&mut r, offset, 1.0))
            })
            .collect::<Vec<_>>();
        let emission = unknowns
            .iter()
            .map(|(i, _)| (*i, SineProduct::random(&mut r, 0.5, 0.3)))
            .collect();
        Self {
            sigma_t: SineProduct::random(&mut r, 3.0, 1.0),
            sigma_s: SineProduct::random(&mut r, 1.0, 0.5),
            phase: (0..8).map(|_| r.gen_range(0.0..0.3)).collect(),
            unknowns,
            emission,
        }
    }

    pub fn unknown(&self, i: ShIndex) -> &SineProduct {
        &self.unknowns.iter().find(|(k, _)| *k == i).expect("manufactured unknown").1
    }

    pub fn param(&self, p: Param, x: [f64; 3], d: [u8; 3]) -> f64 {
        match p {
            Param::SigmaT => self.sigma_t.eval(x, d),
            Param::SigmaS => self.sigma_s.eval(x, d),
            Param::Phase(l) => {
                if d == [0; 3] {
                    self.phase.get(l as usize).copied().unwrap_or(0.0)
                } else {
                    0.0
                }
            }
            Param::Emission(i) => self
                .emission
                .iter()
                .find(|(k, _)| *k == i)
                .map_or(0.0, |(_, f)| f.eval(x, d)),
        }
    }
}

/// Continuous evaluation at a point: leaves are the analytic functions.
pub struct PointEnv<'a> {
    pub fields: &'a Manufactured,
    pub x: [f64; 3],
    pub h: f64,
}

impl Env for PointEnv<'_> {
    fn symbol(&self, name: &str) -> Option<f64> {
        (name == SPACING).then_some(self.h)
    }
    fn unknown(&self, u: &Unknown, d: [u8; 3]) -> Option<f64> {
        let x = shift(self.x, u.pos.0, self.h);
        Some(self.fields.unknown(u.index).eval(x, d))
    }
    fn field(&self, f: &FieldSample, d: [u8; 3]) -> Option<f64> {
        let x = shift(self.x, f.pos.0, self.h);
        Some(self.fields.param(f.param, x, d))
    }
}

/// `x + pos · h/2` for a position in doubled units.
pub fn shift(x: [f64; 3], pos: [i32; 3], h: f64) -> [f64; 3] {
    [0, 1, 2].map(|k| x[k] + 0.5 * h * f64::from(pos[k]))
}

/// Largest relative deviation between the built transport terms and the
/// angular quadrature `∫ Y^{l,m} (ω·∇) L̂ dω` at random points of random
/// smooth coefficient fields.
pub fn moment_oracle_error(order: i32, points: usize, seed: u64) -> f64 {
    let quad = SphereQuadrature::default();
    let all: Vec<ShIndex> = ShIndex::all(order).collect();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let fields = Manufactured::new(&all, r.gen());
        let x = [0; 3].map(|_| r.gen_range(0.0..1.0));
        let grads: Vec<[f64; 3]> = all
            .iter()
            .map(|i| {
                let f = fields.unknown(*i);
                [f.eval(x, [1, 0, 0]), f.eval(x, [0, 1, 0]), f.eval(x, [0, 0, 1])]
            })
            .collect();
        let env = PointEnv { fields: &fields, x, h: 1.0 };
        let mut built = Vec::new();
        let mut oracle = Vec::new();
        for i in &all {
            let t = transport_expr(i.l, i.m, order, Dim::Three).unwrap();
            built.push(evaluate_with(&t, &env).unwrap());
            oracle.push(quad.integrate(|d| {
                let w = d.vector();
                let stream: f64 = all
                    .iter()
                    .zip(&grads)
                    .map(|(k, g)| {
                        (w[0] * g[0] + w[1] * g[1] + w[2] * g[2]) * real_sh(k.l, k.m, d).unwrap()
                    })
                    .sum();
                real_sh(i.l, i.m, d).unwrap() * stream
            }));
        }
        let scale = oracle.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for (b, o) in built.iter().zip(&oracle) {
            worst = worst.max((b - o).abs() / scale);
        }
    }
    worst
}

/// Largest deviation from `δ_ij` of the real basis Gram matrix up to `order`.
pub fn orthonormality_error(order: i32) -> f64 {
    let quad = SphereQuadrature::default();
    let all: Vec<ShIndex> = ShIndex::all(order).collect();
    let mut worst: f64 = 0.0;
    for (a, i) in all.iter().enumerate() {
        for (b, j) in all.iter().enumerate().skip(a) {
            let g = quad.integrate(|d| real_sh(i.l, i.m, d).unwrap() * real_sh(j.l, j.m, d).unwrap());
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - want).abs());
        }
    }
    worst
}

fn ybar(l: i32, m: i32, d: Direction) -> Complex64 {
    if l < 0 || m.abs() > l {
        Complex64::new(0.0, 0.0)
    } else {
        complex_sh(l, m, d).unwrap().conj()
    }
}

/// `κ Ȳ^{l,m}` with out-of-range terms dropped.
fn term(kind: Coupling, kl: i32, km: i32, l: i32, m: i32, d: Direction) -> Complex64 {
    if l < 0 || m.abs() > l {
        return Complex64::new(0.0, 0.0);
    }
    coupling(kind, kl, km).unwrap() * ybar(l, m, d)
}

/// Largest deviation of `ω Ȳ^{l,m}` from the three-component recursion over
/// all `|m| <= l <= lmax` at random directions.
pub fn recursion_error(lmax: i32, samples: usize, seed: u64) -> f64 {
    use Coupling::*;
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let d = Direction::new(r.gen_range(0.0..PI), r.gen_range(-PI..PI));
        let w = d.vector();
        for l in 0..=lmax {
            for m in -l..=l {
                let cm = term(C, l - 1, m - 1, l - 1, m - 1, d);
                let dm = term(D, l + 1, m - 1, l + 1, m - 1, d);
                let ep = term(E, l - 1, m + 1, l - 1, m + 1, d);
                let fp = term(F, l + 1, m + 1, l + 1, m + 1, d);
                let x = -0.5 * (cm - dm - ep + fp);
                let y = -0.5 * Complex64::i() * (-cm + dm - ep + fp);
                let z = term(A, l - 1, m, l - 1, m, d) + term(B, l + 1, m, l + 1, m, d);
                let y0 = ybar(l, m, d);
                for (k, rhs) in [x, y, z].into_iter().enumerate() {
                    worst = worst.max((w[k] * y0 - rhs).norm());
                }
            }
        }
    }
    worst
}

/// Index pairs where a symmetry identity between coupling families fails
/// to hold bit-for-bit.
pub fn coefficient_identity_violations(lmax: i32) -> Vec<String> {
    use Coupling::*;
    let mut bad = Vec::new();
    for l in 0..=lmax {
        for m in -l..=l {
            for (p, q) in [(A, A), (B, B), (C, E), (D, F)] {
                let lhs = coupling(p, l, m);
                let rhs = coupling(q, l, -m);
                if lhs != rhs {
                    bad.push(format!("{p:?}({l},{m}) vs {q:?}({l},{})", -m));
                }
            }
        }
    }
    bad
}

/// Largest pointwise difference between the discretized operator of every
/// row and the continuous operator at the row location, at a few base
/// points, for each spacing in `hs`.
pub fn discretization_errors(eqset: &EquationSet, hs: &[f64], seed: u64) -> Vec<f64> {
    let program = compile_equations(eqset).unwrap();
    let fields = Manufactured::new(eqset.unknowns(), seed);
    let mut r = rng(seed ^ 0x5eed);
    let bases: Vec<[f64; 3]> = (0..4)
        .map(|_| [0; 3].map(|_| r.gen_range(0.2..0.8)))
        .map(|mut x: [f64; 3]| {
            if eqset.dim == Dim::Two {
                x[2] = 0.0;
            }
            x
        })
        .collect();
    hs.iter()
        .map(|&h| {
            let mut worst: f64 = 0.0;
            for &x0 in &bases {
                let env = PointEnv { fields: &fields, x: x0, h };
                for (row, (_, continuous)) in program.rows.iter().zip(&eqset.equations) {
                    let mut disc = 0.0;
                    for e in &row.entries {
                        let c = evaluate_with(&e.coefficient, &env).unwrap();
                        let u = fields.unknown(e.target).eval(shift(x0, e.pos.0, h), [0; 3]);
                        disc += c * u;
                    }
                    disc -= evaluate_with(&row.rhs, &env).unwrap();
                    let at = PointEnv {
                        fields: &fields,
                        x: shift(x0, row.at.0, h),
                        h,
                    };
                    let exact = evaluate_with(continuous, &at).unwrap();
                    worst = worst.max((disc - exact).abs());
                }
            }
            worst
        })
        .collect()
}

/// Observed orders `log2(e_k / e_{k+1})` for halving spacings.
pub fn slopes(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            if f == 0.0 {
                continue;
            }
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
            b[i] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}
