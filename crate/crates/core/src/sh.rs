//! Spherical harmonics: associated Legendre polynomials, the complex and real
//! SH bases, the transport coupling coefficients and numerical projection.
//!
//! Conventions used throughout the crate:
//!
//! * [`assoc_legendre`] does **not** include the Condon–Shortley phase
//!   `(-1)^m`; that sign lives in [`complex_sh`]. Most libraries (including
//!   `scipy.special.lpmv`) put it in the polynomial instead.
//! * Directions use a right-handed, z-up frame: `ω = (sinθ cosφ, sinθ sinφ, cosθ)`.
//! * The real basis is built from the complex one so that `real_sh(1, 1) ∝ +x`,
//!   `real_sh(1, -1) ∝ +y` and `real_sh(1, 0) ∝ +z`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShError {
    #[error("invalid SH index (l={l}, m={m}): requires 0 <= |m| <= l")]
    Index { l: i32, m: i32 },
    #[error("argument {x} outside [-1, 1]")]
    Domain { x: f64 },
    #[error("coupling {kind:?}^({l},{m}) has a negative radicand")]
    Radicand { kind: Coupling, l: i32, m: i32 },
}

/// A spherical-harmonic band/order pair `(l, m)` with `|m| <= l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShIndex {
    pub l: i32,
    pub m: i32,
}

impl ShIndex {
    pub fn new(l: i32, m: i32) -> Result<Self, ShError> {
        if l < 0 || m.abs() > l {
            return Err(ShError::Index { l, m });
        }
        Ok(Self { l, m })
    }

    /// Returns the index if it lies inside bands `0..=order`.
    pub fn checked(l: i32, m: i32, order: i32) -> Option<Self> {
        (l >= 0 && l <= order && m.abs() <= l).then_some(Self { l, m })
    }

    /// Dense 3D flat index `l(l+1) + m`.
    pub fn flat(self) -> usize {
        (self.l * (self.l + 1) + self.m) as usize
    }

    pub fn from_flat(i: usize) -> Self {
        let l = (i as f64).sqrt().floor() as i32;
        let m = i as i32 - l * (l + 1);
        Self { l, m }
    }

    /// Every index in bands `0..=order`, ordered by flat index.
    pub fn all(order: i32) -> impl Iterator<Item = ShIndex> {
        (0..=order).flat_map(|l| (-l..=l).map(move |m| ShIndex { l, m }))
    }
}

impl fmt::Display for ShIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.l, self.m)
    }
}

/// A unit direction given by polar angle `theta` (from +z) and azimuth `phi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        Self {
            theta: (v[2] / r).clamp(-1.0, 1.0).acos(),
            phi: v[1].atan2(v[0]),
        }
    }

    pub fn vector(self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Associated Legendre polynomial `P^{l,m}(x)` for `0 <= m <= l`, without the
/// Condon–Shortley phase, so `P^{1,1}(x) = sqrt(1 - x^2)`.
pub fn assoc_legendre(l: i32, m: i32, x: f64) -> Result<f64, ShError> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(ShError::Domain { x });
    }
    if m < 0 || m > l {
        return Err(ShError::Index { l, m });
    }
    Ok(legendre_unchecked(l, m, x))
}

fn legendre_unchecked(l: i32, m: i32, x: f64) -> f64 {
    // P^{m,m} = (2m-1)!! (1-x^2)^{m/2}
    let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let mut pmm = 1.0;
    let mut odd = 1.0;
    for _ in 0..m {
        pmm *= odd * s;
        odd += 2.0;
    }
    if l == m {
        return pmm;
    }
    let mut p_prev = pmm;
    let mut p = x * f64::from(2 * m + 1) * pmm;
    for ll in (m + 2)..=l {
        let next =
            (f64::from(2 * ll - 1) * x * p - f64::from(ll + m - 1) * p_prev) / f64::from(ll - m);
        p_prev = p;
        p = next;
    }
    p
}

fn norm(l: i32, m: i32) -> f64 {
    // sqrt((2l+1)/(4π) · (l-m)!/(l+m)!) computed as a running product
    let mut ratio = 1.0;
    for k in (l - m + 1)..=(l + m) {
        ratio /= f64::from(k);
    }
    (f64::from(2 * l + 1) / (4.0 * PI) * ratio).sqrt()
}

fn cs_phase(m: i32) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Complex spherical harmonic with the Condon–Shortley phase in the basis.
pub fn complex_sh(l: i32, m: i32, dir: Direction) -> Result<Complex64, ShError> {
    ShIndex::new(l, m)?;
    Ok(complex_sh_unchecked(l, m, dir))
}

fn complex_sh_unchecked(l: i32, m: i32, dir: Direction) -> Complex64 {
    let am = m.abs();
    let base = cs_phase(am) * norm(l, am) * legendre_unchecked(l, am, dir.theta.cos());
    let y = Complex64::from_polar(base, f64::from(am) * dir.phi);
    if m >= 0 {
        y
    } else {
        cs_phase(m) * y.conj()
    }
}

/// The defining complex combination of the real basis function; its imaginary
/// part vanishes up to rounding.
pub fn real_sh_combination(l: i32, m: i32, dir: Direction) -> Result<Complex64, ShError> {
    ShIndex::new(l, m)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let y = |mm| complex_sh_unchecked(l, mm, dir);
    Ok(match m.cmp(&0) {
        std::cmp::Ordering::Less => Complex64::new(0.0, s) * (y(m) - cs_phase(m) * y(-m)),
        std::cmp::Ordering::Equal => y(0),
        std::cmp::Ordering::Greater => s * (y(-m) + cs_phase(m) * y(m)),
    })
}

/// Real spherical harmonic, evaluated in closed form:
/// `sqrt(2) K P^{l,|m|}(cosθ) cos(mφ)` for `m > 0`, `sin(|m|φ)` for `m < 0`.
pub fn real_sh(l: i32, m: i32, dir: Direction) -> Result<f64, ShError> {
    ShIndex::new(l, m)?;
    Ok(real_sh_unchecked(l, m, dir))
}

pub(crate) fn real_sh_unchecked(l: i32, m: i32, dir: Direction) -> f64 {
    let am = m.abs();
    let p = norm(l, am) * legendre_unchecked(l, am, dir.theta.cos());
    match m.cmp(&0) {
        std::cmp::Ordering::Equal => p,
        std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * p * (f64::from(am) * dir.phi).cos(),
        std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * p * (f64::from(am) * dir.phi).sin(),
    }
}

/// All real SH values for bands `0..=order`, in flat-index order.
pub fn real_sh_all(order: i32, dir: Direction) -> Vec<f64> {
    ShIndex::all(order)
        .map(|i| real_sh_unchecked(i.l, i.m, dir))
        .collect()
}

/// The six transport coupling coefficient families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coupling {
    A,
    B,
    C,
    D,
    E,
    F,
}

/// Closed-form coupling coefficient. Errors when the radicand is negative,
/// which only happens for index combinations the equation builder must never
/// request.
pub fn coupling(kind: Coupling, l: i32, m: i32) -> Result<f64, ShError> {
    let (num, den) = match kind {
        Coupling::A => ((l - m + 1) * (l + m + 1), (2 * l + 3) * (2 * l + 1)),
        Coupling::B => ((l - m) * (l + m), (2 * l + 1) * (2 * l - 1)),
        Coupling::C => ((l + m + 1) * (l + m + 2), (2 * l + 3) * (2 * l + 1)),
        Coupling::D => ((l - m) * (l - m - 1), (2 * l + 1) * (2 * l - 1)),
        Coupling::E => ((l - m + 1) * (l - m + 2), (2 * l + 3) * (2 * l + 1)),
        Coupling::F => ((l + m) * (l + m - 1), (2 * l + 1) * (2 * l - 1)),
    };
    if num == 0 {
        return Ok(0.0);
    }
    if den == 0 || (num < 0) != (den < 0) {
        return Err(ShError::Radicand { kind, l, m });
    }
    Ok((f64::from(num) / f64::from(den)).sqrt())
}

/// Eigenvalue of the zonal convolution, `sqrt(4π / (2l+1))`.
pub fn lambda(l: i32) -> f64 {
    (4.0 * PI / f64::from(2 * l + 1)).sqrt()
}

/// Gate on the x-derivative terms that reach `m = 0` from `|m| = 1`.
pub fn beta_x(m: i32) -> f64 {
    match m {
        -1 => 0.0,
        1 => std::f64::consts::SQRT_2,
        _ => 1.0,
    }
}

/// Gate on the y-derivative terms that reach `m = 0` from `|m| = 1`.
pub fn beta_y(m: i32) -> f64 {
    match m {
        -1 => std::f64::consts::SQRT_2,
        1 => 0.0,
        _ => 1.0,
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product quadrature on the unit sphere: Gauss–Legendre in `cosθ` times the
/// trapezoid rule in `φ`. Exact for band-limited integrands up to degree
/// `min(2·n_theta - 1, n_phi - 1)`.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    pub directions: Vec<Direction>,
    pub weights: Vec<f64>,
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        Self::new(64, 128)
    }
}

impl SphereQuadrature {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        let (mu, w) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut directions = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (&mu, &w) in mu.iter().zip(&w) {
            let theta = mu.clamp(-1.0, 1.0).acos();
            for k in 0..n_phi {
                directions.push(Direction::new(theta, k as f64 * dphi));
                weights.push(w * dphi);
            }
        }
        Self { directions, weights }
    }

    pub fn integrate(&self, f: impl Fn(Direction) -> f64) -> f64 {
        self.directions
            .iter()
            .zip(&self.weights)
            .map(|(&d, &w)| w * f(d))
            .sum()
    }
}

/// Projects `f` onto the real SH basis up to band `order`.
pub fn project_function(
    f: impl Fn(Direction) -> f64,
    order: i32,
    quad: &SphereQuadrature,
) -> Vec<(ShIndex, f64)> {
    let count = ((order + 1) * (order + 1)) as usize;
    let mut acc = vec![0.0; count];
    for (&d, &w) in quad.directions.iter().zip(&quad.weights) {
        let fv = w * f(d);
        if fv == 0.0 {
            continue;
        }
        for (a, y) in acc.iter_mut().zip(real_sh_all(order, d)) {
            *a += fv * y;
        }
    }
    ShIndex::all(order).zip(acc).collect()
}

/// Reconstructs `Σ c^{l,m} Y^{l,m}(dir)` from coefficients in flat-index order.
pub fn reconstruct(coeffs: &[f64], dir: Direction) -> f64 {
    let order = ((coeffs.len() as f64).sqrt() as i32) - 1;
    coeffs
        .iter()
        .zip(real_sh_all(order, dir))
        .map(|(c, y)| c * y)
        .sum()
}

/// Henyey–Greenstein phase function as a function of `cos` of the scattering angle.
pub fn henyey_greenstein(g: f64, cos_angle: f64) -> f64 {
    let denom = 1.0 + g * g - 2.0 * g * cos_angle;
    (1.0 - g * g) / (4.0 * PI * denom * denom.sqrt())
}

/// Zonal coefficients `p^{l,0}` of a Henyey–Greenstein lobe about +z, obtained
/// by projection; entry `l` holds `p^{l,0}`.
pub fn hg_zonal_coefficients(g: f64, order: i32, quad: &SphereQuadrature) -> Vec<f64> {
    project_function(|d| henyey_greenstein(g, d.theta.cos()), order, quad)
        .into_iter()
        .filter(|(i, _)| i.m == 0)
        .map(|(_, v)| v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Legendre oracle from the explicit Rodrigues-type sum, independent of
    /// the three-term recurrence.
    fn legendre_series(l: i32, m: i32, x: f64) -> f64 {
        // P^{l,m}(x) = (1-x^2)^{m/2} d^m/dx^m P_l(x), P_l(x) = 2^-l Σ_k (-1)^k C(l,k) C(2l-2k,l) x^{l-2k}
        let fact = |n: i32| (1..=n).map(f64::from).product::<f64>();
        let binom = |n: i32, k: i32| fact(n) / (fact(k) * fact(n - k));
        let mut acc = 0.0;
        for k in 0..=(l / 2) {
            let p = l - 2 * k;
            if p < m {
                continue;
            }
            let c = (-1f64).powi(k) * binom(l, k) * binom(2 * l - 2 * k, l);
            let d = fact(p) / fact(p - m);
            acc += c * d * x.powi(p - m);
        }
        acc / 2f64.powi(l) * (1.0 - x * x).powf(f64::from(m) / 2.0)
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(assoc_legendre(0, 0, 0.3).unwrap(), 1.0);
        assert_eq!(assoc_legendre(1, 0, 0.5).unwrap(), 0.5);
        assert!((assoc_legendre(1, 1, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn legendre_matches_series() {
        for l in 0..=8 {
            for m in 0..=l {
                for &x in &[-0.93, -0.4, 0.0, 0.17, 0.66, 0.999] {
                    let a = assoc_legendre(l, m, x).unwrap();
                    let b = legendre_series(l, m, x);
                    assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "l={l} m={m} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn legendre_errors() {
        assert!(matches!(assoc_legendre(2, 1, 1.5), Err(ShError::Domain { .. })));
        assert!(matches!(assoc_legendre(1, 2, 0.1), Err(ShError::Index { .. })));
    }

    #[test]
    fn complex_examples() {
        let d = Direction::new(0.7, 1.9);
        let y00 = complex_sh(0, 0, d).unwrap();
        assert!((y00.re - 0.282_094_791_773_878_1).abs() < 1e-15 && y00.im == 0.0);
        let y10 = complex_sh(1, 0, Direction::new(0.0, 2.2)).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        let a = complex_sh(2, -1, d).unwrap();
        let b = complex_sh(2, 1, d).unwrap();
        assert!((a + b.conj()).norm() < 1e-15);
        assert!(complex_sh(1, 2, d).is_err());
    }

    #[test]
    fn real_closed_form_matches_combination() {
        for i in ShIndex::all(6) {
            for &(t, p) in &[(0.3, 0.1), (1.2, 2.7), (2.9, -1.3), (PI / 2.0, 0.0)] {
                let d = Direction::new(t, p);
                let c = real_sh_combination(i.l, i.m, d).unwrap();
                assert!(c.im.abs() < 1e-12);
                assert!((c.re - real_sh(i.l, i.m, d).unwrap()).abs() < 1e-12);
            }
        }
        let d = Direction::new(0.4, 0.8);
        assert_eq!(real_sh(3, 0, d).unwrap(), complex_sh(3, 0, d).unwrap().re);
    }

    #[test]
    fn real_basis_orientation() {
        let k = (3.0 / (4.0 * PI)).sqrt();
        let x = Direction::from_vector([1.0, 0.0, 0.0]);
        let y = Direction::from_vector([0.0, 1.0, 0.0]);
        assert!((real_sh(1, 1, x).unwrap() - k).abs() < 1e-14);
        assert!((real_sh(1, -1, y).unwrap() - k).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = s * (complex_sh(1, -1, x).unwrap() - complex_sh(1, 1, x).unwrap());
        assert!((real_sh(1, 1, x).unwrap() - expect.re).abs() < 1e-15);
    }

    #[test]
    fn coupling_values() {
        assert!((coupling(Coupling::A, 1, 0).unwrap() - (4.0f64 / 15.0).sqrt()).abs() < 1e-15);
        assert!((coupling(Coupling::B, 1, 0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(coupling(Coupling::B, 1, 1).unwrap(), 0.0);
        assert!((lambda(0) - 3.544_907_701_811_032).abs() < 1e-14);
        assert!(matches!(
            coupling(Coupling::D, 0, 2),
            Err(ShError::Radicand { .. })
        ));
    }

    #[test]
    fn coefficient_identities() {
        use Coupling::*;
        for l in 0..=8 {
            for m in -l..=l {
                let pair = |k1, m1, k2, m2| (coupling(k1, l, m1), coupling(k2, l, m2));
                for (x, y) in [pair(A, m, A, -m), pair(B, m, B, -m), pair(C, m, E, -m), pair(D, m, F, -m)] {
                    match (x, y) {
                        (Ok(x), Ok(y)) => assert_eq!(x, y, "l={l} m={m}"),
                        (Err(_), Err(_)) => {}
                        other => panic!("identity domain mismatch at l={l} m={m}: {other:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn flat_index_roundtrip() {
        for (k, i) in ShIndex::all(7).enumerate() {
            assert_eq!(i.flat(), k);
            assert_eq!(ShIndex::from_flat(k), i);
        }
        assert_eq!(ShIndex::new(1, 1).unwrap().flat(), 3);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        for p in 0..20 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / f64::from(p + 1) };
            assert!((q - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn projection_examples() {
        let quad = SphereQuadrature::default();
        let c = project_function(|_| 1.0 / (4.0 * PI), 4, &quad);
        assert!((c[0].1 - 0.282_094_791_773_878_1).abs() < 1e-12);
        assert!(c[1..].iter().all(|(_, v)| v.abs() < 1e-10));

        let p = hg_zonal_coefficients(0.0, 4, &quad);
        assert!((lambda(0) * p[0] - 1.0).abs() < 1e-10);

        let c = project_function(|d| real_sh(2, 1, d).unwrap(), 4, &quad);
        for (i, v) in c {
            let expect = if i == ShIndex::new(2, 1).unwrap() { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-8, "{i}: {v}");
        }
    }

    #[test]
    fn hg_eigenvalues_are_powers_of_g() {
        let quad = SphereQuadrature::new(96, 8);
        let g = 0.6;
        let p = hg_zonal_coefficients(g, 5, &quad);
        for (l, pl) in p.iter().enumerate() {
            let l = l as i32;
            assert!((lambda(l) * pl - g.powi(l)).abs() < 1e-6, "l={l}");
        }
    }

    #[test]
    fn zonal_projection_has_no_azimuthal_terms() {
        let quad = SphereQuadrature::default();
        let c = project_function(|d| henyey_greenstein(0.3, d.theta.cos()), 5, &quad);
        for (i, v) in c {
            if i.m != 0 {
                assert!(v.abs() < 1e-12, "{i}: {v}");
            }
        }
    }
}
