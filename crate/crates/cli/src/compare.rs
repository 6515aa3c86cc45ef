//! Error metrics between a computed profile and a reference curve.

use std::fmt;

use crate::{CliError, Profile};

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub points: usize,
    /// Root mean square of `a - ref`.
    pub l2_abs: f64,
    /// `‖a - ref‖₂ / ‖ref‖₂`.
    pub l2_rel: f64,
    pub linf_abs: f64,
    /// `max |a - ref| / max |ref|`.
    pub linf_rel: f64,
    /// Mean of `(a - ref) / ref` over points with a nonzero reference.
    pub mean_rel: f64,
    pub mean_abs: f64,
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "points {}", self.points)?;
        writeln!(f, "l2_abs {:e}", self.l2_abs)?;
        writeln!(f, "l2_rel {:e}", self.l2_rel)?;
        writeln!(f, "linf_abs {:e}", self.linf_abs)?;
        writeln!(f, "linf_rel {:e}", self.linf_rel)?;
        writeln!(f, "mean_signed_rel {:e}", self.mean_rel)?;
        write!(f, "mean_signed_abs {:e}", self.mean_abs)
    }
}

/// Linear interpolation of `p` at `r`; `None` outside its range.
fn sample(p: &Profile, r: f64) -> Option<f64> {
    let k = p.r.partition_point(|&x| x < r);
    if k < p.len() && (p.r[k] - r).abs() <= 1e-9 * r.abs().max(1.0) {
        return Some(p.value[k]);
    }
    if k == 0 || k == p.len() {
        return None;
    }
    let t = (r - p.r[k - 1]) / (p.r[k] - p.r[k - 1]);
    Some(p.value[k - 1] + t * (p.value[k] - p.value[k - 1]))
}

/// Compares `a` against `reference` at the radii of `a` with
/// `min_r <= r <= max_r`. The reference is interpolated linearly where the
/// radii differ; points outside its range are skipped.
pub fn compare_profiles(a: &Profile, reference: &Profile, min_r: f64, max_r: f64) -> Result<Metrics, CliError> {
    if reference.r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("reference radii must be increasing".into()));
    }
    let pairs: Vec<(f64, f64)> = a
        .r
        .iter()
        .zip(&a.value)
        .filter(|(r, _)| **r >= min_r && **r <= max_r)
        .filter_map(|(&r, &v)| sample(reference, r).map(|b| (v, b)))
        .collect();
    if pairs.is_empty() {
        return Err(CliError::Config(format!(
            "no profile points in [{min_r}, {max_r}] overlap the reference"
        )));
    }
    let n = pairs.len() as f64;
    let (mut sq, mut ref_sq, mut linf, mut ref_max, mut sum_abs) = (0.0, 0.0, 0.0f64, 0.0f64, 0.0);
    let (mut sum_rel, mut rel_n) = (0.0, 0usize);
    for &(v, b) in &pairs {
        let d = v - b;
        sq += d * d;
        ref_sq += b * b;
        linf = linf.max(d.abs());
        ref_max = ref_max.max(b.abs());
        sum_abs += d;
        if b != 0.0 {
            sum_rel += d / b;
            rel_n += 1;
        }
    }
    let ratio = |x: f64, y: f64| if y > 0.0 { x / y } else if x == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(Metrics {
        points: pairs.len(),
        l2_abs: (sq / n).sqrt(),
        l2_rel: ratio(sq.sqrt(), ref_sq.sqrt()),
        linf_abs: linf,
        linf_rel: ratio(linf, ref_max),
        mean_rel: if rel_n > 0 { sum_rel / rel_n as f64 } else { 0.0 },
        mean_abs: sum_abs / n,
    })
}
