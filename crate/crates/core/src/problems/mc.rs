use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Independent random streams; the partition is fixed so results do not
/// depend on the thread count.
const STREAMS: u64 = 64;
const ROULETTE_WEIGHT: f64 = 1e-3;
const ROULETTE_SURVIVAL: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub r: Vec<f64>,
    pub fluence: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Absorbed power per unit emitted power, and its standard error.
    pub absorbed: f64,
    pub absorbed_stderr: f64,
    pub paths: u64,
    pub seed: u64,
}

/// Shell boundaries halfway between consecutive radii; the outer shells
/// extend by half the neighbouring spacing.
pub fn shell_edges(r: &[f64]) -> Vec<f64> {
    match r.len() {
        0 => Vec::new(),
        1 => vec![0.0, 2.0 * r[0]],
        n => {
            let mut e = Vec::with_capacity(n + 1);
            e.push((r[0] - 0.5 * (r[1] - r[0])).max(0.0));
            e.extend(r.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            e.push(r[n - 1] + 0.5 * (r[n - 1] - r[n - 2]));
            e
        }
    }
}

#[derive(Clone)]
struct Tally {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    absorbed: f64,
    absorbed_sq: f64,
}

impl Tally {
    fn new(n: usize) -> Self {
        Self {
            sum: vec![0.0; n],
            sum_sq: vec![0.0; n],
            absorbed: 0.0,
            absorbed_sq: 0.0,
        }
    }

    fn merge(&mut self, o: &Tally) {
        for k in 0..self.sum.len() {
            self.sum[k] += o.sum[k];
            self.sum_sq[k] += o.sum_sq[k];
        }
        self.absorbed += o.absorbed;
        self.absorbed_sq += o.absorbed_sq;
    }
}

fn isotropic(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let mu = 2.0 * rng.gen::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.gen::<f64>();
    let s = (1.0 - mu * mu).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), mu]
}

fn run_stream(sigma_t: f64, albedo: f64, edges: &[f64], paths: u64, rng: &mut ChaCha8Rng) -> Tally {
    let shells = edges.len() - 1;
    let mut t = Tally::new(shells);
    let mut hist = vec![0.0; shells];
    let mut touched: Vec<usize> = Vec::new();
    for _ in 0..paths {
        let mut p = [0.0f64; 3];
        let mut w = 1.0;
        let mut absorbed = 0.0;
        loop {
            let d = isotropic(rng);
            let s = -(1.0 - rng.gen::<f64>()).ln() / sigma_t;
            for k in 0..3 {
                p[k] += s * d[k];
            }
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if r >= edges[0] && r < edges[shells] {
                let k = edges.partition_point(|&e| e <= r) - 1;
                if hist[k] == 0.0 {
                    touched.push(k);
                }
                hist[k] += w;
            }
            absorbed += w * (1.0 - albedo);
            w *= albedo;
            if w == 0.0 {
                break;
            }
            if w < ROULETTE_WEIGHT {
                if rng.gen::<f64>() < ROULETTE_SURVIVAL {
                    w /= ROULETTE_SURVIVAL;
                } else {
                    break;
                }
            }
        }
        for &k in &touched {
            t.sum[k] += hist[k];
            t.sum_sq[k] += hist[k] * hist[k];
            hist[k] = 0.0;
        }
        touched.clear();
        t.absorbed += absorbed;
        t.absorbed_sq += absorbed * absorbed;
    }
    t
}

/// Fluence around a unit isotropic point source in an infinite homogeneous
/// medium, by an isotropic random walk with implicit capture and a
/// collision estimator averaged over the shells of [`shell_edges`].
pub fn mc_fluence_oracle(sigma_t: f64, albedo: f64, r: &[f64], paths: u64, seed: u64) -> McEstimate {
    let edges = shell_edges(r);
    let shells = r.len();
    let partials: Vec<Tally> = (0..STREAMS)
        .into_par_iter()
        .map(|s| {
            let n = paths / STREAMS + u64::from(s < paths % STREAMS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            run_stream(sigma_t, albedo, &edges, n, &mut rng)
        })
        .collect();
    let mut total = Tally::new(shells);
    for p in &partials {
        total.merge(p);
    }
    let n = paths.max(1) as f64;
    let stderr_of = |sum: f64, sq: f64| {
        let mean = sum / n;
        let var = if n > 1.0 {
            ((sq / n - mean * mean) * n / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        (var / n).sqrt()
    };
    let mut fluence = Vec::with_capacity(shells);
    let mut stderr = Vec::with_capacity(shells);
    for k in 0..shells {
        let vol = 4.0 / 3.0 * PI * (edges[k + 1].powi(3) - edges[k].powi(3));
        let scale = 1.0 / (sigma_t * vol);
        fluence.push(total.sum[k] / n * scale);
        stderr.push(stderr_of(total.sum[k], total.sum_sq[k]) * scale);
    }
    McEstimate {
        r: r.to_vec(),
        fluence,
        stderr,
        absorbed: total.absorbed / n,
        absorbed_stderr: stderr_of(total.absorbed, total.absorbed_sq),
        paths,
        seed,
    }
}
