use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smoothly interpolated random lattice values on the unit cube, periodic
/// with period `cells` per axis at the base frequency.
pub(super) struct ValueNoise {
    cells: usize,
    lattice: Vec<f64>,
}

impl ValueNoise {
    pub fn new(seed: u64, cells: usize) -> Self {
        // three octaves share the lattice at doubled frequencies
        let n = cells * 4;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lattice = (0..n * n * n).map(|_| rng.gen::<f64>()).collect();
        Self { cells: n, lattice }
    }

    fn at(&self, i: i64, j: i64, k: i64) -> f64 {
        let n = self.cells as i64;
        let w = |x: i64| x.rem_euclid(n) as usize;
        self.lattice[w(i) + self.cells * (w(j) + self.cells * w(k))]
    }

    fn sample(&self, p: [f64; 3], freq: f64) -> f64 {
        let s = |t: f64| t * t * (3.0 - 2.0 * t);
        let q = p.map(|x| x * freq);
        let i = q.map(|x| x.floor() as i64);
        let f = [s(q[0] - i[0] as f64), s(q[1] - i[1] as f64), s(q[2] - i[2] as f64)];
        let mut acc = 0.0;
        for c in 0..8 {
            let d = [c & 1, (c >> 1) & 1, (c >> 2) & 1];
            let mut w = 1.0;
            for k in 0..3 {
                w *= if d[k] == 1 { f[k] } else { 1.0 - f[k] };
            }
            acc += w * self.at(i[0] + d[0] as i64, i[1] + d[1] as i64, i[2] + d[2] as i64);
        }
        acc
    }

    /// Sum of `octaves` samples at doubling frequency and halving amplitude,
    /// normalized to [0, 1].
    pub fn fractal(&self, p: [f64; 3], octaves: u32) -> f64 {
        let base = (self.cells / 4) as f64;
        let (mut acc, mut norm, mut amp, mut freq) = (0.0, 0.0, 1.0, base);
        for _ in 0..octaves {
            acc += amp * self.sample(p, freq);
            norm += amp;
            amp *= 0.5;
            freq *= 2.0;
        }
        acc / norm
    }
}
