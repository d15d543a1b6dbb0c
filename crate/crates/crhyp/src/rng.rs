//! Counter-based random number streams for parallel Monte Carlo.
//!
//! Each path derives its own stream from `(seed, path_index)` through a
//! splitmix64 mix, so results are independent of thread scheduling and
//! reproducible for a fixed seed.

/// One splitmix64 scramble.
#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-stream generator: splitmix64 sequence seeded from
/// `(seed, stream)`, with a Box–Muller normal source.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
    spare_normal: Option<f64>,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        // decorrelate the stream index before merging it with the seed
        let mixed = splitmix64(seed ^ splitmix64(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        CounterRng {
            state: mixed,
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `(0, 1)`: 53 random bits, never exactly zero.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (((self.next_u64() >> 11) as f64) + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal by Box–Muller, one spare cached.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let mag = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare_normal = Some(mag * s);
        mag * c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream_is_identical() {
        let mut a = CounterRng::new(42, 7);
        let mut b = CounterRng::new(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_are_decorrelated() {
        // neighbouring streams must not produce correlated uniforms
        let mut a = CounterRng::new(42, 1);
        let mut b = CounterRng::new(42, 2);
        let n = 10_000;
        let mut cov = 0.0;
        let mut ma = 0.0;
        let mut mb = 0.0;
        let xs: Vec<(f64, f64)> = (0..n).map(|_| (a.uniform(), b.uniform())).collect();
        for &(x, y) in &xs {
            ma += x;
            mb += y;
        }
        ma /= n as f64;
        mb /= n as f64;
        for &(x, y) in &xs {
            cov += (x - ma) * (y - mb);
        }
        cov /= n as f64;
        assert!(cov.abs() < 5.0 / (n as f64).sqrt() * (1.0 / 12.0), "cov {cov}");
    }

    #[test]
    fn normal_moments() {
        let mut r = CounterRng::new(1, 0);
        let n = 200_000;
        let mut mean = 0.0;
        let mut var = 0.0;
        let xs: Vec<f64> = (0..n).map(|_| r.normal()).collect();
        for &x in &xs {
            mean += x;
        }
        mean /= n as f64;
        for &x in &xs {
            var += (x - mean) * (x - mean);
        }
        var /= n as f64 - 1.0;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn uniform_stays_in_open_interval() {
        let mut r = CounterRng::new(3, 9);
        for _ in 0..100_000 {
            let u = r.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
