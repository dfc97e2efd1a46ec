//! Type-1 non-uniform FFT by Gaussian gridding:
//! `F(k) = Σ_j c_j e^{-ik x_j}` for `k ∈ [-K, K]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::circle::TWO_PI;

/// Half-width of the spreading stencil, in grid points. Gives about twelve
/// correct digits relative to `Σ|c_j|`.
const SPREAD: i64 = 12;

/// Below this many source-mode products the direct sum is used.
const DIRECT_LIMIT: usize = 1 << 16;

/// Sums `Σ_j c_j e^{-ik x_j}` for `k = -k_max..=k_max`; index `k + k_max`.
pub fn type1(x: &[f64], c: &[Complex64], k_max: usize) -> Vec<Complex64> {
    assert_eq!(x.len(), c.len(), "one strength per source");
    let modes = 2 * k_max + 1;
    if x.len().saturating_mul(modes) <= DIRECT_LIMIT {
        return direct(x, c, k_max);
    }
    let grid = (2 * modes).next_power_of_two().max(64);
    let r = grid as f64 / modes as f64;
    let tau = PI * SPREAD as f64 / (modes as f64 * modes as f64 * r * (r - 0.5));
    let h = TWO_PI / grid as f64;
    let mut e3 = vec![0.0; SPREAD as usize + 1];
    for (l, v) in e3.iter_mut().enumerate() {
        let d = l as f64 * h;
        *v = (-d * d / (4.0 * tau)).exp();
    }
    let mut f = vec![Complex64::new(0.0, 0.0); grid];
    let gm = grid as i64;
    for (&xj, &cj) in x.iter().zip(c) {
        let xr = xj.rem_euclid(TWO_PI);
        let m0 = (xr / h).floor() as i64;
        let d = xr - m0 as f64 * h;
        let e1 = (-d * d / (4.0 * tau)).exp();
        let e2 = (d * h / (2.0 * tau)).exp();
        let base = cj * e1;
        let mut up = 1.0;
        let mut down = 1.0;
        let inv = 1.0 / e2;
        f[m0.rem_euclid(gm) as usize] += base * e3[0];
        for l in 1..=SPREAD {
            up *= e2;
            down *= inv;
            let w = e3[l as usize];
            f[(m0 + l).rem_euclid(gm) as usize] += base * (up * w);
            f[(m0 - l).rem_euclid(gm) as usize] += base * (down * w);
        }
    }
    FftPlanner::new().plan_fft_forward(grid).process(&mut f);
    let scale = (PI / tau).sqrt() / grid as f64;
    (0..modes)
        .map(|i| {
            let k = i as i64 - k_max as i64;
            let kf = k as f64;
            f[k.rem_euclid(gm) as usize] * (scale * (kf * kf * tau).exp())
        })
        .collect()
}

/// Reference implementation of [`type1`].
pub fn direct(x: &[f64], c: &[Complex64], k_max: usize) -> Vec<Complex64> {
    let km = k_max as i64;
    (-km..=km)
        .map(|k| {
            x.iter()
                .zip(c)
                .map(|(&xj, &cj)| cj * Complex64::from_polar(1.0, -(k as f64) * xj))
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 3000;
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 20.0 - 5.0).collect();
        let c: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let fast = type1(&x, &c, 300);
        let slow = direct(&x, &c, 300);
        let scale: f64 = c.iter().map(|v| v.norm()).sum();
        let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11 * scale, "err {err}");
    }
}
