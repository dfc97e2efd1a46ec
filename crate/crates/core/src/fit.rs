//! Straight-line fits and replicate seeding shared by the statistical probes.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Seed of replicate `index` under `master`, independent of scheduling.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index + 1);
    rng.next_u64()
}

/// A straight-line fit with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

impl SlopeFit {
    /// 95% band `slope ± 1.96 stderr`.
    pub fn band95(&self) -> (f64, f64) {
        (self.slope - 1.96 * self.stderr, self.slope + 1.96 * self.stderr)
    }
}

/// Weighted least squares of `y` on `x` with known standard deviations
/// `sd`; the error is inflated by the residual scatter when it exceeds
/// the stated noise.
pub fn weighted_fit(x: &[f64], y: &[f64], sd: &[f64]) -> Result<SlopeFit> {
    if x.len() < 2 || x.len() != y.len() || y.len() != sd.len() {
        return Err(invalid("fit", "need at least two aligned points"));
    }
    let w: Vec<f64> = sd.iter().map(|s| 1.0 / (s * s).max(1e-300)).collect();
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - xm) * (x - xm)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateScales("all abscissae coincide".into()));
    }
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let chi2: f64 = w
        .iter()
        .zip(x)
        .zip(y)
        .map(|((w, x), y)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let inflate = (chi2 / dof).max(1.0).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        stderr: inflate / sxx.sqrt(),
    })
}

/// Ordinary least squares with residual-based standard error.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() < 3 || x.len() != y.len() {
        return Err(invalid("fit", "need at least three aligned points"));
    }
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|x| (x - xm).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateScales("all abscissae coincide".into()));
    }
    let slope = x.iter().zip(y).map(|(x, y)| (x - xm) * (y - ym)).sum::<f64>() / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = x.iter().zip(y).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(SlopeFit {
        slope,
        intercept,
        stderr: (rss / (n - 2.0) / sxx).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, -1.0, -3.0, -5.0];
        let f = weighted_fit(&x, &y, &[0.1; 4]).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12 && (f.stderr - 0.1 / 5f64.sqrt()).abs() < 1e-12);
        let g = ols_fit(&x, &y).unwrap();
        assert!((g.slope + 2.0).abs() < 1e-12 && g.stderr < 1e-12);
    }

    #[test]
    fn derived_seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..50).map(|i| derive_seed(3, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 50);
        assert_eq!(derive_seed(3, 7), a[7]);
    }
}
