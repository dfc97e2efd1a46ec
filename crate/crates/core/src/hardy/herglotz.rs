//! Herglotz transform `H_n` of the stage density and `F_n = exp(δ H_n)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cantor::RankedIntervalSystem;
use crate::circle::{ANGLE_TOL, TWO_PI};
use crate::error::{invalid, Error, Result};
use crate::nufft;

/// How `H_n` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Sum of per-interval antiderivatives.
    ClosedForm,
    /// Power series through `z^m_prime`.
    TruncatedSeries { m_prime: usize, tail_tol: f64 },
}

/// Tail bound `(1/π)|z|^{M'+1}/(1-|z|)` of the power series.
pub fn series_tail(abs_z: f64, m_prime: usize) -> f64 {
    if abs_z >= 1.0 {
        return f64::INFINITY;
    }
    abs_z.powf(m_prime as f64 + 1.0) / (PI * (1.0 - abs_z))
}

/// Smallest `M'` whose tail bound at radius `r` is at most `tol`.
pub fn series_cutoff(r: f64, tol: f64) -> usize {
    if r <= 0.0 {
        return 0;
    }
    let need = (tol * PI * (1.0 - r)).ln() / r.ln() - 1.0;
    let mut m = need.max(0.0).ceil() as usize;
    while series_tail(r, m) > tol {
        m += 1;
    }
    m
}

/// Fourier coefficients `ĝ_n(k)`, `k = 0..=k_max`, of the rank-`n` density
/// (total mass 1).
pub fn stage_coeffs(sys: &RankedIntervalSystem, n: usize, k_max: usize) -> Result<Vec<Complex64>> {
    sys.check_rank(n)?;
    let sigma = sys.sigma(n);
    let centers: Vec<f64> = sys.lefts(n).iter().map(|a| a + 0.5 * sigma).collect();
    let ones = vec![Complex64::new(1.0, 0.0); centers.len()];
    let full = nufft::type1(&centers, &ones, k_max);
    let norm = 1.0 / centers.len() as f64;
    Ok((0..=k_max)
        .map(|k| {
            let x = 0.5 * k as f64 * sigma;
            let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
            full[k_max + k] * (norm * sinc)
        })
        .collect())
}

/// `log(1 + u)` without cancellation for small `u`.
fn log1p_c(u: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p();
    Complex64::new(re, u.im.atan2(1.0 + u.re))
}

/// The analytic data of stage `n`.
#[derive(Debug, Clone)]
pub struct StageAnalytic<'a> {
    sys: &'a RankedIntervalSystem,
    n: usize,
    delta: f64,
    strategy: Strategy,
    coeffs: Vec<Complex64>,
}

impl<'a> StageAnalytic<'a> {
    pub fn new(sys: &'a RankedIntervalSystem, n: usize, delta: f64, strategy: Strategy) -> Result<Self> {
        sys.check_rank(n)?;
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(invalid("delta", "must be finite and nonnegative"));
        }
        let coeffs = match strategy {
            Strategy::ClosedForm => Vec::new(),
            Strategy::TruncatedSeries { m_prime, tail_tol } => {
                if !(tail_tol > 0.0) {
                    return Err(invalid("tail_tol", "must be positive"));
                }
                stage_coeffs(sys, n, m_prime)?
            }
        };
        Ok(Self {
            sys,
            n,
            delta,
            strategy,
            coeffs,
        })
    }

    pub fn stage(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// `sup |F_n| = exp(δ n / 2π)`.
    pub fn sup_f(&self) -> f64 {
        (self.delta * self.n as f64 / TWO_PI).exp()
    }

    fn check_endpoint(&self, z: Complex64) -> Result<()> {
        let theta = z.arg().rem_euclid(TWO_PI);
        let lefts = self.sys.lefts(self.n);
        let sigma = self.sys.sigma(self.n);
        let i = lefts.partition_point(|&a| a <= theta);
        for j in [i.wrapping_sub(1), i] {
            let j = j.min(lefts.len() - 1);
            for e in [lefts[j], lefts[j] + sigma] {
                let d = (theta - e).rem_euclid(TWO_PI);
                if d.min(TWO_PI - d) < ANGLE_TOL {
                    return Err(Error::EndpointSingularity(e));
                }
            }
        }
        if self.n > 0 {
            let e = lefts[0];
            let d = (theta - e).rem_euclid(TWO_PI);
            if d.min(TWO_PI - d) < ANGLE_TOL {
                return Err(Error::EndpointSingularity(e));
            }
        }
        Ok(())
    }

    /// `H_n(z)` for `|z| ≤ 1`.
    pub fn herglotz(&self, z: Complex64) -> Result<Complex64> {
        let r = z.norm();
        if !(r <= 1.0 + 1e-15) {
            return Err(invalid("z", "must lie in the closed unit disk"));
        }
        match self.strategy {
            Strategy::ClosedForm => {
                if r >= 1.0 - 1e-15 && self.n > 0 {
                    self.check_endpoint(z)?;
                }
                Ok(self.closed_form(z))
            }
            Strategy::TruncatedSeries { m_prime, tail_tol } => {
                let tail = series_tail(r, m_prime);
                if tail > tail_tol {
                    let required = if r < 1.0 { series_cutoff(r, tail_tol) } else { usize::MAX };
                    return Err(Error::SeriesTail { tail, required });
                }
                Ok(self.series(z))
            }
        }
    }

    fn closed_form(&self, z: Complex64) -> Complex64 {
        if self.n == 0 {
            return Complex64::new(1.0 / TWO_PI, 0.0);
        }
        let sigma = self.sys.sigma(self.n);
        let chord = Complex64::new(0.0, 2.0 * (0.5 * sigma).sin());
        let mut acc = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0);
        for &a in self.sys.lefts(self.n) {
            let za = z * Complex64::from_polar(1.0, -a);
            let num = z * Complex64::from_polar(1.0, -(a + 0.5 * sigma)) * chord;
            let term = log1p_c(num / (Complex64::new(1.0, 0.0) - za));
            let y = term - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        let scale = self.n as f64 / (4.0 * PI * PI);
        let count = self.sys.lefts(self.n).len() as f64;
        Complex64::new(scale * count * sigma, 0.0) + Complex64::new(0.0, -2.0 * scale) * acc
    }

    fn series(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().skip(1).rev() {
            acc = (acc + c) * z;
        }
        (self.coeffs[0] + 2.0 * acc) / TWO_PI
    }

    /// `F_n(z) = exp(δ H_n(z))`.
    pub fn stage_f(&self, z: Complex64) -> Result<Complex64> {
        Ok((self.delta * self.herglotz(z)?).exp())
    }
}

/// Free-function form of [`StageAnalytic::herglotz`].
pub fn herglotz_eval(sa: &StageAnalytic, z: Complex64) -> Result<Complex64> {
    sa.herglotz(z)
}

/// Free-function form of [`StageAnalytic::stage_f`].
pub fn stage_f(sa: &StageAnalytic, z: Complex64) -> Result<Complex64> {
    sa.stage_f(z)
}
