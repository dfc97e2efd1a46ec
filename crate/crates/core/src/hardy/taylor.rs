//! Taylor coefficients of `F_n` by sampling a circle of radius `r < 1` and
//! applying an FFT.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::herglotz::{series_cutoff, stage_coeffs, StageAnalytic, Strategy};
use crate::cantor::RankedIntervalSystem;
use crate::circle::TWO_PI;
use crate::error::{invalid, Error, Result};
use crate::report::CertifiedReport;

/// Largest contour sample count we will allocate.
pub const MAX_FFT_SIZE: usize = 1 << 24;

/// Stage `n(m) = max(1, ⌈C_log ln m⌉)` used for coefficient `m`.
pub fn stage_for(m: i64, c_log: f64) -> usize {
    if m <= 1 {
        return 1;
    }
    ((c_log * (m as f64).ln()).ceil() as usize).max(1)
}

/// Parameters of one coefficient extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorRequest {
    pub m: i64,
    pub c_log: f64,
    /// Overrides `n(m)`.
    pub stage: Option<usize>,
    /// Defaults to `1 - 1/max(m, 2)`.
    pub radius: Option<f64>,
    /// Power of two. Defaults to the smallest admissible size.
    pub fft_size: Option<usize>,
    /// Tolerance on the truncated series of `H_n` along the contour.
    pub tail_tol: f64,
    /// Tolerance on the aliasing bound.
    pub alias_tol: f64,
}

impl TaylorRequest {
    pub fn new(m: i64) -> Self {
        Self {
            m,
            c_log: 2.0,
            stage: None,
            radius: None,
            fft_size: None,
            tail_tol: 1e-14,
            alias_tol: 1e-12,
        }
    }
}

/// Coefficients `c_j / r^j` of samples `f(r ω^l)`, `l = 0..P`.
pub fn contour_coefficients(mut samples: Vec<Complex64>, radius: f64) -> Vec<Complex64> {
    let p = samples.len();
    FftPlanner::new().plan_fft_forward(p).process(&mut samples);
    let mut scale = 1.0 / p as f64;
    let inv_r = 1.0 / radius;
    for s in samples.iter_mut().take(p / 2 + 1) {
        *s *= scale;
        scale *= inv_r;
    }
    samples.truncate(p / 2 + 1);
    samples
}

/// Coefficient `m` of an analytic `f` from `fft_size` samples at `radius`.
pub fn taylor_of(f: impl Fn(Complex64) -> Complex64, m: usize, radius: f64, fft_size: usize) -> Complex64 {
    let samples = (0..fft_size)
        .map(|l| f(Complex64::from_polar(radius, TWO_PI * l as f64 / fft_size as f64)))
        .collect();
    contour_coefficients(samples, radius)[m]
}

/// Aliasing bound for coefficient `m`: `sup|F| r^{P-m} / (1 - r^P)`.
pub fn alias_bound(sup_f: f64, radius: f64, fft_size: usize, m: i64) -> f64 {
    let rp = radius.powf(fft_size as f64);
    sup_f * radius.powf(fft_size as f64 - m as f64) / (1.0 - rp)
}

/// Default size: next power of two `≥ max(8m, 4m⌈δn⌉)`, doubled until the
/// aliasing bound meets `tol`.
pub fn default_fft_size(m: i64, delta: f64, n: usize, radius: f64, tol: f64) -> Result<usize> {
    let m = m.max(1);
    let base = (8 * m).max(4 * m * (delta * n as f64).ceil() as i64) as usize;
    let mut p = base.next_power_of_two();
    let sup = (delta * n as f64 / TWO_PI).exp();
    while alias_bound(sup, radius, p, m) > tol {
        p *= 2;
        if p > MAX_FFT_SIZE {
            return Err(Error::Aliasing {
                bound: alias_bound(sup, radius, MAX_FFT_SIZE, m),
                suggested: p,
            });
        }
    }
    Ok(p)
}

/// All Taylor coefficients of `F_n` resolved by one contour.
#[derive(Debug, Clone)]
pub struct StageTaylor {
    pub stage: usize,
    pub delta: f64,
    pub radius: f64,
    pub fft_size: usize,
    pub sup_f: f64,
    /// Largest gap between the contour samples of `H_n` and the closed form.
    pub residual: f64,
    pub tail_tol: f64,
    coeffs: Vec<Complex64>,
}

impl StageTaylor {
    pub fn compute(
        sys: &RankedIntervalSystem,
        delta: f64,
        n: usize,
        radius: f64,
        fft_size: usize,
        tail_tol: f64,
    ) -> Result<Self> {
        sys.check_rank(n)?;
        if !(radius > 0.0 && radius < 1.0) {
            return Err(invalid("radius", "must lie in (0, 1)"));
        }
        if !fft_size.is_power_of_two() || fft_size < 2 || fft_size > MAX_FFT_SIZE {
            return Err(invalid("fft_size", "must be a power of two up to 2^24"));
        }
        let k_max = series_cutoff(radius, tail_tol).max(1);
        let g = stage_coeffs(sys, n, k_max)?;
        let mut bins = vec![Complex64::new(0.0, 0.0); fft_size];
        bins[0] = g[0] / TWO_PI;
        let mut rk = 1.0;
        for (k, c) in g.iter().enumerate().skip(1) {
            rk *= radius;
            bins[k % fft_size] += c * (2.0 * rk / TWO_PI);
        }
        FftPlanner::new().plan_fft_inverse(fft_size).process(&mut bins);
        let sa = StageAnalytic::new(sys, n, delta, Strategy::ClosedForm)?;
        let mut residual: f64 = 0.0;
        for i in 0..8 {
            let l = i * fft_size / 8 + (i * 7919) % (fft_size / 8).max(1);
            let z = Complex64::from_polar(radius, TWO_PI * l as f64 / fft_size as f64);
            residual = residual.max((sa.herglotz(z)? - bins[l]).norm());
        }
        for b in bins.iter_mut() {
            *b = (delta * *b).exp();
        }
        let coeffs = contour_coefficients(bins, radius);
        Ok(Self {
            stage: n,
            delta,
            radius,
            fft_size,
            sup_f: sa.sup_f(),
            residual,
            tail_tol,
            coeffs,
        })
    }

    /// Largest index whose coefficient is available.
    pub fn max_index(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    /// `F̂_n(m)`; zero for `m < 0`.
    pub fn coeff(&self, m: i64) -> Result<Complex64> {
        if m < 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        self.coeffs
            .get(m as usize)
            .copied()
            .ok_or_else(|| invalid("m", format!("beyond fft_size/2 = {}", self.max_index())))
    }

    /// Error budget for coefficient `m`: aliasing, series truncation and
    /// residual against the closed form, and rounding.
    pub fn budget(&self, m: i64) -> f64 {
        let rm = self.radius.powf(-(m.max(0) as f64));
        let h_err = self.residual + self.tail_tol;
        let f_err = self.sup_f * ((self.delta * h_err).exp() - 1.0);
        let round = 1e-15 * self.sup_f * (self.fft_size as f64).log2();
        alias_bound(self.sup_f, self.radius, self.fft_size, m) + (f_err + round) * rm
    }

    pub fn report(&self, m: i64, c_log: f64) -> Result<CertifiedReport> {
        Ok(CertifiedReport::new("taylor", m, self.coeff(m)?, self.budget(m))
            .with("stage_n", self.stage as f64)
            .with("alias_bound", alias_bound(self.sup_f, self.radius, self.fft_size, m))
            .with("residual", self.residual)
            .with("radius", self.radius)
            .with("fft_size", self.fft_size as f64)
            .with("c_log", c_log)
            .with("delta", self.delta))
    }
}

/// `F̂(m)` at stage `n(m)` with its certificate.
pub fn taylor_coeff(sys: &RankedIntervalSystem, delta: f64, req: &TaylorRequest) -> Result<CertifiedReport> {
    let m = req.m;
    if !(delta >= 0.0) {
        return Err(invalid("delta", "must be nonnegative"));
    }
    let n = req.stage.unwrap_or_else(|| stage_for(m, req.c_log));
    sys.check_rank(n)?;
    if m < 0 {
        return Ok(CertifiedReport::new("taylor", m, Complex64::new(0.0, 0.0), 0.0)
            .with("stage_n", n as f64)
            .with("alias_bound", 0.0)
            .with("residual", 0.0)
            .with("c_log", req.c_log)
            .with("delta", delta));
    }
    let radius = req.radius.unwrap_or(1.0 - 1.0 / m.max(2) as f64);
    let sup = (delta * n as f64 / TWO_PI).exp();
    let p = match req.fft_size {
        Some(p) => {
            if !p.is_power_of_two() || (p as i64) < 2 * m + 2 {
                return Err(invalid("fft_size", "must be a power of two above 2m"));
            }
            let bound = alias_bound(sup, radius, p, m);
            if bound > req.alias_tol {
                return Err(Error::Aliasing {
                    bound,
                    suggested: default_fft_size(m, delta, n, radius, req.alias_tol)?,
                });
            }
            p
        }
        None => default_fft_size(m, delta, n, radius, req.alias_tol)?,
    };
    StageTaylor::compute(sys, delta, n, radius, p, req.tail_tol)?.report(m, req.c_log)
}
