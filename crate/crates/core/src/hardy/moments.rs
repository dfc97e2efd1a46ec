//! Monte-Carlo moments of `X_m = ∫_{K_n} f_n e^{-imt} dt` over random
//! systems, and growth of Taylor coefficients in the large-`δ` regime.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boundary::{QuadOptions, SupportIntegrals};
use super::taylor::{stage_for, taylor_coeff, TaylorRequest};
use crate::cantor::{build, OffsetMode, RankedIntervalSystem};
use crate::circle::TWO_PI;
use crate::error::{invalid, Error, Result};
use crate::fit::{derive_seed, ols_fit, weighted_fit, SlopeFit};

/// Fewest seeds a probe accepts.
pub const MIN_SEEDS: usize = 16;

/// Parameters of a moment probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    pub delta: f64,
    pub c_log: f64,
    /// Dyadic frequencies.
    pub m_list: Vec<i64>,
    pub seeds: Vec<u64>,
    pub quad_tol: f64,
    pub quad_order: usize,
}

impl MomentConfig {
    /// `count` seeds derived from `master`.
    pub fn new(delta: f64, m_list: Vec<i64>, master: u64, count: usize) -> Self {
        let q = QuadOptions::default();
        Self {
            delta,
            c_log: 2.0,
            m_list,
            seeds: (0..count as u64).map(|i| derive_seed(master, i)).collect(),
            quad_tol: q.tol,
            quad_order: q.order,
        }
    }
}

/// Per-seed `X_m` and moment estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProbe {
    pub config: MomentConfig,
    /// `x[i][s]`: frequency `m_list[i]`, seed `seeds[s]`.
    pub x: Vec<Vec<Complex64>>,
    pub e4: Vec<f64>,
    pub e4_stderr: Vec<f64>,
    pub e2: Vec<f64>,
    /// Fit of `ln E|X|⁴` against `ln m`.
    pub fit: SlopeFit,
}

/// Mean and standard error of the mean.
fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// `X_m` for one seed at every frequency of `m_list`.
pub fn probe_seed(cfg: &MomentConfig, seed: u64) -> Result<Vec<Complex64>> {
    let n_max = cfg.m_list.iter().map(|&m| stage_for(m, cfg.c_log)).max().unwrap_or(1);
    let sys = build(seed, n_max, OffsetMode::Random)?;
    probe_system(cfg, &sys)
}

fn probe_system(cfg: &MomentConfig, sys: &RankedIntervalSystem) -> Result<Vec<Complex64>> {
    let opts = QuadOptions {
        tol: cfg.quad_tol,
        order: cfg.quad_order,
    };
    let mut out = Vec::with_capacity(cfg.m_list.len());
    let mut cached: Option<(usize, SupportIntegrals)> = None;
    for &m in &cfg.m_list {
        let n = stage_for(m, cfg.c_log);
        if cached.as_ref().map(|c| c.0) != Some(n) {
            cached = Some((n, SupportIntegrals::new(sys, cfg.delta, n, opts)?));
        }
        out.push(cached.as_ref().expect("just set").1.at(m));
    }
    Ok(out)
}

/// Runs the probe over every seed and fits the fourth-moment decay.
pub fn moment_probe(cfg: &MomentConfig) -> Result<MomentProbe> {
    if cfg.seeds.len() < MIN_SEEDS {
        return Err(Error::InsufficientReplication {
            got: cfg.seeds.len(),
            need: MIN_SEEDS,
        });
    }
    if cfg.m_list.len() < 2 || cfg.m_list.iter().any(|&m| m < 2 || (m & (m - 1)) != 0) {
        return Err(invalid("m_list", "need at least two dyadic frequencies >= 2"));
    }
    // Each seed is independent; collection keeps seed order.
    let per_seed = cfg
        .seeds
        .par_iter()
        .map(|&s| probe_seed(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let k = cfg.m_list.len();
    let x: Vec<Vec<Complex64>> = (0..k).map(|i| per_seed.iter().map(|v| v[i]).collect()).collect();
    let mut e4 = Vec::with_capacity(k);
    let mut e4_stderr = Vec::with_capacity(k);
    let mut e2 = Vec::with_capacity(k);
    for row in &x {
        let q: Vec<f64> = row.iter().map(|v| v.norm_sqr().powi(2)).collect();
        let (m4, se4) = mean_se(&q);
        let (m2, _) = mean_se(&row.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
        e4.push(m4);
        e4_stderr.push(se4);
        e2.push(m2);
    }
    if e4.iter().any(|&v| v <= 0.0) {
        return Err(Error::BelowNoiseFloor { floor: 0.0 });
    }
    let lx: Vec<f64> = cfg.m_list.iter().map(|&m| (m as f64).ln()).collect();
    let ly: Vec<f64> = e4.iter().map(|v| v.ln()).collect();
    let sd: Vec<f64> = e4.iter().zip(&e4_stderr).map(|(m, s)| (s / m).max(1e-12)).collect();
    let fit = weighted_fit(&lx, &ly, &sd)?;
    Ok(MomentProbe {
        config: cfg.clone(),
        x,
        e4,
        e4_stderr,
        e2,
        fit,
    })
}

/// Growth of `|F̂(m)|` with `m` at a fixed system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub delta: f64,
    pub c_log: f64,
    pub m: Vec<i64>,
    pub abs_coeff: Vec<f64>,
    pub error_bound: Vec<f64>,
    /// `None` when every coefficient is zero within its budget.
    pub fit: Option<SlopeFit>,
    pub all_zero: bool,
    /// Slope over the upper half exceeds twice the lower-half slope plus one.
    pub superpolynomial: bool,
    /// `|F̂_n(m)| ≤ exp(δn/2π)` at every computed `m`.
    pub stage_bound_ok: bool,
}

/// Fits `ln|F̂(m)|` against `ln m` at stages `n(m)`.
pub fn growth_fit(sys: &RankedIntervalSystem, delta: f64, c_log: f64, m_list: &[i64]) -> Result<GrowthReport> {
    if m_list.len() < 3 || m_list.iter().any(|&m| m < 1) {
        return Err(invalid("m_list", "need at least three positive frequencies"));
    }
    let mut abs_coeff = Vec::new();
    let mut error_bound = Vec::new();
    let mut stage_bound_ok = true;
    for &m in m_list {
        let req = TaylorRequest {
            c_log,
            ..TaylorRequest::new(m)
        };
        let r = taylor_coeff(sys, delta, &req)?;
        let n = stage_for(m, c_log);
        let sup = (delta * n as f64 / TWO_PI).exp();
        stage_bound_ok &= r.value.norm() <= sup * (1.0 + 1e-9);
        abs_coeff.push(r.value.norm());
        error_bound.push(r.error_bound);
    }
    let keep: Vec<usize> = (0..m_list.len()).filter(|&i| abs_coeff[i] > 10.0 * error_bound[i]).collect();
    let all_zero = keep.is_empty();
    let (fit, superpolynomial) = if keep.len() >= 3 {
        let lx: Vec<f64> = keep.iter().map(|&i| (m_list[i] as f64).ln()).collect();
        let ly: Vec<f64> = keep.iter().map(|&i| abs_coeff[i].ln()).collect();
        let fit = ols_fit(&lx, &ly)?;
        let h = lx.len() / 2;
        let sup = if h >= 3 && lx.len() - h >= 3 {
            let lo = ols_fit(&lx[..h], &ly[..h])?;
            let hi = ols_fit(&lx[h..], &ly[h..])?;
            hi.slope > 2.0 * lo.slope.abs() + 1.0
        } else {
            false
        };
        (Some(fit), sup)
    } else {
        (None, false)
    };
    Ok(GrowthReport {
        delta,
        c_log,
        m: m_list.to_vec(),
        abs_coeff,
        error_bound,
        fit,
        all_zero,
        superpolynomial,
        stage_bound_ok,
    })
}
