//! The distribution `S` through its finite-stage surrogate.
//!
//! On `K_N` the boundary function is `λ e^{iδg̃}` with `λ = exp(δN/2π)`;
//! off `K_N` it is `e^{iδg̃}`. The singular part left over in the limit is
//! `(1 - 1/λ) f_N 1_{K_N}`, whose coefficients are `(1 - 1/λ) X(m)`. For
//! `m` whose stage `n(m)` exceeds the boundary stage `N_f`, the Taylor
//! difference `2π(F̂_{n(m)} - F̂_{N_f})` is added on top.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::boundary::{QuadOptions, SupportIntegrals};
use super::taylor::{default_fft_size, stage_for, StageTaylor};
use crate::cantor::RankedIntervalSystem;
use crate::circle::{pair, CoeffWindow, SmoothBump, TWO_PI};
use crate::error::{invalid, Error, Result};
use crate::report::CertifiedReport;

/// Parameters of a surrogate window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatConfig {
    pub delta: f64,
    pub c_log: f64,
    /// Boundary stage `N_f`.
    pub n_f: usize,
    /// Window `-m_max..=m_max`.
    pub m_max: usize,
    pub quad_tol: f64,
    pub quad_order: usize,
    pub tail_tol: f64,
    pub alias_tol: f64,
    /// Also compute at `N_f + 1` and report the change.
    pub stability: bool,
}

impl ShatConfig {
    pub fn new(delta: f64, n_f: usize, m_max: usize) -> Self {
        let q = QuadOptions::default();
        Self {
            delta,
            c_log: 2.0,
            n_f,
            m_max,
            quad_tol: q.tol,
            quad_order: q.order,
            tail_tol: 1e-14,
            alias_tol: 1e-12,
            stability: true,
        }
    }

    fn quad(&self) -> QuadOptions {
        QuadOptions {
            tol: self.quad_tol,
            order: self.quad_order,
        }
    }
}

/// `Ŝ(m)` on a symmetric window with per-index budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatWindow {
    pub config: ShatConfig,
    pub coeffs: CoeffWindow,
    /// Error budget per index, aligned with `coeffs`.
    pub budget: Vec<f64>,
    /// `|Ŝ@N_f - Ŝ@(N_f+1)|` per index, when requested.
    pub stability: Option<Vec<f64>>,
    /// Parseval bound `2π κ² λ² |K_{N_f}|` on `Σ|Ŝ(m)|²` over the
    /// support part.
    pub l2_bound: f64,
}

impl ShatWindow {
    pub fn stage(&self, m: i64) -> usize {
        if m <= 0 {
            self.config.n_f
        } else {
            stage_for(m, self.config.c_log).max(self.config.n_f)
        }
    }

    pub fn report(&self, m: i64) -> Result<CertifiedReport> {
        let v = self.coeffs.get(m)?;
        let i = (m - self.coeffs.lo()) as usize;
        let mut r = CertifiedReport::new("shat", m, v, self.budget[i])
            .with("stage_n", self.stage(m) as f64)
            .with("n_f", self.config.n_f as f64)
            .with("c_log", self.config.c_log)
            .with("delta", self.config.delta);
        if let Some(s) = &self.stability {
            r = r.with("stability", s[i]);
        }
        Ok(r)
    }
}

struct Surrogate {
    values: Vec<Complex64>,
    budget: Vec<f64>,
    l2_bound: f64,
}

fn surrogate(sys: &RankedIntervalSystem, cfg: &ShatConfig, n_f: usize) -> Result<Surrogate> {
    let m_max = cfg.m_max;
    let x = SupportIntegrals::new(sys, cfg.delta, n_f, cfg.quad())?;
    let lambda = x.lambda();
    let kappa = 1.0 - 1.0 / lambda;
    let win = x.window(m_max);
    let x_err = kappa * (x.tail_bound() + 1e-12 * lambda * TWO_PI);
    let mut values: Vec<Complex64> = win.iter().map(|v| v * kappa).collect();
    let mut budget = vec![x_err; values.len()];
    let support = sys.lefts(n_f).len() as f64 * sys.sigma(n_f);
    let l2_bound = TWO_PI * kappa * kappa * lambda * lambda * support;

    let top = stage_for(m_max as i64, cfg.c_log);
    if top > n_f {
        let first = (1..=m_max as i64).find(|&m| stage_for(m, cfg.c_log) > n_f).unwrap_or(1);
        let base = stage_taylor(sys, cfg, n_f, m_max as i64)?;
        let mut lo = first;
        while lo <= m_max as i64 {
            let s = stage_for(lo, cfg.c_log);
            let mut hi = lo;
            while hi < m_max as i64 && stage_for(hi + 1, cfg.c_log) == s {
                hi += 1;
            }
            let st = stage_taylor(sys, cfg, s, hi)?;
            for m in lo..=hi {
                let i = (m + m_max as i64) as usize;
                values[i] += TWO_PI * (st.coeff(m)? - base.coeff(m)?);
                budget[i] += TWO_PI * (st.budget(m) + base.budget(m));
            }
            lo = hi + 1;
        }
    }
    Ok(Surrogate {
        values,
        budget,
        l2_bound,
    })
}

fn stage_taylor(sys: &RankedIntervalSystem, cfg: &ShatConfig, n: usize, m_hi: i64) -> Result<StageTaylor> {
    let r = 1.0 - 1.0 / m_hi.max(2) as f64;
    let p = default_fft_size(m_hi, cfg.delta, n, r, cfg.alias_tol)?;
    StageTaylor::compute(sys, cfg.delta, n, r, p, cfg.tail_tol)
}

/// `Ŝ(m)` for `|m| ≤ m_max`.
pub fn shat_window(sys: &RankedIntervalSystem, cfg: &ShatConfig) -> Result<ShatWindow> {
    if !(cfg.delta >= 0.0 && cfg.delta.is_finite()) {
        return Err(invalid("delta", "must be finite and nonnegative"));
    }
    if cfg.m_max == 0 {
        return Err(invalid("m_max", "must be positive"));
    }
    let top = stage_for(cfg.m_max as i64, cfg.c_log).max(cfg.n_f + cfg.stability as usize);
    sys.check_rank(top)?;
    let main = surrogate(sys, cfg, cfg.n_f)?;
    let stability = if cfg.stability {
        let next = surrogate(sys, cfg, cfg.n_f + 1)?;
        Some(main.values.iter().zip(&next.values).map(|(a, b)| (a - b).norm()).collect())
    } else {
        None
    };
    let m = cfg.m_max as i64;
    Ok(ShatWindow {
        config: cfg.clone(),
        coeffs: CoeffWindow::new(-m, m, main.values)?,
        budget: main.budget,
        stability,
        l2_bound: main.l2_bound,
    })
}

/// `Ŝ(m)` at a single index.
pub fn shat(sys: &RankedIntervalSystem, delta: f64, m: i64, c_log: f64, n_f: usize) -> Result<CertifiedReport> {
    let mut cfg = ShatConfig::new(delta, n_f, m.unsigned_abs().max(1) as usize);
    cfg.c_log = c_log;
    shat_window(sys, &cfg)?.report(m)
}

/// Start and length of the largest gap between rank-`n` intervals.
pub fn largest_gap(sys: &RankedIntervalSystem, n: usize) -> Result<(f64, f64)> {
    sys.check_rank(n)?;
    let lefts = sys.lefts(n);
    let s = sys.sigma(n);
    let mut best = (0.0, -1.0);
    for (k, &a) in lefts.iter().enumerate() {
        let next = if k + 1 < lefts.len() { lefts[k + 1] } else { lefts[0] + TWO_PI };
        let g = next - a - s;
        if g > best.1 {
            best = ((a + s) % TWO_PI, g);
        }
    }
    Ok(best)
}

/// Pairing partial sums against a bump placed in a gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    /// `P_M` for `M = 0..=max_m`.
    pub sums: Vec<Complex64>,
    /// Bound on `|P_M|` from truncation and coefficient errors at `max_m`.
    pub budget: f64,
    /// `|P_M|` at the last three dyadic `M`.
    pub dyadic: Vec<(i64, f64)>,
    /// All three below tolerance.
    pub supported_off: bool,
}

/// Pairs `Ŝ` with `ψ` and checks that the pairing vanishes. `ψ` must sit in
/// a gap of `K_{N_f}`.
pub fn support_pairing(
    w: &ShatWindow,
    sys: &RankedIntervalSystem,
    psi: &SmoothBump,
    max_m: i64,
    tol: f64,
) -> Result<PairingReport> {
    let cfg = &w.config;
    let union = sys.rank_union(cfg.n_f)?;
    if union.distance(psi.center()) <= psi.half_width() {
        return Err(Error::BumpNotInGap);
    }
    let s = &w.coeffs;
    let sums = pair(s, psi, max_m)?;
    let mut err = 0.0;
    for m in -max_m..=max_m {
        err += w.budget[(m - s.lo()) as usize] * psi.coeff(-m).norm();
    }
    // Beyond the window: |Ŝ(m)| ≤ κλ|K| + 4π sup|F_{n(m)}|.
    let lambda = (cfg.delta * cfg.n_f as f64 / TWO_PI).exp();
    let support = sys.lefts(cfg.n_f).len() as f64 * sys.sigma(cfg.n_f);
    let base = (lambda - 1.0) * support;
    let bound_at = |m: i64| {
        let n = stage_for(m, cfg.c_log).max(cfg.n_f);
        2.0 * base + 2.0 * TWO_PI * (cfg.delta * n as f64 / TWO_PI).exp()
    };
    let q = psi.order().max(2) as f64;
    let mut tail = 0.0;
    let mut m = max_m + 1;
    let end = max_m + 10_000;
    while m <= end {
        tail += bound_at(m) * psi.decay_bound(m);
        m += 1;
    }
    tail += 2.0 * bound_at(end) * psi.decay_bound(end) * end as f64 / (q - 1.0);
    let budget = (err + tail) / TWO_PI;
    let mut dyadic = Vec::new();
    let mut p = 1i64;
    while p <= max_m {
        dyadic.push((p, sums[p as usize].norm()));
        p *= 2;
    }
    let dyadic: Vec<(i64, f64)> = dyadic.into_iter().rev().take(3).rev().collect();
    let supported_off = dyadic.len() == 3 && dyadic.iter().all(|(_, v)| *v <= tol);
    Ok(PairingReport {
        sums,
        budget,
        dyadic,
        supported_off,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{build, OffsetMode};

    #[test]
    fn zero_delta_surrogate_vanishes() {
        let sys = build(3, 10, OffsetMode::Random).unwrap();
        let mut cfg = ShatConfig::new(0.0, 8, 64);
        cfg.stability = false;
        let w = shat_window(&sys, &cfg).unwrap();
        assert!(w.coeffs.iter().all(|(_, v)| v.norm() == 0.0));
        let (a, g) = largest_gap(&sys, 3).unwrap();
        let psi = SmoothBump::new(a + 0.5 * g, 0.4 * g, 6).unwrap();
        let rep = support_pairing(&w, &sys, &psi, 64, 1e-12).unwrap();
        assert!(rep.sums.iter().all(|v| v.norm() == 0.0));
        assert!(rep.supported_off);
    }

    #[test]
    fn bump_inside_k_is_rejected() {
        let sys = build(3, 10, OffsetMode::Random).unwrap();
        let mut cfg = ShatConfig::new(0.0, 8, 8);
        cfg.stability = false;
        let w = shat_window(&sys, &cfg).unwrap();
        let c = sys.left(8, 3) + 0.5 * sys.sigma(8);
        let psi = SmoothBump::new(c, 1e-4, 6).unwrap();
        assert!(matches!(support_pairing(&w, &sys, &psi, 8, 1e-3), Err(Error::BumpNotInGap)));
    }

    #[test]
    fn negative_side_is_bessel_bounded_and_small_m_uses_support_part() {
        let sys = build(5, 12, OffsetMode::Random).unwrap();
        let delta = 0.05 * TWO_PI;
        let mut cfg = ShatConfig::new(delta, 10, 400);
        cfg.stability = true;
        let w = shat_window(&sys, &cfg).unwrap();
        let neg: f64 = (-400..0).map(|m| w.coeffs.get(m).unwrap().norm_sqr()).sum();
        assert!(neg <= w.l2_bound && w.l2_bound <= 4.0 * std::f64::consts::PI.powi(2));
        let stab = w.stability.as_ref().unwrap();
        assert!(stab.iter().all(|s| s.is_finite()));
        let r = w.report(-5).unwrap();
        assert_eq!(r.diag("stage_n"), Some(10.0));
    }
}
