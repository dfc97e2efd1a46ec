//! A complex measure `ν = Σ ν_k` with small `ℓᵖ` mass on negative
//! frequencies and a sizeable `ℓᵖ` certificate on disjoint positive windows.
//!
//! Step `k` multiplies the base measure by `g_k(l t)` where
//! `g_k(t) = 4^{-k} Σ_j e^{i q(j) t}`, so `ν̂_k(n) = 4^{-k} Σ_j μ̂(n - l q(j))`.
//! The base enters through its coefficient window, read as zero outside it;
//! every sum below is exact for that windowed base.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circle::{lp_norm, weighted_energy, wiener_average, CoeffWindow, ConvergenceRule, EnergySide, PartialSums, Side, Verdict};
use crate::error::{invalid, Error, Result};
use crate::report::CertifiedReport;

/// Largest step count (4^4 = 256 frequencies).
pub const K_MAX: usize = 4;
/// Fraction of `‖μ̂‖_p^p` inside the core window of each translate.
const CORE_FRACTION: f64 = 0.9;
/// Fraction that sets the spacing of sparse translates, so that overlap
/// between neighbours stays negligible.
const SPARSE_FRACTION: f64 = 0.999;

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} must be a finite real ≥ 1")));
    }
    Ok(())
}

fn pow_sum(w: &CoeffWindow, p: f64, lo: i64, hi: i64) -> f64 {
    (lo..=hi).map(|n| w.get_or_zero(n).norm().powf(p)).sum()
}

/// Smallest `s` with the window's `ℓᵖ(-∞, -s]` norm below `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub s: i64,
    /// `(Σ_{lo ≤ n ≤ -s} |μ̂(n)|^p)^{1/p}`.
    pub tail: f64,
    /// Norm of the outermost full dyadic block on the negative side; mass
    /// beyond the window is not seen.
    pub terminal_block: f64,
}

pub fn tail_threshold(mu_hat: &CoeffWindow, p: f64, target: f64) -> Result<Threshold> {
    check_p(p)?;
    if !(target > 0.0) {
        return Err(invalid("target", "must be positive"));
    }
    let lo = mu_hat.lo();
    let reach = -lo;
    let terminal_block = if reach >= 1 {
        let top = 1i64 << (63 - reach.leading_zeros());
        let start = (top / 2).max(1);
        pow_sum(mu_hat, p, -top, -start).powf(1.0 / p)
    } else {
        0.0
    };
    if terminal_block >= target / 4.0 {
        return Err(Error::ExtendWindow(format!(
            "terminal negative block has ℓ^p norm {terminal_block:e}, need below {:e}",
            target / 4.0
        )));
    }
    // Running tails from the far end inwards.
    let tol = target.powf(p);
    let mut tail = 0.0;
    let mut tails = vec![0.0; reach.max(0) as usize + 2];
    for s in (1..=reach).rev() {
        tail += mu_hat.get_or_zero(-s).norm().powf(p);
        tails[s as usize] = tail;
    }
    let s = (1..=reach.max(1))
        .find(|&s| tails.get(s as usize).copied().unwrap_or(0.0) < tol)
        .unwrap_or(reach + 1);
    let tail = tails.get(s as usize).copied().unwrap_or(0.0).powf(1.0 / p);
    Ok(Threshold { s, tail, terminal_block })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyStrategy {
    Sparse,
    Greedy,
}

/// Frequencies `q(1) < ... < q(4^k)` and the certificate they achieve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyChoice {
    pub q: Vec<i64>,
    /// Half-width holding [`CORE_FRACTION`] of `‖μ̂‖_p^p`.
    pub core: i64,
    /// `I_k` before dilation.
    pub interval: (i64, i64),
    /// `‖(g_k μ)^‖_{ℓᵖ(I_k)}`.
    pub certificate: f64,
    /// The lower bound the construction aims for.
    pub target: f64,
    /// Certificate after each greedy addition.
    pub history: Vec<f64>,
}

/// Coefficients `4^{-k} Σ_j μ̂(n - shift·q(j))` on `[lo, hi]`.
pub fn translate_sum(mu_hat: &CoeffWindow, q: &[i64], shift: i64, lo: i64, hi: i64) -> Vec<Complex64> {
    let w = 1.0 / q.len() as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
    for &qj in q {
        let c = shift * qj;
        let a = lo.max(mu_hat.lo() + c);
        let b = hi.min(mu_hat.hi() + c);
        for n in a..=b {
            out[(n - lo) as usize] += w * mu_hat.get_or_zero(n - c);
        }
    }
    out
}

fn norm_p(v: &[Complex64], p: f64) -> f64 {
    v.iter().map(|c| c.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn core_width(mu_hat: &CoeffWindow, p: f64, fraction: f64) -> i64 {
    let total = pow_sum(mu_hat, p, mu_hat.lo(), mu_hat.hi());
    let mut acc = mu_hat.get_or_zero(0).norm().powf(p);
    let mut w = 0;
    while acc < fraction * total && w < mu_hat.hi().max(-mu_hat.lo()) {
        w += 1;
        acc += mu_hat.get_or_zero(w).norm().powf(p) + mu_hat.get_or_zero(-w).norm().powf(p);
    }
    w
}

/// Places `4^k` frequencies above `s_k` with every translate core inside
/// `[1, max_freq]`.
pub fn choose_frequencies(
    mu_hat: &CoeffWindow,
    p: f64,
    k: usize,
    s_k: i64,
    strategy: FrequencyStrategy,
    max_freq: i64,
) -> Result<FrequencyChoice> {
    check_p(p)?;
    if k > K_MAX {
        return Err(invalid("k", format!("at most {K_MAX}")));
    }
    let count = 1usize << (2 * k);
    let w = core_width(mu_hat, p, CORE_FRACTION);
    let gap = 2 * core_width(mu_hat, p, SPARSE_FRACTION) + 1;
    let first = (s_k + 1).max(w + 1);
    let interval = (first - w, first + (count as i64 - 1) * gap + w);
    if interval.1 > max_freq {
        return Err(Error::CannotFit {
            needed: count,
            reason: format!("translates of half-width {w} above {s_k} reach {} > {max_freq}", interval.1),
        });
    }
    let (lo, hi) = interval;
    let (q, history) = match strategy {
        FrequencyStrategy::Sparse => {
            let q: Vec<i64> = (0..count as i64).map(|j| first + j * gap).collect();
            (q, Vec::new())
        }
        FrequencyStrategy::Greedy => {
            let wt = 1.0 / count as f64;
            let mut acc = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
            let mut chosen: Vec<i64> = Vec::with_capacity(count);
            let mut history = Vec::with_capacity(count);
            for _ in 0..count {
                let mut best = (f64::NEG_INFINITY, first);
                for c in first..=hi - w {
                    if chosen.contains(&c) {
                        continue;
                    }
                    let v: f64 = acc
                        .iter()
                        .enumerate()
                        .map(|(i, a)| (a + wt * mu_hat.get_or_zero(lo + i as i64 - c)).norm().powf(p))
                        .sum();
                    if v > best.0 {
                        best = (v, c);
                    }
                }
                let c = best.1;
                for (i, a) in acc.iter_mut().enumerate() {
                    *a += wt * mu_hat.get_or_zero(lo + i as i64 - c);
                }
                chosen.push(c);
                history.push(best.0.powf(1.0 / p));
            }
            chosen.sort_unstable();
            (chosen, history)
        }
    };
    let certificate = norm_p(&translate_sum(mu_hat, &q, 1, lo, hi), p);
    Ok(FrequencyChoice {
        q,
        core: w,
        interval,
        certificate,
        target: 0.5,
        history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DilationSearch {
    /// Smallest admissible `l`.
    Direct,
    /// Random `l` in `[N/(2D), N/D]` once the Wiener average at `N` is small.
    Wiener { seed: u64, tries: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dilation {
    pub l: i64,
    /// `Σ_{0<|n|≤D} |μ̂(l n)|`.
    pub sum: f64,
}

fn dilation_sum(mu_hat: &CoeffWindow, l: i64, degree: i64) -> Option<f64> {
    if !mu_hat.contains(l * degree) || !mu_hat.contains(-l * degree) {
        return None;
    }
    Some((1..=degree).map(|n| mu_hat.get_or_zero(l * n).norm() + mu_hat.get_or_zero(-l * n).norm()).sum())
}

/// Block maxima of `|μ̂|` over `[2^(j-1), 2^j)` must not increase and must
/// end below half the first block.
pub fn rajchman_evidence(mu_hat: &CoeffWindow) -> bool {
    let reach = mu_hat.symmetric_reach();
    let env = crate::dims::BlockEnvelope::new(1, reach, |m| {
        mu_hat.get_or_zero(m).norm().max(mu_hat.get_or_zero(-m).norm())
    });
    let m = &env.max;
    if m.len() < 3 {
        return false;
    }
    let last = m[m.len() - 1];
    m.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)) && (last == 0.0 || last <= 0.5 * m[0])
}

/// Dilation `l` with `Σ_{0<|n|≤degree} |μ̂(l n)| < delta_tol`.
pub fn choose_dilation(mu_hat: &CoeffWindow, degree: i64, delta_tol: f64, search: DilationSearch) -> Result<Dilation> {
    if degree < 1 {
        return Err(invalid("degree", "must be at least 1"));
    }
    if !rajchman_evidence(mu_hat) {
        return Err(Error::NonRajchman("coefficient block maxima do not decay".into()));
    }
    let reach = mu_hat.symmetric_reach();
    let l_max = reach / degree;
    match search {
        DilationSearch::Direct => {
            for l in 1..=l_max {
                if let Some(sum) = dilation_sum(mu_hat, l, degree) {
                    if sum < delta_tol {
                        return Ok(Dilation { l, sum });
                    }
                }
            }
        }
        DilationSearch::Wiener { seed, tries } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let goal = (delta_tol / (2.0 * degree as f64)).powi(2);
            let mut n = 2 * degree;
            while n <= reach {
                if wiener_average(mu_hat, n)? < goal {
                    let (a, b) = ((n / (2 * degree)).max(1), (n / degree).max(1));
                    for _ in 0..tries {
                        let l = rng.random_range(a..=b);
                        if let Some(sum) = dilation_sum(mu_hat, l, degree) {
                            if sum < delta_tol {
                                return Ok(Dilation { l, sum });
                            }
                        }
                    }
                }
                n *= 2;
            }
        }
    }
    Err(Error::DilationExhausted { searched: l_max.max(0) as u64 })
}

/// Per-step certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    /// `‖ν̂_k‖_{ℓᵖ(Z₋)}` on the window.
    pub neg_tail: f64,
    /// `‖ν̂_k‖_{ℓᵖ(I_k)}`.
    pub window_mass: f64,
    /// Bound on `‖ν_k‖` from `∫|g_k(lt)|² dμ`.
    pub measure_norm_bound: f64,
    /// `‖g_k‖₂ = 4^{-k} √(4^k)`.
    pub g_norm2: f64,
    /// `‖ĝ_k‖_{ℓ¹}`.
    pub g_norm1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymStep {
    pub k: usize,
    pub s_k: i64,
    /// Undilated, strictly increasing.
    pub q: Vec<i64>,
    pub l: i64,
    /// `I_k` after dilation.
    pub interval: (i64, i64),
    pub certificates: Certificates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymConfig {
    pub p: f64,
    pub k_max: usize,
    pub strategy: FrequencyStrategy,
    pub delta_tol: f64,
    pub search: DilationSearch,
    /// Highest frequency any undilated translate core may reach.
    pub max_freq: i64,
    pub slack: f64,
}

impl AsymConfig {
    pub fn new(p: f64, k_max: usize) -> Self {
        Self {
            p,
            k_max,
            strategy: FrequencyStrategy::Sparse,
            delta_tol: 0.1,
            search: DilationSearch::Direct,
            max_freq: 1 << 20,
            slack: 1e-12,
        }
    }
}

/// One ledger row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub k: usize,
    pub c_k: f64,
    pub neg_tail_k: f64,
    pub mass_bound_k: f64,
    /// `Σ_{i≤k} c_i^p`.
    pub positive_sum: f64,
    /// `Σ_{i≤k} neg_tail_i^p`.
    pub negative_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymMeasure {
    pub config: AsymConfig,
    /// Base coefficients after scaling to `‖μ̂‖_p = 1`.
    pub base: CoeffWindow,
    /// Factor applied to the input.
    pub normalization: f64,
    pub steps: Vec<AsymStep>,
    pub nu_hat: CoeffWindow,
    pub ledger: Vec<LedgerRow>,
}

impl AsymMeasure {
    pub fn write_ledger_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "c_k", "neg_tail_k", "mass_bound_k"])?;
        for r in &self.ledger {
            w.write_record([
                r.k.to_string(),
                crate::report::fmt17(r.c_k),
                crate::report::fmt17(r.neg_tail_k),
                crate::report::fmt17(r.mass_bound_k),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `‖ν_k‖ ≤ (μ̂(0) ∫|g(lt)|² dμ)^{1/2}` for a positive base, with the
/// integral bounded through the difference multiset of `q`.
fn mass_bound(mu_hat: &CoeffWindow, q: &[i64], l: i64) -> f64 {
    let count = q.len() as f64;
    let w2 = 1.0 / (count * count);
    let mu0 = mu_hat.get_or_zero(0).norm();
    let mut second = w2 * count * mu0;
    for (i, &a) in q.iter().enumerate() {
        for &b in &q[i + 1..] {
            let d = l * (b - a);
            second += w2 * (mu_hat.get_or_zero(d).norm() + mu_hat.get_or_zero(-d).norm());
        }
    }
    (mu0 * second).sqrt()
}

/// Runs steps `1..=k_max` and assembles `ν̂`.
pub fn build_nu(mu_hat: &CoeffWindow, cfg: &AsymConfig) -> Result<(AsymMeasure, Vec<CertifiedReport>)> {
    check_p(cfg.p)?;
    if !(1..=K_MAX).contains(&cfg.k_max) {
        return Err(invalid("k_max", format!("must lie in 1..={K_MAX}")));
    }
    let p = cfg.p;
    let norm = lp_norm(mu_hat, p, Side::Full)?;
    if norm == 0.0 {
        return Err(Error::ZeroMeasure);
    }
    let base = mu_hat.scale(Complex64::new(1.0 / norm, 0.0));
    let mut steps: Vec<AsymStep> = Vec::new();
    let mut reports = Vec::new();
    let mut ledger = Vec::new();
    let mut prev_hi = 0i64;
    let (mut pos_sum, mut neg_sum) = (0.0, 0.0);
    for k in 1..=cfg.k_max {
        let target = 0.5f64.powi(k as i32);
        let th = tail_threshold(&base, p, target)?;
        let choice = choose_frequencies(&base, p, k, th.s, cfg.strategy, cfg.max_freq)?;
        let degree = choice.q[choice.q.len() - 1] - choice.q[0];
        let dil = if degree == 0 {
            Dilation { l: 1, sum: 0.0 }
        } else {
            choose_dilation(&base, degree, cfg.delta_tol, cfg.search)?
        };
        let l = dil.l;
        let w = choice.core;
        // Shift so the dilated hull clears the earlier intervals.
        let need = (prev_hi + w + 1 + l - 1) / l;
        let shift = (need - choice.q[0]).max(0);
        let q: Vec<i64> = choice.q.iter().map(|x| x + shift).collect();
        let interval = (l * q[0] - w, l * q[q.len() - 1] + w);
        let lo = base.lo();
        let hi = base.hi() + l * q[q.len() - 1];
        let nu_k = translate_sum(&base, &q, l, lo, hi);
        let neg: Vec<Complex64> = nu_k[..(-lo) as usize].to_vec();
        let neg_tail = norm_p(&neg, p);
        let win = &nu_k[(interval.0 - lo) as usize..=(interval.1 - lo) as usize];
        let window_mass = norm_p(win, p);
        let count = q.len() as f64;
        let certificates = Certificates {
            neg_tail,
            window_mass,
            measure_norm_bound: mass_bound(&base, &q, l),
            g_norm2: count.sqrt() / count,
            g_norm1: count * (1.0 / count),
        };
        if !(neg_tail < target) {
            return Err(Error::Certificate {
                name: "neg_tail",
                k,
                detail: format!("{neg_tail:e} ≥ {target:e}"),
            });
        }
        if interval.0 <= prev_hi || steps.iter().any(|s| s.interval.1 >= interval.0) {
            return Err(Error::Certificate {
                name: "disjointness",
                k,
                detail: format!("I_{k} = {interval:?} meets an earlier interval"),
            });
        }
        let mass_cap = 2.0 * target * (1.0 + cfg.slack);
        if !(certificates.measure_norm_bound <= mass_cap) {
            return Err(Error::Certificate {
                name: "measure_norm_bound",
                k,
                detail: format!("{:e} > {mass_cap:e}", certificates.measure_norm_bound),
            });
        }
        prev_hi = interval.1;
        pos_sum += window_mass.powf(p);
        neg_sum += neg_tail.powf(p);
        ledger.push(LedgerRow {
            k,
            c_k: window_mass,
            neg_tail_k: neg_tail,
            mass_bound_k: certificates.measure_norm_bound,
            positive_sum: pos_sum,
            negative_sum: neg_sum,
        });
        reports.push(
            CertifiedReport::new("asym_step", k as i64, Complex64::new(window_mass, 0.0), 0.0)
                .with("s_k", th.s as f64)
                .with("l", l as f64)
                .with("dilation_sum", dil.sum)
                .with("neg_tail", neg_tail)
                .with("neg_tail_bound", target)
                .with("measure_norm_bound", certificates.measure_norm_bound)
                .with("g_norm2", certificates.g_norm2)
                .with("target", choice.target)
                .with("terminal_block", th.terminal_block),
        );
        steps.push(AsymStep {
            k,
            s_k: th.s,
            q,
            l,
            interval,
            certificates,
        });
    }
    let lo = base.lo();
    let hi = base.hi() + steps.iter().map(|s| s.l * s.q[s.q.len() - 1]).max().unwrap_or(0);
    let mut values = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
    for s in &steps {
        for (v, a) in values.iter_mut().zip(translate_sum(&base, &s.q, s.l, lo, hi)) {
            *v += a;
        }
    }
    let nu_hat = CoeffWindow::new(lo, hi, values)?;
    Ok((
        AsymMeasure {
            config: cfg.clone(),
            base,
            normalization: 1.0 / norm,
            steps,
            nu_hat,
            ledger,
        },
        reports,
    ))
}

/// One-sided energy of `ν̂` at `α = 2/p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub p: f64,
    pub d: f64,
    pub alpha: f64,
    /// `p < 2/d`, the hypothesis under which `α > d`.
    pub hypothesis: bool,
    pub energy: PartialSums,
    pub verdict: Verdict,
}

pub fn sharpness_check(nu_hat: &CoeffWindow, p: f64, d: f64) -> Result<SharpnessReport> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(invalid("p", "need p ≥ 2 so that α = 2/p lies in (0, 1]"));
    }
    let alpha = 2.0 / p;
    let energy = weighted_energy(nu_hat, alpha, EnergySide::AntiAnalytic)?;
    let verdict = energy.verdict(&ConvergenceRule::default());
    Ok(SharpnessReport {
        p,
        d,
        alpha,
        hypothesis: p < 2.0 / d,
        energy,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(reach: i64, power: f64) -> CoeffWindow {
        CoeffWindow::from_real_fn(reach, |n| (1.0 + n.abs() as f64).powf(-power)).unwrap()
    }

    #[test]
    fn threshold_examples() {
        let analytic = CoeffWindow::from_fn(-100, 100, |n| {
            Complex64::new(if n >= 0 { 1.0 / (1.0 + n as f64) } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert_eq!(tail_threshold(&analytic, 3.0, 0.25).unwrap().s, 1);
        let w = synthetic(4096, 1.0);
        let t = tail_threshold(&w, 3.0, 0.5).unwrap();
        assert_eq!(t.s, 2);
        let oracle: f64 = (3..=4097).map(|i| (i as f64).powi(-3)).sum();
        assert!((t.tail.powi(3) - oracle).abs() < 1e-14);
        assert_eq!(tail_threshold(&w, 3.0, 10.0).unwrap().s, 1);
        let slow = synthetic(64, 0.2);
        assert!(matches!(tail_threshold(&slow, 3.0, 0.1), Err(Error::ExtendWindow(_))));
    }

    #[test]
    fn single_frequency_keeps_the_norm() {
        let w = synthetic(2048, 1.0);
        let w = w.scale(Complex64::new(1.0 / lp_norm(&w, 3.0, Side::Full).unwrap(), 0.0));
        let c = choose_frequencies(&w, 3.0, 0, 1, FrequencyStrategy::Sparse, 1 << 20).unwrap();
        assert_eq!(c.q.len(), 1);
        let shifted = translate_sum(&w, &c.q, 1, w.lo() + c.q[0], w.hi() + c.q[0]);
        assert!((norm_p(&shifted, 3.0) - 1.0).abs() < 1e-12);
        assert!(c.certificate > CORE_FRACTION.powf(1.0 / 3.0) - 1e-12);
    }

    #[test]
    fn sparse_matches_disjoint_translates() {
        let p = 3.0;
        let w = synthetic(4096, 1.0);
        let w = w.scale(Complex64::new(1.0 / lp_norm(&w, p, Side::Full).unwrap(), 0.0));
        let c = choose_frequencies(&w, p, 1, 5, FrequencyStrategy::Sparse, 1 << 20).unwrap();
        assert!(c.q.windows(2).all(|x| x[1] > x[0]) && c.q[0] > 5);
        let oracle = 4f64.powf(-(p - 1.0) / p);
        assert!((c.certificate / oracle - 1.0).abs() < 0.1, "{} vs {oracle}", c.certificate);
        assert!(choose_frequencies(&w, p, 1, 5, FrequencyStrategy::Sparse, 10).is_err());
    }

    #[test]
    fn greedy_certificate_never_decreases() {
        let w = synthetic(512, 1.0);
        let c = choose_frequencies(&w, 3.0, 1, 3, FrequencyStrategy::Greedy, 1 << 20).unwrap();
        assert!(c.history.windows(2).all(|h| h[1] >= h[0]));
        assert!(c.q.windows(2).all(|x| x[1] > x[0]));
        assert!((c.history[c.history.len() - 1] - c.certificate).abs() < 1e-12);
    }

    #[test]
    fn dilation_examples() {
        let leb = CoeffWindow::from_real_fn(64, |n| if n == 0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(choose_dilation(&leb, 3, 0.1, DilationSearch::Direct).unwrap().l, 1);
        let half = synthetic(1 << 14, 0.5);
        let d = choose_dilation(&half, 3, 0.1, DilationSearch::Direct).unwrap();
        let f = |l: i64| -> f64 { (1..=3).map(|n| 2.0 * (1.0 + (l * n) as f64).powf(-0.5)).sum() };
        assert!(f(d.l) < 0.1 && f(d.l - 1) >= 0.1);
        assert!(d.l >= 1200);
        let analytic = 2.0 * (1.0 + 0.5f64.sqrt() + (1.0f64 / 3.0).sqrt()) / (d.l as f64).sqrt();
        assert!(analytic > d.sum);
        let atom = CoeffWindow::from_real_fn(1024, |_| 1.0).unwrap();
        assert!(matches!(choose_dilation(&atom, 3, 0.1, DilationSearch::Direct), Err(Error::NonRajchman(_))));
        let short = synthetic(300, 0.5);
        assert!(matches!(choose_dilation(&short, 3, 0.1, DilationSearch::Direct), Err(Error::DilationExhausted { .. })));
        let wide = synthetic(1 << 16, 0.5);
        let wd = choose_dilation(&wide, 3, 0.1, DilationSearch::Wiener { seed: 4, tries: 64 }).unwrap();
        assert!(wd.sum < 0.1 && wd.l > d.l);
    }

    #[test]
    fn lebesgue_step_is_atom_translates() {
        let p = 3.0;
        let leb = CoeffWindow::from_real_fn(64, |n| if n == 0 { 1.0 } else { 0.0 }).unwrap();
        let (nu, reports) = build_nu(&leb, &AsymConfig::new(p, 1)).unwrap();
        let s = &nu.steps[0];
        assert_eq!(s.q.len(), 4);
        for &q in &s.q {
            assert_eq!(nu.nu_hat.get(s.l * q).unwrap(), Complex64::new(0.25, 0.0));
        }
        assert_eq!(lp_norm(&nu.nu_hat, p, Side::Negatives).unwrap(), 0.0);
        let pos = lp_norm(&nu.nu_hat, p, Side::Positives).unwrap();
        assert!((pos - 0.25 * 4f64.powf(1.0 / p)).abs() < 1e-15);
        assert_eq!(s.certificates.g_norm2, 0.5);
        assert_eq!(s.certificates.g_norm1, 1.0);
        assert_eq!(reports.len(), 1);
    }

    #[test]
    fn synthetic_two_steps() {
        let w = synthetic(1 << 18, 1.0);
        let (nu, _) = build_nu(&w, &AsymConfig::new(3.0, 2)).unwrap();
        for s in &nu.steps {
            assert!(s.certificates.neg_tail < 0.5f64.powi(s.k as i32));
            assert_eq!(s.certificates.g_norm2, 0.5f64.powi(s.k as i32));
        }
        assert!(nu.steps[0].interval.1 < nu.steps[1].interval.0);
        assert_eq!(nu.ledger.len(), 2);
        assert!(nu.ledger[1].positive_sum > nu.ledger[0].positive_sum);
    }

    #[test]
    fn sharpness_examples() {
        let analytic = CoeffWindow::from_fn(-1000, 1000, |n| Complex64::new(if n >= 0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        let r = sharpness_check(&analytic, 3.0, 0.5).unwrap();
        assert_eq!(r.energy.last(), 0.0);
        assert_eq!(r.verdict, Verdict::Converging);
        let p = 3.0;
        let slow = CoeffWindow::from_fn(-(1 << 16), 0, |n| {
            Complex64::new(if n < 0 { (-n as f64).powf(-1.0 / 3.3) } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert_eq!(sharpness_check(&slow, p, 0.5).unwrap().verdict, Verdict::Diverging);
        let fast = CoeffWindow::from_fn(-(1 << 12), 0, |n| {
            Complex64::new(if n < 0 { (-n as f64).powf(-2.0 / p) } else { 0.0 }, 0.0)
        })
        .unwrap();
        let r = sharpness_check(&fast, p, 0.5).unwrap();
        assert_eq!(r.verdict, Verdict::Converging);
        let oracle: f64 = (1..=1 << 12).map(|n| (n as f64).powf(-4.0 / p + 2.0 / p - 1.0)).sum();
        assert!((r.energy.last() - oracle).abs() < 1e-10);
    }
}
