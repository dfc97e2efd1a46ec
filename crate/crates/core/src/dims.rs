//! Covering numbers, dimension fits and energy verdicts.
//!
//! Covers are computed on the line obtained by cutting the circle at 0:
//! arcs keep their unwrapped right endpoints. Greedy placement is then
//! optimal, and the count exceeds the circular optimum by at most one.

use serde::{Deserialize, Serialize};

use crate::circle::{
    weighted_energy, CoeffWindow, ConvergenceRule, EnergySide, Interval, IntervalUnion, PartialSums, Verdict, TWO_PI,
};
use crate::error::{invalid, Error, Result};
use crate::fit::{ols_fit, SlopeFit};

/// Fewest scales or blocks behind any verdict.
pub const MIN_SCALES: usize = 5;

/// Relative slack when deciding whether an arc reaches an endpoint.
const REACH_TOL: f64 = 1e-12;

/// A set whose covering numbers we count.
#[derive(Debug, Clone, Copy)]
pub enum CoverSet<'a> {
    Union(&'a IntervalUnion),
    /// Points in `[0, 2π)`, any order.
    Cloud(&'a [f64]),
}

/// Greedy count of closed arcs of length `eps` needed to cover `set`.
pub fn cover_count(set: CoverSet<'_>, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps", "must be positive and finite"));
    }
    match set {
        CoverSet::Union(u) => {
            if u.is_empty() {
                return Err(Error::EmptySet);
            }
            Ok(cover_segments(u.intervals().iter().map(|i| (i.start(), i.end())), eps))
        }
        CoverSet::Cloud(points) => {
            if points.is_empty() {
                return Err(Error::EmptySet);
            }
            let mut p = points.to_vec();
            p.sort_by(f64::total_cmp);
            Ok(cover_segments(p.iter().map(|&x| (x, x)), eps))
        }
    }
}

/// Greedy sweep over segments sorted by left end.
fn cover_segments(segs: impl Iterator<Item = (f64, f64)>, eps: f64) -> u64 {
    let mut reach = f64::NEG_INFINITY;
    let mut count = 0u64;
    for (a, b) in segs {
        // Endpoints carry rounding proportional to their magnitude.
        let tol = REACH_TOL * eps + 8.0 * f64::EPSILON * (b.abs() + 1.0);
        if b <= reach + tol {
            continue;
        }
        let start = a.max(reach);
        let k = ((b - start - tol) / eps).ceil().max(1.0);
        count += k as u64;
        reach = start + k * eps;
    }
    count
}

/// Covering numbers over a decreasing list of scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverTable {
    pub eps: Vec<f64>,
    pub counts: Vec<u64>,
    pub source: String,
}

impl CoverTable {
    pub fn new(set: CoverSet<'_>, eps: &[f64], source: impl Into<String>) -> Result<Self> {
        if eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("eps", "scales must be strictly decreasing"));
        }
        let counts = eps.iter().map(|&e| cover_count(set, e)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            eps: eps.to_vec(),
            counts,
            source: source.into(),
        })
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["eps", "count"])?;
        for (e, c) in self.eps.iter().zip(&self.counts) {
            w.write_record([crate::report::fmt17(*e), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `top, top/2, ..., top/2^(count-1)`.
pub fn dyadic_eps(top: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| top / (1u64 << k) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Minkowski,
    FourierEnvelope,
    LpScan,
    FrostmanEnergy,
}

/// A dimension estimate with the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionVerdict {
    pub estimate: f64,
    pub stderr: f64,
    pub method: Method,
    /// Smallest and largest scale (or frequency) used.
    pub scales: (f64, f64),
    /// Unclamped fit.
    pub raw: f64,
    pub clamped: bool,
    /// Largest slope between adjacent scales.
    pub max_two_point: Option<f64>,
    pub note: Option<String>,
}

fn clamp_unit(raw: f64) -> (f64, bool) {
    let c = raw.clamp(0.0, 1.0);
    (c, c != raw)
}

/// Least-squares slope of `log count` against `log(1/ε)`.
pub fn minkowski_fit(table: &CoverTable) -> Result<DimensionVerdict> {
    if table.eps.len() < MIN_SCALES {
        return Err(Error::DegenerateScales(format!(
            "{} scales, need {MIN_SCALES}",
            table.eps.len()
        )));
    }
    if table.eps.iter().any(|e| !(*e > 0.0)) || table.counts.iter().any(|&c| c == 0) {
        return Err(Error::DegenerateScales("nonpositive scale or count".into()));
    }
    let x: Vec<f64> = table.eps.iter().map(|e| -e.ln()).collect();
    let y: Vec<f64> = table.counts.iter().map(|&c| (c as f64).ln()).collect();
    let fit = ols_fit(&x, &y)?;
    let two_point = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (ys[1] - ys[0]) / (xs[1] - xs[0]))
        .fold(f64::NEG_INFINITY, f64::max);
    let (estimate, clamped) = clamp_unit(fit.slope);
    let lo = table.eps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = table.eps.iter().copied().fold(0.0, f64::max);
    Ok(DimensionVerdict {
        estimate,
        stderr: fit.stderr,
        method: Method::Minkowski,
        scales: (lo, hi),
        raw: fit.slope,
        clamped,
        max_two_point: Some(two_point),
        note: None,
    })
}

/// Maxima of a nonnegative profile over blocks `[2^(j-1), 2^j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEnvelope {
    /// Lower end `2^(j-1)` of each block.
    pub start: Vec<i64>,
    pub max: Vec<f64>,
}

impl BlockEnvelope {
    /// Blocks that fit inside `[lo, hi]`; `value(m)` is read only there.
    pub fn new(lo: i64, hi: i64, mut value: impl FnMut(i64) -> f64) -> Self {
        let mut start = Vec::new();
        let mut max = Vec::new();
        let mut a = 1i64;
        while a <= hi {
            let b = (2 * a - 1).min(hi);
            if a >= lo {
                start.push(a);
                max.push((a..=b).map(&mut value).fold(0.0, f64::max));
            }
            a *= 2;
        }
        Self { start, max }
    }

    /// OLS of `ln max` on `ln start` over blocks with `max > floor`.
    pub fn fit(&self, floor: f64) -> Option<(SlopeFit, usize)> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .start
            .iter()
            .zip(&self.max)
            .filter(|(_, &v)| v > floor)
            .map(|(&s, &v)| ((s as f64).ln(), v.ln()))
            .unzip();
        ols_fit(&x, &y).ok().map(|f| (f, x.len()))
    }
}

/// Lowest block used by [`fourier_dim_fit`]: the first blocks are dominated
/// by the `1 + |m|` offset of typical profiles.
const FOURIER_FIRST_BLOCK: i64 = 4;

/// Envelope exponent `a` with `|μ̂(m)|² ≲ |m|^{-a}`.
pub fn fourier_dim_fit(w: &CoeffWindow) -> Result<DimensionVerdict> {
    let reach = w.symmetric_reach();
    if reach < 256 {
        return Err(Error::WindowInsufficient {
            need_lo: -256,
            need_hi: 256,
            have_lo: w.lo(),
            have_hi: w.hi(),
        });
    }
    let power = |m: i64| w.get_or_zero(m).norm_sqr().max(w.get_or_zero(-m).norm_sqr());
    let env = BlockEnvelope::new(FOURIER_FIRST_BLOCK, reach, power);
    let scales = (FOURIER_FIRST_BLOCK as f64, reach as f64);
    if (1..=reach).all(|m| power(m) == 0.0) {
        return Ok(DimensionVerdict {
            estimate: 1.0,
            stderr: 0.0,
            method: Method::FourierEnvelope,
            scales,
            raw: f64::INFINITY,
            clamped: true,
            max_two_point: None,
            note: Some("degenerate: all zero beyond 0".into()),
        });
    }
    let positive = env.max.iter().filter(|&&v| v > 0.0).count();
    if positive < MIN_SCALES {
        return Err(Error::DegenerateScales(format!(
            "{positive} nonzero blocks, need {MIN_SCALES}"
        )));
    }
    let (fit, _) = env
        .fit(0.0)
        .ok_or_else(|| Error::DegenerateScales("envelope fit failed".into()))?;
    let raw = -fit.slope;
    let (estimate, clamped) = clamp_unit(raw);
    Ok(DimensionVerdict {
        estimate,
        stderr: fit.stderr,
        method: Method::FourierEnvelope,
        scales,
        raw,
        clamped,
        max_two_point: None,
        note: None,
    })
}

/// One row of an `ℓ^q` scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub q: f64,
    pub blocks: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpScan {
    pub rows: Vec<LpRow>,
    /// `sup {2/q : converging}`, 0 when nothing converges.
    pub estimate: f64,
}

fn symmetric_partial_sums(w: &CoeffWindow, mut term: impl FnMut(f64) -> f64) -> PartialSums {
    let reach = w.symmetric_reach();
    let mut acc = term(w.get_or_zero(0).norm());
    let mut index = vec![0];
    let mut sums = vec![acc];
    for n in 1..=reach {
        acc += term(w.get_or_zero(n).norm()) + term(w.get_or_zero(-n).norm());
        index.push(n);
        sums.push(acc);
    }
    PartialSums { index, sums }
}

/// Dyadic-block trend of `Σ|μ̂(n)|^q` for each `q`.
pub fn lpdim_scan(w: &CoeffWindow, q_grid: &[f64]) -> Result<LpScan> {
    if q_grid.iter().any(|q| !(*q > 2.0 && q.is_finite())) {
        return Err(invalid("q_grid", "every q must lie in (2, ∞)"));
    }
    let rule = ConvergenceRule::default();
    let mut rows = Vec::with_capacity(q_grid.len());
    let mut estimate: f64 = 0.0;
    for &q in q_grid {
        let ps = symmetric_partial_sums(w, |a| a.powf(q));
        let blocks = ps.dyadic_blocks();
        let verdict = rule.judge(&blocks);
        if verdict == Verdict::Converging {
            estimate = estimate.max(2.0 / q);
        }
        rows.push(LpRow { q, blocks, verdict });
    }
    Ok(LpScan { rows, estimate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanRow {
    pub alpha: f64,
    pub two_sided: f64,
    pub two_sided_verdict: Verdict,
    pub anti_analytic: f64,
    pub anti_analytic_verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanReport {
    pub rows: Vec<FrostmanRow>,
    /// Largest `α` whose two-sided energy converges.
    pub headline: Option<f64>,
}

/// Two-sided and anti-analytic energies for each `α`.
pub fn frostman_report(w: &CoeffWindow, alpha_grid: &[f64]) -> Result<FrostmanReport> {
    let rule = ConvergenceRule::default();
    let mut rows = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let two = weighted_energy(w, alpha, EnergySide::TwoSided)?;
        let anti = weighted_energy(w, alpha, EnergySide::AntiAnalytic)?;
        rows.push(FrostmanRow {
            alpha,
            two_sided: two.last(),
            two_sided_verdict: two.verdict(&rule),
            anti_analytic: anti.last(),
            anti_analytic_verdict: anti.verdict(&rule),
        });
    }
    let headline = rows
        .iter()
        .filter(|r| r.two_sided_verdict == Verdict::Converging)
        .map(|r| r.alpha)
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
    Ok(FrostmanReport { rows, headline })
}

/// Outcome of the covering submultiplicativity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumsetCover {
    /// `A + B` reduced mod 2π and merged.
    pub sumset: IntervalUnion,
    pub cov_a: u64,
    pub cov_b: u64,
    /// Cover of `A + B` by arcs of length `2ε`.
    pub cov_ab: u64,
    pub pass: bool,
}

/// Checks `Cov(A+B; 2ε) ≤ Cov(A; ε)·Cov(B; ε)`.
///
/// The three counts are taken on the line, where `A + B` lives in
/// `[0, 4π)` before reduction; there greedy is optimal and the
/// inequality is exact.
pub fn sumset_cover(a: &IntervalUnion, b: &IntervalUnion, eps: f64) -> Result<SumsetCover> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut line: Vec<(f64, f64)> = Vec::with_capacity(a.len() * b.len());
    for x in a.intervals() {
        for y in b.intervals() {
            line.push((x.start() + y.start(), x.end() + y.end()));
        }
    }
    line.sort_by(|p, q| p.0.total_cmp(&q.0));
    let cov_ab = if eps > 0.0 && eps.is_finite() {
        cover_segments(line.iter().copied(), 2.0 * eps)
    } else {
        return Err(invalid("eps", "must be positive and finite"));
    };
    let cov_a = cover_count(CoverSet::Union(a), eps)?;
    let cov_b = cover_count(CoverSet::Union(b), eps)?;
    let arcs = line
        .iter()
        .map(|&(s, e)| Interval::new(s, (e - s).min(TWO_PI)))
        .collect::<Result<Vec<_>>>()?;
    let sumset = IntervalUnion::from_unsorted(arcs);
    Ok(SumsetCover {
        sumset,
        cov_a,
        cov_b,
        cov_ab,
        pass: cov_ab <= cov_a.saturating_mul(cov_b),
    })
}
