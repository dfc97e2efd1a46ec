//! Measures on the circle `[0, 2π)`, coefficient windows and the norms and
//! energies computed from them.
//!
//! One coefficient convention is used everywhere: for a measure `μ`,
//! `μ̂(m) = ∫ e^{-imt} dμ(t)` with no `1/2π` factor. A density `h` is treated
//! as the measure `h(t) dt`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Absolute tolerance for angle comparisons.
pub const ANGLE_TOL: f64 = 1e-12;

/// Largest coefficient window we are willing to allocate.
const MAX_WINDOW_LEN: i64 = 1 << 31;

/// Reduce an angle to `[0, 2π)`.
pub fn wrap(t: f64) -> f64 {
    let r = t.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// Half-open arc `[start, start + length)` taken mod 2π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    start: f64,
    length: f64,
}

impl Interval {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        if !start.is_finite() || !length.is_finite() {
            return Err(invalid("interval", "non-finite endpoint"));
        }
        if length <= 0.0 || length > TWO_PI + ANGLE_TOL {
            return Err(invalid("interval", format!("length {length} outside (0, 2π]")));
        }
        Ok(Self {
            start: wrap(start),
            length: length.min(TWO_PI),
        })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Right endpoint on the unwrapped line; may exceed 2π.
    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    pub fn contains(&self, t: f64) -> bool {
        let d = (wrap(t) - self.start).rem_euclid(TWO_PI);
        d < self.length
    }
}

/// Sorted, pairwise-disjoint arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl TryFrom<Vec<Interval>> for IntervalUnion {
    type Error = Error;
    fn try_from(v: Vec<Interval>) -> Result<Self> {
        IntervalUnion::new(v)
    }
}

impl From<IntervalUnion> for Vec<Interval> {
    fn from(u: IntervalUnion) -> Self {
        u.intervals
    }
}

impl IntervalUnion {
    /// Validates ordering, disjointness (circularly) and total length. Arcs
    /// may touch since they are half-open.
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        let total: f64 = intervals.iter().map(|i| i.length).sum();
        if total > TWO_PI + ANGLE_TOL {
            return Err(invalid("union", format!("total length {total} exceeds 2π")));
        }
        for w in intervals.windows(2) {
            if w[1].start < w[0].start {
                return Err(invalid("union", "intervals not sorted by start"));
            }
            if w[1].start - w[0].end() < -ANGLE_TOL {
                return Err(invalid("union", "intervals overlap"));
            }
        }
        if intervals.len() > 1 {
            let last = intervals[intervals.len() - 1];
            if intervals[0].start + TWO_PI - last.end() < -ANGLE_TOL {
                return Err(invalid("union", "last interval wraps onto the first"));
            }
        }
        Ok(Self { intervals })
    }

    /// Sorts and merges overlapping or touching arcs; the result covers the
    /// same set. A union covering everything collapses to `[0, 2π)`.
    pub fn from_unsorted(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for iv in &intervals {
            match merged.last_mut() {
                Some(last) if iv.start <= last.1 => last.1 = last.1.max(iv.end()),
                _ => merged.push((iv.start, iv.end())),
            }
        }
        // Arcs spilling past 2π may swallow arcs near 0.
        if merged.len() > 1 {
            let spill = merged[merged.len() - 1].1 - TWO_PI;
            if spill >= 0.0 {
                while merged.len() > 1 && merged[0].0 <= spill {
                    let first = merged.remove(0);
                    let last = merged.last_mut().unwrap();
                    last.1 = last.1.max(first.1 + TWO_PI);
                }
            }
        }
        if merged.len() == 1 && merged[0].1 - merged[0].0 >= TWO_PI {
            return Self {
                intervals: vec![Interval {
                    start: 0.0,
                    length: TWO_PI,
                }],
            };
        }
        if let Some(last) = merged.last() {
            if last.1 - last.0 >= TWO_PI {
                return Self {
                    intervals: vec![Interval {
                        start: 0.0,
                        length: TWO_PI,
                    }],
                };
            }
        }
        Self {
            intervals: merged
                .into_iter()
                .map(|(s, e)| Interval {
                    start: s,
                    length: e - s,
                })
                .collect(),
        }
    }

    pub fn full_circle() -> Self {
        Self {
            intervals: vec![Interval {
                start: 0.0,
                length: TWO_PI,
            }],
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|i| i.length).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(t))
    }

    /// Circular distance from `t` to the closed union.
    pub fn distance(&self, t: f64) -> f64 {
        let t = wrap(t);
        self.intervals
            .iter()
            .map(|i| {
                if i.contains(t) {
                    return 0.0;
                }
                let to_start = (i.start - t).rem_euclid(TWO_PI);
                let from_end = (t - i.end()).rem_euclid(TWO_PI);
                to_start.min(from_end)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// A finite measure on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircleMeasure {
    /// Constant nonnegative density on each arc of the union.
    Piecewise {
        union: IntervalUnion,
        weights: Vec<f64>,
    },
    /// Point masses `(position, mass)`.
    Atomic { atoms: Vec<(f64, Complex64)> },
    /// Weighted sample cloud.
    Empirical {
        positions: Vec<f64>,
        weights: Vec<f64>,
        total_mass: f64,
    },
}

impl CircleMeasure {
    pub fn piecewise(union: IntervalUnion, weights: Vec<f64>) -> Result<Self> {
        if union.len() != weights.len() {
            return Err(invalid("weights", "one density per interval required"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("weights", "densities must be finite and nonnegative"));
        }
        Ok(Self::Piecewise { union, weights })
    }

    pub fn atomic(atoms: Vec<(f64, Complex64)>) -> Result<Self> {
        if atoms.iter().any(|(p, m)| !p.is_finite() || !m.re.is_finite() || !m.im.is_finite()) {
            return Err(invalid("atoms", "non-finite atom"));
        }
        Ok(Self::Atomic {
            atoms: atoms.into_iter().map(|(p, m)| (wrap(p), m)).collect(),
        })
    }

    /// Empirical measure; weights are rescaled to sum to `total_mass`.
    pub fn empirical(positions: Vec<f64>, weights: Vec<f64>, total_mass: f64) -> Result<Self> {
        if positions.len() != weights.len() {
            return Err(invalid("weights", "one weight per sample required"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("weights", "sample weights must be positive"));
        }
        let s: f64 = weights.iter().sum();
        if s == 0.0 {
            return Err(Error::ZeroMeasure);
        }
        let scale = total_mass / s;
        Ok(Self::Empirical {
            positions: positions.into_iter().map(wrap).collect(),
            weights: weights.into_iter().map(|w| w * scale).collect(),
            total_mass,
        })
    }

    /// Normalized Lebesgue measure.
    pub fn lebesgue() -> Self {
        Self::Piecewise {
            union: IntervalUnion::full_circle(),
            weights: vec![1.0 / TWO_PI],
        }
    }

    pub fn unit_atom(at: f64) -> Self {
        Self::Atomic {
            atoms: vec![(wrap(at), Complex64::new(1.0, 0.0))],
        }
    }

    pub fn total_variation(&self) -> f64 {
        match self {
            Self::Piecewise { union, weights } => union
                .intervals()
                .iter()
                .zip(weights)
                .map(|(i, w)| i.length * w)
                .sum(),
            Self::Atomic { atoms } => atoms.iter().map(|(_, m)| m.norm()).sum(),
            Self::Empirical { weights, .. } => weights.iter().map(|w| w.abs()).sum(),
        }
    }

    /// Closed-form coefficient at a single index.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let mf = m as f64;
        match self {
            Self::Piecewise { union, weights } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (iv, &w) in union.intervals().iter().zip(weights) {
                    acc += w * arc_transform(iv.start, iv.length, mf);
                }
                acc
            }
            Self::Atomic { atoms } => atoms
                .iter()
                .map(|(p, mass)| mass * Complex64::from_polar(1.0, -mf * p))
                .sum(),
            Self::Empirical {
                positions, weights, ..
            } => positions
                .iter()
                .zip(weights)
                .map(|(p, w)| Complex64::from_polar(*w, -mf * p))
                .sum(),
        }
    }
}

/// `∫_a^{a+len} e^{-imt} dt`, written to avoid cancellation when `m·len` is small.
pub fn arc_transform(a: f64, len: f64, m: f64) -> Complex64 {
    if m == 0.0 {
        return Complex64::new(len, 0.0);
    }
    let half = 0.5 * m * len;
    let amp = len * sinc(half);
    Complex64::from_polar(amp, -m * (a + 0.5 * len))
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Contiguous window of coefficients `lo..=hi`, measure convention.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffWindow {
    lo: i64,
    hi: i64,
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct WindowRepr {
    lo: i64,
    hi: i64,
    re: Vec<f64>,
    im: Vec<f64>,
    convention: String,
}

impl Serialize for CoeffWindow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WindowRepr {
            lo: self.lo,
            hi: self.hi,
            re: self.values.iter().map(|c| c.re).collect(),
            im: self.values.iter().map(|c| c.im).collect(),
            convention: "measure".into(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoeffWindow {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = WindowRepr::deserialize(d)?;
        if r.convention != "measure" {
            return Err(D::Error::custom(format!("unsupported convention `{}`", r.convention)));
        }
        if r.re.len() != r.im.len() {
            return Err(D::Error::custom("re/im length mismatch"));
        }
        let values = r.re.into_iter().zip(r.im).map(|(a, b)| Complex64::new(a, b)).collect();
        CoeffWindow::new(r.lo, r.hi, values).map_err(D::Error::custom)
    }
}

fn window_len(lo: i64, hi: i64) -> Result<usize> {
    let len = hi
        .checked_sub(lo)
        .and_then(|d| d.checked_add(1))
        .ok_or(Error::IndexOverflow { lo, hi })?;
    if !(1..=MAX_WINDOW_LEN).contains(&len) {
        return Err(Error::IndexOverflow { lo, hi });
    }
    Ok(len as usize)
}

impl CoeffWindow {
    pub fn new(lo: i64, hi: i64, values: Vec<Complex64>) -> Result<Self> {
        if lo > 0 || hi < 0 {
            return Err(invalid("window", format!("[{lo}, {hi}] must contain 0")));
        }
        let len = window_len(lo, hi)?;
        if values.len() != len {
            return Err(invalid("window", format!("expected {len} values, got {}", values.len())));
        }
        Ok(Self { lo, hi, values })
    }

    pub fn from_fn(lo: i64, hi: i64, f: impl FnMut(i64) -> Complex64) -> Result<Self> {
        window_len(lo, hi)?;
        let values = (lo..=hi).map(f).collect();
        Self::new(lo, hi, values)
    }

    /// Symmetric window `[-m, m]` from a real-valued profile.
    pub fn from_real_fn(m: i64, mut f: impl FnMut(i64) -> f64) -> Result<Self> {
        Self::from_fn(-m, m, |n| Complex64::new(f(n), 0.0))
    }

    pub fn zeros(lo: i64, hi: i64) -> Result<Self> {
        let len = window_len(lo, hi)?;
        Self::new(lo, hi, vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn contains(&self, m: i64) -> bool {
        (self.lo..=self.hi).contains(&m)
    }

    pub fn require(&self, lo: i64, hi: i64) -> Result<()> {
        if lo < self.lo || hi > self.hi {
            return Err(Error::WindowInsufficient {
                need_lo: lo,
                need_hi: hi,
                have_lo: self.lo,
                have_hi: self.hi,
            });
        }
        Ok(())
    }

    /// Coefficient at `m`; out-of-window queries are errors.
    pub fn get(&self, m: i64) -> Result<Complex64> {
        self.require(m, m)?;
        Ok(self.values[(m - self.lo) as usize])
    }

    /// Coefficient at `m`, zero outside the window. Callers own the caveat.
    pub fn get_or_zero(&self, m: i64) -> Complex64 {
        if self.contains(m) {
            self.values[(m - self.lo) as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        (self.lo..=self.hi).zip(self.values.iter().copied())
    }

    /// Largest `M` with `[-M, M]` inside the window.
    pub fn symmetric_reach(&self) -> i64 {
        (-self.lo).min(self.hi)
    }

    /// Window-wise sum; both windows must have identical bounds.
    pub fn try_add(&self, other: &CoeffWindow) -> Result<CoeffWindow> {
        if self.lo != other.lo || self.hi != other.hi {
            return Err(invalid("window", "bounds differ"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self::new(self.lo, self.hi, values)
    }

    pub fn scale(&self, s: Complex64) -> CoeffWindow {
        CoeffWindow {
            lo: self.lo,
            hi: self.hi,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Restrict to a sub-window.
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<CoeffWindow> {
        self.require(lo, hi)?;
        let a = (lo - self.lo) as usize;
        let b = (hi - self.lo) as usize;
        Self::new(lo, hi, self.values[a..=b].to_vec())
    }
}

/// Closed-form coefficients of `mu` on `lo..=hi`.
pub fn fourier_coeffs(mu: &CircleMeasure, lo: i64, hi: i64) -> Result<CoeffWindow> {
    if hi < lo {
        return Err(invalid("window", "hi < lo"));
    }
    window_len(lo, hi)?;
    if mu.total_variation() == 0.0 {
        return Err(Error::ZeroMeasure);
    }
    CoeffWindow::from_fn(lo, hi, |m| mu.coeff(m))
}

/// Index set for [`lp_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Negatives,
    Positives,
    Full,
    Window(i64, i64),
}

impl Side {
    fn range(self, w: &CoeffWindow) -> Result<(i64, i64)> {
        let (a, b) = match self {
            Side::Negatives => {
                if w.lo >= 0 {
                    return Err(Error::WindowInsufficient {
                        need_lo: -1,
                        need_hi: -1,
                        have_lo: w.lo,
                        have_hi: w.hi,
                    });
                }
                (w.lo, -1)
            }
            Side::Positives => {
                if w.hi <= 0 {
                    return Err(Error::WindowInsufficient {
                        need_lo: 1,
                        need_hi: 1,
                        have_lo: w.lo,
                        have_hi: w.hi,
                    });
                }
                (1, w.hi)
            }
            Side::Full => (w.lo, w.hi),
            Side::Window(a, b) => {
                if b < a {
                    return Err(invalid("side", "window[a,b] needs a ≤ b"));
                }
                (a, b)
            }
        };
        w.require(a, b)?;
        Ok((a, b))
    }
}

/// `(Σ |w(n)|^p)^{1/p}` over the requested side.
pub fn lp_norm(w: &CoeffWindow, p: f64, side: Side) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} must be a finite real ≥ 1")));
    }
    let (a, b) = side.range(w)?;
    let slice = &w.values[(a - w.lo) as usize..=(b - w.lo) as usize];
    let scale = slice.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = slice.iter().map(|c| (c.norm() / scale).powf(p)).sum();
    Ok(scale * s.powf(1.0 / p))
}

/// Which energy sum [`weighted_energy`] accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySide {
    TwoSided,
    AntiAnalytic,
}

/// Finite-data verdict about an infinite sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converging,
    Diverging,
    /// Fewer dyadic blocks than the rule needs.
    Undetermined,
}

/// Dyadic-block rule: the last `blocks` contributions must each be zero or
/// strictly below `ratio` times the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRule {
    pub ratio: f64,
    pub blocks: usize,
}

impl Default for ConvergenceRule {
    fn default() -> Self {
        Self {
            ratio: 1.0,
            blocks: 3,
        }
    }
}

impl ConvergenceRule {
    pub const HALVING: ConvergenceRule = ConvergenceRule {
        ratio: 0.5,
        blocks: 3,
    };

    pub fn judge(&self, contributions: &[f64]) -> Verdict {
        if contributions.len() < self.blocks + 1 {
            return Verdict::Undetermined;
        }
        let tail = &contributions[contributions.len() - self.blocks - 1..];
        let ok = tail
            .windows(2)
            .all(|w| w[1] == 0.0 || w[1] < self.ratio * w[0]);
        if ok {
            Verdict::Converging
        } else {
            Verdict::Diverging
        }
    }
}

/// Partial sums `S_N` for `N = index[i]`, nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialSums {
    pub index: Vec<i64>,
    pub sums: Vec<f64>,
}

impl PartialSums {
    pub fn last(&self) -> f64 {
        self.sums.last().copied().unwrap_or(0.0)
    }

    /// Value at the largest index `≤ n`.
    pub fn at(&self, n: i64) -> Option<f64> {
        let pos = self.index.partition_point(|&i| i <= n);
        if pos == 0 {
            None
        } else {
            Some(self.sums[pos - 1])
        }
    }

    /// Contributions of the dyadic blocks `(2^{j-1}, 2^j]`, `j ≥ 1`, plus the
    /// initial segment up to 1 as block 0.
    pub fn dyadic_blocks(&self) -> Vec<f64> {
        let max = match self.index.last() {
            Some(&m) if m >= 1 => m,
            _ => return Vec::new(),
        };
        let mut out = Vec::new();
        let mut prev = 0.0;
        let mut m = 1i64;
        while m <= max {
            let v = self.at(m).unwrap_or(0.0);
            out.push(v - prev);
            prev = v;
            m *= 2;
        }
        out
    }

    pub fn verdict(&self, rule: &ConvergenceRule) -> Verdict {
        rule.judge(&self.dyadic_blocks())
    }
}

/// Energy partial sums over growing windows.
///
/// `TwoSided`: `Σ_{|n|≤N} |μ̂(n)|² / (|n|^{1-α} + 1)` for `N = 0..=reach`.
/// `AntiAnalytic`: `Σ_{-N≤n<0} |μ̂(n)|² / |n|^{1-α}` for `N = 0..=-lo`.
pub fn weighted_energy(w: &CoeffWindow, alpha: f64, side: EnergySide) -> Result<PartialSums> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid("alpha", format!("{alpha} outside (0, 1]")));
    }
    let e = 1.0 - alpha;
    let mut index = Vec::new();
    let mut sums = Vec::new();
    match side {
        EnergySide::TwoSided => {
            let reach = w.symmetric_reach();
            let mut acc = w.get(0)?.norm_sqr();
            index.push(0);
            sums.push(acc);
            for n in 1..=reach {
                let d = (n as f64).powf(e) + 1.0;
                acc += (w.get(n)?.norm_sqr() + w.get(-n)?.norm_sqr()) / d;
                index.push(n);
                sums.push(acc);
            }
        }
        EnergySide::AntiAnalytic => {
            if w.lo >= 0 {
                return Err(Error::WindowInsufficient {
                    need_lo: -1,
                    need_hi: -1,
                    have_lo: w.lo,
                    have_hi: w.hi,
                });
            }
            let mut acc = 0.0;
            index.push(0);
            sums.push(0.0);
            for n in 1..=-w.lo {
                acc += w.get(-n)?.norm_sqr() / (n as f64).powf(e);
                index.push(n);
                sums.push(acc);
            }
        }
    }
    Ok(PartialSums { index, sums })
}

/// `(1/(2N+1)) Σ_{|n|≤N} |μ̂(n)|²`.
pub fn wiener_average(w: &CoeffWindow, n: i64) -> Result<f64> {
    if n < 0 {
        return Err(invalid("N", "must be nonnegative"));
    }
    w.require(-n, n)?;
    let s: f64 = (-n..=n).map(|k| w.get_or_zero(k).norm_sqr()).sum();
    Ok(s / (2 * n + 1) as f64)
}

/// Raised-cosine power bump `cos^{2q}(π(t-c)/(2ε))` on `[c-ε, c+ε]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothBump {
    center: f64,
    half_width: f64,
    order: u32,
}

impl SmoothBump {
    pub const DEFAULT_ORDER: u32 = 6;

    pub fn new(center: f64, half_width: f64, order: u32) -> Result<Self> {
        if !(half_width > 0.0 && half_width <= PI) {
            return Err(invalid("half_width", "must lie in (0, π]"));
        }
        if order < 2 {
            return Err(invalid("order", "must be at least 2"));
        }
        Ok(Self {
            center: wrap(center),
            half_width,
            order,
        })
    }

    /// The degenerate bump `ψ ≡ 1`.
    pub fn constant() -> Self {
        Self {
            center: 0.0,
            half_width: PI,
            order: 0,
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn support(&self) -> Interval {
        Interval {
            start: wrap(self.center - self.half_width),
            length: 2.0 * self.half_width,
        }
    }

    fn binomials(&self) -> Vec<f64> {
        let n = 2 * self.order as usize;
        let mut b = vec![1.0f64; n + 1];
        for j in 1..=n {
            b[j] = b[j - 1] * (n + 1 - j) as f64 / j as f64;
        }
        let s = 0.25f64.powi(self.order as i32);
        b.iter().map(|v| v * s).collect()
    }

    pub fn value(&self, t: f64) -> f64 {
        if self.order == 0 {
            return 1.0;
        }
        let mut d = (wrap(t) - self.center).rem_euclid(TWO_PI);
        if d > PI {
            d -= TWO_PI;
        }
        if d.abs() > self.half_width {
            return 0.0;
        }
        (0.5 * PI * d / self.half_width)
            .cos()
            .powi(2 * self.order as i32)
    }

    /// Closed-form `ψ̂(m)` from the binomial expansion.
    pub fn coeff(&self, m: i64) -> Complex64 {
        if self.order == 0 {
            return if m == 0 {
                Complex64::new(TWO_PI, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        let q = self.order as i64;
        let eps = self.half_width;
        let mf = m as f64;
        let mut acc = 0.0;
        for (j, b) in self.binomials().into_iter().enumerate() {
            let d = (j as i64 - q) as f64 * PI / eps - mf;
            acc += b * 2.0 * eps * sinc(d * eps);
        }
        Complex64::from_polar(acc, -mf * self.center)
    }

    /// `∫ ψ`.
    pub fn mass(&self) -> f64 {
        self.coeff(0).re
    }

    /// Bound `|ψ̂(m)| ≤ C(q)·|m|^{-q}` obtained from `q` integrations by parts.
    pub fn decay_bound(&self, m: i64) -> f64 {
        if self.order == 0 {
            return if m == 0 { TWO_PI } else { 0.0 };
        }
        if m == 0 {
            return self.mass();
        }
        let q = self.order as i64;
        let c: f64 = self
            .binomials()
            .into_iter()
            .enumerate()
            .map(|(j, b)| b * ((j as i64 - q) as f64 * PI / self.half_width).abs().powi(q as i32))
            .sum();
        let bound = 2.0 * self.half_width * c / (m.unsigned_abs() as f64).powi(q as i32);
        bound.min(self.mass())
    }
}

/// Parseval pairing partial sums `P_M = (1/2π) Σ_{|m|≤M} Ŝ(m) ψ̂(-m)`,
/// `M = 0..=max_m`.
pub fn pair(s: &CoeffWindow, psi: &SmoothBump, max_m: i64) -> Result<Vec<Complex64>> {
    if max_m < 0 {
        return Err(invalid("M", "must be nonnegative"));
    }
    s.require(-max_m, max_m)?;
    let mut out = Vec::with_capacity(max_m as usize + 1);
    let mut acc = s.get(0)? * psi.coeff(0);
    out.push(acc / TWO_PI);
    for m in 1..=max_m {
        acc += s.get(m)? * psi.coeff(-m) + s.get(-m)? * psi.coeff(m);
        out.push(acc / TWO_PI);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn atom_window(m: i64) -> CoeffWindow {
        CoeffWindow::from_real_fn(m, |_| 1.0).unwrap()
    }

    #[test]
    fn lebesgue_coefficients() {
        let w = fourier_coeffs(&CircleMeasure::lebesgue(), -5, 5).unwrap();
        assert_abs_diff_eq!(w.get(0).unwrap().re, 1.0, epsilon = 1e-15);
        for m in (-5..=5).filter(|&m| m != 0) {
            assert!(w.get(m).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn half_circle_first_coefficient() {
        let mu = CircleMeasure::piecewise(
            IntervalUnion::new(vec![Interval::new(0.0, PI).unwrap()]).unwrap(),
            vec![1.0 / PI],
        )
        .unwrap();
        let c = mu.coeff(1);
        // midpoint rule as an independent check
        let n = 200_000;
        let h = PI / n as f64;
        let q: Complex64 = (0..n)
            .map(|j| Complex64::from_polar(h / PI, -(j as f64 + 0.5) * h))
            .sum();
        assert_abs_diff_eq!(c.norm(), 2.0 / PI, epsilon = 1e-12);
        assert!((c - q).norm() < 1e-9);
    }

    #[test]
    fn zero_measure_rejected() {
        let mu = CircleMeasure::atomic(vec![]).unwrap();
        assert_eq!(fourier_coeffs(&mu, -1, 1), Err(Error::ZeroMeasure));
    }

    #[test]
    fn overflowing_window_rejected() {
        let mu = CircleMeasure::unit_atom(0.0);
        assert!(matches!(
            fourier_coeffs(&mu, i64::MIN, i64::MAX),
            Err(Error::IndexOverflow { .. })
        ));
    }

    #[test]
    fn lp_norm_examples() {
        let w = atom_window(10);
        assert_abs_diff_eq!(lp_norm(&w, 2.0, Side::Window(1, 4)).unwrap(), 2.0, epsilon = 1e-14);
        let g = CoeffWindow::from_real_fn(20, |n| 2f64.powi(-(n.abs() as i32))).unwrap();
        assert_abs_diff_eq!(lp_norm(&g, 2.0, Side::Full).unwrap(), (5.0f64 / 3.0).sqrt(), epsilon = 1e-6);
        let leb = fourier_coeffs(&CircleMeasure::lebesgue(), -8, 8).unwrap();
        assert!(lp_norm(&leb, 2.0, Side::Negatives).unwrap() < 1e-15);
        assert!(matches!(
            lp_norm(&w, 2.0, Side::Window(5, 11)),
            Err(Error::WindowInsufficient { .. })
        ));
    }

    #[test]
    fn energy_of_atom() {
        let n = 400;
        let w = atom_window(n);
        let e = weighted_energy(&w, 0.5, EnergySide::TwoSided).unwrap();
        let oracle = 1.0 + 2.0 * (1..=n).map(|k| 1.0 / ((k as f64).sqrt() + 1.0)).sum::<f64>();
        assert_abs_diff_eq!(e.last(), oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(e.sums[0], 1.0, epsilon = 0.0);
        assert!(weighted_energy(&w, 0.0, EnergySide::TwoSided).is_err());
        assert!(weighted_energy(&w, 1.5, EnergySide::TwoSided).is_err());
    }

    #[test]
    fn wiener_examples() {
        assert_abs_diff_eq!(wiener_average(&atom_window(7), 5).unwrap(), 1.0, epsilon = 1e-15);
        let leb = fourier_coeffs(&CircleMeasure::lebesgue(), -10, 10).unwrap();
        assert_abs_diff_eq!(wiener_average(&leb, 10).unwrap(), 1.0 / 21.0, epsilon = 1e-15);
        let two = CircleMeasure::atomic(vec![(0.0, 0.5.into()), (PI, 0.5.into())]).unwrap();
        let w = fourier_coeffs(&two, -1000, 1000).unwrap();
        assert!((wiener_average(&w, 1000).unwrap() - 0.5).abs() < 0.005);
    }

    #[test]
    fn bump_coefficients_match_quadrature() {
        let psi = SmoothBump::new(1.0, 0.4, 6).unwrap();
        for m in [-7i64, 0, 3, 25] {
            let n = 40_000;
            let a = 1.0 - 0.4;
            let h = 0.8 / n as f64;
            let q: Complex64 = (0..n)
                .map(|j| {
                    let t = a + (j as f64 + 0.5) * h;
                    Complex64::from_polar(psi.value(t) * h, -(m as f64) * t)
                })
                .sum();
            assert!((psi.coeff(m) - q).norm() < 1e-8, "m={m}");
            assert!(psi.coeff(m).norm() <= psi.decay_bound(m) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pairing_examples() {
        let psi = SmoothBump::new(2.0, 0.5, 6).unwrap();
        let atom0 = atom_window(256);
        let p = pair(&atom0, &psi, 256).unwrap();
        assert!(p.last().unwrap().norm() < 1e-10);
        let zero = CoeffWindow::zeros(-16, 16).unwrap();
        assert!(pair(&zero, &psi, 16).unwrap().iter().all(|c| c.norm() == 0.0));
        let at_center = fourier_coeffs(&CircleMeasure::unit_atom(2.0), -256, 256).unwrap();
        let p = pair(&at_center, &psi, 256).unwrap();
        assert!((p.last().unwrap() - 1.0).norm() < 1e-10);
        let c = pair(&at_center, &SmoothBump::constant(), 5).unwrap();
        for v in c {
            assert!((v - at_center.get(0).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn window_json_round_trip() {
        let w = CoeffWindow::from_fn(-2, 3, |m| Complex64::new(m as f64, 0.5)).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains("\"convention\":\"measure\""));
        let back: CoeffWindow = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn union_merging() {
        let u = IntervalUnion::from_unsorted(vec![
            Interval::new(1.0, 0.5).unwrap(),
            Interval::new(0.2, 0.9).unwrap(),
            Interval::new(6.0, 0.2).unwrap(),
        ]);
        assert_eq!(u.len(), 2);
        assert_abs_diff_eq!(u.total_length(), 1.3 + 0.2, epsilon = 1e-12);
        let wrapped = IntervalUnion::from_unsorted(vec![
            Interval::new(0.1, 0.5).unwrap(),
            Interval::new(6.0, 0.5).unwrap(),
        ]);
        assert_eq!(wrapped.len(), 1);
        assert_abs_diff_eq!(wrapped.total_length(), 0.6 + 2.0 * PI - 6.0, epsilon = 1e-12);
    }
}
