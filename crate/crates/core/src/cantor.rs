//! Random nested-interval construction: two children per interval, lengths
//! `σ_n = 2π/(n·2^n)`, offsets drawn per node from a counter-based stream.

use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circle::{CircleMeasure, Interval, IntervalUnion, ANGLE_TOL, TWO_PI};
use crate::error::{invalid, Error, Result};

/// Deepest rank we allow (2^24 intervals).
pub const N_MAX_CAP: usize = 24;

/// Interval lengths and margins per rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    n_max: usize,
    sigma: Vec<f64>,
    tau: Vec<f64>,
}

impl Schedule {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        if n_max > N_MAX_CAP {
            return Err(invalid("n_max", format!("capped at {N_MAX_CAP}")));
        }
        let mut sigma = vec![TWO_PI; n_max + 1];
        let mut tau = vec![0.0; n_max + 1];
        for n in 1..=n_max {
            sigma[n] = TWO_PI / (n as f64 * (1u64 << n) as f64);
            tau[n] = (sigma[n - 1] - 2.0 * sigma[n]) / 6.0;
        }
        // σ_0 = 2π makes τ_1 vanish exactly; pin it against rounding.
        tau[1] = 0.0;
        Ok(Self { n_max, sigma, tau })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn sigma(&self, n: usize) -> f64 {
        self.sigma[n]
    }

    pub fn tau(&self, n: usize) -> f64 {
        self.tau[n]
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigma
    }

    pub fn taus(&self) -> &[f64] {
        &self.tau
    }
}

/// Convenience wrapper matching the operation name.
pub fn schedule(n_max: usize) -> Result<Schedule> {
    Schedule::new(n_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetMode {
    Random,
    Zero,
}

impl std::str::FromStr for OffsetMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "zero" => Ok(Self::Zero),
            other => Err(invalid("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Offsets `s(n,k) ∈ [0,1)`. Random mode keys a ChaCha stream by rank and
/// reads word `2k`, so any single offset can be regenerated on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetTable {
    pub seed: u64,
    pub mode: OffsetMode,
}

fn unit_from_u64(u: u64) -> f64 {
    (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl OffsetTable {
    fn rank_stream(&self, n: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(n as u64);
        rng
    }

    /// A single offset, by random access.
    pub fn offset(&self, n: usize, k: u64) -> f64 {
        match self.mode {
            OffsetMode::Zero => 0.0,
            OffsetMode::Random => {
                let mut rng = self.rank_stream(n);
                rng.set_word_pos(2 * k as u128);
                unit_from_u64(rng.next_u64())
            }
        }
    }

    /// All `2^n` offsets of rank `n`, in order of `k`.
    pub fn rank(&self, n: usize) -> Vec<f64> {
        let count = 1usize << n;
        match self.mode {
            OffsetMode::Zero => vec![0.0; count],
            OffsetMode::Random => {
                let mut rng = self.rank_stream(n);
                (0..count).map(|_| unit_from_u64(rng.next_u64())).collect()
            }
        }
    }
}

/// Left endpoints `a(n,k)` of every rank up to `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedIntervalSystem {
    schedule: Schedule,
    offsets: OffsetTable,
    lefts: Vec<Vec<f64>>,
}

/// Compact description; endpoints are re-derived on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub seed: u64,
    pub mode: OffsetMode,
    pub n_max: usize,
    pub schedule: Schedule,
}

impl RankedIntervalSystem {
    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn offsets(&self) -> &OffsetTable {
        &self.offsets
    }

    pub fn seed(&self) -> u64 {
        self.offsets.seed
    }

    pub fn mode(&self) -> OffsetMode {
        self.offsets.mode
    }

    pub fn n_max(&self) -> usize {
        self.schedule.n_max
    }

    pub fn sigma(&self, n: usize) -> f64 {
        self.schedule.sigma(n)
    }

    pub fn check_rank(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            return Err(Error::IncreaseNMax {
                needed: n,
                built: self.n_max(),
            });
        }
        Ok(())
    }

    /// Left endpoints of rank `n`, spatially sorted.
    pub fn lefts(&self, n: usize) -> &[f64] {
        &self.lefts[n]
    }

    pub fn left(&self, n: usize, k: usize) -> f64 {
        self.lefts[n][k]
    }

    pub fn interval(&self, n: usize, k: usize) -> Interval {
        Interval::new(self.lefts[n][k], self.sigma(n)).expect("rank interval is valid")
    }

    pub fn rank_union(&self, n: usize) -> Result<IntervalUnion> {
        self.check_rank(n)?;
        IntervalUnion::new((0..1usize << n).map(|k| self.interval(n, k)).collect())
    }

    pub fn descriptor(&self) -> SystemDescriptor {
        SystemDescriptor {
            seed: self.seed(),
            mode: self.mode(),
            n_max: self.n_max(),
            schedule: self.schedule.clone(),
        }
    }

    pub fn from_descriptor(d: &SystemDescriptor) -> Result<Self> {
        let sys = build(d.seed, d.n_max, d.mode)?;
        if sys.schedule != d.schedule {
            return Err(invalid("schedule", "stored schedule disagrees with n_max"));
        }
        Ok(sys)
    }

    /// Flat dump of one rank: `n,k,a,sigma`.
    pub fn write_rank_csv<W: Write>(&self, n: usize, out: W) -> Result<()> {
        self.check_rank(n)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "k", "a", "sigma"])?;
        let s = crate::report::fmt17(self.sigma(n));
        for (k, a) in self.lefts[n].iter().enumerate() {
            w.write_record([n.to_string(), k.to_string(), crate::report::fmt17(*a), s.clone()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Re-checks nesting, margins, sibling gaps and total length.
    pub fn verify(&self) -> Result<()> {
        let tol = ANGLE_TOL;
        for n in 0..self.n_max() {
            let (parent, child) = (&self.lefts[n], &self.lefts[n + 1]);
            let half = 0.5 * self.sigma(n);
            let tau = self.schedule.tau(n + 1);
            let sc = self.sigma(n + 1);
            for (k, &a) in parent.iter().enumerate() {
                for (side, base) in [(0usize, a), (1, a + half)] {
                    let c = child[2 * k + side];
                    let margin = c - base;
                    if margin < tau - tol || margin > 2.0 * tau + tol {
                        return Err(Error::Invariant(format!(
                            "left margin of I({},{}) is {margin}, outside [{tau}, {}]",
                            n + 1,
                            2 * k + side,
                            2.0 * tau
                        )));
                    }
                    let slack = base + half - (c + sc);
                    if slack < tau - tol {
                        return Err(Error::Invariant(format!(
                            "right slack of I({},{}) is {slack} < {tau}",
                            n + 1,
                            2 * k + side
                        )));
                    }
                }
            }
        }
        for n in 1..=self.n_max() {
            let l = &self.lefts[n];
            let s = self.sigma(n);
            let min_gap = 2.0 * self.schedule.tau(n);
            for w in l.windows(2) {
                if w[1] - (w[0] + s) < min_gap - tol {
                    return Err(Error::Invariant(format!("rank {n} gap below 2τ_{n}")));
                }
            }
            if l[0] < -tol || l[l.len() - 1] + s > TWO_PI + tol {
                return Err(Error::Invariant(format!("rank {n} leaves [0, 2π]")));
            }
            let total = compensated_sum(l.iter().map(|_| s));
            if (total - TWO_PI / n as f64).abs() > 1e-12 {
                return Err(Error::Invariant(format!("|K_{n}| = {total}, expected 2π/{n}")));
            }
        }
        Ok(())
    }
}

pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let y = v - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

/// Builds every rank up to `n_max` and verifies the invariants.
pub fn build(seed: u64, n_max: usize, mode: OffsetMode) -> Result<RankedIntervalSystem> {
    let schedule = Schedule::new(n_max)?;
    let offsets = OffsetTable { seed, mode };
    let mut lefts = Vec::with_capacity(n_max + 1);
    lefts.push(vec![0.0]);
    for n in 0..n_max {
        let s = offsets.rank(n + 1);
        let tau = schedule.tau(n + 1);
        let half = 0.5 * schedule.sigma(n);
        let parent: &Vec<f64> = &lefts[n];
        let mut next = Vec::with_capacity(parent.len() * 2);
        for (k, &a) in parent.iter().enumerate() {
            next.push(a + tau * (1.0 + s[2 * k]));
            next.push(a + half + tau * (1.0 + s[2 * k + 1]));
        }
        lefts.push(next);
    }
    let sys = RankedIntervalSystem {
        schedule,
        offsets,
        lefts,
    };
    sys.verify()?;
    Ok(sys)
}

/// Bytes held by the endpoint table of a system of depth `n_max`,
/// saturating at `u64::MAX`.
pub fn memory_estimate(n_max: usize) -> u64 {
    if n_max >= 60 {
        return u64::MAX;
    }
    8 * ((1u64 << (n_max + 1)) - 1)
}

/// Probability density `n/(2π)` on the rank-`n` intervals.
pub fn stage_density(sys: &RankedIntervalSystem, n: usize) -> Result<CircleMeasure> {
    if n == 0 {
        return Ok(CircleMeasure::lebesgue());
    }
    let union = sys.rank_union(n)?;
    let w = n as f64 / TWO_PI;
    CircleMeasure::piecewise(union, vec![w; 1 << n])
}

/// Hausdorff gauge function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    TLogOneOverT,
    TPow(f64),
}

impl Gauge {
    pub fn eval(&self, t: f64) -> Result<f64> {
        match *self {
            Gauge::TLogOneOverT => {
                if !(t > 0.0 && t < 1.0) {
                    return Err(invalid("gauge", format!("t·log(1/t) needs 0 < t < 1, got {t}")));
                }
                Ok(t * (1.0 / t).ln())
            }
            Gauge::TPow(a) => {
                if !(a > 0.0) || t <= 0.0 {
                    return Err(invalid("gauge", "t^α needs α > 0 and t > 0"));
                }
                Ok(t.powf(a))
            }
        }
    }
}

/// `2^n · h(σ_n)`: the gauge sum of the natural rank-`n` cover.
pub fn gauge_cover_sum(sys: &RankedIntervalSystem, n: usize, gauge: Gauge) -> Result<f64> {
    sys.check_rank(n)?;
    if n == 0 {
        return Err(invalid("n", "rank 0 has no proper cover"));
    }
    Ok((1u64 << n) as f64 * gauge.eval(sys.sigma(n))?)
}

/// Sup over breakpoints of `|F_a(t) - F_b(t)|` where `F_x` is the
/// distribution function of a density `w_x` on equal-length arcs starting at
/// `starts_x`. Both distribution functions are piecewise linear, so the
/// supremum is attained at a breakpoint.
pub fn cdf_sup_distance(
    starts_a: &[f64],
    len_a: f64,
    w_a: f64,
    starts_b: &[f64],
    len_b: f64,
    w_b: f64,
    extra: &[f64],
) -> f64 {
    let cdf = |starts: &[f64], len: f64, w: f64, t: f64| -> f64 {
        let full = starts.partition_point(|&a| a + len <= t);
        let mut mass = full as f64 * len;
        if full < starts.len() && starts[full] < t {
            mass += t - starts[full];
        }
        w * mass
    };
    let mut pts: Vec<f64> = Vec::with_capacity(2 * (starts_a.len() + starts_b.len()) + extra.len());
    for &a in starts_a {
        pts.push(a);
        pts.push(a + len_a);
    }
    for &a in starts_b {
        pts.push(a);
        pts.push(a + len_b);
    }
    pts.extend_from_slice(extra);
    pts.iter()
        .map(|&t| (cdf(starts_a, len_a, w_a, t) - cdf(starts_b, len_b, w_b, t)).abs())
        .fold(0.0, f64::max)
}

/// `max_t |∫_0^t (g_{n+1} - g_n)|` over all endpoints of ranks `n`, `n+1`
/// and any extra grid points.
pub fn partial_mass_delta(sys: &RankedIntervalSystem, n: usize, t_grid: &[f64]) -> Result<f64> {
    sys.check_rank(n + 1)?;
    let wn = n as f64 / TWO_PI;
    let wn1 = (n + 1) as f64 / TWO_PI;
    let (starts_n, len_n, wn) = if n == 0 {
        (vec![0.0], TWO_PI, 1.0 / TWO_PI)
    } else {
        (sys.lefts(n).to_vec(), sys.sigma(n), wn)
    };
    Ok(cdf_sup_distance(
        &starts_n,
        len_n,
        wn,
        sys.lefts(n + 1),
        sys.sigma(n + 1),
        wn1,
        t_grid,
    ))
}
