//! Brownian-bridge images of a self-similar Cantor set, and the shift
//! search that turns a distribution into one with a nonvanishing product.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circle::{weighted_energy, wrap, CoeffWindow, EnergySide, Interval, IntervalUnion, PartialSums, TWO_PI};
use crate::dims::{minkowski_fit, BlockEnvelope, CoverSet, CoverTable, DimensionVerdict};
use crate::error::{invalid, Error, Result};
use crate::fit::SlopeFit;
use crate::nufft;

/// Deepest bridge grid (2^26 steps).
pub const MAX_BRIDGE_LEVEL: u32 = 26;
/// Deepest Cantor level whose digits fit the sampler.
pub const MAX_CANTOR_DEPTH: u32 = 60;
/// Smallest sample an image spectrum accepts.
pub const MIN_SAMPLES: usize = 10_000;
/// Deepest level whose endpoints form the cover cloud.
const CLOUD_DEPTH: u32 = 16;

/// Two children per interval with length ratio `ξ = 2^{-2/δ}`, anchored at
/// both ends of the parent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseCantor {
    delta: f64,
    depth: u32,
    ratio: f64,
}

impl BaseCantor {
    pub fn new(delta: f64, depth: u32) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(invalid("delta", format!("{delta} outside (0, 1]")));
        }
        if !(1..=MAX_CANTOR_DEPTH).contains(&depth) {
            return Err(invalid("depth", format!("must lie in 1..={MAX_CANTOR_DEPTH}")));
        }
        let ratio = (-2.0 / delta).exp2();
        if ratio >= 0.5 {
            return Err(invalid("delta", "ratio must stay below 1/2"));
        }
        Ok(Self { delta, depth, ratio })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Similarity dimension `log 2 / log(1/ξ)`.
    pub fn dimension(&self) -> f64 {
        std::f64::consts::LN_2 / -self.ratio.ln()
    }

    /// Length of one level-`j` interval.
    pub fn length(&self, level: u32) -> f64 {
        TWO_PI * self.ratio.powi(level as i32)
    }

    pub fn total_length(&self, level: u32) -> f64 {
        TWO_PI * (2.0 * self.ratio).powi(level as i32)
    }

    /// Left end of interval `k` at `level`; the bits of `k`, most
    /// significant first, choose left (0) or right (1) children.
    pub fn left(&self, level: u32, k: u64) -> f64 {
        let mut a = 0.0;
        let mut len = TWO_PI;
        for i in (0..level).rev() {
            let child = len * self.ratio;
            if (k >> i) & 1 == 1 {
                a += len - child;
            }
            len = child;
        }
        a
    }

    /// Every level-`j` interval, left to right.
    pub fn union(&self, level: u32) -> Result<IntervalUnion> {
        if level > 24 {
            return Err(invalid("level", "at most 2^24 intervals are materialized"));
        }
        let len = self.length(level);
        // Below this the left ends collide in double precision near 2π.
        if len < 1e3 * TWO_PI * f64::EPSILON {
            return Err(invalid("level", format!("interval length {len:e} is not resolvable")));
        }
        let arcs = (0..1u64 << level)
            .map(|k| Interval::new(self.left(level, k), len))
            .collect::<Result<Vec<_>>>()?;
        IntervalUnion::new(arcs)
    }

    /// A point drawn from the natural measure on the level-`J` set: random
    /// digits, then uniform inside the chosen interval.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let k = rng.next_u64() >> (64 - self.depth);
        let u: f64 = rng.random();
        self.left(self.depth, k) + u * self.length(self.depth)
    }
}

/// Bridge values on the grid `t_j = 2πj/2^L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgePath {
    pub seed: u64,
    pub level: u32,
    pub values: Vec<f64>,
}

/// Lévy midpoint construction of `W` with `Var W(t) = t`, then the linear
/// correction `B = W - (t/2π) W(2π)`. Level `k` draws its innovations from
/// its own ChaCha stream in grid order, so coarser levels never depend on
/// finer ones.
pub fn bridge(seed: u64, level: u32) -> Result<BridgePath> {
    if level > MAX_BRIDGE_LEVEL {
        return Err(invalid("level", format!("capped at {MAX_BRIDGE_LEVEL}")));
    }
    let n = 1usize << level;
    let mut w = vec![0.0; n + 1];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let z: f64 = rng.sample(StandardNormal);
    w[n] = TWO_PI.sqrt() * z;
    for k in 1..=level {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let step = n >> k;
        let sd = (TWO_PI / (1u64 << (k + 1)) as f64).sqrt();
        let mut j = step;
        while j < n {
            let z: f64 = rng.sample(StandardNormal);
            w[j] = 0.5 * (w[j - step] + w[j + step]) + sd * z;
            j += 2 * step;
        }
    }
    let end = w[n];
    let values = w
        .iter()
        .enumerate()
        .map(|(j, v)| v - (j as f64 / n as f64) * end)
        .collect();
    Ok(BridgePath { seed, level, values })
}

impl BridgePath {
    pub fn grid_step(&self) -> f64 {
        TWO_PI / (1u64 << self.level) as f64
    }

    /// Linear interpolation between grid values; `t` in `[0, 2π]`.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.values.len() - 1;
        let x = (t / self.grid_step()).clamp(0.0, n as f64);
        let j = (x.floor() as usize).min(n - 1);
        let f = x - j as f64;
        self.values[j] * (1.0 - f) + self.values[j + 1] * f
    }

    /// Lévy modulus `√(2h log(1/h))` at the grid step `h`; image scales
    /// below it are not resolved.
    pub fn resolution(&self) -> f64 {
        let h = self.grid_step();
        (2.0 * h * (1.0 / h).ln()).sqrt()
    }
}

/// Deepest Cantor level whose intervals are at least one grid step long.
pub fn resolved_depth(cantor: &BaseCantor, bridge_level: u32) -> u32 {
    let per_level = (2.0 / cantor.delta()).ceil() as u32;
    cantor.depth().min(bridge_level / per_level)
}

/// Image positions `B(t_i)` mod 2π of points drawn from the Cantor measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardSample {
    pub seed: u64,
    pub positions: Vec<f64>,
}

pub fn pushforward(path: &BridgePath, cantor: &BaseCantor, n: usize, seed: u64) -> PushforwardSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..n).map(|_| wrap(path.at(cantor.sample(&mut rng)))).collect();
    PushforwardSample { seed, positions }
}

/// Empirical coefficients of the image measure with an envelope fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSpectrum {
    /// `μ̂(m)` for `|m| ≤ m_hi`.
    pub coeffs: CoeffWindow,
    /// `1/√N`.
    pub noise_floor: f64,
    pub envelope: BlockEnvelope,
    /// Slope of `ln |μ̂|` block maxima against `ln m` over blocks in
    /// `[m_lo, m_hi]` that clear three noise floors.
    pub fit: SlopeFit,
    pub blocks_used: usize,
}

impl ImageSpectrum {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "abs", "noise_floor"])?;
        let floor = crate::report::fmt17(self.noise_floor);
        for m in 0..=self.coeffs.hi() {
            let v = self.coeffs.get(m)?.norm();
            w.write_record([m.to_string(), crate::report::fmt17(v), floor.clone()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `μ̂(m) = (1/N) Σ e^{-im x_i}` on `[-m_hi, m_hi]`.
pub fn image_coeffs(sample: &PushforwardSample, m_lo: i64, m_hi: i64) -> Result<ImageSpectrum> {
    let n = sample.positions.len();
    if n < MIN_SAMPLES {
        return Err(invalid("N", format!("{n} samples, need at least {MIN_SAMPLES}")));
    }
    if !(1 <= m_lo && m_lo < m_hi) {
        return Err(invalid("m_lo", "need 1 ≤ m_lo < m_hi"));
    }
    let c = vec![Complex64::new(1.0 / n as f64, 0.0); n];
    let k = m_hi as usize;
    let raw = nufft::type1(&sample.positions, &c, k);
    // Real positions: enforce exact Hermitian symmetry and unit mass.
    let coeffs = CoeffWindow::from_fn(-m_hi, m_hi, |m| match m {
        0 => Complex64::new(1.0, 0.0),
        m if m > 0 => raw[k + m as usize],
        m => raw[k + (-m) as usize].conj(),
    })?;
    let noise_floor = 1.0 / (n as f64).sqrt();
    let envelope = BlockEnvelope::new(m_lo, m_hi, |m| coeffs.get_or_zero(m).norm().min(1.0));
    if envelope.max.iter().all(|&v| v <= 3.0 * noise_floor) {
        return Err(Error::BelowNoiseFloor { floor: noise_floor });
    }
    let (fit, blocks_used) = envelope
        .fit(3.0 * noise_floor)
        .ok_or_else(|| Error::DegenerateScales("fewer than three blocks above the noise floor".into()))?;
    Ok(ImageSpectrum {
        coeffs,
        noise_floor,
        envelope,
        fit,
        blocks_used,
    })
}

/// Covering numbers of the image cloud with a Minkowski fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageCover {
    pub table: CoverTable,
    pub verdict: DimensionVerdict,
    pub cloud_depth: u32,
    pub resolved_depth: u32,
}

/// Endpoint images of the level-`min(J, 16)` intervals.
pub fn image_cloud(path: &BridgePath, cantor: &BaseCantor) -> Vec<f64> {
    let level = cantor.depth().min(CLOUD_DEPTH);
    let len = cantor.length(level);
    let mut out = Vec::with_capacity(2usize << level);
    for k in 0..1u64 << level {
        let a = cantor.left(level, k);
        out.push(wrap(path.at(a)));
        out.push(wrap(path.at(a + len)));
    }
    out
}

pub fn image_cover(path: &BridgePath, cantor: &BaseCantor, eps: &[f64]) -> Result<ImageCover> {
    let res = path.resolution();
    if let Some(&e) = eps.iter().find(|&&e| e < res) {
        return Err(Error::BelowResolution { eps: e, resolution: res });
    }
    let cloud = image_cloud(path, cantor);
    let table = CoverTable::new(CoverSet::Cloud(&cloud), eps, format!("bridge {} image", path.seed))?;
    let verdict = minkowski_fit(&table)?;
    Ok(ImageCover {
        table,
        verdict,
        cloud_depth: cantor.depth().min(CLOUD_DEPTH),
        resolved_depth: resolved_depth(cantor, path.level),
    })
}

/// Threshold below which a product coefficient counts as zero.
pub const VANISH_TOL: f64 = 1e-12;

/// `T̂(n) = Ŝ(n) μ̂(n - m*)` with the shift that made it nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub product: CoeffWindow,
    pub shift: i64,
    /// `Σ_{-N≤n<0} |T̂(n)|² / |n|^{1-α}` partial sums.
    pub energy: PartialSums,
}

/// Smallest `|m*|`, positive first, with a product coefficient above
/// [`VANISH_TOL`]. Only shifts whose overlap window contains 0 and with
/// `|m*|` at most the width of `s` are tried.
pub fn frostman_reduction(s: &CoeffWindow, mu: &CoeffWindow, alpha: f64) -> Result<Reduction> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid("alpha", format!("{alpha} outside (0, 1]")));
    }
    if mu.values().iter().all(|v| v.norm() == 0.0) {
        return Err(Error::ZeroMeasure);
    }
    let width = s.hi() - s.lo();
    let product_at = |shift: i64| -> Option<CoeffWindow> {
        let lo = s.lo().max(mu.lo() + shift);
        let hi = s.hi().min(mu.hi() + shift);
        if lo > 0 || hi < 0 {
            return None;
        }
        CoeffWindow::from_fn(lo, hi, |n| s.get_or_zero(n) * mu.get_or_zero(n - shift)).ok()
    };
    let candidates = std::iter::once(0).chain((1..=width).flat_map(|d| [d, -d]));
    for shift in candidates {
        if let Some(p) = product_at(shift) {
            if p.values().iter().any(|v| v.norm() > VANISH_TOL) {
                let energy = if p.lo() < 0 {
                    weighted_energy(&p, alpha, EnergySide::AntiAnalytic)?
                } else {
                    PartialSums {
                        index: vec![0],
                        sums: vec![0.0],
                    }
                };
                return Ok(Reduction {
                    product: p,
                    shift,
                    energy,
                });
            }
        }
    }
    Err(Error::ConvolutionVanishes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::derive_seed;
    use std::f64::consts::PI;

    #[test]
    fn base_cantor_examples() {
        let c = BaseCantor::new(1.0, 1).unwrap();
        assert_eq!(c.ratio(), 0.25);
        let u = c.union(1).unwrap();
        let iv = u.intervals();
        assert_eq!((iv[0].start(), iv[0].length()), (0.0, PI / 2.0));
        assert!((iv[1].start() - 1.5 * PI).abs() < 1e-15 && (iv[1].end() - TWO_PI).abs() < 1e-15);
        for delta in [0.3, 0.5, 0.9] {
            let c = BaseCantor::new(delta, 12).unwrap();
            let mut prev = TWO_PI;
            for j in (1..=8).take_while(|&j| c.length(j) > 1e-9) {
                let u = c.union(j).unwrap();
                assert!((u.total_length() - c.total_length(j)).abs() < 1e-12);
                assert!(c.total_length(j) < prev);
                prev = c.total_length(j);
                let n = crate::dims::cover_count(CoverSet::Union(&u), c.length(j)).unwrap();
                assert_eq!(n, 1 << j);
            }
            assert!((c.dimension() - delta / 2.0).abs() < 1e-12);
        }
        assert!(BaseCantor::new(0.5, 14).unwrap().union(14).is_err());
        assert!(BaseCantor::new(0.0, 3).is_err());
        assert!(BaseCantor::new(1.5, 3).is_err());
    }

    #[test]
    fn bridge_endpoints_and_refinement() {
        let b = bridge(9, 12).unwrap();
        assert_eq!(b.values[0], 0.0);
        assert!(b.values[4096].abs() < 1e-12);
        let fine = bridge(9, 13).unwrap();
        for j in 0..=4096 {
            assert_eq!(b.values[j], fine.values[2 * j]);
        }
        assert_eq!(b, bridge(9, 12).unwrap());
        assert!(bridge(1, 27).is_err());
    }

    #[test]
    fn bridge_variance_at_half_period() {
        let n = 10_000;
        let v: f64 = (0..n)
            .map(|i| {
                let b = bridge(derive_seed(42, i), 4).unwrap();
                b.values[8].powi(2)
            })
            .sum::<f64>()
            / n as f64;
        assert!((v / (PI / 2.0) - 1.0).abs() < 0.05, "var {v}");
    }

    #[test]
    fn image_coefficients_basic_properties() {
        let c = BaseCantor::new(0.5, 10).unwrap();
        let b = bridge(3, 14).unwrap();
        let s = pushforward(&b, &c, 20_000, 5);
        let spectrum = image_coeffs(&s, 1, 512).unwrap();
        assert_eq!(spectrum.coeffs.get(0).unwrap(), Complex64::new(1.0, 0.0));
        for m in 1..=512 {
            let v = spectrum.coeffs.get(m).unwrap();
            assert!(v.norm() <= 1.0 + 1e-9);
            assert_eq!(spectrum.coeffs.get(-m).unwrap(), v.conj());
        }
        let direct: Complex64 = s.positions.iter().map(|&x| Complex64::from_polar(1.0, -37.0 * x)).sum::<Complex64>()
            / s.positions.len() as f64;
        assert!((spectrum.coeffs.get(37).unwrap() - direct).norm() < 1e-10);
        assert!(image_coeffs(&PushforwardSample { seed: 0, positions: vec![0.0; 100] }, 1, 8).is_err());
    }

    #[test]
    fn more_samples_agree_within_noise() {
        let c = BaseCantor::new(0.5, 10).unwrap();
        let b = bridge(8, 14).unwrap();
        let a = image_coeffs(&pushforward(&b, &c, 20_000, 1), 1, 64).unwrap();
        let big = image_coeffs(&pushforward(&b, &c, 80_000, 2), 1, 64).unwrap();
        let worst = (1..=64)
            .map(|m| (a.coeffs.get(m).unwrap() - big.coeffs.get(m).unwrap()).norm())
            .fold(0.0, f64::max);
        assert!(worst < 4.0 * a.noise_floor, "worst {worst}");
    }

    #[test]
    fn point_mass_spectrum_is_flat() {
        let s = PushforwardSample {
            seed: 0,
            positions: vec![1.0; MIN_SAMPLES],
        };
        let spectrum = image_coeffs(&s, 1, 256).unwrap();
        assert!(spectrum.fit.slope.abs() < 1e-9);
    }

    #[test]
    fn cover_examples() {
        let b = bridge(1, 20).unwrap();
        let c = BaseCantor::new(0.5, 6).unwrap();
        assert!(matches!(image_cover(&b, &c, &[1e-3]), Err(Error::BelowResolution { .. })));
        let eps = crate::dims::dyadic_eps(0.5, 6);
        let full: Vec<f64> = (0..100_000).map(|i| TWO_PI * i as f64 / 100_000.0).collect();
        let t = CoverTable::new(CoverSet::Cloud(&full), &eps, "circle").unwrap();
        assert!((minkowski_fit(&t).unwrap().estimate - 1.0).abs() < 0.02);
        let one = CoverTable::new(CoverSet::Cloud(&[2.0]), &eps, "point").unwrap();
        assert!(one.counts.iter().all(|&n| n == 1));
        assert_eq!(minkowski_fit(&one).unwrap().estimate, 0.0);
        let r = image_cover(&b, &c, &eps).unwrap();
        assert!(r.table.counts.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(r.resolved_depth, 5);
    }

    #[test]
    fn reduction_examples() {
        let s = CoeffWindow::from_fn(-50, 50, |n| Complex64::new(n as f64, 1.0)).unwrap();
        let atom = CoeffWindow::from_real_fn(60, |_| 1.0).unwrap();
        let r = frostman_reduction(&s, &atom, 0.5).unwrap();
        assert_eq!(r.shift, 0);
        assert_eq!(r.product, s);

        let zero = CoeffWindow::zeros(-10, 10).unwrap();
        assert!(matches!(frostman_reduction(&zero, &atom, 0.5), Err(Error::ConvolutionVanishes)));

        let ones = CoeffWindow::from_real_fn(200, |_| 1.0).unwrap();
        let mu = CoeffWindow::from_real_fn(300, |n| (n.abs() as f64).powf(-0.25).min(1.0)).unwrap();
        let r = frostman_reduction(&ones, &mu, 1.0).unwrap();
        assert_eq!(r.shift, 0);
        let oracle: f64 = (1..=200).map(|n| (n as f64).powf(-0.5)).sum();
        assert!((r.energy.last() - oracle).abs() < 1e-12);

        // Only a shifted copy overlaps the support of μ̂.
        let s = CoeffWindow::from_fn(-20, 20, |n| if n == 7 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).unwrap();
        let mu = CoeffWindow::from_fn(-20, 20, |n| if n == 4 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).unwrap();
        assert_eq!(frostman_reduction(&s, &mu, 0.5).unwrap().shift, 3);
    }
}
