//! Boundary values `f_N = exp(δ(g_N + i g̃_N))` on the circle.
//!
//! The conjugate function is a sum of logarithmic dipoles, one per rank-`N`
//! interval. On the intervals themselves it is evaluated with a multipole
//! scheme over the interval tree: far fields are carried down the tree as
//! Chebyshev samples and near fields are summed directly in local
//! coordinates, so endpoint singularities keep full relative precision.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cantor::RankedIntervalSystem;
use crate::circle::TWO_PI;
use crate::error::{invalid, Result};
use crate::quad::{gauss_legendre01, Chebyshev};

/// Chebyshev samples per tree node.
const CHEB: usize = 20;
/// Longest multipole expansion.
const PMAX: usize = 40;
/// Largest admissible ratio `ρ / |z - c|`.
const T_MAX: f64 = 0.45;
/// Absolute truncation target for one expansion.
const MP_TOL: f64 = 1e-14;

/// Angle difference reduced to `(-π, π]`.
fn reduce(d: f64) -> f64 {
    let r = d.rem_euclid(TWO_PI);
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// `ln|sin(da/2)| - ln|sin(db/2)|`, accurate when both arguments are tiny.
pub(crate) fn pair_log(da: f64, db: f64) -> f64 {
    if da.abs() < 1e-2 && db.abs() < 1e-2 {
        let (a2, b2) = (da * da, db * db);
        (da / db).abs().ln() - (a2 - b2) / 24.0 - (a2 * a2 - b2 * b2) / 2880.0
    } else {
        ((0.5 * da).sin() / (0.5 * db).sin()).abs().ln()
    }
}

/// `e^{id} - 1` without cancellation.
fn expm1_i(d: f64) -> Complex64 {
    let s = (0.5 * d).sin();
    Complex64::new(-2.0 * s * s, d.sin())
}

/// `g̃_N / raw` where raw is `Σ_k ln|sin((θ-a_k)/2)| - ln|sin((θ-b_k)/2)|`.
pub fn conjugate_scale(n: usize) -> f64 {
    n as f64 / (2.0 * PI * PI)
}

/// Raw dipole sum at `theta` over every rank-`n` interval.
pub fn raw_direct(sys: &RankedIntervalSystem, n: usize, theta: f64) -> f64 {
    let sigma = sys.sigma(n);
    sys.lefts(n)
        .iter()
        .map(|&a| {
            let da = reduce(theta - a);
            pair_log(da, da - sigma)
        })
        .sum()
}

/// Adjacency lists of one tree level.
#[derive(Debug, Clone)]
struct Csr {
    start: Vec<u32>,
    idx: Vec<u32>,
}

impl Csr {
    fn get(&self, q: usize) -> &[u32] {
        &self.idx[self.start[q] as usize..self.start[q + 1] as usize]
    }
}

/// Nodes at arc distance below their own length.
fn neighbors(lefts: &[f64], sigma: f64) -> Csr {
    let cnt = lefts.len();
    let mut start = Vec::with_capacity(cnt + 1);
    let mut idx = Vec::new();
    start.push(0u32);
    for q in 0..cnt {
        let first = idx.len();
        idx.push(q as u32);
        for s in 1..cnt {
            let r = (q + s) % cnt;
            let mut gap = lefts[r] - lefts[q] - sigma;
            if q + s >= cnt {
                gap += TWO_PI;
            }
            if gap >= sigma {
                break;
            }
            idx.push(r as u32);
        }
        for s in 1..cnt {
            let r = (q + cnt - s) % cnt;
            let mut gap = lefts[q] - lefts[r] - sigma;
            if s > q {
                gap += TWO_PI;
            }
            if gap >= sigma {
                break;
            }
            if !idx[first..].contains(&(r as u32)) {
                idx.push(r as u32);
            }
        }
        start.push(idx.len() as u32);
    }
    Csr { start, idx }
}

/// Quadrature nodes on one interval in relative position `u ∈ (0, 1)`,
/// graded geometrically toward both ends.
#[derive(Debug, Clone)]
pub struct LeafRule {
    /// Distance to the left end, relative.
    pub ul: Vec<f64>,
    /// Distance to the right end, relative.
    pub ur: Vec<f64>,
    /// Weights summing to 1.
    pub w: Vec<f64>,
    /// Relative length of the innermost panels, whose content is bounded
    /// rather than resolved.
    pub tail: f64,
    rows: Vec<f64>,
}

/// Panels `[2^{-j-2}, 2^{-j-1}]·scale` down to depth, plus the innermost.
fn graded_half(depth: usize, q: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre01(q);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut hi = 0.5 * scale;
    for _ in 0..depth {
        let lo = 0.5 * hi;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + (hi - lo) * xi);
            weights.push((hi - lo) * wi);
        }
        hi = lo;
    }
    for (xi, wi) in x.iter().zip(&w) {
        nodes.push(hi * xi);
        weights.push(hi * wi);
    }
    (nodes, weights)
}

/// Grading depth `⌈log₂(1/tol)⌉`.
pub fn depth_for(tol: f64) -> usize {
    (1.0 / tol).log2().ceil().max(1.0) as usize
}

impl LeafRule {
    /// `q` Gauss points per panel, grading ratio 1/2, `depth` levels per end.
    pub fn graded(depth: usize, q: usize) -> Self {
        let (u, w) = graded_half(depth, q, 1.0);
        let mut ul = u.clone();
        let mut ur: Vec<f64> = u.iter().map(|x| 1.0 - x).collect();
        let mut ww = w.clone();
        ul.extend(u.iter().map(|x| 1.0 - x));
        ur.extend(u.iter().copied());
        ww.extend(w);
        let cheb = Chebyshev::new(CHEB);
        let mut rows = vec![0.0; ul.len() * CHEB];
        for (i, &x) in ul.iter().enumerate() {
            cheb.row(x, &mut rows[i * CHEB..(i + 1) * CHEB]);
        }
        Self {
            ul,
            ur,
            w: ww,
            tail: 2.0 * 0.5f64.powi(depth as i32 + 1),
            rows,
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Multipole and local-field tables for the rank-`n` dipole sum.
#[derive(Debug, Clone)]
pub struct ConjugateField<'a> {
    sys: &'a RankedIntervalSystem,
    n: usize,
    cheb: Chebyshev,
    nb: Vec<Csr>,
    mp: Vec<Vec<Complex64>>,
    mp_bound: Vec<f64>,
    local: Vec<f64>,
}

impl<'a> ConjugateField<'a> {
    pub fn new(sys: &'a RankedIntervalSystem, n: usize) -> Result<Self> {
        sys.check_rank(n)?;
        if n == 0 {
            return Err(invalid("N", "must be at least 1"));
        }
        let nb: Vec<Csr> = (0..=n).map(|l| neighbors(sys.lefts(l), sys.sigma(l))).collect();
        let mut field = Self {
            sys,
            n,
            cheb: Chebyshev::new(CHEB),
            nb,
            mp: vec![Vec::new(); n + 1],
            mp_bound: vec![0.0; n + 1],
            local: Vec::new(),
        };
        field.build_multipoles();
        field.downward();
        Ok(field)
    }

    pub fn stage(&self) -> usize {
        self.n
    }

    fn has_mp(&self, l: usize) -> bool {
        l >= 1 && l + 3 <= self.n
    }

    fn rho(&self, l: usize) -> f64 {
        2.0 * (0.25 * self.sys.sigma(l)).sin()
    }

    fn center(&self, l: usize, q: usize) -> f64 {
        self.sys.left(l, q) + 0.5 * self.sys.sigma(l)
    }

    fn build_multipoles(&mut self) {
        let sn = self.sys.sigma(self.n);
        let lefts = self.sys.lefts(self.n);
        for l in 1..=self.n {
            if !self.has_mp(l) {
                continue;
            }
            let rho = self.rho(l);
            let per = 1usize << (self.n - l);
            let cnt = 1usize << l;
            let mut table = vec![Complex64::new(0.0, 0.0); cnt * PMAX];
            for q in 0..cnt {
                let phi = self.center(l, q);
                let acc = &mut table[q * PMAX..(q + 1) * PMAX];
                for &a in &lefts[q * per..(q + 1) * per] {
                    let va = expm1_i(a - phi) / rho;
                    let vb = expm1_i(a + sn - phi) / rho;
                    let (mut pa, mut pb) = (va, vb);
                    for slot in acc.iter_mut() {
                        *slot += pa - pb;
                        pa *= va;
                        pb *= vb;
                    }
                }
                for (p, slot) in acc.iter_mut().enumerate() {
                    *slot /= (p + 1) as f64;
                }
            }
            self.mp[l] = table;
            self.mp_bound[l] = per as f64 * 2.0 * (0.5 * sn).sin() / rho;
        }
    }

    /// Far-field contribution of node `(l, q)` at `theta`, if its expansion
    /// converges there.
    fn mp_eval(&self, l: usize, q: usize, theta: f64) -> Option<f64> {
        let e = expm1_i(theta - self.center(l, q));
        let u = self.rho(l) / e;
        let t = u.norm();
        if t > T_MAX {
            return None;
        }
        let s = self.mp_bound[l];
        let need = ((MP_TOL * (1.0 - t) / s).ln() / t.ln() - 1.0).ceil().max(1.0) as usize;
        if need > PMAX {
            return None;
        }
        let b = &self.mp[l][q * PMAX..q * PMAX + need];
        let mut acc = b[need - 1];
        for c in b[..need - 1].iter().rev() {
            acc = acc * u + c;
        }
        Some(-(acc * u).re)
    }

    fn direct_node(&self, l: usize, q: usize, theta: f64) -> f64 {
        let per = 1usize << (self.n - l);
        let sn = self.sys.sigma(self.n);
        self.sys.lefts(self.n)[q * per..(q + 1) * per]
            .iter()
            .map(|&a| {
                let da = reduce(theta - a);
                pair_log(da, da - sn)
            })
            .sum()
    }

    fn node_field(&self, l: usize, q: usize, thetas: &[f64], out: &mut [f64]) {
        if self.has_mp(l) {
            let mut vals = [0.0; CHEB];
            let mut ok = true;
            for (v, &th) in vals.iter_mut().zip(thetas) {
                match self.mp_eval(l, q, th) {
                    Some(x) => *v = x,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                for (o, v) in out.iter_mut().zip(vals) {
                    *o += v;
                }
                return;
            }
        }
        for (o, &th) in out.iter_mut().zip(thetas) {
            *o += self.direct_node(l, q, th);
        }
    }

    fn downward(&mut self) {
        let mut prev = vec![0.0; CHEB];
        let mut thetas = [0.0; CHEB];
        for l in 1..=self.n {
            let cnt = 1usize << l;
            let sl = self.sys.sigma(l);
            let sp = self.sys.sigma(l - 1);
            let mut cur = vec![0.0; cnt * CHEB];
            for q in 0..cnt {
                let parent = q >> 1;
                let a = self.sys.left(l, q);
                let ap = self.sys.left(l - 1, parent);
                let out = &mut cur[q * CHEB..(q + 1) * CHEB];
                let pv = &prev[parent * CHEB..(parent + 1) * CHEB];
                for (j, th) in thetas.iter_mut().enumerate() {
                    *th = a + sl * self.cheb.nodes[j];
                    if l >= 2 {
                        out[j] = self.cheb.eval(pv, (*th - ap) / sp);
                    }
                }
                let own = self.nb[l].get(q);
                for &cp in self.nb[l - 1].get(parent) {
                    for c in [2 * cp, 2 * cp + 1] {
                        if !own.contains(&c) {
                            self.node_field(l, c as usize, &thetas, out);
                        }
                    }
                }
            }
            prev = cur;
        }
        self.local = prev;
    }

    /// Raw dipole sum at the nodes of `rule` placed on leaf `k`.
    pub fn leaf_raw(&self, k: usize, rule: &LeafRule, out: &mut Vec<f64>) {
        let sn = self.sys.sigma(self.n);
        let ak = self.sys.left(self.n, k);
        let loc = &self.local[k * CHEB..(k + 1) * CHEB];
        out.clear();
        for i in 0..rule.len() {
            let row = &rule.rows[i * CHEB..(i + 1) * CHEB];
            out.push(row.iter().zip(loc).map(|(r, v)| r * v).sum());
        }
        for &j in self.nb[self.n].get(k) {
            let j = j as usize;
            if j == k {
                for (o, (&ul, &ur)) in out.iter_mut().zip(rule.ul.iter().zip(&rule.ur)) {
                    *o += pair_log(ul * sn, -ur * sn);
                }
            } else {
                let off = reduce(ak - self.sys.left(self.n, j));
                for (o, &ul) in out.iter_mut().zip(&rule.ul) {
                    let da = off + ul * sn;
                    *o += pair_log(da, da - sn);
                }
            }
        }
    }

    /// Raw dipole sum at an arbitrary angle, leaving out the leaves in
    /// `exclude`.
    pub fn raw_at(&self, theta: f64, exclude: &[usize]) -> f64 {
        let mut sum = 0.0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((l, q)) = stack.pop() {
            if l == self.n {
                if !exclude.contains(&q) {
                    sum += self.direct_node(l, q, theta);
                }
                continue;
            }
            if self.has_mp(l) {
                let per = 1usize << (self.n - l);
                let clear = exclude.iter().all(|&e| e / per != q);
                if clear {
                    if let Some(v) = self.mp_eval(l, q, theta) {
                        sum += v;
                        continue;
                    }
                }
            }
            stack.push((l + 1, 2 * q));
            stack.push((l + 1, 2 * q + 1));
        }
        sum
    }

    /// `g̃_N(θ)` away from endpoints.
    pub fn conjugate(&self, theta: f64) -> f64 {
        conjugate_scale(self.n) * self.raw_at(theta, &[])
    }
}

/// Quadrature nodes `(θ, weight, f_N(θ))` covering the circle.
#[derive(Debug, Clone)]
struct NodeSet {
    theta: Vec<f64>,
    weight: Vec<f64>,
    value: Vec<Complex64>,
}

impl NodeSet {
    fn new() -> Self {
        Self {
            theta: Vec::new(),
            weight: Vec::new(),
            value: Vec::new(),
        }
    }

    fn coeff(&self, m: i64) -> Complex64 {
        let mf = m as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((t, w), v) in self.theta.iter().zip(&self.weight).zip(&self.value) {
            acc += v * Complex64::from_polar(*w, -mf * t);
        }
        acc
    }
}

/// Options of the boundary quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub tol: f64,
    /// Gauss points per graded panel.
    pub order: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { tol: 1e-9, order: 8 }
    }
}

/// Gauss points on interior gap panels.
const GAP_ORDER: usize = 12;

/// Coefficients `f̂_N(m) = ∫ f_N e^{-imt} dt` by graded quadrature.
#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub stage: usize,
    pub delta: f64,
    pub opts: QuadOptions,
    coarse: NodeSet,
    fine: NodeSet,
    tail_bound: f64,
}

impl BoundaryQuadrature {
    /// Nodes resolving oscillation up to frequency `m_max`.
    pub fn new(sys: &RankedIntervalSystem, delta: f64, n: usize, m_max: u64, opts: QuadOptions) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(invalid("delta", "must be finite and nonnegative"));
        }
        if !(opts.tol > 0.0 && opts.tol < 1.0) || opts.order < 2 {
            return Err(invalid("quadrature", "need 0 < tol < 1 and order >= 2"));
        }
        let field = ConjugateField::new(sys, n)?;
        // One extra level keeps the innermost-panel bound at half the budget.
        let depth = depth_for(opts.tol) + 1;
        let lambda = (delta * n as f64 / TWO_PI).exp();
        let coarse = Self::nodes(sys, &field, delta, depth, opts.order, m_max);
        let fine = Self::nodes(sys, &field, delta, depth, opts.order + 4, m_max);
        let sn = sys.sigma(n);
        let count = sys.lefts(n).len() as f64;
        let leaf_tail = count * sn * lambda * 2.0 * 0.5f64.powi(depth as i32 + 1);
        let gap_tail = (TWO_PI - count * sn) * 0.5f64.powi(depth as i32);
        Ok(Self {
            stage: n,
            delta,
            opts,
            coarse,
            fine,
            tail_bound: leaf_tail + gap_tail,
        })
    }

    fn nodes(
        sys: &RankedIntervalSystem,
        field: &ConjugateField,
        delta: f64,
        depth: usize,
        q: usize,
        m_max: u64,
    ) -> NodeSet {
        let n = field.n;
        let sn = sys.sigma(n);
        let s = conjugate_scale(n);
        let lambda = (delta * n as f64 / TWO_PI).exp();
        let rule = LeafRule::graded(depth, q);
        let lefts = sys.lefts(n);
        let cnt = lefts.len();
        let mut set = NodeSet::new();
        let mut buf = Vec::new();
        for (k, &a) in lefts.iter().enumerate() {
            field.leaf_raw(k, &rule, &mut buf);
            for i in 0..rule.len() {
                set.theta.push(a + rule.ul[i] * sn);
                set.weight.push(rule.w[i] * sn);
                set.value.push(Complex64::from_polar(lambda, delta * s * buf[i]));
            }
        }
        let (gx, gw) = gauss_legendre01(GAP_ORDER);
        for k in 0..cnt {
            let b = lefts[k] + sn;
            let next = (k + 1) % cnt;
            let mut gap = lefts[next] - b;
            if next == 0 {
                gap += TWO_PI;
            }
            if gap <= 0.0 {
                continue;
            }
            let macros = ((gap * (m_max as f64 + 1.0) / PI).ceil() as usize).max(2);
            let h = 1.0 / macros as f64;
            // (distance from b, distance from the next left end), relative.
            let mut pts: Vec<(f64, f64, f64)> = Vec::new();
            let (gu, gwt) = graded_half(depth, q, 2.0 * h);
            for (u, w) in gu.iter().zip(&gwt) {
                pts.push((*u, 1.0 - u, *w));
                pts.push((1.0 - u, *u, *w));
            }
            for i in 1..macros - 1 {
                let lo = i as f64 * h;
                for (x, w) in gx.iter().zip(&gw) {
                    let v = lo + h * x;
                    pts.push((v, 1.0 - v, h * w));
                }
            }
            let excl = [k, next];
            for (vl, vr, w) in pts {
                let theta = b + vl * gap;
                let mut raw = field.raw_at(theta, &excl);
                raw += pair_log(sn + vl * gap, vl * gap);
                raw += pair_log(-vr * gap, -vr * gap - sn);
                set.theta.push(theta);
                set.weight.push(w * gap);
                set.value.push(Complex64::from_polar(1.0, delta * s * raw));
            }
        }
        set
    }

    /// `f̂_N(m)` with its certificate.
    pub fn coeff(&self, m: i64) -> Result<crate::report::CertifiedReport> {
        let a = self.coarse.coeff(m);
        let b = self.fine.coeff(m);
        let estimate = (a - b).norm() + self.tail_bound;
        let scale = TWO_PI * (self.delta * self.stage as f64 / TWO_PI).exp();
        let tol = self.opts.tol * scale;
        if estimate > tol {
            return Err(crate::error::Error::Quadrature { estimate, tol });
        }
        Ok(crate::report::CertifiedReport::new("fhat", m, b, estimate)
            .with("stage_n", self.stage as f64)
            .with("delta", self.delta)
            .with("quad_tol", self.opts.tol))
    }
}

/// `f̂_N(m)` by graded quadrature.
pub fn fhat(sys: &RankedIntervalSystem, delta: f64, n: usize, m: i64) -> Result<crate::report::CertifiedReport> {
    BoundaryQuadrature::new(sys, delta, n, m.unsigned_abs(), QuadOptions::default())?.coeff(m)
}

/// `X(m) = ∫_{K_N} f_N e^{-imt} dt`, streamed leaf by leaf.
#[derive(Debug, Clone)]
pub struct SupportIntegrals<'a> {
    field: ConjugateField<'a>,
    rule: LeafRule,
    delta: f64,
}

impl<'a> SupportIntegrals<'a> {
    pub fn new(sys: &'a RankedIntervalSystem, delta: f64, n: usize, opts: QuadOptions) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(invalid("delta", "must be finite and nonnegative"));
        }
        Ok(Self {
            field: ConjugateField::new(sys, n)?,
            rule: LeafRule::graded(depth_for(opts.tol), opts.order),
            delta,
        })
    }

    pub fn stage(&self) -> usize {
        self.field.n
    }

    /// `λ = sup|f_N| = exp(δN/2π)`.
    pub fn lambda(&self) -> f64 {
        (self.delta * self.field.n as f64 / TWO_PI).exp()
    }

    /// Bound on the content of the unresolved innermost panels.
    pub fn tail_bound(&self) -> f64 {
        let sys = self.field.sys;
        let n = self.field.n;
        sys.lefts(n).len() as f64 * sys.sigma(n) * self.lambda() * self.rule.tail
    }

    fn for_each_leaf(&self, mut visit: impl FnMut(usize, &[Complex64])) {
        let n = self.field.n;
        let sn = self.field.sys.sigma(n);
        let s = conjugate_scale(n);
        let lambda = self.lambda();
        let mut raw = Vec::new();
        let mut vals = vec![Complex64::new(0.0, 0.0); self.rule.len()];
        for k in 0..self.field.sys.lefts(n).len() {
            self.field.leaf_raw(k, &self.rule, &mut raw);
            for ((v, r), w) in vals.iter_mut().zip(&raw).zip(&self.rule.w) {
                *v = Complex64::from_polar(lambda * w * sn, self.delta * s * r);
            }
            visit(k, &vals);
        }
    }

    /// Single coefficient by direct summation.
    pub fn at(&self, m: i64) -> Complex64 {
        let n = self.field.n;
        let sys = self.field.sys;
        let sn = sys.sigma(n);
        let mf = m as f64;
        let phase: Vec<Complex64> = self
            .rule
            .ul
            .iter()
            .map(|u| Complex64::from_polar(1.0, -mf * u * sn))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        self.for_each_leaf(|k, vals| {
            let local: Complex64 = vals.iter().zip(&phase).map(|(v, p)| v * p).sum();
            total += local * Complex64::from_polar(1.0, -mf * sys.left(n, k));
        });
        total
    }

    /// All coefficients `-m_max..=m_max` via per-leaf Taylor moments and
    /// non-uniform FFTs; index `m + m_max`.
    pub fn window(&self, m_max: usize) -> Vec<Complex64> {
        let n = self.field.n;
        let sys = self.field.sys;
        let sn = sys.sigma(n);
        let x = 0.5 * m_max as f64 * sn;
        let mut order = 0usize;
        let mut term = 1.0;
        while term > 1e-17 {
            order += 1;
            term *= x / order as f64;
        }
        let basis: Vec<Vec<f64>> = (0..order)
            .map(|j| {
                let fact: f64 = (1..=j).map(|i| i as f64).product();
                self.rule
                    .ul
                    .iter()
                    .map(|u| ((u - 0.5) * sn).powi(j as i32) / fact)
                    .collect()
            })
            .collect();
        let count = sys.lefts(n).len();
        let mut moments = vec![vec![Complex64::new(0.0, 0.0); count]; order];
        self.for_each_leaf(|k, vals| {
            for (j, b) in basis.iter().enumerate() {
                moments[j][k] = vals.iter().zip(b).map(|(v, c)| v * c).sum();
            }
        });
        let centers: Vec<f64> = sys.lefts(n).iter().map(|a| a + 0.5 * sn).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * m_max + 1];
        for (j, mj) in moments.iter().enumerate() {
            let t = crate::nufft::type1(&centers, mj, m_max);
            for (i, (o, v)) in out.iter_mut().zip(t).enumerate() {
                let m = i as f64 - m_max as f64;
                *o += Complex64::new(0.0, -m).powu(j as u32) * v;
            }
        }
        out
    }
}
