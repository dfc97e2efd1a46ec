//! Acceptance suite. Each test prints one `PASS`/`FAIL` line to stderr,
//! bypassing output capture so the lines appear in every run's log, then
//! asserts.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use circle_singular::asym::{build_nu, choose_frequencies, translate_sum, AsymConfig, FrequencyStrategy};
use circle_singular::cantor::{build, gauge_cover_sum, Gauge, OffsetMode};
use circle_singular::circle::*;
use circle_singular::dims::*;
use circle_singular::fit::derive_seed;
use circle_singular::hardy::herglotz::series_cutoff;
use circle_singular::hardy::taylor::taylor_of;
use circle_singular::hardy::*;
use circle_singular::salem::{bridge, image_coeffs, image_cover, pushforward, BaseCantor};

fn verdict(id: u32, name: &str, pass: bool, started: Instant, detail: String) {
    let line = format!(
        "acceptance criterion {id:>2} {} [{name}] {detail} ({:.1}s)\n",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    // Written directly so the test harness does not capture it.
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{line}");
}

fn random_disk(rng: &mut ChaCha8Rng, r_max: f64) -> Complex64 {
    let r = r_max * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, TAU * rng.random::<f64>())
}

fn random_union(rng: &mut ChaCha8Rng) -> IntervalUnion {
    let count = rng.random_range(1..=8);
    let arcs = (0..count)
        .map(|_| {
            let len = 10f64.powf(rng.random_range(-4.0..-0.3));
            Interval::new(rng.random_range(0.0..TAU), len).unwrap()
        })
        .collect();
    IntervalUnion::from_unsorted(arcs)
}

#[test]
fn criterion_01_construction_exactness() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut nesting = true;
    for s in 0..8 {
        let sys = build(derive_seed(2024, s), 18, OffsetMode::Random).unwrap();
        nesting &= sys.verify().is_ok();
        for n in 1..=18 {
            let total = sys.lefts(n).len() as f64 * sys.sigma(n);
            worst = worst.max((total - TAU / n as f64).abs());
        }
    }
    let pass = nesting && worst <= 1e-12 && t.elapsed().as_secs() < 30;
    verdict(1, "construction", pass, t, format!("nesting={nesting} max|ΣK_n - 2π/n|={worst:.2e}"));
}

#[test]
fn criterion_02_gauge_finiteness() {
    let t = Instant::now();
    let mut max_all = 0.0f64;
    let mut band = (f64::INFINITY, 0.0f64);
    for s in 0..8 {
        let sys = build(derive_seed(2024, s), 20, OffsetMode::Random).unwrap();
        for n in 2..=20 {
            let g = gauge_cover_sum(&sys, n, Gauge::TLogOneOverT).unwrap();
            max_all = max_all.max(g);
            if n >= 15 {
                band = (band.0.min(g), band.1.max(g));
            }
        }
    }
    let pass = max_all <= 5.0 && band.0 >= 4.3 && band.1 <= 4.9 && t.elapsed().as_secs() < 10;
    verdict(
        2,
        "gauge",
        pass,
        t,
        format!("max={max_all:.4} n∈[15,20] range=[{:.4}, {:.4}]", band.0, band.1),
    );
}

#[test]
fn criterion_03_herglotz_oracle() {
    let t = Instant::now();
    let sys = build(derive_seed(2024, 3), 14, OffsetMode::Random).unwrap();
    let tol = 1e-10;
    let r_max = 1.0 - 1e-3;
    let m_prime = series_cutoff(r_max, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for n in 1..=14 {
        let cf = StageAnalytic::new(&sys, n, 0.3, Strategy::ClosedForm).unwrap();
        let ts = StageAnalytic::new(&sys, n, 0.3, Strategy::TruncatedSeries { m_prime, tail_tol: tol }).unwrap();
        for _ in 0..100 {
            let z = random_disk(&mut rng, r_max);
            worst = worst.max((cf.herglotz(z).unwrap() - ts.herglotz(z).unwrap()).norm());
        }
    }
    let pass = worst < 1e-8 && t.elapsed().as_secs() < 60;
    verdict(3, "herglotz", pass, t, format!("max|closed - series|={worst:.2e} over 1400 points"));
}

#[test]
fn criterion_04_contour_extraction() {
    let t = Instant::now();
    let mut mono = 0.0f64;
    for q in [0u32, 1, 2, 5, 11, 17] {
        for m in 1..=20usize {
            let r = 1.0 - 1.0 / m.max(2) as f64;
            let c = taylor_of(|z| z.powu(q), m, r, 256);
            let want = if m == q as usize { 1.0 } else { 0.0 };
            mono = mono.max((c - want).norm());
        }
    }
    // δ = 10 keeps δ^m/m! far above rounding for every m ≤ 20.
    let delta = 10.0f64;
    let mut rel = 0.0f64;
    let mut fact = 1.0;
    for m in 1..=20usize {
        fact *= m as f64;
        let r = 1.0 - 1.0 / m.max(2) as f64;
        let c = taylor_of(|z| (delta * z).exp(), m, r, 256);
        let want = delta.powi(m as i32) / fact;
        rel = rel.max((c - want).norm() / want);
    }
    let pass = mono < 1e-9 && rel < 1e-6 && t.elapsed().as_secs() < 10;
    verdict(4, "contour", pass, t, format!("monomial err={mono:.2e} exp rel err={rel:.2e}"));
}

#[test]
fn criterion_05_boundary_taylor_consistency() {
    let t = Instant::now();
    let sys = build(derive_seed(2024, 5), 10, OffsetMode::Random).unwrap();
    let delta = 0.05 * TAU;
    let q = BoundaryQuadrature::new(&sys, delta, 10, 200, QuadOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_ratio = 0.0f64;
    let mut ok = true;
    for _ in 0..20 {
        let m = rng.random_range(1..=200i64);
        let f = q.coeff(m).unwrap();
        let tq = taylor_coeff(&sys, delta, &TaylorRequest { stage: Some(10), ..TaylorRequest::new(m) }).unwrap();
        let diff = (f.value - TAU * tq.value).norm();
        let budget = f.error_bound + TAU * tq.error_bound;
        ok &= diff <= budget;
        worst_ratio = worst_ratio.max(diff / budget);
    }
    let pass = ok && t.elapsed().as_secs() < 300;
    verdict(5, "boundary-taylor", pass, t, format!("max diff/budget={worst_ratio:.3} over 20 m ≤ 200"));
}

#[test]
fn criterion_06_one_sided_structure() {
    let t = Instant::now();
    let sys = build(derive_seed(2024, 6), 19, OffsetMode::Random).unwrap();
    let delta = 0.05 * TAU;
    let m_max = 1usize << 13;
    let mut cfg = ShatConfig::new(delta, 16, m_max);
    cfg.stability = false;
    let w = shat_window(&sys, &cfg).unwrap();
    let sq = |m: i64| w.coeffs.get(m).unwrap().norm_sqr();
    let budget = |m: i64| w.budget[(m + m_max as i64) as usize];
    let partial = |side: i64, hi: i64| -> (f64, f64) {
        (1..hi).fold((0.0, 0.0), |(s, b), m| {
            let v = w.coeffs.get(side * m).unwrap().norm();
            (s + sq(side * m), b + budget(side * m) * (2.0 * v + budget(side * m)))
        })
    };
    let dyadic = [1i64 << 11, 1 << 12, 1 << 13];
    let neg: Vec<(f64, f64)> = dyadic.iter().map(|&m| partial(-1, m)).collect();
    let pos: Vec<(f64, f64)> = dyadic.iter().map(|&m| partial(1, m + 1)).collect();
    let neg_total = neg[2].0;
    let neg_bounded = neg_total <= w.l2_bound + neg[2].1;
    let neg_cauchy = neg[2].0 - neg[1].0 < 0.1 * neg_total;
    let pos_grows = pos.windows(2).all(|p| p[1].0 - p[0].0 > p[1].1);

    let (a, g) = largest_gap(&sys, 3).unwrap();
    let psi = SmoothBump::new(a + 0.5 * g, 0.4 * g, 6).unwrap();
    let pr = support_pairing(&w, &sys, &psi, m_max as i64, f64::INFINITY).unwrap();
    let pair_max = pr.dyadic.iter().map(|d| d.1).fold(0.0, f64::max);
    let pairing = pair_max <= pr.budget;
    let pass = neg_bounded && neg_cauchy && pos_grows && pairing && t.elapsed().as_secs() < 1800;
    verdict(
        6,
        "one-sided",
        pass,
        t,
        format!(
            "neg Σ={neg_total:.4e} (bound {:.3e}) last increment={:.2e} pos Σ at 2^11..2^13={:.3e},{:.3e},{:.3e} |P_M|max={pair_max:.2e} ≤ {:.2e}",
            w.l2_bound,
            neg[2].0 - neg[1].0,
            pos[0].0,
            pos[1].0,
            pos[2].0,
            pr.budget
        ),
    );
}

#[test]
fn criterion_07_moment_decay() {
    let t = Instant::now();
    let m_list: Vec<i64> = (6..=12).map(|j| 1i64 << j).collect();
    let cfg = MomentConfig::new(0.05 * TAU, m_list, 2024, 32);
    let p = moment_probe(&cfg).unwrap();
    let band = p.fit.band95();
    let pass = p.fit.slope < -0.5 && band.1 < 0.0 && t.elapsed().as_secs() < 3600;
    verdict(
        7,
        "moments",
        pass,
        t,
        format!("slope={:.3} band95=({:.3}, {:.3}) 32 seeds", p.fit.slope, band.0, band.1),
    );
}

#[test]
fn criterion_08_large_delta_growth() {
    let t = Instant::now();
    let sys = build(derive_seed(2024, 8), 19, OffsetMode::Random).unwrap();
    let m_list: Vec<i64> = (1..=12).map(|j| 1i64 << j).collect();
    let g = growth_fit(&sys, 2.0 * TAU, 2.0, &m_list).unwrap();
    let slope = g.fit.map(|f| f.slope);
    let pass = matches!(slope, Some(s) if s.is_finite() && s > 0.0) && g.stage_bound_ok && t.elapsed().as_secs() < 600;
    verdict(8, "growth", pass, t, format!("slope={slope:?} stage bound={}", g.stage_bound_ok));
}

#[test]
fn criterion_09_salem_sampler() {
    let t = Instant::now();
    let cantor = BaseCantor::new(0.5, 14).unwrap();
    let eps = dyadic_eps(PI / 4.0, 7);
    let (mut env, mut mink, mut fdim) = (Vec::new(), Vec::new(), Vec::new());
    for b in 0..8u64 {
        let path = bridge(derive_seed(2024, b), 20).unwrap();
        let sample = pushforward(&path, &cantor, 1_000_000, derive_seed(2024, 1000 + b));
        env.push(image_coeffs(&sample, 1, 1024).unwrap().fit.slope);
        let wide = image_coeffs(&sample, 1, 1 << 14).unwrap();
        fdim.push(fourier_dim_fit(&wide.coeffs).unwrap().estimate);
        mink.push(image_cover(&path, &cantor, &eps).unwrap().verdict.estimate);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (e, m, f) = (mean(&env), mean(&mink), mean(&fdim));
    let pass = (e + 0.25).abs() <= 0.15 && (m - 0.5).abs() <= 0.15 && f <= m + 0.2 && t.elapsed().as_secs() < 1800;
    verdict(
        9,
        "salem",
        pass,
        t,
        format!("envelope slope={e:.3} minkowski={m:.3} fourier dim={f:.3} (8 bridges)"),
    );
}

#[test]
fn criterion_10_frostman_sanity() {
    let t = Instant::now();
    let mut failed: Vec<&str> = Vec::new();
    let mut check = |name: &'static str, ok: bool| {
        if !ok {
            failed.push(name);
        }
    };
    let z = Complex64::new(0.0, 0.0);
    let leb = fourier_coeffs(&CircleMeasure::lebesgue(), -64, 64).unwrap();
    check("lebesgue coeffs", leb.iter().all(|(m, v)| if m == 0 { (v.re - 1.0).abs() < 1e-15 } else { v.norm() < 1e-15 }));
    let atom = fourier_coeffs(&CircleMeasure::unit_atom(0.0), -64, 64).unwrap();
    check("atom coeffs", atom.iter().all(|(_, v)| (v - 1.0).norm() < 1e-15));
    let half = CircleMeasure::piecewise(IntervalUnion::new(vec![Interval::new(0.0, PI).unwrap()]).unwrap(), vec![1.0 / PI]).unwrap();
    let h1 = half.coeff(1);
    let (x, wq) = circle_singular::quad::gauss_legendre01(64);
    let quad: Complex64 = x.iter().zip(&wq).map(|(x, w)| Complex64::from_polar(*w, -PI * x)).sum();
    check("half circle", (h1.norm() - 2.0 / PI).abs() < 1e-12 && (h1 - quad).norm() < 1e-9);
    check("lp window", (lp_norm(&atom, 2.0, Side::Window(1, 4)).unwrap() - 2.0).abs() < 1e-14);
    let geo = CoeffWindow::from_real_fn(20, |n| 0.5f64.powi(n.abs() as i32)).unwrap();
    check("lp geometric", (lp_norm(&geo, 2.0, Side::Full).unwrap() - (5.0f64 / 3.0).sqrt()).abs() < 1e-6);
    check("lp negatives", lp_norm(&leb, 2.0, Side::Negatives).unwrap() < 1e-15);
    let n = 64;
    let e = weighted_energy(&atom, 0.5, EnergySide::TwoSided).unwrap();
    let oracle = 1.0 + 2.0 * (1..=n).map(|k| 1.0 / ((k as f64).sqrt() + 1.0)).sum::<f64>();
    check("atom energy", (e.last() - oracle).abs() < 1e-9 && e.sums[0] == 1.0);
    check("lebesgue anti-analytic", weighted_energy(&leb, 0.3, EnergySide::AntiAnalytic).unwrap().last() < 1e-15);
    check("wiener atom", (wiener_average(&atom, 5).unwrap() - 1.0).abs() < 1e-15);
    check("wiener lebesgue", (wiener_average(&leb, 10).unwrap() - 1.0 / 21.0).abs() < 1e-15);
    let two = CircleMeasure::atomic(vec![(0.0, Complex64::new(0.5, 0.0)), (PI, Complex64::new(0.5, 0.0))]).unwrap();
    let two = fourier_coeffs(&two, -1000, 1000).unwrap();
    check("wiener two atoms", (wiener_average(&two, 1000).unwrap() - 0.5).abs() < 0.005);
    let psi = SmoothBump::new(PI, 0.5, 6).unwrap();
    let atom_wide = fourier_coeffs(&CircleMeasure::unit_atom(0.0), -256, 256).unwrap();
    check("pair atom outside", pair(&atom_wide, &psi, 256).unwrap().last().unwrap().norm() < 1e-10);
    check("pair zero", pair(&CoeffWindow::zeros(-16, 16).unwrap(), &psi, 16).unwrap().iter().all(|c| *c == z));
    let at_center = fourier_coeffs(&CircleMeasure::unit_atom(PI), -256, 256).unwrap();
    check("pair atom center", (pair(&at_center, &psi, 256).unwrap().last().unwrap() - psi.value(PI)).norm() < 1e-10);

    let unit = IntervalUnion::new(vec![Interval::new(0.0, 1.0).unwrap()]).unwrap();
    check("cover [0,1]", cover_count(CoverSet::Union(&unit), 0.25).unwrap() == 4);
    let sys = build(7, 10, OffsetMode::Random).unwrap();
    let k = sys.rank_union(10).unwrap();
    check("cover K_n", cover_count(CoverSet::Union(&k), sys.sigma(10)).unwrap() == 1 << 10);
    check("cover points", cover_count(CoverSet::Cloud(&[0.0, 1.0]), 0.5).unwrap() == 2);
    check("cover empty", cover_count(CoverSet::Cloud(&[]), 0.5).is_err());
    let eps = dyadic_eps(1.0, 10);
    let full = minkowski_fit(&CoverTable::new(CoverSet::Union(&IntervalUnion::full_circle()), &eps, "circle").unwrap()).unwrap();
    check("minkowski circle", (full.estimate - 1.0).abs() <= 0.02);
    let seg = IntervalUnion::new(vec![Interval::new(0.5, 0.3).unwrap()]).unwrap();
    let seg = minkowski_fit(&CoverTable::new(CoverSet::Union(&seg), &dyadic_eps(0.01, 8), "segment").unwrap()).unwrap();
    check("minkowski segment", (seg.estimate - 1.0).abs() < 0.02);
    // Level 10 is the deepest whose intervals stay resolvable at this ratio.
    let cantor = BaseCantor::new(0.5, 14).unwrap().union(10).unwrap();
    let ce = dyadic_eps(1.0, 36);
    let cm = minkowski_fit(&CoverTable::new(CoverSet::Union(&cantor), &ce, "cantor").unwrap()).unwrap();
    check("minkowski cantor", (cm.estimate - 0.25).abs() <= 0.05);
    let wide_atom = CoeffWindow::from_real_fn(1024, |_| 1.0).unwrap();
    check("fourier atom", fourier_dim_fit(&wide_atom).unwrap().estimate.abs() < 1e-12);
    let s = CoeffWindow::from_real_fn(1 << 14, |n| (1.0 + n.abs() as f64).powf(-0.5)).unwrap();
    check("fourier synthetic", (fourier_dim_fit(&s).unwrap().estimate - 1.0).abs() <= 0.05);
    let wide_leb = CoeffWindow::from_real_fn(1024, |n| if n == 0 { 1.0 } else { 0.0 }).unwrap();
    let fl = fourier_dim_fit(&wide_leb).unwrap();
    check("fourier lebesgue", fl.estimate == 1.0 && fl.note.is_some());
    let grid = [2.5, 3.0, 4.0, 8.0];
    check("lp synthetic", (lpdim_scan(&s, &grid).unwrap().estimate - 0.8).abs() < 1e-12);
    check("lp atom", lpdim_scan(&wide_atom, &grid).unwrap().estimate == 0.0);
    check("lp lebesgue", lpdim_scan(&wide_leb, &grid).unwrap().estimate == 0.8);
    let alphas = [0.25, 0.5, 0.75];
    check("frostman lebesgue", frostman_report(&wide_leb, &alphas).unwrap().headline == Some(0.75));
    check("frostman synthetic", frostman_report(&s, &alphas).unwrap().headline == Some(0.75));
    check("frostman atom", frostman_report(&wide_atom, &alphas).unwrap().headline.is_none());
    let a = IntervalUnion::new(vec![Interval::new(0.0, 0.1).unwrap()]).unwrap();
    let ss = sumset_cover(&a, &a, 0.05).unwrap();
    check("sumset interval", ss.cov_ab == 2 && ss.cov_a == 2 && ss.pass);
    let point = IntervalUnion::new(vec![Interval::new(1.0, 1e-13).unwrap()]).unwrap();
    let sp = sumset_cover(&k, &point, 0.01).unwrap();
    check("sumset point", sp.pass && sp.cov_ab == cover_count(CoverSet::Union(&k), 0.02).unwrap());
    let pass = failed.is_empty() && t.elapsed().as_secs() < 60;
    verdict(10, "examples", pass, t, format!("failed={failed:?}"));
}

#[test]
fn criterion_11_asymmetric_pipeline() {
    let t = Instant::now();
    let p = 3.0;
    let w = CoeffWindow::from_real_fn(1 << 18, |n| 1.0 / (1.0 + n.abs() as f64)).unwrap();
    let (nu, reports) = build_nu(&w, &AsymConfig::new(p, 2)).unwrap();
    let mut ok = reports.len() == 2 && nu.ledger.len() == 2;
    for s in &nu.steps {
        let b = 0.5f64.powi(s.k as i32);
        ok &= s.certificates.neg_tail < b && s.certificates.g_norm2 == b;
    }
    for (i, a) in nu.steps.iter().enumerate() {
        for b in &nu.steps[i + 1..] {
            ok &= a.interval.1 < b.interval.0 || b.interval.1 < a.interval.0;
        }
    }
    let mut ledger = Vec::new();
    nu.write_ledger_csv(&mut ledger).unwrap();
    ok &= String::from_utf8(ledger).unwrap().lines().count() == 3;

    let norm = lp_norm(&w, p, Side::Full).unwrap();
    let unit = w.scale(Complex64::new(1.0 / norm, 0.0));
    let c = choose_frequencies(&unit, p, 0, 1, FrequencyStrategy::Sparse, 1 << 20).unwrap();
    let shifted = translate_sum(&unit, &c.q, 1, unit.lo() + c.q[0], unit.hi() + c.q[0]);
    let moved = shifted.iter().map(|v| v.norm().powf(p)).sum::<f64>().powf(1.0 / p);
    ok &= c.q.len() == 1 && (moved - 1.0).abs() < 1e-12;
    let pass = ok && t.elapsed().as_secs() < 120;
    verdict(
        11,
        "asymmetric",
        pass,
        t,
        format!(
            "neg tails={:?} ledger Σc^p={:.4} Σneg^p={:.2e} k=0 translate norm={moved:.12}",
            nu.steps.iter().map(|s| s.certificates.neg_tail).collect::<Vec<_>>(),
            nu.ledger[1].positive_sum,
            nu.ledger[1].negative_sum
        ),
    );
}

#[test]
fn criterion_12_sumset_inequality() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    for _ in 0..1000 {
        let a = random_union(&mut rng);
        let b = random_union(&mut rng);
        let eps = 10f64.powf(rng.random_range(-3.0..0.0));
        violations += usize::from(!sumset_cover(&a, &b, eps).unwrap().pass);
    }
    let pass = violations == 0 && t.elapsed().as_secs() < 60;
    verdict(12, "sumset", pass, t, format!("violations={violations} of 1000"));
}
