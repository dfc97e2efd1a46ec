//! Batch orchestration behind the `circsing` binary.
//!
//! A run is described by one flat [`RunConfig`]. Loading fills every default,
//! so the stored config is complete and its hash identifies the numbers the
//! run produces. [`run`] executes one pipeline, writes its tables under a
//! directory named after that hash and returns a [`RunManifest`].

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::asym::{build_nu, AsymConfig, DilationSearch, FrequencyStrategy};
use crate::cantor::{build, gauge_cover_sum, Gauge, OffsetMode};
use crate::circle::{CoeffWindow, Interval, IntervalUnion, SmoothBump, Verdict, TWO_PI};
use crate::dims::{
    dyadic_eps, fourier_dim_fit, frostman_report, lpdim_scan, minkowski_fit, sumset_cover, CoverSet, CoverTable,
};
use crate::error::Error;
use crate::fit::derive_seed;
use crate::hardy::{largest_gap, moment_probe, shat_window, stage_for, support_pairing, taylor_coeff};
use crate::hardy::{MomentConfig, ShatConfig, TaylorRequest};
use crate::report::{fmt17, CertifiedReport};
use crate::salem::{bridge, frostman_reduction, image_coeffs, image_cover, pushforward, BaseCantor};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for a run whose checks all pass.
pub const EXIT_PASS: i32 = 0;
/// Exit status for an execution error.
pub const EXIT_ERROR: i32 = 1;
/// Exit status when a numeric check fails.
pub const EXIT_CHECK_FAILED: i32 = 2;

/// A module error with the call that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{module}::{operation} failed ({params}): {source}")]
pub struct RunError {
    pub module: &'static str,
    pub operation: &'static str,
    pub params: String,
    #[source]
    pub source: Error,
}

fn at(module: &'static str, operation: &'static str, params: impl Into<String>) -> impl FnOnce(Error) -> RunError {
    let params = params.into();
    move |source| RunError {
        module,
        operation,
        params,
        source,
    }
}

fn io_err(operation: &'static str, path: &Path) -> impl FnOnce(Error) -> RunError {
    at("cli", operation, path.display().to_string())
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstructParams {
    pub n_max: usize,
    pub mode: OffsetMode,
    /// Writes rank endpoints for this rank when set.
    pub dump_rank: Option<usize>,
    pub tol: f64,
    pub gauge_max: f64,
}

impl Default for ConstructParams {
    fn default() -> Self {
        Self {
            n_max: 10,
            mode: OffsetMode::Random,
            dump_rank: None,
            tol: 1e-12,
            gauge_max: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaylorParams {
    pub delta: f64,
    pub c_log: f64,
    pub m_list: Vec<i64>,
    pub mode: OffsetMode,
    pub tail_tol: f64,
    pub alias_tol: f64,
    /// Absolute bound for "zero" when `delta = 0`.
    pub zero_tol: f64,
}

impl Default for TaylorParams {
    fn default() -> Self {
        Self {
            delta: 0.05 * TWO_PI,
            c_log: 2.0,
            m_list: (0..7).map(|k| 1i64 << k).collect(),
            mode: OffsetMode::Random,
            tail_tol: 1e-14,
            alias_tol: 1e-12,
            zero_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShatParams {
    pub delta: f64,
    pub c_log: f64,
    pub n_f: usize,
    pub m_max: usize,
    pub mode: OffsetMode,
    pub quad_tol: f64,
    pub stability: bool,
    /// Rank whose largest gap hosts the test bump.
    pub gap_rank: usize,
    pub bump_order: u32,
}

impl Default for ShatParams {
    fn default() -> Self {
        Self {
            delta: 0.05 * TWO_PI,
            c_log: 2.0,
            n_f: 6,
            m_max: 256,
            mode: OffsetMode::Random,
            quad_tol: crate::hardy::QuadOptions::default().tol,
            stability: false,
            gap_rank: 3,
            bump_order: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MomentParams {
    pub delta: f64,
    pub c_log: f64,
    pub m_list: Vec<i64>,
    pub seeds: usize,
    pub quad_tol: f64,
    pub slope_max: f64,
}

impl Default for MomentParams {
    fn default() -> Self {
        Self {
            delta: 0.05 * TWO_PI,
            c_log: 2.0,
            m_list: (2..7).map(|k| 1i64 << k).collect(),
            seeds: 16,
            quad_tol: crate::hardy::QuadOptions::default().tol,
            slope_max: -0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SalemParams {
    pub delta: f64,
    pub depth: u32,
    pub level: u32,
    pub samples: usize,
    pub bridges: usize,
    /// Envelope fit over `[1, envelope_hi]`.
    pub envelope_hi: i64,
    /// Window `[-fourier_reach, fourier_reach]` for the Fourier dimension.
    pub fourier_reach: i64,
    pub eps_top: f64,
    pub eps_count: usize,
    pub envelope_target: f64,
    pub minkowski_target: f64,
    pub target_tol: f64,
    pub dimension_gap: f64,
}

impl Default for SalemParams {
    fn default() -> Self {
        Self {
            delta: 0.5,
            depth: 14,
            level: 20,
            samples: 1_000_000,
            bridges: 8,
            envelope_hi: 1024,
            fourier_reach: 1 << 14,
            eps_top: std::f64::consts::FRAC_PI_4,
            eps_count: 7,
            envelope_target: -0.25,
            minkowski_target: 0.5,
            target_tol: 0.15,
            dimension_gap: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DimsParams {
    /// Rank of `K_n` and level of the base Cantor set.
    pub n: usize,
    pub mode: OffsetMode,
    pub cantor_delta: f64,
    pub eps_top: f64,
    pub eps_count: usize,
    /// Coefficient model `(1+|n|)^{-exponent}`.
    pub exponent: f64,
    pub reach: i64,
    pub q_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub random_pairs: usize,
    pub fourier_tol: f64,
}

impl Default for DimsParams {
    fn default() -> Self {
        Self {
            n: 8,
            mode: OffsetMode::Random,
            cantor_delta: 0.5,
            eps_top: std::f64::consts::FRAC_PI_4,
            eps_count: 8,
            exponent: 0.25,
            reach: 1 << 14,
            q_grid: vec![3.0, 4.0, 6.0, 8.0, 12.0],
            alpha_grid: vec![0.25, 0.5, 0.75],
            random_pairs: 100,
            fourier_tol: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AsymParams {
    pub p: f64,
    pub k_max: usize,
    /// Base model `(1+|n|)^{-exponent}` on `[-reach, reach]`.
    pub exponent: f64,
    pub reach: i64,
    pub strategy: FrequencyStrategy,
    pub delta_tol: f64,
    pub max_freq: i64,
    pub slack: f64,
}

impl Default for AsymParams {
    fn default() -> Self {
        let c = AsymConfig::new(3.0, 1);
        Self {
            p: c.p,
            k_max: c.k_max,
            exponent: 1.0,
            reach: 1 << 16,
            strategy: c.strategy,
            delta_tol: c.delta_tol,
            max_freq: c.max_freq,
            slack: c.slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReduceParams {
    pub alpha: f64,
    /// Distribution model `min(1, |n|^{-s_exponent})`.
    pub s_exponent: f64,
    /// Measure model `(1+|n|)^{-mu_exponent}`.
    pub mu_exponent: f64,
    pub reach: i64,
}

impl Default for ReduceParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            s_exponent: 0.25,
            mu_exponent: 2.0,
            reach: 1 << 12,
        }
    }
}

/// Pipeline selection with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Params {
    Construct(ConstructParams),
    Taylor(TaylorParams),
    Shat(ShatParams),
    Moments(MomentParams),
    Salem(SalemParams),
    Dims(DimsParams),
    Asym(AsymParams),
    Reduce(ReduceParams),
}

impl Params {
    pub fn name(&self) -> &'static str {
        match self {
            Params::Construct(_) => "construct",
            Params::Taylor(_) => "taylor",
            Params::Shat(_) => "shat",
            Params::Moments(_) => "moments",
            Params::Salem(_) => "salem",
            Params::Dims(_) => "dims",
            Params::Asym(_) => "asym",
            Params::Reduce(_) => "reduce",
        }
    }
}

/// One run. The output directory does not enter the hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(flatten)]
    pub params: Params,
}

impl RunConfig {
    pub fn new(master_seed: u64, params: Params) -> Self {
        Self {
            master_seed,
            out: None,
            params,
        }
    }

    /// Parses a config document and materializes every default.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }

    /// Hex SHA-256 of the config without its output directory.
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.out = None;
        let bytes = serde_json::to_vec(&keyed).expect("config serializes");
        hex(&Sha256::digest(&bytes))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// Manifest

/// A declared acceptance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            pass: value <= threshold,
            value,
            threshold,
        }
    }

    fn flag(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            pass,
            value: if pass { 1.0 } else { 0.0 },
            threshold: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub config: Option<RunConfig>,
    /// Seconds. Not part of the manifest hash.
    pub wall_clock: f64,
    pub rng_streams: Vec<String>,
    pub reports: Vec<CertifiedReport>,
    pub checks: Vec<Check>,
    /// Pipeline-specific results.
    pub summary: Value,
    /// File names relative to the run directory.
    pub artifacts: Vec<String>,
    /// Set when the pipeline stopped before finishing.
    pub incomplete: bool,
    pub error: Option<String>,
}

impl RunManifest {
    /// A manifest with no config, reports or checks.
    pub fn empty() -> Self {
        Self {
            config_hash: String::new(),
            tool_version: TOOL_VERSION.to_string(),
            config: None,
            wall_clock: 0.0,
            rng_streams: Vec::new(),
            reports: Vec::new(),
            checks: Vec::new(),
            summary: Value::Null,
            artifacts: Vec::new(),
            incomplete: false,
            error: None,
        }
    }

    pub fn pass(&self) -> bool {
        !self.incomplete && self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }

    /// Hex SHA-256 of everything except the wall clock.
    pub fn hash(&self) -> String {
        let mut m = self.clone();
        m.wall_clock = 0.0;
        let bytes = serde_json::to_vec(&m).expect("manifest serializes");
        hex(&Sha256::digest(&bytes))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    CsvBundle,
}

/// Columns of the per-quantity table in a CSV bundle. Quantities not listed
/// get every diagnostic in name order.
fn diag_columns(quantity: &str, reports: &[&CertifiedReport]) -> (Vec<String>, bool) {
    match quantity {
        "taylor" => (vec!["stage_n".into(), "alias_bound".into(), "residual".into()], false),
        _ => {
            let mut keys: Vec<String> = reports.iter().flat_map(|r| r.diagnostics.keys().cloned()).collect();
            keys.sort();
            keys.dedup();
            (keys, true)
        }
    }
}

/// Writes the manifest as `manifest.json`, or as a bundle of long-format
/// tables: `manifest.csv`, `checks.csv` and one `<quantity>.csv` per
/// reported quantity. Returns the files written.
pub fn emit_report(manifest: &RunManifest, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>, Error> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Json => {
            let path = dir.join("manifest.json");
            let f = BufWriter::new(File::create(&path)?);
            serde_json::to_writer_pretty(f, manifest)?;
            written.push(path);
        }
        ReportFormat::CsvBundle => {
            let path = dir.join("manifest.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["key", "value"])?;
            w.write_record(["config_hash", &manifest.config_hash])?;
            w.write_record(["tool_version", &manifest.tool_version])?;
            w.write_record(["manifest_hash", &manifest.hash()])?;
            w.write_record(["pass", &manifest.pass().to_string()])?;
            w.write_record(["incomplete", &manifest.incomplete.to_string()])?;
            for s in &manifest.rng_streams {
                w.write_record(["rng_stream", s])?;
            }
            w.flush()?;
            written.push(path);

            let path = dir.join("checks.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["name", "pass", "value", "threshold"])?;
            for c in &manifest.checks {
                w.write_record([c.name.clone(), c.pass.to_string(), fmt17(c.value), fmt17(c.threshold)])?;
            }
            w.flush()?;
            written.push(path);

            let mut quantities: Vec<&str> = manifest.reports.iter().map(|r| r.quantity.as_str()).collect();
            quantities.sort_unstable();
            quantities.dedup();
            for q in quantities {
                let rows: Vec<&CertifiedReport> = manifest.reports.iter().filter(|r| r.quantity == q).collect();
                let (cols, with_bound) = diag_columns(q, &rows);
                let path = dir.join(format!("{q}.csv"));
                let mut w = csv::Writer::from_path(&path)?;
                let mut header = vec!["m".to_string(), "re".into(), "im".into()];
                if with_bound {
                    header.push("error_bound".into());
                }
                header.extend(cols.iter().cloned());
                w.write_record(&header)?;
                for r in rows {
                    let mut rec = vec![r.index.to_string(), fmt17(r.value.re), fmt17(r.value.im)];
                    if with_bound {
                        rec.push(fmt17(r.error_bound));
                    }
                    rec.extend(cols.iter().map(|k| r.diag(k).map(fmt17).unwrap_or_default()));
                    w.write_record(&rec)?;
                }
                w.flush()?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// Pipelines

/// Collects what a pipeline produces.
struct Outcome {
    dir: PathBuf,
    rng_streams: Vec<String>,
    reports: Vec<CertifiedReport>,
    checks: Vec<Check>,
    summary: Map<String, Value>,
    artifacts: Vec<String>,
}

impl Outcome {
    fn new(dir: PathBuf) -> Self {
        Self {
            dir,
            rng_streams: Vec::new(),
            reports: Vec::new(),
            checks: Vec::new(),
            summary: Map::new(),
            artifacts: Vec::new(),
        }
    }

    fn note(&mut self, key: &str, v: impl Serialize) {
        self.summary
            .insert(key.to_string(), serde_json::to_value(v).expect("summary value serializes"));
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, RunError> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(Error::from).map_err(io_err("create", &path))?;
        self.artifacts.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Result<(), RunError> {
        let w = self.create(name)?;
        let path = self.dir.join(name);
        serde_json::to_writer(w, v).map_err(Error::from).map_err(io_err("write", &path))
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_writer(self.create(name)?);
        let res = (|| -> Result<(), Error> {
            w.write_record(header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()?;
            Ok(())
        })();
        res.map_err(io_err("write", &path))
    }
}

fn construct(cfg: &RunConfig, p: &ConstructParams, o: &mut Outcome) -> Result<(), RunError> {
    let seed = cfg.master_seed;
    o.rng_streams.push(format!("cantor.offsets seed={seed} ranks=1..={}", p.n_max));
    let params = format!("seed={seed} n_max={} mode={:?}", p.n_max, p.mode);
    o.note("memory_estimate_bytes", crate::cantor::memory_estimate(p.n_max));
    let sys = build(seed, p.n_max, p.mode).map_err(at("cantor", "build", params.clone()))?;
    let verified = sys.verify();
    o.checks.push(Check::flag("nesting", verified.is_ok()));
    if let Err(e) = verified {
        o.note("nesting_error", e.to_string());
    }
    let mut worst = 0.0f64;
    let mut gauge_worst = 0.0f64;
    let mut rows = Vec::new();
    for n in 1..=p.n_max {
        let len = sys.lefts(n).len() as f64 * sys.sigma(n);
        let err = (len - TWO_PI / n as f64).abs();
        worst = worst.max(err);
        o.reports
            .push(CertifiedReport::new("support_length", n as i64, Complex64::new(len, 0.0), err).with("sigma", sys.sigma(n)));
        // t·log(1/t) needs t < 1, which holds from rank 2 on.
        let g = if n >= 2 {
            let g = gauge_cover_sum(&sys, n, Gauge::TLogOneOverT).map_err(at("cantor", "gauge_cover_sum", format!("n={n}")))?;
            gauge_worst = gauge_worst.max(g);
            o.reports.push(CertifiedReport::new("gauge_sum", n as i64, Complex64::new(g, 0.0), 0.0));
            fmt17(g)
        } else {
            String::new()
        };
        rows.push(vec![n.to_string(), fmt17(sys.sigma(n)), fmt17(len), g]);
    }
    o.checks.push(Check::le("support_length", worst, p.tol));
    if p.n_max >= 2 {
        o.checks.push(Check::le("gauge_sum", gauge_worst, p.gauge_max));
    }
    o.csv("construct_ranks.csv", &["n", "sigma", "support_length", "gauge_sum"], rows)?;
    o.json("construct_system.json", &sys.descriptor())?;
    if let Some(r) = p.dump_rank {
        let name = format!("construct_rank_{r}.csv");
        let w = o.create(&name)?;
        sys.write_rank_csv(r, w).map_err(at("cantor", "write_rank_csv", format!("n={r}")))?;
    }
    Ok(())
}

fn taylor(cfg: &RunConfig, p: &TaylorParams, o: &mut Outcome) -> Result<(), RunError> {
    if p.m_list.is_empty() || p.m_list.iter().any(|&m| m < 1) {
        return Err(at("cli", "taylor", "m_list")(crate::error::invalid("m_list", "need positive frequencies")));
    }
    let seed = cfg.master_seed;
    let n_max = p.m_list.iter().map(|&m| stage_for(m, p.c_log)).max().unwrap_or(1);
    o.rng_streams.push(format!("cantor.offsets seed={seed} ranks=1..={n_max}"));
    let sys = build(seed, n_max, p.mode).map_err(at("cantor", "build", format!("seed={seed} n_max={n_max}")))?;
    let mut rows = Vec::new();
    let mut stage_ok = true;
    let mut finite = true;
    let mut zero_worst = 0.0f64;
    for &m in &p.m_list {
        let req = TaylorRequest {
            c_log: p.c_log,
            tail_tol: p.tail_tol,
            alias_tol: p.alias_tol,
            ..TaylorRequest::new(m)
        };
        let r = taylor_coeff(&sys, p.delta, &req).map_err(at("hardy", "taylor_coeff", format!("m={m} delta={}", p.delta)))?;
        let n = stage_for(m, p.c_log);
        let sup = (p.delta * n as f64 / TWO_PI).exp();
        stage_ok &= r.value.norm() <= sup + r.error_bound;
        finite &= r.error_bound.is_finite() && r.value.re.is_finite() && r.value.im.is_finite();
        zero_worst = zero_worst.max(r.value.norm());
        rows.push(vec![
            m.to_string(),
            fmt17(r.value.re),
            fmt17(r.value.im),
            n.to_string(),
            fmt17(r.diag("alias_bound").unwrap_or(0.0)),
            fmt17(r.diag("residual").unwrap_or(0.0)),
        ]);
        o.reports.push(r);
    }
    o.checks.push(Check::flag("finite_budgets", finite));
    o.checks.push(Check::flag("stage_sup_bound", stage_ok));
    if p.delta == 0.0 {
        o.checks.push(Check::le("zero_delta_vanishes", zero_worst, p.zero_tol));
    }
    o.csv("taylor.csv", &["m", "re", "im", "stage_n", "alias_bound", "residual"], rows)
}

fn shat(cfg: &RunConfig, p: &ShatParams, o: &mut Outcome) -> Result<(), RunError> {
    let seed = cfg.master_seed;
    let mut sc = ShatConfig::new(p.delta, p.n_f, p.m_max);
    sc.c_log = p.c_log;
    sc.quad_tol = p.quad_tol;
    sc.stability = p.stability;
    let n_max = stage_for(p.m_max as i64, p.c_log).max(p.n_f + 1);
    o.rng_streams.push(format!("cantor.offsets seed={seed} ranks=1..={n_max}"));
    let sys = build(seed, n_max, p.mode).map_err(at("cantor", "build", format!("seed={seed} n_max={n_max}")))?;
    let w = shat_window(&sys, &sc).map_err(at("hardy", "shat_window", format!("n_f={} m_max={}", p.n_f, p.m_max)))?;
    let mut rows = Vec::new();
    let mut neg = 0.0;
    let mut neg_budget = 0.0;
    for m in -(p.m_max as i64)..=p.m_max as i64 {
        let r = w.report(m).map_err(at("hardy", "shat", format!("m={m}")))?;
        if m < 0 {
            neg += r.value.norm_sqr();
            neg_budget += r.error_bound * (2.0 * r.value.norm() + r.error_bound);
        }
        rows.push(vec![
            m.to_string(),
            fmt17(r.value.re),
            fmt17(r.value.im),
            fmt17(r.error_bound),
            w.stage(m).to_string(),
            r.diag("stability").map(fmt17).unwrap_or_default(),
        ]);
        o.reports.push(r);
    }
    o.csv("shat.csv", &["m", "re", "im", "budget", "stage_n", "stability"], rows)?;
    o.note("negative_l2", neg);
    o.note("l2_bound", w.l2_bound);
    o.checks.push(Check::le("negative_l2", neg - neg_budget, w.l2_bound));

    let gap_rank = p.gap_rank.clamp(1, p.n_f);
    let (a, g) = largest_gap(&sys, gap_rank).map_err(at("hardy", "largest_gap", format!("n={gap_rank}")))?;
    let psi = SmoothBump::new(a + 0.5 * g, 0.4 * g, p.bump_order)
        .map_err(at("circle", "SmoothBump::new", format!("gap=({a},{g})")))?;
    let rep = support_pairing(&w, &sys, &psi, p.m_max as i64, f64::INFINITY)
        .map_err(at("hardy", "support_pairing", format!("max_m={}", p.m_max)))?;
    let worst = rep.dyadic.iter().map(|d| d.1).fold(0.0, f64::max);
    o.note("pairing_dyadic", &rep.dyadic);
    o.checks.push(Check::le("support_pairing", worst, rep.budget));
    Ok(())
}

fn moments(cfg: &RunConfig, p: &MomentParams, o: &mut Outcome) -> Result<(), RunError> {
    let mut mc = MomentConfig::new(p.delta, p.m_list.clone(), cfg.master_seed, p.seeds);
    mc.c_log = p.c_log;
    mc.quad_tol = p.quad_tol;
    o.rng_streams
        .push(format!("cantor.offsets seeds=derive_seed({}, 0..{})", cfg.master_seed, p.seeds));
    let probe = moment_probe(&mc).map_err(at("hardy", "moment_probe", format!("seeds={} m_list={:?}", p.seeds, p.m_list)))?;
    let rows = (0..p.m_list.len())
        .map(|i| {
            vec![
                p.m_list[i].to_string(),
                fmt17(probe.e4[i]),
                fmt17(probe.e4_stderr[i]),
                fmt17(probe.e2[i]),
            ]
        })
        .collect();
    o.csv("moments.csv", &["m", "e4", "e4_stderr", "e2"], rows)?;
    let band = probe.fit.band95();
    o.note("fit", &probe.fit);
    o.note("band95", band);
    o.checks.push(Check::le("slope", probe.fit.slope, p.slope_max));
    o.checks.push(Check::le("band_upper", band.1, 0.0));
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn salem(cfg: &RunConfig, p: &SalemParams, o: &mut Outcome) -> Result<(), RunError> {
    let cantor = BaseCantor::new(p.delta, p.depth).map_err(at("salem", "base_cantor", format!("delta={} depth={}", p.delta, p.depth)))?;
    let eps = dyadic_eps(p.eps_top, p.eps_count);
    let mut env = Vec::new();
    let mut mink = Vec::new();
    let mut fdim = Vec::new();
    let mut spectrum_rows = Vec::new();
    let mut cover_rows = Vec::new();
    for b in 0..p.bridges as u64 {
        let bs = derive_seed(cfg.master_seed, b);
        let ss = derive_seed(cfg.master_seed, 1000 + b);
        o.rng_streams.push(format!("salem.bridge seed={bs} level={}", p.level));
        o.rng_streams.push(format!("salem.sample seed={ss} n={}", p.samples));
        let path = bridge(bs, p.level).map_err(at("salem", "bridge", format!("seed={bs} level={}", p.level)))?;
        let sample = pushforward(&path, &cantor, p.samples, ss);
        let sp = image_coeffs(&sample, 1, p.envelope_hi).map_err(at("salem", "image_coeffs", format!("bridge={b}")))?;
        for (m, v) in sp.coeffs.iter().filter(|(m, _)| *m >= 1) {
            spectrum_rows.push(vec![b.to_string(), m.to_string(), fmt17(v.norm()), fmt17(sp.noise_floor)]);
        }
        env.push(sp.fit.slope);
        let wide = image_coeffs(&sample, 1, p.fourier_reach).map_err(at("salem", "image_coeffs", format!("bridge={b}")))?;
        let fd = fourier_dim_fit(&wide.coeffs).map_err(at("dims", "fourier_dim_fit", format!("bridge={b}")))?;
        fdim.push(fd.estimate);
        let cov = image_cover(&path, &cantor, &eps).map_err(at("salem", "image_cover", format!("bridge={b}")))?;
        for (e, c) in cov.table.eps.iter().zip(&cov.table.counts) {
            cover_rows.push(vec![b.to_string(), fmt17(*e), c.to_string()]);
        }
        mink.push(cov.verdict.estimate);
    }
    o.csv("salem_spectrum.csv", &["bridge", "m", "abs", "noise_floor"], spectrum_rows)?;
    o.csv("salem_covers.csv", &["bridge", "eps", "count"], cover_rows)?;
    let (e, m, f) = (mean(&env), mean(&mink), mean(&fdim));
    o.note("envelope_slopes", &env);
    o.note("minkowski", &mink);
    o.note("fourier_dim", &fdim);
    o.checks
        .push(Check::le("envelope_slope", (e - p.envelope_target).abs(), p.target_tol));
    o.checks
        .push(Check::le("minkowski_slope", (m - p.minkowski_target).abs(), p.target_tol));
    o.checks.push(Check::le("fourier_below_minkowski", f - m, p.dimension_gap));
    Ok(())
}

/// A random union of up to `k` short arcs.
fn random_union(rng: &mut ChaCha8Rng, k: usize) -> IntervalUnion {
    let count = rng.random_range(1..=k);
    let arcs = (0..count)
        .map(|_| {
            let s = rng.random_range(0.0..TWO_PI);
            let len = rng.random_range(1e-4..0.5);
            Interval::new(s, len).expect("valid arc")
        })
        .collect();
    IntervalUnion::from_unsorted(arcs)
}

fn dims(cfg: &RunConfig, p: &DimsParams, o: &mut Outcome) -> Result<(), RunError> {
    let seed = cfg.master_seed;
    let eps = dyadic_eps(p.eps_top, p.eps_count);
    o.rng_streams.push(format!("cantor.offsets seed={seed} ranks=1..={}", p.n));
    let sys = build(seed, p.n, p.mode).map_err(at("cantor", "build", format!("seed={seed} n={}", p.n)))?;
    let k = sys.rank_union(p.n).map_err(at("cantor", "rank_union", format!("n={}", p.n)))?;
    let cantor = BaseCantor::new(p.cantor_delta, p.n as u32)
        .map_err(at("salem", "base_cantor", format!("delta={} depth={}", p.cantor_delta, p.n)))?;
    let c = cantor.union(p.n as u32).map_err(at("salem", "union", format!("level={}", p.n)))?;
    let mut rows = Vec::new();
    let mut monotone = true;
    for (name, set) in [("k_n", &k), ("base_cantor", &c)] {
        let t = CoverTable::new(CoverSet::Union(set), &eps, name).map_err(at("dims", "cover_count", name))?;
        monotone &= t.counts.windows(2).all(|w| w[0] <= w[1]);
        for (e, n) in t.eps.iter().zip(&t.counts) {
            rows.push(vec![name.to_string(), fmt17(*e), n.to_string()]);
        }
        let v = minkowski_fit(&t).map_err(at("dims", "minkowski_fit", name))?;
        o.note(&format!("minkowski_{name}"), &v);
    }
    o.csv("dims_covers.csv", &["set", "eps", "count"], rows)?;
    o.checks.push(Check::flag("cover_monotone", monotone));

    let mut violations = 0usize;
    let mut sum_rows = Vec::new();
    for &e in &eps {
        let s = sumset_cover(&k, &c, e).map_err(at("dims", "sumset_cover", format!("eps={e}")))?;
        violations += usize::from(!s.pass);
        sum_rows.push(vec![fmt17(e), s.cov_a.to_string(), s.cov_b.to_string(), s.cov_ab.to_string()]);
    }
    let pair_seed = derive_seed(seed, 1);
    o.rng_streams.push(format!("dims.pairs seed={pair_seed} count={}", p.random_pairs));
    let mut rng = ChaCha8Rng::seed_from_u64(pair_seed);
    for i in 0..p.random_pairs {
        let a = random_union(&mut rng, 6);
        let b = random_union(&mut rng, 6);
        let e = rng.random_range(1e-3..0.5);
        let s = sumset_cover(&a, &b, e).map_err(at("dims", "sumset_cover", format!("pair={i}")))?;
        violations += usize::from(!s.pass);
    }
    o.csv("dims_sumset.csv", &["eps", "cov_a", "cov_b", "cov_ab"], sum_rows)?;
    o.checks.push(Check::le("sumset_violations", violations as f64, 0.0));

    let w = CoeffWindow::from_real_fn(p.reach, |n| (1.0 + n.abs() as f64).powf(-p.exponent))
        .map_err(at("circle", "CoeffWindow", format!("reach={}", p.reach)))?;
    let fd = fourier_dim_fit(&w).map_err(at("dims", "fourier_dim_fit", "profile"))?;
    let want = (2.0 * p.exponent).min(1.0);
    o.checks
        .push(Check::le("fourier_dim_profile", (fd.estimate - want).abs(), p.fourier_tol));
    o.note("fourier_dim", &fd);
    let lp = lpdim_scan(&w, &p.q_grid).map_err(at("dims", "lpdim_scan", format!("{:?}", p.q_grid)))?;
    o.note("lp_dim", lp.estimate);
    let fr = frostman_report(&w, &p.alpha_grid).map_err(at("dims", "frostman_report", format!("{:?}", p.alpha_grid)))?;
    o.note("frostman_headline", fr.headline);
    o.json("dims_frostman.json", &fr)?;
    o.json("dims_lp.json", &lp)?;
    Ok(())
}

fn asym(_cfg: &RunConfig, p: &AsymParams, o: &mut Outcome) -> Result<(), RunError> {
    let mu = CoeffWindow::from_real_fn(p.reach, |n| (1.0 + n.abs() as f64).powf(-p.exponent))
        .map_err(at("circle", "CoeffWindow", format!("reach={}", p.reach)))?;
    let ac = AsymConfig {
        p: p.p,
        k_max: p.k_max,
        strategy: p.strategy,
        delta_tol: p.delta_tol,
        search: DilationSearch::Direct,
        max_freq: p.max_freq,
        slack: p.slack,
    };
    let params = format!("p={} k_max={} reach={}", p.p, p.k_max, p.reach);
    let (nu, reports) = match build_nu(&mu, &ac) {
        Ok(v) => v,
        Err(e @ Error::Certificate { .. }) => {
            // A failed hard certificate is a numeric outcome, not a crash.
            o.checks.push(Check::flag("hard_certificates", false));
            o.note("certificate_failure", e.to_string());
            return Ok(());
        }
        Err(e) => return Err(at("asym", "build_nu", params)(e)),
    };
    o.checks.push(Check::flag("hard_certificates", true));
    for s in &nu.steps {
        let bound = 0.5f64.powi(s.k as i32);
        o.checks.push(Check {
            name: format!("neg_tail_{}", s.k),
            pass: s.certificates.neg_tail < bound,
            value: s.certificates.neg_tail,
            threshold: bound,
        });
        o.checks.push(Check::le(
            format!("g_norm2_{}", s.k),
            (s.certificates.g_norm2 - bound).abs(),
            1e-12,
        ));
    }
    o.reports.extend(reports);
    let w = o.create("asym_ledger.csv")?;
    nu.write_ledger_csv(w).map_err(at("asym", "write_ledger_csv", params))?;
    o.json("asym_steps.json", &nu.steps)?;
    o.json("asym_nu.json", &nu.nu_hat)?;
    o.note("ledger", &nu.ledger);
    o.note("normalization", nu.normalization);
    Ok(())
}

fn reduce(_cfg: &RunConfig, p: &ReduceParams, o: &mut Outcome) -> Result<(), RunError> {
    let s = CoeffWindow::from_real_fn(p.reach, |n| if n == 0 { 1.0 } else { (n.abs() as f64).powf(-p.s_exponent).min(1.0) })
        .map_err(at("circle", "CoeffWindow", format!("reach={}", p.reach)))?;
    let mu = CoeffWindow::from_real_fn(p.reach, |n| (1.0 + n.abs() as f64).powf(-p.mu_exponent))
        .map_err(at("circle", "CoeffWindow", format!("reach={}", p.reach)))?;
    let r = frostman_reduction(&s, &mu, p.alpha).map_err(at("salem", "frostman_reduction", format!("alpha={}", p.alpha)))?;
    let verdict = r.energy.verdict(&Default::default());
    o.note("shift", r.shift);
    o.note("energy", r.energy.last());
    o.note("verdict", verdict);
    o.checks.push(Check::flag("energy_determined", verdict != Verdict::Undetermined));
    o.json("reduce_product.json", &r.product)?;
    Ok(())
}

/// Executes the configured pipeline and writes its artifacts into
/// `<out>/<first 16 hex digits of the config hash>/`.
pub fn run(config: &RunConfig) -> Result<RunManifest, RunError> {
    let started = Instant::now();
    let hash = config.hash();
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("out")).join(&hash[..16]);
    fs::create_dir_all(&dir).map_err(Error::from).map_err(io_err("create_dir", &dir))?;
    let mut o = Outcome::new(dir);
    o.json("config.json", config)?;
    let result = match &config.params {
        Params::Construct(p) => construct(config, p, &mut o),
        Params::Taylor(p) => taylor(config, p, &mut o),
        Params::Shat(p) => shat(config, p, &mut o),
        Params::Moments(p) => moments(config, p, &mut o),
        Params::Salem(p) => salem(config, p, &mut o),
        Params::Dims(p) => dims(config, p, &mut o),
        Params::Asym(p) => asym(config, p, &mut o),
        Params::Reduce(p) => reduce(config, p, &mut o),
    };
    result?;
    Ok(RunManifest {
        config_hash: hash,
        tool_version: TOOL_VERSION.to_string(),
        config: Some(config.clone()),
        wall_clock: started.elapsed().as_secs_f64(),
        rng_streams: o.rng_streams,
        reports: o.reports,
        checks: o.checks,
        summary: Value::Object(o.summary),
        artifacts: o.artifacts,
        incomplete: false,
        error: None,
    })
}

/// The directory [`run`] writes into.
pub fn run_dir(config: &RunConfig) -> PathBuf {
    let hash = config.hash();
    config.out.clone().unwrap_or_else(|| PathBuf::from("out")).join(&hash[..16])
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(name = "circsing", version, about = "Singular measures on the circle and their certificates")]
pub struct Cli {
    /// JSON run config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: ReportFormat,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the nested interval system and check its invariants.
    Construct(ConstructArgs),
    /// Taylor coefficients of the stage functions.
    Taylor(TaylorArgs),
    /// Coefficients of the one-sided distribution and its support pairing.
    Shat(ShatArgs),
    /// Fourth-moment decay over random systems.
    Moments(MomentArgs),
    /// Brownian-bridge images of a Cantor set.
    Salem(SalemArgs),
    /// Cover counts and dimension estimators.
    Dims(DimsArgs),
    /// The asymmetric measure and its ledger.
    Asym(AsymArgs),
    /// Frostman reduction of a product.
    Reduce(ReduceArgs),
}

#[derive(Debug, Default, Args, Serialize)]
pub struct ConstructArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<OffsetMode>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump_rank: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Args, Serialize)]
pub struct TaylorArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_log: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<i64>>,
    #[arg(long, value_parser = parse_mode)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<OffsetMode>,
}

#[derive(Debug, Default, Args, Serialize)]
pub struct ShatArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_log: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_f: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<bool>,
}

#[derive(Debug, Default, Args, Serialize)]
pub struct MomentArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<i64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
}

#[derive(Debug, Default, Args, Serialize)]
pub struct SalemArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bridges: Option<usize>,
}

#[derive(Debug, Default, Args, Serialize)]
pub struct DimsArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reach: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_pairs: Option<usize>,
}

#[derive(Debug, Default, Args, Serialize)]
pub struct AsymArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reach: Option<i64>,
    #[arg(long, value_parser = parse_strategy)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<FrequencyStrategy>,
}

#[derive(Debug, Default, Args, Serialize)]
pub struct ReduceArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_exponent: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_exponent: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reach: Option<i64>,
}

fn parse_mode(s: &str) -> Result<OffsetMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<FrequencyStrategy, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| format!("unknown strategy `{s}`"))
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Construct(_) => "construct",
            Command::Taylor(_) => "taylor",
            Command::Shat(_) => "shat",
            Command::Moments(_) => "moments",
            Command::Salem(_) => "salem",
            Command::Dims(_) => "dims",
            Command::Asym(_) => "asym",
            Command::Reduce(_) => "reduce",
        }
    }

    fn overrides(&self) -> Value {
        let v = match self {
            Command::Construct(a) => serde_json::to_value(a),
            Command::Taylor(a) => serde_json::to_value(a),
            Command::Shat(a) => serde_json::to_value(a),
            Command::Moments(a) => serde_json::to_value(a),
            Command::Salem(a) => serde_json::to_value(a),
            Command::Dims(a) => serde_json::to_value(a),
            Command::Asym(a) => serde_json::to_value(a),
            Command::Reduce(a) => serde_json::to_value(a),
        };
        v.expect("overrides serialize")
    }
}

impl Cli {
    /// Merges the config file, global flags and subcommand overrides.
    pub fn resolve(&self) -> Result<RunConfig, Error> {
        let mut doc = match &self.config {
            Some(path) => serde_json::from_str::<Value>(&fs::read_to_string(path)?)?,
            None => Value::Object(Map::new()),
        };
        let obj = doc
            .as_object_mut()
            .ok_or_else(|| crate::error::invalid("config", "top level must be an object"))?;
        if let Some(cmd) = &self.command {
            match obj.get("subcommand").and_then(Value::as_str) {
                Some(s) if s != cmd.name() => {
                    return Err(crate::error::invalid(
                        "subcommand",
                        format!("config is for `{s}`, command line asks for `{}`", cmd.name()),
                    ))
                }
                _ => {}
            }
            obj.insert("subcommand".into(), Value::String(cmd.name().into()));
            if let Value::Object(o) = cmd.overrides() {
                obj.extend(o);
            }
        }
        if !obj.contains_key("subcommand") {
            return Err(crate::error::invalid("subcommand", "give a subcommand or a config that names one"));
        }
        if let Some(s) = self.seed {
            obj.insert("master_seed".into(), s.into());
        }
        if let Some(o) = &self.out {
            obj.insert("out".into(), Value::String(o.display().to_string()));
        }
        Ok(serde_json::from_value(doc)?)
    }
}

fn execute(cli: &Cli) -> Result<RunManifest, String> {
    let config = cli.resolve().map_err(|e| e.to_string())?;
    let go = || run(&config).map_err(|e| e.to_string());
    let manifest = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| e.to_string())?
            .install(go)?,
        None => go()?,
    };
    emit_report(&manifest, cli.format, &run_dir(&config)).map_err(|e| e.to_string())?;
    Ok(manifest)
}

/// Entry point of the binary. Returns the process exit code.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok(m) => {
            for c in &m.checks {
                println!("{} {} value={} threshold={}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
            }
            println!("config_hash={} manifest_hash={}", m.config_hash, m.hash());
            m.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn defaults_are_materialized_on_load() {
        let c = RunConfig::from_json(r#"{"subcommand":"construct"}"#).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        for key in ["n_max", "mode", "tol", "gauge_max", "master_seed"] {
            assert!(text.contains(key), "{key} missing from {text}");
        }
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
    }

    #[test]
    fn hash_ignores_output_dir() {
        let mut a = RunConfig::new(1, Params::Construct(Default::default()));
        let h = a.hash();
        a.out = Some("elsewhere".into());
        assert_eq!(a.hash(), h);
        a.master_seed = 2;
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn construct_zero_mode() {
        let d = tmp();
        let mut c = RunConfig::new(
            0,
            Params::Construct(ConstructParams {
                mode: OffsetMode::Zero,
                ..Default::default()
            }),
        );
        c.out = Some(d.path().into());
        let m = run(&c).unwrap();
        assert!(m.pass());
        let k10 = m.reports.iter().find(|r| r.quantity == "support_length" && r.index == 10).unwrap();
        assert!((k10.value.re - TWO_PI / 10.0).abs() < 1e-12);
        assert!(m.checks.iter().any(|c| c.name == "nesting" && c.pass));
        assert!(run_dir(&c).join("construct_ranks.csv").exists());
    }

    #[test]
    fn taylor_zero_delta_is_all_zero() {
        let d = tmp();
        let mut c = RunConfig::new(
            3,
            Params::Taylor(TaylorParams {
                delta: 0.0,
                ..Default::default()
            }),
        );
        c.out = Some(d.path().into());
        let m = run(&c).unwrap();
        assert!(m.pass());
        assert!(m.reports.iter().all(|r| r.value.norm() <= 1e-12));
        assert!(m.checks.iter().any(|c| c.name == "zero_delta_vanishes"));
    }

    #[test]
    fn empty_manifest_json() {
        let d = tmp();
        let m = RunManifest::empty();
        let files = emit_report(&m, ReportFormat::Json, d.path()).unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(v["reports"].as_array().unwrap().len(), 0);
        assert!(m.pass());
    }

    #[test]
    fn taylor_csv_bundle_header() {
        let d = tmp();
        let mut c = RunConfig::new(
            5,
            Params::Taylor(TaylorParams {
                m_list: vec![1, 2, 4],
                ..Default::default()
            }),
        );
        c.out = Some(d.path().into());
        let m = run(&c).unwrap();
        let out = d.path().join("bundle");
        emit_report(&m, ReportFormat::CsvBundle, &out).unwrap();
        let text = fs::read_to_string(out.join("taylor.csv")).unwrap();
        assert_eq!(text.lines().next().unwrap(), "m,re,im,stage_n,alias_bound,residual");
        assert_eq!(text.lines().count(), 4);
        let artifact = fs::read_to_string(run_dir(&c).join("taylor.csv")).unwrap();
        assert_eq!(artifact.lines().next(), text.lines().next());
    }

    #[test]
    fn emit_then_reload_keeps_hash() {
        let d = tmp();
        let mut c = RunConfig::new(
            9,
            Params::Taylor(TaylorParams {
                m_list: vec![1, 3, 8],
                ..Default::default()
            }),
        );
        c.out = Some(d.path().into());
        let m = run(&c).unwrap();
        let files = emit_report(&m, ReportFormat::Json, d.path()).unwrap();
        let back = RunManifest::load(&files[0]).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.hash(), m.hash());
    }

    #[test]
    fn rerun_is_bit_identical() {
        let d = tmp();
        let mut c = RunConfig::new(
            11,
            Params::Dims(DimsParams {
                n: 5,
                reach: 1 << 10,
                random_pairs: 10,
                ..Default::default()
            }),
        );
        c.out = Some(d.path().into());
        let a = run(&c).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(2)
            .build()
            .unwrap()
            .install(|| run(&c).unwrap());
        assert_eq!(a.hash(), b.hash());
        assert!(a.pass(), "{:?}", a.checks);
    }

    #[test]
    fn flags_override_config() {
        let d = tmp();
        let path = d.path().join("c.json");
        fs::write(&path, r#"{"subcommand":"construct","n_max":6,"master_seed":4}"#).unwrap();
        let cli = Cli::try_parse_from([
            "circsing",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "7",
            "construct",
            "--mode",
            "zero",
        ])
        .unwrap();
        let c = cli.resolve().unwrap();
        assert_eq!(c.master_seed, 7);
        match c.params {
            Params::Construct(p) => {
                assert_eq!(p.n_max, 6);
                assert_eq!(p.mode, OffsetMode::Zero);
            }
            other => panic!("wrong params {other:?}"),
        }
        let clash = Cli::try_parse_from(["circsing", "--config", path.to_str().unwrap(), "taylor"]).unwrap();
        assert!(clash.resolve().is_err());
    }

    #[test]
    fn exit_codes() {
        let d = tmp();
        let out = d.path().to_str().unwrap();
        assert_eq!(main_from_args(["circsing", "--out", out, "construct", "--n-max", "6"]), EXIT_PASS);
        // A tolerance no rounding can meet turns into a failed check.
        assert_eq!(
            main_from_args(["circsing", "--out", out, "construct", "--n-max", "6", "--tol=-1"]),
            EXIT_CHECK_FAILED
        );
        assert_eq!(main_from_args(["circsing", "--out", out, "construct", "--n-max", "99"]), EXIT_ERROR);
    }

    #[test]
    fn asym_single_step_ledger() {
        let d = tmp();
        let mut c = RunConfig::new(0, Params::Asym(AsymParams::default()));
        c.out = Some(d.path().into());
        let m = run(&c).unwrap();
        assert!(m.pass(), "{:?}", m.checks);
        let ledger = fs::read_to_string(run_dir(&c).join("asym_ledger.csv")).unwrap();
        assert_eq!(ledger.lines().count(), 2);
        let p = AsymParams::default();
        let mu = CoeffWindow::from_real_fn(p.reach, |n| (1.0 + n.abs() as f64).powf(-p.exponent)).unwrap();
        let (direct, _) = build_nu(&mu, &AsymConfig::new(p.p, p.k_max)).unwrap();
        let rows: Vec<crate::asym::LedgerRow> = serde_json::from_value(m.summary["ledger"].clone()).unwrap();
        assert_eq!(rows, direct.ledger);
    }
}
