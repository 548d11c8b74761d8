//! Experiment configuration and the `N`-sweep.
//!
//! A config is a `key = value` document (see [`crate::keyvalue`]) or the same
//! keys as a JSON object. Keys:
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `pattern` | counting word, e.g. `ab` | `ab` |
//! | `N_list` | comma-separated copy counts (may be empty) | `1,2,4,8` |
//! | `T_rule` | `fixed T`, `per_n c` (`T = c/N`) or `per_n2 c` (`T = c/N²`) | `per_n 0.16` |
//! | `m_rule` | `fixed m` or `per_n c` (`m = c·N`) | `per_n 16` |
//! | `m` | shorthand for `m_rule = fixed m` | |
//! | `K` | fixed horizon, a multiple of every `m` | |
//! | `k_per_period` | `K = k_per_period · m` when `K` is absent | `4` |
//! | `hole_halfwidth` | real in `(0, 0.1)` | `0.02` |
//! | `smoothing` | profile margin | `0` |
//! | `phases` | grid phases `H,V,D` | `0.3,0.3,0.4` |
//! | `samples_per_strip` | Monte Carlo draws per strip | `20000` |
//! | `seed` | integer | `1` |
//! | `hofer_time_samples`, `hofer_space_samples` | quadrature grid | `8`, `512` |
//! | `output` | CSV path | `sweep.csv` |

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::brooks::CountingQM;
use crate::flow::{self, FlowError};
use crate::keyvalue::{self, DocError};
use crate::rho::{self, RhoError, RhoEstimate};
use crate::surface::{OffsetRule, Scenario, ScenarioParams, SurfaceError};
use crate::word::Word;

pub const CSV_HEADER: &str =
    "N,T,m,tau,rho_est,rho_stderr,rho_pred,bad_area,hofer_numeric,hofer_2Ktau,calabi,ratio";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("N = {n}: {source}")]
    Scenario { n: usize, source: SurfaceError },
    #[error("N = {n}: {source}")]
    Flow { n: usize, source: FlowError },
    #[error("N = {n}: {source}")]
    Rho { n: usize, source: RhoError },
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl ExperimentError {
    /// `2` for bad configs and I/O, `3` for scenarios that cannot be run.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Io { .. } => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "InvalidConfig",
            ExperimentError::Scenario {
                source: SurfaceError::InfeasibleScenario(_),
                ..
            } => "InfeasibleScenario",
            ExperimentError::Scenario { .. } => "InvalidScenario",
            ExperimentError::Flow {
                source: FlowError::ValidityWindowExceeded { .. },
                ..
            }
            | ExperimentError::Rho {
                source: RhoError::Flow(FlowError::ValidityWindowExceeded { .. }),
                ..
            } => "ValidityWindowExceeded",
            ExperimentError::Rho {
                source: RhoError::NonzeroFlux(..),
                ..
            } => "NonzeroFlux",
            ExperimentError::Flow { .. } | ExperimentError::Rho { .. } => "EstimationFailed",
            ExperimentError::Io { .. } => "Io",
        }
    }

    /// One-line JSON record for tooling.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            n: Option<usize>,
        }
        let n = match self {
            ExperimentError::Scenario { n, .. } | ExperimentError::Flow { n, .. } | ExperimentError::Rho { n, .. } => {
                Some(*n)
            }
            _ => None,
        };
        serde_json::to_string(&Record {
            error: self.kind(),
            message: self.to_string(),
            n,
        })
        .expect("plain record serializes")
    }
}

impl From<DocError> for ExperimentError {
    fn from(e: DocError) -> Self {
        ExperimentError::Config(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PeriodRule {
    Fixed(f64),
    PerN(f64),
    PerN2(f64),
}

impl PeriodRule {
    pub fn period(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            PeriodRule::Fixed(t) => t,
            PeriodRule::PerN(c) => c / n,
            PeriodRule::PerN2(c) => c / (n * n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepsRule {
    Fixed(u32),
    PerN(u32),
}

impl StepsRule {
    pub fn steps(&self, n: usize) -> u32 {
        match *self {
            StepsRule::Fixed(m) => m,
            StepsRule::PerN(c) => c * n as u32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    Fixed(u32),
    PerPeriod(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub pattern: Word,
    pub n_list: Vec<usize>,
    pub t_rule: PeriodRule,
    pub m_rule: StepsRule,
    pub horizon: Horizon,
    pub hole_halfwidth: f64,
    pub smoothing: f64,
    pub phases: [f64; 3],
    pub samples_per_strip: usize,
    pub seed: u64,
    pub hofer_time_samples: usize,
    pub hofer_space_samples: usize,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            pattern: "ab".parse().unwrap(),
            n_list: vec![1, 2, 4, 8],
            t_rule: PeriodRule::PerN(0.16),
            m_rule: StepsRule::PerN(16),
            horizon: Horizon::PerPeriod(4),
            hole_halfwidth: 0.02,
            smoothing: 0.0,
            phases: [0.3, 0.3, 0.4],
            samples_per_strip: 20_000,
            seed: 1,
            hofer_time_samples: 8,
            hofer_space_samples: 512,
            output: PathBuf::from("sweep.csv"),
        }
    }
}

const KEYS: &[&str] = &[
    "pattern",
    "N_list",
    "T_rule",
    "m_rule",
    "m",
    "K",
    "k_per_period",
    "hole_halfwidth",
    "smoothing",
    "phases",
    "samples_per_strip",
    "seed",
    "hofer_time_samples",
    "hofer_space_samples",
    "output",
];

fn bad(key: &str, value: &str) -> ExperimentError {
    ExperimentError::Config(format!("key `{key}`: cannot parse {value:?}"))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ExperimentError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| bad(key, value)))
        .collect()
}

fn rule_parts<'a>(key: &str, value: &'a str) -> Result<(&'a str, &'a str), ExperimentError> {
    let mut it = value.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(kind), Some(arg), None) => Ok((kind, arg)),
        _ => Err(bad(key, value)),
    }
}

impl ExperimentConfig {
    pub fn k_for(&self, m: u32) -> u32 {
        match self.horizon {
            Horizon::Fixed(k) => k,
            Horizon::PerPeriod(c) => c * m,
        }
    }

    pub fn params(&self, n: usize) -> ScenarioParams {
        ScenarioParams::new(n, self.t_rule.period(n), self.m_rule.steps(n), self.hole_halfwidth)
            .with_smoothing(self.smoothing)
            .with_offsets(OffsetRule::Grid {
                phase_h: self.phases[0],
                phase_v: self.phases[1],
                phase_d: self.phases[2],
            })
    }

    /// Parses a `key = value` document, or a JSON object when the text starts
    /// with `{`.
    pub fn parse(text: &str) -> Result<ExperimentConfig, ExperimentError> {
        if text.trim_start().starts_with('{') {
            return ExperimentConfig::from_json(text);
        }
        let entries = keyvalue::parse(text)?;
        ExperimentConfig::from_pairs(entries.iter().map(|e| (e.key.as_str(), e.value.as_str())))
    }

    /// The JSON mirror: the same keys, with numbers, strings or arrays as values.
    pub fn from_json(text: &str) -> Result<ExperimentConfig, ExperimentError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ExperimentError::Config(format!("JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| ExperimentError::Config("JSON config must be an object".into()))?;
        let scalar = |v: &serde_json::Value| -> Option<String> {
            match v {
                serde_json::Value::String(s) => Some(s.clone()),
                serde_json::Value::Number(n) => Some(n.to_string()),
                _ => None,
            }
        };
        let mut pairs = Vec::new();
        for (k, v) in obj {
            let text = match v {
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|i| scalar(i).ok_or_else(|| bad(k, &v.to_string())))
                    .collect::<Result<Vec<_>, _>>()?
                    .join(","),
                other => scalar(other).ok_or_else(|| bad(k, &v.to_string()))?,
            };
            pairs.push((k.clone(), text));
        }
        ExperimentConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    fn from_pairs<'a>(pairs: impl Iterator<Item = (&'a str, &'a str)>) -> Result<ExperimentConfig, ExperimentError> {
        let mut c = ExperimentConfig::default();
        let mut fixed_k = None;
        let mut per_period = None;
        for (key, value) in pairs {
            if !KEYS.contains(&key) {
                return Err(ExperimentError::Config(format!("unknown key `{key}`")));
            }
            match key {
                "pattern" => {
                    c.pattern = value.parse().map_err(|_| bad(key, value))?;
                }
                "N_list" => c.n_list = parse_list(key, value)?,
                "T_rule" => {
                    let (kind, arg) = rule_parts(key, value)?;
                    let x: f64 = arg.parse().map_err(|_| bad(key, value))?;
                    c.t_rule = match kind {
                        "fixed" => PeriodRule::Fixed(x),
                        "per_n" => PeriodRule::PerN(x),
                        "per_n2" => PeriodRule::PerN2(x),
                        _ => return Err(bad(key, value)),
                    };
                }
                "m_rule" => {
                    let (kind, arg) = rule_parts(key, value)?;
                    let x: u32 = arg.parse().map_err(|_| bad(key, value))?;
                    c.m_rule = match kind {
                        "fixed" => StepsRule::Fixed(x),
                        "per_n" => StepsRule::PerN(x),
                        _ => return Err(bad(key, value)),
                    };
                }
                "m" => c.m_rule = StepsRule::Fixed(keyvalue::parse_value(key, value)?),
                "K" => fixed_k = Some(keyvalue::parse_value::<u32>(key, value)?),
                "k_per_period" => per_period = Some(keyvalue::parse_value::<u32>(key, value)?),
                "hole_halfwidth" => c.hole_halfwidth = keyvalue::parse_value(key, value)?,
                "smoothing" => c.smoothing = keyvalue::parse_value(key, value)?,
                "phases" => {
                    let v: Vec<f64> = parse_list(key, value)?;
                    c.phases = v.try_into().map_err(|_| bad(key, value))?;
                }
                "samples_per_strip" => c.samples_per_strip = keyvalue::parse_value(key, value)?,
                "seed" => c.seed = keyvalue::parse_value(key, value)?,
                "hofer_time_samples" => c.hofer_time_samples = keyvalue::parse_value(key, value)?,
                "hofer_space_samples" => c.hofer_space_samples = keyvalue::parse_value(key, value)?,
                "output" => c.output = PathBuf::from(value),
                _ => unreachable!(),
            }
        }
        c.horizon = match (fixed_k, per_period) {
            (Some(_), Some(_)) => return Err(ExperimentError::Config("give either `K` or `k_per_period`".into())),
            (Some(k), None) => Horizon::Fixed(k),
            (None, Some(c)) => Horizon::PerPeriod(c),
            (None, None) => Horizon::PerPeriod(4),
        };
        c.check()?;
        Ok(c)
    }

    /// Checks that do not need a scenario.
    pub fn check(&self) -> Result<(), ExperimentError> {
        let err = |m: String| Err(ExperimentError::Config(m));
        if self.pattern.is_identity() {
            return err("pattern must be a nonempty word".into());
        }
        if self.n_list.contains(&0) {
            return err("N must be at least 1".into());
        }
        if self.samples_per_strip < 2 {
            return err("samples_per_strip must be at least 2".into());
        }
        if self.hofer_time_samples == 0 || self.hofer_space_samples == 0 {
            return err("quadrature sample counts must be positive".into());
        }
        for &n in &self.n_list {
            let m = self.m_rule.steps(n);
            let k = self.k_for(m);
            if m == 0 {
                return err(format!("N = {n}: m must be at least 1"));
            }
            if k == 0 || k % m != 0 {
                return err(format!("N = {n}: K = {k} is not a positive multiple of m = {m}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub period: f64,
    pub m: u32,
    pub tau: f64,
    pub k: u32,
    pub rho: RhoEstimate,
    pub rho_pred: f64,
    pub rho_pred_radius: f64,
    pub bad_area_budget: f64,
    pub hofer_numeric: f64,
    pub hofer_2ktau: f64,
    pub calabi: f64,
    /// `|ρ| / hofer_numeric`.
    pub ratio: f64,
    pub flux: (f64, f64),
    pub copy_flux_ok: bool,
    pub window_ok: bool,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let f = |x: f64| format!("{x:.11e}");
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            f(self.period),
            self.m,
            f(self.tau),
            f(self.rho.value),
            f(self.rho.stderr),
            f(self.rho_pred),
            f(self.rho.bad_area),
            f(self.hofer_numeric),
            f(self.hofer_2ktau),
            f(self.calabi),
            f(self.ratio)
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Header plus one line per row, 12 significant digits per real.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.csv_line());
        }
        out
    }
}

/// Builds and checks the scenario of one sweep entry without estimating.
pub fn prepare(config: &ExperimentConfig, n: usize) -> Result<Scenario, ExperimentError> {
    let scenario = Scenario::build(&config.params(n)).map_err(|source| ExperimentError::Scenario { n, source })?;
    let (fa, fb) = flow::flux_check(&scenario);
    if fa.abs() > 1e-12 || fb.abs() > 1e-12 {
        return Err(ExperimentError::Rho {
            n,
            source: RhoError::NonzeroFlux(fa, fb),
        });
    }
    flow::check_validity_window(&scenario, scenario.tau).map_err(|source| ExperimentError::Flow { n, source })?;
    Ok(scenario)
}

pub fn run_one(config: &ExperimentConfig, n: usize) -> Result<(Scenario, SweepRow), ExperimentError> {
    let scenario = prepare(config, n)?;
    let q = CountingQM::new(config.pattern.clone()).map_err(|e| ExperimentError::Config(e.to_string()))?;
    let k = config.k_for(scenario.m);
    let rho = rho::rho_estimate(&scenario, &q, k, config.samples_per_strip, config.seed)
        .map_err(|source| ExperimentError::Rho { n, source })?;
    let pred = rho::rho_predicted(&scenario, &q);
    let tau = scenario.tau;
    let hofer = flow::hofer_upper_bound(&scenario, tau, config.hofer_time_samples, config.hofer_space_samples)
        .map_err(|source| ExperimentError::Flow { n, source })?;
    let calabi = flow::calabi(&scenario, tau, config.hofer_time_samples, config.hofer_space_samples)
        .map_err(|source| ExperimentError::Flow { n, source })?;
    let row = SweepRow {
        n,
        period: scenario.period,
        m: scenario.m,
        tau,
        k,
        rho_pred: pred.value,
        rho_pred_radius: pred.error_radius,
        bad_area_budget: scenario.validation.bad_area_budget,
        hofer_numeric: hofer.numeric,
        hofer_2ktau: hofer.analytic,
        calabi,
        ratio: rho.value.abs() / hofer.numeric,
        flux: flow::flux_check(&scenario),
        copy_flux_ok: flow::flux_per_copy(&scenario).iter().all(|&f| f == (0.0, 0.0)),
        window_ok: true,
        rho,
    };
    Ok((scenario, row))
}

/// Runs every `N` of the config in order. Stops at the first scenario that
/// cannot be run, so no row is ever produced for an invalid scenario.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepTable, ExperimentError> {
    let mut table = SweepTable::default();
    for &n in &config.n_list {
        table.rows.push(run_one(config, n)?.1);
    }
    Ok(table)
}

pub fn write_csv(table: &SweepTable, path: &std::path::Path) -> Result<(), ExperimentError> {
    std::fs::write(path, table.to_csv()).map_err(|e| ExperimentError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_parses() {
        let text = "pattern = ab\nN_list = 1,2,4,8\nT_rule = per_n 0.16\nm_rule = per_n 16\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.k_for(32), 128);
        assert_eq!(c.t_rule.period(4), 0.04);
    }

    #[test]
    fn json_mirror_agrees() {
        let kv = "pattern = abAB\nN_list = 1,2\nT_rule = per_n2 0.005\nm = 8\nK = 32\nseed = 9\n";
        let js = r#"{"pattern": "abAB", "N_list": [1, 2], "T_rule": "per_n2 0.005", "m": 8, "K": 32, "seed": 9}"#;
        assert_eq!(ExperimentConfig::parse(kv).unwrap(), ExperimentConfig::parse(js).unwrap());
    }

    #[test]
    fn config_errors() {
        for text in [
            "bogus = 1",
            "pattern = a1",
            "N_list = 0",
            "T_rule = sometimes 0.1",
            "m = 10\nK = 15",
            "K = 40\nk_per_period = 4",
            "phases = 0.1,0.2",
        ] {
            let e = ExperimentConfig::parse(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn empty_sweep_is_empty_table() {
        let c = ExperimentConfig::parse("N_list =\n").unwrap();
        let table = run_sweep(&c).unwrap();
        assert!(table.rows.is_empty());
        assert_eq!(table.to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn infeasible_scenario_is_reported() {
        let c = ExperimentConfig::parse("N_list = 2\nT_rule = fixed 0.2\n").unwrap();
        let e = run_sweep(&c).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_json().contains("\"n\":2"));
    }

    #[test]
    fn single_row_sweep_is_reproducible() {
        let text = "N_list = 1\nT_rule = fixed 0.005\nm = 8\nsamples_per_strip = 2000\nhofer_space_samples = 128\nhofer_time_samples = 2\n";
        let c = ExperimentConfig::parse(text).unwrap();
        let a = run_sweep(&c).unwrap();
        let b = run_sweep(&c).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let row = &a.rows[0];
        assert!((row.rho.value - row.rho_pred).abs() <= 3.0 * row.rho.stderr + row.rho_pred_radius);
        let line = row.csv_line();
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
        // 12 significant digits: one before the point, eleven after
        let tau = line.split(',').nth(3).unwrap();
        assert_eq!(tau, "6.25000000000e-4");
    }
}
