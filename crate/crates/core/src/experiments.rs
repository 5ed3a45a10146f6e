//! Experiment drivers: declarative configs, sweeps over degrees or budgets,
//! and CSV/JSON emission.
//!
//! Each trial of schedule entry `s` uses the seed `seed ^ (s * trials + t)`,
//! with training points, evaluation points and Gram points on separate
//! substreams. Trials run on a rayon pool and are collected in order, so
//! output files depend only on the config.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{
    self, condition_constants_with_gram, matched_measure, monte_carlo_gram,
    monte_carlo_gram_from_points, nikolskii_from_gram, sample_complexity_bound, universal_cap,
    NikolskiiSource, DEFAULT_GRAM_POINTS,
};
use crate::domains::{
    draw_samples_on_stream, estimate_volume_fraction_under, DomainKind, DomainSpec, SampleSet,
    SamplingMeasure,
};
use crate::error::{Error, Result};
use crate::framesolver::{
    assemble_design_matrix, assemble_rhs, basis_matrix, solve_with_svd, truncate_pointwise,
    FrameSvd, DEFAULT_EPSILON,
};
use crate::indexsets::{largest_n_for_budget, IndexFamily, MultiIndexSet, OversamplingRule};
use crate::polybasis::{projection_coefficients, BasisKind};
use crate::rng::{streams, trial_seed, RNG_ALGORITHM};
use crate::targets::TargetFunction;

/// Fraction of failed trials above which a result row is flagged.
pub const FAILURE_FLAG_FRACTION: f64 = 0.2;

/// Value written for grid points outside the domain in an error map.
pub const ERRORMAP_SENTINEL: f64 = -1.0;

/// Mixed into the base seed for per-entry Nikolskii estimates.
const NIKOLSKII_SEED_SALT: u64 = 0x6e69_6b6f_6c73_6b69;

/// Mixed into the base seed for the shared Gram grid and volume estimate.
const SHARED_SEED_SALT: u64 = 0x6772_616d_6772_6964;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Converge,
    Conditioning,
    #[serde(rename = "errormap")]
    ErrorMap,
    Bounds,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Converge => "converge",
            ExperimentKind::Conditioning => "conditioning",
            ExperimentKind::ErrorMap => "errormap",
            ExperimentKind::Bounds => "bounds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// Schedule values are degrees `n`; `M` follows from each rule.
    Degree,
    /// Schedule values are budgets `M`; `n` is the largest admitted by each rule.
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub kind: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    #[serde(default = "default_basis")]
    pub kind: String,
}

impl Default for BasisSection {
    fn default() -> Self {
        Self { kind: default_basis() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSetSection {
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub mode: ScheduleMode,
    pub values: Vec<u64>,
    #[serde(default = "default_rules")]
    pub rules: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorMapSection {
    #[serde(default = "default_grid")]
    pub grid: usize,
}

impl Default for ErrorMapSection {
    fn default() -> Self {
        Self { grid: default_grid() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// `L >= sup |f|` for the truncated estimator; defaults to the catalog bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// Take `M` from the Nikolskii-based sample-complexity bound instead of the rules.
    #[serde(default)]
    pub sample_complexity: bool,
    #[serde(default = "default_eval_points")]
    pub nikolskii_points: usize,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            gamma: default_gamma(),
            bound: None,
            sample_complexity: false,
            nikolskii_points: default_eval_points(),
        }
    }
}

/// Declarative description of one experiment, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Extra thresholds for conditioning sweeps; `epsilon` is used when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_eval_points")]
    pub eval_points: usize,
    #[serde(default = "default_gram_points")]
    pub gram_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub domain: DomainSection,
    #[serde(default)]
    pub basis: BasisSection,
    pub index_set: IndexSetSection,
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub errormap: ErrorMapSection,
    #[serde(default)]
    pub bounds: BoundsSection,
}

fn default_basis() -> String {
    "legendre".into()
}
fn default_rules() -> Vec<String> {
    vec!["loglinear(1)".into()]
}
fn default_grid() -> usize {
    256
}
fn default_delta() -> f64 {
    0.5
}
fn default_gamma() -> f64 {
    0.1
}
fn default_trials() -> usize {
    20
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_eval_points() -> usize {
    10_000
}
fn default_gram_points() -> usize {
    DEFAULT_GRAM_POINTS
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Hex prefix of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.schedule.values.is_empty() {
            return Err(Error::Config("schedule.values must be nonempty".into()));
        }
        if self.schedule.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("schedule.values must be strictly increasing".into()));
        }
        if self.schedule.rules.is_empty() {
            return Err(Error::Config("schedule.rules must be nonempty".into()));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config("seed must be below 2^63".into()));
        }
        for &e in std::iter::once(&self.epsilon).chain(&self.epsilons) {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::Config(format!("threshold must be finite and >= 0, got {e}")));
            }
        }
        if self.eval_points == 0 || self.gram_points == 0 {
            return Err(Error::Config("eval_points and gram_points must be >= 1".into()));
        }
        if self.experiment == ExperimentKind::ErrorMap && self.errormap.grid == 0 {
            return Err(Error::Config("errormap.grid must be >= 1".into()));
        }
        self.resolve()?;
        Ok(())
    }

    /// Parses the string-valued fields into typed values.
    pub fn resolve(&self) -> Result<Resolved> {
        let basis: BasisKind = self.basis.kind.parse().map_err(config_err)?;
        let kind: DomainKind = self.domain.kind.parse().map_err(config_err)?;
        let domain = DomainSpec::with_half_width(kind, self.domain.dim, basis.half_width())
            .map_err(config_err)?;
        let family: IndexFamily = self.index_set.kind.parse().map_err(config_err)?;
        let rules = self
            .schedule
            .rules
            .iter()
            .map(|r| r.parse::<OversamplingRule>().map_err(config_err))
            .collect::<Result<Vec<_>>>()?;
        let target = match &self.target {
            Some(t) => {
                let t = t.parse::<TargetFunction>().map_err(config_err)?.with_basis(basis);
                t.check_dimension(self.domain.dim).map_err(config_err)?;
                Some(t)
            }
            None => None,
        };
        let needs_target = matches!(
            self.experiment,
            ExperimentKind::Converge | ExperimentKind::ErrorMap | ExperimentKind::Bounds
        );
        if needs_target && target.is_none() {
            return Err(Error::Config(format!(
                "experiment `{}` needs a target function",
                self.experiment.name()
            )));
        }
        if self.experiment == ExperimentKind::ErrorMap && self.domain.dim != 2 {
            return Err(Error::Config("error maps need d = 2".into()));
        }
        if self.experiment == ExperimentKind::Bounds {
            let b = &self.bounds;
            if !(b.delta > 0.0 && b.delta < 1.0 && b.gamma > 0.0 && b.gamma < 1.0) {
                return Err(Error::Config("bounds.delta and bounds.gamma must lie in (0, 1)".into()));
            }
            let l = b.bound.or_else(|| target.as_ref().and_then(|t| t.sup_bound(self.domain.dim)));
            match l {
                Some(l) if l >= 0.0 => {}
                _ => {
                    return Err(Error::Config(
                        "bounds need `bounds.bound` for a target without a known sup bound".into(),
                    ))
                }
            }
        }
        Ok(Resolved {
            measure: matched_measure(basis),
            basis,
            domain,
            family,
            rules,
            target,
        })
    }

    fn epsilons(&self) -> Vec<f64> {
        if self.epsilons.is_empty() {
            vec![self.epsilon]
        } else {
            self.epsilons.clone()
        }
    }

    fn header(&self) -> String {
        let mut h = String::new();
        let _ = writeln!(h, "# polyframe {} experiment={}", env!("CARGO_PKG_VERSION"), self.experiment.name());
        let _ = writeln!(h, "# config_hash={} rng={RNG_ALGORITHM}", self.hash());
        for line in self.to_toml().lines() {
            if line.is_empty() {
                h.push_str("#\n");
            } else {
                let _ = writeln!(h, "# {line}");
            }
        }
        h
    }
}

/// Typed view of a config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub domain: DomainSpec,
    pub basis: BasisKind,
    pub measure: SamplingMeasure,
    pub family: IndexFamily,
    pub rules: Vec<OversamplingRule>,
    pub target: Option<TargetFunction>,
}

/// One (schedule value, rule) pair with its space and budget.
#[derive(Debug, Clone)]
pub struct ScheduleEntry {
    pub index: usize,
    pub rule: OversamplingRule,
    pub degree: u32,
    pub set: MultiIndexSet,
    pub m: usize,
}

impl ScheduleEntry {
    pub fn n_card(&self) -> usize {
        self.set.len()
    }
}

pub fn build_schedule(cfg: &ExperimentConfig, res: &Resolved) -> Result<Vec<ScheduleEntry>> {
    let d = res.domain.dim;
    let mut out = Vec::new();
    for &value in &cfg.schedule.values {
        for &rule in &res.rules {
            let (degree, m_budget) = match cfg.schedule.mode {
                ScheduleMode::Degree => {
                    let n = u32::try_from(value)
                        .map_err(|_| Error::Config(format!("degree {value} is too large")))?;
                    (n, None)
                }
                ScheduleMode::Budget => {
                    let m = usize::try_from(value)
                        .map_err(|_| Error::Config(format!("budget {value} is too large")))?;
                    (largest_n_for_budget(res.family, d, m, rule)?, Some(m))
                }
            };
            let set = res.family.build(degree, d)?;
            let m = m_budget.unwrap_or_else(|| rule.samples_for(set.len()));
            out.push(ScheduleEntry {
                index: out.len(),
                rule,
                degree,
                set,
                m,
            });
        }
    }
    Ok(out)
}

/// Lower median of the finite values.
pub fn lower_median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    v[(v.len() - 1) / 2]
}

/// Named output files produced by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub files: Vec<(String, String)>,
}

impl ExperimentOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.experiment {
        ExperimentKind::Converge => run_convergence(cfg),
        ExperimentKind::Conditioning => run_conditioning_sweep(cfg),
        ExperimentKind::ErrorMap => run_error_map(cfg),
        ExperimentKind::Bounds => run_bounds(cfg),
    }
}

fn global_seed(cfg: &ExperimentConfig, entry: usize, trial: usize) -> u64 {
    trial_seed(cfg.seed, (entry * cfg.trials + trial) as u64)
}

/// If every trial failed, surfaces the first error; otherwise returns the failure count.
fn failures<T>(results: &[Result<T>]) -> Result<usize> {
    let failed = results.iter().filter(|r| r.is_err()).count();
    if failed == results.len() {
        if let Some(Err(e)) = results.iter().find(|r| r.is_err()) {
            return Err(e.clone());
        }
    }
    Ok(failed)
}

fn flagged(failed: usize, trials: usize) -> bool {
    failed as f64 > FAILURE_FLAG_FRACTION * trials as f64
}

fn status<T>(r: &Result<T>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(Error::SamplingFailure { .. }) => "sampling_failure".into(),
        Err(Error::Numeric(_)) => "numeric_failure".into(),
        Err(_) => "error".into(),
    }
}

fn eval_error_stats(
    target: &TargetFunction,
    values: &[f64],
    points: &SampleSet,
) -> (f64, f64) {
    let mut sq = 0.0;
    let mut mx: f64 = 0.0;
    for (v, y) in values.iter().zip(points.rows()) {
        let e = (target.eval(y) - v).abs();
        sq += e * e;
        mx = mx.max(e);
    }
    ((sq / points.len() as f64).sqrt(), mx)
}

struct Fit {
    svd: FrameSvd,
    training: SampleSet,
    a: crate::framesolver::DesignMatrix,
    b: Vec<f64>,
}

fn fit_trial(res: &Resolved, entry: &ScheduleEntry, seed: u64, target: &TargetFunction) -> Result<Fit> {
    let training = draw_samples_on_stream(&res.domain, res.measure, entry.m, seed, streams::TRAINING)?;
    let a = assemble_design_matrix(&training, &entry.set, res.basis)?;
    let b = assemble_rhs(&training, |y| target.eval(y))?;
    let svd = FrameSvd::new(&a.matrix)?;
    Ok(Fit { svd, training, a, b })
}

struct ConvergeTrial {
    l2: f64,
    linf: f64,
    coef_norm: f64,
}

/// Median errors against the sample budget.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let res = cfg.resolve()?;
    let target = res.target.clone().expect("validated target");
    let schedule = build_schedule(cfg, &res)?;
    let hash = cfg.hash();
    let mut rows = cfg.header();
    rows.push_str("schedule_index,rule,n,N,M,trials_ok,trials_failed,flagged,median_l2_error,median_linf_error,median_coef_norm,seed,config_hash\n");
    let mut trial_rows = cfg.header();
    trial_rows.push_str("schedule_index,rule,trial,seed,n,N,M,status,l2_error,linf_error,coef_norm,config_hash\n");

    for entry in &schedule {
        let results: Vec<Result<ConvergeTrial>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = global_seed(cfg, entry.index, t);
                let fit = fit_trial(&res, entry, seed, &target)?;
                let sol = solve_with_svd(&fit.a, &fit.svd, &fit.b, cfg.epsilon)?;
                let eval = draw_samples_on_stream(
                    &res.domain,
                    res.measure,
                    cfg.eval_points,
                    seed,
                    streams::EVALUATION,
                )?;
                let ev = crate::framesolver::evaluate_approximant(
                    &sol.coefficients,
                    &entry.set,
                    res.basis,
                    &eval.points,
                )?;
                let (l2, linf_eval) = eval_error_stats(&target, &ev, &eval);
                let tv = crate::framesolver::evaluate_approximant(
                    &sol.coefficients,
                    &entry.set,
                    res.basis,
                    &fit.training.points,
                )?;
                let (_, linf_train) = eval_error_stats(&target, &tv, &fit.training);
                Ok(ConvergeTrial {
                    l2,
                    linf: linf_eval.max(linf_train),
                    coef_norm: sol.coefficient_l2_norm(),
                })
            })
            .collect();
        let failed = failures(&results)?;
        let ok: Vec<&ConvergeTrial> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
        let med = |f: fn(&ConvergeTrial) -> f64| lower_median(&ok.iter().map(|t| f(t)).collect::<Vec<_>>());
        let _ = writeln!(
            rows,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            entry.index,
            entry.rule,
            entry.degree,
            entry.n_card(),
            entry.m,
            ok.len(),
            failed,
            flagged(failed, cfg.trials),
            med(|t| t.l2),
            med(|t| t.linf),
            med(|t| t.coef_norm),
            cfg.seed,
            hash
        );
        for (t, r) in results.iter().enumerate() {
            let (l2, linf, cn) = match r {
                Ok(v) => (v.l2, v.linf, v.coef_norm),
                Err(_) => (f64::NAN, f64::NAN, f64::NAN),
            };
            let _ = writeln!(
                trial_rows,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                entry.index,
                entry.rule,
                t,
                global_seed(cfg, entry.index, t),
                entry.degree,
                entry.n_card(),
                entry.m,
                status(r),
                l2,
                linf,
                cn,
                hash
            );
        }
    }
    Ok(ExperimentOutput {
        files: vec![
            ("converge.csv".into(), rows),
            ("converge_trials.csv".into(), trial_rows),
        ],
    })
}

/// Volume fraction of the domain, analytic when known, else a Monte-Carlo estimate.
fn volume_fraction(cfg: &ExperimentConfig, res: &Resolved) -> Result<f64> {
    match res.domain.analytic_volume_fraction(res.measure) {
        Some(v) => Ok(v),
        None => Ok(estimate_volume_fraction_under(
            &res.domain,
            res.measure,
            1_000_000,
            cfg.seed ^ SHARED_SEED_SALT,
        )?
        .mean),
    }
}

/// Shape of one conditioning measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningTrial {
    pub epsilon: f64,
    pub report: diagnostics::ConditionReport,
}

/// Median conditioning constants against `N` for each rule and threshold.
///
/// All trials share one grid of `gram_points` Monte-Carlo points.
pub fn run_conditioning_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let res = cfg.resolve()?;
    let schedule = build_schedule(cfg, &res)?;
    let hash = cfg.hash();
    let epsilons = cfg.epsilons();
    let v = volume_fraction(cfg, &res)?;
    let grid = draw_samples_on_stream(
        &res.domain,
        res.measure,
        cfg.gram_points,
        cfg.seed ^ SHARED_SEED_SALT,
        streams::GRAM,
    )?;

    let mut rows = cfg.header();
    rows.push_str("schedule_index,N,M,rule,epsilon,c_prime,c_double_prime,c_max,seed,n,c_unregularized,mc_rel_std_err,cap,trials_ok,trials_failed,flagged,config_hash\n");
    let mut trial_rows = cfg.header();
    trial_rows.push_str("schedule_index,trial,seed,N,M,rule,epsilon,c_prime,c_double_prime,c_max,c_unregularized,mc_rel_std_err,cap,retained_rank,status,config_hash\n");

    for entry in &schedule {
        let gram = monte_carlo_gram_from_points(grid.clone(), &entry.set, res.basis)?;
        let g = gram.gram();
        let results: Vec<Result<Vec<ConditioningTrial>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = global_seed(cfg, entry.index, t);
                let training =
                    draw_samples_on_stream(&res.domain, res.measure, entry.m, seed, streams::TRAINING)?;
                let a = assemble_design_matrix(&training, &entry.set, res.basis)?;
                let svd = FrameSvd::new(&a.matrix)?;
                epsilons
                    .iter()
                    .map(|&eps| {
                        Ok(ConditioningTrial {
                            epsilon: eps,
                            report: condition_constants_with_gram(&svd, eps, &gram.h, &g, Some(seed))?,
                        })
                    })
                    .collect()
            })
            .collect();
        let failed = failures(&results)?;
        let ok: Vec<&Vec<ConditioningTrial>> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
        for (ei, &eps) in epsilons.iter().enumerate() {
            let col = |f: fn(&diagnostics::ConditionReport) -> f64| {
                lower_median(&ok.iter().map(|t| f(&t[ei].report)).collect::<Vec<_>>())
            };
            let _ = writeln!(
                rows,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                entry.index,
                entry.n_card(),
                entry.m,
                entry.rule,
                eps,
                col(|r| r.c_prime),
                col(|r| r.c_double_prime),
                col(|r| r.c_max),
                cfg.seed,
                entry.degree,
                col(|r| r.c_unregularized.unwrap_or(f64::NAN)),
                col(|r| r.mc_rel_std_err),
                universal_cap(v, eps),
                ok.len(),
                failed,
                flagged(failed, cfg.trials),
                hash
            );
        }
        for (t, r) in results.iter().enumerate() {
            let seed = global_seed(cfg, entry.index, t);
            for (ei, &eps) in epsilons.iter().enumerate() {
                let (cp, cpp, cm, cu, se, rank) = match r {
                    Ok(v) => {
                        let rep = &v[ei].report;
                        (
                            rep.c_prime,
                            rep.c_double_prime,
                            rep.c_max,
                            rep.c_unregularized.unwrap_or(f64::NAN),
                            rep.mc_rel_std_err,
                            rep.retained_rank.to_string(),
                        )
                    }
                    Err(_) => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN, String::new()),
                };
                let _ = writeln!(
                    trial_rows,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    entry.index,
                    t,
                    seed,
                    entry.n_card(),
                    entry.m,
                    entry.rule,
                    eps,
                    cp,
                    cpp,
                    cm,
                    cu,
                    se,
                    universal_cap(v, eps),
                    rank,
                    status(r),
                    hash
                );
            }
        }
    }
    Ok(ExperimentOutput {
        files: vec![
            ("conditioning.csv".into(), rows),
            ("conditioning_trials.csv".into(), trial_rows),
        ],
    })
}

/// Pointwise `|f - f_eps|` on a cell-centred `G x G` grid over the box, from
/// a single fit at the first schedule entry.
pub fn run_error_map(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let res = cfg.resolve()?;
    let target = res.target.clone().expect("validated target");
    let schedule = build_schedule(cfg, &res)?;
    let entry = &schedule[0];
    let seed = global_seed(cfg, 0, 0);
    let fit = fit_trial(&res, entry, seed, &target)?;
    let sol = solve_with_svd(&fit.a, &fit.svd, &fit.b, cfg.epsilon)?;

    let g = cfg.errormap.grid;
    let t = res.domain.half_width;
    let coord = |i: usize| -t + (2 * i + 1) as f64 * t / g as f64;
    let mut inside_points = Vec::new();
    let mut mask = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            let y = [coord(i), coord(j)];
            let inside = res.domain.contains(&y)?;
            mask.push(inside);
            if inside {
                inside_points.extend_from_slice(&y);
            }
        }
    }
    let values =
        crate::framesolver::evaluate_approximant(&sol.coefficients, &entry.set, res.basis, &inside_points)?;
    let mut rows = cfg.header();
    let _ = writeln!(
        rows,
        "# n={} N={} M={} seed={seed} sentinel={ERRORMAP_SENTINEL}",
        entry.degree,
        entry.n_card(),
        entry.m
    );
    rows.push_str("y1,y2,error\n");
    let mut k = 0;
    for i in 0..g {
        for j in 0..g {
            let (y1, y2) = (coord(i), coord(j));
            let err = if mask[i * g + j] {
                let e = (target.eval(&[y1, y2]) - values[k]).abs();
                k += 1;
                e
            } else {
                ERRORMAP_SENTINEL
            };
            let _ = writeln!(rows, "{y1},{y2},{err}");
        }
    }
    let mut sol = sol;
    sol.seed = Some(seed);
    Ok(ExperimentOutput {
        files: vec![
            ("errormap.csv".into(), rows),
            ("errormap_solution.json".into(), sol.to_json()? + "\n"),
        ],
    })
}

/// Per-trial comparison of measured quantities with the theoretical bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsTrial {
    pub l2_error: f64,
    /// `max |f - p|` over evaluation and training points.
    pub proj_linf_error: f64,
    pub proj_l2_error: f64,
    pub proj_norm: f64,
    pub c_prime: f64,
    pub c_double_prime: f64,
    pub c_max: f64,
    pub mc_rel_std_err: f64,
    /// Standard error of the Monte-Carlo `L^2` error estimate.
    pub l2_std_err: f64,
    pub thm_rhs: f64,
    pub coef_lhs: f64,
    pub coef_rhs: f64,
    pub cap: f64,
    pub trunc_l2_error: f64,
}

impl BoundsTrial {
    /// `rhs * (1 + 3 sigma) + 3 se - lhs`, nonnegative when the accuracy bound holds.
    pub fn thm_slack(&self) -> f64 {
        self.thm_rhs * (1.0 + 3.0 * self.mc_rel_std_err) + 3.0 * self.l2_std_err - self.l2_error
    }

    pub fn coef_slack(&self) -> f64 {
        self.coef_rhs - self.coef_lhs
    }

    pub fn cap_slack(&self) -> f64 {
        self.cap * (1.0 + 3.0 * self.mc_rel_std_err) - self.c_max
    }

    /// `||f - f_eps|| - ||f - T_L f_eps||`, nonnegative when truncation helps.
    pub fn trunc_slack(&self) -> f64 {
        self.l2_error - self.trunc_l2_error
    }
}

/// Budget for the truncated-estimator bound: the sample-complexity formula
/// with an estimated squared Nikolskii constant.
fn nikolskii_budget(cfg: &ExperimentConfig, res: &Resolved, entry: &ScheduleEntry) -> Result<(usize, f64)> {
    let seed = cfg.seed ^ NIKOLSKII_SEED_SALT ^ entry.index as u64;
    let gram = monte_carlo_gram(&res.domain, &entry.set, res.basis, cfg.gram_points, seed)?;
    let pool = draw_samples_on_stream(
        &res.domain,
        res.measure,
        cfg.bounds.nikolskii_points,
        seed,
        streams::CANDIDATES,
    )?;
    let est = nikolskii_from_gram(&gram, Some(&pool), &entry.set, res.basis)?;
    let m = sample_complexity_bound(
        entry.n_card(),
        NikolskiiSource::Squared(est.value * est.value),
        cfg.bounds.delta,
        cfg.bounds.gamma,
    )?;
    Ok((m as usize, est.value))
}

/// Implements the `bounds` experiment.
///
/// The accuracy bound is checked with `C` from a Gram matrix on the same
/// points that estimate the error, so both sides refer to one empirical
/// measure; `p` is the quadrature projection of `f` onto `P_Lambda`.
pub fn run_bounds(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let res = cfg.resolve()?;
    let target = res.target.clone().expect("validated target");
    let d = res.domain.dim;
    let l_bound = cfg
        .bounds
        .bound
        .or_else(|| target.sup_bound(d))
        .expect("validated bound");
    let (delta, gamma) = (cfg.bounds.delta, cfg.bounds.gamma);
    let mut schedule = build_schedule(cfg, &res)?;
    let mut nikolskii = vec![f64::NAN; schedule.len()];
    if cfg.bounds.sample_complexity {
        for (entry, nk) in schedule.iter_mut().zip(nikolskii.iter_mut()) {
            let (m, est) = nikolskii_budget(cfg, &res, entry)?;
            entry.m = m;
            *nk = est;
        }
    }
    let v = volume_fraction(cfg, &res)?;
    let eps = cfg.epsilon;
    let hash = cfg.hash();

    let mut rows = cfg.header();
    rows.push_str("schedule_index,rule,n,N,M,trials_ok,trials_failed,nikolskii_estimate,mean_sq_trunc_error,mean_sq_trunc_std_err,e_tilde_ub,trunc_rhs,trunc_slack,L,delta,gamma,thm_violations,coef_violations,cap_violations,trunc_violations,seed,config_hash\n");
    let mut trial_rows = cfg.header();
    trial_rows.push_str("schedule_index,rule,trial,seed,n,N,M,epsilon,status,l2_error,proj_linf_error,proj_l2_error,proj_norm,c_prime,c_double_prime,c_max,mc_rel_std_err,thm_rhs,thm_slack,coef_lhs,coef_rhs,coef_slack,cap,cap_slack,trunc_l2_error,trunc_slack,config_hash\n");

    for (entry, nk) in schedule.iter().zip(&nikolskii) {
        let proj = projection_coefficients(|y| target.eval(y), &entry.set, res.basis, None)?;
        if proj.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric(format!(
                "projection of `{target}` onto the basis is not finite"
            )));
        }
        let p_coef = DVector::from_column_slice(&proj.coefficients);
        let p_norm = p_coef.norm();

        let results: Vec<Result<BoundsTrial>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let seed = global_seed(cfg, entry.index, t);
                let fit = fit_trial(&res, entry, seed, &target)?;
                let sol = solve_with_svd(&fit.a, &fit.svd, &fit.b, eps)?;
                let eval = draw_samples_on_stream(
                    &res.domain,
                    res.measure,
                    cfg.eval_points,
                    seed,
                    streams::EVALUATION,
                )?;
                let k = eval.len() as f64;
                let gram = monte_carlo_gram_from_points(eval.clone(), &entry.set, res.basis)?;
                let g = gram.gram();
                let rep = condition_constants_with_gram(&fit.svd, eps, &gram.h, &g, Some(seed))?;
                // H rows are phi(z)/sqrt(K); rescale to plain evaluations
                let phi: &DMatrix<f64> = &gram.h;
                let c = DVector::from_column_slice(&sol.coefficients);
                let approx: Vec<f64> = (phi * &c).iter().map(|v| v * k.sqrt()).collect();
                let p_eval: Vec<f64> = (phi * &p_coef).iter().map(|v| v * k.sqrt()).collect();
                let f_eval: Vec<f64> = eval.rows().map(|y| target.eval(y)).collect();
                let trunc = truncate_pointwise(&approx, l_bound)?;

                let sq: Vec<f64> = f_eval.iter().zip(&approx).map(|(f, a)| (f - a).powi(2)).collect();
                let mean_sq = sq.iter().sum::<f64>() / k;
                let var_sq = sq.iter().map(|s| (s - mean_sq).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
                let l2_error = mean_sq.sqrt();
                // delta method for the square root of a Monte-Carlo mean
                let l2_std_err = if l2_error > 0.0 {
                    0.5 * (var_sq / k).sqrt() / l2_error
                } else {
                    0.0
                };
                let trunc_l2_error = (f_eval
                    .iter()
                    .zip(&trunc)
                    .map(|(f, a)| (f - a).powi(2))
                    .sum::<f64>()
                    / k)
                    .sqrt();
                let proj_l2_error = (f_eval
                    .iter()
                    .zip(&p_eval)
                    .map(|(f, p)| (f - p).powi(2))
                    .sum::<f64>()
                    / k)
                    .sqrt();
                let p_train = basis_matrix(&entry.set, res.basis, &fit.training.points, 1.0)? * &p_coef;
                let linf_train = fit
                    .training
                    .rows()
                    .zip(p_train.iter())
                    .map(|(y, p)| (target.eval(y) - p).abs())
                    .fold(0.0f64, f64::max);
                let linf_eval = f_eval
                    .iter()
                    .zip(&p_eval)
                    .map(|(f, p)| (f - p).abs())
                    .fold(0.0f64, f64::max);
                let proj_linf_error = linf_train.max(linf_eval);
                let e = proj_linf_error + eps * p_norm;
                Ok(BoundsTrial {
                    l2_error,
                    proj_linf_error,
                    proj_l2_error,
                    proj_norm: p_norm,
                    c_prime: rep.c_prime,
                    c_double_prime: rep.c_double_prime,
                    c_max: rep.c_max,
                    mc_rel_std_err: rep.mc_rel_std_err,
                    l2_std_err,
                    thm_rhs: (1.0 + rep.c_max) * e,
                    coef_lhs: sol.coefficient_l2_norm() * eps,
                    coef_rhs: e,
                    cap: universal_cap(v, eps),
                    trunc_l2_error,
                })
            })
            .collect();
        let failed = failures(&results)?;
        let ok: Vec<&BoundsTrial> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
        let count = |f: fn(&BoundsTrial) -> f64| ok.iter().filter(|t| f(t) < 0.0).count();
        let sq: Vec<f64> = ok.iter().map(|t| t.trunc_l2_error.powi(2)).collect();
        let n_ok = sq.len() as f64;
        let mean_sq = sq.iter().sum::<f64>() / n_ok;
        let se_sq = if sq.len() > 1 {
            (sq.iter().map(|s| (s - mean_sq).powi(2)).sum::<f64>() / (n_ok - 1.0) / n_ok).sqrt()
        } else {
            0.0
        };
        // projection-based upper bound on the L^2 best approximation error
        let e_tilde = lower_median(&ok.iter().map(|t| t.proj_l2_error).collect::<Vec<_>>()) + eps * p_norm;
        let trunc_rhs = 3.0 * (2.0 - delta) / (1.0 - delta) * e_tilde * e_tilde + 4.0 * l_bound * l_bound * gamma;
        let _ = writeln!(
            rows,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            entry.index,
            entry.rule,
            entry.degree,
            entry.n_card(),
            entry.m,
            ok.len(),
            failed,
            nk,
            mean_sq,
            se_sq,
            e_tilde,
            trunc_rhs,
            trunc_rhs - mean_sq,
            l_bound,
            delta,
            gamma,
            count(BoundsTrial::thm_slack),
            count(BoundsTrial::coef_slack),
            count(BoundsTrial::cap_slack),
            count(BoundsTrial::trunc_slack),
            cfg.seed,
            hash
        );
        for (t, r) in results.iter().enumerate() {
            let seed = global_seed(cfg, entry.index, t);
            let _ = write!(
                trial_rows,
                "{},{},{},{},{},{},{},{},{},",
                entry.index,
                entry.rule,
                t,
                seed,
                entry.degree,
                entry.n_card(),
                entry.m,
                eps,
                status(r)
            );
            match r {
                Ok(b) => {
                    let _ = writeln!(
                        trial_rows,
                        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                        b.l2_error,
                        b.proj_linf_error,
                        b.proj_l2_error,
                        b.proj_norm,
                        b.c_prime,
                        b.c_double_prime,
                        b.c_max,
                        b.mc_rel_std_err,
                        b.thm_rhs,
                        b.thm_slack(),
                        b.coef_lhs,
                        b.coef_rhs,
                        b.coef_slack(),
                        b.cap,
                        b.cap_slack(),
                        b.trunc_l2_error,
                        b.trunc_slack(),
                        hash
                    );
                }
                Err(_) => {
                    let _ = writeln!(trial_rows, "{}{hash}", "NaN,".repeat(17));
                }
            }
        }
    }
    Ok(ExperimentOutput {
        files: vec![
            ("bounds.csv".into(), rows),
            ("bounds_trials.csv".into(), trial_rows),
        ],
    })
}

/// Reads the data rows of an emitted CSV as `(header, rows)`, skipping `#` lines.
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .map(|h| h.split(',').map(str::to_string).collect())
        .unwrap_or_default();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

/// Column `name` of a parsed CSV as floats.
pub fn csv_column(text: &str, name: &str) -> Option<Vec<f64>> {
    let (header, rows) = parse_csv(text);
    let idx = header.iter().position(|h| h == name)?;
    Some(rows.iter().map(|r| r[idx].parse().unwrap_or(f64::NAN)).collect())
}
