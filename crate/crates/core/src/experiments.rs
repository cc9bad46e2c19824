//! Seeded parameter sweeps comparing the PSO, exhaustive-search and
//! fixed-antenna schemes.
//!
//! Realization `i` of a sweep draws its users from stream `i` of the master
//! seed and runs PSO with stream `i` of the PSO seed. Both are shared by every
//! scheme and every swept value, so differences between records come only
//! from the scheme or the swept value (common random numbers).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{fixed_baseline, grid_search, pso_optimize, OptimizationResult, PsoConfig};
use crate::scenario::{derive_seed, generate_users, ChannelParams, ScenarioConfig, UserSpec};

/// Default exhaustive-search step, m.
pub const DEFAULT_GRID_STEP: f64 = 0.01;

/// Default number of realizations per sweep point.
pub const DEFAULT_REALIZATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    TargetRate,
    UncertaintyRadius,
    OutageCap,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::TargetRate => "target_rate",
            SweepVariable::UncertaintyRadius => "uncertainty_radius",
            SweepVariable::OutageCap => "outage_cap",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVariable::TargetRate => (1..=7).map(f64::from).collect(),
            SweepVariable::UncertaintyRadius => (1..=6).map(f64::from).collect(),
            SweepVariable::OutageCap => vec![0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
        }
    }

    fn apply(self, user: &mut UserSpec, value: f64) {
        match self {
            SweepVariable::TargetRate => user.target_rate = value,
            SweepVariable::UncertaintyRadius => user.radius = value,
            SweepVariable::OutageCap => user.outage_cap = value,
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "target_rate" => Ok(SweepVariable::TargetRate),
            "uncertainty_radius" => Ok(SweepVariable::UncertaintyRadius),
            "outage_cap" => Ok(SweepVariable::OutageCap),
            _ => Err(Error::InvalidConfig(format!(
                "unknown sweep variable {s:?} (expected target_rate, uncertainty_radius or outage_cap)"
            ))),
        }
    }
}

/// Antenna placement scheme. The declaration order is the CSV row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Pso,
    Grid,
    Fixed,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Pso, Scheme::Grid, Scheme::Fixed];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Pso => "pso",
            Scheme::Grid => "grid",
            Scheme::Fixed => "fixed",
        }
    }

    /// Runs this scheme on one user population.
    pub fn run(
        self,
        users: &[UserSpec],
        params: &ChannelParams,
        pso: &PsoConfig,
        grid_step: f64,
    ) -> Result<OptimizationResult> {
        match self {
            Scheme::Pso => pso_optimize(users, params, pso),
            Scheme::Grid => grid_search(users, params, grid_step),
            Scheme::Fixed => fixed_baseline(users, params),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pso" => Ok(Scheme::Pso),
            "grid" => Ok(Scheme::Grid),
            "fixed" => Ok(Scheme::Fixed),
            _ => Err(Error::InvalidConfig(format!("unknown scheme {s:?} (expected pso, grid or fixed)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// Strictly ascending swept values.
    pub values: Vec<f64>,
    pub realizations: usize,
    pub base: ScenarioConfig,
    pub schemes: Vec<Scheme>,
    pub params: ChannelParams,
    pub pso: PsoConfig,
    pub grid_step: f64,
}

impl SweepSpec {
    /// Sweep of `variable` over its default values with every scheme.
    pub fn new(variable: SweepVariable, base: ScenarioConfig, params: ChannelParams) -> Self {
        Self {
            variable,
            values: variable.default_values(),
            realizations: DEFAULT_REALIZATIONS,
            base,
            schemes: Scheme::ALL.to_vec(),
            params,
            pso: PsoConfig::for_length(params.length),
            grid_step: DEFAULT_GRID_STEP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one value".into()));
        }
        if !self.values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig("sweep values must be strictly ascending".into()));
        }
        if self.realizations == 0 {
            return Err(Error::InvalidConfig("sweep needs at least one realization".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one scheme".into()));
        }
        self.base.validate()?;
        self.pso.validate()
    }

    /// Seed of the user population of realization `i`.
    pub fn realization_seed(&self, i: usize) -> u64 {
        derive_seed(self.base.master_seed, i as u64)
    }

    /// Users of realization `i` with the swept field set to `value`.
    pub fn users(&self, i: usize, value: f64) -> Result<Vec<UserSpec>> {
        let mut users = generate_users(&self.base, self.realization_seed(i))?;
        for u in &mut users {
            self.variable.apply(u, value);
        }
        Ok(users)
    }

    /// PSO settings of realization `i`.
    pub fn pso_for(&self, i: usize) -> PsoConfig {
        PsoConfig { seed: derive_seed(self.pso.seed, i as u64), ..self.pso }
    }

    fn schemes_in_order(&self) -> Vec<Scheme> {
        let mut s = self.schemes.clone();
        s.sort();
        s.dedup();
        s
    }
}

/// One CSV row: a scheme's mean total power at one swept value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub swept_variable: SweepVariable,
    pub value: f64,
    pub mean_total_power: f64,
    pub realization_count: usize,
    pub master_seed: u64,
}

/// One scheme on one realization at one swept value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRun {
    pub scheme: Scheme,
    pub value: f64,
    pub realization: usize,
    pub x_pin: f64,
    pub total_power: f64,
    pub per_user_power: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    /// Ordered by scheme, then value, then realization.
    pub runs: Vec<RealizationRun>,
}

impl SweepOutcome {
    /// Runs of `scheme` at the value with index `value_index`, by realization.
    pub fn runs_for(&self, scheme: Scheme, value: f64) -> Vec<&RealizationRun> {
        self.runs.iter().filter(|r| r.scheme == scheme && r.value == value).collect()
    }
}

/// Runs the sweep and keeps every per-realization result.
pub fn run_sweep_detailed(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let schemes = spec.schemes_in_order();
    let jobs: Vec<(Scheme, f64, usize)> = schemes
        .iter()
        .flat_map(|&s| {
            spec.values
                .iter()
                .flat_map(move |&v| (0..spec.realizations).map(move |i| (s, v, i)))
        })
        .collect();

    let runs = jobs
        .par_iter()
        .map(|&(scheme, value, i)| {
            let context = |e: Error| Error::Sweep {
                scheme: scheme.to_string(),
                variable: spec.variable.to_string(),
                value,
                realization: i,
                source: Box::new(e),
            };
            let users = spec.users(i, value).map_err(context)?;
            let res = scheme
                .run(&users, &spec.params, &spec.pso_for(i), spec.grid_step)
                .map_err(context)?;
            Ok(RealizationRun {
                scheme,
                value,
                realization: i,
                x_pin: res.x_pin,
                total_power: res.allocation.total_power,
                per_user_power: res.allocation.per_user.iter().map(|u| u.power).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let records = runs
        .chunks(spec.realizations)
        .map(|chunk| {
            let total: f64 = chunk.iter().map(|r| r.total_power).sum();
            SweepRecord {
                scheme: chunk[0].scheme,
                swept_variable: spec.variable,
                value: chunk[0].value,
                mean_total_power: total / chunk.len() as f64,
                realization_count: chunk.len(),
                master_seed: spec.base.master_seed,
            }
        })
        .collect();
    Ok(SweepOutcome { records, runs })
}

/// Mean total power per scheme and swept value.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_sweep_detailed(spec).map(|o| o.records)
}

pub const SWEEP_CSV_HEADER: &str = "scheme,swept_variable,value,mean_total_power_w,realizations,master_seed";

pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.scheme, r.swept_variable, r.value, r.mean_total_power, r.realization_count, r.master_seed
        ));
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let bad = |line: usize, what: &str| Error::InvalidConfig(format!("sweep csv line {line}: {what}"));
    let mut lines = text.lines();
    if lines.next() != Some(SWEEP_CSV_HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(i + 2, "expected 6 fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2, "bad number"));
            Ok(SweepRecord {
                scheme: f[0].parse()?,
                swept_variable: f[1].parse()?,
                value: num(f[2])?,
                mean_total_power: num(f[3])?,
                realization_count: f[4].parse().map_err(|_| bad(i + 2, "bad count"))?,
                master_seed: f[5].parse().map_err(|_| bad(i + 2, "bad seed"))?,
            })
        })
        .collect()
}

/// Ratio of two schemes' mean powers at one swept value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub swept_variable: SweepVariable,
    pub value: f64,
    pub fixed_over_pso: Option<f64>,
    pub pso_over_grid: Option<f64>,
}

fn check_consistent(records: &[SweepRecord]) -> Result<()> {
    let first = records
        .first()
        .ok_or_else(|| Error::MismatchedRecords("no records".into()))?;
    for r in records {
        if r.swept_variable != first.swept_variable {
            return Err(Error::MismatchedRecords("different swept variables".into()));
        }
        if r.realization_count != first.realization_count || r.master_seed != first.master_seed {
            return Err(Error::MismatchedRecords("different realizations or seeds".into()));
        }
    }
    Ok(())
}

fn mean_of(records: &[SweepRecord], scheme: Scheme, value: f64) -> Option<f64> {
    records
        .iter()
        .find(|r| r.scheme == scheme && r.value == value)
        .map(|r| r.mean_total_power)
}

/// `numerator / denominator` mean power at every swept value.
pub fn scheme_ratio(records: &[SweepRecord], numerator: Scheme, denominator: Scheme) -> Result<Vec<(f64, f64)>> {
    check_consistent(records)?;
    let values: Vec<f64> = records.iter().filter(|r| r.scheme == numerator).map(|r| r.value).collect();
    let den_count = records.iter().filter(|r| r.scheme == denominator).count();
    if values.is_empty() || den_count != values.len() {
        return Err(Error::MismatchedRecords(format!("{numerator} and {denominator} cover different values")));
    }
    values
        .into_iter()
        .map(|v| {
            let num = mean_of(records, numerator, v);
            let den = mean_of(records, denominator, v);
            match (num, den) {
                (Some(n), Some(d)) => Ok((v, n / d)),
                _ => Err(Error::MismatchedRecords(format!("no {denominator} record at value {v}"))),
            }
        })
        .collect()
}

/// Per-value `fixed/pso` and `pso/grid` ratios, where both schemes are present.
pub fn summarize(records: &[SweepRecord]) -> Result<Vec<ComparisonRow>> {
    check_consistent(records)?;
    let mut schemes: Vec<Scheme> = records.iter().map(|r| r.scheme).collect();
    schemes.sort();
    schemes.dedup();
    if schemes.len() < 2 {
        return Err(Error::MismatchedRecords("need records from at least two schemes".into()));
    }
    let mut values: Vec<f64> = records.iter().map(|r| r.value).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    for &s in &schemes {
        if values.iter().any(|&v| mean_of(records, s, v).is_none()) {
            return Err(Error::MismatchedRecords(format!("{s} records do not cover every value")));
        }
    }
    let ratio = |num: Scheme, den: Scheme, v: f64| Some(mean_of(records, num, v)? / mean_of(records, den, v)?);
    Ok(values
        .into_iter()
        .map(|v| ComparisonRow {
            swept_variable: records[0].swept_variable,
            value: v,
            fixed_over_pso: ratio(Scheme::Fixed, Scheme::Pso, v),
            pso_over_grid: ratio(Scheme::Pso, Scheme::Grid, v),
        })
        .collect())
}

pub fn comparison_to_csv(rows: &[ComparisonRow]) -> String {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut out = String::from("swept_variable,value,fixed_over_pso,pso_over_grid\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.swept_variable,
            r.value,
            opt(r.fixed_over_pso),
            opt(r.pso_over_grid)
        ));
    }
    out
}
