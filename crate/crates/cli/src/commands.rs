use std::fmt;
use std::fs;
use std::path::Path;

use pinch_core::experiments::{comparison_to_csv, records_to_csv};
use pinch_core::oracle::empirical_outage;
use pinch_core::{
    derive_channel_params, generate_users, run_sweep, solve_user, summarize, ChannelParams, ScenarioFile, Scheme,
    SweepSpec, UserSpec, DEFAULT_TOLERANCE,
};
use serde::{Deserialize, Serialize};

use crate::{Cli, Command, Common, OracleArgs, SolveArgs, SweepArgs};

/// Failure of a subcommand, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    Config(String),
    /// Solver or I/O failure (exit 1).
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "{m}"),
        }
    }
}

impl From<pinch_core::Error> for CliError {
    fn from(e: pinch_core::Error) -> Self {
        if e.is_config_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Solver(e.to_string())
        }
    }
}

/// Allocation printed by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub scheme: Scheme,
    pub master_seed: u64,
    pub x_pin: f64,
    pub total_power_w: f64,
    pub evaluations: usize,
    pub users: Vec<UserReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserReport {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub target_rate: f64,
    pub outage_cap: f64,
    pub b: f64,
    pub c: f64,
    pub sphere_radius: f64,
    pub power_w: f64,
    pub achieved_outage_fraction: f64,
}

/// Estimate printed by `oracle`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub master_seed: u64,
    pub user_index: usize,
    pub x_pin: f64,
    pub power_w: f64,
    pub outage_cap: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

struct Loaded {
    file: ScenarioFile,
    params: ChannelParams,
    users: Vec<UserSpec>,
}

fn load(common: &Common) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let mut file = ScenarioFile::from_json(&text)?;
    if let Some(seed) = common.seed {
        file.master_seed = seed;
    }
    let params = derive_channel_params(&file.radio())?;
    let users = generate_users(&file.scenario(), file.master_seed)?;
    Ok(Loaded { file, params, users })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Solver(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PINCH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("PINCH_THREADS={raw:?} is not a non-negative integer")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Solver(e.to_string()))?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let verbose = cli.verbose > 0;
    match cli.command {
        Command::Solve(args) => solve(args, verbose),
        Command::Sweep(args) => sweep(args, verbose),
        Command::Oracle(args) => oracle(args, verbose),
    }
}

fn solve(args: SolveArgs, verbose: bool) -> Result<(), CliError> {
    let Loaded { file, params, users } = load(&args.common)?;
    let step = file.grid_step_m.unwrap_or(pinch_core::experiments::DEFAULT_GRID_STEP);
    if verbose {
        eprintln!("solving {} users with scheme {} (seed {})", users.len(), args.scheme, file.master_seed);
    }
    let res = args.scheme.run(&users, &params, &file.pso_config(), step)?;
    let report = SolveReport {
        scheme: args.scheme,
        master_seed: file.master_seed,
        x_pin: res.x_pin,
        total_power_w: res.allocation.total_power,
        evaluations: res.evaluations,
        users: users
            .iter()
            .zip(&res.allocation.per_user)
            .enumerate()
            .map(|(index, (u, s))| UserReport {
                index,
                x: u.x,
                y: u.y,
                radius: u.radius,
                target_rate: u.target_rate,
                outage_cap: u.outage_cap,
                b: s.b,
                c: s.c,
                sphere_radius: s.sphere_radius,
                power_w: s.power,
                achieved_outage_fraction: s.achieved_outage_fraction,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Solver(e.to_string()))?;
    text.push('\n');
    write_output(args.out.as_deref(), &text)
}

fn sweep(args: SweepArgs, verbose: bool) -> Result<(), CliError> {
    let Loaded { file, params, .. } = load(&args.common)?;
    let variable = args.sweep.parse()?;
    let mut spec = SweepSpec::new(variable, file.scenario(), params);
    spec.pso = file.pso_config();
    if let Some(step) = file.grid_step_m {
        spec.grid_step = step;
    }
    if let Some(n) = args.realizations.or(file.realizations) {
        spec.realizations = n;
    }
    if let Some(values) = args.values {
        spec.values = values;
    }
    if let Some(schemes) = args.schemes {
        spec.schemes = schemes;
    }
    if verbose {
        eprintln!(
            "sweeping {} over {:?}: {} realizations, schemes {:?}",
            spec.variable, spec.values, spec.realizations, spec.schemes
        );
    }
    let records = run_sweep(&spec)?;
    write_output(Some(&args.out), &records_to_csv(&records))?;
    if let Some(path) = args.summary {
        let rows = summarize(&records)?;
        write_output(Some(&path), &comparison_to_csv(&rows))?;
    }
    Ok(())
}

fn oracle(args: OracleArgs, verbose: bool) -> Result<(), CliError> {
    let Loaded { file, params, users } = load(&args.common)?;
    let user = users.get(args.user_index).ok_or_else(|| {
        CliError::Config(format!("user index {} out of range (K = {})", args.user_index, users.len()))
    })?;
    if args.samples == 0 {
        return Err(CliError::Config("-n must be at least 1".into()));
    }
    pinch_core::allocator::check_position(args.x_pin, params.length)?;
    let power = match args.power {
        Some(p) if p >= 0.0 => p,
        Some(p) => return Err(CliError::Config(format!("power {p} must be >= 0"))),
        None => solve_user(user, args.x_pin, &params, DEFAULT_TOLERANCE)?.power,
    };
    if verbose {
        eprintln!("sampling {} true locations of user {}", args.samples, args.user_index);
    }
    let est = empirical_outage(user, args.x_pin, power, &params, args.samples, file.master_seed);
    let report = OracleReport {
        master_seed: file.master_seed,
        user_index: args.user_index,
        x_pin: args.x_pin,
        power_w: power,
        outage_cap: user.outage_cap,
        estimate: est.value,
        std_error: est.std_error,
        samples: est.sample_count,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Solver(e.to_string()))?;
    text.push('\n');
    write_output(None, &text)
}
