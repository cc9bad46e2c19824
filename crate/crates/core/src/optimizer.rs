//! Choice of the shared antenna position along the waveguide.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocator::{check_position, sum_min_power, Allocation, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::scenario::{stream_rng, ChannelParams, UserSpec};

/// Global-best particle swarm settings for the 1-D position search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub max_iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Maximum speed, m per iteration.
    pub velocity_clamp: f64,
    /// Stop after this many consecutive iterations without improvement.
    pub stall_iterations: usize,
    /// Relative improvement of the global best below which an iteration counts as stalled.
    pub stall_tolerance: f64,
    pub seed: u64,
}

impl PsoConfig {
    /// Default settings for a waveguide of length `length`.
    pub fn for_length(length: f64) -> Self {
        Self {
            swarm_size: 30,
            max_iterations: 100,
            inertia: 0.7298,
            cognitive: 1.49618,
            social: 1.49618,
            velocity_clamp: length / 2.0,
            stall_iterations: 20,
            stall_tolerance: 1e-9,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.swarm_size < 2 {
            return bad("pso swarm size must be at least 2");
        }
        if self.max_iterations < 1 {
            return bad("pso max iterations must be at least 1");
        }
        if !(self.inertia > 0.0 && self.cognitive > 0.0 && self.social > 0.0) {
            return bad("pso coefficients must be positive");
        }
        if !(self.velocity_clamp > 0.0) {
            return bad("pso velocity clamp must be positive");
        }
        if !(self.stall_tolerance >= 0.0) {
            return bad("pso stall tolerance must be >= 0");
        }
        Ok(())
    }
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self::for_length(50.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub x_pin: f64,
    pub allocation: Allocation,
    /// Objective evaluations performed.
    pub evaluations: usize,
    /// Last iteration that improved the best value (0 = initial swarm).
    pub converged_iteration: usize,
    /// Best value after the initial swarm and after every iteration (PSO only).
    pub best_history: Vec<f64>,
}

/// Outcome of [`pso_minimize`] on an arbitrary fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoTrace {
    pub best_x: f64,
    pub best_value: f64,
    pub evaluations: usize,
    pub converged_iteration: usize,
    pub best_history: Vec<f64>,
}

/// Sum of minimum powers at `x_pin`, W.
pub fn objective(users: &[UserSpec], x_pin: f64, params: &ChannelParams) -> Result<f64> {
    check_position(x_pin, params.length)?;
    Ok(sum_min_power(users, x_pin, params, DEFAULT_TOLERANCE)?.total_power)
}

/// Global-best PSO over `[0, length]`.
///
/// Positions leaving the interval are clamped to the boundary and their
/// velocity is zeroed. The fitness of a whole swarm is evaluated in parallel,
/// while all random draws happen on one stream in particle order, so the
/// result only depends on `cfg`.
pub fn pso_minimize<F>(length: f64, cfg: &PsoConfig, fitness: F) -> Result<PsoTrace>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if !(length >= 0.0 && length.is_finite()) {
        return Err(Error::InvalidConfig(format!("search length {length} must be >= 0")));
    }
    let vmax = cfg.velocity_clamp;
    let mut rng = stream_rng(cfg.seed, 0);

    let mut pos: Vec<f64> = (0..cfg.swarm_size).map(|_| rng.gen::<f64>() * length).collect();
    let mut vel: Vec<f64> = (0..cfg.swarm_size).map(|_| rng.gen_range(-vmax..=vmax)).collect();
    let eval = |xs: &[f64]| xs.par_iter().map(|&x| fitness(x)).collect::<Result<Vec<f64>>>();

    let mut fit = eval(&pos)?;
    let mut evaluations = fit.len();
    let mut best_pos = pos.clone();
    let mut best_fit = fit.clone();
    let (mut g, mut g_fit) = (pos[0], fit[0]);
    for (&x, &f) in pos.iter().zip(&fit) {
        if f < g_fit {
            g = x;
            g_fit = f;
        }
    }
    let mut history = vec![g_fit];
    let mut converged_iteration = 0;
    let mut stalled = 0;

    for iter in 1..=cfg.max_iterations {
        for i in 0..cfg.swarm_size {
            let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
            let v = cfg.inertia * vel[i]
                + cfg.cognitive * r1 * (best_pos[i] - pos[i])
                + cfg.social * r2 * (g - pos[i]);
            vel[i] = v.clamp(-vmax, vmax);
            pos[i] += vel[i];
            if pos[i] < 0.0 || pos[i] > length {
                pos[i] = pos[i].clamp(0.0, length);
                vel[i] = 0.0;
            }
        }
        fit = eval(&pos)?;
        evaluations += fit.len();

        let previous = g_fit;
        for i in 0..cfg.swarm_size {
            if fit[i] < best_fit[i] {
                best_fit[i] = fit[i];
                best_pos[i] = pos[i];
            }
            if fit[i] < g_fit {
                g_fit = fit[i];
                g = pos[i];
            }
        }
        history.push(g_fit);

        if previous - g_fit > cfg.stall_tolerance * previous.abs() {
            stalled = 0;
            converged_iteration = iter;
        } else {
            if g_fit < previous {
                converged_iteration = iter;
            }
            stalled += 1;
            if stalled >= cfg.stall_iterations {
                break;
            }
        }
    }

    Ok(PsoTrace { best_x: g, best_value: g_fit, evaluations, converged_iteration, best_history: history })
}

/// PSO over the antenna position with the sum-power objective.
pub fn pso_optimize(users: &[UserSpec], params: &ChannelParams, cfg: &PsoConfig) -> Result<OptimizationResult> {
    let trace = pso_minimize(params.length, cfg, |x| objective(users, x, params))?;
    let allocation = sum_min_power(users, trace.best_x, params, DEFAULT_TOLERANCE)?;
    Ok(OptimizationResult {
        x_pin: trace.best_x,
        allocation,
        evaluations: trace.evaluations,
        converged_iteration: trace.converged_iteration,
        best_history: trace.best_history,
    })
}

/// Grid `{0, step, 2 step, ...}` over `[0, length]`, always ending at `length`.
///
/// When `length / step` is (numerically) an integer `n`, point `i` is computed
/// as `i * length / n`, so grids whose steps divide each other share their
/// common points bit for bit.
pub fn grid_points(length: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= length) {
        return Err(Error::InvalidConfig(format!("grid step {step} must lie in (0, {length}]")));
    }
    let ratio = length / step;
    let rounded = ratio.round();
    if (ratio - rounded).abs() < 1e-9 * ratio.max(1.0) {
        let n = rounded as usize;
        return Ok((0..=n).map(|i| i as f64 * length / n as f64).collect());
    }
    let n = ratio.floor() as usize;
    let mut pts: Vec<f64> = (0..=n).map(|i| i as f64 * step).filter(|&x| x < length).collect();
    pts.push(length);
    Ok(pts)
}

/// Exhaustive search over [`grid_points`]; ties go to the smallest position.
pub fn grid_search(users: &[UserSpec], params: &ChannelParams, step: f64) -> Result<OptimizationResult> {
    let pts = grid_points(params.length, step)?;
    let values = pts
        .par_iter()
        .map(|&x| objective(users, x, params))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    let x_pin = pts[best];
    Ok(OptimizationResult {
        x_pin,
        allocation: sum_min_power(users, x_pin, params, DEFAULT_TOLERANCE)?,
        evaluations: pts.len(),
        converged_iteration: 0,
        best_history: Vec::new(),
    })
}

/// Conventional antenna fixed at the waveguide feed, `x = 0`.
pub fn fixed_baseline(users: &[UserSpec], params: &ChannelParams) -> Result<OptimizationResult> {
    Ok(OptimizationResult {
        x_pin: 0.0,
        allocation: sum_min_power(users, 0.0, params, DEFAULT_TOLERANCE)?,
        evaluations: 1,
        converged_iteration: 0,
        best_history: Vec::new(),
    })
}
