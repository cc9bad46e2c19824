//! Per-user minimum power under the outage constraint, and the multi-user sum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, CoverageProblem};
use crate::scenario::{ChannelParams, UserSpec};

/// Default bisection stopping width, m.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Solution of one user's subproblem at a fixed antenna position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserSolution {
    /// Ground distance from the antenna projection to the estimated position, m.
    pub b: f64,
    /// Ground coverage radius, m.
    pub c: f64,
    /// Equal-rate sphere radius, m.
    pub sphere_radius: f64,
    /// Minimum transmit power, W.
    pub power: f64,
    /// Outage fraction of the uncertainty disk at `c`.
    pub achieved_outage_fraction: f64,
}

/// Antenna position with the resulting per-user powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub x_pin: f64,
    pub per_user: Vec<UserSolution>,
    /// Sum of per-user powers, W.
    pub total_power: f64,
}

pub fn check_position(x_pin: f64, length: f64) -> Result<()> {
    if (0.0..=length).contains(&x_pin) {
        Ok(())
    } else {
        Err(Error::PositionOutOfRange { x_pin, length })
    }
}

/// Ground distance between `(x_pin, 0)` and the user's estimated position.
pub fn center_distance(user: &UserSpec, x_pin: f64) -> f64 {
    (x_pin - user.x).hypot(user.y)
}

/// Smallest coverage radius whose outage fraction does not exceed `eps`.
///
/// The outage area is nonincreasing in `c`, so the root is bracketed by
/// `[max(b - r, 0), b + r]`. The first split is taken at `c = b`, which keeps
/// the usual `[b, b + r]` bracket whenever the outage at `b` still exceeds the
/// target. Bisection then continues until the bracket is at most `tol` wide,
/// and the upper end is returned, so the result always satisfies the
/// constraint. Every `eps` sees the same sequence of split points, which makes
/// the result exactly monotone in `eps`.
pub fn solve_coverage_radius(b: f64, r: f64, eps: f64, tol: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::UnsupportedThreshold(eps));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("uncertainty radius {r} must be positive")));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!("center distance {b} must be >= 0")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }

    let target = eps * PI * r * r;
    let area = |c: f64| geometry::outage_area(&CoverageProblem { b, r, c });

    let (mut lo, mut hi) = if area(b)? > target { (b, b + r) } else { ((b - r).max(0.0), b) };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if area(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Minimum power meeting `target_rate` at distance `sphere_radius`, W.
pub fn min_power(target_rate: f64, sphere_radius: f64, params: &ChannelParams) -> f64 {
    rate_factor(target_rate) * sphere_radius * sphere_radius * params.noise_power / params.eta
}

/// `2^rate - 1`.
fn rate_factor(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

/// Best antenna position for a lone user: its estimated x, clamped to the waveguide.
pub fn optimal_position_single(user: &UserSpec, length: f64) -> f64 {
    user.x.clamp(0.0, length)
}

/// Solves one user's subproblem at antenna position `x_pin`.
pub fn solve_user(user: &UserSpec, x_pin: f64, params: &ChannelParams, tol: f64) -> Result<UserSolution> {
    check_position(x_pin, params.length)?;
    user.validate()?;
    let b = center_distance(user, x_pin);
    let (c, achieved) = if user.radius == 0.0 {
        (b, 0.0)
    } else {
        let c = solve_coverage_radius(b, user.radius, user.outage_cap, tol)?;
        (c, geometry::outage_fraction(&CoverageProblem { b, r: user.radius, c })?)
    };
    let sphere_radius = geometry::sphere_radius(c, params.height);
    Ok(UserSolution {
        b,
        c,
        sphere_radius,
        power: min_power(user.target_rate, sphere_radius, params),
        achieved_outage_fraction: achieved,
    })
}

/// Independent per-user solutions at a shared antenna position.
pub fn sum_min_power(users: &[UserSpec], x_pin: f64, params: &ChannelParams, tol: f64) -> Result<Allocation> {
    check_position(x_pin, params.length)?;
    let per_user = users
        .iter()
        .map(|u| solve_user(u, x_pin, params, tol))
        .collect::<Result<Vec<_>>>()?;
    let total_power = per_user.iter().map(|s| s.power).sum();
    Ok(Allocation { x_pin, per_user, total_power })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{derive_channel_params, generate_users, RadioConfig, ScenarioConfig};
    use proptest::prelude::*;

    fn params() -> ChannelParams {
        derive_channel_params(&RadioConfig::default()).unwrap()
    }

    fn user(x: f64, y: f64) -> UserSpec {
        UserSpec { x, y, radius: 3.0, target_rate: 3.0, outage_cap: 0.01 }
    }

    fn frac(b: f64, r: f64, c: f64) -> f64 {
        geometry::outage_fraction(&CoverageProblem { b, r, c }).unwrap()
    }

    #[test]
    fn center_distance_examples() {
        assert_eq!(center_distance(&user(7.0, 0.0), 7.0), 0.0);
        assert_eq!(center_distance(&user(7.0, 4.5), 7.0), 4.5);
        assert_eq!(center_distance(&user(3.0, 4.0), 0.0), 5.0);
    }

    #[test]
    fn concentric_closed_form() {
        let c = solve_coverage_radius(0.0, 3.0, 0.19, 1e-9).unwrap();
        assert!((c - 2.7).abs() < 2e-9, "c = {c}");
    }

    #[test]
    fn tiny_eps_needs_full_cover() {
        let c = solve_coverage_radius(10.0, 3.0, 1e-12, 1e-9).unwrap();
        assert!((c - 13.0).abs() < 1e-3, "c = {c}");
        assert!(frac(10.0, 3.0, c) <= 1e-12);
    }

    #[test]
    fn rejects_bad_thresholds() {
        for eps in [0.0, -0.1, 0.51, f64::NAN] {
            assert!(matches!(solve_coverage_radius(1.0, 1.0, eps, 1e-6), Err(Error::UnsupportedThreshold(_))));
        }
        assert!(solve_coverage_radius(1.0, 0.0, 0.1, 1e-6).is_err());
        assert!(solve_coverage_radius(1.0, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn root_never_below_b_for_supported_caps() {
        // A coverage circle through the disk centre leaves more than half of
        // the disk uncovered, so with eps <= 0.5 the first split always keeps [b, b + r].
        for &(b, r) in &[(0.5, 3.0), (2.0, 3.0), (3.0, 3.0), (10.0, 3.0), (100.0, 0.1)] {
            assert!(frac(b, r, b) > 0.5);
            let c = solve_coverage_radius(b, r, 0.5, 1e-9).unwrap();
            assert!(c >= b && (frac(b, r, c) - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn min_power_examples() {
        let p = params();
        assert_eq!(min_power(0.0, 30.0, &p), 0.0);
        let a = min_power(3.0, 10.0, &p);
        let b = min_power(3.0, 20.0, &p);
        assert!((b / a - 4.0).abs() < 1e-12);
        let fixed = ChannelParams { eta: 7.26e-7, noise_power: 3.981e-13, height: 3.0, length: 50.0 };
        // 7 * 900 * 3.981e-13 / 7.26e-7 = 3.4545e-3
        assert!((min_power(3.0, 30.0, &fixed) - 3.4545e-3).abs() < 1e-6);
        // Same value with the exact constants: 3.45490e-3
        assert!((min_power(3.0, 30.0, &p) - 3.45490e-3).abs() < 1e-7);
    }

    #[test]
    fn single_user_placement() {
        assert_eq!(optimal_position_single(&user(60.0, 1.0), 50.0), 50.0);
        assert_eq!(optimal_position_single(&user(30.0, 1.0), 50.0), 30.0);
        assert_eq!(optimal_position_single(&user(0.0, 1.0), 50.0), 0.0);
    }

    #[test]
    fn vanishing_radius_limit() {
        let p = params();
        let mut u = user(30.0, 10.0);
        let expected = 7.0 * (100.0 + 9.0) * p.noise_power / p.eta;
        u.radius = 0.0;
        let exact = solve_user(&u, 30.0, &p, 1e-9).unwrap();
        assert!(((exact.power - expected) / expected).abs() < 1e-12);
        u.radius = 1e-6;
        let near = solve_user(&u, 30.0, &p, 1e-12).unwrap();
        assert!(((near.power - expected) / expected).abs() < 1e-6);
    }

    #[test]
    fn solve_user_is_deterministic_and_checked() {
        let p = params();
        let a = solve_user(&user(12.0, 7.0), 20.0, &p, DEFAULT_TOLERANCE).unwrap();
        let b = solve_user(&user(12.0, 7.0), 20.0, &p, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(a, b);
        assert!(a.achieved_outage_fraction <= 0.01);
        assert!(matches!(
            solve_user(&user(12.0, 7.0), 50.5, &p, DEFAULT_TOLERANCE),
            Err(Error::PositionOutOfRange { .. })
        ));
        assert!(solve_user(&user(12.0, 7.0), -0.1, &p, DEFAULT_TOLERANCE).is_err());
    }

    #[test]
    fn sum_is_additive() {
        let p = params();
        let users = generate_users(&ScenarioConfig::default(), 42).unwrap();
        let all = sum_min_power(&users, 25.0, &p, DEFAULT_TOLERANCE).unwrap();
        let separate: f64 = users
            .iter()
            .map(|u| solve_user(u, 25.0, &p, DEFAULT_TOLERANCE).unwrap().power)
            .sum();
        assert_eq!(all.total_power, separate);
        let (a, b) = users.split_at(2);
        let ta = sum_min_power(a, 25.0, &p, DEFAULT_TOLERANCE).unwrap().total_power;
        let tb = sum_min_power(b, 25.0, &p, DEFAULT_TOLERANCE).unwrap().total_power;
        assert!(((ta + tb) - all.total_power).abs() <= 1e-15 * all.total_power);
        let one = sum_min_power(&users[..1], 25.0, &p, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(one.total_power, solve_user(&users[0], 25.0, &p, DEFAULT_TOLERANCE).unwrap().power);
    }

    proptest! {
        #[test]
        fn bracket_and_feasibility(b in 0.0f64..80.0, r in 0.05f64..10.0, eps in 1e-4f64..=0.5) {
            let c = solve_coverage_radius(b, r, eps, DEFAULT_TOLERANCE).unwrap();
            prop_assert!(c >= (b - r).max(0.0) && c <= b + r);
            prop_assert!(frac(b, r, c) <= eps);
        }

        #[test]
        fn power_nonincreasing_in_eps(x in 0.0f64..120.0, y in 0.0f64..20.0, e1 in 1e-3f64..=0.5, e2 in 1e-3f64..=0.5) {
            let p = params();
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let mut u = user(x, y);
            u.outage_cap = lo;
            let strict = solve_user(&u, 25.0, &p, DEFAULT_TOLERANCE).unwrap().power;
            u.outage_cap = hi;
            let loose = solve_user(&u, 25.0, &p, DEFAULT_TOLERANCE).unwrap().power;
            prop_assert!(loose <= strict);
        }

        #[test]
        fn power_ratio_follows_rate(x in 0.0f64..120.0, y in 0.0f64..20.0, r1 in 0.1f64..8.0, r2 in 0.1f64..8.0) {
            let p = params();
            let mut u = user(x, y);
            u.target_rate = r1;
            let p1 = solve_user(&u, 10.0, &p, DEFAULT_TOLERANCE).unwrap().power;
            u.target_rate = r2;
            let p2 = solve_user(&u, 10.0, &p, DEFAULT_TOLERANCE).unwrap().power;
            let want = (r1.exp2() - 1.0) / (r2.exp2() - 1.0);
            prop_assert!(((p1 / p2) / want - 1.0).abs() < 1e-12);
        }
    }
}
