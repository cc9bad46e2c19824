//! System parameters, channel constants and seeded user populations.
//!
//! Every random quantity in the crate is drawn from a [`ChaCha8Rng`] seeded
//! through [`derive_seed`], so a `(master_seed, stream)` pair always names the
//! same random sequence regardless of how work is scheduled across threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::PsoConfig;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Radio-level description of a deployment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub waveguide_height_m: f64,
    pub waveguide_length_m: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 28e9,
            bandwidth_hz: 100e6,
            noise_psd_dbm_hz: -174.0,
            waveguide_height_m: 3.0,
            waveguide_length_m: 50.0,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        positive("carrier_frequency_hz", self.carrier_frequency_hz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("waveguide_height_m", self.waveguide_height_m)?;
        positive("waveguide_length_m", self.waveguide_length_m)?;
        if !self.noise_psd_dbm_hz.is_finite() {
            return Err(Error::InvalidConfig("noise_psd_dbm_hz must be finite".into()));
        }
        Ok(())
    }
}

/// Physical constants entering the rate expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Free-space constant `lambda^2 / (16 pi^2)`, m^2.
    pub eta: f64,
    /// Receiver noise power, W.
    pub noise_power: f64,
    /// Waveguide height above the ground plane, m.
    pub height: f64,
    /// Waveguide length, m.
    pub length: f64,
}

/// Estimated user position with its location-uncertainty disk and QoS target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserSpec {
    pub x: f64,
    pub y: f64,
    /// Radius of the uncertainty disk, m.
    pub radius: f64,
    /// Target spectral efficiency, bps/Hz.
    pub target_rate: f64,
    /// Maximum outage probability.
    pub outage_cap: f64,
}

impl UserSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite()) {
            return Err(Error::InvalidConfig("user position must be finite".into()));
        }
        if self.x < 0.0 {
            return Err(Error::InvalidConfig(format!("user x = {} must be >= 0", self.x)));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidConfig(format!("uncertainty radius {} must be >= 0", self.radius)));
        }
        if !(self.target_rate >= 0.0 && self.target_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!("target rate {} must be >= 0", self.target_rate)));
        }
        if !(self.outage_cap > 0.0 && self.outage_cap <= 0.5) {
            return Err(Error::UnsupportedThreshold(self.outage_cap));
        }
        Ok(())
    }
}

/// Parameters of a random user population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub num_users: usize,
    pub region_length: f64,
    pub region_width: f64,
    pub uncertainty_radius: f64,
    pub target_rate: f64,
    pub outage_cap: f64,
    pub master_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_users: 5,
            region_length: 120.0,
            region_width: 20.0,
            uncertainty_radius: 3.0,
            target_rate: 3.0,
            outage_cap: 0.01,
            master_seed: 42,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 {
            return Err(Error::InvalidConfig("num_users must be at least 1".into()));
        }
        positive("region_length_m", self.region_length)?;
        positive("region_width_m", self.region_width)?;
        self.template_user(0.0, 0.0).validate()
    }

    fn template_user(&self, x: f64, y: f64) -> UserSpec {
        UserSpec {
            x,
            y,
            radius: self.uncertainty_radius,
            target_rate: self.target_rate,
            outage_cap: self.outage_cap,
        }
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")))
    }
}

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Derives `eta` and the noise power from radio-level inputs.
pub fn derive_channel_params(cfg: &RadioConfig) -> Result<ChannelParams> {
    cfg.validate()?;
    let wavelength = SPEED_OF_LIGHT / cfg.carrier_frequency_hz;
    Ok(ChannelParams {
        eta: wavelength * wavelength / (16.0 * PI * PI),
        noise_power: dbm_to_watts(cfg.noise_psd_dbm_hz) * cfg.bandwidth_hz,
        height: cfg.waveguide_height_m,
        length: cfg.waveguide_length_m,
    })
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `stream` under `master`.
///
/// `mix64(mix64(master) + (stream + 1) * 0x9e3779b97f4a7c15)`, so distinct
/// streams of one master, and equal stream indices of distinct masters, map
/// to unrelated seeds.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix64(mix64(master).wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// RNG for stream `stream` under `master`.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream))
}

/// Draws `num_users` users uniformly over `[0, region_length] x [0, region_width]`.
///
/// User `k` is drawn from stream `k` of `seed`, so the first users of a
/// population do not depend on how many users follow them.
pub fn generate_users(cfg: &ScenarioConfig, seed: u64) -> Result<Vec<UserSpec>> {
    cfg.validate()?;
    Ok((0..cfg.num_users)
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let x = rng.gen::<f64>() * cfg.region_length;
            let y = rng.gen::<f64>() * cfg.region_width;
            cfg.template_user(x, y)
        })
        .collect())
}

/// Uniform offset inside a disk of radius `radius` centred at the origin.
///
/// Polar method: distance `radius * sqrt(u)`, angle `2 pi v`, with `u, v`
/// uniform on `[0, 1)`.
pub fn sample_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> (f64, f64) {
    let rho = radius * rng.gen::<f64>().sqrt();
    let theta = 2.0 * PI * rng.gen::<f64>();
    let (sin, cos) = theta.sin_cos();
    (rho * cos, rho * sin)
}

/// Samples a true user location, uniform over the uncertainty disk.
pub fn sample_true_location<R: Rng + ?Sized>(user: &UserSpec, rng: &mut R) -> (f64, f64) {
    if user.radius == 0.0 {
        return (user.x, user.y);
    }
    let (dx, dy) = sample_disk(user.radius, rng);
    (user.x + dx, user.y + dy)
}

/// On-disk configuration document shared by the CLI subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub waveguide_height_m: f64,
    pub waveguide_length_m: f64,
    pub num_users: usize,
    pub region_length_m: f64,
    pub region_width_m: f64,
    pub uncertainty_radius_m: f64,
    pub target_rate_bpshz: f64,
    pub outage_cap: f64,
    pub master_seed: u64,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pso_swarm_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pso_max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pso_inertia: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pso_cognitive: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pso_social: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pso_seed: Option<u64>,

    /// Exhaustive-search step, m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step_m: Option<f64>,
    /// Realizations averaged per sweep point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        let radio = RadioConfig::default();
        let scenario = ScenarioConfig::default();
        Self {
            carrier_frequency_hz: radio.carrier_frequency_hz,
            bandwidth_hz: radio.bandwidth_hz,
            noise_psd_dbm_hz: radio.noise_psd_dbm_hz,
            waveguide_height_m: radio.waveguide_height_m,
            waveguide_length_m: radio.waveguide_length_m,
            num_users: scenario.num_users,
            region_length_m: scenario.region_length,
            region_width_m: scenario.region_width,
            uncertainty_radius_m: scenario.uncertainty_radius,
            target_rate_bpshz: scenario.target_rate,
            outage_cap: scenario.outage_cap,
            master_seed: scenario.master_seed,
            pso_swarm_size: None,
            pso_max_iters: None,
            pso_inertia: None,
            pso_cognitive: None,
            pso_social: None,
            pso_seed: None,
            grid_step_m: None,
            realizations: None,
        }
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        file.radio().validate()?;
        file.scenario().validate()?;
        file.pso_config().validate()?;
        if let Some(step) = file.grid_step_m {
            if !(step > 0.0 && step <= file.waveguide_length_m) {
                return Err(Error::InvalidConfig(format!("grid_step_m {step} must lie in (0, L]")));
            }
        }
        if file.realizations == Some(0) {
            return Err(Error::InvalidConfig("realizations must be at least 1".into()));
        }
        Ok(file)
    }

    pub fn radio(&self) -> RadioConfig {
        RadioConfig {
            carrier_frequency_hz: self.carrier_frequency_hz,
            bandwidth_hz: self.bandwidth_hz,
            noise_psd_dbm_hz: self.noise_psd_dbm_hz,
            waveguide_height_m: self.waveguide_height_m,
            waveguide_length_m: self.waveguide_length_m,
        }
    }

    pub fn scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            num_users: self.num_users,
            region_length: self.region_length_m,
            region_width: self.region_width_m,
            uncertainty_radius: self.uncertainty_radius_m,
            target_rate: self.target_rate_bpshz,
            outage_cap: self.outage_cap,
            master_seed: self.master_seed,
        }
    }

    /// PSO settings: defaults for the waveguide length, overridden by any
    /// `pso_*` keys present in the document.
    pub fn pso_config(&self) -> PsoConfig {
        let mut cfg = PsoConfig::for_length(self.waveguide_length_m);
        if let Some(v) = self.pso_swarm_size {
            cfg.swarm_size = v;
        }
        if let Some(v) = self.pso_max_iters {
            cfg.max_iterations = v;
        }
        if let Some(v) = self.pso_inertia {
            cfg.inertia = v;
        }
        if let Some(v) = self.pso_cognitive {
            cfg.cognitive = v;
        }
        if let Some(v) = self.pso_social {
            cfg.social = v;
        }
        if let Some(v) = self.pso_seed {
            cfg.seed = v;
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn channel_params_at_28_ghz() {
        let p = derive_channel_params(&RadioConfig::default()).unwrap();
        // 299792458 / 28e9 = 0.010706873...; squared / (16 pi^2) = 7.2594e-7
        let lambda = 299_792_458.0 / 28e9;
        assert!(rel(lambda, 1.0707e-2) < 1e-4);
        assert!(rel(p.eta, 7.2594e-7) < 1e-4, "eta = {}", p.eta);
        // -174 dBm/Hz + 80 dB = -94 dBm = 10^-12.4 W
        assert!(rel(p.noise_power, 10f64.powf(-12.4)) < 1e-12);
        assert!(rel(p.noise_power, 3.981e-13) < 1e-3);
        assert_eq!(p.height, 3.0);
        assert_eq!(p.length, 50.0);
    }

    #[test]
    fn doubling_frequency_quarters_eta() {
        let base = RadioConfig::default();
        let doubled = RadioConfig { carrier_frequency_hz: 56e9, ..base };
        let a = derive_channel_params(&base).unwrap();
        let b = derive_channel_params(&doubled).unwrap();
        assert!(rel(b.eta * 4.0, a.eta) < 1e-14);
        assert_eq!(a.noise_power, b.noise_power);
    }

    #[test]
    fn rejects_non_positive_radio_inputs() {
        for cfg in [
            RadioConfig { carrier_frequency_hz: 0.0, ..Default::default() },
            RadioConfig { bandwidth_hz: -1.0, ..Default::default() },
            RadioConfig { waveguide_height_m: 0.0, ..Default::default() },
            RadioConfig { waveguide_length_m: f64::NAN, ..Default::default() },
        ] {
            assert!(matches!(derive_channel_params(&cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn generation_is_seeded() {
        let cfg = ScenarioConfig::default();
        let a = generate_users(&cfg, 42).unwrap();
        let b = generate_users(&cfg, 42).unwrap();
        let c = generate_users(&cfg, 43).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_ne!(a, c);
        for u in &a {
            assert_eq!((u.radius, u.target_rate, u.outage_cap), (3.0, 3.0, 0.01));
        }
    }

    #[test]
    fn users_stay_in_region() {
        let cfg = ScenarioConfig { num_users: 1000, ..Default::default() };
        for u in generate_users(&cfg, 7).unwrap() {
            assert!((0.0..=120.0).contains(&u.x));
            assert!((0.0..=20.0).contains(&u.y));
        }
    }

    #[test]
    fn user_prefix_is_stable() {
        let small = ScenarioConfig { num_users: 3, ..Default::default() };
        let large = ScenarioConfig { num_users: 10, ..Default::default() };
        let a = generate_users(&small, 9).unwrap();
        let b = generate_users(&large, 9).unwrap();
        assert_eq!(a[..], b[..3]);
    }

    #[test]
    fn invalid_scenarios() {
        let bad = [
            ScenarioConfig { num_users: 0, ..Default::default() },
            ScenarioConfig { region_width: 0.0, ..Default::default() },
            ScenarioConfig { uncertainty_radius: -1.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(generate_users(&cfg, 1).is_err());
        }
        let eps = ScenarioConfig { outage_cap: 0.6, ..Default::default() };
        assert_eq!(generate_users(&eps, 1), Err(Error::UnsupportedThreshold(0.6)));
    }

    #[test]
    fn zero_radius_is_exact() {
        let user = UserSpec { x: 4.0, y: 2.5, radius: 0.0, target_rate: 1.0, outage_cap: 0.1 };
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(sample_true_location(&user, &mut rng), (4.0, 2.5));
        }
    }

    #[test]
    fn disk_samples_mean_and_inner_fraction() {
        let user = UserSpec { x: 30.0, y: 10.0, radius: 3.0, target_rate: 3.0, outage_cap: 0.01 };
        let mut rng = stream_rng(5, 0);
        let n = 1_000_000;
        let (mut sx, mut sy, mut inner) = (0.0, 0.0, 0usize);
        for _ in 0..n {
            let (x, y) = sample_true_location(&user, &mut rng);
            let (dx, dy) = (x - 30.0, y - 10.0);
            assert!(dx.hypot(dy) <= 3.0);
            sx += dx;
            sy += dy;
            if dx * dx + dy * dy <= 1.5 * 1.5 {
                inner += 1;
            }
        }
        assert!((sx / n as f64).abs() < 0.01);
        assert!((sy / n as f64).abs() < 0.01);
        let frac = inner as f64 / n as f64;
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((frac - 0.25).abs() < 3.0 * sigma, "inner fraction {frac}");
    }

    /// Squared distance over r^2 is U(0, 1) for a uniform disk; KS test at
    /// alpha = 0.01.
    #[test]
    fn squared_radius_passes_ks() {
        let n = 1_000_000;
        let mut rng = stream_rng(11, 3);
        let mut u: Vec<f64> = (0..n)
            .map(|_| {
                let (dx, dy) = sample_disk(2.0, &mut rng);
                (dx * dx + dy * dy) / 4.0
            })
            .collect();
        u.sort_by(f64::total_cmp);
        let nf = n as f64;
        let d = u
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - i as f64 / nf).max((i + 1) as f64 / nf - v))
            .fold(0.0, f64::max);
        let critical = 1.628 / nf.sqrt();
        assert!(d < critical, "KS statistic {d} >= {critical}");
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> =
            (0..1000).flat_map(|m| (0..10).map(move |s| derive_seed(m, s))).collect();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn scenario_file_roundtrip_and_rejections() {
        let file = ScenarioFile::default();
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(ScenarioFile::from_json(&text).unwrap(), file);

        let typo = text.replacen("master_seed", "master_sed", 1);
        assert!(matches!(ScenarioFile::from_json(&typo), Err(Error::InvalidConfig(_))));

        let mut bad = file.clone();
        bad.bandwidth_hz = 0.0;
        let text = serde_json::to_string(&bad).unwrap();
        assert!(ScenarioFile::from_json(&text).is_err());
    }

    #[test]
    fn pso_overrides_apply() {
        let file = ScenarioFile { pso_swarm_size: Some(12), pso_seed: Some(99), ..Default::default() };
        let cfg = file.pso_config();
        assert_eq!(cfg.swarm_size, 12);
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.max_iterations, PsoConfig::for_length(50.0).max_iterations);
    }
}
