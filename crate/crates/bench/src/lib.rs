//! Shared fixtures for the criterion benchmarks.

use pinch_core::{derive_channel_params, generate_users, ChannelParams, RadioConfig, ScenarioConfig, UserSpec};

/// Channel constants and users of the default deployment.
pub fn default_fixture(seed: u64) -> (ChannelParams, Vec<UserSpec>) {
    let params = derive_channel_params(&RadioConfig::default()).expect("default radio config is valid");
    let users = generate_users(&ScenarioConfig::default(), seed).expect("default scenario is valid");
    (params, users)
}
