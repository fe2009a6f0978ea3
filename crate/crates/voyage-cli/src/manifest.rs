//! Run provenance: every command writes a `manifest.json` describing
//! the exact inputs that produced its outputs. All fields except the
//! timestamp are deterministic functions of the invocation, and the
//! data files themselves embed only those deterministic fields, so
//! identical manifests (up to timestamp) reproduce identical outputs.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub command: String,
    pub timestamp_utc: String,
    pub config_sha256: String,
    pub mesh_seed: u64,
    pub mesh_size: usize,
    pub horizon_steps: usize,
    pub lambda_list: Vec<f64>,
    pub initial_fuels_gal: Vec<f64>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_sha256: String,
        mesh_seed: u64,
        mesh_size: usize,
        horizon_steps: usize,
        lambda_list: Vec<f64>,
        initial_fuels_gal: Vec<f64>,
    ) -> RunManifest {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            timestamp_utc: chrono::Utc::now().to_rfc3339(),
            config_sha256,
            mesh_seed,
            mesh_size,
            horizon_steps,
            lambda_list,
            initial_fuels_gal,
        }
    }
}

/// Deterministic per-solve summary written next to the trajectory files.
#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub lambda: f64,
    pub initial_fuel_gal: f64,
    pub arrived: bool,
    pub trip_time_hr: f64,
    pub total_fuel_gal: f64,
    pub arrival_step: Option<usize>,
    pub refuel_stops: usize,
    pub config_sha256: String,
    pub mesh_seed: u64,
    pub mesh_size: usize,
    pub horizon_steps: usize,
    pub tool_version: &'static str,
}
