//! Scenario configuration: a TOML document with `bounds`, `current`,
//! `ports`, `terminal`, `start`, `vehicle`, and `discretization`
//! sections. Unknown keys are rejected, and every structural invariant
//! is checked with the offending field named in the error.

use serde::Deserialize;
use thiserror::Error;

use crate::dynamics::VehicleParams;
use crate::environment::{
    Bounds, CurrentField, EnvironmentSpec, Port, Position, StartState, TerminalRegion,
};

/// The scenario shipped with the crate (also used by the CLI when no
/// `--config` is given).
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Syntactic or schema error (missing field, unknown key, bad type).
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    /// A structural invariant does not hold.
    #[error("invalid config: {field}: {reason}")]
    Invariant { field: String, reason: String },
}

/// True only when `a < b` holds; NaN on either side fails the check.
fn ordered_below(a: f64, b: f64) -> bool {
    a < b
}

fn positive(v: f64) -> bool {
    v > 0.0
}

fn invariant(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invariant {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Mesh, lattice, and horizon parameters.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    /// Number of Latin-hypercube position samples.
    pub mesh_size: usize,
    /// Fuel grid spacing, gallons.
    pub fuel_step_gal: f64,
    /// Nominal input lattice spacing, km/hr.
    pub input_step_km_hr: f64,
    /// Timestep length, minutes.
    pub dt_min: f64,
    /// Horizon length in steps.
    pub horizon_steps: usize,
    /// RNG seed for the mesh draw; recorded in all outputs.
    pub seed: u64,
}

impl Discretization {
    pub fn dt_hours(&self) -> f64 {
        self.dt_min / 60.0
    }
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub environment: EnvironmentSpec,
    pub vehicle: VehicleParams,
    pub discretization: Discretization,
}

impl Scenario {
    /// The built-in default scenario.
    pub fn default_scenario() -> Scenario {
        load_scenario(DEFAULT_CONFIG).expect("shipped default config must validate")
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    bounds: Bounds,
    current: CurrentField,
    ports: Vec<RawPort>,
    terminal: RawTerminal,
    start: RawStart,
    vehicle: RawVehicle,
    discretization: Discretization,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPort {
    x1: f64,
    x2: f64,
    snap_radius: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerminal {
    x1: f64,
    x2: f64,
    radius: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStart {
    x1: f64,
    x2: f64,
    fuel: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVehicle {
    drag_coefficient: f64,
    frontal_area_m2: f64,
    alpha: f64,
    rho_kg_m3: f64,
    tank_capacity_gal: f64,
    u_max_km_hr: f64,
    refuel_rate_gal_min: f64,
}

/// Parses and validates a full scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;

    let b = raw.bounds;
    if !ordered_below(b.x1_min, b.x1_max) {
        return Err(invariant("bounds.x1_min", "must be strictly below x1_max"));
    }
    if !ordered_below(b.x2_min, b.x2_max) {
        return Err(invariant("bounds.x2_min", "must be strictly below x2_max"));
    }

    let c = raw.current;
    if !positive(c.gamma) {
        return Err(invariant("current.gamma", "must be positive"));
    }
    if !positive(c.period_km) {
        return Err(invariant("current.period_km", "must be positive"));
    }
    if !positive(c.speed_scale) {
        return Err(invariant("current.speed_scale", "must be positive"));
    }

    let mut ports = Vec::with_capacity(raw.ports.len());
    for (i, p) in raw.ports.iter().enumerate() {
        let position = Position::new(p.x1, p.x2);
        if !b.contains(&position) {
            return Err(invariant(&format!("ports[{i}]"), "position outside bounds"));
        }
        if !positive(p.snap_radius) {
            return Err(invariant(
                &format!("ports[{i}].snap_radius"),
                "must be positive",
            ));
        }
        ports.push(Port {
            position,
            snap_radius: p.snap_radius,
        });
    }

    let term_center = Position::new(raw.terminal.x1, raw.terminal.x2);
    if !b.contains(&term_center) {
        return Err(invariant("terminal", "center outside bounds"));
    }
    if !positive(raw.terminal.radius) {
        return Err(invariant("terminal.radius", "must be positive"));
    }

    let v = &raw.vehicle;
    let vehicle = VehicleParams::new(
        v.drag_coefficient,
        v.frontal_area_m2,
        v.alpha,
        v.rho_kg_m3,
        v.tank_capacity_gal,
        v.u_max_km_hr,
        v.refuel_rate_gal_min,
    )
    .map_err(|e| invariant(&format!("vehicle.{}", e.field), e.reason))?;

    let start_pos = Position::new(raw.start.x1, raw.start.x2);
    if !b.contains(&start_pos) {
        return Err(invariant("start", "position outside bounds"));
    }
    if !(0.0..=vehicle.tank_capacity_gal).contains(&raw.start.fuel) {
        return Err(invariant(
            "start.fuel",
            format!("must be in [0, {}]", vehicle.tank_capacity_gal),
        ));
    }

    let d = &raw.discretization;
    if d.mesh_size == 0 {
        return Err(invariant("discretization.mesh_size", "must be at least 1"));
    }
    if !positive(d.fuel_step_gal) {
        return Err(invariant("discretization.fuel_step_gal", "must be positive"));
    }
    let levels = vehicle.tank_capacity_gal / d.fuel_step_gal;
    if (levels - levels.round()).abs() > 1e-9 {
        return Err(invariant(
            "discretization.fuel_step_gal",
            "must divide the tank capacity evenly",
        ));
    }
    if !positive(d.input_step_km_hr) {
        return Err(invariant(
            "discretization.input_step_km_hr",
            "must be positive",
        ));
    }
    if !positive(d.dt_min) {
        return Err(invariant("discretization.dt_min", "must be positive"));
    }
    if d.horizon_steps == 0 {
        return Err(invariant(
            "discretization.horizon_steps",
            "must be at least 1",
        ));
    }

    Ok(Scenario {
        environment: EnvironmentSpec {
            bounds: b,
            current: c,
            ports,
            terminal: TerminalRegion {
                center: term_center,
                radius: raw.terminal.radius,
            },
            start: StartState {
                position: start_pos,
                fuel: raw.start.fuel,
            },
        },
        vehicle,
        discretization: raw.discretization,
    })
}

/// Parses a scenario document and returns just the validated environment.
pub fn load_environment(text: &str) -> Result<EnvironmentSpec, ConfigError> {
    load_scenario(text).map(|s| s.environment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_loads_with_paper_bounds() {
        let env = load_environment(DEFAULT_CONFIG).unwrap();
        assert_eq!(
            (
                env.bounds.x1_min,
                env.bounds.x1_max,
                env.bounds.x2_min,
                env.bounds.x2_max
            ),
            (0.0, 150.0, 0.0, 150.0)
        );
        assert_eq!(env.ports.len(), 3);
    }

    #[test]
    fn inverted_bounds_rejected() {
        let text = DEFAULT_CONFIG.replace("x1_min = 0.0", "x1_min = 200.0");
        let err = load_scenario(&text).unwrap_err();
        match err {
            ConfigError::Invariant { field, .. } => assert_eq!(field, "bounds.x1_min"),
            other => panic!("expected invariant error, got {other}"),
        }
    }

    #[test]
    fn missing_terminal_section_names_field() {
        let text: String = DEFAULT_CONFIG
            .lines()
            .skip_while(|l| !l.starts_with("[terminal]"))
            .skip(4)
            .map(|l| format!("{l}\n"))
            .collect();
        let head: String = DEFAULT_CONFIG
            .lines()
            .take_while(|l| !l.starts_with("[terminal]"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = load_scenario(&format!("{head}{text}")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("terminal"), "error should name the field: {msg}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{DEFAULT_CONFIG}\n[extra_section]\nfoo = 1\n");
        assert!(matches!(
            load_scenario(&text),
            Err(ConfigError::Parse(_))
        ));
        let text2 = DEFAULT_CONFIG.replace("seed = 42", "seed = 42\nwhatever = 3");
        assert!(load_scenario(&text2).is_err());
    }

    #[test]
    fn start_fuel_above_capacity_rejected() {
        let text = DEFAULT_CONFIG.replace("fuel = 8.0", "fuel = 9.5");
        let err = load_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("start.fuel"));
    }

    #[test]
    fn port_outside_bounds_rejected() {
        let text = DEFAULT_CONFIG.replacen("x1 = 38.0", "x1 = -38.0", 1);
        let err = load_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("ports[0]"));
    }

    #[test]
    fn fuel_step_must_divide_capacity() {
        let text = DEFAULT_CONFIG.replace("fuel_step_gal = 0.1", "fuel_step_gal = 0.3");
        let err = load_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("fuel_step_gal"));
    }
}
