//! Steady-state vessel motion model: commanded velocities plus current
//! drift, a cubic fuel-burn law, and the forward finite-difference
//! discrete-time transition with docked-refuel semantics.

use serde::{Deserialize, Serialize};

use crate::environment::{EnvironmentSpec, Position};

/// Vessel drag/fuel parameters.
///
/// `beta` is derived, not free: `beta = 0.5 * alpha * rho * c_d * a_f`.
/// Commanded speeds are in km/hr and `fuel_rate` yields Gal/hr; `alpha`
/// absorbs the unit conversion (it was tuned so that full-speed burn is
/// ~4 Gal/hr, consistent with an 8-gallon tank on a 150 km map).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Drag coefficient, dimensionless.
    pub drag_coefficient: f64,
    /// Frontal area, m^2.
    pub frontal_area_m2: f64,
    /// Power-to-fuel proportionality constant.
    pub alpha: f64,
    /// Water density, kg/m^3.
    pub rho_kg_m3: f64,
    /// Derived burn coefficient applied to (u1^2 + u2^2)^(3/2).
    pub beta: f64,
    /// Tank capacity, gallons.
    pub tank_capacity_gal: f64,
    /// Per-axis commanded speed bound, km/hr.
    pub u_max_km_hr: f64,
    /// Refueling inflow rate, Gal/min.
    pub refuel_rate_gal_min: f64,
}

/// Invalid vehicle parameter, with the offending field named.
#[derive(Debug, Clone)]
pub struct ParamError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl VehicleParams {
    pub fn new(
        drag_coefficient: f64,
        frontal_area_m2: f64,
        alpha: f64,
        rho_kg_m3: f64,
        tank_capacity_gal: f64,
        u_max_km_hr: f64,
        refuel_rate_gal_min: f64,
    ) -> Result<Self, ParamError> {
        let check = |field: &'static str, v: f64| -> Result<(), ParamError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ParamError {
                    field,
                    reason: "must be positive and finite",
                })
            }
        };
        check("drag_coefficient", drag_coefficient)?;
        check("frontal_area_m2", frontal_area_m2)?;
        check("alpha", alpha)?;
        check("rho_kg_m3", rho_kg_m3)?;
        check("tank_capacity_gal", tank_capacity_gal)?;
        check("u_max_km_hr", u_max_km_hr)?;
        check("refuel_rate_gal_min", refuel_rate_gal_min)?;
        let beta = 0.5 * alpha * rho_kg_m3 * drag_coefficient * frontal_area_m2;
        Ok(VehicleParams {
            drag_coefficient,
            frontal_area_m2,
            alpha,
            rho_kg_m3,
            beta,
            tank_capacity_gal,
            u_max_km_hr,
            refuel_rate_gal_min,
        })
    }

    /// Burn rate at maximum commanded speed on both axes, Gal/hr.
    pub fn max_fuel_rate(&self) -> f64 {
        fuel_rate(self.u_max_km_hr, self.u_max_km_hr, self)
    }

    /// Fuel added by one refueling step of length `dt_hr`, gallons
    /// (before the tank-capacity clamp).
    pub fn refuel_amount_gal(&self, dt_hr: f64) -> f64 {
        self.refuel_rate_gal_min * dt_hr * 60.0
    }
}

/// Vessel state: planar position plus tank level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub position: Position,
    /// Fuel on board, gallons.
    pub fuel: f64,
}

/// One step's commanded input.
///
/// Refueling is state-implied rather than a free degree of freedom: it
/// is admissible only while stationary inside a port's dock disk, and a
/// refueling vessel commands zero velocity by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ControlInput {
    Cruise { u1: f64, u2: f64 },
    Refuel,
}

impl ControlInput {
    pub fn u1(&self) -> f64 {
        match self {
            ControlInput::Cruise { u1, .. } => *u1,
            ControlInput::Refuel => 0.0,
        }
    }

    pub fn u2(&self) -> f64 {
        match self {
            ControlInput::Cruise { u2, .. } => *u2,
            ControlInput::Refuel => 0.0,
        }
    }

    pub fn is_refuel(&self) -> bool {
        matches!(self, ControlInput::Refuel)
    }
}

/// Why a transition is forbidden.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfeasibleReason {
    /// The step would burn more fuel than is on board.
    FuelExhausted,
    /// The successor position leaves the operating area.
    OutOfBounds,
    /// Refuel commanded away from every port's dock disk.
    NotDocked,
}

/// Result of a discrete transition. `Infeasible` is a value, not a
/// fault: it marks a forbidden transition for the solver to exclude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Next(State),
    Infeasible(InfeasibleReason),
}

impl StepOutcome {
    pub fn feasible(self) -> Option<State> {
        match self {
            StepOutcome::Next(s) => Some(s),
            StepOutcome::Infeasible(_) => None,
        }
    }
}

/// Instantaneous burn rate `beta * (u1^2 + u2^2)^(3/2)` in Gal/hr.
///
/// Commanded speeds are applied relative to the water, so the ocean
/// current does not enter the burn law.
pub fn fuel_rate(u1: f64, u2: f64, params: &VehicleParams) -> f64 {
    params.beta * (u1 * u1 + u2 * u2).powf(1.5)
}

/// True iff the vessel is stationary inside some port's dock disk —
/// exactly the condition under which the refueling inflow applies.
pub fn is_stationary_port_state(s: &State, u: &ControlInput, env: &EnvironmentSpec) -> bool {
    u.u1() == 0.0 && u.u2() == 0.0 && env.port_at(&s.position).is_some()
}

/// Successor position of a cruising step: commanded velocity plus
/// current drift, integrated over `dt_hr`.
///
/// Shared by the discrete solver's transition tables and the exact
/// simulator so the two agree bit-for-bit.
pub fn cruise_position(p: &Position, u1: f64, u2: f64, env: &EnvironmentSpec, dt_hr: f64) -> Position {
    let (ve, vn) = env.current.velocity(p);
    Position::new(p.x1 + (u1 + ve) * dt_hr, p.x2 + (u2 + vn) * dt_hr)
}

/// One forward finite-difference step of length `dt_hr` hours.
///
/// A refueling step requires the vessel docked (see
/// [`is_stationary_port_state`]); the vessel is treated as moored, so
/// current drift is suppressed and the tank fills by
/// `refuel_amount_gal` clamped at capacity. A cruising step drifts with
/// the current evaluated at the departure position and burns
/// `fuel_rate * dt_hr`. Transitions that empty the tank below zero or
/// leave the bounds are `Infeasible` rather than clamped.
pub fn step(
    s: &State,
    u: &ControlInput,
    dt_hr: f64,
    env: &EnvironmentSpec,
    params: &VehicleParams,
) -> StepOutcome {
    match u {
        ControlInput::Refuel => {
            if env.port_at(&s.position).is_none() {
                return StepOutcome::Infeasible(InfeasibleReason::NotDocked);
            }
            let fuel = (s.fuel + params.refuel_amount_gal(dt_hr)).min(params.tank_capacity_gal);
            StepOutcome::Next(State {
                position: s.position,
                fuel,
            })
        }
        ControlInput::Cruise { u1, u2 } => {
            let fuel = s.fuel - fuel_rate(*u1, *u2, params) * dt_hr;
            if fuel < 0.0 {
                return StepOutcome::Infeasible(InfeasibleReason::FuelExhausted);
            }
            let position = cruise_position(&s.position, *u1, *u2, env, dt_hr);
            if !env.bounds.contains(&position) {
                return StepOutcome::Infeasible(InfeasibleReason::OutOfBounds);
            }
            StepOutcome::Next(State { position, fuel })
        }
    }
}
