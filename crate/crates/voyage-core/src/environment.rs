//! The ocean world: analytic current field, refueling ports, terminal
//! region, and spatial bounds.
//!
//! All queries are pure functions of immutable data and safe for
//! unrestricted concurrent use.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Planar position in kilometers: `x1` east-west, `x2` north-south.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x1: f64,
    pub x2: f64,
}

impl Position {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Position { x1, x2 }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let dx = self.x1 - other.x1;
        let dy = self.x2 - other.x2;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn distance_sq(&self, other: &Position) -> f64 {
        let dx = self.x1 - other.x1;
        let dy = self.x2 - other.x2;
        dx * dx + dy * dy
    }
}

/// Rectangular operating area, kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x1_min: f64,
    pub x1_max: f64,
    pub x2_min: f64,
    pub x2_max: f64,
}

impl Bounds {
    pub fn contains(&self, p: &Position) -> bool {
        p.x1 >= self.x1_min && p.x1 <= self.x1_max && p.x2 >= self.x2_min && p.x2 <= self.x2_max
    }
}

/// Analytic, time-invariant current field.
///
/// The east-west component is a difference of sinusoids in both
/// coordinates; the north-south component is affine in `x2` and always
/// positive. `speed_scale` converts the dimensionless shape to km/hr;
/// it is calibrated once (see the shipped default config) so that the
/// field's mean speed is ~5 km/hr and its maximum ~8 km/hr over the
/// default operating area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentField {
    /// Dimensionless shape coefficient.
    pub gamma: f64,
    /// Spatial period of the sinusoidal terms, km.
    pub period_km: f64,
    /// Multiplier converting the raw shape value to km/hr.
    pub speed_scale: f64,
}

impl CurrentField {
    /// Current velocity `(v_east, v_north)` in km/hr at `p`.
    ///
    /// Pure formula evaluation; no bounds check. The fuel component of
    /// the current is identically zero and is not represented.
    pub fn velocity(&self, p: &Position) -> (f64, f64) {
        let w = 2.0 * std::f64::consts::PI / self.period_km;
        let v_e = self.speed_scale * (self.gamma * (w * p.x1).sin() - self.gamma * (w * p.x2).sin());
        let v_n = self.speed_scale * (self.gamma / 80.0 * p.x2 + 1.0 / 9.0);
        (v_e, v_n)
    }
}

/// A refueling port: a dock disk of radius `snap_radius` around `position`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub position: Position,
    /// Capture radius, km. A stationary vessel anywhere inside the
    /// closed disk counts as docked.
    pub snap_radius: f64,
}

/// Closed disk of acceptable final positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalRegion {
    pub center: Position,
    pub radius: f64,
}

/// Start position and initial tank level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartState {
    pub position: Position,
    /// Initial fuel, gallons.
    pub fuel: f64,
}

/// The full ocean scenario: bounds, current field, ports, terminal
/// region, and start state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub bounds: Bounds,
    pub current: CurrentField,
    pub ports: Vec<Port>,
    pub terminal: TerminalRegion,
    pub start: StartState,
}

/// Query outside the declared operating area.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("position ({x1}, {x2}) outside bounds [{x1_min}, {x1_max}] x [{x2_min}, {x2_max}]")]
pub struct OutOfBoundsError {
    pub x1: f64,
    pub x2: f64,
    pub x1_min: f64,
    pub x1_max: f64,
    pub x2_min: f64,
    pub x2_max: f64,
}

impl EnvironmentSpec {
    /// Current velocity at an in-bounds position.
    pub fn current_at(&self, p: &Position) -> Result<(f64, f64), OutOfBoundsError> {
        if !self.bounds.contains(p) {
            return Err(OutOfBoundsError {
                x1: p.x1,
                x2: p.x2,
                x1_min: self.bounds.x1_min,
                x1_max: self.bounds.x1_max,
                x2_min: self.bounds.x2_min,
                x2_max: self.bounds.x2_max,
            });
        }
        Ok(self.current.velocity(p))
    }

    pub fn in_terminal(&self, p: &Position) -> bool {
        in_terminal(p, &self.terminal)
    }

    pub fn port_at(&self, p: &Position) -> Option<usize> {
        port_at(p, &self.ports)
    }
}

/// True iff `p` lies in the closed terminal disk (boundary included).
pub fn in_terminal(p: &Position, t: &TerminalRegion) -> bool {
    p.distance_sq(&t.center) <= t.radius * t.radius
}

/// Index of the nearest port whose snap disk contains `p`, if any.
///
/// Overlapping snap disks are permitted; among containing ports the
/// nearest wins, with exact distance ties broken toward the lowest
/// index.
pub fn port_at(p: &Position, ports: &[Port]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, port) in ports.iter().enumerate() {
        let d2 = p.distance_sq(&port.position);
        if d2 <= port.snap_radius * port.snap_radius {
            match best {
                Some((bd2, _)) if bd2 <= d2 => {}
                _ => best = Some((d2, i)),
            }
        }
    }
    best.map(|(_, i)| i)
}

/// Mean and maximum current speed over a uniform sampling grid.
///
/// The grid has `side x side` points with `side = floor(sqrt(n_samples))`,
/// spanning the bounds inclusively on both axes. Requires
/// `n_samples >= 100`.
pub fn current_stats(field: &CurrentField, bounds: &Bounds, n_samples: usize) -> (f64, f64) {
    assert!(n_samples >= 100, "current_stats requires n_samples >= 100");
    let side = (n_samples as f64).sqrt().floor() as usize;
    let (mut sum, mut max) = (0.0_f64, 0.0_f64);
    for i in 0..side {
        let x1 = bounds.x1_min + i as f64 * (bounds.x1_max - bounds.x1_min) / (side - 1) as f64;
        for j in 0..side {
            let x2 =
                bounds.x2_min + j as f64 * (bounds.x2_max - bounds.x2_min) / (side - 1) as f64;
            let (ve, vn) = field.velocity(&Position::new(x1, x2));
            let speed = (ve * ve + vn * vn).sqrt();
            sum += speed;
            if speed > max {
                max = speed;
            }
        }
    }
    (sum / (side * side) as f64, max)
}
