//! Scalarization-weight sweeps and Pareto front extraction.
//!
//! Each weight gets one backward-induction solve; the executed plan's
//! exact burn and arrival step become one `(fuel, time)` outcome.
//! Because every weight optimizes over the same feasible set, optimal
//! fuel is non-decreasing and optimal trip time non-increasing in
//! `lambda` — asserted across every sweep in the tests.

use std::io::{self, Write};

use thiserror::Error;

use crate::dp::{self, DiscreteProblem};
use crate::dynamics::State;

/// One sweep outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub lambda: f64,
    pub initial_fuel_gal: f64,
    pub total_fuel_gal: f64,
    pub trip_time_hr: f64,
    pub arrived: bool,
}

/// Non-dominated outcomes, sorted by trip time ascending; total fuel is
/// strictly decreasing along the list.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    pub points: Vec<ParetoPoint>,
}

#[derive(Debug, Error)]
pub enum TradeoffError {
    #[error("lambda {0} is not present in the sweep")]
    MissingLambda(f64),
}

/// The lambda grid `0, step, 2*step, ..., 1`, always containing both
/// endpoints exactly.
pub fn lambda_grid(step: f64) -> Vec<f64> {
    assert!(step > 0.0 && step <= 1.0, "lambda step must lie in (0, 1]");
    let count = (1.0 / step).round() as usize;
    (0..=count)
        .map(|i| (i as f64 * step).clamp(0.0, 1.0))
        .collect()
}

/// Sweeps the weights for one initial fuel level: one solve plus one
/// plan execution per lambda, all on the identical mesh, so outcome
/// differences are attributable to the weight alone. Non-arriving
/// weights are retained with `arrived = false` (and excluded from
/// fronts); duplicate weights yield duplicate outcomes.
pub fn sweep(problem: &DiscreteProblem, lambdas: &[f64], initial_fuel_gal: f64) -> Vec<ParetoPoint> {
    sweep_multi(problem, lambdas, &[initial_fuel_gal])
}

/// Sweeps the weights once and rolls the stored plan out from several
/// initial fuel levels, reusing each weight's solve across the levels
/// (the value table covers every fuel level already). Points are
/// ordered fuel-level-major, lambda-minor within a level.
pub fn sweep_multi(
    problem: &DiscreteProblem,
    lambdas: &[f64],
    initial_fuels_gal: &[f64],
) -> Vec<ParetoPoint> {
    sweep_multi_with(problem, lambdas, initial_fuels_gal, |lambda| {
        dp::solve(problem, lambda)
    })
}

/// [`sweep_multi`] with a caller-supplied solver, so callers can layer
/// caching or progress reporting over the per-lambda solves.
pub fn sweep_multi_with(
    problem: &DiscreteProblem,
    lambdas: &[f64],
    initial_fuels_gal: &[f64],
    mut solver: impl FnMut(f64) -> dp::DpSolution,
) -> Vec<ParetoPoint> {
    assert!(!lambdas.is_empty(), "sweep requires at least one lambda");
    assert!(
        lambdas.iter().all(|l| (0.0..=1.0).contains(l)),
        "every lambda must lie in [0, 1]"
    );
    let mut per_fuel: Vec<Vec<ParetoPoint>> =
        vec![Vec::with_capacity(lambdas.len()); initial_fuels_gal.len()];
    for &lambda in lambdas {
        let sol = solver(lambda);
        for (points, &fuel) in per_fuel.iter_mut().zip(initial_fuels_gal) {
            let start = State {
                position: problem.env.start.position,
                fuel,
            };
            let out = dp::execute_plan(problem, &sol, &start);
            points.push(ParetoPoint {
                lambda,
                initial_fuel_gal: fuel,
                total_fuel_gal: out.total_fuel_gal,
                trip_time_hr: out.trip_time_hr,
                arrived: out.arrived,
            });
        }
    }
    per_fuel.into_iter().flatten().collect()
}

/// Extracts the non-dominated front from raw sweep outcomes.
///
/// Non-arriving points are dropped. A point is removed when another is
/// no worse in both coordinates and better in at least one; outcome
/// ties collapse to the lowest-lambda representative.
pub fn front(points: &[ParetoPoint]) -> ParetoFront {
    let mut kept: Vec<ParetoPoint> = Vec::new();
    for p in points.iter().filter(|p| p.arrived) {
        if let Some(existing) = kept
            .iter_mut()
            .find(|q| q.total_fuel_gal == p.total_fuel_gal && q.trip_time_hr == p.trip_time_hr)
        {
            if p.lambda < existing.lambda {
                *existing = *p;
            }
            continue;
        }
        kept.push(*p);
    }
    let dominated = |p: &ParetoPoint, q: &ParetoPoint| {
        q.total_fuel_gal <= p.total_fuel_gal
            && q.trip_time_hr <= p.trip_time_hr
            && (q.total_fuel_gal < p.total_fuel_gal || q.trip_time_hr < p.trip_time_hr)
    };
    let mut points: Vec<ParetoPoint> = kept
        .iter()
        .filter(|p| !kept.iter().any(|q| dominated(p, q)))
        .copied()
        .collect();
    points.sort_by(|a, b| {
        a.trip_time_hr
            .total_cmp(&b.trip_time_hr)
            .then(a.lambda.total_cmp(&b.lambda))
    });
    ParetoFront { points }
}

/// Relative fuel reduction and absolute trip-time change when moving
/// the weight from `lambda_hi` down to `lambda_lo`:
/// `((fuel_hi - fuel_lo) / fuel_hi, time_lo - time_hi)`.
pub fn marginal_tradeoff(
    points: &[ParetoPoint],
    lambda_hi: f64,
    lambda_lo: f64,
) -> Result<(f64, f64), TradeoffError> {
    // grid weights accumulate float error (19 * 0.05 != 0.95 exactly),
    // so match with a tolerance far below any sensible grid step
    let find = |lambda: f64| {
        points
            .iter()
            .find(|p| (p.lambda - lambda).abs() < 1e-9)
            .ok_or(TradeoffError::MissingLambda(lambda))
    };
    let hi = find(lambda_hi)?;
    let lo = find(lambda_lo)?;
    let reduction = if hi.total_fuel_gal > 0.0 {
        (hi.total_fuel_gal - lo.total_fuel_gal) / hi.total_fuel_gal
    } else {
        0.0
    };
    Ok((reduction, lo.trip_time_hr - hi.trip_time_hr))
}

/// Writes sweep outcomes as CSV with the front membership flagged; a
/// point is `on_front` when any of the supplied fronts (typically one
/// per initial fuel level) retains its outcome.
///
/// Columns: `lambda,initial_fuel_gal,total_fuel_gal,trip_time_hr,arrived,on_front`.
pub fn write_csv<W: Write>(
    w: &mut W,
    points: &[ParetoPoint],
    fronts: &[ParetoFront],
) -> io::Result<()> {
    writeln!(
        w,
        "lambda,initial_fuel_gal,total_fuel_gal,trip_time_hr,arrived,on_front"
    )?;
    for p in points {
        let on_front = fronts.iter().flat_map(|f| &f.points).any(|q| {
            q.lambda == p.lambda
                && q.initial_fuel_gal == p.initial_fuel_gal
                && q.total_fuel_gal == p.total_fuel_gal
                && q.trip_time_hr == p.trip_time_hr
        });
        writeln!(
            w,
            "{:.6},{:.6},{:.9},{:.6},{},{}",
            p.lambda, p.initial_fuel_gal, p.total_fuel_gal, p.trip_time_hr, p.arrived, on_front
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Discretization;
    use crate::dp::DiscreteProblem;
    use crate::dynamics::VehicleParams;
    use crate::environment::{
        Bounds, CurrentField, EnvironmentSpec, Port, Position, StartState, TerminalRegion,
    };
    use crate::gridgen::{InputLattice, StateMesh};

    fn point(lambda: f64, fuel: f64, time: f64) -> ParetoPoint {
        ParetoPoint {
            lambda,
            initial_fuel_gal: 8.0,
            total_fuel_gal: fuel,
            trip_time_hr: time,
            arrived: true,
        }
    }

    #[test]
    fn lambda_grid_shapes() {
        assert_eq!(lambda_grid(0.05).len(), 21);
        assert_eq!(lambda_grid(0.5), vec![0.0, 0.5, 1.0]);
        assert_eq!(*lambda_grid(0.05).last().unwrap(), 1.0);
    }

    #[test]
    fn front_drops_dominated_point() {
        let f = front(&[point(0.2, 2.0, 5.0), point(0.4, 3.0, 5.0)]);
        assert_eq!(f.points.len(), 1);
        assert_eq!(f.points[0].total_fuel_gal, 2.0);
    }

    #[test]
    fn front_keeps_single_point() {
        let f = front(&[point(0.5, 2.0, 5.0)]);
        assert_eq!(f.points.len(), 1);
    }

    #[test]
    fn front_keeps_mutually_nondominated_points() {
        let f = front(&[point(0.1, 2.0, 5.0), point(0.2, 1.0, 7.0), point(0.9, 3.0, 4.0)]);
        assert_eq!(f.points.len(), 3);
        // sorted by trip time, fuel strictly decreasing
        let times: Vec<f64> = f.points.iter().map(|p| p.trip_time_hr).collect();
        assert_eq!(times, vec![4.0, 5.0, 7.0]);
        for pair in f.points.windows(2) {
            assert!(pair[1].total_fuel_gal < pair[0].total_fuel_gal);
        }
    }

    #[test]
    fn front_collapses_outcome_ties_to_lowest_lambda() {
        let f = front(&[point(0.6, 2.0, 5.0), point(0.3, 2.0, 5.0)]);
        assert_eq!(f.points.len(), 1);
        assert_eq!(f.points[0].lambda, 0.3);
    }

    #[test]
    fn front_excludes_non_arriving_points() {
        let mut stranded = point(0.0, 1.0, 9.0);
        stranded.arrived = false;
        let f = front(&[stranded, point(0.5, 2.0, 5.0)]);
        assert_eq!(f.points.len(), 1);
        assert_eq!(f.points[0].lambda, 0.5);
    }

    #[test]
    fn marginal_tradeoff_identical_outcomes() {
        let pts = [point(1.0, 2.0, 5.0), point(0.95, 2.0, 5.0)];
        assert_eq!(marginal_tradeoff(&pts, 1.0, 0.95).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn marginal_tradeoff_missing_lambda_errors() {
        let pts = [point(1.0, 2.0, 5.0)];
        assert!(marginal_tradeoff(&pts, 1.0, 0.95).is_err());
    }

    #[test]
    fn csv_round_trip_shape() {
        let pts = vec![point(0.0, 1.0, 7.0), point(1.0, 3.0, 4.0)];
        let f = front(&pts);
        let mut buf = Vec::new();
        write_csv(&mut buf, &pts, std::slice::from_ref(&f)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[0],
            "lambda,initial_fuel_gal,total_fuel_gal,trip_time_hr,arrived,on_front"
        );
        assert!(lines[1].ends_with("true,true"));
    }

    /// Small but non-trivial world for sweep behavior: port midway,
    /// mild current, tight fuel.
    fn sweep_problem() -> DiscreteProblem {
        let env = EnvironmentSpec {
            bounds: Bounds {
                x1_min: 0.0,
                x1_max: 4.0,
                x2_min: 0.0,
                x2_max: 4.0,
            },
            current: CurrentField {
                gamma: 1e-9,
                period_km: 100.0,
                speed_scale: 2.0,
            },
            ports: vec![Port {
                position: Position::new(2.0, 2.0),
                snap_radius: 0.5,
            }],
            terminal: TerminalRegion {
                center: Position::new(4.0, 3.0),
                radius: 0.5,
            },
            start: StartState {
                position: Position::new(0.0, 0.0),
                fuel: 2.0,
            },
        };
        let vehicle = VehicleParams {
            drag_coefficient: 1.0,
            frontal_area_m2: 1.0,
            alpha: 0.022,
            rho_kg_m3: 1.0,
            beta: 0.011,
            tank_capacity_gal: 2.0,
            u_max_km_hr: 4.0,
            refuel_rate_gal_min: 2.0 / 15.0,
        };
        let disc = Discretization {
            mesh_size: 25,
            fuel_step_gal: 1.0,
            input_step_km_hr: 4.0,
            dt_min: 15.0,
            horizon_steps: 8,
            seed: 0,
        };
        let mut grid = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                grid.push(Position::new(i as f64, j as f64));
            }
        }
        let mesh = StateMesh::from_parts(&env, &vehicle, &disc, grid).unwrap();
        let lattice = InputLattice::new(4.0, 4.0);
        DiscreteProblem::new(env, vehicle, mesh, lattice, 0.25, 8)
    }

    #[test]
    fn duplicate_lambdas_give_identical_points() {
        let problem = sweep_problem();
        let pts = sweep(&problem, &[0.3, 0.3], 2.0);
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].total_fuel_gal, pts[1].total_fuel_gal);
        assert_eq!(pts[0].trip_time_hr, pts[1].trip_time_hr);
    }

    #[test]
    fn extreme_lambdas_order_fuel_and_time() {
        let problem = sweep_problem();
        let pts = sweep(&problem, &[0.0, 1.0], 2.0);
        assert!(pts.iter().all(|p| p.arrived), "outcomes: {pts:?}");
        let (fuel_only, time_only) = (&pts[0], &pts[1]);
        assert!(fuel_only.total_fuel_gal <= time_only.total_fuel_gal + 1e-12);
        assert!(fuel_only.trip_time_hr >= time_only.trip_time_hr - 1e-12);
    }

    #[test]
    fn sweep_monotone_in_lambda() {
        let problem = sweep_problem();
        let pts = sweep(&problem, &lambda_grid(0.1), 2.0);
        let arrived: Vec<&ParetoPoint> = pts.iter().filter(|p| p.arrived).collect();
        for pair in arrived.windows(2) {
            assert!(pair[1].total_fuel_gal >= pair[0].total_fuel_gal - 1e-9);
            assert!(pair[1].trip_time_hr <= pair[0].trip_time_hr + 1e-9);
        }
    }

    #[test]
    fn richer_tank_never_scalarizes_worse() {
        let problem = sweep_problem();
        for lambda in lambda_grid(0.25) {
            let sol = dp::solve(&problem, lambda);
            let cost = |fuel: f64| {
                sol.start_cost(
                    &problem.mesh,
                    &State {
                        position: problem.env.start.position,
                        fuel,
                    },
                )
            };
            match (cost(2.0), cost(1.0)) {
                (Some(rich), Some(poor)) => assert!(rich <= poor + 1e-6),
                (None, Some(_)) => panic!("full tank unreachable where low tank arrives"),
                _ => {}
            }
        }
    }

    #[test]
    fn front_of_sweep_has_no_dominated_pair() {
        let problem = sweep_problem();
        let pts = sweep_multi(&problem, &lambda_grid(0.1), &[1.0, 2.0]);
        let f = front(&pts);
        for a in &f.points {
            for b in &f.points {
                if a != b {
                    let weakly_dominates = b.total_fuel_gal <= a.total_fuel_gal
                        && b.trip_time_hr <= a.trip_time_hr
                        && (b.total_fuel_gal < a.total_fuel_gal
                            || b.trip_time_hr < a.trip_time_hr);
                    assert!(!weakly_dominates, "{a:?} dominated by {b:?}");
                }
            }
        }
    }
}
