//! The three subcommands: `solve`, `sweep`, and `map`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use voyage_core::cache;
use voyage_core::config::{load_scenario, Scenario, DEFAULT_CONFIG};
use voyage_core::dp::{self, DiscreteProblem, DpSolution};
use voyage_core::dynamics::State;
use voyage_core::gridgen::{lhs_positions, InputLattice, StateMesh};
use voyage_core::pareto::{self, ParetoFront, ParetoPoint};

use crate::manifest::{RunManifest, SolveSummary};
use crate::svg;
use crate::{CliError, CommonArgs};

/// Scenario plus everything derived from it for one invocation.
pub struct Session {
    pub scenario: Scenario,
    pub problem: DiscreteProblem,
    pub config_sha256: String,
    pub mesh_hash: String,
    pub vehicle_hash: String,
    cache_dir: Option<PathBuf>,
}

fn usage(err: impl std::fmt::Display) -> CliError {
    CliError::Usage(err.to_string())
}

impl Session {
    /// Loads the config (or the built-in default), applies CLI
    /// overrides, builds the mesh (through the cache when
    /// `VOYAGE_CACHE_DIR` is set), and compiles the problem.
    pub fn open(args: &CommonArgs) -> Result<Session, CliError> {
        let config_text = match &args.config {
            Some(path) => fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?,
            None => DEFAULT_CONFIG.to_string(),
        };
        let mut scenario = load_scenario(&config_text).map_err(usage)?;
        if let Some(seed) = args.seed {
            scenario.discretization.seed = seed;
        }
        if let Some(n) = args.mesh_size {
            if n == 0 {
                return Err(usage("--mesh-size must be at least 1"));
            }
            scenario.discretization.mesh_size = n;
        }
        if let Some(h) = args.horizon {
            scenario.discretization.horizon_steps = h;
        }
        let config_sha256 = cache::text_hash(&config_text);

        let cache_dir = std::env::var_os("VOYAGE_CACHE_DIR").map(PathBuf::from);
        let disc = &scenario.discretization;
        let key = cache::MeshKey {
            n: disc.mesh_size,
            seed: disc.seed,
            bounds: scenario.environment.bounds,
        };
        let sample = match &cache_dir {
            Some(dir) => match cache::load_mesh_sample(dir, &key) {
                Ok(Some(sample)) => sample,
                Ok(None) | Err(_) => {
                    let sample = lhs_positions(key.n, &key.bounds, key.seed);
                    let _ = cache::save_mesh_sample(dir, &key, &sample);
                    sample
                }
            },
            None => lhs_positions(key.n, &key.bounds, key.seed),
        };
        let mesh = StateMesh::from_parts(&scenario.environment, &scenario.vehicle, disc, sample)
            .map_err(|e| usage(format!("mesh construction failed: {e}")))?;
        let mesh_hash = cache::mesh_hash(&mesh);
        let vehicle_hash = cache::vehicle_hash(&scenario.vehicle);
        let lattice = InputLattice::new(scenario.vehicle.u_max_km_hr, disc.input_step_km_hr);
        let problem = DiscreteProblem::new(
            scenario.environment.clone(),
            scenario.vehicle,
            mesh,
            lattice,
            disc.dt_hours(),
            disc.horizon_steps,
        );
        Ok(Session {
            scenario,
            problem,
            config_sha256,
            mesh_hash,
            vehicle_hash,
            cache_dir,
        })
    }

    /// Solve at one weight, consulting the value cache when enabled.
    fn solve_cached(&self, lambda: f64) -> DpSolution {
        let Some(dir) = &self.cache_dir else {
            return dp::solve(&self.problem, lambda);
        };
        let key = cache::ValueKey {
            mesh_hash: self.mesh_hash.clone(),
            lambda,
            horizon: self.problem.n_steps,
            vehicle_hash: self.vehicle_hash.clone(),
        };
        if let Ok(Some(sol)) = cache::load_solution(dir, &key) {
            return sol;
        }
        let sol = dp::solve(&self.problem, lambda);
        let _ = cache::save_solution(dir, &key, &sol);
        sol
    }

    fn start_state(&self, fuel: Option<f64>) -> Result<State, CliError> {
        let fuel = fuel.unwrap_or(self.scenario.environment.start.fuel);
        if !(0.0..=self.scenario.vehicle.tank_capacity_gal).contains(&fuel) {
            return Err(usage(format!(
                "--fuel {fuel} outside [0, {}]",
                self.scenario.vehicle.tank_capacity_gal
            )));
        }
        Ok(State {
            position: self.scenario.environment.start.position,
            fuel,
        })
    }

    fn manifest(&self, command: &str, lambdas: Vec<f64>, fuels: Vec<f64>) -> RunManifest {
        RunManifest::new(
            command,
            self.config_sha256.clone(),
            self.scenario.discretization.seed,
            self.scenario.discretization.mesh_size,
            self.scenario.discretization.horizon_steps,
            lambdas,
            fuels,
        )
    }
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn ensure_out_dir(out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn run_solve(
    args: &CommonArgs,
    lambda: f64,
    fuel: Option<f64>,
    out: &Path,
) -> Result<(), CliError> {
    let session = Session::open(args)?;
    let start = session.start_state(fuel)?;
    let sol = session.solve_cached(lambda);
    if sol.start_cost(&session.problem.mesh, &start).is_none() {
        return Err(CliError::Infeasible(format!(
            "terminal region unreachable from the start with {} gal within {} steps",
            start.fuel, session.problem.n_steps
        )));
    }
    let trajectory = dp::rollout(&session.problem, &sol, &start);

    ensure_out_dir(out)?;
    let dt = session.problem.dt_hr;
    let mut csv = String::from("k,t_hr,x1_km,x2_km,fuel_gal,u1,u2,refueled\n");
    for step in &trajectory.steps {
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
            step.k,
            step.k as f64 * dt,
            step.state.position.x1,
            step.state.position.x2,
            step.state.fuel,
            step.input.u1(),
            step.input.u2(),
            step.refueled
        ));
    }
    let final_k = trajectory.steps.len();
    csv.push_str(&format!(
        "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},false\n",
        final_k,
        final_k as f64 * dt,
        trajectory.final_state.position.x1,
        trajectory.final_state.position.x2,
        trajectory.final_state.fuel,
        0.0,
        0.0
    ));
    write(&out.join("trajectory.csv"), &csv)?;

    let summary = SolveSummary {
        lambda,
        initial_fuel_gal: start.fuel,
        arrived: trajectory.arrived,
        trip_time_hr: trajectory.trip_time_hr,
        total_fuel_gal: trajectory.total_fuel_gal,
        arrival_step: trajectory.arrival_step,
        refuel_stops: trajectory.steps.iter().filter(|s| s.refueled).count(),
        config_sha256: session.config_sha256.clone(),
        mesh_seed: session.scenario.discretization.seed,
        mesh_size: session.scenario.discretization.mesh_size,
        horizon_steps: session.scenario.discretization.horizon_steps,
        tool_version: env!("CARGO_PKG_VERSION"),
    };
    write(&out.join("summary.json"), &to_json(&summary))?;
    write(
        &out.join("trajectory.svg"),
        &svg::trajectory_map(&session.scenario.environment, &trajectory),
    )?;
    write(
        &out.join("manifest.json"),
        &to_json(&session.manifest("solve", vec![lambda], vec![start.fuel])),
    )?;

    if !trajectory.arrived {
        return Err(CliError::Infeasible(format!(
            "rollout did not arrive: {}",
            trajectory
                .diagnostic
                .unwrap_or_else(|| "horizon exhausted".to_string())
        )));
    }
    println!(
        "solved lambda={lambda}: arrived in {:.2} hr burning {:.3} gal ({} refuel stops); outputs in {}",
        trajectory.trip_time_hr,
        trajectory.total_fuel_gal,
        summary.refuel_stops,
        out.display()
    );
    Ok(())
}

pub fn run_sweep(
    args: &CommonArgs,
    lambda_step: f64,
    fuels: Option<Vec<f64>>,
    out: &Path,
) -> Result<(), CliError> {
    let session = Session::open(args)?;
    let fuels = fuels.unwrap_or_else(|| vec![session.scenario.environment.start.fuel]);
    for &fuel in &fuels {
        session.start_state(Some(fuel))?;
    }
    let lambdas = pareto::lambda_grid(lambda_step);
    let points = pareto::sweep_multi_with(&session.problem, &lambdas, &fuels, |lambda| {
        session.solve_cached(lambda)
    });

    let fronts: Vec<(f64, ParetoFront)> = fuels
        .iter()
        .map(|&fuel| {
            let mine: Vec<ParetoPoint> = points
                .iter()
                .filter(|p| p.initial_fuel_gal == fuel)
                .copied()
                .collect();
            (fuel, pareto::front(&mine))
        })
        .collect();

    ensure_out_dir(out)?;
    let mut csv = Vec::new();
    let front_list: Vec<ParetoFront> = fronts.iter().map(|(_, f)| f.clone()).collect();
    pareto::write_csv(&mut csv, &points, &front_list).context("writing pareto.csv")?;
    write(
        &out.join("pareto.csv"),
        std::str::from_utf8(&csv).expect("csv is utf8"),
    )?;
    write(&out.join("pareto.svg"), &svg::pareto_chart(&fronts))?;
    write(
        &out.join("manifest.json"),
        &to_json(&session.manifest("sweep", lambdas.clone(), fuels.clone())),
    )?;

    for (fuel, front) in &fronts {
        if front.points.is_empty() {
            return Err(CliError::Infeasible(format!(
                "no lambda arrives with initial fuel {fuel} gal; front is empty"
            )));
        }
    }
    println!(
        "swept {} lambda values x {} fuel levels; front sizes {:?}; outputs in {}",
        lambdas.len(),
        fuels.len(),
        fronts.iter().map(|(_, f)| f.points.len()).collect::<Vec<_>>(),
        out.display()
    );
    Ok(())
}

pub fn run_map(args: &CommonArgs, out: &Path) -> Result<(), CliError> {
    let session = Session::open(args)?;
    ensure_out_dir(out)?;
    write(
        &out.join("map.svg"),
        &svg::environment_map(&session.scenario.environment),
    )?;
    write(
        &out.join("manifest.json"),
        &to_json(&session.manifest("map", vec![], vec![])),
    )?;
    println!("wrote environment map to {}", out.join("map.svg").display());
    Ok(())
}
