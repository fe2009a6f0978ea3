//! Finite-horizon backward dynamic programming over the sampled mesh:
//! stage costs, value/policy tables, plan execution, exact-dynamics
//! rollout, and a brute-force enumeration oracle for small instances.
//!
//! States are `(position node, fuel level)` pairs; transitions follow
//! the forward finite-difference step snapped back onto the mesh with
//! nearest-neighbor interpolation. Terminal nodes are absorbing with
//! zero stage cost, so "reach the terminal set by the horizon" and
//! "arrive at any earlier step" coincide. Infeasible transitions carry
//! `+inf` cost rather than penalty constants.

use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{
    self, cruise_position, fuel_rate, ControlInput, State, StepOutcome, VehicleParams,
};
use crate::environment::EnvironmentSpec;
use crate::gridgen::{InputLattice, StateMesh};

const POLICY_UNDEFINED: u16 = u16::MAX;
const POLICY_REFUEL: u16 = u16::MAX - 1;
const POLICY_HOLD: u16 = u16::MAX - 2;

/// Scalarized stage-cost parameters.
///
/// `lambda` blends the normalized fuel term against a unit time
/// penalty; `mdot_max` is the burn rate at maximum input on both axes,
/// so the fuel term equals one when the velocity inputs are maximized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageCostParams {
    pub lambda: f64,
    pub mdot_max: f64,
    pub dt_hr: f64,
}

impl StageCostParams {
    pub fn new(lambda: f64, mdot_max: f64, dt_hr: f64) -> StageCostParams {
        assert!((0.0..=1.0).contains(&lambda), "lambda must lie in [0, 1]");
        assert!(mdot_max > 0.0 && dt_hr > 0.0);
        StageCostParams {
            lambda,
            mdot_max,
            dt_hr,
        }
    }
}

/// One step's scalarized cost:
/// `(1 - lambda) * burn/burn_max + lambda * t_inc`, with `t_inc = 0`
/// inside the terminal set and `1` outside it.
pub fn stage_cost(
    u: &ControlInput,
    at_terminal: bool,
    vehicle: &VehicleParams,
    p: &StageCostParams,
) -> f64 {
    let fuel_term = fuel_rate(u.u1(), u.u2(), vehicle) / p.mdot_max;
    let t_inc = if at_terminal { 0.0 } else { 1.0 };
    (1.0 - p.lambda) * fuel_term + p.lambda * t_inc
}

/// Optimal cost-to-go per `(stage, node, fuel level)`; unreachable
/// states hold `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    n_stages: usize,
    n_nodes: usize,
    n_fuel: usize,
    data: Vec<f64>,
}

impl ValueTable {
    pub fn get(&self, k: usize, node: usize, fuel_idx: usize) -> f64 {
        self.data[(k * self.n_nodes + node) * self.n_fuel + fuel_idx]
    }

    pub fn n_stages(&self) -> usize {
        self.n_stages
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_fuel(&self) -> usize {
        self.n_fuel
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    pub fn from_raw(n_stages: usize, n_nodes: usize, n_fuel: usize, data: Vec<f64>) -> ValueTable {
        assert_eq!(data.len(), n_stages * n_nodes * n_fuel);
        ValueTable {
            n_stages,
            n_nodes,
            n_fuel,
            data,
        }
    }
}

/// The argmin record of the Bellman recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyAction {
    /// Flat index into the input lattice.
    Lattice(usize),
    /// Dock and refuel (admissible only at port nodes).
    Refuel,
    /// Absorbing self-loop at a terminal node.
    Hold,
    /// No finite-cost action exists (unreachable state).
    Undefined,
}

/// Best input per `(stage, node, fuel level)`, defined wherever the
/// value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    n_steps: usize,
    n_nodes: usize,
    n_fuel: usize,
    data: Vec<u16>,
}

impl Policy {
    pub fn get(&self, k: usize, node: usize, fuel_idx: usize) -> PolicyAction {
        match self.data[(k * self.n_nodes + node) * self.n_fuel + fuel_idx] {
            POLICY_UNDEFINED => PolicyAction::Undefined,
            POLICY_REFUEL => PolicyAction::Refuel,
            POLICY_HOLD => PolicyAction::Hold,
            i => PolicyAction::Lattice(i as usize),
        }
    }

    pub fn raw(&self) -> &[u16] {
        &self.data
    }

    pub fn from_raw(n_steps: usize, n_nodes: usize, n_fuel: usize, data: Vec<u16>) -> Policy {
        assert_eq!(data.len(), n_steps * n_nodes * n_fuel);
        Policy {
            n_steps,
            n_nodes,
            n_fuel,
            data,
        }
    }
}

/// A solved instance: value and policy tables plus the weight they
/// were solved at.
#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    pub value: ValueTable,
    pub policy: Policy,
    pub lambda: f64,
}

impl DpSolution {
    /// Optimal cost from an off-mesh start state (snapped onto the
    /// mesh), or `None` when the terminal set is unreachable from it
    /// within the horizon.
    pub fn start_cost(&self, mesh: &StateMesh, start: &State) -> Option<f64> {
        let node = mesh.nearest_node(&start.position);
        let fuel_idx = mesh.nearest_fuel(start.fuel);
        let v = self.value.get(0, node, fuel_idx);
        v.is_finite().then_some(v)
    }
}

/// A scenario compiled against a fixed mesh, lattice, and horizon.
///
/// Construction precomputes the full transition structure, which is
/// independent of the scalarization weight: successor nodes per
/// `(node, input)`, successor fuel indices per `(input, fuel level)`,
/// per-step burns, and the port/terminal node sets. Solving for any
/// number of `lambda` values then reuses the same tables.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub env: EnvironmentSpec,
    pub vehicle: VehicleParams,
    pub mesh: StateMesh,
    pub lattice: InputLattice,
    pub dt_hr: f64,
    pub n_steps: usize,
    mdot_max: f64,
    terminal_node: Vec<bool>,
    port_node: Vec<bool>,
    /// Node-major: successor node of `(node, input)`, or -1 out of bounds.
    succ_node: Vec<i32>,
    /// Exact fuel burned by one step of each input, gallons.
    burn_step: Vec<f64>,
    /// Burn rate of each input normalized by `mdot_max`.
    rate_norm: Vec<f64>,
    /// Input-major: successor fuel index of `(input, fuel level)`, or -1
    /// when the step would empty the tank.
    succ_fuel: Vec<i16>,
    /// First feasible fuel index per input.
    fuel_floor: Vec<usize>,
    /// Post-refuel fuel index per fuel level.
    refuel_fuel: Vec<u16>,
}

impl DiscreteProblem {
    pub fn new(
        env: EnvironmentSpec,
        vehicle: VehicleParams,
        mesh: StateMesh,
        lattice: InputLattice,
        dt_hr: f64,
        n_steps: usize,
    ) -> DiscreteProblem {
        let n_nodes = mesh.len();
        let n_inputs = lattice.len();
        let n_fuel = mesh.fuel().len();
        let mdot_max = vehicle.max_fuel_rate();

        let terminal_node: Vec<bool> = (0..n_nodes)
            .map(|i| env.in_terminal(&mesh.node(i)))
            .collect();
        let port_node: Vec<bool> = (0..n_nodes)
            .map(|i| env.port_at(&mesh.node(i)).is_some())
            .collect();

        let burn_step: Vec<f64> = (0..n_inputs)
            .map(|i| {
                let (u1, u2) = lattice.input(i);
                fuel_rate(u1, u2, &vehicle) * dt_hr
            })
            .collect();
        let rate_norm: Vec<f64> = (0..n_inputs)
            .map(|i| {
                let (u1, u2) = lattice.input(i);
                fuel_rate(u1, u2, &vehicle) / mdot_max
            })
            .collect();

        let succ_node: Vec<i32> = (0..n_nodes)
            .into_par_iter()
            .flat_map_iter(|node| {
                let p = mesh.node(node);
                let mesh = &mesh;
                let env = &env;
                let lattice = &lattice;
                (0..n_inputs).map(move |i| {
                    let (u1, u2) = lattice.input(i);
                    let succ = cruise_position(&p, u1, u2, env, dt_hr);
                    if env.bounds.contains(&succ) {
                        mesh.nearest_node(&succ) as i32
                    } else {
                        -1
                    }
                })
            })
            .collect();

        let mut succ_fuel = vec![-1i16; n_inputs * n_fuel];
        let mut fuel_floor = vec![n_fuel; n_inputs];
        for i in 0..n_inputs {
            for f in 0..n_fuel {
                let rem = mesh.fuel().level(f) - burn_step[i];
                if rem >= 0.0 {
                    succ_fuel[i * n_fuel + f] = mesh.fuel().nearest(rem) as i16;
                    if fuel_floor[i] == n_fuel {
                        fuel_floor[i] = f;
                    }
                }
            }
        }

        let refuel_amount = vehicle.refuel_amount_gal(dt_hr);
        let refuel_fuel: Vec<u16> = (0..n_fuel)
            .map(|f| {
                let filled = (mesh.fuel().level(f) + refuel_amount).min(vehicle.tank_capacity_gal);
                mesh.fuel().nearest(filled) as u16
            })
            .collect();

        DiscreteProblem {
            env,
            vehicle,
            mesh,
            lattice,
            dt_hr,
            n_steps,
            mdot_max,
            terminal_node,
            port_node,
            succ_node,
            burn_step,
            rate_norm,
            succ_fuel,
            fuel_floor,
            refuel_fuel,
        }
    }

    pub fn cost_params(&self, lambda: f64) -> StageCostParams {
        StageCostParams::new(lambda, self.mdot_max, self.dt_hr)
    }

    pub fn is_terminal_node(&self, node: usize) -> bool {
        self.terminal_node[node]
    }

    pub fn is_port_node(&self, node: usize) -> bool {
        self.port_node[node]
    }

    pub fn successor_node(&self, node: usize, input: usize) -> Option<usize> {
        let s = self.succ_node[node * self.lattice.len() + input];
        (s >= 0).then_some(s as usize)
    }

    pub fn burn_per_step(&self, input: usize) -> f64 {
        self.burn_step[input]
    }
}

/// Backward induction over the compiled problem at one weight.
///
/// Stage `k` reads stage `k + 1` as an immutable snapshot; nodes within
/// a stage are independent and evaluated in parallel. The candidate
/// order is every lattice input by ascending flat index, then the
/// refuel action at port nodes; ties keep the earliest candidate, so
/// results are deterministic across runs and thread schedules.
pub fn solve(problem: &DiscreteProblem, lambda: f64) -> DpSolution {
    let p = problem;
    let cost = p.cost_params(lambda);
    let n_nodes = p.mesh.len();
    let n_fuel = p.mesh.fuel().len();
    let n_inputs = p.lattice.len();
    let n = p.n_steps;
    let stage = n_nodes * n_fuel;

    let input_cost: Vec<f64> = p
        .rate_norm
        .iter()
        .map(|r| (1.0 - lambda) * r + lambda)
        .collect();
    let refuel_cost = lambda;

    let mut value = vec![f64::INFINITY; (n + 1) * stage];
    let mut policy = vec![POLICY_UNDEFINED; n * stage];

    // Horizon boundary: zero on terminal nodes, +inf elsewhere.
    for (node, row) in value[n * stage..].chunks_mut(n_fuel).enumerate() {
        if p.terminal_node[node] {
            row.fill(0.0);
        }
    }

    for k in (0..n).rev() {
        let (head, tail) = value.split_at_mut((k + 1) * stage);
        let cur = &mut head[k * stage..];
        let next = &tail[..stage];
        let pol = &mut policy[k * stage..(k + 1) * stage];

        cur.par_chunks_mut(n_fuel)
            .zip(pol.par_chunks_mut(n_fuel))
            .enumerate()
            .for_each(|(node, (vrow, prow))| {
                if p.terminal_node[node] {
                    vrow.fill(0.0);
                    prow.fill(POLICY_HOLD);
                    return;
                }
                let succ_row = &p.succ_node[node * n_inputs..][..n_inputs];
                for (i, (&sn, &c)) in succ_row.iter().zip(&input_cost).enumerate() {
                    if sn < 0 {
                        continue;
                    }
                    let next_row = &next[sn as usize * n_fuel..][..n_fuel];
                    let sf = &p.succ_fuel[i * n_fuel..][..n_fuel];
                    for f in p.fuel_floor[i]..n_fuel {
                        let cand = c + next_row[sf[f] as usize];
                        if cand < vrow[f] {
                            vrow[f] = cand;
                            prow[f] = i as u16;
                        }
                    }
                }
                if p.port_node[node] {
                    let next_row = &next[node * n_fuel..][..n_fuel];
                    for f in 0..n_fuel {
                        let cand = refuel_cost + next_row[p.refuel_fuel[f] as usize];
                        if cand < vrow[f] {
                            vrow[f] = cand;
                            prow[f] = POLICY_REFUEL;
                        }
                    }
                }
            });
    }
    debug_assert!(cost.lambda == lambda);

    DpSolution {
        value: ValueTable::from_raw(n + 1, n_nodes, n_fuel, value),
        policy: Policy::from_raw(n, n_nodes, n_fuel, policy),
        lambda,
    }
}

#[derive(Debug, Error)]
#[error("enumeration guard exceeded: {candidates}^{horizon} sequences > {limit}")]
pub struct EnumerationGuardError {
    pub candidates: usize,
    pub horizon: usize,
    pub limit: f64,
}

const ENUMERATION_GUARD: f64 = 1e7;

/// Exhaustive enumeration of input sequences under identical
/// nearest-neighbor snap semantics; returns the exact minimum cost per
/// `(node, fuel level)` state, node-major.
///
/// This is a verification oracle for [`solve`]: it recomputes every
/// transition from scratch through [`dynamics::step`] and the mesh
/// queries (never the compiled tables) and explores the sequence tree
/// directly. Refuses instances beyond `lattice^horizon = 1e7`.
pub fn brute_force_solve(
    problem: &DiscreteProblem,
    lambda: f64,
) -> Result<Vec<f64>, EnumerationGuardError> {
    let n_inputs = problem.lattice.len();
    if (n_inputs as f64).powi(problem.n_steps as i32) > ENUMERATION_GUARD {
        return Err(EnumerationGuardError {
            candidates: n_inputs,
            horizon: problem.n_steps,
            limit: ENUMERATION_GUARD,
        });
    }
    let cost = problem.cost_params(lambda);
    let n_fuel = problem.mesh.fuel().len();
    let mut out = Vec::with_capacity(problem.mesh.len() * n_fuel);
    for node in 0..problem.mesh.len() {
        for f in 0..n_fuel {
            out.push(enumerate_from(problem, &cost, node, f, 0));
        }
    }
    Ok(out)
}

fn enumerate_from(
    problem: &DiscreteProblem,
    cost: &StageCostParams,
    node: usize,
    fuel_idx: usize,
    k: usize,
) -> f64 {
    let pos = problem.mesh.node(node);
    if problem.env.in_terminal(&pos) {
        return 0.0;
    }
    if k == problem.n_steps {
        return f64::INFINITY;
    }
    let state = State {
        position: pos,
        fuel: problem.mesh.fuel().level(fuel_idx),
    };
    let mut best = f64::INFINITY;
    for i in 0..problem.lattice.len() {
        let (u1, u2) = problem.lattice.input(i);
        let u = ControlInput::Cruise { u1, u2 };
        if let StepOutcome::Next(s) =
            dynamics::step(&state, &u, problem.dt_hr, &problem.env, &problem.vehicle)
        {
            let succ_node = problem.mesh.nearest_node(&s.position);
            let succ_fuel = problem.mesh.nearest_fuel(s.fuel);
            let c = stage_cost(&u, false, &problem.vehicle, cost)
                + enumerate_from(problem, cost, succ_node, succ_fuel, k + 1);
            if c < best {
                best = c;
            }
        }
    }
    let refuel = ControlInput::Refuel;
    if let StepOutcome::Next(s) =
        dynamics::step(&state, &refuel, problem.dt_hr, &problem.env, &problem.vehicle)
    {
        let succ_node = problem.mesh.nearest_node(&s.position);
        let succ_fuel = problem.mesh.nearest_fuel(s.fuel);
        let c = stage_cost(&refuel, false, &problem.vehicle, cost)
            + enumerate_from(problem, cost, succ_node, succ_fuel, k + 1);
        if c < best {
            best = c;
        }
    }
    best
}

/// One executed plan step (mesh-consistent semantics).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanStep {
    pub k: usize,
    pub node: usize,
    pub fuel_idx: usize,
    pub action: PolicyAction,
}

/// Outcome of executing a stored plan under the same snapped dynamics
/// the solver optimized, with the burn ledger kept exact (per-step
/// burns are the true `fuel_rate * dt` of the commanded inputs, not
/// grid increments).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub arrived: bool,
    pub arrival_step: Option<usize>,
    /// Arrival step times the step length; the full horizon when the
    /// plan never arrives.
    pub trip_time_hr: f64,
    /// Total fuel burned, gallons.
    pub total_fuel_gal: f64,
    pub refuel_count: usize,
    pub steps: Vec<PlanStep>,
}

/// Walks the stored policy from a start state snapped onto the mesh,
/// using exactly the transition tables the solver optimized over.
///
/// Arrival, trip time, and scalarized cost therefore reproduce the
/// value table exactly; the returned fuel total is the exact burn of
/// the executed input sequence.
pub fn execute_plan(problem: &DiscreteProblem, sol: &DpSolution, start: &State) -> PlanOutcome {
    let mut node = problem.mesh.nearest_node(&start.position);
    let mut fuel_idx = problem.mesh.nearest_fuel(start.fuel);
    let mut steps = Vec::new();
    let mut total_fuel = 0.0;
    let mut refuels = 0;
    let mut arrival = None;

    for k in 0..problem.n_steps {
        if problem.terminal_node[node] {
            arrival = Some(k);
            break;
        }
        let action = sol.policy.get(k, node, fuel_idx);
        steps.push(PlanStep {
            k,
            node,
            fuel_idx,
            action,
        });
        match action {
            PolicyAction::Lattice(i) => {
                let sn = problem.succ_node[node * problem.lattice.len() + i];
                let sf = problem.succ_fuel[i * problem.mesh.fuel().len() + fuel_idx];
                debug_assert!(sn >= 0 && sf >= 0, "stored plan took an infeasible step");
                total_fuel += problem.burn_step[i];
                node = sn as usize;
                fuel_idx = sf as usize;
            }
            PolicyAction::Refuel => {
                refuels += 1;
                fuel_idx = problem.refuel_fuel[fuel_idx] as usize;
            }
            PolicyAction::Hold | PolicyAction::Undefined => {
                steps.pop();
                break;
            }
        }
    }
    if arrival.is_none() && problem.terminal_node[node] {
        arrival = Some(problem.n_steps);
    }

    PlanOutcome {
        arrived: arrival.is_some(),
        arrival_step: arrival,
        trip_time_hr: arrival.unwrap_or(problem.n_steps) as f64 * problem.dt_hr,
        total_fuel_gal: total_fuel,
        refuel_count: refuels,
        steps,
    }
}

/// One recorded rollout step: the state the input was applied from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub k: usize,
    pub state: State,
    pub input: ControlInput,
    pub fuel_burned_gal: f64,
    pub refueled: bool,
}

/// Forward simulation record under exact (non-snapped) dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub final_state: State,
    pub arrived: bool,
    pub arrival_step: Option<usize>,
    pub trip_time_hr: f64,
    pub total_fuel_gal: f64,
    pub diagnostic: Option<String>,
}

/// Simulates forward from `start` using exact continuous dynamics,
/// steering by the solved tables at the nearest mesh states.
///
/// Each step applies the feasible candidate minimizing
/// `stage_cost + value[k+1]` at the snapped successor — the same rule
/// that selected the stored policy — evaluated from the exact state,
/// with ties broken toward the successor closest to its own mesh node
/// and then toward the lower lattice index (refuel last). On meshes
/// where the snap is exact this follows the stored policy verbatim;
/// off-mesh it keeps the vessel glued to the plan instead of letting
/// snap error compound. If no candidate is feasible the trajectory
/// ends with `arrived = false` and a diagnostic.
pub fn rollout(problem: &DiscreteProblem, sol: &DpSolution, start: &State) -> Trajectory {
    let cost = problem.cost_params(sol.lambda);
    let n_inputs = problem.lattice.len();
    let mut state = *start;
    let mut steps = Vec::new();
    let mut total_fuel = 0.0;
    let mut arrival = None;
    let mut diagnostic = None;

    for k in 0..problem.n_steps {
        if problem.env.in_terminal(&state.position) {
            arrival = Some(k);
            break;
        }

        // Score of one candidate: stage cost plus next-stage value at
        // the snapped successor, with the successor's own snap distance
        // as the tie key.
        let score = |u: &ControlInput| -> Option<(f64, f64, State, f64)> {
            let next = dynamics::step(&state, u, problem.dt_hr, &problem.env, &problem.vehicle)
                .feasible()?;
            let node = problem.mesh.nearest_node(&next.position);
            let fuel_idx = problem.mesh.nearest_fuel(next.fuel);
            let sc = stage_cost(u, false, &problem.vehicle, &cost)
                + sol.value.get(k + 1, node, fuel_idx);
            let snap = next.position.distance_sq(&problem.mesh.node(node));
            let burned = if u.is_refuel() {
                0.0
            } else {
                state.fuel - next.fuel
            };
            Some((sc, snap, next, burned))
        };

        let mut best: Option<(f64, f64, usize, ControlInput, State, f64)> = None;
        for i in 0..=n_inputs {
            let u = if i < n_inputs {
                let (u1, u2) = problem.lattice.input(i);
                ControlInput::Cruise { u1, u2 }
            } else {
                ControlInput::Refuel
            };
            if let Some((sc, snap, next, burned)) = score(&u) {
                let better = match &best {
                    None => true,
                    Some((bsc, bsnap, _, _, _, _)) => {
                        sc < *bsc || (sc == *bsc && snap < *bsnap)
                    }
                };
                if better {
                    best = Some((sc, snap, i, u, next, burned));
                }
            }
        }

        let Some((_, _, _, u, next, burned)) = best else {
            diagnostic = Some(format!(
                "no feasible input at step {k} from ({:.3}, {:.3}) with {:.3} gal",
                state.position.x1, state.position.x2, state.fuel
            ));
            break;
        };

        steps.push(TrajectoryStep {
            k,
            state,
            input: u,
            fuel_burned_gal: burned,
            refueled: u.is_refuel(),
        });
        total_fuel += burned;
        state = next;
    }

    if arrival.is_none() && diagnostic.is_none() && problem.env.in_terminal(&state.position) {
        arrival = Some(problem.n_steps);
    }
    if arrival.is_none() && diagnostic.is_none() {
        diagnostic = Some("horizon exhausted before reaching the terminal region".to_string());
    }

    Trajectory {
        steps,
        final_state: state,
        arrived: arrival.is_some(),
        arrival_step: arrival,
        trip_time_hr: arrival.unwrap_or(problem.n_steps) as f64 * problem.dt_hr,
        total_fuel_gal: total_fuel,
        diagnostic,
    }
}
