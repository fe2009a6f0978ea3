//! Discretized state and input spaces: a Latin-hypercube position
//! sample augmented with the scenario's anchor points, a uniform fuel
//! grid, a uniform input lattice, and an exact nearest-neighbor index.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::Discretization;
use crate::dynamics::VehicleParams;
use crate::environment::{Bounds, EnvironmentSpec, Position};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh requires at least one sample point")]
    Empty,
    #[error("fuel grid: {0}")]
    FuelGrid(String),
}

/// Latin-hypercube position sample over `bounds`.
///
/// Each axis is divided into `n` equal strata; a random permutation
/// assigns one stratum per point and the coordinate is drawn uniformly
/// within its stratum, independently per axis. Deterministic for a
/// fixed `(n, bounds, seed)`.
pub fn lhs_positions(n: usize, bounds: &Bounds, seed: u64) -> Vec<Position> {
    assert!(n >= 1, "lhs_positions requires n >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> Vec<f64> {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        strata
            .into_iter()
            .map(|s| {
                let jitter: f64 = rng.random();
                lo + (s as f64 + jitter) / n as f64 * (hi - lo)
            })
            .collect()
    };
    let xs = axis(&mut rng, bounds.x1_min, bounds.x1_max);
    let ys = axis(&mut rng, bounds.x2_min, bounds.x2_max);
    xs.into_iter()
        .zip(ys)
        .map(|(x1, x2)| Position::new(x1, x2))
        .collect()
}

/// Uniform fuel grid from zero to the tank capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct FuelGrid {
    levels: Vec<f64>,
    capacity: f64,
}

impl FuelGrid {
    /// Builds the grid `0, step, 2*step, ..., capacity`. The step must
    /// divide the capacity evenly (within 1e-9 of an integer count).
    pub fn new(capacity_gal: f64, step_gal: f64) -> Result<FuelGrid, MeshError> {
        if capacity_gal.is_nan() || step_gal.is_nan() || capacity_gal <= 0.0 || step_gal <= 0.0 {
            return Err(MeshError::FuelGrid(
                "capacity and step must be positive".into(),
            ));
        }
        let count = capacity_gal / step_gal;
        if (count - count.round()).abs() > 1e-9 {
            return Err(MeshError::FuelGrid(format!(
                "step {step_gal} does not divide capacity {capacity_gal}"
            )));
        }
        let last = count.round() as usize;
        let levels = (0..=last)
            .map(|i| capacity_gal * i as f64 / last as f64)
            .collect();
        Ok(FuelGrid {
            levels,
            capacity: capacity_gal,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, idx: usize) -> f64 {
        self.levels[idx]
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Index of the grid level nearest to `f`; exact midpoints round up
    /// (toward more fuel). Out-of-range values land on the end levels —
    /// feasibility of negative fuel is the caller's check, not this one.
    pub fn nearest(&self, f: f64) -> usize {
        let last = self.levels.len() - 1;
        if f <= self.levels[0] {
            return 0;
        }
        if f >= self.levels[last] {
            return last;
        }
        let step = self.capacity / last as f64;
        let mut lo = ((f / step).floor() as usize).min(last - 1);
        // guard against a one-off stratum from float division
        if self.levels[lo] > f && lo > 0 {
            lo -= 1;
        }
        let hi = lo + 1;
        if self.levels[hi] - f <= f - self.levels[lo] {
            hi
        } else {
            lo
        }
    }
}

/// Uniform lattice of commanded velocities, one axis grid per input.
///
/// Levels run from `+u_max` down to `-u_max` and always contain zero;
/// the flat candidate index is `i1 * levels_per_axis + i2`. The
/// descending order fixes the solver's lowest-index tie-break toward
/// forward (positive-axis) inputs, which keeps time-greedy plans from
/// dithering among cost-equal candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct InputLattice {
    u1_levels: Vec<f64>,
    u2_levels: Vec<f64>,
}

impl InputLattice {
    /// `step` is the nominal lattice spacing; the level count per axis
    /// is `2 * round(u_max / step) + 1` and levels are spaced exactly
    /// uniformly over `[-u_max, u_max]`.
    pub fn new(u_max: f64, step: f64) -> InputLattice {
        assert!(u_max > 0.0 && step > 0.0);
        let half = (u_max / step).round().max(1.0) as i64;
        let levels: Vec<f64> = (-half..=half)
            .map(|i| {
                if i == 0 {
                    0.0 // avoid -0.0 in the middle level
                } else {
                    -u_max * i as f64 / half as f64
                }
            })
            .collect();
        InputLattice {
            u1_levels: levels.clone(),
            u2_levels: levels,
        }
    }

    pub fn u1_levels(&self) -> &[f64] {
        &self.u1_levels
    }

    pub fn u2_levels(&self) -> &[f64] {
        &self.u2_levels
    }

    /// Number of lattice candidates.
    pub fn len(&self) -> usize {
        self.u1_levels.len() * self.u2_levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1_levels.is_empty() || self.u2_levels.is_empty()
    }

    /// Commanded velocities of flat candidate `idx`.
    pub fn input(&self, idx: usize) -> (f64, f64) {
        let n2 = self.u2_levels.len();
        (self.u1_levels[idx / n2], self.u2_levels[idx % n2])
    }
}

/// Sampled state mesh: positions (LHS sample plus anchors), fuel grid,
/// and the spatial index. Immutable after construction; concurrent
/// queries are safe.
#[derive(Debug, Clone)]
pub struct StateMesh {
    positions: Vec<Position>,
    fuel: FuelGrid,
    seed: u64,
    n_lhs: usize,
    tree: KdTree,
}

impl StateMesh {
    /// Builds the mesh for a scenario: `disc.mesh_size` LHS points plus
    /// the exact port centers, the start position, and the terminal
    /// center as additional nodes (so the docked and terminal
    /// conditions are representable under nearest-neighbor snap).
    /// Pass pre-generated LHS points via [`StateMesh::from_parts`] to
    /// reuse a cached sample.
    pub fn build(
        env: &EnvironmentSpec,
        vehicle: &VehicleParams,
        disc: &Discretization,
    ) -> Result<StateMesh, MeshError> {
        let lhs = lhs_positions(disc.mesh_size, &env.bounds, disc.seed);
        Self::from_parts(env, vehicle, disc, lhs)
    }

    /// Assembles a mesh from an existing LHS sample (see `cache`).
    pub fn from_parts(
        env: &EnvironmentSpec,
        vehicle: &VehicleParams,
        disc: &Discretization,
        lhs: Vec<Position>,
    ) -> Result<StateMesh, MeshError> {
        if lhs.is_empty() {
            return Err(MeshError::Empty);
        }
        let n_lhs = lhs.len();
        let mut positions = lhs;
        let mut anchors: Vec<Position> = env.ports.iter().map(|p| p.position).collect();
        anchors.push(env.start.position);
        anchors.push(env.terminal.center);
        for a in anchors {
            if !positions.iter().any(|p| p.x1 == a.x1 && p.x2 == a.x2) {
                positions.push(a);
            }
        }
        let fuel = FuelGrid::new(vehicle.tank_capacity_gal, disc.fuel_step_gal)?;
        let tree = KdTree::build(&positions);
        Ok(StateMesh {
            positions,
            fuel,
            seed: disc.seed,
            n_lhs,
            tree,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn node(&self, idx: usize) -> Position {
        self.positions[idx]
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    /// Number of positions drawn by the LHS sample (anchor nodes follow).
    pub fn n_lhs(&self) -> usize {
        self.n_lhs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fuel(&self) -> &FuelGrid {
        &self.fuel
    }

    /// Index of the mesh position nearest to `p` in Euclidean distance,
    /// exact distance ties broken toward the lowest index. Agrees with
    /// a linear scan on every query.
    pub fn nearest_node(&self, p: &Position) -> usize {
        self.tree.nearest(&self.positions, p)
    }

    /// Index of the fuel level nearest to `f` (midpoints round up).
    pub fn nearest_fuel(&self, f: f64) -> usize {
        self.fuel.nearest(f)
    }
}

const LEAF_SIZE: usize = 12;

/// Exact 2-d kd-tree over mesh positions.
///
/// Purely an accelerator: queries return exactly what a lowest-index
/// linear scan would, including on distance ties, because subtrees are
/// pruned only when strictly farther than the current best and
/// candidates replace the best only on (distance, index) improvement.
#[derive(Debug, Clone)]
struct KdTree {
    nodes: Vec<KdNode>,
    /// Point indices, permuted so each tree node owns a contiguous slice.
    order: Vec<u32>,
}

#[derive(Debug, Clone)]
enum KdNode {
    Leaf {
        start: u32,
        len: u32,
    },
    Split {
        axis: u8,
        value: f64,
        left: u32,
        right: u32,
    },
}

impl KdTree {
    fn build(points: &[Position]) -> KdTree {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        Self::build_rec(points, &mut order, 0, &mut nodes);
        KdTree { nodes, order }
    }

    fn build_rec(points: &[Position], order: &mut [u32], offset: u32, nodes: &mut Vec<KdNode>) -> u32 {
        let id = nodes.len() as u32;
        if order.len() <= LEAF_SIZE {
            nodes.push(KdNode::Leaf {
                start: offset,
                len: order.len() as u32,
            });
            return id;
        }
        // split the wider axis at the median
        let (mut min1, mut max1, mut min2, mut max2) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &i in order.iter() {
            let p = &points[i as usize];
            min1 = min1.min(p.x1);
            max1 = max1.max(p.x1);
            min2 = min2.min(p.x2);
            max2 = max2.max(p.x2);
        }
        let axis = if max1 - min1 >= max2 - min2 { 0u8 } else { 1u8 };
        let coord = |i: u32| {
            let p = &points[i as usize];
            if axis == 0 {
                p.x1
            } else {
                p.x2
            }
        };
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| coord(a).total_cmp(&coord(b)));
        let value = coord(order[mid]);
        nodes.push(KdNode::Leaf { start: 0, len: 0 }); // placeholder
        let (left_slice, right_slice) = order.split_at_mut(mid);
        let left = Self::build_rec(points, left_slice, offset, nodes);
        let right = Self::build_rec(points, right_slice, offset + mid as u32, nodes);
        nodes[id as usize] = KdNode::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn nearest(&self, points: &[Position], query: &Position) -> usize {
        let mut best = (f64::INFINITY, u32::MAX);
        self.search(points, query, 0, &mut best);
        best.1 as usize
    }

    fn search(&self, points: &[Position], q: &Position, node: u32, best: &mut (f64, u32)) {
        match &self.nodes[node as usize] {
            KdNode::Leaf { start, len } => {
                for &i in &self.order[*start as usize..(*start + *len) as usize] {
                    let d2 = points[i as usize].distance_sq(q);
                    if d2 < best.0 || (d2 == best.0 && i < best.1) {
                        *best = (d2, i);
                    }
                }
            }
            KdNode::Split {
                axis,
                value,
                left,
                right,
            } => {
                let qc = if *axis == 0 { q.x1 } else { q.x2 };
                let (near, far) = if qc < *value {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search(points, q, near, best);
                let plane = qc - value;
                // visit the far side even on exact ties so lower-index
                // equidistant points are never missed
                if plane * plane <= best.0 {
                    self.search(points, q, far, best);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_bounds(hi: f64) -> Bounds {
        Bounds {
            x1_min: 0.0,
            x1_max: hi,
            x2_min: 0.0,
            x2_max: hi,
        }
    }

    /// Reference oracle: lowest-index linear scan.
    fn nearest_linear(points: &[Position], q: &Position) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, p) in points.iter().enumerate() {
            let d2 = p.distance_sq(q);
            if d2 < best.0 {
                best = (d2, i);
            }
        }
        best.1
    }

    #[test]
    fn lhs_single_point_in_bounds() {
        let b = unit_bounds(10.0);
        let pts = lhs_positions(1, &b, 7);
        assert_eq!(pts.len(), 1);
        assert!(b.contains(&pts[0]));
    }

    #[test]
    fn lhs_four_points_stratified_on_each_axis() {
        let b = unit_bounds(4.0);
        let pts = lhs_positions(4, &b, 3);
        for accessor in [|p: &Position| p.x1, |p: &Position| p.x2] {
            let mut coords: Vec<f64> = pts.iter().map(accessor).collect();
            coords.sort_by(f64::total_cmp);
            for (i, c) in coords.iter().enumerate() {
                assert!(
                    *c >= i as f64 && *c < (i + 1) as f64,
                    "coordinate {c} escaped stratum {i}"
                );
            }
        }
    }

    #[test]
    fn lhs_deterministic_for_fixed_seed() {
        let b = unit_bounds(150.0);
        assert_eq!(lhs_positions(50, &b, 42), lhs_positions(50, &b, 42));
        assert_ne!(lhs_positions(50, &b, 42), lhs_positions(50, &b, 43));
    }

    #[test]
    fn fuel_grid_endpoints_and_count() {
        let g = FuelGrid::new(8.0, 0.1).unwrap();
        assert_eq!(g.len(), 81);
        assert_eq!(g.level(0), 0.0);
        assert_eq!(g.level(80), 8.0);
    }

    #[test]
    fn nearest_fuel_examples() {
        let g = FuelGrid::new(8.0, 0.1).unwrap();
        assert_eq!(g.nearest(0.10), 1);
        assert_eq!(g.nearest(0.05), 1, "midpoint rounds toward more fuel");
        assert_eq!(g.nearest(8.0), 80);
        assert_eq!(g.nearest(-0.3), 0);
        assert_eq!(g.nearest(11.0), 80);
    }

    #[test]
    fn input_lattice_default_shape() {
        let l = InputLattice::new(21.33, 10.67);
        assert_eq!(l.u1_levels().len(), 5);
        assert_eq!(l.u2_levels().len(), 5);
        assert_eq!(l.len(), 25);
        assert_eq!(l.input(0), (21.33, 21.33));
        assert_eq!(l.input(12), (0.0, 0.0));
        assert_eq!(l.input(24), (-21.33, -21.33));
        assert!(l.u1_levels().contains(&0.0));
        // symmetric about zero
        for i in 0..5 {
            assert_eq!(l.u1_levels()[i], -l.u1_levels()[4 - i]);
        }
    }

    #[test]
    fn nearest_node_exact_hit_and_tie() {
        let pts = vec![
            Position::new(0.0, 0.0),
            Position::new(2.0, 0.0),
            Position::new(1.0, 5.0),
        ];
        let tree = KdTree::build(&pts);
        assert_eq!(tree.nearest(&pts, &Position::new(2.0, 0.0)), 1);
        // equidistant between nodes 0 and 1
        assert_eq!(tree.nearest(&pts, &Position::new(1.0, 0.0)), 0);
    }

    #[test]
    fn nearest_node_matches_linear_scan_on_random_queries() {
        let b = unit_bounds(150.0);
        let pts = lhs_positions(800, &b, 11);
        let tree = KdTree::build(&pts);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let q = Position::new(rng.random::<f64>() * 160.0 - 5.0, rng.random::<f64>() * 160.0 - 5.0);
            assert_eq!(tree.nearest(&pts, &q), nearest_linear(&pts, &q));
        }
    }

    #[test]
    fn mesh_contains_anchor_nodes() {
        let scenario = crate::config::Scenario::default_scenario();
        let disc = Discretization {
            mesh_size: 200,
            ..scenario.discretization.clone()
        };
        let mesh = StateMesh::build(&scenario.environment, &scenario.vehicle, &disc).unwrap();
        assert_eq!(mesh.n_lhs(), 200);
        assert_eq!(mesh.len(), 200 + 3 + 2);
        for port in &scenario.environment.ports {
            let idx = mesh.nearest_node(&port.position);
            assert_eq!(mesh.node(idx), port.position);
        }
        let s = mesh.nearest_node(&scenario.environment.start.position);
        assert_eq!(mesh.node(s), scenario.environment.start.position);
        let t = mesh.nearest_node(&scenario.environment.terminal.center);
        assert_eq!(mesh.node(t), scenario.environment.terminal.center);
    }

    #[test]
    fn mesh_reproducible_bitwise() {
        let scenario = crate::config::Scenario::default_scenario();
        let disc = Discretization {
            mesh_size: 300,
            ..scenario.discretization.clone()
        };
        let a = StateMesh::build(&scenario.environment, &scenario.vehicle, &disc).unwrap();
        let b = StateMesh::build(&scenario.environment, &scenario.vehicle, &disc).unwrap();
        assert_eq!(a.positions(), b.positions());
    }

    proptest! {
        // Marginal stratification holds for every n and seed.
        #[test]
        fn lhs_stratification_property(n in 1usize..60, seed in 0u64..500) {
            let b = unit_bounds(1.0);
            let pts = lhs_positions(n, &b, seed);
            prop_assert_eq!(pts.len(), n);
            for accessor in [|p: &Position| p.x1, |p: &Position| p.x2] {
                let mut coords: Vec<f64> = pts.iter().map(accessor).collect();
                coords.sort_by(f64::total_cmp);
                for (i, c) in coords.iter().enumerate() {
                    let lo = i as f64 / n as f64;
                    let hi = (i + 1) as f64 / n as f64;
                    prop_assert!(*c >= lo && *c < hi);
                }
            }
        }

        // The spatial index never disagrees with the linear scan.
        #[test]
        fn kd_tree_equals_linear_scan(seed in 0u64..50, nq in 1usize..40) {
            let b = unit_bounds(100.0);
            let pts = lhs_positions(120, &b, seed);
            let tree = KdTree::build(&pts);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            for _ in 0..nq {
                let q = Position::new(
                    rng.random::<f64>() * 110.0 - 5.0,
                    rng.random::<f64>() * 110.0 - 5.0,
                );
                prop_assert_eq!(tree.nearest(&pts, &q), nearest_linear(&pts, &q));
            }
        }

        // Midpoint rule: nearest_fuel rounds half-steps up, and is
        // monotone non-decreasing in its argument.
        #[test]
        fn nearest_fuel_monotone(f1 in -1.0..9.0f64, f2 in -1.0..9.0f64) {
            let g = FuelGrid::new(8.0, 0.1).unwrap();
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            prop_assert!(g.nearest(lo) <= g.nearest(hi));
        }
    }
}
