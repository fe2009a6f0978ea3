//! Versioned on-disk caches and content hashes.
//!
//! Two cache kinds exist:
//!
//! - **Mesh cache** — the Latin-hypercube position sample, keyed by
//!   `(n, seed, bounds)`, stored as JSON. Anchor augmentation and the
//!   spatial index are rebuilt on load, so the same sample serves any
//!   scenario sharing those key fields.
//! - **Value cache** — a solved value/policy pair, keyed by
//!   `(mesh hash, lambda, horizon, vehicle-params hash)`, stored in a
//!   little-endian binary layout (these tables run to hundreds of
//!   megabytes at full mesh size; see the README before enabling).
//!
//! Both formats carry an explicit version tag and reject key or
//! version mismatches.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dp::{DpSolution, Policy, ValueTable};
use crate::dynamics::VehicleParams;
use crate::environment::{Bounds, Position};

pub const MESH_CACHE_VERSION: u32 = 1;
pub const VALUE_CACHE_MAGIC: &[u8; 8] = b"VOYVAL01";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io: {0}")]
    Io(#[from] io::Error),
    #[error("cache format: {0}")]
    Format(String),
    #[error("cache key mismatch: {0}")]
    KeyMismatch(String),
}

fn format_err(msg: impl Into<String>) -> CacheError {
    CacheError::Format(msg.into())
}

/// Key identifying one LHS draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshKey {
    pub n: usize,
    pub seed: u64,
    pub bounds: Bounds,
}

#[derive(Debug, Serialize, Deserialize)]
struct MeshCacheFile {
    version: u32,
    key: MeshKey,
    positions: Vec<Position>,
}

fn mesh_cache_path(dir: &Path, key: &MeshKey) -> PathBuf {
    let tag = hex_digest({
        let mut h = Sha256::new();
        h.update(key.n.to_le_bytes());
        h.update(key.seed.to_le_bytes());
        for v in [
            key.bounds.x1_min,
            key.bounds.x1_max,
            key.bounds.x2_min,
            key.bounds.x2_max,
        ] {
            h.update(v.to_le_bytes());
        }
        h
    });
    dir.join(format!("mesh-{}.json", &tag[..16]))
}

/// Writes the LHS sample for `key` into `dir`, returning the path.
pub fn save_mesh_sample(
    dir: &Path,
    key: &MeshKey,
    positions: &[Position],
) -> Result<PathBuf, CacheError> {
    fs::create_dir_all(dir)?;
    let path = mesh_cache_path(dir, key);
    let file = MeshCacheFile {
        version: MESH_CACHE_VERSION,
        key: *key,
        positions: positions.to_vec(),
    };
    fs::write(&path, serde_json::to_vec(&file).expect("mesh cache serializes"))?;
    Ok(path)
}

/// Loads the LHS sample for `key` from `dir`, if cached.
pub fn load_mesh_sample(dir: &Path, key: &MeshKey) -> Result<Option<Vec<Position>>, CacheError> {
    let path = mesh_cache_path(dir, key);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let file: MeshCacheFile =
        serde_json::from_slice(&bytes).map_err(|e| format_err(format!("{path:?}: {e}")))?;
    if file.version != MESH_CACHE_VERSION {
        return Err(format_err(format!(
            "mesh cache version {} (expected {MESH_CACHE_VERSION})",
            file.version
        )));
    }
    if file.key != *key {
        return Err(CacheError::KeyMismatch(format!(
            "mesh cache at {path:?} was built for {:?}",
            file.key
        )));
    }
    if file.positions.len() != key.n {
        return Err(format_err("mesh cache point count disagrees with key"));
    }
    Ok(Some(file.positions))
}

/// Hex SHA-256 of a mesh: key fields plus every coordinate and fuel level.
pub fn mesh_hash(mesh: &crate::gridgen::StateMesh) -> String {
    let mut h = Sha256::new();
    h.update(mesh.n_lhs().to_le_bytes());
    h.update(mesh.seed().to_le_bytes());
    for p in mesh.positions() {
        h.update(p.x1.to_le_bytes());
        h.update(p.x2.to_le_bytes());
    }
    for &f in mesh.fuel().levels() {
        h.update(f.to_le_bytes());
    }
    hex_digest(h)
}

/// Hex SHA-256 of the vehicle parameters that shape the solve.
pub fn vehicle_hash(v: &VehicleParams) -> String {
    let mut h = Sha256::new();
    for x in [
        v.drag_coefficient,
        v.frontal_area_m2,
        v.alpha,
        v.rho_kg_m3,
        v.beta,
        v.tank_capacity_gal,
        v.u_max_km_hr,
        v.refuel_rate_gal_min,
    ] {
        h.update(x.to_le_bytes());
    }
    hex_digest(h)
}

/// Hex SHA-256 of arbitrary text (config documents).
pub fn text_hash(text: &str) -> String {
    hex_digest({
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        h
    })
}

fn hex_digest(h: Sha256) -> String {
    let out = h.finalize();
    let mut s = String::with_capacity(out.len() * 2);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Key identifying one solved value/policy pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueKey {
    pub mesh_hash: String,
    pub lambda: f64,
    pub horizon: usize,
    pub vehicle_hash: String,
}

fn value_cache_path(dir: &Path, key: &ValueKey) -> PathBuf {
    let tag = hex_digest({
        let mut h = Sha256::new();
        h.update(key.mesh_hash.as_bytes());
        h.update(key.lambda.to_le_bytes());
        h.update(key.horizon.to_le_bytes());
        h.update(key.vehicle_hash.as_bytes());
        h
    });
    dir.join(format!("value-{}.bin", &tag[..16]))
}

/// Writes a solved table pair into `dir`, returning the path.
///
/// Layout: magic, key block, dimensions, raw little-endian `f64`
/// values, raw little-endian `u16` policy entries.
pub fn save_solution(dir: &Path, key: &ValueKey, sol: &DpSolution) -> Result<PathBuf, CacheError> {
    fs::create_dir_all(dir)?;
    let path = value_cache_path(dir, key);
    let mut w = io::BufWriter::new(fs::File::create(&path)?);
    w.write_all(VALUE_CACHE_MAGIC)?;
    write_str(&mut w, &key.mesh_hash)?;
    w.write_all(&key.lambda.to_le_bytes())?;
    w.write_all(&(key.horizon as u64).to_le_bytes())?;
    write_str(&mut w, &key.vehicle_hash)?;
    let v = &sol.value;
    for dim in [v.n_stages(), v.n_nodes(), v.n_fuel()] {
        w.write_all(&(dim as u64).to_le_bytes())?;
    }
    for x in v.raw() {
        w.write_all(&x.to_le_bytes())?;
    }
    for e in sol.policy.raw() {
        w.write_all(&e.to_le_bytes())?;
    }
    w.flush()?;
    Ok(path)
}

/// Loads a solved table pair for `key` from `dir`, if cached.
pub fn load_solution(dir: &Path, key: &ValueKey) -> Result<Option<DpSolution>, CacheError> {
    let path = value_cache_path(dir, key);
    let file = match fs::File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut r = io::BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != VALUE_CACHE_MAGIC {
        return Err(format_err("bad value cache magic"));
    }
    let mesh_hash = read_str(&mut r)?;
    let lambda = read_f64(&mut r)?;
    let horizon = read_u64(&mut r)? as usize;
    let vehicle_hash = read_str(&mut r)?;
    let stored = ValueKey {
        mesh_hash,
        lambda,
        horizon,
        vehicle_hash,
    };
    if stored != *key {
        return Err(CacheError::KeyMismatch(format!(
            "value cache at {path:?} was built for lambda={} horizon={}",
            stored.lambda, stored.horizon
        )));
    }
    let n_stages = read_u64(&mut r)? as usize;
    let n_nodes = read_u64(&mut r)? as usize;
    let n_fuel = read_u64(&mut r)? as usize;
    let n_values = n_stages
        .checked_mul(n_nodes)
        .and_then(|x| x.checked_mul(n_fuel))
        .ok_or_else(|| format_err("value cache dimensions overflow"))?;
    let mut values = vec![0.0f64; n_values];
    for v in values.iter_mut() {
        *v = read_f64(&mut r)?;
    }
    let n_policy = (n_stages - 1) * n_nodes * n_fuel;
    let mut policy = vec![0u16; n_policy];
    for e in policy.iter_mut() {
        let mut b = [0u8; 2];
        r.read_exact(&mut b)?;
        *e = u16::from_le_bytes(b);
    }
    Ok(Some(DpSolution {
        value: ValueTable::from_raw(n_stages, n_nodes, n_fuel, values),
        policy: Policy::from_raw(n_stages - 1, n_nodes, n_fuel, policy),
        lambda: stored.lambda,
    }))
}

fn write_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_all(&(s.len() as u64).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn read_str<R: Read>(r: &mut R) -> Result<String, CacheError> {
    let len = read_u64(r)? as usize;
    if len > 1 << 16 {
        return Err(format_err("unreasonable string length in cache"));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| format_err("non-utf8 string in cache"))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, CacheError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, CacheError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
