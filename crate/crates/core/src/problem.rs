//! Instances, solutions and their file formats.

use crate::comm::CommKind;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::path::TimedPath;
use crate::world::WorldMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct Instance {
    pub world: WorldMap,
    pub starts: Vec<Point>,
    pub goals: Vec<Point>,
    pub comm: CommKind,
    pub v_c: f64,
    pub d_c: f64,
    pub seed: u64,
}

impl Instance {
    pub fn new(world: WorldMap, starts: Vec<Point>, goals: Vec<Point>, comm: CommKind) -> Self {
        Instance {
            world,
            starts,
            goals,
            comm,
            v_c: 1.0,
            d_c: 0.5,
            seed: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.starts.len()
    }

    pub fn with_comm(mut self, comm: CommKind) -> Self {
        self.comm = comm;
        self
    }
}

/// Instance file: the map is referenced by path and content hash.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub map: String,
    pub map_sha256: String,
    pub n: usize,
    pub starts: Vec<Point>,
    pub goals: Vec<Point>,
    pub comm: CommKind,
    pub v_c: f64,
    pub d_c: f64,
    pub seed: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_map(world: &WorldMap, path: &Path) -> Result<String> {
    let text = world.to_json()?;
    fs::write(path, &text)?;
    Ok(sha256_hex(text.as_bytes()))
}

pub fn read_map(path: &Path) -> Result<WorldMap> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// Writes the map to `map_path` and the instance to `path`. The stored map
/// reference is relative to the instance file when both share a directory.
pub fn save_instance(instance: &Instance, path: &Path, map_path: &Path) -> Result<()> {
    let hash = write_map(&instance.world, map_path)?;
    let reference = match (path.parent(), map_path.parent()) {
        (Some(a), Some(b)) if a == b => map_path.file_name().map(PathBuf::from).unwrap_or_default(),
        _ => map_path.to_path_buf(),
    };
    let file = InstanceFile {
        map: reference.to_string_lossy().into_owned(),
        map_sha256: hash,
        n: instance.n(),
        starts: instance.starts.clone(),
        goals: instance.goals.clone(),
        comm: instance.comm,
        v_c: instance.v_c,
        d_c: instance.d_c,
        seed: instance.seed,
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_slice(&fs::read(path)?)?;
    let map_path = {
        let p = PathBuf::from(&file.map);
        if p.is_absolute() {
            p
        } else {
            path.parent().unwrap_or(Path::new(".")).join(p)
        }
    };
    let bytes = fs::read(&map_path)?;
    let found = sha256_hex(&bytes);
    if found != file.map_sha256 {
        return Err(Error::MapHashMismatch {
            path: map_path.display().to_string(),
            expected: file.map_sha256,
            found,
        });
    }
    let world: WorldMap = serde_json::from_slice(&bytes)?;
    if file.starts.len() != file.n || file.goals.len() != file.n {
        return Err(Error::InvalidConfig(format!(
            "instance declares {} agents but lists {} starts and {} goals",
            file.n,
            file.starts.len(),
            file.goals.len()
        )));
    }
    Ok(Instance {
        world,
        starts: file.starts,
        goals: file.goals,
        comm: file.comm,
        v_c: file.v_c,
        d_c: file.d_c,
        seed: file.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    AllReachGoal,
    /// Iteration cap reached without an all-at-goal node.
    Partial,
    Timeout,
    /// Some goal is unreachable from its start.
    Infeasible,
    /// No agent could make progress.
    Stuck,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub runtime: f64,
    pub iterations: usize,
    pub tct_nodes: usize,
    /// Expansion rounds used in the last iteration.
    pub rounds_last: usize,
    pub rounds_max: usize,
    /// Travel distance per agent.
    pub travel: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub planner: String,
    pub status: Status,
    pub paths: Vec<TimedPath>,
    pub stats: Stats,
}

impl Solution {
    pub fn new(planner: &str, status: Status, paths: Vec<TimedPath>, mut stats: Stats) -> Self {
        stats.travel = paths.iter().map(TimedPath::length).collect();
        Solution {
            planner: planner.to_string(),
            status,
            paths,
            stats,
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == Status::AllReachGoal
    }

    pub fn mean_travel(&self) -> f64 {
        if self.stats.travel.is_empty() {
            0.0
        } else {
            self.stats.travel.iter().sum::<f64>() / self.stats.travel.len() as f64
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;

    #[test]
    fn instance_round_trip_checks_hash() {
        let dir = tempfile::tempdir().unwrap();
        let w = WorldMap::from_rects(20.0, 20.0, &[Rect::new(5.0, 5.0, 6.0, 9.0)], "m").unwrap();
        let inst = Instance::new(w, vec![Point::new(1.0, 1.0)], vec![Point::new(18.0, 18.0)], CommKind::Los);
        let ip = dir.path().join("i.json");
        let mp = dir.path().join("m.json");
        save_instance(&inst, &ip, &mp).unwrap();
        let back = load_instance(&ip).unwrap();
        assert_eq!(back.goals, inst.goals);
        assert_eq!(back.comm, CommKind::Los);
        fs::write(&mp, fs::read_to_string(&mp).unwrap().replace("\"m\"", "\"z\"")).unwrap();
        assert!(matches!(load_instance(&ip), Err(Error::MapHashMismatch { .. })));
    }
}
