//! TOML experiment configuration.

use crate::euler::GasModel;
use crate::geometry::{MetricMode, Warp};
use crate::solver::{FluxMode, ProjectionMode, SolverConfig};
use crate::wadg::{ConservationFix, MassMode};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub mesh: MeshSection,
    pub run: RunSection,
    pub physics: PhysicsSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSection {
    /// Preset name: vortex2d, pulse2d, consres2d, projstudy2d, geoterms3d,
    /// freestream3d, vortex3d, taylorgreen3d.
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSection {
    pub dim: usize,
    /// "box" or "msh".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extents: Vec<[f64; 2]>,
    /// Target edge lengths of the mesh family (box kind); one run per level.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<f64>,
    /// Mesh files of the family (msh kind).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<String>,
    pub periodic: Vec<bool>,
    pub warp: String,
    pub metric_mode: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub degree: usize,
    pub cfl: f64,
    pub final_time: f64,
    /// When set, overrides final_time with num_steps * dt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_steps: Option<usize>,
    pub flux: String,
    pub mass_mode: String,
    pub projection: String,
    pub conservation_fix: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsSection {
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    pub dir: String,
    pub cadence: f64,
    pub write_solution: bool,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization")
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        Ok(SolverConfig {
            gas: GasModel::new(self.physics.gamma)?,
            flux: FluxMode::parse(&self.run.flux)?,
            mass_mode: MassMode::parse(&self.run.mass_mode)?,
            projection: ProjectionMode::parse(&self.run.projection)?,
            fix: ConservationFix::parse(&self.run.conservation_fix)?,
            cfl: self.run.cfl,
            final_time: self.run.final_time,
            output_cadence: self.output.cadence,
        })
    }

    pub fn warp(&self) -> Result<Warp> {
        Warp::parse(&self.mesh.warp)
    }

    pub fn metric_mode(&self) -> Result<MetricMode> {
        match &self.mesh.metric_mode {
            Some(s) => MetricMode::parse(s),
            None => Ok(MetricMode::default_for(self.mesh.dim)),
        }
    }

    /// Cells per axis for a box level with target edge length `h`.
    pub fn cells_for_level(&self, h: f64) -> Result<Vec<usize>> {
        if self.mesh.extents.len() < self.mesh.dim {
            return Err(Error::Config("box mesh needs extents per axis".into()));
        }
        Ok(self
            .mesh
            .extents
            .iter()
            .take(self.mesh.dim)
            .map(|e| (((e[1] - e[0]) / h).round() as usize).max(1))
            .collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.cfl <= 0.0 {
            return Err(Error::Config("cfl must be positive".into()));
        }
        if self.run.final_time < 0.0 {
            return Err(Error::Config("final_time must be nonnegative".into()));
        }
        if self.mesh.kind != "box" && self.mesh.kind != "msh" {
            return Err(Error::Config(format!("unknown mesh kind '{}'", self.mesh.kind)));
        }
        if self.mesh.kind == "box" && self.mesh.levels.is_empty() {
            return Err(Error::Config("box mesh needs at least one level".into()));
        }
        if self.mesh.kind == "msh" && self.mesh.paths.is_empty() {
            return Err(Error::Config("msh mesh needs at least one path".into()));
        }
        self.solver_config()?;
        self.warp()?;
        self.metric_mode()?;
        Ok(())
    }
}
