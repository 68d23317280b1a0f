//! Scenario configuration, validation and geometry.

mod config;
pub mod seed;
mod topology;

pub use config::{
    AssociationMode, DeploymentMode, PathlossModel, ScenarioConfig, DEFAULT_AREA_SIDE_M,
};
pub use seed::{stream_rng, SimRng, Stream};
pub use topology::{build_topology, grid_shape, Placement, Point, Topology};

/// Returns every violated invariant of `config`; an empty list means the config is usable.
pub fn validate_config(config: &ScenarioConfig) -> Vec<String> {
    config.issues()
}
