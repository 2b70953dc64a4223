//! Open-system evolution: time-local master equations with signed,
//! time-dependent rates, and exact system–environment dilations.

mod family;
mod grid;
mod model;
mod rate;
mod total;

pub use family::{
    apply_map, build_map_family, evolve_state, hermiticity_preservation_defect, semigroup_defect,
    trace_preservation_defect, DynamicalMapFamily, MapSource, StateTrajectory, MAP_INVARIANT_TOL,
};
pub use grid::TimeGrid;
pub use model::{generator_at, Channel, ModelSpec};
pub use rate::{integrated_rate, RateProfile};
pub use total::{total_system_family, TotalSystemModel, MAX_JOINT_DIM};
