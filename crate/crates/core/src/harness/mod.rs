//! Scenario definitions, parallel parameter sweeps and their CSV/SVG output.

pub mod baseline;
pub mod config_file;
pub mod output;
pub mod scenario;
pub mod sweep;

pub use baseline::BaselineParameters;
pub use scenario::{
    scenario_custom, scenario_fig2, scenario_fig3, scenario_fig4, scenario_fig5, Axis, AxisKind,
    Fig4Model, Observable, Scenario, ScenarioId, Spacing,
};
pub use sweep::{run_sweep, SweepOptions, SweepResult, SweepRow};
