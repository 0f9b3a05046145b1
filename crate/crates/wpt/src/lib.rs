//! Scenario files, report writers and a parallel grid search on top of
//! `wpt-core`. The `wpt` binary is a thin clap front end over [`run`].

pub mod error;
pub mod montecarlo;
pub mod run;
pub mod scenario_file;
pub mod search;

pub use error::{AppError, AppResult};
pub use scenario_file::{load_scenario, ScenarioFile};
