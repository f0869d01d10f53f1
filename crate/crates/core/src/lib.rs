//! Longitudinal electric-vehicle simulator with a pulse-and-glide capable
//! adaptive cruise controller and a hybrid GA/PSO optimizer for tuning it.

pub mod config;
pub mod controller;
pub mod igpso;
pub mod plant;
pub mod scenario;

pub use config::{load_config, Config, ConfigError, DriveCycle};
pub use controller::{ControlCommand, CruisePreference, LeadInfo, Mode, ModeState, PngParams, PngPhase, Regime};
pub use plant::{Plant, PlantError, PlantState};
