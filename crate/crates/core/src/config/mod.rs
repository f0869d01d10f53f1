//! Vehicle, battery, motor and controller parameters plus drive cycles.
//!
//! Everything is loaded from one JSON document (see `data/default_config.json`
//! for the bundled default) and validated once. After validation the values are
//! immutable and can be shared freely between simulation runs.

mod curve;
mod cycle;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::{lookup_clamped, Curve, Grid2};
pub use cycle::{load_drive_cycle, CycleError, DriveCycle};

use curve::invalid;

pub const GEAR_COUNT: usize = 5;
const MAX_MOTOR_TORQUE_NM: f64 = 150.0;

pub const BUNDLED_CONFIG_JSON: &str = include_str!("../../data/default_config.json");
pub const BUNDLED_NEDC_CSV: &str = include_str!("../../data/nedc.csv");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    /// Name of the offending field for invariant violations.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

/// Speed thresholds for the five-speed gearbox.
///
/// Gear `g` upshifts when vehicle speed reaches `upshift_kmh[g-1]` and
/// downshifts from `g+1` when speed falls below `downshift_kmh[g-1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSchedule {
    pub upshift_kmh: [f64; GEAR_COUNT - 1],
    pub downshift_kmh: [f64; GEAR_COUNT - 1],
}

impl ShiftSchedule {
    /// Gear to use at `speed_ms`, starting from `current` (1-based).
    pub fn select(&self, current: usize, speed_ms: f64) -> usize {
        let kmh = speed_ms * 3.6;
        let mut gear = current.clamp(1, GEAR_COUNT);
        while gear < GEAR_COUNT && kmh >= self.upshift_kmh[gear - 1] {
            gear += 1;
        }
        while gear > 1 && kmh < self.downshift_kmh[gear - 2] {
            gear -= 1;
        }
        gear
    }

    /// Gear for a vehicle starting at `speed_ms` with no shift history.
    pub fn initial_gear(&self, speed_ms: f64) -> usize {
        self.select(1, speed_ms)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let up = &self.upshift_kmh;
        let down = &self.downshift_kmh;
        if up.iter().chain(down).any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(invalid("shift_schedule", "thresholds must be positive"));
        }
        if up.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("shift_schedule.upshift_kmh", "must be strictly increasing"));
        }
        if down.iter().zip(up).any(|(d, u)| d >= u) {
            return Err(invalid(
                "shift_schedule.downshift_kmh",
                "each downshift threshold must lie below its upshift threshold",
            ));
        }
        if down.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("shift_schedule.downshift_kmh", "must be strictly increasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    pub mass_kg: f64,
    pub air_drag_coeff: f64,
    pub rolling_coeff: f64,
    pub frontal_area_m2: f64,
    pub air_density_kgm3: f64,
    pub gravity_ms2: f64,
    pub gear_ratios: [f64; GEAR_COUNT],
    pub gear_efficiencies: [f64; GEAR_COUNT],
    /// Final drive ratio, written `i_r` in the parameter table and `i_f` in the torque relations.
    pub final_drive_ratio: f64,
    pub tire_radius_m: f64,
    /// Equivalent (rotating) mass as a multiple of `mass_kg`.
    #[serde(default = "defaults::equiv_mass_factor")]
    pub equiv_mass_factor: f64,
    /// Hydraulic brake torque per unit brake pressure.
    pub hydraulic_torque_per_pressure: f64,
    #[serde(default = "defaults::max_accel")]
    pub max_accel_ms2: f64,
    #[serde(default = "defaults::max_decel")]
    pub max_decel_ms2: f64,
    pub shift_schedule: ShiftSchedule,
}

impl VehicleParams {
    pub fn equivalent_mass_kg(&self) -> f64 {
        self.equiv_mass_factor * self.mass_kg
    }

    /// Gear ratio for a 1-based gear index.
    pub fn gear_ratio(&self, gear: usize) -> f64 {
        self.gear_ratios[gear - 1]
    }

    pub fn gear_efficiency(&self, gear: usize) -> f64 {
        self.gear_efficiencies[gear - 1]
    }

    fn validate(&self) -> Result<(), ConfigError> {
        positive("vehicle.mass_kg", self.mass_kg)?;
        positive("vehicle.tire_radius_m", self.tire_radius_m)?;
        positive("vehicle.final_drive_ratio", self.final_drive_ratio)?;
        positive("vehicle.frontal_area_m2", self.frontal_area_m2)?;
        positive("vehicle.air_density_kgm3", self.air_density_kgm3)?;
        positive("vehicle.gravity_ms2", self.gravity_ms2)?;
        positive(
            "vehicle.hydraulic_torque_per_pressure",
            self.hydraulic_torque_per_pressure,
        )?;
        nonnegative("vehicle.air_drag_coeff", self.air_drag_coeff)?;
        nonnegative("vehicle.rolling_coeff", self.rolling_coeff)?;
        if self.gear_ratios.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(invalid("gear_ratios", "all gear ratios must be > 0"));
        }
        if self.gear_ratios.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("gear_ratios", "must be strictly decreasing from gear 1 to 5"));
        }
        if self
            .gear_efficiencies
            .iter()
            .any(|e| !(*e > 0.0 && *e <= 1.0))
        {
            return Err(invalid("gear_efficiencies", "all efficiencies must lie in (0, 1]"));
        }
        if !(self.equiv_mass_factor >= 1.0) {
            return Err(invalid("equiv_mass_factor", "must be >= 1"));
        }
        positive("vehicle.max_accel_ms2", self.max_accel_ms2)?;
        if !(self.max_decel_ms2 < 0.0) {
            return Err(invalid("max_decel_ms2", "must be negative"));
        }
        self.shift_schedule.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    pub capacity_ah: f64,
    /// Open-circuit voltage (V) as a function of SOC.
    pub ocv_curve: Curve,
    /// Internal resistance (ohm) as a function of SOC.
    pub resistance_curve: Curve,
    #[serde(default = "defaults::initial_soc")]
    pub initial_soc: f64,
}

impl BatteryParams {
    pub fn open_circuit_voltage(&self, soc: f64) -> f64 {
        self.ocv_curve.eval(soc)
    }

    pub fn internal_resistance(&self, soc: f64) -> f64 {
        self.resistance_curve.eval(soc)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        positive("battery.capacity_ah", self.capacity_ah)?;
        if !(0.0..=1.0).contains(&self.initial_soc) {
            return Err(invalid("battery.initial_soc", "must lie in [0, 1]"));
        }
        for (field, curve) in [
            ("battery.ocv_curve", &self.ocv_curve),
            ("battery.resistance_curve", &self.resistance_curve),
        ] {
            let (lo, hi) = curve.x_range();
            if lo > 0.0 || hi < 1.0 {
                return Err(invalid(field, "must cover SOC range [0, 1]"));
            }
            if curve.min_y() <= 0.0 {
                return Err(invalid(field, "all values must be > 0"));
            }
        }
        if !self.ocv_curve.is_nondecreasing() {
            return Err(invalid("battery.ocv_curve", "must be monotone in SOC"));
        }
        Ok(())
    }
}

/// Motor torque limits and efficiency surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "MotorMapRepr")]
pub struct MotorMap {
    /// Maximum drive torque (N·m) by motor speed (rad/s).
    pub max_torque_curve: Curve,
    /// Maximum regenerative brake torque magnitude (N·m) by motor speed.
    pub max_brake_torque_curve: Curve,
    /// Efficiency by (motor speed rad/s, |torque| N·m).
    pub efficiency_map: Grid2,
}

#[derive(Deserialize)]
struct MotorMapRepr {
    max_torque_curve: Curve,
    #[serde(default)]
    max_brake_torque_curve: Option<Curve>,
    efficiency_map: Grid2,
}

impl From<MotorMapRepr> for MotorMap {
    fn from(repr: MotorMapRepr) -> Self {
        // Regen capability defaults to the drive limit mirrored into negative speed.
        let brake = repr
            .max_brake_torque_curve
            .unwrap_or_else(|| repr.max_torque_curve.clone());
        MotorMap {
            max_torque_curve: repr.max_torque_curve,
            max_brake_torque_curve: brake,
            efficiency_map: repr.efficiency_map,
        }
    }
}

impl MotorMap {
    pub fn max_drive_torque(&self, motor_speed_rads: f64) -> f64 {
        self.max_torque_curve.eval(motor_speed_rads.abs())
    }

    pub fn max_brake_torque(&self, motor_speed_rads: f64) -> f64 {
        self.max_brake_torque_curve.eval(motor_speed_rads.abs())
    }

    pub fn efficiency(&self, motor_speed_rads: f64, torque_nm: f64) -> f64 {
        self.efficiency_map
            .eval(motor_speed_rads.abs(), torque_nm.abs())
    }

    /// Copy of this map with regenerative braking disabled.
    pub fn without_regen(&self) -> Self {
        Self {
            max_brake_torque_curve: self.max_brake_torque_curve.map_values(|_| 0.0),
            ..self.clone()
        }
    }

    fn validate(&self, vehicle: &VehicleParams) -> Result<(), ConfigError> {
        for (field, curve) in [
            ("motor.max_torque_curve", &self.max_torque_curve),
            ("motor.max_brake_torque_curve", &self.max_brake_torque_curve),
        ] {
            if curve.min_y() < 0.0 {
                return Err(invalid(field, "torque limits must be nonnegative"));
            }
            if curve.max_y() > MAX_MOTOR_TORQUE_NM {
                return Err(invalid(field, "torque limits must not exceed 150 N·m"));
            }
            if curve.x_range().0 > 0.0 {
                return Err(invalid(field, "must start at zero motor speed"));
            }
            let needed = highest_scheduled_motor_speed(vehicle);
            if curve.x_range().1 < needed {
                return Err(invalid(
                    field,
                    format!("must cover motor speeds up to {needed:.1} rad/s reachable under the shift schedule"),
                ));
            }
        }
        if self.efficiency_map.values().any(|e| !(e > 0.0 && e <= 1.0)) {
            return Err(invalid("motor.efficiency_map", "all efficiencies must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Highest motor speed any of gears 1-4 reaches before its upshift threshold.
fn highest_scheduled_motor_speed(vehicle: &VehicleParams) -> f64 {
    (1..GEAR_COUNT)
        .map(|g| {
            let v = vehicle.shift_schedule.upshift_kmh[g - 1] / 3.6;
            v * vehicle.gear_ratio(g) * vehicle.final_drive_ratio / vehicle.tire_radius_m
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Proportional gain, (m/s²) per (m/s) of speed error.
    pub kp: f64,
    /// Integral time constant; the integral term is `(1/ti_s)·∫e dt`.
    pub ti_s: f64,
    #[serde(default = "defaults::time_headway")]
    pub time_headway_s: f64,
    #[serde(default = "defaults::standstill_gap")]
    pub standstill_gap_m: f64,
    #[serde(default = "defaults::k2")]
    pub k2: f64,
    #[serde(default = "defaults::k3")]
    pub k3: f64,
    #[serde(default = "defaults::k4")]
    pub k4: f64,
    #[serde(default = "defaults::d1")]
    pub d1_m: f64,
    #[serde(default = "defaults::d2")]
    pub d2_m: f64,
    #[serde(default = "defaults::sensor_range")]
    pub sensor_range_m: f64,
    #[serde(default = "defaults::arbitration_buffer")]
    pub arbitration_buffer_ms2: f64,
    #[serde(default = "defaults::png_band")]
    pub png_band_kmh: f64,
    #[serde(default = "defaults::png_base_speed")]
    pub png_base_speed_kmh: f64,
    /// Gain turning gap error (m) into a speed-reference offset (m/s) in ACC.
    #[serde(default = "defaults::gap_gain")]
    pub gap_gain_per_s: f64,
}

impl ControllerConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        positive("controller.kp", self.kp)?;
        positive("controller.ti_s", self.ti_s)?;
        positive("controller.time_headway_s", self.time_headway_s)?;
        positive("controller.sensor_range_m", self.sensor_range_m)?;
        positive("controller.png_band_kmh", self.png_band_kmh)?;
        positive("controller.png_base_speed_kmh", self.png_base_speed_kmh)?;
        positive("controller.gap_gain_per_s", self.gap_gain_per_s)?;
        nonnegative("controller.standstill_gap_m", self.standstill_gap_m)?;
        nonnegative("controller.arbitration_buffer_ms2", self.arbitration_buffer_ms2)?;
        for (field, v) in [
            ("controller.k2", self.k2),
            ("controller.k3", self.k3),
            ("controller.k4", self.k4),
            ("controller.d1_m", self.d1_m),
            ("controller.d2_m", self.d2_m),
        ] {
            if !v.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(default = "defaults::dt")]
    pub dt_s: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { dt_s: defaults::dt() }
    }
}

/// The full validated parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub vehicle: VehicleParams,
    pub battery: BatteryParams,
    pub motor: MotorMap,
    pub controller: ControllerConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

impl Config {
    /// The default parameter set shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json_str(BUNDLED_CONFIG_JSON).expect("bundled configuration is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.vehicle.validate()?;
        self.battery.validate()?;
        self.motor.validate(&self.vehicle)?;
        self.controller.validate()?;
        positive("simulation.dt_s", self.simulation.dt_s)
    }
}

/// Read and validate a configuration document.
pub fn load_config(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Config::from_json_str(&text)
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be > 0 (got {v})")))
    }
}

fn nonnegative(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be >= 0 (got {v})")))
    }
}

mod defaults {
    pub fn equiv_mass_factor() -> f64 {
        1.1
    }
    pub fn max_accel() -> f64 {
        2.0
    }
    pub fn max_decel() -> f64 {
        -2.0
    }
    pub fn initial_soc() -> f64 {
        0.9
    }
    pub fn time_headway() -> f64 {
        1.5
    }
    pub fn standstill_gap() -> f64 {
        2.0
    }
    pub fn k2() -> f64 {
        1.2
    }
    pub fn k3() -> f64 {
        2.9
    }
    pub fn k4() -> f64 {
        1.25
    }
    pub fn d1() -> f64 {
        2.0
    }
    pub fn d2() -> f64 {
        2.0
    }
    pub fn sensor_range() -> f64 {
        200.0
    }
    pub fn arbitration_buffer() -> f64 {
        0.05
    }
    pub fn png_band() -> f64 {
        5.0
    }
    pub fn png_base_speed() -> f64 {
        30.0
    }
    pub fn gap_gain() -> f64 {
        0.25
    }
    pub fn dt() -> f64 {
        0.01
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn bundled_value() -> Value {
        serde_json::from_str(BUNDLED_CONFIG_JSON).unwrap()
    }

    fn with_edit(edit: impl FnOnce(&mut Value)) -> Result<Config, ConfigError> {
        let mut v = bundled_value();
        edit(&mut v);
        Config::from_json_str(&v.to_string())
    }

    #[test]
    fn bundled_matches_vehicle_table() {
        let cfg = Config::bundled();
        let v = &cfg.vehicle;
        assert_eq!(v.mass_kg, 1458.0);
        assert_eq!(v.air_drag_coeff, 0.33);
        assert_eq!(v.rolling_coeff, 0.012);
        assert_eq!(v.frontal_area_m2, 2.3);
        assert_eq!(v.air_density_kgm3, 1.206);
        assert_eq!(v.gravity_ms2, 9.81);
        assert_eq!(v.gear_ratios, [3.62, 1.93, 1.29, 0.93, 0.69]);
        assert_eq!(v.gear_efficiencies, [0.92, 0.92, 0.95, 0.95, 0.98]);
        assert_eq!(v.final_drive_ratio, 3.87);
        assert_eq!(v.tire_radius_m, 0.33);
        assert_eq!(v.hydraulic_torque_per_pressure, 1500.0);
        assert_eq!(cfg.battery.capacity_ah, 25.0);
        assert_eq!(cfg.battery.initial_soc, 0.9);
        assert_eq!(cfg.motor.max_torque_curve.max_y(), 150.0);
    }

    #[test]
    fn bundled_controller_constants() {
        let c = Config::bundled().controller;
        assert_eq!(
            (c.time_headway_s, c.standstill_gap_m, c.k2, c.k3, c.k4, c.d1_m, c.d2_m),
            (1.5, 2.0, 1.2, 2.9, 1.25, 2.0, 2.0)
        );
        assert_eq!(c.sensor_range_m, 200.0);
        assert_eq!(c.arbitration_buffer_ms2, 0.05);
        assert_eq!(c.png_band_kmh, 5.0);
        // tuned defaults, pinned
        assert_eq!((c.kp, c.ti_s, c.gap_gain_per_s), (3.0, 10.0, 0.25));
    }

    #[test]
    fn omitted_equiv_mass_factor_defaults() {
        let cfg = with_edit(|v| {
            v["vehicle"].as_object_mut().unwrap().remove("equiv_mass_factor");
        })
        .unwrap();
        assert_eq!(cfg.vehicle.equiv_mass_factor, 1.1);
    }

    #[test]
    fn omitted_constants_fall_back_to_defaults() {
        let cfg = with_edit(|v| {
            let c = v["controller"].as_object_mut().unwrap();
            for key in ["k2", "k3", "k4", "arbitration_buffer_ms2", "sensor_range_m"] {
                c.remove(key);
            }
            v["battery"].as_object_mut().unwrap().remove("initial_soc");
            v["motor"].as_object_mut().unwrap().remove("max_brake_torque_curve");
            v.as_object_mut().unwrap().remove("simulation");
        })
        .unwrap();
        assert_eq!(cfg.controller.k3, 2.9);
        assert_eq!(cfg.controller.arbitration_buffer_ms2, 0.05);
        assert_eq!(cfg.battery.initial_soc, 0.9);
        assert_eq!(cfg.motor.max_brake_torque_curve, cfg.motor.max_torque_curve);
        assert_eq!(cfg.simulation.dt_s, 0.01);
    }

    #[test]
    fn zero_gear_ratio_names_field() {
        let err = with_edit(|v| v["vehicle"]["gear_ratios"][2] = 0.0.into()).unwrap_err();
        assert_eq!(err.field(), Some("gear_ratios"));
    }

    #[test]
    fn non_decreasing_gear_ratios_rejected() {
        let err = with_edit(|v| v["vehicle"]["gear_ratios"][3] = 1.5.into()).unwrap_err();
        assert_eq!(err.field(), Some("gear_ratios"));
    }

    #[test]
    fn invariant_violations_are_reported() {
        let cases: Vec<(Box<dyn Fn(&mut Value)>, &str)> = vec![
            (Box::new(|v| v["vehicle"]["mass_kg"] = (-1.0).into()), "vehicle.mass_kg"),
            (Box::new(|v| v["vehicle"]["gear_efficiencies"][0] = 1.2.into()), "gear_efficiencies"),
            (Box::new(|v| v["vehicle"]["equiv_mass_factor"] = 0.9.into()), "equiv_mass_factor"),
            (Box::new(|v| v["battery"]["capacity_ah"] = 0.0.into()), "battery.capacity_ah"),
            (Box::new(|v| v["controller"]["kp"] = 0.0.into()), "controller.kp"),
            (
                Box::new(|v| v["motor"]["max_torque_curve"][0][1] = 151.0.into()),
                "motor.max_torque_curve",
            ),
            (
                Box::new(|v| v["battery"]["ocv_curve"] = serde_json::json!([[0.0, 400.0], [1.0, 300.0]])),
                "battery.ocv_curve",
            ),
        ];
        for (edit, field) in cases {
            let err = with_edit(edit).unwrap_err();
            assert_eq!(err.field(), Some(field), "{err}");
        }
    }

    #[test]
    fn missing_required_field_is_parse_error() {
        let err = with_edit(|v| {
            v["vehicle"].as_object_mut().unwrap().remove("mass_kg");
        })
        .unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        assert!(err.to_string().contains("mass_kg"));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_config("/definitely/not/here.json").unwrap_err();
        assert!(matches!(err, ConfigError::Io { .. }));
    }

    #[test]
    fn round_trip_is_lossless() {
        let cfg = Config::bundled();
        let again = Config::from_json_str(&cfg.to_json_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn shift_schedule_has_hysteresis() {
        let s = Config::bundled().vehicle.shift_schedule;
        let up = s.upshift_kmh[0] / 3.6;
        let down = s.downshift_kmh[0] / 3.6;
        assert_eq!(s.select(1, up - 0.01), 1);
        assert_eq!(s.select(1, up), 2);
        // between thresholds the current gear is held
        let mid = 0.5 * (up + down);
        assert_eq!(s.select(2, mid), 2);
        assert_eq!(s.select(1, mid), 1);
        assert_eq!(s.select(2, down - 0.01), 1);
        assert_eq!(s.initial_gear(0.0), 1);
        assert_eq!(s.initial_gear(300.0 / 3.6), 5);
    }
}
