//! Longitudinal EV plant: road loads, gearbox, motor torque, brake blending and
//! the OCV-R battery with current-integration SOC.
//!
//! Sign conventions: motor torque and power are positive when driving and
//! negative when the motor brakes regeneratively. Battery current is positive
//! on discharge, so SOC falls under positive current and rises under regen.

use serde::Serialize;
use thiserror::Error;

use crate::config::{BatteryParams, Config, MotorMap, VehicleParams};
use crate::controller::{ControlCommand, Regime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error(
        "battery cannot source {power_w:.0} W (V_oc = {ocv_v:.1} V, R_b = {resistance_ohm:.4} ohm; limit {limit_w:.0} W)"
    )]
    PowerInfeasible {
        power_w: f64,
        ocv_v: f64,
        resistance_ohm: f64,
        limit_w: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatteryState {
    pub soc: f64,
    pub capacity_left_ah: f64,
    pub last_current_a: f64,
    pub last_power_w: f64,
}

impl BatteryState {
    pub fn at_soc(params: &BatteryParams, soc: f64) -> Self {
        let soc = soc.clamp(0.0, 1.0);
        Self {
            soc,
            capacity_left_ah: soc * params.capacity_ah,
            last_current_a: 0.0,
            last_power_w: 0.0,
        }
    }

    pub fn initial(params: &BatteryParams) -> Self {
        Self::at_soc(params, params.initial_soc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlantState {
    pub position_m: f64,
    pub speed_ms: f64,
    /// 1-based gear index.
    pub gear: usize,
    pub battery: BatteryState,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PowertrainOutput {
    pub motor_torque_nm: f64,
    pub motor_speed_rads: f64,
    pub motor_power_w: f64,
    /// Hydraulic share of the brake demand, expressed at the motor side like the regen share.
    pub hydraulic_torque_nm: f64,
    pub hydraulic_pressure: f64,
    pub regen_active: bool,
}

/// Rolling plus aerodynamic resistance (N) on flat ground in still air.
pub fn resistive_force(speed_ms: f64, p: &VehicleParams) -> f64 {
    p.rolling_coeff * p.mass_kg * p.gravity_ms2
        + 0.5 * p.air_drag_coeff * p.air_density_kgm3 * p.frontal_area_m2 * speed_ms * speed_ms
}

/// Coasting acceleration with zero powertrain torque. Divides by the plain mass.
pub fn slide_acceleration(speed_ms: f64, p: &VehicleParams) -> f64 {
    -resistive_force(speed_ms, p) / p.mass_kg
}

/// Motor shaft speed (rad/s): wheel angular speed times the total reduction.
pub fn motor_speed(speed_ms: f64, gear: usize, p: &VehicleParams) -> f64 {
    speed_ms * p.gear_ratio(gear) * p.final_drive_ratio / p.tire_radius_m
}

/// Wheel-force to motor-shaft-torque factor `r_w / (i_g i_f)`.
fn torque_per_force(gear: usize, p: &VehicleParams) -> f64 {
    p.tire_radius_m / (p.gear_ratio(gear) * p.final_drive_ratio)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveTorque {
    pub torque_nm: f64,
    pub limit_nm: f64,
    pub saturated: bool,
}

/// Motor torque needed for `a_des` in `gear`, capped at the motor's drive limit.
///
/// Demanded torque is divided by the gear efficiency. A nonpositive demanded
/// force yields zero torque.
pub fn required_drive_torque(
    speed_ms: f64,
    a_des: f64,
    gear: usize,
    p: &VehicleParams,
    motor: &MotorMap,
) -> DriveTorque {
    let force = resistive_force(speed_ms, p) + p.equivalent_mass_kg() * a_des;
    let demanded = force.max(0.0) * torque_per_force(gear, p) / p.gear_efficiency(gear);
    let limit = motor.max_drive_torque(motor_speed(speed_ms, gear, p));
    DriveTorque {
        torque_nm: demanded.min(limit),
        limit_nm: limit,
        saturated: demanded > limit,
    }
}

/// Split a deceleration demand between regenerative and hydraulic braking.
///
/// Regen covers as much as the motor's brake limit allows; hydraulics supply
/// the rest. The regen share is reported as negative motor torque.
pub fn blend_brakes(
    speed_ms: f64,
    decel_ms2: f64,
    gear: usize,
    p: &VehicleParams,
    motor: &MotorMap,
) -> PowertrainOutput {
    let omega = motor_speed(speed_ms, gear, p);
    let brake_force = p.equivalent_mass_kg() * decel_ms2 - resistive_force(speed_ms, p);
    if brake_force <= 0.0 {
        return PowertrainOutput {
            motor_speed_rads: omega,
            ..Default::default()
        };
    }
    let demanded = brake_force * torque_per_force(gear, p);
    let regen = demanded.min(motor.max_brake_torque(omega));
    let hydraulic = demanded - regen;
    // Gear losses eat part of the recovered mechanical power.
    let power = -regen * omega * p.gear_efficiency(gear);
    PowertrainOutput {
        motor_torque_nm: -regen,
        motor_speed_rads: omega,
        motor_power_w: power,
        hydraulic_torque_nm: hydraulic,
        hydraulic_pressure: hydraulic / p.hydraulic_torque_per_pressure,
        regen_active: regen > 0.0,
    }
}

/// Terminal current of an OCV-R battery delivering `power_w` (negative = charging).
///
/// Evaluated in the cancellation-free form `2P / (V (1 + sqrt(1 - 4PR/V²))))`,
/// which is algebraically the root of `R I² - V I + P = 0` closest to zero.
pub fn battery_current(power_w: f64, ocv_v: f64, resistance_ohm: f64) -> Result<f64, PlantError> {
    let disc = 1.0 - 4.0 * power_w * resistance_ohm / (ocv_v * ocv_v);
    if disc < 0.0 {
        return Err(PlantError::PowerInfeasible {
            power_w,
            ocv_v,
            resistance_ohm,
            limit_w: ocv_v * ocv_v / (4.0 * resistance_ohm),
        });
    }
    Ok(2.0 * power_w / (ocv_v * (1.0 + disc.sqrt())))
}

/// Battery-side power for a motor power, applying motor efficiency in the direction of flow.
pub fn battery_power(pt: &PowertrainOutput, motor: &MotorMap) -> f64 {
    let pm = pt.motor_power_w;
    if pm == 0.0 {
        return 0.0;
    }
    let eta = motor.efficiency(pt.motor_speed_rads, pt.motor_torque_nm);
    if pm < 0.0 {
        eta * pm
    } else {
        pm / eta
    }
}

/// Advance the battery by `dt` seconds under the given powertrain load.
pub fn battery_step(
    pt: &PowertrainOutput,
    batt: &BatteryState,
    params: &BatteryParams,
    motor: &MotorMap,
    dt: f64,
) -> Result<BatteryState, PlantError> {
    debug_assert!(dt > 0.0);
    let power = battery_power(pt, motor);
    let current = battery_current(
        power,
        params.open_circuit_voltage(batt.soc),
        params.internal_resistance(batt.soc),
    )?;
    let left = (batt.capacity_left_ah - current * dt / 3600.0).clamp(0.0, params.capacity_ah);
    Ok(BatteryState {
        soc: left / params.capacity_ah,
        capacity_left_ah: left,
        last_current_a: current,
        last_power_w: power,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub state: PlantState,
    pub powertrain: PowertrainOutput,
    /// Gear used during the step.
    pub gear: usize,
    pub realized_accel_ms2: f64,
    pub torque_saturated: bool,
}

/// The physical vehicle with its parameters bound.
#[derive(Debug, Clone)]
pub struct Plant {
    vehicle: VehicleParams,
    battery: BatteryParams,
    motor: MotorMap,
    /// Unmodified map, used for efficiency lookups.
    regen_enabled: bool,
}

impl Plant {
    pub fn new(cfg: &Config, regen_enabled: bool) -> Self {
        let motor = if regen_enabled {
            cfg.motor.clone()
        } else {
            cfg.motor.without_regen()
        };
        Self {
            vehicle: cfg.vehicle.clone(),
            battery: cfg.battery.clone(),
            motor,
            regen_enabled,
        }
    }

    pub fn vehicle(&self) -> &VehicleParams {
        &self.vehicle
    }

    pub fn battery_params(&self) -> &BatteryParams {
        &self.battery
    }

    pub fn motor(&self) -> &MotorMap {
        &self.motor
    }

    pub fn regen_enabled(&self) -> bool {
        self.regen_enabled
    }

    pub fn initial_state(&self, position_m: f64, speed_ms: f64) -> PlantState {
        PlantState {
            position_m,
            speed_ms,
            gear: self.vehicle.shift_schedule.initial_gear(speed_ms),
            battery: BatteryState::initial(&self.battery),
            elapsed_s: 0.0,
        }
    }

    /// One explicit-Euler step under `cmd`.
    pub fn step(
        &self,
        state: &PlantState,
        cmd: &ControlCommand,
        dt: f64,
    ) -> Result<StepOutput, PlantError> {
        let p = &self.vehicle;
        let v = state.speed_ms;
        let gear = p.shift_schedule.select(state.gear, v);
        let omega = motor_speed(v, gear, p);
        let coast = PowertrainOutput {
            motor_speed_rads: omega,
            ..Default::default()
        };
        let standstill = v <= 0.0;

        let (powertrain, accel, saturated) = match cmd.regime {
            Regime::Drive if standstill && cmd.a_des_ms2 <= 0.0 => (coast, 0.0, false),
            Regime::Drive => {
                let force = resistive_force(v, p) + p.equivalent_mass_kg() * cmd.a_des_ms2;
                if force <= 0.0 {
                    (coast, slide_acceleration(v, p), false)
                } else {
                    let t = required_drive_torque(v, cmd.a_des_ms2, gear, p, &self.motor);
                    let accel = if t.saturated {
                        let wheel_force = t.torque_nm * p.gear_efficiency(gear) / torque_per_force(gear, p);
                        (wheel_force - resistive_force(v, p)) / p.equivalent_mass_kg()
                    } else {
                        cmd.a_des_ms2
                    };
                    let pt = PowertrainOutput {
                        motor_torque_nm: t.torque_nm,
                        motor_speed_rads: omega,
                        motor_power_w: t.torque_nm * omega,
                        ..Default::default()
                    };
                    (pt, accel, t.saturated)
                }
            }
            Regime::Brake if standstill => (coast, 0.0, false),
            Regime::Brake => {
                let decel = -cmd.a_des_ms2;
                let pt = blend_brakes(v, decel, gear, p, &self.motor);
                let engaged = p.equivalent_mass_kg() * decel > resistive_force(v, p);
                let accel = if engaged { cmd.a_des_ms2 } else { slide_acceleration(v, p) };
                (pt, accel, false)
            }
            Regime::Slide if standstill => (coast, 0.0, false),
            Regime::Slide => (coast, slide_acceleration(v, p), false),
        };

        let battery = battery_step(&powertrain, &state.battery, &self.battery, &self.motor, dt)?;
        let speed = (v + accel * dt).max(0.0);
        Ok(StepOutput {
            state: PlantState {
                position_m: state.position_m + v * dt,
                speed_ms: speed,
                gear,
                battery,
                elapsed_s: state.elapsed_s + dt,
            },
            powertrain,
            gear,
            realized_accel_ms2: (speed - v) / dt,
            torque_saturated: saturated,
        })
    }
}
