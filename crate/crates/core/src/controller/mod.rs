//! Cruise and adaptive cruise decision stack: spacing policy, mode switching,
//! PI speed control, drive/brake/slide arbitration and pulse-and-glide.

mod png;

use serde::Serialize;

use crate::config::{ControllerConfig, VehicleParams};
use crate::plant::{slide_acceleration, PlantState};

pub use png::{png_initial_phase, png_step, PngParams, PngParamsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    Acc,
    Cc,
    Png,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Acc => "ACC",
            Mode::Cc => "CC",
            Mode::Png => "PnG",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PngPhase {
    Pulse,
    Glide,
}

impl PngPhase {
    pub fn label(self) -> &'static str {
        match self {
            PngPhase::Pulse => "Pulse",
            PngPhase::Glide => "Glide",
        }
    }
}

/// Which mode runs when no leader constrains the ego vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CruisePreference {
    Cc,
    Png,
}

impl CruisePreference {
    fn mode(self) -> Mode {
        match self {
            CruisePreference::Cc => Mode::Cc,
            CruisePreference::Png => Mode::Png,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    Drive,
    Brake,
    Slide,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Drive => "Drive",
            Regime::Brake => "Brake",
            Regime::Slide => "Slide",
        }
    }
}

/// Controller memory carried between steps.
///
/// `buffered` is set while the gap sits in the switching buffer zone; the
/// governing `mode` is then whatever was active before entering it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeState {
    pub mode: Mode,
    pub buffered: bool,
    /// Only meaningful in [`Mode::Png`].
    pub png_phase: PngPhase,
    /// Accumulated speed error, m/s·s.
    pub pi_integral: f64,
}

impl ModeState {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            buffered: false,
            png_phase: PngPhase::Pulse,
            pi_integral: 0.0,
        }
    }

    pub fn cruise_control() -> Self {
        Self::new(Mode::Cc)
    }

    /// Trace label: `Buffer` while buffered, else the governing mode.
    pub fn label(&self) -> &'static str {
        if self.buffered {
            "Buffer"
        } else {
            self.mode.label()
        }
    }
}

/// What the ranging sensor reports about the vehicle ahead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeadInfo {
    pub present: bool,
    pub distance_m: f64,
    pub lead_speed_ms: f64,
}

impl LeadInfo {
    pub fn none() -> Self {
        Self {
            present: false,
            distance_m: f64::INFINITY,
            lead_speed_ms: 0.0,
        }
    }

    pub fn at(distance_m: f64, lead_speed_ms: f64) -> Self {
        Self {
            present: true,
            distance_m,
            lead_speed_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlCommand {
    pub a_des_ms2: f64,
    pub regime: Regime,
    pub mode: ModeState,
}

/// Constant-time-headway spacing: standstill gap plus headway times leader speed.
pub fn desired_distance(v_lead: f64, cfg: &ControllerConfig) -> f64 {
    cfg.standstill_gap_m + cfg.time_headway_s * v_lead
}

/// Fitted gain of the CC-to-ACC switching distance.
pub fn k1(dv: f64) -> f64 {
    1.999 - 1.196 * (-0.1299 * dv).exp()
}

/// Switching distances `(d_logic1, d_logic2)` bounding the buffer zone.
pub fn switch_thresholds(v_des: f64, v_lead: f64, v_real: f64, cfg: &ControllerConfig) -> (f64, f64) {
    let d_des = desired_distance(v_lead, cfg);
    let dv = v_des - v_lead;
    let d_logic1 = d_des + k1(dv) * dv + cfg.k2 * (v_real - v_des) + cfg.d1_m;
    let d_logic2 = d_des + cfg.k3 * dv + cfg.k4 * (v_real - v_lead) + cfg.d2_m;
    (d_logic1, d_logic2)
}

/// Pick the governing mode for this step.
///
/// Entering a different mode clears the PI integral and, for PnG, picks the
/// starting phase from the current speed.
pub fn select_mode(
    prev: &ModeState,
    lead: &LeadInfo,
    v_des: f64,
    v_real: f64,
    cfg: &ControllerConfig,
    pref: CruisePreference,
) -> ModeState {
    let cruise = pref.mode();
    let (mode, buffered) = if !lead.present || lead.distance_m >= cfg.sensor_range_m {
        (cruise, false)
    } else {
        let d = lead.distance_m;
        let (d_logic1, d_logic2) = switch_thresholds(v_des, lead.lead_speed_ms, v_real, cfg);
        if d < desired_distance(lead.lead_speed_ms, cfg) {
            (Mode::Acc, false)
        } else if lead.lead_speed_ms > v_des {
            (cruise, false)
        } else if d < d_logic1 {
            (Mode::Acc, false)
        } else if d < d_logic2 {
            (prev.mode, true)
        } else {
            (cruise, false)
        }
    };

    if mode == prev.mode {
        return ModeState { buffered, ..*prev };
    }
    let mut next = ModeState::new(mode);
    next.buffered = buffered;
    if mode == Mode::Png {
        next.png_phase = png_initial_phase(v_real, v_des);
    }
    next
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiOutput {
    pub a_des_ms2: f64,
    pub integral: f64,
}

/// Unclamped PI law `Kp·e + (1/Ti)·∫e`.
pub fn pi_law(kp: f64, ti_s: f64, error: f64, integral: f64) -> f64 {
    kp * error + integral / ti_s
}

/// PI speed loop with anti-windup.
///
/// The integral is bounded so its term alone stays inside the acceleration
/// limits, and it stops growing once the output saturates in the direction
/// the error pushes.
pub fn pi_speed_control(
    v_des: f64,
    v_real: f64,
    integral: f64,
    dt: f64,
    cfg: &ControllerConfig,
    vehicle: &VehicleParams,
) -> PiOutput {
    let (lo, hi) = (vehicle.max_decel_ms2, vehicle.max_accel_ms2);
    let e = v_des - v_real;
    let candidate = (integral + e * dt).clamp(lo * cfg.ti_s, hi * cfg.ti_s);
    let u = pi_law(cfg.kp, cfg.ti_s, e, candidate);
    // Integrate only as far as the output limit.
    let integral = if u > hi && e > 0.0 {
        ((hi - cfg.kp * e) * cfg.ti_s).max(integral).min(candidate)
    } else if u < lo && e < 0.0 {
        ((lo - cfg.kp * e) * cfg.ti_s).min(integral).max(candidate)
    } else {
        candidate
    };
    PiOutput {
        a_des_ms2: pi_law(cfg.kp, cfg.ti_s, e, integral).clamp(lo, hi),
        integral,
    }
}

/// Speed reference that drives the gap toward the desired distance.
pub fn acc_speed_reference(lead: &LeadInfo, v_set: f64, cfg: &ControllerConfig) -> f64 {
    let gap_error = lead.distance_m - desired_distance(lead.lead_speed_ms, cfg);
    (lead.lead_speed_ms + cfg.gap_gain_per_s * gap_error).clamp(0.0, v_set.max(0.0))
}

/// Drive, brake or slide, depending on where `a_des` sits relative to coasting.
pub fn arbitrate(a_des: f64, v_real: f64, vehicle: &VehicleParams, cfg: &ControllerConfig) -> Regime {
    let a_s = slide_acceleration(v_real, vehicle);
    let a0 = cfg.arbitration_buffer_ms2;
    if a_des > a_s + a0 {
        Regime::Drive
    } else if a_des < a_s - a0 {
        Regime::Brake
    } else {
        Regime::Slide
    }
}

/// A configured controller: parameters plus the cruise behavior to use.
#[derive(Debug, Clone)]
pub struct Controller {
    pub cfg: ControllerConfig,
    pub vehicle: VehicleParams,
    pub pref: CruisePreference,
    pub png: Option<PngParams>,
}

impl Controller {
    pub fn new(
        cfg: &ControllerConfig,
        vehicle: &VehicleParams,
        pref: CruisePreference,
        png: Option<PngParams>,
    ) -> Self {
        let pref = if png.is_none() { CruisePreference::Cc } else { pref };
        Self {
            cfg: cfg.clone(),
            vehicle: vehicle.clone(),
            pref,
            png,
        }
    }

    /// Cruise target: the PnG base speed in PnG, else the driver's set speed.
    fn cruise_target(&self, v_set: f64) -> f64 {
        match (self.pref, &self.png) {
            (CruisePreference::Png, Some(p)) => p.v_c_ms(),
            _ => v_set,
        }
    }

    /// Mode state to start a run with.
    pub fn initial_state(&self, lead: &LeadInfo, v_real: f64, v_set: f64) -> ModeState {
        let v_des = self.cruise_target(v_set);
        let seed = match lead.present && lead.distance_m < self.cfg.sensor_range_m {
            true => ModeState::new(Mode::Acc),
            false => ModeState::new(self.pref.mode()),
        };
        let mut s = select_mode(&seed, lead, v_des, v_real, &self.cfg, self.pref);
        if s.mode == Mode::Png {
            s.png_phase = png_initial_phase(v_real, v_des);
        }
        s
    }

    /// One control step.
    pub fn step(&self, prev: &ModeState, lead: &LeadInfo, ego: &PlantState, v_set: f64, dt: f64) -> ControlCommand {
        let v = ego.speed_ms;
        let v_des = self.cruise_target(v_set);
        let mut state = select_mode(prev, lead, v_des, v, &self.cfg, self.pref);

        let a_des = match state.mode {
            Mode::Png => {
                let png = self.png.as_ref().expect("PnG mode requires PnG parameters");
                let (next, a) = png_step(&state, v, png);
                state = next;
                a
            }
            Mode::Acc | Mode::Cc => {
                let target = if state.mode == Mode::Acc {
                    acc_speed_reference(lead, v_des, &self.cfg)
                } else {
                    v_des
                };
                // avoid carrying a stale integral through a stop
                if v <= 0.0 && target <= 0.0 {
                    state.pi_integral = 0.0;
                }
                let out = pi_speed_control(target, v, state.pi_integral, dt, &self.cfg, &self.vehicle);
                state.pi_integral = out.integral;
                out.a_des_ms2
            }
        };
        let a_des = a_des.clamp(self.vehicle.max_decel_ms2, self.vehicle.max_accel_ms2);
        ControlCommand {
            a_des_ms2: a_des,
            regime: arbitrate(a_des, v, &self.vehicle, &self.cfg),
            mode: state,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::plant::BatteryState;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> Config {
        Config::bundled()
    }

    fn ego(v: f64) -> PlantState {
        let c = cfg();
        PlantState {
            position_m: 0.0,
            speed_ms: v,
            gear: 1,
            battery: BatteryState::initial(&c.battery),
            elapsed_s: 0.0,
        }
    }

    #[test]
    fn desired_distance_values() {
        let c = cfg().controller;
        assert_eq!(desired_distance(0.0, &c), 2.0);
        assert_relative_eq!(desired_distance(25.0, &c), 39.5);
        assert!((desired_distance(60.0 / 3.6, &c) - 27.0).abs() < 1e-9);
    }

    #[test]
    fn k1_values() {
        assert_relative_eq!(k1(0.0), 0.803, max_relative = 1e-12);
        assert!((k1(1e6) - 1.999).abs() < 1e-12);
        assert!((k1(10.0) - 1.672).abs() < 1e-3);
    }

    #[test]
    fn thresholds_at_equal_speeds() {
        let c = cfg().controller;
        let d_des = desired_distance(20.0, &c);
        let (l1, l2) = switch_thresholds(20.0, 20.0, 20.0, &c);
        assert_relative_eq!(l1, d_des + 2.0, max_relative = 1e-12);
        assert_relative_eq!(l2, d_des + 2.0, max_relative = 1e-12);
        let (l1, l2) = switch_thresholds(0.0, 0.0, 0.0, &c);
        assert_relative_eq!(l1, 4.0);
        assert_relative_eq!(l2, 4.0);
    }

    #[test]
    fn threshold_one_term_by_term() {
        let c = cfg().controller;
        let (l1, _) = switch_thresholds(20.0, 19.0, 20.0, &c);
        assert_relative_eq!(l1, desired_distance(19.0, &c) + k1(1.0) + 2.0, max_relative = 1e-12);
    }

    #[test]
    fn close_leader_always_acc() {
        let c = cfg().controller;
        for (v_lead, v_des) in [(10.0, 25.0), (30.0, 25.0)] {
            let lead = LeadInfo::at(desired_distance(v_lead, &c) - 0.1, v_lead);
            let s = select_mode(&ModeState::cruise_control(), &lead, v_des, 20.0, &c, CruisePreference::Cc);
            assert_eq!(s.mode, Mode::Acc);
        }
    }

    #[test]
    fn out_of_range_leader_is_ignored() {
        let c = cfg().controller;
        let prev = ModeState::new(Mode::Acc);
        let lead = LeadInfo::at(200.0, 5.0);
        let s = select_mode(&prev, &lead, 25.0, 25.0, &c, CruisePreference::Png);
        assert_eq!(s.mode, Mode::Png);
        let s = select_mode(&prev, &LeadInfo::none(), 25.0, 25.0, &c, CruisePreference::Cc);
        assert_eq!(s.mode, Mode::Cc);
    }

    #[test]
    fn faster_leader_beyond_desired_gap_is_cruise() {
        let c = cfg().controller;
        let lead = LeadInfo::at(60.0, 30.0);
        let s = select_mode(&ModeState::new(Mode::Acc), &lead, 25.0, 25.0, &c, CruisePreference::Cc);
        assert_eq!(s.mode, Mode::Cc);
    }

    #[test]
    fn buffer_zone_holds_previous_mode() {
        let c = cfg().controller;
        let (v_des, v_lead, v_real) = (25.0, 20.0, 22.0);
        let (l1, l2) = switch_thresholds(v_des, v_lead, v_real, &c);
        assert!(l1 < l2);
        let lead = LeadInfo::at(0.5 * (l1 + l2), v_lead);
        for prev in [Mode::Acc, Mode::Cc] {
            let s = select_mode(&ModeState::new(prev), &lead, v_des, v_real, &c, CruisePreference::Cc);
            assert_eq!(s.mode, prev);
            assert!(s.buffered);
            assert_eq!(s.label(), "Buffer");
        }
    }

    #[test]
    fn mode_change_resets_integral() {
        let c = cfg().controller;
        let mut prev = ModeState::cruise_control();
        prev.pi_integral = 3.0;
        let lead = LeadInfo::at(5.0, 10.0);
        let s = select_mode(&prev, &lead, 25.0, 20.0, &c, CruisePreference::Cc);
        assert_eq!(s.mode, Mode::Acc);
        assert_eq!(s.pi_integral, 0.0);
        let kept = select_mode(&s, &lead, 25.0, 20.0, &c, CruisePreference::Cc);
        assert_eq!(kept, s);
    }

    #[test]
    fn pi_zero_error_is_zero() {
        let c = cfg();
        let out = pi_speed_control(10.0, 10.0, 0.0, 0.01, &c.controller, &c.vehicle);
        assert_eq!(out.a_des_ms2, 0.0);
    }

    #[test]
    fn pi_constant_error_grows_until_clamp() {
        let c = cfg();
        let mut ctl = c.controller.clone();
        ctl.kp = 0.5;
        let mut integral = 0.0;
        let mut last = f64::NEG_INFINITY;
        let mut hit_clamp = false;
        for _ in 0..10_000 {
            let out = pi_speed_control(11.0, 10.0, integral, 0.01, &ctl, &c.vehicle);
            assert!(out.a_des_ms2 >= last);
            last = out.a_des_ms2;
            integral = out.integral;
            hit_clamp |= out.a_des_ms2 == 2.0;
        }
        assert!(hit_clamp);
        assert!(integral <= 2.0 * ctl.ti_s);
    }

    #[test]
    fn pi_large_step_rides_clamp() {
        let c = cfg();
        let out = pi_speed_control(25.0, 60.0 / 3.6, 0.0, 0.01, &c.controller, &c.vehicle);
        assert_eq!(out.a_des_ms2, 2.0);
        // saturated with positive error: the integral does not wind up
        assert_eq!(out.integral, 0.0);
    }

    #[test]
    fn acc_reference_signs() {
        let c = cfg().controller;
        let v_lead = 20.0;
        let d_des = desired_distance(v_lead, &c);
        assert_eq!(acc_speed_reference(&LeadInfo::at(d_des, v_lead), 30.0, &c), v_lead);
        assert!(acc_speed_reference(&LeadInfo::at(d_des + 10.0, v_lead), 30.0, &c) > v_lead);
        assert!(acc_speed_reference(&LeadInfo::at(20.0, 80.0 / 3.6), 30.0, &c) < 80.0 / 3.6);
        assert_eq!(acc_speed_reference(&LeadInfo::at(500.0, v_lead), 30.0, &c), 30.0);
    }

    #[test]
    fn arbitration_examples() {
        let c = cfg();
        let v = 8.333;
        assert_eq!(arbitrate(0.0, v, &c.vehicle, &c.controller), Regime::Drive);
        assert_eq!(arbitrate(-0.1395, v, &c.vehicle, &c.controller), Regime::Slide);
        assert_eq!(arbitrate(-0.5, v, &c.vehicle, &c.controller), Regime::Brake);
        let a_s = slide_acceleration(v, &c.vehicle);
        assert_eq!(arbitrate(a_s + 0.05, v, &c.vehicle, &c.controller), Regime::Slide);
        assert_eq!(arbitrate(a_s - 0.05, v, &c.vehicle, &c.controller), Regime::Slide);
    }

    #[test]
    fn cc_at_set_speed_is_cruise_power() {
        let c = cfg();
        let ctl = Controller::new(&c.controller, &c.vehicle, CruisePreference::Cc, None);
        let cmd = ctl.step(&ModeState::cruise_control(), &LeadInfo::none(), &ego(25.0), 25.0, 0.01);
        assert!(cmd.a_des_ms2.abs() < 1e-12);
        assert_eq!(cmd.regime, Regime::Drive);
    }

    #[test]
    fn hard_braking_leader_forces_brake() {
        let c = cfg();
        let ctl = Controller::new(&c.controller, &c.vehicle, CruisePreference::Cc, None);
        let lead = LeadInfo::at(8.0, 5.0);
        let cmd = ctl.step(&ModeState::new(Mode::Acc), &lead, &ego(20.0), 25.0, 0.01);
        assert_eq!(cmd.regime, Regime::Brake);
        assert_eq!(cmd.a_des_ms2, -2.0);
    }

    #[test]
    fn acc_equilibrium_is_quiet() {
        let c = cfg();
        let ctl = Controller::new(&c.controller, &c.vehicle, CruisePreference::Cc, None);
        let v_lead = 22.0;
        let lead = LeadInfo::at(desired_distance(v_lead, &c.controller), v_lead);
        let cmd = ctl.step(&ModeState::new(Mode::Acc), &lead, &ego(v_lead), 30.0, 0.01);
        assert_eq!(cmd.mode.mode, Mode::Acc);
        assert!(cmd.a_des_ms2.abs() < 0.01);
    }

    #[test]
    fn optimal_glide_never_brakes() {
        let c = cfg();
        let png = PngParams::new(0.6122, -0.0552, 30.0, 5.0).unwrap();
        let ctl = Controller::new(&c.controller, &c.vehicle, CruisePreference::Png, Some(png));
        let mut state = ModeState::new(Mode::Png);
        state.png_phase = PngPhase::Glide;
        for kmh in [25.5, 28.0, 30.0, 33.0, 34.9] {
            let cmd = ctl.step(&state, &LeadInfo::none(), &ego(kmh / 3.6), 30.0 / 3.6, 0.01);
            assert_eq!(cmd.a_des_ms2, -0.0552);
            assert_ne!(cmd.regime, Regime::Brake);
        }
    }

    #[test]
    fn initial_state_with_leader_in_buffer_starts_in_acc() {
        let c = cfg();
        let ctl = Controller::new(&c.controller, &c.vehicle, CruisePreference::Cc, None);
        let lead = LeadInfo::at(27.0, 60.0 / 3.6);
        let s = ctl.initial_state(&lead, 30.0 / 3.6, 100.0 / 3.6);
        assert_eq!(s.mode, Mode::Acc);
    }

    proptest! {
        #[test]
        fn select_mode_is_idempotent(
            d in 0.0f64..250.0,
            v_lead in 0.0f64..40.0,
            v_des in 0.0f64..40.0,
            v_real in 0.0f64..40.0,
            start in 0usize..3,
            png in any::<bool>(),
        ) {
            let c = cfg().controller;
            let pref = if png { CruisePreference::Png } else { CruisePreference::Cc };
            let prev = ModeState::new([Mode::Acc, Mode::Cc, Mode::Png][start]);
            let lead = LeadInfo::at(d, v_lead);
            let once = select_mode(&prev, &lead, v_des, v_real, &c, pref);
            let twice = select_mode(&once, &lead, v_des, v_real, &c, pref);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn arbitration_is_a_partition(a in -2.0f64..2.0, v in 0.0f64..40.0) {
            let c = cfg();
            let a_s = slide_acceleration(v, &c.vehicle);
            let r = arbitrate(a, v, &c.vehicle, &c.controller);
            let in_band = (a_s - 0.05..=a_s + 0.05).contains(&a);
            prop_assert_eq!(r == Regime::Slide, in_band);
            prop_assert_eq!(r == Regime::Drive, a > a_s + 0.05);
            prop_assert_eq!(r == Regime::Brake, a < a_s - 0.05);
        }

        #[test]
        fn pi_law_is_linear_in_gains(
            errors in prop::collection::vec(-1.0f64..1.0, 1..50),
            kp in 0.1f64..5.0,
            ti in 1.0f64..50.0,
        ) {
            let dt = 0.01;
            let integral: f64 = errors.iter().map(|e| e * dt).sum();
            let e = *errors.last().unwrap();
            let base = pi_law(kp, ti, e, integral);
            let doubled = pi_law(2.0 * kp, ti / 2.0, e, integral);
            prop_assert!((doubled - 2.0 * base).abs() <= 1e-12 * base.abs().max(1.0));
        }

        #[test]
        fn commands_stay_within_limits(
            d in 0.0f64..250.0,
            v_lead in 0.0f64..40.0,
            v in 0.0f64..40.0,
            v_set in 0.0f64..40.0,
            integral in -20.0f64..20.0,
        ) {
            let c = cfg();
            let ctl = Controller::new(&c.controller, &c.vehicle, CruisePreference::Cc, None);
            let mut prev = ModeState::new(Mode::Acc);
            prev.pi_integral = integral;
            let cmd = ctl.step(&prev, &LeadInfo::at(d, v_lead), &ego(v), v_set, 0.01);
            prop_assert!((-2.0..=2.0).contains(&cmd.a_des_ms2));
        }
    }
}
