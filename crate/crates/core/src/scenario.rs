//! Closed-loop runs: leader scripts, cut-ins, drive-cycle tracking and cruise
//! trips, with per-step trace recording.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::config::{Config, Curve, DriveCycle};
use crate::controller::{
    desired_distance, ControlCommand, Controller, CruisePreference, LeadInfo, Mode, ModeState, PngParams,
    PngPhase, Regime,
};
use crate::plant::{Plant, PlantError, PlantState};

/// Hard cap on simulated time for distance-terminated runs.
pub const MAX_SIM_TIME_S: f64 = 36_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScenarioKind {
    LeaderAccel,
    CutIn,
    DriveCycleTracking,
    PngCruise,
    CcCruise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Termination {
    Duration(f64),
    Distance(f64),
}

/// Kinematic leader: a start position and a piecewise-linear speed profile.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderScript {
    pub initial_position_m: f64,
    /// Speed (m/s) against time (s), held constant outside the samples.
    pub speed_profile: Curve,
}

impl LeaderScript {
    pub fn constant(initial_position_m: f64, speed_ms: f64) -> Self {
        Self {
            initial_position_m,
            speed_profile: Curve::new(vec![(0.0, speed_ms)]).expect("single finite sample"),
        }
    }
}

/// Another vehicle merging in front of the ego vehicle and becoming the new leader.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutIn {
    pub time_s: f64,
    pub gap_m: f64,
    pub speed_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub termination: Termination,
    pub ego_initial_position_m: f64,
    pub ego_initial_speed_ms: f64,
    pub leader: Option<LeaderScript>,
    pub cut_in: Option<CutIn>,
    pub cruise_pref: CruisePreference,
    pub png: Option<PngParams>,
    pub regen_enabled: bool,
    pub set_speed_kmh: f64,
    /// Time-varying set speed; overrides `set_speed_kmh` when present.
    pub drive_cycle: Option<DriveCycle>,
}

const KMH: f64 = 1.0 / 3.6;

impl Scenario {
    /// Leader cruises at 60 km/h, then accelerates to 90 km/h at 1.6 m/s² from t = 30 s.
    /// The ego starts at 30 km/h, one desired gap behind.
    pub fn leader_accel(cfg: &Config) -> Self {
        let v0 = 60.0 * KMH;
        let v1 = 90.0 * KMH;
        let t0 = 30.0;
        let profile = Curve::new(vec![(0.0, v0), (t0, v0), (t0 + (v1 - v0) / 1.6, v1)]).expect("valid profile");
        Self {
            name: "leader-accel".into(),
            kind: ScenarioKind::LeaderAccel,
            termination: Termination::Duration(100.0),
            ego_initial_position_m: 0.0,
            ego_initial_speed_ms: 30.0 * KMH,
            leader: Some(LeaderScript {
                initial_position_m: desired_distance(v0, &cfg.controller),
                speed_profile: profile,
            }),
            cut_in: None,
            cruise_pref: CruisePreference::Cc,
            png: None,
            regen_enabled: true,
            set_speed_kmh: 100.0,
            drive_cycle: None,
        }
    }

    /// Ego follows an 80 km/h leader at the desired gap; at t = 15 s a car
    /// merges 20 m ahead, also at 80 km/h.
    pub fn cut_in(cfg: &Config) -> Self {
        let v = 80.0 * KMH;
        Self {
            name: "cut-in".into(),
            kind: ScenarioKind::CutIn,
            termination: Termination::Duration(90.0),
            ego_initial_position_m: 0.0,
            ego_initial_speed_ms: v,
            leader: Some(LeaderScript::constant(desired_distance(v, &cfg.controller), v)),
            cut_in: Some(CutIn {
                time_s: 15.0,
                gap_m: 20.0,
                speed_ms: v,
            }),
            cruise_pref: CruisePreference::Cc,
            png: None,
            regen_enabled: true,
            set_speed_kmh: 100.0,
            drive_cycle: None,
        }
    }

    /// Free-road pulse-and-glide trip starting at the base speed.
    pub fn png_cruise(png: PngParams, distance_m: f64) -> Self {
        Self {
            name: "png-cruise".into(),
            kind: ScenarioKind::PngCruise,
            termination: Termination::Distance(distance_m),
            ego_initial_position_m: 0.0,
            ego_initial_speed_ms: png.v_c_ms(),
            leader: None,
            cut_in: None,
            cruise_pref: CruisePreference::Png,
            png: Some(png),
            regen_enabled: true,
            set_speed_kmh: png.v_c_kmh,
            drive_cycle: None,
        }
    }

    /// Free-road constant-speed trip.
    pub fn cc_cruise(speed_kmh: f64, distance_m: f64) -> Self {
        Self {
            name: "cc-cruise".into(),
            kind: ScenarioKind::CcCruise,
            termination: Termination::Distance(distance_m),
            ego_initial_position_m: 0.0,
            ego_initial_speed_ms: speed_kmh * KMH,
            leader: None,
            cut_in: None,
            cruise_pref: CruisePreference::Cc,
            png: None,
            regen_enabled: true,
            set_speed_kmh: speed_kmh,
            drive_cycle: None,
        }
    }

    /// CC tracking of a drive cycle's speed profile from standstill.
    pub fn drive_cycle(cycle: DriveCycle, regen_enabled: bool) -> Self {
        Self {
            name: cycle.name.to_lowercase(),
            kind: ScenarioKind::DriveCycleTracking,
            termination: Termination::Duration(cycle.duration_s()),
            ego_initial_position_m: 0.0,
            ego_initial_speed_ms: cycle.speed_ms_at(0.0),
            leader: None,
            cut_in: None,
            cruise_pref: CruisePreference::Cc,
            png: None,
            regen_enabled,
            set_speed_kmh: cycle.speed_kmh_at(0.0),
            drive_cycle: Some(cycle),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidScenario(format!("{}: {msg}", self.name)));
        match self.termination {
            Termination::Duration(d) | Termination::Distance(d) if !(d > 0.0 && d.is_finite()) => {
                return bad("termination limit must be positive and finite")
            }
            _ => {}
        }
        if self.cut_in.is_some() != (self.kind == ScenarioKind::CutIn) {
            return bad("a cut-in event belongs to cut-in scenarios only");
        }
        if matches!(self.kind, ScenarioKind::LeaderAccel | ScenarioKind::CutIn) && self.leader.is_none() {
            return bad("car-following scenarios need a leader");
        }
        if self.cruise_pref == CruisePreference::Png && self.png.is_none() {
            return bad("pulse-and-glide preference needs PnG parameters");
        }
        if (self.kind == ScenarioKind::DriveCycleTracking) != self.drive_cycle.is_some() {
            return bad("drive-cycle tracking needs exactly one drive cycle");
        }
        if !(self.ego_initial_speed_ms >= 0.0) || !(self.set_speed_kmh >= 0.0) {
            return bad("speeds must be nonnegative");
        }
        Ok(())
    }

    fn set_speed_ms(&self, t: f64) -> f64 {
        match &self.drive_cycle {
            Some(c) => c.speed_ms_at(t),
            None => self.set_speed_kmh * KMH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub dt_s: f64,
    /// Accepted for reproducibility bookkeeping; the built-in scenarios draw no random numbers.
    pub seed: u64,
    /// Store per-step records. Summaries are computed either way.
    pub record_trace: bool,
}

impl SimOptions {
    pub fn new(dt_s: f64) -> Self {
        Self {
            dt_s,
            seed: 0,
            record_trace: true,
        }
    }

    pub fn summary_only(dt_s: f64) -> Self {
        Self {
            record_trace: false,
            ..Self::new(dt_s)
        }
    }
}

/// One row of a trace: the state at `t_s` and the command and powertrain of
/// the step that ended there. The first row carries no command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub t_s: f64,
    pub x_m: f64,
    pub v_ms: f64,
    pub a_des_ms2: f64,
    pub regime: Option<Regime>,
    pub mode: ModeState,
    pub gear: usize,
    pub motor_torque_nm: f64,
    pub motor_power_w: f64,
    pub current_a: f64,
    pub soc: f64,
    pub hydraulic_torque_nm: f64,
    pub regen_active: bool,
    pub gap_m: Option<f64>,
    pub lead_speed_ms: Option<f64>,
    pub set_speed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TraceSummary {
    pub steps: usize,
    pub duration_s: f64,
    pub distance_m: f64,
    pub initial_soc: f64,
    pub final_soc: f64,
    pub soc_cost: f64,
    pub min_soc: f64,
    pub regen_recovered_ah: f64,
    pub min_gap_m: Option<f64>,
    pub final_gap_m: Option<f64>,
    pub final_speed_ms: f64,
    pub max_abs_a_des_ms2: f64,
    pub max_speed_error_kmh: f64,
    /// Completed pulse-to-glide transitions.
    pub png_cycles: usize,
    pub glide_steps: usize,
    pub glide_regen_steps: usize,
    pub brake_steps: usize,
    pub regen_steps: usize,
    pub hydraulic_steps: usize,
}

impl TraceSummary {
    /// Share of glide steps spent braking regeneratively.
    pub fn glide_regen_fraction(&self) -> f64 {
        if self.glide_steps == 0 {
            0.0
        } else {
            self.glide_regen_steps as f64 / self.glide_steps as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub scenario: String,
    pub dt_s: f64,
    pub regen_enabled: bool,
    #[serde(skip)]
    pub records: Vec<TraceRecord>,
    pub summary: TraceSummary,
}

impl SimTrace {
    pub fn soc_cost(&self) -> f64 {
        soc_cost(self)
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario {0}")]
    InvalidScenario(String),
    #[error("time step must be positive and finite (got {0})")]
    InvalidStep(f64),
    #[error("simulation aborted at t = {time_s:.2} s: {source}")]
    Plant {
        time_s: f64,
        #[source]
        source: PlantError,
        partial: Box<SimTrace>,
    },
    #[error("distance limit not reached within {0} s of simulated time")]
    Stalled(f64),
    #[error("traces cover different distances ({png_m:.1} m vs {cc_m:.1} m)")]
    MismatchedDistance { png_m: f64, cc_m: f64 },
    #[error("replay needs {expected} commands, got {got}")]
    ReplayLength { expected: usize, got: usize },
}

struct Leader {
    position_m: f64,
    speed: Curve,
    /// Time origin of `speed`, shifted when a cut-in replaces the leader.
    t0: f64,
}

impl Leader {
    fn speed_at(&self, t: f64) -> f64 {
        self.speed.eval(t - self.t0).max(0.0)
    }

    fn info(&self, t: f64, ego_x: f64) -> LeadInfo {
        LeadInfo::at(self.position_m - ego_x, self.speed_at(t))
    }
}

struct Recorder {
    keep: bool,
    records: Vec<TraceRecord>,
    summary: TraceSummary,
}

impl Recorder {
    fn new(keep: bool, first: TraceRecord) -> Self {
        let summary = TraceSummary {
            initial_soc: first.soc,
            final_soc: first.soc,
            min_soc: first.soc,
            min_gap_m: first.gap_m,
            final_gap_m: first.gap_m,
            final_speed_ms: first.v_ms,
            max_speed_error_kmh: (first.v_ms - first.set_speed_ms).abs() * 3.6,
            ..Default::default()
        };
        let mut r = Self {
            keep,
            records: Vec::new(),
            summary,
        };
        if keep {
            r.records.push(first);
        }
        r
    }

    fn push(&mut self, rec: TraceRecord, prev_mode: &ModeState, dt: f64) {
        let s = &mut self.summary;
        s.steps += 1;
        s.duration_s = rec.t_s;
        s.distance_m = rec.x_m;
        s.final_soc = rec.soc;
        s.soc_cost = s.initial_soc - rec.soc;
        s.min_soc = s.min_soc.min(rec.soc);
        s.final_speed_ms = rec.v_ms;
        s.regen_recovered_ah += (-rec.current_a).max(0.0) * dt / 3600.0;
        s.max_abs_a_des_ms2 = s.max_abs_a_des_ms2.max(rec.a_des_ms2.abs());
        s.max_speed_error_kmh = s.max_speed_error_kmh.max((rec.v_ms - rec.set_speed_ms).abs() * 3.6);
        if let Some(g) = rec.gap_m {
            s.min_gap_m = Some(s.min_gap_m.map_or(g, |m: f64| m.min(g)));
        }
        s.final_gap_m = rec.gap_m;
        let png = rec.mode.mode == Mode::Png;
        if png && prev_mode.mode == Mode::Png && prev_mode.png_phase == PngPhase::Pulse && rec.mode.png_phase == PngPhase::Glide {
            s.png_cycles += 1;
        }
        if png && rec.mode.png_phase == PngPhase::Glide {
            s.glide_steps += 1;
            if rec.regen_active {
                s.glide_regen_steps += 1;
            }
        }
        if rec.regime == Some(Regime::Brake) {
            s.brake_steps += 1;
        }
        if rec.regen_active {
            s.regen_steps += 1;
        }
        if rec.hydraulic_torque_nm > 0.0 {
            s.hydraulic_steps += 1;
        }
        if self.keep {
            self.records.push(rec);
        }
    }

    fn finish(self, scenario: &str, dt: f64, regen: bool) -> SimTrace {
        SimTrace {
            scenario: scenario.to_string(),
            dt_s: dt,
            regen_enabled: regen,
            records: self.records,
            summary: self.summary,
        }
    }
}

fn check_dt(dt: f64) -> Result<(), SimError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(SimError::InvalidStep(dt))
    }
}

fn record(
    t: f64,
    state: &PlantState,
    cmd: Option<&ControlCommand>,
    mode: &ModeState,
    out: Option<&crate::plant::StepOutput>,
    lead: Option<&LeadInfo>,
    v_set: f64,
) -> TraceRecord {
    let pt = out.map(|o| o.powertrain).unwrap_or_default();
    TraceRecord {
        t_s: t,
        x_m: state.position_m,
        v_ms: state.speed_ms,
        a_des_ms2: cmd.map_or(0.0, |c| c.a_des_ms2),
        regime: cmd.map(|c| c.regime),
        mode: *mode,
        gear: state.gear,
        motor_torque_nm: pt.motor_torque_nm,
        motor_power_w: pt.motor_power_w,
        current_a: state.battery.last_current_a,
        soc: state.battery.soc,
        hydraulic_torque_nm: pt.hydraulic_torque_nm,
        regen_active: pt.regen_active,
        gap_m: lead.map(|l| l.distance_m),
        lead_speed_ms: lead.map(|l| l.lead_speed_ms),
        set_speed_ms: v_set,
    }
}

/// Run a scenario closed loop and return its trace.
pub fn run_scenario(s: &Scenario, cfg: &Config, opts: &SimOptions) -> Result<SimTrace, SimError> {
    run_inner(s, cfg, opts, None)
}

/// Closed-loop run that also returns the command issued at every step.
pub fn run_scenario_with_commands(
    s: &Scenario,
    cfg: &Config,
    opts: &SimOptions,
) -> Result<(SimTrace, Vec<ControlCommand>), SimError> {
    let mut cmds = Vec::new();
    let trace = run_inner(s, cfg, opts, Some(&mut cmds))?;
    Ok((trace, cmds))
}

fn run_inner(
    s: &Scenario,
    cfg: &Config,
    opts: &SimOptions,
    mut cmds_out: Option<&mut Vec<ControlCommand>>,
) -> Result<SimTrace, SimError> {
    s.validate()?;
    let dt = opts.dt_s;
    check_dt(dt)?;
    let plant = Plant::new(cfg, s.regen_enabled);
    let ctl = Controller::new(&cfg.controller, &cfg.vehicle, s.cruise_pref, s.png);
    let mut state = plant.initial_state(s.ego_initial_position_m, s.ego_initial_speed_ms);
    let mut leader = s.leader.as_ref().map(|l| Leader {
        position_m: l.initial_position_m,
        speed: l.speed_profile.clone(),
        t0: 0.0,
    });
    let mut cut_in = s.cut_in;
    let apply_cut_in = |t: f64, ego_x: f64, leader: &mut Option<Leader>, cut_in: &mut Option<CutIn>| {
        if let Some(c) = *cut_in {
            if t >= c.time_s - 1e-9 {
                *leader = Some(Leader {
                    position_m: ego_x + c.gap_m,
                    speed: Curve::new(vec![(0.0, c.speed_ms)]).expect("finite speed"),
                    t0: t,
                });
                *cut_in = None;
            }
        }
    };
    apply_cut_in(0.0, state.position_m, &mut leader, &mut cut_in);

    let lead_at = |leader: &Option<Leader>, t: f64, x: f64| leader.as_ref().map(|l| l.info(t, x));
    let lead0 = lead_at(&leader, 0.0, state.position_m);
    let mut mode = ctl.initial_state(&lead0.unwrap_or_else(LeadInfo::none), state.speed_ms, s.set_speed_ms(0.0));
    let mut rec = Recorder::new(
        opts.record_trace,
        record(0.0, &state, None, &mode, None, lead0.as_ref(), s.set_speed_ms(0.0)),
    );

    let max_steps = match s.termination {
        Termination::Duration(d) => (d / dt).round() as usize,
        Termination::Distance(_) => (MAX_SIM_TIME_S / dt).ceil() as usize,
    };
    let mut k = 0usize;
    loop {
        if let Termination::Distance(limit) = s.termination {
            if state.position_m >= limit {
                break;
            }
        }
        if k == max_steps {
            if let Termination::Distance(_) = s.termination {
                return Err(SimError::Stalled(MAX_SIM_TIME_S));
            }
            break;
        }
        let t = k as f64 * dt;
        let lead = lead_at(&leader, t, state.position_m).unwrap_or_else(LeadInfo::none);
        let cmd = ctl.step(&mode, &lead, &state, s.set_speed_ms(t), dt);
        let out = match plant.step(&state, &cmd, dt) {
            Ok(o) => o,
            Err(source) => {
                return Err(SimError::Plant {
                    time_s: t,
                    source,
                    partial: Box::new(rec.finish(&s.name, dt, s.regen_enabled)),
                })
            }
        };
        if let Some(l) = leader.as_mut() {
            l.position_m += l.speed_at(t) * dt;
        }
        k += 1;
        let t_next = k as f64 * dt;
        state = PlantState {
            elapsed_s: t_next,
            ..out.state
        };
        apply_cut_in(t_next, state.position_m, &mut leader, &mut cut_in);
        let lead_next = lead_at(&leader, t_next, state.position_m);
        let row = record(t_next, &state, Some(&cmd), &cmd.mode, Some(&out), lead_next.as_ref(), s.set_speed_ms(t_next));
        rec.push(row, &mode, dt);
        mode = cmd.mode;
        if let Some(v) = cmds_out.as_deref_mut() {
            v.push(cmd);
        }
    }
    Ok(rec.finish(&s.name, dt, s.regen_enabled))
}

/// Drive the plant open loop with a recorded command sequence.
///
/// Used to compare braking strategies on identical commands: kinematics match
/// the recording and only the energy flow differs.
pub fn replay_commands(
    s: &Scenario,
    commands: &[ControlCommand],
    cfg: &Config,
    opts: &SimOptions,
) -> Result<SimTrace, SimError> {
    s.validate()?;
    let dt = opts.dt_s;
    check_dt(dt)?;
    if let Termination::Duration(d) = s.termination {
        let expected = (d / dt).round() as usize;
        if expected != commands.len() {
            return Err(SimError::ReplayLength {
                expected,
                got: commands.len(),
            });
        }
    }
    let plant = Plant::new(cfg, s.regen_enabled);
    let mut state = plant.initial_state(s.ego_initial_position_m, s.ego_initial_speed_ms);
    let initial_mode = commands.first().map(|c| c.mode).unwrap_or_else(ModeState::cruise_control);
    let mut rec = Recorder::new(
        opts.record_trace,
        record(0.0, &state, None, &initial_mode, None, None, s.set_speed_ms(0.0)),
    );
    let mut prev_mode = initial_mode;
    for (k, cmd) in commands.iter().enumerate() {
        let t = k as f64 * dt;
        let out = plant.step(&state, cmd, dt).map_err(|source| SimError::Plant {
            time_s: t,
            source,
            partial: Box::new(SimTrace {
                scenario: s.name.clone(),
                dt_s: dt,
                regen_enabled: s.regen_enabled,
                records: Vec::new(),
                summary: TraceSummary::default(),
            }),
        })?;
        let t_next = (k + 1) as f64 * dt;
        state = PlantState {
            elapsed_s: t_next,
            ..out.state
        };
        rec.push(
            record(t_next, &state, Some(cmd), &cmd.mode, Some(&out), None, s.set_speed_ms(t_next)),
            &prev_mode,
            dt,
        );
        prev_mode = cmd.mode;
    }
    Ok(rec.finish(&s.name, dt, s.regen_enabled))
}

/// Track a drive cycle closed loop with or without regenerative braking.
pub fn run_drive_cycle(cycle: &DriveCycle, regen: bool, cfg: &Config, opts: &SimOptions) -> Result<SimTrace, SimError> {
    run_scenario(&Scenario::drive_cycle(cycle.clone(), regen), cfg, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrakingComparison {
    pub regen: SimTrace,
    pub hydraulic: SimTrace,
    /// True when the hydraulic run replayed the regen run's commands.
    pub replayed: bool,
}

impl BrakingComparison {
    /// Relative reduction of SOC cost obtained by regenerative braking.
    pub fn saving(&self) -> f64 {
        let h = self.hydraulic.soc_cost();
        if h == 0.0 {
            0.0
        } else {
            (h - self.regen.soc_cost()) / h
        }
    }
}

/// Regen-on versus hydraulic-only over a drive cycle.
///
/// By default the hydraulic run replays the regen run's command sequence;
/// `closed_loop` instead re-closes the loop for both.
pub fn compare_braking(
    cycle: &DriveCycle,
    cfg: &Config,
    opts: &SimOptions,
    closed_loop: bool,
) -> Result<BrakingComparison, SimError> {
    let on = Scenario::drive_cycle(cycle.clone(), true);
    let off = Scenario::drive_cycle(cycle.clone(), false);
    if closed_loop {
        return Ok(BrakingComparison {
            regen: run_scenario(&on, cfg, opts)?,
            hydraulic: run_scenario(&off, cfg, opts)?,
            replayed: false,
        });
    }
    let (regen, cmds) = run_scenario_with_commands(&on, cfg, opts)?;
    let hydraulic = replay_commands(&off, &cmds, cfg, opts)?;
    Ok(BrakingComparison {
        regen,
        hydraulic,
        replayed: true,
    })
}

/// SOC spent over the run.
pub fn soc_cost(trace: &SimTrace) -> f64 {
    trace.summary.initial_soc - trace.summary.final_soc
}

/// Relative saving of the PnG trip over the CC trip; both must cover the same distance.
pub fn compare_png_cc(png: &SimTrace, cc: &SimTrace) -> Result<f64, SimError> {
    let (a, b) = (png.summary.distance_m, cc.summary.distance_m);
    if (a - b).abs() > 1e-3 * a.max(b).max(1.0) {
        return Err(SimError::MismatchedDistance { png_m: a, cc_m: b });
    }
    let cc_cost = soc_cost(cc);
    if cc_cost == 0.0 {
        return Ok(0.0);
    }
    Ok((cc_cost - soc_cost(png)) / cc_cost)
}

pub const TRACE_HEADER: [&str; 15] = [
    "t_s", "x_m", "v_ms", "a_des_ms2", "regime", "mode", "png_phase", "gear", "T_m_Nm", "P_m_W", "I_b_A", "soc",
    "T_hb_Nm", "d_inter_m", "v_lead_ms",
];

/// Write the trace as CSV with the fixed column set.
pub fn write_trace_csv<W: Write>(trace: &SimTrace, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &trace.records {
        let phase = match r.mode.mode {
            Mode::Png => r.mode.png_phase.label(),
            _ => "",
        };
        w.write_record([
            r.t_s.to_string(),
            r.x_m.to_string(),
            r.v_ms.to_string(),
            r.a_des_ms2.to_string(),
            r.regime.map(Regime::label).unwrap_or_default().to_string(),
            r.mode.label().to_string(),
            phase.to_string(),
            r.gear.to_string(),
            r.motor_torque_nm.to_string(),
            r.motor_power_w.to_string(),
            r.current_a.to_string(),
            r.soc.to_string(),
            r.hydraulic_torque_nm.to_string(),
            opt(r.gap_m),
            opt(r.lead_speed_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}
