use std::fmt;
use std::path::Path;

use pgacc_core::config::{load_config, load_drive_cycle, Config, DriveCycle};
use pgacc_core::controller::{desired_distance, PngParams};
use pgacc_core::igpso::{optimize, OptimizerReport, PngFitness, SwarmConfig};
use pgacc_core::scenario::{
    compare_braking, compare_png_cc, run_drive_cycle, run_scenario, Scenario, SimError, SimOptions, SimTrace,
    TraceSummary,
};
use serde::Serialize;
use serde_json::json;

use crate::output::{output_dir, prepare, run_time, write_json, write_trace, RunManifest};
use crate::{AccArgs, CcArgs, Cli, Command, NedcArgs, OptimizeArgs, PngArgs, RegenChoice};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Usage(String),
    Simulation(String),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Simulation(_) | CliError::Output(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration: {m}"),
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Simulation(m) => write!(f, "simulation: {m}"),
            CliError::Output(m) => write!(f, "output: {m}"),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Simulation(e.to_string())
    }
}

struct Context {
    cfg: Config,
    opts: SimOptions,
    manifest: RunManifest,
}

impl Context {
    fn dir(&self) -> &Path {
        &self.manifest.output_dir
    }
}

fn load(cli: &Cli, subcommand: &str, parameters: serde_json::Value) -> Result<Context, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => Config::bundled(),
    };
    if let Some(dt) = cli.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CliError::Usage(format!("--dt must be positive (got {dt})")));
        }
        cfg.simulation.dt_s = dt;
    }
    let when = run_time();
    let dir = output_dir(cli.out.as_deref(), subcommand, &when);
    let opts = SimOptions {
        seed: cli.seed,
        ..SimOptions::new(cfg.simulation.dt_s)
    };
    Ok(Context {
        manifest: RunManifest {
            subcommand: subcommand.to_string(),
            config_path: cli.config.clone(),
            parameters,
            dt_s: cfg.simulation.dt_s,
            seed: cli.seed,
            output_dir: dir,
            timestamp: when.to_rfc3339(),
            version: env!("CARGO_PKG_VERSION"),
        },
        cfg,
        opts,
    })
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Acc(a) => acc(cli, a),
        Command::Nedc(a) => nedc(cli, a),
        Command::Png(a) => png(cli, a),
        Command::Cc(a) => cc(cli, a),
        Command::Optimize(a) => optimize_cmd(cli, a),
    }
}

#[derive(Serialize)]
struct AccSummary<'a> {
    manifest: &'a RunManifest,
    scenario: &'a str,
    min_gap_m: Option<f64>,
    final_gap_m: Option<f64>,
    final_desired_gap_m: Option<f64>,
    final_gap_error_m: Option<f64>,
    /// Time after which the gap stays within 1 m of the desired gap.
    settling_time_s: Option<f64>,
    trace: &'a TraceSummary,
}

fn settling_time(trace: &SimTrace, ctx: &Context) -> Option<f64> {
    let within = |r: &pgacc_core::scenario::TraceRecord| match (r.gap_m, r.lead_speed_ms) {
        (Some(d), Some(v)) => (d - desired_distance(v, &ctx.cfg.controller)).abs() < 1.0,
        _ => false,
    };
    let last_out = trace.records.iter().rposition(|r| !within(r));
    match last_out {
        None => trace.records.first().map(|r| r.t_s),
        Some(i) => trace.records.get(i + 1).map(|r| r.t_s),
    }
}

fn acc(cli: &Cli, a: &AccArgs) -> Result<(), CliError> {
    let ctx = load(cli, "acc", json!({ "scenario": a.scenario }))?;
    let scenario = match a.scenario {
        1 => Scenario::leader_accel(&ctx.cfg),
        _ => Scenario::cut_in(&ctx.cfg),
    };
    let trace = run_scenario(&scenario, &ctx.cfg, &ctx.opts)?;
    let last = trace.records.last();
    let final_desired = last.and_then(|r| r.lead_speed_ms).map(|v| desired_distance(v, &ctx.cfg.controller));
    let summary = AccSummary {
        manifest: &ctx.manifest,
        scenario: &scenario.name,
        min_gap_m: trace.summary.min_gap_m,
        final_gap_m: trace.summary.final_gap_m,
        final_desired_gap_m: final_desired,
        final_gap_error_m: trace.summary.final_gap_m.zip(final_desired).map(|(g, d)| g - d),
        settling_time_s: settling_time(&trace, &ctx),
        trace: &trace.summary,
    };
    prepare(ctx.dir())?;
    write_trace(ctx.dir(), "trace.csv", &trace)?;
    write_json(ctx.dir(), "summary.json", &summary)?;
    println!(
        "{}: final gap {:.2} m (desired {:.2} m), min gap {:.2} m -> {}",
        scenario.name,
        summary.final_gap_m.unwrap_or(f64::NAN),
        final_desired.unwrap_or(f64::NAN),
        summary.min_gap_m.unwrap_or(f64::NAN),
        ctx.dir().display()
    );
    Ok(())
}

fn nedc(cli: &Cli, a: &NedcArgs) -> Result<(), CliError> {
    let params = json!({
        "regen": format!("{:?}", a.regen).to_lowercase(),
        "cycle": a.cycle,
        "closed_loop": a.closed_loop,
    });
    let ctx = load(cli, "nedc", params)?;
    let cycle = match &a.cycle {
        Some(p) => load_drive_cycle(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => DriveCycle::nedc(),
    };
    prepare(ctx.dir())?;
    match a.regen {
        RegenChoice::Both => {
            let cmp = compare_braking(&cycle, &ctx.cfg, &ctx.opts, a.closed_loop)?;
            write_trace(ctx.dir(), "trace_regen.csv", &cmp.regen)?;
            write_trace(ctx.dir(), "trace_hydraulic.csv", &cmp.hydraulic)?;
            write_json(
                ctx.dir(),
                "summary.json",
                &json!({
                    "manifest": ctx.manifest,
                    "replayed": cmp.replayed,
                    "final_soc_regen": cmp.regen.summary.final_soc,
                    "final_soc_hydraulic": cmp.hydraulic.summary.final_soc,
                    "soc_cost_regen": cmp.regen.soc_cost(),
                    "soc_cost_hydraulic": cmp.hydraulic.soc_cost(),
                    "saving": cmp.saving(),
                    "regen": cmp.regen.summary,
                    "hydraulic": cmp.hydraulic.summary,
                }),
            )?;
            println!(
                "{}: final SOC regen {:.4}, hydraulic {:.4}, saving {:.1}% -> {}",
                cycle.name,
                cmp.regen.summary.final_soc,
                cmp.hydraulic.summary.final_soc,
                100.0 * cmp.saving(),
                ctx.dir().display()
            );
        }
        choice => {
            let trace = run_drive_cycle(&cycle, choice == RegenChoice::On, &ctx.cfg, &ctx.opts)?;
            write_trace(ctx.dir(), "trace.csv", &trace)?;
            write_json(
                ctx.dir(),
                "summary.json",
                &json!({ "manifest": ctx.manifest, "soc_cost": trace.soc_cost(), "trace": trace.summary }),
            )?;
            println!(
                "{}: final SOC {:.4} -> {}",
                cycle.name,
                trace.summary.final_soc,
                ctx.dir().display()
            );
        }
    }
    Ok(())
}

fn check_distance(d: f64) -> Result<(), CliError> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--distance must be positive (got {d})")))
    }
}

fn cc_trip(ctx: &Context, speed_kmh: f64, distance: f64, record: bool) -> Result<SimTrace, CliError> {
    let opts = SimOptions {
        record_trace: record,
        ..ctx.opts
    };
    Ok(run_scenario(&Scenario::cc_cruise(speed_kmh, distance), &ctx.cfg, &opts)?)
}

fn png(cli: &Cli, a: &PngArgs) -> Result<(), CliError> {
    check_distance(a.distance)?;
    let params = json!({ "ax1": a.ax1, "ax2": a.ax2, "vc_kmh": a.vc, "band_kmh": a.band, "distance_m": a.distance });
    let ctx = load(cli, "png", params)?;
    let vc = a.vc.unwrap_or(ctx.cfg.controller.png_base_speed_kmh);
    let band = a.band.unwrap_or(ctx.cfg.controller.png_band_kmh);
    let p = PngParams::new(a.ax1, a.ax2, vc, band).map_err(|e| CliError::Usage(e.to_string()))?;
    let trace = run_scenario(&Scenario::png_cruise(p, a.distance), &ctx.cfg, &ctx.opts)?;
    let cc = cc_trip(&ctx, vc, a.distance, false)?;
    let saving = compare_png_cc(&trace, &cc)?;
    prepare(ctx.dir())?;
    write_trace(ctx.dir(), "trace.csv", &trace)?;
    write_json(
        ctx.dir(),
        "summary.json",
        &json!({
            "manifest": ctx.manifest,
            "png": p,
            "soc_cost": trace.soc_cost(),
            "glide_regen_fraction": trace.summary.glide_regen_fraction(),
            "png_cycles": trace.summary.png_cycles,
            "cc_soc_cost": cc.soc_cost(),
            "saving_vs_cc": saving,
            "trace": trace.summary,
        }),
    )?;
    println!(
        "PnG ({}, {}): SOC cost {:.5} (CC {:.5}, saving {:.1}%), regen in glide {:.1}% -> {}",
        p.a_x1,
        p.a_x2,
        trace.soc_cost(),
        cc.soc_cost(),
        100.0 * saving,
        100.0 * trace.summary.glide_regen_fraction(),
        ctx.dir().display()
    );
    Ok(())
}

fn cc(cli: &Cli, a: &CcArgs) -> Result<(), CliError> {
    check_distance(a.distance)?;
    if !(a.speed > 0.0 && a.speed.is_finite()) {
        return Err(CliError::Usage(format!("--speed must be positive (got {})", a.speed)));
    }
    let ctx = load(cli, "cc", json!({ "speed_kmh": a.speed, "distance_m": a.distance }))?;
    let trace = cc_trip(&ctx, a.speed, a.distance, true)?;
    prepare(ctx.dir())?;
    write_trace(ctx.dir(), "trace.csv", &trace)?;
    write_json(
        ctx.dir(),
        "summary.json",
        &json!({ "manifest": ctx.manifest, "soc_cost": trace.soc_cost(), "trace": trace.summary }),
    )?;
    println!(
        "CC {} km/h over {} m: {:.1} s, SOC cost {:.5} -> {}",
        a.speed,
        a.distance,
        trace.summary.duration_s,
        trace.soc_cost(),
        ctx.dir().display()
    );
    Ok(())
}

fn optimize_cmd(cli: &Cli, a: &OptimizeArgs) -> Result<(), CliError> {
    check_distance(a.distance)?;
    let params = json!({
        "iterations": a.iterations,
        "swarm": a.swarm,
        "threshold": a.threshold,
        "distance_m": a.distance,
    });
    let ctx = load(cli, "optimize", params)?;
    let swarm = SwarmConfig {
        swarm_size: a.swarm,
        max_iterations: a.iterations,
        aggregation_threshold: a.threshold,
        ..SwarmConfig::png_default(cli.seed)
    };
    swarm.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let fitness = PngFitness {
        distance_m: a.distance,
        ..PngFitness::new(&ctx.cfg, ctx.opts.dt_s)
    };
    let result = optimize(&swarm, fitness.as_fn()).map_err(|e| CliError::Simulation(e.to_string()))?;
    let report = OptimizerReport::new(&swarm, &result);
    let best = fitness
        .params(&result.best_position)
        .ok_or_else(|| CliError::Simulation("optimizer found no feasible pulse-and-glide setting".into()))?;
    let trace = run_scenario(&Scenario::png_cruise(best, a.distance), &ctx.cfg, &ctx.opts)?;
    let cc = cc_trip(&ctx, fitness.v_c_kmh, a.distance, false)?;
    let saving = compare_png_cc(&trace, &cc)?;
    prepare(ctx.dir())?;
    write_trace(ctx.dir(), "trace.csv", &trace)?;
    write_json(ctx.dir(), "optimizer_report.json", &report)?;
    write_json(
        ctx.dir(),
        "summary.json",
        &json!({
            "manifest": ctx.manifest,
            "best": best,
            "soc_cost": trace.soc_cost(),
            "cc_soc_cost": cc.soc_cost(),
            "saving_vs_cc": saving,
            "glide_regen_fraction": trace.summary.glide_regen_fraction(),
            "optimizer": report,
        }),
    )?;
    println!(
        "best (a_x1, a_x2) = ({:.4}, {:.4}), SOC cost {:.5} vs CC {:.5}, saving {:.1}% -> {}",
        best.a_x1,
        best.a_x2,
        trace.soc_cost(),
        cc.soc_cost(),
        100.0 * saving,
        ctx.dir().display()
    );
    Ok(())
}
