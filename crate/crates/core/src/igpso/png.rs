use std::convert::Infallible;

use crate::config::Config;
use crate::controller::PngParams;
use crate::scenario::{run_scenario, Scenario, SimOptions};

/// Fitness returned for positions that cannot produce a pulse-and-glide trip.
pub const PENALTY_FITNESS: f64 = 1.0;

/// SOC cost of a pulse-and-glide trip as a function of `[a_x1, a_x2]`.
#[derive(Debug, Clone)]
pub struct PngFitness {
    pub cfg: Config,
    pub dt_s: f64,
    pub v_c_kmh: f64,
    pub band_kmh: f64,
    pub distance_m: f64,
}

impl PngFitness {
    /// 5 km trips around the configured base speed and band.
    pub fn new(cfg: &Config, dt_s: f64) -> Self {
        Self {
            cfg: cfg.clone(),
            dt_s,
            v_c_kmh: cfg.controller.png_base_speed_kmh,
            band_kmh: cfg.controller.png_band_kmh,
            distance_m: 5000.0,
        }
    }

    pub fn params(&self, position: &[f64]) -> Option<PngParams> {
        match position {
            [a_x1, a_x2] => PngParams::new(*a_x1, *a_x2, self.v_c_kmh, self.band_kmh).ok(),
            _ => None,
        }
    }

    /// SOC cost, or [`PENALTY_FITNESS`] when the parameters are out of range,
    /// the run fails, or no pulse finishes within the trip.
    pub fn eval(&self, position: &[f64]) -> f64 {
        let Some(png) = self.params(position) else {
            return PENALTY_FITNESS;
        };
        let scenario = Scenario::png_cruise(png, self.distance_m);
        match run_scenario(&scenario, &self.cfg, &SimOptions::summary_only(self.dt_s)) {
            Ok(trace) if trace.summary.png_cycles > 0 => trace.soc_cost(),
            _ => PENALTY_FITNESS,
        }
    }

    /// Adapter for [`super::optimize`].
    pub fn as_fn(&self) -> impl Fn(&[f64]) -> Result<f64, Infallible> + Sync + '_ {
        move |z| Ok(self.eval(z))
    }
}

/// One-shot form of [`PngFitness::eval`].
pub fn png_fitness(position: &[f64], cfg: &Config, dt_s: f64) -> f64 {
    PngFitness::new(cfg, dt_s).eval(position)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_pulse_is_penalized() {
        let c = Config::bundled();
        assert_eq!(png_fitness(&[0.0, -0.1], &c, 0.01), PENALTY_FITNESS);
        assert_eq!(png_fitness(&[0.5, 0.0], &c, 0.01), PENALTY_FITNESS);
        assert_eq!(png_fitness(&[0.5], &c, 0.01), PENALTY_FITNESS);
    }

    #[test]
    fn hard_glide_costs_more_than_cruising() {
        let c = Config::bundled();
        let cc = run_scenario(&Scenario::cc_cruise(30.0, 5000.0), &c, &SimOptions::summary_only(0.01))
            .unwrap()
            .soc_cost();
        let f = png_fitness(&[0.6122, -0.5], &c, 0.01);
        assert!(f > cc && f < PENALTY_FITNESS, "{f} vs {cc}");
    }
}
