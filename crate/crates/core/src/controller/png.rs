use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ModeState, PngPhase};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PngParamsError {
    #[error("pulse acceleration a_x1 = {0} must lie in (0, 2] m/s²")]
    Pulse(f64),
    #[error("glide acceleration a_x2 = {0} must lie in [-2, 0) m/s²")]
    Glide(f64),
    #[error("base speed {v_c_kmh} km/h with band {band_kmh} km/h must leave a positive lower bound")]
    Band { v_c_kmh: f64, band_kmh: f64 },
}

/// Pulse-and-glide tuning: accelerate at `a_x1` to `v_c + band`, then glide at
/// `a_x2` down to `v_c - band`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PngParams {
    pub a_x1: f64,
    pub a_x2: f64,
    pub v_c_kmh: f64,
    pub band_kmh: f64,
}

impl PngParams {
    pub fn new(a_x1: f64, a_x2: f64, v_c_kmh: f64, band_kmh: f64) -> Result<Self, PngParamsError> {
        if !(a_x1 > 0.0 && a_x1 <= 2.0) {
            return Err(PngParamsError::Pulse(a_x1));
        }
        if !(-2.0..0.0).contains(&a_x2) {
            return Err(PngParamsError::Glide(a_x2));
        }
        if !(band_kmh > 0.0 && v_c_kmh - band_kmh > 0.0) {
            return Err(PngParamsError::Band { v_c_kmh, band_kmh });
        }
        Ok(Self {
            a_x1,
            a_x2,
            v_c_kmh,
            band_kmh,
        })
    }

    pub fn v_c_ms(&self) -> f64 {
        self.v_c_kmh / 3.6
    }

    pub fn upper_ms(&self) -> f64 {
        (self.v_c_kmh + self.band_kmh) / 3.6
    }

    pub fn lower_ms(&self) -> f64 {
        (self.v_c_kmh - self.band_kmh) / 3.6
    }
}

/// Pulse below the base speed, glide at or above it.
pub fn png_initial_phase(v_real: f64, v_c: f64) -> PngPhase {
    if v_real < v_c {
        PngPhase::Pulse
    } else {
        PngPhase::Glide
    }
}

/// Advance the pulse/glide machine by one step and return the commanded acceleration.
pub fn png_step(state: &ModeState, v_real: f64, png: &PngParams) -> (ModeState, f64) {
    let phase = match state.png_phase {
        PngPhase::Pulse if v_real >= png.upper_ms() => PngPhase::Glide,
        PngPhase::Glide if v_real <= png.lower_ms() => PngPhase::Pulse,
        p => p,
    };
    let a = match phase {
        PngPhase::Pulse => png.a_x1,
        PngPhase::Glide => png.a_x2,
    };
    (
        ModeState {
            png_phase: phase,
            ..*state
        },
        a,
    )
}

#[cfg(test)]
mod tests {
    use super::super::Mode;
    use super::*;

    fn params() -> PngParams {
        PngParams::new(0.6, -0.05, 30.0, 5.0).unwrap()
    }

    fn in_phase(phase: PngPhase) -> ModeState {
        ModeState {
            png_phase: phase,
            ..ModeState::new(Mode::Png)
        }
    }

    #[test]
    fn pulse_flips_at_upper_bound() {
        let (s, a) = png_step(&in_phase(PngPhase::Pulse), 35.01 / 3.6, &params());
        assert_eq!(s.png_phase, PngPhase::Glide);
        assert_eq!(a, -0.05);
    }

    #[test]
    fn glide_flips_at_lower_bound() {
        let (s, a) = png_step(&in_phase(PngPhase::Glide), 24.99 / 3.6, &params());
        assert_eq!(s.png_phase, PngPhase::Pulse);
        assert_eq!(a, 0.6);
    }

    #[test]
    fn inside_band_keeps_phase() {
        for phase in [PngPhase::Pulse, PngPhase::Glide] {
            let (s, _) = png_step(&in_phase(phase), 31.0 / 3.6, &params());
            assert_eq!(s.png_phase, phase);
        }
    }

    #[test]
    fn initial_phase_by_speed() {
        assert_eq!(png_initial_phase(8.0, 30.0 / 3.6), PngPhase::Pulse);
        assert_eq!(png_initial_phase(30.0 / 3.6, 30.0 / 3.6), PngPhase::Glide);
    }

    #[test]
    fn parameter_ranges_enforced() {
        assert!(PngParams::new(0.0, -0.1, 30.0, 5.0).is_err());
        assert!(PngParams::new(2.5, -0.1, 30.0, 5.0).is_err());
        assert!(PngParams::new(1.0, 0.0, 30.0, 5.0).is_err());
        assert!(PngParams::new(1.0, -2.1, 30.0, 5.0).is_err());
        assert!(PngParams::new(1.0, -0.1, 5.0, 5.0).is_err());
        assert!(PngParams::new(2.0, -2.0, 30.0, 5.0).is_ok());
    }
}
