use std::path::{Path, PathBuf};

use thiserror::Error;

use super::curve::lookup_clamped;

#[derive(Debug, Error)]
pub enum CycleError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("drive cycle has no samples")]
    Empty,
    #[error("line {line}: time {time_s} s does not increase over the previous sample")]
    NonMonotoneTime { line: usize, time_s: f64 },
    #[error("line {line}: negative speed {speed_kmh} km/h")]
    NegativeSpeed { line: usize, speed_kmh: f64 },
    #[error("drive cycle must start at t = 0 (first sample at {0} s)")]
    NonZeroStart(f64),
}

/// A target speed profile sampled at increasing times, starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveCycle {
    pub name: String,
    times_s: Vec<f64>,
    speeds_kmh: Vec<f64>,
}

impl DriveCycle {
    pub fn new(name: impl Into<String>, samples: Vec<(f64, f64)>) -> Result<Self, CycleError> {
        if samples.is_empty() {
            return Err(CycleError::Empty);
        }
        for (i, &(t, v)) in samples.iter().enumerate() {
            if i > 0 && t <= samples[i - 1].0 {
                return Err(CycleError::NonMonotoneTime { line: i + 1, time_s: t });
            }
            if v < 0.0 {
                return Err(CycleError::NegativeSpeed { line: i + 1, speed_kmh: v });
            }
        }
        if samples[0].0 != 0.0 {
            return Err(CycleError::NonZeroStart(samples[0].0));
        }
        let (times_s, speeds_kmh) = samples.into_iter().unzip();
        Ok(Self {
            name: name.into(),
            times_s,
            speeds_kmh,
        })
    }

    /// Parse `time_s,speed_kmh` rows; a non-numeric first row is treated as a header.
    pub fn from_csv_str(name: impl Into<String>, text: &str) -> Result<Self, CycleError> {
        let mut samples = Vec::new();
        let mut raw_lines = Vec::new();
        let mut first_row = true;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let is_first = std::mem::replace(&mut first_row, false);
            let mut fields = line.split(',').map(str::trim);
            let (Some(t), Some(v), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(CycleError::Parse {
                    line: idx + 1,
                    reason: "expected two comma-separated columns".into(),
                });
            };
            match (t.parse::<f64>(), v.parse::<f64>()) {
                (Ok(t), Ok(v)) if t.is_finite() && v.is_finite() => {
                    samples.push((t, v));
                    raw_lines.push(idx + 1);
                }
                _ if is_first => {} // header
                _ => {
                    return Err(CycleError::Parse {
                        line: idx + 1,
                        reason: format!("cannot parse `{line}` as numbers"),
                    })
                }
            }
        }
        // Re-map sample indices to file line numbers for error reporting.
        Self::new(name, samples).map_err(|e| match e {
            CycleError::NonMonotoneTime { line, time_s } => CycleError::NonMonotoneTime {
                line: raw_lines[line - 1],
                time_s,
            },
            CycleError::NegativeSpeed { line, speed_kmh } => CycleError::NegativeSpeed {
                line: raw_lines[line - 1],
                speed_kmh,
            },
            other => other,
        })
    }

    /// The bundled New European Driving Cycle.
    pub fn nedc() -> Self {
        Self::from_csv_str("NEDC", super::BUNDLED_NEDC_CSV).expect("bundled NEDC is valid")
    }

    pub fn duration_s(&self) -> f64 {
        self.times_s[self.times_s.len() - 1]
    }

    pub fn max_speed_kmh(&self) -> f64 {
        self.speeds_kmh.iter().copied().fold(0.0, f64::max)
    }

    /// Linearly interpolated target speed in km/h (held at the end values outside the cycle).
    pub fn speed_kmh_at(&self, t: f64) -> f64 {
        lookup_clamped(&self.times_s, &self.speeds_kmh, t)
    }

    pub fn speed_ms_at(&self, t: f64) -> f64 {
        self.speed_kmh_at(t) / 3.6
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times_s.iter().copied().zip(self.speeds_kmh.iter().copied())
    }
}

pub fn load_drive_cycle(path: impl AsRef<Path>) -> Result<DriveCycle, CycleError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CycleError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "cycle".into());
    DriveCycle::from_csv_str(name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_constant_cycle() {
        let c = DriveCycle::from_csv_str("c", "0,50\n10,50").unwrap();
        assert_eq!(c.duration_s(), 10.0);
        assert_eq!(c.speed_kmh_at(0.0), 50.0);
        assert_eq!(c.speed_kmh_at(7.3), 50.0);
        assert_eq!(c.speed_kmh_at(10.0), 50.0);
    }

    #[test]
    fn header_is_optional() {
        let c = DriveCycle::from_csv_str("c", "time_s,speed_kmh\n0,0\n10,36\n").unwrap();
        assert!((c.speed_ms_at(5.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn non_monotone_time_rejected() {
        let err = DriveCycle::from_csv_str("c", "5,30\n0,40").unwrap_err();
        assert!(matches!(err, CycleError::NonMonotoneTime { line: 2, .. }), "{err}");
    }

    #[test]
    fn negative_speed_rejected() {
        let err = DriveCycle::from_csv_str("c", "t,v\n0,0\n1,-3").unwrap_err();
        assert!(matches!(err, CycleError::NegativeSpeed { line: 3, .. }), "{err}");
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(DriveCycle::from_csv_str("c", ""), Err(CycleError::Empty)));
        assert!(matches!(
            DriveCycle::from_csv_str("c", "time_s,speed_kmh\n"),
            Err(CycleError::Empty)
        ));
    }

    #[test]
    fn must_start_at_zero() {
        assert!(matches!(
            DriveCycle::from_csv_str("c", "1,0\n2,5"),
            Err(CycleError::NonZeroStart(_))
        ));
    }

    #[test]
    fn garbage_row_rejected() {
        let err = DriveCycle::from_csv_str("c", "0,0\nabc,1").unwrap_err();
        assert!(matches!(err, CycleError::Parse { line: 2, .. }));
    }

    #[test]
    fn bundled_nedc_shape() {
        let c = DriveCycle::nedc();
        assert_eq!(c.duration_s(), 1180.0);
        assert_eq!(c.max_speed_kmh(), 120.0);
        // urban part repeats every 195 s; EUDC plateau at 120 km/h
        assert_eq!(c.speed_kmh_at(85.0), 32.0);
        assert_eq!(c.speed_kmh_at(85.0 + 3.0 * 195.0), 32.0);
        assert_eq!(c.speed_kmh_at(780.0 + 340.0), 120.0);
        // total distance of the standard cycle is about 11.0 km
        let dist: f64 = c
            .samples()
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) / 3.6 * (w[1].0 - w[0].0))
            .sum();
        assert!((dist - 11_023.0).abs() < 30.0, "{dist}");
    }
}
