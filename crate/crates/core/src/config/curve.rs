//! Piecewise-linear lookup tables used for motor and battery characteristics.

use serde::{Deserialize, Serialize};

use super::ConfigError;

/// A one-dimensional sampled map `x -> y`.
///
/// Samples are kept sorted by strictly increasing `x`. Lookups are linear
/// between samples and clamp to the endpoint values outside the sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct Curve {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Curve {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self, String> {
        if samples.is_empty() {
            return Err("curve has no samples".into());
        }
        if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err("curve samples must be finite".into());
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err("curve sample x values must be strictly increasing".into());
        }
        let (xs, ys) = samples.into_iter().unzip();
        Ok(Self { xs, ys })
    }

    /// Clamped piecewise-linear interpolation.
    pub fn eval(&self, x: f64) -> f64 {
        lookup_clamped(&self.xs, &self.ys, x)
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn min_y(&self) -> f64 {
        self.ys.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_y(&self) -> f64 {
        self.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[1] >= w[0])
    }

    /// Same breakpoints with every value replaced by `f(y)`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|&y| f(y)).collect(),
        }
    }
}

impl TryFrom<Vec<(f64, f64)>> for Curve {
    type Error = String;

    fn try_from(samples: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Curve::new(samples)
    }
}

impl From<Curve> for Vec<(f64, f64)> {
    fn from(curve: Curve) -> Self {
        curve.xs.into_iter().zip(curve.ys).collect()
    }
}

/// Clamped piecewise-linear interpolation over parallel sample slices.
///
/// `xs` must be nonempty and strictly increasing.
pub fn lookup_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert!(!xs.is_empty() && xs.len() == ys.len());
    let last = xs.len() - 1;
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[last] {
        return ys[last];
    }
    // first index with xs[i] > x; guaranteed in 1..=last
    let hi = xs.partition_point(|&s| s <= x);
    let lo = hi - 1;
    let frac = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + frac * (ys[hi] - ys[lo])
}

/// A two-dimensional grid map, bilinear inside the grid and clamped outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct Grid2 {
    rows: Vec<f64>,
    cols: Vec<f64>,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    speeds_rads: Vec<f64>,
    torques_nm: Vec<f64>,
    efficiency: Vec<Vec<f64>>,
}

impl Grid2 {
    pub fn new(rows: Vec<f64>, cols: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self, String> {
        if rows.is_empty() || cols.is_empty() {
            return Err("grid axes must be nonempty".into());
        }
        for axis in [&rows, &cols] {
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err("grid axes must be strictly increasing".into());
            }
        }
        if values.len() != rows.len() || values.iter().any(|r| r.len() != cols.len()) {
            return Err(format!(
                "grid values must be {} rows of {} entries",
                rows.len(),
                cols.len()
            ));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err("grid values must be finite".into());
        }
        Ok(Self { rows, cols, values })
    }

    pub fn eval(&self, row_x: f64, col_x: f64) -> f64 {
        let (r0, r1, rf) = bracket(&self.rows, row_x);
        let (c0, c1, cf) = bracket(&self.cols, col_x);
        let top = self.values[r0][c0] + cf * (self.values[r0][c1] - self.values[r0][c0]);
        let bottom = self.values[r1][c0] + cf * (self.values[r1][c1] - self.values[r1][c0]);
        top + rf * (bottom - top)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }
}

fn bracket(axis: &[f64], x: f64) -> (usize, usize, f64) {
    let last = axis.len() - 1;
    if x <= axis[0] {
        return (0, 0, 0.0);
    }
    if x >= axis[last] {
        return (last, last, 0.0);
    }
    let hi = axis.partition_point(|&s| s <= x);
    let lo = hi - 1;
    (lo, hi, (x - axis[lo]) / (axis[hi] - axis[lo]))
}

impl TryFrom<GridRepr> for Grid2 {
    type Error = String;

    fn try_from(repr: GridRepr) -> Result<Self, Self::Error> {
        Grid2::new(repr.speeds_rads, repr.torques_nm, repr.efficiency)
    }
}

impl From<Grid2> for GridRepr {
    fn from(grid: Grid2) -> Self {
        GridRepr {
            speeds_rads: grid.rows,
            torques_nm: grid.cols,
            efficiency: grid.values,
        }
    }
}

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}
