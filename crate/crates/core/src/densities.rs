//! Piecewise-constant initial temperature profiles.
//!
//! Every profile is a step function on a finite partition of `[0, inf)` and
//! carries its exact cumulative distribution, so the initial jump scan and
//! inverse-CDF sampling never touch quadrature.

use serde::{Deserialize, Serialize};

use crate::error::DensityError;

/// Mass tolerance after normalization.
pub const MASS_TOL: f64 = 1e-12;

/// A nonnegative, unit-mass step function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityData", into = "DensityData")]
pub struct Density {
    breaks: Vec<f64>,
    values: Vec<f64>,
    /// CDF evaluated at each break.
    cumulative: Vec<f64>,
    /// Factor applied to the caller's values to reach unit mass.
    scale: f64,
}

/// Wire form: `{"breaks": [...], "values": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityData {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl TryFrom<DensityData> for Density {
    type Error = DensityError;

    fn try_from(data: DensityData) -> Result<Self, Self::Error> {
        Density::piecewise_constant(data.breaks, data.values)
    }
}

impl From<Density> for DensityData {
    fn from(d: Density) -> Self {
        DensityData {
            breaks: d.breaks,
            values: d.values,
        }
    }
}

impl Density {
    /// Builds a step density and rescales it to unit mass. The applied
    /// factor is available through [`Density::scale`].
    pub fn piecewise_constant(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self, DensityError> {
        if breaks.len() < 2 || values.len() + 1 != breaks.len() {
            return Err(DensityError::LengthMismatch {
                breaks: breaks.len(),
                expected: breaks.len().saturating_sub(1).max(1),
                got: values.len(),
            });
        }
        if !breaks[0].is_finite() || breaks[0] < 0.0 {
            return Err(DensityError::NegativeSupport(breaks[0]));
        }
        for (i, w) in breaks.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(DensityError::NonMonotoneBreaks {
                    index: i + 1,
                    value: w[1],
                });
            }
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(DensityError::InvalidValue { index: i, value: v });
            }
        }
        let mass: f64 = values
            .iter()
            .zip(breaks.windows(2))
            .map(|(v, w)| v * (w[1] - w[0]))
            .sum();
        if !(mass > 0.0) {
            return Err(DensityError::ZeroMass);
        }
        let scale = if (mass - 1.0).abs() <= MASS_TOL {
            1.0
        } else {
            1.0 / mass
        };
        let values: Vec<f64> = values.into_iter().map(|v| v * scale).collect();
        let mut cumulative = Vec::with_capacity(breaks.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for (v, w) in values.iter().zip(breaks.windows(2)) {
            acc += v * (w[1] - w[0]);
            cumulative.push(acc);
        }
        Ok(Density {
            breaks,
            values,
            cumulative,
            scale,
        })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Normalization factor that was applied at construction.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Values as supplied by the caller, before normalization.
    pub fn unscaled_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.scale).collect()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Density value with left-closed, right-open intervals.
    pub fn pdf(&self, x: f64) -> f64 {
        match self.interval_of(x) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    /// Exact CDF: the integral of the density over `(-inf, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return self.mass();
        }
        let i = self.interval_of(x).expect("x inside support");
        self.cumulative[i] + self.values[i] * (x - self.breaks[i])
    }

    /// Mean density over `[a, b]`.
    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        (self.cdf(b) - self.cdf(a)) / (b - a)
    }

    /// Smallest `x` with `cdf(x) >= p`, for `p` in `[0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, self.mass());
        for i in 0..self.values.len() {
            let v = self.values[i];
            if v > 0.0 && p <= self.cumulative[i + 1] {
                return (self.breaks[i] + (p - self.cumulative[i]) / v).min(self.breaks[i + 1]);
            }
        }
        self.support().1
    }

    fn interval_of(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.support();
        if !(x >= lo && x < hi) {
            return None;
        }
        // partition_point gives the first break strictly greater than x
        let k = self.breaks.partition_point(|&b| b <= x);
        Some(k - 1)
    }

    /// Pointwise check of `u0(x) <= 1/alpha - c x^n` on `(0, delta)`,
    /// evaluated at both ends of every interval meeting `(0, delta)`.
    pub fn satisfies_power_gap(&self, alpha: f64, c: f64, n: u32, delta: f64) -> bool {
        let bound = |x: f64| 1.0 / alpha - c * x.powi(n as i32);
        self.breaks
            .windows(2)
            .zip(&self.values)
            .filter(|(w, _)| w[0] < delta)
            .all(|(w, &v)| {
                let right = w[1].min(delta);
                // the curve is decreasing, so its infimum on the cell is at the right end
                v <= bound(right) + 1e-15 && v <= bound(w[0].max(0.0)) + 1e-15
            })
    }
}

/// Step under-approximation of `x -> 1/alpha - c x^n` on `(0, delta)` using
/// `steps` equal cells, each valued at the curve's minimum on the cell,
/// followed by a tail profile starting at or after `delta`.
pub fn power_gap_density(
    alpha: f64,
    c: f64,
    n: u32,
    delta: f64,
    steps: usize,
    tail_breaks: &[f64],
    tail_values: &[f64],
) -> Result<Density, DensityError> {
    if !(alpha > 0.0) {
        return Err(DensityError::Parameter(format!("alpha = {alpha} must be > 0")));
    }
    if !(c > 0.0) {
        return Err(DensityError::Parameter(format!("c = {c} must be > 0")));
    }
    if !(delta > 0.0) {
        return Err(DensityError::Parameter(format!("delta = {delta} must be > 0")));
    }
    if n < 1 || steps < 1 {
        return Err(DensityError::Parameter("n and steps must be >= 1".into()));
    }
    let curve = |x: f64| 1.0 / alpha - c * x.powi(n as i32);
    if curve(delta) < 0.0 {
        return Err(DensityError::Parameter(format!(
            "1/alpha - c*delta^n = {} is negative",
            curve(delta)
        )));
    }
    if tail_breaks.len() != tail_values.len() + usize::from(!tail_breaks.is_empty()) {
        return Err(DensityError::LengthMismatch {
            breaks: tail_breaks.len(),
            expected: tail_breaks.len().saturating_sub(1),
            got: tail_values.len(),
        });
    }
    if let Some(&first) = tail_breaks.first() {
        if first < delta {
            return Err(DensityError::Parameter(format!(
                "tail starts at {first}, inside the gap (0, {delta})"
            )));
        }
    }
    let h = delta / steps as f64;
    let mut breaks: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
    breaks[steps] = delta;
    let mut values: Vec<f64> = (1..=steps).map(|k| curve(breaks[k])).collect();
    append_tail(&mut breaks, &mut values, tail_breaks, tail_values);
    Density::piecewise_constant(breaks, values)
}

/// Truncated oscillatory profile: `alpha1` on `[a_{2n}, a_{2n-1})` and
/// `alpha2` on `[a_{2n+1}, a_{2n})` for `n = 1..=n_levels`, where
/// `a_{2n-1} = r^{n-1} a1`, `a_{2n} = p r^{n-1} a1` and `r = p q`. The gap
/// below the deepest level is filled with `alpha1`.
#[allow(clippy::too_many_arguments)]
pub fn oscillatory_density(
    alpha1: f64,
    alpha2: f64,
    a1: f64,
    p: f64,
    q: f64,
    n_levels: usize,
    tail_breaks: &[f64],
    tail_values: &[f64],
) -> Result<Density, DensityError> {
    if !(alpha1 > 0.0 && alpha1 < 1.0 && alpha2 > 1.0 && alpha2.is_finite()) {
        return Err(DensityError::Parameter(format!(
            "need 0 < alpha1 < 1 < alpha2, got alpha1 = {alpha1}, alpha2 = {alpha2}"
        )));
    }
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return Err(DensityError::Parameter(format!("p = {p}, q = {q} must lie in (0, 1)")));
    }
    if !(a1 > 0.0) || n_levels == 0 {
        return Err(DensityError::Parameter(format!(
            "need a1 > 0 and n_levels >= 1, got a1 = {a1}, n_levels = {n_levels}"
        )));
    }
    if let Some(&first) = tail_breaks.first() {
        if first < a1 {
            return Err(DensityError::Parameter(format!(
                "tail starts at {first}, inside the oscillatory range (0, {a1})"
            )));
        }
    }
    let points = oscillation_points(a1, p, q, n_levels);
    // points[k] = a_{k+1}; walk from the innermost level outwards
    let innermost = points[2 * n_levels];
    let mut breaks = vec![0.0, innermost];
    let mut values = vec![alpha1];
    for n in (1..=n_levels).rev() {
        let a_odd = points[2 * n - 2]; // a_{2n-1}
        let a_even = points[2 * n - 1]; // a_{2n}
        breaks.push(a_even);
        values.push(alpha2);
        breaks.push(a_odd);
        values.push(alpha1);
    }
    append_tail(&mut breaks, &mut values, tail_breaks, tail_values);
    Density::piecewise_constant(breaks, values)
}

/// The points `a_1, ..., a_{2 n_levels + 1}` of the oscillatory family.
pub fn oscillation_points(a1: f64, p: f64, q: f64, n_levels: usize) -> Vec<f64> {
    let r = p * q;
    (1..=2 * n_levels + 1)
        .map(|k| {
            if k % 2 == 1 {
                r.powi(((k - 1) / 2) as i32) * a1
            } else {
                p * r.powi((k / 2 - 1) as i32) * a1
            }
        })
        .collect()
}

fn append_tail(breaks: &mut Vec<f64>, values: &mut Vec<f64>, tail_breaks: &[f64], tail_values: &[f64]) {
    if tail_breaks.is_empty() {
        return;
    }
    let end = *breaks.last().unwrap();
    if tail_breaks[0] > end {
        breaks.push(tail_breaks[0]);
        values.push(0.0);
    }
    breaks.extend_from_slice(&tail_breaks[1..]);
    values.extend_from_slice(tail_values);
}
