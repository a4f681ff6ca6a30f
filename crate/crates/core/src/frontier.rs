//! Sampled frontier paths and their jump registry.

use serde::{Deserialize, Serialize};

/// One registered discontinuity of the frontier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub t: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub mass: f64,
}

impl JumpRecord {
    pub fn size(&self) -> f64 {
        self.lambda_plus - self.lambda_minus
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lambda_minus && x < self.lambda_plus
    }
}

/// A non-decreasing frontier sampled on a time grid, with every step-level
/// increment above the registry threshold kept in `jumps`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontierPath {
    pub times: Vec<f64>,
    pub lambda: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
    /// Step size of the solver that produced the path.
    pub dt: f64,
    pub alpha: f64,
}

impl FrontierPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda.first().copied().unwrap_or(0.0)
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Right-continuous evaluation: the last sample at or before `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t + 1e-12);
        if k == 0 {
            self.lambda0()
        } else {
            self.lambda[k - 1]
        }
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.lambda.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,lambda\n");
        for (t, l) in self.times.iter().zip(&self.lambda) {
            out.push_str(&format!("{t},{l}\n"));
        }
        out
    }

    pub fn jumps_json(&self) -> String {
        serde_json::to_string_pretty(&self.jumps).expect("jump records serialize")
    }

    /// Parses the `t,lambda` CSV export; the registry is read separately.
    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut path = FrontierPath::default();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let t: f64 = rec.get(0).ok_or("missing t")?.trim().parse().map_err(|e| format!("{e}"))?;
            let l: f64 = rec
                .get(1)
                .ok_or("missing lambda")?
                .trim()
                .parse()
                .map_err(|e| format!("{e}"))?;
            path.times.push(t);
            path.lambda.push(l);
        }
        if path.times.len() > 1 {
            path.dt = path.times[1] - path.times[0];
        }
        Ok(path)
    }
}

/// Builds a [`FrontierPath`] step by step, merging runs of consecutive
/// above-threshold increments into one jump record.
#[derive(Clone, Debug)]
pub struct PathRecorder {
    path: FrontierPath,
    threshold: f64,
    sample_every: usize,
    steps: usize,
    open: Option<JumpRecord>,
}

impl PathRecorder {
    pub fn new(alpha: f64, dt: f64, threshold: f64, sample_every: usize) -> Self {
        PathRecorder {
            path: FrontierPath {
                dt,
                alpha,
                ..Default::default()
            },
            threshold,
            sample_every: sample_every.max(1),
            steps: 0,
            open: None,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Records the state at `t = 0`, after the initial jump.
    pub fn start(&mut self, lambda_before: f64, lambda0: f64) {
        self.path.times.push(0.0);
        self.path.lambda.push(lambda0);
        if lambda0 - lambda_before > self.threshold {
            self.path.jumps.push(self.record(0.0, lambda_before, lambda0));
        }
    }

    fn record(&self, t: f64, a: f64, b: f64) -> JumpRecord {
        let mass = if self.path.alpha > 0.0 {
            (b - a) / self.path.alpha
        } else {
            0.0
        };
        JumpRecord {
            t,
            lambda_minus: a,
            lambda_plus: b,
            mass,
        }
    }

    /// Records one solver step ending at time `t`. Returns whether the
    /// increment counted as a jump.
    pub fn step(&mut self, t: f64, lambda_before: f64, lambda_after: f64) -> bool {
        self.steps += 1;
        let jumped = lambda_after - lambda_before > self.threshold;
        if jumped {
            match self.open.as_mut() {
                Some(rec) => {
                    rec.lambda_plus = lambda_after;
                    rec.mass = if self.path.alpha > 0.0 {
                        (rec.lambda_plus - rec.lambda_minus) / self.path.alpha
                    } else {
                        0.0
                    };
                }
                None => self.open = Some(self.record(t, lambda_before, lambda_after)),
            }
        } else if let Some(rec) = self.open.take() {
            self.path.jumps.push(rec);
        }
        if self.steps.is_multiple_of(self.sample_every) {
            self.path.times.push(t);
            self.path.lambda.push(lambda_after);
        }
        jumped
    }

    pub fn finish(mut self) -> FrontierPath {
        if let Some(rec) = self.open.take() {
            self.path.jumps.push(rec);
        }
        self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consecutive_jump_steps_merge() {
        let mut rec = PathRecorder::new(1.0, 0.1, 0.05, 1);
        rec.start(0.0, 0.0);
        rec.step(0.1, 0.0, 0.01);
        rec.step(0.2, 0.01, 0.2);
        rec.step(0.3, 0.2, 0.4);
        rec.step(0.4, 0.4, 0.41);
        let path = rec.finish();
        assert_eq!(path.jumps.len(), 1);
        let j = path.jumps[0];
        assert_eq!((j.t, j.lambda_minus, j.lambda_plus), (0.2, 0.01, 0.4));
        assert!((j.mass - 0.39).abs() < 1e-12);
        assert_eq!(path.times.len(), 5);
    }

    #[test]
    fn csv_round_trip() {
        let mut rec = PathRecorder::new(1.0, 0.5, 0.1, 2);
        rec.start(0.0, 0.6);
        for k in 1..=4 {
            rec.step(0.5 * k as f64, 0.6, 0.6);
        }
        let path = rec.finish();
        assert_eq!(path.jumps.len(), 1);
        assert_eq!(path.times, vec![0.0, 1.0, 2.0]);
        let back = FrontierPath::from_csv(&path.to_csv()).unwrap();
        assert_eq!(back.times, path.times);
        assert_eq!(back.lambda, path.lambda);
    }
}
